//! Canonical text rendering: terms descending under a chosen order,
//! coefficients as reduced `num` or `num/den`, monomials as `x^2*y`.
//! Output re-parses to an equal polynomial.

use std::fmt;

use num_traits::{One, Signed};

use super::{Monomial, MonomialOrder, Polynomial};
use crate::rational::{render_rational, Rational};

fn render_monomial(m: &Monomial, vars: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.exps().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(vars[i].clone()),
            _ => parts.push(format!("{}^{e}", vars[i])),
        }
    }
    parts.join("*")
}

fn render_term(m: &Monomial, c: &Rational, vars: &[String]) -> String {
    let mono = render_monomial(m, vars);
    if mono.is_empty() {
        return render_rational(c);
    }
    if c.is_one() {
        return mono;
    }
    if *c == -Rational::one() {
        return format!("-{mono}");
    }
    format!("{}*{mono}", render_rational(c))
}

impl Polynomial {
    /// Canonical rendering with terms sorted descending under `order`.
    pub fn render(&self, order: &MonomialOrder) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut terms: Vec<(&Monomial, &Rational)> = self.terms().collect();
        terms.sort_by(|(a, _), (b, _)| order.cmp(b, a));
        let vars = self.ring().vars();
        let mut out = String::new();
        for (i, (m, c)) in terms.iter().enumerate() {
            if i == 0 {
                out.push_str(&render_term(m, c, vars));
            } else if c.is_negative() {
                out.push_str(" - ");
                out.push_str(&render_term(m, &-(*c).clone(), vars));
            } else {
                out.push_str(" + ");
                out.push_str(&render_term(m, c, vars));
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&self.ring().default_order()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Ring;

    #[test]
    fn renders_canonically() {
        let r = Ring::new(vec!["x", "y"]).unwrap();
        let parse = |s: &str| crate::parse::parse_polynomial(s, &r).unwrap();
        let cases = [
            ("0", "0"),
            ("1/2", "1/2"),
            ("y^2 + x", "y^2 + x"),
            ("x - 2*y^2", "-2*y^2 + x"),
            ("-x", "-x"),
            ("-1/2*x*y + 3", "-1/2*x*y + 3"),
            ("2 - x^2", "-x^2 + 2"),
            ("x*(x + 1)", "x^2 + x"),
        ];
        for (input, expect) in cases {
            assert_eq!(parse(input).to_string(), expect, "input {input}");
        }
    }

    #[test]
    fn rendering_round_trips() {
        let r = Ring::new(vec!["x", "y", "z"]).unwrap();
        let parse = |s: &str| crate::parse::parse_polynomial(s, &r).unwrap();
        for s in ["x^2*y - 3*z + 1/2", "-x*y*z", "z^8 - z", "(x + y)^2 - (x - y)^2"] {
            let p = parse(s);
            assert_eq!(parse(&p.to_string()), p);
            let lex = MonomialOrder::lex(3);
            assert_eq!(crate::parse::parse_polynomial(&p.render(&lex), &r).unwrap(), p);
        }
    }
}
