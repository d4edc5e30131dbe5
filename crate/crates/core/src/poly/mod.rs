//! Sparse multivariate polynomials over the rationals.
//!
//! A [`Ring`] fixes an ordered list of variable names; a [`Polynomial`] holds
//! a map from exponent vectors to nonzero rational coefficients over one
//! shared ring handle. All arithmetic is exact.

pub mod division;
pub mod display;
pub mod monomial;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;
pub use monomial::{Monomial, MonomialOrder, OrderKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyError {
    RingMismatch { left: Vec<String>, right: Vec<String> },
    UnknownVariable(String),
    DuplicateVariable(String),
    UnboundVariable(String),
    EmptyDivisorList,
    ReductionBudget { limit: usize },
    DegreeLimit { degree: u32, limit: u32 },
    VariableLimit { count: usize, limit: usize },
    EmptyRing,
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::RingMismatch { left, right } => {
                write!(f, "ring mismatch: [{}] vs [{}]", left.join(", "), right.join(", "))
            }
            PolyError::UnknownVariable(v) => write!(f, "unknown variable `{v}`"),
            PolyError::DuplicateVariable(v) => write!(f, "duplicate variable `{v}`"),
            PolyError::UnboundVariable(v) => write!(f, "no value bound for variable `{v}`"),
            PolyError::EmptyDivisorList => write!(f, "division requires at least one divisor"),
            PolyError::ReductionBudget { limit } => {
                write!(f, "polynomial reduction exceeded {limit} steps")
            }
            PolyError::DegreeLimit { degree, limit } => {
                write!(f, "total degree {degree} exceeds limit {limit}")
            }
            PolyError::VariableLimit { count, limit } => {
                write!(f, "{count} variables exceed limit {limit}")
            }
            PolyError::EmptyRing => write!(f, "ring needs at least one variable"),
        }
    }
}

impl std::error::Error for PolyError {}

/// An ordered set of distinct variable names. Rings are compared by content,
/// so two independently built rings over the same names are interchangeable.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    vars: Vec<String>,
}

impl Ring {
    pub fn new<S: Into<String>>(vars: Vec<S>) -> Result<Arc<Ring>, PolyError> {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        if vars.is_empty() {
            return Err(PolyError::EmptyRing);
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(PolyError::DuplicateVariable(v.clone()));
            }
        }
        Ok(Arc::new(Ring { vars }))
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_name(&self, i: usize) -> &str {
        &self.vars[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Default term order for this ring: graded reverse lexicographic in
    /// declaration order.
    pub fn default_order(&self) -> MonomialOrder {
        MonomialOrder::grevlex(self.arity())
    }
}

/// Resource guardrails enforced by the heavier algorithms.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_total_degree: u32,
    pub max_vars: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_total_degree: 8, max_vars: 6 }
    }
}

impl Limits {
    pub fn check(&self, p: &Polynomial) -> Result<(), PolyError> {
        let vars = p.ring().arity();
        if vars > self.max_vars {
            return Err(PolyError::VariableLimit { count: vars, limit: self.max_vars });
        }
        let deg = p.total_degree();
        if deg > self.max_total_degree {
            return Err(PolyError::DegreeLimit { degree: deg, limit: self.max_total_degree });
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct Polynomial {
    ring: Arc<Ring>,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

impl Polynomial {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        Polynomial { ring: Arc::clone(ring), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Arc<Ring>, c: Rational) -> Self {
        let mut p = Self::zero(ring);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(ring.arity()), c);
        }
        p
    }

    pub fn one(ring: &Arc<Ring>) -> Self {
        Self::constant(ring, Rational::one())
    }

    pub fn var(ring: &Arc<Ring>, name: &str) -> Result<Self, PolyError> {
        let i = ring.index_of(name).ok_or_else(|| PolyError::UnknownVariable(name.into()))?;
        let mut p = Self::zero(ring);
        p.terms.insert(Monomial::var(ring.arity(), i, 1), Rational::one());
        Ok(p)
    }

    pub fn from_terms(
        ring: &Arc<Ring>,
        terms: impl IntoIterator<Item = (Monomial, Rational)>,
    ) -> Self {
        let mut p = Self::zero(ring);
        for (m, c) in terms {
            debug_assert_eq!(m.arity(), ring.arity());
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant term (zero if absent).
    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one(self.ring.arity()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Maximum total degree over all terms; 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::total_degree).max().unwrap_or(0)
    }

    /// Highest exponent of one variable; 0 if the variable is absent.
    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(var)).max().unwrap_or(0)
    }

    /// True when the variable occurs in some term.
    pub fn mentions(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.exp(var) > 0)
    }

    /// Leading term under `order`, or `None` for the zero polynomial.
    pub fn lead(&self, order: &MonomialOrder) -> Option<(&Monomial, &Rational)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| order.cmp(a, b))
    }

    fn check_same_ring(&self, other: &Polynomial) -> Result<(), PolyError> {
        if *self.ring == *other.ring {
            Ok(())
        } else {
            Err(PolyError::RingMismatch {
                left: self.ring.vars().to_vec(),
                right: other.ring.vars().to_vec(),
            })
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_same_ring(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_same_ring(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Polynomial {
        let mut out = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        let mut out = Self::zero(&self.ring);
        for (m, k) in &self.terms {
            out.terms.insert(m.clone(), k * c);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_same_ring(other)?;
        let mut out = Self::zero(&self.ring);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    /// Multiplication by a single term.
    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        let mut out = Self::zero(&self.ring);
        for (mm, cc) in &self.terms {
            out.terms.insert(mm.mul(m), cc * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Self::one(&self.ring);
        for _ in 0..k {
            out = out.mul(self).expect("same ring");
        }
        out
    }

    pub fn partial_derivative(&self, name: &str) -> Result<Polynomial, PolyError> {
        let i = self
            .ring
            .index_of(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.into()))?;
        let mut out = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            let e = m.exp(i);
            if e == 0 {
                continue;
            }
            let mut exps = m.exps().to_vec();
            exps[i] = e - 1;
            out.add_term(Monomial::from_exps(exps), c * Rational::from_integer(e.into()));
        }
        Ok(out)
    }

    /// Exact evaluation at a full binding of every ring variable.
    pub fn evaluate(&self, point: &BTreeMap<String, Rational>) -> Result<Rational, PolyError> {
        let mut vals = Vec::with_capacity(self.ring.arity());
        for v in self.ring.vars() {
            vals.push(point.get(v).cloned().ok_or_else(|| PolyError::UnboundVariable(v.clone()))?);
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.exps().iter().enumerate() {
                for _ in 0..e {
                    term *= &vals[i];
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Substitutes exact values for a subset of variables; the result lives in
    /// the ring of the remaining variables (or a 1-variable placeholder ring
    /// when everything was bound, holding just the constant).
    pub fn substitute(
        &self,
        binding: &BTreeMap<String, Rational>,
    ) -> Result<Polynomial, PolyError> {
        for name in binding.keys() {
            if self.ring.index_of(name).is_none() {
                return Err(PolyError::UnknownVariable(name.clone()));
            }
        }
        let remaining: Vec<String> = self
            .ring
            .vars()
            .iter()
            .filter(|v| !binding.contains_key(*v))
            .cloned()
            .collect();
        if remaining.is_empty() {
            let value = self.evaluate(binding)?;
            let ring = Ring::new(vec!["_const"]).expect("valid ring");
            return Ok(Polynomial::constant(&ring, value));
        }
        let new_ring = Ring::new(remaining)?;
        let mut out = Polynomial::zero(&new_ring);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut exps = vec![0u32; new_ring.arity()];
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = self.ring.var_name(i);
                match binding.get(name) {
                    Some(v) => {
                        for _ in 0..e {
                            coeff *= v;
                        }
                    }
                    None => {
                        let j = new_ring.index_of(name).expect("remaining variable");
                        exps[j] = e;
                    }
                }
            }
            out.add_term(Monomial::from_exps(exps), coeff);
        }
        Ok(out)
    }

    /// Re-expresses the polynomial over `new_ring`, matching variables by
    /// name. Every variable actually mentioned must exist in the new ring.
    pub fn extend_ring(&self, new_ring: &Arc<Ring>) -> Result<Polynomial, PolyError> {
        let mut map = Vec::with_capacity(self.ring.arity());
        for (i, v) in self.ring.vars().iter().enumerate() {
            match new_ring.index_of(v) {
                Some(j) => map.push(Some(j)),
                None => {
                    if self.mentions(i) {
                        return Err(PolyError::UnknownVariable(v.clone()));
                    }
                    map.push(None);
                }
            }
        }
        let mut out = Polynomial::zero(new_ring);
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; new_ring.arity()];
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    exps[map[i].expect("mentioned variable is mapped")] = e;
                }
            }
            out.add_term(Monomial::from_exps(exps), c.clone());
        }
        Ok(out)
    }

    /// The polynomial with every coefficient replaced by its image under `f`.
    pub fn map_coeffs(&self, mut f: impl FnMut(&Rational) -> Rational) -> Polynomial {
        let mut out = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Divides all coefficients by their positive content, keeping the sign
    /// of the leading coefficient under `order`. Zero stays zero.
    pub fn normalized_primitive(&self, order: &MonomialOrder) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let lead_coeff = self.lead(order).expect("nonzero").1.clone();
        self.scale(&(Rational::one() / lead_coeff.abs()))
    }

    /// Scales so the leading coefficient under `order` becomes 1. Zero stays
    /// zero.
    pub fn monic(&self, order: &MonomialOrder) -> Polynomial {
        match self.lead(order) {
            None => self.clone(),
            Some((_, c)) => self.scale(&(Rational::one() / c.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn xy() -> Arc<Ring> {
        Ring::new(vec!["x", "y"]).unwrap()
    }

    fn p(ring: &Arc<Ring>, s: &str) -> Polynomial {
        crate::parse::parse_polynomial(s, ring).unwrap()
    }

    #[test]
    fn ring_rejects_duplicates_and_empty() {
        assert!(matches!(Ring::new(vec!["x", "x"]), Err(PolyError::DuplicateVariable(_))));
        assert!(matches!(Ring::new(Vec::<String>::new()), Err(PolyError::EmptyRing)));
    }

    #[test]
    fn arithmetic_basics() {
        let r = xy();
        let a = p(&r, "-x + 2*y^2");
        let b = p(&r, "x + 4*y^2");
        assert_eq!(a.add(&b).unwrap(), p(&r, "6*y^2"));
        assert_eq!(a.sub(&a).unwrap(), Polynomial::zero(&r));
        assert_eq!(a.neg(), p(&r, "x - 2*y^2"));
        let sq = p(&r, "x + y").pow(2);
        assert_eq!(sq, p(&r, "x^2 + 2*x*y + y^2"));
        assert_eq!(p(&r, "0").total_degree(), 0);
        assert_eq!(b.total_degree(), 2);
    }

    #[test]
    fn mul_collects_and_cancels() {
        let r = xy();
        let prod = p(&r, "x - y").mul(&p(&r, "x + y")).unwrap();
        assert_eq!(prod, p(&r, "x^2 - y^2"));
        let z = p(&r, "x").sub(&p(&r, "x")).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.num_terms(), 0);
    }

    #[test]
    fn ring_mismatch_is_an_error() {
        let r = xy();
        let s = Ring::new(vec!["x", "z"]).unwrap();
        let e = p(&r, "x").add(&Polynomial::var(&s, "z").unwrap());
        assert!(matches!(e, Err(PolyError::RingMismatch { .. })));
    }

    #[test]
    fn derivative_and_evaluation() {
        let r = xy();
        let f = p(&r, "x^2 + x*y^2 + 3");
        assert_eq!(f.partial_derivative("x").unwrap(), p(&r, "2*x + y^2"));
        assert_eq!(f.partial_derivative("y").unwrap(), p(&r, "2*x*y"));
        assert!(matches!(f.partial_derivative("q"), Err(PolyError::UnknownVariable(_))));

        let mut pt = BTreeMap::new();
        pt.insert("x".to_string(), rat(1, 2));
        pt.insert("y".to_string(), int(2));
        assert_eq!(f.evaluate(&pt).unwrap(), rat(21, 4));
        pt.remove("y");
        assert!(matches!(f.evaluate(&pt), Err(PolyError::UnboundVariable(_))));
    }

    #[test]
    fn substitute_shrinks_the_ring() {
        let r = Ring::new(vec!["a", "x", "y"]).unwrap();
        let f = p(&r, "x^2 + a*y^2");
        let mut b = BTreeMap::new();
        b.insert("a".to_string(), int(1));
        let g = f.substitute(&b).unwrap();
        assert_eq!(g.ring().vars(), &["x".to_string(), "y".to_string()]);
        assert_eq!(g, p(&Ring::new(vec!["x", "y"]).unwrap(), "x^2 + y^2"));

        b.insert("x".to_string(), int(2));
        b.insert("y".to_string(), int(3));
        let c = f.substitute(&b).unwrap();
        assert!(c.is_constant());
        assert_eq!(c.constant_term(), int(13));
    }

    #[test]
    fn extend_ring_by_name() {
        let small = xy();
        let big = Ring::new(vec!["a", "x", "y"]).unwrap();
        let f = p(&small, "x*y + y^2");
        let g = f.extend_ring(&big).unwrap();
        assert_eq!(g, p(&big, "x*y + y^2"));
        let back = g.extend_ring(&small).unwrap();
        assert_eq!(back, f);
        // A mentioned variable missing from the target ring is an error.
        let h = p(&big, "a*x");
        assert!(matches!(h.extend_ring(&small), Err(PolyError::UnknownVariable(_))));
    }

    #[test]
    fn leading_terms_respect_the_order() {
        let r = xy();
        let f = p(&r, "x + y^2");
        let lex = MonomialOrder::lex(2);
        let grevlex = MonomialOrder::grevlex(2);
        assert_eq!(f.lead(&lex).unwrap().0, &Monomial::var(2, 0, 1));
        assert_eq!(f.lead(&grevlex).unwrap().0, &Monomial::var(2, 1, 2));
        assert!(Polynomial::zero(&r).lead(&lex).is_none());
    }

    #[test]
    fn limits_guardrails() {
        let r = xy();
        let lims = Limits { max_total_degree: 3, max_vars: 6 };
        assert!(lims.check(&p(&r, "x^3")).is_ok());
        assert!(matches!(
            lims.check(&p(&r, "x^4")),
            Err(PolyError::DegreeLimit { degree: 4, limit: 3 })
        ));
    }
}
