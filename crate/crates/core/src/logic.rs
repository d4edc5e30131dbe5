//! First-order formulas over polynomial sign conditions, the formula
//! builders used by the search, and SMT-LIB2 emission.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::dynamics::{DynError, Template, VectorField};
use crate::poly::{PolyError, Polynomial, Ring};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogicError {
    ZeroIndex,
    NonEquilibrium,
    RadiusClash(String),
    QuantifiedEval,
    CapturedVariable(String),
    UnboundVariable(String),
    Poly(PolyError),
    Dyn(String),
}

impl fmt::Display for LogicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicError::ZeroIndex => write!(f, "formula index must be at least 1"),
            LogicError::NonEquilibrium => {
                write!(f, "vector field does not vanish at the origin")
            }
            LogicError::RadiusClash(v) => {
                write!(f, "radius symbol `{v}` collides with another variable")
            }
            LogicError::QuantifiedEval => {
                write!(f, "cannot evaluate a quantified formula pointwise")
            }
            LogicError::CapturedVariable(v) => {
                write!(f, "substitution would capture bound variable `{v}`")
            }
            LogicError::UnboundVariable(v) => write!(f, "no value bound for `{v}`"),
            LogicError::Poly(e) => write!(f, "{e}"),
            LogicError::Dyn(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LogicError {}

impl From<PolyError> for LogicError {
    fn from(e: PolyError) -> Self {
        LogicError::Poly(e)
    }
}

impl From<DynError> for LogicError {
    fn from(e: DynError) -> Self {
        LogicError::Dyn(e.to_string())
    }
}

/// Sign relation of a polynomial against zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl Rel {
    pub fn holds(&self, value: &Rational) -> bool {
        match self {
            Rel::Lt => value.is_negative(),
            Rel::Le => !value.is_positive(),
            Rel::Eq => value.is_zero(),
            Rel::Ne => !value.is_zero(),
            Rel::Gt => value.is_positive(),
            Rel::Ge => !value.is_negative(),
        }
    }

    pub fn negated(&self) -> Rel {
        match self {
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Gt => Rel::Le,
            Rel::Ge => Rel::Lt,
        }
    }

    fn smt_symbol(&self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ne => "distinct",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }
}

/// `poly REL 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub poly: Polynomial,
    pub rel: Rel,
}

impl Atom {
    pub fn new(poly: Polynomial, rel: Rel) -> Self {
        Atom { poly, rel }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.poly, self.rel.text())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Forall(Vec<String>, Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(inner) => write!(f, "!({inner})"),
            Formula::And(parts) => {
                let strs: Vec<String> = parts.iter().map(|p| format!("({p})")).collect();
                write!(f, "{}", strs.join(" & "))
            }
            Formula::Or(parts) => {
                let strs: Vec<String> = parts.iter().map(|p| format!("({p})")).collect();
                write!(f, "{}", strs.join(" | "))
            }
            Formula::Forall(vars, body) => write!(f, "forall {}. ({body})", vars.join(" ")),
            Formula::Exists(vars, body) => write!(f, "exists {}. ({body})", vars.join(" ")),
        }
    }
}

impl Formula {
    /// Atom smart constructor: `!=` is normalized to a negated equality.
    pub fn atom(poly: Polynomial, rel: Rel) -> Formula {
        match rel {
            Rel::Ne => Formula::Not(Box::new(Formula::Atom(Atom::new(poly, Rel::Eq)))),
            _ => Formula::Atom(Atom::new(poly, rel)),
        }
    }

    pub fn negate(fm: Formula) -> Formula {
        Formula::Not(Box::new(fm))
    }

    pub fn and(parts: Vec<Formula>) -> Formula {
        Formula::And(parts)
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        Formula::Or(parts)
    }

    /// `a -> b` as `!a | b`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Or(vec![Formula::negate(a), b])
    }

    pub fn forall(vars: Vec<String>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            Formula::Forall(vars, Box::new(body))
        }
    }

    pub fn exists(vars: Vec<String>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            Formula::Exists(vars, Box::new(body))
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(inner) => inner.is_quantifier_free(),
            Formula::And(parts) | Formula::Or(parts) => {
                parts.iter().all(Formula::is_quantifier_free)
            }
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    /// Variables occurring free (mentioned by some atom, not bound above it).
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk(fm: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match fm {
                Formula::True | Formula::False => {}
                Formula::Atom(a) => {
                    for (i, v) in a.poly.ring().vars().iter().enumerate() {
                        if a.poly.mentions(i) && !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
                Formula::Not(inner) => walk(inner, bound, out),
                Formula::And(parts) | Formula::Or(parts) => {
                    for p in parts {
                        walk(p, bound, out);
                    }
                }
                Formula::Forall(vars, body) | Formula::Exists(vars, body) => {
                    let mark = bound.len();
                    bound.extend(vars.iter().cloned());
                    walk(body, bound, out);
                    bound.truncate(mark);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// All variables bound by some quantifier in the tree.
    pub fn bound_vars(&self) -> BTreeSet<String> {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => BTreeSet::new(),
            Formula::Not(inner) => inner.bound_vars(),
            Formula::And(parts) | Formula::Or(parts) => {
                parts.iter().flat_map(Formula::bound_vars).collect()
            }
            Formula::Forall(vars, body) | Formula::Exists(vars, body) => {
                let mut out = body.bound_vars();
                out.extend(vars.iter().cloned());
                out
            }
        }
    }

    /// Every atom in the tree, in syntactic order.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        fn walk<'a>(fm: &'a Formula, out: &mut Vec<&'a Atom>) {
            match fm {
                Formula::True | Formula::False => {}
                Formula::Atom(a) => out.push(a),
                Formula::Not(inner) => walk(inner, out),
                Formula::And(parts) | Formula::Or(parts) => {
                    for p in parts {
                        walk(p, out);
                    }
                }
                Formula::Forall(_, body) | Formula::Exists(_, body) => walk(body, out),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn max_atom_degree(&self) -> u32 {
        self.atoms().iter().map(|a| a.poly.total_degree()).max().unwrap_or(0)
    }

    /// Evaluates a quantifier-free formula at a rational point binding every
    /// free variable.
    pub fn eval(&self, point: &BTreeMap<String, Rational>) -> Result<bool, LogicError> {
        match self {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Atom(a) => {
                let mut full = BTreeMap::new();
                for (i, v) in a.poly.ring().vars().iter().enumerate() {
                    match point.get(v) {
                        Some(q) => {
                            full.insert(v.clone(), q.clone());
                        }
                        None => {
                            if a.poly.mentions(i) {
                                return Err(LogicError::UnboundVariable(v.clone()));
                            }
                            full.insert(v.clone(), Rational::zero());
                        }
                    }
                }
                Ok(a.rel.holds(&a.poly.evaluate(&full)?))
            }
            Formula::Not(inner) => Ok(!inner.eval(point)?),
            Formula::And(parts) => {
                for p in parts {
                    if !p.eval(point)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(parts) => {
                for p in parts {
                    if p.eval(point)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Forall(..) | Formula::Exists(..) => Err(LogicError::QuantifiedEval),
        }
    }

    /// Substitutes rational values for free variables. Binding a variable
    /// that is quantified anywhere in the tree is rejected as capture.
    pub fn substitute(
        &self,
        binding: &BTreeMap<String, Rational>,
    ) -> Result<Formula, LogicError> {
        for v in self.bound_vars() {
            if binding.contains_key(&v) {
                return Err(LogicError::CapturedVariable(v));
            }
        }
        self.substitute_unchecked(binding)
    }

    fn substitute_unchecked(
        &self,
        binding: &BTreeMap<String, Rational>,
    ) -> Result<Formula, LogicError> {
        Ok(match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => {
                let local: BTreeMap<String, Rational> = binding
                    .iter()
                    .filter(|(k, _)| a.poly.ring().index_of(k).is_some())
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                if local.is_empty() {
                    Formula::Atom(a.clone())
                } else {
                    Formula::Atom(Atom::new(a.poly.substitute(&local)?, a.rel))
                }
            }
            Formula::Not(inner) => Formula::Not(Box::new(inner.substitute_unchecked(binding)?)),
            Formula::And(parts) => Formula::And(
                parts.iter().map(|p| p.substitute_unchecked(binding)).collect::<Result<_, _>>()?,
            ),
            Formula::Or(parts) => Formula::Or(
                parts.iter().map(|p| p.substitute_unchecked(binding)).collect::<Result<_, _>>()?,
            ),
            Formula::Forall(vars, body) => {
                Formula::Forall(vars.clone(), Box::new(body.substitute_unchecked(binding)?))
            }
            Formula::Exists(vars, body) => {
                Formula::Exists(vars.clone(), Box::new(body.substitute_unchecked(binding)?))
            }
        })
    }

    /// Logical simplification: constant folding (including ground atoms),
    /// flattening of nested conjunctions/disjunctions, negation pushed down
    /// to atoms, quantifiers over unused variables dropped.
    pub fn simplify(&self) -> Formula {
        simplify_signed(self, false)
    }
}

/// Simplifies `fm` under `negated` (negation-normal-form push).
fn simplify_signed(fm: &Formula, negated: bool) -> Formula {
    match fm {
        Formula::True => {
            if negated {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::False => {
            if negated {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Atom(a) => {
            let rel = if negated { a.rel.negated() } else { a.rel };
            if a.poly.is_constant() {
                return if rel.holds(&a.poly.constant_term()) {
                    Formula::True
                } else {
                    Formula::False
                };
            }
            match rel {
                Rel::Ne => Formula::Not(Box::new(Formula::Atom(Atom::new(
                    a.poly.clone(),
                    Rel::Eq,
                )))),
                _ => Formula::Atom(Atom::new(a.poly.clone(), rel)),
            }
        }
        Formula::Not(inner) => simplify_signed(inner, !negated),
        Formula::And(parts) | Formula::Or(parts) => {
            let make_and = matches!(fm, Formula::And(_)) != negated;
            let mut out: Vec<Formula> = Vec::new();
            for p in parts {
                let s = simplify_signed(p, negated);
                match (&s, make_and) {
                    (Formula::True, true) | (Formula::False, false) => continue,
                    (Formula::True, false) => return Formula::True,
                    (Formula::False, true) => return Formula::False,
                    (Formula::And(inner), true) | (Formula::Or(inner), false) => {
                        out.extend(inner.iter().cloned());
                    }
                    _ => out.push(s),
                }
            }
            match (out.len(), make_and) {
                (0, true) => Formula::True,
                (0, false) => Formula::False,
                (1, _) => out.pop().expect("single element"),
                (_, true) => Formula::And(out),
                (_, false) => Formula::Or(out),
            }
        }
        Formula::Forall(vars, body) | Formula::Exists(vars, body) => {
            let make_forall = matches!(fm, Formula::Forall(..)) != negated;
            let b = simplify_signed(body, negated);
            match b {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                _ => {
                    let used = b.free_vars();
                    let kept: Vec<String> =
                        vars.iter().filter(|v| used.contains(*v)).cloned().collect();
                    if kept.is_empty() {
                        b
                    } else if make_forall {
                        Formula::Forall(kept, Box::new(b))
                    } else {
                        Formula::Exists(kept, Box::new(b))
                    }
                }
            }
        }
    }
}

/// The punctured open ball `0 < ||x||^2 < r^2` with a symbolic radius.
#[derive(Clone, Debug)]
pub struct BallConstraint {
    radius: String,
    state_vars: Vec<String>,
}

impl BallConstraint {
    pub fn new(radius: impl Into<String>, state_vars: Vec<String>) -> Result<Self, LogicError> {
        let radius = radius.into();
        if state_vars.contains(&radius) {
            return Err(LogicError::RadiusClash(radius));
        }
        Ok(BallConstraint { radius, state_vars })
    }

    pub fn radius(&self) -> &str {
        &self.radius
    }

    pub fn state_vars(&self) -> &[String] {
        &self.state_vars
    }

    fn ring(&self) -> Result<Arc<Ring>, LogicError> {
        let mut vars = self.state_vars.clone();
        vars.push(self.radius.clone());
        Ok(Ring::new(vars)?)
    }

    /// The squared norm polynomial over (state vars, radius).
    pub fn norm_squared(&self) -> Result<Polynomial, LogicError> {
        let ring = self.ring()?;
        let mut acc = Polynomial::zero(&ring);
        for v in &self.state_vars {
            let x = Polynomial::var(&ring, v)?;
            acc = acc.add(&x.mul(&x)?)?;
        }
        Ok(acc)
    }

    /// `||x||^2 > 0  &  ||x||^2 - r^2 < 0`.
    pub fn formula(&self) -> Result<Formula, LogicError> {
        let ring = self.ring()?;
        let n2 = self.norm_squared()?;
        let r = Polynomial::var(&ring, &self.radius)?;
        let inside = n2.sub(&r.mul(&r)?)?;
        Ok(Formula::And(vec![
            Formula::atom(n2, Rel::Gt),
            Formula::atom(inside, Rel::Lt),
        ]))
    }
}

fn lie_chain(p: &Template, f: &VectorField, upto: u32) -> Result<Vec<Polynomial>, LogicError> {
    let mut cache = crate::dynamics::LieCache::new(p.body().clone(), f.clone());
    let mut out = Vec::with_capacity(upto as usize + 1);
    for k in 0..=upto {
        out.push(cache.get(k)?.clone());
    }
    Ok(out)
}

/// Block i of the transversality disjunction: the first i-1 Lie derivatives
/// vanish and the i-th is strictly negative. Quantifier-free over (u, x).
pub fn build_varphi_block(p: &Template, f: &VectorField, i: u32) -> Result<Formula, LogicError> {
    if i == 0 {
        return Err(LogicError::ZeroIndex);
    }
    let chain = lie_chain(p, f, i)?;
    let mut parts = Vec::with_capacity(i as usize);
    for lj in chain.iter().take(i as usize).skip(1) {
        parts.push(Formula::atom(lj.clone(), Rel::Eq));
    }
    parts.push(Formula::atom(chain[i as usize].clone(), Rel::Lt));
    Ok(Formula::And(parts))
}

/// The transversality disjunction over blocks 1..=n. Quantifier-free.
pub fn build_varphi(p: &Template, f: &VectorField, n: u32) -> Result<Formula, LogicError> {
    if n == 0 {
        return Err(LogicError::ZeroIndex);
    }
    let blocks = (1..=n)
        .map(|i| build_varphi_block(p, f, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Formula::Or(blocks))
}

/// Vanishing at the origin: the template body with all states set to zero,
/// equated to zero. Free over the parameters only.
pub fn build_phi1(p: &Template) -> Result<Formula, LogicError> {
    let zeros: BTreeMap<String, Rational> = p
        .state_vars()
        .iter()
        .map(|v| (v.clone(), Rational::zero()))
        .collect();
    let at_origin = p.body().substitute(&zeros)?;
    Ok(Formula::atom(at_origin, Rel::Eq).simplify())
}

/// Positivity on the punctured ball: forall x, ball -> p > 0.
pub fn build_phi2(p: &Template, ball: &BallConstraint) -> Result<Formula, LogicError> {
    let body = Formula::implies(
        ball.formula()?,
        Formula::atom(p.body().clone(), Rel::Gt),
    );
    Ok(Formula::forall(p.state_vars().to_vec(), body))
}

/// Transversality on the punctured ball: forall x, ball -> varphi.
pub fn build_phi3(
    p: &Template,
    f: &VectorField,
    n: u32,
    ball: &BallConstraint,
) -> Result<Formula, LogicError> {
    let body = Formula::implies(ball.formula()?, build_varphi(p, f, n)?);
    Ok(Formula::forall(p.state_vars().to_vec(), body))
}

/// The full relaxed-Lyapunov condition: vanishing at the origin, positive
/// definiteness, and transversality, free over (parameters, radius).
pub fn build_phi(
    p: &Template,
    f: &VectorField,
    n: u32,
    ball: &BallConstraint,
) -> Result<Formula, LogicError> {
    if !f.equilibrium_check() {
        return Err(LogicError::NonEquilibrium);
    }
    Ok(Formula::And(vec![
        build_phi1(p)?,
        build_phi2(p, ball)?,
        build_phi3(p, f, n, ball)?,
    ]))
}

/// Stepwise vanishing prefix: the first i-1 Lie derivatives all zero.
/// The empty conjunction (i = 1) is true.
pub fn build_psi(p: &Template, f: &VectorField, i: u32) -> Result<Formula, LogicError> {
    if i == 0 {
        return Err(LogicError::ZeroIndex);
    }
    let chain = lie_chain(p, f, i - 1)?;
    let parts: Vec<Formula> = chain
        .iter()
        .skip(1)
        .map(|lj| Formula::atom(lj.clone(), Rel::Eq))
        .collect();
    Ok(Formula::And(parts))
}

fn theta_common(
    p: &Template,
    f: &VectorField,
    i: u32,
    ball: &BallConstraint,
    rel: Rel,
) -> Result<Formula, LogicError> {
    if i == 0 {
        return Err(LogicError::ZeroIndex);
    }
    let chain = lie_chain(p, f, i)?;
    let guard = Formula::And(vec![ball.formula()?, build_psi(p, f, i)?]);
    let body = Formula::implies(guard, Formula::atom(chain[i as usize].clone(), rel));
    Ok(Formula::forall(p.state_vars().to_vec(), body))
}

/// Stepwise strict condition: forall x, (ball and psi^i) -> L^i p < 0.
pub fn build_theta(
    p: &Template,
    f: &VectorField,
    i: u32,
    ball: &BallConstraint,
) -> Result<Formula, LogicError> {
    theta_common(p, f, i, ball, Rel::Lt)
}

/// Stepwise relaxed condition: forall x, (ball and psi^i) -> L^i p <= 0.
pub fn build_theta_bar(
    p: &Template,
    f: &VectorField,
    i: u32,
    ball: &BallConstraint,
) -> Result<Formula, LogicError> {
    theta_common(p, f, i, ball, Rel::Le)
}

/// Invariant scaffold: forall x, ball -> ((or of blocks 1..=i) or psi^{i+1}).
/// At i = 0 the disjunction is empty and the formula is trivially true.
pub fn build_phi_bar(
    p: &Template,
    f: &VectorField,
    i: u32,
    ball: &BallConstraint,
) -> Result<Formula, LogicError> {
    let blocks = (1..=i)
        .map(|j| build_varphi_block(p, f, j))
        .collect::<Result<Vec<_>, _>>()?;
    let rhs = Formula::Or(vec![Formula::Or(blocks), build_psi(p, f, i + 1)?]);
    let body = Formula::implies(ball.formula()?, rhs);
    Ok(Formula::forall(p.state_vars().to_vec(), body))
}

/// Truncated transversality: forall x, ball -> (or of blocks 1..=i).
pub fn build_phi_tilde(
    p: &Template,
    f: &VectorField,
    i: u32,
    ball: &BallConstraint,
) -> Result<Formula, LogicError> {
    if i == 0 {
        return Err(LogicError::ZeroIndex);
    }
    let body = Formula::implies(ball.formula()?, build_varphi(p, f, i)?);
    Ok(Formula::forall(p.state_vars().to_vec(), body))
}

fn rational_to_smt(q: &Rational) -> String {
    let abs = q.abs();
    let core = if abs.denom().is_one() {
        format!("{}", abs.numer())
    } else {
        format!("(/ {} {})", abs.numer(), abs.denom())
    };
    if q.is_negative() {
        format!("(- {core})")
    } else {
        core
    }
}

fn poly_to_smt(p: &Polynomial) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let vars = p.ring().vars();
    let mut terms = Vec::new();
    for (m, c) in p.terms() {
        let mut factors = Vec::new();
        if !c.is_one() || m.is_one() {
            factors.push(rational_to_smt(c));
        }
        for (i, &e) in m.exps().iter().enumerate() {
            for _ in 0..e {
                factors.push(vars[i].clone());
            }
        }
        terms.push(match factors.len() {
            1 => factors.pop().expect("one factor"),
            _ => format!("(* {})", factors.join(" ")),
        });
    }
    match terms.len() {
        1 => terms.pop().expect("one term"),
        _ => format!("(+ {})", terms.join(" ")),
    }
}

fn formula_to_smt(fm: &Formula) -> String {
    match fm {
        Formula::True => "true".to_string(),
        Formula::False => "false".to_string(),
        Formula::Atom(a) => match a.rel {
            Rel::Ne => format!("(distinct {} 0)", poly_to_smt(&a.poly)),
            _ => format!("({} {} 0)", a.rel.smt_symbol(), poly_to_smt(&a.poly)),
        },
        Formula::Not(inner) => format!("(not {})", formula_to_smt(inner)),
        Formula::And(parts) => match parts.len() {
            0 => "true".to_string(),
            1 => formula_to_smt(&parts[0]),
            _ => format!(
                "(and {})",
                parts.iter().map(formula_to_smt).collect::<Vec<_>>().join(" ")
            ),
        },
        Formula::Or(parts) => match parts.len() {
            0 => "false".to_string(),
            1 => formula_to_smt(&parts[0]),
            _ => format!(
                "(or {})",
                parts.iter().map(formula_to_smt).collect::<Vec<_>>().join(" ")
            ),
        },
        Formula::Forall(vars, body) => format!(
            "(forall ({}) {})",
            vars.iter().map(|v| format!("({v} Real)")).collect::<Vec<_>>().join(" "),
            formula_to_smt(body)
        ),
        Formula::Exists(vars, body) => format!(
            "(exists ({}) {})",
            vars.iter().map(|v| format!("({v} Real)")).collect::<Vec<_>>().join(" "),
            formula_to_smt(body)
        ),
    }
}

/// Renders a complete SMT-LIB2 script: logic declaration, one constant
/// declaration per free variable, the assertion, and check-sat.
pub fn to_smtlib(fm: &Formula, logic: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("(set-logic {logic})\n"));
    for v in fm.free_vars() {
        out.push_str(&format!("(declare-const {v} Real)\n"));
    }
    out.push_str(&format!("(assert {})\n", formula_to_smt(fm)));
    out.push_str("(check-sat)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Polynomial, Ring};
    use crate::rational::{int, rat};

    fn cubic_field() -> VectorField {
        VectorField::parse(&["x", "y"], &["-x + y^2", "-x*y"]).unwrap()
    }

    fn quad_template() -> Template {
        Template::parse(&["a"], &["x", "y"], "x^2 + a*y^2").unwrap()
    }

    fn ball() -> BallConstraint {
        BallConstraint::new("r", vec!["x".into(), "y".into()]).unwrap()
    }

    fn pt(pairs: &[(&str, Rational)]) -> BTreeMap<String, Rational> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn varphi_blocks_have_the_right_shape() {
        let f = VectorField::parse(&["x", "y"], &["-x", "y"]).unwrap();
        let p = Template::parse(&[], &["x", "y"], "x + y^2").unwrap();
        let phi = build_varphi(&p, &f, 2).unwrap();
        let Formula::Or(blocks) = &phi else { panic!("expected a disjunction") };
        assert_eq!(blocks.len(), 2);
        for (i, b) in blocks.iter().enumerate() {
            let Formula::And(atoms) = b else { panic!("expected a conjunction") };
            assert_eq!(atoms.len(), i + 1, "block {} has {} atoms", i + 1, atoms.len());
        }
        // Block contents: (-x+2y^2 < 0) | (-x+2y^2 = 0 & x+4y^2 < 0).
        let l1 = crate::parse::parse_polynomial("-x + 2*y^2", f.state_ring()).unwrap();
        let l2 = crate::parse::parse_polynomial("x + 4*y^2", f.state_ring()).unwrap();
        assert_eq!(blocks[0], Formula::And(vec![Formula::atom(l1.clone(), Rel::Lt)]));
        assert_eq!(
            blocks[1],
            Formula::And(vec![Formula::atom(l1, Rel::Eq), Formula::atom(l2, Rel::Lt)])
        );
        assert!(build_varphi(&p, &f, 0).is_err());
    }

    #[test]
    fn phi1_simplifies_to_true_without_constant_term() {
        let t = quad_template();
        assert_eq!(build_phi1(&t).unwrap(), Formula::True);
        let with_offset = Template::parse(&["a", "b"], &["x", "y"], "x^2 + a*y^2 + b").unwrap();
        let phi1 = build_phi1(&with_offset).unwrap();
        let frees = phi1.free_vars();
        assert_eq!(frees.into_iter().collect::<Vec<_>>(), vec!["b".to_string()]);
    }

    #[test]
    fn phi_free_variables_are_parameters_and_radius() {
        let t = quad_template();
        let f = cubic_field();
        let phi = build_phi(&t, &f, 4, &ball()).unwrap();
        let frees: Vec<String> = phi.free_vars().into_iter().collect();
        assert_eq!(frees, vec!["a".to_string(), "r".to_string()]);

        let shifted = VectorField::parse(&["x", "y"], &["x + 1", "y"]).unwrap();
        assert!(matches!(
            build_phi(&t, &shifted, 1, &ball()),
            Err(LogicError::NonEquilibrium)
        ));
    }

    #[test]
    fn psi_one_is_the_empty_conjunction() {
        let t = quad_template();
        let f = cubic_field();
        assert_eq!(build_psi(&t, &f, 1).unwrap().simplify(), Formula::True);
        assert!(build_psi(&t, &f, 0).is_err());
        // psi^3 has two equation atoms.
        let psi3 = build_psi(&t, &f, 3).unwrap();
        assert_eq!(psi3.atoms().len(), 2);
        assert!(psi3.atoms().iter().all(|a| a.rel == Rel::Eq));
    }

    #[test]
    fn theta_matches_the_derived_first_step() {
        let t = quad_template();
        let f = cubic_field();
        let th = build_theta(&t, &f, 1, &ball()).unwrap();
        // forall x y. (x^2+y^2>0 & x^2+y^2-r^2<0 & true) -> L^1 < 0
        let frees: Vec<String> = th.free_vars().into_iter().collect();
        assert_eq!(frees, vec!["a".to_string(), "r".to_string()]);
        let atoms = th.atoms();
        let last = atoms.last().unwrap();
        assert_eq!(last.rel, Rel::Lt);
        let l1 = crate::dynamics::lie_derivative(t.body(), &f, 1).unwrap();
        assert_eq!(last.poly, l1);

        let thb = build_theta_bar(&t, &f, 1, &ball()).unwrap();
        let batoms = thb.atoms();
        assert_eq!(batoms.last().unwrap().rel, Rel::Le);
        assert_eq!(batoms.len(), atoms.len());
    }

    #[test]
    fn phi_bar_at_chain_bound_adds_only_the_psi_disjunct() {
        let t = quad_template();
        let f = cubic_field();
        let n = 4;
        let bar = build_phi_bar(&t, &f, n, &ball()).unwrap();
        let tilde = build_phi_tilde(&t, &f, n, &ball()).unwrap();
        let phi3 = build_phi3(&t, &f, n, &ball()).unwrap();
        // tilde^N and phi^3 coincide; bar^N carries psi^{N+1} extra atoms.
        assert_eq!(tilde, phi3);
        assert_eq!(
            bar.atoms().len(),
            phi3.atoms().len() + n as usize,
            "psi^{} adds {} equation atoms",
            n + 1,
            n
        );
    }

    #[test]
    fn truncation_validity_on_sampled_points() {
        // (or of blocks 1..=N) implies ((or of blocks 1..=k) or psi^{k+1}),
        // checked pointwise on a rational grid.
        let t = quad_template();
        let f = cubic_field();
        let n = 4;
        let full = build_varphi(&t, &f, n).unwrap();
        for k in 0..n {
            let truncated = Formula::Or(vec![
                if k == 0 { Formula::False } else { build_varphi(&t, &f, k).unwrap() },
                build_psi(&t, &f, k + 1).unwrap(),
            ]);
            for ax in [-2i64, 0, 1, 2] {
                for xx in [-1i64, 0, 1, 2] {
                    for yy in [-2i64, 0, 1] {
                        let point = pt(&[
                            ("a", int(ax)),
                            ("x", rat(xx, 2)),
                            ("y", rat(yy, 3)),
                        ]);
                        let lhs = full.eval(&point).unwrap();
                        let rhs = truncated.eval(&point).unwrap();
                        assert!(!lhs || rhs, "truncation fails at a={ax} x={xx}/2 y={yy}/3 k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn simplify_folds_constants_and_flattens() {
        let r = Ring::new(vec!["x"]).unwrap();
        let x = Polynomial::var(&r, "x").unwrap();
        let a = Formula::atom(x.clone(), Rel::Lt);
        assert_eq!(Formula::And(vec![Formula::True, a.clone()]).simplify(), a);
        assert_eq!(Formula::Or(vec![]).simplify(), Formula::False);
        assert_eq!(Formula::And(vec![]).simplify(), Formula::True);
        assert_eq!(
            Formula::negate(a.clone()).simplify(),
            Formula::atom(x.clone(), Rel::Ge)
        );
        // Nested flattening.
        let nested = Formula::And(vec![
            Formula::And(vec![a.clone(), Formula::True]),
            Formula::atom(x.clone(), Rel::Gt),
        ]);
        let Formula::And(parts) = nested.simplify() else { panic!("expected and") };
        assert_eq!(parts.len(), 2);
        // Ground atoms fold.
        let zero = Polynomial::zero(&r);
        assert_eq!(Formula::atom(zero.clone(), Rel::Eq).simplify(), Formula::True);
        assert_eq!(Formula::atom(zero, Rel::Lt).simplify(), Formula::False);
        // Negation through quantifiers.
        let q = Formula::forall(vec!["x".into()], a.clone());
        assert_eq!(
            Formula::negate(q).simplify(),
            Formula::exists(vec!["x".into()], Formula::atom(x, Rel::Ge))
        );
    }

    #[test]
    fn simplify_preserves_pointwise_truth() {
        let t = quad_template();
        let f = cubic_field();
        let fm = build_varphi(&t, &f, 3).unwrap();
        let simplified = fm.simplify();
        for ax in [-1i64, 0, 1] {
            for xx in [-1i64, 0, 2] {
                for yy in [-1i64, 0, 1] {
                    let point = pt(&[("a", int(ax)), ("x", int(xx)), ("y", rat(yy, 2))]);
                    assert_eq!(fm.eval(&point).unwrap(), simplified.eval(&point).unwrap());
                }
            }
        }
    }

    #[test]
    fn ne_atoms_normalize_to_negated_equality() {
        let r = Ring::new(vec!["x"]).unwrap();
        let x = Polynomial::var(&r, "x").unwrap();
        let ne = Formula::atom(x.clone(), Rel::Ne);
        assert_eq!(
            ne,
            Formula::Not(Box::new(Formula::Atom(Atom::new(x.clone(), Rel::Eq))))
        );
        // Double negation lands back on the equality.
        assert_eq!(
            Formula::negate(ne).simplify(),
            Formula::atom(x, Rel::Eq)
        );
    }

    #[test]
    fn substitution_rejects_capture_and_shrinks_atoms() {
        let t = quad_template();
        let f = cubic_field();
        let th = build_theta(&t, &f, 1, &ball()).unwrap();
        let mut b = BTreeMap::new();
        b.insert("x".to_string(), int(1));
        assert!(matches!(th.substitute(&b), Err(LogicError::CapturedVariable(_))));

        let mut ok = BTreeMap::new();
        ok.insert("a".to_string(), int(1));
        let inst = th.substitute(&ok).unwrap();
        assert_eq!(
            inst.free_vars().into_iter().collect::<Vec<_>>(),
            vec!["r".to_string()]
        );
    }

    #[test]
    fn smtlib_emission_shape() {
        let r = Ring::new(vec!["a", "x"]).unwrap();
        let p = crate::parse::parse_polynomial("1/2*x + a", &r).unwrap();
        let fm = Formula::forall(
            vec!["x".into()],
            Formula::atom(p, Rel::Ge),
        );
        let script = to_smtlib(&fm, "NRA");
        assert!(script.contains("(set-logic NRA)"));
        assert!(script.contains("(declare-const a Real)"));
        assert!(!script.contains("(declare-const x Real)"));
        assert!(script.contains("(/ 1 2)"));
        assert!(script.contains("(forall ((x Real))"));
        assert!(script.ends_with("(check-sat)\n"));

        let q = crate::parse::parse_polynomial("-x^2 - 2", &r).unwrap();
        let neg = to_smtlib(&Formula::atom(q, Rel::Lt), "QF_NRA");
        assert!(neg.contains("(* (- 1) x x)"));
        assert!(neg.contains("(- 2)"));
    }
}
