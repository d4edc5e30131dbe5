//! Polynomial dynamical systems: vector fields, Lie derivatives, pointwise
//! rank, and transverse-set membership.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::poly::{PolyError, Polynomial, Ring};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DynError {
    ComponentCount { expected: usize, got: usize },
    ComponentRing { component: usize },
    ParamStateOverlap(String),
    ParameterInPointwise(String),
    ZeroBound,
    UnboundState(String),
    Parse(String),
    Poly(PolyError),
}

impl fmt::Display for DynError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynError::ComponentCount { expected, got } => {
                write!(f, "vector field needs {expected} components, got {got}")
            }
            DynError::ComponentRing { component } => {
                write!(f, "component {component} is not over the state-variable ring")
            }
            DynError::ParamStateOverlap(v) => {
                write!(f, "`{v}` is both a parameter and a state variable")
            }
            DynError::ParameterInPointwise(v) => {
                write!(f, "pointwise operations need a parameter-free polynomial, found `{v}`")
            }
            DynError::ZeroBound => write!(f, "rank bound must be at least 1"),
            DynError::UnboundState(v) => write!(f, "point does not bind state variable `{v}`"),
            DynError::Parse(e) => write!(f, "{e}"),
            DynError::Poly(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DynError {}

impl From<PolyError> for DynError {
    fn from(e: PolyError) -> Self {
        DynError::Poly(e)
    }
}

/// An autonomous polynomial vector field over an ordered list of state
/// variables; component i is the time derivative of state variable i.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    ring: Arc<Ring>,
    components: Vec<Polynomial>,
}

impl VectorField {
    pub fn new(state_vars: Vec<String>, components: Vec<Polynomial>) -> Result<Self, DynError> {
        let ring = Ring::new(state_vars)?;
        if components.len() != ring.arity() {
            return Err(DynError::ComponentCount {
                expected: ring.arity(),
                got: components.len(),
            });
        }
        for (i, c) in components.iter().enumerate() {
            if **c.ring() != *ring {
                return Err(DynError::ComponentRing { component: i });
            }
        }
        Ok(VectorField { ring, components })
    }

    /// Builds the field by parsing one expression per state variable.
    pub fn parse(state_vars: &[&str], exprs: &[&str]) -> Result<Self, DynError> {
        let ring = Ring::new(state_vars.to_vec())?;
        let mut components = Vec::with_capacity(exprs.len());
        for e in exprs {
            components.push(
                crate::parse::parse_polynomial(e, &ring)
                    .map_err(|e| DynError::Parse(e.to_string()))?,
            );
        }
        Self::new(ring.vars().to_vec(), components)
    }

    pub fn state_ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn state_vars(&self) -> &[String] {
        self.ring.vars()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    /// True iff the origin is an equilibrium: every component vanishes there.
    pub fn equilibrium_check(&self) -> bool {
        let origin: BTreeMap<String, Rational> = self
            .state_vars()
            .iter()
            .map(|v| (v.clone(), Rational::zero()))
            .collect();
        self.components
            .iter()
            .all(|c| c.evaluate(&origin).map(|v| v.is_zero()).unwrap_or(false))
    }
}

/// A parametric candidate function p(u, x): a polynomial over the ring
/// `params ++ state_vars`, linear or not in the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Template {
    params: Vec<String>,
    state_vars: Vec<String>,
    body: Polynomial,
}

impl Template {
    pub fn new(
        params: Vec<String>,
        state_vars: Vec<String>,
        body: Polynomial,
    ) -> Result<Self, DynError> {
        for p in &params {
            if state_vars.contains(p) {
                return Err(DynError::ParamStateOverlap(p.clone()));
            }
        }
        let mut all = params.clone();
        all.extend(state_vars.iter().cloned());
        let ring = Ring::new(all)?;
        if **body.ring() != *ring {
            let body = body.extend_ring(&ring)?;
            return Ok(Template { params, state_vars, body });
        }
        Ok(Template { params, state_vars, body })
    }

    pub fn parse(params: &[&str], state_vars: &[&str], expr: &str) -> Result<Self, DynError> {
        for p in params {
            if state_vars.contains(p) {
                return Err(DynError::ParamStateOverlap(p.to_string()));
            }
        }
        let mut all: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        all.extend(state_vars.iter().map(|s| s.to_string()));
        let ring = Ring::new(all)?;
        let body = crate::parse::parse_polynomial(expr, &ring)
            .map_err(|e| DynError::Parse(e.to_string()))?;
        Template::new(
            params.iter().map(|s| s.to_string()).collect(),
            state_vars.iter().map(|s| s.to_string()).collect(),
            body,
        )
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn state_vars(&self) -> &[String] {
        &self.state_vars
    }

    pub fn body(&self) -> &Polynomial {
        &self.body
    }

    /// Fixes every parameter, producing a polynomial over the state ring.
    pub fn instantiate(
        &self,
        values: &BTreeMap<String, Rational>,
    ) -> Result<Polynomial, DynError> {
        for p in &self.params {
            if !values.contains_key(p) {
                return Err(DynError::UnboundState(p.clone()));
            }
        }
        let binding: BTreeMap<String, Rational> = values
            .iter()
            .filter(|(k, _)| self.params.contains(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        if binding.is_empty() {
            let ring = Ring::new(self.state_vars.clone())?;
            return Ok(self.body.extend_ring(&ring)?);
        }
        let reduced = self.body.substitute(&binding)?;
        let ring = Ring::new(self.state_vars.clone())?;
        Ok(reduced.extend_ring(&ring)?)
    }
}

/// Pointwise rank: the index of the first nonvanishing Lie derivative at a
/// point, or `Infinite` when the whole certified chain vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(k) => write!(f, "{k}"),
            Rank::Infinite => write!(f, "inf"),
        }
    }
}

fn union_ring(p: &Polynomial, f: &VectorField) -> Result<Arc<Ring>, DynError> {
    let mut vars: Vec<String> = p.ring().vars().to_vec();
    for v in f.state_vars() {
        if !vars.contains(v) {
            vars.push(v.clone());
        }
    }
    Ok(Ring::new(vars)?)
}

fn lie_step(p: &Polynomial, f: &VectorField) -> Result<Polynomial, DynError> {
    let ring = union_ring(p, f)?;
    let p = p.extend_ring(&ring)?;
    let mut acc = Polynomial::zero(&ring);
    for (xi, fi) in f.state_vars().iter().zip(f.components()) {
        let dp = p.partial_derivative(xi)?;
        if dp.is_zero() {
            continue;
        }
        let fi = fi.extend_ring(&ring)?;
        acc = acc.add(&dp.mul(&fi)?)?;
    }
    Ok(acc)
}

/// k-th Lie derivative of `p` along `f`. Ring variables of `p` that are not
/// state variables of `f` are treated as constants; the result lives in the
/// union ring (p's variables first, then any missing state variables).
pub fn lie_derivative(p: &Polynomial, f: &VectorField, k: u32) -> Result<Polynomial, DynError> {
    let mut out = if k == 0 {
        p.clone()
    } else {
        lie_step(p, f)?
    };
    for _ in 1..k {
        out = lie_step(&out, f)?;
    }
    Ok(out)
}

/// Explicit memo for the Lie chain L^0 p, L^1 p, ... of one (polynomial,
/// field) pair. Owned by the caller; not internally synchronized.
pub struct LieCache {
    field: VectorField,
    chain: Vec<Polynomial>,
}

impl LieCache {
    pub fn new(p: Polynomial, field: VectorField) -> Self {
        LieCache { field, chain: vec![p] }
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    /// The k-th Lie derivative, computing and caching any missing prefix.
    pub fn get(&mut self, k: u32) -> Result<&Polynomial, DynError> {
        while self.chain.len() <= k as usize {
            let next = lie_step(self.chain.last().expect("nonempty chain"), &self.field)?;
            self.chain.push(next);
        }
        Ok(&self.chain[k as usize])
    }
}

fn check_parameter_free(p: &Polynomial, f: &VectorField) -> Result<(), DynError> {
    for v in p.ring().vars() {
        if !f.state_vars().contains(v) {
            return Err(DynError::ParameterInPointwise(v.clone()));
        }
    }
    Ok(())
}

fn check_point(point: &BTreeMap<String, Rational>, f: &VectorField) -> Result<(), DynError> {
    for v in f.state_vars() {
        if !point.contains_key(v) {
            return Err(DynError::UnboundState(v.clone()));
        }
    }
    Ok(())
}

/// Smallest k in 1..=bound with L^k p nonzero at `x0`, else `Infinite`.
///
/// `bound` must be at least the ideal-chain stabilization index of (p, f);
/// under that premise a fully vanishing prefix certifies that every higher
/// derivative vanishes too.
pub fn pointwise_rank(
    p: &Polynomial,
    f: &VectorField,
    x0: &BTreeMap<String, Rational>,
    bound: u32,
) -> Result<Rank, DynError> {
    if bound < 1 {
        return Err(DynError::ZeroBound);
    }
    check_parameter_free(p, f)?;
    check_point(x0, f)?;
    let mut cache = LieCache::new(p.clone(), f.clone());
    for k in 1..=bound {
        let lk = cache.get(k)?;
        let full: BTreeMap<String, Rational> = lk
            .ring()
            .vars()
            .iter()
            .map(|v| (v.clone(), x0.get(v).cloned().unwrap_or_else(Rational::zero)))
            .collect();
        if !lk.evaluate(&full)?.is_zero() {
            return Ok(Rank::Finite(k));
        }
    }
    Ok(Rank::Infinite)
}

/// True iff `x0` has finite rank and the rank-indexed Lie derivative is
/// strictly negative there.
pub fn in_transverse_set(
    p: &Polynomial,
    f: &VectorField,
    x0: &BTreeMap<String, Rational>,
    bound: u32,
) -> Result<bool, DynError> {
    match pointwise_rank(p, f, x0, bound)? {
        Rank::Infinite => Ok(false),
        Rank::Finite(k) => {
            let lk = lie_derivative(p, f, k)?;
            let full: BTreeMap<String, Rational> = lk
                .ring()
                .vars()
                .iter()
                .map(|v| (v.clone(), x0.get(v).cloned().unwrap_or_else(Rational::zero)))
                .collect();
            Ok(lk.evaluate(&full)?.is_negative())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn pt(pairs: &[(&str, Rational)]) -> BTreeMap<String, Rational> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    fn example_field() -> VectorField {
        VectorField::parse(&["x", "y"], &["-x", "y"]).unwrap()
    }

    fn cubic_field() -> VectorField {
        VectorField::parse(&["x", "y"], &["-x + y^2", "-x*y"]).unwrap()
    }

    #[test]
    fn lie_chain_of_the_saddle_example() {
        let f = example_field();
        let r = f.state_ring();
        let p = crate::parse::parse_polynomial("x + y^2", r).unwrap();
        let expect = ["x + y^2", "-x + 2*y^2", "x + 4*y^2", "-x + 8*y^2"];
        for (k, s) in expect.iter().enumerate() {
            let lk = lie_derivative(&p, &f, k as u32).unwrap();
            assert_eq!(lk, crate::parse::parse_polynomial(s, r).unwrap(), "order {k}");
        }
    }

    #[test]
    fn lie_derivative_with_parameters_held_constant() {
        let f = cubic_field();
        let t = Template::parse(&["a"], &["x", "y"], "x^2 + a*y^2").unwrap();
        let l1 = lie_derivative(t.body(), &f, 1).unwrap();
        let expect =
            crate::parse::parse_polynomial("-2*x^2 + 2*x*y^2 - 2*a*x*y^2", l1.ring()).unwrap();
        assert_eq!(l1, expect);
    }

    #[test]
    fn lie_cache_matches_direct_computation() {
        let f = cubic_field();
        let p = crate::parse::parse_polynomial("x^2 + y^2", f.state_ring()).unwrap();
        let mut cache = LieCache::new(p.clone(), f.clone());
        for k in (0..5).rev() {
            assert_eq!(*cache.get(k).unwrap(), lie_derivative(&p, &f, k).unwrap());
        }
    }

    #[test]
    fn composition_property() {
        let f = cubic_field();
        let p = crate::parse::parse_polynomial("x^2 + y^2", f.state_ring()).unwrap();
        let l3 = lie_derivative(&p, &f, 3).unwrap();
        let l1 = lie_derivative(&p, &f, 1).unwrap();
        assert_eq!(l3, lie_derivative(&l1, &f, 2).unwrap());
    }

    #[test]
    fn substitution_commutes_with_lie_differentiation() {
        let f = cubic_field();
        let t = Template::parse(&["a"], &["x", "y"], "x^2 + a*y^2").unwrap();
        let mut binding = BTreeMap::new();
        binding.insert("a".to_string(), int(3));
        let inst_then_lie =
            lie_derivative(&t.instantiate(&binding).unwrap(), &f, 1).unwrap();
        let lie_then_inst = lie_derivative(t.body(), &f, 1)
            .unwrap()
            .substitute(&binding)
            .unwrap();
        assert_eq!(
            inst_then_lie,
            lie_then_inst.extend_ring(inst_then_lie.ring()).unwrap()
        );
    }

    #[test]
    fn pointwise_ranks_of_the_saddle() {
        let f = example_field();
        let p = crate::parse::parse_polynomial("x + y^2", f.state_ring()).unwrap();
        let n = 2; // chain stabilization index for this pair
        assert_eq!(
            pointwise_rank(&p, &f, &pt(&[("x", int(0)), ("y", int(0))]), n).unwrap(),
            Rank::Infinite
        );
        assert_eq!(
            pointwise_rank(&p, &f, &pt(&[("x", int(1)), ("y", int(1))]), n).unwrap(),
            Rank::Finite(1)
        );
        assert_eq!(
            pointwise_rank(&p, &f, &pt(&[("x", int(2)), ("y", int(1))]), n).unwrap(),
            Rank::Finite(2)
        );
        assert!(matches!(
            pointwise_rank(&p, &f, &pt(&[("x", int(0)), ("y", int(0))]), 0),
            Err(DynError::ZeroBound)
        ));
    }

    #[test]
    fn transverse_membership() {
        let f = example_field();
        let p = crate::parse::parse_polynomial("x + y^2", f.state_ring()).unwrap();
        // L^1 p at (1,1) is 1 > 0: rank finite but wrong sign.
        assert!(!in_transverse_set(&p, &f, &pt(&[("x", int(1)), ("y", int(1))]), 2).unwrap());
        // Equilibrium: infinite rank.
        assert!(!in_transverse_set(&p, &f, &pt(&[("x", int(0)), ("y", int(0))]), 2).unwrap());

        let g = cubic_field();
        let q = crate::parse::parse_polynomial("x^2 + y^2", g.state_ring()).unwrap();
        // At (0,1): L^1 = L^2 = 0 and L^3 = -4 < 0.
        assert!(in_transverse_set(&q, &g, &pt(&[("x", int(0)), ("y", int(1))]), 3).unwrap());
    }

    #[test]
    fn rejects_parameters_in_pointwise_operations() {
        let f = cubic_field();
        let t = Template::parse(&["a"], &["x", "y"], "x^2 + a*y^2").unwrap();
        let e = pointwise_rank(t.body(), &f, &pt(&[("x", int(0)), ("y", int(0))]), 2);
        assert!(matches!(e, Err(DynError::ParameterInPointwise(_))));
    }

    #[test]
    fn equilibrium_checks() {
        assert!(cubic_field().equilibrium_check());
        assert!(example_field().equilibrium_check());
        let shifted = VectorField::parse(&["x", "y"], &["x + 1", "y"]).unwrap();
        assert!(!shifted.equilibrium_check());
    }

    #[test]
    fn vector_field_validation() {
        let r = Ring::new(vec!["x", "y"]).unwrap();
        let x = Polynomial::var(&r, "x").unwrap();
        assert!(matches!(
            VectorField::new(vec!["x".into(), "y".into()], vec![x.clone()]),
            Err(DynError::ComponentCount { .. })
        ));
        let other = Ring::new(vec!["x", "z"]).unwrap();
        let z = Polynomial::var(&other, "z").unwrap();
        assert!(matches!(
            VectorField::new(vec!["x".into(), "y".into()], vec![x, z]),
            Err(DynError::ComponentRing { component: 1 })
        ));
        assert!(matches!(
            Template::parse(&["x"], &["x", "y"], "x"),
            Err(DynError::ParamStateOverlap(_))
        ));
    }

    #[test]
    fn template_instantiation() {
        let t = Template::parse(&["a"], &["x", "y"], "x^2 + a*y^2").unwrap();
        let mut b = BTreeMap::new();
        b.insert("a".to_string(), int(1));
        let v = t.instantiate(&b).unwrap();
        assert_eq!(v.ring().vars(), &["x".to_string(), "y".to_string()]);
        assert_eq!(
            v,
            crate::parse::parse_polynomial("x^2 + y^2", v.ring()).unwrap()
        );
        assert!(t.instantiate(&BTreeMap::new()).is_err());
    }
}
