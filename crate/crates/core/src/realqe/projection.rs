//! Projection machinery for cylindrical decomposition: univariate views of
//! multivariate polynomials, pseudo-division, exact resultants, and the
//! per-level projection operator (coefficients, discriminant surrogates,
//! pairwise resultants).

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::poly::{division, MonomialOrder, Polynomial, Ring};
use crate::rational::Rational;

/// Projection failures that make the decomposition unreliable; callers
/// surface these as an unknown verdict rather than guessing. The basis
/// refinement removes repeated and shared factors up front, so these only
/// fire if that invariant is broken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProjError {
    /// A basis polynomial has a repeated factor in the projection variable,
    /// so its discriminant vanishes identically and delineability is not
    /// certified.
    RepeatedFactor(String),
    /// Two basis polynomials share a factor in the projection variable, so
    /// their resultant vanishes identically.
    SharedFactor(String, String),
}

impl std::fmt::Display for ProjError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProjError::RepeatedFactor(p) => {
                write!(f, "repeated factor obstructs projection of {p}")
            }
            ProjError::SharedFactor(p, q) => {
                write!(f, "shared factor obstructs projection of the pair {p}, {q}")
            }
        }
    }
}

impl std::error::Error for ProjError {}

/// Coefficients of `p` in the variable `idx`, ascending; each coefficient is
/// a polynomial over the same ring that does not mention `idx`.
pub fn uni_coeffs(p: &Polynomial, idx: usize) -> Vec<Polynomial> {
    let deg = p.degree_in(idx) as usize;
    let mut buckets: Vec<Vec<(crate::poly::Monomial, Rational)>> = vec![Vec::new(); deg + 1];
    for (m, c) in p.terms() {
        let k = m.exp(idx) as usize;
        let exps: Vec<u32> =
            (0..p.ring().arity()).map(|i| if i == idx { 0 } else { m.exp(i) }).collect();
        buckets[k].push((crate::poly::Monomial::from_exps(exps), c.clone()));
    }
    let mut out: Vec<Polynomial> =
        buckets.into_iter().map(|terms| Polynomial::from_terms(p.ring(), terms)).collect();
    while out.len() > 1 && out.last().map(|c| c.is_zero()).unwrap_or(false) {
        out.pop();
    }
    out
}

/// Rebuilds a polynomial from its univariate view in `idx`.
pub fn from_uni_coeffs(coeffs: &[Polynomial], idx: usize, ring: &Arc<Ring>) -> Polynomial {
    let mut acc = Polynomial::zero(ring);
    for (k, c) in coeffs.iter().enumerate() {
        let mut exps = vec![0u32; ring.arity()];
        exps[idx] = k as u32;
        let xk = crate::poly::Monomial::from_exps(exps);
        acc = acc.add(&c.mul_term(&xk, &Rational::one())).expect("same ring");
    }
    acc
}

fn view_degree(v: &[Polynomial]) -> usize {
    let mut d = v.len();
    while d > 0 && v[d - 1].is_zero() {
        d -= 1;
    }
    d.saturating_sub(1)
}

fn view_is_zero(v: &[Polynomial]) -> bool {
    v.iter().all(|c| c.is_zero())
}

fn trim(mut v: Vec<Polynomial>) -> Vec<Polynomial> {
    while v.len() > 1 && v.last().map(|c| c.is_zero()).unwrap_or(false) {
        v.pop();
    }
    v
}

/// Pseudo-remainder: returns R with lc(b)^(da-db+1) * a = q*b + R, as a
/// coefficient view. Requires deg a >= deg b and b nonzero in the view.
fn pseudo_rem(a: &[Polynomial], b: &[Polynomial], ring: &Arc<Ring>) -> Vec<Polynomial> {
    let da = view_degree(a);
    let db = view_degree(b);
    debug_assert!(!view_is_zero(b) && da >= db);
    let d = b[db].clone();
    let mut r: Vec<Polynomial> = a.to_vec();
    let mut mult_left = da - db + 1;
    loop {
        let dr = view_degree(&r);
        if view_is_zero(&r) || dr < db {
            break;
        }
        let lr = r[dr].clone();
        let shift = dr - db;
        // r := d*r - lr * x^shift * b
        let mut next = vec![Polynomial::zero(ring); dr.max(db + shift) + 1];
        for (i, c) in r.iter().enumerate() {
            next[i] = c.mul(&d).expect("same ring");
        }
        for (i, c) in b.iter().enumerate() {
            if i > db {
                break;
            }
            let t = c.mul(&lr).expect("same ring");
            next[i + shift] = next[i + shift].sub(&t).expect("same ring");
        }
        debug_assert!(next[dr].is_zero());
        r = trim(next);
        mult_left -= 1;
        if mult_left == 0 {
            break;
        }
    }
    // Standardize the multiplier to exactly lc(b)^(da-db+1).
    for _ in 0..mult_left {
        for c in r.iter_mut() {
            *c = c.mul(&d).expect("same ring");
        }
    }
    r
}

/// Exact polynomial division; panics in debug builds when not exact.
fn exact_div(p: &Polynomial, q: &Polynomial, order: &MonomialOrder) -> Polynomial {
    let res = division::reduce(p, std::slice::from_ref(q), order).expect("division inputs valid");
    debug_assert!(res.remainder.is_zero(), "division must be exact");
    res.quotients.into_iter().next().expect("one divisor")
}

fn poly_pow(p: &Polynomial, k: usize) -> Polynomial {
    let mut acc = Polynomial::one(p.ring());
    for _ in 0..k {
        acc = acc.mul(p).expect("same ring");
    }
    acc
}

/// Exact resultant of `f` and `g` with respect to variable `idx`, computed
/// by the pseudo-remainder recursion with explicit factor bookkeeping.
pub fn resultant(f: &Polynomial, g: &Polynomial, idx: usize) -> Polynomial {
    let ring = f.ring().clone();
    let order = ring.default_order();
    let a = uni_coeffs(f, idx);
    let b = uni_coeffs(g, idx);
    resultant_view(&a, &b, &ring, &order)
}

fn resultant_view(
    a: &[Polynomial],
    b: &[Polynomial],
    ring: &Arc<Ring>,
    order: &MonomialOrder,
) -> Polynomial {
    let da = view_degree(a);
    let db = view_degree(b);
    if view_is_zero(a) || view_is_zero(b) {
        return Polynomial::zero(ring);
    }
    if da == 0 && db == 0 {
        return Polynomial::one(ring);
    }
    if da < db {
        let r = resultant_view(b, a, ring, order);
        return if (da * db) % 2 == 1 { r.neg() } else { r };
    }
    if db == 0 {
        return poly_pow(&b[0], da);
    }
    // lc(b)^(da-db+1) * a = q*b + r
    let r = pseudo_rem(a, b, ring);
    if view_is_zero(&r) {
        return Polynomial::zero(ring);
    }
    let dr = view_degree(&r);
    let delta = da - db;
    let sub = resultant_view(b, &r, ring, order);
    // res(a, b) = (-1)^(da*db) * lc(b)^(da - dr - (delta+1)*db) * res(b, r)
    let lcb = &b[db];
    let exp = da as i64 - dr as i64 - ((delta + 1) * db) as i64;
    let adjusted = if exp >= 0 {
        sub.mul(&poly_pow(lcb, exp as usize)).expect("same ring")
    } else {
        exact_div(&sub, &poly_pow(lcb, (-exp) as usize), order)
    };
    if (da * db) % 2 == 1 {
        adjusted.neg()
    } else {
        adjusted
    }
}

/// Greatest common divisor over the rationals, returned canonical (primitive
/// with positive leading coefficient). gcd(0, 0) = 0; a nonzero constant
/// argument makes the gcd 1.
pub fn mgcd(p: &Polynomial, q: &Polynomial) -> Polynomial {
    if p.is_zero() {
        return canonical(q);
    }
    if q.is_zero() {
        return canonical(p);
    }
    let ring = p.ring().clone();
    let top = (0..ring.arity()).rev().find(|&i| p.mentions(i) || q.mentions(i));
    let Some(v) = top else {
        return Polynomial::one(&ring);
    };
    // A divisor of a polynomial free of v is itself free of v, so only the
    // other side's content with respect to v can contribute.
    if !p.mentions(v) {
        return mgcd(p, &content_in(q, v));
    }
    if !q.mentions(v) {
        return mgcd(&content_in(p, v), q);
    }
    let order = ring.default_order();
    let cp = content_in(p, v);
    let cq = content_in(q, v);
    let c = mgcd(&cp, &cq);
    // Primitive pseudo-remainder sequence on the primitive parts.
    let mut a = uni_coeffs(&exact_div(p, &cp, &order), v);
    let mut b = uni_coeffs(&exact_div(q, &cq, &order), v);
    if view_degree(&a) < view_degree(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let r = pseudo_rem(&a, &b, &ring);
        if view_is_zero(&r) {
            break;
        }
        if view_degree(&r) == 0 {
            return canonical(&c);
        }
        a = b;
        b = primitive_view(&r, v, &ring, &order);
    }
    let g = from_uni_coeffs(&b, v, &ring);
    let gp = exact_div(&g, &content_in(&g, v), &order);
    canonical(&c.mul(&gp).expect("same ring"))
}

/// Content of nonzero `p` with respect to variable `v`: the gcd of its
/// coefficient polynomials in the remaining variables, canonical.
pub fn content_in(p: &Polynomial, v: usize) -> Polynomial {
    let mut acc = Polynomial::zero(p.ring());
    for c in uni_coeffs(p, v) {
        acc = mgcd(&acc, &c);
        if acc.is_constant() && !acc.is_zero() {
            break;
        }
    }
    acc
}

fn primitive_view(
    r: &[Polynomial],
    v: usize,
    ring: &Arc<Ring>,
    order: &MonomialOrder,
) -> Vec<Polynomial> {
    let g = from_uni_coeffs(r, v, ring);
    let c = content_in(&g, v);
    uni_coeffs(&exact_div(&g, &c, order), v)
}

/// Squarefree part of `p` with respect to `v`: `p / gcd(p, dp/dv)`. Keeps
/// the root set in `v` while dropping multiplicities.
pub fn squarefree_in(p: &Polynomial, v: usize) -> Polynomial {
    let order = p.ring().default_order();
    let name = p.ring().var_name(v).to_string();
    let dp = p.partial_derivative(&name).expect("variable belongs to the ring");
    let g = mgcd(p, &dp);
    if g.is_constant() {
        canonical(p)
    } else {
        canonical(&exact_div(p, &g, &order))
    }
}

/// Resultant of `f` with its own derivative in `idx`: vanishes exactly where
/// `f` has a repeated root (or a leading-coefficient collapse) in that
/// variable. Shares the discriminant's zero set up to the leading
/// coefficient factor, which the projection carries separately.
pub fn disc_surrogate(f: &Polynomial, idx: usize) -> Result<Polynomial, crate::poly::PolyError> {
    let name = f.ring().var_name(idx).to_string();
    let df = f.partial_derivative(&name)?;
    if df.is_zero() {
        return Ok(Polynomial::zero(f.ring()));
    }
    Ok(resultant(f, &df, idx))
}

/// Canonical representative for deduplication: primitive with positive
/// leading coefficient under the ring's default order.
pub(crate) fn canonical(p: &Polynomial) -> Polynomial {
    if p.is_zero() {
        return p.clone();
    }
    let order = p.ring().default_order();
    let n = p.normalized_primitive(&order);
    match n.lead(&order) {
        Some((_, c)) if *c < Rational::zero() => n.neg(),
        _ => n,
    }
}

/// Levels of a projection: `levels[i]` holds the polynomials whose highest
/// variable (in the elimination order) is `order[i]`. Index 0 is the first
/// lifting variable.
pub struct Projection {
    pub order: Vec<usize>,
    pub levels: Vec<Vec<Polynomial>>,
}

/// Refines a set of polynomials that all mention `var` into a squarefree,
/// pairwise coprime basis of polynomials primitive in `var`, with the same
/// union of roots. Extracted contents (factors free of `var`) are returned
/// separately so the caller can file them at their own levels.
fn refine_basis(current: &[Polynomial], var: usize) -> (Vec<Polynomial>, Vec<Polynomial>) {
    let mut basis: Vec<Polynomial> = Vec::new();
    let mut contents: Vec<Polynomial> = Vec::new();
    let mut work: Vec<Polynomial> = current.to_vec();
    while let Some(f) = work.pop() {
        if f.is_zero() || f.is_constant() {
            continue;
        }
        // Split pieces can lose the main variable entirely.
        if !f.mentions(var) {
            contents.push(canonical(&f));
            continue;
        }
        let order = f.ring().default_order();
        let c = content_in(&f, var);
        if !c.is_constant() {
            contents.push(c.clone());
        }
        let g = squarefree_in(&exact_div(&f, &c, &order), var);
        let overlap = basis
            .iter()
            .enumerate()
            .find_map(|(i, b)| {
                let h = mgcd(&g, b);
                (!h.is_constant()).then_some((i, h))
            });
        match overlap {
            None => basis.push(g),
            Some((i, h)) => {
                // Replace the overlapping pair by the coprime split
                // b/h, g/h, h; total degree in `var` strictly drops.
                let b = basis.swap_remove(i);
                work.push(exact_div(&b, &h, &order));
                work.push(exact_div(&g, &h, &order));
                work.push(h);
            }
        }
    }
    (basis, contents)
}

/// Builds the full projection of `polys` under the variable order `order`
/// (a permutation of ring indices; `order[0]` is lifted first). Constants
/// are dropped. Each level keeps the input polynomials for sign evaluation,
/// while discriminants and resultants are taken over a squarefree coprime
/// basis with the same roots, so repeated or shared factors never make them
/// vanish identically.
pub fn project(polys: &[Polynomial], order: &[usize]) -> Result<Projection, ProjError> {
    let k = order.len();
    let mut levels: Vec<Vec<Polynomial>> = vec![Vec::new(); k];
    let mut seen: Vec<BTreeSet<String>> = vec![BTreeSet::new(); k];

    let level_of = |p: &Polynomial| -> Option<usize> {
        let mut lvl = None;
        for (pos, &v) in order.iter().enumerate() {
            if p.mentions(v) {
                lvl = Some(pos);
            }
        }
        lvl
    };

    let push = |p: &Polynomial,
                    levels: &mut Vec<Vec<Polynomial>>,
                    seen: &mut Vec<BTreeSet<String>>| {
        if p.is_zero() || p.is_constant() {
            return;
        }
        let c = canonical(p);
        if let Some(lvl) = level_of(&c) {
            let key = format!("{c}");
            if seen[lvl].insert(key) {
                levels[lvl].push(c);
            }
        }
    };

    for p in polys {
        push(p, &mut levels, &mut seen);
    }

    // Project from the top level down; each step only adds polynomials at
    // strictly lower levels.
    for lvl in (1..k).rev() {
        let var = order[lvl];
        let current = levels[lvl].clone();
        for f in &current {
            for c in uni_coeffs(f, var) {
                push(&c, &mut levels, &mut seen);
            }
        }
        let (basis, contents) = refine_basis(&current, var);
        for c in &contents {
            push(c, &mut levels, &mut seen);
        }
        for b in &basis {
            for c in uni_coeffs(b, var) {
                push(&c, &mut levels, &mut seen);
            }
            if b.degree_in(var) >= 2 {
                let d = disc_surrogate(b, var).expect("derivative stays in ring");
                if d.is_zero() {
                    return Err(ProjError::RepeatedFactor(format!("{b}")));
                }
                push(&d, &mut levels, &mut seen);
            }
        }
        for (i, f) in basis.iter().enumerate() {
            for g in basis.iter().skip(i + 1) {
                let r = resultant(f, g, var);
                if r.is_zero() {
                    return Err(ProjError::SharedFactor(format!("{f}"), format!("{g}")));
                }
                push(&r, &mut levels, &mut seen);
            }
        }
    }

    Ok(Projection { order: order.to_vec(), levels })
}
