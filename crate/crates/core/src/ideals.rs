//! Polynomial ideals: Buchberger completion with membership certificates,
//! ideal membership, and the ascending-chain stabilization index of a Lie
//! derivative sequence.

use std::fmt;

use num_traits::{One, Zero};

use crate::dynamics::{DynError, LieCache, Template, VectorField};
use crate::poly::division::reduce_budgeted;
use crate::poly::{Monomial, MonomialOrder, PolyError, Polynomial};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdealError {
    DegreeOverflow { degree: u32, limit: u32 },
    BasisOverflow { size: usize, limit: usize },
    PairOverflow { limit: usize },
    ChainOverflow { steps: u32, limit: u32 },
    OrderArity { order: usize, ring: usize },
    Poly(PolyError),
    Dyn(String),
}

impl fmt::Display for IdealError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealError::DegreeOverflow { degree, limit } => {
                write!(f, "basis completion reached degree {degree}, over the limit {limit}")
            }
            IdealError::BasisOverflow { size, limit } => {
                write!(f, "basis grew to {size} elements, over the limit {limit}")
            }
            IdealError::PairOverflow { limit } => {
                write!(f, "basis completion exceeded {limit} pair reductions")
            }
            IdealError::ChainOverflow { steps, limit } => {
                write!(f, "derivative chain did not stabilize within {steps} of {limit} steps")
            }
            IdealError::OrderArity { order, ring } => {
                write!(f, "order arity {order} does not match ring arity {ring}")
            }
            IdealError::Poly(e) => write!(f, "{e}"),
            IdealError::Dyn(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for IdealError {}

impl From<PolyError> for IdealError {
    fn from(e: PolyError) -> Self {
        IdealError::Poly(e)
    }
}

impl From<DynError> for IdealError {
    fn from(e: DynError) -> Self {
        IdealError::Dyn(e.to_string())
    }
}

/// Guardrails for basis completion and chain iteration. `max_pairs` bounds
/// the number of S-pair reductions one completion may perform and
/// `max_steps` bounds the arithmetic volume inside a single reduction
/// (eliminations weighted by coefficient bit length, plus certificate term
/// products); coefficient growth makes runaway completions expensive long
/// before the degree or basis limits fire.
#[derive(Clone, Copy, Debug)]
pub struct IdealLimits {
    pub max_degree: u32,
    pub max_basis: usize,
    pub max_pairs: usize,
    pub max_steps: usize,
    pub max_chain: u32,
}

impl Default for IdealLimits {
    fn default() -> Self {
        IdealLimits {
            max_degree: 40,
            max_basis: 200,
            max_pairs: 1_000,
            max_steps: 20_000,
            max_chain: 24,
        }
    }
}

/// An ideal presented by generators, together with its reduced Groebner
/// basis and, for each basis element, a cofactor certificate expressing it
/// as a combination of the generators.
#[derive(Clone, Debug)]
pub struct IdealBasis {
    generators: Vec<Polynomial>,
    order: MonomialOrder,
    groebner: Vec<Polynomial>,
    certificates: Vec<Vec<Polynomial>>,
}

impl IdealBasis {
    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn groebner(&self) -> &[Polynomial] {
        &self.groebner
    }

    /// Cofactors of `groebner()[j]` with respect to `generators()`:
    /// `groebner[j] = sum_i certificates[j][i] * generators[i]`.
    pub fn certificates(&self) -> &[Vec<Polynomial>] {
        &self.certificates
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.groebner.is_empty()
    }
}

/// A basis element paired with its cofactor vector over the input generators.
#[derive(Clone)]
struct Tracked {
    poly: Polynomial,
    cofactors: Vec<Polynomial>,
}

impl Tracked {
    fn scale(&self, c: &Rational) -> Tracked {
        Tracked {
            poly: self.poly.scale(c),
            cofactors: self.cofactors.iter().map(|q| q.scale(c)).collect(),
        }
    }
}

/// Reduces `t.poly` by the polynomials in `basis`, updating the cofactor
/// vector so it still certifies the remainder.
fn reduce_tracked(
    t: &Tracked,
    basis: &[Tracked],
    order: &MonomialOrder,
    max_steps: usize,
) -> Result<Tracked, IdealError> {
    if basis.is_empty() {
        return Ok(t.clone());
    }
    let divisors: Vec<Polynomial> = basis.iter().map(|b| b.poly.clone()).collect();
    let res = reduce_budgeted(&t.poly, &divisors, order, max_steps)?;
    let mut cofactors = t.cofactors.clone();
    // Certificate updates are charged against the same budget as the
    // division: the cofactor vectors can outgrow the polynomials they
    // certify.
    let mut spent = 0usize;
    for (q, b) in res.quotients.iter().zip(basis) {
        if q.is_zero() {
            continue;
        }
        let qn = q.terms().count();
        for (c, bc) in cofactors.iter_mut().zip(&b.cofactors) {
            spent = spent.saturating_add(qn.saturating_mul(bc.terms().count()));
            if spent > max_steps {
                return Err(IdealError::Poly(PolyError::ReductionBudget { limit: max_steps }));
            }
            *c = c.sub(&q.mul(bc)?)?;
        }
    }
    Ok(Tracked { poly: res.remainder, cofactors })
}

fn s_polynomial(
    f: &Tracked,
    g: &Tracked,
    order: &MonomialOrder,
) -> Result<Tracked, IdealError> {
    let (fm, fc) = f.poly.lead(order).expect("nonzero basis element");
    let (gm, gc) = g.poly.lead(order).expect("nonzero basis element");
    let l = fm.lcm(gm);
    let mf = fm.div_into(&l);
    let mg = gm.div_into(&l);
    let cf = Rational::one() / fc.clone();
    let cg = Rational::one() / gc.clone();
    let poly = f.poly.mul_term(&mf, &cf).sub(&g.poly.mul_term(&mg, &cg))?;
    let mut cofactors = Vec::with_capacity(f.cofactors.len());
    for (a, b) in f.cofactors.iter().zip(&g.cofactors) {
        cofactors.push(a.mul_term(&mf, &cf).sub(&b.mul_term(&mg, &cg))?);
    }
    Ok(Tracked { poly, cofactors })
}

/// Buchberger completion with the normal selection strategy (pairs ordered by
/// total degree of the leading-monomial lcm), the coprime-lead criterion, and
/// the chain criterion. Returns a reduced basis with membership certificates.
pub fn groebner_basis(
    gens: &[Polynomial],
    order: &MonomialOrder,
    limits: &IdealLimits,
) -> Result<IdealBasis, IdealError> {
    let nonzero: Vec<(usize, &Polynomial)> =
        gens.iter().enumerate().filter(|(_, g)| !g.is_zero()).collect();
    if nonzero.is_empty() {
        return Ok(IdealBasis {
            generators: gens.to_vec(),
            order: order.clone(),
            groebner: Vec::new(),
            certificates: Vec::new(),
        });
    }
    let ring = nonzero[0].1.ring().clone();
    if order.arity() != ring.arity() {
        return Err(IdealError::OrderArity { order: order.arity(), ring: ring.arity() });
    }
    for (_, g) in &nonzero {
        if **g.ring() != *ring {
            return Err(IdealError::Poly(PolyError::RingMismatch {
                left: ring.vars().to_vec(),
                right: g.ring().vars().to_vec(),
            }));
        }
    }

    let unit = |i: usize| -> Vec<Polynomial> {
        (0..gens.len())
            .map(|j| {
                if i == j {
                    Polynomial::one(&ring)
                } else {
                    Polynomial::zero(&ring)
                }
            })
            .collect()
    };

    let mut basis: Vec<Tracked> = nonzero
        .iter()
        .map(|(i, g)| Tracked { poly: (*g).clone(), cofactors: unit(*i) })
        .collect();

    // Pending pairs keyed by (lcm degree, i, j) for normal selection.
    let mut reductions = 0usize;
    let mut pairs: Vec<(u32, usize, usize)> = Vec::new();
    let mut done: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    let lead = |b: &Tracked| b.poly.lead(order).map(|(m, _)| m.clone()).expect("nonzero");
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            let l = lead(&basis[i]).lcm(&lead(&basis[j]));
            pairs.push((l.total_degree(), i, j));
        }
    }

    while !pairs.is_empty() {
        pairs.sort_by_key(|&(d, i, j)| std::cmp::Reverse((d, i, j)));
        let (_, i, j) = pairs.pop().expect("nonempty");
        done.insert((i, j));

        let li = lead(&basis[i]);
        let lj = lead(&basis[j]);
        if li.coprime(&lj) {
            continue;
        }
        let lcm_ij = li.lcm(&lj);
        // Chain criterion: a third element whose lead divides the lcm and
        // whose pairs with both i and j are already settled.
        let chained = (0..basis.len()).any(|k| {
            if k == i || k == j {
                return false;
            }
            let lk = lead(&basis[k]);
            if !lk.divides(&lcm_ij) {
                return false;
            }
            let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
            done.contains(&key(i, k)) && done.contains(&key(j, k))
        });
        if chained {
            continue;
        }

        if reductions == limits.max_pairs {
            return Err(IdealError::PairOverflow { limit: limits.max_pairs });
        }
        reductions += 1;
        let s = s_polynomial(&basis[i], &basis[j], order)?;
        let rem = reduce_tracked(&s, &basis, order, limits.max_steps)?;
        if rem.poly.is_zero() {
            continue;
        }
        if rem.poly.total_degree() > limits.max_degree {
            return Err(IdealError::DegreeOverflow {
                degree: rem.poly.total_degree(),
                limit: limits.max_degree,
            });
        }
        let k = basis.len();
        if k + 1 > limits.max_basis {
            return Err(IdealError::BasisOverflow { size: k + 1, limit: limits.max_basis });
        }
        let rem_lead = rem.poly.lead(order).map(|(m, _)| m.clone()).unwrap();
        for (e, b) in basis.iter().enumerate() {
            let l = lead(b).lcm(&rem_lead);
            pairs.push((l.total_degree(), e, k));
        }
        basis.push(rem);
    }

    // Minimalize: drop elements whose lead is divisible by another lead.
    let mut keep: Vec<Tracked> = Vec::new();
    'outer: for (i, b) in basis.iter().enumerate() {
        let lb = lead(b);
        for (j, other) in basis.iter().enumerate() {
            if i == j {
                continue;
            }
            let lo = lead(other);
            if lo.divides(&lb) && (lo != lb || j < i) {
                continue 'outer;
            }
        }
        keep.push(b.clone());
    }

    // Inter-reduce tails and normalize to monic.
    let mut reduced: Vec<Tracked> = Vec::new();
    for i in 0..keep.len() {
        let others: Vec<Tracked> = keep
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, t)| t.clone())
            .collect();
        let r = if others.is_empty() {
            keep[i].clone()
        } else {
            reduce_tracked(&keep[i], &others, order, limits.max_steps)?
        };
        debug_assert!(!r.poly.is_zero(), "minimal basis element reduced to zero");
        let lc = r.poly.lead(order).expect("nonzero").1.clone();
        reduced.push(r.scale(&(Rational::one() / lc)));
    }
    reduced.sort_by(|a, b| {
        order.cmp(
            a.poly.lead(order).expect("nonzero").0,
            b.poly.lead(order).expect("nonzero").0,
        )
    });

    // Recomposing every certificate is quadratic in their size, so the
    // check only runs while they are small.
    #[cfg(debug_assertions)]
    for t in &reduced {
        let work: usize = t
            .cofactors
            .iter()
            .zip(gens)
            .map(|(c, g)| c.terms().count() * g.terms().count())
            .sum();
        if work > 10_000 {
            continue;
        }
        let mut back = Polynomial::zero(&ring);
        for (c, g) in t.cofactors.iter().zip(gens) {
            back = back.add(&c.mul(g).expect("same ring")).expect("same ring");
        }
        debug_assert_eq!(back, t.poly, "cofactor certificate broken");
    }

    Ok(IdealBasis {
        generators: gens.to_vec(),
        order: order.clone(),
        groebner: reduced.iter().map(|t| t.poly.clone()).collect(),
        certificates: reduced.into_iter().map(|t| t.cofactors).collect(),
    })
}

/// True iff `p` reduces to zero modulo the ideal's Groebner basis.
pub fn member(p: &Polynomial, basis: &IdealBasis) -> Result<bool, IdealError> {
    member_within(p, basis, usize::MAX)
}

fn member_within(
    p: &Polynomial,
    basis: &IdealBasis,
    max_steps: usize,
) -> Result<bool, IdealError> {
    if basis.groebner.is_empty() {
        return Ok(p.is_zero());
    }
    if p.is_zero() {
        return Ok(true);
    }
    let res = reduce_budgeted(p, &basis.groebner, &basis.order, max_steps)?;
    Ok(res.remainder.is_zero())
}

/// Diagnostics from a chain-bound computation.
#[derive(Clone, Debug)]
pub struct ChainReport {
    pub bound: u32,
    pub basis_sizes: Vec<usize>,
    pub lie_degrees: Vec<u32>,
}

/// The least i >= 1 such that the (i+1)-th Lie derivative of the template
/// body lies in the ideal generated by the first i derivatives. Parameters
/// are carried as ring variables, so the bound covers every instantiation.
pub fn chain_bound(
    template: &Template,
    field: &VectorField,
    limits: &IdealLimits,
) -> Result<u32, IdealError> {
    chain_bound_with_report(template, field, limits).map(|r| r.bound)
}

pub fn chain_bound_with_report(
    template: &Template,
    field: &VectorField,
    limits: &IdealLimits,
) -> Result<ChainReport, IdealError> {
    let mut cache = LieCache::new(template.body().clone(), field.clone());
    let ring = cache.get(1)?.ring().clone();
    let order = ring.default_order();
    let mut gens: Vec<Polynomial> = Vec::new();
    let mut report = ChainReport { bound: 0, basis_sizes: Vec::new(), lie_degrees: Vec::new() };
    for i in 1..=limits.max_chain {
        let li = cache.get(i)?.extend_ring(&ring)?;
        report.lie_degrees.push(li.total_degree());
        gens.push(li);
        let basis = groebner_basis(&gens, &order, limits)?;
        report.basis_sizes.push(basis.groebner().len());
        let next = cache.get(i + 1)?.extend_ring(&ring)?;
        if member_within(&next, &basis, limits.max_steps)? {
            report.bound = i;
            return Ok(report);
        }
    }
    Err(IdealError::ChainOverflow { steps: limits.max_chain, limit: limits.max_chain })
}

/// Brute-force membership witness: searches for cofactors of total degree at
/// most `degree_cap` with `p = sum c_i * gens[i]` by solving the linear
/// system on undetermined coefficients. Independent of the Groebner path and
/// deliberately naive; used as a cross-check oracle.
pub fn cofactor_search(
    p: &Polynomial,
    gens: &[Polynomial],
    degree_cap: u32,
) -> Option<Vec<Polynomial>> {
    let nonzero: Vec<&Polynomial> = gens.iter().filter(|g| !g.is_zero()).collect();
    if nonzero.is_empty() {
        return if p.is_zero() { Some(vec![Polynomial::zero(p.ring()); gens.len()]) } else { None };
    }
    let ring = p.ring().clone();
    let arity = ring.arity();

    let monomials_up_to = |d: u32| -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), 0u32)];
        while let Some((exps, used)) = stack.pop() {
            if exps.len() == arity {
                out.push(Monomial::from_exps(exps));
                continue;
            }
            for e in 0..=(d - used) {
                let mut next = exps.clone();
                next.push(e);
                stack.push((next, used + e));
            }
        }
        out.sort();
        out
    };

    for d in 0..=degree_cap {
        let monos = monomials_up_to(d);
        // Unknown j*|monos|+m is the coefficient of monos[m] in cofactor j.
        let cols = nonzero.len() * monos.len();
        let mut row_index: std::collections::BTreeMap<Monomial, usize> =
            std::collections::BTreeMap::new();
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        let mut rhs: Vec<Rational> = Vec::new();
        let touch = |mono: &Monomial,
                         rows: &mut Vec<Vec<Rational>>,
                         rhs: &mut Vec<Rational>,
                         row_index: &mut std::collections::BTreeMap<Monomial, usize>|
         -> usize {
            *row_index.entry(mono.clone()).or_insert_with(|| {
                rows.push(vec![Rational::zero(); cols]);
                rhs.push(Rational::zero());
                rows.len() - 1
            })
        };
        for (j, g) in nonzero.iter().enumerate() {
            for (mi, m) in monos.iter().enumerate() {
                let col = j * monos.len() + mi;
                for (gm, gc) in g.terms() {
                    let target = m.mul(gm);
                    let r = touch(&target, &mut rows, &mut rhs, &mut row_index);
                    rows[r][col] = rows[r][col].clone() + gc.clone();
                }
            }
        }
        for (pm, pc) in p.terms() {
            let r = touch(pm, &mut rows, &mut rhs, &mut row_index);
            rhs[r] = pc.clone();
        }

        if let Some(solution) = solve_linear(&mut rows, &mut rhs) {
            let mut out = Vec::with_capacity(gens.len());
            let mut k = 0;
            for g in gens {
                if g.is_zero() {
                    out.push(Polynomial::zero(&ring));
                    continue;
                }
                let terms = monos
                    .iter()
                    .enumerate()
                    .map(|(mi, m)| (m.clone(), solution[k * monos.len() + mi].clone()));
                out.push(Polynomial::from_terms(&ring, terms));
                k += 1;
            }
            #[cfg(debug_assertions)]
            {
                let mut back = Polynomial::zero(&ring);
                for (c, g) in out.iter().zip(gens) {
                    back = back.add(&c.mul(g).expect("same ring")).expect("same ring");
                }
                debug_assert_eq!(back, *p, "cofactor search produced a bad witness");
            }
            return Some(out);
        }
    }
    None
}

/// Gaussian elimination; returns any solution of `rows * x = rhs` or `None`
/// when inconsistent. Free variables are set to zero.
fn solve_linear(rows: &mut [Vec<Rational>], rhs: &mut [Rational]) -> Option<Vec<Rational>> {
    let nrows = rows.len();
    let ncols = if nrows == 0 { 0 } else { rows[0].len() };
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut r = 0;
    for c in 0..ncols {
        if r >= nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        rhs.swap(r, p);
        let inv = Rational::one() / rows[r][c].clone();
        for x in rows[r][c..].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        rhs[r] = rhs[r].clone() * inv;
        for i in 0..nrows {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let factor = rows[i][c].clone();
            let pivot_row = rows[r][c..ncols].to_vec();
            for (cell, piv) in rows[i][c..ncols].iter_mut().zip(&pivot_row) {
                let delta = factor.clone() * piv.clone();
                *cell = cell.clone() - delta;
            }
            let delta = factor * rhs[r].clone();
            rhs[i] = rhs[i].clone() - delta;
        }
        pivot_of_col[c] = Some(r);
        r += 1;
    }
    // Inconsistent when a zero row has nonzero rhs.
    if rhs[r..nrows].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (c, p) in pivot_of_col.iter().enumerate() {
        if let Some(p) = p {
            x[c] = rhs[*p].clone();
        }
    }
    Some(x)
}
