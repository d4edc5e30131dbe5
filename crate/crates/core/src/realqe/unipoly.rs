//! Dense univariate polynomials over the rationals: the base arithmetic for
//! Sturm sequences, real-root isolation, and algebraic numbers.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::poly::Polynomial;
use crate::rational::{simplest_between, Rational};

/// Coefficients in ascending degree order; the leading entry is nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// x - c.
    pub fn linear_root(c: &Rational) -> Self {
        Self::new(vec![-c.clone(), Rational::one()])
    }

    pub fn from_coeffs(coeffs: &[Rational]) -> Self {
        Self::new(coeffs.to_vec())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree; 0 for constants including the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + crate::rational::to_f64(c);
        }
        acc
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        UniPoly::new(out)
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) - other.coeff(i));
        }
        UniPoly::new(out)
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn scale(&self, c: &Rational) -> UniPoly {
        if c.is_zero() {
            return UniPoly::zero();
        }
        UniPoly { coeffs: self.coeffs.iter().map(|k| k * c).collect() }
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
            .collect();
        UniPoly::new(out)
    }

    /// Quotient and remainder of field division.
    pub fn divrem(&self, divisor: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.degree() < divisor.degree() || self.is_zero() {
            return (UniPoly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lead_inv = Rational::one() / divisor.leading();
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let q = rem[i].clone() * lead_inv.clone();
            if q.is_zero() {
                continue;
            }
            quot[i - dd] = q.clone();
            for (j, c) in divisor.coeffs.iter().enumerate() {
                let delta = c * &q;
                rem[i - dd + j] -= delta;
            }
        }
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    pub fn rem(&self, divisor: &UniPoly) -> UniPoly {
        self.divrem(divisor).1
    }

    /// Monic greatest common divisor; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).primitive();
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Rational::one() / self.leading()))
    }

    /// Divides out the positive rational content, then fixes the leading
    /// coefficient's sign to positive. Preserves the root set and, up to a
    /// positive factor, all evaluation signs when the sign is kept; here the
    /// sign IS normalized, so use only where the root set matters.
    pub fn primitive(&self) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        let lead = self.leading();
        self.scale(&(Rational::one() / lead.abs()))
    }

    /// Squarefree part: self / gcd(self, self').
    pub fn squarefree_part(&self) -> UniPoly {
        if self.degree() == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.monic();
        }
        let (q, r) = self.divrem(&g);
        debug_assert!(r.is_zero(), "gcd must divide exactly");
        q.monic()
    }

    /// Cauchy bound: every real root has absolute value below this.
    pub fn root_bound(&self) -> Rational {
        if self.coeffs.len() <= 1 {
            return Rational::one();
        }
        let lead = self.leading().abs();
        let mut max = Rational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let q = c.abs() / lead.clone();
            if q > max {
                max = q;
            }
        }
        max + Rational::one()
    }

    /// Views a multivariate polynomial mentioning at most the single ring
    /// variable `var` as a dense univariate polynomial.
    pub fn from_multivariate(p: &Polynomial, var: &str) -> Option<UniPoly> {
        let idx = p.ring().index_of(var)?;
        for (i, _) in p.ring().vars().iter().enumerate() {
            if i != idx && p.mentions(i) {
                return None;
            }
        }
        let mut coeffs = vec![Rational::zero(); p.degree_in(idx) as usize + 1];
        for (m, c) in p.terms() {
            coeffs[m.exp(idx) as usize] = c.clone();
        }
        Some(UniPoly::new(coeffs))
    }
}

/// Sign of a rational as -1, 0, or 1.
pub fn sign(q: &Rational) -> i8 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// Sturm chain of a squarefree polynomial: p, p', then negated remainders.
/// Each element is content-normalized by a positive factor, which preserves
/// every evaluation sign.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<UniPoly>,
}

impl SturmChain {
    pub fn new(p: &UniPoly) -> Self {
        let mut chain = Vec::new();
        if p.is_zero() {
            return SturmChain { chain };
        }
        chain.push(p.clone());
        let d = p.derivative();
        if d.is_zero() {
            return SturmChain { chain };
        }
        chain.push(d);
        loop {
            let n = chain.len();
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            // Scale by a positive factor to keep coefficients small, then
            // negate as the chain construction requires.
            let lead_abs = r.leading().abs();
            chain.push(r.scale(&(Rational::one() / lead_abs)).neg());
            if chain.last().expect("just pushed").is_constant() {
                break;
            }
        }
        SturmChain { chain }
    }

    /// Sign variations of the chain evaluated at `x`.
    pub fn variations_at(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let s = sign(&p.eval(x));
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of distinct real roots in the half-open interval (a, b].
    /// Requires a <= b; the chain's head must be squarefree for exact counts.
    pub fn count_roots(&self, a: &Rational, b: &Rational) -> usize {
        assert!(a <= b);
        self.variations_at(a).saturating_sub(self.variations_at(b))
    }
}

/// Location of one real root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RootLoc {
    /// An exactly identified rational root.
    Rat(Rational),
    /// Open interval (lo, hi) holding exactly one root, endpoints nonroots.
    Interval(Rational, Rational),
}

/// Isolates every distinct real root of `p` (any nonzero polynomial; the
/// squarefree part is taken internally). Roots are returned in increasing
/// order. Rational roots are recognized exactly where bisection or
/// simplest-rational probing finds them; the probing depth makes every root
/// with a small denominator come out as `Rat`.
pub fn isolate_roots(p: &UniPoly) -> Vec<RootLoc> {
    if p.is_zero() || p.degree() == 0 {
        return Vec::new();
    }
    let sf = p.squarefree_part();
    if sf.degree() == 0 {
        return Vec::new();
    }
    if sf.degree() == 1 {
        // c0 + c1 x = 0
        return vec![RootLoc::Rat(-sf.coeff(0) / sf.coeff(1))];
    }
    let chain = SturmChain::new(&sf);
    let bound = sf.root_bound();
    let lo = -bound.clone();
    let hi = bound;
    let total = chain.count_roots(&lo, &hi);
    let mut out = Vec::new();
    if total == 0 {
        return out;
    }
    // (lo, hi] intervals; lo is below every root so half-open is safe.
    let mut stack = vec![(lo, hi, total)];
    while let Some((a, b, n)) = stack.pop() {
        if n == 0 {
            continue;
        }
        if n == 1 {
            out.push(refine_single(&sf, &chain, a, b));
            continue;
        }
        let mid = (a.clone() + b.clone()) / Rational::from_integer(2.into());
        let left = chain.count_roots(&a, &mid);
        let right = n - left;
        // Push right first so the left half is processed first (ascending).
        stack.push((mid.clone(), b, right));
        stack.push((a, mid, left));
    }
    out.sort_by(|x, y| root_loc_lo(x).partial_cmp(&root_loc_lo(y)).expect("rationals compare"));
    out
}

fn root_loc_lo(r: &RootLoc) -> Rational {
    match r {
        RootLoc::Rat(q) => q.clone(),
        RootLoc::Interval(lo, _) => lo.clone(),
    }
}

/// Narrows a half-open interval (a, b] known to hold exactly one root of the
/// squarefree `sf` into a `RootLoc`, detecting simple rational roots.
fn refine_single(sf: &UniPoly, chain: &SturmChain, mut a: Rational, mut b: Rational) -> RootLoc {
    // The root may be exactly b.
    if sf.eval(&b).is_zero() {
        return RootLoc::Rat(b);
    }
    // Several rounds of bisection plus simplest-rational probing.
    for _ in 0..24 {
        let probe = simplest_between(&a, &b);
        if sf.eval(&probe).is_zero() {
            return RootLoc::Rat(probe);
        }
        // Keep the half containing the root.
        if chain.count_roots(&a, &probe) == 1 {
            b = probe;
        } else {
            a = probe;
        }
        let width = b.clone() - a.clone();
        if width < crate::rational::rat(1, 1_000_000) {
            break;
        }
    }
    // The incoming left endpoint sits outside the half-open interval, so it
    // may be a root of an adjacent subdivision; push it off any root.
    while sf.eval(&a).is_zero() {
        let m = (a.clone() + b.clone()) / Rational::from_integer(2.into());
        if sf.eval(&m).is_zero() {
            return RootLoc::Rat(m);
        }
        if chain.count_roots(&m, &b) == 1 {
            a = m;
        } else {
            b = m;
        }
    }
    debug_assert!(!sf.eval(&b).is_zero());
    debug_assert_eq!(chain.count_roots(&a, &b), 1);
    RootLoc::Interval(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn upoly(c: &[i64]) -> UniPoly {
        UniPoly::new(c.iter().map(|&k| int(k)).collect())
    }

    #[test]
    fn arithmetic_and_evaluation() {
        // (x - 1)(x + 2) = x^2 + x - 2
        let p = upoly(&[-1, 1]).mul(&upoly(&[2, 1]));
        assert_eq!(p, upoly(&[-2, 1, 1]));
        assert_eq!(p.eval(&int(1)), int(0));
        assert_eq!(p.eval(&int(2)), int(4));
        assert_eq!(p.derivative(), upoly(&[1, 2]));
        let (q, r) = p.divrem(&upoly(&[-1, 1]));
        assert_eq!(q, upoly(&[2, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn gcd_and_squarefree() {
        // p = (x-1)^2 (x+3)
        let p = upoly(&[-1, 1]).mul(&upoly(&[-1, 1])).mul(&upoly(&[3, 1]));
        let g = p.gcd(&p.derivative());
        assert_eq!(g, upoly(&[-1, 1]).monic());
        let sf = p.squarefree_part();
        assert_eq!(sf, upoly(&[-1, 1]).mul(&upoly(&[3, 1])).monic());
        assert!(upoly(&[1]).gcd(&UniPoly::zero()).is_constant());
    }

    #[test]
    fn sturm_counts_roots() {
        // (x-1)(x+1)x = x^3 - x: roots -1, 0, 1
        let p = upoly(&[0, -1, 0, 1]);
        let chain = SturmChain::new(&p);
        assert_eq!(chain.count_roots(&int(-2), &int(2)), 3);
        assert_eq!(chain.count_roots(&rat(-1, 2), &int(2)), 2);
        assert_eq!(chain.count_roots(&int(0), &int(2)), 1); // (0, 2]
        assert_eq!(chain.count_roots(&int(1), &int(2)), 0);
        // No real roots.
        let q = upoly(&[1, 0, 1]);
        assert_eq!(SturmChain::new(&q).count_roots(&int(-10), &int(10)), 0);
    }

    #[test]
    fn isolation_finds_rational_and_irrational_roots() {
        // x^2 - 2: irrational pair.
        let p = upoly(&[-2, 0, 1]);
        let roots = isolate_roots(&p);
        assert_eq!(roots.len(), 2);
        for r in &roots {
            match r {
                RootLoc::Rat(_) => panic!("sqrt(2) is not rational"),
                RootLoc::Interval(lo, hi) => {
                    assert!(lo < hi);
                    assert!(p.eval(lo).is_positive() != p.eval(hi).is_positive());
                }
            }
        }
        // x^3 - x: all rational, exactly identified.
        let q = upoly(&[0, -1, 0, 1]);
        let roots = isolate_roots(&q);
        assert_eq!(
            roots,
            vec![RootLoc::Rat(int(-1)), RootLoc::Rat(int(0)), RootLoc::Rat(int(1))]
        );
        // (2x - 1)^2: squarefree reduction still finds the double root.
        let sq = upoly(&[-1, 2]).mul(&upoly(&[-1, 2]));
        assert_eq!(isolate_roots(&sq), vec![RootLoc::Rat(rat(1, 2))]);
        // Constants and zero have no isolated roots.
        assert!(isolate_roots(&upoly(&[5])).is_empty());
        assert!(isolate_roots(&UniPoly::zero()).is_empty());
    }

    #[test]
    fn from_multivariate_round_trip() {
        let ring = crate::poly::Ring::new(vec!["x", "y"]).unwrap();
        let p = crate::parse::parse_polynomial("x^2 - 3*x + 1/2", &ring).unwrap();
        let u = UniPoly::from_multivariate(&p, "x").unwrap();
        assert_eq!(u, UniPoly::new(vec![rat(1, 2), int(-3), int(1)]));
        let q = crate::parse::parse_polynomial("x*y", &ring).unwrap();
        assert!(UniPoly::from_multivariate(&q, "x").is_none());
    }

    #[test]
    fn root_bound_contains_all_roots() {
        let p = upoly(&[-6, 11, -6, 1]); // roots 1, 2, 3
        let b = p.root_bound();
        assert!(b > int(3));
        let chain = SturmChain::new(&p.squarefree_part());
        assert_eq!(chain.count_roots(&-b.clone(), &b), 3);
    }
}
