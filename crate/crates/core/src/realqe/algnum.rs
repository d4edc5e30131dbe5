//! Real algebraic numbers as (squarefree defining polynomial, isolating
//! interval) pairs, with exact comparison and sign evaluation.

use std::cmp::Ordering;

use num_traits::Zero;

use crate::rational::{simplest_between, to_f64, Rational};

use super::unipoly::{isolate_roots, sign, RootLoc, SturmChain, UniPoly};

/// The unique real root of `poly` inside the open interval `(lo, hi)`.
///
/// Invariants: `poly` is squarefree with positive degree; neither endpoint is
/// a root; exactly one root lies strictly between them.
#[derive(Clone, Debug)]
pub struct AlgNum {
    poly: UniPoly,
    chain: SturmChain,
    lo: Rational,
    hi: Rational,
}

impl AlgNum {
    /// Builds from an isolating interval; `poly` must already be squarefree.
    pub fn new(poly: UniPoly, lo: Rational, hi: Rational) -> AlgNum {
        debug_assert!(lo < hi);
        debug_assert!(!poly.eval(&lo).is_zero() && !poly.eval(&hi).is_zero());
        let chain = SturmChain::new(&poly);
        debug_assert_eq!(chain.count_roots(&lo, &hi), 1);
        AlgNum { poly, chain, lo, hi }
    }

    /// All real roots of `p` as coordinates, ascending.
    pub fn roots_of(p: &UniPoly) -> Vec<Coord> {
        let sf = p.squarefree_part();
        isolate_roots(&sf)
            .into_iter()
            .map(|loc| match loc {
                RootLoc::Rat(q) => Coord::Rat(q),
                RootLoc::Interval(lo, hi) => Coord::Alg(AlgNum::new(sf.clone(), lo, hi)),
            })
            .collect()
    }

    pub fn poly(&self) -> &UniPoly {
        &self.poly
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        self.hi.clone() - self.lo.clone()
    }

    pub fn to_f64(&self) -> f64 {
        (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0
    }

    /// One bisection step; detects the root landing exactly on the probe.
    /// Returns the exact rational value if the number turns out rational.
    pub fn refine_step(&mut self) -> Option<Rational> {
        let mid = simplest_between(&self.lo, &self.hi);
        if self.poly.eval(&mid).is_zero() {
            return Some(mid);
        }
        if self.chain.count_roots(&self.lo, &mid) == 1 {
            self.hi = mid;
        } else {
            self.lo = mid;
        }
        None
    }

    /// Shrinks the isolating interval below `width`. Returns the exact value
    /// if refinement lands on it.
    pub fn refine_below(&mut self, width: &Rational) -> Option<Rational> {
        while self.width() >= *width {
            if let Some(q) = self.refine_step() {
                return Some(q);
            }
        }
        None
    }

    /// Exact sign of `q` at this number: 0 when q vanishes here, otherwise
    /// the constant sign of q on a refined isolating interval.
    pub fn sign_of(&mut self, q: &UniPoly) -> i8 {
        if q.is_zero() {
            return 0;
        }
        if q.is_constant() {
            return sign(&q.coeff(0));
        }
        // q(alpha) = 0 iff gcd(poly, q) has a root in the interval.
        let g = self.poly.gcd(q);
        if !g.is_constant() {
            let gchain = SturmChain::new(&g.squarefree_part());
            if gchain.count_roots(&self.lo, &self.hi) > 0 {
                return 0;
            }
        }
        // Nonzero: refine until q has no root inside, then any interior
        // point carries the sign.
        let qchain = SturmChain::new(&q.squarefree_part());
        loop {
            if qchain.count_roots(&self.lo, &self.hi) == 0 {
                let mid = simplest_between(&self.lo, &self.hi);
                let s = sign(&q.eval(&mid));
                if s != 0 {
                    return s;
                }
                // The midpoint hit a root of q (possible when the count
                // missed a root equal to lo); refine and retry.
            }
            if let Some(exact) = self.refine_step() {
                return sign(&q.eval(&exact));
            }
        }
    }
}

/// A point coordinate: exact rational or real algebraic.
#[derive(Clone, Debug)]
pub enum Coord {
    Rat(Rational),
    Alg(AlgNum),
}

impl Coord {
    pub fn to_f64(&self) -> f64 {
        match self {
            Coord::Rat(q) => to_f64(q),
            Coord::Alg(a) => a.to_f64(),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Coord::Rat(q) => Some(q),
            Coord::Alg(_) => None,
        }
    }

    /// Exact comparison; refines algebraic intervals as needed.
    pub fn compare(&mut self, other: &mut Coord) -> Ordering {
        match (&mut *self, &mut *other) {
            (Coord::Rat(a), Coord::Rat(b)) => (*a).cmp(b),
            (Coord::Rat(q), Coord::Alg(b)) => rat_vs_alg(q, b),
            (Coord::Alg(a), Coord::Rat(q)) => rat_vs_alg(q, a).reverse(),
            (Coord::Alg(a), Coord::Alg(b)) => alg_vs_alg(a, b),
        }
    }
}

fn rat_vs_alg(q: &Rational, b: &mut AlgNum) -> Ordering {
    // Is q equal to the root? Exactly when the defining poly vanishes at q
    // and q lies in the isolating interval.
    if *b.lo() < *q && *q < *b.hi() && b.poly().eval(q).is_zero() {
        return Ordering::Equal;
    }
    loop {
        if *q <= *b.lo() {
            return Ordering::Less;
        }
        if *q >= *b.hi() {
            return Ordering::Greater;
        }
        if let Some(exact) = b.refine_step() {
            return q.cmp(&exact);
        }
    }
}

fn alg_vs_alg(a: &mut AlgNum, b: &mut AlgNum) -> Ordering {
    // Equal iff the gcd of the defining polynomials has a root in the
    // intersection of the isolating intervals.
    let g = a.poly().gcd(b.poly());
    if !g.is_constant() {
        let lo = a.lo().clone().max(b.lo().clone());
        let hi = a.hi().clone().min(b.hi().clone());
        if lo < hi {
            let chain = SturmChain::new(&g.squarefree_part());
            if chain.count_roots(&lo, &hi) > 0 {
                return Ordering::Equal;
            }
        }
    }
    // Distinct: refine until the intervals separate.
    loop {
        if *a.hi() <= *b.lo() {
            return Ordering::Less;
        }
        if *b.hi() <= *a.lo() {
            return Ordering::Greater;
        }
        if let Some(exact) = a.refine_step() {
            return rat_vs_alg(&exact, b);
        }
        if let Some(exact) = b.refine_step() {
            return rat_vs_alg(&exact, a).reverse();
        }
    }
}

/// A rational strictly between two exact values; both inputs may refine.
pub fn rational_between(a: &mut Coord, b: &mut Coord) -> Rational {
    debug_assert_eq!(a.compare(b), Ordering::Less);
    loop {
        let upper_of_a = match a {
            Coord::Rat(q) => q.clone(),
            Coord::Alg(x) => x.hi().clone(),
        };
        let lower_of_b = match b {
            Coord::Rat(q) => q.clone(),
            Coord::Alg(x) => x.lo().clone(),
        };
        if upper_of_a < lower_of_b {
            return simplest_between(&upper_of_a, &lower_of_b);
        }
        match a {
            Coord::Rat(_) => {}
            Coord::Alg(x) => {
                if let Some(q) = x.refine_step() {
                    *a = Coord::Rat(q);
                    continue;
                }
            }
        }
        match b {
            Coord::Rat(_) => {}
            Coord::Alg(x) => {
                if let Some(q) = x.refine_step() {
                    *b = Coord::Rat(q);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn upoly(c: &[i64]) -> UniPoly {
        UniPoly::new(c.iter().map(|&k| int(k)).collect())
    }

    fn sqrt2() -> AlgNum {
        AlgNum::new(upoly(&[-2, 0, 1]), int(1), int(2))
    }

    #[test]
    fn sign_evaluation_at_sqrt2() {
        let mut a = sqrt2();
        // x^2 - 2 vanishes there.
        assert_eq!(a.sign_of(&upoly(&[-2, 0, 1])), 0);
        // x - 1 is positive, x - 2 negative.
        assert_eq!(a.sign_of(&upoly(&[-1, 1])), 1);
        assert_eq!(a.sign_of(&upoly(&[-2, 1])), -1);
        // x^3 - 3 at sqrt(2): 2*sqrt(2) - 3 < 0.
        assert_eq!(a.sign_of(&upoly(&[-3, 0, 0, 1])), -1);
        // A multiple of the defining polynomial also vanishes.
        assert_eq!(a.sign_of(&upoly(&[-2, 0, 1]).mul(&upoly(&[5, 1]))), 0);
    }

    #[test]
    fn comparisons_are_exact() {
        let mut a = Coord::Alg(sqrt2());
        let mut b = Coord::Rat(rat(141421356, 100000000));
        assert_eq!(a.compare(&mut b), Ordering::Greater);
        let mut c = Coord::Rat(rat(141421357, 100000000));
        assert_eq!(a.compare(&mut c), Ordering::Less);
        // sqrt(2) from two different defining polynomials compares equal:
        // x^2-2 and x^4-4 share it.
        let mut d = Coord::Alg(AlgNum::new(
            upoly(&[-4, 0, 0, 0, 1]).squarefree_part(),
            int(0),
            rat(3, 2),
        ));
        assert_eq!(a.compare(&mut d), Ordering::Equal);
        // Negative root of the same polynomial is smaller.
        let mut e = Coord::Alg(AlgNum::new(upoly(&[-2, 0, 1]), int(-2), int(-1)));
        assert_eq!(a.compare(&mut e), Ordering::Greater);
    }

    #[test]
    fn refinement_collapses_rationals() {
        // x^2 - 1/4 has root 1/2; pretend we only isolated it.
        let p = UniPoly::new(vec![rat(-1, 4), int(0), int(1)]);
        let mut a = AlgNum::new(p, int(0), int(1));
        let mut exact = None;
        for _ in 0..64 {
            if let Some(q) = a.refine_step() {
                exact = Some(q);
                break;
            }
        }
        assert_eq!(exact, Some(rat(1, 2)));
    }

    #[test]
    fn roots_of_mixed_polynomial() {
        // (x^2 - 2)(x - 3): roots -sqrt2, sqrt2, 3.
        let p = upoly(&[-2, 0, 1]).mul(&upoly(&[-3, 1]));
        let mut roots = AlgNum::roots_of(&p);
        assert_eq!(roots.len(), 3);
        assert!(matches!(&roots[2], Coord::Rat(q) if *q == int(3)));
        let mut prev = roots[0].clone();
        for root in &roots[1..] {
            let mut cur = root.clone();
            assert_eq!(prev.compare(&mut cur), Ordering::Less);
            prev = root.clone();
        }
        // A separating rational between the two smallest.
        let (left, right) = roots.split_at_mut(1);
        let s = rational_between(&mut left[0], &mut right[0]);
        let mut sc = Coord::Rat(s);
        assert_eq!(left[0].compare(&mut sc), Ordering::Less);
        assert_eq!(sc.compare(&mut right[0]), Ordering::Less);
    }
}
