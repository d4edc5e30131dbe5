//! Exact rational scalars and small helpers shared across the crate.
//!
//! Coefficients everywhere are arbitrary-precision rationals kept in reduced
//! form with a positive denominator; `num_rational::BigRational` maintains
//! both invariants on construction.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Rational from a signed numerator/denominator pair. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders `q` as `num` or `num/den`, always reduced.
pub fn render_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `num` or `num/den` with optional leading `-`. Returns `None` on any
/// malformed input or a zero denominator.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = match den {
        Some(d) => d.parse().ok()?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of lossy halves for out-of-range bignums.
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY * sign_f(q));
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn sign_f(q: &Rational) -> f64 {
    if q.is_negative() {
        -1.0
    } else {
        1.0
    }
}

/// The rational with the smallest denominator (then smallest numerator
/// magnitude) strictly inside the open interval `(lo, hi)`.
///
/// Continued-fraction (Stern-Brocot) descent; requires `lo < hi`.
pub fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo < hi, "simplest_between needs lo < hi");
    let zero = Rational::zero();
    if *lo < zero && zero < *hi {
        return zero;
    }
    if *lo >= zero {
        simplest_nonneg(lo, hi)
    } else {
        -simplest_nonneg(&-hi.clone(), &-lo.clone())
    }
}

fn simplest_nonneg(lo: &Rational, hi: &Rational) -> Rational {
    // 0 <= lo < hi
    let n = lo.floor();
    let next = n.clone() + Rational::one();
    if next < *hi {
        return next;
    }
    let lo_frac = lo - n.clone();
    let hi_frac = hi - n.clone();
    if lo_frac.is_zero() {
        // (n, n + hi_frac): take n + 1/m for the smallest valid integer m.
        let m = (Rational::one() / hi_frac).floor() + Rational::one();
        return n + Rational::one() / m;
    }
    n + Rational::one() / simplest_between(&(Rational::one() / hi_frac), &(Rational::one() / lo_frac))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render_round_trip() {
        for s in ["0", "5", "-3", "1/2", "-7/3", "10/4"] {
            let q = parse_rational(s).unwrap();
            let r = parse_rational(&render_rational(&q)).unwrap();
            assert_eq!(q, r);
        }
        assert_eq!(render_rational(&parse_rational("10/4").unwrap()), "5/2");
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }

    #[test]
    fn simplest_rational_picks_small_denominators() {
        assert_eq!(simplest_between(&rat(-1, 1), &rat(1, 1)), int(0));
        assert_eq!(simplest_between(&rat(0, 1), &rat(7, 10)), rat(1, 2));
        assert_eq!(simplest_between(&rat(1, 3), &rat(1, 2)), rat(2, 5));
        assert_eq!(simplest_between(&rat(5, 2), &rat(7, 2)), int(3));
        assert_eq!(simplest_between(&rat(-5, 2), &rat(-9, 4)), rat(-7, 3));
        // Always strictly inside.
        for (lo, hi) in [(rat(3, 7), rat(4, 7)), (rat(99, 100), rat(101, 100)), (rat(-1, 9), rat(-1, 10))] {
            let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
            let m = simplest_between(&lo, &hi);
            assert!(lo < m && m < hi, "{m} not in ({lo},{hi})");
        }
    }
}
