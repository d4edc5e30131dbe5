//! Multivariate polynomial division with quotient tracking.

use super::{Monomial, MonomialOrder, PolyError, Polynomial};

#[derive(Clone, Debug, PartialEq)]
pub struct DivisionResult {
    pub quotients: Vec<Polynomial>,
    pub remainder: Polynomial,
}

/// Divides `p` by the ordered list `divisors` under `order`, returning
/// quotients `q_i` and a remainder `r` with `p = sum q_i * d_i + r` and no
/// term of `r` divisible by any divisor's leading monomial.
///
/// Zero divisors are legal and always receive a zero quotient.
pub fn reduce(
    p: &Polynomial,
    divisors: &[Polynomial],
    order: &MonomialOrder,
) -> Result<DivisionResult, PolyError> {
    reduce_budgeted(p, divisors, order, usize::MAX)
}

/// Division with a hard cap on the arithmetic volume of the elimination
/// loop. An elimination charges the divisor's term count scaled by the
/// quotient coefficient's bit length and moving a term to the remainder
/// charges one unit, so runaway coefficient growth exhausts the budget after
/// a handful of steps instead of stretching each step into seconds.
pub fn reduce_budgeted(
    p: &Polynomial,
    divisors: &[Polynomial],
    order: &MonomialOrder,
    max_steps: usize,
) -> Result<DivisionResult, PolyError> {
    if divisors.is_empty() {
        return Err(PolyError::EmptyDivisorList);
    }
    let ring = p.ring();
    for d in divisors {
        if **d.ring() != **ring {
            return Err(PolyError::RingMismatch {
                left: ring.vars().to_vec(),
                right: d.ring().vars().to_vec(),
            });
        }
    }

    let leads: Vec<Option<(Monomial, crate::rational::Rational)>> = divisors
        .iter()
        .map(|d| d.lead(order).map(|(m, c)| (m.clone(), c.clone())))
        .collect();

    let divisor_sizes: Vec<usize> = divisors.iter().map(|d| d.terms().count()).collect();
    let mut quotients = vec![Polynomial::zero(ring); divisors.len()];
    let mut remainder = Polynomial::zero(ring);
    let mut work = p.clone();
    let mut spent = 0usize;

    while let Some((lm, lc)) = work.lead(order).map(|(m, c)| (m.clone(), c.clone())) {
        let mut divided = false;
        for (i, lead) in leads.iter().enumerate() {
            let Some((dm, dc)) = lead else { continue };
            if dm.divides(&lm) {
                let qm = dm.div_into(&lm);
                let qc = &lc / dc;
                let bits = (qc.numer().bits() + qc.denom().bits()) / 64;
                let cost = divisor_sizes[i].max(1).saturating_mul(1 + bits as usize);
                spent = spent.saturating_add(cost);
                if spent > max_steps {
                    return Err(PolyError::ReductionBudget { limit: max_steps });
                }
                let t = Polynomial::from_terms(ring, [(qm.clone(), qc.clone())]);
                quotients[i] = quotients[i].add(&t).expect("same ring");
                work = work.sub(&divisors[i].mul_term(&qm, &qc)).expect("same ring");
                divided = true;
                break;
            }
        }
        if !divided {
            spent = spent.saturating_add(1);
            if spent > max_steps {
                return Err(PolyError::ReductionBudget { limit: max_steps });
            }
            let t = Polynomial::from_terms(ring, [(lm.clone(), lc.clone())]);
            remainder = remainder.add(&t).expect("same ring");
            work = work.sub(&t).expect("same ring");
        }
    }

    // The identity check multiplies every quotient back out, which is far
    // more expensive than the division itself on large inputs, so it only
    // runs when the recomposition stays small.
    #[cfg(debug_assertions)]
    {
        let recompose_work: usize = quotients
            .iter()
            .zip(&divisor_sizes)
            .map(|(q, ds)| q.terms().count() * ds)
            .sum();
        if recompose_work <= 10_000 {
            let mut recomposed = remainder.clone();
            for (q, d) in quotients.iter().zip(divisors) {
                recomposed = recomposed.add(&q.mul(d).expect("same ring")).expect("same ring");
            }
            debug_assert_eq!(recomposed, *p, "division identity violated");
        }
        for (m, _) in remainder.terms() {
            for lead in leads.iter().flatten() {
                debug_assert!(!lead.0.divides(m), "remainder term divisible by a leading monomial");
            }
        }
    }

    Ok(DivisionResult { quotients, remainder })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Ring;

    #[test]
    fn divides_exactly_by_a_groebner_basis() {
        let r = Ring::new(vec!["x", "y"]).unwrap();
        let order = r.default_order();
        let parse = |s: &str| crate::parse::parse_polynomial(s, &r).unwrap();
        // {x, y^2} generates the same ideal as {-x + 2y^2, x + 4y^2} and is a
        // Groebner basis for it, so membership shows up as a zero remainder.
        let target = parse("-x + 8*y^2");
        let d1 = parse("x");
        let d2 = parse("y^2");
        let res = reduce(&target, &[d1.clone(), d2.clone()], &order).unwrap();
        assert!(res.remainder.is_zero());
        let back = res.quotients[0]
            .mul(&d1)
            .unwrap()
            .add(&res.quotients[1].mul(&d2).unwrap())
            .unwrap();
        assert_eq!(back, target);
    }

    #[test]
    fn raw_generators_can_hide_membership() {
        // Dividing by the unprocessed pair leaves a remainder even though the
        // dividend is in the ideal; detecting this is the basis computation's
        // job, not division's.
        let r = Ring::new(vec!["x", "y"]).unwrap();
        let order = r.default_order();
        let parse = |s: &str| crate::parse::parse_polynomial(s, &r).unwrap();
        let res = reduce(
            &parse("-x + 8*y^2"),
            &[parse("-x + 2*y^2"), parse("x + 4*y^2")],
            &order,
        )
        .unwrap();
        assert!(!res.remainder.is_zero());
    }

    #[test]
    fn leaves_a_remainder_when_not_member() {
        let r = Ring::new(vec!["x", "y"]).unwrap();
        let order = r.default_order();
        let parse = |s: &str| crate::parse::parse_polynomial(s, &r).unwrap();
        let res = reduce(&parse("x + 4*y^2"), &[parse("-x + 2*y^2")], &order).unwrap();
        assert!(!res.remainder.is_zero());
    }

    #[test]
    fn zero_dividend_and_zero_divisors() {
        let r = Ring::new(vec!["x", "y"]).unwrap();
        let order = r.default_order();
        let parse = |s: &str| crate::parse::parse_polynomial(s, &r).unwrap();
        let res = reduce(&Polynomial::zero(&r), &[parse("x")], &order).unwrap();
        assert!(res.remainder.is_zero());
        assert!(res.quotients[0].is_zero());

        let res = reduce(&parse("x + 1"), &[Polynomial::zero(&r), parse("x")], &order).unwrap();
        assert!(res.quotients[0].is_zero());
        assert_eq!(res.remainder, parse("1"));
    }

    #[test]
    fn empty_divisor_list_is_rejected() {
        let r = Ring::new(vec!["x"]).unwrap();
        let res = reduce(&Polynomial::one(&r), &[], &r.default_order());
        assert!(matches!(res, Err(PolyError::EmptyDivisorList)));
    }

    #[test]
    fn remainder_depends_on_divisor_sequence_but_stays_consistent() {
        // Classic two-divisor example where order of divisors changes the
        // quotients; the division identity must hold either way.
        let r = Ring::new(vec!["x", "y"]).unwrap();
        let order = MonomialOrder::lex(2);
        let parse = |s: &str| crate::parse::parse_polynomial(s, &r).unwrap();
        let p = parse("x^2*y + x*y^2 + y^2");
        let d1 = parse("x*y - 1");
        let d2 = parse("y^2 - 1");
        for div in [vec![d1.clone(), d2.clone()], vec![d2, d1]] {
            let res = reduce(&p, &div, &order).unwrap();
            let mut back = res.remainder.clone();
            for (q, d) in res.quotients.iter().zip(&div) {
                back = back.add(&q.mul(d).unwrap()).unwrap();
            }
            assert_eq!(back, p);
        }
    }
}
