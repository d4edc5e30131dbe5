//! Monomials as exponent vectors, plus admissible term orders.

use std::cmp::Ordering;

/// Exponent vector over a fixed ring arity. The derived `Ord` is plain
/// lexicographic on the raw vector and exists only so monomials can key a
/// `BTreeMap`; semantic comparisons go through [`MonomialOrder`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one(arity: usize) -> Self {
        Monomial { exps: vec![0; arity] }
    }

    pub fn from_exps(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    /// Single variable `x_i^k`.
    pub fn var(arity: usize, i: usize, k: u32) -> Self {
        let mut exps = vec![0; arity];
        exps[i] = k;
        Monomial { exps }
    }

    pub fn arity(&self) -> usize {
        self.exps.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.exps[i]
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.arity(), other.arity());
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        debug_assert_eq!(self.arity(), other.arity());
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`; caller must ensure divisibility.
    pub fn div_into(&self, other: &Monomial) -> Monomial {
        debug_assert!(self.divides(other));
        Monomial {
            exps: other.exps.iter().zip(&self.exps).map(|(b, a)| b - a).collect(),
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.arity(), other.arity());
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| *a.max(b)).collect(),
        }
    }

    /// True when `lcm(self, other)` equals the plain product, i.e. the
    /// supports are disjoint.
    pub fn coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| *a == 0 || *b == 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderKind {
    Lex,
    GrevLex,
}

/// A term order: lexicographic or graded reverse lexicographic, over an
/// optional variable priority permutation. `priority[0]` is the ring index of
/// the most significant variable; an identity permutation means ring order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialOrder {
    pub kind: OrderKind,
    priority: Vec<usize>,
}

impl MonomialOrder {
    pub fn new(kind: OrderKind, arity: usize) -> Self {
        MonomialOrder { kind, priority: (0..arity).collect() }
    }

    pub fn lex(arity: usize) -> Self {
        Self::new(OrderKind::Lex, arity)
    }

    pub fn grevlex(arity: usize) -> Self {
        Self::new(OrderKind::GrevLex, arity)
    }

    /// Order with an explicit priority permutation (most significant first).
    /// `priority` must be a permutation of `0..arity`.
    pub fn with_priority(kind: OrderKind, priority: Vec<usize>) -> Self {
        let mut seen = vec![false; priority.len()];
        for &i in &priority {
            assert!(i < priority.len() && !seen[i], "priority must be a permutation");
            seen[i] = true;
        }
        MonomialOrder { kind, priority }
    }

    pub fn arity(&self) -> usize {
        self.priority.len()
    }

    pub fn priority(&self) -> &[usize] {
        &self.priority
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        debug_assert_eq!(a.arity(), self.priority.len());
        debug_assert_eq!(b.arity(), self.priority.len());
        match self.kind {
            OrderKind::Lex => {
                for &i in &self.priority {
                    match a.exp(i).cmp(&b.exp(i)) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            }
            OrderKind::GrevLex => {
                match a.total_degree().cmp(&b.total_degree()) {
                    Ordering::Equal => {}
                    ord => return ord,
                }
                // Ties break on the least significant differing variable,
                // with the smaller exponent there winning.
                for &i in self.priority.iter().rev() {
                    match a.exp(i).cmp(&b.exp(i)) {
                        Ordering::Equal => continue,
                        ord => return ord.reverse(),
                    }
                }
                Ordering::Equal
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(exps: &[u32]) -> Monomial {
        Monomial::from_exps(exps.to_vec())
    }

    #[test]
    fn lex_orders_by_priority() {
        let ord = MonomialOrder::lex(2);
        // x > y^5 under lex with x first.
        assert_eq!(ord.cmp(&m(&[1, 0]), &m(&[0, 5])), Ordering::Greater);
        assert_eq!(ord.cmp(&m(&[1, 1]), &m(&[1, 2])), Ordering::Less);
        let yx = MonomialOrder::with_priority(OrderKind::Lex, vec![1, 0]);
        assert_eq!(yx.cmp(&m(&[1, 0]), &m(&[0, 5])), Ordering::Less);
    }

    #[test]
    fn grevlex_orders_by_degree_then_reverse_tail() {
        let ord = MonomialOrder::grevlex(2);
        // x^2 > x*y > y^2 at degree 2.
        assert_eq!(ord.cmp(&m(&[2, 0]), &m(&[1, 1])), Ordering::Greater);
        assert_eq!(ord.cmp(&m(&[1, 1]), &m(&[0, 2])), Ordering::Greater);
        // Degree dominates.
        assert_eq!(ord.cmp(&m(&[0, 3]), &m(&[2, 0])), Ordering::Greater);
        // Three variables: x*z vs y^2 (degree 2): z exponent differs last,
        // x*z has the larger one, so x*z is smaller.
        let o3 = MonomialOrder::grevlex(3);
        assert_eq!(o3.cmp(&m(&[1, 0, 1]), &m(&[0, 2, 0])), Ordering::Less);
    }

    #[test]
    fn unit_monomial_is_minimum() {
        for ord in [MonomialOrder::lex(3), MonomialOrder::grevlex(3)] {
            let one = Monomial::one(3);
            for exps in [[1, 0, 0], [0, 1, 0], [0, 0, 1], [2, 1, 3]] {
                assert_eq!(ord.cmp(&one, &m(&exps)), Ordering::Less);
            }
            assert_eq!(ord.cmp(&one, &one), Ordering::Equal);
        }
    }

    #[test]
    fn lattice_operations() {
        let a = m(&[2, 1, 0]);
        let b = m(&[1, 3, 0]);
        assert_eq!(a.lcm(&b), m(&[2, 3, 0]));
        assert!(!a.divides(&b));
        assert!(m(&[1, 1, 0]).divides(&a));
        assert_eq!(m(&[1, 1, 0]).div_into(&a), m(&[1, 0, 0]));
        assert!(m(&[2, 0, 0]).coprime(&m(&[0, 1, 2])));
        assert!(!a.coprime(&b));
    }
}
