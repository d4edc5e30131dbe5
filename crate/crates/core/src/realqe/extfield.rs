//! Arithmetic over Q(alpha) for a real algebraic alpha, and univariate
//! polynomial algebra over that field: Sturm chains, root isolation, and
//! sign evaluation at isolated roots.
//!
//! Elements are residues modulo a squarefree defining polynomial of alpha.
//! The defining polynomial is not assumed irreducible: whenever an inversion
//! or zero test meets a nontrivial gcd, the modulus is split and the factor
//! vanishing at alpha is kept (dynamic evaluation). Splitting never changes
//! the value any residue takes at alpha, so results computed before a split
//! stay valid.

use num_traits::{One, Zero};

use crate::rational::{simplest_between, Rational};

use super::algnum::AlgNum;
use super::unipoly::{sign, UniPoly};

/// Extended Euclid: returns (g, s, t) with s*a + t*b = g.
fn ext_gcd(a: &UniPoly, b: &UniPoly) -> (UniPoly, UniPoly, UniPoly) {
    let mut r0 = a.clone();
    let mut r1 = b.clone();
    let mut s0 = UniPoly::one();
    let mut s1 = UniPoly::zero();
    let mut t0 = UniPoly::zero();
    let mut t1 = UniPoly::one();
    while !r1.is_zero() {
        let (q, r) = r0.divrem(&r1);
        let ns = s0.sub(&q.mul(&s1));
        let nt = t0.sub(&q.mul(&t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = ns;
        t0 = t1;
        t1 = nt;
    }
    (r0, s0, t0)
}

/// Evaluation context for Q(alpha). Holds the root together with its current
/// defining polynomial; all element operations go through the context so the
/// modulus can shrink when a computation exposes a factorization.
#[derive(Clone, Debug)]
pub struct ExtCtx {
    alpha: AlgNum,
}

impl ExtCtx {
    pub fn new(alpha: AlgNum) -> ExtCtx {
        ExtCtx { alpha }
    }

    pub fn alpha(&self) -> &AlgNum {
        &self.alpha
    }

    pub fn modulus(&self) -> &UniPoly {
        self.alpha.poly()
    }

    /// Replaces the defining polynomial with a divisor that still vanishes
    /// at alpha. The old isolating interval keeps isolating.
    fn shrink_modulus(&mut self, new_m: UniPoly) {
        debug_assert!(new_m.degree() >= 1);
        let lo = self.alpha.lo().clone();
        let hi = self.alpha.hi().clone();
        self.alpha = AlgNum::new(new_m.monic(), lo, hi);
    }

    /// One strict shrink of alpha's isolating interval. If the probe lands
    /// exactly on alpha, the interval is still narrowed around that point.
    pub fn refine_alpha(&mut self) {
        let lo = self.alpha.lo().clone();
        let hi = self.alpha.hi().clone();
        if let Some(q) = self.alpha.refine_step() {
            let two = Rational::from_integer(2.into());
            let nlo = (lo + q.clone()) / two.clone();
            let nhi = (q + hi) / two;
            self.alpha = AlgNum::new(self.alpha.poly().clone(), nlo, nhi);
        }
    }

    pub fn reduce(&self, u: &UniPoly) -> UniPoly {
        if u.degree() < self.modulus().degree() {
            return u.clone();
        }
        u.rem(self.modulus())
    }

    pub fn from_rational(&self, q: Rational) -> UniPoly {
        UniPoly::constant(q)
    }

    pub fn add(&self, a: &UniPoly, b: &UniPoly) -> UniPoly {
        a.add(b)
    }

    pub fn sub(&self, a: &UniPoly, b: &UniPoly) -> UniPoly {
        a.sub(b)
    }

    pub fn mul(&self, a: &UniPoly, b: &UniPoly) -> UniPoly {
        self.reduce(&a.mul(b))
    }

    /// Whether the residue's value at alpha is zero. Canonicalizes: after a
    /// `true` answer the residue reduces to the literal zero polynomial.
    pub fn is_zero(&mut self, u: &UniPoly) -> bool {
        let r = self.reduce(u);
        if r.is_zero() {
            return true;
        }
        if r.is_constant() {
            return false;
        }
        let g = r.gcd(self.modulus());
        if g.is_constant() {
            return false;
        }
        if self.alpha.sign_of(&g) == 0 {
            // alpha is a root of g, and g divides r, so r vanishes at alpha.
            self.shrink_modulus(g);
            true
        } else {
            let (q, rem) = self.modulus().divrem(&g);
            debug_assert!(rem.is_zero());
            if q.degree() >= 1 {
                self.shrink_modulus(q);
            }
            false
        }
    }

    /// Exact sign of the residue's value at alpha.
    pub fn sign(&mut self, u: &UniPoly) -> i8 {
        if self.is_zero(u) {
            return 0;
        }
        let r = self.reduce(u);
        self.alpha.sign_of(&r)
    }

    /// Multiplicative inverse; `None` when the value is zero.
    pub fn inv(&mut self, u: &UniPoly) -> Option<UniPoly> {
        loop {
            let r = self.reduce(u);
            if r.is_zero() {
                return None;
            }
            let (g, s, _) = ext_gcd(&r, self.modulus());
            if g.is_constant() {
                let ginv = Rational::one() / g.coeff(0);
                return Some(self.reduce(&s.scale(&ginv)));
            }
            // Nontrivial factor found: keep whichever part vanishes at alpha.
            if self.alpha.sign_of(&g) == 0 {
                // g(alpha) = 0 and g divides r, so r vanishes: no inverse.
                self.shrink_modulus(g);
                return None;
            }
            let (q, rem) = self.modulus().divrem(&g);
            debug_assert!(rem.is_zero() && q.degree() >= 1);
            self.shrink_modulus(q);
        }
    }

    /// Approximate value of the residue at alpha.
    pub fn to_f64(&self, u: &UniPoly) -> f64 {
        self.reduce(u).eval_f64(self.alpha.to_f64())
    }
}

/// Interval evaluation of a univariate polynomial over [lo, hi]: a rigorous
/// enclosure of its range, by Horner with interval arithmetic.
fn enclose(u: &UniPoly, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
    let mut alo = Rational::zero();
    let mut ahi = Rational::zero();
    for c in u.coeffs().iter().rev() {
        // (alo, ahi) * (lo, hi): extremes among the four corner products.
        let products = [
            alo.clone() * lo.clone(),
            alo.clone() * hi.clone(),
            ahi.clone() * lo.clone(),
            ahi.clone() * hi.clone(),
        ];
        let mut plo = products[0].clone();
        let mut phi = products[0].clone();
        for p in &products[1..] {
            if *p < plo {
                plo = p.clone();
            }
            if *p > phi {
                phi = p.clone();
            }
        }
        alo = plo + c.clone();
        ahi = phi + c.clone();
    }
    (alo, ahi)
}

/// A polynomial in one variable with coefficients in Q(alpha), coefficients
/// ascending. The leading coefficient has nonzero value at alpha.
#[derive(Clone, Debug)]
pub struct ExtPoly {
    coeffs: Vec<UniPoly>,
}

impl ExtPoly {
    pub fn new(ctx: &mut ExtCtx, mut coeffs: Vec<UniPoly>) -> ExtPoly {
        for c in coeffs.iter_mut() {
            *c = ctx.reduce(c);
        }
        while let Some(last) = coeffs.last() {
            if ctx.is_zero(last) {
                coeffs.pop();
            } else {
                break;
            }
        }
        ExtPoly { coeffs }
    }

    pub fn zero() -> ExtPoly {
        ExtPoly { coeffs: Vec::new() }
    }

    /// Lifts a rational-coefficient polynomial.
    pub fn from_unipoly(p: &UniPoly) -> ExtPoly {
        ExtPoly { coeffs: p.coeffs().iter().map(|c| UniPoly::constant(c.clone())).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> UniPoly {
        self.coeffs.get(i).cloned().unwrap_or_else(UniPoly::zero)
    }

    pub fn leading(&self) -> UniPoly {
        self.coeffs.last().cloned().unwrap_or_else(UniPoly::zero)
    }

    pub fn add(&self, ctx: &mut ExtCtx, other: &ExtPoly) -> ExtPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).add(&other.coeff(i)));
        }
        ExtPoly::new(ctx, out)
    }

    pub fn sub(&self, ctx: &mut ExtCtx, other: &ExtPoly) -> ExtPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).sub(&other.coeff(i)));
        }
        ExtPoly::new(ctx, out)
    }

    pub fn neg(&self) -> ExtPoly {
        ExtPoly { coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn mul(&self, ctx: &mut ExtCtx, other: &ExtPoly) -> ExtPoly {
        if self.is_zero() || other.is_zero() {
            return ExtPoly::zero();
        }
        let mut out = vec![UniPoly::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&ctx.mul(a, b));
            }
        }
        ExtPoly::new(ctx, out)
    }

    /// Multiplies every coefficient by an element of Q(alpha).
    pub fn scale_ext(&self, ctx: &mut ExtCtx, c: &UniPoly) -> ExtPoly {
        let out = self.coeffs.iter().map(|k| ctx.mul(k, c)).collect();
        ExtPoly::new(ctx, out)
    }

    pub fn derivative(&self, ctx: &mut ExtCtx) -> ExtPoly {
        if self.coeffs.len() <= 1 {
            return ExtPoly::zero();
        }
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.scale(&Rational::from_integer(i.into())))
            .collect();
        ExtPoly::new(ctx, out)
    }

    /// Field division; the divisor must be nonzero.
    pub fn divrem(&self, ctx: &mut ExtCtx, divisor: &ExtPoly) -> (ExtPoly, ExtPoly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.degree() < divisor.degree() || self.is_zero() {
            return (ExtPoly::zero(), self.clone());
        }
        let lead_inv = ctx.inv(&divisor.leading()).expect("leading value is nonzero");
        let mut rem: Vec<UniPoly> = self.coeffs.clone();
        let dd = divisor.degree();
        let mut quot = vec![UniPoly::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let q = ctx.mul(&rem[i], &lead_inv);
            if ctx.is_zero(&q) {
                rem[i] = UniPoly::zero();
                continue;
            }
            quot[i - dd] = q.clone();
            for (j, c) in divisor.coeffs.iter().enumerate() {
                let delta = ctx.mul(c, &q);
                rem[i - dd + j] = rem[i - dd + j].sub(&delta);
            }
        }
        (ExtPoly::new(ctx, quot), ExtPoly::new(ctx, rem))
    }

    pub fn rem(&self, ctx: &mut ExtCtx, divisor: &ExtPoly) -> ExtPoly {
        self.divrem(ctx, divisor).1
    }

    /// Monic: leading coefficient becomes 1 in Q(alpha).
    pub fn monic(&self, ctx: &mut ExtCtx) -> ExtPoly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = ctx.inv(&self.leading()).expect("leading value is nonzero");
        self.scale_ext(ctx, &inv)
    }

    /// Monic gcd over Q(alpha); gcd(0, 0) = 0.
    pub fn gcd(&self, ctx: &mut ExtCtx, other: &ExtPoly) -> ExtPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let bm = b.monic(ctx);
            let r = a.rem(ctx, &bm);
            a = bm;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic(ctx)
        }
    }

    /// Squarefree part: self / gcd(self, self'), made monic.
    pub fn squarefree_part(&self, ctx: &mut ExtCtx) -> ExtPoly {
        if self.degree() == 0 {
            return self.clone();
        }
        let d = self.derivative(ctx);
        let g = self.gcd(ctx, &d);
        if g.degree() == 0 {
            return self.monic(ctx);
        }
        let (q, r) = self.divrem(ctx, &g);
        debug_assert!(r.is_zero(), "gcd must divide exactly");
        q.monic(ctx)
    }

    /// Evaluates at a rational point; the result lives in Q(alpha).
    pub fn eval_rat(&self, ctx: &mut ExtCtx, x: &Rational) -> UniPoly {
        let mut acc = UniPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = ctx.reduce(&acc.scale(x).add(c));
        }
        acc
    }

    pub fn sign_at(&self, ctx: &mut ExtCtx, x: &Rational) -> i8 {
        let v = self.eval_rat(ctx, x);
        ctx.sign(&v)
    }

    /// A rational bound B with every real root in (-B, B), obtained by
    /// enclosing each coefficient's value over alpha's isolating interval.
    pub fn root_bound(&self, ctx: &mut ExtCtx) -> Rational {
        if self.coeffs.len() <= 1 {
            return Rational::one();
        }
        // Refine alpha until the leading coefficient's enclosure misses zero.
        let lead = ctx.reduce(&self.leading());
        let (mut llo, mut lhi) = enclose(&lead, ctx.alpha().lo(), ctx.alpha().hi());
        while sign(&llo) != sign(&lhi) || sign(&llo) == 0 {
            ctx.refine_alpha();
            let e = enclose(&lead, ctx.alpha().lo(), ctx.alpha().hi());
            llo = e.0;
            lhi = e.1;
        }
        let lead_low = if sign(&llo) > 0 { llo } else { -lhi };
        let mut max = Rational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let cr = ctx.reduce(c);
            let (clo, chi) = enclose(&cr, ctx.alpha().lo(), ctx.alpha().hi());
            let mag = if -clo.clone() > chi { -clo } else { chi };
            let q = mag / lead_low.clone();
            if q > max {
                max = q;
            }
        }
        max + Rational::one()
    }
}

/// Sturm chain over Q(alpha): remainders are negated and rescaled by factors
/// that are positive at alpha, preserving the sign-variation law.
#[derive(Clone, Debug)]
pub struct SturmExt {
    chain: Vec<ExtPoly>,
}

impl SturmExt {
    pub fn new(ctx: &mut ExtCtx, p: &ExtPoly) -> SturmExt {
        let mut chain = Vec::new();
        if p.is_zero() {
            return SturmExt { chain };
        }
        chain.push(p.clone());
        let d = p.derivative(ctx);
        if d.is_zero() {
            return SturmExt { chain };
        }
        chain.push(d);
        loop {
            let n = chain.len();
            let prev = chain[n - 2].clone();
            let cur = chain[n - 1].clone();
            let r = prev.rem(ctx, &cur);
            if r.is_zero() {
                break;
            }
            // Rescale by s / lead where s = sign(lead at alpha): a positive
            // unit, so evaluation signs follow the negated remainder's.
            let lead = r.leading();
            let s = ctx.sign(&lead);
            debug_assert!(s != 0);
            let inv = ctx.inv(&lead).expect("nonzero leading value");
            let scaled = r.scale_ext(ctx, &inv.scale(&Rational::from_integer(s.into())));
            chain.push(scaled.neg());
            if chain.last().expect("just pushed").is_constant() {
                break;
            }
        }
        SturmExt { chain }
    }

    pub fn variations_at(&self, ctx: &mut ExtCtx, x: &Rational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let s = p.sign_at(ctx, x);
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

    /// Distinct real roots in (a, b]; the head must be squarefree.
    pub fn count_roots(&self, ctx: &mut ExtCtx, a: &Rational, b: &Rational) -> usize {
        assert!(a <= b);
        let va = self.variations_at(ctx, a);
        let vb = self.variations_at(ctx, b);
        va.saturating_sub(vb)
    }
}

/// Location of one real root of a polynomial over Q(alpha).
#[derive(Clone, Debug)]
pub enum ExtRootLoc {
    /// The root is the rational number itself.
    Rat(Rational),
    /// Open interval (lo, hi) holding exactly one root, endpoints nonroots.
    Interval(Rational, Rational),
}

impl ExtRootLoc {
    pub fn lo(&self) -> Rational {
        match self {
            ExtRootLoc::Rat(q) => q.clone(),
            ExtRootLoc::Interval(lo, _) => lo.clone(),
        }
    }

    pub fn hi(&self) -> Rational {
        match self {
            ExtRootLoc::Rat(q) => q.clone(),
            ExtRootLoc::Interval(_, hi) => hi.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRootLoc::Rat(q) => crate::rational::to_f64(q),
            ExtRootLoc::Interval(lo, hi) => {
                (crate::rational::to_f64(lo) + crate::rational::to_f64(hi)) / 2.0
            }
        }
    }
}

/// Isolates every distinct real root of `p` over Q(alpha), ascending, with
/// pairwise disjoint locations.
pub fn isolate_ext_roots(ctx: &mut ExtCtx, p: &ExtPoly) -> Vec<ExtRootLoc> {
    if p.is_zero() || p.degree() == 0 {
        return Vec::new();
    }
    let sf = p.squarefree_part(ctx);
    if sf.degree() == 0 {
        return Vec::new();
    }
    let chain = SturmExt::new(ctx, &sf);
    let bound = sf.root_bound(ctx);
    let lo = -bound.clone();
    let hi = bound;
    let total = chain.count_roots(ctx, &lo, &hi);
    let mut out = Vec::new();
    if total == 0 {
        return out;
    }
    let mut stack = vec![(lo, hi, total)];
    while let Some((a, b, n)) = stack.pop() {
        if n == 0 {
            continue;
        }
        if n == 1 {
            out.push(refine_ext_single(ctx, &sf, &chain, a, b));
            continue;
        }
        let mid = (a.clone() + b.clone()) / Rational::from_integer(2.into());
        let left = chain.count_roots(ctx, &a, &mid);
        let right = n - left;
        stack.push((mid.clone(), b, right));
        stack.push((a, mid, left));
    }
    out.sort_by(|x, y| x.lo().partial_cmp(&y.lo()).expect("rationals compare"));
    out
}

fn refine_ext_single(
    ctx: &mut ExtCtx,
    sf: &ExtPoly,
    chain: &SturmExt,
    mut a: Rational,
    mut b: Rational,
) -> ExtRootLoc {
    if sf.sign_at(ctx, &b) == 0 {
        return ExtRootLoc::Rat(b);
    }
    for _ in 0..24 {
        let probe = simplest_between(&a, &b);
        if sf.sign_at(ctx, &probe) == 0 {
            return ExtRootLoc::Rat(probe);
        }
        if chain.count_roots(ctx, &a, &probe) == 1 {
            b = probe;
        } else {
            a = probe;
        }
        if b.clone() - a.clone() < crate::rational::rat(1, 1_000_000) {
            break;
        }
    }
    // The left endpoint came from an adjacent half-open subdivision and may
    // itself be a root; push it off.
    while sf.sign_at(ctx, &a) == 0 {
        let m = (a.clone() + b.clone()) / Rational::from_integer(2.into());
        if sf.sign_at(ctx, &m) == 0 {
            return ExtRootLoc::Rat(m);
        }
        if chain.count_roots(ctx, &m, &b) == 1 {
            a = m;
        } else {
            b = m;
        }
    }
    ExtRootLoc::Interval(a, b)
}

/// An isolated root beta of a squarefree polynomial over Q(alpha), carrying
/// enough structure to evaluate signs of other polynomials at beta.
#[derive(Clone, Debug)]
pub struct ExtRoot {
    defining: ExtPoly,
    chain: SturmExt,
    lo: Rational,
    hi: Rational,
}

impl ExtRoot {
    /// `defining` must be squarefree with exactly one root in (lo, hi) and
    /// nonroot endpoints; `Interval` locations from `isolate_ext_roots`
    /// satisfy this.
    pub fn new(ctx: &mut ExtCtx, defining: ExtPoly, lo: Rational, hi: Rational) -> ExtRoot {
        let chain = SturmExt::new(ctx, &defining);
        debug_assert_eq!(chain.count_roots(ctx, &lo, &hi), 1);
        ExtRoot { defining, chain, lo, hi }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn to_f64(&self) -> f64 {
        (crate::rational::to_f64(&self.lo) + crate::rational::to_f64(&self.hi)) / 2.0
    }

    /// One bisection step; `Some` when the root is exactly rational.
    pub fn refine_step(&mut self, ctx: &mut ExtCtx) -> Option<Rational> {
        let mid = simplest_between(&self.lo, &self.hi);
        if self.defining.sign_at(ctx, &mid) == 0 {
            return Some(mid);
        }
        if self.chain.count_roots(ctx, &self.lo, &mid) == 1 {
            self.hi = mid;
        } else {
            self.lo = mid;
        }
        None
    }

    /// Exact sign of `q` (a polynomial over Q(alpha)) at this root.
    pub fn sign_of(&mut self, ctx: &mut ExtCtx, q: &ExtPoly) -> i8 {
        if q.is_zero() {
            return 0;
        }
        if q.is_constant() {
            return ctx.sign(&q.coeff(0));
        }
        let g = self.defining.gcd(ctx, q);
        if !g.is_constant() {
            let gsf = g.squarefree_part(ctx);
            let gchain = SturmExt::new(ctx, &gsf);
            if gchain.count_roots(ctx, &self.lo, &self.hi) > 0 {
                return 0;
            }
        }
        let qsf = q.squarefree_part(ctx);
        let qchain = SturmExt::new(ctx, &qsf);
        loop {
            if qchain.count_roots(ctx, &self.lo, &self.hi) == 0 {
                let mid = simplest_between(&self.lo, &self.hi);
                let s = q.sign_at(ctx, &mid);
                if s != 0 {
                    return s;
                }
            }
            if let Some(exact) = self.refine_step(ctx) {
                return q.sign_at(ctx, &exact);
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

    fn sqrt2_ctx() -> ExtCtx {
        ExtCtx::new(AlgNum::new(upoly(&[-2, 0, 1]), int(1), int(2)))
    }

    #[test]
    fn field_arithmetic_at_sqrt2() {
        let mut ctx = sqrt2_ctx();
        let alpha = upoly(&[0, 1]);
        // (alpha + 1)(alpha - 1) = alpha^2 - 1 = 1.
        let prod = ctx.mul(&alpha.add(&UniPoly::one()), &alpha.sub(&UniPoly::one()));
        assert_eq!(ctx.sign(&prod.sub(&UniPoly::one())), 0);
        // 1/alpha = alpha/2.
        let inv = ctx.inv(&alpha).unwrap();
        assert_eq!(inv, upoly(&[0, 1]).scale(&rat(1, 2)));
        assert_eq!(ctx.sign(&ctx.mul(&alpha, &inv).sub(&UniPoly::one())), 0);
        // Sign checks around 1.41...
        assert_eq!(ctx.sign(&alpha.sub(&UniPoly::constant(int(1)))), 1);
        assert_eq!(ctx.sign(&alpha.sub(&UniPoly::constant(rat(3, 2)))), -1);
        assert_eq!(ctx.sign(&upoly(&[-2, 0, 1])), 0);
    }

    #[test]
    fn dynamic_splitting_keeps_the_right_factor() {
        // Reducible modulus (x^2 - 2)(x - 3); alpha is sqrt(2) in (1, 2).
        let m = upoly(&[-2, 0, 1]).mul(&upoly(&[-3, 1]));
        let mut ctx = ExtCtx::new(AlgNum::new(m, int(1), int(2)));
        // x - 3 is nonzero at alpha, so inversion splits off that factor.
        let u = upoly(&[-3, 1]);
        let inv = ctx.inv(&u).unwrap();
        assert_eq!(ctx.modulus().degree(), 2);
        assert_eq!(ctx.sign(&ctx.mul(&u, &inv).sub(&UniPoly::one())), 0);
        // A fresh context: x^2 - 2 vanishes at alpha, shrinking on zero test.
        let m2 = upoly(&[-2, 0, 1]).mul(&upoly(&[-3, 1]));
        let mut ctx2 = ExtCtx::new(AlgNum::new(m2, int(1), int(2)));
        assert!(ctx2.is_zero(&upoly(&[-2, 0, 1])));
        assert_eq!(ctx2.modulus().degree(), 2);
        assert!(ctx2.reduce(&upoly(&[-2, 0, 1])).is_zero());
        assert!(ctx2.inv(&upoly(&[-2, 0, 1])).is_none());
    }

    #[test]
    fn ext_roots_of_y_squared_minus_alpha() {
        // y^2 - alpha over Q(sqrt2): roots are the fourth roots of 2.
        let mut ctx = sqrt2_ctx();
        let p = ExtPoly::new(&mut ctx, vec![upoly(&[0, -1]), UniPoly::zero(), UniPoly::one()]);
        assert_eq!(p.sign_at(&mut ctx, &int(0)), -1);
        assert_eq!(p.sign_at(&mut ctx, &int(2)), 1);
        let roots = isolate_ext_roots(&mut ctx, &p);
        assert_eq!(roots.len(), 2);
        let approx: Vec<f64> = roots.iter().map(|r| r.to_f64()).collect();
        let q = 2f64.powf(0.25);
        assert!((approx[0] + q).abs() < 1e-3);
        assert!((approx[1] - q).abs() < 1e-3);
        // Sign of y at each root, and of the defining polynomial itself.
        for (i, loc) in roots.iter().enumerate() {
            let (lo, hi) = match loc {
                ExtRootLoc::Interval(lo, hi) => (lo.clone(), hi.clone()),
                ExtRootLoc::Rat(_) => panic!("2^(1/4) is irrational"),
            };
            let sf = p.squarefree_part(&mut ctx);
            let mut root = ExtRoot::new(&mut ctx, sf, lo, hi);
            let y = ExtPoly::new(&mut ctx, vec![UniPoly::zero(), UniPoly::one()]);
            assert_eq!(root.sign_of(&mut ctx, &y), if i == 0 { -1 } else { 1 });
            assert_eq!(root.sign_of(&mut ctx, &p), 0);
        }
    }

    #[test]
    fn mixed_rational_and_algebraic_roots() {
        // (y - 1)(y - alpha): Sturm counting and exact rational detection.
        let mut ctx = sqrt2_ctx();
        let alpha = upoly(&[0, 1]);
        let one = UniPoly::one();
        // y^2 - (1 + alpha) y + alpha
        let p = ExtPoly::new(
            &mut ctx,
            vec![alpha.clone(), alpha.add(&one).neg(), one.clone()],
        );
        let sf = p.squarefree_part(&mut ctx);
        let chain = SturmExt::new(&mut ctx, &sf);
        assert_eq!(chain.count_roots(&mut ctx, &int(0), &int(3)), 2);
        assert_eq!(chain.count_roots(&mut ctx, &rat(5, 4), &int(3)), 1);
        let roots = isolate_ext_roots(&mut ctx, &p);
        assert_eq!(roots.len(), 2);
        assert!(matches!(&roots[0], ExtRootLoc::Rat(q) if *q == int(1)));
        match &roots[1] {
            ExtRootLoc::Interval(lo, hi) => {
                assert!(*lo > int(1) && *hi < int(2));
            }
            ExtRootLoc::Rat(_) => panic!("sqrt(2) is irrational"),
        }
        // gcd over Q(alpha) sees the shared root with y^2 - 2.
        let q2 = ExtPoly::new(&mut ctx, vec![upoly(&[-2]), UniPoly::zero(), one]);
        let (lo, hi) = (roots[1].lo(), roots[1].hi());
        let mut beta = ExtRoot::new(&mut ctx, sf, lo, hi);
        assert_eq!(beta.sign_of(&mut ctx, &q2), 0);
        let y_minus_2 = ExtPoly::new(&mut ctx, vec![upoly(&[-2]), UniPoly::one()]);
        assert_eq!(beta.sign_of(&mut ctx, &y_minus_2), -1);
    }

    #[test]
    fn degenerate_leading_coefficients_are_dropped() {
        // (alpha^2 - 2) y^3 + y - 1 collapses to y - 1 in Q(sqrt2).
        let mut ctx = sqrt2_ctx();
        let p = ExtPoly::new(
            &mut ctx,
            vec![
                UniPoly::constant(int(-1)),
                UniPoly::one(),
                UniPoly::zero(),
                upoly(&[-2, 0, 1]),
            ],
        );
        assert_eq!(p.degree(), 1);
        let roots = isolate_ext_roots(&mut ctx, &p);
        assert_eq!(roots.len(), 1);
        assert!(matches!(&roots[0], ExtRootLoc::Rat(q) if *q == int(1)));
    }
}
