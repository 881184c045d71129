//! Real root isolation by Sturm sequences, and exact real algebraic numbers
//! given by a square-free defining polynomial plus an isolating interval.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::rational::{self, BigRational};
use super::unipoly::UniPoly;

/// Closed interval holding exactly one distinct real root of the polynomial
/// it was isolated from. Rational roots come back as `[r, r]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealRootInterval {
    #[serde(with = "rational")]
    pub lo: BigRational,
    #[serde(with = "rational")]
    pub hi: BigRational,
    pub multiplicity_hint: usize,
}

impl RealRootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Sturm chain `p, p', -rem(p_{i-1}, p_i), ...` of a nonzero polynomial.
pub fn sturm_chain(p: &UniPoly) -> Vec<UniPoly> {
    let mut chain = vec![p.clone()];
    let mut next = p.derivative();
    while !next.is_zero() {
        let r = -&chain.last().unwrap().rem(&next);
        chain.push(next);
        next = r;
    }
    chain
}

fn sign(x: &BigRational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

pub fn sign_variations(chain: &[UniPoly], x: &BigRational) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for p in chain {
        let s = sign(&p.eval(x));
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Number of distinct real roots in `(a, b]`, for `a < b`.
pub fn count_roots(chain: &[UniPoly], a: &BigRational, b: &BigRational) -> usize {
    sign_variations(chain, a) - sign_variations(chain, b)
}

/// Integer `B` with every real root strictly inside `(-B, B)`.
pub fn cauchy_bound(p: &UniPoly) -> BigRational {
    let lc = p.leading().expect("nonzero polynomial").abs();
    let max = p.coeffs()[..p.coeffs().len() - 1]
        .iter()
        .map(|c| c.abs() / &lc)
        .max()
        .unwrap_or_else(BigRational::zero);
    BigRational::from_integer((max + BigRational::one()).ceil().to_integer() + BigInt::one())
}

fn midpoint(a: &BigRational, b: &BigRational) -> BigRational {
    (a + b) / rational::int(2)
}

/// Isolates the distinct real roots of `p` (nonzero), sorted ascending.
pub fn isolate_real_roots(p: &UniPoly) -> Vec<RealRootInterval> {
    isolate_impl(p, None)
}

/// As [`isolate_real_roots`], bisecting every interval down to `width`.
pub fn isolate_real_roots_with_width(p: &UniPoly, width: &BigRational) -> Vec<RealRootInterval> {
    isolate_impl(p, Some(width))
}

fn isolate_impl(p: &UniPoly, width: Option<&BigRational>) -> Vec<RealRootInterval> {
    assert!(!p.is_zero(), "root isolation of the zero polynomial");
    if p.degree() == Some(0) {
        return Vec::new();
    }
    let sqf = p.squarefree_part();
    let factors = p.squarefree_decomposition();
    let chain = sturm_chain(&sqf);
    let lc = sqf.primitive_integer().last().cloned().unwrap();
    let bound = cauchy_bound(&sqf);

    let mut found: Vec<(BigRational, BigRational)> = Vec::new();
    let mut stack = vec![(-bound.clone(), bound.clone())];
    while let Some((a, b)) = stack.pop() {
        let n = count_roots(&chain, &a, &b);
        match n {
            0 => {}
            1 => found.push(finish_interval(&sqf, &lc, a, b)),
            _ => {
                let m = midpoint(&a, &b);
                if sqf.eval(&m).is_zero() {
                    found.push((m.clone(), m.clone()));
                    // (a, m) and (m, b) are open on m; shrink to keep m out.
                    let (left, right) = separate_from(&chain, &a, &m, &b);
                    stack.push((a, left));
                    stack.push((right, b));
                } else {
                    stack.push((a, m.clone()));
                    stack.push((m, b));
                }
            }
        }
    }
    found.sort_by(|x, y| x.0.cmp(&y.0));
    // Neighbouring brackets may share a (non-root) bisection point.
    for k in 1..found.len() {
        while found[k - 1].1 >= found[k].0 {
            let (left, right) = found.split_at_mut(k);
            for (lo, hi) in [&mut left[k - 1], &mut right[0]] {
                let half = (&*hi - &*lo) / rational::int(2);
                refine_bounds(&sqf, lo, hi, &half);
            }
        }
    }
    found
        .into_iter()
        .map(|(mut lo, mut hi)| {
            if let Some(w) = width {
                refine_bounds(&sqf, &mut lo, &mut hi, w);
            }
            let multiplicity_hint = factors
                .iter()
                .find(|(f, _)| has_root_in_closed(f, &lo, &hi))
                .map_or(1, |(_, k)| *k);
            RealRootInterval { lo, hi, multiplicity_hint }
        })
        .collect()
}

/// Given a root `m` of the square-free chain head strictly inside `(a, b)`,
/// finds `l < m < r` such that `(a, l]` and `[r, b)` hold every other root.
fn separate_from(
    chain: &[UniPoly],
    a: &BigRational,
    m: &BigRational,
    b: &BigRational,
) -> (BigRational, BigRational) {
    let p = &chain[0];
    let mut delta = (b - a) / rational::int(4);
    loop {
        let l = m - &delta;
        let r = m + &delta;
        if !p.eval(&l).is_zero()
            && !p.eval(&r).is_zero()
            && count_roots(chain, &l, &r) == 1
        {
            return (l, r);
        }
        delta /= rational::int(2);
    }
}

fn has_root_in_closed(f: &UniPoly, lo: &BigRational, hi: &BigRational) -> bool {
    if f.eval(lo).is_zero() {
        return true;
    }
    lo != hi && count_roots(&sturm_chain(f), lo, hi) > 0
}

/// Bisects a simple-root bracket `(a, b)` until rational candidates with
/// denominator dividing `lc` can be tested, returning `[r, r]` when one is
/// the root.
fn finish_interval(
    sqf: &UniPoly,
    lc: &BigInt,
    mut a: BigRational,
    mut b: BigRational,
) -> (BigRational, BigRational) {
    let lc_r = BigRational::from_integer(lc.clone());
    let target = lc_r.recip();
    if let Some(exact) = bisect_until(sqf, &mut a, &mut b, &target) {
        return (exact.clone(), exact);
    }
    // A rational root of the primitive integer polynomial is n / lc for an integer n.
    let lo_n = (&a * &lc_r).ceil().to_integer();
    let hi_n = (&b * &lc_r).floor().to_integer();
    let mut n = lo_n;
    while n <= hi_n {
        let cand = BigRational::new(n.clone(), lc.clone());
        if sqf.eval(&cand).is_zero() {
            return (cand.clone(), cand);
        }
        n += 1;
    }
    (a, b)
}

/// Shrinks `(a, b)` around the single simple root until `b - a < width`.
/// Returns the root if a midpoint hits it exactly.
fn bisect_until(
    p: &UniPoly,
    a: &mut BigRational,
    b: &mut BigRational,
    width: &BigRational,
) -> Option<BigRational> {
    let sa = sign(&p.eval(a));
    while &(&*b - &*a) >= width {
        let m = midpoint(a, b);
        let sm = sign(&p.eval(&m));
        if sm == 0 {
            return Some(m);
        }
        if sm == sa {
            *a = m;
        } else {
            *b = m;
        }
    }
    None
}

fn refine_bounds(p: &UniPoly, lo: &mut BigRational, hi: &mut BigRational, width: &BigRational) {
    if lo == hi {
        return;
    }
    if let Some(r) = bisect_until(p, lo, hi, width) {
        *lo = r.clone();
        *hi = r;
    }
}

/// A real algebraic number: the unique root of the square-free polynomial
/// `defining` inside `[lo, hi]`. Rational values use `defining = t - r` and
/// `lo = hi = r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealAlgebraic {
    defining: UniPoly,
    lo: BigRational,
    hi: BigRational,
}

impl RealAlgebraic {
    pub fn rational(r: BigRational) -> Self {
        RealAlgebraic {
            defining: UniPoly::new(vec![-r.clone(), BigRational::one()]),
            lo: r.clone(),
            hi: r,
        }
    }

    /// Builds from an isolating interval of a root of `p`.
    pub fn from_interval(p: &UniPoly, iv: &RealRootInterval) -> Self {
        if iv.is_exact() {
            return Self::rational(iv.lo.clone());
        }
        RealAlgebraic {
            defining: p.squarefree_part(),
            lo: iv.lo.clone(),
            hi: iv.hi.clone(),
        }
    }

    /// All real roots of `p` (nonzero) in ascending order.
    pub fn roots_of(p: &UniPoly) -> Vec<Self> {
        isolate_real_roots(p)
            .iter()
            .map(|iv| Self::from_interval(p, iv))
            .collect()
    }

    pub fn defining(&self) -> &UniPoly {
        &self.defining
    }

    pub fn bounds(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        (self.lo == self.hi).then_some(&self.lo)
    }

    /// Narrows the isolating interval below `width`.
    pub fn refine(&mut self, width: &BigRational) {
        if self.lo == self.hi {
            return;
        }
        if let Some(r) = bisect_until(&self.defining, &mut self.lo, &mut self.hi, width) {
            *self = Self::rational(r);
        }
    }

    pub fn to_f64(&self) -> f64 {
        let mut me = self.clone();
        me.refine(&rational::frac(1, 1 << 60));
        rational::to_f64(&midpoint(&me.lo, &me.hi))
    }

    /// `h(α)` approximated in floating point, via a rational point within
    /// `2^-200` of `α`.
    pub fn eval_f64(&self, h: &UniPoly) -> f64 {
        if let Some(r) = self.as_rational() {
            return rational::to_f64(&h.eval(r));
        }
        let mut me = self.clone();
        me.refine(&(BigRational::one() / BigRational::from_integer(BigInt::one() << 200)));
        rational::to_f64(&h.eval(&midpoint(&me.lo, &me.hi)))
    }

    /// Exact sign of `h(α)`.
    pub fn sign_of(&self, h: &UniPoly) -> Ordering {
        if h.is_zero() {
            return Ordering::Equal;
        }
        if let Some(r) = self.as_rational() {
            return h.eval(r).cmp(&BigRational::zero());
        }
        let g = h.gcd(&self.defining);
        if g.degree().unwrap_or(0) > 0 && has_root_in_closed(&g, &self.lo, &self.hi) {
            return Ordering::Equal;
        }
        let mut me = self.clone();
        let hs = h.squarefree_part();
        let chain = sturm_chain(&hs);
        loop {
            if let Some(r) = me.as_rational() {
                return h.eval(r).cmp(&BigRational::zero());
            }
            if !hs.eval(&me.lo).is_zero() && count_roots(&chain, &me.lo, &me.hi) == 0 {
                return h.eval(&me.lo).cmp(&BigRational::zero());
            }
            let w = (&me.hi - &me.lo) / rational::int(2);
            me.refine(&w);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_rational().is_some_and(Zero::is_zero)
    }

    /// Canonical representative of `h(α)` in `Q[t]/(defining)`.
    pub fn reduce(&self, h: &UniPoly) -> UniPoly {
        h.rem(&self.defining)
    }

    /// Representative of `1/α`; `None` when `α = 0`.
    pub fn reciprocal(&self) -> Option<UniPoly> {
        let (g, s, _) = UniPoly::t().xgcd(&self.defining);
        if g.degree() != Some(0) {
            return None;
        }
        Some(self.reduce(&s))
    }

    /// Human-readable description; exact text for rationals.
    pub fn describe(&self) -> String {
        match self.as_rational() {
            Some(r) => rational::format(r),
            None => format!(
                "root of {} in [{}, {}]",
                self.defining,
                rational::format(&self.lo),
                rational::format(&self.hi)
            ),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign_of(&UniPoly::t()) == Ordering::Greater
    }
}

impl PartialOrd for RealAlgebraic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RealAlgebraic {
    /// Orders by value.
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        if let Some(r) = other.as_rational() {
            return self.sign_of(&UniPoly::new(vec![-r.clone(), BigRational::one()]));
        }
        if let Some(r) = self.as_rational() {
            return other
                .sign_of(&UniPoly::new(vec![-r.clone(), BigRational::one()]))
                .reverse();
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        // Each interval isolates one root of its defining polynomial, so the
        // values agree iff a common factor has a root in the overlap.
        let g = a.defining.gcd(&b.defining);
        let lo = std::cmp::max(&a.lo, &b.lo).clone();
        let hi = std::cmp::min(&a.hi, &b.hi).clone();
        if g.degree().unwrap_or(0) > 0 && lo <= hi && has_root_in_closed(&g, &lo, &hi) {
            return Ordering::Equal;
        }
        loop {
            if a.hi < b.lo {
                return Ordering::Less;
            }
            if b.hi < a.lo {
                return Ordering::Greater;
            }
            let wa = (&a.hi - &a.lo) / rational::int(2);
            let wb = (&b.hi - &b.lo) / rational::int(2);
            a.refine(&wa);
            b.refine(&wb);
            if let (Some(x), Some(y)) = (a.as_rational(), b.as_rational()) {
                return x.cmp(y);
            }
        }
    }
}

/// Evaluates the exactness flag and a decimal approximation for reports.
#[derive(Clone, Debug, Serialize)]
pub struct RootSummary {
    pub exact: bool,
    pub value: String,
    #[serde(with = "crate::float17")]
    pub approx: f64,
}

impl From<&RealAlgebraic> for RootSummary {
    fn from(a: &RealAlgebraic) -> Self {
        RootSummary {
            exact: a.as_rational().is_some(),
            value: a.describe(),
            approx: a.to_f64(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{frac, int};
    use proptest::prelude::*;

    fn p(c: &[i64]) -> UniPoly {
        UniPoly::from_ints(c)
    }

    #[test]
    fn linear_root_is_exact() {
        let r = isolate_real_roots(&p(&[-3, 1]));
        assert_eq!(r, vec![RealRootInterval { lo: int(3), hi: int(3), multiplicity_hint: 1 }]);
    }

    #[test]
    fn no_real_roots() {
        assert!(isolate_real_roots(&p(&[1, 0, 1])).is_empty());
        assert!(isolate_real_roots(&p(&[7])).is_empty());
    }

    #[test]
    fn sqrt_two_brackets() {
        let roots = isolate_real_roots_with_width(&p(&[-2, 0, 1]), &frac(1, 4));
        assert_eq!(roots.len(), 2);
        assert!(roots[0].lo > int(-2) && roots[0].hi < int(-1));
        assert!(roots[1].lo > int(1) && roots[1].hi < int(2));
        assert!(roots.iter().all(|r| !r.is_exact() && r.width() < frac(1, 4)));
    }

    #[test]
    fn rational_non_dyadic_roots_found_exactly() {
        // (3t - 1)(4t + 9)(t - 8)
        let f = &(&p(&[-1, 3]) * &p(&[9, 4])) * &p(&[-8, 1]);
        let roots = isolate_real_roots(&f);
        let vals: Vec<_> = roots.iter().map(|r| (r.lo.clone(), r.hi.clone())).collect();
        assert_eq!(
            vals,
            vec![(frac(-9, 4), frac(-9, 4)), (frac(1, 3), frac(1, 3)), (int(8), int(8))]
        );
    }

    #[test]
    fn multiplicity_hints() {
        // t^2 (t - 1)^3 (t + 5)
        let f = &(&p(&[0, 0, 1]) * &(&(&p(&[-1, 1]) * &p(&[-1, 1])) * &p(&[-1, 1]))) * &p(&[5, 1]);
        let roots = isolate_real_roots(&f);
        let hints: Vec<_> = roots.iter().map(|r| r.multiplicity_hint).collect();
        assert_eq!(hints, vec![1, 2, 3]);
        assert_eq!(roots[1].lo, int(0));
    }

    #[test]
    fn algebraic_sign_and_order() {
        let sqrt2 = RealAlgebraic::roots_of(&p(&[-2, 0, 1])).pop().unwrap();
        assert!(sqrt2.as_rational().is_none());
        assert_eq!(sqrt2.sign_of(&p(&[-3, 0, 2])), Ordering::Greater); // 2·2 - 3
        assert_eq!(sqrt2.sign_of(&p(&[-2, 0, 1])), Ordering::Equal);
        assert_eq!(sqrt2.sign_of(&p(&[-4, 0, 0, 0, 1])), Ordering::Equal); // t^4 - 4
        assert_eq!(sqrt2.sign_of(&p(&[-141, 100])), Ordering::Greater);
        assert_eq!(sqrt2.sign_of(&p(&[-142, 100])), Ordering::Less);
        assert!((sqrt2.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        let r = RealAlgebraic::rational(frac(3, 2));
        assert!(sqrt2 < r);
        let other = RealAlgebraic::roots_of(&p(&[-4, 0, 0, 0, 1])).pop().unwrap();
        assert_eq!(sqrt2.cmp(&other), Ordering::Equal);
        let inv = sqrt2.reciprocal().unwrap();
        assert!((sqrt2.eval_f64(&inv) - 1.0 / std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    fn nonzero_poly() -> impl Strategy<Value = UniPoly> {
        prop::collection::vec(-8i64..=8, 1..7)
            .prop_map(|v| UniPoly::from_ints(&v))
            .prop_filter("nonzero", |p| p.degree().is_some())
    }

    proptest! {
        #[test]
        fn sign_changes_and_counts(f in nonzero_poly()) {
            let roots = isolate_real_roots(&f);
            let sqf = f.squarefree_part();
            if sqf.degree().unwrap_or(0) > 0 {
                let chain = sturm_chain(&sqf);
                let b = cauchy_bound(&sqf);
                prop_assert_eq!(roots.len(), count_roots(&chain, &-b.clone(), &b));
            }
            for w in roots.windows(2) {
                prop_assert!(w[0].hi < w[1].lo);
            }
            for r in &roots {
                if r.is_exact() {
                    prop_assert!(f.eval(&r.lo).is_zero());
                } else {
                    let (a, b) = (sqf.eval(&r.lo), sqf.eval(&r.hi));
                    prop_assert!(sign(&a) * sign(&b) < 0);
                }
            }
        }
    }
}
