//! The formal ODE `(tQ'' + Q')Q - t(Q')^2 = S Q`.
//!
//! Solutions with `Q(0) = 1/a` are generated by a polynomial family
//! `f_S^k(t)`: the `k`-th series coefficient is `f_S^k(a)`. A polynomial
//! solution of degree `N` exists exactly when `1/Q(0)` is a common root of
//! `f_S^{N+1}, ..., f_S^{2N-1}`.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::algebra::roots::RootSummary;
use crate::algebra::{poly_gcd, rational, BigRational, RealAlgebraic, TruncatedSeries, UniPoly};
use crate::error::{Error, Result};

/// The data `S(t)` of the equation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OdeData {
    s: UniPoly,
}

impl OdeData {
    pub fn new(s: UniPoly) -> Self {
        OdeData { s }
    }

    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        Self::new(UniPoly::new(coeffs))
    }

    pub fn poly(&self) -> &UniPoly {
        &self.s
    }

    /// `deg S`; `None` when `S = 0`.
    pub fn degree(&self) -> Option<usize> {
        self.s.degree()
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.s.coeff(i)
    }

    /// `λ·S`.
    pub fn rescale(&self, lambda: &BigRational) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::InvalidArgument("rescaling factor must be nonzero".into()));
        }
        Ok(Self::new(self.s.scale(lambda)))
    }
}

fn small(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn signed(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Memo table for `f_S^1, f_S^2, ...`; each entry depends on all lower ones.
#[derive(Clone, Debug)]
pub struct RecursionTable {
    data: OdeData,
    // polys[k - 1] = f_S^k
    polys: Vec<UniPoly>,
}

impl RecursionTable {
    pub fn new(data: &OdeData) -> Self {
        RecursionTable {
            data: data.clone(),
            polys: vec![UniPoly::constant(data.coeff(0))],
        }
    }

    pub fn data(&self) -> &OdeData {
        &self.data
    }

    /// `f_S^k`, extending the table as needed. `k ≥ 1`.
    pub fn get(&mut self, k: usize) -> &UniPoly {
        assert!(k >= 1, "the family is indexed from 1");
        while self.polys.len() < k {
            self.push_next();
        }
        &self.polys[k - 1]
    }

    pub fn computed(&self) -> &[UniPoly] {
        &self.polys
    }

    // f^{k+1} = s_k/(k+1)^2 + t/(k+1)^2 · Σ_{i=0}^{k-1} (s_i - (i+1)(2i+1-k) f^{i+1}) f^{k-i}
    fn push_next(&mut self) {
        let k = self.polys.len();
        let mut acc = UniPoly::zero();
        for i in 0..k {
            let weight = signed((i as i64 + 1) * (2 * i as i64 + 1 - k as i64));
            let left = &UniPoly::constant(self.data.coeff(i)) - &self.polys[i].scale(&weight);
            acc = &acc + &(&left * &self.polys[k - 1 - i]);
        }
        let denom = (small(k + 1) * small(k + 1)).recip();
        let next = &UniPoly::constant(self.data.coeff(k) * &denom) + &acc.shift(1).scale(&denom);
        self.polys.push(next);
    }
}

/// `f_S^k(t)` for a single `k`.
pub fn recursion_f(k: usize, data: &OdeData) -> UniPoly {
    RecursionTable::new(data).get(k).clone()
}

/// `λ f_S^k(λ t)`, the right side of the rescaling identity.
pub fn rescaled_family_member(k: usize, data: &OdeData, lambda: &BigRational) -> UniPoly {
    recursion_f(k, data).compose_scale(lambda).scale(lambda)
}

/// Checks `f_{λS}^k(t) = λ f_S^k(λt)` exactly.
pub fn rescaling_identity_holds(k: usize, data: &OdeData, lambda: &BigRational) -> Result<bool> {
    let scaled = data.rescale(lambda)?;
    Ok(recursion_f(k, &scaled) == rescaled_family_member(k, data, lambda))
}

/// Formal series solution with `Q(0) = 1/a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OdeSeriesSolution {
    #[serde(with = "rational")]
    pub a: BigRational,
    pub coeffs: TruncatedSeries,
}

/// `q_0 = 1/a`, `q_i = f_S^i(a)` for `1 ≤ i ≤ n_terms`.
pub fn build_series(data: &OdeData, a: &BigRational, n_terms: usize) -> Result<OdeSeriesSolution> {
    if a.is_zero() {
        return Err(Error::ZeroInitialValue);
    }
    let mut table = RecursionTable::new(data);
    let mut coeffs = Vec::with_capacity(n_terms + 1);
    coeffs.push(a.recip());
    for i in 1..=n_terms {
        coeffs.push(table.get(i).eval(a));
    }
    Ok(OdeSeriesSolution {
        a: a.clone(),
        coeffs: TruncatedSeries::new(coeffs, n_terms),
    })
}

/// `(tQ'' + Q')Q - t(Q')^2 - S Q`.
pub fn ode_residual(q: &UniPoly, data: &OdeData) -> UniPoly {
    let d1 = q.derivative();
    let d2 = d1.derivative();
    let lhs = &(&d2.shift(1) + &d1) * q;
    let sq = (&d1 * &d1).shift(1);
    &(&lhs - &sq) - &(data.poly() * q)
}

/// Residual of a truncated series; only orders `0..N-1` are determined by
/// `q_0..q_N`, so the result has order `N - 1`.
pub fn ode_residual_series(q: &TruncatedSeries, data: &OdeData) -> Result<TruncatedSeries> {
    let order = q
        .order()
        .checked_sub(1)
        .ok_or_else(|| Error::InvalidArgument("series residual needs order ≥ 1".into()))?;
    let full = ode_residual(&q.to_poly(), data);
    Ok(TruncatedSeries::from_poly(&full, order).truncate(order))
}

/// `Q̃(t) = t^n Q(1/t)` together with its data `t^{n-m-2} S̃(t)`.
pub fn reverse_solution(q: &UniPoly, data: &OdeData) -> Result<(UniPoly, UniPoly)> {
    let n = q.degree().ok_or(Error::ZeroPolynomial)?;
    if !ode_residual(q, data).is_zero() {
        return Err(Error::NotASolution);
    }
    let q_rev = q.reverse()?;
    let s_new = match data.degree() {
        None => UniPoly::zero(),
        Some(m) => {
            // a genuine solution has n ≥ m + 2
            let shift = n.checked_sub(m + 2).ok_or(Error::NotASolution)?;
            data.poly().reverse()?.shift(shift)
        }
    };
    Ok((q_rev, s_new))
}

/// Strips the largest power `t^m` from a series solution and the matching
/// power from its data: `Q = t^m Q1`, `S = t^m S1`.
pub fn reduce_by_t_power(
    q: &TruncatedSeries,
    data: &OdeData,
) -> Result<(usize, TruncatedSeries, OdeData)> {
    let (m, q1) = q.factor_t_power()?;
    if m == 0 {
        return Ok((0, q.clone(), data.clone()));
    }
    let s = data.poly();
    if s.coeffs().iter().take(m).any(|c| !c.is_zero()) {
        return Err(Error::DataNotDivisible(format!("t^{m}")));
    }
    let s1 = UniPoly::new(s.coeffs().iter().skip(m).cloned().collect());
    Ok((m, q1, OdeData::new(s1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionStatus {
    PolynomialFound,
    NoPolynomial,
    /// Every polynomial in the window vanishes identically, so every
    /// nonzero `a` gives a polynomial solution of degree at most `N`.
    EveryNonzeroA,
}

/// A nonzero real common root `a` and the solution it determines.
///
/// Coefficients live in `Q(a)`: each is the canonical residue of a
/// polynomial in `a` modulo `a`'s defining polynomial. For rational `a` they
/// are constants.
#[derive(Clone, Debug)]
pub struct DetectedRoot {
    pub root: RealAlgebraic,
    pub coeff_residues: Vec<UniPoly>,
    /// Symbolic residual of `Q` vanishes identically.
    pub residual_zero: bool,
    /// `f_S^i(a) = 0` for every `i` in `2N..=tail_checked_to`.
    pub tail_zero: bool,
    pub tail_checked_to: usize,
}

impl DetectedRoot {
    /// `Q` with exact rational coefficients, when `a` is rational.
    pub fn q_exact(&self) -> Option<UniPoly> {
        self.root.as_rational()?;
        Some(UniPoly::new(
            self.coeff_residues.iter().map(|r| r.coeff(0)).collect(),
        ))
    }

    pub fn q_f64(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .coeff_residues
            .iter()
            .map(|r| self.root.eval_f64(r))
            .collect();
        while v.last() == Some(&0.0) {
            v.pop();
        }
        v
    }

    /// Degree of `Q`.
    pub fn degree(&self) -> Option<usize> {
        self.coeff_residues.iter().rposition(|r| !r.is_zero())
    }
}

#[derive(Clone, Debug)]
pub struct PolyDetection {
    pub status: DetectionStatus,
    /// Target solution degree `N`; the window is `f_S^{N+1} .. f_S^{2N-1}`.
    pub max_degree: usize,
    pub gcd_poly: UniPoly,
    pub roots: Vec<DetectedRoot>,
    /// Distinct nonzero non-real roots of the gcd (reported, unused).
    pub complex_root_count: usize,
}

impl PolyDetection {
    pub fn window(&self) -> (usize, usize) {
        (self.max_degree + 1, 2 * self.max_degree - 1)
    }

    /// Smallest verified root.
    pub fn root_a(&self) -> Option<&RealAlgebraic> {
        self.verified().next().map(|r| &r.root)
    }

    /// `Q` for the smallest verified rational root.
    pub fn q(&self) -> Option<UniPoly> {
        self.verified().find_map(DetectedRoot::q_exact)
    }

    pub fn verified(&self) -> impl Iterator<Item = &DetectedRoot> {
        self.roots.iter().filter(|r| r.residual_zero && r.tail_zero)
    }
}

/// Detects polynomial solutions of degree `deg S + 2`.
pub fn detect_polynomial(data: &OdeData) -> Result<PolyDetection> {
    let m = data.degree().ok_or(Error::ZeroPolynomial)?;
    detect_polynomial_with_degree(data, m + 2)
}

/// Detects polynomial solutions of degree at most `max_degree` (`≥ deg S + 2`)
/// through the gcd of `f_S^{N+1}, ..., f_S^{2N-1}`.
pub fn detect_polynomial_with_degree(data: &OdeData, max_degree: usize) -> Result<PolyDetection> {
    let m = data.degree().ok_or(Error::ZeroPolynomial)?;
    if max_degree < m + 2 {
        return Err(Error::InvalidArgument(format!(
            "solution degree {max_degree} is below deg S + 2 = {}",
            m + 2
        )));
    }
    let n = max_degree;
    let tail_to = (3 * n + 2).max(4 * m + 10);
    let mut table = RecursionTable::new(data);
    table.get(tail_to);
    let window: Vec<UniPoly> = (n + 1..=2 * n - 1).map(|i| table.get(i).clone()).collect();

    let gcd_poly = match poly_gcd(&window) {
        Ok(g) => g,
        Err(Error::AllZero) => {
            return Ok(PolyDetection {
                status: DetectionStatus::EveryNonzeroA,
                max_degree: n,
                gcd_poly: UniPoly::zero(),
                roots: Vec::new(),
                complex_root_count: 0,
            })
        }
        Err(e) => return Err(e),
    };
    // a = Q(0)^{-1} can never be zero
    let (_, nonzero_part) = gcd_poly.factor_t_power()?;
    let sqf = nonzero_part.squarefree_part();
    let real = RealAlgebraic::roots_of(&nonzero_part);
    let complex_root_count = sqf.degree().unwrap_or(0) - real.len();

    let roots: Vec<DetectedRoot> = real
        .into_iter()
        .map(|root| certify_root(&table, data, n, root, tail_to))
        .collect();
    let status = if roots.iter().any(|r| r.residual_zero && r.tail_zero) {
        DetectionStatus::PolynomialFound
    } else {
        DetectionStatus::NoPolynomial
    };
    Ok(PolyDetection {
        status,
        max_degree: n,
        gcd_poly,
        roots,
        complex_root_count,
    })
}

fn certify_root(
    table: &RecursionTable,
    data: &OdeData,
    n: usize,
    root: RealAlgebraic,
    tail_to: usize,
) -> DetectedRoot {
    let family = table.computed();
    let inv = root.reciprocal().expect("zero roots are filtered out");
    let mut residues = Vec::with_capacity(n + 1);
    residues.push(inv);
    residues.extend(family[..n].iter().map(|f| root.reduce(f)));

    let tail_zero = family[n..tail_to].iter().all(|f| root.reduce(f).is_zero());
    let residual_zero = residual_vanishes(&root, &residues, data);
    DetectedRoot {
        root,
        coeff_residues: residues,
        residual_zero,
        tail_zero,
        tail_checked_to: tail_to,
    }
}

/// Symbolic residual of `Q = Σ q_k x^k` with `q_k ∈ Q(a)`: every
/// coefficient of the residual, reduced modulo the defining polynomial.
fn residual_vanishes(root: &RealAlgebraic, q: &[UniPoly], data: &OdeData) -> bool {
    let len = q.len();
    let get = |i: usize| q.get(i).cloned().unwrap_or_else(UniPoly::zero);
    let s_const = |i: usize| UniPoly::constant(data.coeff(i));
    // coefficient of x^k in (xQ'' + Q')Q - x Q'^2 - S Q
    for k in 0..2 * len {
        let mut acc = UniPoly::zero();
        for i in 0..=k {
            let j = k - i;
            // (xQ''+Q') has coefficient (i+1)^2 q_{i+1} at x^i
            let qi1 = get(i + 1);
            if !qi1.is_zero() {
                let c = small((i + 1) * (i + 1));
                acc = &acc + &(&qi1 * &get(j)).scale(&c);
            }
            // x Q'^2: coefficient at x^k is Σ_{a+b=k-1} (a+1)(b+1) q_{a+1} q_{b+1}
            if i < k {
                let b = k - 1 - i;
                let c = small((i + 1) * (b + 1));
                acc = &acc - &(&get(i + 1) * &get(b + 1)).scale(&c);
            }
            acc = &acc - &(&s_const(i) * &get(j));
        }
        if !root.reduce(&acc).is_zero() {
            return false;
        }
    }
    true
}

/// Report form of a detection, with rationals as strings.
#[derive(Clone, Debug, Serialize)]
pub struct DetectionReport {
    pub status: DetectionStatus,
    pub window: (usize, usize),
    pub gcd_poly: UniPoly,
    pub roots: Vec<DetectedRootReport>,
    pub complex_root_count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectedRootReport {
    pub root: RootSummary,
    pub residual_zero: bool,
    pub tail_zero: bool,
    pub tail_checked_to: usize,
    pub degree: Option<usize>,
    /// Exact coefficients of `Q` for rational roots.
    pub q: Option<UniPoly>,
    pub q_approx: Vec<f64>,
}

impl From<&PolyDetection> for DetectionReport {
    fn from(d: &PolyDetection) -> Self {
        DetectionReport {
            status: d.status,
            window: d.window(),
            gcd_poly: d.gcd_poly.clone(),
            roots: d
                .roots
                .iter()
                .map(|r| DetectedRootReport {
                    root: RootSummary::from(&r.root),
                    residual_zero: r.residual_zero,
                    tail_zero: r.tail_zero,
                    tail_checked_to: r.tail_checked_to,
                    degree: r.degree(),
                    q: r.q_exact(),
                    q_approx: r.q_f64(),
                })
                .collect(),
            complex_root_count: d.complex_root_count,
        }
    }
}

impl DetectedRoot {
    /// `a · q_0 = 1` in `Q(a)`.
    pub fn initial_value_consistent(&self) -> bool {
        let prod = &self.coeff_residues[0] * &UniPoly::t();
        self.root.reduce(&prod) == UniPoly::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{frac, int};

    fn data(c: &[i64]) -> OdeData {
        OdeData::new(UniPoly::from_ints(c))
    }

    fn q(c: &[(i64, i64)]) -> UniPoly {
        UniPoly::new(c.iter().map(|&(n, d)| frac(n, d)).collect())
    }

    #[test]
    fn family_genus_two() {
        let s = data(&[1, 1]);
        let mut table = RecursionTable::new(&s);
        assert_eq!(table.get(1), &q(&[(1, 1)]));
        assert_eq!(table.get(2), &q(&[(1, 4), (1, 4)]));
        assert_eq!(table.get(3), &q(&[(0, 1), (1, 9)]));
        assert_eq!(table.get(4), &q(&[(0, 1), (1, 64), (-1, 192)]));
        assert_eq!(table.get(5), &q(&[(0, 1), (0, 1), (-1, 600), (1, 1800)]));
    }

    #[test]
    fn family_genus_three() {
        let s = data(&[1, 1, 1]);
        assert_eq!(recursion_f(4, &s), q(&[(0, 1), (11, 192), (-1, 192)]));
        assert_eq!(recursion_f(5, &s), q(&[(0, 1), (1, 75), (-11, 1800), (1, 1800)]));
        assert_eq!(
            recursion_f(6, &s),
            q(&[(0, 1), (1, 324), (-1, 405), (11, 11520), (-1, 11520)])
        );
        assert_eq!(
            recursion_f(7, &s),
            q(&[(0, 1), (0, 1), (-43, 52920), (373, 705600), (-401, 2116800), (1, 58800)])
        );
    }

    #[test]
    fn series_examples() {
        let sol = build_series(&data(&[1, 1]), &int(3), 4).unwrap();
        assert_eq!(sol.coeffs.coeffs(), &[frac(1, 3), int(1), int(1), frac(1, 3), int(0)]);
        let sol = build_series(&data(&[1, 1, 1]), &int(8), 5).unwrap();
        assert_eq!(
            sol.coeffs.coeffs(),
            &[frac(1, 8), int(1), frac(9, 4), int(1), frac(1, 8), int(0)]
        );
        // S = 1: q_1 = s_0 = 1, q_2 = a/4, q_3 = s_2/9 + a s_0 s_1 / 9 = 0
        let sol = build_series(&data(&[1]), &int(1), 3).unwrap();
        assert_eq!(sol.coeffs.coeffs(), &[int(1), int(1), frac(1, 4), int(0)]);
        assert_eq!(build_series(&data(&[1]), &int(0), 3), Err(Error::ZeroInitialValue));
    }

    #[test]
    fn residual_examples() {
        let genus2 = q(&[(1, 3), (1, 1), (1, 1), (1, 3)]);
        assert!(ode_residual(&genus2, &data(&[1, 1])).is_zero());
        assert!(ode_residual(&UniPoly::one(), &OdeData::new(UniPoly::zero())).is_zero());
        assert_eq!(ode_residual(&UniPoly::from_ints(&[1, 1]), &data(&[1])), UniPoly::from_ints(&[0, -1]));
    }

    #[test]
    fn series_residual_order() {
        let sol = build_series(&data(&[2, -1, 3]), &frac(5, 7), 9).unwrap();
        let r = ode_residual_series(&sol.coeffs, &data(&[2, -1, 3])).unwrap();
        assert_eq!(r.order(), 8);
        assert!(r.is_zero());
    }

    #[test]
    fn detect_genus_two() {
        let d = detect_polynomial(&data(&[1, 1])).unwrap();
        assert_eq!(d.status, DetectionStatus::PolynomialFound);
        assert_eq!(d.window(), (4, 5));
        assert_eq!(d.gcd_poly, UniPoly::from_ints(&[0, -3, 1]));
        assert_eq!(d.root_a().unwrap().as_rational(), Some(&int(3)));
        assert_eq!(d.q().unwrap(), q(&[(1, 3), (1, 1), (1, 1), (1, 3)]));
        assert!(d.roots[0].initial_value_consistent());
        assert_eq!(d.roots[0].degree(), Some(3));
    }

    #[test]
    fn detect_genus_three() {
        let d = detect_polynomial(&data(&[1, 1, 1])).unwrap();
        assert_eq!(d.status, DetectionStatus::PolynomialFound);
        assert_eq!(d.root_a().unwrap().as_rational(), Some(&int(8)));
        assert_eq!(d.q().unwrap(), q(&[(1, 8), (1, 1), (9, 4), (1, 1), (1, 8)]));
    }

    #[test]
    fn constant_data_degenerates() {
        // f_1^3 vanishes identically: Q = 1/a + t + a t^2 / 4 solves S = 1 for every a
        let d = detect_polynomial(&data(&[1])).unwrap();
        assert_eq!(d.status, DetectionStatus::EveryNonzeroA);
        for a in [int(1), frac(-2, 3), int(7)] {
            let sol = build_series(&data(&[1]), &a, 6).unwrap();
            let poly = sol.coeffs.to_poly();
            assert_eq!(poly.degree(), Some(2));
            assert!(ode_residual(&poly, &data(&[1])).is_zero());
        }
    }

    #[test]
    fn no_polynomial_for_generic_quartic_data() {
        let d = detect_polynomial(&data(&[1, 2, 1, 1])).unwrap();
        assert_eq!(d.status, DetectionStatus::NoPolynomial);
        assert!(d.root_a().is_none());
    }

    #[test]
    fn wider_window_finds_degree_bound_solutions() {
        // (1 + t)^5 / 5 solves S = (1 + t)^3; with N = 6 the window is f^7..f^11.
        let s = data(&[1, 3, 3, 1]);
        let d = detect_polynomial_with_degree(&s, 6).unwrap();
        assert_eq!(d.status, DetectionStatus::PolynomialFound);
        assert_eq!(d.root_a().unwrap().as_rational(), Some(&int(5)));
        assert!(detect_polynomial_with_degree(&s, 4).is_err());
    }

    #[test]
    fn rescale_examples() {
        let s = data(&[1, 1]);
        assert_eq!(s.rescale(&int(2)).unwrap(), data(&[2, 2]));
        assert_eq!(s.rescale(&int(1)).unwrap(), s);
        // f_{2S}^2(t) = (4t + 2)/4 and 2 f_S^2(2t) = 2 (2t + 1)/4
        assert_eq!(recursion_f(2, &data(&[2, 2])), q(&[(1, 2), (1, 1)]));
        assert_eq!(rescaled_family_member(2, &s, &int(2)), q(&[(1, 2), (1, 1)]));
        assert!(rescaling_identity_holds(6, &s, &frac(-3, 5)).unwrap());
    }

    #[test]
    fn reverse_examples() {
        let genus2 = q(&[(1, 3), (1, 1), (1, 1), (1, 3)]);
        let (r, s) = reverse_solution(&genus2, &data(&[1, 1])).unwrap();
        assert_eq!(r, genus2);
        assert_eq!(s, UniPoly::from_ints(&[1, 1]));
        let genus3 = q(&[(1, 8), (1, 1), (9, 4), (1, 1), (1, 8)]);
        let (r, s) = reverse_solution(&genus3, &data(&[1, 1, 1])).unwrap();
        assert_eq!(r, genus3);
        assert_eq!(s, UniPoly::from_ints(&[1, 1, 1]));
        assert_eq!(reverse_solution(&UniPoly::one(), &data(&[1])), Err(Error::NotASolution));
        let (r, s) = reverse_solution(&UniPoly::from_ints(&[3]), &OdeData::new(UniPoly::zero())).unwrap();
        assert_eq!((r, s), (UniPoly::from_ints(&[3]), UniPoly::zero()));
    }

    #[test]
    fn reverse_with_gap() {
        // Q = (1 + t^2)^2 solves S = 8t: n = 4, m = 1, so the new data is t·S̃ = 8t.
        let qq = UniPoly::from_ints(&[1, 0, 2, 0, 1]);
        let s = data(&[0, 8]);
        assert!(ode_residual(&qq, &s).is_zero());
        let (r, s_new) = reverse_solution(&qq, &s).unwrap();
        assert_eq!(r, qq);
        assert_eq!(s_new, UniPoly::from_ints(&[0, 8]));
        assert!(ode_residual(&r, &OdeData::new(s_new)).is_zero());
    }

    #[test]
    fn reduce_examples() {
        // Q1 = (1 + t)^2 / 2 solves S1 = 1 (the a = 2 member of the constant family)
        let q1 = q(&[(1, 2), (1, 1), (1, 2)]);
        assert!(ode_residual(&q1, &data(&[1])).is_zero());
        let big = TruncatedSeries::from_poly(&q1.shift(1), 6);
        let (m, r, s1) = reduce_by_t_power(&big, &data(&[0, 1])).unwrap();
        assert_eq!(m, 1);
        assert_eq!(r.to_poly(), q1);
        assert_eq!(s1, data(&[1]));
        assert!(ode_residual_series(&r, &s1).unwrap().is_zero());

        let plain = TruncatedSeries::from_poly(&q1, 4);
        let (m, r, s1) = reduce_by_t_power(&plain, &data(&[1])).unwrap();
        assert_eq!((m, r, s1), (0, plain, data(&[1])));

        let t2 = TruncatedSeries::from_poly(&UniPoly::from_ints(&[0, 0, 1]), 4);
        assert!(matches!(reduce_by_t_power(&t2, &data(&[1])), Err(Error::DataNotDivisible(_))));
    }

    #[test]
    fn divisibility_by_t_for_large_index() {
        let s = data(&[3, -1, 2]);
        let mut table = RecursionTable::new(&s);
        for i in 4..12 {
            assert!(table.get(i).coeff(0).is_zero(), "f^{i}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn rat() -> impl Strategy<Value = BigRational> {
            (-9i64..=9, 1i64..=5).prop_map(|(n, d)| frac(n, d))
        }

        fn nonzero_rat() -> impl Strategy<Value = BigRational> {
            rat().prop_filter("nonzero", |r| !r.is_zero())
        }

        fn ode_data(max_deg: usize) -> impl Strategy<Value = OdeData> {
            proptest::collection::vec(rat(), 1..=max_deg + 1)
                .prop_map(OdeData::from_coeffs)
                .prop_filter("nonzero", |d| d.degree().is_some())
        }

        // order-by-order solve of the residual coefficients, independent of the family
        fn oracle_series(s: &OdeData, a: &BigRational, n: usize) -> Vec<BigRational> {
            let mut q = vec![a.recip()];
            for k in 0..n {
                let get = |i: usize| q.get(i).cloned().unwrap_or_else(BigRational::zero);
                let mut rest = BigRational::zero();
                for i in 0..k {
                    rest += small((i + 1) * (i + 1)) * get(i + 1) * get(k - i);
                }
                for x in 0..k {
                    rest -= small((x + 1) * (k - x)) * get(x + 1) * get(k - x);
                }
                for i in 0..=k {
                    rest -= s.coeff(i) * get(k - i);
                }
                let next = -rest / (small((k + 1) * (k + 1)) * get(0));
                q.push(next);
            }
            q
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn recursion_identity_r1(s in ode_data(4), a in nonzero_rat()) {
                let n = 9;
                let sol = build_series(&s, &a, n).unwrap();
                let q = sol.coeffs.coeffs();
                prop_assert_eq!(&q[0], &a.recip());
                for k in 0..n {
                    let mut lhs = BigRational::zero();
                    let mut rhs = BigRational::zero();
                    for i in 0..=k {
                        lhs += signed((i as i64 + 1) * (2 * i as i64 + 1 - k as i64)) * &q[i + 1] * &q[k - i];
                        rhs += s.coeff(i) * &q[k - i];
                    }
                    prop_assert_eq!(lhs, rhs, "k = {}", k);
                }
            }

            #[test]
            fn series_matches_order_by_order_solve(s in ode_data(4), a in nonzero_rat()) {
                let sol = build_series(&s, &a, 8).unwrap();
                prop_assert_eq!(sol.coeffs.coeffs(), &oracle_series(&s, &a, 8)[..]);
                prop_assert!(ode_residual_series(&sol.coeffs, &s).unwrap().is_zero());
            }

            #[test]
            fn degree_and_constant_term(s in ode_data(4)) {
                let mut table = RecursionTable::new(&s);
                for k in 1..10usize {
                    let f = table.get(k + 1).clone();
                    prop_assert_eq!(f.coeff(0), s.coeff(k) / (small(k + 1) * small(k + 1)));
                    if k + 1 >= 3 {
                        prop_assert!(f.degree().is_none_or(|d| d < k));
                    }
                }
            }

            #[test]
            fn divisible_by_t_beyond_degree(s in ode_data(4)) {
                let n = s.degree().unwrap();
                let mut table = RecursionTable::new(&s);
                for i in n + 2..n + 10 {
                    prop_assert!(table.get(i).coeff(0).is_zero());
                }
            }

            #[test]
            fn rescaling_identity(s in ode_data(3), lambda in nonzero_rat(), i in 1usize..=8) {
                prop_assert!(rescaling_identity_holds(i, &s, &lambda).unwrap());
            }

            // Q = c (α + β t)^k solves S = k c α β (α + β t)^{k-2}
            #[test]
            fn detects_power_family(alpha in nonzero_rat(), beta in nonzero_rat(), c in nonzero_rat(), k in 2usize..=5) {
                let p = UniPoly::new(vec![alpha.clone(), beta.clone()]);
                let mut pk2 = UniPoly::one();
                for _ in 0..k - 2 {
                    pk2 = &pk2 * &p;
                }
                let qq = (&pk2 * &(&p * &p)).scale(&c);
                let s = OdeData::new(pk2.scale(&(small(k) * &c * &alpha * &beta)));
                prop_assert!(ode_residual(&qq, &s).is_zero());

                let a = qq.coeff(0).recip();
                let sol = build_series(&s, &a, 4 * k + 10).unwrap();
                prop_assert_eq!(sol.coeffs.to_poly(), qq.clone());

                let d = detect_polynomial(&s).unwrap();
                if k == 2 {
                    prop_assert_eq!(d.status, DetectionStatus::EveryNonzeroA);
                    return Ok(());
                }
                prop_assert_eq!(d.status, DetectionStatus::PolynomialFound);
                let hit = d.verified().find(|r| r.root.as_rational() == Some(&a));
                prop_assert!(hit.is_some());
                let hit = hit.unwrap();
                prop_assert_eq!(hit.q_exact().unwrap(), qq);
                prop_assert_eq!(hit.degree(), Some(k));
                prop_assert!(hit.initial_value_consistent());
            }

            #[test]
            fn reversal_of_family(alpha in nonzero_rat(), beta in nonzero_rat(), c in nonzero_rat(), j in 0usize..=2) {
                // t^j (α + β t^2)^2 solves 8 αβ t^{j+1}
                let p = UniPoly::new(vec![alpha.clone(), BigRational::zero(), beta.clone()]);
                let qq = (&p * &p).scale(&c).shift(j);
                let s = OdeData::new(UniPoly::monomial(small(8) * &alpha * &beta * &c, j + 1));
                prop_assert!(ode_residual(&qq, &s).is_zero());
                let (q_rev, s_new) = reverse_solution(&qq, &s).unwrap();
                prop_assert!(ode_residual(&q_rev, &OdeData::new(s_new)).is_zero());
            }

            #[test]
            fn uniqueness_of_series(s in ode_data(3), a in nonzero_rat()) {
                let one = build_series(&s, &a, 6).unwrap();
                let two = build_series(&s, &a, 11).unwrap();
                prop_assert_eq!(two.coeffs.truncate(6), one.coeffs);
            }
        }
    }
}
