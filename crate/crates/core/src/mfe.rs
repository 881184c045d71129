//! Closed-form solutions of the mean field equation on hyperelliptic curves
//! `y^2 = f(x)` with a diagonal canonical metric.
//!
//! For weights `Λ = (λ_1, ..., λ_g)` the metric density on the chart `C0` is
//! `S_Λ(|x|^2) / |f(x)|` with `S_Λ(t) = Σ λ_{i+1} t^i`. A positive root `a`
//! with positive coefficients `F^i(Λ, a)` gives `u(t) = 1/a + Σ F^i(Λ, a) t^i`
//! and `φ = e^ψ = 4|f(x)| / u(|x|^2)`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::roots::RootSummary;
use crate::algebra::{rational, BigRational, RealAlgebraic, UniPoly};
use crate::error::{Error, Result};
use crate::float17;
use crate::ode::{detect_polynomial, DetectedRoot, DetectionStatus, OdeData};
use crate::pde::{diagonal_lift, pde_residual};

/// Relative distance below which two branch points are treated as equal.
pub const DUPLICATE_TOL: f64 = 1e-9;

/// The normalizing constant of `φ`.
pub const PHI_SCALE: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    /// Affine chart in `x`.
    C0,
    /// Affine chart in `z = 1/x`.
    C0Prime,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveSpec {
    #[serde(with = "float17::complex_vec")]
    branch_points: Vec<Complex64>,
    genus: usize,
    /// `f(x) = Π (x - e_k)`, ascending powers.
    #[serde(with = "float17::complex_vec")]
    f_coeffs: Vec<Complex64>,
    /// `g(z) = Π (1 - e_k z)`, ascending powers.
    #[serde(with = "float17::complex_vec")]
    g_coeffs: Vec<Complex64>,
}

fn expand(factors: impl Iterator<Item = (Complex64, Complex64)>) -> Vec<Complex64> {
    // each factor is c0 + c1 * x
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for (c0, c1) in factors {
        let mut next = vec![Complex64::zero(); out.len() + 1];
        for (i, a) in out.iter().enumerate() {
            next[i] += a * c0;
            next[i + 1] += a * c1;
        }
        out = next;
    }
    out
}

impl CurveSpec {
    pub fn from_roots(roots: &[Complex64]) -> Result<Self> {
        let n = roots.len();
        if n % 2 == 1 {
            return Err(Error::OddCount(n));
        }
        let genus = (n / 2).saturating_sub(1);
        if genus < 2 {
            return Err(Error::GenusTooSmall(genus));
        }
        if let Some(bad) = roots.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("branch point {bad} is not finite")));
        }
        for i in 0..n {
            for j in i + 1..n {
                let scale = 1f64.max(roots[i].norm()).max(roots[j].norm());
                if (roots[i] - roots[j]).norm() <= DUPLICATE_TOL * scale {
                    return Err(Error::DuplicateRoots(i, j));
                }
            }
        }
        let one = Complex64::new(1.0, 0.0);
        Ok(CurveSpec {
            branch_points: roots.to_vec(),
            genus,
            f_coeffs: expand(roots.iter().map(|e| (-e, one))),
            g_coeffs: expand(roots.iter().map(|e| (one, -e))),
        })
    }

    /// The `n` points `r·exp(2πik/n)`.
    pub fn roots_of_unity(n: usize, radius: f64) -> Result<Self> {
        let roots: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64))
            .collect();
        Self::from_roots(&roots)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn branch_points(&self) -> &[Complex64] {
        &self.branch_points
    }

    pub fn f_coeffs(&self) -> &[Complex64] {
        &self.f_coeffs
    }

    pub fn g_coeffs(&self) -> &[Complex64] {
        &self.g_coeffs
    }

    /// `f(x)` in product form.
    pub fn f(&self, x: Complex64) -> Complex64 {
        self.branch_points.iter().map(|e| x - e).product()
    }

    /// `g(z)` in product form.
    pub fn g(&self, z: Complex64) -> Complex64 {
        self.branch_points.iter().map(|e| 1.0 - e * z).product()
    }

    /// `f'(e_k) = Π_{j≠k} (e_k - e_j)`.
    pub fn f_prime_at(&self, k: usize) -> Complex64 {
        let e = self.branch_points[k];
        self.branch_points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, ej)| e - ej)
            .product()
    }

    /// The chart's defining polynomial at `p`, with a floor below which the
    /// value is indistinguishable from a zero.
    fn chart_value(&self, chart: Chart, p: Complex64) -> (f64, f64) {
        let eps = 64.0 * f64::EPSILON;
        match chart {
            Chart::C0 => {
                let floor: f64 = self.branch_points.iter().map(|e| p.norm() + e.norm()).product();
                (self.f(p).norm(), eps * floor)
            }
            Chart::C0Prime => {
                let floor: f64 = self.branch_points.iter().map(|e| 1.0 + (e * p).norm()).product();
                (self.g(p).norm(), eps * floor)
            }
        }
    }

    pub fn min_branch_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.branch_points.iter().enumerate() {
            for b in &self.branch_points[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }
}

/// Branch points, i.e. the `x`-coordinates of the Weierstrass points.
pub fn weierstrass_points(curve: &CurveSpec) -> Vec<Complex64> {
    curve.branch_points.clone()
}

/// Diagonal canonical metric `diag(λ_1, ..., λ_g)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetricSpec {
    #[serde(with = "rational::vec")]
    lambdas: Vec<BigRational>,
}

impl MetricSpec {
    pub fn new(lambdas: Vec<BigRational>) -> Result<Self> {
        if lambdas.len() < 2 {
            return Err(Error::GenusTooSmall(lambdas.len()));
        }
        if let Some((i, l)) = lambdas.iter().enumerate().find(|(_, l)| **l <= BigRational::zero()) {
            return Err(Error::InvalidMetric(format!(
                "λ_{} = {} is not positive",
                i + 1,
                rational::format(l)
            )));
        }
        Ok(MetricSpec { lambdas })
    }

    pub fn genus(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[BigRational] {
        &self.lambdas
    }

    /// `S_Λ(t) = Σ λ_{i+1} t^i`.
    pub fn s_poly(&self) -> UniPoly {
        UniPoly::new(self.lambdas.clone())
    }

    pub fn scaled(&self, lambda: &BigRational) -> Result<Self> {
        Self::new(self.lambdas.iter().map(|l| l * lambda).collect())
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn reversed(coeffs: &[f64], n: usize) -> Vec<f64> {
    (0..=n).map(|i| coeffs.get(n - i).copied().unwrap_or(0.0)).collect()
}

/// Floating data of `φ` on both charts: `u` and `σ = S_Λ` in powers of
/// `t = |x|^2`, and their reversals used on `C0'`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    #[serde(with = "float17::vec")]
    pub u: Vec<f64>,
    #[serde(with = "float17::vec")]
    pub u_rev: Vec<f64>,
    #[serde(with = "float17::vec")]
    pub sigma: Vec<f64>,
    #[serde(with = "float17::vec")]
    pub sigma_rev: Vec<f64>,
    #[serde(with = "float17")]
    pub scale: f64,
    pub genus: usize,
}

impl ClosedForm {
    /// `u` has `g + 2` coefficients, `σ` has `g`.
    pub fn new(u: Vec<f64>, sigma: Vec<f64>, genus: usize) -> Result<Self> {
        if u.len() != genus + 2 || sigma.len() != genus {
            return Err(Error::InvalidArgument(format!(
                "genus {genus} needs {} coefficients of u and {genus} of σ, got {} and {}",
                genus + 2,
                u.len(),
                sigma.len()
            )));
        }
        if u.iter().chain(&sigma).any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        Ok(ClosedForm {
            u_rev: reversed(&u, genus + 1),
            sigma_rev: reversed(&sigma, genus - 1),
            u,
            sigma,
            scale: PHI_SCALE,
            genus,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Denominator of `φ` at `t = |p|^2`.
    pub fn u_at(&self, chart: Chart, t: f64) -> f64 {
        match chart {
            Chart::C0 => horner(&self.u, t),
            Chart::C0Prime => horner(&self.u_rev, t),
        }
    }

    /// Metric numerator at `t = |p|^2`.
    pub fn sigma_at(&self, chart: Chart, t: f64) -> f64 {
        match chart {
            Chart::C0 => horner(&self.sigma, t),
            Chart::C0Prime => horner(&self.sigma_rev, t),
        }
    }

    /// True when all coefficients of `u` are positive.
    pub fn is_positive(&self) -> bool {
        self.u.iter().all(|&c| c > 0.0)
    }

    pub fn phi(&self, curve: &CurveSpec, chart: Chart, p: Complex64) -> f64 {
        let (num, _) = curve.chart_value(chart, p);
        self.scale * num / self.u_at(chart, p.norm_sqr())
    }

    pub fn psi(&self, curve: &CurveSpec, chart: Chart, p: Complex64) -> Result<f64> {
        let (num, floor) = curve.chart_value(chart, p);
        if num <= floor {
            return Err(Error::AtSingularity(num));
        }
        Ok((self.scale * num / self.u_at(chart, p.norm_sqr())).ln())
    }

    /// Total mass `∫_X e^ψ dν = 4π(2g + 2)`.
    pub fn mass_expected(&self) -> f64 {
        8.0 * PI * (self.genus as f64 + 1.0)
    }
}

/// A constructed solution.
#[derive(Clone, Debug, Serialize)]
pub struct MfeSolution {
    pub genus: usize,
    pub a: RootSummary,
    #[serde(skip)]
    pub root: RealAlgebraic,
    /// Exact coefficients of `u` in powers of `xy`, when `a` is rational.
    pub u_exact: Option<UniPoly>,
    /// Coefficients as residues in `Q(a)`, one per power of `xy`.
    pub u_residues: Vec<UniPoly>,
    pub palindromic: bool,
    pub closed_form: ClosedForm,
    #[serde(with = "float17")]
    pub mass_expected: f64,
}

impl MfeSolution {
    pub fn phi(&self, curve: &CurveSpec, chart: Chart, p: Complex64) -> f64 {
        self.closed_form.phi(curve, chart, p)
    }

    pub fn psi(&self, curve: &CurveSpec, chart: Chart, p: Complex64) -> Result<f64> {
        self.closed_form.psi(curve, chart, p)
    }
}

pub fn phi_eval(sol: &MfeSolution, curve: &CurveSpec, chart: Chart, p: Complex64) -> f64 {
    sol.phi(curve, chart, p)
}

pub fn psi_eval(sol: &MfeSolution, curve: &CurveSpec, chart: Chart, p: Complex64) -> Result<f64> {
    sol.psi(curve, chart, p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionStatus {
    Solved,
    NoAdmissibleRoot,
}

#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub root: RootSummary,
    pub positive: bool,
    pub coefficients_positive: bool,
    pub residual_zero: bool,
    pub accepted: bool,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionReport {
    pub status: ConstructionStatus,
    pub metric: MetricSpec,
    pub data: UniPoly,
    pub gcd_poly: UniPoly,
    pub candidates: Vec<Candidate>,
    /// Index into `candidates` of the chosen (smallest admissible) root.
    pub chosen: Option<usize>,
    pub solution: Option<MfeSolution>,
}

fn judge(root: &DetectedRoot, genus: usize) -> Candidate {
    let positive = root.root.is_positive();
    let coefficients_positive = root
        .coeff_residues
        .iter()
        .skip(1)
        .all(|r| root.root.sign_of(r) == Ordering::Greater);
    let residual_zero = root.residual_zero && root.tail_zero;
    let degree_ok = root.degree() == Some(genus + 1);
    let reason = if !positive {
        Some("a is not positive".to_string())
    } else if !residual_zero {
        Some("coefficients do not give a polynomial solution".to_string())
    } else if !degree_ok {
        Some(format!("u has degree {:?}, expected {}", root.degree(), genus + 1))
    } else if !coefficients_positive {
        Some("some coefficient F^i(Λ, a) is not positive".to_string())
    } else {
        None
    };
    Candidate {
        root: RootSummary::from(&root.root),
        positive,
        coefficients_positive,
        residual_zero,
        accepted: reason.is_none(),
        reason,
    }
}

/// Searches for the admissible root and builds `u` and `φ`.
pub fn construct_solution(metric: &MetricSpec) -> Result<ConstructionReport> {
    let genus = metric.genus();
    let s = metric.s_poly();
    let data = OdeData::new(s.clone());
    let detection = detect_polynomial(&data)?;
    if detection.status == DetectionStatus::EveryNonzeroA {
        return Err(Error::InvalidMetric("data of degree zero gives no isolated root".into()));
    }
    let candidates: Vec<Candidate> = detection.roots.iter().map(|r| judge(r, genus)).collect();
    let chosen = detection
        .roots
        .iter()
        .zip(&candidates)
        .enumerate()
        .filter(|(_, (_, c))| c.accepted)
        .min_by(|(_, (a, _)), (_, (b, _))| a.root.cmp(&b.root))
        .map(|(i, _)| i);

    let solution = match chosen {
        Some(i) => Some(build_solution(&detection.roots[i], metric, &s)?),
        None => None,
    };
    Ok(ConstructionReport {
        status: if solution.is_some() {
            ConstructionStatus::Solved
        } else {
            ConstructionStatus::NoAdmissibleRoot
        },
        metric: metric.clone(),
        data: s,
        gcd_poly: detection.gcd_poly.clone(),
        candidates,
        chosen,
        solution,
    })
}

fn build_solution(root: &DetectedRoot, metric: &MetricSpec, s: &UniPoly) -> Result<MfeSolution> {
    let genus = metric.genus();
    let u_exact = root.q_exact();
    // rational roots are re-checked on the bivariate equation directly; for
    // irrational roots the residue check in Q(a) already covers it
    if let Some(q) = &u_exact {
        if !pde_residual(&diagonal_lift(q), &diagonal_lift(s)).is_zero() {
            return Err(Error::NotASolution);
        }
    }
    let residues = root.coeff_residues.clone();
    let n = residues.len() - 1;
    let palindromic = (0..=n).all(|i| residues[i] == residues[n - i]);
    let u: Vec<f64> = residues.iter().map(|r| root.root.eval_f64(r)).collect();
    let sigma: Vec<f64> = metric.lambdas().iter().map(rational::to_f64).collect();
    let closed_form = ClosedForm::new(u, sigma, genus)?;
    Ok(MfeSolution {
        genus,
        a: RootSummary::from(&root.root),
        root: root.root.clone(),
        u_exact,
        u_residues: residues,
        palindromic,
        mass_expected: closed_form.mass_expected(),
        closed_form,
    })
}
