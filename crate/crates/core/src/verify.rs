//! Floating-point checks of constructed solutions, independent of the exact
//! algebra: a finite-difference residual of `Δ_H ψ + e^ψ`, the behaviour of
//! `φ` at the Weierstrass points, chart compatibility and the total mass.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::float17;
use crate::mfe::{Chart, ClosedForm, CurveSpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub chart: Chart,
    #[serde(with = "float17::complex")]
    pub center: Complex64,
    #[serde(with = "float17")]
    pub half_width: f64,
    /// Points per axis.
    pub resolution: usize,
    /// Radius of the disks around Weierstrass points whose stencils are skipped.
    #[serde(with = "float17")]
    pub exclusion_radius: f64,
    #[serde(with = "float17")]
    pub fd_step: f64,
}

impl GridSpec {
    /// Grid with the default step `1e-3 · half_width` and an exclusion
    /// radius of `max(10 h, d/4)`, `d` the smallest branch point distance.
    pub fn for_curve(
        curve: &CurveSpec,
        chart: Chart,
        center: Complex64,
        half_width: f64,
        resolution: usize,
    ) -> Result<Self> {
        let fd_step = 1e-3 * half_width;
        let exclusion_radius = default_exclusion(curve, chart, fd_step);
        let g = GridSpec { chart, center, half_width, resolution, exclusion_radius, fd_step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |b: bool, msg: &str| if b { Ok(()) } else { Err(Error::InvalidArgument(msg.into())) };
        ok(self.half_width.is_finite() && self.half_width > 0.0, "half_width must be positive")?;
        ok(self.resolution >= 2, "resolution must be at least 2")?;
        ok(self.fd_step > 0.0, "fd_step must be positive")?;
        ok(
            self.fd_step < self.half_width / self.resolution as f64,
            "fd_step must be below half_width / resolution",
        )?;
        ok(
            self.exclusion_radius > 2.0 * self.fd_step,
            "exclusion_radius must exceed twice fd_step",
        )
    }

    fn points(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let n = self.resolution;
        let step = 2.0 * self.half_width / (n - 1) as f64;
        (0..n).flat_map(move |i| {
            (0..n).map(move |j| {
                let p = self.center
                    + Complex64::new(-self.half_width + step * j as f64, -self.half_width + step * i as f64);
                (i, j, p)
            })
        })
    }

    fn cell_area(&self) -> f64 {
        let step = 2.0 * self.half_width / (self.resolution - 1) as f64;
        step * step
    }
}

pub fn default_exclusion(curve: &CurveSpec, chart: Chart, fd_step: f64) -> f64 {
    let sing = singularities(curve, chart);
    let mut d = f64::INFINITY;
    for (i, a) in sing.iter().enumerate() {
        for b in &sing[i + 1..] {
            d = d.min((a - b).norm());
        }
    }
    if !d.is_finite() {
        d = curve.min_branch_distance();
    }
    (10.0 * fd_step).max(0.25 * d)
}

/// Points of the chart where `φ` vanishes.
pub fn singularities(curve: &CurveSpec, chart: Chart) -> Vec<Complex64> {
    match chart {
        Chart::C0 => curve.branch_points().to_vec(),
        Chart::C0Prime => curve
            .branch_points()
            .iter()
            .filter(|e| e.norm() > 0.0)
            .map(|e| 1.0 / e)
            .collect(),
    }
}

fn chart_abs(curve: &CurveSpec, chart: Chart, p: Complex64) -> f64 {
    match chart {
        Chart::C0 => curve.f(p).norm(),
        Chart::C0Prime => curve.g(p).norm(),
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PointResidual {
    #[serde(with = "float17")]
    pub re: f64,
    #[serde(with = "float17")]
    pub im: f64,
    #[serde(with = "float17")]
    pub phi: f64,
    #[serde(with = "float17")]
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    #[serde(with = "float17")]
    pub fd_step: f64,
    #[serde(with = "float17")]
    pub max_abs_residual: f64,
    /// `max |R| / max φ` over the checked points.
    #[serde(with = "float17")]
    pub max_rel_residual: f64,
    /// Discrete `L^2` norm of `R` over the checked points.
    #[serde(with = "float17")]
    pub residual_l2: f64,
    #[serde(with = "float17")]
    pub max_phi: f64,
    #[serde(with = "float17::complex")]
    pub worst_point: Complex64,
    pub points_checked: usize,
    pub points_excluded: usize,
}

/// Kahan–Babuška summation in a fixed order.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `R = (|f| / σ(|x|^2)) · L_h(log φ) + φ` with the five-point Laplacian
/// `L_h`; on `C0'` the same with `g`, `σ̃` and `ũ`.
pub fn residual_at(form: &ClosedForm, curve: &CurveSpec, chart: Chart, p: Complex64, h: f64) -> Result<f64> {
    let psi = |q: Complex64| form.psi(curve, chart, q).map_err(|_| Error::SingularityInGrid(q.re, q.im));
    let center = psi(p)?;
    let mut around = 0.0;
    for d in [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)] {
        around += psi(p + d)?;
    }
    let lap = (around - 4.0 * center) / (h * h);
    let weight = chart_abs(curve, chart, p) / form.sigma_at(chart, p.norm_sqr());
    Ok(weight * lap + center.exp())
}

/// Residual over the grid. Points whose stencil reaches an exclusion disk
/// are skipped; the per-point values are returned in grid order.
pub fn mfe_residual_grid(
    form: &ClosedForm,
    curve: &CurveSpec,
    grid: &GridSpec,
) -> Result<(ResidualReport, Vec<PointResidual>)> {
    grid.validate()?;
    let sing = singularities(curve, grid.chart);
    let guard = grid.exclusion_radius + grid.fd_step;
    let pts: Vec<(usize, usize, Complex64)> = grid.points().collect();
    let values: Vec<Option<PointResidual>> = pts
        .par_iter()
        .map(|&(_, _, p)| {
            if sing.iter().any(|e| (p - e).norm() < guard) {
                return Ok(None);
            }
            let residual = residual_at(form, curve, grid.chart, p, grid.fd_step)?;
            Ok(Some(PointResidual { re: p.re, im: p.im, phi: form.phi(curve, grid.chart, p), residual }))
        })
        .collect::<Result<_>>()?;
    let checked: Vec<PointResidual> = values.into_iter().flatten().collect();
    if checked.is_empty() {
        return Err(Error::InvalidArgument("every grid point lies in an exclusion disk".into()));
    }
    let mut worst = checked[0];
    let mut max_phi = 0f64;
    for r in &checked {
        if r.residual.abs() > worst.residual.abs() || worst.residual.is_nan() {
            worst = *r;
        }
        max_phi = max_phi.max(r.phi);
    }
    let l2 = compensated_sum(checked.iter().map(|r| r.residual * r.residual)).sqrt() * grid.cell_area().sqrt();
    let report = ResidualReport {
        fd_step: grid.fd_step,
        max_abs_residual: worst.residual.abs(),
        max_rel_residual: worst.residual.abs() / max_phi,
        residual_l2: l2,
        max_phi,
        worst_point: Complex64::new(worst.re, worst.im),
        points_checked: checked.len(),
        points_excluded: pts.len() - checked.len(),
    };
    Ok((report, checked))
}

pub fn write_csv<W: Write>(out: &mut W, points: &[PointResidual]) -> std::io::Result<()> {
    writeln!(out, "re,im,phi,residual")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            float17::to_text(p.re),
            float17::to_text(p.im),
            float17::to_text(p.phi),
            float17::to_text(p.residual)
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct MassReport {
    #[serde(with = "float17")]
    pub mass_estimate: f64,
    #[serde(with = "float17")]
    pub mass_expected: f64,
    #[serde(with = "float17")]
    pub rel_error: f64,
    pub resolution: usize,
}

// ∫_{|p| ≤ 1} φ · σ(|p|^2) / |f(p)| dA by the polar midpoint rule
fn disk_integral(form: &ClosedForm, curve: &CurveSpec, chart: Chart, n: usize) -> f64 {
    let dr = 1.0 / n as f64;
    let dt = 2.0 * PI / n as f64;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let r = (i as f64 + 0.5) * dr;
            let t = r * r;
            let sigma = form.sigma_at(chart, t);
            compensated_sum((0..n).map(|j| {
                let p = Complex64::from_polar(r, (j as f64 + 0.5) * dt);
                let density = chart_abs(curve, chart, p);
                if density == 0.0 {
                    return 0.0;
                }
                form.phi(curve, chart, p) * sigma / density
            })) * r * dr * dt
        })
        .collect();
    compensated_sum(rows.into_iter())
}

/// `∫_X e^ψ dν` over both sheets of `X → P^1`, each covered by the unit
/// disks of the two charts.
pub fn mass_check(form: &ClosedForm, curve: &CurveSpec, resolution: usize) -> Result<MassReport> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("mass resolution must be positive".into()));
    }
    let one_sheet = disk_integral(form, curve, Chart::C0, resolution)
        + disk_integral(form, curve, Chart::C0Prime, resolution);
    let estimate = 2.0 * one_sheet;
    let expected = form.mass_expected();
    Ok(MassReport {
        mass_estimate: estimate,
        mass_expected: expected,
        rel_error: (estimate - expected).abs() / expected,
        resolution,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusRatios {
    #[serde(with = "float17")]
    pub radius: f64,
    #[serde(with = "float17")]
    pub min: f64,
    #[serde(with = "float17")]
    pub max: f64,
    #[serde(with = "float17")]
    pub mean: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub index: usize,
    #[serde(with = "float17::complex")]
    pub point: Complex64,
    /// `scale · |f'(e_k)| / u(|e_k|^2)`.
    #[serde(with = "float17")]
    pub limit: f64,
    pub ratios: Vec<RadiusRatios>,
    /// Relative spread across radii of the circle means of `φ(x) / |x - e_k|`.
    #[serde(with = "float17")]
    pub variation: f64,
    #[serde(with = "float17")]
    pub phi_at_point: f64,
}

/// Samples `φ(x) / |x - e_k|` on circles around the branch point `e_k`.
pub fn weierstrass_asymptotics(
    form: &ClosedForm,
    curve: &CurveSpec,
    k: usize,
    radii: &[f64],
    angles: usize,
) -> Result<AsymptoticReport> {
    let e = *curve
        .branch_points()
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("no branch point {k}")))?;
    let nearest = curve
        .branch_points()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, b)| (b - e).norm())
        .fold(f64::INFINITY, f64::min);
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r < nearest / 2.0)) {
        return Err(Error::InvalidArgument(
            "radii must be positive and below half the distance to the nearest branch point".into(),
        ));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("radii must decrease".into()));
    }
    let angles = angles.max(1);
    let ratios: Vec<RadiusRatios> = radii
        .iter()
        .map(|&r| {
            let vals: Vec<f64> = (0..angles)
                .map(|j| {
                    let x = e + Complex64::from_polar(r, 2.0 * PI * j as f64 / angles as f64);
                    form.phi(curve, Chart::C0, x) / (x - e).norm()
                })
                .collect();
            RadiusRatios {
                radius: r,
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean: compensated_sum(vals.iter().copied()) / angles as f64,
            }
        })
        .collect();
    let lo = ratios.iter().map(|r| r.mean).fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().map(|r| r.mean).fold(f64::NEG_INFINITY, f64::max);
    Ok(AsymptoticReport {
        index: k,
        point: e,
        limit: form.scale * curve.f_prime_at(k).norm() / form.u_at(Chart::C0, e.norm_sqr()),
        ratios,
        variation: (hi - lo) / lo,
        phi_at_point: form.phi(curve, Chart::C0, e),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapReport {
    pub samples: usize,
    pub seed: u64,
    #[serde(with = "float17")]
    pub overlap_max_rel_err: f64,
    #[serde(with = "float17")]
    pub equator_max_rel_err: f64,
}

fn overlap_err(form: &ClosedForm, curve: &CurveSpec, x: Complex64) -> f64 {
    let a = form.phi(curve, Chart::C0, x);
    let b = form.phi(curve, Chart::C0Prime, 1.0 / x);
    (a - b).abs() / a
}

/// Compares `φ_C0(x)` with `φ_C0'(1/x)` at seeded random points with
/// `0.5 < |x| < 2` away from the branch points, and on `|x| = 1`.
pub fn chart_overlap_check(
    form: &ClosedForm,
    curve: &CurveSpec,
    samples: usize,
    seed: u64,
    exclusion: f64,
) -> OverlapReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0f64;
    let mut taken = 0;
    while taken < samples {
        let r = 0.5 * 4f64.powf(rng.gen::<f64>());
        let x = Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI));
        if !(0.5 < r && r < 2.0) || curve.branch_points().iter().any(|e| (x - e).norm() < exclusion) {
            continue;
        }
        worst = worst.max(overlap_err(form, curve, x));
        taken += 1;
    }
    let mut equator = 0f64;
    for j in 0..samples {
        let x = Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / samples as f64);
        if curve.branch_points().iter().any(|e| (x - e).norm() < exclusion) {
            continue;
        }
        equator = equator.max(overlap_err(form, curve, x));
    }
    OverlapReport { samples, seed, overlap_max_rel_err: worst, equator_max_rel_err: equator }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    #[serde(with = "float17")]
    pub residual_rel: f64,
    #[serde(with = "float17")]
    pub convergence_lo: f64,
    #[serde(with = "float17")]
    pub convergence_hi: f64,
    #[serde(with = "float17")]
    pub mass_rel: f64,
    #[serde(with = "float17")]
    pub overlap_rel: f64,
    #[serde(with = "float17")]
    pub asymptotic_variation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual_rel: 1e-4,
            convergence_lo: 3.5,
            convergence_hi: 4.5,
            mass_rel: 1e-2,
            overlap_rel: 1e-10,
            asymptotic_variation: 1e-2,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.residual_rel,
            self.convergence_lo,
            self.convergence_hi,
            self.mass_rel,
            self.overlap_rel,
            self.asymptotic_variation,
        ];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) || self.convergence_lo >= self.convergence_hi {
            return Err(Error::InvalidArgument("tolerances must be positive and ordered".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub grid: GridSpec,
    /// Repeat the residual at `h / 2` and report the ratio.
    pub convergence: bool,
    pub mass_resolution: usize,
    pub radii: Vec<f64>,
    pub angles: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl VerifyConfig {
    pub fn standard(grid: GridSpec) -> Self {
        VerifyConfig {
            grid,
            convergence: true,
            mass_resolution: 2000,
            radii: vec![1e-2, 1e-3, 1e-4],
            angles: 16,
            samples: 1000,
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "float17")]
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub residual: ResidualReport,
    pub residual_half_step: Option<ResidualReport>,
    #[serde(with = "float17")]
    pub convergence_ratio: f64,
    pub mass: MassReport,
    pub asymptotics: Vec<AsymptoticReport>,
    pub overlap: OverlapReport,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn check(name: &str, value: f64, bound: String, pass: bool) -> Check {
    Check { name: name.into(), value, bound, pass: pass && value.is_finite() }
}

/// Runs every check and records pass/fail against the tolerances.
pub fn run_verification(form: &ClosedForm, curve: &CurveSpec, cfg: &VerifyConfig) -> Result<VerificationReport> {
    cfg.tolerances.validate()?;
    if form.genus != curve.genus() {
        return Err(Error::InvalidArgument(format!(
            "solution genus {} does not match curve genus {}",
            form.genus,
            curve.genus()
        )));
    }
    let tol = &cfg.tolerances;
    let (residual, _) = mfe_residual_grid(form, curve, &cfg.grid)?;
    let mut checks = vec![check(
        "residual_rel",
        residual.max_rel_residual,
        format!("< {}", float17::to_text(tol.residual_rel)),
        residual.max_rel_residual < tol.residual_rel,
    )];
    let (residual_half_step, convergence_ratio) = if cfg.convergence {
        let half = GridSpec { fd_step: cfg.grid.fd_step / 2.0, ..cfg.grid.clone() };
        let (r2, _) = mfe_residual_grid(form, curve, &half)?;
        let ratio = residual.max_abs_residual / r2.max_abs_residual;
        checks.push(check(
            "convergence_ratio",
            ratio,
            format!("in [{}, {}]", float17::to_text(tol.convergence_lo), float17::to_text(tol.convergence_hi)),
            (tol.convergence_lo..=tol.convergence_hi).contains(&ratio),
        ));
        (Some(r2), ratio)
    } else {
        (None, f64::NAN)
    };

    let mass = mass_check(form, curve, cfg.mass_resolution)?;
    checks.push(check("mass_rel", mass.rel_error, format!("< {}", float17::to_text(tol.mass_rel)), mass.rel_error < tol.mass_rel));

    let asymptotics = (0..curve.branch_points().len())
        .map(|k| weierstrass_asymptotics(form, curve, k, &cfg.radii, cfg.angles))
        .collect::<Result<Vec<_>>>()?;
    let worst_var = asymptotics.iter().map(|a| a.variation).fold(0.0, f64::max);
    let positive = asymptotics.iter().all(|a| a.ratios.iter().all(|r| r.min > 0.0));
    checks.push(check(
        "asymptotic_variation",
        worst_var,
        format!("< {}", float17::to_text(tol.asymptotic_variation)),
        positive && worst_var < tol.asymptotic_variation,
    ));

    let overlap = chart_overlap_check(form, curve, cfg.samples, cfg.seed, cfg.grid.exclusion_radius.min(0.1));
    let overlap_err = overlap.overlap_max_rel_err.max(overlap.equator_max_rel_err);
    checks.push(check("overlap_rel", overlap_err, format!("< {}", float17::to_text(tol.overlap_rel)), overlap_err < tol.overlap_rel));

    let passed = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        residual,
        residual_half_step,
        convergence_ratio,
        mass,
        asymptotics,
        overlap,
        checks,
        passed,
    })
}
