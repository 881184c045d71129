//! The bivariate equation `u u_xy - u_x u_y = σ u` on polynomials.
//!
//! The coefficient of `x^α y^β` in the residual is the quadratic form
//! `φ_σ^{α,β}` in the coefficients of `u`; a polynomial solves the equation
//! exactly when all of them vanish.

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{BiPoly, BigRational, UniPoly};
use crate::error::{Error, Result};

/// The data `σ(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PdeData {
    pub sigma: BiPoly,
}

impl PdeData {
    pub fn new(sigma: BiPoly) -> Self {
        PdeData { sigma }
    }

    /// `σ(x, y) = S(xy)`.
    pub fn from_ode(s: &UniPoly) -> Self {
        Self::new(diagonal_lift(s))
    }
}

/// `u u_xy - u_x u_y - σ u`.
pub fn pde_residual(u: &BiPoly, sigma: &BiPoly) -> BiPoly {
    let ux = u.dx();
    let uy = u.dy();
    let uxy = ux.dy();
    &(&(u * &uxy) - &(&ux * &uy)) - &(sigma * u)
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `φ_σ^{α,β}(A)` as the literal double sum, with `A(i, j)` the coefficient
/// of `x^i y^j`:
///
/// `Σ_{i≤α+1, j≤β+1} i(2j-β-1) A(i,j) A(α-i+1, β-j+1) - Σ_{i≤α, j≤β} A(i,j) C(α-i, β-j)`
pub fn phi_residual(a: &BiPoly, sigma: &BiPoly, alpha: usize, beta: usize) -> BigRational {
    let mut acc = BigRational::zero();
    for (&(i, j), aij) in a.terms() {
        if i >= 1 && i <= alpha + 1 && j <= beta + 1 {
            let other = a.coeff(alpha + 1 - i, beta + 1 - j);
            if !other.is_zero() {
                let w = i as i64 * (2 * j as i64 - beta as i64 - 1);
                acc += int(w) * aij * other;
            }
        }
        if i <= alpha && j <= beta {
            let c = sigma.coeff(alpha - i, beta - j);
            if !c.is_zero() {
                acc -= aij * c;
            }
        }
    }
    acc
}

/// Exponent box outside which every `φ_σ^{α,β}` vanishes identically.
pub fn residual_box(a: &BiPoly, sigma: &BiPoly) -> Option<(usize, usize)> {
    let (ax, ay) = (a.degree_x()?, a.degree_y()?);
    let (sx, sy) = (sigma.degree_x().unwrap_or(0), sigma.degree_y().unwrap_or(0));
    Some(((2 * ax).max(ax + sx), (2 * ay).max(ay + sy)))
}

#[derive(Clone, Debug, Serialize)]
pub struct VarietyReport {
    /// Nonzero residuals only; every other `(α, β)` in the box evaluated to zero.
    pub residuals: BiPoly,
    pub max_index: (usize, usize),
    pub evaluated: usize,
    pub member: bool,
}

/// Evaluates `φ_σ^{α,β}(A)` over the whole box where it can be nonzero.
pub fn phi_residuals(a: &BiPoly, sigma: &BiPoly) -> VarietyReport {
    let Some(max_index) = residual_box(a, sigma) else {
        return VarietyReport {
            residuals: BiPoly::zero(),
            max_index: (0, 0),
            evaluated: 0,
            member: true,
        };
    };
    let (amax, bmax) = max_index;
    let rows: Vec<Vec<((usize, usize), BigRational)>> = (0..=amax)
        .into_par_iter()
        .map(|alpha| {
            (0..=bmax)
                .map(|beta| ((alpha, beta), phi_residual(a, sigma, alpha, beta)))
                .collect()
        })
        .collect();
    let residuals = BiPoly::from_terms(rows.into_iter().flatten());
    VarietyReport {
        member: residuals.is_zero(),
        residuals,
        max_index,
        evaluated: (amax + 1) * (bmax + 1),
    }
}

/// Multiplication by `xy`.
pub fn m_xy(u: &BiPoly) -> BiPoly {
    u.shift(1, 1)
}

pub fn m_xy_pow(u: &BiPoly, k: usize) -> BiPoly {
    u.shift(k, k)
}

/// Splits `v = (xy)^m u` with `u` not divisible by `xy`, and divides the
/// data by the same power.
pub fn factor_xy_power(v: &BiPoly, sigma: &BiPoly) -> Result<(usize, BiPoly, BiPoly)> {
    let m = v
        .terms()
        .map(|(&(i, j), _)| i.min(j))
        .min()
        .ok_or(Error::ZeroPolynomial)?;
    let u = v.unshift(m, m).expect("m is the minimal diagonal exponent");
    let gamma = sigma
        .unshift(m, m)
        .ok_or_else(|| Error::DataNotDivisible(format!("(xy)^{m}")))?;
    Ok((m, u, gamma))
}

/// `(xy)^n u(1/x, 1/y)`: the coefficient at `(i, j)` moves to `(n-i, n-j)`.
pub fn reverse_bi(u: &BiPoly, n: usize) -> Result<BiPoly> {
    let mut terms = Vec::with_capacity(u.len());
    for (&(i, j), c) in u.terms() {
        if i > n || j > n {
            return Err(Error::IndexOverflow { index: i.max(j), bound: n });
        }
        terms.push(((n - i, n - j), c.clone()));
    }
    Ok(BiPoly::from_terms(terms))
}

/// Data solved by `reverse_bi(u, n)` when `u` solves `σ`:
/// `(xy)^{n-2} σ(1/x, 1/y)`.
pub fn reversed_data(sigma: &BiPoly, n: usize) -> Result<BiPoly> {
    let shift = n
        .checked_sub(2)
        .ok_or_else(|| Error::InvalidArgument(format!("reversal order {n} is below 2")))?;
    reverse_bi(sigma, shift)
}

/// Substitutes `t ↦ xy`.
pub fn diagonal_lift(q: &UniPoly) -> BiPoly {
    BiPoly::from_diagonal(q)
}

/// A nonzero solution has `deg_x u ≥ deg_x σ + 2` and likewise in `y`;
/// pairs violating this cannot solve the equation.
pub fn degree_bound_holds(u: &BiPoly, sigma: &BiPoly) -> bool {
    if sigma.is_zero() {
        return true;
    }
    match (u.degree_x(), u.degree_y()) {
        (Some(ux), Some(uy)) => {
            ux >= sigma.degree_x().unwrap_or(0) + 2 && uy >= sigma.degree_y().unwrap_or(0) + 2
        }
        _ => false,
    }
}
