//! Dimension formulas for cascade images.
//!
//! * [`hausdorff_image_dim`] solves `s - log2 E(W^s) = d`; it is the almost
//!   sure Hausdorff dimension of `f(E)` when `dim_H E = d`, and the general
//!   upper bound for the upper box dimension when `dim_B E = d`.
//! * [`lower_bound_s1`] is the general lower bound `d / (1 + γ)`.
//! * [`sequence_image_dim`] is the box dimension of the image of a
//!   decreasing sequence with decreasing gaps in `S_p`, `φ((1+γ)p)`, where
//!   `φ(β) = sup_x (1 + ψ(x)) / (1 + x + β)` and `ψ` is the Legendre-type
//!   transform `ψ(x) = inf_{t≥0} (x t + log2 E(W^t))`.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::sets::{PointSetSpec, SetKind};
use crate::solve::{bisect_increasing, golden_max};
use crate::weights::WeightModel;

/// Bracket tolerance of the inner minimization over `t`.
pub const T_TOL: f64 = 1e-12;
/// Grid size of the outer maximization over `x`.
pub const PHI_GRID: usize = 2048;
/// Bracket tolerance of the golden-section refinement over `x`.
pub const X_TOL: f64 = 1e-11;
/// Bracket tolerance of the root equation.
pub const ROOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreResult {
    pub x: f64,
    /// `ψ(x)`.
    pub value: f64,
    /// Minimizing `t`.
    pub minimizer_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiResult {
    pub beta: f64,
    /// `φ(β)`.
    pub value: f64,
    pub maximizer_x: f64,
}

/// One row of the bounds table for the sequence `a_n = n^-p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRow {
    pub p: f64,
    pub s1: f64,
    pub dim: f64,
    pub s2: f64,
}

fn check_unit(d: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&d) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must lie in [0, 1], got {d}")))
    }
}

/// `ψ(x) = inf_{t ≥ 0} (x t + log2 E(W^t))` and its minimizer.
pub fn legendre_psi(model: &WeightModel, x: f64) -> Result<LegendreResult> {
    model.require_subcritical()?;
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("x must be ≥ 0, got {x}")));
    }
    Ok(psi_unchecked(model, x))
}

pub(crate) fn psi_unchecked(model: &WeightModel, x: f64) -> LegendreResult {
    if x >= model.gamma() {
        return LegendreResult {
            x,
            value: 0.0,
            minimizer_t: 0.0,
        };
    }
    // g'(t) = x + slope(t) is strictly increasing and negative at t = 0
    let deriv = |t: f64| x + model.log2_moment_slope_unchecked(t);
    let mut upper = 1.0;
    while deriv(upper) <= 0.0 {
        upper *= 2.0;
    }
    let t = bisect_increasing(deriv, 0.0, upper, T_TOL);
    let value = (x * t + model.log2_moment_unchecked(t)).min(0.0);
    LegendreResult {
        x,
        value,
        minimizer_t: t,
    }
}

/// `φ(β) = sup_{x ∈ [0, γ]} (1 + ψ(x)) / (1 + x + β)`.
///
/// Dense grid on `[0, γ]` followed by golden-section refinement around the
/// best grid cell; unimodality in `x` is not assumed.
pub fn phi(model: &WeightModel, beta: f64) -> Result<PhiResult> {
    model.require_subcritical()?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta must be ≥ 0, got {beta}")));
    }
    Ok(phi_unchecked(model, beta))
}

fn phi_unchecked(model: &WeightModel, beta: f64) -> PhiResult {
    let gamma = model.gamma();
    let eta = |x: f64| (1.0 + psi_unchecked(model, x).value) / (1.0 + x + beta);
    let step = gamma / (PHI_GRID - 1) as f64;
    let grid_x = |i: usize| {
        if i == PHI_GRID - 1 {
            gamma
        } else {
            i as f64 * step
        }
    };
    let (best_i, best_v) =
        (0..PHI_GRID)
            .map(|i| (i, eta(grid_x(i))))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, p| if p.1 > acc.1 { p } else { acc },
            );
    let lo = grid_x(best_i.saturating_sub(1));
    let hi = grid_x((best_i + 1).min(PHI_GRID - 1));
    let (x, v) = golden_max(eta, lo, hi, X_TOL);
    let (maximizer_x, value) = if v >= best_v {
        (x, v)
    } else {
        (grid_x(best_i), best_v)
    };
    PhiResult {
        beta,
        value,
        maximizer_x,
    }
}

/// Unique `s ∈ [0, 1]` with `s - log2 E(W^s) = d`.
pub fn hausdorff_image_dim(model: &WeightModel, d: f64) -> Result<f64> {
    check_unit(d, "set dimension")?;
    model.require_subcritical()?;
    Ok(bisect_increasing(
        |s| s - model.log2_moment_unchecked(s) - d,
        0.0,
        1.0,
        ROOT_TOL,
    ))
}

/// General lower bound `d / (1 + γ)` for the image box dimension.
pub fn lower_bound_s1(model: &WeightModel, d: f64) -> Result<f64> {
    check_unit(d, "set dimension")?;
    model.require_subcritical()?;
    Ok(d / (1.0 + model.gamma()))
}

/// Almost sure box dimension of `f(E_a)` for `a ∈ S_p` with decreasing gaps.
pub fn sequence_image_dim(model: &WeightModel, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(phi(model, (1.0 + model.gamma()) * p)?.value)
}

/// Almost sure box dimension of the thyrse image `f(E^α)`, equal to the
/// sequence value at `p = 1/α`.
pub fn thyrse_image_dim(model: &WeightModel, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
    }
    Ok(phi(model, (1.0 + model.gamma()) / alpha)?.value)
}

/// Theoretical image box dimension for a built-in set, `None` for explicit sets.
pub fn image_dim_target(model: &WeightModel, spec: &PointSetSpec) -> Result<Option<f64>> {
    match spec.kind {
        SetKind::PowerSequence { p } => sequence_image_dim(model, p).map(Some),
        SetKind::Thyrse { alpha } => thyrse_image_dim(model, alpha).map(Some),
        SetKind::Cantor { ratio } => {
            hausdorff_image_dim(model, 2f64.ln() / (1.0 / ratio).ln()).map(Some)
        }
        SetKind::Explicit(_) => Ok(None),
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "sequence exponent must be > 0, got {p}"
        )))
    }
}

/// Explicit log-normal evaluation of [`sequence_image_dim`].
///
/// The stationary point `x0` of `(1 - (x-γ)²/(4γ)) / (1 + x + (1+γ)p)` is a
/// root of a quadratic. When `2p(1+γ) + γ ≤ 2` that root is not positive,
/// the objective decreases on `(0, γ)` and the supremum is its value at 0.
pub fn lognormal_sequence_dim_closed_form(sigma2: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    let model = WeightModel::log_normal(sigma2)?;
    model.require_subcritical()?;
    let g = model.gamma();
    let lin = 1.0 + p + p * g;
    let x0 = (lin * lin + 2.0 * p * g + g * g + 2.0 * p * g * g - 2.0 * g).sqrt() - lin;
    if !x0.is_finite() || x0 >= g {
        return Err(Error::Consistency(format!(
            "stationary point {x0} outside (0, γ = {g})"
        )));
    }
    let x = x0.max(0.0);
    Ok((1.0 - (x - g) * (x - g) / (4.0 * g)) / (1.0 + x + (1.0 + g) * p))
}

/// Ratio of the root-equation dimension to the lower bound at set dimension `d`.
pub fn asymptotic_ratio(model: &WeightModel, d: f64) -> Result<f64> {
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::Domain(format!("d must lie in (0, 1], got {d}")));
    }
    Ok(hausdorff_image_dim(model, d)? / lower_bound_s1(model, d)?)
}

/// `(p, S1, dim, S2)` rows for `a_n = n^-p`, whose box dimension is `1/(1+p)`.
pub fn bounds_table(model: &WeightModel, p_grid: &[f64]) -> Result<Vec<BoundsRow>> {
    bounds_table_with(model, p_grid, Exec::default())
}

pub fn bounds_table_with(
    model: &WeightModel,
    p_grid: &[f64],
    exec: Exec,
) -> Result<Vec<BoundsRow>> {
    if p_grid.is_empty() {
        return Err(Error::Domain("empty p grid".into()));
    }
    model.require_subcritical()?;
    for &p in p_grid {
        check_p(p)?;
    }
    exec.map(p_grid, |&p| {
        let d = 1.0 / (1.0 + p);
        Ok(BoundsRow {
            p,
            s1: lower_bound_s1(model, d)?,
            dim: sequence_image_dim(model, p)?,
            s2: hausdorff_image_dim(model, d)?,
        })
    })
    .into_iter()
    .collect()
}
