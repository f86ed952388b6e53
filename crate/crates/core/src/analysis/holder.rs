//! Regularity estimators built on ensemble second moments and block ranges.

use super::stats::linear_fit;
use crate::error::{Error, Result};
use crate::synthesis::Paths;

pub const EXPONENT_CAP: f64 = 1.0;
pub const MIN_REPLICATES: usize = 100;

/// Dyadic lags `2^{−lo}, …, 2^{−hi}` in decreasing order.
pub fn dyadic_lags(lo: i32, hi: i32) -> Vec<f64> {
    (lo.min(hi)..=lo.max(hi)).map(|e| 2f64.powi(-e)).collect()
}

/// Index of `x` in `grid`, tolerating rounding in how either was formed.
pub fn grid_index(grid: &[f64], x: f64) -> Option<usize> {
    let tol = 1e-9 * x.abs().max(1.0);
    let i = grid.partition_point(|&g| g < x - tol);
    (i < grid.len() && (grid[i] - x).abs() <= tol).then_some(i)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariogramReport {
    pub t: f64,
    /// Decreasing.
    pub lags: Vec<f64>,
    pub msq_increments: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// `min(slope/2, 1)`.
    pub exponent: f64,
}

/// Pointwise exponent at `t` from `log E[(P(t+h) − P(t))²]` against `log h`.
/// Lags whose `t + h` is not on the grid are skipped.
pub fn estimate_pointwise_holder(paths: &Paths, t_grid: &[f64], t: f64, lags: &[f64]) -> Result<VariogramReport> {
    if paths.replicates() < MIN_REPLICATES {
        return Err(Error::domain(format!(
            "pointwise estimate needs at least {MIN_REPLICATES} replicates, got {}",
            paths.replicates()
        )));
    }
    let i0 = grid_index(t_grid, t).ok_or_else(|| Error::domain(format!("t = {t} is not on the grid")))?;
    let mut lags = lags.to_vec();
    lags.sort_by(|a, b| b.total_cmp(a));
    let mut used = Vec::new();
    let mut msq = Vec::new();
    for h in lags {
        let Some(i1) = grid_index(t_grid, t + h) else { continue };
        let m = paths.rows().map(|r| (r[i1] - r[i0]).powi(2)).sum::<f64>() / paths.replicates() as f64;
        used.push(h);
        msq.push(m);
    }
    if used.len() < 3 {
        return Err(Error::Degenerate(format!("only {} usable lags at t = {t}", used.len())));
    }
    if msq.iter().any(|m| *m <= 0.0) {
        return Err(Error::Degenerate(format!("zero mean-squared increment at t = {t}")));
    }
    let fit = fit_loglog(&used, &msq);
    Ok(VariogramReport {
        t,
        lags: used,
        msq_increments: msq,
        slope: fit.0,
        intercept: fit.1,
        exponent: (fit.0 / 2.0).min(EXPONENT_CAP),
    })
}

fn fit_loglog(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let f = linear_fit(&lx, &ly);
    (f.slope, f.intercept)
}

/// Mean squared increment at each lag (in grid steps), averaged over every
/// start position and replicate.
pub fn mean_variogram(paths: &Paths, lag_steps: &[usize]) -> Vec<f64> {
    lag_steps
        .iter()
        .map(|&m| {
            let mut s = 0.0;
            let mut count = 0usize;
            for row in paths.rows() {
                for i in 0..row.len().saturating_sub(m) {
                    s += (row[i + m] - row[i]).powi(2);
                    count += 1;
                }
            }
            s / count as f64
        })
        .collect()
}

/// Log-log slope of [`mean_variogram`] over `lag_steps` (in units of steps).
pub fn variogram_slope(paths: &Paths, lag_steps: &[usize]) -> f64 {
    let v = mean_variogram(paths, lag_steps);
    let x: Vec<f64> = lag_steps.iter().map(|&m| m as f64).collect();
    fit_loglog(&x, &v).0
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessReport {
    pub lags: Vec<f64>,
    pub mean_range: Vec<f64>,
    pub slope: f64,
    /// `min(slope, 1)`; the cap when `zero_variance`.
    pub exponent: f64,
    pub zero_variance: bool,
}

/// Uniform exponent over `[t_lo, t_hi]` from `log E[sup |P(t₁) − P(t₀)|]`
/// against `log h`.
///
/// The window is cut into blocks of length `h`; in each block the sup is
/// taken over the block's end points and midpoint, so every lag samples
/// the same configuration and a self-similar process of index `θ` gives
/// slope exactly `θ` in expectation.
pub fn smoothness_exponent(paths: &Paths, t_grid: &[f64], t_lo: f64, t_hi: f64, lags: &[f64]) -> Result<SmoothnessReport> {
    if paths.replicates() < MIN_REPLICATES {
        return Err(Error::domain(format!(
            "smoothness estimate needs at least {MIN_REPLICATES} replicates, got {}",
            paths.replicates()
        )));
    }
    let mut lags = lags.to_vec();
    lags.sort_by(|a, b| b.total_cmp(a));
    let mut used = Vec::new();
    let mut mean_range = Vec::new();
    for h in lags {
        let mut blocks = Vec::new();
        let mut s = t_lo;
        while s + h <= t_hi + 1e-12 {
            if let (Some(a), Some(m), Some(b)) = (
                grid_index(t_grid, s),
                grid_index(t_grid, s + 0.5 * h),
                grid_index(t_grid, s + h),
            ) {
                blocks.push([a, m, b]);
            }
            s += h;
        }
        if blocks.is_empty() {
            continue;
        }
        let mut total = 0.0;
        for row in paths.rows() {
            for idx in &blocks {
                let v = idx.map(|i| row[i]);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                total += hi - lo;
            }
        }
        used.push(h);
        mean_range.push(total / (blocks.len() * paths.replicates()) as f64);
    }
    if used.len() < 3 {
        return Err(Error::Degenerate(format!("only {} usable lags in the window", used.len())));
    }
    if mean_range.iter().all(|m| *m == 0.0) {
        return Ok(SmoothnessReport {
            lags: used,
            mean_range,
            slope: f64::NAN,
            exponent: EXPONENT_CAP,
            zero_variance: true,
        });
    }
    if mean_range.iter().any(|m| *m <= 0.0) {
        return Err(Error::Degenerate("zero range at some but not all lags".into()));
    }
    let (slope, _) = fit_loglog(&used, &mean_range);
    Ok(SmoothnessReport {
        lags: used,
        mean_range,
        slope,
        exponent: slope.min(EXPONENT_CAP),
        zero_variance: false,
    })
}
