//! Truncated versions of the series `A_n(t, θ)` and `G_n(t₀, t₁, θ)`.

use crate::error::Result;
use crate::hurst::HurstFunction;
use crate::psi::PsiTable;
use crate::synthesis::{g_jk_local, k_window_ranges};

fn log_weight(j: i64, k: i64) -> f64 {
    ((3 + j + k.abs()) as f64).ln().sqrt()
}

fn merged(mut r: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    r.sort_unstable();
    let mut out: Vec<(i64, i64)> = Vec::new();
    for (lo, hi) in r {
        match out.last_mut() {
            Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// `Σ_{j=0}^{j_max} Σ_{k ∈ W(j,t)} |∂θⁿ g_{j,k}(t, θ)| √log(3 + j + |k|)`.
pub fn truncated_a_n(table: &PsiTable, t: f64, theta: f64, n: usize, j_max: i64, k_window: i64) -> Result<f64> {
    table.check_order(n)?;
    let tw = table.theta_weights(theta)?;
    let mut sum = 0.0;
    for j in 0..=j_max {
        for (lo, hi) in k_window_ranges(t, j, k_window) {
            for k in lo..=hi {
                sum += g_jk_local(table, &tw, t, j, k, n).abs() * log_weight(j, k);
            }
        }
    }
    Ok(sum)
}

/// `Σ_{j=0}^{j_max} Σ_{k ∈ W(j,t₀) ∪ W(j,t₁)} |H(k/2^j) − H(t₀)|ⁿ √log(3 + j + |k|)
/// · |∂θⁿ g_{j,k}(t₁, θ) − ∂θⁿ g_{j,k}(t₀, θ)|`.
#[allow(clippy::too_many_arguments)]
pub fn truncated_g_n(
    table: &PsiTable,
    h: &HurstFunction,
    t0: f64,
    t1: f64,
    theta: f64,
    n: usize,
    j_max: i64,
    k_window: i64,
) -> Result<f64> {
    table.check_order(n)?;
    let tw = table.theta_weights(theta)?;
    let h0 = h.eval(t0);
    let mut sum = 0.0;
    for j in 0..=j_max {
        let mut r = k_window_ranges(t0, j, k_window);
        r.extend(k_window_ranges(t1, j, k_window));
        for (lo, hi) in merged(r) {
            for k in lo..=hi {
                let w = (h.eval_dyadic(j, k) - h0).abs().powi(n as i32);
                if w == 0.0 {
                    continue;
                }
                let inc = g_jk_local(table, &tw, t1, j, k, n) - g_jk_local(table, &tw, t0, j, k, n);
                sum += w * log_weight(j, k) * inc.abs();
            }
        }
    }
    Ok(sum)
}
