//! Convergence of rescaled increments to the tangent fBm.

use super::covariance::fbm_covariance;
use crate::error::{Error, Result};
use crate::hurst::HurstFunction;
use crate::noise::NoiseLattice;
use crate::psi::PsiTable;
use crate::synthesis::{synthesize_mbm, synthesize_z, Paths, Series, SynthesisConfig};

use super::holder::grid_index;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Process {
    X,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentPoint {
    pub rho: f64,
    /// `‖S − Σ‖_F / ‖Σ‖_F`.
    pub error: f64,
    /// Root-mean-square Frobenius error of an exact sample of the same
    /// size, relative to `‖Σ‖_F`.
    pub noise: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentReport {
    pub t: f64,
    pub hurst_at_t: f64,
    pub u_grid: Vec<f64>,
    /// In the order of the requested `ρ`.
    pub points: Vec<TangentPoint>,
}

impl TangentReport {
    /// No step up by more than `k` noise units.
    pub fn non_increasing_within(&self, k: f64) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].error <= w[0].error + k * w[0].noise.max(w[1].noise))
    }

    pub fn final_error(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.error)
    }
}

/// Grid holding `t` and every `t + ρu`, ascending.
pub fn tangent_grid(t: f64, rhos: &[f64], u_grid: &[f64]) -> Vec<f64> {
    let mut g = vec![t];
    for r in rhos {
        for u in u_grid {
            g.push(t + r * u);
        }
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Errors of the empirical covariance of `(P(t + ρu) − P(t))/ρ^{H(t)}`
/// against the fBm covariance of index `H(t)`.
pub fn tangent_from_paths(
    paths: &Paths,
    t_grid: &[f64],
    hurst_at_t: f64,
    t: f64,
    rhos: &[f64],
    u_grid: &[f64],
) -> Result<TangentReport> {
    let i0 = grid_index(t_grid, t).ok_or_else(|| Error::domain("t is not on the grid"))?;
    let nu = u_grid.len();
    let mut target = vec![0.0; nu * nu];
    for a in 0..nu {
        for b in 0..nu {
            target[a * nu + b] = fbm_covariance(u_grid[a], u_grid[b], hurst_at_t)?;
        }
    }
    let norm = target.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n = paths.replicates() as f64;
    // E‖S − Σ‖² = Σ_ab (Σ_aa Σ_bb + Σ_ab²)/n for zero-mean Gaussian samples
    let noise_sq: f64 = (0..nu)
        .flat_map(|a| (0..nu).map(move |b| (a, b)))
        .map(|(a, b)| target[a * nu + a] * target[b * nu + b] + target[a * nu + b].powi(2))
        .sum::<f64>()
        / n;
    let noise = noise_sq.sqrt() / norm;
    let mut points = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let idx: Vec<usize> = u_grid
            .iter()
            .map(|u| grid_index(t_grid, t + rho * u).ok_or_else(|| Error::domain("t + ρu is not on the grid")))
            .collect::<Result<_>>()?;
        let scale = rho.powf(-hurst_at_t);
        let mut s = vec![0.0; nu * nu];
        let mut inc = vec![0.0; nu];
        for row in paths.rows() {
            for (v, &i) in inc.iter_mut().zip(&idx) {
                *v = (row[i] - row[i0]) * scale;
            }
            for a in 0..nu {
                for b in 0..nu {
                    s[a * nu + b] += inc[a] * inc[b];
                }
            }
        }
        let err = s
            .iter()
            .zip(&target)
            .map(|(x, y)| (x / n - y).powi(2))
            .sum::<f64>()
            .sqrt();
        points.push(TangentPoint { rho, error: err / norm, noise });
    }
    Ok(TangentReport {
        t,
        hurst_at_t,
        u_grid: u_grid.to_vec(),
        points,
    })
}

/// Synthesizes `X` or `Z` on [`tangent_grid`] and evaluates the errors.
/// `cfg.t_grid` only fixes the admissible domain.
#[allow(clippy::too_many_arguments)]
pub fn tangent_convergence(
    process: Process,
    h: &HurstFunction,
    t: f64,
    rhos: &[f64],
    u_grid: &[f64],
    cfg: &SynthesisConfig,
    lattice: &NoiseLattice,
    table: &PsiTable,
) -> Result<TangentReport> {
    if rhos.is_empty() || u_grid.is_empty() {
        return Err(Error::domain("need at least one ρ and one u"));
    }
    let grid = tangent_grid(t, rhos, u_grid);
    let (lo, hi) = match (cfg.t_grid.first(), cfg.t_grid.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::config("t_grid must be nonempty")),
    };
    if grid[0] < lo || grid[grid.len() - 1] > hi {
        return Err(Error::domain(format!(
            "t + ρu spans [{}, {}], outside the synthesis domain [{lo}, {hi}]",
            grid[0],
            grid[grid.len() - 1]
        )));
    }
    let run_cfg = SynthesisConfig {
        t_grid: grid.clone(),
        split: false,
        ..cfg.clone()
    };
    let (bundle, series) = match process {
        Process::X => (synthesize_mbm(h, &run_cfg, lattice, table)?, Series::X),
        Process::Z => (synthesize_z(h, &run_cfg, lattice, table)?, Series::Z),
    };
    tangent_from_paths(bundle.require(series)?, &grid, h.eval(t), t, rhos, u_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::oracle::oracle_fbm;
    use crate::synthesis::uniform_grid;

    #[test]
    fn grid_contains_every_point() {
        let g = tangent_grid(0.4, &[0.5, 0.25], &[0.5, 1.0]);
        assert_eq!(g, vec![0.4, 0.525, 0.65, 0.9]);
    }

    #[test]
    fn exact_fbm_error_is_noise_sized() {
        let g = uniform_grid(0.0, 1.0, 257);
        let paths = oracle_fbm(0.6, 1.0 / 256.0, 256, 2000, 5).unwrap();
        let rhos = [0.25, 0.125, 0.0625];
        let rep = tangent_from_paths(&paths, &g, 0.6, 0.25, &rhos, &[0.25, 0.5, 0.75, 1.0]).unwrap();
        for p in &rep.points {
            assert!(p.error < 4.0 * p.noise, "{p:?}");
            assert!(p.error < 0.1);
        }
        assert!(rep.non_increasing_within(3.0));
    }
}
