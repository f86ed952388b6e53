//! Fixed-θ synthesis: the series is a fractional Brownian motion, checked
//! here against the closed-form covariance and a circulant-embedding sample.

use mbmlab::analysis::holder::variogram_slope;
use mbmlab::analysis::{fbm_covariance, oracle_fbm};
use mbmlab::noise::NoiseLattice;
use mbmlab::psi::{shared_table, PsiTableConfig};
use mbmlab::synthesis::{synthesize_field, uniform_grid, Series, SynthesisConfig};
use mbmlab::wavelet::MeyerWindow;

fn main() -> mbmlab::Result<()> {
    let cfg = PsiTableConfig { x_max: 64.0, theta_nodes: 16, quadrature_points: 512, ..PsiTableConfig::default() };
    let table = shared_table(&MeyerWindow::default(), &cfg)?;
    let theta = 0.4;
    let steps = 128;
    let syn = SynthesisConfig {
        t_grid: uniform_grid(0.0, 1.0, steps + 1),
        replicates: 4000,
        ..SynthesisConfig::default()
    };
    let bundle = synthesize_field(theta, &syn, &NoiseLattice::new(3), &table)?;
    let b = bundle.require(Series::B)?;

    for &(i, j) in &[(32, 32), (32, 128), (128, 128)] {
        let (s, t) = (syn.t_grid[i], syn.t_grid[j]);
        let n = b.replicates() as f64;
        let prods: Vec<f64> = b.rows().map(|r| r[i] * r[j]).collect();
        let emp = prods.iter().sum::<f64>() / n;
        let se = (prods.iter().map(|p| (p - emp).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        println!("Cov(B({s}), B({t})): empirical {emp:.4} ± {se:.4}, exact {:.4}", fbm_covariance(s, t, theta)?);
    }

    let oracle = oracle_fbm(theta, 1.0 / steps as f64, steps, 4000, 3)?;
    let lags = [1, 2, 4, 8];
    println!(
        "variogram slope: wavelet {:.4}, circulant {:.4}, exact {:.4}",
        variogram_slope(b, &lags),
        variogram_slope(&oracle, &lags),
        2.0 * theta
    );
    Ok(())
}
