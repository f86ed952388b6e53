//! Pointwise exponent of a logistic-H motion from mean-squared increments.

use mbmlab::analysis::estimate_pointwise_holder;
use mbmlab::analysis::holder::dyadic_lags;
use mbmlab::hurst::{HurstFunction, HurstKind};
use mbmlab::noise::NoiseLattice;
use mbmlab::psi::{shared_table, PsiTableConfig};
use mbmlab::synthesis::{synthesize_mbm, Series, SynthesisConfig};
use mbmlab::wavelet::MeyerWindow;

fn main() -> mbmlab::Result<()> {
    let cfg = PsiTableConfig { x_max: 64.0, theta_nodes: 16, quadrature_points: 512, ..PsiTableConfig::default() };
    let table = shared_table(&MeyerWindow::default(), &cfg)?;
    let h = HurstFunction::new(HurstKind::Logistic { lo: 0.3, hi: 0.7, center: 0.5, rate: 8.0 })?;
    let points = [0.15, 0.5, 0.85];
    let lags = dyadic_lags(10, 5);

    let mut grid: Vec<f64> = points.iter().flat_map(|&t| std::iter::once(t).chain(lags.iter().map(move |l| t + l))).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let syn = SynthesisConfig { t_grid: grid.clone(), replicates: 1000, ..SynthesisConfig::default() };
    let x = synthesize_mbm(&h, &syn, &NoiseLattice::new(2), &table)?;

    for &t in &points {
        let r = estimate_pointwise_holder(x.require(Series::X)?, &grid, t, &lags)?;
        println!("t = {t:.2}: H(t) = {:.3}, estimate {:.3}", h.eval(t), r.exponent);
    }
    Ok(())
}
