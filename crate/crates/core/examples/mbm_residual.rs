//! Synthesizes X (the multifractional motion) and Z (its dyadic variant)
//! from one noise draw and measures how much smoother R = Z − X is.

use mbmlab::analysis::holder::dyadic_lags;
use mbmlab::analysis::smoothness_exponent;
use mbmlab::hurst::HurstFunction;
use mbmlab::noise::NoiseLattice;
use mbmlab::psi::{shared_table, PsiTableConfig};
use mbmlab::synthesis::{synthesize_residual, uniform_grid, Series, SynthesisConfig};
use mbmlab::theory::{condition_19, exponent_bound};
use mbmlab::wavelet::MeyerWindow;

fn main() -> mbmlab::Result<()> {
    let cfg = PsiTableConfig { x_max: 64.0, theta_nodes: 16, quadrature_points: 512, ..PsiTableConfig::default() };
    let table = shared_table(&MeyerWindow::default(), &cfg)?;
    let h = HurstFunction::sine(0.5, 0.05)?;
    let grid = uniform_grid(0.0, 1.0, 257);
    let syn = SynthesisConfig { t_grid: grid.clone(), replicates: 400, ..SynthesisConfig::default() };
    let bundle = synthesize_residual(&h, &syn, &NoiseLattice::new(1), &table)?;

    println!("H ranges over [{}, {}]; condition_19 = {}", h.a(), h.b(), condition_19(h.a(), h.b())?);
    let lags = dyadic_lags(7, 3);
    for s in [Series::X, Series::Z, Series::R] {
        let rep = smoothness_exponent(bundle.require(s)?, &grid, 0.0, 1.0, &lags)?;
        println!("{:>2}: estimated uniform exponent {:.3}", s.name(), rep.exponent);
    }
    let bound = exponent_bound(h.a(), h.b(), 1.0, 4, 1e-3, 400)?;
    println!("predicted exponent for R: {:.4}", bound.d);

    let x = bundle.require(Series::X)?;
    println!("first replicate, t = 0.5: X = {:.4}, R = {:.4}", x.get(0, 128), bundle.require(Series::R)?.get(0, 128));
    Ok(())
}
