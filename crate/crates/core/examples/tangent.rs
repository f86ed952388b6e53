//! Rescaled increments of X around t approach an fBm of index H(t).

use mbmlab::analysis::holder::dyadic_lags;
use mbmlab::analysis::{tangent_convergence, Process};
use mbmlab::hurst::HurstFunction;
use mbmlab::noise::NoiseLattice;
use mbmlab::psi::{shared_table, PsiTableConfig};
use mbmlab::synthesis::SynthesisConfig;
use mbmlab::wavelet::MeyerWindow;

fn main() -> mbmlab::Result<()> {
    let cfg = PsiTableConfig { x_max: 64.0, theta_nodes: 16, quadrature_points: 512, ..PsiTableConfig::default() };
    let table = shared_table(&MeyerWindow::default(), &cfg)?;
    let h = HurstFunction::sine(0.5, 0.1)?;
    let syn = SynthesisConfig { replicates: 1000, ..SynthesisConfig::default() };
    let rhos = dyadic_lags(3, 8);
    let u = [0.25, 0.5, 0.75, 1.0];
    let rep = tangent_convergence(Process::X, &h, 0.3, &rhos, &u, &syn, &NoiseLattice::new(4), &table)?;
    println!("H({}) = {:.4}", rep.t, rep.hurst_at_t);
    for p in &rep.points {
        println!("ρ = {:.5}: relative covariance error {:.4} (noise {:.4})", p.rho, p.error, p.noise);
    }
    Ok(())
}
