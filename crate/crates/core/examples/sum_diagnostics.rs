//! Truncated sums behind the regularity argument: A_n converges in j_max,
//! G_n shrinks like a power of |t₁ − t₀|.

use mbmlab::analysis::stats::linear_fit;
use mbmlab::analysis::{truncated_a_n, truncated_g_n};
use mbmlab::hurst::HurstFunction;
use mbmlab::psi::{shared_table, PsiTableConfig};
use mbmlab::theory::exponent_bound;
use mbmlab::wavelet::MeyerWindow;

fn main() -> mbmlab::Result<()> {
    let table = shared_table(&MeyerWindow::default(), &PsiTableConfig::default())?;
    for n in 0..=2 {
        let vals: Vec<String> = [12, 16, 20, 24]
            .iter()
            .map(|&j| truncated_a_n(&table, 0.3, 0.5, n, j, 50).map(|v| format!("{v:.5}")))
            .collect::<mbmlab::Result<_>>()?;
        println!("A_{n}(0.3, 0.5) for j_max 12,16,20,24: {}", vals.join("  "));
    }

    let h = HurstFunction::sine(0.5, 0.05)?;
    let hs: Vec<f64> = (4..=8).map(|p| 2f64.powi(-p)).collect();
    let g: Vec<f64> = hs
        .iter()
        .map(|&dh| truncated_g_n(&table, &h, 0.3, 0.3 + dh, 0.5, 1, 24, 50))
        .collect::<mbmlab::Result<_>>()?;
    let lx: Vec<f64> = hs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = g.iter().map(|v| v.ln()).collect();
    let d1 = exponent_bound(h.a(), h.b(), 1.0, 4, 1e-3, 400)?.d;
    println!("log G_1 slope {:.4}, lower bound d_1 = {d1:.4}", linear_fit(&lx, &ly).slope);
    Ok(())
}
