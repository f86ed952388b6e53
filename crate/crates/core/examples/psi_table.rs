//! Builds a small Ψ table, compares it with direct quadrature and prints
//! the weighted sup-norms that control the series' localization.

use mbmlab::psi::{PsiTable, PsiTableConfig};
use mbmlab::wavelet::MeyerWindow;

fn main() -> mbmlab::Result<()> {
    let window = MeyerWindow::default();
    let cfg = PsiTableConfig {
        x_max: 64.0,
        theta_nodes: 16,
        quadrature_points: 512,
        ..PsiTableConfig::default()
    };
    let table = PsiTable::build(&window, &cfg)?;
    println!("{} x-points, θ in {:?}", table.x_len(), table.theta_range());

    println!("{:>8} {:>6} {:>14} {:>14} {:>10}", "x", "θ", "table", "direct", "|diff|");
    for &x in &[-3.7, -0.5, 0.0, 1.3, 10.25, 40.0] {
        for &theta in &[0.25, 0.6] {
            let v = table.value(x, theta, 0)?;
            let d = table.direct(x, theta, 0);
            println!("{x:>8.2} {theta:>6.2} {v:>14.6e} {d:>14.6e} {:>10.2e}", (v - d).abs());
        }
    }

    for n in 0..=table.max_order() {
        println!("sup (2+|x|)^4 |∂θ^{n} Ψ| = {:.3}", table.localization_constant(4, n)?);
    }
    Ok(())
}
