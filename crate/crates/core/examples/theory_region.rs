//! The feasibility region in the (a, b) square, drawn in text, and the best
//! exponent for a few parameter choices.

use mbmlab::theory::{exponent_bound, region_raster};

fn main() -> mbmlab::Result<()> {
    let raster = region_raster(40)?;
    println!("b →  (rows a from 1 down to 0; # feasible, . infeasible)");
    for ia in (0..raster.resolution).rev() {
        let row: String = (0..raster.resolution)
            .map(|ib| if ib < ia { ' ' } else if raster.get(ia, ib) { '#' } else { '.' })
            .collect();
        println!("{:.3} {row}", raster.center(ia));
    }

    for &(a, b, ell) in &[(0.3, 0.4, 20), (0.45, 0.55, 4), (0.5, 0.85, 64)] {
        let r = exponent_bound(a, b, b, ell, 1e-3, 400)?;
        println!(
            "a={a} b={b} ℓ={ell}: d = {:.4} (η* = {:.4}, γ* = {:.4}), feasible {}",
            r.d, r.eta_star, r.gamma_star, r.feasible
        );
    }
    Ok(())
}
