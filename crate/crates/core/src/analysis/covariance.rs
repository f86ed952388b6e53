//! fBm covariance with the variance constant `c(θ) = ∫ |e^{iξ} − 1|² |ξ|^{−2θ−1} dξ`.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, GaussLegendre};

const PERIODS: usize = 400;

/// `c(θ)`, computed once per `θ` and cached.
///
/// `c(θ) = 4 ∫₀^∞ (1 − cos ξ) ξ^{−2θ−1} dξ`: adaptive quadrature on the
/// first period, Gauss–Legendre per period up to `L = 800π`, then the
/// tail `∫_L^∞` in closed form for the power term and by an asymptotic
/// integration-by-parts series for the cosine term.
pub fn variance_constant(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("cache poisoned").get(&theta.to_bits()) {
        return Ok(*v);
    }
    let v = compute(theta);
    cache.lock().expect("cache poisoned").insert(theta.to_bits(), v);
    Ok(v)
}

fn compute(theta: f64) -> f64 {
    let p = 2.0 * theta + 1.0;
    // 1 − cos ξ = 2 sin²(ξ/2) avoids cancellation near the origin
    let f = |x: f64| if x == 0.0 { 0.0 } else { 2.0 * (0.5 * x).sin().powi(2) * x.powf(-p) };
    let (head, _) = adaptive(f, 0.0, TAU, 1e-15, 1e-14, 4000);
    let rule = GaussLegendre::new(32);
    let body: f64 = (1..PERIODS)
        .map(|i| rule.integrate(i as f64 * TAU, (i + 1) as f64 * TAU, f))
        .sum();
    let l = PERIODS as f64 * TAU;
    // ∫_L^∞ ξ^{−p} = L^{1−p}/(p−1); ∫_L^∞ cos ξ ξ^{−p} with sin L = 0, cos L = 1
    // is Σ_m (−1)^{m+1} (p)_{2m+1} L^{−p−2m−1} after repeated integration by parts.
    let power = l.powf(1.0 - p) / (p - 1.0);
    let mut cos_tail = 0.0;
    let mut rising = p;
    for m in 0..6 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        cos_tail += sign * rising * l.powf(-p - (2 * m + 1) as f64);
        rising *= (p + (2 * m + 1) as f64) * (p + (2 * m + 2) as f64);
    }
    4.0 * (head + body + power - cos_tail)
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("theta must lie in (0, 1), got {theta}")))
    }
}

/// `c(θ)/2 · (|s|^{2θ} + |t|^{2θ} − |s − t|^{2θ})`.
pub fn fbm_covariance(s: f64, t: f64, theta: f64) -> Result<f64> {
    let c = variance_constant(theta)?;
    let e = 2.0 * theta;
    Ok(0.5 * c * (s.abs().powf(e) + t.abs().powf(e) - (s - t).abs().powf(e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // 2π / (Γ(2θ+1) sin πθ), evaluated to 20 digits
    const REFERENCE: [(f64, f64); 3] = [
        (0.3, 8.6920097803504659905),
        (0.5, TAU),
        (0.7, 6.2523231548602648596),
    ];

    #[test]
    fn matches_closed_form() {
        for (theta, want) in REFERENCE {
            let got = variance_constant(theta).unwrap();
            assert!((got - want).abs() < 1e-10 * want, "θ={theta}: {got} vs {want}");
        }
    }

    #[test]
    fn spot_values() {
        assert_eq!(fbm_covariance(1.0, -1.0, 0.5).unwrap(), 0.0);
        assert!((fbm_covariance(1.0, 1.0, 0.5).unwrap() - TAU).abs() < 1e-10);
        assert!(fbm_covariance(1.0, 1.0, 1.0).is_err());
        assert!(fbm_covariance(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn gram_matrices_are_positive_semidefinite() {
        use nalgebra::DMatrix;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let theta = rng.gen_range(0.05..0.95);
            let ts: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let g = DMatrix::from_fn(8, 8, |i, j| fbm_covariance(ts[i], ts[j], theta).unwrap());
            let eig = g.symmetric_eigenvalues();
            let max = eig.max();
            assert!(eig.min() >= -1e-10 * max, "θ={theta}: {}", eig.min());
        }
    }

    proptest! {
        #[test]
        fn symmetric(s in -3.0f64..3.0, t in -3.0f64..3.0, theta in 0.05f64..0.95) {
            prop_assert_eq!(fbm_covariance(s, t, theta).unwrap(), fbm_covariance(t, s, theta).unwrap());
        }
    }
}
