//! Circulant-embedding fBm, used as an independent reference for the
//! wavelet synthesis.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use super::covariance::variance_constant;
use crate::error::{Error, Result};
use crate::synthesis::Paths;

/// fBm of index `θ` with `Var B(t) = c(θ)|t|^{2θ}` at `t = i·dt`,
/// `i = 0..=steps`, exact in law.
///
/// The stationary increment sequence is embedded in a circulant of size
/// `2·steps`; each complex FFT yields two independent paths.
pub fn oracle_fbm(theta: f64, dt: f64, steps: usize, replicates: usize, seed: u64) -> Result<Paths> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    if !(dt > 0.0) || steps < 2 || replicates == 0 {
        return Err(Error::domain("oracle needs dt > 0, steps >= 2 and replicates >= 1"));
    }
    let m = 2 * steps;
    let h2 = 2.0 * theta;
    let gamma = |k: usize| {
        let k = k as f64;
        0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
    };
    let mut row: Vec<Complex64> = (0..m)
        .map(|i| Complex64::new(gamma(if i <= steps { i } else { m - i }), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    let mut sqrt_lambda = Vec::with_capacity(m);
    for (i, l) in row.iter().enumerate() {
        if l.re < -1e-10 * m as f64 {
            return Err(Error::Numerical(format!(
                "circulant embedding has negative eigenvalue {} at index {i}; increase the embedding size",
                l.re
            )));
        }
        sqrt_lambda.push((l.re.max(0.0) / m as f64).sqrt());
    }
    let scale = variance_constant(theta)?.sqrt() * dt.powf(theta);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let t_len = steps + 1;
    let mut data = Vec::with_capacity(replicates * t_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    let mut produced = 0;
    while produced < replicates {
        for (b, s) in buf.iter_mut().zip(&sqrt_lambda) {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *b = Complex64::new(re * s, im * s);
        }
        fft.process(&mut buf);
        for part in 0..2 {
            if produced == replicates {
                break;
            }
            let mut acc = 0.0;
            data.push(0.0);
            for z in &buf[..steps] {
                acc += if part == 0 { z.re } else { z.im };
                data.push(scale * acc);
            }
            produced += 1;
        }
    }
    Ok(Paths::new(t_len, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_increments_are_uncorrelated() {
        let p = oracle_fbm(0.5, 1.0 / 64.0, 64, 2000, 4).unwrap();
        let (mut s01, mut s00) = (0.0, 0.0);
        for row in p.rows() {
            for w in row.windows(3) {
                let (d0, d1) = (w[1] - w[0], w[2] - w[1]);
                s01 += d0 * d1;
                s00 += d0 * d0;
            }
        }
        assert!((s01 / s00).abs() < 0.05, "{}", s01 / s00);
    }

    #[test]
    fn variance_at_one_matches_constant() {
        for theta in [0.3, 0.5, 0.7] {
            let p = oracle_fbm(theta, 1.0 / 32.0, 32, 4000, 11).unwrap();
            let v = p.column(32).iter().map(|x| x * x).sum::<f64>() / 4000.0;
            let c = variance_constant(theta).unwrap();
            assert!((v / c - 1.0).abs() < 0.05, "θ={theta}: {v} vs {c}");
        }
    }

    #[test]
    fn deterministic_and_anchored() {
        let a = oracle_fbm(0.3, 0.01, 100, 5, 1).unwrap();
        let b = oracle_fbm(0.3, 0.01, 100, 5, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.column(0).iter().all(|v| *v == 0.0));
        assert!(oracle_fbm(1.2, 0.01, 100, 5, 1).is_err());
    }
}
