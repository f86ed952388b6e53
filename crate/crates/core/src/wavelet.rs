//! Lemarié–Meyer mother wavelet, built in the Fourier domain.
//!
//! The window `χ` is supported on `2π/3 ≤ |ξ| ≤ 8π/3`. Its flanks are
//! shaped by a polynomial `ν: [0, 1] → [0, 1]` with `ν(x) + ν(1 − x) = 1`;
//! the order `r` family
//!
//! ```text
//! ν_r(x) = x^{r+1} Σ_{k=0}^{r} C(r+k, k) (1 − x)^k
//! ```
//!
//! makes `χ` of class `C^r` across the three knots. Order 3 gives the
//! classical `x⁴(35 − 84x + 70x² − 20x³)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SUPPORT_LO: f64 = 2.0 * PI / 3.0;
pub const KNOT_MID: f64 = 4.0 * PI / 3.0;
pub const SUPPORT_HI: f64 = 8.0 * PI / 3.0;

pub const DEFAULT_SMOOTHNESS: u32 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct MeyerWindow {
    smoothness_order: u32,
    // coefficients of Σ_k C(r+k, k) y^k with y = 1 - x
    tail: Vec<f64>,
}

impl Default for MeyerWindow {
    fn default() -> Self {
        Self::new(DEFAULT_SMOOTHNESS).expect("default order is valid")
    }
}

impl MeyerWindow {
    pub fn new(smoothness_order: u32) -> Result<Self> {
        if !(1..=12).contains(&smoothness_order) {
            return Err(Error::config(format!(
                "window smoothness order must be in 1..=12, got {smoothness_order}"
            )));
        }
        let r = smoothness_order as usize;
        let mut tail = Vec::with_capacity(r + 1);
        let mut c = 1.0;
        for k in 0..=r {
            tail.push(c);
            // C(r+k+1, k+1) = C(r+k, k) * (r+k+1)/(k+1)
            c = c * (r + k + 1) as f64 / (k + 1) as f64;
        }
        Ok(Self {
            smoothness_order,
            tail,
        })
    }

    pub fn smoothness_order(&self) -> u32 {
        self.smoothness_order
    }

    /// Flank polynomial, clamped to `[0, 1]` outside the unit interval.
    pub fn nu(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let y = 1.0 - x;
        let poly = self.tail.iter().rev().fold(0.0, |acc, c| acc * y + c);
        x.powi(self.smoothness_order as i32 + 1) * poly
    }

    /// `χ(|ξ|)`.
    pub fn window(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a <= SUPPORT_LO || a >= SUPPORT_HI {
            0.0
        } else if a <= KNOT_MID {
            (FRAC_PI_2 * self.nu(3.0 * a / (2.0 * PI) - 1.0)).sin()
        } else {
            (FRAC_PI_2 * self.nu(3.0 * a / (4.0 * PI) - 1.0)).cos()
        }
    }

    /// `ψ̂(ξ) = e^{iξ/2} χ(|ξ|)`; the phase makes `Ψ(·, θ)` real and
    /// symmetric about `x = −1/2`.
    pub fn psi_hat(&self, xi: f64) -> Complex64 {
        let m = self.window(xi);
        if m == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(m, 0.5 * xi)
    }

    /// `Σ_j χ(2^j ξ)²` over every scale whose dilate can meet the support.
    pub fn partition_of_unity(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a == 0.0 {
            return 0.0;
        }
        // χ(2^j a) != 0 needs 2^j a in (2π/3, 8π/3)
        let j_lo = (SUPPORT_LO / a).log2().floor() as i32 - 1;
        let j_hi = (SUPPORT_HI / a).log2().ceil() as i32 + 1;
        (j_lo..=j_hi)
            .map(|j| {
                let w = self.window(a * 2f64.powi(j));
                w * w
            })
            .sum()
    }
}

/// `χ(ξ)` for the default order-3 window.
pub fn meyer_window(xi: f64) -> f64 {
    MeyerWindow::default().window(xi)
}

/// `ψ̂(ξ)` for the default order-3 window.
pub fn psi_hat(xi: f64) -> Complex64 {
    MeyerWindow::default().psi_hat(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn default_flank_is_classical_polynomial() {
        let w = MeyerWindow::default();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let classical = x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3));
            assert!((w.nu(x) - classical).abs() < 1e-13);
        }
    }

    #[test]
    fn window_spot_values() {
        assert_eq!(meyer_window(PI / 2.0), 0.0);
        assert!((meyer_window(PI) - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((meyer_window(2.0 * PI) - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(meyer_window(SUPPORT_HI), 0.0);
        assert_eq!(meyer_window(SUPPORT_LO), 0.0);
        assert!((meyer_window(KNOT_MID) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scale_sum_at_three() {
        let w = MeyerWindow::default();
        let s: f64 = (-3..=3)
            .map(|j| w.window(2f64.powi(j) * 3.0).powi(2))
            .sum();
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn psi_hat_spot_values() {
        assert_eq!(psi_hat(0.0), Complex64::new(0.0, 0.0));
        assert!((psi_hat(PI).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(psi_hat(-PI), psi_hat(PI).conj());
    }

    #[test]
    fn flank_symmetry_all_orders() {
        for order in 1..=8 {
            let w = MeyerWindow::new(order).unwrap();
            for i in 0..=1000 {
                let x = i as f64 / 1000.0;
                assert!((w.nu(x) + w.nu(1.0 - x) - 1.0).abs() < 1e-12, "order {order} x {x}");
            }
        }
    }

    #[test]
    fn rejects_bad_order() {
        assert!(MeyerWindow::new(0).is_err());
    }

    #[test]
    fn support_and_range_on_dense_grid() {
        let w = MeyerWindow::default();
        for i in 0..20_000 {
            let xi = -10.0 + 20.0 * i as f64 / 20_000.0;
            let v = w.window(xi);
            assert!((0.0..=1.0).contains(&v));
            if xi.abs() <= SUPPORT_LO || xi.abs() >= SUPPORT_HI {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn partition_of_unity_log_grid() {
        let w = MeyerWindow::default();
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let xi = 10f64.powf(-3.0 + 6.0 * i as f64 / 999.0);
            worst = worst.max((w.partition_of_unity(xi) - 1.0).abs());
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn flank_is_smooth_across_knots() {
        // r-th divided differences stay bounded as the step shrinks
        let w = MeyerWindow::default();
        let r = w.smoothness_order() as i32;
        for knot in [SUPPORT_LO, KNOT_MID, SUPPORT_HI] {
            let mut prev = None;
            for e in [1e-2, 5e-3, 2.5e-3] {
                let h: f64 = e;
                let mut d = 0.0;
                for k in 0..=r {
                    let c = binom(r as u64, k as u64) * if (r - k) % 2 == 0 { 1.0 } else { -1.0 };
                    d += c * w.window(knot + (k as f64 - r as f64 / 2.0) * h);
                }
                let d = d / h.powi(r);
                if let Some(p) = prev {
                    let p: f64 = p;
                    assert!(d.abs() <= 2.0 * p.abs() + 10.0, "knot {knot}: {p} -> {d}");
                }
                prev = Some(d);
            }
        }
    }

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }
}
