//! The feasibility condition on `(a, b)` and the residual's Hölder exponent.
//!
//! For `0 < η < γ < 1` the residual's increments are bounded by
//! `|h|^{f₁} + |h|^{f₂} + |h|^{f₃}` (up to logarithms) with
//!
//! ```text
//! f₁ = a + ηβ,   f₂ = (1 − γ) + γa,   f₃ = (γ − η)(ℓ − 1 − ε) + γa,
//! ```
//!
//! so the best exponent is `d = min(1, max_{η<γ} min(f₁, f₂, f₃))`.

use std::io::Write;

use crate::error::{Error, Result};

fn check_ab(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a <= b && b < 1.0) {
        return Err(Error::domain(format!("need 0 < a <= b < 1, got a = {a}, b = {b}")));
    }
    Ok(())
}

/// `1 − b > (1 − a)(1 − a/b)`.
pub fn condition_19(a: f64, b: f64) -> Result<bool> {
    check_ab(a, b)?;
    Ok(1.0 - b > (1.0 - a) * (1.0 - a / b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentReport {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub ell: u32,
    pub epsilon_slack: f64,
    pub feasible: bool,
    pub d: f64,
    pub eta_star: f64,
    pub gamma_star: f64,
    /// `[f₁, f₂, f₃]` at `(η*, γ*)`.
    pub constraint_values: [f64; 3],
    /// The same optimum with `β` replaced by `b`.
    pub d_beta_b: f64,
    pub feasible_beta_b: bool,
}

impl ExponentReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "field,value")?;
        let rows: [(&str, String); 14] = [
            ("a", format!("{:.16e}", self.a)),
            ("b", format!("{:.16e}", self.b)),
            ("beta", format!("{:.16e}", self.beta)),
            ("ell", self.ell.to_string()),
            ("epsilon_slack", format!("{:.16e}", self.epsilon_slack)),
            ("feasible", self.feasible.to_string()),
            ("d", format!("{:.16e}", self.d)),
            ("eta_star", format!("{:.16e}", self.eta_star)),
            ("gamma_star", format!("{:.16e}", self.gamma_star)),
            ("constraint_1", format!("{:.16e}", self.constraint_values[0])),
            ("constraint_2", format!("{:.16e}", self.constraint_values[1])),
            ("constraint_3", format!("{:.16e}", self.constraint_values[2])),
            ("d_beta_b", format!("{:.16e}", self.d_beta_b)),
            ("feasible_beta_b", self.feasible_beta_b.to_string()),
        ];
        for (k, v) in rows {
            writeln!(w, "{k},{v}")?;
        }
        Ok(())
    }
}

fn constraints(a: f64, beta: f64, slope3: f64, eta: f64, gamma: f64) -> [f64; 3] {
    [a + eta * beta, (1.0 - gamma) + gamma * a, (gamma - eta) * slope3 + gamma * a]
}

fn objective(a: f64, beta: f64, slope3: f64, eta: f64, gamma: f64) -> f64 {
    let c = constraints(a, beta, slope3, eta, gamma);
    c[0].min(c[1]).min(c[2])
}

/// Maximizes `min(f₁, f₂, f₃)` over `0 < η < γ < 1`: a grid search of
/// `resolution²` points, then repeated zooming around the best point. The
/// objective is concave, so zooming converges to the global maximum.
fn maximize(a: f64, beta: f64, slope3: f64, resolution: usize) -> (f64, f64, f64) {
    let n = resolution as f64;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for gi in 0..resolution {
        let gamma = (gi as f64 + 0.5) / n;
        for ei in 0..gi {
            let eta = (ei as f64 + 0.5) / n;
            let v = objective(a, beta, slope3, eta, gamma);
            if v > best.0 {
                best = (v, eta, gamma);
            }
        }
    }
    let mut half = 2.0 / n;
    for _ in 0..60 {
        let (_, e0, g0) = best;
        for gi in -20..=20 {
            let gamma = g0 + half * gi as f64 / 20.0;
            if !(gamma > 0.0 && gamma < 1.0) {
                continue;
            }
            for ei in -20..=20 {
                let eta = e0 + half * ei as f64 / 20.0;
                if !(eta > 0.0 && eta < gamma) {
                    continue;
                }
                let v = objective(a, beta, slope3, eta, gamma);
                if v > best.0 {
                    best = (v, eta, gamma);
                }
            }
        }
        half *= 0.5;
    }
    best
}

pub const DEFAULT_RESOLUTION: usize = 2000;
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Best exponent `d` for `(a, b, β, ℓ, ε)`; feasible when `d > b`.
pub fn exponent_bound(a: f64, b: f64, beta: f64, ell: u32, epsilon_slack: f64, resolution: usize) -> Result<ExponentReport> {
    check_ab(a, b)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    if ell < 2 {
        return Err(Error::domain("ell must be at least 2"));
    }
    if !(epsilon_slack > 0.0 && epsilon_slack < 1.0) {
        return Err(Error::domain("epsilon_slack must lie in (0, 1)"));
    }
    if resolution < 10 {
        return Err(Error::domain("grid resolution must be at least 10"));
    }
    let slope3 = ell as f64 - 1.0 - epsilon_slack;
    let (v, eta, gamma) = maximize(a, beta, slope3, resolution);
    let d = v.min(1.0);
    let (vb, _, _) = maximize(a, b, slope3, resolution);
    let d_beta_b = vb.min(1.0);
    Ok(ExponentReport {
        a,
        b,
        beta,
        ell,
        epsilon_slack,
        feasible: d > b,
        d,
        eta_star: eta,
        gamma_star: gamma,
        constraint_values: constraints(a, beta, slope3, eta, gamma),
        d_beta_b,
        feasible_beta_b: d_beta_b > b,
    })
}

/// `condition_19` at the cell centers `((i + ½)/n, (j + ½)/n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionRaster {
    pub resolution: usize,
    /// Row-major in `a`; cells with `a > b` lie outside the domain and are `false`.
    pub feasible: Vec<bool>,
}

impl RegionRaster {
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.resolution as f64
    }

    pub fn get(&self, ia: usize, ib: usize) -> bool {
        self.feasible[ia * self.resolution + ib]
    }

    /// First `b` along row `ia` (from the diagonal upward) that is infeasible.
    pub fn row_flip(&self, ia: usize) -> Option<f64> {
        (ia..self.resolution).find(|&ib| !self.get(ia, ib)).map(|ib| self.center(ib))
    }

    /// CSV `a,b,feasible` with one row per cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "a,b,feasible")?;
        for ia in 0..self.resolution {
            for ib in 0..self.resolution {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{}",
                    self.center(ia),
                    self.center(ib),
                    u8::from(self.get(ia, ib))
                )?;
            }
        }
        Ok(())
    }
}

pub fn region_raster(resolution: usize) -> Result<RegionRaster> {
    if resolution < 10 {
        return Err(Error::domain("raster resolution must be at least 10"));
    }
    let n = resolution as f64;
    let mut feasible = Vec::with_capacity(resolution * resolution);
    for ia in 0..resolution {
        let a = (ia as f64 + 0.5) / n;
        for ib in 0..resolution {
            let b = (ib as f64 + 0.5) / n;
            feasible.push(a <= b && condition_19(a, b)?);
        }
    }
    Ok(RegionRaster { resolution, feasible })
}
