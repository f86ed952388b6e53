//! The functional parameter `H(·)`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum HurstKind {
    Constant { value: f64 },
    /// `mean + amp·sin(2π·freq·t + phase)`.
    Sine { mean: f64, amp: f64, freq: f64, phase: f64 },
    /// `lo + (hi − lo) / (1 + exp(−rate·(t − center)))`.
    Logistic { lo: f64, hi: f64, center: f64, rate: f64 },
    /// Linear between `(t, h)` knots, constant outside.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    /// `values[i]` on `[breaks[i−1], breaks[i])`; `values.len() == breaks.len() + 1`.
    Step { breaks: Vec<f64>, values: Vec<f64> },
    /// Samples `values[i]` at `t0 + i·dt`, linearly interpolated, constant outside.
    Table { t0: f64, dt: f64, values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HurstFunction {
    kind: HurstKind,
    a: f64,
    b: f64,
    beta: f64,
    c1: f64,
}

impl HurstFunction {
    pub fn new(kind: HurstKind) -> Result<Self> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let (a, b, beta, c1) = match &kind {
            HurstKind::Constant { value } => (*value, *value, 1.0, 0.0),
            HurstKind::Sine { mean, amp, freq, phase } => {
                if !finite(&[*mean, *amp, *freq, *phase]) {
                    return Err(Error::config("sine parameters must be finite"));
                }
                let (a, b) = if *freq == 0.0 {
                    let v = mean + amp * phase.sin();
                    (v, v)
                } else {
                    (mean - amp.abs(), mean + amp.abs())
                };
                (a, b, 1.0, TAU * freq.abs() * amp.abs())
            }
            HurstKind::Logistic { lo, hi, center, rate } => {
                if !finite(&[*lo, *hi, *center, *rate]) || lo > hi {
                    return Err(Error::config("logistic needs finite parameters with lo <= hi"));
                }
                (*lo, *hi, 1.0, (hi - lo) * rate.abs() / 4.0)
            }
            HurstKind::PiecewiseLinear { knots } => {
                if knots.is_empty() {
                    return Err(Error::config("piecewise-linear needs at least one knot"));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::config("piecewise-linear knots must be strictly increasing in t"));
                }
                let hs: Vec<f64> = knots.iter().map(|k| k.1).collect();
                let slope = knots
                    .windows(2)
                    .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                    .fold(0.0, f64::max);
                (min(&hs), max(&hs), 1.0, slope)
            }
            HurstKind::Step { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(Error::config("step needs exactly one more value than breaks"));
                }
                if breaks.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::config("step breaks must be strictly increasing"));
                }
                let jump = values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
                // only a 0-Hölder bound holds across a jump
                let beta = if jump == 0.0 { 1.0 } else { 0.0 };
                (min(values), max(values), beta, jump)
            }
            HurstKind::Table { dt, values, .. } => {
                if values.is_empty() || !(*dt > 0.0) {
                    return Err(Error::config("table needs values and dt > 0"));
                }
                let slope = values.windows(2).map(|w| (w[1] - w[0]).abs() / dt).fold(0.0, f64::max);
                (min(values), max(values), 1.0, slope)
            }
        };
        if !(a > 0.0 && b < 1.0 && a <= b) {
            return Err(Error::config(format!(
                "Hurst function range [{a}, {b}] must lie inside (0, 1)"
            )));
        }
        Ok(Self { kind, a, b, beta, c1 })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(HurstKind::Constant { value })
    }

    /// `mean + amp·sin(2πt)`.
    pub fn sine(mean: f64, amp: f64) -> Result<Self> {
        Self::new(HurstKind::Sine { mean, amp, freq: 1.0, phase: 0.0 })
    }

    pub fn kind(&self) -> &HurstKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            HurstKind::Constant { .. } => "constant",
            HurstKind::Sine { .. } => "sine",
            HurstKind::Logistic { .. } => "logistic",
            HurstKind::PiecewiseLinear { .. } => "piecewise-linear",
            HurstKind::Step { .. } => "step",
            HurstKind::Table { .. } => "table",
        }
    }

    /// `inf H`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// `sup H`.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn is_constant(&self) -> bool {
        self.a == self.b
    }

    /// Whether `H` is Hölder of some order `β > b`, as the residual theory assumes.
    pub fn within_hypotheses(&self) -> bool {
        self.beta > self.b
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            HurstKind::Constant { value } => *value,
            HurstKind::Sine { mean, amp, freq, phase } => mean + amp * (TAU * freq * t + phase).sin(),
            HurstKind::Logistic { lo, hi, center, rate } => {
                lo + (hi - lo) / (1.0 + (-rate * (t - center)).exp())
            }
            HurstKind::PiecewiseLinear { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let i = knots.partition_point(|k| k.0 <= t);
                let (t0, h0) = knots[i - 1];
                let (t1, h1) = knots[i];
                h0 + (h1 - h0) * (t - t0) / (t1 - t0)
            }
            HurstKind::Step { breaks, values } => values[breaks.partition_point(|&b| b <= t)],
            HurstKind::Table { t0, dt, values } => {
                let u = (t - t0) / dt;
                if u <= 0.0 {
                    return values[0];
                }
                let last = values.len() - 1;
                if u >= last as f64 {
                    return values[last];
                }
                let i = u.floor() as usize;
                let f = u - i as f64;
                values[i] + f * (values[i + 1] - values[i])
            }
        }
    }

    /// `H(k/2^j)`. The dyadic point `k·2^{−j}` is exact in binary floating
    /// point for `|k| < 2^53`, so break and knot comparisons are exact.
    pub fn eval_dyadic(&self, j: i64, k: i64) -> f64 {
        self.eval(dyadic(j, k))
    }
}

/// `k·2^{−j}`.
pub fn dyadic(j: i64, k: i64) -> f64 {
    k as f64 * 2f64.powi(-(j as i32))
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinds() -> Vec<HurstFunction> {
        vec![
            HurstFunction::constant(0.6).unwrap(),
            HurstFunction::sine(0.5, 0.3).unwrap(),
            HurstFunction::new(HurstKind::Logistic { lo: 0.3, hi: 0.7, center: 0.5, rate: 12.0 }).unwrap(),
            HurstFunction::new(HurstKind::PiecewiseLinear {
                knots: vec![(0.0, 0.3), (0.5, 0.7), (1.0, 0.4)],
            })
            .unwrap(),
            HurstFunction::new(HurstKind::Step { breaks: vec![0.5], values: vec![0.3, 0.7] }).unwrap(),
            HurstFunction::new(HurstKind::Table { t0: 0.0, dt: 0.25, values: vec![0.4, 0.5, 0.6, 0.5, 0.4] })
                .unwrap(),
        ]
    }

    #[test]
    fn sine_range() {
        let h = HurstFunction::sine(0.5, 0.3).unwrap();
        assert!((h.a() - 0.2).abs() < 1e-15 && (h.b() - 0.8).abs() < 1e-15);
        assert!((h.eval(0.25) - 0.8).abs() < 1e-15);
        assert!(h.within_hypotheses());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(HurstFunction::sine(0.5, 0.6).is_err());
        assert!(HurstFunction::constant(1.0).is_err());
        assert!(HurstFunction::new(HurstKind::Step { breaks: vec![0.5], values: vec![0.3] }).is_err());
    }

    #[test]
    fn step_is_flagged_and_exact_at_breaks() {
        let h = HurstFunction::new(HurstKind::Step { breaks: vec![0.5], values: vec![0.3, 0.7] }).unwrap();
        assert!(!h.within_hypotheses());
        assert_eq!(h.eval_dyadic(1, 1), 0.7);
        assert_eq!(h.eval_dyadic(10, 511), 0.3);
        assert_eq!(h.eval_dyadic(10, 512), 0.7);
    }

    #[test]
    fn range_holds_on_dense_grid() {
        for h in kinds() {
            for i in 0..=20_000 {
                let t = -2.0 + 5.0 * i as f64 / 20_000.0;
                let v = h.eval(t);
                assert!(v >= h.a() - 1e-15 && v <= h.b() + 1e-15, "{} at {t}", h.kind_name());
            }
        }
    }

    proptest! {
        #[test]
        fn holder_bound_on_sampled_pairs(t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
            for h in kinds() {
                if !h.within_hypotheses() {
                    continue;
                }
                let lhs = (h.eval(t1) - h.eval(t2)).abs();
                let rhs = h.c1() * (t1 - t2).abs().powf(h.beta());
                prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-15, "{}: {lhs} > {rhs}", h.kind_name());
            }
        }
    }
}
