//! Gauss–Legendre rules and an adaptive Gauss–Kronrod integrator.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on the three-term
    /// Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi's initial guess, accurate to O(n^-4).
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Maps the rule onto `[lo, hi]` split into `panels` equal pieces and
    /// appends the resulting (node, weight) pairs.
    pub fn composite_into(&self, lo: f64, hi: f64, panels: usize, out: &mut Vec<(f64, f64)>) {
        let width = (hi - lo) / panels as f64;
        let half = 0.5 * width;
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, half * w));
            }
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut gauss = fc * WG[3];
    let mut kronrod = fc * WGK[7];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive G7/K15 integration of `f` over `[lo, hi]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)` or `max_intervals`
/// is reached. Returns the integral and the final error estimate.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> (f64, f64) {
    let mut intervals = vec![(lo, hi, kronrod15(&f, lo, hi))];
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2 .0).sum();
        let err: f64 = intervals.iter().map(|iv| iv.2 .1).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || intervals.len() >= max_intervals {
            return (total, err);
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .2 .1.total_cmp(&b.1 .2 .1))
            .expect("non-empty interval list");
        let (a, b, _) = intervals.swap_remove(worst);
        let m = 0.5 * (a + b);
        intervals.push((a, m, kronrod15(&f, a, m)));
        intervals.push((m, b, kronrod15(&f, m, b)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(10);
        // degree 19 is the highest exact degree for 10 nodes
        let got = rule.integrate(-1.0, 1.0, |x| x.powi(18));
        assert!((got - 2.0 / 19.0).abs() < 1e-14);
        let sum_w: f64 = rule.weights.iter().sum();
        assert!((sum_w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_rule_is_accurate() {
        let rule = GaussLegendre::new(512);
        let got = rule.integrate(0.0, 40.0, |x| (7.0 * x).cos());
        assert!((got - (280.0f64).sin() / 7.0).abs() < 1e-13);
        for w in rule.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn composite_matches_single_panel() {
        let rule = GaussLegendre::new(16);
        let mut pts = Vec::new();
        rule.composite_into(1.0, 3.0, 4, &mut pts);
        assert_eq!(pts.len(), 64);
        let got: f64 = pts.iter().map(|(x, w)| w * x.ln()).sum();
        let exact = 3.0 * 3f64.ln() - 3.0 + 1.0;
        assert!((got - exact).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let (v, _) = adaptive(|x| x.powf(-0.5), 0.0, 1.0, 1e-12, 1e-12, 2000);
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }
}
