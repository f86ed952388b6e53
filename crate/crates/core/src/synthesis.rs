//! Truncated wavelet series for `B(·, θ)`, `X`, `Z` and `R = Z − X`.
//!
//! Every process is a sum
//!
//! ```text
//! P(t) = s · Σ_{j=j_min}^{j_max} Σ_{k ∈ W(j,t)} 2^{−jθ} ε_{j,k} (Ψ(2^j t − k, θ) − Ψ(−k, θ))
//! ```
//!
//! with `W(j, t) = {|k − 2^j t| ≤ k_window} ∪ {|k| ≤ k_window}` and the
//! per-term `θ` chosen as the fixed `θ` (field), `H(t)` (`X`) or `H(k/2^j)`
//! (`Z`). The constant `s = (2π)^{−1/2}` makes `Var B(t, θ) = c(θ)|t|^{2θ}`
//! with `c(θ) = ∫ |e^{iξ} − 1|² |ξ|^{−2θ−1} dξ`.
//!
//! The coefficients do not depend on the noise, so they are computed once
//! per `(t, j)` segment and every replicate reduces to dot products against
//! its own noise lattice.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, TAU};
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hurst::HurstFunction;
use crate::noise::NoiseLattice;
use crate::psi::{PsiTable, ThetaWeights};

/// `(2π)^{−1/2}`.
pub fn coefficient_scale() -> f64 {
    1.0 / TAU.sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisConfig {
    pub j_min: i64,
    pub j_max: i64,
    pub k_window: i64,
    pub t_grid: Vec<f64>,
    pub replicates: usize,
    /// Also return the `j < 0` and `j ≥ 0` parts.
    pub split: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            j_min: -8,
            j_max: 12,
            k_window: 50,
            t_grid: uniform_grid(0.0, 1.0, 1025),
            replicates: 2000,
            split: false,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.j_min < 0 && self.j_max >= 0) {
            return Err(Error::config("need j_min < 0 <= j_max"));
        }
        if self.j_max > 40 || self.j_min < -40 {
            return Err(Error::config("scale range limited to |j| <= 40"));
        }
        if self.k_window < 8 {
            return Err(Error::config("k_window must be at least 8"));
        }
        if self.t_grid.is_empty() {
            return Err(Error::config("t_grid must be nonempty"));
        }
        if self.t_grid.iter().any(|t| !t.is_finite()) || self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("t_grid must be finite and strictly increasing"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates must be at least 1"));
        }
        Ok(())
    }
}

/// `points` equispaced values from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    let step = (end - start) / (points - 1) as f64;
    (0..points).map(|i| start + i as f64 * step).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Series {
    B,
    BLow,
    BHigh,
    X,
    XLow,
    XHigh,
    Z,
    ZLow,
    ZHigh,
    R,
}

impl Series {
    pub fn name(self) -> &'static str {
        match self {
            Series::B => "B",
            Series::BLow => "B_low",
            Series::BHigh => "B_high",
            Series::X => "X",
            Series::XLow => "X_low",
            Series::XHigh => "X_high",
            Series::Z => "Z",
            Series::ZLow => "Z_low",
            Series::ZHigh => "Z_high",
            Series::R => "R",
        }
    }

    fn parts(self) -> (Series, Series) {
        match self {
            Series::B => (Series::BLow, Series::BHigh),
            Series::X => (Series::XLow, Series::XHigh),
            Series::Z => (Series::ZLow, Series::ZHigh),
            _ => unreachable!("only full series split"),
        }
    }
}

/// Replicate-major path values, `replicates × t_len`.
#[derive(Clone, Debug, PartialEq)]
pub struct Paths {
    t_len: usize,
    data: Vec<f64>,
}

impl Paths {
    pub fn new(t_len: usize, data: Vec<f64>) -> Self {
        assert!(t_len > 0 && data.len() % t_len == 0, "path data must be a whole number of rows");
        Self { t_len, data }
    }

    pub fn replicates(&self) -> usize {
        self.data.len() / self.t_len
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn replicate(&self, r: usize) -> &[f64] {
        &self.data[r * self.t_len..(r + 1) * self.t_len]
    }

    pub fn get(&self, r: usize, i: usize) -> f64 {
        self.data[r * self.t_len + i]
    }

    /// Values at grid index `i` across replicates.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.replicates()).map(|r| self.get(r, i)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.t_len)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            t_len: self.t_len,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug)]
pub struct PathBundle {
    pub t_grid: Vec<f64>,
    pub seed: u64,
    pub config: SynthesisConfig,
    series: BTreeMap<Series, Paths>,
}

impl PathBundle {
    pub fn get(&self, s: Series) -> Option<&Paths> {
        self.series.get(&s)
    }

    /// Like [`PathBundle::get`] but an error when the series was not synthesized.
    pub fn require(&self, s: Series) -> Result<&Paths> {
        self.get(s)
            .ok_or_else(|| Error::domain(format!("bundle has no {} series", s.name())))
    }

    pub fn series(&self) -> impl Iterator<Item = (Series, &Paths)> {
        self.series.iter().map(|(s, p)| (*s, p))
    }

    pub fn replicates(&self) -> usize {
        self.config.replicates
    }

    /// CSV with a `replicate,t,<series…>` header and one row per `(replicate, t)`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let cols: Vec<(Series, &Paths)> = self.series().collect();
        write!(w, "replicate,t")?;
        for (s, _) in &cols {
            write!(w, ",{}", s.name())?;
        }
        writeln!(w)?;
        for r in 0..self.replicates() {
            for (i, t) in self.t_grid.iter().enumerate() {
                write!(w, "{r},{t:.16e}")?;
                for (_, p) in &cols {
                    write!(w, ",{:.16e}", p.get(r, i))?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// `∂θⁿ g_{j,k}(t, θ)` by the Leibniz rule
/// `Σ_p C(n,p) (−j log 2)^p 2^{−jθ} (∂θ^{n−p}Ψ(2^j t − k, θ) − ∂θ^{n−p}Ψ(−k, θ))`,
/// with `0⁰ = 1`.
pub fn g_jk(table: &PsiTable, t: f64, theta: f64, j: i64, k: i64, n: usize) -> Result<f64> {
    table.check_order(n)?;
    table.check_theta(theta)?;
    let x = scale2(t, j) - k as f64;
    let anchor = -(k as f64);
    let mut terms = Vec::with_capacity(n + 1);
    for m in 0..=n {
        terms.push(table.value(x, theta, m)? - table.value(anchor, theta, m)?);
    }
    Ok(leibniz(&terms, theta, j, n))
}

/// [`g_jk`] with precomputed `θ` weights and the in-sum kernel
/// [`PsiTable::local`]; `terms` is scratch space.
pub(crate) fn g_jk_local(table: &PsiTable, tw: &ThetaWeights, t: f64, j: i64, k: i64, n: usize) -> f64 {
    let x = scale2(t, j) - k as f64;
    let anchor = -(k as f64);
    let mut terms = [0.0; 8];
    for (m, slot) in terms.iter_mut().enumerate().take(n + 1) {
        *slot = table.local(x, tw, m) - table.local(anchor, tw, m);
    }
    leibniz(&terms[..=n], tw.theta(), j, n)
}

/// `Σ_p C(n,p)(−j log 2)^p 2^{−jθ} d[n−p]` where `d[m]` is the `m`-th order difference.
fn leibniz(diffs: &[f64], theta: f64, j: i64, n: usize) -> f64 {
    let lam = -(j as f64) * LN_2;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for p in 0..=n {
        sum += binom * lam.powi(p as i32) * diffs[n - p];
        binom = binom * (n - p) as f64 / (p + 1) as f64;
    }
    (-(j as f64) * theta).exp2() * sum
}

/// `t·2^j`, exact for finite `t`.
fn scale2(t: f64, j: i64) -> f64 {
    t * 2f64.powi(j as i32)
}

/// The `k` ranges of `W(j, t)`: one or two disjoint inclusive intervals.
pub fn k_window_ranges(t: f64, j: i64, k_window: i64) -> Vec<(i64, i64)> {
    let c = scale2(t, j);
    let lo = (c - k_window as f64).ceil() as i64;
    let hi = (c + k_window as f64).floor() as i64;
    let (alo, ahi) = (-k_window, k_window);
    if hi < alo - 1 || lo > ahi + 1 {
        let mut v = vec![(lo, hi), (alo, ahi)];
        v.sort();
        v
    } else {
        vec![(lo.min(alo), hi.max(ahi))]
    }
}

struct Segment {
    j: i64,
    k_start: i64,
    weights: Vec<f64>,
}

/// Coefficients of one process at every grid point.
struct Plan {
    per_t: Vec<Vec<Segment>>,
}

/// How the per-term `θ` is chosen.
#[derive(Clone, Copy)]
enum ThetaRule<'a> {
    Fixed(f64),
    AtT(&'a HurstFunction),
    Dyadic(&'a HurstFunction),
}

fn build_plan(rule: ThetaRule<'_>, cfg: &SynthesisConfig, table: &PsiTable) -> Result<Plan> {
    let s = coefficient_scale();
    let kw = cfg.k_window;
    let per_t: Result<Vec<Vec<Segment>>> = match rule {
        ThetaRule::Fixed(_) | ThetaRule::AtT(_) => cfg
            .t_grid
            .par_iter()
            .map(|&t| {
                let theta = match rule {
                    ThetaRule::Fixed(th) => th,
                    ThetaRule::AtT(h) => h.eval(t),
                    ThetaRule::Dyadic(_) => unreachable!(),
                };
                let tw = table.theta_weights(theta)?;
                let mut segs = Vec::new();
                for j in cfg.j_min..=cfg.j_max {
                    let x0 = scale2(t, j);
                    let scale = s * (-(j as f64) * theta).exp2();
                    for (lo, hi) in k_window_ranges(t, j, kw) {
                        let weights = (lo..=hi)
                            .map(|k| {
                                let kf = k as f64;
                                scale * (table.local(x0 - kf, &tw, 0) - table.local(-kf, &tw, 0))
                            })
                            .collect();
                        segs.push(Segment { j, k_start: lo, weights });
                    }
                }
                Ok(segs)
            })
            .collect(),
        ThetaRule::Dyadic(h) => {
            // per-(j, k) θ weights, anchors and scales are shared by every t
            let mut per_t: Vec<Vec<Segment>> = cfg.t_grid.iter().map(|_| Vec::new()).collect();
            for j in cfg.j_min..=cfg.j_max {
                let ranges: Vec<Vec<(i64, i64)>> =
                    cfg.t_grid.iter().map(|&t| k_window_ranges(t, j, kw)).collect();
                let k_lo = ranges.iter().flatten().map(|r| r.0).min().expect("nonempty grid");
                let k_hi = ranges.iter().flatten().map(|r| r.1).max().expect("nonempty grid");
                let mut needed = vec![false; (k_hi - k_lo + 1) as usize];
                for &(lo, hi) in ranges.iter().flatten() {
                    needed[(lo - k_lo) as usize..=(hi - k_lo) as usize].fill(true);
                }
                let terms: Vec<Option<(ThetaWeights, f64, f64)>> = needed
                    .par_iter()
                    .enumerate()
                    .map(|(i, &need)| {
                        if !need {
                            return Ok(None);
                        }
                        let k = k_lo + i as i64;
                        let theta = h.eval_dyadic(j, k);
                        let tw = table.theta_weights(theta)?;
                        let scale = s * (-(j as f64) * theta).exp2();
                        let anchor = table.local(-(k as f64), &tw, 0);
                        Ok(Some((tw, scale, anchor)))
                    })
                    .collect::<Result<_>>()?;
                let segs: Vec<Vec<Segment>> = cfg
                    .t_grid
                    .par_iter()
                    .zip(&ranges)
                    .map(|(&t, rs)| {
                        let x0 = scale2(t, j);
                        rs.iter()
                            .map(|&(lo, hi)| {
                                let weights = (lo..=hi)
                                    .map(|k| {
                                        let (tw, scale, anchor) = terms[(k - k_lo) as usize]
                                            .as_ref()
                                            .expect("term precomputed");
                                        scale * (table.local(x0 - k as f64, tw, 0) - anchor)
                                    })
                                    .collect();
                                Segment { j, k_start: lo, weights }
                            })
                            .collect()
                    })
                    .collect();
                for (dst, src) in per_t.iter_mut().zip(segs) {
                    dst.extend(src);
                }
            }
            Ok(per_t)
        }
    };
    Ok(Plan { per_t: per_t? })
}

/// Noise storage for one replicate: one buffer per scale covering every
/// `k` any plan touches.
struct NoiseBuffers {
    j_min: i64,
    offsets: Vec<i64>,
    intervals: Vec<Vec<(i64, i64)>>,
    values: Vec<Vec<f64>>,
}

impl NoiseBuffers {
    fn new(plans: &[&Plan], j_min: i64, j_max: i64) -> Self {
        let nj = (j_max - j_min + 1) as usize;
        let mut raw: Vec<Vec<(i64, i64)>> = vec![Vec::new(); nj];
        for plan in plans {
            for segs in &plan.per_t {
                for s in segs {
                    raw[(s.j - j_min) as usize].push((s.k_start, s.k_start + s.weights.len() as i64 - 1));
                }
            }
        }
        let mut offsets = Vec::with_capacity(nj);
        let mut intervals = Vec::with_capacity(nj);
        let mut values = Vec::with_capacity(nj);
        for mut r in raw {
            r.sort_unstable();
            let mut merged: Vec<(i64, i64)> = Vec::new();
            for (lo, hi) in r {
                match merged.last_mut() {
                    Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
                    _ => merged.push((lo, hi)),
                }
            }
            let lo = merged.first().map_or(0, |m| m.0);
            let hi = merged.last().map_or(-1, |m| m.1);
            offsets.push(lo);
            values.push(vec![0.0; (hi - lo + 1).max(0) as usize]);
            intervals.push(merged);
        }
        Self { j_min, offsets, intervals, values }
    }

    fn fill(&mut self, lattice: &NoiseLattice) {
        for (idx, merged) in self.intervals.iter().enumerate() {
            let j = self.j_min + idx as i64;
            let off = self.offsets[idx];
            for &(lo, hi) in merged {
                let dst = &mut self.values[idx][(lo - off) as usize..=(hi - off) as usize];
                lattice.fill(j, lo, dst);
            }
        }
    }

    fn slice(&self, j: i64, k_start: i64, len: usize) -> &[f64] {
        let idx = (j - self.j_min) as usize;
        let start = (k_start - self.offsets[idx]) as usize;
        &self.values[idx][start..start + len]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Low and high parts of one process at every grid point.
fn evaluate(plan: &Plan, noise: &NoiseBuffers) -> (Vec<f64>, Vec<f64>) {
    let mut low = Vec::with_capacity(plan.per_t.len());
    let mut high = Vec::with_capacity(plan.per_t.len());
    for segs in &plan.per_t {
        let (mut l, mut h) = (0.0, 0.0);
        for s in segs {
            let v = dot(&s.weights, noise.slice(s.j, s.k_start, s.weights.len()));
            if s.j < 0 {
                l += v;
            } else {
                h += v;
            }
        }
        low.push(l);
        high.push(h);
    }
    (low, high)
}

/// Runs every replicate of the given plans and assembles the requested series.
fn run(
    plans: &[(Series, &Plan)],
    residual: bool,
    cfg: &SynthesisConfig,
    lattice: &NoiseLattice,
) -> BTreeMap<Series, Paths> {
    let plan_refs: Vec<&Plan> = plans.iter().map(|p| p.1).collect();
    let template = NoiseBuffers::new(&plan_refs, cfg.j_min, cfg.j_max);
    let nt = cfg.t_grid.len();
    let per_rep: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..cfg.replicates)
        .into_par_iter()
        .map_init(
            || NoiseBuffers {
                j_min: template.j_min,
                offsets: template.offsets.clone(),
                intervals: template.intervals.clone(),
                values: template.values.clone(),
            },
            |noise, r| {
                noise.fill(&lattice.replicate(r as u64));
                plans.iter().map(|(_, p)| evaluate(p, noise)).collect()
            },
        )
        .collect();

    let mut out = BTreeMap::new();
    let mut fulls: Vec<Vec<f64>> = Vec::new();
    for (pi, &(series, _)) in plans.iter().enumerate() {
        let mut full = Vec::with_capacity(cfg.replicates * nt);
        let mut low = Vec::new();
        let mut high = Vec::new();
        for rep in &per_rep {
            let (l, h) = &rep[pi];
            full.extend(l.iter().zip(h).map(|(a, b)| a + b));
            if cfg.split {
                low.extend_from_slice(l);
                high.extend_from_slice(h);
            }
        }
        if cfg.split {
            let (ls, hs) = series.parts();
            out.insert(ls, Paths::new(nt, low));
            out.insert(hs, Paths::new(nt, high));
        }
        fulls.push(full.clone());
        out.insert(series, Paths::new(nt, full));
    }
    if residual {
        let r = fulls[1].iter().zip(&fulls[0]).map(|(z, x)| z - x).collect();
        out.insert(Series::R, Paths::new(nt, r));
    }
    out
}

fn check_coverage(h: &HurstFunction, table: &PsiTable) -> Result<()> {
    table.check_theta(h.a())?;
    table.check_theta(h.b())
}

fn bundle(cfg: &SynthesisConfig, lattice: &NoiseLattice, series: BTreeMap<Series, Paths>) -> PathBundle {
    PathBundle {
        t_grid: cfg.t_grid.clone(),
        seed: lattice.seed(),
        config: cfg.clone(),
        series,
    }
}

/// `B(·, θ)` on the grid.
pub fn synthesize_field(
    theta: f64,
    cfg: &SynthesisConfig,
    lattice: &NoiseLattice,
    table: &PsiTable,
) -> Result<PathBundle> {
    cfg.validate()?;
    table.check_theta(theta)?;
    let plan = build_plan(ThetaRule::Fixed(theta), cfg, table)?;
    Ok(bundle(cfg, lattice, run(&[(Series::B, &plan)], false, cfg, lattice)))
}

/// `X(t) = B(t, H(t))`.
pub fn synthesize_mbm(
    h: &HurstFunction,
    cfg: &SynthesisConfig,
    lattice: &NoiseLattice,
    table: &PsiTable,
) -> Result<PathBundle> {
    cfg.validate()?;
    check_coverage(h, table)?;
    let plan = build_plan(ThetaRule::AtT(h), cfg, table)?;
    Ok(bundle(cfg, lattice, run(&[(Series::X, &plan)], false, cfg, lattice)))
}

/// `Z`, with per-term `θ = H(k/2^j)`.
pub fn synthesize_z(
    h: &HurstFunction,
    cfg: &SynthesisConfig,
    lattice: &NoiseLattice,
    table: &PsiTable,
) -> Result<PathBundle> {
    cfg.validate()?;
    check_coverage(h, table)?;
    let plan = build_plan(ThetaRule::Dyadic(h), cfg, table)?;
    Ok(bundle(cfg, lattice, run(&[(Series::Z, &plan)], false, cfg, lattice)))
}

/// `X`, `Z` and `R = Z − X` from one noise draw per replicate.
pub fn synthesize_residual(
    h: &HurstFunction,
    cfg: &SynthesisConfig,
    lattice: &NoiseLattice,
    table: &PsiTable,
) -> Result<PathBundle> {
    cfg.validate()?;
    check_coverage(h, table)?;
    let x = build_plan(ThetaRule::AtT(h), cfg, table)?;
    let z = build_plan(ThetaRule::Dyadic(h), cfg, table)?;
    Ok(bundle(
        cfg,
        lattice,
        run(&[(Series::X, &x), (Series::Z, &z)], true, cfg, lattice),
    ))
}

/// The per-term `θ` that `Z` uses for coefficient `(j, k)`.
pub fn z_term_theta(h: &HurstFunction, j: i64, k: i64) -> f64 {
    h.eval_dyadic(j, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hurst::HurstKind;
    use crate::psi::{shared_table, PsiTableConfig};
    use crate::wavelet::MeyerWindow;
    use std::sync::Arc;

    fn small_table() -> Arc<PsiTable> {
        let cfg = PsiTableConfig {
            x_max: 64.0,
            theta_lo: 0.15,
            theta_hi: 0.85,
            theta_nodes: 20,
            quadrature_points: 512,
            ..PsiTableConfig::default()
        };
        shared_table(&MeyerWindow::default(), &cfg).unwrap()
    }

    fn small_cfg(replicates: usize) -> SynthesisConfig {
        SynthesisConfig {
            j_min: -4,
            j_max: 6,
            k_window: 12,
            t_grid: uniform_grid(0.0, 1.0, 33),
            replicates,
            split: true,
        }
    }

    #[test]
    fn window_ranges() {
        assert_eq!(k_window_ranges(0.0, 3, 10), vec![(-10, 10)]);
        assert_eq!(k_window_ranges(1.0, 3, 10), vec![(-10, 18)]);
        assert_eq!(k_window_ranges(1.0, 6, 10), vec![(-10, 10), (54, 74)]);
        assert_eq!(k_window_ranges(0.3, 0, 10), vec![(-10, 10)]);
    }

    #[test]
    fn g_jk_vanishes_at_origin_and_matches_finite_difference() {
        let table = small_table();
        for (j, k) in [(0, 0), (3, -2), (-2, 1), (5, 40)] {
            assert_eq!(g_jk(&table, 0.0, 0.5, j, k, 0).unwrap(), 0.0);
        }
        let d = 1e-5;
        for (t, j, k) in [(0.7, 2, 1), (0.3, -1, 0), (0.45, 4, 6)] {
            let g1 = g_jk(&table, t, 0.6, j, k, 1).unwrap();
            let fd = (g_jk(&table, t, 0.6 + d, j, k, 0).unwrap() - g_jk(&table, t, 0.6 - d, j, k, 0).unwrap())
                / (2.0 * d);
            assert!((g1 - fd).abs() < 1e-6, "j={j} k={k}: {g1} vs {fd}");
            let g2 = g_jk(&table, t, 0.6, j, k, 2).unwrap();
            let fd2 = (g_jk(&table, t, 0.6 + d, j, k, 1).unwrap() - g_jk(&table, t, 0.6 - d, j, k, 1).unwrap())
                / (2.0 * d);
            assert!((g2 - fd2).abs() < 1e-6, "j={j} k={k}: {g2} vs {fd2}");
        }
    }

    #[test]
    fn g_jk_at_scale_zero_is_plain_difference() {
        let table = small_table();
        for n in 0..=2 {
            let g = g_jk(&table, 0.8, 0.4, 0, 3, n).unwrap();
            let direct = table.value(0.8 - 3.0, 0.4, n).unwrap() - table.value(-3.0, 0.4, n).unwrap();
            assert_eq!(g, direct);
        }
        assert!(g_jk(&table, 0.8, 0.4, 0, 3, 3).is_err());
    }

    #[test]
    fn local_and_public_g_agree() {
        let table = small_table();
        let tw = table.theta_weights(0.55).unwrap();
        for n in 0..=2 {
            let a = g_jk(&table, 0.37, 0.55, 3, 2, n).unwrap();
            let b = g_jk_local(&table, &tw, 0.37, 3, 2, n);
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn paths_start_at_zero_and_split_is_exact() {
        let table = small_table();
        let h = HurstFunction::sine(0.5, 0.2).unwrap();
        let lattice = NoiseLattice::new(5);
        let b = synthesize_residual(&h, &small_cfg(4), &lattice, &table).unwrap();
        for s in [Series::X, Series::Z, Series::R, Series::XLow, Series::ZHigh] {
            let p = b.require(s).unwrap();
            for r in 0..4 {
                assert_eq!(p.get(r, 0), 0.0, "{}", s.name());
            }
        }
        for (full, low, high) in [(Series::X, Series::XLow, Series::XHigh), (Series::Z, Series::ZLow, Series::ZHigh)] {
            let (f, l, hi) = (b.require(full).unwrap(), b.require(low).unwrap(), b.require(high).unwrap());
            for r in 0..4 {
                for i in 0..33 {
                    assert_eq!(f.get(r, i).to_bits(), (l.get(r, i) + hi.get(r, i)).to_bits());
                }
            }
        }
        let (x, z, r) = (b.require(Series::X).unwrap(), b.require(Series::Z).unwrap(), b.require(Series::R).unwrap());
        for rep in 0..4 {
            for i in 0..33 {
                assert_eq!(r.get(rep, i).to_bits(), (z.get(rep, i) - x.get(rep, i)).to_bits());
            }
        }
        assert!(r.max_abs() > 0.0);
    }

    #[test]
    fn constant_hurst_collapses_x_z_and_field() {
        let table = small_table();
        let h = HurstFunction::constant(0.6).unwrap();
        let lattice = NoiseLattice::new(9);
        let cfg = small_cfg(3);
        let res = synthesize_residual(&h, &cfg, &lattice, &table).unwrap();
        let field = synthesize_field(0.6, &cfg, &lattice, &table).unwrap();
        assert_eq!(res.require(Series::X).unwrap(), res.require(Series::Z).unwrap());
        assert_eq!(res.require(Series::R).unwrap().max_abs(), 0.0);
        assert_eq!(
            res.require(Series::X).unwrap().replicate(1),
            field.require(Series::B).unwrap().replicate(1)
        );
    }

    #[test]
    fn field_is_deterministic_and_seed_sensitive() {
        let table = small_table();
        let cfg = small_cfg(2);
        let a = synthesize_field(0.4, &cfg, &NoiseLattice::new(1), &table).unwrap();
        let b = synthesize_field(0.4, &cfg, &NoiseLattice::new(1), &table).unwrap();
        let c = synthesize_field(0.4, &cfg, &NoiseLattice::new(2), &table).unwrap();
        assert_eq!(a.require(Series::B).unwrap(), b.require(Series::B).unwrap());
        assert_ne!(a.require(Series::B).unwrap(), c.require(Series::B).unwrap());
    }

    /// Term-by-term sum over `W(j, t)` using the public `g_jk`.
    fn brute(table: &PsiTable, theta: impl Fn(i64, i64) -> f64, cfg: &SynthesisConfig, lattice: &NoiseLattice, t: f64) -> f64 {
        let mut sum = 0.0;
        for j in cfg.j_min..=cfg.j_max {
            let mut ks: Vec<i64> = (-cfg.k_window..=cfg.k_window).collect();
            let c = (t * 2f64.powi(j as i32)).round() as i64;
            ks.extend(c - cfg.k_window - 1..=c + cfg.k_window + 1);
            ks.sort_unstable();
            ks.dedup();
            for k in ks {
                if (k as f64 - t * 2f64.powi(j as i32)).abs() > cfg.k_window as f64 && k.abs() > cfg.k_window {
                    continue;
                }
                sum += lattice.epsilon(j, k) * g_jk(table, t, theta(j, k), j, k, 0).unwrap();
            }
        }
        coefficient_scale() * sum
    }

    #[test]
    fn x_and_z_match_term_by_term_sums() {
        let table = small_table();
        let h = HurstFunction::sine(0.5, 0.3).unwrap();
        let lattice = NoiseLattice::new(21);
        let cfg = small_cfg(2);
        let b = synthesize_residual(&h, &cfg, &lattice, &table).unwrap();
        for r in 0..2 {
            let rep = lattice.replicate(r as u64);
            for i in [5, 13, 32] {
                let t = cfg.t_grid[i];
                let x = brute(&table, |_, _| h.eval(t), &cfg, &rep, t);
                let z = brute(&table, |j, k| h.eval_dyadic(j, k), &cfg, &rep, t);
                assert!((b.require(Series::X).unwrap().get(r, i) - x).abs() < 1e-6, "X at {t}: {} vs {x}", b.require(Series::X).unwrap().get(r, i));
                assert!((b.require(Series::Z).unwrap().get(r, i) - z).abs() < 1e-6, "Z at {t}");
            }
        }
    }

    #[test]
    fn paths_are_linear_in_the_noise() {
        let table = small_table();
        let h = HurstFunction::sine(0.5, 0.2).unwrap();
        let cfg = small_cfg(1);
        let x = build_plan(ThetaRule::AtT(&h), &cfg, &table).unwrap();
        let mut noise = NoiseBuffers::new(&[&x], cfg.j_min, cfg.j_max);
        noise.fill(&NoiseLattice::new(4));
        let (l1, h1) = evaluate(&x, &noise);
        for v in noise.values.iter_mut().flatten() {
            *v *= 2.0;
        }
        let (l2, h2) = evaluate(&x, &noise);
        for i in 0..l1.len() {
            assert_eq!(l2[i], 2.0 * l1[i]);
            assert_eq!(h2[i], 2.0 * h1[i]);
        }
    }

    #[test]
    fn step_hurst_terms_use_the_piece_value() {
        let h = HurstFunction::new(HurstKind::Step { breaks: vec![0.5], values: vec![0.3, 0.7] }).unwrap();
        let mut checked = 0;
        for j in -3..7i64 {
            for k in -5..5i64 {
                let p = k as f64 / 2f64.powi(j as i32);
                let want = if p < 0.5 { 0.3 } else { 0.7 };
                assert_eq!(z_term_theta(&h, j, k), want);
                checked += 1;
            }
        }
        assert_eq!(checked, 100);
    }

    #[test]
    fn rejects_uncovered_hurst_and_bad_config() {
        let table = small_table();
        let h = HurstFunction::sine(0.5, 0.45).unwrap();
        assert!(synthesize_mbm(&h, &small_cfg(1), &NoiseLattice::new(0), &table).is_err());
        let mut cfg = small_cfg(1);
        cfg.j_min = 0;
        assert!(cfg.validate().is_err());
        cfg = small_cfg(1);
        cfg.k_window = 4;
        assert!(cfg.validate().is_err());
        cfg = small_cfg(1);
        cfg.t_grid = vec![0.5, 0.5];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn csv_layout() {
        let table = small_table();
        let mut cfg = small_cfg(2);
        cfg.t_grid = vec![0.0, 0.5];
        cfg.split = false;
        let b = synthesize_residual(&HurstFunction::sine(0.5, 0.2).unwrap(), &cfg, &NoiseLattice::new(3), &table)
            .unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "replicate,t,X,Z,R");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("0,5.0000000000000000e-1,"));
    }
}
