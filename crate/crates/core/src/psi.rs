//! The kernel `Ψ(x, θ) = ∫ e^{ixξ} ψ̂(ξ) |ξ|^{−θ−1/2} dξ` and its θ-derivatives.
//!
//! Because `ψ̂(ξ) = e^{iξ/2} χ(|ξ|)` is Hermitian and compactly supported,
//!
//! ```text
//! ∂θⁿΨ(x, θ) = 2 ∫_{2π/3}^{8π/3} cos((x + 1/2) ξ) χ(ξ) (−ln ξ)ⁿ ξ^{−θ−1/2} dξ,
//! ```
//!
//! a smooth integrand on each of the two flank panels. Direct evaluation
//! uses composite Gauss–Legendre on those panels; [`PsiTable`] stores the
//! values on a uniform `x` grid times Chebyshev `θ` nodes and interpolates
//! with a local Lagrange stencil in `x` and barycentric Chebyshev in `θ`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::wavelet::{MeyerWindow, KNOT_MID, SUPPORT_HI, SUPPORT_LO};

/// Order of the Gauss–Legendre rule used on every sub-panel.
const PANEL_ORDER: usize = 32;
/// Beyond this `|x + 1/2|` the number of quadrature points grows linearly.
const OSCILLATION_KNEE: f64 = 40.0;
const CACHE_MAGIC: &[u8; 8] = b"MBMPSI01";

fn panel_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(PANEL_ORDER))
}

/// Quadrature nodes for one oscillation scale: `(ξ, 2·w)` pairs.
fn scaled_nodes(quadrature_points: usize, scale: usize) -> Vec<(f64, f64)> {
    let total = (quadrature_points.div_ceil(PANEL_ORDER) * scale).max(3);
    // panel lengths are 2π/3 and 4π/3
    let first = (total / 3).max(1);
    let second = total - first;
    let mut pts = Vec::with_capacity(total * PANEL_ORDER);
    let rule = panel_rule();
    rule.composite_into(SUPPORT_LO, KNOT_MID, first, &mut pts);
    rule.composite_into(KNOT_MID, SUPPORT_HI, second, &mut pts);
    for p in &mut pts {
        p.1 *= 2.0;
    }
    pts
}

fn oscillation_scale(x: f64) -> usize {
    let y = (x + 0.5).abs();
    if y <= OSCILLATION_KNEE {
        1
    } else {
        (y / OSCILLATION_KNEE).ceil() as usize
    }
}

/// Direct quadrature of `∂θⁿΨ(x, θ)` with `quadrature_points` base nodes.
pub fn psi_direct(window: &MeyerWindow, x: f64, theta: f64, n: usize, quadrature_points: usize) -> f64 {
    let y = x + 0.5;
    scaled_nodes(quadrature_points, oscillation_scale(x))
        .into_iter()
        .map(|(xi, w)| {
            let amp = window.window(xi) * xi.powf(-theta - 0.5) * (-xi.ln()).powi(n as i32);
            w * amp * (y * xi).cos()
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiTableConfig {
    pub x_max: f64,
    pub x_step: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub theta_nodes: usize,
    pub max_order: usize,
    pub quadrature_points: usize,
    /// Stencil width of the local Lagrange interpolant in `x` (even).
    pub interp_points: usize,
}

impl Default for PsiTableConfig {
    fn default() -> Self {
        Self {
            x_max: 256.0,
            x_step: 1.0 / 32.0,
            theta_lo: 0.1,
            theta_hi: 0.9,
            theta_nodes: 32,
            max_order: 2,
            quadrature_points: 2048,
            interp_points: 12,
        }
    }
}

impl PsiTableConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_lo > 0.0 && self.theta_lo < self.theta_hi && self.theta_hi < 1.0) {
            return Err(Error::config(format!(
                "table theta range must satisfy 0 < lo < hi < 1, got [{}, {}]",
                self.theta_lo, self.theta_hi
            )));
        }
        if !(self.x_step > 0.0 && self.x_step.is_finite()) {
            return Err(Error::config("x_step must be positive"));
        }
        if !(self.x_max >= 1.0 && self.x_max.is_finite()) {
            return Err(Error::config("x_max must be at least 1"));
        }
        if self.theta_nodes < 4 {
            return Err(Error::config("at least 4 Chebyshev theta nodes are required"));
        }
        if self.max_order < 2 {
            return Err(Error::config("max_dtheta_order must be at least 2"));
        }
        if self.quadrature_points < 64 {
            return Err(Error::config("quadrature_points must be at least 64"));
        }
        if self.interp_points < 4 || self.interp_points % 2 != 0 {
            return Err(Error::config("interp_points must be even and at least 4"));
        }
        let steps = 2.0 * self.x_max / self.x_step;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::config("2 * x_max must be a multiple of x_step"));
        }
        if steps.round() as usize + 1 < 2 * self.interp_points {
            return Err(Error::config("x grid too small for the interpolation stencil"));
        }
        Ok(())
    }

    fn x_count(&self) -> usize {
        (2.0 * self.x_max / self.x_step).round() as usize + 1
    }
}

/// Precomputed barycentric weights for one `θ`.
#[derive(Clone, Debug)]
pub struct ThetaWeights {
    theta: f64,
    weights: Vec<f64>,
}

impl ThetaWeights {
    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// `∂θⁿΨ(·, θ)` on the table's `x` grid for one fixed `θ`.
#[derive(Clone, Debug)]
pub struct PsiSlice {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
    stencil: usize,
    bary: Arc<Vec<f64>>,
}

#[derive(Debug)]
pub struct PsiTable {
    config: PsiTableConfig,
    window: MeyerWindow,
    x_count: usize,
    thetas: Vec<f64>,
    theta_bary: Vec<f64>,
    x_bary: Arc<Vec<f64>>,
    /// Row-major `(n, x, θ)`.
    values: Vec<f64>,
}

impl PsiTable {
    pub fn build(window: &MeyerWindow, config: &PsiTableConfig) -> Result<Self> {
        config.validate()?;
        let x_count = config.x_count();
        let thetas = chebyshev_nodes(config.theta_lo, config.theta_hi, config.theta_nodes);
        let nt = thetas.len();
        let orders = config.max_order + 1;
        let dx = config.x_step;
        let x_of = |i: usize| -config.x_max + i as f64 * dx;

        // Ψ(x) = Ψ(-1-x): compute x >= -1/2 directly, mirror the rest when
        // the mirror point lies on the grid.
        let inv = 1.0 / dx;
        let mirror_offset = if (inv - inv.round()).abs() < 1e-12 {
            Some(inv.round() as i64)
        } else {
            None
        };
        let mut direct_rows = Vec::new();
        let mut mirrored = Vec::new();
        for i in 0..x_count {
            let x = x_of(i);
            let m = mirror_offset.and_then(|off| {
                let j = x_count as i64 - 1 - off - i as i64;
                (x + 0.5 < 0.0 && j >= 0 && (j as usize) < x_count).then_some(j as usize)
            });
            match m {
                Some(j) => mirrored.push((i, j)),
                None => direct_rows.push(i),
            }
        }

        // group rows by oscillation scale so each group shares one node set
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for &i in &direct_rows {
            groups.entry(oscillation_scale(x_of(i))).or_default().push(i);
        }
        let mut group_keys: Vec<_> = groups.keys().copied().collect();
        group_keys.sort_unstable();

        let mut rows: Vec<Option<Vec<f64>>> = vec![None; x_count];
        for scale in group_keys {
            let nodes = scaled_nodes(config.quadrature_points, scale);
            // per node: (ξ, −ln ξ, [2 w χ ξ^{−θ_m−1/2}]_m)
            let mut xis = Vec::with_capacity(nodes.len());
            let mut logs = Vec::with_capacity(nodes.len());
            let mut base = Vec::with_capacity(nodes.len() * nt);
            for &(xi, w) in &nodes {
                let chi = window.window(xi);
                xis.push(xi);
                logs.push(-xi.ln());
                for &th in &thetas {
                    base.push(w * chi * xi.powf(-th - 0.5));
                }
            }
            let idx = &groups[&scale];
            let computed: Vec<(usize, Vec<f64>)> = idx
                .par_iter()
                .map(|&i| {
                    let y = x_of(i) + 0.5;
                    let mut acc = vec![0.0; orders * nt];
                    for q in 0..xis.len() {
                        let c = (y * xis[q]).cos();
                        let b = &base[q * nt..(q + 1) * nt];
                        let mut f = c;
                        for n in 0..orders {
                            let row = &mut acc[n * nt..(n + 1) * nt];
                            for (r, bv) in row.iter_mut().zip(b) {
                                *r += f * bv;
                            }
                            f *= logs[q];
                        }
                    }
                    (i, acc)
                })
                .collect();
            for (i, acc) in computed {
                rows[i] = Some(acc);
            }
        }
        for (i, j) in mirrored {
            rows[i] = rows[j].clone();
        }

        let mut values = vec![0.0; orders * x_count * nt];
        for (i, row) in rows.into_iter().enumerate() {
            let row = row.ok_or_else(|| Error::Numerical(format!("table row {i} not computed")))?;
            for n in 0..orders {
                let dst = (n * x_count + i) * nt;
                values[dst..dst + nt].copy_from_slice(&row[n * nt..(n + 1) * nt]);
            }
        }
        Ok(Self::assemble(config.clone(), window.clone(), thetas, values))
    }

    fn assemble(config: PsiTableConfig, window: MeyerWindow, thetas: Vec<f64>, values: Vec<f64>) -> Self {
        let nt = thetas.len();
        let theta_bary = (0..nt)
            .map(|m| {
                let s = ((2 * m + 1) as f64 * std::f64::consts::PI / (2 * nt) as f64).sin();
                if m % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        let x_bary = Arc::new(equispaced_bary(config.interp_points));
        Self {
            x_count: config.x_count(),
            config,
            window,
            thetas,
            theta_bary,
            x_bary,
            values,
        }
    }

    /// Loads the table from `path` when its header matches `config` and
    /// `window`; otherwise builds it and rewrites the cache.
    pub fn load_or_build(window: &MeyerWindow, config: &PsiTableConfig, path: &Path) -> Result<Self> {
        if path.exists() {
            if let Ok(table) = Self::load(window, config, path) {
                return Ok(table);
            }
        }
        let table = Self::build(window, config)?;
        table.save(path)?;
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            w.write_all(CACHE_MAGIC)?;
            for v in self.header_floats() {
                w.write_all(&v.to_le_bytes())?;
            }
            for v in self.header_ints() {
                w.write_all(&v.to_le_bytes())?;
            }
            for v in &self.values {
                w.write_all(&v.to_le_bytes())?;
            }
            w.flush()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(window: &MeyerWindow, config: &PsiTableConfig, path: &Path) -> Result<Self> {
        config.validate()?;
        let bad = |m: &str| Error::Cache {
            path: path.to_path_buf(),
            message: m.to_string(),
        };
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(bad("bad magic"));
        }
        let expected = Self::assemble(config.clone(), window.clone(), Vec::new(), Vec::new());
        let mut buf = [0u8; 8];
        for want in expected.header_floats() {
            r.read_exact(&mut buf)?;
            if f64::from_le_bytes(buf).to_bits() != want.to_bits() {
                return Err(bad("header mismatch"));
            }
        }
        for want in expected.header_ints() {
            r.read_exact(&mut buf)?;
            if u64::from_le_bytes(buf) != want {
                return Err(bad("header mismatch"));
            }
        }
        let len = (config.max_order + 1) * config.x_count() * config.theta_nodes;
        let mut bytes = Vec::with_capacity(len * 8);
        r.read_to_end(&mut bytes)?;
        if bytes.len() != len * 8 {
            return Err(bad("truncated payload"));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let thetas = chebyshev_nodes(config.theta_lo, config.theta_hi, config.theta_nodes);
        Ok(Self::assemble(config.clone(), window.clone(), thetas, values))
    }

    fn header_floats(&self) -> [f64; 4] {
        let c = &self.config;
        [c.x_max, c.x_step, c.theta_lo, c.theta_hi]
    }

    fn header_ints(&self) -> [u64; 4] {
        let c = &self.config;
        [
            c.theta_nodes as u64,
            c.max_order as u64,
            c.quadrature_points as u64,
            self.window.smoothness_order() as u64,
        ]
    }

    pub fn config(&self) -> &PsiTableConfig {
        &self.config
    }

    pub fn window(&self) -> &MeyerWindow {
        &self.window
    }

    pub fn max_order(&self) -> usize {
        self.config.max_order
    }

    pub fn theta_range(&self) -> (f64, f64) {
        (self.config.theta_lo, self.config.theta_hi)
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.thetas
    }

    pub fn x_grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.x_count).map(move |i| self.x_at(i))
    }

    pub fn x_len(&self) -> usize {
        self.x_count
    }

    pub fn x_at(&self, i: usize) -> f64 {
        -self.config.x_max + i as f64 * self.config.x_step
    }

    /// Stored value at grid index `i` and Chebyshev node `m`.
    pub fn stored(&self, n: usize, i: usize, m: usize) -> f64 {
        self.values[(n * self.x_count + i) * self.thetas.len() + m]
    }

    pub fn check_order(&self, n: usize) -> Result<()> {
        if n > self.config.max_order {
            return Err(Error::OrderTooHigh {
                requested: n,
                max: self.config.max_order,
            });
        }
        Ok(())
    }

    pub fn check_theta(&self, theta: f64) -> Result<()> {
        let (lo, hi) = self.theta_range();
        let slack = 1e-12 * (hi - lo);
        if !(theta >= lo - slack && theta <= hi + slack) {
            return Err(Error::ThetaOutOfRange { theta, lo, hi });
        }
        Ok(())
    }

    pub fn theta_weights(&self, theta: f64) -> Result<ThetaWeights> {
        self.check_theta(theta)?;
        let nt = self.thetas.len();
        let mut weights = vec![0.0; nt];
        if let Some(m) = self.thetas.iter().position(|&t| t == theta) {
            weights[m] = 1.0;
        } else {
            let mut total = 0.0;
            for m in 0..nt {
                let w = self.theta_bary[m] / (theta - self.thetas[m]);
                weights[m] = w;
                total += w;
            }
            for w in &mut weights {
                *w /= total;
            }
        }
        Ok(ThetaWeights { theta, weights })
    }

    /// Half-width of `x` over which the interpolating stencil fits inside the table.
    fn interp_limit(&self) -> f64 {
        self.config.x_max - (self.config.interp_points / 2) as f64 * self.config.x_step
    }

    /// `∂θⁿΨ(x, θ)` from the table, falling back to direct quadrature
    /// when `x` lies outside the interpolation range.
    pub fn value(&self, x: f64, theta: f64, n: usize) -> Result<f64> {
        self.check_order(n)?;
        let tw = self.theta_weights(theta)?;
        if x.abs() > self.interp_limit() {
            return Ok(self.direct(x, theta, n));
        }
        Ok(self.interpolate(x, &tw, n))
    }

    pub fn direct(&self, x: f64, theta: f64, n: usize) -> f64 {
        psi_direct(&self.window, x, theta, n, self.config.quadrature_points)
    }

    /// Kernel evaluation used inside truncated series sums.
    ///
    /// Identical to [`PsiTable::value`] for `|x| ≤ x_max`; returns zero
    /// beyond the table, where `|Ψ|` is below the `k`-window truncation
    /// error of every sum this crate forms.
    pub fn local(&self, x: f64, tw: &ThetaWeights, n: usize) -> f64 {
        let a = x.abs();
        if a > self.config.x_max {
            0.0
        } else if a > self.interp_limit() {
            self.direct(x, tw.theta, n)
        } else {
            self.interpolate(x, tw, n)
        }
    }

    fn interpolate(&self, x: f64, tw: &ThetaWeights, n: usize) -> f64 {
        let nt = self.thetas.len();
        let base = n * self.x_count;
        let theta_dot = |i: usize| -> f64 {
            let row = &self.values[(base + i) * nt..(base + i + 1) * nt];
            row.iter().zip(&tw.weights).map(|(v, w)| v * w).sum()
        };
        let u = (x + self.config.x_max) / self.config.x_step;
        let i = u.floor();
        let frac = u - i;
        let i = i as usize;
        if frac == 0.0 {
            return theta_dot(i);
        }
        let s = self.config.interp_points;
        let start = i + 1 - s / 2;
        let t = frac + (s / 2 - 1) as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..s {
            let w = self.x_bary[k] / (t - k as f64);
            num += w * theta_dot(start + k);
            den += w;
        }
        num / den
    }

    /// Collapses the `θ` axis at a fixed `θ`, for repeated evaluation.
    pub fn slice(&self, theta: f64, n: usize) -> Result<PsiSlice> {
        self.check_order(n)?;
        let tw = self.theta_weights(theta)?;
        let nt = self.thetas.len();
        let base = n * self.x_count;
        let values = (0..self.x_count)
            .map(|i| {
                let row = &self.values[(base + i) * nt..(base + i + 1) * nt];
                row.iter().zip(&tw.weights).map(|(v, w)| v * w).sum()
            })
            .collect();
        Ok(PsiSlice {
            x0: -self.config.x_max,
            dx: self.config.x_step,
            values,
            stencil: self.config.interp_points,
            bary: Arc::clone(&self.x_bary),
        })
    }

    /// Empirical `sup (2 + |x|)^ℓ |∂θⁿΨ(x, θ)|` over every stored value.
    pub fn localization_constant(&self, ell: u32, n: usize) -> Result<f64> {
        if ell < 2 {
            return Err(Error::domain("localization exponent ell must be at least 2"));
        }
        self.check_order(n)?;
        let nt = self.thetas.len();
        let mut sup: f64 = 0.0;
        for i in 0..self.x_count {
            let weight = (2.0 + self.x_at(i).abs()).powi(ell as i32);
            for m in 0..nt {
                sup = sup.max(weight * self.stored(n, i, m).abs());
            }
        }
        Ok(sup)
    }

    /// Chebyshev coefficients of `θ ↦ ∂θⁿΨ(x_i, θ)` from the stored node values.
    pub fn theta_chebyshev_coefficients(&self, i: usize, n: usize) -> Vec<f64> {
        let nt = self.thetas.len();
        // nodes are stored in ascending θ, i.e. descending cos argument
        (0..nt)
            .map(|k| {
                let s: f64 = (0..nt)
                    .map(|m| {
                        let arg = std::f64::consts::PI * k as f64 * (2 * (nt - 1 - m) + 1) as f64
                            / (2 * nt) as f64;
                        self.stored(n, i, m) * arg.cos()
                    })
                    .sum();
                if k == 0 {
                    s / nt as f64
                } else {
                    2.0 * s / nt as f64
                }
            })
            .collect()
    }
}

impl PsiSlice {
    pub fn x_max(&self) -> f64 {
        -self.x0
    }

    /// Interpolated value; zero outside the stencil-covered range.
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.x0) / self.dx;
        let s = self.stencil;
        let half = (s / 2) as f64;
        if u < half - 1.0 || u > (self.values.len() - 1) as f64 - half {
            return 0.0;
        }
        let i = u.floor();
        let frac = u - i;
        let i = i as usize;
        if frac == 0.0 {
            return self.values[i];
        }
        let start = i + 1 - s / 2;
        let t = frac + (s / 2 - 1) as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..s {
            let w = self.bary[k] / (t - k as f64);
            num += w * self.values[start + k];
            den += w;
        }
        num / den
    }
}

/// Chebyshev points of the first kind on `[lo, hi]`, ascending.
pub fn chebyshev_nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (0..count)
        .map(|m| mid - half * ((2 * m + 1) as f64 * std::f64::consts::PI / (2 * count) as f64).cos())
        .collect()
}

/// Barycentric weights `(−1)^k C(s−1, k)` for `s` equispaced nodes.
fn equispaced_bary(s: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(s);
    let mut c = 1.0;
    for k in 0..s {
        out.push(if k % 2 == 0 { c } else { -c });
        c = c * (s - 1 - k) as f64 / (k + 1) as f64;
    }
    out
}

/// Shared table handle, keyed by configuration, for callers that build
/// the same table repeatedly within one process.
pub fn shared_table(window: &MeyerWindow, config: &PsiTableConfig) -> Result<Arc<PsiTable>> {
    type Key = (u32, String);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<PsiTable>>>> = OnceLock::new();
    let key = (window.smoothness_order(), format!("{config:?}"));
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("table cache poisoned").get(&key) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(PsiTable::build(window, config)?);
    cache
        .lock()
        .expect("table cache poisoned")
        .insert(key, Arc::clone(&table));
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent arbitrary-precision adaptive
    // quadrature of the defining integral (30 digits, split at the knots).
    const PSI_0_05: f64 = -0.867_391_626_733_727_7;
    const PSI_13_06: f64 = 0.196_854_992_842_933_3;
    const DPSI_13_06: f64 = -0.163_854_858_090_391_34;
    const D2PSI_13_06: f64 = 0.084_486_053_231_006_82;
    const PSI_037_0512: f64 = -0.695_908_094_765_075_9;
    const PSI_525_03: f64 = 0.029_286_837_480_132_693;
    const DPSI_M205_08: f64 = -8.210_743_829_662_931e-6;
    const PSI_100_05: f64 = -5.127_620_132_682_678e-10;

    fn small_config() -> PsiTableConfig {
        PsiTableConfig {
            x_max: 24.0,
            ..PsiTableConfig::default()
        }
    }

    fn small_table() -> Arc<PsiTable> {
        shared_table(&MeyerWindow::default(), &small_config()).unwrap()
    }

    #[test]
    fn direct_quadrature_matches_reference() {
        let w = MeyerWindow::default();
        let cases = [
            (0.0, 0.5, 0, PSI_0_05),
            (-1.0, 0.5, 0, PSI_0_05),
            (1.3, 0.6, 0, PSI_13_06),
            (1.3, 0.6, 1, DPSI_13_06),
            (1.3, 0.6, 2, D2PSI_13_06),
            (0.37, 0.512, 0, PSI_037_0512),
            (5.25, 0.3, 0, PSI_525_03),
            (-20.5, 0.8, 1, DPSI_M205_08),
            (100.0, 0.5, 0, PSI_100_05),
        ];
        for (x, th, n, want) in cases {
            let got = psi_direct(&w, x, th, n, 2048);
            assert!((got - want).abs() < 1e-13, "Ψ^({n})({x},{th}) = {got}, want {want}");
        }
    }

    #[test]
    fn quadrature_self_convergence() {
        let w = MeyerWindow::default();
        for &x in &[0.0, 3.7, -12.25, 39.0, 77.5, 250.0] {
            for n in 0..=2 {
                let a = psi_direct(&w, x, 0.45, n, 2048);
                let b = psi_direct(&w, x, 0.45, n, 4096);
                assert!((a - b).abs() < 1e-10, "x={x} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn table_reproduces_direct_quadrature_off_grid() {
        let t = small_table();
        let probe = t.value(0.37, 0.512, 0).unwrap();
        assert!((probe - PSI_037_0512).abs() < 1e-8, "{probe}");
        let mut worst: f64 = 0.0;
        for &(x, th) in &[(0.013, 0.11), (-3.333, 0.77), (7.77, 0.5), (-17.9, 0.31), (20.01, 0.89)] {
            for n in 0..=2 {
                let got = t.value(x, th, n).unwrap();
                let want = t.direct(x, th, n);
                worst = worst.max((got - want).abs());
            }
        }
        assert!(worst < 1e-8, "worst interpolation error {worst}");
    }

    #[test]
    fn slice_agrees_with_two_dimensional_interpolation() {
        let t = small_table();
        let s = t.slice(0.42, 1).unwrap();
        let tw = t.theta_weights(0.42).unwrap();
        for &x in &[-5.01, 0.0, 0.3, 11.111] {
            assert!((s.eval(x) - t.local(x, &tw, 1)).abs() < 1e-13);
        }
        assert_eq!(s.eval(1000.0), 0.0);
    }

    #[test]
    fn table_values_are_symmetric_about_minus_half() {
        let t = small_table();
        let off = (1.0 / t.config().x_step).round() as usize;
        let nx = t.x_len();
        let mut worst: f64 = 0.0;
        for n in 0..=2 {
            for i in 0..nx {
                if nx - 1 < i + off {
                    continue;
                }
                let j = nx - 1 - off - i;
                for m in 0..t.theta_nodes().len() {
                    worst = worst.max((t.stored(n, i, m) - t.stored(n, j, m)).abs());
                }
            }
        }
        assert!(worst < 1e-10, "{worst}");
        for &th in &[0.2, 0.5, 0.8] {
            let a = t.value(0.0, th, 0).unwrap();
            let b = t.value(-1.0, th, 0).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_derivatives_match_finite_differences() {
        let t = small_table();
        let d = 1e-5;
        for n in 1..=2 {
            for &(x, th) in &[(1.3, 0.6), (-4.2, 0.35), (0.0, 0.75)] {
                let fd = (t.value(x, th + d, n - 1).unwrap() - t.value(x, th - d, n - 1).unwrap()) / (2.0 * d);
                let got = t.value(x, th, n).unwrap();
                assert!((fd - got).abs() < 1e-6, "n={n} x={x}: {fd} vs {got}");
            }
        }
    }

    #[test]
    fn chebyshev_coefficients_decay() {
        let t = small_table();
        for &x in &[0.0, 2.5, -7.0] {
            let i = ((x + t.config().x_max) / t.config().x_step).round() as usize;
            for n in 0..=2 {
                let c = t.theta_chebyshev_coefficients(i, n);
                let first = c[0].abs().max(c[1].abs());
                let last = c.last().unwrap().abs();
                assert!(last < 1e-8 * first, "x={x} n={n}: {last} vs {first}");
            }
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let t = small_table();
        assert!(matches!(t.value(0.0, 0.5, 3), Err(Error::OrderTooHigh { .. })));
        assert!(matches!(t.value(0.0, 0.95, 0), Err(Error::ThetaOutOfRange { .. })));
        let cfg = PsiTableConfig {
            theta_lo: 0.5,
            theta_hi: 0.5,
            ..small_config()
        };
        assert!(matches!(PsiTable::build(&MeyerWindow::default(), &cfg), Err(Error::Config(_))));
        assert!(t.localization_constant(1, 0).is_err());
        assert!(t.localization_constant(4, 5).is_err());
    }

    #[test]
    fn out_of_table_values_use_direct_quadrature() {
        let t = small_table();
        let got = t.value(100.0, 0.5, 0).unwrap();
        assert!((got - PSI_100_05).abs() < 1e-13);
        let tw = t.theta_weights(0.5).unwrap();
        assert_eq!(t.local(100.0, &tw, 0), 0.0);
    }

    #[test]
    fn localization_constants_are_finite() {
        let t = small_table();
        let c4 = t.localization_constant(4, 0).unwrap();
        let c2 = t.localization_constant(2, 0).unwrap();
        let c41 = t.localization_constant(4, 1).unwrap();
        assert!(c4.is_finite() && c2.is_finite() && c41.is_finite());
        assert!(c2 <= c4);
        for &th in &[0.1, 0.5, 0.9] {
            for x in t.x_grid().step_by(7) {
                assert!((2.0 + x.abs()).powi(4) * t.value(x, th, 0).unwrap().abs() <= c4 * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn cache_round_trip_and_invalidation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("psi.bin");
        let w = MeyerWindow::default();
        let cfg = PsiTableConfig {
            x_max: 6.0,
            theta_nodes: 8,
            ..PsiTableConfig::default()
        };
        let built = PsiTable::load_or_build(&w, &cfg, &path).unwrap();
        let loaded = PsiTable::load(&w, &cfg, &path).unwrap();
        assert_eq!(built.values, loaded.values);
        let other = PsiTableConfig {
            quadrature_points: 1024,
            ..cfg.clone()
        };
        assert!(PsiTable::load(&w, &other, &path).is_err());
        assert!(PsiTable::load(&MeyerWindow::new(4).unwrap(), &cfg, &path).is_err());
    }
}

