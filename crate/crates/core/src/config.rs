//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::hurst::{HurstFunction, HurstKind};
use crate::psi::PsiTableConfig;
use crate::synthesis::{uniform_grid, SynthesisConfig};

/// Every accepted key with its default, in echo order.
const KEYS: &[(&str, &str)] = &[
    ("seed", "0"),
    ("threads", "0"),
    ("a", ""),
    ("b", ""),
    ("beta", "1.0"),
    ("ell", "4"),
    ("epsilon_slack", "1e-3"),
    ("grid_resolution", "2000"),
    ("j_min", "-8"),
    ("j_max", "12"),
    ("k_window", "50"),
    ("t_start", "0"),
    ("t_end", "1"),
    ("t_points", "1025"),
    ("replicates", "2000"),
    ("split", "false"),
    ("hurst.kind", "constant"),
    ("hurst.value", "0.5"),
    ("hurst.mean", "0.5"),
    ("hurst.amp", "0.3"),
    ("hurst.freq", "1"),
    ("hurst.phase", "0"),
    ("hurst.lo", "0.3"),
    ("hurst.hi", "0.7"),
    ("hurst.center", "0.5"),
    ("hurst.rate", "10"),
    ("hurst.knots", ""),
    ("hurst.breaks", ""),
    ("hurst.values", ""),
    ("hurst.t0", "0"),
    ("hurst.dt", "0.1"),
    ("psi.x_max", "256"),
    ("psi.x_step", "0.03125"),
    ("psi.theta_lo", "0.1"),
    ("psi.theta_hi", "0.9"),
    ("psi.theta_nodes", "32"),
    ("psi.quadrature_points", "2048"),
    ("psi.smoothness", "3"),
    ("psi.cache", ""),
    ("lags", "2^-9..2^-4"),
    ("holder.points", "0.1,0.25,0.4,0.6,0.9"),
    ("tangent.t", "0.4"),
    ("tangent.rhos", "2^-4..2^-8"),
    ("tangent.u", "0.25,0.5,0.75,1"),
    ("diag.t", "0.3"),
    ("diag.t1", "0.35"),
    ("diag.theta", "0.5"),
    ("diag.n", "1"),
    ("diag.j_max", "24"),
    ("diag.k_window", "50"),
    ("region.resolution", "100"),
    ("out_dir", "./out"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub threads: usize,
    /// Theory inputs; default to the Hurst function's range.
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub ell: u32,
    pub epsilon_slack: f64,
    pub grid_resolution: usize,
    pub synthesis: SynthesisConfig,
    pub hurst: HurstFunction,
    pub psi: PsiTableConfig,
    pub psi_smoothness: u32,
    pub psi_cache: Option<PathBuf>,
    pub lags: Vec<f64>,
    pub holder_points: Vec<f64>,
    pub tangent_t: f64,
    pub tangent_rhos: Vec<f64>,
    pub tangent_u: Vec<f64>,
    pub diag_t: f64,
    pub diag_t1: f64,
    pub diag_theta: f64,
    pub diag_n: usize,
    pub diag_j_max: i64,
    pub diag_k_window: i64,
    pub region_resolution: usize,
    pub out_dir: PathBuf,
    echo: Vec<(String, String)>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

impl ExperimentConfig {
    /// Effective `key = value` pairs, defaults included, in a fixed order.
    pub fn echo(&self) -> &[(String, String)] {
        &self.echo
    }

    /// Overrides the seed (e.g. from a command-line flag).
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.set_echo("seed", seed.to_string());
    }

    pub fn set_out_dir(&mut self, dir: PathBuf) {
        self.set_echo("out_dir", dir.display().to_string());
        self.out_dir = dir;
    }

    fn set_echo(&mut self, key: &str, value: String) {
        if let Some(e) = self.echo.iter_mut().find(|e| e.0 == key) {
            e.1 = value;
        }
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut given: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim().trim_matches('"');
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::UnknownKey(key.to_string()));
        }
        if given.insert(key.to_string(), (line_no, value.to_string())).is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    let p = Lookup { given: &given };

    let hurst = parse_hurst(&p)?;
    let a = match p.opt("a") {
        Some(_) => p.f64("a")?,
        None => hurst.a(),
    };
    let b = match p.opt("b") {
        Some(_) => p.f64("b")?,
        None => hurst.b(),
    };
    if a > b {
        return Err(Error::config("a must be ≤ b"));
    }
    if !(a > 0.0 && b < 1.0) {
        return Err(Error::config("a and b must lie in (0, 1)"));
    }

    let t_points: usize = p.parse("t_points")?;
    if t_points == 0 {
        return Err(Error::config("t_points must be at least 1"));
    }
    let (t_start, t_end) = (p.f64("t_start")?, p.f64("t_end")?);
    if t_points > 1 && t_end <= t_start {
        return Err(Error::config("t_end must exceed t_start"));
    }
    let synthesis = SynthesisConfig {
        j_min: p.parse("j_min")?,
        j_max: p.parse("j_max")?,
        k_window: p.parse("k_window")?,
        t_grid: uniform_grid(t_start, t_end, t_points),
        replicates: p.parse("replicates")?,
        split: p.parse("split")?,
    };
    synthesis.validate()?;

    let psi = PsiTableConfig {
        x_max: p.f64("psi.x_max")?,
        x_step: p.f64("psi.x_step")?,
        theta_lo: p.f64("psi.theta_lo")?,
        theta_hi: p.f64("psi.theta_hi")?,
        theta_nodes: p.parse("psi.theta_nodes")?,
        quadrature_points: p.parse("psi.quadrature_points")?,
        ..PsiTableConfig::default()
    };
    psi.validate()?;
    if hurst.a() < psi.theta_lo || hurst.b() > psi.theta_hi {
        return Err(Error::config(format!(
            "Hurst range [{}, {}] must lie inside [psi.theta_lo, psi.theta_hi] = [{}, {}]",
            hurst.a(),
            hurst.b(),
            psi.theta_lo,
            psi.theta_hi
        )));
    }

    let beta = p.f64("beta")?;
    if !(beta > 0.0) {
        return Err(Error::config("beta must be positive"));
    }
    let ell: u32 = p.parse("ell")?;
    if ell < 2 {
        return Err(Error::config("ell must be at least 2"));
    }
    let diag_n: usize = p.parse("diag.n")?;
    if diag_n > psi.max_order {
        return Err(Error::config(format!("diag.n must be at most {}", psi.max_order)));
    }

    let echo = KEYS
        .iter()
        .map(|(k, d)| {
            let v = given.get(*k).map_or_else(|| d.to_string(), |g| g.1.clone());
            (k.to_string(), v)
        })
        .collect();

    Ok(ExperimentConfig {
        seed: p.parse("seed")?,
        threads: p.parse("threads")?,
        a,
        b,
        beta,
        ell,
        epsilon_slack: p.f64("epsilon_slack")?,
        grid_resolution: p.parse("grid_resolution")?,
        synthesis,
        hurst,
        psi,
        psi_smoothness: p.parse("psi.smoothness")?,
        psi_cache: p.opt("psi.cache").map(PathBuf::from),
        lags: parse_lags(p.str("lags"))?,
        holder_points: parse_list(p.str("holder.points"))?,
        tangent_t: p.f64("tangent.t")?,
        tangent_rhos: parse_lags(p.str("tangent.rhos"))?,
        tangent_u: parse_list(p.str("tangent.u"))?,
        diag_t: p.f64("diag.t")?,
        diag_t1: p.f64("diag.t1")?,
        diag_theta: p.f64("diag.theta")?,
        diag_n,
        diag_j_max: p.parse("diag.j_max")?,
        diag_k_window: p.parse("diag.k_window")?,
        region_resolution: p.parse("region.resolution")?,
        out_dir: PathBuf::from(p.str("out_dir")),
        echo,
    })
}

struct Lookup<'a> {
    given: &'a BTreeMap<String, (usize, String)>,
}

impl Lookup<'_> {
    fn default_of(key: &str) -> &'static str {
        KEYS.iter().find(|(k, _)| *k == key).map(|(_, d)| *d).expect("key is declared")
    }

    fn str(&self, key: &str) -> &str {
        self.given.get(key).map_or_else(|| Self::default_of(key), |g| g.1.as_str())
    }

    fn opt(&self, key: &str) -> Option<&str> {
        let v = self.str(key);
        (!v.is_empty()).then_some(v)
    }

    fn line(&self, key: &str) -> usize {
        self.given.get(key).map_or(0, |g| g.0)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.str(key).parse().map_err(|e: T::Err| Error::Parse {
            line: self.line(key),
            message: format!("{key}: {e}"),
        })
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let v: f64 = self.parse(key)?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: self.line(key),
                message: format!("{key} must be finite"),
            });
        }
        Ok(v)
    }
}

fn parse_hurst(p: &Lookup<'_>) -> Result<HurstFunction> {
    let kind = match p.str("hurst.kind") {
        "constant" => HurstKind::Constant { value: p.f64("hurst.value")? },
        "sine" => HurstKind::Sine {
            mean: p.f64("hurst.mean")?,
            amp: p.f64("hurst.amp")?,
            freq: p.f64("hurst.freq")?,
            phase: p.f64("hurst.phase")?,
        },
        "logistic" => HurstKind::Logistic {
            lo: p.f64("hurst.lo")?,
            hi: p.f64("hurst.hi")?,
            center: p.f64("hurst.center")?,
            rate: p.f64("hurst.rate")?,
        },
        "piecewise-linear" => {
            let knots = p
                .str("hurst.knots")
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|pair| {
                    let (t, h) = pair
                        .split_once(':')
                        .ok_or_else(|| Error::config(format!("knot `{pair}` must be `t:h`")))?;
                    Ok((parse_number(t)?, parse_number(h)?))
                })
                .collect::<Result<Vec<_>>>()?;
            HurstKind::PiecewiseLinear { knots }
        }
        "step" => HurstKind::Step {
            breaks: parse_list(p.str("hurst.breaks"))?,
            values: parse_list(p.str("hurst.values"))?,
        },
        "table" => HurstKind::Table {
            t0: p.f64("hurst.t0")?,
            dt: p.f64("hurst.dt")?,
            values: parse_list(p.str("hurst.values"))?,
        },
        other => return Err(Error::config(format!("unknown hurst.kind `{other}`"))),
    };
    HurstFunction::new(kind)
}

/// A number, or `2^e` for a power of two.
fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(e) = s.strip_prefix("2^") {
        let e: i32 = e.parse().map_err(|_| Error::config(format!("bad exponent in `{s}`")))?;
        return Ok(2f64.powi(e));
    }
    s.parse().map_err(|_| Error::config(format!("`{s}` is not a number")))
}

/// Comma-separated numbers; empty input gives an empty list.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(parse_number).collect()
}

/// `2^p..2^q` (every power of two between, largest first) or a list.
pub fn parse_lags(s: &str) -> Result<Vec<f64>> {
    let mut v = if let Some((lo, hi)) = s.split_once("..") {
        let exp = |x: &str| -> Result<i32> {
            x.trim()
                .strip_prefix("2^")
                .and_then(|e| e.parse().ok())
                .ok_or_else(|| Error::config(format!("lag range bound `{x}` must be 2^e")))
        };
        let (p, q) = (exp(lo)?, exp(hi)?);
        (p.min(q)..=p.max(q)).map(|e| 2f64.powi(e)).collect()
    } else {
        parse_list(s)?
    };
    if v.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::config("lags must be positive"));
    }
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.synthesis, SynthesisConfig::default());
        assert_eq!(c.lags.len(), 6);
        assert_eq!(c.lags[0], 2f64.powi(-4));
        assert_eq!(c.out_dir, PathBuf::from("./out"));
        assert_eq!(c.psi, PsiTableConfig::default());
    }

    #[test]
    fn a_above_b_is_rejected() {
        let e = parse_config("a = 0.6\nb = 0.5\n").unwrap_err();
        assert!(e.to_string().contains("a must be ≤ b"), "{e}");
    }

    #[test]
    fn sine_hurst_range() {
        let c = parse_config("hurst.kind = sine\nhurst.mean = 0.5\nhurst.amp = 0.3 # comment\n").unwrap();
        assert!((c.hurst.a() - 0.2).abs() < 1e-15 && (c.hurst.b() - 0.8).abs() < 1e-15);
        assert_eq!((c.a, c.b), (c.hurst.a(), c.hurst.b()));
    }

    #[test]
    fn unknown_and_malformed() {
        let e = parse_config("bogus = 1").unwrap_err();
        assert!(e.to_string().contains("bogus"));
        assert!(matches!(parse_config("seed 3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config("\nseed = x"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_config("seed = 1\nseed = 2").is_err());
        assert!(parse_config("j_min = 0").is_err());
        assert!(parse_config("replicates = 0").is_err());
        assert!(parse_config("hurst.kind = constant\nhurst.value = 0.95").is_err());
    }

    #[test]
    fn other_kinds_and_lists() {
        let c = parse_config("hurst.kind = step\nhurst.breaks = 0.5\nhurst.values = 0.3, 0.7").unwrap();
        assert_eq!(c.hurst.eval(0.75), 0.7);
        let c = parse_config("hurst.kind = piecewise-linear\nhurst.knots = 0:0.3, 1:0.7").unwrap();
        assert!((c.hurst.eval(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(parse_lags("2^-2, 0.5").unwrap(), vec![0.5, 0.25]);
        assert_eq!(parse_lags("2^-4..2^-8").unwrap().len(), 5);
    }

    #[test]
    fn echo_is_complete_and_tracks_overrides() {
        let mut c = parse_config("j_max = 14").unwrap();
        assert_eq!(c.echo().len(), KEYS.len());
        assert!(c.echo().contains(&("j_max".to_string(), "14".to_string())));
        c.set_seed(7);
        assert!(c.echo().contains(&("seed".to_string(), "7".to_string())));
    }
}
