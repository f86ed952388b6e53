//! Subcommand orchestration: builds what a run needs from an
//! [`ExperimentConfig`] and writes CSV reports with a provenance header.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::analysis::holder::{estimate_pointwise_holder, smoothness_exponent};
use crate::analysis::stats::linear_fit;
use crate::analysis::tangent::tangent_convergence;
use crate::analysis::{truncated_a_n, truncated_g_n, Process};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::noise::NoiseLattice;
use crate::psi::{shared_table, PsiTable};
use crate::synthesis::{synthesize_residual, Series, SynthesisConfig};
use crate::theory::{condition_19, exponent_bound, region_raster};
use crate::validate::{render, run_suite, ValidateSettings};
use crate::wavelet::MeyerWindow;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    PsiTable,
    Synthesize,
    Residual,
    EstimateHolder,
    Tangent,
    Diagnostics,
    Region,
    Exponent,
    Validate,
}

impl Subcommand {
    pub const ALL: [Subcommand; 9] = [
        Subcommand::PsiTable,
        Subcommand::Synthesize,
        Subcommand::Residual,
        Subcommand::EstimateHolder,
        Subcommand::Tangent,
        Subcommand::Diagnostics,
        Subcommand::Region,
        Subcommand::Exponent,
        Subcommand::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::PsiTable => "psi-table",
            Subcommand::Synthesize => "synthesize",
            Subcommand::Residual => "residual",
            Subcommand::EstimateHolder => "estimate-holder",
            Subcommand::Tangent => "tangent",
            Subcommand::Diagnostics => "diagnostics",
            Subcommand::Region => "region",
            Subcommand::Exponent => "exponent",
            Subcommand::Validate => "validate",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::config(format!("unknown subcommand `{s}`")))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// False only when `validate` saw a failing criterion.
    pub passed: bool,
}

/// Runs `cmd` on a thread pool sized by `config.threads` (0 = all cores).
pub fn run(cmd: Subcommand, config: &ExperimentConfig) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    pool.install(|| Runner::new(cmd, config).dispatch())
}

struct Runner<'a> {
    cmd: Subcommand,
    config: &'a ExperimentConfig,
    files: Vec<PathBuf>,
    notes: Vec<String>,
}

impl<'a> Runner<'a> {
    fn new(cmd: Subcommand, config: &'a ExperimentConfig) -> Self {
        let mut notes = Vec::new();
        let h = &config.hurst;
        if matches!(cmd, Subcommand::Residual | Subcommand::Synthesize) {
            if !condition_19(h.a(), h.b()).unwrap_or(false) {
                notes.push(format!(
                    "note: condition_19 fails for (a, b) = ({}, {}); no smoothness guarantee for R",
                    h.a(),
                    h.b()
                ));
            }
            if !h.within_hypotheses() {
                notes.push(format!("note: H is only {}-Hölder, not of an order above b", h.beta()));
            }
        }
        Self { cmd, config, files: Vec::new(), notes }
    }

    fn dispatch(mut self) -> Result<Outcome> {
        fs::create_dir_all(&self.config.out_dir)?;
        let passed = match self.cmd {
            Subcommand::PsiTable => self.psi_table().map(|_| true),
            Subcommand::Synthesize => self.synthesize().map(|_| true),
            Subcommand::Residual => self.residual().map(|_| true),
            Subcommand::EstimateHolder => self.estimate_holder().map(|_| true),
            Subcommand::Tangent => self.tangent().map(|_| true),
            Subcommand::Diagnostics => self.diagnostics().map(|_| true),
            Subcommand::Region => self.region().map(|_| true),
            Subcommand::Exponent => self.exponent().map(|_| true),
            Subcommand::Validate => self.validate(),
        };
        match passed {
            Ok(passed) => Ok(Outcome { files: self.files, passed }),
            Err(e) => {
                for f in &self.files {
                    let _ = fs::remove_file(f);
                }
                Err(e)
            }
        }
    }

    fn table(&self) -> Result<Arc<PsiTable>> {
        let window = MeyerWindow::new(self.config.psi_smoothness)?;
        match &self.config.psi_cache {
            Some(path) => Ok(Arc::new(PsiTable::load_or_build(&window, &self.config.psi, path)?)),
            None => shared_table(&window, &self.config.psi),
        }
    }

    fn lattice(&self) -> NoiseLattice {
        NoiseLattice::new(self.config.seed)
    }

    /// Writes `name` through a temporary file; the body sees a writer
    /// positioned after the provenance header.
    fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let path = self.config.out_dir.join(name);
        let tmp = self.config.out_dir.join(format!(".{name}.tmp"));
        let result = (|| -> std::io::Result<()> {
            let mut w = BufWriter::new(File::create(&tmp)?);
            self.header(&mut w)?;
            body(&mut w)?;
            w.flush()?;
            Ok(())
        })();
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            return Err(e.into());
        }
        fs::rename(&tmp, &path)?;
        self.files.push(path);
        Ok(())
    }

    fn header(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "# mbmlab {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "# subcommand: {}", self.cmd)?;
        for (k, v) in self.config.echo() {
            // the output location does not affect the contents
            if k != "out_dir" {
                writeln!(w, "# {k} = {v}")?;
            }
        }
        for n in &self.notes {
            writeln!(w, "# {n}")?;
        }
        Ok(())
    }

    fn psi_table(&mut self) -> Result<()> {
        let table = self.table()?;
        let h = &self.config.hurst;
        let mut thetas = vec![h.a(), 0.5 * (h.a() + h.b()), h.b()];
        thetas.dedup();
        let mut slices = Vec::new();
        for &theta in &thetas {
            for n in 0..=table.max_order() {
                slices.push((theta, n, table.slice(theta, n)?));
            }
        }
        self.write("psi_table.csv", |w| {
            writeln!(w, "x,theta,n,value")?;
            for (theta, n, s) in &slices {
                for x in table.x_grid() {
                    writeln!(w, "{x:.16e},{theta:.16e},{n},{:.16e}", s.eval(x))?;
                }
            }
            Ok(())
        })?;
        let mut consts = Vec::new();
        for ell in [2, 3, 4] {
            for n in 0..=table.max_order() {
                consts.push((ell, n, table.localization_constant(ell, n)?));
            }
        }
        self.write("psi_localization.csv", |w| {
            writeln!(w, "ell,n,sup_weighted")?;
            for (ell, n, c) in &consts {
                writeln!(w, "{ell},{n},{c:.16e}")?;
            }
            Ok(())
        })
    }

    fn synthesize(&mut self) -> Result<()> {
        let table = self.table()?;
        let b = synthesize_residual(&self.config.hurst, &self.config.synthesis, &self.lattice(), &table)?;
        self.write("paths.csv", |w| b.write_csv(w))
    }

    fn residual(&mut self) -> Result<()> {
        let table = self.table()?;
        let cfg = &self.config.synthesis;
        let h = &self.config.hurst;
        let b = synthesize_residual(h, cfg, &self.lattice(), &table)?;
        let (lo, hi) = (cfg.t_grid[0], cfg.t_grid[cfg.t_grid.len() - 1]);
        let mut reports = Vec::new();
        for s in [Series::X, Series::Z, Series::R] {
            reports.push((s, smoothness_exponent(b.require(s)?, &cfg.t_grid, lo, hi, &self.config.lags)?));
        }
        let bound = exponent_bound(
            h.a(),
            h.b(),
            self.config.beta,
            self.config.ell,
            self.config.epsilon_slack,
            self.config.grid_resolution,
        )?;
        let cond = condition_19(h.a(), h.b())?;
        self.write("residual_ranges.csv", |w| {
            writeln!(w, "series,lag,mean_range")?;
            for (s, r) in &reports {
                for (lag, m) in r.lags.iter().zip(&r.mean_range) {
                    writeln!(w, "{},{lag:.16e},{m:.16e}", s.name())?;
                }
            }
            Ok(())
        })?;
        self.write("residual_summary.csv", |w| {
            writeln!(w, "field,value")?;
            for (s, r) in &reports {
                writeln!(w, "smoothness_{},{:.16e}", s.name(), r.exponent)?;
                writeln!(w, "zero_variance_{},{}", s.name(), r.zero_variance)?;
            }
            writeln!(w, "predicted_d,{:.16e}", bound.d)?;
            writeln!(w, "predicted_d_beta_b,{:.16e}", bound.d_beta_b)?;
            writeln!(w, "condition_19,{cond}")?;
            writeln!(w, "within_hypotheses,{}", h.within_hypotheses())
        })
    }

    fn estimate_holder(&mut self) -> Result<()> {
        let table = self.table()?;
        let h = &self.config.hurst;
        let lags = &self.config.lags;
        let mut grid: Vec<f64> = self
            .config
            .holder_points
            .iter()
            .flat_map(|&t| std::iter::once(t).chain(lags.iter().map(move |l| t + l)))
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let cfg = SynthesisConfig { t_grid: grid.clone(), split: false, ..self.config.synthesis.clone() };
        let b = synthesize_residual(h, &cfg, &self.lattice(), &table)?;
        let mut rows = Vec::new();
        for &t in &self.config.holder_points {
            for s in [Series::X, Series::Z] {
                rows.push((t, s, estimate_pointwise_holder(b.require(s)?, &grid, t, lags)?));
            }
        }
        self.write("holder.csv", |w| {
            writeln!(w, "t,hurst,series,exponent,slope,intercept")?;
            for (t, s, r) in &rows {
                writeln!(
                    w,
                    "{t:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}",
                    h.eval(*t),
                    s.name(),
                    r.exponent,
                    r.slope,
                    r.intercept
                )?;
            }
            Ok(())
        })
    }

    fn tangent(&mut self) -> Result<()> {
        let table = self.table()?;
        let c = self.config;
        let mut reports = Vec::new();
        for (p, name) in [(Process::X, "X"), (Process::Z, "Z")] {
            let r = tangent_convergence(p, &c.hurst, c.tangent_t, &c.tangent_rhos, &c.tangent_u, &c.synthesis, &self.lattice(), &table)?;
            reports.push((name, r));
        }
        self.write("tangent.csv", |w| {
            writeln!(w, "process,t,hurst_at_t,rho,error,noise")?;
            for (name, r) in &reports {
                for p in &r.points {
                    writeln!(w, "{name},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.t, r.hurst_at_t, p.rho, p.error, p.noise)?;
                }
            }
            Ok(())
        })
    }

    fn diagnostics(&mut self) -> Result<()> {
        let table = self.table()?;
        let c = self.config;
        let mut a_rows = Vec::new();
        let j_lo = (c.diag_j_max - 12).max(0);
        for n in 0..=c.diag_n {
            for j_max in (j_lo..=c.diag_j_max).step_by(4) {
                a_rows.push((n, j_max, truncated_a_n(&table, c.diag_t, c.diag_theta, n, j_max, c.diag_k_window)?));
            }
        }
        let g01 = truncated_g_n(&table, &c.hurst, c.diag_t, c.diag_t1, c.diag_theta, c.diag_n, c.diag_j_max, c.diag_k_window)?;
        let mut g_rows = Vec::new();
        for &dh in &c.tangent_rhos {
            g_rows.push((dh, truncated_g_n(&table, &c.hurst, c.diag_t, c.diag_t + dh, c.diag_theta, c.diag_n, c.diag_j_max, c.diag_k_window)?));
        }
        let lx: Vec<f64> = g_rows.iter().map(|r| r.0.ln()).collect();
        let ly: Vec<f64> = g_rows.iter().map(|r| r.1.ln()).collect();
        let slope = if g_rows.len() >= 2 { linear_fit(&lx, &ly).slope } else { f64::NAN };
        self.write("diagnostics.csv", |w| {
            writeln!(w, "quantity,n,j_max,t0,t1,value")?;
            for (n, j_max, v) in &a_rows {
                writeln!(w, "A,{n},{j_max},{:.16e},,{v:.16e}", c.diag_t)?;
            }
            writeln!(w, "G,{},{},{:.16e},{:.16e},{g01:.16e}", c.diag_n, c.diag_j_max, c.diag_t, c.diag_t1)?;
            for (dh, v) in &g_rows {
                writeln!(w, "G,{},{},{:.16e},{:.16e},{v:.16e}", c.diag_n, c.diag_j_max, c.diag_t, c.diag_t + dh)?;
            }
            writeln!(w, "G_loglog_slope,{},{},{:.16e},,{slope:.16e}", c.diag_n, c.diag_j_max, c.diag_t)
        })
    }

    fn region(&mut self) -> Result<()> {
        let raster = region_raster(self.config.region_resolution)?;
        self.write("region.csv", |w| raster.write_csv(w))
    }

    fn exponent(&mut self) -> Result<()> {
        let c = self.config;
        let r = exponent_bound(c.a, c.b, c.beta, c.ell, c.epsilon_slack, c.grid_resolution)?;
        self.write("exponent.csv", |w| r.write_csv(w))
    }

    fn validate(&mut self) -> Result<bool> {
        let table = self.table()?;
        let c = self.config;
        let settings = ValidateSettings {
            seed: c.seed,
            replicates: c.synthesis.replicates,
            j_min: c.synthesis.j_min,
            j_max: c.synthesis.j_max,
            k_window: c.synthesis.k_window,
        };
        let results = run_suite(&settings, &table);
        for r in &results {
            eprintln!(
                "criterion {:>2} {:<32} {} in {:.1} s",
                r.id,
                r.name,
                if r.passed { "PASS" } else { "FAIL" },
                r.elapsed.as_secs_f64()
            );
        }
        let report = render(&results);
        self.write("validate.csv", |w| w.write_all(report.as_bytes()))?;
        Ok(results.iter().all(|r| r.passed))
    }
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    crate::config::parse_config(&fs::read_to_string(path)?)
}
