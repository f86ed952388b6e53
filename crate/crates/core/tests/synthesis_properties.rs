use std::sync::Arc;

use mbmlab::analysis::stats::jarque_bera;
use mbmlab::analysis::variance_constant;
use mbmlab::hurst::HurstFunction;
use mbmlab::noise::NoiseLattice;
use mbmlab::psi::{shared_table, PsiTable, PsiTableConfig};
use mbmlab::synthesis::{synthesize_mbm, synthesize_residual, Paths, Series, SynthesisConfig};
use mbmlab::wavelet::MeyerWindow;

fn table() -> Arc<PsiTable> {
    shared_table(&MeyerWindow::default(), &PsiTableConfig::default()).unwrap()
}

fn cfg(t_grid: Vec<f64>, replicates: usize) -> SynthesisConfig {
    SynthesisConfig { t_grid, replicates, ..SynthesisConfig::default() }
}

#[test]
fn mbm_variance_follows_the_local_constant() {
    let h = HurstFunction::sine(0.5, 0.3).unwrap();
    let ts = vec![0.25, 0.5, 1.0];
    // j_min = -8 drops ~ε^{2-2θ} of the variance, several percent once θ nears 0.8
    let deep = SynthesisConfig { j_min: -20, ..cfg(ts.clone(), 2000) };
    let b = synthesize_mbm(&h, &deep, &NoiseLattice::new(11), &table()).unwrap();
    let x = b.require(Series::X).unwrap();
    for (i, &t) in ts.iter().enumerate() {
        let emp = x.column(i).iter().map(|v| v * v).sum::<f64>() / 2000.0;
        let ht = h.eval(t);
        let want = variance_constant(ht).unwrap() * t.powf(2.0 * ht);
        assert!((emp / want - 1.0).abs() < 0.07, "t={t}: {emp} vs {want}");
    }
}

#[test]
fn x_at_one_is_gaussian() {
    let h = HurstFunction::sine(0.5, 0.3).unwrap();
    let b = synthesize_mbm(&h, &cfg(vec![1.0], 2000), &NoiseLattice::new(12), &table()).unwrap();
    let jb = jarque_bera(&b.require(Series::X).unwrap().column(0));
    assert!(jb.passes(0.01), "{jb:?}");
}

fn worst_over_sd(small: &Paths, big: &Paths, i: usize) -> f64 {
    let col = big.column(i);
    let sd = (col.iter().map(|v| v * v).sum::<f64>() / col.len() as f64).sqrt();
    (0..col.len()).map(|r| (small.get(r, i) - big.get(r, i)).abs()).fold(0.0, f64::max) / sd
}

#[test]
fn truncation_tails_are_small() {
    let h = HurstFunction::sine(0.5, 0.3).unwrap();
    let ts = vec![0.1, 0.37, 0.6, 1.0];
    let lattice = NoiseLattice::new(13);
    let base = cfg(ts.clone(), 200);
    let run = |j_max, k_window| {
        let c = SynthesisConfig { j_max, k_window, ..base.clone() };
        synthesize_residual(&h, &c, &lattice, &table()).unwrap()
    };
    let (b12_50, b12_80, b14_80) = (run(12, 50), run(12, 80), run(14, 80));
    for s in [Series::X, Series::Z] {
        for (i, &t) in ts.iter().enumerate() {
            // a wider k-window only adds terms far out in Ψ's tail
            let dk = worst_over_sd(b12_50.require(s).unwrap(), b12_80.require(s).unwrap(), i);
            assert!(dk < 1e-3, "{} k-window at t={t}: {dk}", s.name());
            // two more fine scales add independent variance of order 2^{-2·12·H};
            // Z's anchor terms sit near k/2^j = 0 and carry H(0)
            let dj = worst_over_sd(b12_80.require(s).unwrap(), b14_80.require(s).unwrap(), i);
            let tail = 2f64.powf(-12.0 * h.eval(t).min(h.eval(0.0)));
            assert!(dj < 4.0 * tail, "{} scales at t={t}: {dj} vs {tail}", s.name());
        }
    }
}
