mod common;

use nhaas_core::recipes::eps_critical;
use nhaas_core::scaling::{
    bootstrap_ci, collapse_1d, collapse_2d_slice, hybrid_collapse, powerlaw_fit, quality, rescale, CollapseOptions,
};
use nhaas_core::store::curves_to_csv;
use nhaas_core::{
    critical_w, log_grid, run_sweep, run_sweep_with_workers, sample_phase, Axis, CollapseForm, ModelParams,
    Quantity, SampleRecord, Slice, SweepSpec, Window,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn aas_spec(n_samples: usize) -> SweepSpec {
    let base = ModelParams::new(55, 0.5, critical_w(1.0, 0.5), 0.0);
    let mut s = SweepSpec::new(base, Axis::Eps, log_grid(1e-4, 1e-1, 5), vec![34, 55, 89]);
    s.n_samples = n_samples;
    s
}

#[test]
fn phases_are_uniform_and_uncorrelated() {
    let n = 100_000u64;
    let mean_cos = (0..n).map(|k| sample_phase(9, k % 17, k / 17).cos()).sum::<f64>() / n as f64;
    assert!(mean_cos.abs() < 3.0 / (2.0 * n as f64).sqrt(), "{mean_cos}");

    let m = 10_000u64;
    let a: Vec<f64> = (0..m).map(|k| sample_phase(9, 3, 2 * k)).collect();
    let b: Vec<f64> = (0..m).map(|k| sample_phase(9, 3, 2 * k + 1)).collect();
    let (ma, mb) = (a.iter().sum::<f64>() / m as f64, b.iter().sum::<f64>() / m as f64);
    let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    assert!((cov / (va * vb).sqrt()).abs() < 0.03);
    assert_eq!(sample_phase(9, 3, 4), sample_phase(9, 3, 4));
}

#[test]
fn sweeps_are_reproducible_across_worker_counts() {
    let spec = aas_spec(30);
    let reference = curves_to_csv(&run_sweep(&spec).unwrap().curves);
    for workers in [1, 4, 8] {
        let out = run_sweep_with_workers(&spec, workers).unwrap();
        assert_eq!(curves_to_csv(&out.curves), reference, "workers={workers}");
    }
}

#[test]
fn sem_shrinks_as_inverse_root_n() {
    let mean_sem = |n| {
        let out = run_sweep(&aas_spec(n)).unwrap();
        let v: Vec<f64> = out.curves.iter().flat_map(|c| c.sem_xi.clone()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let ratio = mean_sem(400) / mean_sem(200);
    assert!((ratio * 2f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn clean_stark_sweep_has_no_spread() {
    let base = ModelParams::new(100, 0.5, 0.0, 0.0);
    let mut spec = SweepSpec::new(base, Axis::Eps, log_grid(1e-3, 1e-1, 4), vec![100, 150]);
    spec.n_samples = 1;
    let a = run_sweep(&spec).unwrap();
    spec.master_seed = 77;
    let b = run_sweep(&spec).unwrap();
    assert_eq!(a.curves, b.curves);
    assert!(a.curves.iter().all(|c| c.sem_xi.iter().chain(&c.sem_ipr).chain(&c.sem_gap).all(|&s| s == 0.0)));
}

#[test]
fn stark_curves_rise_then_become_size_independent() {
    let base = ModelParams::new(600, 0.5, 0.0, 0.0);
    let mut spec = SweepSpec::new(base, Axis::Eps, log_grid(1e-4, 1e-1, 31), vec![600, 900, 1200]);
    spec.n_samples = 1;
    let out = run_sweep(&spec).unwrap();
    for c in &out.curves {
        let peak = c.mean_xi.iter().cloned().fold(0.0, f64::max);
        assert!(c.mean_xi[0] < peak, "L={}", c.size);
    }
    let last: Vec<f64> = out.curves.iter().map(|c| *c.mean_xi.last().unwrap()).collect();
    assert!(last.iter().all(|v| (v / last[0] - 1.0).abs() < 1e-3), "{last:?}");

    let e = eps_critical(&out.curves).unwrap();
    assert!(e.points.windows(2).all(|w| w[1].value <= w[0].value));
    assert!(e.intercept.abs() < 2e-3);
}

#[test]
fn synthetic_collapse_recovers_nu() {
    let grid = log_grid(1e-3, 1.0, 61);
    let sizes = [100, 141, 200, 283, 400, 566, 800];
    for seed in 0..10 {
        let curves = common::synthetic_xi_curves(0.5, &sizes, &grid, 0.01, seed);
        let opts = CollapseOptions {
            window: Window::Full,
            ..CollapseOptions::default()
        };
        let fit = collapse_1d(&curves, Quantity::Xi, CollapseForm::Stark, &opts).unwrap();
        let nu = fit.get("nu").unwrap();
        assert!((nu - 0.5).abs() <= 0.03, "seed {seed}: {nu}");

        let floor = quality(&curves.iter().map(|c| rescale(c, Quantity::Xi, 0.5, -1.0)).collect::<Vec<_>>());
        assert!((fit.quality - floor).abs() <= 0.05 * floor, "seed {seed}: {} vs {floor}", fit.quality);
    }
}

#[test]
fn zero_slice_is_the_plain_collapse() {
    let mut at_wc = aas_spec(20);
    at_wc.grid = log_grid(1e-6, 1e-2, 9);
    let mut sliced = at_wc.clone();
    sliced.slice = Some(Slice { c: 0.0, nu_delta: 0.96 });
    let a = run_sweep(&at_wc).unwrap();
    let b = run_sweep(&sliced).unwrap();
    assert_eq!(a.curves, b.curves);
    let opts = CollapseOptions {
        window: Window::Full,
        ..CollapseOptions::default()
    };
    let fa = collapse_1d(&a.curves, Quantity::Xi, CollapseForm::AasAtWc, &opts).unwrap();
    let fb = collapse_2d_slice(&sliced, &b.curves, Quantity::Xi, &opts).unwrap();
    assert_eq!(fa.exponents, fb.exponents);
}

#[test]
fn hybrid_needs_several_deltas() {
    let base = ModelParams::new(89, 0.5, critical_w(1.0, 0.5) - 0.05, 0.0);
    let mut spec = SweepSpec::new(base, Axis::Eps, log_grid(1e-5, 1e-2, 8), vec![89]);
    spec.n_samples = 5;
    let c = run_sweep(&spec).unwrap().curves.remove(0);
    let opts = CollapseOptions::default();
    assert!(hybrid_collapse(&[(-0.05, c.clone())], 0.33, 0.96, &opts).is_err());
    assert!(hybrid_collapse(&[(-0.05, c.clone()), (0.05, c.clone()), (-0.1, c)], 0.33, 0.96, &opts).is_err());
}

#[test]
fn bootstrap_intervals_cover_the_truth() {
    let nu = 0.8;
    let grid = log_grid(1e-2, 1.0, 8);
    let fit = |curves: &[nhaas_core::EnsembleCurve]| -> nhaas_core::Result<Vec<f64>> {
        let c = &curves[0];
        Ok(vec![-powerlaw_fit(&c.axis_values, &c.mean_xi, (0.0, f64::INFINITY))?.slope])
    };
    let mut covered = 0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let mut records = Vec::new();
        for &d in &grid {
            for k in 0..30 {
                let z: f64 = (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0;
                let xi = d.powf(-nu) * (0.1 * z).exp();
                records.push(SampleRecord {
                    size: 100,
                    distance: d,
                    sample_index: k,
                    xi,
                    ipr: 1.0 / xi,
                    gap: 1.0,
                    phi: 0.0,
                });
            }
        }
        let ci = bootstrap_ci(&records, fit, 100, trial).unwrap();
        covered += usize::from(ci[0].contains(nu));
    }
    assert!(covered >= 60, "covered {covered}/100");
}
