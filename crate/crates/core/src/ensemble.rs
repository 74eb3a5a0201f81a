//! Random-phase ensembles on parameter grids.
//!
//! Every `(size, grid point, sample)` triple is solved independently; the
//! per-point reduction always runs in sample order, so results do not
//! depend on the number of worker threads.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{critical_w, ModelParams};
use crate::observables::ObservableSample;
use crate::scaling::Quantity;
use crate::spectra::solve_lowest;

/// Parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// Grid holds `W − W_c(g)`.
    #[serde(rename = "W")]
    W,
    /// Grid holds `ε − ε_c` with `ε_c = 0`.
    #[serde(rename = "eps")]
    Eps,
    /// Grid holds absolute `W` values, for scans across the transition.
    #[serde(rename = "W-abs")]
    WAbsolute,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::W => "W",
            Axis::Eps => "eps",
            Axis::WAbsolute => "W-abs",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "W" | "w" => Ok(Axis::W),
            "eps" | "epsilon" => Ok(Axis::Eps),
            "W-abs" | "w-abs" => Ok(Axis::WAbsolute),
            other => Err(Error::Parse(format!(
                "unknown axis `{other}` (expected W, eps or W-abs)"
            ))),
        }
    }
}

/// Size-dependent quasiperiodic offset `W = W_c(g) + c·L^{−1/ν_δ}` used by
/// two-variable slices of an `eps` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub c: f64,
    pub nu_delta: f64,
}

impl Slice {
    pub fn w_at(&self, base: &ModelParams, size: usize) -> f64 {
        critical_w(base.hopping, base.g) + self.c * (size as f64).powf(-1.0 / self.nu_delta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Model parameters; `phi` is ignored and `L` is taken from `sizes`.
    pub base: ModelParams,
    pub axis: Axis,
    /// Distances from the critical point, ascending and positive.
    pub grid: Vec<f64>,
    pub sizes: Vec<usize>,
    pub n_samples: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<Slice>,
}

impl SweepSpec {
    pub fn new(base: ModelParams, axis: Axis, grid: Vec<f64>, sizes: Vec<usize>) -> Self {
        SweepSpec {
            base,
            axis,
            grid,
            sizes,
            n_samples: 1000,
            master_seed: 0,
            slice: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.grid.is_empty() {
            return bad("empty grid".into());
        }
        if self.grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return bad("grid values must be positive".into());
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("grid must be strictly ascending".into());
        }
        if self.sizes.is_empty() {
            return bad("no sizes".into());
        }
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1".into());
        }
        if self.slice.is_some() && self.axis != Axis::Eps {
            return bad("slices apply to eps sweeps only".into());
        }
        for &size in &self.sizes {
            self.params_at(size, 0, 0.0)?.validate()?;
        }
        Ok(())
    }

    /// Parameters of grid point `point` at size `size` and phase `phi`.
    pub fn params_at(&self, size: usize, point: usize, phi: f64) -> Result<ModelParams> {
        let d = self.grid[point];
        let mut p = ModelParams {
            size,
            ..self.base
        }
        .with_phase(phi);
        match self.axis {
            Axis::W => p.w = critical_w(p.hopping, p.g) + d,
            Axis::WAbsolute => p.w = d,
            Axis::Eps => {
                p.eps = d;
                if let Some(s) = self.slice {
                    p.w = s.w_at(&self.base, size);
                }
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Lattice phase of one realization: uniform on `[0, 2π)`, from a
/// counter-addressed ChaCha8 stream per grid point.
pub fn sample_phase(master_seed: u64, point_index: u64, sample_index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(point_index);
    rng.set_word_pos(u128::from(sample_index) * 2);
    let phi = TAU * rng.random::<f64>();
    if phi >= TAU {
        0.0
    } else {
        phi
    }
}

/// Disorder-averaged observables of one size along the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleCurve {
    pub size: usize,
    pub axis_values: Vec<f64>,
    pub mean_xi: Vec<f64>,
    pub sem_xi: Vec<f64>,
    pub mean_ipr: Vec<f64>,
    pub sem_ipr: Vec<f64>,
    pub mean_gap: Vec<f64>,
    pub sem_gap: Vec<f64>,
    /// Successful samples per point.
    pub n_samples: Vec<usize>,
}

impl EnsembleCurve {
    pub fn len(&self) -> usize {
        self.axis_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis_values.is_empty()
    }

    pub fn mean(&self, q: Quantity) -> &[f64] {
        match q {
            Quantity::Xi => &self.mean_xi,
            Quantity::Ipr => &self.mean_ipr,
            Quantity::Gap => &self.mean_gap,
        }
    }

    pub fn sem(&self, q: Quantity) -> &[f64] {
        match q {
            Quantity::Xi => &self.sem_xi,
            Quantity::Ipr => &self.sem_ipr,
            Quantity::Gap => &self.sem_gap,
        }
    }

    /// Points with `lo ≤ distance ≤ hi`.
    pub fn restrict(&self, lo: f64, hi: f64) -> EnsembleCurve {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.axis_values[i] >= lo && self.axis_values[i] <= hi)
            .collect();
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        EnsembleCurve {
            size: self.size,
            axis_values: pick(&self.axis_values),
            mean_xi: pick(&self.mean_xi),
            sem_xi: pick(&self.sem_xi),
            mean_ipr: pick(&self.mean_ipr),
            sem_ipr: pick(&self.sem_ipr),
            mean_gap: pick(&self.mean_gap),
            sem_gap: pick(&self.sem_gap),
            n_samples: keep.iter().map(|&i| self.n_samples[i]).collect(),
        }
    }
}

/// Observables of a single realization, tagged with its coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub size: usize,
    pub distance: f64,
    pub sample_index: usize,
    pub xi: f64,
    pub ipr: f64,
    pub gap: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleFailure {
    pub size: usize,
    pub point: usize,
    pub sample: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub curves: Vec<EnsembleCurve>,
    /// Per-realization observables in `(size, point, sample)` order.
    pub samples: Vec<SampleRecord>,
    /// Tolerated failures (at most 1% per point).
    pub failures: Vec<SampleFailure>,
}

/// Mean and standard error of the mean.
pub fn mean_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn solve_sample(spec: &SweepSpec, size: usize, point_index: u64, point: usize, sample: usize) -> Result<ObservableSample> {
    let phi = sample_phase(spec.master_seed, point_index, sample as u64);
    let p = spec.params_at(size, point, phi)?;
    let r = solve_lowest(&p)?;
    ObservableSample::from_spectrum(&r, phi)
}

/// Run the sweep on the current rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let n_grid = spec.grid.len();
    let ns = spec.n_samples;
    let per_size = n_grid * ns;
    let total = spec.sizes.len() * per_size;

    let results: Vec<Result<ObservableSample>> = (0..total)
        .into_par_iter()
        .map(|k| {
            let (si, rest) = (k / per_size, k % per_size);
            let (point, sample) = (rest / ns, rest % ns);
            let point_index = (si * n_grid + point) as u64;
            solve_sample(spec, spec.sizes[si], point_index, point, sample)
        })
        .collect();

    let budget = ns / 100;
    let mut curves = Vec::with_capacity(spec.sizes.len());
    let mut samples = Vec::with_capacity(total);
    let mut failures = Vec::new();
    let mut chunks = results.into_iter();
    for &size in &spec.sizes {
        let mut curve = EnsembleCurve {
            size,
            axis_values: spec.grid.clone(),
            mean_xi: Vec::with_capacity(n_grid),
            sem_xi: Vec::with_capacity(n_grid),
            mean_ipr: Vec::with_capacity(n_grid),
            sem_ipr: Vec::with_capacity(n_grid),
            mean_gap: Vec::with_capacity(n_grid),
            sem_gap: Vec::with_capacity(n_grid),
            n_samples: Vec::with_capacity(n_grid),
        };
        for (point, &distance) in spec.grid.iter().enumerate() {
            let mut ok = Vec::with_capacity(ns);
            let mut first_err = None;
            let mut failed = 0;
            for (sample, r) in chunks.by_ref().take(ns).enumerate() {
                match r {
                    Ok(o) => {
                        samples.push(SampleRecord {
                            size,
                            distance,
                            sample_index: sample,
                            xi: o.xi,
                            ipr: o.ipr,
                            gap: o.gap,
                            phi: o.phi,
                        });
                        ok.push(o);
                    }
                    Err(e) => {
                        failed += 1;
                        failures.push(SampleFailure {
                            size,
                            point,
                            sample,
                            message: e.to_string(),
                        });
                        first_err.get_or_insert(Error::Sample {
                            size,
                            point,
                            sample,
                            source: Box::new(e),
                        });
                    }
                }
            }
            if failed > budget || ok.is_empty() {
                return Err(Error::FailureBudget {
                    size,
                    point,
                    failed,
                    total: ns,
                    first: Box::new(first_err.expect("at least one failure")),
                });
            }
            let col = |f: fn(&ObservableSample) -> f64| mean_sem(&ok.iter().map(f).collect::<Vec<_>>());
            let (m, s) = col(|o| o.xi);
            curve.mean_xi.push(m);
            curve.sem_xi.push(s);
            let (m, s) = col(|o| o.ipr);
            curve.mean_ipr.push(m);
            curve.sem_ipr.push(s);
            let (m, s) = col(|o| o.gap);
            curve.mean_gap.push(m);
            curve.sem_gap.push(s);
            curve.n_samples.push(ok.len());
        }
        curves.push(curve);
    }
    Ok(SweepOutput {
        curves,
        samples,
        failures,
    })
}

/// Run the sweep on a dedicated pool of `workers` threads.
pub fn run_sweep_with_workers(spec: &SweepSpec, workers: usize) -> Result<SweepOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(spec))
}

/// Rebuild curves from per-sample records, e.g. a bootstrap resample.
/// Records must be grouped by size and distance.
pub fn curves_from_samples(records: &[SampleRecord]) -> Vec<EnsembleCurve> {
    let mut curves: Vec<EnsembleCurve> = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let (size, distance) = (records[i].size, records[i].distance);
        let mut j = i;
        while j < records.len() && records[j].size == size && records[j].distance == distance {
            j += 1;
        }
        let group = &records[i..j];
        let stat = |f: fn(&SampleRecord) -> f64| mean_sem(&group.iter().map(f).collect::<Vec<_>>());
        if curves.last().map(|c| c.size) != Some(size) {
            curves.push(EnsembleCurve {
                size,
                axis_values: vec![],
                mean_xi: vec![],
                sem_xi: vec![],
                mean_ipr: vec![],
                sem_ipr: vec![],
                mean_gap: vec![],
                sem_gap: vec![],
                n_samples: vec![],
            });
        }
        let c = curves.last_mut().expect("just pushed");
        c.axis_values.push(distance);
        let (m, s) = stat(|r| r.xi);
        c.mean_xi.push(m);
        c.sem_xi.push(s);
        let (m, s) = stat(|r| r.ipr);
        c.mean_ipr.push(m);
        c.sem_ipr.push(s);
        let (m, s) = stat(|r| r.gap);
        c.mean_gap.push(m);
        c.sem_gap.push(s);
        c.n_samples.push(group.len());
        i = j;
    }
    curves
}
