use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{curves_from_samples, EnsembleCurve, SampleRecord};
use crate::error::{Error, Result};

/// Closed interval, 16th to 84th percentile of the bootstrap replicas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Half-width, used as a one-sigma error.
    pub fn sigma(&self) -> f64 {
        0.5 * self.width()
    }
}

/// Redraw each `(size, distance)` group of realizations with replacement.
pub fn resample<R: Rng>(records: &[SampleRecord], rng: &mut R) -> Vec<SampleRecord> {
    let mut out = Vec::with_capacity(records.len());
    let mut i = 0;
    while i < records.len() {
        let mut j = i;
        while j < records.len() && records[j].size == records[i].size && records[j].distance == records[i].distance {
            j += 1;
        }
        let n = j - i;
        for _ in 0..n {
            out.push(records[i + rng.random_range(0..n)]);
        }
        i = j;
    }
    out
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let k = pos.floor() as usize;
    let t = pos - k as f64;
    if k + 1 < sorted.len() {
        sorted[k] + t * (sorted[k + 1] - sorted[k])
    } else {
        sorted[k]
    }
}

/// Bootstrap 68% intervals of every value returned by `fit`.
///
/// Each replica resamples realizations within grid points, rebuilds the
/// curves and refits; replica `b` draws from its own ChaCha8 stream, so
/// the result does not depend on scheduling. At most 10% of replicas may
/// fail to fit.
pub fn bootstrap_ci<F>(records: &[SampleRecord], fit: F, n_boot: usize, seed: u64) -> Result<Vec<Interval>>
where
    F: Fn(&[EnsembleCurve]) -> Result<Vec<f64>> + Sync,
{
    if n_boot < 100 {
        return Err(Error::fit(format!("bootstrap needs n_boot >= 100, got {n_boot}")));
    }
    if records.is_empty() {
        return Err(Error::fit("no per-sample data to resample"));
    }
    let replicas: Vec<Option<Vec<f64>>> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let curves = curves_from_samples(&resample(records, &mut rng));
            fit(&curves).ok()
        })
        .collect();
    let ok: Vec<Vec<f64>> = replicas.into_iter().flatten().collect();
    if ok.len() * 10 < n_boot * 9 {
        return Err(Error::fit(format!(
            "only {} of {n_boot} bootstrap replicas could be fitted",
            ok.len()
        )));
    }
    let k = ok[0].len();
    if ok.iter().any(|v| v.len() != k) {
        return Err(Error::fit("fit returned a varying number of values"));
    }
    Ok((0..k)
        .map(|i| {
            let mut col: Vec<f64> = ok.iter().map(|v| v[i]).collect();
            col.sort_by(f64::total_cmp);
            Interval {
                lo: percentile(&col, 0.16),
                hi: percentile(&col, 0.84),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(values: &[f64]) -> Vec<SampleRecord> {
        values
            .iter()
            .enumerate()
            .map(|(k, &v)| SampleRecord {
                size: 10,
                distance: 0.1,
                sample_index: k,
                xi: v,
                ipr: v,
                gap: v,
                phi: 0.0,
            })
            .collect()
    }

    #[test]
    fn zero_variance_gives_zero_width() {
        let r = records(&[2.0; 20]);
        let ci = bootstrap_ci(&r, |c| Ok(vec![c[0].mean_xi[0]]), 100, 1).unwrap();
        assert_eq!(ci[0].width(), 0.0);
    }

    #[test]
    fn too_few_replicas_is_an_error() {
        let r = records(&[1.0, 2.0]);
        assert!(bootstrap_ci(&r, |c| Ok(vec![c[0].mean_xi[0]]), 1, 1).is_err());
    }

    #[test]
    fn mean_interval_matches_standard_error() {
        let vals: Vec<f64> = (0..400).map(|i| ((i * 7919) % 400) as f64 / 400.0).collect();
        let r = records(&vals);
        let ci = bootstrap_ci(&r, |c| Ok(vec![c[0].mean_xi[0]]), 400, 3).unwrap();
        let sem = c_sem(&vals);
        assert!((ci[0].sigma() / sem - 1.0).abs() < 0.2, "{} vs {sem}", ci[0].sigma());
    }

    fn c_sem(v: &[f64]) -> f64 {
        crate::ensemble::mean_sem(v).1
    }
}
