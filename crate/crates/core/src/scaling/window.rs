use serde::{Deserialize, Serialize};

use super::Quantity;
use crate::ensemble::EnsembleCurve;
use crate::error::{Error, Result};

/// Distance range entering a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Window {
    Full,
    Range { lo: f64, hi: f64 },
    /// Longest run where the largest-size curve has a log-log slope
    /// within `tol` (relative) of the run median.
    StableSlope { tol: f64 },
    /// Per curve, the points strictly right of the ξ maximum up to `hi`.
    RightOfPeak { hi: f64 },
}

impl Default for Window {
    fn default() -> Self {
        Window::StableSlope { tol: 0.1 }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Longest stretch of at least four points whose consecutive log-log
/// slopes stay within `tol·|median|` of their median. Ties go to larger x.
pub fn stable_slope_range(xs: &[f64], ys: &[f64], tol: f64) -> Option<(f64, f64)> {
    let slopes: Vec<f64> = (0..xs.len().saturating_sub(1))
        .map(|i| (ys[i + 1].ln() - ys[i].ln()) / (xs[i + 1].ln() - xs[i].ln()))
        .collect();
    let m = slopes.len();
    let mut best: Option<(usize, usize)> = None;
    for a in 0..m {
        for b in (a + 2)..m {
            let run = &slopes[a..=b];
            if run.iter().any(|s| !s.is_finite()) {
                break;
            }
            let med = median(&mut run.to_vec());
            if med != 0.0 && run.iter().all(|s| (s - med).abs() <= tol * med.abs()) {
                let better = match best {
                    None => true,
                    Some((ba, bb)) => b - a >= bb - ba,
                };
                if better {
                    best = Some((a, b));
                }
            }
        }
    }
    best.map(|(a, b)| (xs[a], xs[b + 1]))
}

impl Window {
    /// Restrict `curves` for a fit of `q`; returns the restricted curves
    /// and the overall distance range used.
    pub fn apply(&self, curves: &[EnsembleCurve], q: Quantity) -> Result<(Vec<EnsembleCurve>, (f64, f64))> {
        let range = match *self {
            Window::Full => (f64::NEG_INFINITY, f64::INFINITY),
            Window::Range { lo, hi } => (lo, hi),
            Window::StableSlope { tol } => {
                let largest = curves
                    .iter()
                    .max_by_key(|c| c.size)
                    .ok_or_else(|| Error::fit("no curves"))?;
                stable_slope_range(&largest.axis_values, largest.mean(q), tol)
                    .ok_or_else(|| Error::fit(format!("no stable power-law window for {q}")))?
            }
            Window::RightOfPeak { hi } => {
                let mut out = Vec::with_capacity(curves.len());
                let mut lo = f64::INFINITY;
                for c in curves {
                    let peak = c
                        .mean_xi
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.total_cmp(b.1))
                        .map(|(i, _)| i)
                        .ok_or_else(|| Error::fit("empty curve"))?;
                    let start = c.axis_values.get(peak + 1).copied().unwrap_or(f64::INFINITY);
                    lo = lo.min(start);
                    out.push(c.restrict(start, hi));
                }
                return Ok((out, (lo, hi)));
            }
        };
        let out = curves.iter().map(|c| c.restrict(range.0, range.1)).collect::<Vec<_>>();
        let lo = out
            .iter()
            .flat_map(|c| c.axis_values.first())
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let hi = out
            .iter()
            .flat_map(|c| c.axis_values.last())
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        Ok((out, (lo, hi)))
    }
}
