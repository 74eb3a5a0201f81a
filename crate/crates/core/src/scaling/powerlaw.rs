use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fit `y ∝ x^slope` on the points with `lo ≤ x ≤ hi`.
pub fn powerlaw_fit(xs: &[f64], ys: &[f64], window: (f64, f64)) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::fit("x and y lengths differ"));
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x < window.0 || x > window.1 {
            continue;
        }
        if !(x > 0.0 && y > 0.0) {
            return Err(Error::fit(format!("non-positive data point ({x}, {y})")));
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let n = lx.len();
    if n < 4 {
        return Err(Error::fit(format!("window holds {n} points, need at least 4")));
    }
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::fit("all x values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(PowerLawFit {
        slope,
        stderr,
        intercept,
        points: n,
    })
}
