use super::{CriticalPointEstimate, CriticalPointMethod};
use crate::ensemble::EnsembleCurve;
use crate::error::{Error, Result};

/// Index of the largest `|dI/dW|`, central differences at interior points.
fn steepest(w: &[f64], ipr: &[f64]) -> Option<usize> {
    (1..w.len().saturating_sub(1)).max_by(|&a, &b| {
        let da = ((ipr[a + 1] - ipr[a - 1]) / (w[a + 1] - w[a - 1])).abs();
        let db = ((ipr[b + 1] - ipr[b - 1]) / (w[b + 1] - w[b - 1])).abs();
        da.total_cmp(&db)
    })
}

/// `W_c^{(L)}` from IPR scans over absolute `W` under both boundary
/// conditions: the steepest rise (periodic) and the steepest dive (open)
/// must sit within one grid step; their midpoint is returned.
pub fn extract_wc_finite(obc: &EnsembleCurve, pbc: &EnsembleCurve) -> Result<CriticalPointEstimate> {
    if obc.axis_values != pbc.axis_values {
        return Err(Error::CriticalPoint("open and periodic scans use different W grids".into()));
    }
    if obc.size != pbc.size {
        return Err(Error::CriticalPoint("open and periodic scans use different sizes".into()));
    }
    let w = &obc.axis_values;
    let (io, ip) = match (steepest(w, &obc.mean_ipr), steepest(w, &pbc.mean_ipr)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::CriticalPoint("W grid needs at least three points".into())),
    };
    if io.abs_diff(ip) > 1 {
        return Err(Error::CriticalPoint(format!(
            "steepest IPR change at W={} (open) but W={} (periodic)",
            w[io], w[ip]
        )));
    }
    Ok(CriticalPointEstimate {
        value: 0.5 * (w[io] + w[ip]),
        size: obc.size,
        estimates: vec![
            (CriticalPointMethod::IprRisePbc, w[ip]),
            (CriticalPointMethod::IprDiveObc, w[io]),
        ],
    })
}

/// `ε_c^{(L)}` from the maximum of ξ and the minimum of the IPR, which
/// must coincide within one grid step; returns their geometric midpoint.
pub fn extract_epsc_finite(curve: &EnsembleCurve) -> Result<CriticalPointEstimate> {
    let n = curve.len();
    let arg = |v: &[f64], max: bool| {
        (0..n)
            .max_by(|&a, &b| if max { v[a].total_cmp(&v[b]) } else { v[b].total_cmp(&v[a]) })
            .ok_or_else(|| Error::CriticalPoint("empty scan".into()))
    };
    let ix = arg(&curve.mean_xi, true)?;
    let ii = arg(&curve.mean_ipr, false)?;
    for (name, i) in [("xi maximum", ix), ("IPR minimum", ii)] {
        if i == 0 || i + 1 == n {
            return Err(Error::CriticalPoint(format!(
                "{name} at the grid edge (distance {})",
                curve.axis_values[i]
            )));
        }
    }
    if ix.abs_diff(ii) > 1 {
        return Err(Error::CriticalPoint(format!(
            "xi maximum at {} but IPR minimum at {}",
            curve.axis_values[ix], curve.axis_values[ii]
        )));
    }
    let (a, b) = (curve.axis_values[ix], curve.axis_values[ii]);
    Ok(CriticalPointEstimate {
        value: (a * b).sqrt(),
        size: curve.size,
        estimates: vec![(CriticalPointMethod::XiMax, a), (CriticalPointMethod::IprMin, b)],
    })
}

/// Least-squares line of the estimates against `1/L`; returns the
/// intercept and its standard error (zero with only two sizes).
pub fn extrapolate_inverse_size(points: &[CriticalPointEstimate]) -> Result<(f64, f64)> {
    let n = points.len();
    if n < 2 {
        return Err(Error::CriticalPoint("need at least two sizes to extrapolate".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| 1.0 / p.size as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.value).collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::CriticalPoint("all sizes are equal".into()));
    }
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let stderr = if n > 2 {
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let s2 = rss / (nf - 2.0);
        (s2 * (1.0 / nf + mx * mx / sxx)).sqrt()
    } else {
        0.0
    };
    Ok((intercept, stderr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(size: usize, x: Vec<f64>, xi: Vec<f64>, ipr: Vec<f64>) -> EnsembleCurve {
        let n = x.len();
        EnsembleCurve {
            size,
            axis_values: x,
            mean_xi: xi,
            sem_xi: vec![0.0; n],
            mean_ipr: ipr,
            sem_ipr: vec![0.0; n],
            mean_gap: vec![1.0; n],
            sem_gap: vec![0.0; n],
            n_samples: vec![1; n],
        }
    }

    #[test]
    fn unimodal_peak_is_found_exactly() {
        let x: Vec<f64> = (1..=9).map(|i| i as f64 * 1e-3).collect();
        let xi: Vec<f64> = x.iter().map(|v| -(v - 4e-3f64).powi(2)).collect();
        let ipr: Vec<f64> = xi.iter().map(|v| -v).collect();
        let e = extract_epsc_finite(&curve(100, x, xi, ipr)).unwrap();
        assert!((e.value - 4e-3).abs() < 1e-15);
    }

    #[test]
    fn edge_extremum_is_an_error() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let xi = vec![4.0, 3.0, 2.0, 1.0];
        assert!(extract_epsc_finite(&curve(10, x, xi.clone(), xi)).is_err());
    }

    #[test]
    fn steepest_rise_and_dive_agree() {
        let w: Vec<f64> = (0..21).map(|i| 3.0 + 0.03 * i as f64).collect();
        let rise: Vec<f64> = w.iter().map(|v| 1.0 / (1.0 + (-(v - 3.3) * 40.0).exp())).collect();
        let dive: Vec<f64> = w.iter().map(|v| 0.5 - 0.3 / (1.0 + (-(v - 3.31) * 40.0).exp())).collect();
        let e = extract_wc_finite(&curve(987, w.clone(), rise.clone(), dive), &curve(987, w.clone(), rise.clone(), rise)).unwrap();
        assert!((e.value - 3.3).abs() < 0.03);
    }

    #[test]
    fn extrapolation_of_exact_line() {
        let pts: Vec<CriticalPointEstimate> = [100usize, 200, 400]
            .iter()
            .map(|&l| CriticalPointEstimate {
                value: 0.01 + 2.0 / l as f64,
                size: l,
                estimates: vec![],
            })
            .collect();
        let (c, s) = extrapolate_inverse_size(&pts).unwrap();
        assert!((c - 0.01).abs() < 1e-12 && s < 1e-12);
    }
}
