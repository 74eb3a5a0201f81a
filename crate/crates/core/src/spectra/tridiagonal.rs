//! Symmetric tridiagonal kernels: implicit-shift QL, Sturm bisection and
//! eigenvectors from a twisted factorization kept in log space.

use crate::error::{Error, Result};

/// All eigenvalues of the symmetric tridiagonal matrix `(diag, off)`,
/// ascending. Implicit-shift QL without eigenvector accumulation.
///
/// Returns the eigenvalues and the number of QL sweeps used.
pub fn ql_eigenvalues(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, usize)> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1), "off-diagonal length mismatch");
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(off);
    let cap = 50 * n.max(1);
    let mut sweeps = 0usize;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() + dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            sweeps += 1;
            if iter > 60 || sweeps > cap {
                return Err(Error::NoConvergence {
                    index: l,
                    iterations: sweeps,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok((d, sweeps))
}

/// Number of eigenvalues strictly below `x`, from the LDLᵀ pivots of
/// `T − x`. `off_sq` holds the squared off-diagonal.
pub fn sturm_count(diag: &[f64], off_sq: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if q == 0.0 { f64::EPSILON * (off_sq[i - 1].sqrt() + f64::MIN_POSITIVE) } else { q };
        q = (diag[i] - x) - off_sq[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `k` smallest eigenvalues by bisection on the Sturm count, each to
/// full double precision.
pub fn lowest_eigenvalues(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    let n = diag.len();
    let k = k.min(n);
    let off_sq: Vec<f64> = off.iter().map(|e| e * e).collect();
    let (glo, ghi) = gershgorin(diag, off);
    let pad = f64::EPSILON * (glo.abs().max(ghi.abs()) + 1.0);
    let (glo, ghi) = (glo - pad, ghi + pad);

    let mut out = Vec::with_capacity(k);
    let mut floor = glo;
    for idx in 0..k {
        let (mut lo, mut hi) = (floor, ghi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
            if hi - lo <= tol {
                break;
            }
            if sturm_count(diag, &off_sq, mid) > idx {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = 0.5 * (lo + hi);
        out.push(value);
        floor = lo;
    }
    out
}

/// Eigenvector of a symmetric tridiagonal matrix stored as `ln|z_j|` and
/// `sign(z_j)`, unnormalized (the twist component is `z_r = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct LogVector {
    pub log_abs: Vec<f64>,
    pub sign: Vec<f64>,
    /// Twist index where the factorization was anchored.
    pub twist: usize,
}

/// Eigenvector for the eigenvalue `lambda` from the twisted LDLᵀ/UDUᵀ
/// factorization of `T − λ`.
///
/// Components are built multiplicatively outward from the twist index,
/// so exponentially small tails keep full relative accuracy; nothing
/// underflows because only logarithms are accumulated.
pub fn twisted_log_vector(diag: &[f64], off: &[f64], lambda: f64) -> LogVector {
    let n = diag.len();
    if n == 1 {
        return LogVector {
            log_abs: vec![0.0],
            sign: vec![1.0],
            twist: 0,
        };
    }
    let tiny = |scale: f64| f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut dp = vec![0.0; n];
    let mut dm = vec![0.0; n];
    dp[0] = diag[0] - lambda;
    for k in 1..n {
        let prev = if dp[k - 1] == 0.0 { tiny(off[k - 1].abs()) } else { dp[k - 1] };
        dp[k] = (diag[k] - lambda) - off[k - 1] * off[k - 1] / prev;
    }
    dm[n - 1] = diag[n - 1] - lambda;
    for k in (0..n - 1).rev() {
        let next = if dm[k + 1] == 0.0 { tiny(off[k].abs()) } else { dm[k + 1] };
        dm[k] = (diag[k] - lambda) - off[k] * off[k] / next;
    }
    let twist = (0..n)
        .min_by(|&a, &b| {
            let ga = (dp[a] + dm[a] - (diag[a] - lambda)).abs();
            let gb = (dp[b] + dm[b] - (diag[b] - lambda)).abs();
            ga.total_cmp(&gb)
        })
        .unwrap_or(0);

    let mut log_abs = vec![0.0; n];
    let mut sign = vec![1.0; n];
    for k in (0..twist).rev() {
        let piv = if dp[k] == 0.0 { tiny(off[k].abs()) } else { dp[k] };
        let ratio = -off[k] / piv;
        log_abs[k] = log_abs[k + 1] + ratio.abs().ln();
        sign[k] = sign[k + 1] * ratio.signum();
    }
    for k in twist + 1..n {
        let piv = if dm[k] == 0.0 { tiny(off[k - 1].abs()) } else { dm[k] };
        let ratio = -off[k - 1] / piv;
        log_abs[k] = log_abs[k - 1] + ratio.abs().ln();
        sign[k] = sign[k - 1] * ratio.signum();
    }
    LogVector {
        log_abs,
        sign,
        twist,
    }
}
