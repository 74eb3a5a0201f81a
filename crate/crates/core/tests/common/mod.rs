#![allow(dead_code)]

use nhaas_core::{EnsembleCurve, HamiltonianMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coefficients `c[0..=n]` of `det(λ − A)` by Faddeev–LeVerrier.
pub fn char_poly(a: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = vec![0.0; n * n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                next[i * n + j] = (0..n).map(|l| a[i * n + l] * m[l * n + j]).sum();
            }
            next[i * n + i] += c[n - k + 1];
        }
        m = next;
        let tr: f64 = (0..n).map(|i| (0..n).map(|l| a[i * n + l] * m[l * n + i]).sum::<f64>()).sum();
        c[n - k] = -tr / k as f64;
    }
    c
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ci in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ci;
    }
    (p, dp)
}

/// All roots of a monic real polynomial, Aberth–Ehrlich iteration.
pub fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let r = 1.0 + c[..n].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..2000 {
        let mut biggest = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let w = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = w / (Complex64::new(1.0, 0.0) - w * s);
            z[i] -= step;
            biggest = biggest.max(step.norm());
        }
        if biggest < 1e-15 * r {
            break;
        }
    }
    z
}

/// `(det(A − λ), tr((A − λ)^{-1}))` by complex Gaussian elimination.
fn det_and_trace_inv(a: &[f64], n: usize, lambda: Complex64) -> (Complex64, Complex64) {
    let mut m: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for i in 0..n {
        m[i * n + i] -= lambda;
    }
    let mut inv: Vec<Complex64> = (0..n * n)
        .map(|k| if k / n == k % n { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
        .collect();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x * n + col].norm().total_cmp(&m[y * n + col].norm())).unwrap();
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
                inv.swap(col * n + j, piv * n + j);
            }
            det = -det;
        }
        let d = m[col * n + col];
        det *= d;
        if d.norm() == 0.0 {
            return (det, Complex64::new(f64::INFINITY, 0.0));
        }
        for j in 0..n {
            m[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * n + col];
                for j in 0..n {
                    let (mc, ic) = (m[col * n + j], inv[col * n + j]);
                    m[r * n + j] -= f * mc;
                    inv[r * n + j] -= f * ic;
                }
            }
        }
    }
    let tr = (0..n).map(|i| inv[i * n + i]).sum();
    (det, tr)
}

/// Eigenvalues of a small dense real matrix: polynomial roots polished by
/// Newton steps on the determinant.
pub fn oracle_eigenvalues(a: &[f64], n: usize) -> Vec<Complex64> {
    let mut z = poly_roots(&char_poly(a, n));
    for zi in z.iter_mut() {
        for _ in 0..50 {
            let (_, tr) = det_and_trace_inv(a, n, *zi);
            if !tr.is_finite() || tr.norm() == 0.0 {
                break;
            }
            // d/dλ ln det(A − λ) = −tr((A − λ)^{-1})
            let step = tr.inv();
            *zi += step;
            if step.norm() < 1e-16 * (1.0 + zi.norm()) {
                break;
            }
        }
    }
    z
}

/// Largest distance under a greedy nearest matching of two equal-size sets.
pub fn match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&x, &y| a[x].re.total_cmp(&a[y].re));
    for &i in &order {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, v)| (j, (a[i] - v).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// `‖Hv − Ev‖₂ / ‖v‖₂`.
pub fn residual(h: &HamiltonianMatrix, e: Complex64, v: &[Complex64]) -> f64 {
    let n = h.size();
    let a = h.to_dense();
    let mut r2 = 0.0;
    for i in 0..n {
        let hv: Complex64 = (0..n).map(|j| v[j] * a[i * n + j]).sum();
        r2 += (hv - e * v[i]).norm_sqr();
    }
    let v2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    (r2 / v2).sqrt()
}

/// Spectrum of the clean ring: `−J(e^{−g} e^{ik} + e^{g} e^{−ik})`, `k = 2πm/L`.
pub fn circulant_spectrum(l: usize, hopping: f64, g: f64) -> Vec<Complex64> {
    (0..l)
        .map(|m| {
            let k = 2.0 * std::f64::consts::PI * m as f64 / l as f64;
            -(Complex64::from_polar((-g).exp(), k) + Complex64::from_polar(g.exp(), -k)) * hopping
        })
        .collect()
}

/// Curves obeying `ξ = L·(1 + d L^{1/ν})^{-ν}` exactly, optionally with
/// multiplicative Gaussian noise of relative size `noise` (reported as the SEM).
pub fn synthetic_xi_curves(nu: f64, sizes: &[usize], grid: &[f64], noise: f64, seed: u64) -> Vec<EnsembleCurve> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sizes
        .iter()
        .map(|&size| {
            let l = size as f64;
            let xi: Vec<f64> = grid
                .iter()
                .map(|d| {
                    let clean = l * (1.0 + d * l.powf(1.0 / nu)).powf(-nu);
                    let u: f64 = {
                        // Box–Muller
                        let (a, b): (f64, f64) = (rng.random(), rng.random());
                        (-2.0 * (1.0 - a).ln()).sqrt() * (2.0 * std::f64::consts::PI * b).cos()
                    };
                    clean * (1.0 + noise * u)
                })
                .collect();
            let n = grid.len();
            EnsembleCurve {
                size,
                axis_values: grid.to_vec(),
                sem_xi: xi.iter().map(|v| v * noise).collect(),
                mean_xi: xi.clone(),
                mean_ipr: xi.iter().map(|v| 1.0 / v).collect(),
                sem_ipr: vec![0.0; n],
                mean_gap: vec![1.0; n],
                sem_gap: vec![0.0; n],
                n_samples: vec![1; n],
            }
        })
        .collect()
}
