//! Dense real nonsymmetric eigenvalues: balancing, Householder reduction
//! to upper Hessenberg form, and Francis double-shift QR.
//!
//! Matrices are row-major `n × n` slices.

use num_complex::Complex64;

use crate::error::{Error, Result};

const RADIX: f64 = 2.0;

/// Diagonal similarity scaling that equalizes row and column norms.
pub fn balance(a: &mut [f64], n: usize) {
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].abs();
                    r += a[i * n + j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[i * n + j] *= g;
                    }
                    for j in 0..n {
                        a[j * n + i] *= f;
                    }
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place. Entries
/// below the first subdiagonal are zeroed.
pub fn hessenberg(a: &mut [f64], n: usize) {
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let mut alpha = 0.0;
        for i in k + 1..n {
            alpha += a[i * n + k] * a[i * n + k];
        }
        let alpha = alpha.sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let beta = if x0 > 0.0 { -alpha } else { alpha };
        // v = x - beta e1, normalized so that H = I - 2 v vᵀ / (vᵀv)
        for i in k + 1..n {
            v[i] = a[i * n + k];
        }
        v[k + 1] -= beta;
        let vnorm_sq: f64 = v[k + 1..n].iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sq;
        // A <- H A (rows k+1..n)
        for j in k..n {
            let mut s = 0.0;
            for i in k + 1..n {
                s += v[i] * a[i * n + j];
            }
            s *= tau;
            for i in k + 1..n {
                a[i * n + j] -= s * v[i];
            }
        }
        // A <- A H (columns k+1..n)
        for i in 0..n {
            let row = &mut a[i * n..(i + 1) * n];
            let mut s = 0.0;
            for j in k + 1..n {
                s += row[j] * v[j];
            }
            s *= tau;
            for j in k + 1..n {
                row[j] -= s * v[j];
            }
        }
        a[(k + 1) * n + k] = beta;
        for i in k + 2..n {
            a[i * n + k] = 0.0;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR
/// (eigenvalues only; the active window shrinks as eigenvalues deflate).
///
/// Returns the eigenvalues in deflation order and the number of QR sweeps.
pub fn hqr(a: &mut [f64], n: usize) -> Result<(Vec<Complex64>, usize)> {
    let idx = |i: usize, j: usize| i * n + j;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[idx(i, j)].abs();
        }
    }
    let cap = 50 * n.max(1);
    let mut sweeps = 0usize;
    let mut t = 0.0;
    // nn is one past the last row of the active block
    let mut nn = n;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let last = nn - 1;
            // look for a single small subdiagonal element
            let mut l = last;
            while l >= 1 {
                let mut s = a[idx(l - 1, l - 1)].abs() + a[idx(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[idx(l, l - 1)].abs() + s == s {
                    a[idx(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[idx(last, last)];
            if l == last {
                wr[last] = x + t;
                wi[last] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[idx(last - 1, last - 1)];
            let mut w = a[idx(last, last - 1)] * a[idx(last - 1, last)];
            if l + 1 == last {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    wr[last - 1] = x + z;
                    wr[last] = if z != 0.0 { x - w / z } else { x + z };
                    wi[last - 1] = 0.0;
                    wi[last] = 0.0;
                } else {
                    wr[last - 1] = x + p;
                    wr[last] = x + p;
                    wi[last - 1] = -z;
                    wi[last] = z;
                }
                nn -= 2;
                break;
            }
            if its >= 60 || sweeps >= cap {
                return Err(Error::NoConvergence {
                    index: last,
                    iterations: sweeps,
                });
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=last {
                    a[idx(i, i)] -= x;
                }
                let s = a[idx(last, last - 1)].abs() + a[idx(last - 1, last - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;

            // look for two consecutive small subdiagonal elements
            let mut m = last - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[idx(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[idx(m + 1, m)] + a[idx(m, m + 1)];
                q = a[idx(m + 1, m + 1)] - z - rr - ss;
                r = a[idx(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[idx(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[idx(m - 1, m - 1)].abs() + z.abs() + a[idx(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=last {
                a[idx(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[idx(i, i - 3)] = 0.0;
                }
            }
            let mut k = m;
            while k < last {
                if k != m {
                    p = a[idx(k, k - 1)];
                    q = a[idx(k + 1, k - 1)];
                    r = if k + 1 != last { a[idx(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[idx(k, k - 1)] = -a[idx(k, k - 1)];
                        }
                    } else {
                        a[idx(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=last {
                        let mut pp = a[idx(k, j)] + q * a[idx(k + 1, j)];
                        if k + 1 != last {
                            pp += r * a[idx(k + 2, j)];
                            a[idx(k + 2, j)] -= pp * z;
                        }
                        a[idx(k + 1, j)] -= pp * y;
                        a[idx(k, j)] -= pp * x;
                    }
                    let mmin = last.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * a[idx(i, k)] + y * a[idx(i, k + 1)];
                        if k + 1 != last {
                            pp += z * a[idx(i, k + 2)];
                            a[idx(i, k + 2)] -= pp * r;
                        }
                        a[idx(i, k + 1)] -= pp * q;
                        a[idx(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    let ev = wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect();
    Ok((ev, sweeps))
}

/// All eigenvalues of a dense real matrix (balance, reduce, QR).
pub fn eigenvalues(matrix: &[f64], n: usize) -> Result<(Vec<Complex64>, usize)> {
    let mut a = matrix.to_vec();
    balance(&mut a, n);
    hessenberg(&mut a, n);
    hqr(&mut a, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn two_by_two_rotation_has_imaginary_pair() {
        let (ev, _) = eigenvalues(&[0.0, -1.0, 1.0, 0.0], 2).unwrap();
        let ev = sorted(ev);
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn upper_triangular_diagonal_is_returned() {
        let n = 5;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                a[i * n + j] = if i == j { i as f64 - 2.0 } else { 0.3 * (i + j) as f64 };
            }
        }
        let ev = sorted(eigenvalues(&a, n).unwrap().0);
        for (i, e) in ev.iter().enumerate() {
            assert!((e.re - (i as f64 - 2.0)).abs() < 1e-12);
            assert!(e.im.abs() < 1e-12);
        }
    }

    #[test]
    fn hessenberg_preserves_trace_and_shape() {
        let n = 7;
        let a: Vec<f64> = (0..n * n).map(|k| ((k * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let mut h = a.clone();
        hessenberg(&mut h, n);
        let tr_a: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let tr_h: f64 = (0..n).map(|i| h[i * n + i]).sum();
        assert!((tr_a - tr_h).abs() < 1e-12);
        for i in 0..n {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h[i * n + j], 0.0);
            }
        }
        let frob = |m: &[f64]| m.iter().map(|x| x * x).sum::<f64>();
        assert!((frob(&a) - frob(&h)).abs() < 1e-10);
    }

    #[test]
    fn companion_matrix_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let a = [6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let ev = sorted(eigenvalues(&a, 3).unwrap().0);
        for (k, e) in ev.iter().enumerate() {
            assert!((e.re - (k + 1) as f64).abs() < 1e-10);
        }
    }
}
