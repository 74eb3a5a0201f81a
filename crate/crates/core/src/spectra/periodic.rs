//! Lowest eigenpairs of the periodic chain without dense diagonalization.
//!
//! With `M(λ) = Π_j [[(d_j − λ)/J, −1], [1, 0]]` the ring eigenvalues are
//! the roots of `tr M(λ) = 2 cosh(gL)`. The trace is a real-rooted
//! polynomial, so no eigenvalue has a real part below its smallest real
//! crossing `λ*`, and `λ*` itself is the ground energy. The first excited
//! level comes from shift-invert Arnoldi just below `λ*`.

use num_complex::Complex64;

use super::band::{self, RingLu, Scalar};
use super::dense;
use crate::error::{Error, Result};
use crate::model::HamiltonianMatrix;

/// `ln tr M(λ)`, or `−∞` when the trace is not positive.
pub fn log_transfer_trace(diag: &[f64], hopping: f64, lambda: f64) -> f64 {
    let (mut a, mut b, mut c, mut d) = (1.0, 0.0, 0.0, 1.0);
    let mut log_scale = 0.0;
    for &dj in diag {
        let t = (dj - lambda) / hopping;
        // [[t, -1], [1, 0]] · [[a, b], [c, d]]
        let (na, nb) = (t * a - c, t * b - d);
        c = a;
        d = b;
        a = na;
        b = nb;
        let s = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
        if s > 1e150 || s < 1e-150 {
            a /= s;
            b /= s;
            c /= s;
            d /= s;
            log_scale += s.ln();
        }
    }
    let tr = a + d;
    if tr > 0.0 {
        log_scale + tr.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `ln(2 cosh x)` without overflow.
fn log_two_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (-2.0 * x).exp().ln_1p()
}

/// Ground energy of the ring: the smallest real solution of
/// `tr M(λ) = 2 cosh(gL)`. `upper` must be an upper bound known to lie
/// at or above the smallest open-chain level.
///
/// Returns `λ*` and the number of bisection steps.
pub fn ground_energy(diag: &[f64], hopping: f64, g: f64, upper: f64) -> (f64, usize) {
    let n = diag.len();
    let target = log_two_cosh(g * n as f64);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut lo = dmin - 2.0 * hopping * g.cosh() - hopping;
    let mut step = hopping;
    while log_transfer_trace(diag, hopping, lo) <= target {
        lo -= step;
        step *= 2.0;
    }
    let mut hi = upper;
    let mut steps = 0;
    while steps < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        steps += 1;
        if log_transfer_trace(diag, hopping, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), steps)
}

/// Ascending real part, ties by ascending imaginary part.
pub fn energy_order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Deterministic, non-degenerate start vector.
pub(crate) fn start_vector(n: usize, attempt: u32) -> Vec<f64> {
    let w = 0.754_877_666_246_692_7 + attempt as f64 * 0.318_309_886_183_790_7;
    (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * w * 12.9898).sin())
        .collect()
}

/// Shift-invert Arnoldi around the real shift `sigma`; returns Ritz values
/// mapped back to eigenvalues of `h`, sorted by [`energy_order`], once the
/// two lowest have stabilized.
pub fn shift_invert_ritz(h: &HamiltonianMatrix, sigma: f64) -> Result<(Vec<Complex64>, usize)> {
    let n = h.size();
    let m_max = n.min(160);
    let lu = RingLu::new(h, sigma);
    let scale = h.norm_inf().max(f64::MIN_POSITIVE);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max + 1);
    let mut v0 = start_vector(n, 0);
    let nv = band::norm2(&v0);
    v0.iter_mut().for_each(|x| *x /= nv);
    basis.push(v0);
    // column-major (m_max + 1) × m_max Hessenberg
    let mut hess = vec![0.0; (m_max + 1) * m_max];
    let hidx = |i: usize, j: usize| j * (m_max + 1) + i;

    let mut previous: Option<(Complex64, Complex64)> = None;
    let mut checkpoint = 12.min(m_max);
    for j in 0..m_max {
        let mut w = basis[j].clone();
        lu.solve(&mut w);
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
                hess[hidx(i, j)] += c;
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = band::norm2(&w);
        let col_scale: f64 = (0..=j).map(|i| hess[hidx(i, j)].abs()).fold(0.0, f64::max);
        let breakdown = beta <= 1e-14 * col_scale;
        if !breakdown {
            hess[hidx(j + 1, j)] = beta;
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(w);
        }
        let m = j + 1;
        if m == checkpoint || breakdown || m == m_max {
            let mut small = vec![0.0; m * m];
            for r in 0..m {
                for c in 0..m {
                    small[r * m + c] = hess[hidx(r, c)];
                }
            }
            let (theta, _) = dense::eigenvalues(&small, m)?;
            let mut ritz: Vec<Complex64> = theta
                .into_iter()
                .filter(|t| t.norm() > 0.0)
                .map(|t| Complex64::new(sigma, 0.0) + t.inv())
                .collect();
            ritz.sort_by(energy_order);
            if ritz.len() >= 2 {
                let pair = (ritz[0], ritz[1]);
                let tol = 1e-11 * scale;
                let settled = previous
                    .map(|(a, b)| (a - pair.0).norm() <= tol && (b - pair.1).norm() <= tol)
                    .unwrap_or(false);
                if settled || breakdown || m == n {
                    return Ok((ritz, m));
                }
                previous = Some(pair);
            }
            if breakdown {
                break;
            }
            checkpoint = (checkpoint + 10).min(m_max);
        }
    }
    Err(Error::NoConvergence {
        index: 1,
        iterations: m_max,
    })
}

/// Right eigenvector for `lambda` by inverse iteration at `shift` against
/// the ring matrix. Converges at relative residual `1e-10·‖H‖∞`, at most
/// 100 steps per start, two starts.
pub fn inverse_iteration<T: Scalar>(
    h: &HamiltonianMatrix,
    lambda: T,
    shift: T,
) -> Result<(Vec<T>, usize)> {
    let n = h.size();
    let lu = RingLu::new(h, shift);
    let tol = 1e-10 * h.norm_inf().max(f64::MIN_POSITIVE);
    let mut total = 0;
    let mut best = f64::INFINITY;
    for attempt in 0..2 {
        let mut x: Vec<T> = start_vector(n, attempt + 1)
            .into_iter()
            .map(T::from_real)
            .collect();
        for _ in 0..100 {
            total += 1;
            lu.solve(&mut x);
            let nx = band::norm2(&x);
            if !nx.is_finite() || nx == 0.0 {
                break;
            }
            x.iter_mut().for_each(|v| *v = v.scale(1.0 / nx));
            let r = band::residual(h, lambda, &x);
            best = best.min(r);
            if r <= tol {
                return Ok((x, total));
            }
        }
    }
    Err(Error::InverseIterationStagnated { residual: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, Boundary, ModelParams};

    #[test]
    fn free_ring_ground_energy() {
        for n in [4usize, 7, 20] {
            let d = vec![0.0; n];
            let (lam, _) = ground_energy(&d, 1.0, 0.0, 0.0);
            assert!((lam + 2.0).abs() < 1e-12, "{lam}");
        }
    }

    #[test]
    fn nonreciprocal_free_ring_ground_is_real() {
        // eigenvalues -(e^{-g} w^k + e^{g} w^{-k}); k = 0 gives -2cosh g
        let n = 10;
        let g: f64 = 0.8;
        let (lam, _) = ground_energy(&vec![0.0; n], 1.0, g, -2.0 * (std::f64::consts::PI / 11.0).cos());
        assert!((lam + 2.0 * g.cosh()).abs() < 1e-12, "{lam}");
    }

    #[test]
    fn arnoldi_finds_lowest_circulant_levels() {
        let n = 40;
        let g: f64 = 0.5;
        let p = ModelParams::new(n, g, 0.0, 0.0).with_boundary(Boundary::Periodic);
        let h = build_hamiltonian(&p).unwrap();
        let (ritz, _) = shift_invert_ritz(&h, -2.0 * g.cosh() - 0.01).unwrap();
        let k = std::f64::consts::TAU / n as f64;
        let expect = Complex64::new(-2.0 * g.cosh() * k.cos(), -2.0 * g.sinh() * k.sin());
        assert!((ritz[0].re + 2.0 * g.cosh()).abs() < 1e-10);
        assert!((ritz[1] - expect).norm() < 1e-10, "{:?} vs {expect}", ritz[1]);
    }
}
