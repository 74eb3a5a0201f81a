//! Banded LU with partial pivoting for the periodic chain.
//!
//! A ring of `n` sites becomes pentadiagonal after the reordering
//! `0, n−1, 1, n−2, 2, …`, so cyclic systems are solved in `O(n)`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::model::HamiltonianMatrix;

/// Field operations needed by the band solver.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

const KL: usize = 2;
const KU: usize = 2;
const WIDTH: usize = 2 * KL + KU + 1;

/// Site visited at position `k` of the ring ordering.
pub fn ring_site(n: usize, k: usize) -> usize {
    if k % 2 == 0 {
        k / 2
    } else {
        n - 1 - k / 2
    }
}

/// Inverse of [`ring_site`].
pub fn ring_position(n: usize, site: usize) -> usize {
    if 2 * site < n {
        2 * site
    } else {
        2 * (n - 1 - site) + 1
    }
}

/// LU factors of `A − σ` for a tridiagonal-plus-corners matrix in ring order.
#[derive(Debug, Clone)]
pub struct RingLu<T> {
    n: usize,
    // row i holds columns i−KL ..= i+KL+KU
    band: Vec<[T; WIDTH]>,
    mult: Vec<[T; KL]>,
    pivot: Vec<usize>,
    /// Number of exactly-zero pivots replaced by a tiny value.
    pub perturbed: usize,
}

impl<T: Scalar> RingLu<T> {
    /// Factor `H − σ`.
    pub fn new(h: &HamiltonianMatrix, sigma: T) -> Self {
        let n = h.size();
        let zero = T::from_real(0.0);
        let mut band = vec![[zero; WIDTH]; n];
        let mut put = |i: usize, j: usize, v: f64| {
            let (pi, pj) = (ring_position(n, i), ring_position(n, j));
            let off = pj + KL - pi;
            band[pi][off] = band[pi][off] + T::from_real(v);
        };
        for i in 0..n {
            put(i, i, h.diag[i]);
        }
        for i in 0..n.saturating_sub(1) {
            put(i, i + 1, h.upper[i]);
            put(i + 1, i, h.lower[i]);
        }
        if let Some((top_right, bottom_left)) = h.corner {
            put(0, n - 1, top_right);
            put(n - 1, 0, bottom_left);
        }
        for row in band.iter_mut() {
            row[KL] = row[KL] - sigma;
        }
        let tiny = f64::EPSILON * h.norm_inf().max(f64::MIN_POSITIVE);
        let mut lu = RingLu {
            n,
            band,
            mult: vec![[zero; KL]; n],
            pivot: vec![0; n],
            perturbed: 0,
        };
        lu.factor(tiny);
        lu
    }

    fn at(&self, i: usize, j: usize) -> T {
        self.band[i][j + KL - i]
    }

    fn factor(&mut self, tiny: f64) {
        let n = self.n;
        for k in 0..n {
            let last = (k + KL).min(n - 1);
            let mut p = k;
            let mut best = self.at(k, k).modulus();
            for i in k + 1..=last {
                let v = self.at(i, k).modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.pivot[k] = p;
            let jmax = (k + KL + KU).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.band[k][j + KL - k];
                    self.band[k][j + KL - k] = self.band[p][j + KL - p];
                    self.band[p][j + KL - p] = a;
                }
            }
            if best == 0.0 {
                self.band[k][KL] = T::from_real(tiny);
                self.perturbed += 1;
            }
            let piv = self.band[k][KL];
            for i in k + 1..=last {
                let m = self.band[i][k + KL - i] / piv;
                self.mult[k][i - k - 1] = m;
                self.band[i][k + KL - i] = T::from_real(0.0);
                if m.modulus() != 0.0 {
                    for j in k + 1..=jmax {
                        let u = self.band[k][j + KL - k];
                        self.band[i][j + KL - i] = self.band[i][j + KL - i] - m * u;
                    }
                }
            }
        }
    }

    /// Solve `(H − σ) x = b` for `b` in site order, in place.
    pub fn solve(&self, b: &mut [T]) {
        let n = self.n;
        let mut y: Vec<T> = (0..n).map(|k| b[ring_site(n, k)]).collect();
        for k in 0..n {
            let p = self.pivot[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            for i in k + 1..=(k + KL).min(n - 1) {
                y[i] = y[i] - self.mult[k][i - k - 1] * yk;
            }
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in k + 1..=(k + KL + KU).min(n - 1) {
                s = s - self.band[k][j + KL - k] * y[j];
            }
            y[k] = s / self.band[k][KL];
        }
        for (k, v) in y.into_iter().enumerate() {
            b[ring_site(n, k)] = v;
        }
    }
}

/// `y = H x` for a tridiagonal-plus-corners matrix.
pub fn apply<T: Scalar>(h: &HamiltonianMatrix, x: &[T]) -> Vec<T> {
    let n = h.size();
    let mut y: Vec<T> = (0..n).map(|i| x[i].scale(h.diag[i])).collect();
    for i in 0..n.saturating_sub(1) {
        y[i] = y[i] + x[i + 1].scale(h.upper[i]);
        y[i + 1] = y[i + 1] + x[i].scale(h.lower[i]);
    }
    if let Some((top_right, bottom_left)) = h.corner {
        y[0] = y[0] + x[n - 1].scale(top_right);
        y[n - 1] = y[n - 1] + x[0].scale(bottom_left);
    }
    y
}

pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.modulus().powi(2)).sum::<f64>().sqrt()
}

/// `‖Hx − λx‖₂ / ‖x‖₂`.
pub fn residual<T: Scalar>(h: &HamiltonianMatrix, lambda: T, x: &[T]) -> f64 {
    let hx = apply(h, x);
    let r: Vec<T> = hx.iter().zip(x).map(|(&a, &b)| a - lambda * b).collect();
    norm2(&r) / norm2(x)
}
