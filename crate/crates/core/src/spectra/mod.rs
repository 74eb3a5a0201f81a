//! Ground and first-excited right eigenpairs under open and periodic
//! boundaries.
//!
//! Open chains are solved through the exact gauge-symmetrized tridiagonal
//! form; periodic rings through dense Hessenberg QR ([`solve_pbc`]) or the
//! transfer-matrix path used for large sweeps ([`solve_lowest`]).

pub mod band;
pub mod dense;
pub mod periodic;
pub mod tridiagonal;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, symmetrize_obc, Boundary, ModelParams};
pub use periodic::energy_order;

/// Components more than this many nats below the peak are flushed to zero.
pub const FLUSH_NATS: f64 = 700.0;

/// Pairs closer than this are flagged as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverPath {
    /// Symmetric tridiagonal solve plus log-domain gauge back-transform.
    ObcGauge,
    /// Dense Hessenberg QR plus inverse iteration.
    PbcDense,
    /// Transfer-matrix ground energy plus shift-invert Arnoldi.
    PbcTransfer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveMeta {
    /// Truncated SHA-256 of the parameter record.
    pub params_hash: String,
    pub path: SolverPath,
    pub iterations: usize,
    /// Ground-vector components flushed to zero in the log-domain transform.
    pub flushed: usize,
    pub degenerate: bool,
    /// `false` when only the lowest levels were computed.
    pub full_spectrum: bool,
}

/// Ordered eigenvalues and the lowest right eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    /// Ascending real part, ties by ascending imaginary part.
    pub energies: Vec<Complex64>,
    /// Ground right eigenvector with `Σ|ψ_j|² = 1`.
    pub ground_vec: Vec<Complex64>,
    pub excited_energy: Complex64,
    /// First-excited right eigenvector, when computed.
    pub excited_vec: Option<Vec<Complex64>>,
    pub meta: SolveMeta,
}

impl SpectralResult {
    pub fn spectral_radius(&self) -> f64 {
        self.energies.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }
}

fn params_hash(p: &ModelParams) -> String {
    let mut h = Sha256::new();
    for (k, v) in p.to_record() {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    hex::encode(&h.finalize()[..8])
}

/// Map a symmetric eigenvector (in log form) to the normalized right
/// eigenvector `ψ_j ∝ e^{g j} φ_j`, entirely in log space.
pub fn gauge_back_transform(lv: &tridiagonal::LogVector, g: f64) -> (Vec<Complex64>, usize) {
    let logs: Vec<f64> = lv
        .log_abs
        .iter()
        .enumerate()
        .map(|(j, l)| g * j as f64 + l)
        .collect();
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut flushed = 0;
    let shifted: Vec<f64> = logs
        .iter()
        .map(|&l| {
            if l - peak < -FLUSH_NATS {
                flushed += 1;
                f64::NEG_INFINITY
            } else {
                l - peak
            }
        })
        .collect();
    let log_norm = 0.5 * shifted.iter().map(|l| (2.0 * l).exp()).sum::<f64>().ln();
    let psi = shifted
        .iter()
        .zip(&lv.sign)
        .map(|(l, s)| Complex64::new(s * (l - log_norm).exp(), 0.0))
        .collect();
    (psi, flushed)
}

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn real_energies(e: &[f64]) -> Vec<Complex64> {
    e.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Full open-chain spectrum with ground and first-excited eigenvectors.
pub fn solve_obc(p: &ModelParams) -> Result<SpectralResult> {
    let sym = symmetrize_obc(p)?;
    let (levels, sweeps) = tridiagonal::ql_eigenvalues(&sym.diag, &sym.offdiag)?;
    obc_result(p, &sym.diag, &sym.offdiag, &levels, sweeps, true)
}

fn obc_lowest(p: &ModelParams) -> Result<SpectralResult> {
    let sym = symmetrize_obc(p)?;
    let levels = tridiagonal::lowest_eigenvalues(&sym.diag, &sym.offdiag, 2);
    obc_result(p, &sym.diag, &sym.offdiag, &levels, 0, false)
}

fn obc_result(
    p: &ModelParams,
    diag: &[f64],
    off: &[f64],
    levels: &[f64],
    iterations: usize,
    full_spectrum: bool,
) -> Result<SpectralResult> {
    let ground = tridiagonal::twisted_log_vector(diag, off, levels[0]);
    let (ground_vec, flushed) = gauge_back_transform(&ground, p.g);
    let (excited_energy, excited_vec) = match levels.get(1) {
        Some(&e1) if !full_spectrum => (Complex64::new(e1, 0.0), None),
        Some(&e1) => {
            let lv = tridiagonal::twisted_log_vector(diag, off, e1);
            (Complex64::new(e1, 0.0), Some(gauge_back_transform(&lv, p.g).0))
        }
        None => (Complex64::new(levels[0], 0.0), None),
    };
    let degenerate = levels.len() > 1 && (levels[1] - levels[0]).abs() < DEGENERACY_TOL;
    Ok(SpectralResult {
        energies: real_energies(levels),
        ground_vec,
        excited_energy,
        excited_vec,
        meta: SolveMeta {
            params_hash: params_hash(p),
            path: SolverPath::ObcGauge,
            iterations,
            flushed,
            degenerate,
            full_spectrum,
        },
    })
}

/// Full periodic spectrum by dense QR; eigenvectors of the two lowest
/// levels by inverse iteration against the ring matrix.
pub fn solve_pbc(p: &ModelParams) -> Result<SpectralResult> {
    if p.bc != Boundary::Periodic {
        return Err(Error::WrongBoundary { expected: "periodic" });
    }
    let h = build_hamiltonian(p)?;
    let n = h.size();
    let (mut energies, sweeps) = dense::eigenvalues(&h.to_dense(), n)?;
    energies.sort_by(energy_order);
    let rho = energies.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let nudge = Complex64::new(1e-10 * rho.max(f64::MIN_POSITIVE), 0.0);

    let (mut ground_vec, it0) = periodic::inverse_iteration(&h, energies[0], energies[0] + nudge)?;
    normalize(&mut ground_vec);
    let (excited_vec, it1) = periodic::inverse_iteration(&h, energies[1], energies[1] + nudge)?;
    Ok(SpectralResult {
        excited_energy: energies[1],
        ground_vec,
        excited_vec: Some(excited_vec),
        meta: SolveMeta {
            params_hash: params_hash(p),
            path: SolverPath::PbcDense,
            iterations: sweeps + it0 + it1,
            flushed: 0,
            degenerate: (energies[1] - energies[0]).norm() < DEGENERACY_TOL,
            full_spectrum: true,
        },
        energies,
    })
}

/// Dispatch on the boundary condition to the full solvers.
pub fn solve(p: &ModelParams) -> Result<SpectralResult> {
    match p.bc {
        Boundary::Open => solve_obc(p),
        Boundary::Periodic => solve_pbc(p),
    }
}

/// Rings at most this long go through the dense path in [`solve_lowest`].
const DENSE_RING_MAX: usize = 24;

/// Only the two lowest levels and the ground vector: Sturm bisection for
/// open chains, the transfer-matrix path for rings. `energies` then holds
/// just the computed levels and `meta.full_spectrum` is `false`.
pub fn solve_lowest(p: &ModelParams) -> Result<SpectralResult> {
    match p.bc {
        Boundary::Open => obc_lowest(p),
        Boundary::Periodic if p.size <= DENSE_RING_MAX => solve_pbc(p),
        Boundary::Periodic => lowest_ring(p),
    }
}

fn lowest_ring(p: &ModelParams) -> Result<SpectralResult> {
    let h = build_hamiltonian(p)?;
    let diag = &h.diag;
    let off = vec![-p.hopping; diag.len() - 1];
    let obc = tridiagonal::lowest_eigenvalues(diag, &off, 2);
    let (e0, bis) = periodic::ground_energy(diag, p.hopping, p.g, obc[0]);
    let scale = h.norm_inf();
    let delta = (0.5 * (obc[1] - obc[0])).max(1e-9 * scale);
    let (ritz, arn) = periodic::shift_invert_ritz(&h, e0 - delta)?;
    // drop the Ritz value that reproduces the ground level
    let ground_pos = ritz
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - e0).norm().total_cmp(&(b.1 - e0).norm()))
        .map(|(i, _)| i)
        .ok_or(Error::NoConvergence { index: 0, iterations: arn })?;
    let ground = Complex64::new(e0, 0.0);
    if (ritz[ground_pos] - ground).norm() > 1e-8 * scale {
        return Err(Error::NoConvergence { index: 0, iterations: arn });
    }
    let mut energies = vec![ground];
    energies.extend(ritz.iter().enumerate().filter(|(i, _)| *i != ground_pos).map(|(_, e)| *e));
    energies.sort_by(energy_order);
    let nudge = 1e-10 * scale;
    let (real_vec, inv) = periodic::inverse_iteration(&h, e0, e0 + nudge)?;
    let mut ground_vec: Vec<Complex64> = real_vec.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    normalize(&mut ground_vec);
    Ok(SpectralResult {
        excited_energy: energies[1],
        ground_vec,
        excited_vec: None,
        meta: SolveMeta {
            params_hash: params_hash(p),
            path: SolverPath::PbcTransfer,
            iterations: bis + arn + inv,
            flushed: 0,
            degenerate: (energies[1] - energies[0]).norm() < DEGENERACY_TOL,
            full_spectrum: false,
        },
        energies,
    })
}

/// `(E0, E1, ψ0)` under the ordering rule.
pub fn ground_pair(r: &SpectralResult) -> (Complex64, Complex64, &[Complex64]) {
    (r.energies[0], r.excited_energy, &r.ground_vec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_three_site_chain() {
        let r = solve_obc(&ModelParams::new(3, 0.0, 0.0, 0.0)).unwrap();
        let s = 2f64.sqrt();
        for (e, x) in r.energies.iter().zip([-s, 0.0, s]) {
            assert!((e.re - x).abs() < 1e-14 && e.im == 0.0);
        }
        let (e0, e1, psi) = ground_pair(&r);
        assert!((e0.re + s).abs() < 1e-14 && e1.re.abs() < 1e-14);
        let sign = psi[0].re.signum();
        for (a, b) in psi.iter().zip([0.5, s / 2.0, 0.5]) {
            assert!((a.re * sign - b).abs() < 1e-14);
        }
    }

    #[test]
    fn lowest_path_matches_full_obc() {
        let p = ModelParams::new(150, 0.9, 2.0, 0.01).with_phase(0.4);
        let full = solve_obc(&p).unwrap();
        let fast = solve_lowest(&p).unwrap();
        assert!((full.energies[0] - fast.energies[0]).norm() < 1e-12);
        assert!((full.excited_energy - fast.excited_energy).norm() < 1e-12);
        for (a, b) in full.ground_vec.iter().zip(&fast.ground_vec) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(!fast.meta.full_spectrum);
    }

    #[test]
    fn large_gauge_does_not_overflow() {
        let p = ModelParams::new(987, 1.5, 0.0, 0.0);
        let r = solve_obc(&p).unwrap();
        let norm: f64 = r.ground_vec.iter().map(|x| x.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(r.meta.flushed > 0);
        assert!(r.ground_vec.iter().all(|x| x.re.is_finite()));
    }

    #[test]
    fn transfer_path_matches_dense_ring() {
        for (n, g, w, eps, phi) in [(40, 0.5, 3.3, 0.0, 0.3), (55, 1.2, 1.0, 1e-3, 2.2), (30, 0.0, 1.0, 0.0, 1.0)] {
            let p = ModelParams::new(n, g, w, eps)
                .with_phase(phi)
                .with_boundary(Boundary::Periodic);
            let dense = solve_pbc(&p).unwrap();
            let fast = lowest_ring(&p).unwrap();
            assert!((dense.energies[0] - fast.energies[0]).norm() < 1e-9, "{n}");
            assert!(
                (dense.excited_energy - fast.excited_energy).norm() < 1e-9,
                "{n}: {} vs {}",
                dense.excited_energy,
                fast.excited_energy
            );
            let overlap: Complex64 = dense
                .ground_vec
                .iter()
                .zip(&fast.ground_vec)
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-9);
        }
    }
}
