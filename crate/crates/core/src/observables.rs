//! Localization length, inverse participation ratio and energy gap of a
//! ground state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{ground_pair, SpectralResult};

/// Observables of one disorder realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSample {
    pub xi: f64,
    pub ipr: f64,
    pub gap: f64,
    /// Localization center, 1-based, not rounded.
    pub jc: f64,
    pub phi: f64,
}

impl ObservableSample {
    pub fn from_spectrum(r: &SpectralResult, phi: f64) -> Result<Self> {
        let (e0, e1, psi) = ground_pair(r);
        let (xi, jc) = localization_length(psi)?;
        Ok(ObservableSample {
            xi,
            ipr: ipr(psi)?,
            gap: energy_gap(e0, e1),
            jc,
            phi,
        })
    }
}

/// `(ξ, j_c)` with `j_c = Σ j|ψ_j|²` and `ξ² = Σ (j − j_c)²|ψ_j|²`, sites
/// numbered from 1. The input must be normalized to within `1e-10`.
pub fn localization_length(psi: &[Complex64]) -> Result<(f64, f64)> {
    let w: Vec<f64> = psi.iter().map(|x| x.norm_sqr()).collect();
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sq: total });
    }
    let jc: f64 = w.iter().enumerate().map(|(j, p)| (j + 1) as f64 * p).sum();
    let var: f64 = w
        .iter()
        .enumerate()
        .map(|(j, p)| ((j + 1) as f64 - jc).powi(2) * p)
        .sum();
    Ok((var.max(0.0).sqrt(), jc))
}

/// `Σ|ψ|⁴ / (Σ|ψ|²)²`; scale invariant.
pub fn ipr(psi: &[Complex64]) -> Result<f64> {
    let peak = psi.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if peak == 0.0 || !peak.is_finite() {
        return Err(Error::ZeroVector);
    }
    let (mut s2, mut s4) = (0.0, 0.0);
    for x in psi {
        let p = (x / peak).norm_sqr();
        s2 += p;
        s4 += p * p;
    }
    Ok(s4 / (s2 * s2))
}

/// `|E1 − E0|`.
pub fn energy_gap(e0: Complex64, e1: Complex64) -> f64 {
    (e1 - e0).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn point_mass() {
        let mut v = vec![0.0; 10];
        v[4] = 1.0;
        assert_eq!(localization_length(&real(&v)).unwrap(), (0.0, 5.0));
        assert_eq!(ipr(&real(&v)).unwrap(), 1.0);
    }

    #[test]
    fn uniform_four_sites() {
        let v = real(&[0.5; 4]);
        let (xi, jc) = localization_length(&v).unwrap();
        assert!((jc - 2.5).abs() < 1e-15);
        assert!((xi - 5f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((ipr(&v).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_point_mass_at_edges() {
        let mut v = vec![0.0; 100];
        v[0] = std::f64::consts::FRAC_1_SQRT_2;
        v[99] = std::f64::consts::FRAC_1_SQRT_2;
        let (xi, jc) = localization_length(&real(&v)).unwrap();
        assert!((jc - 50.5).abs() < 1e-12);
        assert!((xi - 49.5).abs() < 1e-12);
    }

    #[test]
    fn ipr_hand_value() {
        assert!((ipr(&real(&[1.0, 2.0, 1.0])).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            localization_length(&real(&[1.0, 1.0])),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(ipr(&real(&[0.0, 0.0])), Err(Error::ZeroVector)));
    }

    #[test]
    fn gap_is_modulus() {
        let g = energy_gap(Complex64::new(-1.0, 0.0), Complex64::new(-0.7, -0.4));
        assert!((g - 0.5).abs() < 1e-15);
        assert_eq!(energy_gap(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)), 0.0);
    }
}
