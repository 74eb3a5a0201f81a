//! Lattice model: parameters, the nonreciprocal Hamiltonian and its
//! open-boundary gauge-symmetrized form.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inverse golden mean, (√5 − 1)/2.
pub const GOLDEN_ALPHA: f64 = 0.618_033_988_749_894_9;

/// Thermodynamic-limit quasiperiodic critical point `2 J e^g`.
pub fn critical_w(hopping: f64, g: f64) -> f64 {
    2.0 * hopping * g.exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    #[serde(rename = "OBC")]
    Open,
    #[serde(rename = "PBC")]
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "OBC",
            Boundary::Periodic => "PBC",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "OBC" | "OPEN" => Ok(Boundary::Open),
            "PBC" | "PERIODIC" => Ok(Boundary::Periodic),
            other => Err(Error::Parse(format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// Full parameter set of the chain.
///
/// Serialized field names follow the flat record keys `J, g, W, eps, L,
/// alpha, phi, bc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Hopping energy `J`.
    #[serde(rename = "J")]
    pub hopping: f64,
    /// Nonreciprocal strength `g`; right hops carry `e^{g}`, left hops `e^{-g}`.
    pub g: f64,
    /// Quasiperiodic amplitude `W`.
    #[serde(rename = "W")]
    pub w: f64,
    /// Stark gradient (energy per site).
    pub eps: f64,
    /// Number of sites.
    #[serde(rename = "L")]
    pub size: usize,
    pub alpha: f64,
    /// Lattice phase in `[0, 2π)`.
    pub phi: f64,
    pub bc: Boundary,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            hopping: 1.0,
            g: 0.0,
            w: 0.0,
            eps: 0.0,
            size: 2,
            alpha: GOLDEN_ALPHA,
            phi: 0.0,
            bc: Boundary::Open,
        }
    }
}

impl ModelParams {
    pub fn new(size: usize, g: f64, w: f64, eps: f64) -> Self {
        Self {
            size,
            g,
            w,
            eps,
            ..Self::default()
        }
    }

    pub fn with_boundary(mut self, bc: Boundary) -> Self {
        self.bc = bc;
        self
    }

    /// Sets the phase, wrapping it into `[0, 2π)`.
    pub fn with_phase(mut self, phi: f64) -> Self {
        let wrapped = phi.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        self.phi = if wrapped >= TAU { 0.0 } else { wrapped };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.size < 2 {
            return bad(format!("L must be at least 2, got {}", self.size));
        }
        if !(self.hopping > 0.0 && self.hopping.is_finite()) {
            return bad(format!("J must be positive, got {}", self.hopping));
        }
        if !(self.w >= 0.0 && self.w.is_finite()) {
            return bad(format!("W must be non-negative, got {}", self.w));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be non-negative, got {}", self.eps));
        }
        if !self.g.is_finite() {
            return bad(format!("g must be finite, got {}", self.g));
        }
        if !self.alpha.is_finite() {
            return bad(format!("alpha must be finite, got {}", self.alpha));
        }
        if !(0.0..TAU).contains(&self.phi) {
            return bad(format!("phi must lie in [0, 2π), got {}", self.phi));
        }
        Ok(())
    }

    /// On-site energy of site `j` (1-based).
    #[inline]
    pub fn onsite(&self, j: usize) -> f64 {
        onsite_energy(self.eps, self.w, self.alpha, self.phi, j)
    }

    pub fn onsite_energies(&self) -> Vec<f64> {
        (1..=self.size).map(|j| self.onsite(j)).collect()
    }

    /// Flat key-value record, in the canonical key order.
    pub fn to_record(&self) -> Vec<(&'static str, String)> {
        vec![
            ("J", self.hopping.to_string()),
            ("g", self.g.to_string()),
            ("W", self.w.to_string()),
            ("eps", self.eps.to_string()),
            ("L", self.size.to_string()),
            ("alpha", self.alpha.to_string()),
            ("phi", self.phi.to_string()),
            ("bc", self.bc.to_string()),
        ]
    }

    /// Parses a flat record. Missing keys take their defaults; unknown
    /// keys are rejected.
    pub fn from_record<'a, I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut p = Self::default();
        for (key, value) in entries {
            let value = value.trim();
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("`{key}`: not a number: `{v}`")))
            };
            match key.trim() {
                "J" => p.hopping = num(value)?,
                "g" => p.g = num(value)?,
                "W" => p.w = num(value)?,
                "eps" => p.eps = num(value)?,
                "L" => {
                    p.size = value
                        .parse()
                        .map_err(|_| Error::Parse(format!("`L`: not a size: `{value}`")))?
                }
                "alpha" => p.alpha = num(value)?,
                "phi" => p.phi = num(value)?,
                "bc" => p.bc = value.parse()?,
                other => return Err(Error::Parse(format!("unknown model key `{other}`"))),
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// `ε·j + W·cos(2παj + φ)` for 1-based site `j`.
#[inline]
pub fn onsite_energy(eps: f64, w: f64, alpha: f64, phi: f64, j: usize) -> f64 {
    let jf = j as f64;
    eps * jf + w * (TAU * alpha * jf + phi).cos()
}

/// Tridiagonal nonreciprocal Hamiltonian, plus the ring-closing corner
/// pair under periodic boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub diag: Vec<f64>,
    /// `H[j+1][j] = -J e^{g}`.
    pub lower: Vec<f64>,
    /// `H[j][j+1] = -J e^{-g}`.
    pub upper: Vec<f64>,
    /// `(H[0][L-1], H[L-1][0]) = (-J e^{g}, -J e^{-g})`, present only for PBC.
    pub corner: Option<(f64, f64)>,
}

impl HamiltonianMatrix {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.size();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = self.diag[i];
        }
        for i in 0..n - 1 {
            m[i * n + i + 1] += self.upper[i];
            m[(i + 1) * n + i] += self.lower[i];
        }
        if let Some((top_right, bottom_left)) = self.corner {
            m[n - 1] += top_right;
            m[(n - 1) * n] += bottom_left;
        }
        m
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.lower[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.upper[i].abs();
                }
                if let Some((tr, bl)) = self.corner {
                    if i == 0 {
                        s += tr.abs();
                    }
                    if i == n - 1 {
                        s += bl.abs();
                    }
                }
                s
            })
            .fold(0.0, f64::max)
    }
}

/// Real symmetric tridiagonal matrix similar to the open-boundary
/// Hamiltonian through `S = diag(e^{-g j})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedTridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// The `g` of the gauge transform, needed to map eigenvectors back.
    pub gauge: f64,
}

pub fn build_hamiltonian(p: &ModelParams) -> Result<HamiltonianMatrix> {
    p.validate()?;
    let n = p.size;
    let right = -p.hopping * p.g.exp();
    let left = -p.hopping * (-p.g).exp();
    let corner = match p.bc {
        Boundary::Open => None,
        Boundary::Periodic => Some((right, left)),
    };
    Ok(HamiltonianMatrix {
        diag: p.onsite_energies(),
        lower: vec![right; n - 1],
        upper: vec![left; n - 1],
        corner,
    })
}

pub fn symmetrize_obc(p: &ModelParams) -> Result<SymmetrizedTridiagonal> {
    p.validate()?;
    if p.bc != Boundary::Open {
        return Err(Error::WrongBoundary { expected: "open" });
    }
    Ok(SymmetrizedTridiagonal {
        diag: p.onsite_energies(),
        offdiag: vec![-p.hopping; p.size - 1],
        gauge: p.g,
    })
}

/// First `n_max` Fibonacci numbers starting `1, 1, 2, 3, …`.
pub fn fibonacci_sizes(n_max: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n_max);
    let (mut a, mut b) = (1usize, 1usize);
    for _ in 0..n_max {
        out.push(a);
        let next = a + b;
        a = b;
        b = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free(size: usize, g: f64) -> ModelParams {
        ModelParams::new(size, g, 0.0, 0.0)
    }

    #[test]
    fn free_chain_entries() {
        let h = build_hamiltonian(&free(3, 0.0)).unwrap();
        assert_eq!(h.diag, vec![0.0; 3]);
        assert_eq!(h.upper, vec![-1.0, -1.0]);
        assert_eq!(h.lower, vec![-1.0, -1.0]);
        assert!(h.corner.is_none());
    }

    #[test]
    fn nonreciprocal_two_sites() {
        let h = build_hamiltonian(&free(2, 0.5)).unwrap();
        assert_eq!(h.upper, vec![-(-0.5f64).exp()]);
        assert_eq!(h.lower, vec![-(0.5f64).exp()]);
        assert_eq!(h.diag, vec![0.0, 0.0]);
    }

    #[test]
    fn quasiperiodic_diagonal_matches_scalar_cosines() {
        let p = ModelParams::new(3, 0.0, 2.0, 0.0);
        let h = build_hamiltonian(&p).unwrap();
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        for j in 1..=3 {
            let expect = 2.0 * (2.0 * std::f64::consts::PI * alpha * j as f64).cos();
            assert!((h.diag[j - 1] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn golden_alpha_is_exact() {
        assert_eq!(GOLDEN_ALPHA, (5f64.sqrt() - 1.0) / 2.0);
        assert_eq!(ModelParams::default().alpha, GOLDEN_ALPHA);
    }

    #[test]
    fn periodic_corners() {
        let p = free(5, 0.3).with_boundary(Boundary::Periodic);
        let h = build_hamiltonian(&p).unwrap();
        let (tr, bl) = h.corner.unwrap();
        assert_eq!(tr, -(0.3f64).exp());
        assert_eq!(bl, -(-0.3f64).exp());
        let d = h.to_dense();
        assert_eq!(d[4], tr);
        assert_eq!(d[20], bl);
    }

    #[test]
    fn symmetrized_hopping_is_uniform() {
        let s = symmetrize_obc(&free(4, 0.5)).unwrap();
        assert_eq!(s.offdiag, vec![-1.0; 3]);
        assert_eq!(s.diag, vec![0.0; 4]);
    }

    #[test]
    fn symmetrize_rejects_pbc() {
        let p = free(4, 0.5).with_boundary(Boundary::Periodic);
        assert!(matches!(
            symmetrize_obc(&p),
            Err(Error::WrongBoundary { .. })
        ));
    }

    #[test]
    fn hopping_product_is_g_independent() {
        for g in [-1.0, 0.0, 0.4, 1.5] {
            let mut p = free(6, g);
            p.hopping = 1.7;
            let h = build_hamiltonian(&p).unwrap();
            for (u, l) in h.upper.iter().zip(&h.lower) {
                assert!((u * l - 1.7 * 1.7).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stark_diagonal_is_linear_without_disorder() {
        let p = ModelParams::new(7, 0.2, 0.0, 0.3);
        let h = build_hamiltonian(&p).unwrap();
        for (i, d) in h.diag.iter().enumerate() {
            assert_eq!(*d, 0.3 * (i + 1) as f64);
        }
    }

    #[test]
    fn phase_periodicity() {
        let base = ModelParams::new(13, 0.5, 2.5, 0.0).with_phase(1.1);
        let shifted = base.with_phase(1.1 + TAU);
        let a = build_hamiltonian(&base).unwrap();
        let b = build_hamiltonian(&shifted).unwrap();
        for (x, y) in a.diag.iter().zip(&b.diag) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn validation() {
        assert!(free(1, 0.0).validate().is_err());
        let mut p = free(4, 0.0);
        p.w = -1.0;
        assert!(p.validate().is_err());
        p.w = 1.0;
        p.phi = TAU;
        assert!(p.validate().is_err());
        p.phi = 0.0;
        p.hopping = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn fibonacci() {
        assert_eq!(fibonacci_sizes(3), vec![1, 1, 2]);
        assert_eq!(fibonacci_sizes(10)[9], 55);
        let f = fibonacci_sizes(16);
        assert_eq!(&f[13..], &[377, 610, 987]);
    }

    #[test]
    fn record_round_trip() {
        let p = ModelParams {
            hopping: 1.0,
            g: 0.5,
            w: 3.297_442_541_400_256,
            eps: 1e-7,
            size: 987,
            alpha: GOLDEN_ALPHA,
            phi: 0.1234567890123,
            bc: Boundary::Periodic,
        };
        let rec = p.to_record();
        let back =
            ModelParams::from_record(rec.iter().map(|(k, v)| (*k, v.as_str()))).unwrap();
        assert_eq!(p, back);
        assert!(ModelParams::from_record([("bogus", "1")]).is_err());
    }
}
