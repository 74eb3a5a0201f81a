//! Power-law fits, finite-size scaling collapse, finite-size critical
//! points and bootstrap intervals.

mod bootstrap;
mod collapse;
mod critical;
mod powerlaw;
pub mod simplex;
mod window;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use bootstrap::{bootstrap_ci, resample, Interval};
pub use collapse::{
    collapse_1d, collapse_2d_slice, hybrid_collapse, kappa_theory, quality, rescale, CollapseOptions,
    Rescaled,
};
pub use critical::{extract_epsc_finite, extract_wc_finite, extrapolate_inverse_size};
pub use powerlaw::{powerlaw_fit, PowerLawFit};
pub use window::{stable_slope_range, Window};

/// Observable entering a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Xi,
    Ipr,
    Gap,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::Xi, Quantity::Ipr, Quantity::Gap];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Xi => "xi",
            Quantity::Ipr => "ipr",
            Quantity::Gap => "gap",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xi" => Ok(Quantity::Xi),
            "ipr" => Ok(Quantity::Ipr),
            "gap" => Ok(Quantity::Gap),
            other => Err(Error::Parse(format!("unknown quantity `{other}`"))),
        }
    }
}

/// Which scaling relation a fit used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CollapseForm {
    /// Pure Stark chain, distances in ε.
    Stark,
    /// Stark distances at `W = W_c(g)`.
    AasAtWc,
    /// Stark distances with `(W − W_c) L^{1/ν_δ} = c` held fixed.
    Slice { c: f64 },
    /// ξ against `ε L^{1/ν} (|δ| L^{1/ν_δ})^κ` for several `δ < 0`.
    Hybrid,
}

impl fmt::Display for CollapseForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CollapseForm::Stark => f.write_str("stark"),
            CollapseForm::AasAtWc => f.write_str("aas-at-wc"),
            CollapseForm::Slice { c } => write!(f, "slice({c})"),
            CollapseForm::Hybrid => f.write_str("hybrid"),
        }
    }
}

/// Model region an exponent set describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentContext {
    PureAa,
    PureStark,
    Aas,
}

/// `(ν, s, z)` for one region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub context: ExponentContext,
    pub nu: f64,
    pub s: f64,
    pub z: f64,
}

impl ExponentSet {
    pub fn s_over_nu(&self) -> f64 {
        self.s / self.nu
    }
}

/// Result of one collapse optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseFit {
    pub form: CollapseForm,
    pub quantity: Quantity,
    /// Fitted exponents by name (`nu`, `s`, `z`, `kappa`); pinned ones included.
    pub exponents: BTreeMap<String, f64>,
    /// Names of exponents that were held fixed.
    pub pinned: Vec<String>,
    pub quality: f64,
    /// 68% bootstrap intervals, filled in by [`bootstrap_ci`] users.
    pub ci: BTreeMap<String, Interval>,
    /// Distance range actually used.
    pub window: (f64, f64),
    pub evaluations: usize,
}

impl CollapseFit {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.exponents.get(name).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalPointMethod {
    IprRisePbc,
    IprDiveObc,
    XiMax,
    IprMin,
}

/// Finite-size critical point, combined from two estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointEstimate {
    pub value: f64,
    pub size: usize,
    /// The individual grid estimates that were combined.
    pub estimates: Vec<(CriticalPointMethod, f64)>,
}
