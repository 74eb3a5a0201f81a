//! Numerical laboratory for the localization transition of the
//! non-Hermitian Aubry-André-Stark chain.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`] builds the nonreciprocal lattice Hamiltonian and its exact
//!   open-boundary gauge-symmetrized form.
//! - [`spectra`] diagonalizes it under open or periodic boundaries and
//!   returns the ground / first-excited right eigenpairs.
//! - [`observables`] turns a ground state into localization length, IPR
//!   and energy gap.
//! - [`ensemble`] averages those over random lattice phases on parameter
//!   grids with a deterministic parallel fold.
//! - [`scaling`] fits power laws, collapses finite-size curves and
//!   extracts finite-size critical points.
//! - [`store`] caches sweep results on disk by content hash.
//! - [`recipes`] composes the above into the figure-level pipelines.

pub mod ensemble;
pub mod error;
pub mod model;
pub mod observables;
pub mod recipes;
pub mod scaling;
pub mod spectra;
pub mod store;

pub use ensemble::{
    log_grid, run_sweep, run_sweep_with_workers, sample_phase, Axis, EnsembleCurve, SampleRecord,
    Slice, SweepOutput, SweepSpec,
};
pub use error::{Error, Result};
pub use model::{
    build_hamiltonian, critical_w, fibonacci_sizes, symmetrize_obc, Boundary,
    HamiltonianMatrix, ModelParams, SymmetrizedTridiagonal, GOLDEN_ALPHA,
};
pub use observables::{energy_gap, ipr, localization_length, ObservableSample};
pub use scaling::{
    CollapseFit, CollapseForm, CriticalPointEstimate, CriticalPointMethod, ExponentContext,
    ExponentSet, Quantity, Window,
};
pub use spectra::{
    ground_pair, solve, solve_lowest, solve_obc, solve_pbc, SolveMeta, SolverPath, SpectralResult,
};
pub use store::{ResultKey, Store};

/// Tag mixed into cache keys; bump whenever solver output may change.
pub const CODE_VERSION: &str = concat!("nhaas-", env!("CARGO_PKG_VERSION"), "+solver3");
