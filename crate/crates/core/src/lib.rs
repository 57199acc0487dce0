//! Entanglement entropy and mutual information of quadratic fermionic chains.
//!
//! The engine works entirely in momentum space: a [`ModelSpec`] fixes the
//! chain, a [`ModeGrid`] holds the single-particle (or Bogoliubov) spectrum,
//! the ground state is either a filled Fermi sea or a BCS product state, and
//! every real-space quantity is obtained from two-point functions restricted
//! to a set of sites. A brute-force Fock-space diagonalizer in [`oracle`]
//! certifies every formula on small chains.

pub mod analysis;
pub mod config;
pub mod entropy;
mod error;
pub mod groundstate;
pub mod lattice;
mod linalg;
pub mod oracle;
pub mod runner;

pub use analysis::{
    ee_scaling_fit, four_point_ratio, log_scaling_fit, mi_correlation_bound_check,
    mutual_information, reference_dirac, reference_holographic, sweep, sweep_alpha,
    sweep_distance, sweep_mu, sweep_subsystem_size, BoundCheck, LogFit, MIRecord, Partition,
    ScalingFit, SkippedPoint, SweepAxis, SweepPoint, SweepResult,
};
pub use entropy::{binary_entropy, subsystem_entropy, EntropyResult, SpectrumKind};
pub use error::{Error, Result};
pub use groundstate::{
    bdg_angles, correlation_matrix, density_covariance, filling_from_mu, ground_state,
    ground_state_on, majorana_matrix, occupy_modes, CorrelationData, GroundStateData, MajoranaMatrix, Occupation,
};
pub use lattice::{
    bogoliubov_spectrum, dispersion, ell_alpha, f_alpha, oriented_distance, periodic_distance,
    BdgTerms, Boundary, ChainGeometry, KitaevHopping, ModeGrid, ModelSpec, OccupationRule, Variant,
};

/// Tolerance within which eigenvalues slightly outside their physical range
/// are clamped back instead of rejected.
pub const CLAMP_TOLERANCE: f64 = 1e-10;
