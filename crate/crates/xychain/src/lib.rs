//! Exact solution of the 1D spin-1/2 transverse-field XY chain and the
//! nearest-neighbor concurrence of its eigenstates.
//!
//! The chain
//!
//!   H = J Σ_n [(1+δ) Sx_n Sx_{n+1} + (1−δ) Sy_n Sy_{n+1}] − h Σ_n Sz_n
//!
//! maps through the Jordan-Wigner transformation onto free fermions and is
//! diagonalized mode by mode with a Bogoliubov rotation. Every eigenstate is
//! labeled by its set of occupied quasiparticle modes; the two-site reduced
//! density matrix of any such state is an X-form matrix determined by three
//! correlators (f0, f1, f2) that are linear in the mode occupations. This
//! crate computes those correlators in O(occupied) per state, turns them into
//! concurrence, enumerates or samples fixed-occupation-number subspaces, and
//! aggregates the results into energy and concurrence histograms.
//!
//! Everything is cross-checked against a dense exact-diagonalization oracle
//! in [`oracle`], which also quantifies the fermion-parity bookkeeping that
//! the momentum-space solution glosses over at finite N.
//!
//! The numeric code is generic over the scalar ([`Real`]); the aliases below
//! fix f64 for ordinary use.

pub mod correlators;
pub mod entanglement;
pub mod error;
pub mod oracle;
pub mod scalar;
pub mod scanner;
pub mod spectral;
pub mod stats;

pub use correlators::{OccupationSet, Toggle};
pub use error::{Error, Result};
pub use scalar::Real;
pub use spectral::Grid;

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type ModelParams = spectral::ModelParams<f64>;
pub type ModeEntry = spectral::ModeEntry<f64>;
pub type KGrid = spectral::KGrid<f64>;
pub type ModeTable = correlators::ModeTable<f64>;
pub type Correlators = correlators::Correlators<f64>;
pub type NNDensityMatrix = entanglement::NNDensityMatrix<f64>;
pub type ConcurrenceResult = entanglement::ConcurrenceResult<f64>;
pub type ScanPolicy = scanner::ScanPolicy<f64>;
pub type StateRecord = scanner::StateRecord<f64>;
pub type ScanSummary = scanner::ScanSummary<f64>;
pub type Histogram = stats::Histogram<f64>;
pub type SweepSeries = stats::SweepSeries<f64>;
pub type GroundPoint = stats::GroundPoint<f64>;
