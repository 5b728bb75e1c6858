//! Simulation and code design for backscatter-assisted 3D orientation estimation.
//!
//! A tagged object carrying `N` configurable backscatter tags rotates freely
//! around a fixed point while `K` full-duplex antennas interrogate it. Each
//! tag reflects with a complex reflectivity selected by a binary state, and a
//! *code* schedules the tag states over `T` time slots. The receiver decodes
//! the object orientation from the concatenated channel output by
//! minimum-distance search over a finite orientation grid.
//!
//! The crate provides:
//!
//! * [`geometry`] — rotation matrices, orientation grids, and the angular
//!   loss functions used for evaluation;
//! * [`channel`] — free-space channel synthesis including inter-tag coupling
//!   and optional multipath reflectors;
//! * [`codes`] — binary code matrices, codeword enumeration, and proportion
//!   vectors;
//! * [`criteria`] — the pairwise-distance table, the average-error upper
//!   bound `U`, the worst-case lower bound `V`, and the closed-form minimax
//!   bound;
//! * [`designer`] — optimizers producing the four code families
//!   (`REP_OPT`, `ORTHOGONAL`, `AVERAGE_DESIGN`, `MINIMAX_DESIGN`);
//! * [`estimator`] — the noise model, the minimum-distance decoder, and
//!   Monte Carlo error simulation;
//! * [`experiments`] — scripted SNR sweeps, random-array studies, multipath
//!   and robustness studies with CSV output;
//! * [`config`] — scenario configuration parsing and hashing.
//!
//! All numerical kernels are generic over the scalar type through the
//! [`scalar::Real`] trait; `f64` is the working precision used by the
//! experiment drivers, and the crate root exports `*F64` aliases for the
//! common types.

pub mod channel;
pub mod codes;
pub mod config;
pub mod criteria;
pub mod designer;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod scalar;
pub mod seeding;

pub use error::{Error, Result};
pub use scalar::Real;

/// 3x3 rotation matrix in working precision.
pub type RotationF64 = geometry::RotationMatrix<f64>;
/// Orientation grid in working precision.
pub type GridF64 = geometry::OrientationGrid<f64>;
/// Antenna/tag/reflector geometry in working precision.
pub type ArrayGeometryF64 = channel::ArrayGeometry<f64>;
/// State-to-reflectivity map in working precision.
pub type ReflectivityMapF64 = channel::ReflectivityMap<f64>;
/// Precomputed noiseless responses in working precision.
pub type ResponseTableF64 = channel::ResponseTable<f64>;
/// Codeword-proportion vector in working precision.
pub type ProportionVectorF64 = codes::ProportionVector<f64>;
/// Pairwise orientation distance table in working precision.
pub type PairDistanceTableF64 = criteria::PairDistanceTable<f64>;
/// Monte Carlo error report in working precision.
pub type ErrorReportF64 = estimator::ErrorReport<f64>;
