//! Randomized binary embeddings `x ↦ sgn(Ax)` of subsets of the unit sphere
//! into the Hamming cube, with the tools to measure how well they preserve
//! angular distance.
//!
//! * [`sets`]: set descriptors, point clouds and Gaussian width estimates
//! * [`transforms`]: Walsh–Hadamard transform, subsampling, random diagonals
//! * [`embedders`]: operator ensembles and bit-packed codes
//! * [`metrics`]: angular and Hamming distances, distortion over a cloud
//! * [`theory`]: sample-complexity formulas and supporting tail bounds
//! * [`harness`]: reproducible experiment sweeps emitting CSV and JSON

pub mod embedders;
mod error;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod sets;
pub mod theory;
pub mod transforms;

pub use embedders::{BinaryCode, EmbeddingOperator, OperatorKind};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentName};
pub use metrics::{angular_distance, distortion_report, hamming, DistortionReport};
pub use sets::{gaussian_width, sample_points, Estimate, PointCloud, SetDescriptor, UnitVector};
pub use theory::{required_samples, ComplexityQuery, Regime};
