//! Concentration matrix estimation in decomposable Gaussian graphical models.
//!
//! Closed-form estimators (MLE, MVUE, a biased shrinkage estimator and a
//! SURE-tuned family) built from clique and separator blocks of the sample
//! scatter matrix, plus the tooling to check them: a numeric version of the
//! graphical differential operator, feasibility projections, model
//! generators and a reproducible Monte Carlo benchmark.
//!
//! Node indices are 0-based throughout the Rust API. File formats and the
//! `ggm` command line use 1-based indices.

pub mod error;
pub mod cli;
pub mod estimators;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod bench;
pub mod models;
pub mod projection;
pub mod stats;
pub mod summary;
pub mod sure;

pub use error::{BlockKind, Error, Result};
pub use estimators::{Adjustment, BlockInverses, ConcentrationEstimate, Method, PsdStatus};
pub use graph::{zero_fill, DecomposableGraph};
pub use linalg::SymMatrix;
pub use models::{make_model, sample_gaussian, GroundTruth, ModelKind, ModelSpec};
pub use projection::{positive_part, project_to_pattern_psd, ProjectionReport};
pub use stats::SufficientStats;
