//! Recency-based preferential attachment random graphs.
//!
//! Each new vertex draws a Pareto-distributed quality and attaches `m`
//! edges to earlier vertices with probability proportional to
//! `quality × recency`, where recency is either a hard window of the last
//! `N` vertices or an exponential decay `e^(-age/N)`. The crate generates
//! such graphs, measures their degree and recency statistics, and compares
//! the measurements with the closed-form asymptotics known for the model.
//!
//! Module map:
//!
//! - [`quality`]: seeded random streams and Pareto qualities
//! - [`attractiveness`]: attractiveness kinds and the incremental [`WeightIndex`]
//! - [`generator`]: the growth process (fast path and linear-scan oracle)
//! - [`io`]: edge-list and quality file formats
//! - [`stats`]: degree histograms, `e(T)`, weight-trace deviations
//! - [`theory`]: closed-form predictions and their validity ranges
//! - [`fitting`]: power-law and exponential-decay estimators
//! - [`experiments`]: replica ensembles and reports
//! - [`parallel`]: replica-level parallelism with a sequential fallback

pub mod attractiveness;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod generator;
pub mod io;
pub mod parallel;
pub mod quality;
pub mod stats;
pub mod theory;

pub use attractiveness::{attr_value, AttractivenessKind, WeightIndex};
pub use error::{Error, Result};
pub use experiments::{compare_to_theory, run_ensemble, ExperimentConfig, ExperimentReport};
pub use fitting::{fit_exponential_decay, fit_power_law, DecayFit, PowerLawFit};
pub use generator::{generate, generate_naive, Edge, GrownGraph, ModelParams, VertexId};
pub use quality::{derive_stream, pareto_mean, pareto_sample, ParetoParams, RandomStream, SeedSpec};
pub use stats::{DegreeHistogram, DegreeMode, RecencyCurve};
pub use theory::TheoryPrediction;
