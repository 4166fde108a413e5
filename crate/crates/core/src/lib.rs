//! Testbed comparing three evidence-aggregation calculi (classical Bayesian,
//! MYCIN certainty factors and Dempster-Shafer) on a synthetic
//! block-classification domain, with simulated experts in place of human
//! subjects.
//!
//! Module map:
//!
//! - [`blockworld`]: shapes, colors, the count table, sampling.
//! - [`calculi`]: the three engines and the shared ranking layer.
//! - [`experts`]: simulated experts that elicit parameters for all engines.
//! - [`evaluation`]: reversal, guessing and bag-diagnosis comparators.
//! - [`harness`]: configuration, CLI commands, CSV reports and manifests.

pub mod blockworld;
pub mod calculi;
pub mod evaluation;
pub mod experts;
pub mod harness;
pub mod rng;

pub use blockworld::{Color, ContingencyTable, Distribution3, PriorMode, Shape, ShapeDistribution};
pub use calculi::{Calculus, CalculusParams, MassFunction, Ranking};
pub use evaluation::ExpertSystem;
pub use experts::{ElicitationReport, ExpertModel};
pub use rng::RandomStream;
