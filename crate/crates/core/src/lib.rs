//! Random walks with choice on graphs.
//!
//! * [`graph`]: graph storage, random geometric graphs, tori, edge lists.
//! * [`walk`]: SRW, RWC(d) and ERWC(d, h) step rules and single runs.
//! * [`oracle`]: exact expected SRW cover steps on small graphs.
//! * [`metrics`]: run records and their aggregation.
//! * [`experiment`]: replicated, paired experiments and the `h` sweep.
//! * [`cli`] and [`output`]: the `walklab` command and its CSV files.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod output;
pub mod walk;

pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, GraphSpec, Replication};
pub use graph::{Graph, GraphStats};
pub use metrics::{ExperimentReport, RunRecord};
pub use walk::{CandidateSampling, Policy, Reinforcement, RwcScore, WalkOptions};
