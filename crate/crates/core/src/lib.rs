//! Choose-and-Freeze redistricting.
//!
//! Two partisan agents alternate roles over a shrinking unassigned region:
//! the chooser picks one plan from a small set of feasible candidates, the
//! freezer locks one district of that plan permanently. The crate provides
//! everything around that loop:
//!
//! - [`graph`], [`ingest`], [`grid`]: dual graphs, plans and their on-disk formats
//! - [`metrics`]: population deviation, Polsby-Popper, partisan bias and unfairness
//! - [`generators`]: spanning-tree recombination and single-unit flip chains
//! - [`protocol`]: the round loop, transcripts and replay
//! - [`agents`]: rule-based and chat-model-backed decision policies
//! - [`harness`]: repeated runs, matched-budget ensemble baselines and reports
//!
//! Metric code is generic over the floating-point type via [`Scalar`]; the
//! aliases below fix it to `f64`, which is what the rest of the pipeline uses.

pub mod agents;
pub mod generators;
pub mod graph;
pub mod grid;
pub mod harness;
pub mod ingest;
pub mod metrics;
pub mod protocol;
pub mod rng;
pub mod scalar;

pub use agents::{Agent, AgentSpec, Party, StateProfile};
pub use generators::{CandidateSet, ChainMethod, GenConfig};
pub use graph::{DualGraph, Edge, Plan, PlanHash, Region, Unit};
pub use harness::{ExperimentConfig, ExperimentReport};
pub use protocol::{GameConfig, GameState, RoundRecord, Transcript};
pub use scalar::Scalar;

/// Per-district geometry and vote totals in `f64`.
pub type DistrictGeometry = metrics::Geometry<f64>;
/// Per-district geometry in `f32`.
pub type DistrictGeometry32 = metrics::Geometry<f32>;
/// Plan-level metric report in `f64`.
pub type MetricsReport = metrics::Report<f64>;
/// Plan-level metric report in `f32`.
pub type MetricsReport32 = metrics::Report<f32>;
/// Mean/std summary of one metric in `f64`.
pub type MetricSummary = harness::Summary<f64>;
