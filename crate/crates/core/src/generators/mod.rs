//! Feasible plan generation: seeding, Flip and ReCom chain steps, and
//! per-round candidate sets.
//!
//! Feasibility means contiguous districts whose populations lie within
//! `ε · ideal` of a fixed global `ideal` (state population / N).

mod candidates;
mod chain;
mod seed;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DualGraph, Plan};

pub use candidates::{collect_candidates, generate_candidates, sample_chain, CandidateSet, Collection};
pub use chain::{flip_step, recom_step, step, ChainStats, StepOutcome};
pub use seed::seed_plan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainMethod {
    #[default]
    Recom,
    Flip,
}

impl fmt::Display for ChainMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainMethod::Recom => "recom",
            ChainMethod::Flip => "flip",
        })
    }
}

impl FromStr for ChainMethod {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "recom" => Ok(ChainMethod::Recom),
            "flip" => Ok(ChainMethod::Flip),
            other => Err(GenError::InvalidConfig(format!("unknown chain method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    /// Relative population tolerance.
    pub epsilon: f64,
    pub method: ChainMethod,
    /// Chain steps between retained samples.
    pub chain_thinning: usize,
    /// Proposal (or spanning tree) attempts per step before self-looping.
    pub max_attempts: usize,
    /// Consecutive retained samples without a new distinct plan before a
    /// candidate search gives up.
    pub stall_limit: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            method: ChainMethod::Recom,
            chain_thinning: 10,
            max_attempts: 1000,
            stall_limit: 200,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(GenError::InvalidConfig(format!(
                "epsilon must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        if self.chain_thinning == 0 || self.max_attempts == 0 || self.stall_limit == 0 {
            return Err(GenError::InvalidConfig(
                "chain_thinning, max_attempts and stall_limit must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("unit set is empty")]
    EmptySet,
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("seeding failed after {attempts} spanning-tree attempts")]
    SeedingFailed { attempts: usize },
    #[error("candidate exhaustion: found {found} of {requested} distinct plans")]
    CandidateExhaustion { found: usize, requested: usize },
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}

/// Inclusive population window `[ideal − ε·ideal, ideal + ε·ideal]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopBounds {
    pub lo: f64,
    pub hi: f64,
}

impl PopBounds {
    pub fn new(ideal: f64, epsilon: f64) -> Self {
        let slack = epsilon * ideal;
        Self {
            lo: ideal - slack,
            hi: ideal + slack,
        }
    }

    pub fn contains(&self, pop: u64) -> bool {
        let p = pop as f64;
        p >= self.lo && p <= self.hi
    }

    /// Whether `pop` is within one district's slack of `k` ideal districts;
    /// a stricter, split-friendlier test than [`PopBounds::admits`].
    pub fn near(&self, pop: u64, k: u32) -> bool {
        let ideal = (self.lo + self.hi) / 2.0;
        let slack = (self.hi - self.lo) / 2.0;
        (pop as f64 - f64::from(k) * ideal).abs() <= slack
    }

    /// Whether `pop` could be split into `k` districts within bounds.
    pub fn admits(&self, pop: u64, k: u32) -> bool {
        let p = pop as f64;
        let k = f64::from(k);
        p >= k * self.lo && p <= k * self.hi
    }
}

/// Whether `units` induces a connected subgraph.
pub fn contiguous(units: &[usize], graph: &DualGraph) -> Result<bool, GenError> {
    if units.is_empty() {
        return Err(GenError::EmptySet);
    }
    Ok(graph.is_connected_subset(units))
}

/// Whether every district population lies within `ε · ideal` of `ideal`.
pub fn balanced(plan: &Plan, graph: &DualGraph, ideal_pop: f64, epsilon: f64) -> bool {
    let bounds = PopBounds::new(ideal_pop, epsilon);
    plan.district_populations(graph).into_iter().all(|p| bounds.contains(p))
}

/// Contiguous and balanced.
pub fn feasible(plan: &Plan, graph: &DualGraph, ideal_pop: f64, epsilon: f64) -> bool {
    balanced(plan, graph, ideal_pop, epsilon) && plan.is_contiguous(graph)
}
