use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;

use super::chain::{step, ChainStats};
use super::seed::seed_plan;
use super::{GenConfig, GenError};
use crate::graph::{DualGraph, Plan, PlanHash, Region};

/// Distinct feasible plans over one region, offered to a chooser.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    pub round: usize,
    #[serde(skip)]
    pub region: Region,
    pub k: u32,
    #[serde(skip)]
    pub plans: Vec<Plan>,
    pub hashes: Vec<PlanHash>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    /// Keeps only plans for which `keep` holds, preserving order.
    pub fn retain(&mut self, mut keep: impl FnMut(&Plan) -> bool) {
        let mut hashes = self.hashes.iter();
        let mut kept_hashes = Vec::new();
        self.plans.retain(|p| {
            let h = *hashes.next().expect("hashes parallel plans");
            let k = keep(p);
            if k {
                kept_hashes.push(h);
            }
            k
        });
        self.hashes = kept_hashes;
    }
}

/// Result of a lenient candidate search.
#[derive(Debug, Clone)]
pub struct Collection {
    pub set: CandidateSet,
    pub requested: usize,
    pub stats: ChainStats,
}

impl Collection {
    pub fn shortfall(&self) -> usize {
        self.requested.saturating_sub(self.set.len())
    }
}

/// Seeds a plan over `region` and runs the configured chain, keeping every
/// `chain_thinning`-th state whose canonical hash is new, until `c` plans
/// are found or the search gives up. Giving up happens after
/// `c · max_attempts · chain_thinning` steps, or after `stall_limit`
/// consecutive retained states that were all duplicates.
///
/// A short set is returned as is; see [`generate_candidates`] for the
/// strict variant. Plans are stored with canonical labels.
pub fn collect_candidates<R: Rng>(
    region: &Region,
    k: u32,
    c: usize,
    graph: &DualGraph,
    cfg: &GenConfig,
    ideal_pop: f64,
    rng: &mut R,
) -> Result<Collection, GenError> {
    cfg.validate()?;
    if c == 0 {
        return Err(GenError::InvalidConfig("candidate count must be at least 1".into()));
    }
    let mut plan = seed_plan(region, k, graph, cfg, ideal_pop, rng)?;
    let mut set = CandidateSet {
        round: 0,
        region: region.clone(),
        k,
        plans: Vec::with_capacity(c),
        hashes: Vec::with_capacity(c),
    };
    let mut stats = ChainStats::default();
    if k == 1 {
        set.hashes.push(plan.canonical_hash());
        set.plans.push(plan);
        return Ok(Collection {
            set,
            requested: c,
            stats,
        });
    }

    let mut seen = HashSet::with_capacity(c);
    let max_steps = c
        .saturating_mul(cfg.max_attempts)
        .saturating_mul(cfg.chain_thinning);
    let mut steps = 0usize;
    let mut stale = 0usize;
    while set.len() < c && steps < max_steps && stale < cfg.stall_limit {
        for _ in 0..cfg.chain_thinning {
            step(&mut plan, graph, cfg, ideal_pop, rng, &mut stats);
        }
        steps += cfg.chain_thinning;
        let hash = plan.canonical_hash();
        if seen.insert(hash) {
            set.hashes.push(hash);
            set.plans.push(plan.canonicalized());
            stale = 0;
        } else {
            stale += 1;
        }
    }
    Ok(Collection {
        set,
        requested: c,
        stats,
    })
}

/// Like [`collect_candidates`] but a set smaller than `c` is an error,
/// except for `k = 1` where only one plan exists.
pub fn generate_candidates<R: Rng>(
    region: &Region,
    k: u32,
    c: usize,
    graph: &DualGraph,
    cfg: &GenConfig,
    ideal_pop: f64,
    rng: &mut R,
) -> Result<CandidateSet, GenError> {
    let collection = collect_candidates(region, k, c, graph, cfg, ideal_pop, rng)?;
    if k == 1 {
        if c > 1 {
            log::warn!("k = 1 admits a single plan; returning 1 of {c} requested candidates");
        }
        return Ok(collection.set);
    }
    if collection.shortfall() > 0 {
        return Err(GenError::CandidateExhaustion {
            found: collection.set.len(),
            requested: c,
        });
    }
    Ok(collection.set)
}

/// Ensemble sampling: seeds a plan over `region`, then returns `count`
/// chain states taken every `chain_thinning` steps. Duplicates are kept.
pub fn sample_chain<R: Rng>(
    region: &Region,
    k: u32,
    count: usize,
    graph: &DualGraph,
    cfg: &GenConfig,
    ideal_pop: f64,
    rng: &mut R,
    stats: &mut ChainStats,
) -> Result<Vec<Plan>, GenError> {
    cfg.validate()?;
    let mut plan = seed_plan(region, k, graph, cfg, ideal_pop, rng)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..cfg.chain_thinning {
            step(&mut plan, graph, cfg, ideal_pop, rng, stats);
        }
        out.push(plan.clone());
    }
    Ok(out)
}
