use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{uniform_spanning_tree, SubGraph};
use super::{ChainMethod, GenConfig, PopBounds};
use crate::graph::{DualGraph, Plan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Moved,
    /// Every attempt was rejected; the plan is unchanged.
    SelfLoop,
}

/// Diagnostics counters accumulated over chain steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStats {
    pub steps: u64,
    pub moves: u64,
    pub self_loops: u64,
    pub rejections: u64,
}

impl ChainStats {
    pub fn absorb(&mut self, other: &ChainStats) {
        self.steps += other.steps;
        self.moves += other.moves;
        self.self_loops += other.self_loops;
        self.rejections += other.rejections;
    }

    fn record(&mut self, outcome: StepOutcome) -> StepOutcome {
        self.steps += 1;
        match outcome {
            StepOutcome::Moved => self.moves += 1,
            StepOutcome::SelfLoop => self.self_loops += 1,
        }
        outcome
    }
}

/// One step of the configured chain.
pub fn step<R: Rng>(
    plan: &mut Plan,
    graph: &DualGraph,
    cfg: &GenConfig,
    ideal_pop: f64,
    rng: &mut R,
    stats: &mut ChainStats,
) -> StepOutcome {
    match cfg.method {
        ChainMethod::Recom => recom_step(plan, graph, cfg, ideal_pop, rng, stats),
        ChainMethod::Flip => flip_step(plan, graph, cfg, ideal_pop, rng, stats),
    }
}

fn adjacent_district_pairs(plan: &Plan, graph: &DualGraph) -> Vec<(u32, u32)> {
    let pairs: BTreeSet<(u32, u32)> = graph
        .endpoints()
        .iter()
        .filter_map(|&(a, b)| {
            let (la, lb) = (plan.label(a), plan.label(b));
            (la > 0 && lb > 0 && la != lb).then(|| (la.min(lb), la.max(lb)))
        })
        .collect();
    pairs.into_iter().collect()
}

/// Recombination: merge a uniformly chosen pair of adjacent districts,
/// draw a uniform spanning tree of the union and cut a uniformly chosen
/// edge that leaves both halves within tolerance. Modifies `plan` in place;
/// only units of the two merged districts change label.
pub fn recom_step<R: Rng>(
    plan: &mut Plan,
    graph: &DualGraph,
    cfg: &GenConfig,
    ideal_pop: f64,
    rng: &mut R,
    stats: &mut ChainStats,
) -> StepOutcome {
    let pairs = adjacent_district_pairs(plan, graph);
    if pairs.is_empty() {
        return stats.record(StepOutcome::SelfLoop);
    }
    let bounds = PopBounds::new(ideal_pop, cfg.epsilon);
    for _ in 0..cfg.max_attempts {
        let (la, lb) = pairs[rng.random_range(0..pairs.len())];
        let members: Vec<usize> = (0..graph.len())
            .filter(|&u| {
                let l = plan.label(u);
                l == la || l == lb
            })
            .collect();
        let sub = SubGraph::new(graph, members);
        let tree = uniform_spanning_tree(&sub, rng);
        let cuts = tree.cuts(|s, rest| bounds.contains(s) && bounds.contains(rest));
        if cuts.is_empty() {
            stats.rejections += 1;
            continue;
        }
        let v = cuts[rng.random_range(0..cuts.len())];
        let mut inside = vec![false; sub.len()];
        for l in tree.subtree(v) {
            inside[l] = true;
        }
        // the half holding the lowest-indexed unit keeps the lower label
        let (first, second) = if inside[0] { (la, lb) } else { (lb, la) };
        for (l, &u) in sub.units.iter().enumerate() {
            plan.set_label(u, if inside[l] { first } else { second });
        }
        return stats.record(StepOutcome::Moved);
    }
    stats.record(StepOutcome::SelfLoop)
}

/// Flip: relabel one endpoint of a uniformly chosen cut edge to the other
/// endpoint's district, accepted only if the donor stays nonempty and
/// contiguous and both districts stay within tolerance.
pub fn flip_step<R: Rng>(
    plan: &mut Plan,
    graph: &DualGraph,
    cfg: &GenConfig,
    ideal_pop: f64,
    rng: &mut R,
    stats: &mut ChainStats,
) -> StepOutcome {
    // (unit, destination label), both orientations of every cut edge
    let proposals: Vec<(usize, u32)> = graph
        .endpoints()
        .iter()
        .flat_map(|&(a, b)| {
            let (la, lb) = (plan.label(a), plan.label(b));
            let cut = la > 0 && lb > 0 && la != lb;
            cut.then_some([(a, lb), (b, la)]).into_iter().flatten()
        })
        .collect();
    if proposals.is_empty() {
        return stats.record(StepOutcome::SelfLoop);
    }
    let bounds = PopBounds::new(ideal_pop, cfg.epsilon);
    let pops = plan.district_populations(graph);
    for _ in 0..cfg.max_attempts {
        let (unit, to) = proposals[rng.random_range(0..proposals.len())];
        let from = plan.label(unit);
        let moved = graph.population(unit);
        let donor_pop = pops[(from - 1) as usize] - moved;
        let receiver_pop = pops[(to - 1) as usize] + moved;
        if !bounds.contains(donor_pop) || !bounds.contains(receiver_pop) {
            stats.rejections += 1;
            continue;
        }
        let donor: Vec<usize> = (0..graph.len())
            .filter(|&u| u != unit && plan.label(u) == from)
            .collect();
        if donor.is_empty() || !graph.is_connected_subset(&donor) {
            stats.rejections += 1;
            continue;
        }
        plan.set_label(unit, to);
        return stats.record(StepOutcome::Moved);
    }
    stats.record(StepOutcome::SelfLoop)
}
