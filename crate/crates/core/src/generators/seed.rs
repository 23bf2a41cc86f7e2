use rand::Rng;

use super::tree::{uniform_spanning_tree, SubGraph};
use super::{GenConfig, GenError, PopBounds};
use crate::graph::{DualGraph, Plan, Region};

/// Initial feasible plan by recursive spanning-tree bisection.
///
/// Each level draws a uniform spanning tree of the current piece and cuts
/// an edge that leaves one side admissible for `⌊k/2⌋` districts and the
/// other for `⌈k/2⌉`. All levels share one budget of `max_attempts` tree
/// draws; a piece that cannot be split within a few draws sends its parent
/// back to redraw, so one awkward piece cannot exhaust the budget.
pub fn seed_plan<R: Rng>(
    region: &Region,
    k: u32,
    graph: &DualGraph,
    cfg: &GenConfig,
    ideal_pop: f64,
    rng: &mut R,
) -> Result<Plan, GenError> {
    if region.is_empty() {
        return Err(GenError::EmptySet);
    }
    if k == 0 {
        return Err(GenError::Infeasible("k must be at least 1".into()));
    }
    if k as usize > region.len() {
        return Err(GenError::Infeasible(format!(
            "{k} districts requested over {} units",
            region.len()
        )));
    }
    if !graph.is_connected_subset(region.members()) {
        return Err(GenError::Infeasible("region is not contiguous".into()));
    }
    let bounds = PopBounds::new(ideal_pop, cfg.epsilon);
    let pop = region.population(graph);
    if !bounds.admits(pop, k) {
        return Err(GenError::Infeasible(format!(
            "region population {pop} cannot form {k} districts within [{:.1}, {:.1}]",
            bounds.lo, bounds.hi
        )));
    }
    if k == 1 {
        return Ok(Plan::whole(graph, region));
    }

    let mut budget = cfg.max_attempts;
    let pieces = bisect(graph, region.members().to_vec(), k, bounds, &mut budget, usize::MAX, rng)
        .ok_or(GenError::SeedingFailed {
            attempts: cfg.max_attempts,
        })?;
    let plan = Plan::from_districts(graph.len(), &pieces).expect("bisection yields k nonempty pieces");
    Ok(plan.canonicalized())
}

/// Tree draws a sub-piece gets before handing control back to its parent.
const PIECE_TRIES: usize = 10;

fn bisect<R: Rng>(
    graph: &DualGraph,
    units: Vec<usize>,
    k: u32,
    bounds: PopBounds,
    budget: &mut usize,
    tries: usize,
    rng: &mut R,
) -> Option<Vec<Vec<usize>>> {
    if k == 1 {
        return Some(vec![units]);
    }
    let small = k / 2;
    let large = k - small;
    let sub = SubGraph::new(graph, units);
    for _ in 0..tries {
        if *budget == 0 {
            break;
        }
        *budget -= 1;
        let tree = uniform_spanning_tree(&sub, rng);
        // (vertex, districts assigned to its subtree)
        // cuts close to the exact targets first: loosely admissible pieces
        // (e.g. 9 units for two 5-unit districts) often cannot be split
        let mut cuts = Vec::new();
        for fits in [PopBounds::near, PopBounds::admits] {
            for v in tree.cuts(|s, rest| fits(&bounds, s, small) && fits(&bounds, rest, large)) {
                cuts.push((v, small));
            }
            if small != large {
                for v in tree.cuts(|s, rest| fits(&bounds, s, large) && fits(&bounds, rest, small)) {
                    cuts.push((v, large));
                }
            }
            if !cuts.is_empty() {
                break;
            }
        }
        if cuts.is_empty() {
            continue;
        }
        let (v, k_sub) = cuts[rng.random_range(0..cuts.len())];
        let mut inside = vec![false; sub.len()];
        for l in tree.subtree(v) {
            inside[l] = true;
        }
        let (a, b): (Vec<usize>, Vec<usize>) = (0..sub.len()).partition(|&l| inside[l]);
        let a: Vec<usize> = a.into_iter().map(|l| sub.units[l]).collect();
        let b: Vec<usize> = b.into_iter().map(|l| sub.units[l]).collect();
        let Some(mut left) = bisect(graph, a, k_sub, bounds, budget, PIECE_TRIES, rng) else {
            continue;
        };
        let Some(right) = bisect(graph, b, k - k_sub, bounds, budget, PIECE_TRIES, rng) else {
            continue;
        };
        left.extend(right);
        return Some(left);
    }
    None
}
