use crate::generators::{sample_chain, ChainMethod, ChainStats, GenConfig};
use crate::graph::{DualGraph, Region};
use crate::metrics::{metrics_report, PdNormalization, Report};
use crate::rng;

use super::HarnessError;

/// Full-state ensemble: seeds an `n`-district plan, runs the `method`
/// chain and evaluates `budget` states, one every `cfg.chain_thinning`
/// steps. The stream is derived from `seed` alone.
pub fn run_ensemble_baseline(
    graph: &DualGraph,
    n: u32,
    method: ChainMethod,
    budget: usize,
    cfg: &GenConfig,
    seed: u64,
    norm: PdNormalization,
) -> Result<(Vec<Report<f64>>, ChainStats), HarnessError> {
    if budget == 0 {
        return Err(HarnessError::Config("baseline budget must be at least 1".into()));
    }
    let cfg = GenConfig {
        method,
        ..cfg.clone()
    };
    let ideal = graph.ideal_population(n);
    let mut stats = ChainStats::default();
    let plans = sample_chain(
        &Region::all(graph),
        n,
        budget,
        graph,
        &cfg,
        ideal,
        &mut rng::stream(seed, &[]),
        &mut stats,
    )?;
    let reports = plans
        .iter()
        .map(|p| metrics_report(p, graph, norm))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((reports, stats))
}
