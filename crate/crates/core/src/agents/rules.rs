//! Deterministic baseline policies. Every tie breaks to the lowest index
//! or label.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Agent, AgentError, Decision, DecisionContext, Party};
use crate::generators::CandidateSet;
use crate::graph::{DualGraph, Plan};
use crate::metrics::{deviation_from, district_geometry, Geometry, MetricsError, PdNormalization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RulePolicy {
    /// Maximize own-party seats, then own-party winning margins.
    Partisan,
    /// Minimize population deviation.
    Popdev,
    /// Maximize Polsby-Popper compactness.
    Compact,
}

impl fmt::Display for RulePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RulePolicy::Partisan => "partisan",
            RulePolicy::Popdev => "popdev",
            RulePolicy::Compact => "compact",
        })
    }
}

impl FromStr for RulePolicy {
    type Err = AgentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "partisan" => Ok(RulePolicy::Partisan),
            "popdev" => Ok(RulePolicy::Popdev),
            "compact" => Ok(RulePolicy::Compact),
            other => Err(AgentError::Config(format!("unknown rule policy {other:?}"))),
        }
    }
}

/// `party`'s two-party vote share in a district. Computed from the party's
/// own votes so that mirroring all votes mirrors the value exactly.
pub fn own_share(g: &Geometry<f64>, party: Party) -> Result<f64, MetricsError> {
    let total = g.dem_votes + g.rep_votes;
    if total <= 0.0 {
        return Err(MetricsError::NoVotes { label: g.label });
    }
    let own = match party {
        Party::Democrat => g.dem_votes,
        Party::Republican => g.rep_votes,
    };
    Ok(own / total)
}

/// Seats won (share strictly above one half) and the summed winning margin
/// `Σ max(0, share − 0.5)`. Ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PartisanScore {
    pub seats: u32,
    pub margin_sum: f64,
}

fn score_geometry(geoms: &[Geometry<f64>], party: Party) -> Result<PartisanScore, MetricsError> {
    let mut score = PartisanScore {
        seats: 0,
        margin_sum: 0.0,
    };
    for g in geoms {
        let share = own_share(g, party)?;
        if share > 0.5 {
            score.seats += 1;
            score.margin_sum += share - 0.5;
        }
    }
    Ok(score)
}

pub fn score_plan_partisan(plan: &Plan, graph: &DualGraph, party: Party) -> Result<PartisanScore, MetricsError> {
    score_geometry(&district_geometry(plan, graph), party)
}

/// First index whose key is maximal under `better`.
fn first_best<T: Copy>(keys: &[T], better: impl Fn(&T, &T) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, k) in keys.iter().enumerate() {
        if best.is_none_or(|b| better(k, &keys[b])) {
            best = Some(i);
        }
    }
    best
}

/// Candidate index preferred by `rule` for `party`.
pub fn choose_by_rule(
    rule: RulePolicy,
    party: Party,
    plans: &[Plan],
    graph: &DualGraph,
    ideal_pop: f64,
) -> Result<usize, AgentError> {
    let geoms: Vec<Vec<Geometry<f64>>> = plans.iter().map(|p| district_geometry(p, graph)).collect();
    let pick = match rule {
        RulePolicy::Partisan => {
            let keys = geoms
                .iter()
                .map(|g| score_geometry(g, party))
                .collect::<Result<Vec<_>, _>>()?;
            first_best(&keys, |a, b| (a.seats, a.margin_sum) > (b.seats, b.margin_sum))
        }
        RulePolicy::Popdev => {
            let keys: Vec<f64> = geoms
                .iter()
                .map(|g| {
                    let pops: Vec<u64> = g.iter().map(|d| d.population).collect();
                    deviation_from(&pops, ideal_pop, PdNormalization::Relative)
                })
                .collect();
            first_best(&keys, |a, b| a < b)
        }
        RulePolicy::Compact => {
            let keys = geoms
                .iter()
                .map(|g| {
                    let pps = g.iter().map(Geometry::polsby_popper).collect::<Result<Vec<f64>, _>>()?;
                    Ok(pps.iter().sum::<f64>() / pps.len() as f64)
                })
                .collect::<Result<Vec<f64>, MetricsError>>()?;
            first_best(&keys, |a, b| a > b)
        }
    };
    pick.ok_or(AgentError::NoCandidates)
}

/// District label of `plan` that `rule` would freeze for `party`.
///
/// The partisan rule freezes the safest own-party win (highest own share);
/// with no wins it freezes the district where the opponent is weakest.
pub fn freeze_by_rule(
    rule: RulePolicy,
    party: Party,
    plan: &Plan,
    graph: &DualGraph,
    ideal_pop: f64,
) -> Result<u32, AgentError> {
    let geoms = district_geometry::<f64>(plan, graph);
    let idx = match rule {
        RulePolicy::Partisan => {
            let own = geoms
                .iter()
                .map(|g| own_share(g, party))
                .collect::<Result<Vec<f64>, _>>()?;
            let wins: Vec<f64> = own.iter().map(|&s| if s > 0.5 { s } else { f64::NEG_INFINITY }).collect();
            if own.iter().any(|&s| s > 0.5) {
                first_best(&wins, |a, b| a > b)
            } else {
                let opp = geoms
                    .iter()
                    .map(|g| own_share(g, party.opponent()))
                    .collect::<Result<Vec<f64>, _>>()?;
                first_best(&opp, |a, b| a < b)
            }
        }
        RulePolicy::Popdev => {
            let dev: Vec<f64> = geoms.iter().map(|g| (g.population as f64 - ideal_pop).abs()).collect();
            first_best(&dev, |a, b| a < b)
        }
        RulePolicy::Compact => {
            let pps = geoms
                .iter()
                .map(Geometry::polsby_popper)
                .collect::<Result<Vec<f64>, _>>()?;
            first_best(&pps, |a, b| a > b)
        }
    };
    idx.map(|i| geoms[i].label).ok_or(AgentError::NoCandidates)
}

#[derive(Debug, Clone)]
pub struct RuleAgent {
    party: Party,
    rule: RulePolicy,
}

impl RuleAgent {
    pub fn new(party: Party, rule: RulePolicy) -> Self {
        Self { party, rule }
    }
}

impl Agent for RuleAgent {
    fn party(&self) -> Party {
        self.party
    }

    fn describe(&self) -> String {
        format!("rule:{}", self.rule)
    }

    fn choose(
        &mut self,
        candidates: &CandidateSet,
        ctx: &DecisionContext<'_>,
        graph: &DualGraph,
    ) -> Result<Decision, AgentError> {
        choose_by_rule(self.rule, self.party, &candidates.plans, graph, ctx.ideal_pop).map(Decision::plain)
    }

    fn freeze(&mut self, plan: &Plan, ctx: &DecisionContext<'_>, graph: &DualGraph) -> Result<Decision, AgentError> {
        freeze_by_rule(self.rule, self.party, plan, graph, ctx.ideal_pop).map(|l| Decision::plain(l as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid_from_cells;

    /// One-row state with a unit per district, so plan `[1, 2, ..]` maps
    /// each district to one cell.
    fn districts(cells: &[(u64, f64)]) -> (DualGraph, Plan) {
        let g = build_grid_from_cells(1, cells.len(), cells).unwrap();
        let plan = Plan::from_labels((1..=cells.len() as u32).collect(), cells.len() as u32).unwrap();
        (g, plan)
    }

    #[test]
    fn partisan_scores() {
        let (g, p) = districts(&[(100, 0.6), (100, 0.4)]);
        let s = score_plan_partisan(&p, &g, Party::Democrat).unwrap();
        assert_eq!(s.seats, 1);
        assert!((s.margin_sum - 0.1).abs() < 1e-12);

        let (g, p) = districts(&[(100, 0.5)]);
        for party in [Party::Democrat, Party::Republican] {
            assert_eq!(
                score_plan_partisan(&p, &g, party).unwrap(),
                PartisanScore {
                    seats: 0,
                    margin_sum: 0.0
                }
            );
        }

        let (g, p) = districts(&[(100, 0.45), (100, 0.52), (100, 0.3)]);
        let s = score_plan_partisan(&p, &g, Party::Republican).unwrap();
        assert_eq!(s.seats, 2);
        assert!((s.margin_sum - 0.25).abs() < 1e-12);
    }

    #[test]
    fn first_best_breaks_ties_low() {
        let keys = [(1u32, 0.1), (2, 0.3), (2, 0.3)];
        assert_eq!(first_best(&keys, |a, b| a > b), Some(1));
        let pd = [0.02, 0.01, 0.01];
        assert_eq!(first_best(&pd, |a, b| a < b), Some(1));
        let pps = [0.5, 0.7];
        assert_eq!(first_best(&pps, |a, b| a > b), Some(1));
        assert_eq!(first_best::<f64>(&[], |a, b| a > b), None);
    }

    #[test]
    fn partisan_freeze_examples() {
        let (g, p) = districts(&[(100, 0.3), (100, 0.55), (100, 0.48)]);
        assert_eq!(freeze_by_rule(RulePolicy::Partisan, Party::Republican, &p, &g, 100.0).unwrap(), 1);
        let (g, p) = districts(&[(100, 0.6), (100, 0.55)]);
        assert_eq!(freeze_by_rule(RulePolicy::Partisan, Party::Republican, &p, &g, 100.0).unwrap(), 2);
    }

    #[test]
    fn popdev_freeze_example() {
        let (g, p) = districts(&[(105, 0.5), (98, 0.5), (109, 0.5)]);
        assert_eq!(freeze_by_rule(RulePolicy::Popdev, Party::Democrat, &p, &g, 100.0).unwrap(), 2);
    }

    #[test]
    fn compact_freeze_prefers_roundest() {
        // 2x2 grid: a 2-cell row (pps 0.698) vs single cells (pps 0.785)
        let g = build_grid_from_cells(2, 2, &[(1, 0.5); 4]).unwrap();
        let p = Plan::from_labels(vec![1, 1, 2, 3], 3).unwrap();
        assert_eq!(freeze_by_rule(RulePolicy::Compact, Party::Democrat, &p, &g, 1.0).unwrap(), 2);
    }
}
