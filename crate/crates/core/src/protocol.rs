//! The Choose-and-Freeze game.
//!
//! Round `n` generates `c` candidate plans over the unassigned region with
//! `districts_left` districts. The chooser picks one, the freezer locks one
//! of its districts, and the region shrinks by that district. Roles swap
//! every round. After `N − 1` rounds the remaining region becomes district
//! `N`. Each round draws from its own derived random stream, so a game is
//! a pure function of its config, the graph and (deterministic) agents.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Agent, AgentError, DecisionContext, FrozenSummary, Party, Role, StateProfile};
use crate::generators::{collect_candidates, CandidateSet, ChainStats, GenConfig, GenError, PopBounds};
use crate::graph::{DualGraph, Plan, PlanHash, Region};
use crate::metrics::{metrics_report, MetricsError, PdNormalization, Report};
use crate::rng::{self, domain};

/// Fresh candidate sets drawn when a frozen district would disconnect the
/// remaining region, before the game gives up.
pub const MAX_REDRAWS: u32 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub num_districts: u32,
    pub candidates_per_round: usize,
    pub first_mover: Party,
    #[serde(default)]
    pub gen: GenConfig,
    pub master_seed: u64,
}

impl GameConfig {
    pub fn new(num_districts: u32, candidates_per_round: usize, first_mover: Party, master_seed: u64) -> Self {
        Self {
            num_districts,
            candidates_per_round,
            first_mover,
            gen: GenConfig::default(),
            master_seed,
        }
    }

    pub fn validate(&self, graph: &DualGraph) -> Result<(), GameError> {
        if self.num_districts == 0 {
            return Err(GameError::Config("num_districts must be at least 1".into()));
        }
        if self.num_districts as usize > graph.len() {
            return Err(GameError::Config(format!(
                "{} districts requested but the graph has {} units",
                self.num_districts,
                graph.len()
            )));
        }
        if self.candidates_per_round == 0 {
            return Err(GameError::Config("candidates_per_round must be at least 1".into()));
        }
        self.gen.validate().map_err(|e| GameError::Config(e.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("game configuration: {0}")]
    Config(String),
    #[error("round {round}: {source}")]
    Generation {
        round: usize,
        #[source]
        source: GenError,
    },
    #[error("round {round}: {party} {role:?} agent failed: {source}")]
    Agent {
        round: usize,
        role: Role,
        party: Party,
        #[source]
        source: AgentError,
    },
    #[error("round {round}: {party} {role:?} agent answered {value}, valid range is {lo}..={hi}")]
    InvalidDecision {
        round: usize,
        role: Role,
        party: Party,
        value: usize,
        lo: usize,
        hi: usize,
    },
    #[error("round {round}: every frozen district disconnected the remainder after {draws} candidate draws")]
    RedrawsExhausted { round: usize, draws: u32 },
    #[error("play_round needs at least 2 districts left, have {0}")]
    NothingToPlay(u32),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// `(chooser, freezer)` for 1-based `round`.
pub fn role_schedule(round: usize, first_mover: Party) -> (Party, Party) {
    assert!(round >= 1, "rounds are numbered from 1");
    let chooser = if round % 2 == 1 { first_mover } else { first_mover.opponent() };
    (chooser, chooser.opponent())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenDistrict {
    /// Final label: position in freeze order, from 1.
    pub label: u32,
    pub units: Vec<usize>,
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    /// Next round to play, from 1.
    pub round: usize,
    pub remaining: Region,
    pub frozen: Vec<FrozenDistrict>,
    pub districts_left: u32,
    pub num_districts: u32,
}

impl GameState {
    pub fn new(graph: &DualGraph, num_districts: u32) -> Self {
        Self {
            round: 1,
            remaining: Region::all(graph),
            frozen: Vec::new(),
            districts_left: num_districts,
            num_districts,
        }
    }

    /// Checks the partition invariants: frozen sets pairwise disjoint and
    /// together with the remainder covering every unit exactly once,
    /// district count bookkeeping, and each frozen district contiguous and
    /// within the population window.
    pub fn check_invariants(&self, graph: &DualGraph, ideal_pop: f64, epsilon: f64) -> Result<(), String> {
        let mut seen = vec![false; graph.len()];
        let all = self.frozen.iter().flat_map(|f| f.units.iter()).chain(self.remaining.members());
        for &u in all {
            if seen[u] {
                return Err(format!("unit {} assigned twice", graph.unit(u).id));
            }
            seen[u] = true;
        }
        if let Some(u) = seen.iter().position(|&s| !s) {
            return Err(format!("unit {} not covered", graph.unit(u).id));
        }
        if self.districts_left as usize + self.frozen.len() != self.num_districts as usize {
            return Err(format!(
                "{} districts left with {} frozen of {}",
                self.districts_left,
                self.frozen.len(),
                self.num_districts
            ));
        }
        let bounds = PopBounds::new(ideal_pop, epsilon);
        for f in &self.frozen {
            if !graph.is_connected_subset(&f.units) {
                return Err(format!("frozen district {} is not contiguous", f.label));
            }
            let pop: u64 = f.units.iter().map(|&u| graph.population(u)).sum();
            if !bounds.contains(pop) {
                return Err(format!("frozen district {} has population {pop} outside the window", f.label));
            }
        }
        Ok(())
    }

    fn summaries(&self, graph: &DualGraph) -> Vec<FrozenSummary> {
        self.frozen
            .iter()
            .map(|f| {
                let (mut pop, mut dem, mut rep) = (0u64, 0.0, 0.0);
                for &u in &f.units {
                    let unit = graph.unit(u);
                    pop += unit.population;
                    dem += unit.dem_votes;
                    rep += unit.rep_votes;
                }
                FrozenSummary {
                    label: f.label,
                    population: pop,
                    pct_dem: if dem + rep > 0.0 { dem / (dem + rep) } else { 0.5 },
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub chooser: Party,
    pub freezer: Party,
    /// Candidate plans charged to the budget for this round (`c`).
    pub candidates_requested: usize,
    /// Distinct candidates actually offered, canonical hashes in order.
    pub candidate_hashes: Vec<PlanHash>,
    pub chosen_index: usize,
    pub chosen_plan_hash: PlanHash,
    /// Label within the chosen plan.
    pub frozen_label: u32,
    /// Label in the final plan.
    pub final_label: u32,
    pub frozen_units: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chooser_rationale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freezer_rationale: Option<String>,
    /// Candidate draws discarded because the frozen district split the remainder.
    pub redraws: u32,
    /// Chain diagnostics over all draws of this round.
    pub chain: ChainStats,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<String>,
}

fn check_party(agent: &dyn Agent, party: Party) -> Result<(), GameError> {
    if agent.party() != party {
        return Err(GameError::Config(format!(
            "agent {} plays for {}, expected {party}",
            agent.describe(),
            agent.party()
        )));
    }
    Ok(())
}

/// True when removing some district of `plan` leaves `remaining` connected.
fn has_freezable_district(plan: &Plan, remaining: &Region, graph: &DualGraph) -> bool {
    (1..=plan.k()).any(|l| graph.is_connected_subset(remaining.difference(&plan.district(l)).members()))
}

/// Plays one round and advances `state`.
///
/// When the frozen district disconnects the remainder the round is played
/// again on a fresh candidate set (at most [`MAX_REDRAWS`] times). Plans in
/// which every district would disconnect the remainder are dropped from the
/// set before the chooser sees it.
pub fn play_round(
    state: &mut GameState,
    chooser: &mut dyn Agent,
    freezer: &mut dyn Agent,
    graph: &DualGraph,
    profile: &StateProfile,
    config: &GameConfig,
) -> Result<RoundRecord, GameError> {
    if state.districts_left < 2 {
        return Err(GameError::NothingToPlay(state.districts_left));
    }
    let round = state.round;
    let (chooser_party, freezer_party) = role_schedule(round, config.first_mover);
    check_party(chooser, chooser_party)?;
    check_party(freezer, freezer_party)?;
    let ideal_pop = graph.ideal_population(config.num_districts);
    let k = state.districts_left;
    let c = config.candidates_per_round;
    let mut annotations = Vec::new();
    let mut chain = ChainStats::default();

    for draw in 0..=MAX_REDRAWS {
        let mut rng = rng::stream(config.master_seed, &[domain::ROUND, round as u64, draw as u64]);
        let collection = collect_candidates(&state.remaining, k, c, graph, &config.gen, ideal_pop, &mut rng)
            .map_err(|source| GameError::Generation { round, source })?;
        chain.absorb(&collection.stats);
        let mut set: CandidateSet = collection.set;
        set.round = round;
        set.retain(|p| has_freezable_district(p, &state.remaining, graph));
        if set.is_empty() {
            annotations.push(format!("draw {draw}: no candidate leaves a connected remainder"));
            continue;
        }
        if set.len() < c {
            let msg = format!("round {round}: {} distinct candidates of {c} requested", set.len());
            log::warn!("{msg}");
            annotations.push(msg);
        }

        let frozen = state.summaries(graph);
        let mut ctx = DecisionContext {
            round,
            role: Role::Choose,
            districts_left: k,
            frozen,
            profile,
            ideal_pop,
        };
        let choice = chooser.choose(&set, &ctx, graph).map_err(|source| GameError::Agent {
            round,
            role: Role::Choose,
            party: chooser_party,
            source,
        })?;
        if choice.value >= set.len() {
            return Err(GameError::InvalidDecision {
                round,
                role: Role::Choose,
                party: chooser_party,
                value: choice.value,
                lo: 0,
                hi: set.len() - 1,
            });
        }
        let plan = &set.plans[choice.value];

        ctx.role = Role::Freeze;
        let freeze = freezer.freeze(plan, &ctx, graph).map_err(|source| GameError::Agent {
            round,
            role: Role::Freeze,
            party: freezer_party,
            source,
        })?;
        if freeze.value < 1 || freeze.value > k as usize {
            return Err(GameError::InvalidDecision {
                round,
                role: Role::Freeze,
                party: freezer_party,
                value: freeze.value,
                lo: 1,
                hi: k as usize,
            });
        }
        let label = freeze.value as u32;
        let district = plan.district(label);
        let rest = state.remaining.difference(&district);
        if !graph.is_connected_subset(rest.members()) {
            let msg = format!("draw {draw}: freezing district {label} disconnects the remainder; redrawing");
            log::info!("round {round}: {msg}");
            annotations.push(msg);
            continue;
        }

        for (who, d) in [("chooser", &choice), ("freezer", &freeze)] {
            if let Some(note) = &d.fallback {
                annotations.push(format!("{who}: {note}"));
            }
        }
        let final_label = state.frozen.len() as u32 + 1;
        let record = RoundRecord {
            round,
            chooser: chooser_party,
            freezer: freezer_party,
            candidates_requested: c,
            candidate_hashes: set.hashes.clone(),
            chosen_index: choice.value,
            chosen_plan_hash: set.hashes[choice.value],
            frozen_label: label,
            final_label,
            frozen_units: district.ids(graph).into_iter().map(str::to_string).collect(),
            chooser_rationale: choice.rationale,
            freezer_rationale: freeze.rationale,
            redraws: draw,
            chain,
            annotations,
        };
        state.frozen.push(FrozenDistrict {
            label: final_label,
            units: district.members().to_vec(),
            round,
        });
        state.remaining = rest;
        state.districts_left -= 1;
        state.round += 1;
        return Ok(record);
    }
    Err(GameError::RedrawsExhausted {
        round,
        draws: MAX_REDRAWS + 1,
    })
}

/// Assembles the full plan: frozen districts keep their freeze-order
/// labels and the remaining region becomes district `N`.
pub fn finalize(state: &GameState, graph: &DualGraph) -> Plan {
    assert_eq!(state.districts_left, 1, "finalize needs exactly one district left");
    let mut districts: Vec<Vec<usize>> = state.frozen.iter().map(|f| f.units.clone()).collect();
    districts.push(state.remaining.members().to_vec());
    let plan = Plan::from_districts(graph.len(), &districts).expect("frozen districts form a dense labelling");
    assert!(
        graph.is_connected_subset(state.remaining.members()),
        "final remaining region is not contiguous"
    );
    plan
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// `c` per played round: `c · (N − 1)` for a complete game.
    pub candidates_generated: u64,
    /// The `c · N` reading of the sample budget.
    pub nominal: u64,
    /// Distinct candidates actually offered to choosers.
    pub distinct_offered: u64,
    /// Candidates generated for draws that were discarded and redrawn.
    pub redraw_candidates: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRow {
    pub unit_id: String,
    pub district: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: GameConfig,
    pub state_name: String,
    pub dem_agent: String,
    pub rep_agent: String,
    pub ideal_population: f64,
    pub rounds: Vec<RoundRecord>,
    pub final_assignment: Vec<AssignmentRow>,
    pub final_hash: PlanHash,
    pub metrics: Report<f64>,
    pub budget: Budget,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Transcript {
    /// Rebuilds the final plan against `graph`.
    pub fn final_plan(&self, graph: &DualGraph) -> Result<Plan, String> {
        let mut labels = vec![0u32; graph.len()];
        for row in &self.final_assignment {
            let u = graph
                .index_of(&row.unit_id)
                .ok_or_else(|| format!("unknown unit {}", row.unit_id))?;
            labels[u] = row.district;
        }
        Plan::from_labels(labels, self.config.num_districts).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Plays a whole game: `N − 1` rounds, then [`finalize`].
pub fn run_game(
    graph: &DualGraph,
    profile: &StateProfile,
    dem: &mut dyn Agent,
    rep: &mut dyn Agent,
    config: &GameConfig,
) -> Result<Transcript, GameError> {
    config.validate(graph)?;
    check_party(dem, Party::Democrat)?;
    check_party(rep, Party::Republican)?;
    for agent in [&*dem, &*rep] {
        agent.check_ready(profile).map_err(|e| GameError::Config(e.to_string()))?;
    }

    let mut state = GameState::new(graph, config.num_districts);
    let mut rounds = Vec::with_capacity(config.num_districts as usize);
    while state.districts_left > 1 {
        let (chooser_party, _) = role_schedule(state.round, config.first_mover);
        let record = match chooser_party {
            Party::Democrat => play_round(&mut state, dem, rep, graph, profile, config)?,
            Party::Republican => play_round(&mut state, rep, dem, graph, profile, config)?,
        };
        rounds.push(record);
    }
    let plan = finalize(&state, graph);
    let metrics = metrics_report::<f64>(&plan, graph, PdNormalization::Relative)?;

    let c = config.candidates_per_round as u64;
    let budget = Budget {
        candidates_generated: rounds.iter().map(|r| r.candidates_requested as u64).sum(),
        nominal: c * config.num_districts as u64,
        distinct_offered: rounds.iter().map(|r| r.candidate_hashes.len() as u64).sum(),
        redraw_candidates: rounds.iter().map(|r| r.redraws as u64 * c).sum(),
    };
    let warnings = rounds
        .iter()
        .flat_map(|r| r.annotations.iter().map(move |a| format!("round {}: {a}", r.round)))
        .collect();
    let final_assignment = graph
        .units()
        .iter()
        .zip(plan.labels())
        .map(|(u, &d)| AssignmentRow {
            unit_id: u.id.clone(),
            district: d,
        })
        .collect();

    Ok(Transcript {
        config: config.clone(),
        state_name: profile.name.clone(),
        dem_agent: dem.describe(),
        rep_agent: rep.describe(),
        ideal_population: graph.ideal_population(config.num_districts),
        rounds,
        final_assignment,
        final_hash: plan.canonical_hash(),
        metrics,
        budget,
        warnings,
    })
}

/// Re-runs the game recorded in `transcript` and reports whether the
/// final plan hash and every round's decisions match.
pub fn replay(
    transcript: &Transcript,
    graph: &DualGraph,
    profile: &StateProfile,
    dem: &mut dyn Agent,
    rep: &mut dyn Agent,
) -> Result<bool, GameError> {
    let again = run_game(graph, profile, dem, rep, &transcript.config)?;
    let same_rounds = again.rounds.len() == transcript.rounds.len()
        && again.rounds.iter().zip(&transcript.rounds).all(|(a, b)| {
            a.chosen_plan_hash == b.chosen_plan_hash
                && a.frozen_units.iter().collect::<HashSet<_>>() == b.frozen_units.iter().collect::<HashSet<_>>()
        });
    Ok(same_rounds && again.final_hash == transcript.final_hash)
}
