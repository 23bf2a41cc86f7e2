//! Batch experiments: `R` independent games, matched-budget ensemble
//! baselines, summaries and report files.
//!
//! Every game and baseline chain owns a random stream derived from the
//! experiment seed and its own index, so results do not depend on the
//! worker count or on scheduling order.

mod baseline;
mod export;
mod stats;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentError, AgentSpec, Party, Policy, RequestLimiter, StateProfile};
use crate::generators::{ChainMethod, ChainStats, GenConfig, GenError};
use crate::graph::{DualGraph, Plan};
use crate::grid::{build_grid_state, GridError, VoteModel};
use crate::ingest::{load_assignment, load_dual_graph, ContiguityPolicy, GraphFormat, IngestError};
use crate::metrics::{metrics_report, MetricsError, PdNormalization, Report};
use crate::protocol::{run_game, GameConfig, Transcript};
use crate::rng::{self, domain};

pub use baseline::run_ensemble_baseline;
pub use export::{export, summary_markdown, RUNS_HEADER};
pub use stats::{format_scaled, summarize, summarize_reports, Scaling, Summary};

/// Method name of game results in reports.
pub const GAME_METHOD: &str = "agentmandering";
/// Method name of the enacted reference plan in reports.
pub const ENACTED_METHOD: &str = "enacted";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("experiment configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Generation(#[from] GenError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSource {
    pub path: PathBuf,
    /// `canonical-json` or `node-edge-csv`; detected from the path when absent.
    #[serde(default)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "default_pop_per_unit")]
    pub pop_per_unit: u64,
    #[serde(default = "default_vote_model")]
    pub vote_model: VoteModel,
    #[serde(default)]
    pub seed: u64,
}

fn default_pop_per_unit() -> u64 {
    100
}

fn default_vote_model() -> VoteModel {
    VoteModel::Uniform5050
}

impl GridSpec {
    pub fn build(&self) -> Result<DualGraph, GridError> {
        build_grid_state(self.rows, self.cols, self.pop_per_unit, self.vote_model, self.seed)
    }
}

/// Settings applied to every `llm:` agent spec.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmOverrides {
    pub api_key_env: Option<String>,
    pub max_retries: Option<u32>,
    pub timeout_secs: Option<u64>,
    pub backoff_ms: Option<u64>,
    pub fallback: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsConfig {
    #[serde(default = "default_agent")]
    pub dem: String,
    #[serde(default = "default_agent")]
    pub rep: String,
    #[serde(default)]
    pub llm: LlmOverrides,
}

fn default_agent() -> String {
    "rule:partisan".into()
}

impl Default for AgentsConfig {
    fn default() -> Self {
        Self {
            dem: default_agent(),
            rep: default_agent(),
            llm: LlmOverrides::default(),
        }
    }
}

impl AgentsConfig {
    pub fn spec(&self, party: Party) -> Result<AgentSpec, AgentError> {
        let text = match party {
            Party::Democrat => &self.dem,
            Party::Republican => &self.rep,
        };
        let mut spec = AgentSpec::parse(party, text)?;
        if let Policy::Llm(cfg) = &mut spec.policy {
            let o = &self.llm;
            if let Some(v) = &o.api_key_env {
                cfg.api_key_env = v.clone();
            }
            cfg.max_retries = o.max_retries.unwrap_or(cfg.max_retries);
            cfg.timeout_secs = o.timeout_secs.unwrap_or(cfg.timeout_secs);
            cfg.backoff_ms = o.backoff_ms.unwrap_or(cfg.backoff_ms);
            cfg.fallback = o.fallback.unwrap_or(cfg.fallback);
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSpec {
    pub method: ChainMethod,
    /// Plans to collect; defaults to `c · N · R`.
    #[serde(default)]
    pub budget: Option<usize>,
    /// Report name; defaults to the method name.
    #[serde(default)]
    pub name: Option<String>,
}

impl BaselineSpec {
    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.method.to_string())
    }
}

/// Everything an experiment needs, readable from TOML. Relative paths are
/// resolved against the config file's directory by [`ExperimentConfig::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_state_name")]
    pub state_name: String,
    #[serde(default)]
    pub graph: Option<GraphSource>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub districts: u32,
    pub candidates: usize,
    #[serde(default = "default_first_mover")]
    pub first_mover: Party,
    #[serde(default)]
    pub agents: AgentsConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub gen: GenConfig,
    /// Worker threads; 0 uses one per core.
    #[serde(default)]
    pub workers: usize,
    /// Cap on chat requests in flight across all games.
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Plain-text state background; synthesized from the graph when absent.
    #[serde(default)]
    pub profile: Option<PathBuf>,
    /// `unit_id,district` CSV evaluated as the `enacted` reference.
    #[serde(default)]
    pub enacted_assignment: Option<PathBuf>,
    #[serde(default)]
    pub baselines: Vec<BaselineSpec>,
    #[serde(default)]
    pub scaling: Scaling,
    #[serde(default)]
    pub pd_normalization: PdNormalization,
}

fn default_state_name() -> String {
    "state".into()
}

fn default_runs() -> usize {
    10
}

fn default_first_mover() -> Party {
    Party::Democrat
}

fn default_in_flight() -> usize {
    4
}

impl ExperimentConfig {
    /// A config over an existing graph file with defaults everywhere else.
    pub fn minimal(districts: u32, candidates: usize) -> Self {
        Self {
            state_name: default_state_name(),
            graph: None,
            grid: None,
            runs: default_runs(),
            districts,
            candidates,
            first_mover: default_first_mover(),
            agents: AgentsConfig::default(),
            seed: 0,
            gen: GenConfig::default(),
            workers: 0,
            max_in_flight: default_in_flight(),
            output_dir: None,
            profile: None,
            enacted_assignment: None,
            baselines: Vec::new(),
            scaling: Scaling::default(),
            pd_normalization: PdNormalization::Relative,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text).map_err(|message| HarnessError::Parse {
            path: path.to_path_buf(),
            message,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(g) = cfg.graph.as_mut() {
            fix(&mut g.path);
        }
        for p in [&mut cfg.output_dir, &mut cfg.profile, &mut cfg.enacted_assignment]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.districts == 0 || self.candidates == 0 {
            return bad("districts and candidates must be at least 1");
        }
        match (&self.graph, &self.grid) {
            (Some(_), Some(_)) => return bad("give either [graph] or [grid], not both"),
            (None, None) => return bad("one of [graph] or [grid] is required"),
            _ => {}
        }
        if self.baselines.iter().any(|b| b.budget == Some(0)) {
            return bad("baseline budgets must be at least 1");
        }
        self.gen.validate()?;
        self.agents.spec(Party::Democrat)?;
        self.agents.spec(Party::Republican)?;
        Ok(())
    }

    /// `c · N · R`, the default baseline budget.
    pub fn matched_budget(&self) -> usize {
        self.candidates * self.districts as usize * self.runs
    }

    pub fn load_graph(&self) -> Result<DualGraph, HarnessError> {
        match (&self.graph, &self.grid) {
            (Some(src), _) => {
                let format = match &src.format {
                    Some(f) => f.parse().map_err(HarnessError::Config)?,
                    None => GraphFormat::detect(&src.path),
                };
                Ok(load_dual_graph(&src.path, format)?)
            }
            (None, Some(grid)) => Ok(grid.build()?),
            (None, None) => Err(HarnessError::Config("no graph source".into())),
        }
    }

    pub fn load_profile(&self, graph: &DualGraph) -> Result<StateProfile, HarnessError> {
        match &self.profile {
            Some(path) => {
                let mut p = StateProfile::load(path).map_err(|source| HarnessError::Io {
                    path: path.clone(),
                    source,
                })?;
                p.name = self.state_name.clone();
                Ok(p)
            }
            None => Ok(StateProfile::synthetic(&self.state_name, graph)),
        }
    }

    /// Game config of run `run`, with its derived master seed.
    pub fn game_config(&self, run: usize) -> GameConfig {
        GameConfig {
            num_districts: self.districts,
            candidates_per_round: self.candidates,
            first_mover: self.first_mover,
            gen: self.gen.clone(),
            master_seed: rng::derive_seed(self.seed, &[domain::GAME_RUN, run as u64]),
        }
    }
}

#[derive(Debug, Clone)]
pub enum RunOutcome {
    Completed {
        metrics: Report<f64>,
        transcript: Box<Transcript>,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub name: String,
    pub method: ChainMethod,
    pub budget: usize,
    pub plans: Vec<Report<f64>>,
    pub chain: ChainStats,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineLedger {
    pub name: String,
    pub budget: usize,
    pub produced: usize,
    pub chain: ChainStats,
}

/// Sample accounting for the whole experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub runs_requested: usize,
    pub runs_completed: usize,
    /// Summed over completed games; `R · c · (N − 1)` when all complete.
    pub candidates_generated: u64,
    pub expected_candidates: u64,
    pub nominal_candidates: u64,
    pub distinct_offered: u64,
    pub redraw_candidates: u64,
    pub baselines: Vec<BaselineLedger>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub metrics: [Summary<f64>; 5],
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub state_name: String,
    pub runs: Vec<RunResult>,
    pub baselines: Vec<BaselineResult>,
    pub enacted: Option<Report<f64>>,
    pub summaries: Vec<SummaryRow>,
    pub ledger: BudgetLedger,
    pub scaling: Scaling,
}

impl ExperimentReport {
    pub fn game_metrics(&self) -> Vec<&Report<f64>> {
        self.runs
            .iter()
            .filter_map(|r| match &r.outcome {
                RunOutcome::Completed { metrics, .. } => Some(metrics),
                RunOutcome::Failed { .. } => None,
            })
            .collect()
    }

    pub fn failures(&self) -> Vec<String> {
        let runs = self.runs.iter().filter_map(|r| match &r.outcome {
            RunOutcome::Failed { error } => Some(format!("run {}: {error}", r.run)),
            RunOutcome::Completed { .. } => None,
        });
        let baselines = self
            .baselines
            .iter()
            .filter_map(|b| b.error.as_ref().map(|e| format!("baseline {}: {e}", b.name)));
        runs.chain(baselines).collect()
    }

    pub fn summary(&self, method: &str) -> Option<&SummaryRow> {
        self.summaries.iter().find(|s| s.method == method)
    }
}

/// Runs the experiment and, when `output_dir` is set, writes its files.
/// Individual run or baseline failures do not abort the experiment; they
/// are listed by [`ExperimentReport::failures`] and flagged on disk.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let graph = cfg.load_graph()?;
    let profile = cfg.load_profile(&graph)?;
    let enacted_plan: Option<Plan> = cfg
        .enacted_assignment
        .as_deref()
        .map(|p| load_assignment(p, &graph, ContiguityPolicy::Warn).map(|a| a.plan))
        .transpose()?;
    let dem = cfg.agents.spec(Party::Democrat)?;
    let rep = cfg.agents.spec(Party::Republican)?;
    let limiter = Arc::new(RequestLimiter::new(cfg.max_in_flight));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;

    let (runs, baselines) = pool.install(|| {
        rayon::join(
            || {
                (0..cfg.runs)
                    .into_par_iter()
                    .map(|run| {
                        let game = cfg.game_config(run);
                        let mut d = dem.build(Some(limiter.clone()));
                        let mut r = rep.build(Some(limiter.clone()));
                        let outcome = run_game(&graph, &profile, d.as_mut(), r.as_mut(), &game)
                            .map_err(|e| e.to_string())
                            .and_then(|t| {
                                let metrics = match cfg.pd_normalization {
                                    PdNormalization::Relative => t.metrics.clone(),
                                    norm => {
                                        let plan = t.final_plan(&graph)?;
                                        metrics_report(&plan, &graph, norm).map_err(|e| e.to_string())?
                                    }
                                };
                                Ok((metrics, t))
                            });
                        let outcome = match outcome {
                            Ok((metrics, transcript)) => RunOutcome::Completed {
                                metrics,
                                transcript: Box::new(transcript),
                            },
                            Err(error) => {
                                log::error!("run {run} failed: {error}");
                                RunOutcome::Failed { error }
                            }
                        };
                        RunResult {
                            run,
                            seed: game.master_seed,
                            outcome,
                        }
                    })
                    .collect::<Vec<_>>()
            },
            || {
                cfg.baselines
                    .par_iter()
                    .enumerate()
                    .map(|(i, b)| {
                        let budget = b.budget.unwrap_or_else(|| cfg.matched_budget());
                        let seed = rng::derive_seed(cfg.seed, &[domain::BASELINE, i as u64]);
                        let result =
                            run_ensemble_baseline(&graph, cfg.districts, b.method, budget, &cfg.gen, seed, cfg.pd_normalization);
                        let (plans, chain, error) = match result {
                            Ok((plans, chain)) => (plans, chain, None),
                            Err(e) => {
                                log::error!("baseline {} failed: {e}", b.name());
                                (Vec::new(), ChainStats::default(), Some(e.to_string()))
                            }
                        };
                        BaselineResult {
                            name: b.name(),
                            method: b.method,
                            budget,
                            plans,
                            chain,
                            error,
                        }
                    })
                    .collect::<Vec<_>>()
            },
        )
    });

    let enacted = enacted_plan
        .map(|p| metrics_report(&p, &graph, cfg.pd_normalization))
        .transpose()?;

    let transcripts = || {
        runs.iter().filter_map(|r| match &r.outcome {
            RunOutcome::Completed { transcript, .. } => Some(transcript),
            RunOutcome::Failed { .. } => None,
        })
    };
    let c = cfg.candidates as u64;
    let n = cfg.districts as u64;
    let ledger = BudgetLedger {
        runs_requested: cfg.runs,
        runs_completed: transcripts().count(),
        candidates_generated: transcripts().map(|t| t.budget.candidates_generated).sum(),
        expected_candidates: cfg.runs as u64 * c * (n - 1),
        nominal_candidates: cfg.runs as u64 * c * n,
        distinct_offered: transcripts().map(|t| t.budget.distinct_offered).sum(),
        redraw_candidates: transcripts().map(|t| t.budget.redraw_candidates).sum(),
        baselines: baselines
            .iter()
            .map(|b| BaselineLedger {
                name: b.name.clone(),
                budget: b.budget,
                produced: b.plans.len(),
                chain: b.chain,
            })
            .collect(),
    };

    let mut report = ExperimentReport {
        state_name: cfg.state_name.clone(),
        runs,
        baselines,
        enacted,
        summaries: Vec::new(),
        ledger,
        scaling: cfg.scaling,
    };
    let game: Vec<Report<f64>> = report.game_metrics().into_iter().cloned().collect();
    let mut summaries = Vec::new();
    if let Some(m) = summarize_reports(&game) {
        summaries.push(SummaryRow {
            method: GAME_METHOD.into(),
            metrics: m,
        });
    }
    for b in &report.baselines {
        if let Some(m) = summarize_reports(&b.plans) {
            summaries.push(SummaryRow {
                method: b.name.clone(),
                metrics: m,
            });
        }
    }
    if let Some(m) = report.enacted.as_ref().and_then(|e| summarize_reports(std::slice::from_ref(e))) {
        summaries.push(SummaryRow {
            method: ENACTED_METHOD.into(),
            metrics: m,
        });
    }
    report.summaries = summaries;

    if let Some(dir) = &cfg.output_dir {
        export(&report, dir)?;
    }
    Ok(report)
}
