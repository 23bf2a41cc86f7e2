use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use agentmandering::agents::{AgentSpec, Party, StateProfile};
use agentmandering::generators::ChainMethod;
use agentmandering::grid::VoteModel;
use agentmandering::harness::{run_ensemble_baseline, run_experiment, RUNS_HEADER};
use agentmandering::ingest::{
    load_assignment, load_dual_graph, save_assignment, save_dual_graph, ContiguityPolicy, GraphFormat,
};
use agentmandering::metrics::{district_geometry, metrics_report, PdNormalization, Report};
use agentmandering::protocol::{run_game, GameConfig};
use agentmandering::{DualGraph, ExperimentConfig, GenConfig};

#[derive(Parser)]
#[command(name = "agentmandering", version, about = "Choose-and-Freeze redistricting with partisan agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the metrics of a district assignment.
    Evaluate {
        #[command(flatten)]
        graph: GraphArgs,
        /// `unit_id,district` CSV.
        #[arg(long)]
        assignment: PathBuf,
        /// Report population deviation in persons instead of as a fraction of the ideal.
        #[arg(long)]
        raw_pd: bool,
    },
    /// Play one Choose-and-Freeze game and write its transcript.
    RunGame {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        districts: u32,
        #[arg(long)]
        candidates: usize,
        #[arg(long, default_value = "dem", value_parser = parse_party)]
        first_mover: Party,
        #[arg(long, default_value = "rule:partisan")]
        dem_agent: String,
        #[arg(long, default_value = "rule:partisan")]
        rep_agent: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plain-text state background for chat-model agents.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value = "state")]
        state_name: String,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also write the final plan as an assignment CSV.
        #[arg(long)]
        assignment_out: Option<PathBuf>,
    },
    /// Sample a full-state ensemble and write one metrics row per plan.
    RunEnsemble {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        districts: u32,
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "state")]
        state_name: String,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        raw_pd: bool,
        /// Output CSV in the `runs.csv` schema.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a batch experiment described by a TOML config.
    RunExperiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Write a synthetic grid state.
    MakeGrid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 100)]
        pop_per_unit: u64,
        /// `uniform-5050` or `clustered(p_core,p_fringe)`.
        #[arg(long, default_value = "uniform-5050")]
        vote_model: VoteModel,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `canonical-json` (a file) or `node-edge-csv` (a directory).
        #[arg(long, default_value = "canonical-json")]
        format: GraphFormat,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Canonical JSON file, or a directory with units.csv and edges.csv.
    #[arg(long)]
    graph: PathBuf,
    /// Overrides format detection.
    #[arg(long)]
    format: Option<GraphFormat>,
}

impl GraphArgs {
    fn load(&self) -> Result<DualGraph> {
        let format = self.format.unwrap_or_else(|| GraphFormat::detect(&self.graph));
        load_dual_graph(&self.graph, format).with_context(|| format!("loading {}", self.graph.display()))
    }
}

#[derive(Args)]
struct GenArgs {
    /// Relative population tolerance.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value = "recom")]
    method: ChainMethod,
    #[arg(long, default_value_t = 10)]
    chain_thinning: usize,
    #[arg(long, default_value_t = 1000)]
    max_attempts: usize,
}

impl GenArgs {
    fn config(&self) -> GenConfig {
        GenConfig {
            epsilon: self.epsilon,
            method: self.method,
            chain_thinning: self.chain_thinning,
            max_attempts: self.max_attempts,
            ..GenConfig::default()
        }
    }
}

fn parse_party(s: &str) -> Result<Party, String> {
    s.parse().map_err(|e: agentmandering::agents::AgentError| e.to_string())
}

fn headline_line(r: &Report<f64>) -> String {
    r.headline().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn evaluate(graph: &GraphArgs, assignment: &Path, raw_pd: bool) -> Result<()> {
    let g = graph.load()?;
    let loaded = load_assignment(assignment, &g, ContiguityPolicy::Warn)?;
    if !loaded.noncontiguous.is_empty() {
        eprintln!("warning: districts {:?} are not contiguous", loaded.noncontiguous);
    }
    let norm = if raw_pd {
        PdNormalization::RawPersons
    } else {
        PdNormalization::Relative
    };
    let report = metrics_report::<f64>(&loaded.plan, &g, norm)?;
    println!("{}", Report::<f64>::CSV_HEADER.join(","));
    println!("{}", headline_line(&report));
    println!();
    println!("{:>8} {:>12} {:>10} {:>8}", "district", "population", "pct_dem", "PPS");
    for (geo, pps) in district_geometry::<f64>(&loaded.plan, &g).iter().zip(&report.pps_per_district) {
        let share = geo.pct_dem().map_or("n/a".to_string(), |s| format!("{s:.4}"));
        println!("{:>8} {:>12} {:>10} {:>8.4}", geo.label, geo.population, share, pps);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evaluate {
            graph,
            assignment,
            raw_pd,
        } => evaluate(&graph, &assignment, raw_pd),
        Command::RunGame {
            graph,
            districts,
            candidates,
            first_mover,
            dem_agent,
            rep_agent,
            seed,
            profile,
            state_name,
            gen,
            out,
            assignment_out,
        } => {
            let g = graph.load()?;
            let profile = match profile {
                Some(p) => {
                    let mut prof = StateProfile::load(&p).with_context(|| format!("reading {}", p.display()))?;
                    prof.name = state_name;
                    prof
                }
                None => StateProfile::synthetic(&state_name, &g),
            };
            let mut dem = AgentSpec::parse(Party::Democrat, &dem_agent)?.build(None);
            let mut rep = AgentSpec::parse(Party::Republican, &rep_agent)?.build(None);
            let config = GameConfig {
                num_districts: districts,
                candidates_per_round: candidates,
                first_mover,
                gen: gen.config(),
                master_seed: seed,
            };
            let transcript = run_game(&g, &profile, dem.as_mut(), rep.as_mut(), &config)?;
            std::fs::write(&out, transcript.to_json()).with_context(|| format!("writing {}", out.display()))?;
            if let Some(path) = assignment_out {
                let plan = transcript.final_plan(&g).map_err(anyhow::Error::msg)?;
                save_assignment(&plan, &g, &path)?;
            }
            for w in &transcript.warnings {
                log::warn!("{w}");
            }
            println!("final plan {} ({} rounds)", transcript.final_hash, transcript.rounds.len());
            println!("{}", Report::<f64>::CSV_HEADER.join(","));
            println!("{}", headline_line(&transcript.metrics));
            Ok(())
        }
        Command::RunEnsemble {
            graph,
            districts,
            budget,
            seed,
            state_name,
            gen,
            raw_pd,
            out,
        } => {
            let g = graph.load()?;
            let norm = if raw_pd {
                PdNormalization::RawPersons
            } else {
                PdNormalization::Relative
            };
            let cfg = gen.config();
            let (reports, stats) = run_ensemble_baseline(&g, districts, cfg.method, budget, &cfg, seed, norm)?;
            let mut text = RUNS_HEADER.join(",") + "\n";
            for (i, r) in reports.iter().enumerate() {
                text.push_str(&format!("{state_name},{},{i},{}\n", cfg.method, headline_line(r)));
            }
            std::fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
            println!(
                "{} plans; steps {} moves {} self-loops {} rejections {}",
                reports.len(),
                stats.steps,
                stats.moves,
                stats.self_loops,
                stats.rejections
            );
            Ok(())
        }
        Command::RunExperiment {
            config,
            seed,
            output_dir,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if output_dir.is_some() {
                cfg.output_dir = output_dir;
            }
            let report = run_experiment(&cfg)?;
            print!("{}", agentmandering::harness::summary_markdown(&report));
            let failures = report.failures();
            if !failures.is_empty() {
                bail!("{} of the experiment's jobs failed", failures.len());
            }
            Ok(())
        }
        Command::MakeGrid {
            rows,
            cols,
            pop_per_unit,
            vote_model,
            seed,
            format,
            out,
        } => {
            let g = agentmandering::grid::build_grid_state(rows, cols, pop_per_unit, vote_model, seed)?;
            save_dual_graph(&g, &out, format)?;
            println!("{} units, {} edges -> {}", g.len(), g.edges().len(), out.display());
            Ok(())
        }
    }
}
