use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::stats::format_scaled;
use super::{ExperimentReport, HarnessError, RunOutcome, ENACTED_METHOD, GAME_METHOD};
use crate::metrics::Report;

/// Column order of `runs.csv`.
pub const RUNS_HEADER: [&str; 8] = ["state", "method", "run", "PD", "PPS_avg", "PPS_min", "Bias", "Unfairness"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Writes `runs.csv`, `summary.csv`, `summary.md`, `budget.json` and
/// `transcripts/run_NNN.json` into `dir`. When any run or baseline failed
/// a `FAILED` file lists the failures next to the partial results.
pub fn export(report: &ExperimentReport, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let transcripts = dir.join("transcripts");
    fs::create_dir_all(&transcripts).map_err(io_err(&transcripts))?;

    let runs_path = dir.join("runs.csv");
    let mut w = csv::Writer::from_path(&runs_path).map_err(csv_err(&runs_path))?;
    w.write_record(RUNS_HEADER).map_err(csv_err(&runs_path))?;
    let mut row = |method: &str, run: usize, m: &Report<f64>| -> Result<(), HarnessError> {
        let mut rec = vec![report.state_name.clone(), method.to_string(), run.to_string()];
        rec.extend(m.headline().iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err(&runs_path))
    };
    for r in &report.runs {
        if let RunOutcome::Completed { metrics, .. } = &r.outcome {
            row(GAME_METHOD, r.run, metrics)?;
        }
    }
    for b in &report.baselines {
        for (i, m) in b.plans.iter().enumerate() {
            row(&b.name, i, m)?;
        }
    }
    if let Some(m) = &report.enacted {
        row(ENACTED_METHOD, 0, m)?;
    }
    w.flush().map_err(io_err(&runs_path))?;

    let summary_path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary_path).map_err(csv_err(&summary_path))?;
    w.write_record(["state", "method", "metric", "n", "mean", "std"])
        .map_err(csv_err(&summary_path))?;
    for s in &report.summaries {
        for (name, m) in Report::<f64>::CSV_HEADER.iter().zip(&s.metrics) {
            let std = m.std.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                report.state_name.as_str(),
                &s.method,
                name,
                &m.n.to_string(),
                &m.mean.to_string(),
                &std,
            ])
            .map_err(csv_err(&summary_path))?;
        }
    }
    w.flush().map_err(io_err(&summary_path))?;

    write_atomic(&dir.join("summary.md"), &summary_markdown(report))?;
    let ledger = serde_json::to_string_pretty(&report.ledger).expect("ledger serializes");
    write_atomic(&dir.join("budget.json"), &ledger)?;

    for r in &report.runs {
        if let RunOutcome::Completed { transcript, .. } = &r.outcome {
            write_atomic(&transcripts.join(format!("run_{:03}.json", r.run)), &transcript.to_json())?;
        }
    }

    let failed = dir.join("FAILED");
    let failures = report.failures();
    if failures.is_empty() {
        if failed.exists() {
            fs::remove_file(&failed).map_err(io_err(&failed))?;
        }
    } else {
        write_atomic(&failed, &(failures.join("\n") + "\n"))?;
    }
    Ok(())
}

/// Results table: one row per method, `mean ± std` per metric in
/// units of the configured power of ten.
pub fn summary_markdown(report: &ExperimentReport) -> String {
    let bias_means: Vec<f64> = report.summaries.iter().map(|s| s.metrics[3].mean).collect();
    let exps = report.scaling.exponents(&bias_means);
    let mut md = format!("# {}\n\n| Method |", report.state_name);
    for (name, e) in Report::<f64>::CSV_HEADER.iter().zip(exps) {
        write!(md, " {name} (×10^{e}) |").unwrap();
    }
    md.push_str("\n|---|");
    md.push_str(&"---|".repeat(5));
    md.push('\n');
    for s in &report.summaries {
        write!(md, "| {} (n={}) |", s.method, s.metrics[0].n).unwrap();
        for (m, e) in s.metrics.iter().zip(exps) {
            write!(md, " {} |", format_scaled(m, e)).unwrap();
        }
        md.push('\n');
    }
    let l = &report.ledger;
    write!(
        md,
        "\nCandidates generated: {} over {} of {} runs (redraws: {}).\n",
        l.candidates_generated, l.runs_completed, l.runs_requested, l.redraw_candidates
    )
    .unwrap();
    for b in &l.baselines {
        writeln!(md, "Baseline {}: {} of {} plans.", b.name, b.produced, b.budget).unwrap();
    }
    let failures = report.failures();
    if !failures.is_empty() {
        md.push_str("\n**FAILED**\n\n");
        for f in failures {
            writeln!(md, "- {f}").unwrap();
        }
    }
    md
}
