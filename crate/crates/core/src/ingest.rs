//! On-disk formats.
//!
//! - canonical JSON: `{"units": [...], "edges": [...]}` in one file
//! - node-edge CSV: a directory holding `units.csv` and `edges.csv`
//! - assignment CSV: `unit_id,district` rows

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DualGraph, Edge, Plan, PlanError, RawGraph, Unit, ValidationReport};

pub const UNITS_CSV: &str = "units.csv";
pub const EDGES_CSV: &str = "edges.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    CanonicalJson,
    /// `path` names a directory containing `units.csv` and `edges.csv`.
    NodeEdgeCsv,
}

impl GraphFormat {
    /// Directories are node-edge CSV, anything else canonical JSON.
    pub fn detect(path: &Path) -> Self {
        if path.is_dir() {
            GraphFormat::NodeEdgeCsv
        } else {
            GraphFormat::CanonicalJson
        }
    }
}

impl FromStr for GraphFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical-json" | "json" => Ok(GraphFormat::CanonicalJson),
            "node-edge-csv" | "csv" => Ok(GraphFormat::NodeEdgeCsv),
            other => Err(format!("unknown graph format {other:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: invalid graph: {report}")]
    Invalid {
        path: PathBuf,
        report: ValidationReport,
    },
    #[error("{path}: unknown unit id {id:?} on line {line}")]
    UnknownUnit { path: PathBuf, id: String, line: u64 },
    #[error("{path}: unit {id:?} assigned twice (line {line})")]
    DuplicateAssignment { path: PathBuf, id: String, line: u64 },
    #[error("{path}: uncovered unit {id:?}")]
    UncoveredUnit { path: PathBuf, id: String },
    #[error("{path}: district label must be a positive integer (line {line})")]
    BadLabel { path: PathBuf, line: u64 },
    #[error("{path}: {source}")]
    Labels {
        path: PathBuf,
        #[source]
        source: PlanError,
    },
    #[error("{path}: districts {labels:?} are not contiguous")]
    NonContiguous { path: PathBuf, labels: Vec<u32> },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> IngestError {
    IngestError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct UnitRow {
    id: String,
    population: u64,
    dem_votes: f64,
    rep_votes: f64,
    area: f64,
    outer_boundary: f64,
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, IngestError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| csv_err(path, e))
}

pub fn load_dual_graph(path: &Path, format: GraphFormat) -> Result<DualGraph, IngestError> {
    let raw = match format {
        GraphFormat::CanonicalJson => {
            let file = File::open(path).map_err(io_err(path))?;
            serde_json::from_reader::<_, RawGraph>(BufReader::new(file)).map_err(|e| {
                IngestError::Parse {
                    path: path.to_path_buf(),
                    message: e.to_string(),
                }
            })?
        }
        GraphFormat::NodeEdgeCsv => {
            let units: Vec<UnitRow> = read_csv(&path.join(UNITS_CSV))?;
            let edges: Vec<Edge> = read_csv(&path.join(EDGES_CSV))?;
            RawGraph {
                units: units
                    .into_iter()
                    .map(|u| Unit {
                        id: u.id,
                        population: u.population,
                        dem_votes: u.dem_votes,
                        rep_votes: u.rep_votes,
                        area: u.area,
                        outer_boundary: u.outer_boundary,
                        demographics: None,
                    })
                    .collect(),
                edges,
            }
        }
    };
    DualGraph::new(raw).map_err(|report| IngestError::Invalid {
        path: path.to_path_buf(),
        report,
    })
}

/// Writes `graph` in `format`. Node-edge CSV drops demographics.
pub fn save_dual_graph(graph: &DualGraph, path: &Path, format: GraphFormat) -> Result<(), IngestError> {
    match format {
        GraphFormat::CanonicalJson => {
            let file = File::create(path).map_err(io_err(path))?;
            serde_json::to_writer_pretty(BufWriter::new(file), graph.raw()).map_err(|e| IngestError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        }
        GraphFormat::NodeEdgeCsv => {
            fs::create_dir_all(path).map_err(io_err(path))?;
            let units_path = path.join(UNITS_CSV);
            let mut w = csv::Writer::from_path(&units_path).map_err(|e| csv_err(&units_path, e))?;
            for u in graph.units() {
                w.serialize(UnitRow {
                    id: u.id.clone(),
                    population: u.population,
                    dem_votes: u.dem_votes,
                    rep_votes: u.rep_votes,
                    area: u.area,
                    outer_boundary: u.outer_boundary,
                })
                .map_err(|e| csv_err(&units_path, e))?;
            }
            w.flush().map_err(io_err(&units_path))?;
            let edges_path = path.join(EDGES_CSV);
            let mut w = csv::Writer::from_path(&edges_path).map_err(|e| csv_err(&edges_path, e))?;
            for e in graph.edges() {
                w.serialize(e).map_err(|err| csv_err(&edges_path, err))?;
            }
            w.flush().map_err(io_err(&edges_path))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContiguityPolicy {
    /// Non-contiguous districts are an error.
    Enforce,
    /// Non-contiguous districts are reported but the plan is still returned.
    #[default]
    Warn,
}

#[derive(Debug, Clone)]
pub struct LoadedAssignment {
    pub plan: Plan,
    pub noncontiguous: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AssignmentRow {
    unit_id: String,
    district: String,
}

pub fn load_assignment(
    path: &Path,
    graph: &DualGraph,
    policy: ContiguityPolicy,
) -> Result<LoadedAssignment, IngestError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let mut labels = vec![0u32; graph.len()];
    let mut k = 0;
    for (i, row) in reader.deserialize::<AssignmentRow>().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let line = i as u64 + 2;
        let unit = graph.index_of(&row.unit_id).ok_or_else(|| IngestError::UnknownUnit {
            path: path.to_path_buf(),
            id: row.unit_id.clone(),
            line,
        })?;
        let label: u32 = match row.district.trim().parse() {
            Ok(l) if l > 0 => l,
            _ => {
                return Err(IngestError::BadLabel {
                    path: path.to_path_buf(),
                    line,
                })
            }
        };
        if labels[unit] != 0 {
            return Err(IngestError::DuplicateAssignment {
                path: path.to_path_buf(),
                id: row.unit_id,
                line,
            });
        }
        labels[unit] = label;
        k = k.max(label);
    }
    if let Some(u) = labels.iter().position(|&l| l == 0) {
        return Err(IngestError::UncoveredUnit {
            path: path.to_path_buf(),
            id: graph.unit(u).id.clone(),
        });
    }
    let plan = Plan::from_labels(labels, k).map_err(|source| IngestError::Labels {
        path: path.to_path_buf(),
        source,
    })?;
    let noncontiguous = plan.noncontiguous_labels(graph);
    if !noncontiguous.is_empty() {
        match policy {
            ContiguityPolicy::Enforce => {
                return Err(IngestError::NonContiguous {
                    path: path.to_path_buf(),
                    labels: noncontiguous,
                })
            }
            ContiguityPolicy::Warn => {
                log::warn!("{}: districts {:?} are not contiguous", path.display(), noncontiguous)
            }
        }
    }
    Ok(LoadedAssignment { plan, noncontiguous })
}

/// Writes the plan's in-region units as `unit_id,district` rows.
pub fn save_assignment(plan: &Plan, graph: &DualGraph, path: &Path) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["unit_id", "district"]).map_err(|e| csv_err(path, e))?;
    for (u, &l) in plan.labels().iter().enumerate() {
        if l > 0 {
            w.write_record([graph.unit(u).id.as_str(), &l.to_string()])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Unit id to label map, for callers that want string keys.
pub fn assignment_map(plan: &Plan, graph: &DualGraph) -> HashMap<String, u32> {
    plan.labels()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0)
        .map(|(u, &l)| (graph.unit(u).id.clone(), l))
        .collect()
}
