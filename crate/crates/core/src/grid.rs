//! Synthetic rectangular states for tests and desk-scale experiments.
//!
//! Units are 1 km² cells on a 4-adjacent grid. Interior shared boundaries
//! are 1 km and each cell's exterior boundary equals its number of missing
//! neighbors, so district perimeters come out as exact integers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DualGraph, Edge, RawGraph, Unit, ValidationReport};
use crate::rng::{self, domain};

/// Half-width of the per-unit uniform noise added to the vote share.
const SHARE_NOISE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum VoteModel {
    /// Every unit splits exactly 50/50.
    Uniform5050,
    /// Units near the grid center lean toward `p_core` Democratic share,
    /// the rest toward `p_fringe`, each with seeded ±0.05 noise.
    Clustered { p_core: f64, p_fringe: f64 },
}

impl fmt::Display for VoteModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VoteModel::Uniform5050 => write!(f, "uniform-5050"),
            VoteModel::Clustered { p_core, p_fringe } => {
                write!(f, "clustered({p_core},{p_fringe})")
            }
        }
    }
}

impl FromStr for VoteModel {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "uniform-5050" {
            return Ok(VoteModel::Uniform5050);
        }
        let bad = || GridError::BadVoteModel(s.to_string());
        let inner = s
            .strip_prefix("clustered(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let mut parts = inner.split(',').map(|p| p.trim().parse::<f64>());
        match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(p_core)), Some(Ok(p_fringe)), None) => Ok(VoteModel::Clustered { p_core, p_fringe }),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for VoteModel {
    type Error = GridError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<VoteModel> for String {
    fn from(v: VoteModel) -> String {
        v.to_string()
    }
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid dimensions must be at least 1x1, got {rows}x{cols}")]
    BadDimensions { rows: usize, cols: usize },
    #[error("vote model parameter {0} outside [0, 1]")]
    BadShare(f64),
    #[error("cannot parse vote model {0:?}; expected uniform-5050 or clustered(p_core,p_fringe)")]
    BadVoteModel(String),
    #[error("expected {expected} cells, got {got}")]
    CellCount { expected: usize, got: usize },
    #[error("synthesized graph invalid: {0}")]
    Invalid(#[from] ValidationReport),
}

pub fn unit_id(row: usize, col: usize) -> String {
    format!("r{row}c{col}")
}

/// Builds a `rows × cols` grid state with uniform population and votes
/// drawn deterministically from `seed`.
pub fn build_grid_state(
    rows: usize,
    cols: usize,
    pop_per_unit: u64,
    vote_model: VoteModel,
    seed: u64,
) -> Result<DualGraph, GridError> {
    if rows == 0 || cols == 0 {
        return Err(GridError::BadDimensions { rows, cols });
    }
    if let VoteModel::Clustered { p_core, p_fringe } = vote_model {
        for p in [p_core, p_fringe] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GridError::BadShare(p));
            }
        }
    }
    let mut rng = rng::stream(seed, &[domain::GRID]);
    let center = ((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0);
    let radius = rows.min(cols) as f64 / 3.0;
    let mut cells = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let share = match vote_model {
                VoteModel::Uniform5050 => 0.5,
                VoteModel::Clustered { p_core, p_fringe } => {
                    let d = ((r as f64 - center.0).powi(2) + (c as f64 - center.1).powi(2)).sqrt();
                    let base = if d <= radius { p_core } else { p_fringe };
                    let noise = rng.random_range(-SHARE_NOISE..=SHARE_NOISE);
                    (base + noise).clamp(0.0, 1.0)
                }
            };
            cells.push((pop_per_unit, share));
        }
    }
    build_grid_from_cells(rows, cols, &cells)
}

/// Builds a grid state from explicit per-cell `(population, dem_share)`
/// pairs in row-major order. Every resident votes.
pub fn build_grid_from_cells(
    rows: usize,
    cols: usize,
    cells: &[(u64, f64)],
) -> Result<DualGraph, GridError> {
    if rows == 0 || cols == 0 {
        return Err(GridError::BadDimensions { rows, cols });
    }
    if cells.len() != rows * cols {
        return Err(GridError::CellCount {
            expected: rows * cols,
            got: cells.len(),
        });
    }
    let mut units = Vec::with_capacity(rows * cols);
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let (population, share) = cells[r * cols + c];
            if !(0.0..=1.0).contains(&share) {
                return Err(GridError::BadShare(share));
            }
            let neighbors =
                usize::from(r > 0) + usize::from(r + 1 < rows) + usize::from(c > 0) + usize::from(c + 1 < cols);
            let pop = population as f64;
            units.push(Unit {
                id: unit_id(r, c),
                population,
                dem_votes: pop * share,
                rep_votes: pop * (1.0 - share),
                area: 1.0,
                outer_boundary: (4 - neighbors) as f64,
                demographics: None,
            });
            if c + 1 < cols {
                edges.push(Edge {
                    a: unit_id(r, c),
                    b: unit_id(r, c + 1),
                    shared_boundary: 1.0,
                });
            }
            if r + 1 < rows {
                edges.push(Edge {
                    a: unit_id(r, c),
                    b: unit_id(r + 1, c),
                    shared_boundary: 1.0,
                });
            }
        }
    }
    Ok(DualGraph::new(RawGraph { units, edges })?)
}
