//! Plan evaluation: population deviation, Polsby-Popper compactness,
//! partisan bias and unfairness.
//!
//! All functions are pure and generic over the [`Scalar`] they compute in.
//! Populations accumulate as integers; areas, lengths and votes in `S`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DualGraph, Plan};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("district {label} has zero perimeter")]
    ZeroPerimeter { label: u32 },
    #[error("district {label} has no votes")]
    NoVotes { label: u32 },
}

/// Geometry, population and vote totals of one district.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry<S> {
    pub label: u32,
    pub area: S,
    pub perimeter: S,
    pub population: u64,
    pub dem_votes: S,
    pub rep_votes: S,
}

impl<S: Scalar> Geometry<S> {
    /// Democratic two-party share, `None` when the district cast no votes.
    pub fn pct_dem(&self) -> Option<S> {
        let total = self.dem_votes + self.rep_votes;
        (total > S::zero()).then(|| self.dem_votes / total)
    }

    fn pct_dem_or_err(&self) -> Result<S, MetricsError> {
        self.pct_dem().ok_or(MetricsError::NoVotes { label: self.label })
    }

    /// `4πA / P²`
    pub fn polsby_popper(&self) -> Result<S, MetricsError> {
        if self.perimeter <= S::zero() {
            return Err(MetricsError::ZeroPerimeter { label: self.label });
        }
        let four_pi = S::of(4.0) * S::PI();
        Ok(four_pi * self.area / (self.perimeter * self.perimeter))
    }
}

/// Per-district totals. Perimeter counts exterior boundary of member units
/// plus every shared boundary with exactly one endpoint in the district.
pub fn district_geometry<S: Scalar>(plan: &Plan, graph: &DualGraph) -> Vec<Geometry<S>> {
    let mut out: Vec<Geometry<S>> = (1..=plan.k())
        .map(|label| Geometry {
            label,
            area: S::zero(),
            perimeter: S::zero(),
            population: 0,
            dem_votes: S::zero(),
            rep_votes: S::zero(),
        })
        .collect();
    for (u, unit) in graph.units().iter().enumerate() {
        let l = plan.label(u);
        if l == 0 {
            continue;
        }
        let g = &mut out[(l - 1) as usize];
        g.area = g.area + S::of(unit.area);
        g.perimeter = g.perimeter + S::of(unit.outer_boundary);
        g.population += unit.population;
        g.dem_votes = g.dem_votes + S::of(unit.dem_votes);
        g.rep_votes = g.rep_votes + S::of(unit.rep_votes);
    }
    for (e, &(a, b)) in graph.edges().iter().zip(graph.endpoints()) {
        let (la, lb) = (plan.label(a), plan.label(b));
        if la == lb {
            continue;
        }
        let len = S::of(e.shared_boundary);
        for l in [la, lb] {
            if l > 0 {
                let g = &mut out[(l - 1) as usize];
                g.perimeter = g.perimeter + len;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdNormalization {
    /// Fraction of the ideal district population.
    #[default]
    Relative,
    /// Persons.
    RawPersons,
}

/// Mean absolute deviation of district populations from `total / N`.
pub fn population_deviation_of<S: Scalar>(populations: &[u64], norm: PdNormalization) -> S {
    let n = S::of_count(populations.len() as u64);
    let total: u64 = populations.iter().sum();
    let ideal = S::of_count(total) / n;
    deviation_from::<S>(populations, ideal, norm)
}

/// Mean absolute deviation of `populations` from an explicit `ideal`.
pub fn deviation_from<S: Scalar>(populations: &[u64], ideal: S, norm: PdNormalization) -> S {
    let n = S::of_count(populations.len() as u64);
    let sum = populations
        .iter()
        .fold(S::zero(), |acc, &p| acc + (S::of_count(p) - ideal).abs());
    match norm {
        PdNormalization::Relative => sum / n / ideal,
        PdNormalization::RawPersons => sum / n,
    }
}

pub fn population_deviation<S: Scalar>(plan: &Plan, graph: &DualGraph, norm: PdNormalization) -> S {
    population_deviation_of(&plan.district_populations(graph), norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compactness<S> {
    pub per_district: Vec<S>,
    pub avg: S,
    pub min: S,
}

fn compactness_of<S: Scalar>(geoms: &[Geometry<S>]) -> Result<Compactness<S>, MetricsError> {
    let per_district = geoms.iter().map(Geometry::polsby_popper).collect::<Result<Vec<S>, _>>()?;
    let sum = per_district.iter().fold(S::zero(), |a, &b| a + b);
    let avg = sum / S::of_count(per_district.len() as u64);
    let min = per_district.iter().fold(S::infinity(), |a, &b| a.min(b));
    Ok(Compactness { per_district, avg, min })
}

pub fn polsby_popper<S: Scalar>(plan: &Plan, graph: &DualGraph) -> Result<Compactness<S>, MetricsError> {
    compactness_of(&district_geometry(plan, graph))
}

fn bias_of<S: Scalar>(geoms: &[Geometry<S>]) -> Result<S, MetricsError> {
    let mut sum = S::zero();
    for g in geoms {
        g.pct_dem_or_err()?;
        // 2·pct − 1 written so that swapping the parties negates it bit for bit
        sum = sum + (g.dem_votes - g.rep_votes) / (g.dem_votes + g.rep_votes);
    }
    Ok(sum / S::of_count(geoms.len() as u64))
}

/// `mean(2·pct_dem − 1)`; positive favors Democrats.
pub fn partisan_bias<S: Scalar>(plan: &Plan, graph: &DualGraph) -> Result<S, MetricsError> {
    bias_of(&district_geometry::<S>(plan, graph))
}

fn unfairness_of<S: Scalar>(geoms: &[Geometry<S>]) -> Result<S, MetricsError> {
    let half = S::of(0.5);
    let mut unhappy = S::zero();
    let mut total = 0u64;
    for g in geoms {
        let pct = g.pct_dem_or_err()?;
        let pop = S::of_count(g.population);
        let losing_share = if pct > half { S::one() - pct } else { pct };
        unhappy = unhappy + losing_share * pop;
        total += g.population;
    }
    Ok(unhappy / S::of_count(total))
}

/// Population-weighted share of residents whose preferred party lost their district.
pub fn unfairness<S: Scalar>(plan: &Plan, graph: &DualGraph) -> Result<S, MetricsError> {
    unfairness_of(&district_geometry::<S>(plan, graph))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<S> {
    pub pd: S,
    pub pps_per_district: Vec<S>,
    pub pps_avg: S,
    pub pps_min: S,
    pub bias: S,
    pub unfairness: S,
}

impl<S: Scalar> Report<S> {
    pub fn from_geometry(geoms: &[Geometry<S>], norm: PdNormalization) -> Result<Self, MetricsError> {
        let pops: Vec<u64> = geoms.iter().map(|g| g.population).collect();
        let compact = compactness_of(geoms)?;
        Ok(Self {
            pd: population_deviation_of(&pops, norm),
            pps_per_district: compact.per_district,
            pps_avg: compact.avg,
            pps_min: compact.min,
            bias: bias_of(geoms)?,
            unfairness: unfairness_of(geoms)?,
        })
    }

    pub const CSV_HEADER: [&'static str; 5] = ["PD", "PPS_avg", "PPS_min", "Bias", "Unfairness"];

    /// Values in [`Report::CSV_HEADER`] order.
    pub fn headline(&self) -> [S; 5] {
        [self.pd, self.pps_avg, self.pps_min, self.bias, self.unfairness]
    }
}

pub fn metrics_report<S: Scalar>(
    plan: &Plan,
    graph: &DualGraph,
    norm: PdNormalization,
) -> Result<Report<S>, MetricsError> {
    Report::from_geometry(&district_geometry(plan, graph), norm)
}
