//! Dual graphs, regions and plans.
//!
//! A [`DualGraph`] is immutable once built: construction validates every
//! invariant, and all later code addresses units by their dense index in
//! the original unit order. String ids only matter at the file boundary.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub id: String,
    pub population: u64,
    pub dem_votes: f64,
    pub rep_votes: f64,
    /// km²
    pub area: f64,
    /// km of border shared with the state exterior.
    pub outer_boundary: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demographics: Option<BTreeMap<String, u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: String,
    pub b: String,
    /// km
    pub shared_boundary: f64,
}

/// Unvalidated graph contents, exactly as they appear on disk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawGraph {
    pub units: Vec<Unit>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationIssue {
    #[error("graph has no units")]
    Empty,
    #[error("duplicate unit id {0:?}")]
    DuplicateUnit(String),
    #[error("unit {id:?}: field {field} has invalid value {value}")]
    BadField {
        id: String,
        field: &'static str,
        value: f64,
    },
    #[error("edge #{index} references unknown unit {id:?}")]
    UnknownEndpoint { index: usize, id: String },
    #[error("edge #{index} is a self-loop on {id:?}")]
    SelfLoop { index: usize, id: String },
    #[error("duplicate edge between {a:?} and {b:?}")]
    DuplicateEdge { a: String, b: String },
    #[error("edge {a:?}-{b:?}: shared_boundary must be positive, got {value}")]
    BadBoundary { a: String, b: String, value: f64 },
    #[error("total population is zero")]
    ZeroPopulation,
    #[error("graph is disconnected: {components} components ({unreached:?} unreachable from {root:?})")]
    Disconnected {
        components: usize,
        root: String,
        unreached: String,
    },
}

/// Every invariant violation found in a [`RawGraph`]. Empty iff valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Lists every invariant violation in `raw`.
pub fn validate_graph(raw: &RawGraph) -> ValidationReport {
    let mut issues = Vec::new();
    if raw.units.is_empty() {
        issues.push(ValidationIssue::Empty);
        return ValidationReport { issues };
    }

    let mut index: HashMap<&str, usize> = HashMap::with_capacity(raw.units.len());
    for (i, u) in raw.units.iter().enumerate() {
        if index.insert(u.id.as_str(), i).is_some() {
            issues.push(ValidationIssue::DuplicateUnit(u.id.clone()));
        }
        let checks: [(&'static str, f64, bool); 4] = [
            ("area", u.area, u.area.is_finite() && u.area > 0.0),
            (
                "outer_boundary",
                u.outer_boundary,
                u.outer_boundary.is_finite() && u.outer_boundary >= 0.0,
            ),
            (
                "dem_votes",
                u.dem_votes,
                u.dem_votes.is_finite() && u.dem_votes >= 0.0,
            ),
            (
                "rep_votes",
                u.rep_votes,
                u.rep_votes.is_finite() && u.rep_votes >= 0.0,
            ),
        ];
        for (field, value, ok) in checks {
            if !ok {
                issues.push(ValidationIssue::BadField {
                    id: u.id.clone(),
                    field,
                    value,
                });
            }
        }
    }

    let n = raw.units.len();
    let mut adjacency = vec![Vec::new(); n];
    let mut seen_pairs = HashSet::new();
    for (ei, e) in raw.edges.iter().enumerate() {
        let a = index.get(e.a.as_str()).copied();
        let b = index.get(e.b.as_str()).copied();
        for (id, found) in [(&e.a, a), (&e.b, b)] {
            if found.is_none() {
                issues.push(ValidationIssue::UnknownEndpoint {
                    index: ei,
                    id: id.clone(),
                });
            }
        }
        if !(e.shared_boundary.is_finite() && e.shared_boundary > 0.0) {
            issues.push(ValidationIssue::BadBoundary {
                a: e.a.clone(),
                b: e.b.clone(),
                value: e.shared_boundary,
            });
        }
        let (Some(a), Some(b)) = (a, b) else { continue };
        if a == b {
            issues.push(ValidationIssue::SelfLoop {
                index: ei,
                id: e.a.clone(),
            });
            continue;
        }
        if !seen_pairs.insert((a.min(b), a.max(b))) {
            issues.push(ValidationIssue::DuplicateEdge {
                a: e.a.clone(),
                b: e.b.clone(),
            });
            continue;
        }
        adjacency[a].push(b);
        adjacency[b].push(a);
    }

    if raw.units.iter().map(|u| u.population).sum::<u64>() == 0 {
        issues.push(ValidationIssue::ZeroPopulation);
    }

    let mut component = vec![usize::MAX; n];
    let mut components = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        component[start] = components;
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if component[v] == usize::MAX {
                    component[v] = components;
                    queue.push_back(v);
                }
            }
        }
        components += 1;
    }
    if components > 1 {
        let unreached = component.iter().position(|&c| c != 0).unwrap_or(0);
        issues.push(ValidationIssue::Disconnected {
            components,
            root: raw.units[0].id.clone(),
            unreached: raw.units[unreached].id.clone(),
        });
    }

    ValidationReport { issues }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub unit: usize,
    pub shared_boundary: f64,
}

/// Validated, immutable adjacency graph of population units.
#[derive(Debug, Clone)]
pub struct DualGraph {
    raw: RawGraph,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<Neighbor>>,
    endpoints: Vec<(usize, usize)>,
    total_population: u64,
}

impl PartialEq for DualGraph {
    fn eq(&self, other: &Self) -> bool {
        self.raw == other.raw
    }
}

impl DualGraph {
    pub fn new(raw: RawGraph) -> Result<Self, ValidationReport> {
        let report = validate_graph(&raw);
        if !report.is_valid() {
            return Err(report);
        }
        let index: HashMap<String, usize> = raw
            .units
            .iter()
            .enumerate()
            .map(|(i, u)| (u.id.clone(), i))
            .collect();
        let mut adjacency = vec![Vec::new(); raw.units.len()];
        let mut endpoints = Vec::with_capacity(raw.edges.len());
        for e in &raw.edges {
            let (a, b) = (index[&e.a], index[&e.b]);
            adjacency[a].push(Neighbor {
                unit: b,
                shared_boundary: e.shared_boundary,
            });
            adjacency[b].push(Neighbor {
                unit: a,
                shared_boundary: e.shared_boundary,
            });
            endpoints.push((a, b));
        }
        let total_population = raw.units.iter().map(|u| u.population).sum();
        Ok(Self {
            raw,
            index,
            adjacency,
            endpoints,
            total_population,
        })
    }

    pub fn units(&self) -> &[Unit] {
        &self.raw.units
    }

    pub fn edges(&self) -> &[Edge] {
        &self.raw.edges
    }

    pub fn raw(&self) -> &RawGraph {
        &self.raw
    }

    pub fn len(&self) -> usize {
        self.raw.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.units.is_empty()
    }

    pub fn unit(&self, index: usize) -> &Unit {
        &self.raw.units[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn neighbors(&self, unit: usize) -> &[Neighbor] {
        &self.adjacency[unit]
    }

    /// Edge endpoints by dense index, parallel to [`DualGraph::edges`].
    pub fn endpoints(&self) -> &[(usize, usize)] {
        &self.endpoints
    }

    pub fn total_population(&self) -> u64 {
        self.total_population
    }

    pub fn population(&self, unit: usize) -> u64 {
        self.raw.units[unit].population
    }

    /// Ideal district population when the whole state is split `n` ways.
    pub fn ideal_population(&self, n: u32) -> f64 {
        self.total_population as f64 / f64::from(n)
    }

    /// Breadth-first check that `members` induces a connected subgraph.
    /// `members` must be nonempty.
    pub fn is_connected_subset(&self, members: &[usize]) -> bool {
        let Some(&start) = members.first() else {
            return false;
        };
        let mut inside = vec![false; self.len()];
        for &m in members {
            inside[m] = true;
        }
        let mut reached = 1;
        inside[start] = false;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for nb in &self.adjacency[u] {
                if inside[nb.unit] {
                    inside[nb.unit] = false;
                    reached += 1;
                    queue.push_back(nb.unit);
                }
            }
        }
        reached == members.len()
    }
}

/// A set of units, stored as sorted dense indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Region(Vec<usize>);

impl Region {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }

    pub fn all(graph: &DualGraph) -> Self {
        Self((0..graph.len()).collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, unit: usize) -> bool {
        self.0.binary_search(&unit).is_ok()
    }

    pub fn population(&self, graph: &DualGraph) -> u64 {
        self.0.iter().map(|&u| graph.population(u)).sum()
    }

    pub fn difference(&self, other: &Region) -> Region {
        Region(
            self.0
                .iter()
                .copied()
                .filter(|&u| !other.contains(u))
                .collect(),
        )
    }

    pub fn ids<'g>(&self, graph: &'g DualGraph) -> Vec<&'g str> {
        self.0.iter().map(|&u| graph.unit(u).id.as_str()).collect()
    }
}

/// Stable 64-bit fingerprint of a plan's partition, independent of label
/// numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlanHash(pub u64);

impl fmt::Display for PlanHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl Serialize for PlanHash {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PlanHash {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        u64::from_str_radix(&text, 16)
            .map(PlanHash)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("district count must be at least 1")]
    ZeroDistricts,
    #[error("label {label} out of range 1..={k}")]
    LabelOutOfRange { label: u32, k: u32 },
    #[error("label {0} is never used (labels must be dense 1..k)")]
    LabelGap(u32),
    #[error("plan covers {got} units but the graph has {expected}")]
    WrongLength { expected: usize, got: usize },
}

/// Assignment of every unit of a region to a district label in `1..=k`.
///
/// Labels are stored per graph unit; `0` marks units outside the region.
/// Contiguity is a property of a plan, not a construction invariant,
/// because enacted plans are evaluated even when they violate it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Plan {
    k: u32,
    labels: Vec<u32>,
}

impl Plan {
    pub fn from_labels(labels: Vec<u32>, k: u32) -> Result<Self, PlanError> {
        if k == 0 {
            return Err(PlanError::ZeroDistricts);
        }
        let mut used = vec![false; k as usize];
        for &l in &labels {
            if l > k {
                return Err(PlanError::LabelOutOfRange { label: l, k });
            }
            if l > 0 {
                used[(l - 1) as usize] = true;
            }
        }
        if let Some(gap) = used.iter().position(|&u| !u) {
            return Err(PlanError::LabelGap(gap as u32 + 1));
        }
        Ok(Self { k, labels })
    }

    /// Builds a plan from per-district unit lists; district `i` gets label `i + 1`.
    pub fn from_districts(n_units: usize, districts: &[Vec<usize>]) -> Result<Self, PlanError> {
        let mut labels = vec![0; n_units];
        for (i, units) in districts.iter().enumerate() {
            for &u in units {
                labels[u] = i as u32 + 1;
            }
        }
        Self::from_labels(labels, districts.len() as u32)
    }

    /// The whole region as a single district.
    pub fn whole(graph: &DualGraph, region: &Region) -> Self {
        let mut labels = vec![0; graph.len()];
        for &u in region.members() {
            labels[u] = 1;
        }
        Self { k: 1, labels }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, unit: usize) -> u32 {
        self.labels[unit]
    }

    pub(crate) fn set_label(&mut self, unit: usize, label: u32) {
        self.labels[unit] = label;
    }

    pub fn region(&self) -> Region {
        Region(
            self.labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > 0)
                .map(|(u, _)| u)
                .collect(),
        )
    }

    /// Unit lists per district, indexed by `label - 1`.
    pub fn districts(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k as usize];
        for (u, &l) in self.labels.iter().enumerate() {
            if l > 0 {
                out[(l - 1) as usize].push(u);
            }
        }
        out
    }

    pub fn district(&self, label: u32) -> Region {
        Region(
            self.labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == label)
                .map(|(u, _)| u)
                .collect(),
        )
    }

    pub fn district_populations(&self, graph: &DualGraph) -> Vec<u64> {
        let mut pops = vec![0u64; self.k as usize];
        for (u, &l) in self.labels.iter().enumerate() {
            if l > 0 {
                pops[(l - 1) as usize] += graph.population(u);
            }
        }
        pops
    }

    /// Labels of districts whose units do not induce a connected subgraph.
    pub fn noncontiguous_labels(&self, graph: &DualGraph) -> Vec<u32> {
        self.districts()
            .iter()
            .enumerate()
            .filter(|(_, units)| !graph.is_connected_subset(units))
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }

    pub fn is_contiguous(&self, graph: &DualGraph) -> bool {
        self.noncontiguous_labels(graph).is_empty()
    }

    /// Labels renumbered in order of each district's lowest unit index.
    pub fn canonical_labels(&self) -> Vec<u32> {
        let mut remap = vec![0u32; self.k as usize + 1];
        let mut next = 0;
        self.labels
            .iter()
            .map(|&l| {
                if l == 0 {
                    return 0;
                }
                if remap[l as usize] == 0 {
                    next += 1;
                    remap[l as usize] = next;
                }
                remap[l as usize]
            })
            .collect()
    }

    /// Same plan with labels in canonical order.
    pub fn canonicalized(&self) -> Plan {
        Plan {
            k: self.k,
            labels: self.canonical_labels(),
        }
    }

    pub fn canonical_hash(&self) -> PlanHash {
        let mut hasher = Sha256::new();
        hasher.update((self.labels.len() as u64).to_le_bytes());
        for l in self.canonical_labels() {
            hasher.update(l.to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        PlanHash(u64::from_be_bytes(head))
    }
}
