//! Phase-oriented filtered graphs (maximum spanning tree, PMFG) built from
//! a complex correlation matrix.
//!
//! Edge weights are magnitudes `s_kl = |ρ_kl|`. Candidate edges are scanned
//! by descending `s` with ties broken by the (smaller, larger) ticker pair,
//! so the result is a total function of the matrix. Edges point from leader
//! to follower: `θ_kl < 0` means `k` leads `l`.

mod export;
mod planarity;

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::ComplexCorrelationMatrix;
use crate::ingest::SectorTable;
use crate::spectral;

pub use export::{degrees_to_csv, edges_to_csv, scatter_to_csv, to_dot, to_graphml};
pub use planarity::is_planar;

pub const DEFAULT_THETA_SYM: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Mst,
    Pmfg,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Mst => "mst",
            GraphKind::Pmfg => "pmfg",
        })
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mst" => Ok(GraphKind::Mst),
            "pmfg" => Ok(GraphKind::Pmfg),
            other => Err(Error::Config(format!("unknown graph kind {other:?} (expected mst or pmfg)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseBin {
    Small,
    Quarter,
    Opposite,
}

impl PhaseBin {
    /// Edge colour used in DOT output.
    pub fn color(self) -> &'static str {
        match self {
            PhaseBin::Small => "black",
            PhaseBin::Quarter => "red",
            PhaseBin::Opposite => "orange",
        }
    }
}

impl fmt::Display for PhaseBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseBin::Small => "small",
            PhaseBin::Quarter => "quarter",
            PhaseBin::Opposite => "opposite",
        })
    }
}

/// Bin boundaries on `|θ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseBins {
    pub small_below: f64,
    pub quarter_below: f64,
}

impl Default for PhaseBins {
    fn default() -> Self {
        Self { small_below: PI / 4.0, quarter_below: 3.0 * PI / 4.0 }
    }
}

impl PhaseBins {
    pub fn classify(&self, theta: f64) -> PhaseBin {
        let a = theta.abs();
        if a < self.small_below {
            PhaseBin::Small
        } else if a < self.quarter_below {
            PhaseBin::Quarter
        } else {
            PhaseBin::Opposite
        }
    }
}

/// `classify_phase_bins` with the default boundaries π/4 and 3π/4.
pub fn classify_phase_bin(theta: f64) -> PhaseBin {
    PhaseBins::default().classify(theta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub sector: Option<String>,
    pub subsector: Option<String>,
}

/// A selected edge. After [`orient_edges`], `theta` is `θ_{from,to}` and is
/// non-positive unless the edge is bidirectional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub magnitude: f64,
    pub theta: f64,
    pub bin: PhaseBin,
    pub bidirectional: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredGraph {
    pub kind: GraphKind,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl FilteredGraph {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Undirected endpoint pairs `(min, max)`.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.from.min(e.to), e.from.max(e.to))).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.magnitude).sum()
    }

    /// Attach sector labels to the nodes. Unknown tickers stay sectorless.
    pub fn with_sectors(mut self, sectors: &SectorTable) -> Self {
        for node in &mut self.nodes {
            if let Some(info) = sectors.get(&node.id) {
                node.sector = Some(info.sector.clone());
                node.subsector = Some(info.subsector.clone());
            }
        }
        self
    }
}

/// Upper-triangle pairs in scan order: `s` descending, then ticker pair.
fn candidate_edges(rho: &ComplexCorrelationMatrix) -> Vec<(usize, usize, f64)> {
    let n = rho.n();
    let names = rho.assets();
    let key = |i: usize, j: usize| {
        let (a, b) = (&names[i], &names[j]);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    };
    let mut cands: Vec<(usize, usize, f64)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| (i, j, rho.get(i, j).norm())).collect();
    cands.sort_by(|x, y| match y.2.total_cmp(&x.2) {
        Ordering::Equal => key(x.0, x.1).cmp(&key(y.0, y.1)),
        o => o,
    });
    cands
}

fn base_graph(rho: &ComplexCorrelationMatrix, kind: GraphKind, picked: Vec<(usize, usize, f64)>) -> FilteredGraph {
    let nodes = rho.assets().iter().map(|a| Node { id: a.clone(), sector: None, subsector: None }).collect();
    let bins = PhaseBins::default();
    let edges = picked
        .into_iter()
        .map(|(i, j, s)| {
            let (_, theta) = rho.magnitude_phase(i, j);
            Edge { from: i, to: j, magnitude: s, theta, bin: bins.classify(theta), bidirectional: false }
        })
        .collect();
    FilteredGraph { kind, nodes, edges }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Maximum spanning tree by Kruskal over `|ρ_kl|`. Edges are unoriented
/// (`from < to`) until [`orient_edges`] is applied.
pub fn max_spanning_tree(rho: &ComplexCorrelationMatrix) -> Result<FilteredGraph> {
    let n = rho.n();
    if n < 2 {
        return Err(Error::TooFewNodes { what: "spanning tree", n, min: 2 });
    }
    let mut dsu = DisjointSet::new(n);
    let mut picked = Vec::with_capacity(n - 1);
    for (i, j, s) in candidate_edges(rho) {
        if dsu.union(i, j) {
            picked.push((i, j, s));
            if picked.len() == n - 1 {
                break;
            }
        }
    }
    Ok(base_graph(rho, GraphKind::Mst, picked))
}

/// Planar maximally filtered graph: greedy insertion by `|ρ_kl|` keeping
/// the graph planar, up to `3(n-2)` edges.
pub fn pmfg(rho: &ComplexCorrelationMatrix) -> Result<FilteredGraph> {
    let n = rho.n();
    if n < 3 {
        return Err(Error::TooFewNodes { what: "PMFG", n, min: 3 });
    }
    let target = 3 * (n - 2);
    let mut dsu = DisjointSet::new(n);
    let mut picked: Vec<(usize, usize, f64)> = Vec::with_capacity(target);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(target + 1);
    for (i, j, s) in candidate_edges(rho) {
        // Joining two components can never break planarity.
        let accept = if dsu.union(i, j) {
            true
        } else {
            pairs.push((i, j));
            let ok = is_planar(n, &pairs);
            pairs.pop();
            ok
        };
        if accept {
            pairs.push((i, j));
            picked.push((i, j, s));
            if picked.len() == target {
                break;
            }
        }
    }
    Ok(base_graph(rho, GraphKind::Pmfg, picked))
}

/// Direct every edge from leader to follower: `θ_kl < -θ_sym` gives `k → l`,
/// `θ_kl > θ_sym` gives `l → k`, anything in between is bidirectional and
/// keeps the lower node index as `from`.
pub fn orient_edges(mut graph: FilteredGraph, rho: &ComplexCorrelationMatrix, theta_sym: f64) -> FilteredGraph {
    let bins = PhaseBins::default();
    for e in &mut graph.edges {
        let (a, b) = (e.from.min(e.to), e.from.max(e.to));
        let (s, theta) = rho.magnitude_phase(a, b);
        e.magnitude = s;
        e.bin = bins.classify(theta);
        if theta < -theta_sym {
            (e.from, e.to, e.theta, e.bidirectional) = (a, b, theta, false);
        } else if theta > theta_sym {
            (e.from, e.to, e.theta, e.bidirectional) = (b, a, -theta, false);
        } else {
            (e.from, e.to, e.theta, e.bidirectional) = (a, b, theta, true);
        }
    }
    graph
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphConfig {
    /// Drop the largest eigencomponent and re-normalise before filtering.
    pub drop_market: bool,
    pub theta_sym: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self { drop_market: true, theta_sym: DEFAULT_THETA_SYM }
    }
}

/// The matrix graphs are built from: optionally market mode removed and
/// scaled back to unit diagonal.
pub fn graph_matrix(rho: &ComplexCorrelationMatrix, drop_market: bool) -> Result<ComplexCorrelationMatrix> {
    if !drop_market {
        return Ok(rho.clone());
    }
    let decomp = spectral::eig_hermitian(rho)?;
    let reduced = spectral::remove_market_mode(&decomp, &[0])?;
    spectral::renormalize(rho.assets(), &reduced)
}

/// Full graph stage: filtering, orientation and sector labels.
pub fn build_graph(
    rho: &ComplexCorrelationMatrix,
    kind: GraphKind,
    sectors: &SectorTable,
    config: &GraphConfig,
) -> Result<FilteredGraph> {
    let m = graph_matrix(rho, config.drop_market)?;
    let g = match kind {
        GraphKind::Mst => max_spanning_tree(&m)?,
        GraphKind::Pmfg => pmfg(&m)?,
    };
    Ok(orient_edges(g, &m, config.theta_sym).with_sectors(sectors))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeRow {
    pub node: String,
    pub in_degree: usize,
    pub out_degree: usize,
    /// Number of incident edges.
    pub total: usize,
    pub sector: Option<String>,
}

/// In/out degree per node; bidirectional edges count as both in and out at
/// each end.
pub fn degree_report(graph: &FilteredGraph) -> Vec<DegreeRow> {
    let mut rows: Vec<DegreeRow> = graph
        .nodes
        .iter()
        .map(|n| DegreeRow { node: n.id.clone(), in_degree: 0, out_degree: 0, total: 0, sector: n.sector.clone() })
        .collect();
    for e in &graph.edges {
        rows[e.from].out_degree += 1;
        rows[e.to].in_degree += 1;
        if e.bidirectional {
            rows[e.from].in_degree += 1;
            rows[e.to].out_degree += 1;
        }
        rows[e.from].total += 1;
        rows[e.to].total += 1;
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub a: String,
    pub b: String,
    pub magnitude: f64,
    pub theta: f64,
    /// `None` when either ticker has no sector.
    pub same_sector: Option<bool>,
}

/// `(s, θ)` for every unordered pair, upper triangle in row order.
pub fn magnitude_phase_scatter(rho: &ComplexCorrelationMatrix, sectors: &SectorTable) -> Vec<ScatterRow> {
    let names = rho.assets();
    let n = rho.n();
    let mut rows = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (s, theta) = rho.magnitude_phase(i, j);
            let same_sector = match (sectors.sector_of(&names[i]), sectors.sector_of(&names[j])) {
                (Some(x), Some(y)) => Some(x == y),
                _ => None,
            };
            rows.push(ScatterRow { a: names[i].clone(), b: names[j].clone(), magnitude: s, theta, same_sector });
        }
    }
    rows
}
