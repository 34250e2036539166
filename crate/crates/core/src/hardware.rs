//! The chiplet package: heterogeneous chiplets, network-on-package topology
//! with hop/route queries, and off-chip memory portals.
//!
//! Meshes route XY (hop count is Manhattan distance); every other topology
//! falls back to BFS shortest paths with lowest-id tie-breaks. All queries
//! are pure; the structures are immutable once built.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum HardwareError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("topology is disconnected: chiplet {0} unreachable")]
    Disconnected(usize),
    #[error("unknown pattern preset `{0}`")]
    UnknownPreset(String),
    #[error("package has no memory portals")]
    NoPortals,
    #[error("no route from chiplet {0} to chiplet {1}")]
    Unreachable(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Dataflow class of an accelerator chiplet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dataflow {
    /// NVDLA-like: weights pinned in the PE array.
    WeightStationary,
    /// Shidiannao-like: output pixels pinned in the PE array.
    OutputStationary,
    /// Any other registered dataflow; costed only via a cost database.
    Custom(String),
}

impl Dataflow {
    pub fn parse(s: &str) -> Dataflow {
        match s.to_ascii_lowercase().as_str() {
            "weight-stationary" | "ws" | "nvdla" => Dataflow::WeightStationary,
            "output-stationary" | "os" | "shidiannao" | "shi" => Dataflow::OutputStationary,
            _ => Dataflow::Custom(s.to_string()),
        }
    }

    pub fn tag(&self) -> &str {
        match self {
            Dataflow::WeightStationary => "weight-stationary",
            Dataflow::OutputStationary => "output-stationary",
            Dataflow::Custom(s) => s,
        }
    }
}

impl fmt::Display for Dataflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Serialize for Dataflow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for Dataflow {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Dataflow::parse(&s))
    }
}

/// One accelerator chiplet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipletSpec {
    pub id: usize,
    pub dataflow: Dataflow,
    pub n_pe: u64,
    /// Network-on-chip bandwidth, bytes/s.
    pub bw_noc: f64,
    /// Chiplet-level shared memory bandwidth, bytes/s.
    pub bw_mem: f64,
    /// Shared memory capacity, bytes.
    pub sz_mem: u64,
    /// Core clock, Hz. Converts cost-model cycles to seconds.
    pub clock_hz: f64,
    /// Compute energy per MAC, joules.
    pub e_mac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Topology {
    Mesh { rows: usize, cols: usize },
    /// 2x3 grid with one diagonal per cell: (r, c) -- (r+1, c+1).
    Triangular,
    Custom { nodes: usize, edges: Vec<(usize, usize)> },
}

impl Topology {
    pub fn num_nodes(&self) -> usize {
        match self {
            Topology::Mesh { rows, cols } => rows * cols,
            Topology::Triangular => 6,
            Topology::Custom { nodes, .. } => *nodes,
        }
    }

    /// Grid coordinates (row, col) when the topology is grid-shaped.
    pub fn coords(&self) -> Option<Vec<(usize, usize)>> {
        match self {
            Topology::Mesh { rows, cols } => Some(
                (0..rows * cols).map(|i| (i / cols, i % cols)).collect(),
            ),
            Topology::Triangular => Some((0..6).map(|i| (i / 3, i % 3)).collect()),
            Topology::Custom { .. } => None,
        }
    }
}

/// The full package description.
#[derive(Debug, Clone, PartialEq)]
pub struct McmSpec {
    pub chiplets: Vec<ChipletSpec>,
    pub topology: Topology,
    /// Off-chip DRAM bandwidth, bytes/s.
    pub bw_offchip: f64,
    /// Per-link network-on-package bandwidth, bytes/s.
    pub bw_nop: f64,
    /// Per-hop propagation latency, seconds.
    pub lat_hop: f64,
    /// Network-on-package transmission energy, joules/bit/hop.
    pub e_nop_bit: f64,
    /// DRAM access latency, seconds.
    pub lat_mem: f64,
    /// DRAM access energy, joules/bit.
    pub e_dram_bit: f64,
    /// Fixed contention allowance added to every non-local transfer, seconds.
    pub delta: f64,
    /// Divisor applied to bw_offchip per transfer (fair-share knob).
    pub bw_mem_divisor: f64,
    /// Model per-window NoP link contention when costing schedules.
    pub contention: bool,
    /// Chiplets with an off-chip memory interface, ascending.
    pub portals: Vec<usize>,
}

impl McmSpec {
    pub fn num_chiplets(&self) -> usize {
        self.chiplets.len()
    }

    /// (dataflow, chiplet count) per class, ordered by first appearance.
    pub fn dataflow_classes(&self) -> Vec<(Dataflow, usize)> {
        let mut classes: Vec<(Dataflow, usize)> = Vec::new();
        for c in &self.chiplets {
            match classes.iter_mut().find(|(df, _)| *df == c.dataflow) {
                Some((_, n)) => *n += 1,
                None => classes.push((c.dataflow.clone(), 1)),
            }
        }
        classes
    }

    /// Lowest-id chiplet of the given dataflow class.
    pub fn representative(&self, df: &Dataflow) -> Option<&ChipletSpec> {
        self.chiplets.iter().find(|c| &c.dataflow == df)
    }
}

/// Adjacency view of the network-on-package.
#[derive(Debug, Clone, PartialEq)]
pub struct NopGraph {
    /// Sorted neighbor lists, symmetric.
    pub adjacency: Vec<Vec<usize>>,
    /// (row, col) per chiplet for grid-shaped topologies.
    pub coordinates: Option<Vec<(usize, usize)>>,
    /// Meshes answer hop queries with Manhattan distance (XY routing).
    mesh_xy: bool,
}

impl NopGraph {
    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(|n| n.len()).max().unwrap_or(0)
    }
}

/// Build the NoP graph for a spec's topology.
pub fn build_topology(spec: &McmSpec) -> NopGraph {
    build_graph(&spec.topology)
}

fn build_graph(topology: &Topology) -> NopGraph {
    let n = topology.num_nodes();
    let mut adjacency = vec![Vec::new(); n];
    let add = |adj: &mut Vec<Vec<usize>>, a: usize, b: usize| {
        if !adj[a].contains(&b) {
            adj[a].push(b);
        }
        if !adj[b].contains(&a) {
            adj[b].push(a);
        }
    };
    match topology {
        Topology::Mesh { rows, cols } => {
            for r in 0..*rows {
                for c in 0..*cols {
                    let i = r * cols + c;
                    if c + 1 < *cols {
                        add(&mut adjacency, i, i + 1);
                    }
                    if r + 1 < *rows {
                        add(&mut adjacency, i, i + cols);
                    }
                }
            }
        }
        Topology::Triangular => {
            let (rows, cols) = (2usize, 3usize);
            for r in 0..rows {
                for c in 0..cols {
                    let i = r * cols + c;
                    if c + 1 < cols {
                        add(&mut adjacency, i, i + 1);
                    }
                    if r + 1 < rows {
                        add(&mut adjacency, i, i + cols);
                        if c + 1 < cols {
                            add(&mut adjacency, i, i + cols + 1);
                        }
                    }
                }
            }
        }
        Topology::Custom { edges, .. } => {
            for &(a, b) in edges {
                add(&mut adjacency, a, b);
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    NopGraph {
        adjacency,
        coordinates: topology.coords(),
        mesh_xy: matches!(topology, Topology::Mesh { .. }),
    }
}

/// BFS distances from `src`, exploring neighbors in ascending id order.
fn bfs_dist(g: &NopGraph, src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.num_nodes()];
    dist[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        for &v in &g.adjacency[u] {
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

/// Hop count between two chiplets. Mesh: `|dr| + |dc|` (XY routing);
/// otherwise BFS shortest-path length.
pub fn hop_count(g: &NopGraph, src: usize, dst: usize) -> Result<usize, HardwareError> {
    if src == dst {
        return Ok(0);
    }
    if g.mesh_xy {
        let coords = g.coordinates.as_ref().expect("mesh has coordinates");
        let (r1, c1) = coords[src];
        let (r2, c2) = coords[dst];
        return Ok(r1.abs_diff(r2) + c1.abs_diff(c2));
    }
    bfs_dist(g, src)[dst].ok_or(HardwareError::Unreachable(src, dst))
}

/// The node sequence of the route from `src` to `dst`: XY (column first,
/// then row) on meshes, BFS with lowest-id predecessors elsewhere.
/// Used by the link-contention model.
pub fn route_nodes(g: &NopGraph, src: usize, dst: usize) -> Result<Vec<usize>, HardwareError> {
    if src == dst {
        return Ok(vec![src]);
    }
    if g.mesh_xy {
        let coords = g.coordinates.as_ref().unwrap();
        let cols = coords.iter().map(|&(_, c)| c).max().unwrap() + 1;
        let (r1, c1) = coords[src];
        let (r2, c2) = coords[dst];
        let mut path = vec![src];
        let (mut r, mut c) = (r1, c1);
        while c != c2 {
            c = if c < c2 { c + 1 } else { c - 1 };
            path.push(r * cols + c);
        }
        while r != r2 {
            r = if r < r2 { r + 1 } else { r - 1 };
            path.push(r * cols + c);
        }
        return Ok(path);
    }
    // BFS back-pointers; neighbors are scanned ascending so the chosen
    // predecessor is the lowest-id one at minimal distance.
    let mut prev = vec![usize::MAX; g.num_nodes()];
    let mut seen = vec![false; g.num_nodes()];
    seen[src] = true;
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        if u == dst {
            break;
        }
        for &v in &g.adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                prev[v] = u;
                q.push_back(v);
            }
        }
    }
    if !seen[dst] {
        return Err(HardwareError::Unreachable(src, dst));
    }
    let mut path = vec![dst];
    let mut cur = dst;
    while cur != src {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    Ok(path)
}

/// Nearest off-chip portal to chiplet `c` and its hop distance.
/// Ties break toward the lowest portal id.
pub fn memory_portal(
    g: &NopGraph,
    spec: &McmSpec,
    c: usize,
) -> Result<(usize, usize), HardwareError> {
    if spec.portals.is_empty() {
        return Err(HardwareError::NoPortals);
    }
    let mut best: Option<(usize, usize)> = None;
    for &p in &spec.portals {
        let h = hop_count(g, c, p)?;
        match best {
            Some((_, bh)) if bh <= h => {}
            _ => best = Some((p, h)),
        }
    }
    Ok(best.unwrap())
}

// ---------------------------------------------------------------------------
// Document schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum PatternDoc {
    Preset(String),
    Explicit(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChipletDoc {
    #[serde(default = "d_n_pe")]
    n_pe: u64,
    #[serde(default = "d_bw_noc")]
    bw_noc: f64,
    #[serde(default = "d_bw_chip_mem")]
    bw_mem: f64,
    #[serde(default = "d_sz_mem")]
    sz_mem: u64,
    #[serde(default = "d_clock_hz")]
    clock_hz: f64,
    #[serde(default = "d_e_mac_pj")]
    e_mac_pj: f64,
}

impl Default for ChipletDoc {
    fn default() -> Self {
        ChipletDoc {
            n_pe: d_n_pe(),
            bw_noc: d_bw_noc(),
            bw_mem: d_bw_chip_mem(),
            sz_mem: d_sz_mem(),
            clock_hz: d_clock_hz(),
            e_mac_pj: d_e_mac_pj(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PackageDoc {
    #[serde(default = "d_bw_offchip")]
    bw_offchip: f64,
    #[serde(default = "d_bw_nop")]
    bw_nop: f64,
    #[serde(default = "d_lat_hop_ns")]
    lat_hop_ns: f64,
    #[serde(default = "d_e_nop_pj_bit")]
    e_nop_pj_bit: f64,
    #[serde(default = "d_lat_mem_ns")]
    lat_mem_ns: f64,
    #[serde(default = "d_e_dram_pj_bit")]
    e_dram_pj_bit: f64,
    #[serde(default)]
    delta_ns: f64,
    #[serde(default = "d_one")]
    bw_mem_divisor: f64,
    #[serde(default)]
    contention: bool,
    /// Defaults to the left and right outer columns on grids.
    #[serde(default)]
    portals: Option<Vec<usize>>,
}

impl Default for PackageDoc {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

// Package defaults: Simba-class interposer and DRAM figures.
fn d_n_pe() -> u64 {
    4096
}
fn d_bw_noc() -> f64 {
    100e9
}
fn d_bw_chip_mem() -> f64 {
    64e9
}
fn d_sz_mem() -> u64 {
    10 * 1024 * 1024
}
fn d_clock_hz() -> f64 {
    500e6
}
fn d_e_mac_pj() -> f64 {
    1.0
}
fn d_bw_offchip() -> f64 {
    64e9
}
fn d_bw_nop() -> f64 {
    100e9
}
fn d_lat_hop_ns() -> f64 {
    35.0
}
fn d_e_nop_pj_bit() -> f64 {
    2.04
}
fn d_lat_mem_ns() -> f64 {
    200.0
}
fn d_e_dram_pj_bit() -> f64 {
    14.8
}
fn d_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct HardwareDoc {
    topology: Topology,
    pattern: PatternDoc,
    #[serde(default)]
    chiplet: ChipletDoc,
    #[serde(default)]
    package: PackageDoc,
}

/// Expand a dataflow pattern preset over a grid.
///
/// `het-sides`: outer columns weight-stationary, inner columns
/// output-stationary. `het-cb`: checkerboard by (row+col) parity.
/// `het-cross`: the center row(s)/column(s) output-stationary.
/// `het-t` is the checkerboard alias used with the triangular topology.
fn expand_preset(preset: &str, topology: &Topology) -> Result<Vec<Dataflow>, HardwareError> {
    let n = topology.num_nodes();
    let uniform = |df: Dataflow| Ok(vec![df; n]);
    match preset.to_ascii_lowercase().as_str() {
        "homogeneous-nvdla" | "homogeneous-ws" | "standalone-nvdla" | "simba-nvdla" => {
            uniform(Dataflow::WeightStationary)
        }
        "homogeneous-shidiannao" | "homogeneous-os" | "standalone-shidiannao"
        | "simba-shidiannao" => uniform(Dataflow::OutputStationary),
        p @ ("het-cb" | "het-sides" | "het-cross" | "het-t") => {
            let coords = topology
                .coords()
                .ok_or_else(|| HardwareError::Schema(format!(
                    "pattern `{p}` requires a grid topology; use an explicit dataflow list"
                )))?;
            let rows = coords.iter().map(|&(r, _)| r).max().unwrap() + 1;
            let cols = coords.iter().map(|&(_, c)| c).max().unwrap() + 1;
            let mid = |extent: usize| -> Vec<usize> {
                if extent % 2 == 1 {
                    vec![extent / 2]
                } else {
                    vec![extent / 2 - 1, extent / 2]
                }
            };
            let (mid_r, mid_c) = (mid(rows), mid(cols));
            Ok(coords
                .iter()
                .map(|&(r, c)| match p {
                    "het-cb" | "het-t" => {
                        if (r + c) % 2 == 0 {
                            Dataflow::WeightStationary
                        } else {
                            Dataflow::OutputStationary
                        }
                    }
                    "het-sides" => {
                        if c == 0 || c == cols - 1 {
                            Dataflow::WeightStationary
                        } else {
                            Dataflow::OutputStationary
                        }
                    }
                    _ => {
                        // het-cross
                        if mid_r.contains(&r) || mid_c.contains(&c) {
                            Dataflow::OutputStationary
                        } else {
                            Dataflow::WeightStationary
                        }
                    }
                })
                .collect())
        }
        other => Err(HardwareError::UnknownPreset(other.to_string())),
    }
}

fn default_portals(topology: &Topology) -> Result<Vec<usize>, HardwareError> {
    match topology.coords() {
        Some(coords) => {
            let cols = coords.iter().map(|&(_, c)| c).max().unwrap() + 1;
            Ok(coords
                .iter()
                .enumerate()
                .filter(|&(_, &(_, c))| c == 0 || c == cols - 1)
                .map(|(i, _)| i)
                .collect())
        }
        None => Err(HardwareError::Schema(
            "custom topologies must list portals explicitly".into(),
        )),
    }
}

/// Parse and validate a hardware document (JSON), expanding pattern presets
/// into per-chiplet dataflow assignments.
pub fn parse_hardware(text: &str) -> Result<McmSpec, HardwareError> {
    let doc: HardwareDoc =
        serde_json::from_str(text).map_err(|e| HardwareError::Parse(e.to_string()))?;
    let n = doc.topology.num_nodes();
    if n == 0 {
        return Err(HardwareError::Schema("topology has no chiplets".into()));
    }
    if let Topology::Custom { nodes, edges } = &doc.topology {
        for &(a, b) in edges {
            if a >= *nodes || b >= *nodes {
                return Err(HardwareError::Schema(format!(
                    "edge ({a}, {b}) out of range for {nodes} chiplets"
                )));
            }
        }
    }
    let dataflows = match &doc.pattern {
        PatternDoc::Preset(p) => expand_preset(p, &doc.topology)?,
        PatternDoc::Explicit(list) => {
            if list.len() != n {
                return Err(HardwareError::Schema(format!(
                    "explicit pattern lists {} dataflows for {} chiplets",
                    list.len(),
                    n
                )));
            }
            list.iter().map(|s| Dataflow::parse(s)).collect()
        }
    };
    let c = &doc.chiplet;
    if c.n_pe < 1 {
        return Err(HardwareError::Schema("n_pe must be >= 1".into()));
    }
    if c.bw_noc <= 0.0 || c.bw_mem <= 0.0 || c.sz_mem == 0 || c.clock_hz <= 0.0 {
        return Err(HardwareError::Schema(
            "chiplet bandwidths, memory size, and clock must be positive".into(),
        ));
    }
    let p = &doc.package;
    if p.bw_offchip <= 0.0 || p.bw_nop <= 0.0 || p.bw_mem_divisor <= 0.0 {
        return Err(HardwareError::Schema(
            "package bandwidths must be positive".into(),
        ));
    }
    let chiplets = dataflows
        .into_iter()
        .enumerate()
        .map(|(id, dataflow)| ChipletSpec {
            id,
            dataflow,
            n_pe: c.n_pe,
            bw_noc: c.bw_noc,
            bw_mem: c.bw_mem,
            sz_mem: c.sz_mem,
            clock_hz: c.clock_hz,
            e_mac: c.e_mac_pj * 1e-12,
        })
        .collect();
    let mut portals = match &p.portals {
        Some(list) => {
            let mut v = list.clone();
            v.sort_unstable();
            v.dedup();
            for &id in &v {
                if id >= n {
                    return Err(HardwareError::Schema(format!(
                        "portal id {id} out of range"
                    )));
                }
            }
            v
        }
        None => default_portals(&doc.topology)?,
    };
    portals.sort_unstable();
    if portals.is_empty() {
        return Err(HardwareError::NoPortals);
    }
    let spec = McmSpec {
        chiplets,
        topology: doc.topology,
        bw_offchip: p.bw_offchip,
        bw_nop: p.bw_nop,
        lat_hop: p.lat_hop_ns * 1e-9,
        e_nop_bit: p.e_nop_pj_bit * 1e-12,
        lat_mem: p.lat_mem_ns * 1e-9,
        e_dram_bit: p.e_dram_pj_bit * 1e-12,
        delta: p.delta_ns * 1e-9,
        bw_mem_divisor: p.bw_mem_divisor,
        contention: p.contention,
        portals,
    };
    // Connectivity: every chiplet reachable (hence reachable from a portal).
    let g = build_topology(&spec);
    let dist = bfs_dist(&g, 0);
    if let Some(i) = dist.iter().position(|d| d.is_none()) {
        return Err(HardwareError::Disconnected(i));
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn mesh_doc(rows: usize, cols: usize, pattern: &str) -> String {
        format!(
            r#"{{ "topology": {{ "kind": "mesh", "rows": {rows}, "cols": {cols} }},
                 "pattern": "{pattern}" }}"#
        )
    }

    #[test]
    fn het_sides_3x3_splits_columns() {
        let spec = parse_hardware(&mesh_doc(3, 3, "het-sides")).unwrap();
        assert_eq!(spec.num_chiplets(), 9);
        for (i, c) in spec.chiplets.iter().enumerate() {
            let col = i % 3;
            if col == 1 {
                assert_eq!(c.dataflow, Dataflow::OutputStationary, "chiplet {i}");
            } else {
                assert_eq!(c.dataflow, Dataflow::WeightStationary, "chiplet {i}");
            }
        }
    }

    #[test]
    fn het_sides_3x3_has_homogeneous_and_heterogeneous_adjacent_pairs() {
        let spec = parse_hardware(&mesh_doc(3, 3, "het-sides")).unwrap();
        let g = build_topology(&spec);
        let mut homo = false;
        let mut hetero = false;
        for a in 0..9 {
            for &b in &g.adjacency[a] {
                if spec.chiplets[a].dataflow == spec.chiplets[b].dataflow {
                    homo = true;
                } else {
                    hetero = true;
                }
            }
        }
        assert!(homo && hetero);
    }

    #[test]
    fn homogeneous_preset_is_uniform() {
        let spec = parse_hardware(&mesh_doc(3, 3, "homogeneous-nvdla")).unwrap();
        assert!(spec
            .chiplets
            .iter()
            .all(|c| c.dataflow == Dataflow::WeightStationary));
    }

    #[test]
    fn preset_expansion_is_idempotent() {
        let a = parse_hardware(&mesh_doc(3, 3, "het-cb")).unwrap();
        let b = parse_hardware(&mesh_doc(3, 3, "het-cb")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(matches!(
            parse_hardware(&mesh_doc(3, 3, "het-diagonal")),
            Err(HardwareError::UnknownPreset(_))
        ));
    }

    #[test]
    fn disconnected_custom_topology_rejected() {
        // Chiplet 5 has no edges.
        let doc = r#"{
            "topology": { "kind": "custom", "nodes": 6,
                          "edges": [[0,1],[1,2],[2,3],[3,4]] },
            "pattern": ["ws","ws","ws","os","os","os"],
            "package": { "portals": [0] }
        }"#;
        assert!(matches!(
            parse_hardware(doc),
            Err(HardwareError::Disconnected(5))
        ));
    }

    #[test]
    fn mesh_adjacency_degrees() {
        let spec = parse_hardware(&mesh_doc(3, 3, "het-cb")).unwrap();
        let g = build_topology(&spec);
        assert_eq!(g.adjacency[4].len(), 4); // center
        assert_eq!(g.adjacency[0].len(), 2); // corner
    }

    #[test]
    fn mesh_6x6_edge_count() {
        let spec = parse_hardware(&mesh_doc(6, 6, "het-cross")).unwrap();
        let g = build_topology(&spec);
        assert_eq!(g.num_nodes(), 36);
        let edges: usize = g.adjacency.iter().map(|n| n.len()).sum::<usize>() / 2;
        assert_eq!(edges, 60); // 2*r*c - r - c
    }

    #[test]
    fn hop_count_mesh_manhattan() {
        let spec = parse_hardware(&mesh_doc(3, 3, "het-cb")).unwrap();
        let g = build_topology(&spec);
        assert_eq!(hop_count(&g, 0, 8).unwrap(), 4);
        assert_eq!(hop_count(&g, 5, 5).unwrap(), 0);
    }

    #[test]
    fn triangular_hops_match_bfs_oracle() {
        let doc = r#"{ "topology": { "kind": "triangular" }, "pattern": "het-t" }"#;
        let spec = parse_hardware(doc).unwrap();
        let g = build_topology(&spec);
        // Exhaustive-BFS oracle over the adjacency matrix.
        let oracle = |src: usize, dst: usize| -> usize {
            let mut dist = vec![usize::MAX; g.num_nodes()];
            dist[src] = 0;
            let mut q = std::collections::VecDeque::from([src]);
            while let Some(u) = q.pop_front() {
                for &v in &g.adjacency[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        q.push_back(v);
                    }
                }
            }
            dist[dst]
        };
        for s in 0..6 {
            for d in 0..6 {
                assert_eq!(hop_count(&g, s, d).unwrap(), oracle(s, d));
            }
        }
        // Diagonal shortcut: (0,0) to (1,1) is one hop.
        assert_eq!(hop_count(&g, 0, 4).unwrap(), 1);
        // Opposite corners are not adjacent.
        assert_eq!(hop_count(&g, 0, 5).unwrap(), 2);
    }

    #[test]
    fn hop_count_is_a_metric_on_meshes() {
        for (r, c) in [(2, 2), (3, 3), (6, 6)] {
            let spec = parse_hardware(&mesh_doc(r, c, "het-cb")).unwrap();
            let g = build_topology(&spec);
            let n = g.num_nodes();
            for a in 0..n {
                for b in 0..n {
                    let dab = hop_count(&g, a, b).unwrap();
                    assert_eq!(dab, hop_count(&g, b, a).unwrap());
                    assert_eq!(dab == 0, a == b);
                    for m in 0..n {
                        assert!(
                            dab <= hop_count(&g, a, m).unwrap() + hop_count(&g, m, b).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn portals_default_to_outer_columns() {
        let spec = parse_hardware(&mesh_doc(3, 3, "het-sides")).unwrap();
        assert_eq!(spec.portals, vec![0, 2, 3, 5, 6, 8]);
        let g = build_topology(&spec);
        // Center chiplet reaches a side portal in one hop.
        assert_eq!(memory_portal(&g, &spec, 4).unwrap().1, 1);
        // A portal chiplet is its own nearest portal.
        assert_eq!(memory_portal(&g, &spec, 3).unwrap(), (3, 0));
    }

    #[test]
    fn single_portal_distance() {
        let mut doc: serde_json::Value =
            serde_json::from_str(&mesh_doc(3, 3, "het-sides")).unwrap();
        doc["package"] = serde_json::json!({ "portals": [0] });
        let spec = parse_hardware(&doc.to_string()).unwrap();
        let g = build_topology(&spec);
        assert_eq!(memory_portal(&g, &spec, 8).unwrap(), (0, 4));
    }

    #[test]
    fn route_nodes_xy_then_bfs() {
        let spec = parse_hardware(&mesh_doc(3, 3, "het-cb")).unwrap();
        let g = build_topology(&spec);
        // XY: column first, then row.
        assert_eq!(route_nodes(&g, 0, 8).unwrap(), vec![0, 1, 2, 5, 8]);
        let doc = r#"{ "topology": { "kind": "triangular" }, "pattern": "het-t" }"#;
        let tri = parse_hardware(doc).unwrap();
        let tg = build_topology(&tri);
        let path = route_nodes(&tg, 0, 5).unwrap();
        assert_eq!(path.len(), 3); // two hops
        for w in path.windows(2) {
            assert!(tg.are_adjacent(w[0], w[1]));
        }
    }

    #[test]
    fn het_cross_marks_center_band() {
        let spec = parse_hardware(&mesh_doc(3, 3, "het-cross")).unwrap();
        let os: Vec<usize> = spec
            .chiplets
            .iter()
            .filter(|c| c.dataflow == Dataflow::OutputStationary)
            .map(|c| c.id)
            .collect();
        assert_eq!(os, vec![1, 3, 4, 5, 7]);
    }
}
