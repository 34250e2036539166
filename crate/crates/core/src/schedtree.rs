//! Chiplet mapping: the scheduling-tree forest, constrained DFS over the
//! package graph, segment binding, and full-schedule validation.
//!
//! A tree fixes one starting chiplet (root) per model; a depth-`N_i` DFS
//! from each root over NoP-adjacent, unvisited chiplets yields each model's
//! candidate chiplet path. Paths are self-avoiding and mutually disjoint
//! within a window: a chiplet is exclusively occupied by one model per
//! window.

use crate::hardware::NopGraph;
use crate::segmentation::SegEncoding;
use crate::windowing::{LayerAssignment, WindowPlan};
use crate::workload::Scenario;
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ValidationError {
    #[error("window {window}, model {model}: segment cover violated at layer {layer} ({detail})")]
    SegmentCover {
        window: usize,
        model: usize,
        layer: usize,
        detail: String,
    },
    #[error("model {model}: window partition violated ({detail})")]
    WindowPartition { model: usize, detail: String },
    #[error("window {window}: chiplet {chiplet} occupied by more than one model")]
    Exclusivity { window: usize, chiplet: usize },
    #[error("window {window}, model {model}: path break at position {position} (chiplets {a} and {b} are not adjacent)")]
    Adjacency {
        window: usize,
        model: usize,
        position: usize,
        a: usize,
        b: usize,
    },
    #[error("model {model}: dependency ({u} -> {v}) executes out of order")]
    Dependency { model: usize, u: usize, v: usize },
    #[error("window {window}, model {model}: {segments} segments exceed the {chiplets}-chiplet path")]
    PathLength {
        window: usize,
        model: usize,
        segments: usize,
        chiplets: usize,
    },
    #[error("schedule structure: {0}")]
    Structure(String),
}

/// One scheduling tree: a distinct starting chiplet per model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleTree {
    pub roots: Vec<usize>,
}

/// One model's mapping inside a window: ordered layer segments bound to an
/// equally long chiplet path (segment `k` runs on `chiplets[k]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelWindowSchedule {
    pub model: usize,
    pub model_name: String,
    /// Half-open layer index ranges, ascending and contiguous.
    pub segments: Vec<(usize, usize)>,
    pub chiplets: Vec<usize>,
}

/// All model mappings of one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSchedule {
    pub window: usize,
    pub entries: Vec<ModelWindowSchedule>,
}

/// The assembled cross-window schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullSchedule {
    pub scenario: String,
    pub plan: WindowPlan,
    /// Non-empty windows, ascending by window index.
    pub windows: Vec<WindowSchedule>,
    /// Per-window scheduling encoding, aligned with `windows`.
    pub provenance: Vec<SegEncoding>,
}

impl FullSchedule {
    /// Reconstruct the layer-to-window assignment.
    pub fn assignment(&self, sc: &Scenario) -> LayerAssignment {
        let n_windows = self.plan.num_windows();
        let n_models = sc.models.len();
        let mut runs = vec![vec![None; n_models]; n_windows];
        for w in &self.windows {
            for e in &w.entries {
                if let (Some(first), Some(last)) = (e.segments.first(), e.segments.last()) {
                    runs[w.window][e.model] = Some((first.0, last.1));
                }
            }
        }
        let mut out = vec![vec![(0usize, 0usize); n_models]; n_windows];
        for m in 0..n_models {
            let mut next = 0usize;
            for w in 0..n_windows {
                match runs[w][m] {
                    Some((s, e)) => {
                        out[w][m] = (s, e);
                        next = e;
                    }
                    None => out[w][m] = (next, next),
                }
            }
        }
        LayerAssignment { runs: out }
    }
}

/// All ordered selections of `n_models` distinct roots out of `n_chiplets`,
/// lexicographic by id tuple.
pub fn build_forest(n_chiplets: usize, n_models: usize) -> ForestIter {
    ForestIter {
        n_chiplets,
        n_models,
        current: Vec::new(),
        started: false,
    }
}

pub struct ForestIter {
    n_chiplets: usize,
    n_models: usize,
    current: Vec<usize>,
    started: bool,
}

impl ForestIter {
    fn first_free(&self, from: usize) -> Option<usize> {
        (from..self.n_chiplets).find(|c| !self.current.contains(c))
    }
}

impl Iterator for ForestIter {
    type Item = ScheduleTree;

    fn next(&mut self) -> Option<ScheduleTree> {
        if self.n_models > self.n_chiplets || self.n_models == 0 {
            return None;
        }
        if !self.started {
            self.started = true;
            for _ in 0..self.n_models {
                let free = self.first_free(0).unwrap();
                self.current.push(free);
            }
            return Some(ScheduleTree {
                roots: self.current.clone(),
            });
        }
        // Advance the last position that can move to a larger free id.
        loop {
            let pos = self.current.len();
            if pos == 0 {
                return None;
            }
            let old = self.current.pop().unwrap();
            let next = ((old + 1)..self.n_chiplets).find(|c| !self.current.contains(c));
            if let Some(c) = next {
                self.current.push(c);
                while self.current.len() < self.n_models {
                    match self.first_free(0) {
                        Some(f) => self.current.push(f),
                        None => break,
                    }
                }
                if self.current.len() == self.n_models {
                    return Some(ScheduleTree {
                        roots: self.current.clone(),
                    });
                }
            }
        }
    }
}

/// Constrained DFS over one tree: emit every complete set of per-model
/// chiplet paths (depth `depths[i]`, self-avoiding, NoP-adjacent steps,
/// disjoint across models). Dead branches prune silently. Deterministic:
/// neighbor ids ascend.
pub fn enumerate_paths<F>(tree: &ScheduleTree, g: &NopGraph, depths: &[usize], emit: &mut F)
where
    F: FnMut(&[Vec<usize>]),
{
    assert_eq!(tree.roots.len(), depths.len());
    let mut occupied = vec![false; g.num_nodes()];
    let mut paths: Vec<Vec<usize>> = Vec::with_capacity(depths.len());
    walk_model(tree, g, depths, 0, &mut occupied, &mut paths, emit);
}

fn walk_model<F>(
    tree: &ScheduleTree,
    g: &NopGraph,
    depths: &[usize],
    model: usize,
    occupied: &mut Vec<bool>,
    paths: &mut Vec<Vec<usize>>,
    emit: &mut F,
) where
    F: FnMut(&[Vec<usize>]),
{
    if model == depths.len() {
        emit(paths);
        return;
    }
    let root = tree.roots[model];
    if occupied[root] {
        return; // root consumed by a preceding subtree
    }
    occupied[root] = true;
    paths.push(vec![root]);
    extend_path(tree, g, depths, model, occupied, paths, emit);
    paths.pop();
    occupied[root] = false;
}

fn extend_path<F>(
    tree: &ScheduleTree,
    g: &NopGraph,
    depths: &[usize],
    model: usize,
    occupied: &mut Vec<bool>,
    paths: &mut Vec<Vec<usize>>,
    emit: &mut F,
) where
    F: FnMut(&[Vec<usize>]),
{
    if paths[model].len() == depths[model] {
        walk_model(tree, g, depths, model + 1, occupied, paths, emit);
        return;
    }
    let tail = *paths[model].last().unwrap();
    for i in 0..g.adjacency[tail].len() {
        let next = g.adjacency[tail][i];
        if occupied[next] {
            continue;
        }
        occupied[next] = true;
        paths[model].push(next);
        extend_path(tree, g, depths, model, occupied, paths, emit);
        paths[model].pop();
        occupied[next] = false;
    }
}

/// Collect the skeletons of one tree (testing convenience).
pub fn collect_paths(tree: &ScheduleTree, g: &NopGraph, depths: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    enumerate_paths(tree, g, depths, &mut |paths| out.push(paths.to_vec()));
    out
}

/// A seeded self-avoiding walk of the requested length avoiding `occupied`,
/// or None when the DFS proves none exists (or the step budget runs out).
/// Deterministic in the gene. Used by the evolutionary decoder.
pub fn sample_path(
    g: &NopGraph,
    occupied: &[bool],
    len: usize,
    gene: u64,
) -> Option<Vec<usize>> {
    if len == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(gene);
    let mut starts: Vec<usize> = (0..g.num_nodes()).filter(|&n| !occupied[n]).collect();
    starts.shuffle(&mut rng);
    let mut visited = occupied.to_vec();
    let mut budget: u64 = 200_000;
    for &s in &starts {
        let mut path = vec![s];
        visited[s] = true;
        if dfs_random(g, &mut visited, &mut path, len, &mut rng, &mut budget) {
            return Some(path);
        }
        visited[s] = false;
        if budget == 0 {
            return None;
        }
    }
    None
}

fn dfs_random(
    g: &NopGraph,
    visited: &mut Vec<bool>,
    path: &mut Vec<usize>,
    len: usize,
    rng: &mut ChaCha8Rng,
    budget: &mut u64,
) -> bool {
    if path.len() == len {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let tail = *path.last().unwrap();
    let mut next: Vec<usize> = g.adjacency[tail]
        .iter()
        .copied()
        .filter(|&n| !visited[n])
        .collect();
    next.shuffle(rng);
    for n in next {
        visited[n] = true;
        path.push(n);
        if dfs_random(g, visited, path, len, rng, budget) {
            return true;
        }
        path.pop();
        visited[n] = false;
    }
    false
}

/// Uniformly pick one skeleton index per model via `rng`, for the
/// random-sampling baseline in tests.
pub fn random_gene(rng: &mut impl Rng) -> u64 {
    rng.gen::<u64>()
}

/// Bind segments in order onto a path prefix; tail chiplets are released.
pub fn bind(
    model: usize,
    model_name: &str,
    segments: Vec<(usize, usize)>,
    path: &[usize],
    window: usize,
) -> Result<ModelWindowSchedule, ValidationError> {
    if segments.len() > path.len() {
        return Err(ValidationError::PathLength {
            window,
            model,
            segments: segments.len(),
            chiplets: path.len(),
        });
    }
    let chiplets = path[..segments.len()].to_vec();
    Ok(ModelWindowSchedule {
        model,
        model_name: model_name.to_string(),
        segments,
        chiplets,
    })
}

/// Validate a full schedule against the scenario and package graph:
/// per-window segment cover and disjointness, the cross-window partition of
/// every model, per-window chiplet exclusivity, path adjacency, and
/// dependency order. Violations carry their coordinates.
pub fn validate_schedule(
    full: &FullSchedule,
    sc: &Scenario,
    g: &NopGraph,
) -> Result<(), ValidationError> {
    let n_models = sc.models.len();
    let n_windows = full.plan.num_windows();
    let mut last_window: Option<usize> = None;
    // Per model: covered layers in execution order.
    let mut covered: Vec<Vec<usize>> = vec![Vec::new(); n_models];

    for w in &full.windows {
        if w.window >= n_windows {
            return Err(ValidationError::Structure(format!(
                "window index {} exceeds plan ({} windows)",
                w.window, n_windows
            )));
        }
        if let Some(prev) = last_window {
            if w.window <= prev {
                return Err(ValidationError::Structure(
                    "windows out of order or duplicated".into(),
                ));
            }
        }
        last_window = Some(w.window);

        let mut used_chiplets: Vec<usize> = Vec::new();
        let mut seen_models: Vec<usize> = Vec::new();
        for e in &w.entries {
            if e.model >= n_models {
                return Err(ValidationError::Structure(format!(
                    "model index {} out of range",
                    e.model
                )));
            }
            if sc.models[e.model].name != e.model_name {
                return Err(ValidationError::Structure(format!(
                    "model {} named `{}` but scenario says `{}`",
                    e.model, e.model_name, sc.models[e.model].name
                )));
            }
            if seen_models.contains(&e.model) {
                return Err(ValidationError::Structure(format!(
                    "model {} appears twice in window {}",
                    e.model, w.window
                )));
            }
            seen_models.push(e.model);
            if e.segments.is_empty() {
                return Err(ValidationError::Structure(format!(
                    "window {} lists model {} without segments",
                    w.window, e.model
                )));
            }
            if e.segments.len() != e.chiplets.len() {
                return Err(ValidationError::PathLength {
                    window: w.window,
                    model: e.model,
                    segments: e.segments.len(),
                    chiplets: e.chiplets.len(),
                });
            }
            let total = sc.models[e.model].layers.len();
            // Theorem-1 shape: contiguous ascending spans, no overlap or gap.
            let mut prev_end: Option<usize> = None;
            for &(s, end) in &e.segments {
                if end <= s || end > total {
                    return Err(ValidationError::SegmentCover {
                        window: w.window,
                        model: e.model,
                        layer: s,
                        detail: format!("bad span ({s}, {end}) for {total} layers"),
                    });
                }
                if let Some(p) = prev_end {
                    if s != p {
                        let detail = if s < p { "overlap" } else { "gap" };
                        return Err(ValidationError::SegmentCover {
                            window: w.window,
                            model: e.model,
                            layer: s,
                            detail: detail.into(),
                        });
                    }
                }
                prev_end = Some(end);
                for l in s..end {
                    covered[e.model].push(l);
                }
            }
            // Exclusivity and self-avoidance.
            for &c in &e.chiplets {
                if c >= g.num_nodes() {
                    return Err(ValidationError::Structure(format!(
                        "chiplet id {c} out of range"
                    )));
                }
                if used_chiplets.contains(&c) {
                    return Err(ValidationError::Exclusivity {
                        window: w.window,
                        chiplet: c,
                    });
                }
                used_chiplets.push(c);
            }
            // Consecutive bound chiplets must be NoP-adjacent.
            for (i, pair) in e.chiplets.windows(2).enumerate() {
                if !g.are_adjacent(pair[0], pair[1]) {
                    return Err(ValidationError::Adjacency {
                        window: w.window,
                        model: e.model,
                        position: i,
                        a: pair[0],
                        b: pair[1],
                    });
                }
            }
        }
    }

    // Theorem-2 shape: each model's covered sequence is exactly 0..L in order.
    for (m, model) in sc.models.iter().enumerate() {
        let total = model.layers.len();
        if covered[m].len() != total {
            return Err(ValidationError::WindowPartition {
                model: m,
                detail: format!(
                    "{} of {} layers covered",
                    covered[m].len(),
                    total
                ),
            });
        }
        for (rank, &l) in covered[m].iter().enumerate() {
            if l != rank {
                return Err(ValidationError::WindowPartition {
                    model: m,
                    detail: format!("layer {l} out of place at rank {rank}"),
                });
            }
        }
        // Dependency order in execution sequence.
        let rank = |l: usize| l; // covered is the identity here
        for (u, v) in model.dep_edges() {
            if rank(u) >= rank(v) {
                return Err(ValidationError::Dependency { model: m, u, v });
            }
        }
    }
    Ok(())
}

/// log10 of the unconstrained scheduling-space size:
/// `C^L * L! / (L_1! ... L_N!)` computed in log space (the multinomial term
/// counts dependency-respecting interleavings of the model layer sequences).
pub fn complexity_estimate(sc: &Scenario, n_chiplets: usize) -> f64 {
    let ln10 = std::f64::consts::LN_10;
    let l_total: u64 = sc.models.iter().map(|m| m.layers.len() as u64).sum();
    let ln_fact = |n: u64| -> f64 { (2..=n).map(|i| (i as f64).ln()).sum() };
    let mut log10 = l_total as f64 * (n_chiplets as f64).log10();
    log10 += ln_fact(l_total) / ln10;
    for m in &sc.models {
        log10 -= ln_fact(m.layers.len() as u64) / ln10;
    }
    log10
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardware::{build_topology, parse_hardware};
    use crate::workload::{LayerKind, LayerParams, Model};

    fn mesh_graph(rows: usize, cols: usize) -> NopGraph {
        let spec = parse_hardware(&format!(
            r#"{{ "topology": {{ "kind": "mesh", "rows": {rows}, "cols": {cols} }},
                 "pattern": "het-cb" }}"#
        ))
        .unwrap();
        build_topology(&spec)
    }

    #[test]
    fn forest_counts() {
        assert_eq!(build_forest(4, 2).count(), 12);
        assert_eq!(build_forest(5, 1).count(), 5);
        assert_eq!(build_forest(9, 3).count(), 9 * 8 * 7);
    }

    #[test]
    fn forest_is_lexicographic_and_distinct() {
        let trees: Vec<ScheduleTree> = build_forest(3, 2).collect();
        let roots: Vec<Vec<usize>> = trees.into_iter().map(|t| t.roots).collect();
        assert_eq!(
            roots,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 2],
                vec![2, 0],
                vec![2, 1]
            ]
        );
    }

    #[test]
    fn paths_depth_one() {
        let g = mesh_graph(2, 2);
        let tree = ScheduleTree { roots: vec![0, 3] };
        let skeletons = collect_paths(&tree, &g, &[1, 1]);
        assert_eq!(skeletons, vec![vec![vec![0], vec![3]]]);
    }

    #[test]
    fn paths_follow_grid_adjacency() {
        let g = mesh_graph(2, 2);
        let tree = ScheduleTree { roots: vec![0] };
        let skeletons = collect_paths(&tree, &g, &[2]);
        assert_eq!(skeletons, vec![vec![vec![0, 1]], vec![vec![0, 2]]]);
    }

    /// Independent walk enumerator: all self-avoiding walks of length `len`
    /// from `start` over the adjacency matrix, avoiding `used`.
    fn brute_walks(
        g: &NopGraph,
        start: usize,
        len: usize,
        used: &mut Vec<bool>,
    ) -> Vec<Vec<usize>> {
        fn go(
            g: &NopGraph,
            path: &mut Vec<usize>,
            len: usize,
            used: &mut Vec<bool>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if path.len() == len {
                out.push(path.clone());
                return;
            }
            let tail = *path.last().unwrap();
            for n in 0..g.num_nodes() {
                if g.are_adjacent(tail, n) && !used[n] {
                    used[n] = true;
                    path.push(n);
                    go(g, path, len, used, out);
                    path.pop();
                    used[n] = false;
                }
            }
        }
        let mut out = Vec::new();
        if !used[start] {
            used[start] = true;
            go(g, &mut vec![start], len, used, &mut out);
            used[start] = false;
        }
        out
    }

    #[test]
    fn path_counts_match_walk_enumerator() {
        for (rows, cols, depths) in [
            (2usize, 2usize, vec![2usize]),
            (3, 3, vec![3]),
            (3, 3, vec![2, 2]),
            (3, 3, vec![4, 3]),
            (2, 3, vec![3, 2]),
        ] {
            let g = mesh_graph(rows, cols);
            let n = rows * cols;
            let m = depths.len();
            let mut ours = 0usize;
            for tree in build_forest(n, m) {
                ours += collect_paths(&tree, &g, &depths).len();
            }
            // Oracle: sum over ordered root tuples of nested walk products.
            let mut oracle = 0usize;
            fn nest(
                g: &NopGraph,
                depths: &[usize],
                i: usize,
                roots: &[usize],
                used: &mut Vec<bool>,
                count: &mut usize,
            ) {
                if i == depths.len() {
                    *count += 1;
                    return;
                }
                let walks = brute_walks(g, roots[i], depths[i], used);
                for w in walks {
                    for &n in &w {
                        used[n] = true;
                    }
                    nest(g, depths, i + 1, roots, used, count);
                    for &n in &w {
                        used[n] = false;
                    }
                }
            }
            let mut roots = vec![0usize; m];
            fn pick_roots(
                g: &NopGraph,
                depths: &[usize],
                i: usize,
                n: usize,
                roots: &mut Vec<usize>,
                used: &mut Vec<bool>,
                count: &mut usize,
            ) {
                if i == depths.len() {
                    nest(g, depths, 0, roots, used, count);
                    return;
                }
                for r in 0..n {
                    if roots[..i].contains(&r) {
                        continue;
                    }
                    roots[i] = r;
                    pick_roots(g, depths, i + 1, n, roots, used, count);
                }
            }
            pick_roots(
                &g,
                &depths,
                0,
                n,
                &mut roots,
                &mut vec![false; n],
                &mut oracle,
            );
            assert_eq!(ours, oracle, "{rows}x{cols} depths {depths:?}");
        }
    }

    #[test]
    fn skeletons_are_self_avoiding_and_bounded() {
        let g = mesh_graph(3, 3);
        let depths = vec![3usize, 2];
        let mut total = 0usize;
        for tree in build_forest(9, 2) {
            for skel in collect_paths(&tree, &g, &depths) {
                total += 1;
                let mut seen = vec![false; 9];
                for path in &skel {
                    for &c in path {
                        assert!(!seen[c], "chiplet {c} repeated");
                        seen[c] = true;
                    }
                    for pair in path.windows(2) {
                        assert!(g.are_adjacent(pair[0], pair[1]));
                    }
                }
            }
        }
        // Degree-of-freedom upper bound on the enumeration size.
        let trees = build_forest(9, 2).count();
        let bound = 2 * trees * g.max_degree().pow(3) as usize;
        assert!(total <= bound, "{total} > {bound}");
    }

    #[test]
    fn bind_examples() {
        let b = bind(0, "A", vec![(0, 2), (2, 3)], &[0, 1], 0).unwrap();
        assert_eq!(b.chiplets, vec![0, 1]);
        let b = bind(0, "A", vec![(0, 3)], &[0, 1], 0).unwrap();
        assert_eq!(b.chiplets, vec![0]); // tail released
        assert!(matches!(
            bind(0, "A", vec![(0, 1), (1, 2), (2, 3)], &[0, 1], 0),
            Err(ValidationError::PathLength { .. })
        ));
    }

    fn tiny_scenario() -> Scenario {
        let fc = |name: &str| LayerParams {
            name: name.into(),
            kind: LayerKind::Fc,
            batch_size: 1,
            c_in: 2,
            c_out: 2,
            ip_h: 1,
            ip_w: 1,
            k_size: 1,
            stride: 1,
            bytes_per_element: 1,
        };
        Scenario {
            name: "tiny".into(),
            models: vec![
                Model {
                    name: "A".into(),
                    layers: vec![fc("a0"), fc("a1"), fc("a2")],
                    deps: None,
                },
                Model {
                    name: "B".into(),
                    layers: vec![fc("b0")],
                    deps: None,
                },
            ],
        }
    }

    fn tiny_schedule() -> FullSchedule {
        FullSchedule {
            scenario: "tiny".into(),
            plan: WindowPlan {
                boundaries: vec![],
                n_splits: 0,
            },
            windows: vec![WindowSchedule {
                window: 0,
                entries: vec![
                    ModelWindowSchedule {
                        model: 0,
                        model_name: "A".into(),
                        segments: vec![(0, 2), (2, 3)],
                        chiplets: vec![0, 1],
                    },
                    ModelWindowSchedule {
                        model: 1,
                        model_name: "B".into(),
                        segments: vec![(0, 1)],
                        chiplets: vec![3],
                    },
                ],
            }],
            provenance: vec![SegEncoding {
                entries: vec![0, 0, 0, 0],
            }],
        }
    }

    #[test]
    fn validate_accepts_constructed_schedule() {
        let g = mesh_graph(2, 2);
        validate_schedule(&tiny_schedule(), &tiny_scenario(), &g).unwrap();
    }

    #[test]
    fn validate_rejects_duplicated_layer() {
        let g = mesh_graph(2, 2);
        let mut s = tiny_schedule();
        s.windows[0].entries[0].segments = vec![(0, 2), (1, 3)]; // layer 1 twice
        assert!(matches!(
            validate_schedule(&s, &tiny_scenario(), &g),
            Err(ValidationError::SegmentCover { .. })
        ));
    }

    #[test]
    fn validate_rejects_shared_chiplet() {
        let g = mesh_graph(2, 2);
        let mut s = tiny_schedule();
        s.windows[0].entries[1].chiplets = vec![0];
        assert!(matches!(
            validate_schedule(&s, &tiny_scenario(), &g),
            Err(ValidationError::Exclusivity { window: 0, chiplet: 0 })
        ));
    }

    #[test]
    fn validate_rejects_non_adjacent_path() {
        let g = mesh_graph(2, 2);
        let mut s = tiny_schedule();
        s.windows[0].entries[0].chiplets = vec![0, 3]; // diagonal
        assert!(matches!(
            validate_schedule(&s, &tiny_scenario(), &g),
            Err(ValidationError::Adjacency { .. })
        ));
    }

    #[test]
    fn validate_rejects_missing_layer() {
        let g = mesh_graph(2, 2);
        let mut s = tiny_schedule();
        s.windows[0].entries[0].segments = vec![(0, 2)];
        s.windows[0].entries[0].chiplets = vec![0];
        assert!(matches!(
            validate_schedule(&s, &tiny_scenario(), &g),
            Err(ValidationError::WindowPartition { model: 0, .. })
        ));
    }

    #[test]
    fn complexity_estimate_tiny_case() {
        // Two one-layer models on two chiplets: 2^2 assignments times two
        // interleavings = 8 schedules.
        let sc = tiny_two_singletons();
        let got = complexity_estimate(&sc, 2);
        assert!((got - 8f64.log10()).abs() < 1e-12, "got {got}");
    }

    fn tiny_two_singletons() -> Scenario {
        let mut sc = tiny_scenario();
        sc.models[0].layers.truncate(1);
        sc
    }

    #[test]
    fn complexity_single_model_is_pure_power() {
        let mut sc = tiny_scenario();
        sc.models.truncate(1);
        let got = complexity_estimate(&sc, 5);
        assert!((got - 3.0 * 5f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn complexity_matches_brute_force_interleaving_counts() {
        // Enumerate interleavings x assignments for small cases.
        fn interleavings(counts: &[usize]) -> u64 {
            fn go(rem: &mut Vec<usize>) -> u64 {
                if rem.iter().all(|&r| r == 0) {
                    return 1;
                }
                let mut acc = 0;
                for i in 0..rem.len() {
                    if rem[i] > 0 {
                        rem[i] -= 1;
                        acc += go(rem);
                        rem[i] += 1;
                    }
                }
                acc
            }
            go(&mut counts.to_vec())
        }
        for (counts, c) in [
            (vec![1usize, 1], 2usize),
            (vec![2, 1], 2),
            (vec![2, 2], 3),
            (vec![1, 1, 2], 3),
        ] {
            let fc = |name: &str| LayerParams {
                name: name.into(),
                kind: LayerKind::Fc,
                batch_size: 1,
                c_in: 2,
                c_out: 2,
                ip_h: 1,
                ip_w: 1,
                k_size: 1,
                stride: 1,
                bytes_per_element: 1,
            };
            let sc = Scenario {
                name: "x".into(),
                models: counts
                    .iter()
                    .enumerate()
                    .map(|(i, &n)| Model {
                        name: format!("m{i}"),
                        layers: (0..n).map(|l| fc(&format!("l{l}"))).collect(),
                        deps: None,
                    })
                    .collect(),
            };
            let l: u32 = counts.iter().sum::<usize>() as u32;
            let brute = interleavings(&counts) as f64 * (c as f64).powi(l as i32);
            let got = complexity_estimate(&sc, c);
            assert!(
                (got - brute.log10()).abs() < 1e-9,
                "counts {counts:?} C {c}: {got} vs {}",
                brute.log10()
            );
        }
    }

    #[test]
    fn sample_path_valid_and_deterministic() {
        let g = mesh_graph(3, 3);
        let occupied = vec![false; 9];
        for gene in [1u64, 2, 99, 12345] {
            let a = sample_path(&g, &occupied, 4, gene).unwrap();
            let b = sample_path(&g, &occupied, 4, gene).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 4);
            let mut seen = vec![false; 9];
            for &c in &a {
                assert!(!seen[c]);
                seen[c] = true;
            }
            for w in a.windows(2) {
                assert!(g.are_adjacent(w[0], w[1]));
            }
        }
        // Impossible length: proven absent.
        assert!(sample_path(&g, &occupied, 99, 5).is_none());
        // Fully occupied board.
        assert!(sample_path(&g, &vec![true; 9], 1, 5).is_none());
    }
}
