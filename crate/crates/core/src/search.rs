//! The hierarchical search: time windows, then per window provisioning,
//! segmentation (exhaustive with pruning heuristics, or evolutionary), and
//! chiplet-path scheduling; scoring on the configured objective with a
//! global Pareto frontier over full-schedule candidates.
//!
//! Windows are searched in order. Every candidate of a window is costed
//! against the best placements chosen for the preceding windows (those fix
//! the cross-window activation routes). Per-window Pareto sets are composed
//! window by window (sums are monotone, so composing frontiers preserves
//! the frontier of the full cross product); the best schedule is the
//! minimum-objective member of the composed candidate pool and is re-costed
//! end to end for the final report.

use crate::costmodel::{
    expected_metric_table, mini_batch, pipeline_latency, scenario_cost, window_cost,
    CommParams, CostError, CostProvider, CostReport, Metric, ModelWindowJob, Route,
};
use crate::hardware::{build_topology, McmSpec, NopGraph};
use crate::provisioner::{provision_exhaustive, provision_uniform, Provision, ProvisionError};
use crate::schedtree::{
    bind, build_forest, enumerate_paths, sample_path, FullSchedule, ModelWindowSchedule,
    ValidationError, WindowSchedule,
};
use crate::segmentation::{
    enumerate_segmentations, sample_segmentation, topk_per_model, SegEncoding, Segmentation,
    SegmentationError,
};
use crate::windowing::{greedy_pack, make_windows, time_horizon, uniform_pack, LayerAssignment};
use crate::workload::Scenario;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Provision(#[from] ProvisionError),
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// What the search minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Latency,
    Energy,
    Edp,
    /// Weighted sum of latency and energy, each normalized by the standalone
    /// baseline's cost.
    Weighted { wl: f64, we: f64 },
}

impl Objective {
    fn provisioning_metric(&self) -> Metric {
        match self {
            Objective::Latency => Metric::Latency,
            Objective::Energy => Metric::Energy,
            Objective::Edp => Metric::Edp,
            Objective::Weighted { .. } => Metric::Latency,
        }
    }
}

/// Score a (latency, energy) point under an objective. `refs` supplies the
/// normalization for weighted objectives.
pub fn score_point(latency: f64, energy: f64, obj: &Objective, refs: Option<(f64, f64)>) -> f64 {
    match obj {
        Objective::Latency => latency,
        Objective::Energy => energy,
        Objective::Edp => latency * energy,
        Objective::Weighted { wl, we } => {
            let (rl, re) = refs.unwrap_or((1.0, 1.0));
            wl * latency / rl + we * energy / re
        }
    }
}

/// Score a full cost report.
pub fn score(report: &CostReport, obj: &Objective, refs: Option<(f64, f64)>) -> f64 {
    score_point(report.latency, report.energy, obj, refs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PackingMode {
    Greedy,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProvMode {
    Uniform,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exhaustive,
    Evolutionary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n_splits: usize,
    pub packing: PackingMode,
    pub prov: ProvMode,
    pub top_k: usize,
    pub node_cap: Option<usize>,
    pub disproportion_factor: f64,
    pub mode: SearchMode,
    pub pop: usize,
    pub gens: usize,
    pub seed: u64,
    pub allow_idle: bool,
    /// Objective used to pick per-window optima; defaults to the global one.
    pub window_objective: Option<Objective>,
    /// Worker threads for candidate evaluation; 0 = library default.
    pub jobs: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            n_splits: 4,
            packing: PackingMode::Greedy,
            prov: ProvMode::Uniform,
            top_k: 3,
            node_cap: None,
            disproportion_factor: 3.0,
            mode: SearchMode::Exhaustive,
            pop: 10,
            gens: 4,
            seed: 0,
            allow_idle: false,
            window_objective: None,
            jobs: 0,
        }
    }
}

/// A full-schedule candidate observed by the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub latency: f64,
    pub energy: f64,
    pub schedule_id: String,
}

#[derive(Debug)]
pub struct SearchResult {
    pub best: FullSchedule,
    pub report: CostReport,
    /// Minimal non-dominated subset of `points`.
    pub frontier: Vec<ParetoPoint>,
    /// Every composed full-schedule candidate recorded for the frontier.
    pub points: Vec<ParetoPoint>,
    pub evaluated: u64,
    pub wall_ms: u128,
}

/// Indices of the minimal non-dominated subset of `(latency, energy)`
/// points, sorted by latency then energy; exact duplicates collapse to the
/// earliest insertion.
pub fn pareto_indices(points: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .0
            .total_cmp(&points[b].0)
            .then(points[a].1.total_cmp(&points[b].1))
            .then(a.cmp(&b))
    });
    let mut out = Vec::new();
    let mut best_energy = f64::INFINITY;
    for &i in &order {
        if points[i].1 < best_energy {
            out.push(i);
            best_energy = points[i].1;
        }
    }
    out
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn derive_seed(base: u64, window: usize, provision: usize) -> u64 {
    splitmix64(base ^ splitmix64(window as u64 + 1) ^ splitmix64((provision as u64) << 20))
}

// ---------------------------------------------------------------------------
// Per-window machinery
// ---------------------------------------------------------------------------

/// One active model's static context inside a window.
struct ActiveModel<'a> {
    model: usize,
    name: &'a str,
    run: (usize, usize),
    prev_chiplet: Option<usize>,
    completes: bool,
}

/// A surviving per-window candidate with everything needed to rebuild it.
#[derive(Debug, Clone)]
struct WindowCandidate {
    latency: f64,
    energy: f64,
    entries: Vec<ModelWindowSchedule>,
    encoding: SegEncoding,
}

struct WindowOutcome {
    /// Pareto-minimal candidates of the window, enumeration order preserved
    /// through the filter.
    frontier: Vec<WindowCandidate>,
    evaluated: u64,
}

/// Nominal per-model candidate score for the top-k heuristic: the model owns
/// its nodes, compute uses class-weighted expected costs, hand-offs assume
/// one hop, and window boundaries sit at a portal (no extra hops).
#[allow(clippy::too_many_arguments)]
fn nominal_candidate_score(
    seg: &Segmentation,
    am: &ActiveModel,
    sc: &Scenario,
    mcm: &McmSpec,
    provider: &dyn CostProvider,
    params: &CommParams,
    wobj: &Objective,
    refs: Option<(f64, f64)>,
) -> Result<f64, CostError> {
    let model = &sc.models[am.model];
    let (run_s, run_e) = am.run;
    let spans = seg.spans(run_s, run_e);
    let layers = &model.layers;
    let b = layers[run_s..run_e]
        .iter()
        .map(|l| l.batch_size)
        .max()
        .unwrap();
    let rep = &mcm.chiplets[0];
    let mut b_prime = b;
    for &(s, e) in &spans {
        b_prime = b_prime.min(mini_batch(&layers[s..e], b, rep)?);
    }
    let classes = mcm.dataflow_classes();
    let total = mcm.num_chiplets() as f64;
    let expected_cost = |idx: usize, batch: u64| -> Result<(f64, f64), CostError> {
        let mut lat = 0.0;
        let mut en = 0.0;
        for (df, count) in &classes {
            let rep = mcm.representative(df).unwrap();
            let c = provider.cost(&model.name, idx, &layers[idx], rep, batch)?;
            let share = *count as f64 / total;
            lat += share * c.cycles as f64 / rep.clock_hz;
            en += share * c.energy;
        }
        Ok((lat, en))
    };

    let one_hop = Route::OnPackage { src: 0, dst: 1, n_hops: 1 };
    let portal = Route::Offchip { chiplet: 0, portal: 0, n_hops: 0 };
    let mut stages = Vec::with_capacity(spans.len());
    let mut energy = 0.0f64;
    for (k, &(s, e)) in spans.iter().enumerate() {
        let mut lat = 0.0f64;
        for idx in s..e {
            let (l_bp, _) = expected_cost(idx, b_prime)?;
            lat += l_bp;
            let (_, en_b) = expected_cost(idx, b)?;
            energy += en_b;
        }
        let in_bytes_bp = layers[s].input_bytes_per_sample() * b_prime;
        let in_bytes_b = layers[s].input_bytes_per_sample() * b;
        let w_bytes: u64 = layers[s..e].iter().map(|l| l.weight_bytes()).sum();
        let out_bytes_bp = layers[e - 1].output_bytes_per_sample()? * b_prime;
        let out_bytes_b = layers[e - 1].output_bytes_per_sample()? * b;
        let act_in = if k == 0 {
            if am.prev_chiplet.is_some() {
                one_hop
            } else {
                portal
            }
        } else {
            Route::SameChiplet
        };
        let act_out = if k + 1 < spans.len() {
            one_hop
        } else if am.completes {
            portal
        } else {
            Route::SameChiplet
        };
        lat += crate::costmodel::comm_latency(in_bytes_bp, &act_in, params);
        lat += crate::costmodel::comm_latency(w_bytes, &portal, params);
        lat += crate::costmodel::comm_latency(out_bytes_bp, &act_out, params);
        energy += crate::costmodel::comm_energy(in_bytes_b, &act_in, params);
        energy += crate::costmodel::comm_energy(w_bytes, &portal, params);
        energy += crate::costmodel::comm_energy(out_bytes_b, &act_out, params);
        stages.push(lat);
    }
    let latency = pipeline_latency(&stages, b, b_prime)?;
    Ok(score_point(latency, energy, wobj, refs))
}

fn build_jobs<'a>(
    sc: &'a Scenario,
    actives: &[ActiveModel<'a>],
    entries: &'a [ModelWindowSchedule],
) -> Vec<ModelWindowJob<'a>> {
    actives
        .iter()
        .zip(entries)
        .map(|(am, e)| ModelWindowJob {
            model: am.model,
            model_name: am.name,
            layers: &sc.models[am.model].layers,
            segments: &e.segments,
            chiplets: &e.chiplets,
            prev_chiplet: am.prev_chiplet,
            completes: am.completes,
        })
        .collect()
}

/// Exhaustive per-window search: top-k segmentations per model crossed with
/// every forest skeleton for the provision.
#[allow(clippy::too_many_arguments)]
fn window_exhaustive(
    sc: &Scenario,
    mcm: &McmSpec,
    g: &NopGraph,
    provider: &dyn CostProvider,
    actives: &[ActiveModel],
    provision: &Provision,
    cfg: &SearchConfig,
    wobj: &Objective,
    refs: Option<(f64, f64)>,
    window: usize,
) -> Result<Option<WindowOutcome>, SearchError> {
    let params = CommParams::from_mcm(mcm);
    // Heuristic 1: rank each model's segmentations independently.
    let mut topk: Vec<Vec<(u64, Segmentation)>> = Vec::with_capacity(actives.len());
    let mut depths = Vec::with_capacity(actives.len());
    for am in actives {
        let n_i = provision.nodes_for(am.model).expect("active model provisioned");
        depths.push(n_i);
        let run_len = am.run.1 - am.run.0;
        let mut err: Option<SearchError> = None;
        let ranked = topk_per_model(
            enumerate_segmentations(run_len, n_i),
            cfg.top_k,
            |seg| match nominal_candidate_score(seg, am, sc, mcm, provider, &params, wobj, refs)
            {
                Ok(s) => s,
                Err(e) => {
                    err.get_or_insert(e.into());
                    f64::INFINITY
                }
            },
        );
        if let Some(e) = err {
            return Err(e);
        }
        topk.push(ranked.into_iter().map(|r| (r.index, r.seg)).collect());
    }

    // Skeletons: every tree, every constrained-DFS path set.
    let mut skeletons: Vec<Vec<Vec<usize>>> = Vec::new();
    for tree in build_forest(mcm.num_chiplets(), actives.len()) {
        enumerate_paths(&tree, g, &depths, &mut |paths| {
            skeletons.push(paths.to_vec())
        });
    }
    if skeletons.is_empty() {
        return Ok(None);
    }

    let n_combos: usize = topk.iter().map(|t| t.len()).product();
    let n_cands = n_combos * skeletons.len();

    let decode = |flat: usize| -> Result<(Vec<ModelWindowSchedule>, SegEncoding), SearchError> {
        let combo = flat / skeletons.len();
        let skel = &skeletons[flat % skeletons.len()];
        let mut rem = combo;
        let mut entries = Vec::with_capacity(actives.len());
        let mut genes = Vec::with_capacity(2 * actives.len());
        for (i, am) in actives.iter().enumerate() {
            let pick = rem % topk[i].len();
            rem /= topk[i].len();
            let (enum_idx, seg) = &topk[i][pick];
            genes.push(*enum_idx);
            let spans = seg.spans(am.run.0, am.run.1);
            entries.push(bind(am.model, am.name, spans, &skel[i], window)?);
        }
        genes.extend(std::iter::repeat((flat % skeletons.len()) as u64).take(actives.len()));
        Ok((entries, SegEncoding { entries: genes }))
    };

    let eval = |flat: usize| -> Result<(f64, f64), SearchError> {
        let (entries, _) = decode(flat)?;
        let jobs = build_jobs(sc, actives, &entries);
        let out = window_cost(&jobs, mcm, g, provider)?;
        Ok((out.latency, out.energy))
    };

    let costs: Vec<(f64, f64)> = if cfg.jobs == 1 || n_cands < 256 {
        (0..n_cands).map(eval).collect::<Result<_, _>>()?
    } else {
        (0..n_cands)
            .into_par_iter()
            .map(eval)
            .collect::<Result<_, _>>()?
    };

    let keep = pareto_indices(&costs);
    let mut frontier = Vec::with_capacity(keep.len());
    for &i in &keep {
        let (entries, encoding) = decode(i)?;
        frontier.push(WindowCandidate {
            latency: costs[i].0,
            energy: costs[i].1,
            entries,
            encoding,
        });
    }
    Ok(Some(WindowOutcome {
        frontier,
        evaluated: n_cands as u64,
    }))
}

/// Evolutionary per-window search over seeded (segmentation, path) genes.
#[allow(clippy::too_many_arguments)]
fn window_evolutionary(
    sc: &Scenario,
    mcm: &McmSpec,
    g: &NopGraph,
    provider: &dyn CostProvider,
    actives: &[ActiveModel],
    provision: &Provision,
    cfg: &SearchConfig,
    wobj: &Objective,
    refs: Option<(f64, f64)>,
    window: usize,
    seed: u64,
) -> Result<Option<WindowOutcome>, SearchError> {
    let m = actives.len();
    let depths: Vec<usize> = actives
        .iter()
        .map(|am| provision.nodes_for(am.model).unwrap())
        .collect();

    let decode = |enc: &SegEncoding| -> Option<Vec<ModelWindowSchedule>> {
        let mut occupied = vec![false; mcm.num_chiplets()];
        let mut entries = Vec::with_capacity(m);
        for (i, am) in actives.iter().enumerate() {
            let run_len = am.run.1 - am.run.0;
            let seg = sample_segmentation(run_len, depths[i], enc.entries[i]);
            let path = sample_path(g, &occupied, depths[i], enc.entries[m + i])?;
            for &c in &path {
                occupied[c] = true;
            }
            let spans = seg.spans(am.run.0, am.run.1);
            entries.push(bind(am.model, am.name, spans, &path, window).ok()?);
        }
        Some(entries)
    };

    let mut observed: Vec<(f64, f64)> = Vec::new();
    let mut encodings: Vec<SegEncoding> = Vec::new();
    let mut eval_error: Option<SearchError> = None;
    let result = {
        let fitness = |enc: &SegEncoding| -> f64 {
            if eval_error.is_some() {
                return f64::INFINITY;
            }
            match decode(enc) {
                None => f64::INFINITY,
                Some(entries) => {
                    let jobs = build_jobs(sc, actives, &entries);
                    match window_cost(&jobs, mcm, g, provider) {
                        Ok(out) => {
                            observed.push((out.latency, out.energy));
                            encodings.push(enc.clone());
                            score_point(out.latency, out.energy, wobj, refs)
                        }
                        Err(e) => {
                            eval_error.get_or_insert(e.into());
                            f64::INFINITY
                        }
                    }
                }
            }
        };
        crate::segmentation::evolve(2 * m, fitness, cfg.pop, cfg.gens, seed)
    };
    if let Some(e) = eval_error {
        return Err(e);
    }
    let ea = match result {
        Ok(r) => r,
        Err(SegmentationError::InfeasibleDomain) => return Ok(None),
        Err(e) => return Err(e.into()),
    };

    let keep = pareto_indices(&observed);
    let mut frontier = Vec::with_capacity(keep.len());
    let mut best_score = f64::INFINITY;
    for &i in &keep {
        let entries = decode(&encodings[i]).expect("feasible encoding decodes");
        let s = score_point(observed[i].0, observed[i].1, wobj, refs);
        best_score = best_score.min(s);
        frontier.push(WindowCandidate {
            latency: observed[i].0,
            energy: observed[i].1,
            entries,
            encoding: encodings[i].clone(),
        });
    }
    debug_assert!((best_score - ea.best_score).abs() <= 1e-12 * best_score.abs().max(1.0));
    Ok(Some(WindowOutcome {
        frontier,
        evaluated: ea.evaluations,
    }))
}

// ---------------------------------------------------------------------------
// Top level
// ---------------------------------------------------------------------------

/// Run the full hierarchical search.
pub fn search(
    sc: &Scenario,
    mcm: &McmSpec,
    objective: Objective,
    cfg: &SearchConfig,
    provider: &dyn CostProvider,
) -> Result<SearchResult, SearchError> {
    let start = Instant::now();
    let g = build_topology(mcm);
    let wobj = cfg.window_objective.unwrap_or(objective);

    // Weighted objectives normalize against the standalone baseline.
    let refs = match (&objective, &cfg.window_objective) {
        (Objective::Weighted { .. }, _) | (_, Some(Objective::Weighted { .. })) => {
            let (_, rep) = standalone_schedule(sc, mcm, &g, provider)?;
            Some((rep.latency, rep.energy))
        }
        _ => None,
    };

    let expected_lat = expected_metric_table(sc, mcm, Metric::Latency, provider)?;
    let expected_obj = expected_metric_table(sc, mcm, objective.provisioning_metric(), provider)?;
    let horizon = time_horizon(&expected_lat);
    let plan = make_windows(horizon, cfg.n_splits);
    let assignment: LayerAssignment = match cfg.packing {
        PackingMode::Greedy => greedy_pack(sc, &plan, &expected_lat),
        PackingMode::Uniform => uniform_pack(sc, &plan),
    };

    let n_chiplets = mcm.num_chiplets();
    let mut prev_chiplet: BTreeMap<usize, usize> = BTreeMap::new();
    let mut done: Vec<usize> = vec![0; sc.models.len()];
    let mut evaluated = 0u64;
    // Per processed window: the Pareto candidates and the best index.
    let mut window_frontiers: Vec<(usize, Vec<WindowCandidate>, usize)> = Vec::new();

    for w in 0..plan.num_windows() {
        if assignment.is_window_empty(w) {
            continue;
        }
        let active_ids = assignment.active_models(w);
        if active_ids.len() > n_chiplets {
            return Err(SearchError::Infeasible(format!(
                "window {w}: {} active models exceed {} chiplets",
                active_ids.len(),
                n_chiplets
            )));
        }
        let actives: Vec<ActiveModel> = active_ids
            .iter()
            .map(|&m| {
                let run = assignment.run(w, m);
                ActiveModel {
                    model: m,
                    name: &sc.models[m].name,
                    run,
                    prev_chiplet: prev_chiplet.get(&m).copied(),
                    completes: run.1 == sc.models[m].layers.len(),
                }
            })
            .collect();

        // Provision candidates for this window.
        let mut provisions: Vec<Provision> = match cfg.prov {
            ProvMode::Uniform => {
                let expected: Vec<(usize, f64)> = actives
                    .iter()
                    .map(|am| {
                        let (s, e) = am.run;
                        (am.model, expected_obj[am.model][s..e].iter().sum())
                    })
                    .collect();
                let p = provision_uniform(&expected, n_chiplets)?;
                // Nodes beyond a model's layer count cannot carry segments;
                // fold them back.
                let runs: Vec<usize> = actives.iter().map(|am| am.run.1 - am.run.0).collect();
                vec![cap_to_run_lengths(&p, &runs)]
            }
            ProvMode::Exhaustive => {
                provision_exhaustive(&active_ids, n_chiplets, cfg.allow_idle)?
            }
        };
        if let Some(cap) = cfg.node_cap {
            let counts: Vec<usize> = actives.iter().map(|am| am.run.1 - am.run.0).collect();
            let mut seen = std::collections::BTreeSet::new();
            provisions = provisions
                .iter()
                .map(|p| {
                    crate::segmentation::apply_node_cap(p, cap, &counts, cfg.disproportion_factor)
                })
                .filter(|p| seen.insert(p.counts.clone()))
                .collect();
        }

        // Search each provision; keep the combined frontier.
        let mut combined: Vec<WindowCandidate> = Vec::new();
        for (p_idx, provision) in provisions.iter().enumerate() {
            let outcome = match cfg.mode {
                SearchMode::Exhaustive => window_exhaustive(
                    sc, mcm, &g, provider, &actives, provision, cfg, &wobj, refs, w,
                )?,
                SearchMode::Evolutionary => {
                    let mut out = None;
                    for retry in 0..3u64 {
                        let seed = derive_seed(cfg.seed.wrapping_add(retry), w, p_idx);
                        out = window_evolutionary(
                            sc, mcm, &g, provider, &actives, provision, cfg, &wobj, refs, w,
                            seed,
                        )?;
                        if out.is_some() {
                            break;
                        }
                    }
                    out
                }
            };
            if let Some(o) = outcome {
                evaluated += o.evaluated;
                combined.extend(o.frontier);
            }
        }
        if combined.is_empty() {
            return Err(SearchError::Infeasible(format!(
                "window {w}: no feasible mapping for any provision"
            )));
        }
        let costs: Vec<(f64, f64)> = combined.iter().map(|c| (c.latency, c.energy)).collect();
        let keep = pareto_indices(&costs);
        let frontier: Vec<WindowCandidate> = keep.iter().map(|&i| combined[i].clone()).collect();
        let best = frontier
            .iter()
            .enumerate()
            .min_by(|a, b| {
                score_point(a.1.latency, a.1.energy, &wobj, refs)
                    .total_cmp(&score_point(b.1.latency, b.1.energy, &wobj, refs))
            })
            .map(|(i, _)| i)
            .unwrap();

        // Advance the flow state with the chosen placements.
        for e in &frontier[best].entries {
            done[e.model] += e.segments.iter().map(|&(s, en)| en - s).sum::<usize>();
            if let Some(&last) = e.chiplets.last() {
                prev_chiplet.insert(e.model, last);
            }
        }
        window_frontiers.push((w, frontier, best));
    }
    debug_assert!(done
        .iter()
        .zip(&sc.models)
        .all(|(&d, m)| d == m.layers.len()));

    // Compose per-window frontiers into full-schedule candidates. The pool
    // records the final merge's raw sums; `comps` carries the running
    // frontier forward.
    let mut comps: Vec<(f64, f64, Vec<usize>)> = Vec::new();
    let mut pool: Vec<(f64, f64, Vec<usize>)> = Vec::new();
    for (step, (_w, frontier, _)) in window_frontiers.iter().enumerate() {
        if step == 0 {
            comps = frontier
                .iter()
                .enumerate()
                .map(|(i, c)| (c.latency, c.energy, vec![i]))
                .collect();
        } else {
            let mut next = Vec::with_capacity(comps.len() * frontier.len());
            for c in &comps {
                for (i, f) in frontier.iter().enumerate() {
                    let mut refs_v = c.2.clone();
                    refs_v.push(i);
                    next.push((c.0 + f.latency, c.1 + f.energy, refs_v));
                }
            }
            comps = next;
        }
        pool = comps.clone();
        let costs: Vec<(f64, f64)> = comps.iter().map(|c| (c.0, c.1)).collect();
        let keep = pareto_indices(&costs);
        comps = keep.into_iter().map(|i| comps[i].clone()).collect();
        // Bound intermediate growth deterministically.
        const COMP_CAP: usize = 4096;
        if comps.len() > COMP_CAP {
            let stride = comps.len() as f64 / COMP_CAP as f64;
            comps = (0..COMP_CAP)
                .map(|i| comps[(i as f64 * stride) as usize].clone())
                .collect();
        }
    }

    let points: Vec<ParetoPoint> = pool
        .iter()
        .enumerate()
        .map(|(i, p)| ParetoPoint {
            latency: p.0,
            energy: p.1,
            schedule_id: format!("s{i:05}"),
        })
        .collect();
    let frontier_idx = pareto_indices(&pool.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>());
    let frontier: Vec<ParetoPoint> = frontier_idx.iter().map(|&i| points[i].clone()).collect();

    // Best full candidate under the global objective.
    let best_comp = pool
        .iter()
        .enumerate()
        .min_by(|a, b| {
            score_point(a.1 .0, a.1 .1, &objective, refs)
                .total_cmp(&score_point(b.1 .0, b.1 .1, &objective, refs))
                .then(a.0.cmp(&b.0))
        })
        .map(|(_, c)| c)
        .expect("at least one composition");

    let mut windows = Vec::with_capacity(window_frontiers.len());
    let mut provenance = Vec::with_capacity(window_frontiers.len());
    for (step, (w, frontier_cands, _)) in window_frontiers.iter().enumerate() {
        let cand = &frontier_cands[best_comp.2[step]];
        windows.push(WindowSchedule {
            window: *w,
            entries: cand.entries.clone(),
        });
        provenance.push(cand.encoding.clone());
    }
    let best = FullSchedule {
        scenario: sc.name.clone(),
        plan,
        windows,
        provenance,
    };
    let report = scenario_cost(&best, sc, mcm, &g, provider)?;

    Ok(SearchResult {
        best,
        report,
        frontier,
        points,
        evaluated,
        wall_ms: start.elapsed().as_millis(),
    })
}

fn cap_to_run_lengths(p: &Provision, run_lengths: &[usize]) -> Provision {
    let counts: Vec<usize> = p
        .counts
        .iter()
        .zip(run_lengths)
        .map(|(&(_, n), &len)| n.min(len.max(1)))
        .collect();
    Provision {
        counts: p.counts.iter().map(|&(m, _)| m).zip(counts).collect(),
        total: p.total,
    }
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    /// One chiplet per model, a single unsplit segment, no pipelining.
    Standalone,
    /// The full search on the same package homogenized to one dataflow.
    SimbaPipelined,
}

fn standalone_schedule(
    sc: &Scenario,
    mcm: &McmSpec,
    g: &NopGraph,
    provider: &dyn CostProvider,
) -> Result<(FullSchedule, CostReport), SearchError> {
    let n = mcm.num_chiplets();
    if sc.models.len() > n {
        return Err(SearchError::Infeasible(format!(
            "standalone baseline needs one chiplet per model ({} models, {} chiplets)",
            sc.models.len(),
            n
        )));
    }
    // Portal chiplets first: models sit at the memory interface, so their
    // off-chip traffic takes no on-package hops.
    let mut order: Vec<usize> = mcm.portals.clone();
    for c in 0..n {
        if !order.contains(&c) {
            order.push(c);
        }
    }
    let entries: Vec<ModelWindowSchedule> = sc
        .models
        .iter()
        .enumerate()
        .map(|(m, model)| ModelWindowSchedule {
            model: m,
            model_name: model.name.clone(),
            segments: vec![(0, model.layers.len())],
            chiplets: vec![order[m]],
        })
        .collect();
    let full = FullSchedule {
        scenario: sc.name.clone(),
        plan: make_windows(0.0, 0),
        windows: vec![WindowSchedule { window: 0, entries }],
        provenance: vec![SegEncoding {
            entries: vec![0; 2 * sc.models.len()],
        }],
    };
    let report = scenario_cost(&full, sc, mcm, g, provider)?;
    Ok((full, report))
}

/// Construct a reference schedule: `Standalone` directly, `SimbaPipelined`
/// via the full search on a homogenized copy of the package (all chiplets
/// take chiplet 0's dataflow).
pub fn baseline(
    sc: &Scenario,
    mcm: &McmSpec,
    kind: BaselineKind,
    objective: Objective,
    cfg: &SearchConfig,
    provider: &dyn CostProvider,
) -> Result<(FullSchedule, CostReport), SearchError> {
    match kind {
        BaselineKind::Standalone => {
            let g = build_topology(mcm);
            standalone_schedule(sc, mcm, &g, provider)
        }
        BaselineKind::SimbaPipelined => {
            let mut homo = mcm.clone();
            let df = homo.chiplets[0].dataflow.clone();
            for c in &mut homo.chiplets {
                c.dataflow = df.clone();
            }
            let r = search(sc, &homo, objective, cfg, provider)?;
            Ok((r.best, r.report))
        }
    }
}
