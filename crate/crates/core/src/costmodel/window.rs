//! Costing of window schedules and assembled full schedules.
//!
//! Accounting conventions: a segment's input activation and weights are its
//! leading transfers; hand-offs between consecutive segments are charged to
//! the producer; a model's first-ever segment loads from memory while later
//! windows receive the activation on-package from the previous window's
//! final chiplet; final model outputs store back to memory. Weights always
//! come from memory and are loaded once per segment per window.

use super::{
    comm_energy, mini_batch, pipeline_latency, segment_latency_scaled, window_latency,
    CommParams, CostError, CostProvider, CostReport, Route, SegmentRoutes, SegmentView,
};
use crate::hardware::{hop_count, memory_portal, route_nodes, McmSpec, NopGraph};
use crate::schedtree::FullSchedule;
use crate::workload::{LayerParams, Scenario};
use std::collections::BTreeMap;

/// One model's placement inside a window, ready for costing.
#[derive(Debug, Clone)]
pub struct ModelWindowJob<'a> {
    pub model: usize,
    pub model_name: &'a str,
    /// The model's full layer list (segments index into it).
    pub layers: &'a [LayerParams],
    pub segments: &'a [(usize, usize)],
    pub chiplets: &'a [usize],
    /// Chiplet that produced this model's pending activation in an earlier
    /// window; None for the model's first layers.
    pub prev_chiplet: Option<usize>,
    /// True when the model's last layer falls in this window.
    pub completes: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowCostOut {
    pub latency: f64,
    pub energy: f64,
    /// (model index, pipeline latency) per job, in job order.
    pub per_model: Vec<(usize, f64)>,
}

struct Transfer {
    route: Route,
    /// Index into the per-(job, stage, slot) contention table.
    key: (usize, usize, usize),
}

fn onpackage_route(g: &NopGraph, src: usize, dst: usize) -> Result<Route, CostError> {
    if src == dst {
        Ok(Route::SameChiplet)
    } else {
        Ok(Route::OnPackage {
            src,
            dst,
            n_hops: hop_count(g, src, dst)?,
        })
    }
}

fn offchip_route(g: &NopGraph, mcm: &McmSpec, chiplet: usize) -> Result<Route, CostError> {
    let (portal, n_hops) = memory_portal(g, mcm, chiplet)?;
    Ok(Route::Offchip {
        chiplet,
        portal,
        n_hops,
    })
}

/// Evaluate one window: per-model pipelined latency (max over models) and
/// total energy over compute plus every transfer.
pub fn window_cost(
    jobs: &[ModelWindowJob],
    mcm: &McmSpec,
    g: &NopGraph,
    provider: &dyn CostProvider,
) -> Result<WindowCostOut, CostError> {
    let params = CommParams::from_mcm(mcm);

    // Routes per job and stage.
    let mut routes: Vec<Vec<SegmentRoutes>> = Vec::with_capacity(jobs.len());
    for job in jobs {
        let k = job.segments.len();
        debug_assert_eq!(k, job.chiplets.len());
        let mut job_routes = Vec::with_capacity(k);
        for s in 0..k {
            let c = job.chiplets[s];
            let act_in = if s == 0 {
                match job.prev_chiplet {
                    Some(p) => onpackage_route(g, p, c)?,
                    None => offchip_route(g, mcm, c)?,
                }
            } else {
                // Charged to the producing segment's output.
                Route::SameChiplet
            };
            let weights = offchip_route(g, mcm, c)?;
            let act_out = if s + 1 < k {
                onpackage_route(g, c, job.chiplets[s + 1])?
            } else if job.completes {
                offchip_route(g, mcm, c)?
            } else {
                // The next window's input pays for the hand-off.
                Route::SameChiplet
            };
            job_routes.push(SegmentRoutes {
                act_in,
                weights,
                act_out,
            });
        }
        routes.push(job_routes);
    }

    // Optional link contention: each on-package transfer's bandwidth term is
    // inflated by the occupancy of its most loaded link.
    let mut factors: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    if mcm.contention {
        let mut transfers: Vec<Transfer> = Vec::new();
        for (j, job_routes) in routes.iter().enumerate() {
            for (s, r) in job_routes.iter().enumerate() {
                for (slot, route) in [(0, &r.act_in), (1, &r.weights), (2, &r.act_out)] {
                    if let Route::OnPackage { .. } = route {
                        transfers.push(Transfer {
                            route: *route,
                            key: (j, s, slot),
                        });
                    }
                }
            }
        }
        let mut link_load: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let links_of = |route: &Route| -> Result<Vec<(usize, usize)>, CostError> {
            let (src, dst) = match *route {
                Route::OnPackage { src, dst, .. } => (src, dst),
                _ => unreachable!(),
            };
            let nodes = route_nodes(g, src, dst)?;
            Ok(nodes
                .windows(2)
                .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
                .collect())
        };
        for t in &transfers {
            for link in links_of(&t.route)? {
                *link_load.entry(link).or_insert(0) += 1;
            }
        }
        for t in &transfers {
            let worst = links_of(&t.route)?
                .into_iter()
                .map(|l| link_load[&l])
                .max()
                .unwrap_or(1);
            factors.insert(t.key, worst as f64);
        }
    }
    let factor = |key: (usize, usize, usize)| -> f64 { factors.get(&key).copied().unwrap_or(1.0) };

    let mut per_model = Vec::with_capacity(jobs.len());
    let mut energy = 0.0f64;
    for (j, job) in jobs.iter().enumerate() {
        let b = job
            .segments
            .iter()
            .flat_map(|&(s, e)| job.layers[s..e].iter())
            .map(|l| l.batch_size)
            .max()
            .ok_or(CostError::Empty)?;
        // Mini-batch: the tightest capacity along the chain.
        let mut b_prime = b;
        for (&(s, e), &c) in job.segments.iter().zip(job.chiplets) {
            let chiplet = &mcm.chiplets[c];
            b_prime = b_prime.min(mini_batch(&job.layers[s..e], b, chiplet)?);
        }
        // Stage latencies at b'.
        let mut stages = Vec::with_capacity(job.segments.len());
        for (s, (&(start, end), &c)) in job.segments.iter().zip(job.chiplets).enumerate() {
            let seg = SegmentView {
                model: job.model_name,
                first_index: start,
                layers: &job.layers[start..end],
            };
            let lat = segment_latency_scaled(
                &seg,
                &mcm.chiplets[c],
                b_prime,
                &routes[j][s],
                provider,
                &params,
                [factor((j, s, 0)), factor((j, s, 1)), factor((j, s, 2))],
            )?;
            stages.push(lat);
        }
        per_model.push((job.model, pipeline_latency(&stages, b, b_prime)?));

        // Energy: compute at the full batch, every transfer at full size,
        // weights once per segment.
        for (s, (&(start, end), &c)) in job.segments.iter().zip(job.chiplets).enumerate() {
            let chiplet = &mcm.chiplets[c];
            for (off, l) in job.layers[start..end].iter().enumerate() {
                energy += provider
                    .cost(job.model_name, start + off, l, chiplet, b)?
                    .energy;
            }
            let seg = SegmentView {
                model: job.model_name,
                first_index: start,
                layers: &job.layers[start..end],
            };
            let r = &routes[j][s];
            energy += comm_energy(seg.input_bytes(b), &r.act_in, &params);
            energy += comm_energy(seg.weight_bytes(), &r.weights, &params);
            energy += comm_energy(seg.output_bytes(b)?, &r.act_out, &params);
        }
    }

    let latency = window_latency(
        &per_model.iter().map(|&(_, l)| l).collect::<Vec<f64>>(),
    );
    Ok(WindowCostOut {
        latency,
        energy,
        per_model,
    })
}

/// Per-window evaluations of a full schedule, in window order, with
/// cross-window activation routes taken from the schedule's own placements.
pub fn scenario_windows(
    full: &FullSchedule,
    sc: &Scenario,
    mcm: &McmSpec,
    g: &NopGraph,
    provider: &dyn CostProvider,
) -> Result<Vec<(usize, WindowCostOut)>, CostError> {
    let mut prev_chiplet: BTreeMap<usize, usize> = BTreeMap::new();
    let mut done: Vec<usize> = vec![0; sc.models.len()];
    let mut out = Vec::with_capacity(full.windows.len());
    for w in &full.windows {
        if w.entries.is_empty() {
            continue; // trivial window: contributes nothing
        }
        let jobs: Vec<ModelWindowJob> = w
            .entries
            .iter()
            .map(|e| {
                let model = &sc.models[e.model];
                let assigned: usize = e.segments.iter().map(|&(s, en)| en - s).sum();
                ModelWindowJob {
                    model: e.model,
                    model_name: &model.name,
                    layers: &model.layers,
                    segments: &e.segments,
                    chiplets: &e.chiplets,
                    prev_chiplet: prev_chiplet.get(&e.model).copied(),
                    completes: done[e.model] + assigned == model.layers.len(),
                }
            })
            .collect();
        out.push((w.window, window_cost(&jobs, mcm, g, provider)?));
        for e in &w.entries {
            done[e.model] += e.segments.iter().map(|&(s, en)| en - s).sum::<usize>();
            if let Some(&last) = e.chiplets.last() {
                prev_chiplet.insert(e.model, last);
            }
        }
    }
    Ok(out)
}

/// Evaluate a full schedule into a cost report.
pub fn scenario_cost(
    full: &FullSchedule,
    sc: &Scenario,
    mcm: &McmSpec,
    g: &NopGraph,
    provider: &dyn CostProvider,
) -> Result<CostReport, CostError> {
    let windows = scenario_windows(full, sc, mcm, g, provider)?;
    let mut latency = 0.0f64;
    let mut energy = 0.0f64;
    let mut per_window = Vec::with_capacity(windows.len());
    let mut per_model: Vec<(String, f64)> =
        sc.models.iter().map(|m| (m.name.clone(), 0.0)).collect();
    for (w, out) in &windows {
        for (m, lat) in &out.per_model {
            per_model[*m].1 = latency + lat;
        }
        latency += out.latency;
        energy += out.energy;
        per_window.push((*w, out.latency, out.energy));
    }
    Ok(CostReport {
        latency,
        energy,
        edp: latency * energy,
        per_window,
        per_model,
    })
}
