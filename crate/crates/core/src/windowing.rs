//! Time-window planning and layer-to-window packing.
//!
//! The horizon (the worst-case expected latency over the models) is cut into
//! periodic windows; layers are then packed per model either greedily
//! (first-fit against the remaining slack, deferring any layer that would
//! straddle a boundary) or uniformly (near-equal contiguous runs, the
//! ablation baseline). The final window is unbounded, so every layer lands
//! somewhere.

use crate::workload::Scenario;
use serde::{Deserialize, Serialize};

/// Cumulative boundary marks. `boundaries[k]` closes window `k`; window
/// `n_splits` (the last) has no upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub boundaries: Vec<f64>,
    pub n_splits: usize,
}

impl WindowPlan {
    pub fn num_windows(&self) -> usize {
        self.n_splits + 1
    }
}

/// Per-(window, model) contiguous layer runs; `runs[w][m]` is the
/// half-open index range of model `m`'s layers in window `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerAssignment {
    pub runs: Vec<Vec<(usize, usize)>>,
}

impl LayerAssignment {
    pub fn num_windows(&self) -> usize {
        self.runs.len()
    }

    pub fn run(&self, window: usize, model: usize) -> (usize, usize) {
        self.runs[window][model]
    }

    /// Models with at least one layer in the window, ascending.
    pub fn active_models(&self, window: usize) -> Vec<usize> {
        self.runs[window]
            .iter()
            .enumerate()
            .filter(|(_, &(s, e))| e > s)
            .map(|(m, _)| m)
            .collect()
    }

    pub fn is_window_empty(&self, window: usize) -> bool {
        self.runs[window].iter().all(|&(s, e)| s == e)
    }

    /// Check the partition property: per model, the runs are contiguous,
    /// ordered by window, and cover `0..total` exactly once.
    pub fn check_partition(&self, layer_counts: &[usize]) -> bool {
        for (m, &total) in layer_counts.iter().enumerate() {
            let mut next = 0usize;
            for w in 0..self.runs.len() {
                let (s, e) = self.runs[w][m];
                if s != next || e < s {
                    return false;
                }
                next = e;
            }
            if next != total {
                return false;
            }
        }
        true
    }
}

/// The worst-case expected model latency: the time horizon to partition.
/// `expected[m][l]` is the expected latency of model `m`'s layer `l`.
pub fn time_horizon(expected: &[Vec<f64>]) -> f64 {
    expected
        .iter()
        .map(|layers| layers.iter().sum::<f64>())
        .fold(0.0, f64::max)
}

/// Periodic boundaries at `k * horizon / (n_splits + 1)`, `k = 1..=n_splits`.
pub fn make_windows(horizon: f64, n_splits: usize) -> WindowPlan {
    let width = horizon / (n_splits + 1) as f64;
    WindowPlan {
        boundaries: (1..=n_splits).map(|k| k as f64 * width).collect(),
        n_splits,
    }
}

/// First-fit greedy packing.
///
/// Walks each model's layers in stored (topological) order, accumulating
/// expected latency against the current window's remaining slack. A layer
/// that does not fit closes the current run, snaps the used time to the
/// boundary, and retries in the next window; the final window accepts
/// everything. A deferred layer can skip several windows, leaving them
/// empty for that model.
pub fn greedy_pack(sc: &Scenario, plan: &WindowPlan, expected: &[Vec<f64>]) -> LayerAssignment {
    let n_windows = plan.num_windows();
    let n_models = sc.models.len();
    let mut packed: Vec<Vec<Option<(usize, usize)>>> = vec![vec![None; n_models]; n_windows];
    for (m, model) in sc.models.iter().enumerate() {
        let mut win_idx = 0usize;
        let mut used = 0.0f64;
        let mut run_start = 0usize;
        for l in 0..model.layers.len() {
            let e_lat = expected[m][l];
            loop {
                let slack = if win_idx == plan.boundaries.len() {
                    None
                } else {
                    Some(plan.boundaries[win_idx] - used)
                };
                match slack {
                    None => {
                        used += e_lat;
                        break;
                    }
                    Some(s) if e_lat <= s => {
                        used += e_lat;
                        break;
                    }
                    Some(_) => {
                        packed[win_idx][m] = Some((run_start, l));
                        run_start = l;
                        used = plan.boundaries[win_idx];
                        win_idx += 1;
                    }
                }
            }
        }
        packed[win_idx][m] = Some((run_start, model.layers.len()));
    }
    // Normalize: unfilled windows carry an empty run anchored where the
    // previous run ended, so contiguity holds per model across all windows.
    let mut runs = vec![vec![(0usize, 0usize); n_models]; n_windows];
    for m in 0..n_models {
        let mut next = 0usize;
        for w in 0..n_windows {
            match packed[w][m] {
                Some((s, e)) => {
                    debug_assert_eq!(s, next);
                    runs[w][m] = (s, e);
                    next = e;
                }
                None => runs[w][m] = (next, next),
            }
        }
    }
    LayerAssignment { runs }
}

/// Uniform packing baseline: each model's layers split into `n_splits + 1`
/// near-equal contiguous runs, earlier runs taking the remainder.
pub fn uniform_pack(sc: &Scenario, plan: &WindowPlan) -> LayerAssignment {
    let n_windows = plan.num_windows();
    let n_models = sc.models.len();
    let mut runs = vec![vec![(0usize, 0usize); n_models]; n_windows];
    for (m, model) in sc.models.iter().enumerate() {
        let total = model.layers.len();
        let q = total / n_windows;
        let r = total % n_windows;
        let mut start = 0usize;
        for (w, window_runs) in runs.iter_mut().enumerate() {
            let len = q + usize::from(w < r);
            window_runs[m] = (start, start + len);
            start += len;
        }
    }
    LayerAssignment { runs }
}
