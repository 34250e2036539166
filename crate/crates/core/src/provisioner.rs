//! Per-window chiplet provisioning: how many nodes each active model gets,
//! either by the proportional rule or by exhaustive enumeration.

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ProvisionError {
    #[error("{models} models exceed {chiplets} chiplets in a window")]
    TooManyModels { models: usize, chiplets: usize },
    #[error("no active models in the window")]
    Empty,
}

/// Node counts per active model in one window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provision {
    /// (model index, node count), ascending by model index; counts >= 1.
    pub counts: Vec<(usize, usize)>,
    /// Total chiplets on the package.
    pub total: usize,
}

impl Provision {
    pub fn nodes_for(&self, model: usize) -> Option<usize> {
        self.counts
            .iter()
            .find(|&&(m, _)| m == model)
            .map(|&(_, n)| n)
    }

    pub fn sum(&self) -> usize {
        self.counts.iter().map(|&(_, n)| n).sum()
    }
}

/// Proportional provisioning: `N_i = round(E_i / sum(E_j) * |C|)`, then a
/// repair pass that lifts zeros to one and reconciles the total back to
/// `|C|` by largest-remainder adjustment, breaking ties toward the lower
/// model index.
pub fn provision_uniform(
    expected: &[(usize, f64)],
    n_chiplets: usize,
) -> Result<Provision, ProvisionError> {
    if expected.is_empty() {
        return Err(ProvisionError::Empty);
    }
    if expected.len() > n_chiplets {
        return Err(ProvisionError::TooManyModels {
            models: expected.len(),
            chiplets: n_chiplets,
        });
    }
    let sum: f64 = expected.iter().map(|&(_, e)| e).sum();
    let shares: Vec<f64> = expected
        .iter()
        .map(|&(_, e)| {
            if sum > 0.0 {
                e / sum * n_chiplets as f64
            } else {
                n_chiplets as f64 / expected.len() as f64
            }
        })
        .collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| s.round().max(1.0) as usize).collect();
    // Reconcile to exactly |C| nodes: move single nodes toward the model
    // with the largest under-allocation (or away from the largest
    // over-allocation), never dropping a model below one node.
    loop {
        let total: usize = counts.iter().sum();
        if total == n_chiplets {
            break;
        }
        if total < n_chiplets {
            let i = argmax_by(&counts, &shares, |c, s| s - c as f64);
            counts[i] += 1;
        } else {
            let i = argmax_by_filtered(&counts, &shares, |c, s| c as f64 - s, |c| c > 1);
            counts[i] -= 1;
        }
    }
    Ok(Provision {
        counts: expected
            .iter()
            .map(|&(m, _)| m)
            .zip(counts)
            .collect(),
        total: n_chiplets,
    })
}

fn argmax_by(counts: &[usize], shares: &[f64], key: impl Fn(usize, f64) -> f64) -> usize {
    let mut best = 0usize;
    let mut best_key = f64::NEG_INFINITY;
    for (i, (&c, &s)) in counts.iter().zip(shares).enumerate() {
        let k = key(c, s);
        if k > best_key {
            best_key = k;
            best = i;
        }
    }
    best
}

fn argmax_by_filtered(
    counts: &[usize],
    shares: &[f64],
    key: impl Fn(usize, f64) -> f64,
    keep: impl Fn(usize) -> bool,
) -> usize {
    let mut best = usize::MAX;
    let mut best_key = f64::NEG_INFINITY;
    for (i, (&c, &s)) in counts.iter().zip(shares).enumerate() {
        if !keep(c) {
            continue;
        }
        let k = key(c, s);
        if k > best_key {
            best_key = k;
            best = i;
        }
    }
    debug_assert_ne!(best, usize::MAX, "repair needs a donor above one node");
    best
}

/// All node distributions for the window, in lexicographic order.
///
/// Without `allow_idle`: compositions of `|C|` into one part per model,
/// each at least 1. With `allow_idle`: every assignment with parts >= 1 and
/// a total of at most `|C|` (idle chiplets permitted).
pub fn provision_exhaustive(
    model_indices: &[usize],
    n_chiplets: usize,
    allow_idle: bool,
) -> Result<Vec<Provision>, ProvisionError> {
    let m = model_indices.len();
    if m == 0 {
        return Err(ProvisionError::Empty);
    }
    if m > n_chiplets {
        return Err(ProvisionError::TooManyModels {
            models: m,
            chiplets: n_chiplets,
        });
    }
    let mut out = Vec::new();
    let mut parts = vec![1usize; m];
    loop {
        let total: usize = parts.iter().sum();
        if total <= n_chiplets && (allow_idle || total == n_chiplets) {
            out.push(Provision {
                counts: model_indices.iter().copied().zip(parts.iter().copied()).collect(),
                total: n_chiplets,
            });
        }
        // Odometer increment over parts, each in 1..=n_chiplets, skipping
        // states whose minimal completion already exceeds the budget.
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            parts[i] += 1;
            let fixed: usize = parts[..=i].iter().sum();
            if fixed + (m - i - 1) <= n_chiplets {
                for p in parts.iter_mut().skip(i + 1) {
                    *p = 1;
                }
                break;
            }
            parts[i] = 1;
        }
    }
}

/// `binom(n, k)` in u128, saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}
