//! Layer segmentation per window: candidate enumeration, the top-k and
//! node-cap pruning heuristics, and the seeded evolutionary search engine.

use crate::provisioner::{binomial, Provision};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, thiserror::Error)]
pub enum SegmentationError {
    #[error("no feasible encoding in the search domain")]
    InfeasibleDomain,
    #[error("population and generations must be at least 1")]
    BadEaConfig,
}

/// A segmentation of one model's window run: ascending split offsets,
/// run-relative. A split at offset `p` cuts between layers `p` and `p + 1`;
/// the implied segments are the maximal runs between splits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    pub splits: Vec<usize>,
}

impl Segmentation {
    pub fn unsplit() -> Segmentation {
        Segmentation { splits: Vec::new() }
    }

    pub fn num_segments(&self) -> usize {
        self.splits.len() + 1
    }

    /// Global (start, end) spans over the window run `[run_start, run_end)`.
    pub fn spans(&self, run_start: usize, run_end: usize) -> Vec<(usize, usize)> {
        let mut spans = Vec::with_capacity(self.splits.len() + 1);
        let mut s = run_start;
        for &p in &self.splits {
            let cut = run_start + p + 1;
            spans.push((s, cut));
            s = cut;
        }
        spans.push((s, run_end));
        spans
    }
}

/// Number of segmentation candidates for a run of `run_len` layers on at
/// most `n_i` nodes: `sum_{s=0}^{n_i-1} binom(run_len - 1, s)`.
pub fn segmentation_count(run_len: usize, n_i: usize) -> u128 {
    let positions = run_len.saturating_sub(1) as u64;
    let max_splits = (n_i.saturating_sub(1) as u64).min(positions);
    (0..=max_splits).map(|s| binomial(positions, s)).sum()
}

/// All split-point subsets of size `0..n_i` over the `run_len - 1` candidate
/// positions, smallest size first, lexicographic within a size.
pub fn enumerate_segmentations(run_len: usize, n_i: usize) -> SegmentationIter {
    let positions = run_len.saturating_sub(1);
    SegmentationIter {
        positions,
        max_splits: n_i.saturating_sub(1).min(positions),
        size: 0,
        current: Vec::new(),
        done: false,
    }
}

pub struct SegmentationIter {
    positions: usize,
    max_splits: usize,
    size: usize,
    current: Vec<usize>,
    done: bool,
}

impl Iterator for SegmentationIter {
    type Item = Segmentation;

    fn next(&mut self) -> Option<Segmentation> {
        if self.done {
            return None;
        }
        if self.current.len() != self.size {
            // First subset of this size: 0, 1, ..., size-1.
            self.current = (0..self.size).collect();
        }
        let out = Segmentation {
            splits: self.current.clone(),
        };
        // Advance to the next lexicographic subset of the same size.
        let k = self.size;
        let n = self.positions;
        let mut i = k;
        loop {
            if i == 0 {
                // Exhausted this size; move to the next.
                self.size += 1;
                self.current.clear();
                if self.size > self.max_splits {
                    self.done = true;
                }
                break;
            }
            i -= 1;
            if self.current[i] < n - (k - i) {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// One candidate that survived the top-k cut, with its enumeration index.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub index: u64,
    pub seg: Segmentation,
    pub score: f64,
}

/// Evaluate candidates independently and keep the `k` best, ascending score,
/// ties broken by enumeration order.
pub fn topk_per_model<I, F>(cands: I, k: usize, mut eval: F) -> Vec<RankedCandidate>
where
    I: Iterator<Item = Segmentation>,
    F: FnMut(&Segmentation) -> f64,
{
    let mut scored: Vec<RankedCandidate> = cands
        .enumerate()
        .map(|(i, seg)| {
            let score = eval(&seg);
            RankedCandidate {
                index: i as u64,
                seg,
                score,
            }
        })
        .collect();
    scored.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.index.cmp(&b.index)));
    scored.truncate(k.max(1));
    scored
}

/// Node-allocation constraint: models whose layer count exceeds
/// `disproportion_factor` times the mean layer count of the *other* models
/// are clamped to `cap` nodes; the freed nodes are redistributed to the
/// unclamped models by largest remainder over their original shares (ties
/// toward the lower model index). If every model is clamped the freed nodes
/// stay idle.
pub fn apply_node_cap(
    prov: &Provision,
    cap: usize,
    layer_counts: &[usize],
    disproportion_factor: f64,
) -> Provision {
    assert_eq!(prov.counts.len(), layer_counts.len());
    let cap = cap.max(1);
    let m = prov.counts.len();
    // A model is disproportionate against the mean layer count of the others.
    let capped: Vec<bool> = (0..m)
        .map(|i| {
            if m == 1 {
                return false;
            }
            let others: f64 = layer_counts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &c)| c as f64)
                .sum::<f64>()
                / (m - 1) as f64;
            (layer_counts[i] as f64) > others * disproportion_factor
        })
        .collect();
    if !(0..m).any(|i| capped[i] && prov.counts[i].1 > cap) {
        return prov.clone();
    }
    let mut counts: Vec<usize> = prov.counts.iter().map(|&(_, n)| n).collect();
    let mut freed = 0usize;
    for i in 0..m {
        if capped[i] && counts[i] > cap {
            freed += counts[i] - cap;
            counts[i] = cap;
        }
    }
    let uncapped: Vec<usize> = (0..m).filter(|&i| !capped[i]).collect();
    if !uncapped.is_empty() {
        // Re-share the enlarged pool among the unclamped models in
        // proportion to their original counts, largest remainder first.
        let base: f64 = uncapped.iter().map(|&i| counts[i] as f64).sum();
        let pool: usize = freed + uncapped.iter().map(|&i| counts[i]).sum::<usize>();
        let shares: Vec<f64> = uncapped
            .iter()
            .map(|&i| counts[i] as f64 / base * pool as f64)
            .collect();
        let mut granted: Vec<usize> = shares.iter().map(|s| (s.floor() as usize).max(1)).collect();
        while granted.iter().sum::<usize>() < pool {
            let mut best = 0usize;
            let mut best_rem = f64::NEG_INFINITY;
            for (j, (&g, &s)) in granted.iter().zip(&shares).enumerate() {
                let rem = s - g as f64;
                if rem > best_rem {
                    best_rem = rem;
                    best = j;
                }
            }
            granted[best] += 1;
        }
        while granted.iter().sum::<usize>() > pool {
            let mut best = usize::MAX;
            let mut best_over = f64::NEG_INFINITY;
            for (j, (&g, &s)) in granted.iter().zip(&shares).enumerate() {
                if g <= 1 {
                    continue;
                }
                let over = g as f64 - s;
                if over > best_over {
                    best_over = over;
                    best = j;
                }
            }
            granted[best] -= 1;
        }
        for (j, &i) in uncapped.iter().enumerate() {
            counts[i] = granted[j];
        }
    }
    Provision {
        counts: prov
            .counts
            .iter()
            .map(|&(mi, _)| mi)
            .zip(counts)
            .collect(),
        total: prov.total,
    }
}

/// The per-window scheduling encoding: for each active model, one
/// segmentation gene followed by one chiplet-path gene (a `2 * |M|` tuple).
/// In exhaustive mode the genes are enumeration indices; in evolutionary
/// mode they seed the candidate decoder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SegEncoding {
    pub entries: Vec<u64>,
}

impl SegEncoding {
    pub fn num_models(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn seg_genes(&self) -> &[u64] {
        &self.entries[..self.num_models()]
    }

    pub fn path_genes(&self) -> &[u64] {
        &self.entries[self.num_models()..]
    }
}

/// Sample a segmentation uniformly over the candidate set, deterministic in
/// the gene: the split count is drawn proportionally to its candidate count
/// and the split set uniformly within that count.
pub fn sample_segmentation(run_len: usize, n_i: usize, gene: u64) -> Segmentation {
    let positions = run_len.saturating_sub(1);
    let max_splits = n_i.saturating_sub(1).min(positions);
    let mut rng = ChaCha8Rng::seed_from_u64(gene);
    let weights: Vec<f64> = (0..=max_splits)
        .map(|s| binomial(positions as u64, s as u64) as f64)
        .collect();
    let total: f64 = weights.iter().sum();
    let mut pick = rng.gen_range(0.0..total.max(f64::MIN_POSITIVE));
    let mut size = 0usize;
    for (s, &w) in weights.iter().enumerate() {
        if pick < w {
            size = s;
            break;
        }
        pick -= w;
        size = s;
    }
    // Floyd's algorithm for a uniform size-subset of 0..positions.
    let mut chosen = std::collections::BTreeSet::new();
    for j in (positions - size)..positions {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    Segmentation {
        splits: chosen.into_iter().collect(),
    }
}

/// Outcome of an evolutionary run.
#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub best: SegEncoding,
    pub best_score: f64,
    /// Best-ever score after initialization and after each generation.
    pub history: Vec<f64>,
    /// Distinct fitness evaluations performed (memoized hits excluded).
    pub evaluations: u64,
}

/// Generational evolutionary search over `2 * |M|`-gene encodings.
///
/// Uniform random initialization, tournament selection of size 2, one-point
/// crossover, per-gene mutation with probability `1 / (2 * |M|)`, elitism of
/// one, fitness memoization, and a best-ever result. Infeasible encodings
/// score `+inf`. Fully deterministic for a given seed.
pub fn evolve<F>(
    gene_count: usize,
    mut eval: F,
    pop: usize,
    gens: usize,
    seed: u64,
) -> Result<EvolveResult, SegmentationError>
where
    F: FnMut(&SegEncoding) -> f64,
{
    if pop == 0 || gene_count == 0 {
        return Err(SegmentationError::BadEaConfig);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut memo: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut evaluations = 0u64;
    let mut score_of = |enc: &SegEncoding, memo: &mut HashMap<Vec<u64>, f64>, evals: &mut u64| {
        if let Some(&s) = memo.get(&enc.entries) {
            return s;
        }
        let s = eval(enc);
        *evals += 1;
        memo.insert(enc.entries.clone(), s);
        s
    };

    let random_encoding = |rng: &mut ChaCha8Rng| SegEncoding {
        entries: (0..gene_count).map(|_| rng.gen::<u64>()).collect(),
    };

    let mut population: Vec<(SegEncoding, f64)> = (0..pop)
        .map(|_| {
            let e = random_encoding(&mut rng);
            let s = score_of(&e, &mut memo, &mut evaluations);
            (e, s)
        })
        .collect();

    let mut best = population
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .unwrap();
    let mut history = vec![best.1];

    for _gen in 0..gens {
        let mut next: Vec<(SegEncoding, f64)> = Vec::with_capacity(pop);
        next.push(best.clone()); // elitism of one
        while next.len() < pop {
            let parent_a = tournament(&population, &mut rng);
            let parent_b = tournament(&population, &mut rng);
            let mut child = crossover(parent_a, parent_b, &mut rng);
            mutate(&mut child, &mut rng);
            let s = score_of(&child, &mut memo, &mut evaluations);
            next.push((child, s));
        }
        population = next;
        if let Some(gen_best) = population.iter().min_by(|a, b| a.1.total_cmp(&b.1)) {
            if gen_best.1 < best.1 {
                best = gen_best.clone();
            }
        }
        history.push(best.1);
    }

    if !best.1.is_finite() {
        return Err(SegmentationError::InfeasibleDomain);
    }
    Ok(EvolveResult {
        best: best.0,
        best_score: best.1,
        history,
        evaluations,
    })
}

fn tournament<'a>(
    population: &'a [(SegEncoding, f64)],
    rng: &mut ChaCha8Rng,
) -> &'a SegEncoding {
    let a = rng.gen_range(0..population.len());
    let b = rng.gen_range(0..population.len());
    if population[a].1 <= population[b].1 {
        &population[a].0
    } else {
        &population[b].0
    }
}

fn crossover(a: &SegEncoding, b: &SegEncoding, rng: &mut ChaCha8Rng) -> SegEncoding {
    let n = a.entries.len();
    if n < 2 {
        return a.clone();
    }
    let point = rng.gen_range(1..n);
    let mut entries = Vec::with_capacity(n);
    entries.extend_from_slice(&a.entries[..point]);
    entries.extend_from_slice(&b.entries[point..]);
    SegEncoding { entries }
}

fn mutate(enc: &mut SegEncoding, rng: &mut ChaCha8Rng) {
    let p = 1.0 / enc.entries.len() as f64;
    for gene in &mut enc.entries {
        if rng.gen_bool(p) {
            *gene = rng.gen::<u64>();
        }
    }
}
