//! Multi-model workload scenarios: layer parameters, per-model dependency
//! graphs, and topological ordering.
//!
//! A scenario is a set of named models; each model is an ordered list of
//! layers plus a dependency edge list over layer indices. The stored layer
//! order must itself be a valid topological order of the dependency DAG,
//! which keeps downstream segmentation (contiguous runs) dependency-safe.

use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum WorkloadError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("model `{0}`: cyclic dependency")]
    Cycle(String),
    #[error("model `{model}`: layer order is not a topological order (edge {u} -> {v})")]
    NotTopological { model: String, u: usize, v: usize },
    #[error("duplicate model name `{0}`")]
    DuplicateModel(String),
    #[error("layer `{layer}`: kernel {k} larger than input {ip_h}x{ip_w}")]
    KernelTooLarge {
        layer: String,
        k: u64,
        ip_h: u64,
        ip_w: u64,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

/// Operator class of a layer.
///
/// Pooling, depthwise, and attention operators are expressed through the
/// same parameter tuple as conv/fc; see the schema notes in the README for
/// the reduction each kind applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    Conv,
    Fc,
    Depthwise,
    Pool,
    AttentionProj,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LayerKind::Conv => "conv",
            LayerKind::Fc => "fc",
            LayerKind::Depthwise => "depthwise",
            LayerKind::Pool => "pool",
            LayerKind::AttentionProj => "attention-proj",
        };
        f.write_str(s)
    }
}

fn one() -> u64 {
    1
}

/// Shape parameters of one layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerParams {
    pub name: String,
    pub kind: LayerKind,
    pub batch_size: u64,
    pub c_in: u64,
    pub c_out: u64,
    #[serde(default = "one")]
    pub ip_h: u64,
    #[serde(default = "one")]
    pub ip_w: u64,
    #[serde(default = "one")]
    pub k_size: u64,
    #[serde(default = "one")]
    pub stride: u64,
    #[serde(default = "one")]
    pub bytes_per_element: u64,
}

impl LayerParams {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let dims = [
            ("batch_size", self.batch_size),
            ("c_in", self.c_in),
            ("c_out", self.c_out),
            ("ip_h", self.ip_h),
            ("ip_w", self.ip_w),
            ("k_size", self.k_size),
            ("stride", self.stride),
            ("bytes_per_element", self.bytes_per_element),
        ];
        for (field, v) in dims {
            if v < 1 {
                return Err(WorkloadError::Schema(format!(
                    "layer `{}`: {} must be >= 1",
                    self.name, field
                )));
            }
        }
        if self.kind == LayerKind::Fc
            && (self.k_size != 1 || self.ip_h != 1 || self.ip_w != 1)
        {
            return Err(WorkloadError::Schema(format!(
                "layer `{}`: fc layers require k_size = 1 and ip_h = ip_w = 1",
                self.name
            )));
        }
        Ok(())
    }

    /// Output spatial extents under zero padding:
    /// `out = floor((ip - k) / stride) + 1`.
    pub fn out_dims(&self) -> Result<(u64, u64), WorkloadError> {
        if self.k_size > self.ip_h || self.k_size > self.ip_w {
            return Err(WorkloadError::KernelTooLarge {
                layer: self.name.clone(),
                k: self.k_size,
                ip_h: self.ip_h,
                ip_w: self.ip_w,
            });
        }
        let out_h = (self.ip_h - self.k_size) / self.stride + 1;
        let out_w = (self.ip_w - self.k_size) / self.stride + 1;
        Ok((out_h, out_w))
    }

    /// Multiply-accumulate count of the layer.
    ///
    /// conv / attention-proj: `batch * c_out * c_in * k^2 * out_h * out_w`
    /// (an attention projection is a 1x1-kernel GEMM applied per spatial
    /// position, so it reuses the conv formula);
    /// depthwise / pool: the same without the `c_in` factor;
    /// fc: `batch * c_out * c_in`.
    pub fn macs(&self) -> Result<u64, WorkloadError> {
        let m: u128 = match self.kind {
            LayerKind::Fc => {
                self.batch_size as u128 * self.c_out as u128 * self.c_in as u128
            }
            LayerKind::Conv | LayerKind::AttentionProj => {
                let (oh, ow) = self.out_dims()?;
                self.batch_size as u128
                    * self.c_out as u128
                    * self.c_in as u128
                    * (self.k_size as u128 * self.k_size as u128)
                    * oh as u128
                    * ow as u128
            }
            LayerKind::Depthwise | LayerKind::Pool => {
                let (oh, ow) = self.out_dims()?;
                self.batch_size as u128
                    * self.c_out as u128
                    * (self.k_size as u128 * self.k_size as u128)
                    * oh as u128
                    * ow as u128
            }
        };
        Ok(u64::try_from(m).unwrap_or(u64::MAX))
    }

    /// Per-sample input activation bytes.
    pub fn input_bytes_per_sample(&self) -> u64 {
        self.c_in * self.ip_h * self.ip_w * self.bytes_per_element
    }

    /// Per-sample output activation bytes.
    pub fn output_bytes_per_sample(&self) -> Result<u64, WorkloadError> {
        let (oh, ow) = self.out_dims()?;
        Ok(self.c_out * oh * ow * self.bytes_per_element)
    }

    /// Weight bytes (not batch-scaled). Pooling carries no weights.
    pub fn weight_bytes(&self) -> u64 {
        match self.kind {
            LayerKind::Pool => 0,
            LayerKind::Fc => self.c_in * self.c_out * self.bytes_per_element,
            LayerKind::Conv | LayerKind::AttentionProj => {
                self.c_out * self.c_in * self.k_size * self.k_size * self.bytes_per_element
            }
            LayerKind::Depthwise => {
                self.c_out * self.k_size * self.k_size * self.bytes_per_element
            }
        }
    }

    /// Copy of the layer with the batch dimension replaced (mini-batch costing).
    pub fn at_batch(&self, batch: u64) -> LayerParams {
        LayerParams {
            batch_size: batch,
            ..self.clone()
        }
    }
}

/// One model: topologically ordered layers plus dependency edges
/// (predecessor index -> successor index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub name: String,
    pub layers: Vec<LayerParams>,
    /// Omitted in input documents means a linear chain 0 -> 1 -> ... -> L-1.
    #[serde(default)]
    pub deps: Option<Vec<(usize, usize)>>,
}

impl Model {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Dependency edges, materializing the linear-chain default.
    pub fn dep_edges(&self) -> Vec<(usize, usize)> {
        match &self.deps {
            Some(d) => d.clone(),
            None => (1..self.layers.len()).map(|i| (i - 1, i)).collect(),
        }
    }

    /// Model batch size: the maximum batch over its layers.
    pub fn batch(&self) -> u64 {
        self.layers.iter().map(|l| l.batch_size).max().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        if self.layers.is_empty() {
            return Err(WorkloadError::Schema(format!(
                "model `{}` has no layers",
                self.name
            )));
        }
        for l in &self.layers {
            l.validate()?;
        }
        let n = self.layers.len();
        let edges = self.dep_edges();
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(WorkloadError::Schema(format!(
                    "model `{}`: dep edge ({u}, {v}) out of range (L = {n})",
                    self.name
                )));
            }
            if u == v {
                return Err(WorkloadError::Cycle(self.name.clone()));
            }
        }
        // Stored order must be a topological order: every edge points forward.
        // Distinguish real cycles from mere disorder for the error message.
        if edges.iter().any(|&(u, v)| u >= v) {
            topo_sort_edges(n, &edges).map_err(|_| WorkloadError::Cycle(self.name.clone()))?;
            let &(u, v) = edges.iter().find(|&&(u, v)| u >= v).unwrap();
            return Err(WorkloadError::NotTopological {
                model: self.name.clone(),
                u,
                v,
            });
        }
        Ok(())
    }
}

/// A multi-model workload scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub models: Vec<Model>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        if self.models.is_empty() {
            return Err(WorkloadError::Schema(format!(
                "scenario `{}` has no models",
                self.name
            )));
        }
        let mut names: Vec<&str> = self.models.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(WorkloadError::DuplicateModel(w[0].to_string()));
            }
        }
        for m in &self.models {
            m.validate()?;
        }
        Ok(())
    }

    pub fn total_layers(&self) -> usize {
        self.models.iter().map(|m| m.layers.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization")
    }
}

/// Parse and validate a scenario document (JSON).
pub fn parse_scenario(text: &str) -> Result<Scenario, WorkloadError> {
    let sc: Scenario =
        serde_json::from_str(text).map_err(|e| WorkloadError::Parse(e.to_string()))?;
    sc.validate()?;
    Ok(sc)
}

/// Kahn's algorithm with ascending-index tie-break.
fn topo_sort_edges(n: usize, edges: &[(usize, usize)]) -> Result<Vec<usize>, ()> {
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for &(u, v) in edges {
        indeg[v] += 1;
        succ[u].push(v);
    }
    // Min-heap on index for the deterministic tie-break.
    let mut ready: BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&i| indeg[i] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(i)) = ready.pop() {
        order.push(i);
        for &v in &succ[i] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(std::cmp::Reverse(v));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(())
    }
}

/// Topologically sort a model's layers by its dependency edges.
///
/// Ties (multiple ready layers) break by ascending original index, so the
/// output is deterministic.
pub fn topo_sort(model: &Model) -> Result<Vec<usize>, WorkloadError> {
    topo_sort_edges(model.num_layers(), &model.dep_edges())
        .map_err(|_| WorkloadError::Cycle(model.name.clone()))
}
