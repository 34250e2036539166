//! Latency and energy evaluation: per-layer cost providers, communication
//! formulas, mini-batch pipelining, and the window/scenario aggregation.
//!
//! Layer compute costs come from a pluggable [`CostProvider`]: either the
//! built-in analytical model or an imported per-layer cost database. All
//! communication terms derive from the package parameters in
//! [`crate::hardware::McmSpec`].

mod provider;
mod window;

pub use provider::{
    layer_compute_cost, lookup_cost, AnalyticalProvider, CostDb, DbProvider,
};
pub use window::{scenario_cost, scenario_windows, window_cost, ModelWindowJob, WindowCostOut};

use crate::hardware::{ChipletSpec, Dataflow, McmSpec};
use crate::workload::{LayerParams, Scenario, WorkloadError};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CostError {
    #[error("no cost entry for (model `{model}`, layer {layer}, dataflow `{dataflow}`)")]
    MissingEntry {
        model: String,
        layer: usize,
        dataflow: String,
    },
    #[error("duplicate cost entry for (model `{model}`, layer {layer}, dataflow `{dataflow}`)")]
    DuplicateEntry {
        model: String,
        layer: usize,
        dataflow: String,
    },
    #[error("the analytical provider has no utilization model for dataflow `{0}`")]
    UnsupportedDataflow(String),
    #[error("mini-batch {b_prime} does not divide batch {b}")]
    BadMiniBatch { b: u64, b_prime: u64 },
    #[error("empty segment or pipeline")]
    Empty,
    #[error("cost database parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Hardware(#[from] crate::hardware::HardwareError),
}

/// Cost of one layer on one chiplet class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerCost {
    pub cycles: u64,
    /// Compute energy, joules.
    pub energy: f64,
}

/// How a transfer travels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    SameChiplet,
    OnPackage {
        src: usize,
        dst: usize,
        n_hops: usize,
    },
    Offchip {
        chiplet: usize,
        portal: usize,
        n_hops: usize,
    },
}

impl Route {
    pub fn n_hops(&self) -> usize {
        match *self {
            Route::SameChiplet => 0,
            Route::OnPackage { n_hops, .. } | Route::Offchip { n_hops, .. } => n_hops,
        }
    }
}

/// Communication parameters, all in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommParams {
    /// On-package link bandwidth, bytes/s.
    pub bw_nop: f64,
    /// Off-chip bandwidth share per transfer, bytes/s.
    pub bw_mem: f64,
    /// Per-hop propagation latency, s.
    pub lat_hop: f64,
    /// DRAM access latency, s.
    pub lat_mem: f64,
    /// Contention allowance added to every non-local transfer, s.
    pub delta: f64,
    /// NoP energy, joules/bit/hop.
    pub e_nop_bit: f64,
    /// DRAM energy, joules/bit.
    pub e_dram_bit: f64,
}

impl CommParams {
    pub fn from_mcm(mcm: &McmSpec) -> CommParams {
        CommParams {
            bw_nop: mcm.bw_nop,
            bw_mem: mcm.bw_offchip / mcm.bw_mem_divisor,
            lat_hop: mcm.lat_hop,
            lat_mem: mcm.lat_mem,
            delta: mcm.delta,
            e_nop_bit: mcm.e_nop_bit,
            e_dram_bit: mcm.e_dram_bit,
        }
    }
}

/// Transfer latency in seconds.
///
/// Same chiplet: free. On package: `sz/bw_nop + n_hops*lat_hop + delta`.
/// Off chip: `sz/bw_mem + n_hops*lat_hop + lat_mem + delta` (the hops cover
/// the path to the memory portal).
pub fn comm_latency(sz_bytes: u64, route: &Route, p: &CommParams) -> f64 {
    comm_latency_scaled(sz_bytes, route, p, 1.0)
}

/// `comm_latency` with the bandwidth term inflated by a contention factor.
pub(crate) fn comm_latency_scaled(
    sz_bytes: u64,
    route: &Route,
    p: &CommParams,
    factor: f64,
) -> f64 {
    let sz = sz_bytes as f64;
    match route {
        Route::SameChiplet => 0.0,
        Route::OnPackage { n_hops, .. } => {
            sz / p.bw_nop * factor + *n_hops as f64 * p.lat_hop + p.delta
        }
        Route::Offchip { n_hops, .. } => {
            sz / p.bw_mem * factor + *n_hops as f64 * p.lat_hop + p.lat_mem + p.delta
        }
    }
}

/// Transfer energy in joules.
///
/// On package: `8*sz*e_nop_bit*n_hops`. Off chip additionally pays the DRAM
/// access energy `8*sz*e_dram_bit`.
pub fn comm_energy(sz_bytes: u64, route: &Route, p: &CommParams) -> f64 {
    let bits = 8.0 * sz_bytes as f64;
    match route {
        Route::SameChiplet => 0.0,
        Route::OnPackage { n_hops, .. } => bits * p.e_nop_bit * *n_hops as f64,
        Route::Offchip { n_hops, .. } => {
            bits * p.e_dram_bit + bits * p.e_nop_bit * *n_hops as f64
        }
    }
}

/// Largest mini-batch a chiplet can hold for a segment.
///
/// The per-sample working set is the maximum over the segment's layers of
/// input + weight + output bytes; the mini-batch is the largest divisor `b'`
/// of `b` with `working_set * b' <= sz_mem`, and at least 1.
pub fn mini_batch(
    layers: &[LayerParams],
    b: u64,
    chiplet: &ChipletSpec,
) -> Result<u64, CostError> {
    if layers.is_empty() {
        return Err(CostError::Empty);
    }
    let mut ws: u64 = 0;
    for l in layers {
        let per_sample = l.input_bytes_per_sample() + l.weight_bytes() + l.output_bytes_per_sample()?;
        ws = ws.max(per_sample);
    }
    for d in (1..=b).rev() {
        if b % d == 0 && (ws as u128) * (d as u128) <= chiplet.sz_mem as u128 {
            return Ok(d);
        }
    }
    Ok(1)
}

/// Boundary routes of one segment. The input-activation and weight loads are
/// the segment's leading transfers; the output transfer hands results to the
/// next segment or back to memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentRoutes {
    pub act_in: Route,
    pub weights: Route,
    pub act_out: Route,
}

/// A segment as seen by the cost model: a contiguous slice of one model's
/// layers, with the global index of the first layer for provider lookups.
#[derive(Debug, Clone, Copy)]
pub struct SegmentView<'a> {
    pub model: &'a str,
    pub first_index: usize,
    pub layers: &'a [LayerParams],
}

impl<'a> SegmentView<'a> {
    pub fn input_bytes(&self, batch: u64) -> u64 {
        self.layers[0].input_bytes_per_sample() * batch
    }

    pub fn output_bytes(&self, batch: u64) -> Result<u64, CostError> {
        Ok(self.layers[self.layers.len() - 1].output_bytes_per_sample()? * batch)
    }

    pub fn weight_bytes(&self) -> u64 {
        self.layers.iter().map(|l| l.weight_bytes()).sum()
    }
}

/// Per-provider layer cost interface; see [`AnalyticalProvider`] and
/// [`DbProvider`].
pub trait CostProvider: Sync {
    fn cost(
        &self,
        model: &str,
        layer_index: usize,
        layer: &LayerParams,
        chiplet: &ChipletSpec,
        batch: u64,
    ) -> Result<LayerCost, CostError>;
}

/// Latency of one segment on one chiplet at mini-batch `b'`: the sum of the
/// layer compute latencies plus the boundary transfers.
pub fn segment_latency(
    seg: &SegmentView,
    chiplet: &ChipletSpec,
    b_prime: u64,
    routes: &SegmentRoutes,
    provider: &dyn CostProvider,
    params: &CommParams,
) -> Result<f64, CostError> {
    segment_latency_scaled(seg, chiplet, b_prime, routes, provider, params, [1.0, 1.0, 1.0])
}

pub(crate) fn segment_latency_scaled(
    seg: &SegmentView,
    chiplet: &ChipletSpec,
    b_prime: u64,
    routes: &SegmentRoutes,
    provider: &dyn CostProvider,
    params: &CommParams,
    contention: [f64; 3],
) -> Result<f64, CostError> {
    if seg.layers.is_empty() {
        return Err(CostError::Empty);
    }
    let mut compute = 0.0;
    for (off, l) in seg.layers.iter().enumerate() {
        let c = provider.cost(seg.model, seg.first_index + off, l, chiplet, b_prime)?;
        compute += c.cycles as f64 / chiplet.clock_hz;
    }
    let lat_in = comm_latency_scaled(seg.input_bytes(b_prime), &routes.act_in, params, contention[0]);
    let lat_w = comm_latency_scaled(seg.weight_bytes(), &routes.weights, params, contention[1]);
    let lat_out =
        comm_latency_scaled(seg.output_bytes(b_prime)?, &routes.act_out, params, contention[2]);
    Ok(compute + lat_in + lat_w + lat_out)
}

/// Pipelined latency of a model's segment chain in one window:
/// `sum(Lat(sg_k | b')) + (b/b' - 1) * max(Lat(sg_k | b'))`.
pub fn pipeline_latency(stage_latencies: &[f64], b: u64, b_prime: u64) -> Result<f64, CostError> {
    if stage_latencies.is_empty() {
        return Err(CostError::Empty);
    }
    if b_prime == 0 || b % b_prime != 0 {
        return Err(CostError::BadMiniBatch { b, b_prime });
    }
    let sum: f64 = stage_latencies.iter().sum();
    let max = stage_latencies.iter().cloned().fold(f64::MIN, f64::max);
    Ok(sum + (b / b_prime - 1) as f64 * max)
}

/// Discrete-event reference for [`pipeline_latency`]: stage `k` starts
/// mini-batch `m` once it finished `m-1` and stage `k-1` delivered `m`;
/// returns the completion time of the last mini-batch at the last stage.
pub fn simulate_pipeline_oracle(
    stage_latencies: &[f64],
    b: u64,
    b_prime: u64,
) -> Result<f64, CostError> {
    if stage_latencies.is_empty() {
        return Err(CostError::Empty);
    }
    if b_prime == 0 || b % b_prime != 0 {
        return Err(CostError::BadMiniBatch { b, b_prime });
    }
    let n = (b / b_prime) as usize;
    // finish[k] = completion time of the current mini-batch at stage k.
    let mut finish = vec![0.0f64; stage_latencies.len()];
    for _ in 0..n {
        let mut upstream = 0.0f64;
        for (k, &lat) in stage_latencies.iter().enumerate() {
            let start = finish[k].max(upstream);
            finish[k] = start + lat;
            upstream = finish[k];
        }
    }
    Ok(finish[stage_latencies.len() - 1])
}

/// Latency of a time window: the slowest model pipeline in it.
pub fn window_latency(model_latencies: &[f64]) -> f64 {
    model_latencies.iter().cloned().fold(0.0, f64::max)
}

/// Optimization metric for expectations and scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Latency,
    Energy,
    Edp,
}

fn metric_value(cost: &LayerCost, clock_hz: f64, metric: Metric) -> f64 {
    let lat = cost.cycles as f64 / clock_hz;
    match metric {
        Metric::Latency => lat,
        Metric::Energy => cost.energy,
        Metric::Edp => lat * cost.energy,
    }
}

/// Expected (class-weighted) cost of a layer before placement is known:
/// `sum_i (n_df_i / |C|) * metric(layer -> df_i)` over the dataflow classes
/// of the package.
pub fn expected_layer_cost(
    layer: &LayerParams,
    model: &str,
    layer_index: usize,
    mcm: &McmSpec,
    metric: Metric,
    provider: &dyn CostProvider,
) -> Result<f64, CostError> {
    let total = mcm.num_chiplets() as f64;
    let mut acc = 0.0;
    for (df, count) in mcm.dataflow_classes() {
        let rep = mcm.representative(&df).expect("class has a member");
        let cost = provider.cost(model, layer_index, layer, rep, layer.batch_size)?;
        acc += count as f64 / total * metric_value(&cost, rep.clock_hz, metric);
    }
    Ok(acc)
}

/// Expected latency of every layer of every model, in seconds.
/// Row `i` holds model `i`'s layers in stored order.
pub fn expected_latency_table(
    sc: &Scenario,
    mcm: &McmSpec,
    provider: &dyn CostProvider,
) -> Result<Vec<Vec<f64>>, CostError> {
    expected_metric_table(sc, mcm, Metric::Latency, provider)
}

/// Like [`expected_latency_table`] for an arbitrary metric.
pub fn expected_metric_table(
    sc: &Scenario,
    mcm: &McmSpec,
    metric: Metric,
    provider: &dyn CostProvider,
) -> Result<Vec<Vec<f64>>, CostError> {
    sc.models
        .iter()
        .map(|m| {
            m.layers
                .iter()
                .enumerate()
                .map(|(i, l)| expected_layer_cost(l, &m.name, i, mcm, metric, provider))
                .collect()
        })
        .collect()
}

/// Full-scenario evaluation (latency, energy, energy-delay product) plus the
/// per-window and per-model breakdowns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub latency: f64,
    pub energy: f64,
    pub edp: f64,
    /// (window index, latency, energy) for every non-empty window.
    pub per_window: Vec<(usize, f64, f64)>,
    /// Per model: cumulative completion time, i.e. the latencies of all
    /// windows before the model's last active one plus the model's own
    /// pipeline latency in that final window.
    pub per_model: Vec<(String, f64)>,
}

/// Expected per-dataflow-class mix of a layer (used by tests and reports).
pub fn class_mix(mcm: &McmSpec) -> Vec<(Dataflow, usize)> {
    mcm.dataflow_classes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardware::parse_hardware;
    use crate::workload::{LayerKind, LayerParams};

    fn fc_layer(batch: u64, c_in: u64, c_out: u64) -> LayerParams {
        LayerParams {
            name: "fc".into(),
            kind: LayerKind::Fc,
            batch_size: batch,
            c_in,
            c_out,
            ip_h: 1,
            ip_w: 1,
            k_size: 1,
            stride: 1,
            bytes_per_element: 1,
        }
    }

    fn test_chiplet(df: Dataflow, n_pe: u64) -> ChipletSpec {
        ChipletSpec {
            id: 0,
            dataflow: df,
            n_pe,
            bw_noc: 100e9,
            bw_mem: 64e9,
            sz_mem: 10 * 1024 * 1024,
            clock_hz: 500e6,
            e_mac: 1e-12,
        }
    }

    fn default_params() -> CommParams {
        CommParams {
            bw_nop: 100e9,
            bw_mem: 64e9,
            lat_hop: 35e-9,
            lat_mem: 200e-9,
            delta: 0.0,
            e_nop_bit: 2.04e-12,
            e_dram_bit: 14.8e-12,
        }
    }

    #[test]
    fn comm_latency_same_chiplet_is_free() {
        let p = default_params();
        assert_eq!(comm_latency(123456, &Route::SameChiplet, &p), 0.0);
    }

    #[test]
    fn comm_latency_on_package_hand_arithmetic() {
        // 1 MB over 100 GB/s plus 2 hops at 35 ns = 1.007e-5 s.
        let p = default_params();
        let r = Route::OnPackage { src: 0, dst: 2, n_hops: 2 };
        let got = comm_latency(1_000_000, &r, &p);
        assert!((got - 1.007e-5).abs() < 1e-17, "got {got}");
    }

    #[test]
    fn comm_latency_zero_bytes_offchip() {
        let p = default_params();
        let r = Route::Offchip { chiplet: 0, portal: 0, n_hops: 0 };
        assert_eq!(comm_latency(0, &r, &p), p.lat_mem + p.delta);
    }

    #[test]
    fn comm_energy_reference_points() {
        let p = default_params();
        assert_eq!(comm_energy(77, &Route::SameChiplet, &p), 0.0);
        // One byte = 8 bits over one hop: 8 * 2.04 pJ.
        let r = Route::OnPackage { src: 0, dst: 1, n_hops: 1 };
        let got = comm_energy(1, &r, &p);
        assert!((got - 8.0 * 2.04e-12).abs() < 1e-24);
        // One byte off chip at the portal: 8 * 14.8 pJ.
        let r = Route::Offchip { chiplet: 0, portal: 0, n_hops: 0 };
        let got = comm_energy(1, &r, &p);
        assert!((got - 8.0 * 14.8e-12).abs() < 1e-24);
    }

    #[test]
    fn comm_costs_linear_in_size() {
        let p = default_params();
        for r in [
            Route::OnPackage { src: 0, dst: 3, n_hops: 3 },
            Route::Offchip { chiplet: 1, portal: 0, n_hops: 2 },
        ] {
            let f0 = comm_latency(0, &r, &p);
            let l1 = comm_latency(1000, &r, &p) - f0;
            let l3 = comm_latency(3000, &r, &p) - f0;
            assert!((l3 - 3.0 * l1).abs() <= 1e-12 * l3.abs());
            let e1 = comm_energy(1000, &r, &p);
            let e3 = comm_energy(3000, &r, &p);
            assert!((e3 - 3.0 * e1).abs() <= 1e-12 * e3.abs());
        }
    }

    #[test]
    fn mini_batch_divisor_under_capacity() {
        // Working set ~1 MB/sample, 10 MB memory, b = 32: largest divisor
        // of 32 that keeps at most ~10 samples resident is 8.
        let mut chiplet = test_chiplet(Dataflow::WeightStationary, 4096);
        chiplet.sz_mem = 10_000_000;
        let layer = LayerParams {
            name: "c".into(),
            kind: LayerKind::Conv,
            batch_size: 32,
            c_in: 1,
            c_out: 1,
            ip_h: 1000,
            ip_w: 500,
            k_size: 1,
            stride: 1,
            bytes_per_element: 1,
        };
        // in = 500000, out = 500000, weights = 1.
        let ws = layer.input_bytes_per_sample()
            + layer.weight_bytes()
            + layer.output_bytes_per_sample().unwrap();
        assert_eq!(ws, 1_000_001);
        let b = mini_batch(std::slice::from_ref(&layer), 32, &chiplet).unwrap();
        assert_eq!(b, 8);
        // Enumeration oracle over the divisors of 32.
        let oracle = (1..=32)
            .rev()
            .find(|d| 32 % d == 0 && ws * d <= 10_000_000)
            .unwrap();
        assert_eq!(b, oracle);
    }

    #[test]
    fn mini_batch_floors_at_one() {
        let mut chiplet = test_chiplet(Dataflow::WeightStationary, 4096);
        chiplet.sz_mem = 8;
        let layer = fc_layer(4, 100, 100);
        assert_eq!(mini_batch(std::slice::from_ref(&layer), 4, &chiplet).unwrap(), 1);
        assert_eq!(mini_batch(std::slice::from_ref(&layer), 1, &chiplet).unwrap(), 1);
    }

    #[test]
    fn analytical_utilization_cases() {
        // fc with macs = 32 on 16 PEs: weight-stationary has
        // c_in*c_out = 32 >= 16, so full utilization and 2 cycles.
        let l = fc_layer(1, 4, 8);
        let ws = test_chiplet(Dataflow::WeightStationary, 16);
        let c = layer_compute_cost(&l, &ws).unwrap();
        assert_eq!(c.cycles, 2);
        // Output-stationary parallelism is out_h*out_w*batch = 1:
        // fully serialized, 32 cycles.
        let os = test_chiplet(Dataflow::OutputStationary, 16);
        let c = layer_compute_cost(&l, &os).unwrap();
        assert_eq!(c.cycles, 32);
        // Energy: macs * e_mac regardless of dataflow.
        assert!((c.energy - 32.0 * 1e-12).abs() < 1e-24);
    }

    #[test]
    fn analytical_affinity_ordering_matches_parallelism() {
        // When both parallelism degrees sit below n_pe, the dataflow with
        // more parallelism wins; conv macs are divisible by both degrees.
        let ws = test_chiplet(Dataflow::WeightStationary, 100_000);
        let os = test_chiplet(Dataflow::OutputStationary, 100_000);
        let shapes = [
            (1u64, 8u64, 16u64, 34u64, 3u64),
            (2, 16, 8, 18, 3),
            (1, 32, 32, 12, 5),
            (4, 4, 4, 20, 1),
        ];
        for (b, ci, co, ip, k) in shapes {
            let l = LayerParams {
                name: "c".into(),
                kind: LayerKind::Conv,
                batch_size: b,
                c_in: ci,
                c_out: co,
                ip_h: ip,
                ip_w: ip,
                k_size: k,
                stride: 1,
                bytes_per_element: 1,
            };
            let (oh, ow) = l.out_dims().unwrap();
            let p_ws = ci * co;
            let p_os = oh * ow * b;
            assert!(p_ws < 100_000 && p_os < 100_000);
            let cw = layer_compute_cost(&l, &ws).unwrap().cycles;
            let co_ = layer_compute_cost(&l, &os).unwrap().cycles;
            if p_ws > p_os {
                assert!(cw < co_, "shape {b},{ci},{co},{ip},{k}");
            } else if p_os > p_ws {
                assert!(co_ < cw, "shape {b},{ci},{co},{ip},{k}");
            } else {
                assert_eq!(cw, co_);
            }
        }
    }

    #[test]
    fn pipeline_latency_matches_examples() {
        assert_eq!(pipeline_latency(&[10.0, 20.0, 30.0], 4, 4).unwrap(), 60.0);
        assert_eq!(pipeline_latency(&[10.0, 20.0, 30.0], 4, 1).unwrap(), 150.0);
        assert_eq!(pipeline_latency(&[7.0], 4, 2).unwrap(), 14.0);
        assert!(matches!(
            pipeline_latency(&[1.0], 4, 3),
            Err(CostError::BadMiniBatch { .. })
        ));
    }

    #[test]
    fn oracle_balanced_and_single_minibatch() {
        // Balanced pipeline: formula and simulator agree exactly.
        assert_eq!(
            simulate_pipeline_oracle(&[5.0, 5.0, 5.0], 8, 2).unwrap(),
            pipeline_latency(&[5.0, 5.0, 5.0], 8, 2).unwrap()
        );
        // One mini-batch: plain sum.
        assert_eq!(simulate_pipeline_oracle(&[3.0, 4.0, 5.0], 2, 2).unwrap(), 12.0);
    }

    #[test]
    fn window_latency_is_max() {
        assert_eq!(window_latency(&[5.0, 7.0]), 7.0);
        assert_eq!(window_latency(&[5.0]), 5.0);
        assert_eq!(window_latency(&[6.0, 6.0]), 6.0);
    }

    #[test]
    fn expected_cost_weighted_mean() {
        // 5 WS + 4 OS chiplets; construct a layer whose class latencies are
        // 100 and 190 cycles; expectation = 5/9*100 + 4/9*190 = 140 cycles.
        struct Fixed;
        impl CostProvider for Fixed {
            fn cost(
                &self,
                _m: &str,
                _i: usize,
                _l: &LayerParams,
                chiplet: &ChipletSpec,
                _b: u64,
            ) -> Result<LayerCost, CostError> {
                Ok(match chiplet.dataflow {
                    Dataflow::WeightStationary => LayerCost { cycles: 100, energy: 1.0 },
                    _ => LayerCost { cycles: 190, energy: 1.0 },
                })
            }
        }
        let doc = r#"{
            "topology": { "kind": "mesh", "rows": 3, "cols": 3 },
            "pattern": ["ws","ws","ws","ws","ws","os","os","os","os"]
        }"#;
        let mcm = parse_hardware(doc).unwrap();
        let l = fc_layer(1, 2, 2);
        let got = expected_layer_cost(&l, "m", 0, &mcm, Metric::Latency, &Fixed).unwrap();
        let want = 140.0 / 500e6;
        assert!((got - want).abs() < 1e-18);

        // Homogeneous package: the expectation is that class exactly.
        let homo = parse_hardware(
            r#"{ "topology": { "kind": "mesh", "rows": 3, "cols": 3 },
                 "pattern": "homogeneous-nvdla" }"#,
        )
        .unwrap();
        let got = expected_layer_cost(&l, "m", 0, &homo, Metric::Latency, &Fixed).unwrap();
        assert!((got - 100.0 / 500e6).abs() < 1e-18);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Integer-valued stage latencies keep every f64 summation order
            // exact, so the formula and the simulator must agree bit-exactly.
            #[test]
            fn pipeline_formula_equals_simulator(
                stages in proptest::collection::vec(1u32..1000, 1..=6),
                b_exp in 0u32..6,
                bp_exp in 0u32..6,
            ) {
                let b = 1u64 << b_exp.max(bp_exp);
                let bp = 1u64 << bp_exp.min(b_exp);
                let lats: Vec<f64> = stages.iter().map(|&s| s as f64).collect();
                let f = pipeline_latency(&lats, b, bp).unwrap();
                let s = simulate_pipeline_oracle(&lats, b, bp).unwrap();
                prop_assert_eq!(f, s);
            }

            #[test]
            fn pipeline_monotone_in_stage_latency_and_batch(
                stages in proptest::collection::vec(1u32..1000, 1..=6),
                bump in 0usize..6,
            ) {
                let lats: Vec<f64> = stages.iter().map(|&s| s as f64).collect();
                let base = pipeline_latency(&lats, 8, 2).unwrap();
                let mut bigger = lats.clone();
                let i = bump % bigger.len();
                bigger[i] += 1.0;
                prop_assert!(pipeline_latency(&bigger, 8, 2).unwrap() >= base);
                prop_assert!(pipeline_latency(&lats, 16, 2).unwrap() >= base);
            }

            #[test]
            fn fill_only_when_b_equals_bprime(
                stages in proptest::collection::vec(1u32..1000, 1..=6),
                b in 1u64..32,
            ) {
                let lats: Vec<f64> = stages.iter().map(|&s| s as f64).collect();
                let sum: f64 = lats.iter().sum();
                prop_assert_eq!(pipeline_latency(&lats, b, b).unwrap(), sum);
            }
        }
    }
}
