//! The two layer-cost providers: the built-in analytical model and the
//! imported per-layer cost database.

use super::{CostError, CostProvider, LayerCost};
use crate::hardware::{ChipletSpec, Dataflow};
use crate::workload::LayerParams;
use std::collections::BTreeMap;

/// Analytical provider.
///
/// Effective parallelism on a chiplet is `min(n_pe, P(df, layer))` where
/// `P(weight-stationary) = c_in * c_out` and
/// `P(output-stationary) = out_h * out_w * batch`; cycles are
/// `ceil(macs / min(n_pe, P))` and compute energy is `macs * e_mac`.
/// Custom dataflows have no utilization model and must come from a database.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyticalProvider;

impl CostProvider for AnalyticalProvider {
    fn cost(
        &self,
        _model: &str,
        _layer_index: usize,
        layer: &LayerParams,
        chiplet: &ChipletSpec,
        batch: u64,
    ) -> Result<LayerCost, CostError> {
        let l = layer.at_batch(batch);
        layer_compute_cost(&l, chiplet)
    }
}

/// Analytical latency/energy of one layer on one chiplet.
pub fn layer_compute_cost(
    layer: &LayerParams,
    chiplet: &ChipletSpec,
) -> Result<LayerCost, CostError> {
    let macs = layer.macs()?;
    let parallelism = match chiplet.dataflow {
        Dataflow::WeightStationary => layer.c_in.saturating_mul(layer.c_out),
        Dataflow::OutputStationary => {
            let (oh, ow) = layer.out_dims()?;
            oh.saturating_mul(ow).saturating_mul(layer.batch_size)
        }
        Dataflow::Custom(ref tag) => {
            return Err(CostError::UnsupportedDataflow(tag.clone()))
        }
    };
    let effective = chiplet.n_pe.min(parallelism).max(1);
    let cycles = macs.div_ceil(effective);
    Ok(LayerCost {
        cycles,
        energy: macs as f64 * chiplet.e_mac,
    })
}

/// Offline per-layer cost database keyed by (model, layer index, dataflow).
///
/// Entries describe the layer at its declared batch size; energies are kept
/// in picojoules as written so the file format round-trips losslessly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostDb {
    entries: BTreeMap<(String, usize, String), (u64, f64)>,
}

pub const COST_DB_HEADER: &str = "model,layer,dataflow,cycles,energy_pj";

impl CostDb {
    pub fn new() -> CostDb {
        CostDb::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(
        &mut self,
        model: &str,
        layer: usize,
        dataflow: &str,
        cycles: u64,
        energy_pj: f64,
    ) -> Result<(), CostError> {
        let key = (model.to_string(), layer, dataflow.to_string());
        if self.entries.contains_key(&key) {
            return Err(CostError::DuplicateEntry {
                model: model.to_string(),
                layer,
                dataflow: dataflow.to_string(),
            });
        }
        self.entries.insert(key, (cycles, energy_pj));
        Ok(())
    }

    pub fn get(&self, model: &str, layer: usize, dataflow: &str) -> Option<LayerCost> {
        self.entries
            .get(&(model.to_string(), layer, dataflow.to_string()))
            .map(|&(cycles, energy_pj)| LayerCost {
                cycles,
                energy: energy_pj * 1e-12,
            })
    }

    /// Parse the delimited text format. Rejects duplicate rows.
    pub fn parse(text: &str) -> Result<CostDb, CostError> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == COST_DB_HEADER => {}
            other => {
                return Err(CostError::Parse(format!(
                    "expected header `{COST_DB_HEADER}`, found {other:?}"
                )))
            }
        }
        let mut db = CostDb::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(CostError::Parse(format!(
                    "line {}: expected 5 fields, found {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let layer: usize = fields[1]
                .parse()
                .map_err(|e| CostError::Parse(format!("line {}: layer: {e}", lineno + 2)))?;
            let cycles: u64 = fields[3]
                .parse()
                .map_err(|e| CostError::Parse(format!("line {}: cycles: {e}", lineno + 2)))?;
            let energy_pj: f64 = fields[4]
                .parse()
                .map_err(|e| CostError::Parse(format!("line {}: energy_pj: {e}", lineno + 2)))?;
            db.insert(fields[0], layer, fields[2], cycles, energy_pj)?;
        }
        Ok(db)
    }

    /// Serialize to the delimited text format, sorted by key.
    pub fn to_text(&self) -> String {
        let mut out = String::from(COST_DB_HEADER);
        out.push('\n');
        for ((model, layer, df), (cycles, energy_pj)) in &self.entries {
            out.push_str(&format!("{model},{layer},{df},{cycles},{energy_pj}\n"));
        }
        out
    }
}

/// Stored-cost lookup; errors name the missing tuple.
pub fn lookup_cost(
    db: &CostDb,
    model: &str,
    layer: usize,
    dataflow: &str,
) -> Result<LayerCost, CostError> {
    db.get(model, layer, dataflow)
        .ok_or_else(|| CostError::MissingEntry {
            model: model.to_string(),
            layer,
            dataflow: dataflow.to_string(),
        })
}

/// Database-backed provider. Costs at a mini-batch smaller than the layer's
/// declared batch scale linearly (cycles round up).
#[derive(Debug, Clone)]
pub struct DbProvider {
    pub db: CostDb,
}

impl DbProvider {
    pub fn new(db: CostDb) -> DbProvider {
        DbProvider { db }
    }
}

impl CostProvider for DbProvider {
    fn cost(
        &self,
        model: &str,
        layer_index: usize,
        layer: &LayerParams,
        chiplet: &ChipletSpec,
        batch: u64,
    ) -> Result<LayerCost, CostError> {
        let base = lookup_cost(&self.db, model, layer_index, chiplet.dataflow.tag())?;
        if batch == layer.batch_size {
            return Ok(base);
        }
        let ratio = batch as f64 / layer.batch_size as f64;
        let cycles = ((base.cycles as f64 * ratio).ceil() as u64).max(1);
        Ok(LayerCost {
            cycles,
            energy: base.energy * ratio,
        })
    }
}
