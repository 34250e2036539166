//! Scheduler and cost-model framework for multi-model inference workloads on
//! heterogeneous-dataflow chiplet packages.
//!
//! The pipeline: parse a workload scenario and a package description, plan
//! time windows and pack layers into them, provision chiplet nodes per model
//! per window, enumerate (or evolve) layer segmentations, map segments to
//! chiplet paths over the network-on-package, and score candidates on
//! latency, energy, or energy-delay product while tracking the Pareto
//! frontier.

pub mod artifacts;
pub mod costmodel;
pub mod hardware;
pub mod provisioner;
pub mod schedtree;
pub mod search;
pub mod segmentation;
pub mod windowing;
pub mod workload;

pub use costmodel::{CostProvider, CostReport};
pub use hardware::{build_topology, parse_hardware, McmSpec, NopGraph};
pub use schedtree::{validate_schedule, FullSchedule};
pub use search::{search, Objective, SearchConfig, SearchResult};
pub use workload::{parse_scenario, Scenario};
