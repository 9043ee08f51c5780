//! Synthetic benchmark: generated trace pairs with known fix loci, block
//! quality metrics and Top-k aggregation across techniques.

mod generator;
mod metrics;
mod runner;

pub use generator::{generate_pair, AppShape, FaultKind, FaultScenario, GeneratedPair, GroundTruth};
pub use metrics::{completeness, soundness, Soundness};
pub use runner::{run_bench, write_artifacts, BenchConfig, BenchManifest, BenchResult, ScenarioResult, TopK};
