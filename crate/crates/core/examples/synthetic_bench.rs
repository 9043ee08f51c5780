//! Run the standard synthetic suite and print the Top-k table.
//!
//! cargo run --release --example synthetic_bench -- [artifact-dir]
//!
//! With a directory argument the manifest, per-scenario traces, ground
//! truth and reports are written there.

use std::path::PathBuf;

use filo::bench::{run_bench, BenchConfig, BenchManifest};

fn main() -> filo::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let manifest = BenchManifest::standard(40, 10, 0);
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("bench.json"), manifest.to_json())?;
    }
    let config = BenchConfig {
        coverage: true,
        artifacts: out,
        ..BenchConfig::default()
    };
    let result = run_bench(&manifest.scenarios, &config)?;

    print!("{}", result.render_table());
    let mean = |xs: Vec<f64>| {
        if xs.is_empty() {
            f64::NAN
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let with_frmc = || result.scenarios.iter().filter(|s| s.completeness.is_some());
    let sound = mean(with_frmc().filter_map(|s| s.soundness.at_least_min_weight).collect());
    let complete = mean(with_frmc().filter_map(|s| s.completeness).collect());
    println!("mean soundness (weight >= 2) {sound:.2}, mean completeness {complete:.2}");
    Ok(())
}
