//! Writes the bundled fixture traces as JSONL files.
//!
//! cargo run --example export_fixtures -- <dir>

use std::fs::File;
use std::path::PathBuf;

use filo::fixtures::{goodweather_pair, startup_excerpt};
use filo::trace::write_trace;

fn main() -> filo::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir)?;
    let (baseline, failure) = goodweather_pair();
    write_trace(&baseline, File::create(dir.join("goodweather_baseline.jsonl"))?)?;
    write_trace(&failure, File::create(dir.join("goodweather_failure.jsonl"))?)?;
    write_trace(&startup_excerpt(), File::create(dir.join("startup_excerpt.jsonl"))?)?;
    println!("wrote 3 traces to {}", dir.display());
    Ok(())
}
