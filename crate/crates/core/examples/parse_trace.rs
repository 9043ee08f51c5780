//! Parse and validate a JSONL trace, then print a per-direction summary.
//!
//! cargo run --example parse_trace -- [trace.jsonl[.gz]]
//!
//! Without an argument the bundled start-up excerpt is used.

use std::collections::BTreeMap;
use std::path::PathBuf;

use filo::fixtures::startup_excerpt;
use filo::trace::{
    read_trace_file, serialize_trace, validate_trace, Direction, FrameworkPrefixes, TraceLabel, DEFAULT_ROOT,
};

fn main() -> filo::Result<()> {
    let prefixes = FrameworkPrefixes::default();
    let (trace, raw) = match std::env::args().nth(1).map(PathBuf::from) {
        Some(path) => (
            read_trace_file(&path, TraceLabel::Baseline, &prefixes)?,
            std::fs::read(&path)?,
        ),
        None => {
            let t = startup_excerpt();
            let bytes = serialize_trace(&t);
            (t, bytes)
        }
    };

    let report = validate_trace(raw.as_slice(), &prefixes, DEFAULT_ROOT)?;
    for f in &report.findings {
        println!("{f}");
    }

    let mut per_method: BTreeMap<&str, (usize, Direction)> = BTreeMap::new();
    for e in trace.events().iter().filter(|e| e.is_begin()) {
        per_method.entry(e.method().name()).or_insert((0, e.direction())).0 += 1;
    }
    println!("{} events, {} distinct methods", trace.len(), per_method.len());
    for (name, (calls, dir)) in per_method {
        let tag = match dir {
            Direction::ApiCall => "api",
            Direction::Callback => "cb ",
        };
        println!("  {tag} {calls:>4}  {name}");
    }
    Ok(())
}
