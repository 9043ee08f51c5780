//! An app that dies before writing a single event: the whole baseline
//! becomes one block and the start-up callback is ranked first.
//!
//! cargo run --example crash_on_startup

use filo::fixtures::goodweather_pair;
use filo::rank::{analyze, AnalysisConfig};
use filo::sib::detect_sibs;
use filo::trace::{KeyPolicy, Trace, TraceLabel};

fn main() -> filo::Result<()> {
    let (baseline, _) = goodweather_pair();
    let failure = Trace::empty(TraceLabel::Failure);

    let diff = detect_sibs(&baseline, &failure, KeyPolicy::Full);
    let block = &diff.sibs[0];
    println!(
        "{} block spanning seq {}..={}, weight {}",
        diff.sibs.len(),
        block.start_seq,
        block.end_seq,
        block.weight
    );

    let report = analyze(&baseline, &failure, &AnalysisConfig::default())?;
    print!("{}", report.render_text(Some(5)));
    Ok(())
}
