//! Diff the GoodWeather-shaped pair and list the suspicious invocation
//! blocks with their weights and first keys.
//!
//! cargo run --example detect_sibs

use filo::fixtures::goodweather_pair;
use filo::sib::{detect_sibs, filter_sibs};
use filo::trace::KeyPolicy;

fn main() -> filo::Result<()> {
    let (baseline, failure) = goodweather_pair();
    let diff = detect_sibs(&baseline, &failure, KeyPolicy::Full);

    println!(
        "{} blocks, weight histogram {:?}",
        diff.stats.total, diff.stats.by_weight
    );
    for (i, sib) in diff.sibs.iter().enumerate() {
        let rep = sib
            .representative
            .as_ref()
            .map(|r| r.method.to_string())
            .unwrap_or_else(|| "-".into());
        println!(
            "#{i} seq {}..={} weight {} rep {rep}",
            sib.start_seq, sib.end_seq, sib.weight
        );
        for key in sib.preview(KeyPolicy::Full).iter().take(4) {
            println!("    {key}");
        }
    }
    for gone in &diff.baseline_only_blocks {
        println!("baseline only: seq {}..={}", gone.start_seq, gone.end_seq);
    }

    let kept = filter_sibs(&diff, 2)?;
    println!("weight >= 2: {:?}", kept.weights());
    Ok(())
}
