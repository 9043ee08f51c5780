//! FILO, naive trace inspection and Ochiai on one generated scenario per
//! fault kind.
//!
//! cargo run --example compare_techniques -- [seed]

use filo::baselines::{naive_rank, ochiai_rank, rank_position};
use filo::bench::{generate_pair, AppShape, FaultKind, FaultScenario};
use filo::rank::{analyze, AnalysisConfig};
use filo::trace::KeyPolicy;

fn main() -> filo::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let show = |p: Option<usize>| p.map_or("-".to_string(), |p| p.to_string());
    println!(
        "{:<26} {:<50} {:>5} {:>6} {:>7}",
        "fault", "fix locus", "FILO", "naive", "ochiai"
    );
    for kind in FaultKind::ALL {
        let scenario = FaultScenario::new(
            "demo",
            kind,
            AppShape {
                seed,
                noise_blocks: if kind == FaultKind::CrashOnStartup { 0 } else { 5 },
                ..AppShape::default()
            },
        );
        let pair = generate_pair(&scenario)?;
        let target = pair.truth.ground_truth_method();

        let filo_pos = analyze(&pair.baseline, &pair.failure, &AnalysisConfig::default())
            .ok()
            .and_then(|r| rank_position(&r, target));
        let naive_pos = rank_position(&naive_rank(&pair.baseline, &pair.failure, KeyPolicy::Full), target);
        let ochiai_pos = match &pair.coverage {
            Some(m) => rank_position(&ochiai_rank(m)?, target),
            None => None,
        };
        println!(
            "{:<26} {:<50} {:>5} {:>6} {:>7}",
            kind.as_str(),
            target,
            show(filo_pos),
            show(naive_pos),
            show(ochiai_pos)
        );
    }
    Ok(())
}
