//! Sweep k1 (with k2 = 1 - k1) and report where the top fix locus lands.
//!
//! cargo run --example sensitivity

use filo::baselines::rank_position;
use filo::fixtures::{goodweather_pair, GPS_REQUEST_LOCATION};
use filo::rank::{analyze_detected, AnalysisConfig};
use filo::sib::detect_sibs;
use filo::trace::KeyPolicy;

fn main() -> filo::Result<()> {
    let (baseline, failure) = goodweather_pair();
    let detected = detect_sibs(&baseline, &failure, KeyPolicy::Full);
    println!("{:>5}  {:>4}  {:>6}", "k1", "rank", "susp");
    for step in 0..=20 {
        let k1 = step as f64 * 0.05;
        let config = AnalysisConfig {
            k1,
            k2: 1.0 - k1,
            ..AnalysisConfig::default()
        };
        let report = analyze_detected(&detected, &config)?;
        let pos = rank_position(&report, GPS_REQUEST_LOCATION);
        let susp = pos.map(|p| report.ranking[p - 1].susp).unwrap_or(f64::NAN);
        println!(
            "{k1:>5.2}  {:>4}  {susp:>6.3}",
            pos.map_or("-".into(), |p| p.to_string())
        );
    }
    Ok(())
}
