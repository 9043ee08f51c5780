//! Full analysis of the GoodWeather-shaped pair: ranking table plus the
//! JSON report with evidence.
//!
//! cargo run --example analyze_goodweather

use filo::baselines::{format_positions, rank_positions};
use filo::fixtures::{goodweather_pair, GPS_REQUEST_LOCATION, ON_OPTIONS_ITEM_SELECTED};
use filo::rank::{analyze, AnalysisConfig};

fn main() -> filo::Result<()> {
    let (baseline, failure) = goodweather_pair();
    let report = analyze(&baseline, &failure, &AnalysisConfig::default())?;

    print!("{}", report.render_text(None));
    let targets = [GPS_REQUEST_LOCATION, ON_OPTIONS_ITEM_SELECTED];
    println!("fix loci at {}", format_positions(&rank_positions(&report, &targets)));
    println!();
    println!("{}", serde_json::to_string_pretty(&report.to_json())?);
    Ok(())
}
