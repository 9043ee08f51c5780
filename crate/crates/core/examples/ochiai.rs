//! Ochiai over a small hand-written coverage matrix, read from CSV.
//!
//! cargo run --example ochiai -- [coverage.csv]

use filo::baselines::{ochiai_rank, CoverageMatrix};

const SAMPLE: &str = "\
outcome,org.app.Main.onCreate,org.app.Main.refresh,org.app.Gps.request,org.app.Settings.save
fail,1,1,1,0
fail,1,0,1,0
pass,1,1,0,1
pass,1,0,0,1
pass,1,1,0,0
";

fn main() -> filo::Result<()> {
    let matrix = match std::env::args().nth(1) {
        Some(path) => CoverageMatrix::read_csv_file(path.as_ref())?,
        None => CoverageMatrix::read_csv(SAMPLE.as_bytes())?,
    };
    println!("{} entities, {} tests", matrix.entities().len(), matrix.tests().len());
    let ranking = ochiai_rank(&matrix)?;
    print!("{}", ranking.render_text(None));
    Ok(())
}
