//! Runs every technique over a scenario set and aggregates rank positions.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generator::{generate_pair, AppShape, FaultKind, FaultScenario, GeneratedPair};
use super::metrics::{completeness, soundness, Soundness};
use crate::baselines::{naive_rank, ochiai_rank, rank_position, BaselineRanking};
use crate::rank::{analyze_detected, AnalysisConfig, FixLocusReport};
use crate::sib::detect_sibs;
use crate::trace::write_trace;
use crate::{Error, Result};

/// Scenario list read from `bench.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchManifest {
    pub scenarios: Vec<FaultScenario>,
}

impl BenchManifest {
    /// `localizable` scenarios cycling through the localizable fault kinds,
    /// followed by `missing_callback` ones, all without noise.
    pub fn standard(localizable: usize, missing_callback: usize, seed: u64) -> Self {
        let kinds = [
            FaultKind::PermissionEarlyReturn,
            FaultKind::ChangedReturnSemantics,
            FaultKind::CrashOnStartup,
        ];
        let mut scenarios = Vec::with_capacity(localizable + missing_callback);
        for i in 0..localizable + missing_callback {
            let kind = if i < localizable {
                kinds[i % kinds.len()]
            } else {
                FaultKind::MissingCallback
            };
            let shape = AppShape {
                depth: 2 + i % 3,
                fan_out: 2 + i % 2,
                callbacks: 3 + i % 4,
                episodes: 8 + i % 7,
                seed: seed.wrapping_add(i as u64),
                ..AppShape::default()
            };
            scenarios.push(FaultScenario::new(format!("s{:03}-{}", i, kind.as_str()), kind, shape));
        }
        BenchManifest { scenarios }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchConfig {
    pub analysis: AnalysisConfig,
    /// Rank with Ochiai whenever a scenario generates a coverage matrix.
    pub coverage: bool,
    /// Per-scenario artifacts are written below this directory.
    pub artifacts: Option<PathBuf>,
}

/// Counts of scenarios whose fix locus ranks within 1, 5 and 10.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TopK {
    pub top1: usize,
    pub top5: usize,
    pub top10: usize,
    pub not_in_ranking: usize,
}

impl TopK {
    pub fn from_positions(positions: impl IntoIterator<Item = Option<usize>>) -> TopK {
        let mut t = TopK::default();
        for p in positions {
            match p {
                Some(p) => {
                    t.top1 += (p <= 1) as usize;
                    t.top5 += (p <= 5) as usize;
                    t.top10 += (p <= 10) as usize;
                }
                None => t.not_in_ranking += 1,
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub id: String,
    pub fault_kind: FaultKind,
    pub ground_truth_method: String,
    pub filo: Option<usize>,
    pub naive: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ochiai: Option<usize>,
    pub sibs: usize,
    pub soundness: Soundness,
    pub completeness: Option<f64>,
    /// Why FILO produced no ranking, when it did not.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub scenarios: Vec<ScenarioResult>,
    pub filo: TopK,
    pub naive: TopK,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ochiai: Option<TopK>,
}

impl BenchResult {
    /// Top-k table with one column per technique.
    pub fn render_table(&self) -> String {
        let mut cols: Vec<(&str, TopK)> = vec![("FILO", self.filo), ("Naive", self.naive)];
        if let Some(o) = self.ochiai {
            cols.push(("Ochiai", o));
        }
        let mut out = String::new();
        let _ = write!(out, "{:<20}", "");
        for (name, _) in &cols {
            let _ = write!(out, "{name:>8}");
        }
        out.push('\n');
        type Row = (&'static str, fn(&TopK) -> usize);
        let rows: [Row; 4] = [
            ("Top-1", |t| t.top1),
            ("Top-5", |t| t.top5),
            ("Top-10", |t| t.top10),
            ("Not in the ranking", |t| t.not_in_ranking),
        ];
        for (label, get) in rows {
            let _ = write!(out, "{label:<20}");
            for (_, t) in &cols {
                let _ = write!(out, "{:>8}", get(t));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "Scenarios: {}", self.scenarios.len());
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bench result serializes")
    }
}

fn check_ids(scenarios: &[FaultScenario]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in scenarios {
        let ok = !s.id.is_empty()
            && s.id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
            && s.id != "."
            && s.id != "..";
        if !ok {
            return Err(Error::Parameter(format!(
                "scenario id {:?} must be non-empty and use only [A-Za-z0-9._-]",
                s.id
            )));
        }
        if !seen.insert(s.id.as_str()) {
            return Err(Error::Parameter(format!("duplicate scenario id {:?}", s.id)));
        }
    }
    Ok(())
}

struct Outputs {
    pair: GeneratedPair,
    filo: std::result::Result<FixLocusReport, String>,
    naive: BaselineRanking,
    ochiai: Option<BaselineRanking>,
}

fn run_one(scenario: &FaultScenario, config: &BenchConfig) -> Result<(ScenarioResult, Outputs)> {
    let pair = generate_pair(scenario)?;
    let analysis = &config.analysis;
    let detected = detect_sibs(&pair.baseline, &pair.failure, analysis.key_policy);
    let filo = match analyze_detected(&detected, analysis) {
        Ok(r) => Ok(r),
        Err(Error::NothingToLocalize) => Err(Error::NothingToLocalize.to_string()),
        Err(e) => return Err(e),
    };
    let naive = naive_rank(&pair.baseline, &pair.failure, analysis.key_policy);
    let ochiai = match (&pair.coverage, config.coverage) {
        (Some(m), true) => Some(ochiai_rank(m)?),
        _ => None,
    };
    let target = pair.truth.ground_truth_method().to_string();
    let (filo_pos, note) = match &filo {
        Ok(r) if r.is_empty() => (None, Some("no differences detected".to_string())),
        Ok(r) => (rank_position(r, &target), None),
        Err(e) => (None, Some(e.clone())),
    };
    let result = ScenarioResult {
        id: scenario.id.clone(),
        fault_kind: scenario.fault_kind,
        ground_truth_method: target.clone(),
        filo: filo_pos,
        naive: rank_position(&naive, &target),
        ochiai: ochiai.as_ref().and_then(|o| rank_position(o, &target)),
        sibs: detected.sibs.len(),
        soundness: soundness(&detected, &pair.truth, analysis.min_weight),
        completeness: completeness(&detected, &pair.truth),
        note,
    };
    Ok((
        result,
        Outputs {
            pair,
            filo,
            naive,
            ochiai,
        },
    ))
}

fn write_scenario(dir: &Path, outputs: &Outputs) -> Result<()> {
    fs::create_dir_all(dir)?;
    let write_json = |name: &str, text: String| fs::write(dir.join(name), text + "\n");
    write_trace(&outputs.pair.baseline, fs::File::create(dir.join("baseline.jsonl"))?)?;
    write_trace(&outputs.pair.failure, fs::File::create(dir.join("failure.jsonl"))?)?;
    write_json("truth.json", serde_json::to_string_pretty(&outputs.pair.truth)?)?;
    if let Some(m) = &outputs.pair.coverage {
        m.write_csv(fs::File::create(dir.join("coverage.csv"))?)?;
    }
    match &outputs.filo {
        Ok(r) => write_json("filo.json", serde_json::to_string_pretty(&r.to_json())?)?,
        Err(e) => write_json(
            "filo.json",
            serde_json::to_string_pretty(&serde_json::json!({ "error": e }))?,
        )?,
    }
    write_json("naive.json", serde_json::to_string_pretty(&outputs.naive)?)?;
    if let Some(o) = &outputs.ochiai {
        write_json("ochiai.json", serde_json::to_string_pretty(o)?)?;
    }
    Ok(())
}

/// Runs all techniques on every scenario, in parallel. Results keep the
/// input order.
pub fn run_bench(scenarios: &[FaultScenario], config: &BenchConfig) -> Result<BenchResult> {
    if scenarios.is_empty() {
        return Err(Error::Parameter("bench needs at least one scenario".into()));
    }
    check_ids(scenarios)?;
    let rows = scenarios
        .par_iter()
        .map(|s| {
            let (row, outputs) = run_one(s, config)?;
            if let Some(root) = &config.artifacts {
                write_scenario(&root.join(&s.id), &outputs)?;
            }
            log::debug!(
                "{}: filo={:?} naive={:?} ochiai={:?}",
                row.id,
                row.filo,
                row.naive,
                row.ochiai
            );
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let result = BenchResult {
        filo: TopK::from_positions(rows.iter().map(|r| r.filo)),
        naive: TopK::from_positions(rows.iter().map(|r| r.naive)),
        ochiai: config
            .coverage
            .then(|| TopK::from_positions(rows.iter().map(|r| r.ochiai))),
        scenarios: rows,
    };
    if let Some(root) = &config.artifacts {
        write_artifacts(&result, root)?;
    }
    Ok(result)
}

/// Writes `bench_result.json` and `summary.txt` into `dir`.
pub fn write_artifacts(result: &BenchResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("bench_result.json"), result.to_json() + "\n")?;
    fs::write(dir.join("summary.txt"), result.render_table())?;
    Ok(())
}
