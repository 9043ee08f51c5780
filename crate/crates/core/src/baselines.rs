//! Comparison techniques: naive inspection of trace differences and Ochiai
//! spectrum-based fault localization.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::rank::FixLocusReport;
use crate::sib::detect_sibs;
use crate::trace::{KeyPolicy, Origin, Trace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    Naive,
    Ochiai,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    #[default]
    Method,
    Statement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEntity {
    #[serde(rename = "method")]
    pub entity: String,
    #[serde(rename = "susp")]
    pub score: f64,
}

/// Ranking produced by a baseline technique. Entries are sorted by score
/// descending, ties by entity id ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineRanking {
    pub technique: Technique,
    pub granularity: Granularity,
    pub ranking: Vec<RankedEntity>,
}

impl BaselineRanking {
    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn render_text(&self, top: Option<usize>) -> String {
        let shown = &self.ranking[..top.unwrap_or(usize::MAX).min(self.ranking.len())];
        let width = shown
            .iter()
            .map(|e| e.entity.len())
            .max()
            .unwrap_or(0)
            .max("MethodName".len());
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  Score", "MethodName");
        for e in shown {
            let _ = writeln!(out, "{:<width$}  {:.4}", e.entity, e.score);
        }
        out
    }
}

/// Application methods touched by the trace differences, in order of first
/// occurrence. Scores are `1/rank`; only the order carries meaning.
pub fn naive_rank(baseline: &Trace, failure: &Trace, key_policy: KeyPolicy) -> BaselineRanking {
    let diff = detect_sibs(baseline, failure, key_policy);
    let mut events: Vec<_> = diff.sibs.iter().flat_map(|b| b.events.iter()).collect();
    events.sort_by_key(|e| e.seq());
    let mut seen = HashSet::new();
    let mut ranking = Vec::new();
    for e in events {
        let m = e.method();
        if m.origin() == Origin::Application && seen.insert(m.name()) {
            ranking.push(RankedEntity {
                entity: m.name().to_string(),
                score: 1.0 / (ranking.len() + 1) as f64,
            });
        }
    }
    BaselineRanking {
        technique: Technique::Naive,
        granularity: Granularity::Method,
        ranking,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestRecord {
    pub outcome: Outcome,
    pub covered: BTreeSet<usize>,
}

/// Per-test coverage of program entities (methods or statements).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMatrix {
    entities: Vec<String>,
    tests: Vec<TestRecord>,
}

impl CoverageMatrix {
    pub fn new(entities: Vec<String>, tests: Vec<TestRecord>) -> Result<Self> {
        let mut ids = HashSet::new();
        for e in &entities {
            if !ids.insert(e.as_str()) {
                return Err(Error::Coverage(format!("duplicate entity id {e:?}")));
            }
        }
        for (i, t) in tests.iter().enumerate() {
            if let Some(&bad) = t.covered.iter().find(|&&c| c >= entities.len()) {
                return Err(Error::Coverage(format!(
                    "test {i} covers entity index {bad} out of range"
                )));
            }
        }
        if !tests.is_empty() && !tests.iter().any(|t| t.outcome == Outcome::Fail) {
            return Err(Error::Coverage("no failing test".into()));
        }
        Ok(CoverageMatrix { entities, tests })
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn tests(&self) -> &[TestRecord] {
        &self.tests
    }

    /// Reads the CSV form: header `outcome,<entity ids...>`, then one row per
    /// test with `pass` or `fail` followed by 0/1 flags.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let header = reader.headers().map_err(|e| Error::Coverage(e.to_string()))?.clone();
        if header.get(0) != Some("outcome") {
            return Err(Error::Coverage("first header column must be `outcome`".into()));
        }
        let entities: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut tests = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Coverage(format!("line {line}: {e}")))?;
            if row.len() != entities.len() + 1 {
                return Err(Error::Coverage(format!(
                    "line {line}: expected {} columns, found {}",
                    entities.len() + 1,
                    row.len()
                )));
            }
            let outcome = match &row[0] {
                "pass" => Outcome::Pass,
                "fail" => Outcome::Fail,
                other => return Err(Error::Coverage(format!("line {line}: unknown outcome {other:?}"))),
            };
            let mut covered = BTreeSet::new();
            for (j, flag) in row.iter().skip(1).enumerate() {
                match flag {
                    "1" => {
                        covered.insert(j);
                    }
                    "0" => {}
                    other => {
                        return Err(Error::Coverage(format!(
                            "line {line}: coverage flag {other:?} is not 0 or 1"
                        )))
                    }
                }
            }
            tests.push(TestRecord { outcome, covered });
        }
        CoverageMatrix::new(entities, tests)
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Coverage(e.to_string());
        let mut header = vec!["outcome"];
        header.extend(self.entities.iter().map(String::as_str));
        writer.write_record(&header).map_err(io)?;
        for t in &self.tests {
            let mut row = vec![match t.outcome {
                Outcome::Pass => "pass",
                Outcome::Fail => "fail",
            }];
            row.extend((0..self.entities.len()).map(|j| if t.covered.contains(&j) { "1" } else { "0" }));
            writer.write_record(&row).map_err(io)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Ochiai score from the failing/passing coverage counts of one entity.
pub fn ochiai(ef: usize, ep: usize, nf: usize) -> f64 {
    if ef == 0 {
        return 0.0;
    }
    ef as f64 / (((ef + nf) * (ef + ep)) as f64).sqrt()
}

pub fn ochiai_rank(matrix: &CoverageMatrix) -> Result<BaselineRanking> {
    ochiai_rank_with(matrix, Granularity::Method)
}

pub fn ochiai_rank_with(matrix: &CoverageMatrix, granularity: Granularity) -> Result<BaselineRanking> {
    if matrix.tests.is_empty() {
        return Err(Error::Parameter("coverage matrix has no tests".into()));
    }
    let n = matrix.entities.len();
    let (mut ef, mut ep) = (vec![0usize; n], vec![0usize; n]);
    let mut failing = 0;
    for t in &matrix.tests {
        let counts = match t.outcome {
            Outcome::Fail => {
                failing += 1;
                &mut ef
            }
            Outcome::Pass => &mut ep,
        };
        for &c in &t.covered {
            counts[c] += 1;
        }
    }
    let mut ranking: Vec<RankedEntity> = (0..n)
        .map(|i| RankedEntity {
            entity: matrix.entities[i].clone(),
            score: ochiai(ef[i], ep[i], failing - ef[i]),
        })
        .collect();
    ranking.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.entity.cmp(&b.entity)));
    Ok(BaselineRanking {
        technique: Technique::Ochiai,
        granularity,
        ranking,
    })
}

/// Anything that orders entity ids.
pub trait Ranked {
    fn ranked_ids(&self) -> Vec<&str>;
}

impl Ranked for BaselineRanking {
    fn ranked_ids(&self) -> Vec<&str> {
        self.ranking.iter().map(|e| e.entity.as_str()).collect()
    }
}

impl Ranked for FixLocusReport {
    fn ranked_ids(&self) -> Vec<&str> {
        self.ranking.iter().map(|s| s.method.name()).collect()
    }
}

/// 1-based position of `target`, or `None` when it is not ranked.
pub fn rank_position<R: Ranked + ?Sized>(ranking: &R, target: &str) -> Option<usize> {
    ranking.ranked_ids().iter().position(|id| *id == target).map(|i| i + 1)
}

pub fn rank_positions<R: Ranked + ?Sized, S: AsRef<str>>(ranking: &R, targets: &[S]) -> Vec<Option<usize>> {
    let ids = ranking.ranked_ids();
    targets
        .iter()
        .map(|t| ids.iter().position(|id| *id == t.as_ref()).map(|i| i + 1))
        .collect()
}

/// Renders positions as `1,2`; absent targets print as `-`.
pub fn format_positions(positions: &[Option<usize>]) -> String {
    if positions.is_empty() {
        return "-".into();
    }
    positions
        .iter()
        .map(|p| p.map_or_else(|| "-".to_string(), |p| p.to_string()))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{FrameworkPrefixes, ReturnValue, TraceBuilder, TraceLabel};

    fn test(outcome: Outcome, covered: &[usize]) -> TestRecord {
        TestRecord {
            outcome,
            covered: covered.iter().copied().collect(),
        }
    }

    #[test]
    fn ochiai_formula() {
        assert_eq!(ochiai(1, 0, 0), 1.0);
        assert!((ochiai(1, 0, 1) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(ochiai(0, 3, 1), 0.0);
        assert_eq!(ochiai(0, 0, 1), 0.0);
    }

    #[test]
    fn ochiai_ranks_and_breaks_ties_by_id() {
        let m = CoverageMatrix::new(
            vec!["c".into(), "b".into(), "a".into(), "d".into()],
            vec![
                test(Outcome::Fail, &[0, 1, 2]),
                test(Outcome::Pass, &[0]),
                test(Outcome::Pass, &[3]),
            ],
        )
        .unwrap();
        let r = ochiai_rank(&m).unwrap();
        let ids: Vec<_> = r.ranked_ids();
        assert_eq!(ids, ["a", "b", "c", "d"]);
        assert_eq!(r.ranking[0].score, 1.0);
        assert_eq!(r.ranking[3].score, 0.0);
    }

    #[test]
    fn ochiai_needs_tests() {
        let m = CoverageMatrix::new(vec!["a".into()], vec![]).unwrap();
        assert!(matches!(ochiai_rank(&m), Err(Error::Parameter(_))));
    }

    #[test]
    fn matrix_rejects_bad_input() {
        assert!(CoverageMatrix::new(vec!["a".into(), "a".into()], vec![test(Outcome::Fail, &[])]).is_err());
        assert!(CoverageMatrix::new(vec!["a".into()], vec![test(Outcome::Pass, &[0])]).is_err());
        assert!(CoverageMatrix::new(vec!["a".into()], vec![test(Outcome::Fail, &[1])]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let text = "outcome,A.m,B.n\nfail,1,0\npass,1,1\n";
        let m = CoverageMatrix::read_csv(text.as_bytes()).unwrap();
        assert_eq!(m.entities(), ["A.m", "B.n"]);
        assert_eq!(m.tests()[1].covered.len(), 2);
        let mut out = Vec::new();
        m.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let err = CoverageMatrix::read_csv("outcome,A.m\nfail,1\nmaybe,0\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(CoverageMatrix::read_csv("outcome,A.m\nfail,2\n".as_bytes()).is_err());
        assert!(CoverageMatrix::read_csv("result,A.m\nfail,1\n".as_bytes()).is_err());
    }

    fn trace(label: TraceLabel, calls: &[&[&str]]) -> Trace {
        let mut b = TraceBuilder::new(FrameworkPrefixes::default());
        for stack in calls {
            b.call(stack, None::<ReturnValue>).unwrap();
        }
        b.finish(label)
    }

    #[test]
    fn naive_orders_by_first_occurrence() {
        let base = trace(TraceLabel::Baseline, &[&["android.R.main", "org.x.A.keep"]]);
        let fail = trace(
            TraceLabel::Failure,
            &[
                &["android.R.main", "org.x.Y.run"],
                &["android.R.main", "org.x.A.keep"],
                &["android.R.main", "org.x.X.run"],
                &["android.R.main", "org.x.Y.run"],
            ],
        );
        let r = naive_rank(&base, &fail, KeyPolicy::Full);
        assert_eq!(r.ranked_ids(), ["org.x.Y.run", "org.x.X.run"]);
        assert_eq!(r.ranking[1].score, 0.5);
    }

    #[test]
    fn naive_skips_framework_and_identical() {
        let base = trace(TraceLabel::Baseline, &[&["android.R.main", "android.a.B.c"]]);
        let fail = trace(TraceLabel::Failure, &[&["android.R.main", "android.a.B.d"]]);
        assert!(naive_rank(&base, &fail, KeyPolicy::Full).is_empty());
        assert!(naive_rank(&base, &base, KeyPolicy::Full).is_empty());
    }

    #[test]
    fn positions() {
        let r = BaselineRanking {
            technique: Technique::Naive,
            granularity: Granularity::Method,
            ranking: vec![
                RankedEntity {
                    entity: "a".into(),
                    score: 1.0,
                },
                RankedEntity {
                    entity: "b".into(),
                    score: 0.5,
                },
            ],
        };
        assert_eq!(rank_position(&r, "a"), Some(1));
        assert_eq!(rank_position(&r, "z"), None);
        assert_eq!(format_positions(&rank_positions(&r, &["a", "b"])), "1,2");
        assert_eq!(format_positions(&rank_positions(&r, &["z"])), "-");
    }
}
