//! Suspiciousness scoring of the failure call tree and the fix-locus report.
//!
//! `Susp(m) = k1 * ImpBlocks(m) + k2 * Depth(m)` for every node; each method
//! keeps its best-scoring occurrence and framework methods are dropped from
//! the final ranking.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sib::{detect_sibs, filter_sibs, DiffResult, SibStats};
use crate::trace::{FrameworkPrefixes, KeyPolicy, MethodId, Origin, Trace, DEFAULT_ROOT};
use crate::tree::{build_failure_call_tree, depth_score, imp_blocks, FailureCallTree, NodeId, TreeStats};

pub const DEFAULT_K1: f64 = 0.25;
pub const DEFAULT_K2: f64 = 0.75;
pub const DEFAULT_MIN_WEIGHT: usize = 2;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

pub fn check_weights(k1: f64, k2: f64) -> Result<()> {
    if !(k1.is_finite() && k2.is_finite()) || k1 < 0.0 || k2 < 0.0 {
        return Err(Error::Parameter(format!(
            "k1 and k2 must be non-negative (got {k1}, {k2})"
        )));
    }
    if (k1 + k2 - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::Parameter(format!("k1 + k2 must equal 1 (got {})", k1 + k2)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodScore {
    pub method: MethodId,
    pub susp: f64,
    pub imp_blocks: f64,
    pub depth_score: f64,
    /// The occurrence of the method that produced the score.
    pub node: NodeId,
    pub depth: usize,
    /// Indices into [`FixLocusReport::blocks`] reachable from `node`.
    pub evidence: Vec<usize>,
}

impl MethodScore {
    /// Descending suspiciousness, then more reachable weight, then shallower,
    /// then method name.
    fn order(&self, other: &Self) -> Ordering {
        other
            .susp
            .total_cmp(&self.susp)
            .then_with(|| other.imp_blocks.total_cmp(&self.imp_blocks))
            .then_with(|| self.depth.cmp(&other.depth))
            .then_with(|| self.method.name().cmp(other.method.name()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportParameters {
    pub k1: f64,
    pub k2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_weight: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key_policy: Option<KeyPolicy>,
}

#[derive(Debug, Clone)]
pub struct FixLocusReport {
    pub ranking: Vec<MethodScore>,
    pub parameters: ReportParameters,
    pub tree_stats: TreeStats,
    /// Statistics over all detected blocks, before weight filtering.
    pub sib_stats: Option<SibStats>,
    pub blocks: Vec<crate::sib::SuspiciousInvocationBlock>,
}

impl FixLocusReport {
    fn empty(parameters: ReportParameters) -> Self {
        Self {
            ranking: Vec::new(),
            parameters,
            tree_stats: TreeStats::default(),
            sib_stats: None,
            blocks: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    pub fn to_json(&self) -> ReportJson<'_> {
        let policy = self.parameters.key_policy.unwrap_or_default();
        ReportJson {
            technique: "filo",
            parameters: &self.parameters,
            tree_stats: self.tree_stats,
            sib_stats: self.sib_stats.as_ref(),
            ranking: self
                .ranking
                .iter()
                .map(|s| RankedJson {
                    method: s.method.name().to_string(),
                    enclosing_class: s.method.enclosing_class().map(str::to_string),
                    susp: s.susp,
                    imp_blocks: s.imp_blocks,
                    depth: s.depth_score,
                    evidence: s
                        .evidence
                        .iter()
                        .map(|&b| {
                            let block = &self.blocks[b];
                            EvidenceJson {
                                representative: block
                                    .representative
                                    .as_ref()
                                    .map(|r| r.method.to_string())
                                    .unwrap_or_default(),
                                weight: block.weight,
                                start_seq: block.start_seq,
                                end_seq: block.end_seq,
                                preview: block.preview(policy),
                            }
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Two-column table: method name and suspiciousness to two decimals.
    pub fn render_text(&self, top: Option<usize>) -> String {
        let shown = &self.ranking[..top.unwrap_or(usize::MAX).min(self.ranking.len())];
        let width = shown
            .iter()
            .map(|s| s.method.name().len())
            .max()
            .unwrap_or(0)
            .max("MethodName".len());
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  Susp", "MethodName");
        for s in shown {
            let _ = writeln!(out, "{:<width$}  {:.2}", s.method.name(), s.susp);
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct ReportJson<'a> {
    pub technique: &'static str,
    pub parameters: &'a ReportParameters,
    pub tree_stats: TreeStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sib_stats: Option<&'a SibStats>,
    pub ranking: Vec<RankedJson>,
}

#[derive(Debug, Serialize)]
pub struct RankedJson {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enclosing_class: Option<String>,
    pub susp: f64,
    pub imp_blocks: f64,
    pub depth: f64,
    pub evidence: Vec<EvidenceJson>,
}

#[derive(Debug, Serialize)]
pub struct EvidenceJson {
    pub representative: String,
    pub weight: usize,
    pub start_seq: u64,
    pub end_seq: u64,
    pub preview: Vec<String>,
}

/// Scores every node of `tree` and ranks application methods.
pub fn rank(
    tree: &FailureCallTree,
    k1: f64,
    k2: f64,
    framework_prefixes: &FrameworkPrefixes,
) -> Result<FixLocusReport> {
    check_weights(k1, k2)?;

    let mut best: HashMap<&str, MethodScore> = HashMap::new();
    for (id, node) in tree.nodes().iter().enumerate() {
        let imp = imp_blocks(tree, id);
        let depth = depth_score(tree, id)?;
        let score = MethodScore {
            method: node.method.clone(),
            susp: (k1 * imp + k2 * depth).clamp(0.0, 1.0),
            imp_blocks: imp,
            depth_score: depth,
            node: id,
            depth: node.depth,
            evidence: Vec::new(),
        };
        match best.get(node.method.name()) {
            Some(prev) if prev.order(&score) != Ordering::Greater => {}
            _ => {
                best.insert(node.method.name(), score);
            }
        }
    }

    let mut ranking: Vec<MethodScore> = best
        .into_values()
        .filter(|s| framework_prefixes.classify(s.method.name()) == Origin::Application)
        .collect();
    ranking.sort_by(MethodScore::order);
    for s in &mut ranking {
        s.evidence = tree.reachable_blocks(s.node);
    }

    Ok(FixLocusReport {
        ranking,
        parameters: ReportParameters {
            k1,
            k2,
            min_weight: None,
            key_policy: None,
        },
        tree_stats: tree.stats(),
        sib_stats: None,
        blocks: tree.blocks().to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub key_policy: KeyPolicy,
    pub min_weight: usize,
    pub k1: f64,
    pub k2: f64,
    pub framework_prefixes: FrameworkPrefixes,
    pub root_name: String,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            key_policy: KeyPolicy::Full,
            min_weight: DEFAULT_MIN_WEIGHT,
            k1: DEFAULT_K1,
            k2: DEFAULT_K2,
            framework_prefixes: FrameworkPrefixes::default(),
            root_name: DEFAULT_ROOT.to_string(),
        }
    }
}

/// Diff, filter, tree construction and ranking in one call.
///
/// Traces without differences give an empty ranking. Differences whose
/// blocks all lack stack snapshots are an error.
pub fn analyze(baseline: &Trace, failure: &Trace, config: &AnalysisConfig) -> Result<FixLocusReport> {
    check_weights(config.k1, config.k2)?;
    let detected = detect_sibs(baseline, failure, config.key_policy);
    analyze_detected(&detected, config)
}

/// [`analyze`] on blocks that were already detected.
pub fn analyze_detected(detected: &DiffResult, config: &AnalysisConfig) -> Result<FixLocusReport> {
    check_weights(config.k1, config.k2)?;
    let parameters = ReportParameters {
        k1: config.k1,
        k2: config.k2,
        min_weight: Some(config.min_weight),
        key_policy: Some(config.key_policy),
    };

    let retained = filter_sibs(detected, config.min_weight)?;
    if retained.sibs.is_empty() {
        let mut report = FixLocusReport::empty(parameters);
        report.sib_stats = Some(detected.stats.clone());
        return Ok(report);
    }

    let rankable: Vec<_> = retained.sibs.into_iter().filter(|s| s.is_rankable()).collect();
    let tree = build_failure_call_tree(&rankable, &config.root_name)?;
    let mut report = rank(&tree, config.k1, config.k2, &config.framework_prefixes)?;
    report.parameters = parameters;
    report.sib_stats = Some(detected.stats.clone());
    Ok(report)
}
