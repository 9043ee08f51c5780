//! Suspicious invocation blocks: contiguous runs of failure-trace events that
//! have no counterpart in the baseline trace.

use std::collections::{BTreeMap, HashMap};

use log::warn;
use serde::Serialize;

use crate::diff::align;
use crate::error::{Error, Result};
use crate::trace::{diff_key, KeyPolicy, MethodId, StackSnapshot, Trace, TraceEvent};

/// Number of event keys shown per block in dumps and report evidence.
pub const PREVIEW_LEN: usize = 10;

/// The first boundary call of a block, which stands for the whole block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representative {
    pub method: MethodId,
    pub seq: u64,
    pub stack: Option<StackSnapshot>,
}

/// Which trace a block's events were taken from. Blocks come from the
/// failure trace except when the failure trace is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSource {
    Failure,
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuspiciousInvocationBlock {
    pub events: Vec<TraceEvent>,
    pub start_seq: u64,
    pub end_seq: u64,
    /// Number of begin events, i.e. boundary calls, in the block.
    pub weight: usize,
    pub representative: Option<Representative>,
    pub source: BlockSource,
}

impl SuspiciousInvocationBlock {
    fn from_events(events: Vec<TraceEvent>, source: BlockSource) -> Self {
        let start_seq = events.first().map_or(0, TraceEvent::seq);
        let end_seq = events.last().map_or(0, TraceEvent::seq);
        let weight = events.iter().filter(|e| e.is_begin()).count();
        let representative = events.iter().find(|e| e.is_begin()).map(|e| Representative {
            method: e.method().clone(),
            seq: e.seq(),
            stack: e.stack().cloned(),
        });
        Self {
            events,
            start_seq,
            end_seq,
            weight,
            representative,
            source,
        }
    }

    /// A block can be placed in the failure call tree only if its first
    /// boundary call carries a stack snapshot.
    pub fn is_rankable(&self) -> bool {
        self.representative.as_ref().is_some_and(|r| r.stack.is_some())
    }

    pub fn preview(&self, policy: KeyPolicy) -> Vec<String> {
        self.events
            .iter()
            .take(PREVIEW_LEN)
            .map(|e| diff_key(e, policy))
            .collect()
    }

    pub fn keys(&self, policy: KeyPolicy) -> impl Iterator<Item = String> + '_ {
        self.events.iter().map(move |e| diff_key(e, policy))
    }
}

/// Contiguous baseline events with no counterpart in the failure trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineOnlyBlock {
    pub events: Vec<TraceEvent>,
    pub start_seq: u64,
    pub end_seq: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SibStats {
    pub total: usize,
    pub by_weight: BTreeMap<usize, usize>,
    /// Blocks without a begin event or whose first begin event has no stack.
    pub unrankable: usize,
}

impl SibStats {
    pub fn count_with_weight(&self, weight: usize) -> usize {
        self.by_weight.get(&weight).copied().unwrap_or(0)
    }

    pub fn count_heavier_than(&self, k: usize) -> usize {
        self.by_weight.range(k + 1..).map(|(_, n)| n).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffResult {
    pub sibs: Vec<SuspiciousInvocationBlock>,
    pub baseline_only_blocks: Vec<BaselineOnlyBlock>,
    pub key_policy: KeyPolicy,
    pub stats: SibStats,
}

impl DiffResult {
    fn new(
        sibs: Vec<SuspiciousInvocationBlock>,
        baseline_only_blocks: Vec<BaselineOnlyBlock>,
        key_policy: KeyPolicy,
    ) -> Self {
        let mut result = Self {
            sibs,
            baseline_only_blocks,
            key_policy,
            stats: SibStats::default(),
        };
        result.stats = sib_stats(&result);
        result
    }

    pub fn weights(&self) -> Vec<usize> {
        self.sibs.iter().map(|s| s.weight).collect()
    }

    pub fn dump(&self) -> SibDump {
        SibDump {
            key_policy: self.key_policy,
            stats: self.stats.clone(),
            sibs: self
                .sibs
                .iter()
                .map(|s| SibDumpEntry {
                    start_seq: s.start_seq,
                    end_seq: s.end_seq,
                    weight: s.weight,
                    source: s.source,
                    representative: s.representative.as_ref().map(|r| r.method.to_string()),
                    first_keys: s.preview(self.key_policy),
                })
                .collect(),
            baseline_only_blocks: self
                .baseline_only_blocks
                .iter()
                .map(|b| BlockBounds {
                    start_seq: b.start_seq,
                    end_seq: b.end_seq,
                    len: b.events.len(),
                })
                .collect(),
        }
    }
}

/// JSON dump of a [`DiffResult`].
#[derive(Debug, Clone, Serialize)]
pub struct SibDump {
    pub key_policy: KeyPolicy,
    pub stats: SibStats,
    pub sibs: Vec<SibDumpEntry>,
    pub baseline_only_blocks: Vec<BlockBounds>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SibDumpEntry {
    pub start_seq: u64,
    pub end_seq: u64,
    pub weight: usize,
    pub source: BlockSource,
    pub representative: Option<String>,
    pub first_keys: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockBounds {
    pub start_seq: u64,
    pub end_seq: u64,
    pub len: usize,
}

fn tokenize(baseline: &Trace, failure: &Trace, policy: KeyPolicy) -> (Vec<u32>, Vec<u32>) {
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut intern = |e: &TraceEvent| {
        let next = ids.len() as u32;
        *ids.entry(diff_key(e, policy)).or_insert(next)
    };
    let old = baseline.events().iter().map(&mut intern).collect();
    let new = failure.events().iter().map(&mut intern).collect();
    (old, new)
}

/// Diffs `failure` against `baseline` and groups the failure-side changes
/// into weighted blocks.
///
/// An empty failure trace against a non-empty baseline (the app died before
/// recording anything) yields the whole baseline as a single block.
pub fn detect_sibs(baseline: &Trace, failure: &Trace, key_policy: KeyPolicy) -> DiffResult {
    if failure.is_empty() && !baseline.is_empty() {
        let whole = SuspiciousInvocationBlock::from_events(baseline.events().to_vec(), BlockSource::Baseline);
        return finish(DiffResult::new(vec![whole], Vec::new(), key_policy));
    }

    let (old, new) = tokenize(baseline, failure, key_policy);
    let alignment = align(&old, &new);

    let mut sibs = Vec::new();
    let mut deletions = Vec::new();
    for hunk in alignment.hunks {
        if !hunk.new.is_empty() {
            sibs.push(SuspiciousInvocationBlock::from_events(
                failure.events()[hunk.new].to_vec(),
                BlockSource::Failure,
            ));
        }
        if !hunk.old.is_empty() {
            let events = baseline.events()[hunk.old].to_vec();
            deletions.push(BaselineOnlyBlock {
                start_seq: events[0].seq(),
                end_seq: events[events.len() - 1].seq(),
                events,
            });
        }
    }
    finish(DiffResult::new(sibs, deletions, key_policy))
}

fn finish(result: DiffResult) -> DiffResult {
    for sib in result.sibs.iter().filter(|s| !s.is_rankable()) {
        match &sib.representative {
            None => warn!(
                "block seq {}..={} has no begin event; excluded from ranking",
                sib.start_seq, sib.end_seq
            ),
            Some(r) => warn!(
                "block seq {}..={}: representative `{}` has no stack snapshot; excluded from ranking",
                sib.start_seq, sib.end_seq, r.method
            ),
        }
    }
    result
}

/// Keeps blocks of weight at least `min_weight`, unless none qualifies, in
/// which case every block is kept.
pub fn filter_sibs(result: &DiffResult, min_weight: usize) -> Result<DiffResult> {
    if min_weight == 0 {
        return Err(Error::Parameter("min_weight must be at least 1".into()));
    }
    let heavy: Vec<_> = result.sibs.iter().filter(|s| s.weight >= min_weight).cloned().collect();
    let sibs = if heavy.is_empty() { result.sibs.clone() } else { heavy };
    Ok(DiffResult::new(
        sibs,
        result.baseline_only_blocks.clone(),
        result.key_policy,
    ))
}

pub fn sib_stats(result: &DiffResult) -> SibStats {
    let mut by_weight = BTreeMap::new();
    for sib in &result.sibs {
        *by_weight.entry(sib.weight).or_insert(0) += 1;
    }
    SibStats {
        total: result.sibs.len(),
        by_weight,
        unrankable: result.sibs.iter().filter(|s| !s.is_rankable()).count(),
    }
}
