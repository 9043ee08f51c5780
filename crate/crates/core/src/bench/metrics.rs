//! Block quality against the injected fault.

use serde::Serialize;

use super::generator::GroundTruth;
use crate::sib::{DiffResult, SuspiciousInvocationBlock};
use crate::trace::{diff_key, KeyPolicy};

/// Share of blocks holding at least one fault-related call, over all
/// blocks and over blocks of weight at least `min_weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Soundness {
    pub all: Option<f64>,
    pub at_least_min_weight: Option<f64>,
}

fn holds_frmc(block: &SuspiciousInvocationBlock, truth: &GroundTruth) -> bool {
    block
        .events
        .iter()
        .any(|e| truth.frmc.contains(&diff_key(e, KeyPolicy::Full)))
}

fn share<'a>(blocks: impl Iterator<Item = &'a SuspiciousInvocationBlock>, truth: &GroundTruth) -> Option<f64> {
    let (mut hit, mut total) = (0usize, 0usize);
    for b in blocks {
        total += 1;
        hit += holds_frmc(b, truth) as usize;
    }
    (total > 0).then(|| hit as f64 / total as f64)
}

pub fn soundness(result: &DiffResult, truth: &GroundTruth, min_weight: usize) -> Soundness {
    Soundness {
        all: share(result.sibs.iter(), truth),
        at_least_min_weight: share(result.sibs.iter().filter(|b| b.weight >= min_weight), truth),
    }
}

/// Share of fault-related calls found in some block; `None` when there are
/// none to find.
pub fn completeness(result: &DiffResult, truth: &GroundTruth) -> Option<f64> {
    if truth.frmc.is_empty() {
        return None;
    }
    let seen: std::collections::HashSet<String> = result
        .sibs
        .iter()
        .flat_map(|b| b.events.iter())
        .map(|e| diff_key(e, KeyPolicy::Full))
        .collect();
    let found = truth.frmc.iter().filter(|k| seen.contains(*k)).count();
    Some(found as f64 / truth.frmc.len() as f64)
}
