//! Reference implementations and generators shared by the integration tests.
#![allow(dead_code)]

use filo::trace::{EventKind, FrameworkPrefixes, ReturnValue, Trace, TraceBuilder, TraceEvent, TraceLabel};
use rand::Rng;

pub const ROOT: &str = "com.android.internal.os.ZygoteInit.main";

/// (start_seq, end_seq, weight)
pub type Block = (u64, u64, usize);

fn line(e: &TraceEvent) -> (bool, String, Option<(String, String)>) {
    (
        e.kind() == EventKind::Begin,
        e.method().to_string(),
        e.return_value()
            .map(|r| (format!("{:?}", r.kind()), r.repr().to_string())),
    )
}

/// Blocks of failure events left unmatched by the canonical minimal
/// alignment, computed by exhaustive dynamic programming.
///
/// The canonical alignment walks from the start: equal lines are matched;
/// otherwise a failure line is skipped when that keeps the edit distance
/// optimal, else a baseline line is skipped.
pub fn oracle_blocks(baseline: &Trace, failure: &Trace) -> Vec<Block> {
    let weight = |evs: &[TraceEvent]| evs.iter().filter(|e| e.kind() == EventKind::Begin).count();
    if failure.is_empty() {
        let evs = baseline.events();
        return if evs.is_empty() {
            vec![]
        } else {
            vec![(evs[0].seq(), evs[evs.len() - 1].seq(), weight(evs))]
        };
    }
    let a: Vec<_> = baseline.events().iter().map(line).collect();
    let b: Vec<_> = failure.events().iter().map(line).collect();
    let (n, m) = (a.len(), b.len());
    // cost[i][j]: insertions plus deletions turning a[i..] into b[j..]
    let mut cost = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            cost[i][j] = if i == n {
                m - j
            } else if j == m {
                n - i
            } else if a[i] == b[j] {
                cost[i + 1][j + 1]
            } else {
                1 + cost[i + 1][j].min(cost[i][j + 1])
            };
        }
    }
    let mut unmatched = vec![false; m];
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] {
            i += 1;
            j += 1;
        } else if j < m && cost[i][j] == cost[i][j + 1] + 1 {
            unmatched[j] = true;
            j += 1;
        } else {
            i += 1;
        }
    }
    let evs = failure.events();
    let mut blocks = Vec::new();
    let mut k = 0;
    while k < m {
        if unmatched[k] {
            let s = k;
            while k < m && unmatched[k] {
                k += 1;
            }
            blocks.push((evs[s].seq(), evs[k - 1].seq(), weight(&evs[s..k])));
        } else {
            k += 1;
        }
    }
    blocks
}

const SMALL_METHODS: [&str; 4] = [
    "android.a.Api.get",
    "android.a.Api.put",
    "org.app.Main.onClick",
    "java.util.List.size",
];

/// Random short trace over a four-method alphabet; begin events carry a
/// stack, end events one of two return values.
pub fn small_trace<R: Rng>(rng: &mut R, max_len: usize, label: TraceLabel) -> Trace {
    let mut b = TraceBuilder::new(FrameworkPrefixes::default());
    let len = rng.gen_range(0..=max_len);
    for _ in 0..len {
        let m = SMALL_METHODS[rng.gen_range(0..SMALL_METHODS.len())];
        if rng.gen_bool(0.5) {
            b.begin(&[ROOT, "org.app.Main.run", m]).unwrap();
        } else {
            let ret = match rng.gen_range(0..3) {
                0 => None,
                1 => Some(ReturnValue::primitive("0")),
                _ => Some(ReturnValue::primitive("1")),
            };
            b.end(m, ret).unwrap();
        }
    }
    b.finish(label)
}

/// Random stack path below the default root over a small alphabet of
/// application and framework methods.
pub fn random_path<R: Rng>(rng: &mut R, max_depth: usize) -> Vec<String> {
    const NAMES: [&str; 8] = [
        "org.app.A.run",
        "org.app.B.load",
        "org.app.C.onClick",
        "org.app.D$1.onEvent",
        "android.os.Handler.dispatchMessage",
        "android.view.View.performClick",
        "java.lang.Thread.run",
        "org.app.E.save",
    ];
    let depth = rng.gen_range(1..=max_depth);
    let mut p = vec![ROOT.to_string()];
    for _ in 0..depth {
        p.push(NAMES[rng.gen_range(0..NAMES.len())].to_string());
    }
    p.push(format!("android.api.Leaf{}.call", rng.gen_range(0..4)));
    p
}

/// Baseline of `gap` framework calls and a failure with one inserted block
/// of each given weight, separated by the baseline calls.
pub fn weighted_pair(weights: &[usize]) -> (Trace, Trace) {
    let mut base = TraceBuilder::new(FrameworkPrefixes::default());
    let mut fail = TraceBuilder::new(FrameworkPrefixes::default());
    for (i, &w) in weights.iter().enumerate() {
        let keep = [ROOT, "org.app.Main.run", "android.a.Keep.call"];
        for t in [&mut base, &mut fail] {
            t.call(&keep, Some(ReturnValue::primitive(i.to_string()))).unwrap();
        }
        let path = format!("org.app.Block{i}.run");
        for k in 0..w {
            fail.call(
                &[ROOT, path.as_str(), "android.a.New.call"],
                Some(ReturnValue::primitive(format!("{i}-{k}"))),
            )
            .unwrap();
        }
    }
    let keep = [ROOT, "org.app.Main.run", "android.a.Keep.call"];
    for t in [&mut base, &mut fail] {
        t.call(&keep, Some(ReturnValue::primitive("end"))).unwrap();
    }
    (base.finish(TraceLabel::Baseline), fail.finish(TraceLabel::Failure))
}

/// Peak resident set size of this process in bytes, where available.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
