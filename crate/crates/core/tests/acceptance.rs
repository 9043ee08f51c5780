//! Acceptance criteria, one PASS/FAIL line each.
//!
//! cargo test --test acceptance

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use filo::baselines::{ochiai, ochiai_rank, CoverageMatrix, Outcome, TestRecord};
use filo::bench::{
    completeness, generate_pair, run_bench, soundness, AppShape, BenchConfig, BenchManifest, FaultKind, FaultScenario,
};
use filo::fixtures::{goodweather_pair, GPS_REQUEST_LOCATION, ON_OPTIONS_ITEM_SELECTED};
use filo::rank::{analyze, analyze_detected, rank, AnalysisConfig};
use filo::sib::{detect_sibs, filter_sibs, BlockSource, SuspiciousInvocationBlock};
use filo::trace::{FrameworkPrefixes, KeyPolicy, MethodId, Origin, StackSnapshot, Trace, TraceBuilder, TraceLabel};
use filo::tree::{build_failure_call_tree, depth_score, imp_blocks, FailureCallTree};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome_ = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    body: fn() -> Outcome_,
}

fn main() {
    let criteria = [
        Criterion {
            name: "formula anchors",
            limit: Duration::from_secs(1),
            body: formula_anchors,
        },
        Criterion {
            name: "small-instance oracle equivalence",
            limit: Duration::from_secs(30),
            body: oracle_equivalence,
        },
        Criterion {
            name: "goodweather-shaped fixture",
            limit: Duration::from_secs(1),
            body: goodweather,
        },
        Criterion {
            name: "degenerate crash-on-startup case",
            limit: Duration::from_secs(1),
            body: degenerate,
        },
        Criterion {
            name: "min-weight rule",
            limit: Duration::from_secs(30),
            body: min_weight_rule,
        },
        Criterion {
            name: "ranking invariants",
            limit: Duration::from_secs(30),
            body: ranking_invariants,
        },
        Criterion {
            name: "sensitivity corridor",
            limit: Duration::from_secs(5),
            body: sensitivity,
        },
        Criterion {
            name: "ochiai correctness",
            limit: Duration::from_secs(30),
            body: ochiai_correctness,
        },
        Criterion {
            name: "bench protocol",
            limit: Duration::from_secs(120),
            body: bench_protocol,
        },
        Criterion {
            name: "rq1 metrics",
            limit: Duration::from_secs(60),
            body: rq1_metrics,
        },
        Criterion {
            name: "scale",
            limit: Duration::from_secs(60),
            body: scale,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.body)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; took {elapsed:.2?}, limit {:?}", c.limit)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:<36} {:>9.2?}  {detail}", c.name, elapsed),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:<36} {:>9.2?}  {why}", c.name, elapsed);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn goodweather_tree() -> FailureCallTree {
    let (b, f) = goodweather_pair();
    let retained = filter_sibs(&detect_sibs(&b, &f, KeyPolicy::Full), 2).unwrap();
    build_failure_call_tree(&retained.sibs, common::ROOT).unwrap()
}

fn formula_anchors() -> Outcome_ {
    let tree = goodweather_tree();
    let susp = 0.25 * imp_blocks(&tree, 0) + 0.75 * depth_score(&tree, 0).unwrap();
    check((susp - 0.25).abs() <= 1e-12, || format!("root susp {susp}"))?;
    check(imp_blocks(&tree, 0) == 1.0, || "ImpBlocks(root) != 1".into())?;
    check(depth_score(&tree, 0).unwrap() == 0.0, || "Depth(root) != 0".into())?;
    Ok(format!("root susp = {susp}"))
}

fn oracle_equivalence() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut blocks = 0;
    for case in 0..1000 {
        let base = common::small_trace(&mut rng, 12, TraceLabel::Baseline);
        let fail = common::small_trace(&mut rng, 12, TraceLabel::Failure);
        let expected = common::oracle_blocks(&base, &fail);
        let got: Vec<common::Block> = detect_sibs(&base, &fail, KeyPolicy::Full)
            .sibs
            .iter()
            .map(|s| (s.start_seq, s.end_seq, s.weight))
            .collect();
        check(got == expected, || {
            format!("case {case}: got {got:?}, oracle {expected:?}")
        })?;
        blocks += got.len();
    }
    Ok(format!("1000/1000 pairs agree ({blocks} blocks)"))
}

fn goodweather() -> Outcome_ {
    let (b, f) = goodweather_pair();
    let report = analyze(&b, &f, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    let r = &report.ranking;
    check(r.len() >= 2, || "ranking shorter than 2".into())?;
    check(
        r[0].method.name() == GPS_REQUEST_LOCATION && r[1].method.name() == ON_OPTIONS_ITEM_SELECTED,
        || format!("top two are {} and {}", r[0].method, r[1].method),
    )?;
    check(
        (r[0].susp - 0.72).abs() <= 0.005 && (r[1].susp - 0.69).abs() <= 0.005,
        || format!("scores {} {}", r[0].susp, r[1].susp),
    )?;
    Ok(format!("positions 1,2; susp {:.4} {:.4}", r[0].susp, r[1].susp))
}

fn degenerate() -> Outcome_ {
    let (b, _) = goodweather_pair();
    let empty = Trace::empty(TraceLabel::Failure);
    let diff = detect_sibs(&b, &empty, KeyPolicy::Full);
    check(diff.sibs.len() == 1, || format!("{} blocks", diff.sibs.len()))?;
    let s = &diff.sibs[0];
    check(s.source == BlockSource::Baseline && s.events.len() == b.len(), || {
        "block does not span the baseline".into()
    })?;
    check(
        s.start_seq == b.events()[0].seq() && s.end_seq == b.events()[b.len() - 1].seq(),
        || "bounds".into(),
    )?;
    let report = analyze(&b, &empty, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    check(!report.ranking.is_empty(), || "empty ranking".into())?;
    Ok(format!(
        "1 block of weight {}, top {}",
        s.weight, report.ranking[0].method
    ))
}

fn retained(weights: &[usize]) -> Vec<usize> {
    let (b, f) = common::weighted_pair(weights);
    let d = detect_sibs(&b, &f, KeyPolicy::Full);
    let mut w: Vec<usize> = filter_sibs(&d, 2).unwrap().sibs.iter().map(|s| s.weight).collect();
    w.sort_unstable();
    w
}

fn min_weight_rule() -> Outcome_ {
    check(retained(&[1, 1, 3]) == [3], || {
        format!("{{1,1,3}} kept {:?}", retained(&[1, 1, 3]))
    })?;
    check(retained(&[1, 1, 1]) == [1, 1, 1], || "all-1 not kept".into())?;
    let mut runner = TestRunner::new(Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&proptest::collection::vec(1usize..6, 1..10), |weights| {
            let mut expected: Vec<usize> = weights.iter().copied().filter(|&w| w >= 2).collect();
            if expected.is_empty() {
                expected = weights.clone();
            }
            expected.sort_unstable();
            prop_assert_eq!(retained(&weights), expected);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("{1,1,3} -> {3}; all-1 kept; 256 random multisets".into())
}

fn random_blocks(rng: &mut ChaCha8Rng, scale: usize) -> Vec<SuspiciousInvocationBlock> {
    let prefixes = FrameworkPrefixes::default();
    let n = rng.gen_range(1..8);
    (0..n)
        .map(|i| {
            let path = common::random_path(rng, 6);
            let weight = rng.gen_range(1..6) * scale;
            let frames: Vec<MethodId> = path
                .iter()
                .map(|p| MethodId::classified(p, &prefixes).unwrap())
                .collect();
            let mut b = TraceBuilder::new(prefixes.clone());
            b.begin(&path).unwrap();
            let ev = b.finish(TraceLabel::Failure).events()[0].clone();
            SuspiciousInvocationBlock {
                events: vec![ev],
                start_seq: i as u64,
                end_seq: i as u64,
                weight,
                representative: Some(filo::sib::Representative {
                    method: frames.last().unwrap().clone(),
                    seq: i as u64,
                    stack: Some(StackSnapshot::new(frames).unwrap()),
                }),
                source: BlockSource::Failure,
            }
        })
        .collect()
}

fn ranking_invariants() -> Outcome_ {
    let prefixes = FrameworkPrefixes::default();
    for case in 0..500u64 {
        let blocks = random_blocks(&mut ChaCha8Rng::seed_from_u64(case), 1);
        let tree = build_failure_call_tree(&blocks, common::ROOT).map_err(|e| e.to_string())?;
        let mut max_depth = 0.0f64;
        for (id, node) in tree.nodes().iter().enumerate() {
            if let Some(p) = node.parent {
                check(imp_blocks(&tree, p) >= imp_blocks(&tree, id), || {
                    format!("case {case}: imp not monotone")
                })?;
            }
            let d = depth_score(&tree, id).unwrap();
            check((0.0..=1.0).contains(&d), || format!("case {case}: depth {d}"))?;
            if d == 1.0 {
                check(node.depth == tree.height() && node.children.is_empty(), || {
                    format!("case {case}: depth 1 off a deepest leaf")
                })?;
            }
            max_depth = max_depth.max(d);
        }
        check(max_depth == 1.0, || format!("case {case}: max depth {max_depth}"))?;
        let report = rank(&tree, 0.25, 0.75, &prefixes).map_err(|e| e.to_string())?;
        let mut seen = std::collections::HashSet::new();
        for s in &report.ranking {
            check((0.0..=1.0).contains(&s.susp), || {
                format!("case {case}: susp {}", s.susp)
            })?;
            check(s.method.origin() == Origin::Application, || {
                format!("case {case}: framework {}", s.method)
            })?;
            check(seen.insert(s.method.name().to_string()), || {
                format!("case {case}: {} twice", s.method)
            })?;
        }
        let order: Vec<String> = report.ranking.iter().map(|s| s.method.name().to_string()).collect();
        for scale in [2, 3, 7] {
            let scaled = random_blocks(&mut ChaCha8Rng::seed_from_u64(case), scale);
            let t = build_failure_call_tree(&scaled, common::ROOT).unwrap();
            let r = rank(&t, 0.25, 0.75, &prefixes).unwrap();
            let o: Vec<String> = r.ranking.iter().map(|s| s.method.name().to_string()).collect();
            check(o == order, || format!("case {case}: scaling by {scale} reorders"))?;
        }
    }
    Ok("500 random trees".into())
}

fn sensitivity() -> Outcome_ {
    let (b, f) = goodweather_pair();
    let detected = detect_sibs(&b, &f, KeyPolicy::Full);
    let position = |k1: f64| -> Result<usize, String> {
        let config = AnalysisConfig {
            k1,
            k2: 1.0 - k1,
            ..AnalysisConfig::default()
        };
        let r = analyze_detected(&detected, &config).map_err(|e| e.to_string())?;
        r.ranking
            .iter()
            .position(|s| s.method.name() == GPS_REQUEST_LOCATION)
            .map(|p| p + 1)
            .ok_or("target missing".into())
    };
    let reference = position(0.25)?;
    let mut k1s: Vec<f64> = (0..9).map(|i| 0.01 + 0.04 * i as f64).collect();
    k1s.push(0.34);
    let mut worst = reference;
    for k1 in k1s {
        let p = position(k1)?;
        check(p <= reference + 1, || format!("k1={k1}: rank {p} vs {reference}"))?;
        worst = worst.max(p);
    }
    Ok(format!(
        "rank {reference} at k1=0.25, worst {worst} over k1 in 0.01..=0.34"
    ))
}

fn ochiai_correctness() -> Outcome_ {
    check(ochiai(1, 0, 0) == 1.0, || "1.0 case".into())?;
    check((ochiai(1, 0, 1) - 1.0 / 2f64.sqrt()).abs() <= 1e-12, || {
        "1/sqrt 2 case".into()
    })?;
    check(ochiai(0, 2, 1) == 0.0, || "0.0 case".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..300 {
        let entities = rng.gen_range(2..12);
        let planted = rng.gen_range(0..entities);
        let tests = rng.gen_range(1..15);
        let mut records: Vec<TestRecord> = (0..tests)
            .map(|t| {
                let outcome = if t == 0 || rng.gen_bool(0.4) {
                    Outcome::Fail
                } else {
                    Outcome::Pass
                };
                let mut covered: std::collections::BTreeSet<usize> =
                    (0..entities).filter(|_| rng.gen_bool(0.5)).collect();
                if outcome == Outcome::Fail {
                    covered.insert(planted);
                } else {
                    covered.remove(&planted);
                }
                TestRecord { outcome, covered }
            })
            .collect();
        // Any other entity must miss a failing test or hit a passing one.
        for e in (0..entities).filter(|&e| e != planted) {
            let perfect = records
                .iter()
                .all(|r| (r.outcome == Outcome::Fail) == r.covered.contains(&e));
            if perfect {
                records[0].covered.remove(&e);
            }
        }
        let names: Vec<String> = (0..entities).map(|e| format!("org.app.E{e:02}.m")).collect();
        let m = CoverageMatrix::new(names.clone(), records).unwrap();
        let r = ochiai_rank(&m).unwrap();
        check(
            r.ranking[0].entity == names[planted] && r.ranking[0].score == 1.0,
            || format!("case {case}: argmax {}", r.ranking[0].entity),
        )?;
        check(r.ranking[1].score < 1.0, || format!("case {case}: argmax not unique"))?;
    }
    Ok("formula cases and 300 planted matrices".into())
}

fn bench_protocol() -> Outcome_ {
    let manifest = BenchManifest::standard(40, 10, 2024);
    let result = run_bench(
        &manifest.scenarios,
        &BenchConfig {
            coverage: true,
            ..BenchConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let localizable: Vec<_> = result
        .scenarios
        .iter()
        .filter(|s| s.fault_kind.is_localizable())
        .collect();
    let top5 = localizable.iter().filter(|s| s.filo.is_some_and(|p| p <= 5)).count();
    check(localizable.len() == 40, || format!("{} localizable", localizable.len()))?;
    check(top5 * 10 >= localizable.len() * 9, || {
        format!("FILO Top-5 on {top5}/40")
    })?;
    let missing: Vec<_> = result
        .scenarios
        .iter()
        .filter(|s| s.fault_kind == FaultKind::MissingCallback)
        .collect();
    check(missing.len() == 10 && missing.iter().all(|s| s.filo.is_none()), || {
        "a missing_callback scenario was ranked".into()
    })?;
    check(result.filo.not_in_ranking >= 10, || "not-in-ranking below 10".into())?;
    let table = result.render_table();
    let labels: Vec<&str> = table.lines().skip(1).take(4).map(|l| l[..20].trim()).collect();
    check(labels == ["Top-1", "Top-5", "Top-10", "Not in the ranking"], || {
        format!("table rows {labels:?}")
    })?;
    println!("{table}");
    Ok(format!("FILO Top-5 {top5}/40; missing_callback 10/10 not ranked"))
}

fn rq1_metrics() -> Outcome_ {
    for seed in 0..10 {
        let mut s = FaultScenario::new(
            "rq1",
            FaultKind::PermissionEarlyReturn,
            AppShape {
                seed,
                episodes: 20,
                ..AppShape::default()
            },
        );
        let clean = generate_pair(&s).map_err(|e| e.to_string())?;
        let d = detect_sibs(&clean.baseline, &clean.failure, KeyPolicy::Full);
        let sound = soundness(&d, &clean.truth, 2);
        let comp = completeness(&d, &clean.truth);
        check(sound.at_least_min_weight == Some(1.0), || {
            format!("seed {seed}: soundness {sound:?}")
        })?;
        check(comp == Some(1.0), || format!("seed {seed}: completeness {comp:?}"))?;

        s.app_shape.noise_blocks = 50;
        let noisy = generate_pair(&s).map_err(|e| e.to_string())?;
        let dn = detect_sibs(&noisy.baseline, &noisy.failure, KeyPolicy::Full);
        let sound_n = soundness(&dn, &noisy.truth, 2);
        check(sound_n.all.unwrap() < sound.all.unwrap(), || {
            format!("seed {seed}: noise did not lower soundness")
        })?;
        check(completeness(&dn, &noisy.truth) == comp, || {
            format!("seed {seed}: noise changed completeness")
        })?;

        s.app_shape.noise_blocks = 0;
        s.include_fix_only = true;
        let partial = generate_pair(&s).map_err(|e| e.to_string())?;
        let dp = detect_sibs(&partial.baseline, &partial.failure, KeyPolicy::Full);
        check(completeness(&dp, &partial.truth).unwrap() < 1.0, || {
            format!("seed {seed}: fix-only calls counted as found")
        })?;
    }
    Ok("10 seeds: soundness(>=2) 1.0, completeness 1.0; 50 noise blocks lower soundness only".into())
}

fn scale() -> Outcome_ {
    let scenario = FaultScenario::new(
        "scale",
        FaultKind::PermissionEarlyReturn,
        AppShape {
            depth: 3,
            fan_out: 3,
            callbacks: 400,
            episodes: 20_500,
            noise_blocks: 70,
            coverage_tests: 0,
            seed: 3,
            ..AppShape::default()
        },
    );
    let pair = generate_pair(&scenario).map_err(|e| e.to_string())?;
    check(pair.baseline.len() >= 600_000 && pair.failure.len() >= 600_000, || {
        format!("only {} / {} events", pair.baseline.len(), pair.failure.len())
    })?;
    let start = Instant::now();
    let report = analyze(&pair.baseline, &pair.failure, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let peak = common::peak_rss_bytes();
    check(elapsed < Duration::from_secs(60), || {
        format!("diff and rank took {elapsed:.2?}")
    })?;
    if let Some(p) = peak {
        check(p < 2 << 30, || format!("peak memory {} MiB", p >> 20))?;
    }
    let gt = pair.truth.ground_truth_method();
    let pos = report.ranking.iter().position(|s| s.method.name() == gt).map(|p| p + 1);
    Ok(format!(
        "{} / {} events, diff+rank {elapsed:.2?}, peak {} MiB, fix locus at {pos:?}",
        pair.baseline.len(),
        pair.failure.len(),
        peak.map_or("?".into(), |p| (p >> 20).to_string())
    ))
}
