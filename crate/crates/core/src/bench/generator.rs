//! Synthetic app call graphs and trace pairs with an injected
//! upgrade-incompatibility fault.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{CoverageMatrix, Outcome, TestRecord};
use crate::trace::{
    diff_key, FrameworkPrefixes, KeyPolicy, Origin, ReturnValue, Trace, TraceBuilder, TraceLabel, DEFAULT_ROOT,
};
use crate::{Error, Result};

const APP_PACKAGE: &str = "org.bench.app";
const NOISE_STREAM: u64 = 0x6e6f_6973_6521;
const COVERAGE_STREAM: u64 = 0x636f_7665_7221;

const LOOP_FRAMES: [&str; 3] = [
    "android.app.ActivityThread.main",
    "android.os.Looper.loop",
    "android.os.Handler.dispatchMessage",
];
const STARTUP_FRAMES: [&str; 3] = [
    "android.app.ActivityThread.main",
    "android.app.ActivityThread.handleBindApplication",
    "android.app.Instrumentation.callApplicationOnCreate",
];

const CALLBACKS: [(&str, &str); 8] = [
    ("android.view.View.performClick", "onClick"),
    ("android.app.Activity.performResume", "onResume"),
    ("android.app.Activity.onMenuItemSelected", "onOptionsItemSelected"),
    ("android.app.Activity.performStart", "onStart"),
    (
        "android.location.LocationManager$ListenerTransport._handleMessage",
        "onLocationChanged",
    ),
    ("android.widget.AdapterView.performItemClick", "onItemClick"),
    ("android.app.Activity.dispatchActivityResult", "onActivityResult"),
    ("android.app.Activity.performPause", "onPause"),
];

const VERBS: [&str; 10] = [
    "load", "refresh", "update", "fetch", "render", "sync", "parse", "save", "bind", "request",
];

#[derive(Debug, Clone, Copy)]
enum Ret {
    Void,
    Int,
    Bool,
    Str(&'static [&'static str]),
    Type(&'static str),
}

const API_POOL: [(&str, Ret); 16] = [
    ("android.widget.TextView.setText", Ret::Void),
    ("android.view.View.setVisibility", Ret::Void),
    (
        "android.content.SharedPreferences.getString",
        Ret::Str(&["metric", "imperial", "null"]),
    ),
    ("android.content.SharedPreferences$Editor.apply", Ret::Void),
    ("android.location.LocationManager.isProviderEnabled", Ret::Bool),
    (
        "android.net.ConnectivityManager.getActiveNetworkInfo",
        Ret::Type("android.net.NetworkInfo"),
    ),
    ("java.util.ArrayList.size", Ret::Int),
    ("java.lang.String.format", Ret::Str(&["12.5 C", "3 km/h", "81 %"])),
    (
        "android.view.LayoutInflater.inflate",
        Ret::Type("android.widget.LinearLayout"),
    ),
    (
        "android.content.Context.getString",
        Ret::Str(&["Refresh", "Settings", "Loading"]),
    ),
    ("android.widget.ImageView.setImageResource", Ret::Void),
    ("java.lang.System.currentTimeMillis", Ret::Int),
    ("android.os.Bundle.getInt", Ret::Int),
    ("android.content.Intent.getBooleanExtra", Ret::Bool),
    (
        "android.database.sqlite.SQLiteDatabase.query",
        Ret::Type("android.database.sqlite.SQLiteCursor"),
    ),
    ("android.widget.ListView.setAdapter", Ret::Void),
];

const STARTUP_APIS: [&str; 3] = [
    "android.app.Application.onCreate",
    "android.content.Context.getSharedPreferences",
    "android.preference.PreferenceManager.setDefaultValues",
];

const CHECK_PERMISSION: &str = "android.support.v4.content.ContextCompat.checkSelfPermission";
const TOAST_MAKE: &str = "android.widget.Toast.makeText";
const TOAST_SHOW: &str = "android.widget.Toast.show";
const LOG_WARN: &str = "android.util.Log.w";
const NOISE_API: &str = "android.os.SystemClock.uptimeMillis";
const REQUEST_PERMISSIONS: &str = "android.support.v4.app.ActivityCompat.requestPermissions";
const START_SCAN: &str = "android.net.wifi.WifiManager.startScan";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    PermissionEarlyReturn,
    ChangedReturnSemantics,
    MissingCallback,
    CrashOnStartup,
}

impl FaultKind {
    pub const ALL: [FaultKind; 4] = [
        FaultKind::PermissionEarlyReturn,
        FaultKind::ChangedReturnSemantics,
        FaultKind::MissingCallback,
        FaultKind::CrashOnStartup,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FaultKind::PermissionEarlyReturn => "permission_early_return",
            FaultKind::ChangedReturnSemantics => "changed_return_semantics",
            FaultKind::MissingCallback => "missing_callback",
            FaultKind::CrashOnStartup => "crash_on_startup",
        }
    }

    /// Whether the fix locus can show up on a block's stack at all.
    pub fn is_localizable(self) -> bool {
        self != FaultKind::MissingCallback
    }
}

/// Generator parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppShape {
    /// Levels of application methods in each callback's call tree, the
    /// callback included.
    pub depth: usize,
    /// Upper bound on child methods and on API calls per method.
    pub fan_out: usize,
    pub callbacks: usize,
    /// Callback executions after application start-up.
    pub episodes: usize,
    pub noise_blocks: usize,
    pub noise_length: usize,
    /// Tests in the generated coverage matrix; 0 disables it.
    pub coverage_tests: usize,
    pub seed: u64,
}

impl Default for AppShape {
    fn default() -> Self {
        AppShape {
            depth: 3,
            fan_out: 3,
            callbacks: 4,
            episodes: 12,
            noise_blocks: 0,
            noise_length: 1,
            coverage_tests: 20,
            seed: 0,
        }
    }
}

impl AppShape {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.into()));
        if self.depth == 0 {
            return bad("depth must be at least 1");
        }
        if self.fan_out == 0 {
            return bad("fan_out must be at least 1");
        }
        if self.callbacks == 0 {
            return bad("callbacks must be at least 1");
        }
        if self.episodes == 0 {
            return bad("episodes must be at least 1");
        }
        if self.noise_blocks > 0 && self.noise_length == 0 {
            return bad("noise_length must be at least 1 when noise_blocks > 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultScenario {
    pub id: String,
    pub fault_kind: FaultKind,
    /// Name for the method a fix modifies. When absent the generator picks
    /// one; [`GroundTruth::scenario`] always carries the resolved name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_method: Option<String>,
    #[serde(default)]
    pub app_shape: AppShape,
    /// Adds to frmc the calls only the fix introduces.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub include_fix_only: bool,
}

impl FaultScenario {
    pub fn new(id: impl Into<String>, fault_kind: FaultKind, app_shape: AppShape) -> Self {
        FaultScenario {
            id: id.into(),
            fault_kind,
            ground_truth_method: None,
            app_shape,
            include_fix_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scenario: FaultScenario,
    /// Fault-related method calls as diff keys under the full key policy.
    pub frmc: BTreeSet<String>,
    /// Method under which the failure symptoms surface.
    pub symptom_method: String,
}

impl GroundTruth {
    pub fn ground_truth_method(&self) -> &str {
        self.scenario.ground_truth_method.as_deref().unwrap_or_default()
    }
}

/// Output of [`generate_pair`].
#[derive(Debug, Clone)]
pub struct GeneratedPair {
    pub baseline: Trace,
    pub failure: Trace,
    pub truth: GroundTruth,
    pub coverage: Option<CoverageMatrix>,
}

struct AppNode {
    name: Arc<str>,
    parent: Option<usize>,
    body: Vec<Step>,
}

#[derive(Clone, Copy)]
enum Step {
    Api(usize),
    Child(usize),
}

struct CallGraph {
    nodes: Vec<AppNode>,
    /// Application start-up callback.
    startup: usize,
    /// (dispatcher frame, callback node)
    callbacks: Vec<(&'static str, usize)>,
}

impl CallGraph {
    fn generate(shape: &AppShape, rng: &mut ChaCha8Rng) -> CallGraph {
        let mut nodes = vec![AppNode {
            name: format!("{APP_PACKAGE}.App.onCreate").into(),
            parent: None,
            body: Vec::new(),
        }];
        let mut callbacks = Vec::new();
        let mut counter = 0usize;
        for c in 0..shape.callbacks {
            let (dispatcher, simple) = CALLBACKS[c % CALLBACKS.len()];
            let class = format!("{APP_PACKAGE}.Screen{}", c / CALLBACKS.len());
            let id = nodes.len();
            nodes.push(AppNode {
                name: format!("{class}.{simple}").into(),
                parent: None,
                body: Vec::new(),
            });
            callbacks.push((dispatcher, id));
            Self::grow(&mut nodes, id, 1, shape, &class, &mut counter, rng);
        }
        CallGraph {
            nodes,
            startup: 0,
            callbacks,
        }
    }

    fn grow(
        nodes: &mut Vec<AppNode>,
        id: usize,
        level: usize,
        shape: &AppShape,
        class: &str,
        counter: &mut usize,
        rng: &mut ChaCha8Rng,
    ) {
        let calls = rng.gen_range(1..=shape.fan_out);
        let children = if level < shape.depth {
            rng.gen_range(1..=shape.fan_out)
        } else {
            0
        };
        let non_void: Vec<usize> = (0..API_POOL.len())
            .filter(|&i| !matches!(API_POOL[i].1, Ret::Void))
            .collect();
        let mut rest = Vec::new();
        for _ in 1..calls {
            rest.push(Step::Api(rng.gen_range(0..API_POOL.len())));
        }
        for _ in 0..children {
            let child = nodes.len();
            let verb = VERBS[rng.gen_range(0..VERBS.len())];
            nodes.push(AppNode {
                name: format!("{class}.{verb}{}", *counter).into(),
                parent: Some(id),
                body: Vec::new(),
            });
            *counter += 1;
            rest.push(Step::Child(child));
            Self::grow(nodes, child, level + 1, shape, class, counter, rng);
        }
        rest.shuffle(rng);
        let mut body = vec![Step::Api(*non_void.choose(rng).unwrap())];
        body.extend(rest);
        nodes[id].body = body;
    }

    fn path(&self, mut node: usize) -> Vec<usize> {
        let mut p = vec![node];
        while let Some(parent) = self.nodes[node].parent {
            p.push(parent);
            node = parent;
        }
        p.reverse();
        p
    }

    fn is_within(&self, mut node: usize, ancestor: usize) -> bool {
        loop {
            if node == ancestor {
                return true;
            }
            match self.nodes[node].parent {
                Some(p) => node = p,
                None => return false,
            }
        }
    }

    fn subtree(&self, root: usize) -> Vec<usize> {
        let mut out = vec![root];
        let mut i = 0;
        while i < out.len() {
            for s in &self.nodes[out[i]].body {
                if let Step::Child(c) = s {
                    out.push(*c);
                }
            }
            i += 1;
        }
        out
    }
}

#[derive(Clone)]
struct Call {
    /// Application method whose body issues the call.
    owner: usize,
    api: &'static str,
    ret: Option<ReturnValue>,
    injected: bool,
}

#[derive(Clone)]
struct Episode {
    frames: &'static [&'static str],
    dispatcher: Option<&'static str>,
    callback: usize,
    calls: Vec<Call>,
}

fn random_ret(ret: Ret, rng: &mut ChaCha8Rng) -> Option<ReturnValue> {
    Some(match ret {
        Ret::Void => ReturnValue::void(),
        Ret::Int => ReturnValue::primitive(rng.gen_range(0..1000).to_string()),
        Ret::Bool => ReturnValue::primitive(if rng.gen_bool(0.5) { "true" } else { "false" }),
        Ret::Str(choices) => ReturnValue::to_string_repr(*choices.choose(rng).unwrap()),
        Ret::Type(t) => ReturnValue::dynamic_type(t),
    })
}

fn execute(graph: &CallGraph, node: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Call>) {
    for step in &graph.nodes[node].body {
        match *step {
            Step::Api(i) => out.push(Call {
                owner: node,
                api: API_POOL[i].0,
                ret: random_ret(API_POOL[i].1, rng),
                injected: false,
            }),
            Step::Child(c) => execute(graph, c, rng, out),
        }
    }
}

fn baseline_episodes(graph: &CallGraph, shape: &AppShape, rng: &mut ChaCha8Rng) -> Vec<Episode> {
    let startup = Episode {
        frames: &STARTUP_FRAMES,
        dispatcher: None,
        callback: graph.startup,
        calls: STARTUP_APIS
            .iter()
            .map(|&api| Call {
                owner: graph.startup,
                api,
                ret: Some(ReturnValue::void()),
                injected: false,
            })
            .collect(),
    };
    let mut episodes = vec![startup];
    for _ in 0..shape.episodes {
        let &(dispatcher, cb) = graph.callbacks.choose(rng).unwrap();
        let mut calls = Vec::new();
        execute(graph, cb, rng, &mut calls);
        episodes.push(Episode {
            frames: &LOOP_FRAMES,
            dispatcher: Some(dispatcher),
            callback: cb,
            calls,
        });
    }
    episodes
}

fn injected(owner: usize, api: &'static str, ret: ReturnValue) -> Call {
    Call {
        owner,
        api,
        ret: Some(ret),
        injected: true,
    }
}

/// Replaces every execution of `target`'s body with the calls `fault`
/// produces from the original region.
fn rewrite_regions(graph: &CallGraph, episodes: &mut [Episode], target: usize, fault: impl Fn(&[Call]) -> Vec<Call>) {
    for ep in episodes.iter_mut() {
        let mut out = Vec::with_capacity(ep.calls.len());
        let mut i = 0;
        while i < ep.calls.len() {
            if graph.is_within(ep.calls[i].owner, target) {
                let start = i;
                while i < ep.calls.len() && graph.is_within(ep.calls[i].owner, target) {
                    i += 1;
                }
                out.extend(fault(&ep.calls[start..i]));
            } else {
                out.push(ep.calls[i].clone());
                i += 1;
            }
        }
        ep.calls = out;
    }
}

fn emit(graph: &CallGraph, episodes: &[Episode], label: TraceLabel, prefixes: &FrameworkPrefixes) -> Result<Trace> {
    let mut b = TraceBuilder::new(prefixes.clone());
    let names = |nodes: &[usize]| -> Vec<Arc<str>> { nodes.iter().map(|&n| graph.nodes[n].name.clone()).collect() };
    for ep in episodes {
        let mut prefix: Vec<Arc<str>> = vec![DEFAULT_ROOT.into()];
        prefix.extend(ep.frames.iter().map(|&f| Arc::<str>::from(f)));
        prefix.extend(ep.dispatcher.map(Arc::<str>::from));
        let cb_name = graph.nodes[ep.callback].name.clone();
        let mut cb_stack = prefix.clone();
        cb_stack.push(cb_name.clone());
        b.begin(&cb_stack)?;
        for call in &ep.calls {
            let mut stack = prefix.clone();
            stack.extend(names(&graph.path(call.owner)));
            stack.push(call.api.into());
            b.call(&stack, call.ret.clone())?;
        }
        b.end(&cb_name, Some(ReturnValue::void()))?;
    }
    Ok(b.finish(label))
}

fn keys_of(graph: &CallGraph, episodes: &[Episode], prefixes: &FrameworkPrefixes) -> Result<BTreeSet<String>> {
    let marked: Vec<Episode> = episodes
        .iter()
        .filter(|e| e.calls.iter().any(|c| c.injected))
        .map(|e| Episode {
            calls: e.calls.iter().filter(|c| c.injected).cloned().collect(),
            ..e.clone()
        })
        .collect();
    let trace = emit(graph, &marked, TraceLabel::Failure, prefixes)?;
    Ok(trace
        .events()
        .iter()
        .filter(|e| e.method().origin() == Origin::Framework)
        .map(|e| diff_key(e, KeyPolicy::Full))
        .collect())
}

fn fix_only_keys(api: &str) -> [String; 2] {
    [format!("b|api|{api}"), format!("e|api|{api}|void:")]
}

/// Generates a baseline/failure pair for `scenario`. Output is a pure
/// function of the scenario.
pub fn generate_pair(scenario: &FaultScenario) -> Result<GeneratedPair> {
    let shape = &scenario.app_shape;
    shape.validate()?;
    if scenario.fault_kind == FaultKind::CrashOnStartup && shape.noise_blocks > 0 {
        return Err(Error::Parameter(
            "crash_on_startup produces an empty failure trace and cannot carry noise".into(),
        ));
    }
    let prefixes = FrameworkPrefixes::default();
    let mut rng = ChaCha8Rng::seed_from_u64(shape.seed);
    let mut graph = CallGraph::generate(shape, &mut rng);
    let baseline_eps = baseline_episodes(&graph, shape, &mut rng);

    let executed: BTreeSet<usize> = baseline_eps[1..].iter().map(|e| e.callback).collect();
    let candidates: Vec<usize> = executed.iter().flat_map(|&cb| graph.subtree(cb)).collect();
    let target = match scenario.fault_kind {
        FaultKind::CrashOnStartup => graph.startup,
        _ => *candidates.choose(&mut rng).expect("at least one callback executes"),
    };
    let symptom_name = graph.nodes[target].name.to_string();

    let mut fix_locus = match scenario.fault_kind {
        FaultKind::MissingCallback => {
            let name = &graph.nodes[target].name;
            let class = &name[..name.rfind('.').unwrap()];
            format!("{class}.onRequestPermissionsResult")
        }
        _ => symptom_name.clone(),
    };
    let mut symptom = symptom_name;
    if let Some(custom) = &scenario.ground_truth_method {
        let m = crate::trace::MethodId::classified(custom, &prefixes)?;
        if m.is_framework() {
            return Err(Error::Parameter(format!(
                "ground truth method {custom} is framework code"
            )));
        }
        if graph
            .nodes
            .iter()
            .enumerate()
            .any(|(i, n)| &*n.name == custom.as_str() && i != target)
        {
            return Err(Error::Parameter(format!(
                "ground truth method {custom} collides with another generated method"
            )));
        }
        if scenario.fault_kind != FaultKind::MissingCallback {
            graph.nodes[target].name = custom.as_str().into();
            symptom = custom.clone();
        }
        fix_locus = custom.clone();
    }

    let mut failure_eps = baseline_eps.clone();
    let mut fix_only = None;
    match scenario.fault_kind {
        FaultKind::PermissionEarlyReturn | FaultKind::MissingCallback => {
            rewrite_regions(&graph, &mut failure_eps, target, |_| {
                vec![
                    injected(target, CHECK_PERMISSION, ReturnValue::primitive("-1")),
                    injected(target, CHECK_PERMISSION, ReturnValue::primitive("-1")),
                    injected(target, TOAST_MAKE, ReturnValue::dynamic_type("android.widget.Toast")),
                    injected(target, TOAST_SHOW, ReturnValue::void()),
                ]
            });
            fix_only = Some(REQUEST_PERMISSIONS);
        }
        FaultKind::ChangedReturnSemantics => {
            rewrite_regions(&graph, &mut failure_eps, target, |region| {
                let anchor = &region[0];
                let changed = match anchor.ret.as_ref().map(|r| r.repr()) {
                    Some("null") => ReturnValue::primitive("0"),
                    _ => ReturnValue::to_string_repr("null"),
                };
                vec![
                    Call {
                        owner: anchor.owner,
                        api: anchor.api,
                        ret: Some(changed),
                        injected: true,
                    },
                    injected(target, LOG_WARN, ReturnValue::primitive("0")),
                    injected(target, TOAST_MAKE, ReturnValue::dynamic_type("android.widget.Toast")),
                    injected(target, TOAST_SHOW, ReturnValue::void()),
                ]
            });
            fix_only = Some(START_SCAN);
        }
        FaultKind::CrashOnStartup => failure_eps.clear(),
    }

    let mut frmc = keys_of(&graph, &failure_eps, &prefixes)?;
    if scenario.fault_kind == FaultKind::ChangedReturnSemantics {
        // The anchor call still happens; only its return value is fault related.
        let anchors: HashSet<&str> = failure_eps
            .iter()
            .flat_map(|e| e.calls.iter())
            .filter(|c| c.injected && ![LOG_WARN, TOAST_MAKE, TOAST_SHOW].contains(&c.api))
            .map(|c| c.api)
            .collect();
        for a in anchors {
            frmc.remove(&format!("b|api|{a}"));
        }
    }
    if scenario.include_fix_only {
        if let Some(api) = fix_only {
            frmc.extend(fix_only_keys(api));
        }
    }

    add_noise(&graph, &mut failure_eps, target, shape)?;

    let baseline = emit(&graph, &baseline_eps, TraceLabel::Baseline, &prefixes)?;
    let failure = emit(&graph, &failure_eps, TraceLabel::Failure, &prefixes)?;
    let coverage = coverage_matrix(&graph, scenario.fault_kind, target, shape)?;

    let mut resolved = scenario.clone();
    resolved.ground_truth_method = Some(fix_locus);
    Ok(GeneratedPair {
        baseline,
        failure,
        truth: GroundTruth {
            scenario: resolved,
            frmc,
            symptom_method: symptom,
        },
        coverage,
    })
}

/// Sprinkles framework-only noise blocks at distinct positions that do not
/// touch an injected region. Uses its own random stream so the rest of the
/// pair is unaffected by the noise settings.
fn add_noise(graph: &CallGraph, episodes: &mut [Episode], target: usize, shape: &AppShape) -> Result<()> {
    if shape.noise_blocks == 0 {
        return Ok(());
    }
    let mut gaps = Vec::new();
    for (e, ep) in episodes.iter().enumerate() {
        let n = ep.calls.len();
        for g in 0..=n {
            let near = |i: Option<usize>| {
                i.and_then(|i| ep.calls.get(i))
                    .is_some_and(|c| c.injected || graph.is_within(c.owner, target))
            };
            if near(Some(g)) || near(g.checked_sub(1)) {
                continue;
            }
            gaps.push((e, g));
        }
    }
    if gaps.len() < shape.noise_blocks {
        return Err(Error::Parameter(format!(
            "noise_blocks = {} exceeds the {} available insertion points",
            shape.noise_blocks,
            gaps.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(shape.seed ^ NOISE_STREAM);
    let mut chosen: Vec<(usize, usize)> = gaps.choose_multiple(&mut rng, shape.noise_blocks).copied().collect();
    chosen.sort_unstable();
    let mut clock = 90_000u64;
    for &(e, g) in chosen.iter().rev() {
        let owner = episodes[e].callback;
        let block: Vec<Call> = (0..shape.noise_length)
            .map(|_| {
                clock += rng.gen_range(1..50);
                Call {
                    owner,
                    api: NOISE_API,
                    ret: Some(ReturnValue::primitive(clock.to_string())),
                    injected: false,
                }
            })
            .collect();
        episodes[e].calls.splice(g..g, block);
    }
    Ok(())
}

/// Method-level coverage of random tests. Each test runs start-up plus a
/// random set of callbacks; a test fails when it reaches the faulty method.
fn coverage_matrix(
    graph: &CallGraph,
    kind: FaultKind,
    target: usize,
    shape: &AppShape,
) -> Result<Option<CoverageMatrix>> {
    if shape.coverage_tests == 0 {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(shape.seed ^ COVERAGE_STREAM);
    let entities: Vec<String> = graph.nodes.iter().map(|n| n.name.to_string()).collect();
    let startup: BTreeSet<usize> = graph.subtree(graph.startup).into_iter().collect();
    let faulty_cb = graph.path(target)[0];
    let mut tests = Vec::with_capacity(shape.coverage_tests);
    for t in 0..shape.coverage_tests {
        if kind == FaultKind::CrashOnStartup {
            tests.push(TestRecord {
                outcome: Outcome::Fail,
                covered: startup.clone(),
            });
            continue;
        }
        let mut covered = startup.clone();
        let mut picked: Vec<usize> = graph
            .callbacks
            .iter()
            .map(|c| c.1)
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        if t == 0 && !picked.contains(&faulty_cb) {
            picked.push(faulty_cb);
        }
        let mut fails = false;
        for cb in picked {
            // Reaching the callback does not always mean reaching the
            // faulty branch.
            let nodes = graph.subtree(cb);
            let reach_target = cb == faulty_cb && (t == 0 || rng.gen_bool(0.7));
            for n in nodes {
                if graph.is_within(n, target) && !reach_target {
                    continue;
                }
                covered.insert(n);
            }
            fails |= reach_target;
        }
        tests.push(TestRecord {
            outcome: if fails { Outcome::Fail } else { Outcome::Pass },
            covered,
        });
    }
    CoverageMatrix::new(entities, tests).map(Some)
}
