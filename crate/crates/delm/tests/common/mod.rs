//! Independent oracles and fixture helpers shared by the integration tests
//! and the acceptance target. Nothing here calls the code under test to
//! compute an expected value.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use delm::load_app;
use delm_core::icc::{
    ExtraKind, ExtraValue, IntentLink, LinkKind, MethodKind, Operand, Resolution, ResolvedContext,
    ResolvedExtra, SenderTrace, TraceStmt,
};
use delm_core::manifest::{ActivityDecl, Manifest};
use delm_core::sim::{ContextFault, Effect, Event, Runtime, SimApp, StateHash};
use delm_core::value::ScalarValue;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FIXTURES: [&str; 6] = [
    "alltrails",
    "ezfile",
    "fp_trap",
    "intentbench_mini",
    "loseweight",
    "oscillator",
];

pub fn fixtures_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> SimApp {
    load_app(&fixtures_root().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn manifest_paths() -> Vec<PathBuf> {
    let root = fixtures_root();
    let mut out: Vec<PathBuf> = FIXTURES
        .iter()
        .map(|f| root.join(f).join("manifest.xml"))
        .collect();
    out.push(root.join("manifests/amazon_prime.xml"));
    out
}

// ---------------------------------------------------------------------------
// Branch-enumerating interpreter for sender traces.

#[derive(Clone)]
enum Val {
    Scalar(ScalarValue),
    Intent(usize),
}

#[derive(Clone, PartialEq, Eq)]
enum Payload {
    One(ScalarValue),
    Fields(BTreeMap<String, ScalarValue>),
}

#[derive(Clone, Default)]
struct ConcreteIntent {
    attrs: [Option<ScalarValue>; 5],
    extras: BTreeMap<String, (ExtraKind, Payload)>,
}

fn value(env: &BTreeMap<String, Val>, op: &Operand) -> ScalarValue {
    match op {
        Operand::Lit(v) => v.clone(),
        Operand::Var(n) => match &env[n] {
            Val::Scalar(v) => v.clone(),
            Val::Intent(_) => panic!("generator never passes intents as values"),
        },
    }
}

fn key(env: &BTreeMap<String, Val>, op: &Operand) -> String {
    match value(env, op) {
        ScalarValue::Str(s) => s,
        other => panic!("generator keys are strings, got {other:?}"),
    }
}

/// Runs the trace once, with `choices[k]` picking the value of the k-th
/// branch join (in sorted order of its value set).
fn run_once(trace: &SenderTrace, choices: &[usize]) -> ConcreteIntent {
    let mut env: BTreeMap<String, Val> = BTreeMap::new();
    let mut intents: Vec<ConcreteIntent> = Vec::new();
    let mut sent = None;
    let mut join = 0;
    for stmt in &trace.statements {
        match stmt {
            TraceStmt::ConstAssign { var, value } => {
                env.insert(var.clone(), Val::Scalar(value.clone()));
            }
            TraceStmt::BranchJoin { var, values } => {
                let v = values.iter().nth(choices[join]).unwrap().clone();
                join += 1;
                env.insert(var.clone(), Val::Scalar(v));
            }
            TraceStmt::NewIntent { var, .. } => {
                intents.push(ConcreteIntent::default());
                env.insert(var.clone(), Val::Intent(intents.len() - 1));
            }
            TraceStmt::Call {
                receiver_var,
                method,
                args,
            } => {
                let Val::Intent(i) = env[receiver_var] else {
                    panic!("receiver is an intent")
                };
                let slot = match method {
                    MethodKind::SetAction => Some(0),
                    MethodKind::SetType => Some(1),
                    MethodKind::SetData => Some(2),
                    MethodKind::SetFlags => Some(3),
                    MethodKind::SetIdentifier => Some(4),
                    _ => None,
                };
                if let Some(s) = slot {
                    intents[i].attrs[s] = Some(value(&env, &args[0]));
                    continue;
                }
                match method {
                    MethodKind::PutExtraPrimary => {
                        let k = key(&env, &args[0]);
                        let v = value(&env, &args[1]);
                        intents[i]
                            .extras
                            .insert(k, (ExtraKind::Primary, Payload::One(v)));
                    }
                    MethodKind::PutExtraObject | MethodKind::PutExtraBundle => {
                        let kind = if *method == MethodKind::PutExtraObject {
                            ExtraKind::Object
                        } else {
                            ExtraKind::Bundle
                        };
                        let k = key(&env, &args[0]);
                        let mut fields = BTreeMap::new();
                        let mut j = 1;
                        while j + 1 < args.len() {
                            fields.insert(key(&env, &args[j]), value(&env, &args[j + 1]));
                            j += 2;
                        }
                        intents[i].extras.insert(k, (kind, Payload::Fields(fields)));
                    }
                    MethodKind::StartActivity => sent = Some(i),
                    _ => {}
                }
            }
        }
    }
    match sent.or(intents.len().checked_sub(1)) {
        Some(i) => intents[i].clone(),
        None => ConcreteIntent::default(),
    }
}

/// Context obtained by running every combination of branch-join values and
/// keeping a field only when all runs agree on it.
pub fn enumerate_context(trace: &SenderTrace) -> ResolvedContext {
    let sizes: Vec<usize> = trace
        .statements
        .iter()
        .filter_map(|s| match s {
            TraceStmt::BranchJoin { values, .. } => Some(values.len()),
            _ => None,
        })
        .collect();
    let mut runs = Vec::new();
    let mut choice = vec![0; sizes.len()];
    loop {
        runs.push(run_once(trace, &choice));
        // Odometer increment.
        let mut k = 0;
        while k < sizes.len() {
            choice[k] += 1;
            if choice[k] < sizes[k] {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == sizes.len() {
            break;
        }
    }

    let attr = |s: usize| -> Resolution {
        let distinct: BTreeSet<&Option<ScalarValue>> = runs.iter().map(|r| &r.attrs[s]).collect();
        match distinct.into_iter().collect::<Vec<_>>().as_slice() {
            [Some(v)] => Resolution::Constant(v.clone()),
            [None] => Resolution::Absent,
            _ => Resolution::Unresolved,
        }
    };
    let mut extras = BTreeMap::new();
    for (k, (kind, first)) in &runs[0].extras {
        let agree = runs.iter().all(|r| r.extras[k].1 == *first);
        let value = match (agree, first) {
            (false, _) => ExtraValue::Unresolved,
            (true, Payload::One(v)) => ExtraValue::Scalar(v.clone()),
            (true, Payload::Fields(f)) => ExtraValue::Map(f.clone()),
        };
        extras.insert(k.clone(), ResolvedExtra { kind: *kind, value });
    }
    ResolvedContext {
        action: attr(0),
        type_attr: attr(1),
        data_uri: attr(2),
        flags: attr(3),
        identifier: attr(4),
        extras,
    }
}

const POOL: [&str; 3] = ["a", "b", "c"];

fn scalar(rng: &mut ChaCha8Rng) -> ScalarValue {
    match rng.gen_range(0..6) {
        0..=2 => ScalarValue::Str(POOL[rng.gen_range(0..3)].into()),
        3 | 4 => ScalarValue::Int(rng.gen_range(1..3)),
        _ => ScalarValue::Bool(true),
    }
}

fn join_values(rng: &mut ChaCha8Rng) -> BTreeSet<ScalarValue> {
    let n = rng.gen_range(1..=3);
    let mut set = BTreeSet::new();
    while set.len() < n {
        set.insert(scalar(rng));
    }
    set
}

fn value_operand(rng: &mut ChaCha8Rng) -> Operand {
    if rng.gen_bool(0.4) {
        Operand::Lit(scalar(rng))
    } else {
        Operand::var(&format!("v{}", rng.gen_range(0..3)))
    }
}

fn key_operand(rng: &mut ChaCha8Rng, names: &[&str]) -> Operand {
    if rng.gen_bool(0.7) {
        Operand::lit(*names.choose(rng).unwrap())
    } else {
        Operand::var(&format!("k{}", rng.gen_range(0..2)))
    }
}

/// A well-formed random trace: value variables are redefined by constants
/// and joins, keys always resolve to constant strings.
pub fn random_trace(rng: &mut ChaCha8Rng, id: usize) -> SenderTrace {
    let mut stmts = vec![
        TraceStmt::ConstAssign {
            var: "k0".into(),
            value: "x".into(),
        },
        TraceStmt::ConstAssign {
            var: "k1".into(),
            value: "y".into(),
        },
    ];
    let mut joins = 0;
    let mut define = |rng: &mut ChaCha8Rng, var: String, stmts: &mut Vec<TraceStmt>| {
        if joins < 5 && rng.gen_bool(0.5) {
            joins += 1;
            stmts.push(TraceStmt::BranchJoin {
                var,
                values: join_values(rng),
            });
        } else {
            stmts.push(TraceStmt::ConstAssign {
                var,
                value: scalar(rng),
            });
        }
    };
    for v in 0..3 {
        define(rng, format!("v{v}"), &mut stmts);
    }
    let intents = rng.gen_range(1..=2);
    for i in 0..intents {
        stmts.push(TraceStmt::NewIntent {
            var: format!("i{i}"),
            explicit_target: None,
        });
    }
    let call = |rng: &mut ChaCha8Rng, method: MethodKind, args: Vec<Operand>| TraceStmt::Call {
        receiver_var: format!("i{}", rng.gen_range(0..intents)),
        method,
        args,
    };
    for _ in 0..rng.gen_range(0..14) {
        match rng.gen_range(0..10) {
            0 | 1 => {
                let var = format!("v{}", rng.gen_range(0..3));
                define(rng, var, &mut stmts);
            }
            2..=5 => {
                let m = *[
                    MethodKind::SetAction,
                    MethodKind::SetType,
                    MethodKind::SetData,
                    MethodKind::SetFlags,
                    MethodKind::SetIdentifier,
                ]
                .choose(rng)
                .unwrap();
                let arg = value_operand(rng);
                stmts.push(call(rng, m, vec![arg]));
            }
            6 | 7 => {
                let args = vec![key_operand(rng, &["e0", "e1", "x"]), value_operand(rng)];
                stmts.push(call(rng, MethodKind::PutExtraPrimary, args));
            }
            _ => {
                let m = if rng.gen_bool(0.5) {
                    MethodKind::PutExtraObject
                } else {
                    MethodKind::PutExtraBundle
                };
                let mut args = vec![key_operand(rng, &["o0", "o1", "y"])];
                for _ in 0..rng.gen_range(0..4) {
                    args.push(key_operand(rng, &["f0", "f1", "x"]));
                    args.push(value_operand(rng));
                }
                stmts.push(call(rng, m, args));
            }
        }
    }
    if rng.gen_bool(0.7) {
        stmts.push(call(rng, MethodKind::StartActivity, vec![]));
    }
    SenderTrace {
        id: format!("t{id}"),
        sender_activity: "S".into(),
        statements: stmts,
    }
}

// ---------------------------------------------------------------------------
// Nested-loop ATG construction.

pub fn random_links(rng: &mut ChaCha8Rng) -> (Manifest, Vec<IntentLink>) {
    let names: Vec<String> = (0..6).map(|i| format!("p.A{i}")).collect();
    let mut m = Manifest::new("p");
    for n in names.iter().take(rng.gen_range(0..=4)) {
        m.activities.push(ActivityDecl::new(n));
    }
    let links = (0..rng.gen_range(0..20))
        .map(|i| IntentLink {
            sender: names.choose(rng).unwrap().clone(),
            receiver: names.choose(rng).unwrap().clone(),
            kind: if rng.gen_bool(0.5) {
                LinkKind::Explicit
            } else {
                LinkKind::ImplicitMatched
            },
            context: ResolvedContext::default(),
            trace_id: format!("t{i}"),
        })
        .collect();
    (m, links)
}

/// Nodes in first-seen order and edges with earlier duplicates dropped.
pub fn nested_loop_atg(m: &Manifest, links: &[IntentLink]) -> (Vec<String>, Vec<(String, String)>) {
    let mut nodes: Vec<String> = Vec::new();
    let add = |n: &str, nodes: &mut Vec<String>| {
        if !nodes.iter().any(|x| x == n) {
            nodes.push(n.into());
        }
    };
    for a in &m.activities {
        add(&a.name, &mut nodes);
    }
    let mut edges: Vec<(String, String)> = Vec::new();
    for (i, l) in links.iter().enumerate() {
        add(&l.sender, &mut nodes);
        add(&l.receiver, &mut nodes);
        let mut dup = false;
        for e in &links[..i] {
            if e.sender == l.sender && e.receiver == l.receiver {
                dup = true;
            }
        }
        if !dup {
            edges.push((l.sender.clone(), l.receiver.clone()));
        }
    }
    (nodes, edges)
}

// ---------------------------------------------------------------------------
// Exhaustive path enumeration for crash reproduction.

/// Stack trace ids an app can raise, read straight from its spec.
pub fn crash_ids(app: &SimApp) -> BTreeSet<String> {
    let mut ids = BTreeSet::new();
    for act in app.spec().activities.values() {
        if let ContextFault::FaultCrash { stack_trace_id } = &act.on_context_fault {
            ids.insert(stack_trace_id.clone());
        }
        for state in act.states.values() {
            for t in &state.transitions {
                if let Effect::Crash { stack_trace_id } = &t.effect {
                    ids.insert(stack_trace_id.clone());
                }
            }
        }
    }
    ids
}

fn step(app: &SimApp, rt: &mut Runtime, mv: &Move) -> Option<String> {
    let before = rt.crash_log.len();
    match mv {
        Move::Event(e) => {
            rt.execute_event(app, e);
        }
        Move::Relaunch(a) => {
            rt.launch_dynamic(app, a)
                .expect("relaunch target is on the stack");
        }
    }
    rt.crash_log.get(before).map(|c| c.stack_trace_id.clone())
}

enum Move {
    Event(Event),
    Relaunch(String),
}

fn moves(app: &SimApp, rt: &Runtime) -> Vec<Move> {
    let mut out: Vec<Move> = app
        .available_events(rt)
        .into_iter()
        .map(Move::Event)
        .collect();
    let mut stack: Vec<String> = rt.activity_stack().iter().map(|s| s.to_string()).collect();
    stack.sort();
    stack.dedup();
    out.extend(stack.into_iter().map(Move::Relaunch));
    out
}

/// Shortest organic move sequence (GUI events and back-stack relaunches
/// from a fresh start) raising each crash id, by trying every sequence of
/// length up to `depth`.
pub fn exhaustive_min_depths(app: &SimApp, depth: usize) -> BTreeMap<String, usize> {
    fn go(app: &SimApp, rt: &Runtime, d: usize, max: usize, found: &mut BTreeMap<String, usize>) {
        if d == max {
            return;
        }
        for mv in moves(app, rt) {
            let mut child = rt.clone();
            if let Some(id) = step(app, &mut child, &mv) {
                let e = found.entry(id).or_insert(d + 1);
                *e = (*e).min(d + 1);
            }
            go(app, &child, d + 1, max, found);
        }
    }
    let mut found = BTreeMap::new();
    go(app, &Runtime::start(app, 0), 0, depth, &mut found);
    found
}

/// Fixtures small enough for exhaustive enumeration.
pub fn small_fixtures() -> Vec<&'static str> {
    FIXTURES
        .iter()
        .copied()
        .filter(|f| {
            let app = fixture(f);
            let acts = app.spec().activities.len();
            let states: usize = app.spec().activities.values().map(|a| a.states.len()).sum();
            acts <= 4 && states <= 6
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Loop monitor as a plain list.

/// Window kept as a vector; multiplicities are recounted on every step.
pub struct NaiveMonitor {
    window: Vec<StateHash>,
    threshold: usize,
    size: usize,
}

impl NaiveMonitor {
    pub fn new(threshold: usize, size: usize) -> Self {
        NaiveMonitor {
            window: Vec::new(),
            threshold,
            size,
        }
    }

    pub fn step(&mut self, h: StateHash) -> bool {
        self.window.push(h);
        if self.window.len() <= self.size {
            return false;
        }
        let most = self
            .window
            .iter()
            .map(|x| self.window.iter().filter(|y| *y == x).count())
            .max()
            .unwrap();
        if most > self.threshold {
            self.window.clear();
            return true;
        }
        self.window.remove(0);
        false
    }
}
