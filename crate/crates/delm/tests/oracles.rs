//! Library results checked against the brute-force oracles in `common`.

mod common;

use common::*;
use delm_core::atg::build_static_atg;
use delm_core::explore::random_event;
use delm_core::icc::{resolve_context, ExtraValue, Resolution};
use delm_core::sim::{LaunchVia, Runtime, StateHash};
use delm_core::triage::{classify, Classification, CrashRecord};
use delm_core::{ExplorationConfig, LoopMonitor, Policy};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn resolve_context_matches_branch_enumeration() {
    let (mut unresolved, mut constant, mut opaque_extra, mut map_extra) = (0, 0, 0, 0);
    for seed in 0..500 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trace = random_trace(&mut rng, seed as usize);
        let got = resolve_context(&trace).expect("generated traces are well formed");
        assert_eq!(got, enumerate_context(&trace), "trace {seed}: {trace:#?}");
        for r in [
            &got.action,
            &got.type_attr,
            &got.data_uri,
            &got.flags,
            &got.identifier,
        ] {
            match r {
                Resolution::Unresolved => unresolved += 1,
                Resolution::Constant(_) => constant += 1,
                Resolution::Absent => {}
            }
        }
        for e in got.extras.values() {
            match e.value {
                ExtraValue::Unresolved => opaque_extra += 1,
                ExtraValue::Map(_) => map_extra += 1,
                ExtraValue::Scalar(_) => {}
            }
        }
    }
    // The generator must exercise both outcomes.
    assert!(unresolved > 50 && constant > 50, "{unresolved} {constant}");
    assert!(
        opaque_extra > 20 && map_extra > 20,
        "{opaque_extra} {map_extra}"
    );
}

#[test]
fn static_atg_matches_nested_loop_dedup() {
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, links) = random_links(&mut rng);
        let g = build_static_atg(&m, &links);
        let (mut nodes, mut edges) = nested_loop_atg(&m, &links);
        nodes.sort();
        edges.sort();
        let got_nodes: Vec<String> = g.nodes().iter().cloned().collect();
        let got_edges: Vec<(String, String)> = g
            .edges()
            .iter()
            .map(|e| (e.from.clone(), e.to.clone()))
            .collect();
        assert_eq!(got_nodes, nodes, "seed {seed}");
        assert_eq!(got_edges, edges, "seed {seed}");
    }
}

fn record(id: &str) -> CrashRecord {
    CrashRecord {
        stack_trace_id: id.into(),
        activity: String::new(),
        state_id: String::new(),
        triggering_event: None,
        launched_by: LaunchVia::DeepLink,
        event_index: 0,
    }
}

#[test]
fn classify_matches_exhaustive_enumeration() {
    let small = small_fixtures();
    assert!(small.contains(&"fp_trap") && small.contains(&"oscillator"));
    let (mut tp, mut fp) = (0, 0);
    for name in small {
        let app = fixture(name);
        let reachable = exhaustive_min_depths(&app, 8);
        let mut ids = crash_ids(&app);
        ids.insert("never.raised".into());
        for id in ids {
            let v = classify(&app, &record(&id), 8);
            match reachable.get(&id) {
                Some(&d) => {
                    tp += 1;
                    assert_eq!(
                        v.classification,
                        Classification::TruePositive,
                        "{name} {id}"
                    );
                    assert_eq!(v.depth_used, d, "{name} {id}");
                    assert_eq!(v.witness.as_ref().map(Vec::len), Some(d));
                }
                None => {
                    fp += 1;
                    assert_eq!(
                        v.classification,
                        Classification::FalsePositive,
                        "{name} {id}"
                    );
                }
            }
        }
    }
    assert!(tp >= 1 && fp >= 2, "{tp} {fp}");
}

#[test]
fn oscillator_first_detection_matches_replayed_window() {
    let app = fixture("oscillator");
    for seed in 0..5 {
        let report = delm_core::explore::explore(
            &app,
            &ExplorationConfig::new(Policy::RandomOnly, 1000, seed),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rt = Runtime::start(&app, seed);
        let mut naive = NaiveMonitor::new(50, 200);
        let mut first = None;
        for i in 1..=1000u64 {
            let e = random_event(&app, &rt, &mut rng);
            if naive.step(rt.execute_event(&app, &e).hash) {
                first = Some(i);
                break;
            }
        }
        assert_eq!(first, Some(201));
        assert_eq!(report.loop_detections.first().copied(), first);
    }
}

proptest! {
    #[test]
    fn loop_monitor_matches_naive_window(
        stream in prop::collection::vec(0u64..4, 0..600),
        threshold in 1usize..12,
        size in 1usize..30,
    ) {
        let mut fast = LoopMonitor::new(threshold as u32, size);
        let mut naive = NaiveMonitor::new(threshold, size);
        for h in stream {
            prop_assert_eq!(fast.step(StateHash(h)), naive.step(StateHash(h)));
        }
    }
}
