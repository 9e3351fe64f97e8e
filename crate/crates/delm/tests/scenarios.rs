//! End-to-end behaviour on the bundled fixtures.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use delm_core::atg::{adjacent_accessible, GuidanceQuery, LaunchRoute};
use delm_core::explore::{
    explore, random_launch_cases, Ablation, ExplorationReport, InterventionKind,
};
use delm_core::icc::{ExtraValue, LauncherStatus, Resolution};
use delm_core::metrics::{summarize, tally_cases};
use delm_core::sim::{CaseCategory, Effect, Event, LaunchResult, LaunchVia, Runtime, UiAction};
use delm_core::triage::{classify_all, Classification, DEFAULT_DEPTH_LIMIT};
use delm_core::value::ScalarValue;
use delm_core::{ExplorationConfig, Policy};

const LW: &str = "com.lose.weight.";
const AT: &str = "com.alltrails.alltrails.ui.";

fn run(app: &delm_core::SimApp, policy: Policy, budget: u64, seed: u64) -> ExplorationReport {
    explore(app, &ExplorationConfig::new(policy, budget, seed)).unwrap()
}

fn ev(component: &str, action: UiAction) -> Event {
    Event::Action {
        component: component.into(),
        action,
    }
}

#[test]
fn intentbench_registers_every_category() {
    let app = fixture("intentbench_mini");
    let cases: Vec<_> = app.cases().collect();
    assert!(cases.len() >= 16);
    for cat in CaseCategory::ALL {
        assert!(
            cases.iter().filter(|(_, c)| c.category == cat).count() >= 2,
            "{cat:?}"
        );
    }
}

#[test]
fn intentbench_guided_versus_random_launch() {
    let app = fixture("intentbench_mini");
    let mut guided = BTreeSet::new();
    for seed in 1..=3 {
        guided.extend(run(&app, Policy::Guided, 5000, seed).passed_cases);
    }
    let random = random_launch_cases(&app);
    let g = tally_cases(&app, &guided);
    let r = tally_cases(&app, &random);
    for (gt, rt) in g.iter().zip(&r) {
        match gt.category {
            CaseCategory::ObjectExtra => {
                assert_eq!(gt.passed, 1, "only the constant object passes");
                assert_eq!(rt.passed, 1);
            }
            CaseCategory::ActivityStack => {
                assert_eq!(gt.passed, gt.total);
                assert_eq!(rt.passed, 0);
            }
            CaseCategory::GlobalData => {
                assert_eq!(gt.passed, gt.total);
                assert!(rt.passed < rt.total);
            }
            _ => {
                assert_eq!(gt.passed, gt.total, "{:?}", gt.category);
                assert_eq!(rt.passed, rt.total, "{:?}", rt.category);
            }
        }
    }
}

#[test]
fn ready_launchers_are_fully_resolved() {
    for name in FIXTURES {
        let app = fixture(name);
        for l in app
            .launchers()
            .iter()
            .filter(|l| l.status == LauncherStatus::Ready)
        {
            let c = &l.context;
            for r in [
                &c.action,
                &c.type_attr,
                &c.data_uri,
                &c.flags,
                &c.identifier,
            ] {
                assert_ne!(r, &Resolution::Unresolved, "{name} {}", l.target);
            }
            assert!(c.extras.values().all(|e| e.value != ExtraValue::Unresolved));
        }
    }
}

#[test]
fn ezfile_exerror_launcher_carries_extra_key() {
    let app = fixture("ezfile");
    let l = app
        .launchers()
        .iter()
        .find(|l| l.target == "com.ezfile.ExErrorActivity")
        .unwrap();
    assert_eq!(l.status, LauncherStatus::Ready);
    let payload = l.context.to_payload().unwrap();
    assert_eq!(
        payload.extra("extra_key"),
        Some(&ScalarValue::from("other"))
    );
    let mut rt = Runtime::start(&app, 0);
    assert_eq!(rt.launch_via_deeplink(&app, l), LaunchResult::Launched);
    assert_eq!(rt.current_activity(), "com.ezfile.ExErrorActivity");
}

#[test]
fn loseweight_static_graph_is_the_declared_path() {
    let g = fixture("loseweight").static_atg();
    assert_eq!(g.nodes().len(), 5);
    let edges: BTreeSet<(String, String)> = g
        .edges()
        .iter()
        .map(|e| {
            (
                e.from.trim_start_matches(LW).into(),
                e.to.trim_start_matches(LW).into(),
            )
        })
        .collect();
    let expected: BTreeSet<(String, String)> = [
        ("MainActivity", "SettingsActivity"),
        ("SettingsActivity", "UnitActivity"),
        ("SettingsActivity", "VoiceActivity"),
        ("VoiceActivity", "MyTrainingActionIntroActivity"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    assert_eq!(edges, expected);
}

#[test]
fn loseweight_voice_needs_the_swipe_sequence() {
    let app = fixture("loseweight");
    let mut rt = Runtime::start(&app, 0);
    rt.execute_event(&app, &Event::tap("tab_settings"));
    // Not reachable before the list is scrolled to the bottom.
    assert!(!app
        .available_events(&rt)
        .contains(&Event::tap("voice_item")));
    for _ in 0..6 {
        rt.execute_event(&app, &ev("list", UiAction::Swipe));
    }
    let s = rt.execute_event(&app, &Event::tap("voice_item"));
    assert_eq!(s.activity, format!("{LW}VoiceActivity"));
}

#[test]
fn loseweight_seed_7_guided_reaches_voice() {
    let app = fixture("loseweight");
    let random = run(&app, Policy::RandomOnly, 2000, 7);
    let guided = run(&app, Policy::Guided, 2000, 7);
    assert!(!random
        .visited_activities
        .contains(&format!("{LW}VoiceActivity")));
    assert_eq!(guided.visited_activities.len(), 5);
}

#[test]
fn alltrails_guidance_picks_auth_then_saved() {
    let app = fixture("alltrails");
    let g = app.static_atg();
    let home = format!("{AT}HomeActivity");
    let stack = [home.as_str()];
    let blocked: BTreeSet<String> = [home.clone()].into();
    let counts = BTreeMap::new();
    let globals = app.spec().globals_init.clone();
    let mut logged_in = globals.clone();
    logged_in.insert("logged_in".into(), true.into());
    let query = |globals| GuidanceQuery {
        current: &home,
        launchers: app.launchers(),
        visited_stack: &stack,
        globals,
        blocked: &blocked,
        visit_counts: &counts,
        context_checking: true,
    };
    let first = adjacent_accessible(&g, &query(&globals)).unwrap();
    assert_eq!(first.activity, format!("{AT}AuthActivity"));
    assert!(matches!(first.route, LaunchRoute::DeepLink { .. }));

    let mut counts = BTreeMap::new();
    counts.insert(format!("{AT}AuthActivity"), 1);
    counts.insert(format!("{AT}NavigationActivity"), 3);
    let q = GuidanceQuery {
        visit_counts: &counts,
        ..query(&logged_in)
    };
    assert_eq!(
        adjacent_accessible(&g, &q).unwrap().activity,
        format!("{AT}SavedActivity")
    );
}

#[test]
fn alltrails_guided_run_launches_auth_before_saved() {
    let app = fixture("alltrails");
    for seed in 1..=3 {
        let r = run(&app, Policy::Guided, 2000, seed);
        let deep: Vec<&str> = r
            .interventions
            .iter()
            .filter(|i| i.kind == InterventionKind::DeepLink)
            .map(|i| i.target.trim_start_matches(AT))
            .collect();
        let auth = deep.iter().position(|t| *t == "AuthActivity");
        let saved = deep.iter().position(|t| *t == "SavedActivity");
        assert!(auth.is_some() && saved.is_some(), "seed {seed}: {deep:?}");
        assert!(auth < saved, "seed {seed}: {deep:?}");
    }
}

#[test]
fn alltrails_relaunch_resets_state_only() {
    let app = fixture("alltrails");
    let mut rt = Runtime::start(&app, 0);
    rt.execute_event(&app, &Event::tap("nav_navigate"));
    rt.execute_event(&app, &Event::tap("start"));
    assert_eq!(rt.current().state_id, "recording");
    let before: Vec<String> = rt.activity_stack().iter().map(|s| s.to_string()).collect();
    let s = rt
        .launch_dynamic(&app, &format!("{AT}NavigationActivity"))
        .unwrap();
    assert_eq!(s.state_id, "idle");
    assert_eq!(rt.activity_stack(), before);
}

#[test]
fn fp_trap_deep_link_fault_is_a_false_positive() {
    let app = fixture("fp_trap");
    let l = app
        .launchers()
        .iter()
        .find(|l| l.target == "com.fptrap.ProfileActivity")
        .unwrap();
    let mut rt = Runtime::start(&app, 0);
    let res = rt.launch_via_deeplink(&app, l);
    assert!(matches!(res, LaunchResult::Crashed { .. }));
    let rec = &rt.crash_log[0];
    assert_eq!(rec.launched_by, LaunchVia::DeepLink);
    assert!(rec
        .stack_trace_id
        .starts_with("java.lang.NullPointerException"));
    let v = classify_all(&app, &rt.crash_log, DEFAULT_DEPTH_LIMIT);
    assert_eq!(v[0].classification, Classification::FalsePositive);
    assert_eq!(v[0].depth_limit, DEFAULT_DEPTH_LIMIT);
}

#[test]
fn fax_mode_yields_false_positives_on_fp_trap() {
    let app = fixture("fp_trap");
    let mut cfg = ExplorationConfig::new(Policy::Guided, 5000, 1);
    cfg.context_checking = false;
    let r = explore(&app, &cfg).unwrap();
    let v = classify_all(&app, &r.crashes, DEFAULT_DEPTH_LIMIT);
    assert!(v
        .iter()
        .any(|v| v.classification == Classification::FalsePositive));
}

#[test]
fn guided_with_context_checking_has_no_false_positives() {
    for name in FIXTURES {
        let app = fixture(name);
        for seed in 1..=3 {
            let r = run(&app, Policy::Guided, 5000, seed);
            for v in classify_all(&app, &r.crashes, DEFAULT_DEPTH_LIMIT) {
                assert_eq!(
                    v.classification,
                    Classification::TruePositive,
                    "{name} {seed}"
                );
                assert!(v.witness.is_some());
            }
        }
    }
}

#[test]
fn guided_visits_a_superset_of_random() {
    let mut strict = false;
    for name in ["loseweight", "alltrails", "ezfile", "intentbench_mini"] {
        let app = fixture(name);
        for seed in 1..=3 {
            let r = run(&app, Policy::RandomOnly, 2000, seed).visited_activities;
            let g = run(&app, Policy::Guided, 2000, seed).visited_activities;
            assert!(g.is_superset(&r), "{name} {seed}");
            strict |= g.len() > r.len();
        }
    }
    assert!(strict);
}

#[test]
fn explorer_invariants_on_fixtures() {
    for name in FIXTURES {
        let app = fixture(name);
        for seed in 0..3 {
            let cfg = ExplorationConfig::new(Policy::Guided, 1500, seed);
            let r = explore(&app, &cfg).unwrap();
            assert_eq!(r.event_count, 1500);
            let again = explore(&app, &cfg).unwrap();
            assert_eq!(
                serde_json::to_string(&r).unwrap(),
                serde_json::to_string(&again).unwrap()
            );
            for i in &r.interventions {
                if i.kind == InterventionKind::DeepLink {
                    assert_eq!(i.launcher_ready, Some(true), "{name} {seed}");
                }
            }
            assert!(r.loop_detections.iter().all(|&e| e > 200));

            let wdld = explore(&app, &cfg.clone().with_ablation(Ablation::Wdld)).unwrap();
            assert!(wdld.loop_detections.is_empty() && wdld.interventions.is_empty());
            let wacm = explore(&app, &cfg.clone().with_ablation(Ablation::Wacm)).unwrap();
            assert!(wacm
                .interventions
                .iter()
                .all(|i| i.kind != InterventionKind::DeepLink));
            let wgea = explore(&app, &cfg.clone().with_ablation(Ablation::Wgea)).unwrap();
            assert!(wgea
                .interventions
                .iter()
                .all(|i| i.kind == InterventionKind::Restart));
        }
    }
}

#[test]
fn coverage_never_shrinks_with_a_longer_run() {
    for name in FIXTURES {
        let app = fixture(name);
        for policy in [Policy::RandomOnly, Policy::Guided] {
            let short = run(&app, policy, 700, 4);
            let long = run(&app, policy, 1400, 4);
            assert!(long
                .visited_activities
                .is_superset(&short.visited_activities));
            assert!(long.unique_states.is_superset(&short.unique_states));
            assert!(long.covered_methods.is_superset(&short.covered_methods));
            assert!(long.passed_cases.is_superset(&short.passed_cases));
            let s = summarize(&app, &short, &[]);
            let l = summarize(&app, &long, &[]);
            assert!(l.activity_coverage >= s.activity_coverage);
            assert!(l.method_coverage >= s.method_coverage);
        }
    }
}

#[test]
fn summary_counts_are_consistent() {
    for name in FIXTURES {
        let app = fixture(name);
        let r = run(&app, Policy::Guided, 2000, 1);
        let v = classify_all(&app, &r.crashes, DEFAULT_DEPTH_LIMIT);
        let s = summarize(&app, &r, &v);
        assert!((0.0..=100.0).contains(&s.activity_coverage));
        assert!((0.0..=100.0).contains(&s.method_coverage));
        assert_eq!(s.crash_tp + s.crash_fp, v.len());
        assert_eq!(s, summarize(&app, &r, &v));
    }
}

#[test]
fn untouched_run_covers_the_entry_activity() {
    let app = fixture("loseweight");
    let mut r = run(&app, Policy::RandomOnly, 1, 0);
    let rt = Runtime::start(&app, 0);
    r.visited_activities = rt.coverage.visited_activities.clone();
    r.covered_methods = rt.coverage.covered_methods.clone();
    r.event_count = 0;
    let s = summarize(&app, &r, &[]);
    assert_eq!(s.visited_activities, 1);
    assert!((s.activity_coverage - 20.0).abs() < 1e-9);
}

#[test]
fn method_coverage_is_the_union_of_executed_tags() {
    let app = fixture("loseweight");
    let script = [
        Event::tap("tab_plan"),
        Event::tap("tab_settings"),
        ev("list", UiAction::Swipe),
        ev("ad", UiAction::Tap),
        Event::tap("unit_item"),
        Event::tap("kg"),
        Event::Back,
        Event::Back,
    ];
    let mut rt = Runtime::start(&app, 0);
    let mut expected: BTreeSet<String> = BTreeSet::new();
    let mut entered = vec![app.initial_activity().to_string()];
    for e in &script {
        let (activity, state) = (rt.current().activity, rt.current().state_id);
        if let Event::Action { component, action } = e {
            let spec = &app.spec().activities[&activity].states[&state];
            if let Some(t) = spec
                .transitions
                .iter()
                .find(|t| &t.component == component && t.action == *action)
            {
                expected.extend(t.methods.iter().cloned());
                if let Effect::GoActivity { activity, .. } = &t.effect {
                    entered.push(activity.clone());
                }
            }
        }
        rt.execute_event(&app, e);
    }
    for a in &entered {
        expected.extend(app.spec().activities[a].entry_methods.iter().cloned());
    }
    assert_eq!(rt.coverage.covered_methods, expected);

    let mut r = run(&app, Policy::RandomOnly, 1, 0);
    r.covered_methods = rt.coverage.covered_methods.clone();
    let s = summarize(&app, &r, &[]);
    let pct = 100.0 * expected.len() as f64 / app.declared_methods().len() as f64;
    assert!((s.method_coverage - pct).abs() < 1e-9);
}
