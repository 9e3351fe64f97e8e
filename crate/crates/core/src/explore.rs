//! Random and guided exploration.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atg::{adjacent_accessible, GuidanceQuery, LaunchRoute, NextTarget};
use crate::icc::{check_context_ready, ActivityLauncher, LauncherStatus};
use crate::metrics::{summarize, BenchRow};
use crate::sim::{Event, LaunchResult, Runtime, SimApp, StateHash};
use crate::triage::{classify_all, CrashRecord};

pub const DEFAULT_MAX_REPETITION: u32 = 50;
pub const DEFAULT_MAX_QUEUE: usize = 200;

/// Sliding window of recent state hashes that reports when one state
/// dominates it.
///
/// Repetition is only checked once the window overflows, so with the
/// defaults the earliest possible detection is the 201st observation.
#[derive(Debug, Clone)]
pub struct LoopMonitor {
    queue: VecDeque<StateHash>,
    counts: BTreeMap<StateHash, u32>,
    max_repetition_threshold: u32,
    max_queue_size: usize,
}

impl Default for LoopMonitor {
    fn default() -> Self {
        LoopMonitor::new(DEFAULT_MAX_REPETITION, DEFAULT_MAX_QUEUE)
    }
}

impl LoopMonitor {
    pub fn new(max_repetition_threshold: u32, max_queue_size: usize) -> Self {
        LoopMonitor {
            queue: VecDeque::with_capacity(max_queue_size + 1),
            counts: BTreeMap::new(),
            max_repetition_threshold,
            max_queue_size,
        }
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Records `h`; returns true when a loop is detected, in which case the
    /// window is cleared.
    pub fn step(&mut self, h: StateHash) -> bool {
        self.queue.push_back(h);
        *self.counts.entry(h).or_insert(0) += 1;
        if self.queue.len() <= self.max_queue_size {
            return false;
        }
        let max_repeated = self.counts.values().copied().max().unwrap_or(0);
        if max_repeated > self.max_repetition_threshold {
            self.queue.clear();
            self.counts.clear();
            return true;
        }
        if let Some(old) = self.queue.pop_front() {
            match self.counts.get_mut(&old) {
                Some(c) if *c > 1 => *c -= 1,
                _ => {
                    self.counts.remove(&old);
                }
            }
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    RandomOnly,
    Guided,
}

/// Ablations of the guided policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    /// No activity launchers: guidance can only pop the back stack.
    Wacm,
    /// No loop detection.
    Wdld,
    /// Loop detection restarts the app instead of steering.
    Wgea,
}

impl Ablation {
    pub fn label(self) -> &'static str {
        match self {
            Ablation::Wacm => "wacm",
            Ablation::Wdld => "wdld",
            Ablation::Wgea => "wgea",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationConfig {
    pub event_budget: u64,
    pub seed: u64,
    pub policy: Policy,
    #[serde(default)]
    pub ablations: BTreeSet<Ablation>,
    /// Logical ticks per event; one tick stands for half a second.
    #[serde(default = "one")]
    pub event_interval_ticks: u32,
    /// Gate deep-link launches on launcher preconditions. Turning this off
    /// launches every ready launcher regardless of app state.
    #[serde(default = "yes")]
    pub context_checking: bool,
    #[serde(default = "default_repetition")]
    pub max_repetition_threshold: u32,
    #[serde(default = "default_queue")]
    pub max_queue_size: usize,
}

fn one() -> u32 {
    1
}

fn yes() -> bool {
    true
}

fn default_repetition() -> u32 {
    DEFAULT_MAX_REPETITION
}

fn default_queue() -> usize {
    DEFAULT_MAX_QUEUE
}

impl ExplorationConfig {
    pub fn new(policy: Policy, event_budget: u64, seed: u64) -> Self {
        ExplorationConfig {
            event_budget,
            seed,
            policy,
            ablations: BTreeSet::new(),
            event_interval_ticks: 1,
            context_checking: true,
            max_repetition_threshold: DEFAULT_MAX_REPETITION,
            max_queue_size: DEFAULT_MAX_QUEUE,
        }
    }

    pub fn with_ablation(mut self, a: Ablation) -> Self {
        self.ablations.insert(a);
        self
    }

    pub fn has(&self, a: Ablation) -> bool {
        self.ablations.contains(&a)
    }

    /// Short name used in tables: `random`, `guided`, or the ablation.
    pub fn label(&self) -> String {
        match self.policy {
            Policy::RandomOnly => "random".into(),
            Policy::Guided if self.ablations.is_empty() => "guided".into(),
            Policy::Guided => self
                .ablations
                .iter()
                .map(|a| a.label())
                .collect::<Vec<_>>()
                .join("+"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("event budget must be positive")]
    ZeroBudget,
    #[error("at least 3 seeds are required, got {0}")]
    TooFewSeeds(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterventionKind {
    Stack,
    DeepLink,
    Restart,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intervention {
    pub event_index: u64,
    pub target: String,
    pub kind: InterventionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<LaunchResult>,
    /// For deep-link launches: whether the launcher's preconditions held.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub launcher_ready: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationReport {
    pub seed: u64,
    pub config: ExplorationConfig,
    pub event_count: u64,
    pub visited_activities: BTreeSet<String>,
    /// Visited activities the manifest does not declare.
    pub undeclared_activities: BTreeSet<String>,
    pub unique_states: BTreeSet<StateHash>,
    pub covered_methods: BTreeSet<String>,
    pub passed_cases: BTreeSet<String>,
    pub crashes: Vec<CrashRecord>,
    pub interventions: Vec<Intervention>,
    /// Event indices at which the loop monitor fired.
    pub loop_detections: Vec<u64>,
    pub dynamic_edges: Vec<(String, String)>,
}

/// Uniform choice over the current state's (component, action) pairs and
/// Back.
pub fn random_event<R: Rng>(app: &SimApp, rt: &Runtime, rng: &mut R) -> Event {
    let mut events = app.available_events(rt);
    let i = rng.gen_range(0..events.len());
    events.swap_remove(i)
}

/// Runs one exploration for exactly `cfg.event_budget` GUI events.
pub fn explore(app: &SimApp, cfg: &ExplorationConfig) -> Result<ExplorationReport, ExploreError> {
    if cfg.event_budget == 0 {
        return Err(ExploreError::ZeroBudget);
    }
    let launchers: &[ActivityLauncher] = if cfg.has(Ablation::Wacm) {
        &[]
    } else {
        app.launchers()
    };
    let monitor_on = !cfg.has(Ablation::Wdld);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rt = Runtime::start(app, cfg.seed);
    let mut atg = app.static_atg();
    let mut monitor = LoopMonitor::new(cfg.max_repetition_threshold, cfg.max_queue_size);
    let mut blocked: BTreeSet<String> = BTreeSet::new();
    let mut interventions = Vec::new();
    let mut loop_detections = Vec::new();
    let mut dynamic_edges = Vec::new();

    while rt.event_count < cfg.event_budget {
        let prev = rt.current_activity().to_string();
        let depth = rt.frames().len();
        let crashes = rt.crash_log.len();
        let event = random_event(app, &rt, &mut rng);
        let state = rt.execute_event(app, &event);

        if state.activity != prev {
            let pushed = rt.crash_log.len() == crashes && rt.frames().len() > depth;
            if pushed && atg.record_dynamic(&prev, &state.activity) {
                dynamic_edges.push((prev, state.activity.clone()));
            }
            blocked.clear();
        }

        if !monitor_on || !monitor.step(state.hash) {
            continue;
        }
        loop_detections.push(rt.event_count);
        if cfg.policy != Policy::Guided {
            continue;
        }
        let event_index = rt.event_count;
        if cfg.has(Ablation::Wgea) {
            rt.restart(app);
            interventions.push(Intervention {
                event_index,
                target: app.initial_activity().into(),
                kind: InterventionKind::Restart,
                outcome: None,
                launcher_ready: None,
            });
            continue;
        }

        blocked.insert(rt.current_activity().into());
        let stack = rt.activity_stack();
        let query = GuidanceQuery {
            current: rt.current_activity(),
            launchers,
            visited_stack: &stack,
            globals: &rt.globals,
            blocked: &blocked,
            visit_counts: &rt.coverage.visit_counts,
            context_checking: cfg.context_checking,
        };
        let next = adjacent_accessible(&atg, &query);
        let intervention = match next {
            Some(NextTarget {
                activity,
                route: LaunchRoute::Stack,
            }) => {
                let outcome = match rt.launch_dynamic(app, &activity) {
                    Ok(_) => LaunchResult::Launched,
                    Err(_) => LaunchResult::Failed,
                };
                Intervention {
                    event_index,
                    target: activity,
                    kind: InterventionKind::Stack,
                    outcome: Some(outcome),
                    launcher_ready: None,
                }
            }
            Some(NextTarget {
                activity,
                route: LaunchRoute::DeepLink { launcher },
            }) => {
                let l = &launchers[launcher];
                debug_assert_eq!(l.status, LauncherStatus::Ready);
                let ready = check_context_ready(l, &rt.globals);
                let outcome = rt.launch_via_deeplink(app, l);
                Intervention {
                    event_index,
                    target: activity,
                    kind: InterventionKind::DeepLink,
                    outcome: Some(outcome),
                    launcher_ready: Some(ready),
                }
            }
            None => {
                rt.restart(app);
                Intervention {
                    event_index,
                    target: app.initial_activity().into(),
                    kind: InterventionKind::Restart,
                    outcome: None,
                    launcher_ready: None,
                }
            }
        };
        interventions.push(intervention);
    }

    let cov = rt.coverage;
    let undeclared = cov
        .visited_activities
        .iter()
        .filter(|a| !app.manifest().contains(a))
        .cloned()
        .collect();
    Ok(ExplorationReport {
        seed: cfg.seed,
        config: cfg.clone(),
        event_count: rt.event_count,
        visited_activities: cov.visited_activities,
        undeclared_activities: undeclared,
        unique_states: cov.unique_states,
        covered_methods: cov.covered_methods,
        passed_cases: cov.passed_cases,
        crashes: rt.crash_log,
        interventions,
        loop_detections,
        dynamic_edges,
    })
}

/// Launches every ready launcher once from a fresh app start, without
/// checking preconditions or exploring, and returns the check cases that
/// passed.
pub fn random_launch_cases(app: &SimApp) -> BTreeSet<String> {
    let mut passed = BTreeSet::new();
    for l in app.launchers() {
        if l.status != LauncherStatus::Ready {
            continue;
        }
        let mut rt = Runtime::start(app, 0);
        rt.launch_via_deeplink(app, l);
        passed.extend(rt.coverage.passed_cases);
    }
    passed
}

/// The configurations compared in benchmark tables.
pub fn comparison_configs(budget: u64, seed: u64) -> Vec<ExplorationConfig> {
    let guided = ExplorationConfig::new(Policy::Guided, budget, seed);
    alloc::vec![
        ExplorationConfig::new(Policy::RandomOnly, budget, seed),
        guided.clone(),
        guided.clone().with_ablation(Ablation::Wacm),
        guided.clone().with_ablation(Ablation::Wdld),
        guided.with_ablation(Ablation::Wgea),
    ]
}

/// Explores `app` under every comparison configuration and seed, triaging
/// the crashes of each run. Rows are ordered by configuration, then seed.
pub fn compare_policies(
    app: &SimApp,
    fixture: &str,
    budget: u64,
    seeds: &[u64],
    depth_limit: usize,
) -> Result<Vec<BenchRow>, ExploreError> {
    if seeds.len() < 3 {
        return Err(ExploreError::TooFewSeeds(seeds.len()));
    }
    let mut rows = Vec::new();
    for proto in comparison_configs(budget, 0) {
        for &seed in seeds {
            let cfg = ExplorationConfig {
                seed,
                ..proto.clone()
            };
            let report = explore(app, &cfg)?;
            let verdicts = classify_all(app, &report.crashes, depth_limit);
            let summary = summarize(app, &report, &verdicts);
            rows.push(BenchRow {
                fixture: fixture.into(),
                policy: cfg.label(),
                seed,
                activity_cov_pct: summary.activity_coverage,
                method_cov_pct: summary.method_coverage,
                unique_states: summary.unique_state_count,
                crashes_tp: summary.crash_tp,
                crashes_fp: summary.crash_fp,
                interventions: report.interventions.len(),
            });
        }
    }
    Ok(rows)
}
