//! Crash records, deduplication and true/false positive triage.
//!
//! A crash counts as a true positive when the same stack trace can be
//! produced by ordinary navigation: GUI events and back-stack relaunches
//! from a fresh start, with no deep links.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::sim::{Configuration, Event, LaunchVia, Runtime, SimApp};

pub const DEFAULT_DEPTH_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrashRecord {
    pub stack_trace_id: String,
    pub activity: String,
    pub state_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triggering_event: Option<Event>,
    pub launched_by: LaunchVia,
    pub event_index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    TruePositive,
    FalsePositive,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessStep {
    Event(Event),
    /// Pop the back stack to this activity and relaunch it.
    Relaunch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriageVerdict {
    #[serde(flatten)]
    pub record: CrashRecord,
    pub classification: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessStep>>,
    /// Activity in the foreground before each witness step, then the
    /// crashing activity.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub activity_path: Vec<String>,
    pub depth_limit: usize,
    /// Witness length, or the deepest level searched.
    pub depth_used: usize,
}

/// Moves available from `rt` during triage: every GUI event, then a
/// relaunch of each distinct activity on the back stack.
pub fn organic_moves(app: &SimApp, rt: &Runtime) -> Vec<WitnessStep> {
    let mut moves: Vec<WitnessStep> = app
        .available_events(rt)
        .into_iter()
        .map(WitnessStep::Event)
        .collect();
    let mut seen = BTreeSet::new();
    for a in rt.activity_stack() {
        if seen.insert(a) {
            moves.push(WitnessStep::Relaunch(a.into()));
        }
    }
    moves
}

/// Applies one move; returns the stack trace id if it crashed.
pub fn apply_move(app: &SimApp, rt: &mut Runtime, step: &WitnessStep) -> Option<String> {
    let before = rt.crash_log.len();
    match step {
        WitnessStep::Event(e) => {
            rt.execute_event(app, e);
        }
        WitnessStep::Relaunch(a) => {
            // Moves are generated from the current stack, so this holds.
            let _ = rt.launch_dynamic(app, a);
        }
    }
    rt.crash_log.get(before).map(|c| c.stack_trace_id.clone())
}

/// Fresh runtime with coverage tracking stripped, for search.
pub fn search_root(app: &SimApp) -> Runtime {
    let mut rt = Runtime::start(app, 0);
    rt.coverage = Default::default();
    rt
}

/// Breadth-first search for an organic path reproducing `r`'s stack trace.
pub fn classify(app: &SimApp, r: &CrashRecord, depth_limit: usize) -> TriageVerdict {
    let root = search_root(app);
    let mut parents: BTreeMap<Configuration, Option<(Configuration, WitnessStep, String)>> =
        BTreeMap::new();
    parents.insert(root.configuration(), None);
    let mut frontier = VecDeque::from([root]);
    let mut depth = 0;

    while !frontier.is_empty() && depth < depth_limit {
        depth += 1;
        let mut next = VecDeque::new();
        for rt in frontier {
            let from = rt.configuration();
            for step in organic_moves(app, &rt) {
                let mut child = rt.clone();
                child.crash_log.clear();
                match apply_move(app, &mut child, &step) {
                    Some(id) if id == r.stack_trace_id => {
                        let (mut witness, mut path) = unwind(&parents, &from);
                        path.push(rt.current_activity().into());
                        witness.push(step);
                        path.push(crashed_in(&child));
                        return TriageVerdict {
                            record: r.clone(),
                            classification: Classification::TruePositive,
                            depth_used: witness.len(),
                            witness: Some(witness),
                            activity_path: path,
                            depth_limit,
                        };
                    }
                    // Other crashes restart the app: a configuration already seen.
                    Some(_) => continue,
                    None => {}
                }
                let key = child.configuration();
                if parents.contains_key(&key) {
                    continue;
                }
                parents.insert(
                    key,
                    Some((from.clone(), step, rt.current_activity().into())),
                );
                next.push_back(child);
            }
        }
        frontier = next;
    }
    TriageVerdict {
        record: r.clone(),
        classification: Classification::FalsePositive,
        witness: None,
        activity_path: Vec::new(),
        depth_limit,
        depth_used: depth,
    }
}

fn crashed_in(rt: &Runtime) -> String {
    rt.crash_log
        .last()
        .map(|c| c.activity.clone())
        .unwrap_or_default()
}

type Parents = BTreeMap<Configuration, Option<(Configuration, WitnessStep, String)>>;

fn unwind(parents: &Parents, end: &Configuration) -> (Vec<WitnessStep>, Vec<String>) {
    let mut steps = Vec::new();
    let mut path = Vec::new();
    let mut cur = end;
    while let Some(Some((prev, step, activity))) = parents.get(cur) {
        steps.push(step.clone());
        path.push(activity.clone());
        cur = prev;
    }
    steps.reverse();
    path.reverse();
    (steps, path)
}

/// One record per stack trace id, in order of first appearance; the
/// representative is the one with the smallest event index.
pub fn dedupe(crashes: &[CrashRecord]) -> Vec<CrashRecord> {
    let mut out: Vec<CrashRecord> = Vec::new();
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for c in crashes {
        match index.get(c.stack_trace_id.as_str()) {
            Some(&i) => {
                if c.event_index < out[i].event_index {
                    out[i] = c.clone();
                }
            }
            None => {
                index.insert(&c.stack_trace_id, out.len());
                out.push(c.clone());
            }
        }
    }
    out
}

/// Dedupes `crashes` and classifies each representative.
pub fn classify_all(
    app: &SimApp,
    crashes: &[CrashRecord],
    depth_limit: usize,
) -> Vec<TriageVerdict> {
    dedupe(crashes)
        .iter()
        .map(|r| classify(app, r, depth_limit))
        .collect()
}
