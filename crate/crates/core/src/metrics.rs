//! Coverage figures and benchmark rows.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::explore::ExplorationReport;
use crate::sim::{CaseCategory, SimApp};
use crate::triage::{Classification, TriageVerdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub activity_coverage: f64,
    pub method_coverage: f64,
    pub unique_state_count: usize,
    pub crash_tp: usize,
    pub crash_fp: usize,
    pub visited_activities: usize,
    pub declared_activities: usize,
    pub covered_methods: usize,
    pub declared_methods: usize,
    /// Visited activities missing from the manifest; they are also counted
    /// in `declared_activities`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undeclared_visited: Vec<String>,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 * 100.0 / den as f64
    }
}

/// Folds a report and its verdicts into coverage percentages.
pub fn summarize(
    app: &SimApp,
    report: &ExplorationReport,
    verdicts: &[TriageVerdict],
) -> CoverageSummary {
    let mut declared: BTreeSet<&str> = app.manifest().activity_names().collect();
    let undeclared_visited: Vec<String> = report
        .visited_activities
        .iter()
        .filter(|a| !declared.contains(a.as_str()))
        .cloned()
        .collect();
    declared.extend(undeclared_visited.iter().map(String::as_str));
    let methods = app.declared_methods();
    let covered = report
        .covered_methods
        .iter()
        .filter(|m| methods.contains(*m))
        .count();
    let tp = verdicts
        .iter()
        .filter(|v| v.classification == Classification::TruePositive)
        .count();
    CoverageSummary {
        activity_coverage: pct(report.visited_activities.len(), declared.len()),
        method_coverage: pct(covered, methods.len()),
        unique_state_count: report.unique_states.len(),
        crash_tp: tp,
        crash_fp: verdicts.len() - tp,
        visited_activities: report.visited_activities.len(),
        declared_activities: declared.len(),
        covered_methods: covered,
        declared_methods: methods.len(),
        undeclared_visited,
    }
}

/// One (fixture, configuration, seed) cell of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub fixture: String,
    pub policy: String,
    pub seed: u64,
    pub activity_cov_pct: f64,
    pub method_cov_pct: f64,
    pub unique_states: usize,
    pub crashes_tp: usize,
    pub crashes_fp: usize,
    pub interventions: usize,
}

/// Best-of-seeds aggregation: per (fixture, policy), the row with the
/// highest activity coverage, ties broken by method coverage and then the
/// earlier row. Output keeps first-appearance order.
pub fn best_of(rows: &[BenchRow]) -> Vec<BenchRow> {
    let mut out: Vec<BenchRow> = Vec::new();
    for r in rows {
        match out
            .iter_mut()
            .find(|b| b.fixture == r.fixture && b.policy == r.policy)
        {
            Some(b) => {
                let better = r.activity_cov_pct > b.activity_cov_pct
                    || (r.activity_cov_pct == b.activity_cov_pct
                        && r.method_cov_pct > b.method_cov_pct);
                if better {
                    *b = r.clone();
                }
            }
            None => out.push(r.clone()),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTally {
    pub category: CaseCategory,
    pub passed: usize,
    pub total: usize,
}

/// Passed/total check cases per category, in category order.
pub fn tally_cases(app: &SimApp, passed: &BTreeSet<String>) -> Vec<CaseTally> {
    CaseCategory::ALL
        .iter()
        .map(|&category| {
            let cases: Vec<_> = app
                .cases()
                .filter(|(_, c)| c.category == category)
                .collect();
            CaseTally {
                category,
                passed: cases.iter().filter(|(_, c)| passed.contains(&c.id)).count(),
                total: cases.len(),
            }
        })
        .collect()
}
