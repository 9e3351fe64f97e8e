//! Activity transition graph: static edges from intent links, dynamic edges
//! observed at runtime, and the next-target query used by guided exploration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::icc::{check_context_ready, ActivityLauncher, IntentLink, LauncherStatus};
use crate::manifest::Manifest;
use crate::value::GlobalState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeProvenance {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub provenance: EdgeProvenance,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atg {
    nodes: BTreeSet<String>,
    edges: BTreeSet<Edge>,
}

/// Nodes from the manifest, one static edge per distinct (sender, receiver).
pub fn build_static_atg(manifest: &Manifest, links: &[IntentLink]) -> Atg {
    let mut g = Atg::default();
    for name in manifest.activity_names() {
        g.nodes.insert(name.into());
    }
    for link in links {
        g.insert_edge(&link.sender, &link.receiver, EdgeProvenance::Static);
    }
    g
}

impl Atg {
    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn contains(&self, node: &str) -> bool {
        self.nodes.contains(node)
    }

    fn insert_edge(&mut self, from: &str, to: &str, provenance: EdgeProvenance) -> bool {
        self.nodes.insert(from.into());
        self.nodes.insert(to.into());
        self.edges.insert(Edge {
            from: from.into(),
            to: to.into(),
            provenance,
        })
    }

    /// Returns a copy carrying the dynamic edge `prev -> cur`.
    pub fn update_dynamic(&self, prev: &str, cur: &str) -> Atg {
        let mut next = self.clone();
        next.record_dynamic(prev, cur);
        next
    }

    /// In-place form of [`Atg::update_dynamic`]; true when the edge is new.
    pub fn record_dynamic(&mut self, prev: &str, cur: &str) -> bool {
        if prev == cur {
            return false;
        }
        self.insert_edge(prev, cur, EdgeProvenance::Dynamic)
    }

    pub fn dynamic_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges
            .iter()
            .filter(|e| e.provenance == EdgeProvenance::Dynamic)
    }

    /// Successors over edges of either provenance.
    pub fn out_neighbors<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        let mut seen = BTreeSet::new();
        self.edges
            .iter()
            .filter(move |e| e.from == node)
            .map(|e| e.to.as_str())
            .filter(move |to| seen.insert(*to))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph atg {\n");
        for n in &self.nodes {
            let _ = writeln!(out, "    \"{n}\";");
        }
        for e in &self.edges {
            let style = match e.provenance {
                EdgeProvenance::Static => "solid",
                EdgeProvenance::Dynamic => "dashed",
            };
            let _ = writeln!(out, "    \"{}\" -> \"{}\" [style={style}];", e.from, e.to);
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaunchRoute {
    /// Pop the back stack down to the activity and relaunch it.
    Stack,
    /// Launch through the launcher at this index.
    DeepLink { launcher: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextTarget {
    pub activity: String,
    pub route: LaunchRoute,
}

/// Inputs of [`adjacent_accessible`].
#[derive(Debug, Clone, Copy)]
pub struct GuidanceQuery<'a> {
    pub current: &'a str,
    pub launchers: &'a [ActivityLauncher],
    /// Runtime back stack, bottom first.
    pub visited_stack: &'a [&'a str],
    pub globals: &'a GlobalState,
    pub blocked: &'a BTreeSet<String>,
    pub visit_counts: &'a BTreeMap<String, u32>,
    /// When false, launcher preconditions are ignored.
    pub context_checking: bool,
}

impl GuidanceQuery<'_> {
    fn route(&self, activity: &str) -> Option<LaunchRoute> {
        if self.blocked.contains(activity) {
            return None;
        }
        if self.visited_stack.contains(&activity) {
            return Some(LaunchRoute::Stack);
        }
        self.launchers
            .iter()
            .position(|l| {
                l.target == activity
                    && l.status == LauncherStatus::Ready
                    && (!self.context_checking || check_context_ready(l, self.globals))
            })
            .map(|launcher| LaunchRoute::DeepLink { launcher })
    }

    fn best<'n>(&self, ring: impl Iterator<Item = &'n str>) -> Option<NextTarget> {
        ring.filter_map(|a| self.route(a).map(|r| (a, r)))
            .min_by_key(|(a, _)| {
                let visits = self.visit_counts.get(*a).copied().unwrap_or(0);
                (visits, visits > 0, *a)
            })
            .map(|(a, route)| NextTarget {
                activity: a.into(),
                route,
            })
    }
}

/// Picks the next activity to steer exploration to.
///
/// Candidates are searched ring by ring: successors of the current activity,
/// then successors of anything on the back stack, then every node. Within a
/// ring a candidate qualifies if it is on the back stack or has a ready
/// launcher whose preconditions hold; blocked activities never qualify. Ties
/// go to the least visited, then unexplored, then lexicographically smallest.
pub fn adjacent_accessible(g: &Atg, q: &GuidanceQuery<'_>) -> Option<NextTarget> {
    if let Some(t) = q.best(g.out_neighbors(q.current)) {
        return Some(t);
    }
    let stack_ring: BTreeSet<&str> = q
        .visited_stack
        .iter()
        .flat_map(|a| g.out_neighbors(a))
        .collect();
    if let Some(t) = q.best(stack_ring.into_iter()) {
        return Some(t);
    }
    q.best(g.nodes.iter().map(String::as_str))
}
