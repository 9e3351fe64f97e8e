//! Deterministic app simulator.
//!
//! An app is a set of activities, each a small state machine over GUI
//! states. A state is a component tree plus transitions keyed by
//! `(component, action)`. The [`Runtime`] holds the back stack, global data
//! and the coverage accumulated so far; every entry point (GUI events, deep
//! links, back-stack relaunch, restart) keeps the top of the stack and the
//! current GUI state in sync.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::atg::{build_static_atg, Atg};
use crate::icc::{
    build_launchers, concrete_payload, match_intent_pairs, resolve_context, ActivityLauncher,
    ContextRequirement, IntentLink, IntentPayload, SenderTrace,
};
use crate::manifest::{bind_deep_links, extract_deep_links, DeepLink, Manifest};
use crate::triage::CrashRecord;
use crate::value::{GlobalState, ScalarValue};

pub const DEFAULT_BIND_SCHEME: &str = "delm";
pub const DEFAULT_HOST_PREFIX: &str = "app";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UiAction {
    Tap,
    Swipe,
    LongPress,
    TextInput,
}

impl UiAction {
    fn code(self) -> u8 {
        match self {
            UiAction::Tap => 1,
            UiAction::Swipe => 2,
            UiAction::LongPress => 3,
            UiAction::TextInput => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentNode {
    pub id: String,
    pub class: String,
    /// Display text; not part of the state identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default)]
    pub actions: BTreeSet<UiAction>,
    #[serde(default)]
    pub children: Vec<ComponentNode>,
}

impl ComponentNode {
    pub fn leaf(id: &str, class: &str, actions: &[UiAction]) -> Self {
        ComponentNode {
            id: id.into(),
            class: class.into(),
            text: None,
            actions: actions.iter().copied().collect(),
            children: Vec::new(),
        }
    }

    /// Nodes in preorder.
    pub fn preorder(&self) -> Vec<&ComponentNode> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    pub fn find(&self, id: &str) -> Option<&ComponentNode> {
        self.preorder().into_iter().find(|n| n.id == id)
    }
}

/// Structural digest of a GUI state.
///
/// Covers the activity name and, in preorder, each node's class, action set
/// and child count. Ids and text are left out so that content changes do not
/// create new states.
pub fn state_hash(tree: &ComponentNode, activity: &str) -> StateHash {
    fn put_str(h: &mut FnvHasher, s: &str) {
        h.write(&(s.len() as u64).to_le_bytes());
        h.write(s.as_bytes());
    }
    let mut h = FnvHasher::default();
    put_str(&mut h, activity);
    for node in tree.preorder() {
        put_str(&mut h, &node.class);
        h.write(&[node.actions.len() as u8]);
        for a in &node.actions {
            h.write(&[a.code()]);
        }
        h.write(&(node.children.len() as u64).to_le_bytes());
    }
    StateHash(h.finish())
}

/// 64-bit GUI state digest, serialized as 16 hex digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateHash(pub u64);

impl fmt::Display for StateHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl Serialize for StateHash {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StateHash {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(d)?;
        u64::from_str_radix(&s, 16)
            .map(StateHash)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Effect {
    GoState {
        state: String,
    },
    GoActivity {
        activity: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trace: Option<String>,
    },
    SetGlobal {
        key: String,
        value: ScalarValue,
    },
    Crash {
        stack_trace_id: String,
    },
    NoOp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub component: String,
    pub action: UiAction,
    pub effect: Effect,
    /// Method ids executed by this handler.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub methods: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpec {
    pub tree: ComponentNode,
    #[serde(default)]
    pub transitions: Vec<Transition>,
}

impl StateSpec {
    pub fn transition(&self, component: &str, action: UiAction) -> Option<&Transition> {
        self.transitions
            .iter()
            .find(|t| t.component == component && t.action == action)
    }
}

/// What happens when an activity is entered without the context it needs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContextFault {
    FaultCrash {
        stack_trace_id: String,
    },
    #[default]
    LaunchFail,
}

/// Global-data write performed when an activity is created.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum GlobalOp {
    Set {
        key: String,
        value: ScalarValue,
    },
    /// Integer increment; a missing key counts as 0.
    Increment {
        key: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseCategory {
    Attribute,
    PrimaryExtra,
    ObjectExtra,
    BundleExtra,
    BasicExtra,
    ActivityStack,
    GlobalData,
    DeviceConfig,
}

impl CaseCategory {
    pub const ALL: [CaseCategory; 8] = [
        CaseCategory::Attribute,
        CaseCategory::PrimaryExtra,
        CaseCategory::ObjectExtra,
        CaseCategory::BundleExtra,
        CaseCategory::BasicExtra,
        CaseCategory::ActivityStack,
        CaseCategory::GlobalData,
        CaseCategory::DeviceConfig,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CaseCategory::Attribute => "Attribute",
            CaseCategory::PrimaryExtra => "Primary extra param",
            CaseCategory::ObjectExtra => "Object extra param",
            CaseCategory::BundleExtra => "Bundle extra param",
            CaseCategory::BasicExtra => "Basic + Extra",
            CaseCategory::ActivityStack => "Activity stack",
            CaseCategory::GlobalData => "Global data",
            CaseCategory::DeviceConfig => "Device configuration",
        }
    }
}

/// A value check run when the activity is created; it passes when every
/// listed attribute, extra and global holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCase {
    pub id: String,
    pub category: CaseCategory,
    #[serde(default)]
    pub attributes: BTreeMap<String, ScalarValue>,
    #[serde(default)]
    pub extras: BTreeMap<String, ScalarValue>,
    #[serde(default)]
    pub globals: BTreeMap<String, ScalarValue>,
    /// Permissions; always granted.
    #[serde(default)]
    pub device: Vec<String>,
}

impl CheckCase {
    pub fn passes(&self, payload: &IntentPayload, globals: &GlobalState) -> bool {
        self.attributes
            .iter()
            .all(|(k, v)| payload.attribute(k) == Some(v))
            && self.extras.iter().all(|(k, v)| payload.extra(k) == Some(v))
            && self.globals.iter().all(|(k, v)| globals.get(k) == Some(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivitySpec {
    pub states: BTreeMap<String, StateSpec>,
    pub entry_state: String,
    /// Extra paths (`key` or `key.field`) the activity reads unconditionally.
    #[serde(default)]
    pub required_extras: BTreeMap<String, ScalarValue>,
    #[serde(default)]
    pub required_globals: BTreeMap<String, ScalarValue>,
    #[serde(default)]
    pub device_config: BTreeSet<String>,
    #[serde(default)]
    pub on_context_fault: ContextFault,
    #[serde(default)]
    pub on_enter: Vec<GlobalOp>,
    #[serde(default)]
    pub entry_methods: BTreeSet<String>,
    #[serde(default)]
    pub cases: Vec<CheckCase>,
}

impl ActivitySpec {
    fn admits(&self, payload: &IntentPayload, globals: &GlobalState) -> bool {
        self.required_extras
            .iter()
            .all(|(k, v)| payload.extra(k) == Some(v))
            && self
                .required_globals
                .iter()
                .all(|(k, v)| globals.get(k) == Some(v))
    }

    pub fn requirements(&self) -> BTreeSet<ContextRequirement> {
        let globals = self
            .required_globals
            .iter()
            .map(|(k, v)| ContextRequirement::Global {
                key: k.clone(),
                value: v.clone(),
            });
        let device = self
            .device_config
            .iter()
            .map(|p| ContextRequirement::DeviceConfig {
                permission: p.clone(),
            });
        globals.chain(device).collect()
    }
}

fn default_manifest_file() -> String {
    "manifest.xml".into()
}

fn default_traces_dir() -> String {
    "traces".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppSpec {
    #[serde(default = "default_manifest_file")]
    pub manifest_file: String,
    #[serde(default = "default_traces_dir")]
    pub traces_dir: String,
    pub initial_activity: String,
    #[serde(default)]
    pub globals_init: GlobalState,
    pub activities: BTreeMap<String, ActivitySpec>,
}

/// Every problem found while linking an app, not just the first.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SpecError {
    pub violations: Vec<String>,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid app spec ({} violation(s))",
            self.violations.len()
        )?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("activity `{0}` is not on the back stack")]
    NotOnStack(String),
}

/// A validated app with its static analysis results precomputed.
#[derive(Debug, Clone)]
pub struct SimApp {
    spec: AppSpec,
    manifest: Manifest,
    bound_manifest: Manifest,
    traces: BTreeMap<String, SenderTrace>,
    links: Vec<IntentLink>,
    deep_links: Vec<DeepLink>,
    launchers: Vec<ActivityLauncher>,
    hashes: BTreeMap<(String, String), StateHash>,
    organic_payloads: BTreeMap<String, IntentPayload>,
    declared_methods: BTreeSet<String>,
}

impl SimApp {
    /// Cross-checks manifest, traces and spec, then runs the static
    /// pipeline: deep-link extraction and binding, intent matching and
    /// launcher construction.
    pub fn link(
        manifest: Manifest,
        traces: Vec<SenderTrace>,
        spec: AppSpec,
    ) -> Result<SimApp, SpecError> {
        let mut violations = Vec::new();
        if let Err(e) = manifest.check_unique_activities() {
            violations.push(format!("{e}"));
        }
        let traces: BTreeMap<String, SenderTrace> =
            traces.into_iter().map(|t| (t.id.clone(), t)).collect();

        if !spec.activities.contains_key(&spec.initial_activity) {
            violations.push(format!(
                "initial activity `{}` has no activity spec",
                spec.initial_activity
            ));
        } else if !spec.activities[&spec.initial_activity]
            .required_extras
            .is_empty()
        {
            violations.push(format!(
                "initial activity `{}` cannot require extras",
                spec.initial_activity
            ));
        }
        if !manifest.contains(&spec.initial_activity) {
            violations.push(format!(
                "initial activity `{}` is not declared in the manifest",
                spec.initial_activity
            ));
        }
        for name in manifest.activity_names() {
            if !spec.activities.contains_key(name) {
                violations.push(format!("manifest activity `{name}` has no activity spec"));
            }
        }
        for (name, act) in &spec.activities {
            validate_activity(name, act, &spec, &traces, &mut violations);
        }
        for trace in traces.values() {
            if let Err(e) = resolve_context(trace) {
                violations.push(format!("{e}"));
            }
            if !manifest.contains(&trace.sender_activity) {
                violations.push(format!(
                    "trace `{}` is sent from undeclared activity `{}`",
                    trace.id, trace.sender_activity
                ));
            }
        }
        if !violations.is_empty() {
            return Err(SpecError { violations });
        }

        let trace_list: Vec<SenderTrace> = traces.values().cloned().collect();
        let links = match match_intent_pairs(&trace_list, &manifest) {
            Ok(l) => l,
            Err(e) => {
                return Err(SpecError {
                    violations: alloc::vec![format!("{e}")],
                })
            }
        };
        let (bound_manifest, bound) =
            match bind_deep_links(&manifest, DEFAULT_BIND_SCHEME, DEFAULT_HOST_PREFIX) {
                Ok(r) => r,
                Err(e) => {
                    return Err(SpecError {
                        violations: alloc::vec![format!("{e}")],
                    })
                }
            };
        let mut deep_links = extract_deep_links(&manifest);
        deep_links.extend(bound);

        let requirements: BTreeMap<String, BTreeSet<ContextRequirement>> = spec
            .activities
            .iter()
            .map(|(name, act)| (name.clone(), act.requirements()))
            .collect();
        let launchers =
            build_launchers(&links, &deep_links, &requirements).map_err(|e| SpecError {
                violations: alloc::vec![format!("{e}")],
            })?;

        let mut hashes = BTreeMap::new();
        let mut declared_methods = BTreeSet::new();
        for (name, act) in &spec.activities {
            declared_methods.extend(act.entry_methods.iter().cloned());
            for (sid, state) in &act.states {
                hashes.insert((name.clone(), sid.clone()), state_hash(&state.tree, name));
                for t in &state.transitions {
                    declared_methods.extend(t.methods.iter().cloned());
                }
            }
        }
        let organic_payloads = traces
            .iter()
            .map(|(id, t)| (id.clone(), concrete_payload(t).unwrap_or_default()))
            .collect();

        Ok(SimApp {
            spec,
            manifest,
            bound_manifest,
            traces,
            links,
            deep_links,
            launchers,
            hashes,
            organic_payloads,
            declared_methods,
        })
    }

    pub fn spec(&self) -> &AppSpec {
        &self.spec
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    /// Manifest after deep-link binding.
    pub fn bound_manifest(&self) -> &Manifest {
        &self.bound_manifest
    }

    pub fn traces(&self) -> &BTreeMap<String, SenderTrace> {
        &self.traces
    }

    pub fn links(&self) -> &[IntentLink] {
        &self.links
    }

    pub fn deep_links(&self) -> &[DeepLink] {
        &self.deep_links
    }

    pub fn launchers(&self) -> &[ActivityLauncher] {
        &self.launchers
    }

    pub fn static_atg(&self) -> Atg {
        build_static_atg(&self.manifest, &self.links)
    }

    pub fn declared_methods(&self) -> &BTreeSet<String> {
        &self.declared_methods
    }

    pub fn initial_activity(&self) -> &str {
        &self.spec.initial_activity
    }

    pub fn activity(&self, name: &str) -> Option<&ActivitySpec> {
        self.spec.activities.get(name)
    }

    pub fn state(&self, activity: &str, state_id: &str) -> Option<&StateSpec> {
        self.activity(activity)?.states.get(state_id)
    }

    fn hash_of(&self, activity: &str, state_id: &str) -> StateHash {
        self.hashes
            .get(&(activity.into(), state_id.into()))
            .copied()
            .unwrap_or(StateHash(0))
    }

    /// Every check case declared by the app, with its activity.
    pub fn cases(&self) -> impl Iterator<Item = (&str, &CheckCase)> {
        self.spec
            .activities
            .iter()
            .flat_map(|(name, a)| a.cases.iter().map(move |c| (name.as_str(), c)))
    }

    /// GUI events available in the runtime's current state: every
    /// (component, supported action) in preorder, then Back.
    pub fn available_events(&self, rt: &Runtime) -> Vec<Event> {
        let top = rt.top();
        let mut events = Vec::new();
        if let Some(state) = self.state(&top.activity, &top.state_id) {
            for node in state.tree.preorder() {
                for a in &node.actions {
                    events.push(Event::Action {
                        component: node.id.clone(),
                        action: *a,
                    });
                }
            }
        }
        events.push(Event::Back);
        events
    }
}

fn validate_activity(
    name: &str,
    act: &ActivitySpec,
    spec: &AppSpec,
    traces: &BTreeMap<String, SenderTrace>,
    violations: &mut Vec<String>,
) {
    if !act.states.contains_key(&act.entry_state) {
        violations.push(format!(
            "activity `{name}`: entry state `{}` is not declared",
            act.entry_state
        ));
    }
    for (sid, state) in &act.states {
        let mut keys = BTreeSet::new();
        for t in &state.transitions {
            let at = format!("activity `{name}` state `{sid}`");
            match state.tree.find(&t.component) {
                None => violations.push(format!(
                    "{at}: transition on unknown component `{}`",
                    t.component
                )),
                Some(node) if !node.actions.contains(&t.action) => violations.push(format!(
                    "{at}: component `{}` does not support {:?}",
                    t.component, t.action
                )),
                Some(_) => {}
            }
            if !keys.insert((&t.component, t.action)) {
                violations.push(format!(
                    "{at}: duplicate transition for ({}, {:?})",
                    t.component, t.action
                ));
            }
            match &t.effect {
                Effect::GoState { state } if !act.states.contains_key(state) => {
                    violations.push(format!("{at}: transition to undeclared state `{state}`"))
                }
                Effect::GoActivity { activity, trace } => {
                    if !spec.activities.contains_key(activity) {
                        violations.push(format!(
                            "{at}: transition to undeclared activity `{activity}`"
                        ));
                    }
                    if let Some(tr) = trace {
                        if !traces.contains_key(tr) {
                            violations.push(format!("{at}: unknown trace `{tr}`"));
                        }
                    }
                }
                _ => {}
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Action { component: String, action: UiAction },
    Back,
}

impl Event {
    pub fn tap(component: &str) -> Self {
        Event::Action {
            component: component.into(),
            action: UiAction::Tap,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Action { component, action } => write!(f, "{action:?}({component})"),
            Event::Back => f.write_str("Back"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LaunchVia {
    Organic,
    DeepLink,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum LaunchResult {
    Launched,
    Crashed { stack_trace_id: String },
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GuiState {
    pub activity: String,
    pub state_id: String,
    pub hash: StateHash,
}

impl GuiState {
    pub fn tree<'a>(&self, app: &'a SimApp) -> Option<&'a ComponentNode> {
        app.state(&self.activity, &self.state_id).map(|s| &s.tree)
    }
}

/// One back-stack entry: an activity instance and the intent it received.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Frame {
    pub activity: String,
    pub state_id: String,
    pub hash: StateHash,
    pub payload: IntentPayload,
    pub via: LaunchVia,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub visited_activities: BTreeSet<String>,
    pub visit_counts: BTreeMap<String, u32>,
    pub unique_states: BTreeSet<StateHash>,
    pub covered_methods: BTreeSet<String>,
    pub passed_cases: BTreeSet<String>,
}

/// Everything that determines future behaviour, without coverage.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub frames: Vec<Frame>,
    pub globals: GlobalState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Runtime {
    frames: Vec<Frame>,
    pub globals: GlobalState,
    pub crash_log: Vec<CrashRecord>,
    pub event_count: u64,
    pub rng_seed: u64,
    pub coverage: Coverage,
}

impl Runtime {
    /// Launches the app at its initial activity.
    pub fn start(app: &SimApp, rng_seed: u64) -> Runtime {
        let mut rt = Runtime {
            frames: Vec::new(),
            globals: app.spec.globals_init.clone(),
            crash_log: Vec::new(),
            event_count: 0,
            rng_seed,
            coverage: Coverage::default(),
        };
        rt.enter_initial(app);
        rt
    }

    pub(crate) fn top(&self) -> &Frame {
        self.frames.last().expect("back stack is never empty")
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn current(&self) -> GuiState {
        let top = self.top();
        GuiState {
            activity: top.activity.clone(),
            state_id: top.state_id.clone(),
            hash: top.hash,
        }
    }

    pub fn current_activity(&self) -> &str {
        &self.top().activity
    }

    /// Back stack, bottom first.
    pub fn activity_stack(&self) -> Vec<&str> {
        self.frames.iter().map(|f| f.activity.as_str()).collect()
    }

    pub fn configuration(&self) -> Configuration {
        Configuration {
            frames: self.frames.clone(),
            globals: self.globals.clone(),
        }
    }

    fn enter_initial(&mut self, app: &SimApp) {
        let name = app.spec.initial_activity.clone();
        let act = &app.spec.activities[&name];
        self.push(
            app,
            &name,
            act,
            IntentPayload::default(),
            LaunchVia::Organic,
        );
    }

    fn push(
        &mut self,
        app: &SimApp,
        name: &str,
        act: &ActivitySpec,
        payload: IntentPayload,
        via: LaunchVia,
    ) {
        for case in &act.cases {
            if case.passes(&payload, &self.globals) {
                self.coverage.passed_cases.insert(case.id.clone());
            }
        }
        for op in &act.on_enter {
            match op {
                GlobalOp::Set { key, value } => {
                    self.globals.insert(key.clone(), value.clone());
                }
                GlobalOp::Increment { key } => {
                    let next = match self.globals.get(key) {
                        Some(ScalarValue::Int(i)) => i + 1,
                        _ => 1,
                    };
                    self.globals.insert(key.clone(), ScalarValue::Int(next));
                }
            }
        }
        let hash = app.hash_of(name, &act.entry_state);
        self.frames.push(Frame {
            activity: name.into(),
            state_id: act.entry_state.clone(),
            hash,
            payload,
            via,
        });
        let cov = &mut self.coverage;
        cov.visited_activities.insert(name.into());
        *cov.visit_counts.entry(name.into()).or_insert(0) += 1;
        cov.unique_states.insert(hash);
        cov.covered_methods
            .extend(act.entry_methods.iter().cloned());
    }

    /// Creates `name` on top of the stack if its context requirements hold,
    /// otherwise applies its context-fault behaviour.
    fn admit(
        &mut self,
        app: &SimApp,
        name: &str,
        payload: IntentPayload,
        via: LaunchVia,
        trigger: Option<&Event>,
    ) -> LaunchResult {
        let Some(act) = app.activity(name) else {
            return LaunchResult::Failed;
        };
        if act.admits(&payload, &self.globals) {
            self.push(app, name, act, payload, via);
            return LaunchResult::Launched;
        }
        match &act.on_context_fault {
            ContextFault::LaunchFail => LaunchResult::Failed,
            ContextFault::FaultCrash { stack_trace_id } => {
                self.crash(
                    app,
                    CrashRecord {
                        stack_trace_id: stack_trace_id.clone(),
                        activity: name.into(),
                        state_id: act.entry_state.clone(),
                        triggering_event: trigger.cloned(),
                        launched_by: via,
                        event_index: self.event_count,
                    },
                );
                LaunchResult::Crashed {
                    stack_trace_id: stack_trace_id.clone(),
                }
            }
        }
    }

    fn crash(&mut self, app: &SimApp, record: CrashRecord) {
        self.crash_log.push(record);
        self.restart(app);
    }

    /// Kills and relaunches the app: back stack and globals are reset,
    /// crash log and coverage are kept.
    pub fn restart(&mut self, app: &SimApp) {
        self.frames.clear();
        self.globals = app.spec.globals_init.clone();
        self.enter_initial(app);
    }

    fn set_state(&mut self, app: &SimApp, state_id: &str) {
        let top = self.frames.last_mut().expect("back stack is never empty");
        top.state_id = state_id.into();
        top.hash = app.hash_of(&top.activity, state_id);
        self.coverage.unique_states.insert(top.hash);
    }

    /// Applies one GUI event and returns the resulting state.
    pub fn execute_event(&mut self, app: &SimApp, event: &Event) -> GuiState {
        self.event_count += 1;
        match event {
            Event::Back => {
                if self.frames.len() > 1 {
                    self.frames.pop();
                    let hash = self.top().hash;
                    self.coverage.unique_states.insert(hash);
                }
            }
            Event::Action { component, action } => {
                let top = self.top();
                let transition = app
                    .state(&top.activity, &top.state_id)
                    .filter(|s| {
                        s.tree
                            .find(component)
                            .is_some_and(|n| n.actions.contains(action))
                    })
                    .and_then(|s| s.transition(component, *action))
                    .cloned();
                if let Some(t) = transition {
                    self.coverage
                        .covered_methods
                        .extend(t.methods.iter().cloned());
                    self.apply(app, &t.effect, event);
                }
            }
        }
        self.current()
    }

    fn apply(&mut self, app: &SimApp, effect: &Effect, event: &Event) {
        match effect {
            Effect::GoState { state } => self.set_state(app, state),
            Effect::GoActivity { activity, trace } => {
                let payload = trace
                    .as_ref()
                    .and_then(|t| app.organic_payloads.get(t))
                    .cloned()
                    .unwrap_or_default();
                self.admit(app, activity, payload, LaunchVia::Organic, Some(event));
            }
            Effect::SetGlobal { key, value } => {
                self.globals.insert(key.clone(), value.clone());
            }
            Effect::Crash { stack_trace_id } => {
                let top = self.top();
                let record = CrashRecord {
                    stack_trace_id: stack_trace_id.clone(),
                    activity: top.activity.clone(),
                    state_id: top.state_id.clone(),
                    triggering_event: Some(event.clone()),
                    launched_by: top.via,
                    event_index: self.event_count,
                };
                self.crash(app, record);
            }
            Effect::NoOp => {}
        }
    }

    /// Starts the launcher's target from outside the app with the mocked-up
    /// context. Preconditions are not checked here.
    pub fn launch_via_deeplink(
        &mut self,
        app: &SimApp,
        launcher: &ActivityLauncher,
    ) -> LaunchResult {
        let Some(payload) = launcher.context.to_payload() else {
            return LaunchResult::Failed;
        };
        self.admit(app, &launcher.target, payload, LaunchVia::DeepLink, None)
    }

    /// Pops the back stack down to `target` and re-enters it at its entry
    /// state. Globals are left alone.
    pub fn launch_dynamic(&mut self, app: &SimApp, target: &str) -> Result<GuiState, SimError> {
        let idx = self
            .frames
            .iter()
            .rposition(|f| f.activity == target)
            .ok_or_else(|| SimError::NotOnStack(target.into()))?;
        self.frames.truncate(idx + 1);
        let entry = app
            .activity(target)
            .map(|a| a.entry_state.clone())
            .unwrap_or_default();
        self.set_state(app, &entry);
        *self.coverage.visit_counts.entry(target.into()).or_insert(0) += 1;
        Ok(self.current())
    }
}
