//! ICC context analysis: def-use resolution of intent attributes and extras
//! over sender traces, sender/receiver matching, and launcher assembly.
//!
//! A [`SenderTrace`] is a straight-line program that builds and sends one
//! intent. Control flow is collapsed into [`TraceStmt::BranchJoin`], which
//! defines a variable as "one of these values". Resolution walks the trace
//! once, keeping the reaching definition of every variable, so the value of
//! an attribute is whatever its last setter saw at the time of the call.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifest::{DeepLink, IntentFilter, LinkOrigin, Manifest};
use crate::value::{GlobalState, ScalarValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IccError {
    #[error(
        "trace `{trace}` references activity `{activity}` which is not declared in the manifest"
    )]
    UnknownActivity { trace: String, activity: String },
    #[error("malformed trace `{trace}`: {reason}")]
    MalformedTrace { trace: String, reason: String },
    #[error("no deep link available for receiver `{0}`")]
    MissingDeepLink(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    SetAction,
    SetType,
    SetData,
    SetFlags,
    SetIdentifier,
    SetClass,
    SetClassName,
    SetComponent,
    PutExtraPrimary,
    PutExtraObject,
    PutExtraBundle,
    StartActivity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operand {
    Var(String),
    Lit(ScalarValue),
}

impl Operand {
    pub fn var(name: &str) -> Self {
        Operand::Var(name.into())
    }

    pub fn lit(value: impl Into<ScalarValue>) -> Self {
        Operand::Lit(value.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceStmt {
    ConstAssign {
        var: String,
        value: ScalarValue,
    },
    NewIntent {
        var: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        explicit_target: Option<String>,
    },
    Call {
        receiver_var: String,
        method: MethodKind,
        #[serde(default)]
        args: Vec<Operand>,
    },
    BranchJoin {
        var: String,
        values: BTreeSet<ScalarValue>,
    },
}

/// Intent-building code path of one sender activity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenderTrace {
    /// File stem of the trace; filled in by the loader when absent.
    #[serde(default)]
    pub id: String,
    pub sender_activity: String,
    pub statements: Vec<TraceStmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Constant(ScalarValue),
    Unresolved,
    Absent,
}

impl Resolution {
    pub fn constant(&self) -> Option<&ScalarValue> {
        match self {
            Resolution::Constant(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtraKind {
    Primary,
    Object,
    Bundle,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtraValue {
    Scalar(ScalarValue),
    Map(BTreeMap<String, ScalarValue>),
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResolvedExtra {
    pub kind: ExtraKind,
    pub value: ExtraValue,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResolvedContext {
    pub action: Resolution,
    pub type_attr: Resolution,
    pub data_uri: Resolution,
    pub flags: Resolution,
    pub identifier: Resolution,
    pub extras: BTreeMap<String, ResolvedExtra>,
}

impl Default for ResolvedContext {
    fn default() -> Self {
        ResolvedContext {
            action: Resolution::Absent,
            type_attr: Resolution::Absent,
            data_uri: Resolution::Absent,
            flags: Resolution::Absent,
            identifier: Resolution::Absent,
            extras: BTreeMap::new(),
        }
    }
}

impl ResolvedContext {
    fn attributes(&self) -> [(&'static str, &Resolution); 5] {
        [
            ("action", &self.action),
            ("type", &self.type_attr),
            ("data", &self.data_uri),
            ("flags", &self.flags),
            ("identifier", &self.identifier),
        ]
    }

    pub fn has_unresolved(&self) -> bool {
        self.attributes()
            .iter()
            .any(|(_, r)| **r == Resolution::Unresolved)
            || self
                .extras
                .values()
                .any(|e| e.value == ExtraValue::Unresolved)
    }

    /// The concrete intent this context describes, if fully resolved.
    pub fn to_payload(&self) -> Option<IntentPayload> {
        if self.has_unresolved() {
            return None;
        }
        let attr = |r: &Resolution| r.constant().cloned();
        Some(IntentPayload {
            action: attr(&self.action),
            type_attr: attr(&self.type_attr),
            data_uri: attr(&self.data_uri),
            flags: attr(&self.flags),
            identifier: attr(&self.identifier),
            extras: self
                .extras
                .iter()
                .map(|(k, e)| {
                    let payload = match &e.value {
                        ExtraValue::Scalar(v) => ExtraPayload::Scalar(v.clone()),
                        ExtraValue::Map(m) => ExtraPayload::Map(m.clone()),
                        ExtraValue::Unresolved => unreachable!("checked above"),
                    };
                    (k.clone(), payload)
                })
                .collect(),
        })
    }

    /// Compact one-line rendering, e.g. `action="a1" extras{i=1,str="x"}`.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (name, r) in self.attributes() {
            match r {
                Resolution::Absent => {}
                Resolution::Constant(v) => {
                    let _ = write!(out, "{name}={v} ");
                }
                Resolution::Unresolved => {
                    let _ = write!(out, "{name}=? ");
                }
            }
        }
        if !self.extras.is_empty() {
            out.push_str("extras{");
            for (i, (k, e)) in self.extras.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match &e.value {
                    ExtraValue::Scalar(v) => {
                        let _ = write!(out, "{k}={v}");
                    }
                    ExtraValue::Map(m) => {
                        let _ = write!(out, "{k}={{");
                        for (j, (fk, fv)) in m.iter().enumerate() {
                            if j > 0 {
                                out.push(',');
                            }
                            let _ = write!(out, "{fk}={fv}");
                        }
                        out.push('}');
                    }
                    ExtraValue::Unresolved => {
                        let _ = write!(out, "{k}=?");
                    }
                }
            }
            out.push('}');
        }
        let trimmed = out.trim_end();
        if trimmed.is_empty() {
            "-".into()
        } else {
            trimmed.into()
        }
    }
}

/// Concrete extra delivered with an intent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtraPayload {
    Scalar(ScalarValue),
    Map(BTreeMap<String, ScalarValue>),
}

/// Concrete intent as seen by the receiver at runtime.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntentPayload {
    pub action: Option<ScalarValue>,
    pub type_attr: Option<ScalarValue>,
    pub data_uri: Option<ScalarValue>,
    pub flags: Option<ScalarValue>,
    pub identifier: Option<ScalarValue>,
    pub extras: BTreeMap<String, ExtraPayload>,
}

impl IntentPayload {
    /// Attribute by name: `action`, `type`, `data`, `flags` or `identifier`.
    pub fn attribute(&self, name: &str) -> Option<&ScalarValue> {
        match name {
            "action" => self.action.as_ref(),
            "type" => self.type_attr.as_ref(),
            "data" => self.data_uri.as_ref(),
            "flags" => self.flags.as_ref(),
            "identifier" => self.identifier.as_ref(),
            _ => None,
        }
    }

    /// Extra by path: `key` for a primary extra, `key.field` inside a bundle
    /// or object.
    pub fn extra(&self, path: &str) -> Option<&ScalarValue> {
        match path.split_once('.') {
            None => match self.extras.get(path)? {
                ExtraPayload::Scalar(v) => Some(v),
                ExtraPayload::Map(_) => None,
            },
            Some((key, field)) => match self.extras.get(key)? {
                ExtraPayload::Map(m) => m.get(field),
                ExtraPayload::Scalar(_) => None,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    Explicit,
    ImplicitMatched,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentLink {
    pub sender: String,
    pub receiver: String,
    pub kind: LinkKind,
    pub context: ResolvedContext,
    pub trace_id: String,
}

/// A precondition a launch target places on app-wide state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContextRequirement {
    Global {
        key: String,
        value: ScalarValue,
    },
    /// Permissions are granted up front, so these always hold.
    DeviceConfig {
        permission: String,
    },
}

impl ContextRequirement {
    pub fn is_satisfied(&self, globals: &GlobalState) -> bool {
        match self {
            ContextRequirement::Global { key, value } => globals.get(key) == Some(value),
            ContextRequirement::DeviceConfig { .. } => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LauncherStatus {
    Ready,
    ConservativeSkip,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityLauncher {
    pub target: String,
    pub deep_link: DeepLink,
    pub context: ResolvedContext,
    pub preconditions: BTreeSet<ContextRequirement>,
    pub status: LauncherStatus,
}

/// How `BranchJoin` definitions are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum JoinReading {
    /// Multi-valued joins are unresolved (static analysis).
    Ambiguous,
    /// The smallest value is taken (what one concrete execution delivers).
    Concrete,
}

#[derive(Debug, Clone)]
enum Def {
    Scalar(Resolution),
    Intent(usize),
}

#[derive(Debug, Clone, Default)]
struct IntentState {
    context: ResolvedContext,
    target: Option<Resolution>,
}

/// What one trace sends.
#[derive(Debug, Clone)]
pub(crate) struct TraceSummary {
    pub context: ResolvedContext,
    /// `None` for implicit intents.
    pub target: Option<Resolution>,
    pub sends: bool,
}

pub(crate) fn analyze_trace(
    trace: &SenderTrace,
    reading: JoinReading,
) -> Result<TraceSummary, IccError> {
    let malformed = |reason: String| IccError::MalformedTrace {
        trace: trace.id.clone(),
        reason,
    };
    let mut env: BTreeMap<&str, Def> = BTreeMap::new();
    let mut intents: Vec<IntentState> = Vec::new();
    let mut sent: Option<usize> = None;
    let last = trace.statements.len().saturating_sub(1);

    for (pos, stmt) in trace.statements.iter().enumerate() {
        match stmt {
            TraceStmt::ConstAssign { var, value } => {
                env.insert(var, Def::Scalar(Resolution::Constant(value.clone())));
            }
            TraceStmt::BranchJoin { var, values } => {
                let res = match (values.len(), reading) {
                    (0, _) => {
                        return Err(malformed(format!("branch join on `{var}` has no values")))
                    }
                    (1, _) | (_, JoinReading::Concrete) => Resolution::Constant(
                        values
                            .iter()
                            .next()
                            .cloned()
                            .unwrap_or(ScalarValue::Bool(false)),
                    ),
                    _ => Resolution::Unresolved,
                };
                env.insert(var, Def::Scalar(res));
            }
            TraceStmt::NewIntent {
                var,
                explicit_target,
            } => {
                intents.push(IntentState {
                    context: ResolvedContext::default(),
                    target: explicit_target
                        .as_ref()
                        .map(|t| Resolution::Constant(ScalarValue::Str(t.clone()))),
                });
                env.insert(var, Def::Intent(intents.len() - 1));
            }
            TraceStmt::Call {
                receiver_var,
                method,
                args,
            } => {
                let idx = match env.get(receiver_var.as_str()) {
                    Some(Def::Intent(i)) => *i,
                    Some(Def::Scalar(_)) => {
                        return Err(malformed(format!("`{receiver_var}` is not an intent")))
                    }
                    None => {
                        return Err(malformed(format!(
                            "`{receiver_var}` used before definition"
                        )))
                    }
                };
                let resolve = |op: &Operand| -> Result<Resolution, IccError> {
                    match op {
                        Operand::Lit(v) => Ok(Resolution::Constant(v.clone())),
                        Operand::Var(name) => match env.get(name.as_str()) {
                            Some(Def::Scalar(r)) => Ok(r.clone()),
                            Some(Def::Intent(_)) => {
                                Err(malformed(format!("intent `{name}` used as a value")))
                            }
                            None => Err(malformed(format!("`{name}` used before definition"))),
                        },
                    }
                };
                let key_of = |op: &Operand| -> Result<String, IccError> {
                    match resolve(op)? {
                        Resolution::Constant(ScalarValue::Str(k)) => Ok(k),
                        _ => Err(malformed(format!(
                            "{method:?} key must be a constant string"
                        ))),
                    }
                };
                let arity = |n: usize| -> Result<(), IccError> {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(malformed(format!(
                            "{method:?} takes {n} argument(s), got {}",
                            args.len()
                        )))
                    }
                };
                let fields = |rest: &[Operand]| -> Result<ExtraValue, IccError> {
                    if !rest.len().is_multiple_of(2) {
                        return Err(malformed(format!("{method:?} needs key/value pairs")));
                    }
                    // Later writes to a field replace earlier ones.
                    let mut slots = BTreeMap::new();
                    for pair in rest.chunks(2) {
                        slots.insert(key_of(&pair[0])?, resolve(&pair[1])?);
                    }
                    let mut map = BTreeMap::new();
                    for (k, v) in slots {
                        match v {
                            Resolution::Constant(v) => {
                                map.insert(k, v);
                            }
                            _ => return Ok(ExtraValue::Unresolved),
                        }
                    }
                    Ok(ExtraValue::Map(map))
                };

                match method {
                    MethodKind::SetAction
                    | MethodKind::SetType
                    | MethodKind::SetData
                    | MethodKind::SetFlags
                    | MethodKind::SetIdentifier => {
                        arity(1)?;
                        let value = resolve(&args[0])?;
                        let ctx = &mut intents[idx].context;
                        let slot = match method {
                            MethodKind::SetAction => &mut ctx.action,
                            MethodKind::SetType => &mut ctx.type_attr,
                            MethodKind::SetData => &mut ctx.data_uri,
                            MethodKind::SetFlags => &mut ctx.flags,
                            _ => &mut ctx.identifier,
                        };
                        *slot = value;
                    }
                    MethodKind::SetClass | MethodKind::SetClassName | MethodKind::SetComponent => {
                        // setClassName(pkg, cls) and setClass(ctx, cls): the class is last.
                        let Some(class) = args.last() else {
                            return Err(malformed(format!("{method:?} needs a class argument")));
                        };
                        intents[idx].target = Some(resolve(class)?);
                    }
                    MethodKind::PutExtraPrimary => {
                        arity(2)?;
                        let key = key_of(&args[0])?;
                        let value = match resolve(&args[1])? {
                            Resolution::Constant(v) => ExtraValue::Scalar(v),
                            _ => ExtraValue::Unresolved,
                        };
                        intents[idx].context.extras.insert(
                            key,
                            ResolvedExtra {
                                kind: ExtraKind::Primary,
                                value,
                            },
                        );
                    }
                    MethodKind::PutExtraObject | MethodKind::PutExtraBundle => {
                        let Some((key, rest)) = args.split_first() else {
                            return Err(malformed(format!("{method:?} needs a key")));
                        };
                        let key = key_of(key)?;
                        let kind = if *method == MethodKind::PutExtraObject {
                            ExtraKind::Object
                        } else {
                            ExtraKind::Bundle
                        };
                        let value = fields(rest)?;
                        intents[idx]
                            .context
                            .extras
                            .insert(key, ResolvedExtra { kind, value });
                    }
                    MethodKind::StartActivity => {
                        if sent.is_some() || pos != last {
                            return Err(malformed(
                                "StartActivity must appear once, as the final statement".into(),
                            ));
                        }
                        sent = Some(idx);
                    }
                }
            }
        }
    }

    let chosen = sent.or(intents.len().checked_sub(1));
    let state = chosen.map(|i| intents[i].clone()).unwrap_or_default();
    Ok(TraceSummary {
        context: state.context,
        target: state.target,
        sends: sent.is_some(),
    })
}

/// Resolves the context of the intent a trace sends (or, without a send,
/// of the last intent it creates).
pub fn resolve_context(trace: &SenderTrace) -> Result<ResolvedContext, IccError> {
    analyze_trace(trace, JoinReading::Ambiguous).map(|s| s.context)
}

/// The intent one concrete execution of the trace delivers: joins take their
/// smallest value.
pub fn concrete_payload(trace: &SenderTrace) -> Result<IntentPayload, IccError> {
    let summary = analyze_trace(trace, JoinReading::Concrete)?;
    Ok(summary.context.to_payload().unwrap_or_default())
}

fn filter_accepts(filter: &IntentFilter, ctx: &ResolvedContext) -> bool {
    let Some(ScalarValue::Str(action)) = ctx.action.constant() else {
        return false;
    };
    if !filter.actions.contains(action) {
        return false;
    }
    match &ctx.data_uri {
        Resolution::Absent => filter.data_specs.is_empty(),
        Resolution::Unresolved => false,
        Resolution::Constant(v) => {
            let Some(uri) = v.as_str() else { return false };
            let (scheme, rest) = uri.split_once("://").unwrap_or((uri, ""));
            let (host, path) = match rest.find(['/', '?']) {
                Some(i) => (&rest[..i], &rest[i..]),
                None => (rest, ""),
            };
            let path = path.split('?').next().unwrap_or_default();
            filter.data_specs.iter().any(|d| {
                d.scheme.as_deref().is_none_or(|s| s == scheme)
                    && d.host.as_deref().is_none_or(|h| h == host)
                    && d.path.as_deref().is_none_or(|p| p == path)
            })
        }
    }
}

/// Pairs every sending trace with its receiver(s).
///
/// Explicit intents name their receiver; implicit intents are matched
/// against every receiver's intent filters on constant action and data.
/// Filters with wildcard data patterns never produce a link, and traces whose
/// target or action cannot be resolved to a constant are skipped.
pub fn match_intent_pairs(
    traces: &[SenderTrace],
    manifest: &Manifest,
) -> Result<Vec<IntentLink>, IccError> {
    let mut links = Vec::new();
    for trace in traces {
        let unknown = |activity: &str| IccError::UnknownActivity {
            trace: trace.id.clone(),
            activity: activity.into(),
        };
        if !manifest.contains(&trace.sender_activity) {
            return Err(unknown(&trace.sender_activity));
        }
        let summary = analyze_trace(trace, JoinReading::Ambiguous)?;
        if !summary.sends {
            continue;
        }
        let link = |receiver: &str, kind| IntentLink {
            sender: trace.sender_activity.clone(),
            receiver: receiver.into(),
            kind,
            context: summary.context.clone(),
            trace_id: trace.id.clone(),
        };
        match &summary.target {
            Some(Resolution::Constant(target)) => {
                let name = match target {
                    ScalarValue::Str(s) => s.clone(),
                    other => other.to_string(),
                };
                if !manifest.contains(&name) {
                    return Err(unknown(&name));
                }
                links.push(link(&name, LinkKind::Explicit));
            }
            Some(_) => {}
            None => {
                for activity in &manifest.activities {
                    let matched = activity
                        .intent_filters
                        .iter()
                        .filter(|f| !f.has_wildcard())
                        .any(|f| filter_accepts(f, &summary.context));
                    if matched {
                        links.push(link(&activity.name, LinkKind::ImplicitMatched));
                    }
                }
            }
        }
    }
    Ok(links)
}

/// One launcher per receiver and distinct resolved context.
///
/// Extracted deep links are preferred over bound ones. A context with any
/// unresolved attribute or extra yields a `ConservativeSkip` launcher.
pub fn build_launchers(
    links: &[IntentLink],
    deep_links: &[DeepLink],
    requirements: &BTreeMap<String, BTreeSet<ContextRequirement>>,
) -> Result<Vec<ActivityLauncher>, IccError> {
    let mut seen: BTreeSet<(&str, &ResolvedContext)> = BTreeSet::new();
    let mut launchers = Vec::new();
    for link in links {
        if !seen.insert((&link.receiver, &link.context)) {
            continue;
        }
        let for_receiver = || deep_links.iter().filter(|d| d.activity == link.receiver);
        let deep_link = for_receiver()
            .find(|d| d.origin == LinkOrigin::Extracted)
            .or_else(|| for_receiver().next())
            .ok_or_else(|| IccError::MissingDeepLink(link.receiver.clone()))?;
        let status = if link.context.has_unresolved() {
            LauncherStatus::ConservativeSkip
        } else {
            LauncherStatus::Ready
        };
        launchers.push(ActivityLauncher {
            target: link.receiver.clone(),
            deep_link: deep_link.clone(),
            context: link.context.clone(),
            preconditions: requirements
                .get(&link.receiver)
                .cloned()
                .unwrap_or_default(),
            status,
        });
    }
    launchers.sort_by(|a, b| a.target.cmp(&b.target));
    Ok(launchers)
}

/// True when every precondition of the launcher holds in `globals`.
pub fn check_context_ready(launcher: &ActivityLauncher, globals: &GlobalState) -> bool {
    launcher
        .preconditions
        .iter()
        .all(|r| r.is_satisfied(globals))
}
