//! Manifest model, deep-link extraction and deep-link binding.
//!
//! Only the element subset needed for deep-link analysis is modelled
//! (`manifest`, `application`, `activity`, `intent-filter`, `action`,
//! `category`, `data`). Everything else is kept as opaque [`XmlNode`]s so a
//! rewritten manifest still carries the original content. Known children are
//! always written before opaque ones, which makes serialization canonical
//! after one parse/serialize cycle.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ACTION_VIEW: &str = "android.intent.action.VIEW";
pub const CATEGORY_BROWSABLE: &str = "android.intent.category.BROWSABLE";
pub const CATEGORY_DEFAULT: &str = "android.intent.category.DEFAULT";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("malformed manifest XML: {0}")]
    MalformedXml(String),
    #[error("activity `{0}` is declared more than once")]
    DuplicateActivity(String),
    #[error("scheme `{0}` is already used by an existing deep link")]
    SchemeCollision(String),
    #[error("binding scheme and host prefix must be non-empty")]
    EmptyBindingParameter,
}

/// Attribute list in document order.
pub type Attributes = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct XmlElement {
    pub name: String,
    pub attrs: Attributes,
    pub children: Vec<XmlNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XmlNode {
    Element(XmlElement),
    Text(String),
    Comment(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub package_name: String,
    pub activities: Vec<ActivityDecl>,
    /// Attributes of `<manifest>` other than `package` (namespaces, versions).
    pub extra_attrs: Attributes,
    /// Children of `<manifest>` other than `<application>`.
    pub other_nodes: Vec<XmlNode>,
    /// How many of `other_nodes` precede `<application>`.
    pub nodes_before_application: usize,
    pub application_attrs: Attributes,
    /// Children of `<application>` other than `<activity>`.
    pub application_nodes: Vec<XmlNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActivityDecl {
    pub name: String,
    pub exported: bool,
    pub intent_filters: Vec<IntentFilter>,
    pub extra_attrs: Attributes,
    pub other_nodes: Vec<XmlNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntentFilter {
    pub actions: BTreeSet<String>,
    pub categories: BTreeSet<String>,
    pub data_specs: Vec<DataSpec>,
    pub extra_attrs: Attributes,
    pub other_nodes: Vec<XmlNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DataSpec {
    pub scheme: Option<String>,
    pub host: Option<String>,
    pub path: Option<String>,
    /// Remaining `<data>` attributes (`port`, `pathPrefix`, `mimeType`, ...).
    pub extra_attrs: Attributes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkOrigin {
    Extracted,
    Bound,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeepLink {
    pub activity: String,
    pub uri: String,
    pub origin: LinkOrigin,
    /// Index of the source filter within the activity's `intent_filters`.
    pub filter_index: usize,
}

impl DeepLink {
    pub fn scheme(&self) -> &str {
        self.uri.split("://").next().unwrap_or_default()
    }

    pub fn host(&self) -> &str {
        let rest = self
            .uri
            .split_once("://")
            .map(|(_, r)| r)
            .unwrap_or_default();
        rest.split(['/', '?']).next().unwrap_or_default()
    }
}

impl DataSpec {
    pub fn new(scheme: &str, host: &str) -> Self {
        DataSpec {
            scheme: Some(scheme.into()),
            host: Some(host.into()),
            ..Default::default()
        }
    }

    fn has_scheme_and_host(&self) -> bool {
        let filled = |v: &Option<String>| v.as_deref().is_some_and(|s| !s.is_empty());
        filled(&self.scheme) && filled(&self.host)
    }

    /// `scheme://host[/path]`, or `None` when scheme or host is missing.
    pub fn uri(&self) -> Option<String> {
        if !self.has_scheme_and_host() {
            return None;
        }
        let mut uri = format!(
            "{}://{}",
            self.scheme.as_deref().unwrap_or_default(),
            self.host.as_deref().unwrap_or_default()
        );
        if let Some(path) = self.path.as_deref().filter(|p| !p.is_empty()) {
            if !path.starts_with('/') {
                uri.push('/');
            }
            uri.push_str(path);
        }
        Some(uri)
    }

    fn has_wildcard(&self) -> bool {
        [&self.scheme, &self.host, &self.path]
            .into_iter()
            .flatten()
            .chain(self.extra_attrs.iter().map(|(_, v)| v))
            .any(|v| v.contains('*'))
    }
}

impl IntentFilter {
    /// A filter qualifies as a deep link when it carries the VIEW action, the
    /// BROWSABLE category and at least one data spec with scheme and host.
    pub fn is_deep_link(&self) -> bool {
        self.actions.contains(ACTION_VIEW)
            && self.categories.contains(CATEGORY_BROWSABLE)
            && self.data_specs.iter().any(DataSpec::has_scheme_and_host)
    }

    pub fn deep_link_uri(&self) -> Option<String> {
        if !self.is_deep_link() {
            return None;
        }
        self.data_specs.iter().find_map(DataSpec::uri)
    }

    /// True when any data attribute uses a `*` pattern.
    pub fn has_wildcard(&self) -> bool {
        self.data_specs.iter().any(DataSpec::has_wildcard)
    }

    fn bound(scheme: &str, host: &str) -> Self {
        IntentFilter {
            actions: [ACTION_VIEW.to_string()].into_iter().collect(),
            categories: [CATEGORY_BROWSABLE, CATEGORY_DEFAULT]
                .into_iter()
                .map(String::from)
                .collect(),
            data_specs: alloc::vec![DataSpec::new(scheme, host)],
            ..Default::default()
        }
    }
}

impl ActivityDecl {
    pub fn new(name: &str) -> Self {
        ActivityDecl {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn has_deep_link(&self) -> bool {
        self.intent_filters.iter().any(IntentFilter::is_deep_link)
    }

    /// Lowercased class name after the last `.`.
    pub fn simple_name(&self) -> String {
        simple_name(&self.name).to_lowercase()
    }
}

pub(crate) fn simple_name(qualified: &str) -> &str {
    qualified.rsplit('.').next().unwrap_or(qualified)
}

impl Manifest {
    pub fn new(package_name: &str) -> Self {
        Manifest {
            package_name: package_name.into(),
            ..Default::default()
        }
    }

    pub fn activity(&self, name: &str) -> Option<&ActivityDecl> {
        self.activities.iter().find(|a| a.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.activity(name).is_some()
    }

    pub fn activity_names(&self) -> impl Iterator<Item = &str> {
        self.activities.iter().map(|a| a.name.as_str())
    }

    /// Fails with [`ManifestError::DuplicateActivity`] on the first repeated name.
    pub fn check_unique_activities(&self) -> Result<(), ManifestError> {
        let mut seen = BTreeSet::new();
        for a in &self.activities {
            if !seen.insert(a.name.as_str()) {
                return Err(ManifestError::DuplicateActivity(a.name.clone()));
            }
        }
        Ok(())
    }
}

/// One [`DeepLink`] per qualifying intent filter, in document order.
pub fn extract_deep_links(manifest: &Manifest) -> Vec<DeepLink> {
    manifest
        .activities
        .iter()
        .flat_map(|activity| {
            activity
                .intent_filters
                .iter()
                .enumerate()
                .filter_map(move |(filter_index, filter)| {
                    filter.deep_link_uri().map(|uri| DeepLink {
                        activity: activity.name.clone(),
                        uri,
                        origin: LinkOrigin::Extracted,
                        filter_index,
                    })
                })
        })
        .collect()
}

/// Injects a deep-link filter into every activity that has none.
///
/// Each bound activity is exported and gains a filter with VIEW, BROWSABLE,
/// DEFAULT and `scheme://<host_prefix>.<simple name>`. Activities that already
/// expose a deep link are left as they are.
pub fn bind_deep_links(
    manifest: &Manifest,
    scheme: &str,
    host_prefix: &str,
) -> Result<(Manifest, Vec<DeepLink>), ManifestError> {
    if scheme.is_empty() || host_prefix.is_empty() {
        return Err(ManifestError::EmptyBindingParameter);
    }
    if extract_deep_links(manifest)
        .iter()
        .any(|l| l.scheme().eq_ignore_ascii_case(scheme))
    {
        return Err(ManifestError::SchemeCollision(scheme.into()));
    }

    let mut bound = manifest.clone();
    let mut links = Vec::new();
    let mut hosts: BTreeMap<String, usize> = BTreeMap::new();
    for activity in bound.activities.iter_mut().filter(|a| !a.has_deep_link()) {
        let mut host = format!("{host_prefix}.{}", activity.simple_name());
        // Same simple name in two packages: suffix the later ones.
        let seen = hosts.entry(host.clone()).or_insert(0);
        *seen += 1;
        if *seen > 1 {
            host = format!("{host}{}", *seen);
        }
        activity.exported = true;
        activity
            .intent_filters
            .push(IntentFilter::bound(scheme, &host));
        links.push(DeepLink {
            activity: activity.name.clone(),
            uri: format!("{scheme}://{host}"),
            origin: LinkOrigin::Bound,
            filter_index: activity.intent_filters.len() - 1,
        });
    }
    Ok((bound, links))
}
