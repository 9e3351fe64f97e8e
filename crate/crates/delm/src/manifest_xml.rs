//! Manifest XML reading and canonical writing.

use std::fmt::Write as _;

use delm_core::manifest::{
    ActivityDecl, Attributes, DataSpec, IntentFilter, Manifest, ManifestError, XmlElement, XmlNode,
};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

const NAME: &str = "android:name";
const EXPORTED: &str = "android:exported";
const SCHEME: &str = "android:scheme";
const HOST: &str = "android:host";
const PATH: &str = "android:path";

fn malformed(msg: impl ToString) -> ManifestError {
    ManifestError::MalformedXml(msg.to_string())
}

fn start_element(e: &BytesStart<'_>) -> Result<XmlElement, ManifestError> {
    let name = String::from_utf8(e.name().as_ref().to_vec()).map_err(malformed)?;
    let mut attrs = Attributes::new();
    for a in e.attributes() {
        let a = a.map_err(malformed)?;
        let key = String::from_utf8(a.key.as_ref().to_vec()).map_err(malformed)?;
        let value = a.unescape_value().map_err(malformed)?.into_owned();
        attrs.push((key, value));
    }
    Ok(XmlElement {
        name,
        attrs,
        children: Vec::new(),
    })
}

/// Parses XML into a generic element tree rooted at the document element.
fn parse_tree(xml: &str) -> Result<XmlElement, ManifestError> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().trim_text(true);
    let mut stack: Vec<XmlElement> = Vec::new();
    let mut root: Option<XmlElement> = None;

    fn attach(
        stack: &mut [XmlElement],
        root: &mut Option<XmlElement>,
        node: XmlNode,
    ) -> Result<(), ManifestError> {
        match (stack.last_mut(), node) {
            (Some(parent), node) => parent.children.push(node),
            (None, XmlNode::Element(e)) => {
                if root.is_some() {
                    return Err(malformed("more than one root element"));
                }
                *root = Some(e);
            }
            (None, XmlNode::Text(_)) => return Err(malformed("text outside the root element")),
            (None, XmlNode::Comment(_)) => {}
        }
        Ok(())
    }

    loop {
        match reader.read_event().map_err(malformed)? {
            Event::Start(e) => stack.push(start_element(&e)?),
            Event::Empty(e) => {
                let el = start_element(&e)?;
                attach(&mut stack, &mut root, XmlNode::Element(el))?;
            }
            Event::End(_) => {
                let el = stack.pop().ok_or_else(|| malformed("unbalanced end tag"))?;
                attach(&mut stack, &mut root, XmlNode::Element(el))?;
            }
            Event::Text(t) => {
                let text = t.unescape().map_err(malformed)?.into_owned();
                if !text.is_empty() {
                    attach(&mut stack, &mut root, XmlNode::Text(text))?;
                }
            }
            Event::CData(c) => {
                let text = String::from_utf8(c.into_inner().into_owned()).map_err(malformed)?;
                attach(&mut stack, &mut root, XmlNode::Text(text))?;
            }
            Event::Comment(c) => {
                let text = String::from_utf8(c.into_inner().into_owned()).map_err(malformed)?;
                attach(&mut stack, &mut root, XmlNode::Comment(text))?;
            }
            Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }
    if !stack.is_empty() {
        return Err(malformed("unexpected end of document"));
    }
    root.ok_or_else(|| malformed("no root element"))
}

fn take_attr(attrs: &mut Attributes, key: &str) -> Option<String> {
    let i = attrs.iter().position(|(k, _)| k == key)?;
    Some(attrs.remove(i).1)
}

fn element_named<'a>(node: &'a XmlNode, name: &str) -> Option<&'a XmlElement> {
    match node {
        XmlNode::Element(e) if e.name == name => Some(e),
        _ => None,
    }
}

fn to_filter(el: &XmlElement) -> IntentFilter {
    let mut f = IntentFilter {
        extra_attrs: el.attrs.clone(),
        ..Default::default()
    };
    for child in &el.children {
        let known = match child {
            XmlNode::Element(e) if e.name == "action" || e.name == "category" => {
                let mut attrs = e.attrs.clone();
                let name = take_attr(&mut attrs, NAME);
                match name {
                    Some(n) if attrs.is_empty() && e.children.is_empty() => {
                        if e.name == "action" {
                            f.actions.insert(n);
                        } else {
                            f.categories.insert(n);
                        }
                        true
                    }
                    _ => false,
                }
            }
            XmlNode::Element(e) if e.name == "data" && e.children.is_empty() => {
                let mut attrs = e.attrs.clone();
                f.data_specs.push(DataSpec {
                    scheme: take_attr(&mut attrs, SCHEME),
                    host: take_attr(&mut attrs, HOST),
                    path: take_attr(&mut attrs, PATH),
                    extra_attrs: attrs,
                });
                true
            }
            _ => false,
        };
        if !known {
            f.other_nodes.push(child.clone());
        }
    }
    f
}

fn to_activity(el: &XmlElement) -> Result<ActivityDecl, ManifestError> {
    let mut attrs = el.attrs.clone();
    let name =
        take_attr(&mut attrs, NAME).ok_or_else(|| malformed("activity without android:name"))?;
    let exported = take_attr(&mut attrs, EXPORTED).is_some_and(|v| v == "true");
    let mut a = ActivityDecl {
        name,
        exported,
        extra_attrs: attrs,
        ..Default::default()
    };
    for child in &el.children {
        match element_named(child, "intent-filter") {
            Some(f) => a.intent_filters.push(to_filter(f)),
            None => a.other_nodes.push(child.clone()),
        }
    }
    Ok(a)
}

/// Parses manifest XML. Content outside the modelled subset is kept
/// opaquely.
pub fn parse_manifest(xml: &str) -> Result<Manifest, ManifestError> {
    let root = parse_tree(xml)?;
    if root.name != "manifest" {
        return Err(malformed(format!(
            "root element is <{}>, expected <manifest>",
            root.name
        )));
    }
    let mut extra_attrs = root.attrs.clone();
    let package_name = take_attr(&mut extra_attrs, "package").unwrap_or_default();
    let mut m = Manifest {
        package_name,
        extra_attrs,
        ..Default::default()
    };
    let mut seen_application = false;
    for child in &root.children {
        match element_named(child, "application") {
            Some(app) if !seen_application => {
                seen_application = true;
                m.nodes_before_application = m.other_nodes.len();
                m.application_attrs = app.attrs.clone();
                for node in &app.children {
                    match element_named(node, "activity") {
                        Some(a) => m.activities.push(to_activity(a)?),
                        None => m.application_nodes.push(node.clone()),
                    }
                }
            }
            _ => m.other_nodes.push(child.clone()),
        }
    }
    m.check_unique_activities()?;
    Ok(m)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

struct Writer {
    out: String,
}

impl Writer {
    fn indent(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str("    ");
        }
    }

    fn open(&mut self, depth: usize, name: &str, attrs: &[(&str, &str)], empty: bool) {
        self.indent(depth);
        let _ = write!(self.out, "<{name}");
        for (k, v) in attrs {
            let _ = write!(self.out, " {k}=\"{}\"", escape(v));
        }
        self.out.push_str(if empty { " />\n" } else { ">\n" });
    }

    fn close(&mut self, depth: usize, name: &str) {
        self.indent(depth);
        let _ = writeln!(self.out, "</{name}>");
    }

    fn node(&mut self, depth: usize, node: &XmlNode) {
        match node {
            XmlNode::Element(e) => {
                let attrs: Vec<(&str, &str)> = e
                    .attrs
                    .iter()
                    .map(|(k, v)| (k.as_str(), v.as_str()))
                    .collect();
                self.open(depth, &e.name, &attrs, e.children.is_empty());
                if !e.children.is_empty() {
                    for c in &e.children {
                        self.node(depth + 1, c);
                    }
                    self.close(depth, &e.name);
                }
            }
            XmlNode::Text(t) => {
                self.indent(depth);
                self.out.push_str(&escape(t));
                self.out.push('\n');
            }
            XmlNode::Comment(c) => {
                self.indent(depth);
                let _ = writeln!(self.out, "<!--{c}-->");
            }
        }
    }

    fn filter(&mut self, depth: usize, f: &IntentFilter) {
        let attrs: Vec<(&str, &str)> = f
            .extra_attrs
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        self.open(depth, "intent-filter", &attrs, false);
        for a in &f.actions {
            self.open(depth + 1, "action", &[(NAME, a)], true);
        }
        for c in &f.categories {
            self.open(depth + 1, "category", &[(NAME, c)], true);
        }
        for d in &f.data_specs {
            let mut attrs: Vec<(&str, &str)> = Vec::new();
            for (k, v) in [(SCHEME, &d.scheme), (HOST, &d.host), (PATH, &d.path)] {
                if let Some(v) = v {
                    attrs.push((k, v));
                }
            }
            attrs.extend(d.extra_attrs.iter().map(|(k, v)| (k.as_str(), v.as_str())));
            self.open(depth + 1, "data", &attrs, true);
        }
        for n in &f.other_nodes {
            self.node(depth + 1, n);
        }
        self.close(depth, "intent-filter");
    }

    fn activity(&mut self, depth: usize, a: &ActivityDecl) {
        let exported = if a.exported { "true" } else { "false" };
        let mut attrs: Vec<(&str, &str)> = vec![(NAME, &a.name), (EXPORTED, exported)];
        attrs.extend(a.extra_attrs.iter().map(|(k, v)| (k.as_str(), v.as_str())));
        let empty = a.intent_filters.is_empty() && a.other_nodes.is_empty();
        self.open(depth, "activity", &attrs, empty);
        if empty {
            return;
        }
        for f in &a.intent_filters {
            self.filter(depth + 1, f);
        }
        for n in &a.other_nodes {
            self.node(depth + 1, n);
        }
        self.close(depth, "activity");
    }
}

/// Canonical XML for `m`: UTF-8 declaration, four-space indentation, LF
/// line endings. Inside an element, modelled content precedes opaque content.
pub fn serialize_manifest(m: &Manifest) -> String {
    let mut w = Writer {
        out: String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n"),
    };
    let (ns, rest): (Vec<_>, Vec<_>) = m
        .extra_attrs
        .iter()
        .partition(|(k, _)| k.starts_with("xmlns"));
    let mut attrs: Vec<(&str, &str)> = ns.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    attrs.push(("package", &m.package_name));
    attrs.extend(rest.iter().map(|(k, v)| (k.as_str(), v.as_str())));
    w.open(0, "manifest", &attrs, false);

    let split = m.nodes_before_application.min(m.other_nodes.len());
    for n in &m.other_nodes[..split] {
        w.node(1, n);
    }
    let app_attrs: Vec<(&str, &str)> = m
        .application_attrs
        .iter()
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .collect();
    let app_empty = m.activities.is_empty() && m.application_nodes.is_empty();
    w.open(1, "application", &app_attrs, app_empty);
    if !app_empty {
        for a in &m.activities {
            w.activity(2, a);
        }
        for n in &m.application_nodes {
            w.node(2, n);
        }
        w.close(1, "application");
    }
    for n in &m.other_nodes[split..] {
        w.node(1, n);
    }
    w.close(0, "manifest");
    w.out
}
