//! The PP-XML document model and its XML form.
//!
//! ```text
//! policy     := (paragraph | segment)*
//! segment    := title (paragraph | segment)*        @level 1..4
//! paragraph  := text list*                          @id @labels?
//! list       := item+
//! item       := text list*
//! ```
//!
//! Titles and paragraphs carry ids `n0001`, `n0002`, ... in document order;
//! labels are `;`-joined concept ids.

use std::collections::HashSet;
use std::fmt::Write as _;

use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};
use thiserror::Error;

pub const MAX_SEGMENT_LEVEL: u8 = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PpXmlError {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("{0}")]
    Schema(String),
}

fn schema(msg: impl Into<String>) -> PpXmlError {
    PpXmlError::Schema(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolicyDocument {
    pub source: Option<String>,
    pub children: Vec<PolicyChild>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyChild {
    Segment(Segment),
    Paragraph(Paragraph),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub level: u8,
    pub title: Title,
    pub children: Vec<PolicyChild>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Title {
    pub id: String,
    pub text: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Paragraph {
    pub id: String,
    pub text: String,
    pub labels: Vec<String>,
    pub lists: Vec<List>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct List {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Item {
    pub text: String,
    pub lists: Vec<List>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Title,
    Paragraph,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Title => "title",
            NodeKind::Paragraph => "paragraph",
        }
    }
}

/// A title or paragraph seen during a document-order walk, with the
/// context the classifiers use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextNodeRef<'a> {
    pub id: &'a str,
    pub kind: NodeKind,
    pub text: String,
    pub labels: &'a [String],
    /// Title of the enclosing segment. For a title this is the title of the
    /// segment one level up.
    pub parent_title_id: Option<&'a str>,
    /// Nearest earlier paragraph in the same container for paragraphs, or
    /// the title of the nearest earlier sibling segment for titles.
    pub preceding_sibling_id: Option<&'a str>,
    /// Nesting level of the enclosing segment (0 at the policy root).
    pub segment_level: u8,
}

/// Formats the id of the `index`-th (1-based) title/paragraph.
pub fn node_id(index: usize) -> String {
    format!("n{index:04}")
}

fn is_valid_id(id: &str) -> bool {
    id.len() >= 5 && id.starts_with('n') && id[1..].bytes().all(|b| b.is_ascii_digit())
}

fn id_index(id: &str) -> usize {
    id[1..].parse().unwrap_or(usize::MAX)
}

impl Paragraph {
    /// Paragraph text followed by the text of every list item.
    pub fn full_text(&self) -> String {
        let mut parts = vec![self.text.clone()];
        fn walk(lists: &[List], parts: &mut Vec<String>) {
            for l in lists {
                for it in &l.items {
                    parts.push(it.text.clone());
                    walk(&it.lists, parts);
                }
            }
        }
        walk(&self.lists, &mut parts);
        parts.retain(|p| !p.trim().is_empty());
        parts.join(" ")
    }
}

impl PolicyDocument {
    /// Titles and paragraphs in document order.
    pub fn text_nodes(&self) -> Vec<TextNodeRef<'_>> {
        let mut out = Vec::new();
        walk_children(&self.children, None, 0, &mut out);
        out
    }

    pub fn node_count(&self) -> usize {
        self.text_nodes().len()
    }

    /// Reassigns ids `n0001..` in document order.
    pub fn renumber(&mut self) {
        let mut next = 1;
        fn visit(children: &mut [PolicyChild], next: &mut usize) {
            for c in children {
                match c {
                    PolicyChild::Paragraph(p) => {
                        p.id = node_id(*next);
                        *next += 1;
                    }
                    PolicyChild::Segment(s) => {
                        s.title.id = node_id(*next);
                        *next += 1;
                        visit(&mut s.children, next);
                    }
                }
            }
        }
        visit(&mut self.children, &mut next);
    }

    /// Mutable access to the label list of the node with `id`.
    pub fn labels_mut(&mut self, id: &str) -> Option<&mut Vec<String>> {
        fn find<'a>(children: &'a mut [PolicyChild], id: &str) -> Option<&'a mut Vec<String>> {
            for c in children {
                match c {
                    PolicyChild::Paragraph(p) if p.id == id => return Some(&mut p.labels),
                    PolicyChild::Paragraph(_) => {}
                    PolicyChild::Segment(s) => {
                        if s.title.id == id {
                            return Some(&mut s.title.labels);
                        }
                        if let Some(l) = find(&mut s.children, id) {
                            return Some(l);
                        }
                    }
                }
            }
            None
        }
        find(&mut self.children, id)
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<(), PpXmlError> {
        let mut seen = HashSet::new();
        let mut last = 0usize;
        let mut check_id = |id: &str| -> Result<(), PpXmlError> {
            if !is_valid_id(id) {
                return Err(schema(format!("invalid node id {id:?}")));
            }
            if !seen.insert(id.to_string()) {
                return Err(schema(format!("duplicate node id {id}")));
            }
            let idx = id_index(id);
            if idx <= last {
                return Err(schema(format!("node id {id} out of document order")));
            }
            last = idx;
            Ok(())
        };
        fn check_lists(lists: &[List], at: &str) -> Result<(), PpXmlError> {
            for l in lists {
                if l.items.is_empty() {
                    return Err(schema(format!("empty list at node {at}")));
                }
                for it in &l.items {
                    check_lists(&it.lists, at)?;
                }
            }
            Ok(())
        }
        fn visit(
            children: &[PolicyChild],
            parent_level: u8,
            check_id: &mut dyn FnMut(&str) -> Result<(), PpXmlError>,
        ) -> Result<(), PpXmlError> {
            for c in children {
                match c {
                    PolicyChild::Paragraph(p) => {
                        check_id(&p.id)?;
                        check_lists(&p.lists, &p.id)?;
                    }
                    PolicyChild::Segment(s) => {
                        if s.level == 0 || s.level > MAX_SEGMENT_LEVEL {
                            return Err(schema(format!(
                                "segment level {} outside 1..=4 at node {}",
                                s.level, s.title.id
                            )));
                        }
                        if s.level <= parent_level {
                            return Err(schema(format!(
                                "segment level {} not deeper than enclosing level {} at node {}",
                                s.level, parent_level, s.title.id
                            )));
                        }
                        check_id(&s.title.id)?;
                        visit(&s.children, s.level, check_id)?;
                    }
                }
            }
            Ok(())
        }
        visit(&self.children, 0, &mut check_id)
    }
}

fn walk_children<'a>(
    children: &'a [PolicyChild],
    parent_title: Option<&'a str>,
    level: u8,
    out: &mut Vec<TextNodeRef<'a>>,
) {
    let mut prev_paragraph: Option<&str> = None;
    let mut prev_segment_title: Option<&str> = None;
    for c in children {
        match c {
            PolicyChild::Paragraph(p) => {
                out.push(TextNodeRef {
                    id: &p.id,
                    kind: NodeKind::Paragraph,
                    text: p.full_text(),
                    labels: &p.labels,
                    parent_title_id: parent_title,
                    preceding_sibling_id: prev_paragraph,
                    segment_level: level,
                });
                prev_paragraph = Some(&p.id);
            }
            PolicyChild::Segment(s) => {
                out.push(TextNodeRef {
                    id: &s.title.id,
                    kind: NodeKind::Title,
                    text: s.title.text.clone(),
                    labels: &s.title.labels,
                    parent_title_id: parent_title,
                    preceding_sibling_id: prev_segment_title,
                    segment_level: s.level,
                });
                prev_segment_title = Some(&s.title.id);
                walk_children(&s.children, Some(&s.title.id), s.level, out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization

/// Writes the document as PP-XML. Structural elements are indented; text
/// content is written verbatim so parsing gives back the same document.
pub fn serialize_ppxml(doc: &PolicyDocument) -> Result<Vec<u8>, PpXmlError> {
    doc.validate()?;
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<policy");
    if let Some(src) = &doc.source {
        let _ = write!(out, " source=\"{}\"", escape(src, true));
    }
    out.push_str(">\n");
    write_children(&doc.children, 1, &mut out);
    out.push_str("</policy>\n");
    Ok(out.into_bytes())
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn label_attr(labels: &[String], out: &mut String) {
    if !labels.is_empty() {
        let _ = write!(out, " labels=\"{}\"", escape(&labels.join(";"), true));
    }
}

fn write_children(children: &[PolicyChild], depth: usize, out: &mut String) {
    for c in children {
        indent(depth, out);
        match c {
            PolicyChild::Paragraph(p) => {
                let _ = write!(out, "<paragraph id=\"{}\"", p.id);
                label_attr(&p.labels, out);
                out.push('>');
                out.push_str(&escape(&p.text, false));
                write_lists(&p.lists, out);
                out.push_str("</paragraph>\n");
            }
            PolicyChild::Segment(s) => {
                let _ = writeln!(out, "<segment level=\"{}\">", s.level);
                indent(depth + 1, out);
                let _ = write!(out, "<title id=\"{}\"", s.title.id);
                label_attr(&s.title.labels, out);
                let _ = writeln!(out, ">{}</title>", escape(&s.title.text, false));
                write_children(&s.children, depth + 1, out);
                indent(depth, out);
                out.push_str("</segment>\n");
            }
        }
    }
}

fn write_lists(lists: &[List], out: &mut String) {
    for l in lists {
        out.push_str("<list>");
        for it in &l.items {
            out.push_str("<item>");
            out.push_str(&escape(&it.text, false));
            write_lists(&it.lists, out);
            out.push_str("</item>");
        }
        out.push_str("</list>");
    }
}

fn escape(s: &str, attr: bool) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attr => out.push_str("&quot;"),
            '\r' => out.push_str("&#13;"),
            '\n' if attr => out.push_str("&#10;"),
            '\t' if attr => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug)]
enum XmlContent {
    Element(XmlElement),
    Text(String),
}

#[derive(Debug)]
struct XmlElement {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<XmlContent>,
}

impl XmlElement {
    fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    fn check_attrs(&self, allowed: &[&str], at: &str) -> Result<(), PpXmlError> {
        for (k, _) in &self.attrs {
            if !allowed.contains(&k.as_str()) {
                return Err(schema(format!("unexpected attribute {k:?} on <{}> {at}", self.name)));
            }
        }
        Ok(())
    }
}

fn xml_err(e: impl std::fmt::Display) -> PpXmlError {
    PpXmlError::Xml(e.to_string())
}

fn start_element(e: &BytesStart<'_>) -> Result<XmlElement, PpXmlError> {
    let name = e.name().as_ref().to_string();
    let mut attrs = Vec::new();
    for a in e.attributes() {
        let a = a.map_err(xml_err)?;
        let key = a.key.as_ref().to_string();
        let value = a.normalized_value(XmlVersion::Explicit1_0).map_err(xml_err)?.into_owned();
        attrs.push((key, value));
    }
    Ok(XmlElement { name, attrs, children: Vec::new() })
}

fn push_text(stack: &mut [XmlElement], text: &str) {
    if let Some(top) = stack.last_mut() {
        match top.children.last_mut() {
            Some(XmlContent::Text(t)) => t.push_str(text),
            _ => top.children.push(XmlContent::Text(text.to_string())),
        }
    }
}

fn resolve_entity(name: &str) -> Result<String, PpXmlError> {
    let s = match name {
        "amp" => "&",
        "lt" => "<",
        "gt" => ">",
        "quot" => "\"",
        "apos" => "'",
        _ => {
            let code = if let Some(hex) = name.strip_prefix("#x").or_else(|| name.strip_prefix("#X")) {
                u32::from_str_radix(hex, 16).ok()
            } else if let Some(dec) = name.strip_prefix('#') {
                dec.parse().ok()
            } else {
                None
            };
            return code
                .and_then(char::from_u32)
                .map(String::from)
                .ok_or_else(|| PpXmlError::Xml(format!("unknown entity &{name};")));
        }
    };
    Ok(s.to_string())
}

fn read_tree(bytes: &[u8]) -> Result<XmlElement, PpXmlError> {
    let text = std::str::from_utf8(bytes).map_err(xml_err)?;
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(false);
    let mut stack: Vec<XmlElement> = Vec::new();
    let mut root: Option<XmlElement> = None;
    loop {
        match reader.read_event().map_err(xml_err)? {
            Event::Start(e) => {
                if root.is_some() {
                    return Err(PpXmlError::Xml("content after root element".into()));
                }
                stack.push(start_element(&e)?);
            }
            Event::Empty(e) => {
                let el = start_element(&e)?;
                match stack.last_mut() {
                    Some(top) => top.children.push(XmlContent::Element(el)),
                    None if root.is_none() => root = Some(el),
                    None => return Err(PpXmlError::Xml("content after root element".into())),
                }
            }
            Event::End(_) => {
                let el = stack.pop().ok_or_else(|| PpXmlError::Xml("unbalanced end tag".into()))?;
                match stack.last_mut() {
                    Some(top) => top.children.push(XmlContent::Element(el)),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                let s = t.xml10_content();
                if stack.is_empty() {
                    if !s.trim().is_empty() {
                        return Err(PpXmlError::Xml("text outside root element".into()));
                    }
                } else {
                    push_text(&mut stack, &s);
                }
            }
            Event::CData(t) => {
                let s = t.xml10_content();
                push_text(&mut stack, &s);
            }
            Event::GeneralRef(r) => {
                let name: &str = &r;
                push_text(&mut stack, &resolve_entity(name)?);
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(PpXmlError::Xml(format!("unclosed element <{}>", stack[stack.len() - 1].name)));
    }
    root.ok_or_else(|| PpXmlError::Xml("no root element".into()))
}

/// Parses PP-XML, checking the schema and id ordering.
pub fn parse_ppxml(bytes: &[u8]) -> Result<PolicyDocument, PpXmlError> {
    let root = read_tree(bytes)?;
    if root.name != "policy" {
        return Err(schema(format!("root element must be <policy>, found <{}>", root.name)));
    }
    root.check_attrs(&["source"], "at root")?;
    let doc = PolicyDocument {
        source: root.attr("source").map(str::to_string),
        children: convert_children(&root.children, "policy")?,
    };
    doc.validate()?;
    Ok(doc)
}

fn first_id(children: &[XmlContent]) -> Option<String> {
    for c in children {
        if let XmlContent::Element(e) = c {
            if let Some(id) = e.attr("id") {
                return Some(id.to_string());
            }
            if let Some(id) = first_id(&e.children) {
                return Some(id);
            }
        }
    }
    None
}

fn parse_labels(el: &XmlElement) -> Vec<String> {
    match el.attr("labels") {
        Some(s) if !s.is_empty() => s.split(';').map(str::to_string).collect(),
        _ => Vec::new(),
    }
}

fn required_id(el: &XmlElement) -> Result<String, PpXmlError> {
    el.attr("id")
        .map(str::to_string)
        .ok_or_else(|| schema(format!("<{}> without id", el.name)))
}

fn convert_children<'x>(
    children: impl IntoIterator<Item = &'x XmlContent>,
    container: &str,
) -> Result<Vec<PolicyChild>, PpXmlError> {
    let mut out = Vec::new();
    for c in children {
        match c {
            XmlContent::Text(t) if t.trim().is_empty() => {}
            XmlContent::Text(t) => {
                return Err(schema(format!("stray text {:?} inside <{container}>", t.trim())));
            }
            XmlContent::Element(el) => match el.name.as_str() {
                "paragraph" => out.push(PolicyChild::Paragraph(convert_paragraph(el)?)),
                "segment" => out.push(PolicyChild::Segment(convert_segment(el)?)),
                other => {
                    return Err(schema(format!("<{other}> not allowed inside <{container}>")));
                }
            },
        }
    }
    Ok(out)
}

fn convert_segment(el: &XmlElement) -> Result<Segment, PpXmlError> {
    let at = first_id(&el.children).map_or_else(|| "without nodes".to_string(), |id| format!("at node {id}"));
    el.check_attrs(&["level"], &at)?;
    let level: u8 = el
        .attr("level")
        .ok_or_else(|| schema(format!("segment without level {at}")))?
        .parse()
        .map_err(|_| schema(format!("segment with non-numeric level {at}")))?;
    let elements: Vec<&XmlElement> = el
        .children
        .iter()
        .filter_map(|c| match c {
            XmlContent::Element(e) => Some(e),
            XmlContent::Text(_) => None,
        })
        .collect();
    let title_el = match elements.first() {
        Some(e) if e.name == "title" => *e,
        _ => return Err(schema(format!("segment without title {at}"))),
    };
    if elements.iter().skip(1).any(|e| e.name == "title") {
        return Err(schema(format!("segment with more than one title {at}")));
    }
    let title_id = required_id(title_el)?;
    title_el.check_attrs(&["id", "labels"], &format!("at node {title_id}"))?;
    let mut text = String::new();
    for c in &title_el.children {
        match c {
            XmlContent::Text(t) => text.push_str(t),
            XmlContent::Element(e) => {
                return Err(schema(format!("<{}> not allowed inside <title> at node {title_id}", e.name)));
            }
        }
    }
    let title = Title { id: title_id, text, labels: parse_labels(title_el) };
    let mut rest = Vec::new();
    let mut seen_title = false;
    for c in &el.children {
        match c {
            XmlContent::Element(e) if e.name == "title" && !seen_title => seen_title = true,
            other => rest.push(other),
        }
    }
    let children = convert_children(rest, "segment")?;
    Ok(Segment { level, title, children })
}


fn convert_paragraph(el: &XmlElement) -> Result<Paragraph, PpXmlError> {
    let id = required_id(el)?;
    el.check_attrs(&["id", "labels"], &format!("at node {id}"))?;
    let (text, lists) = convert_mixed(&el.children, "paragraph", &id)?;
    Ok(Paragraph { id, text, labels: parse_labels(el), lists })
}

fn convert_mixed(children: &[XmlContent], container: &str, at: &str) -> Result<(String, Vec<List>), PpXmlError> {
    let mut text = String::new();
    let mut lists = Vec::new();
    for c in children {
        match c {
            XmlContent::Text(t) => text.push_str(t),
            XmlContent::Element(e) if e.name == "list" => lists.push(convert_list(e, at)?),
            XmlContent::Element(e) => {
                return Err(schema(format!("<{}> not allowed inside <{container}> at node {at}", e.name)));
            }
        }
    }
    Ok((text, lists))
}

fn convert_list(el: &XmlElement, at: &str) -> Result<List, PpXmlError> {
    let mut items = Vec::new();
    for c in &el.children {
        match c {
            XmlContent::Text(t) if t.trim().is_empty() => {}
            XmlContent::Element(e) if e.name == "item" => {
                let (text, lists) = convert_mixed(&e.children, "item", at)?;
                items.push(Item { text, lists });
            }
            XmlContent::Element(e) => {
                return Err(schema(format!("<{}> not allowed inside <list> at node {at}", e.name)));
            }
            XmlContent::Text(t) => {
                return Err(schema(format!("stray text {:?} inside <list> at node {at}", t.trim())));
            }
        }
    }
    if items.is_empty() {
        return Err(schema(format!("empty list at node {at}")));
    }
    Ok(List { items })
}

/// Step-5 review aid: structural oddities worth a human look. An empty
/// result does not mean the document is correct.
pub fn validation_report(doc: &PolicyDocument) -> Vec<String> {
    let mut notes = Vec::new();
    if let Err(e) = doc.validate() {
        notes.push(format!("invalid: {e}"));
    }
    fn visit(children: &[PolicyChild], container: &str, notes: &mut Vec<String>) {
        let segs = children.iter().filter(|c| matches!(c, PolicyChild::Segment(_))).count();
        if segs > 50 {
            notes.push(format!("{segs} sibling segments under {container}"));
        }
        for c in children {
            match c {
                PolicyChild::Segment(s) => {
                    if s.children.is_empty() {
                        notes.push(format!("segment {} has a title but no content", s.title.id));
                    }
                    if s.title.text.chars().count() > 200 {
                        notes.push(format!("title {} is unusually long", s.title.id));
                    }
                    visit(&s.children, &s.title.id, notes);
                }
                PolicyChild::Paragraph(p) => {
                    if p.text.trim().is_empty() && p.lists.is_empty() {
                        notes.push(format!("paragraph {} is empty", p.id));
                    }
                }
            }
        }
    }
    visit(&doc.children, "policy", &mut notes);
    if doc.children.is_empty() {
        notes.push("document is empty".into());
    }
    notes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn para(text: &str) -> PolicyChild {
        PolicyChild::Paragraph(Paragraph { text: text.into(), ..Default::default() })
    }

    fn sample() -> PolicyDocument {
        let mut doc = PolicyDocument {
            source: Some("https://example.com/privacy?a=1&b=\"2\"".into()),
            children: vec![
                para("Intro & welcome <here>"),
                PolicyChild::Segment(Segment {
                    level: 1,
                    title: Title { text: "1. Data".into(), labels: vec!["PD CATEGORY".into()], ..Default::default() },
                    children: vec![
                        PolicyChild::Paragraph(Paragraph {
                            text: "We collect:".into(),
                            labels: vec!["PD CATEGORY".into(), "PD ORIGIN".into()],
                            lists: vec![List {
                                items: vec![
                                    Item { text: "name".into(), lists: vec![] },
                                    Item {
                                        text: "device".into(),
                                        lists: vec![List { items: vec![Item { text: "ip".into(), lists: vec![] }] }],
                                    },
                                ],
                            }],
                            ..Default::default()
                        }),
                        PolicyChild::Segment(Segment {
                            level: 3,
                            title: Title { text: "1.a deeper".into(), ..Default::default() },
                            children: vec![para("  spaced\ttext  ")],
                        }),
                    ],
                }),
            ],
        };
        doc.renumber();
        doc
    }

    #[test]
    fn round_trip_preserves_everything() {
        let doc = sample();
        let bytes = serialize_ppxml(&doc).unwrap();
        let back = parse_ppxml(&bytes).unwrap();
        assert_eq!(doc, back);
        assert_eq!(serialize_ppxml(&back).unwrap(), bytes);
    }

    #[test]
    fn ids_follow_document_order() {
        let doc = sample();
        let ids: Vec<_> = doc.text_nodes().iter().map(|n| n.id.to_string()).collect();
        assert_eq!(ids, ["n0001", "n0002", "n0003", "n0004", "n0005"]);
    }

    #[test]
    fn nested_lists_preserved() {
        let xml = br#"<policy><paragraph id="n0001">x<list><item>a<list><item>b</item></list></item></list></paragraph></policy>"#;
        let doc = parse_ppxml(xml).unwrap();
        let PolicyChild::Paragraph(p) = &doc.children[0] else { panic!() };
        assert_eq!(p.lists[0].items[0].lists[0].items[0].text, "b");
        assert_eq!(p.full_text(), "x a b");
    }

    #[test]
    fn segment_without_title_is_named() {
        let xml = br#"<policy><segment level="1"><paragraph id="n0042">x</paragraph></segment></policy>"#;
        let err = parse_ppxml(xml).unwrap_err();
        assert_eq!(err, PpXmlError::Schema("segment without title at node n0042".into()));
    }

    #[test]
    fn schema_violations() {
        let cases: &[&[u8]] = &[
            br#"<doc/>"#,
            br#"<policy><title id="n0001">t</title></policy>"#,
            br#"<policy><segment level="5"><title id="n0001">t</title></segment></policy>"#,
            br#"<policy><segment level="2"><title id="n0001">t</title><segment level="2"><title id="n0002">u</title></segment></segment></policy>"#,
            br#"<policy><paragraph id="n0002">a</paragraph><paragraph id="n0001">b</paragraph></policy>"#,
            br#"<policy><paragraph id="n0001">a</paragraph><paragraph id="n0001">b</paragraph></policy>"#,
            br#"<policy><paragraph id="n0001"><list></list></paragraph></policy>"#,
            br#"<policy>loose text</policy>"#,
            br#"<policy><paragraph>no id</paragraph></policy>"#,
            br#"<policy><paragraph id="n0001">a</policy>"#,
        ];
        for c in cases {
            assert!(parse_ppxml(c).is_err(), "accepted {}", String::from_utf8_lossy(c));
        }
    }

    #[test]
    fn walk_context() {
        let doc = sample();
        let nodes = doc.text_nodes();
        // intro paragraph: no context
        assert_eq!(nodes[0].parent_title_id, None);
        assert_eq!(nodes[0].preceding_sibling_id, None);
        // paragraph inside segment 1
        assert_eq!(nodes[2].parent_title_id, Some("n0002"));
        // nested title's parent is the outer title
        assert_eq!(nodes[3].kind, NodeKind::Title);
        assert_eq!(nodes[3].parent_title_id, Some("n0002"));
        assert_eq!(nodes[4].parent_title_id, Some("n0004"));
    }

    #[test]
    fn report_flags_empty_segments() {
        let mut doc = PolicyDocument {
            source: None,
            children: vec![PolicyChild::Segment(Segment { level: 1, title: Title::default(), children: vec![] })],
        };
        doc.renumber();
        let notes = validation_report(&doc);
        assert!(notes.iter().any(|n| n.contains("no content")));
    }
}
