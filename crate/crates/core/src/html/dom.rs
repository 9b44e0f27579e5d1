use std::collections::BTreeMap;

use scraper::{Html, Node};

/// Tags whose text never reaches a human reader.
const INVISIBLE: &[&str] = &["head", "title", "style", "script", "noscript", "template"];

/// Tags that break the text flow; their text is separated from neighbours
/// by a space.
const BLOCK_LEVEL: &[&str] = &[
    "address", "article", "aside", "blockquote", "body", "br", "dd", "details", "dialog", "div",
    "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5",
    "h6", "header", "hgroup", "hr", "html", "li", "main", "nav", "ol", "p", "pre", "section",
    "summary", "table", "tbody", "td", "tfoot", "th", "thead", "tr", "ul",
];

pub(crate) fn is_block_level(tag: &str) -> bool {
    BLOCK_LEVEL.contains(&tag)
}

/// A child slot of an element: either a nested element or a text run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomChild {
    Element(DomNode),
    Text(String),
}

/// A simplified HTML element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomNode {
    pub tag: String,
    pub attrs: BTreeMap<String, String>,
    pub children: Vec<DomChild>,
}

impl DomNode {
    pub fn new(tag: impl Into<String>) -> Self {
        Self { tag: tag.into().to_ascii_lowercase(), attrs: BTreeMap::new(), children: Vec::new() }
    }

    pub fn with_attr(mut self, k: impl Into<String>, v: impl Into<String>) -> Self {
        self.attrs.insert(k.into(), v.into());
        self
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.children.push(DomChild::Text(text.into()));
        self
    }

    pub fn with_child(mut self, child: DomNode) -> Self {
        self.children.push(DomChild::Element(child));
        self
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.get(name).map(String::as_str)
    }

    /// Element children in order; text runs are skipped.
    pub fn elements(&self) -> impl Iterator<Item = &DomNode> {
        self.children.iter().filter_map(|c| match c {
            DomChild::Element(e) => Some(e),
            DomChild::Text(_) => None,
        })
    }

    pub fn element_count(&self) -> usize {
        self.elements().count()
    }

    /// Direct text content of this node, not including descendants.
    pub fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|c| match c {
                DomChild::Text(t) => Some(t.as_str()),
                DomChild::Element(_) => None,
            })
            .collect()
    }

    /// Human-visible text of the subtree, whitespace collapsed.
    pub fn visible_text(&self) -> String {
        let mut raw = String::new();
        collect_text(self, &mut raw);
        collapse_whitespace(&raw)
    }

    /// Pre-order iterator over this element and all descendant elements.
    pub fn descendants(&self) -> Descendants<'_> {
        Descendants { stack: vec![self] }
    }

    /// First descendant element (including self) with the given tag.
    pub fn find(&self, tag: &str) -> Option<&DomNode> {
        self.descendants().find(|n| n.tag == tag)
    }

    pub fn is_leaf(&self) -> bool {
        self.elements().next().is_none()
    }
}

pub struct Descendants<'a> {
    stack: Vec<&'a DomNode>,
}

impl<'a> Iterator for Descendants<'a> {
    type Item = &'a DomNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        for child in node.children.iter().rev() {
            if let DomChild::Element(e) = child {
                self.stack.push(e);
            }
        }
        Some(node)
    }
}

fn collect_text(node: &DomNode, out: &mut String) {
    if INVISIBLE.contains(&node.tag.as_str()) {
        return;
    }
    let block = is_block_level(&node.tag);
    if block {
        out.push(' ');
    }
    for child in &node.children {
        match child {
            DomChild::Text(t) => out.push_str(t),
            DomChild::Element(e) => collect_text(e, out),
        }
    }
    if block {
        out.push(' ');
    }
}

/// Collapses whitespace runs to one space and trims both ends.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses an HTML document and returns its `<html>` element.
pub fn parse_html(html: &str) -> DomNode {
    let doc = Html::parse_document(html);
    convert(doc.root_element())
}

fn convert(el: scraper::ElementRef<'_>) -> DomNode {
    let value = el.value();
    let mut node = DomNode::new(value.name());
    for (k, v) in value.attrs() {
        node.attrs.insert(k.to_ascii_lowercase(), v.to_string());
    }
    for child in el.children() {
        match child.value() {
            Node::Element(_) => {
                if let Some(e) = scraper::ElementRef::wrap(child) {
                    node.children.push(DomChild::Element(convert(e)));
                }
            }
            Node::Text(t) => {
                let s: &str = t;
                match node.children.last_mut() {
                    Some(DomChild::Text(prev)) => prev.push_str(s),
                    _ => node.children.push(DomChild::Text(s.to_string())),
                }
            }
            _ => {}
        }
    }
    node
}

const VOID: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];

/// Serializes a tree back to HTML.
pub fn to_html(node: &DomNode) -> String {
    let mut out = String::new();
    if node.tag == "html" {
        out.push_str("<!DOCTYPE html>\n");
    }
    write_node(node, &mut out);
    out
}

fn write_node(node: &DomNode, out: &mut String) {
    out.push('<');
    out.push_str(&node.tag);
    for (k, v) in &node.attrs {
        out.push(' ');
        out.push_str(k);
        out.push_str("=\"");
        escape_into(v, true, out);
        out.push('"');
    }
    out.push('>');
    if VOID.contains(&node.tag.as_str()) && node.children.is_empty() {
        return;
    }
    let raw = matches!(node.tag.as_str(), "style" | "script");
    for child in &node.children {
        match child {
            DomChild::Element(e) => write_node(e, out),
            DomChild::Text(t) if raw => out.push_str(t),
            DomChild::Text(t) => escape_into(t, false, out),
        }
    }
    out.push_str("</");
    out.push_str(&node.tag);
    out.push('>');
}

fn escape_into(s: &str, attr: bool, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attr => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_keeps_text_order() {
        let html = parse_html("<html><body><p>Hello <b>big</b> world</p></body></html>");
        let p = html.find("p").unwrap();
        assert_eq!(p.visible_text(), "Hello big world");
        assert_eq!(p.text(), "Hello  world");
    }

    #[test]
    fn invisible_text_is_ignored() {
        let html = parse_html("<html><head><style>p{color:red}</style></head><body><p>x</p></body></html>");
        assert_eq!(html.visible_text(), "x");
    }

    #[test]
    fn html_round_trip_is_stable() {
        let html = parse_html("<html><body><p class=\"a\">1 &lt; 2 &amp; 3</p><br></body></html>");
        let again = parse_html(&to_html(&html));
        assert_eq!(html, again);
    }
}
