//! Candidate blocks inside the policy element and their layout features.

use serde::{Deserialize, Serialize};

use super::lol::{parse_leading_ordinal_label, LolDescriptor};
use super::ppxml::{Item, List};
use crate::html::{collapse_whitespace, is_block_level, DomChild, DomNode};

/// Length of [`BlockFeatures::to_vector`].
pub const BLOCK_FEATURE_DIM: usize = 20;

/// Output classes of the title/paragraph classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockClass {
    TitleL1,
    TitleL2,
    TitleL3,
    TitleL4,
    Paragraph,
}

impl BlockClass {
    pub const ALL: [BlockClass; 5] =
        [BlockClass::TitleL1, BlockClass::TitleL2, BlockClass::TitleL3, BlockClass::TitleL4, BlockClass::Paragraph];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Title level 1..=4, or `None` for paragraphs.
    pub fn title_level(self) -> Option<u8> {
        match self {
            BlockClass::Paragraph => None,
            c => Some(c as u8 + 1),
        }
    }

    pub fn title(level: u8) -> Self {
        match level {
            0 | 1 => BlockClass::TitleL1,
            2 => BlockClass::TitleL2,
            3 => BlockClass::TitleL3,
            _ => BlockClass::TitleL4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BlockClass::TitleL1 => "title1",
            BlockClass::TitleL2 => "title2",
            BlockClass::TitleL3 => "title3",
            BlockClass::TitleL4 => "title4",
            BlockClass::Paragraph => "paragraph",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == s)
    }
}

/// Tag family of a candidate block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TagCode {
    Other = 0,
    H1 = 1,
    H2 = 2,
    H3 = 3,
    H4 = 4,
    H5 = 5,
    H6 = 6,
    P = 7,
    Div = 8,
    HighlightedInline = 9,
}

impl TagCode {
    pub fn of(tag: &str) -> Self {
        match tag {
            "h1" => TagCode::H1,
            "h2" => TagCode::H2,
            "h3" => TagCode::H3,
            "h4" => TagCode::H4,
            "h5" => TagCode::H5,
            "h6" => TagCode::H6,
            "p" => TagCode::P,
            "div" => TagCode::Div,
            t if HIGHLIGHT_TAGS.contains(&t) => TagCode::HighlightedInline,
            _ => TagCode::Other,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => TagCode::Other,
            1 => TagCode::H1,
            2 => TagCode::H2,
            3 => TagCode::H3,
            4 => TagCode::H4,
            5 => TagCode::H5,
            6 => TagCode::H6,
            7 => TagCode::P,
            8 => TagCode::Div,
            9 => TagCode::HighlightedInline,
            _ => return None,
        })
    }

    pub fn heading_level(self) -> Option<u8> {
        let v = self as u8;
        (1..=6).contains(&v).then_some(v)
    }
}

const HIGHLIGHT_TAGS: &[&str] = &["b", "strong", "em", "i", "u", "mark"];

/// Layout description of one candidate block. Unknown style values are -1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockFeatures {
    pub text_length: usize,
    pub font_size: f64,
    pub font_weight: f64,
    pub is_italic: bool,
    pub is_underlined: bool,
    pub dom_depth: usize,
    pub tag_code: TagCode,
    /// Text ends in sentence punctuation (`.`, `;`, `!`, `?`).
    pub ends_with_punctuation: bool,
    pub lol: LolDescriptor,
}

impl BlockFeatures {
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(BLOCK_FEATURE_DIM);
        v.push(self.text_length as f64);
        v.push(self.font_size);
        v.push(self.font_weight);
        v.push(f64::from(u8::from(self.is_italic)));
        v.push(f64::from(u8::from(self.is_underlined)));
        v.push(self.dom_depth as f64);
        v.push(self.tag_code as u8 as f64);
        v.push(f64::from(u8::from(self.ends_with_punctuation)));
        v.extend(self.lol.0.iter().map(|&x| f64::from(x)));
        v
    }

    /// Inverse of [`to_vector`](Self::to_vector); `None` on a wrong width or
    /// a value no block could produce.
    pub fn from_vector(v: &[f64]) -> Option<Self> {
        if v.len() != BLOCK_FEATURE_DIM {
            return None;
        }
        let count = |x: f64| (x >= 0.0 && x.fract() == 0.0).then_some(x as usize);
        let flag = |x: f64| match x {
            0.0 => Some(false),
            1.0 => Some(true),
            _ => None,
        };
        let mut lol = [0u32; 12];
        for (dst, &x) in lol.iter_mut().zip(&v[8..]) {
            *dst = u32::try_from(count(x)?).ok()?;
        }
        Some(Self {
            text_length: count(v[0])?,
            font_size: v[1],
            font_weight: v[2],
            is_italic: flag(v[3])?,
            is_underlined: flag(v[4])?,
            dom_depth: count(v[5])?,
            tag_code: TagCode::from_code(u8::try_from(count(v[6])?).ok()?)?,
            ends_with_punctuation: flag(v[7])?,
            lol: LolDescriptor(lol),
        })
    }
}

// ---------------------------------------------------------------------------
// Styles

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ResolvedStyle {
    pub font_size: Option<f64>,
    pub font_weight: Option<f64>,
    pub italic: Option<bool>,
    pub underline: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
enum Selector {
    Tag(String),
    Class(String),
    TagClass(String, String),
    Id(String),
}

impl Selector {
    fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() || s.contains(|c: char| c.is_whitespace() || ":>[+~*".contains(c)) {
            return None;
        }
        if let Some(id) = s.strip_prefix('#') {
            return Some(Selector::Id(id.to_string()));
        }
        if let Some(class) = s.strip_prefix('.') {
            return (!class.contains('.')).then(|| Selector::Class(class.to_string()));
        }
        match s.split_once('.') {
            Some((tag, class)) if !class.contains('.') => {
                Some(Selector::TagClass(tag.to_ascii_lowercase(), class.to_string()))
            }
            Some(_) => None,
            None if s.contains('#') => s.split_once('#').map(|(_, id)| Selector::Id(id.to_string())),
            None => Some(Selector::Tag(s.to_ascii_lowercase())),
        }
    }

    fn specificity(&self) -> u32 {
        match self {
            Selector::Id(_) => 100,
            Selector::TagClass(..) => 11,
            Selector::Class(_) => 10,
            Selector::Tag(_) => 1,
        }
    }

    fn matches(&self, node: &DomNode) -> bool {
        let has_class = |c: &str| node.attr("class").is_some_and(|cl| cl.split_whitespace().any(|x| x == c));
        match self {
            Selector::Tag(t) => node.tag == *t,
            Selector::Class(c) => has_class(c),
            Selector::TagClass(t, c) => node.tag == *t && has_class(c),
            Selector::Id(id) => node.attr("id") == Some(id.as_str()),
        }
    }
}

/// Simple selector rules harvested from the page's `<style>` blocks. Only
/// tag, class, tag.class and id selectors are understood.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PageStyles {
    rules: Vec<(Selector, Vec<(String, String)>)>,
}

impl PageStyles {
    pub fn from_document(root: &DomNode) -> Self {
        let mut css = String::new();
        for n in root.descendants().filter(|n| n.tag == "style") {
            css.push_str(&n.text());
            css.push('\n');
        }
        Self::parse(&css)
    }

    pub fn parse(css: &str) -> Self {
        let css = strip_comments(css);
        let mut rules = Vec::new();
        for chunk in css.split('}') {
            let Some((sel, body)) = chunk.split_once('{') else { continue };
            if sel.trim_start().starts_with('@') {
                continue;
            }
            let decls = parse_declarations(body);
            if decls.is_empty() {
                continue;
            }
            for s in sel.split(',') {
                if let Some(s) = Selector::parse(s) {
                    rules.push((s, decls.clone()));
                }
            }
        }
        Self { rules }
    }

    /// Declarations applying to `node`, lowest specificity first.
    fn matching(&self, node: &DomNode) -> Vec<&(String, String)> {
        let mut hits: Vec<(u32, usize, &Vec<(String, String)>)> = self
            .rules
            .iter()
            .enumerate()
            .filter(|(_, (s, _))| s.matches(node))
            .map(|(i, (s, d))| (s.specificity(), i, d))
            .collect();
        hits.sort_by_key(|(spec, i, _)| (*spec, *i));
        hits.into_iter().flat_map(|(_, _, d)| d.iter()).collect()
    }
}

fn strip_comments(css: &str) -> String {
    let mut out = String::with_capacity(css.len());
    let mut rest = css;
    while let Some(start) = rest.find("/*") {
        out.push_str(&rest[..start]);
        match rest[start + 2..].find("*/") {
            Some(end) => rest = &rest[start + 2 + end + 2..],
            None => return out,
        }
    }
    out.push_str(rest);
    out
}

fn parse_declarations(body: &str) -> Vec<(String, String)> {
    body.split(';')
        .filter_map(|d| {
            let (k, v) = d.split_once(':')?;
            let v = v.trim().trim_end_matches("!important").trim();
            Some((k.trim().to_ascii_lowercase(), v.to_ascii_lowercase()))
        })
        .filter(|(k, _)| !k.is_empty())
        .collect()
}

const BASE_FONT_PX: f64 = 16.0;

fn tag_default(tag: &str, style: &mut ResolvedStyle) {
    let size = match tag {
        "h1" => Some(32.0),
        "h2" => Some(24.0),
        "h3" => Some(18.72),
        "h4" => Some(16.0),
        "h5" => Some(13.28),
        "h6" => Some(10.72),
        _ => None,
    };
    if size.is_some() {
        style.font_size = size;
    }
    if matches!(tag, "h1" | "h2" | "h3" | "h4" | "h5" | "h6" | "b" | "strong" | "th") {
        style.font_weight = Some(700.0);
    }
    if matches!(tag, "i" | "em" | "cite" | "dfn" | "var" | "address") {
        style.italic = Some(true);
    }
    if matches!(tag, "u" | "ins") {
        style.underline = Some(true);
    }
}

fn parse_font_size(v: &str, parent: Option<f64>) -> Option<f64> {
    let parent = parent.unwrap_or(BASE_FONT_PX);
    let keyword = match v {
        "xx-small" => Some(9.0),
        "x-small" => Some(10.0),
        "small" => Some(13.0),
        "medium" => Some(16.0),
        "large" => Some(18.0),
        "x-large" => Some(24.0),
        "xx-large" => Some(32.0),
        "xxx-large" => Some(48.0),
        "smaller" => Some(parent / 1.2),
        "larger" => Some(parent * 1.2),
        _ => None,
    };
    if keyword.is_some() {
        return keyword;
    }
    let num = |suffix: &str| v.strip_suffix(suffix).and_then(|n| n.trim().parse::<f64>().ok());
    if let Some(n) = num("px") {
        Some(n)
    } else if let Some(n) = num("pt") {
        Some(n * 4.0 / 3.0)
    } else if let Some(n) = num("rem") {
        Some(n * BASE_FONT_PX)
    } else if let Some(n) = num("em") {
        Some(n * parent)
    } else if let Some(n) = num("%") {
        Some(n / 100.0 * parent)
    } else {
        v.parse::<f64>().ok().filter(|n| *n == 0.0)
    }
}

fn parse_font_weight(v: &str, parent: Option<f64>) -> Option<f64> {
    match v {
        "normal" => Some(400.0),
        "bold" => Some(700.0),
        "bolder" => Some((parent.unwrap_or(400.0) + 300.0).min(900.0)),
        "lighter" => Some((parent.unwrap_or(400.0) - 300.0).max(100.0)),
        _ => v.parse::<f64>().ok(),
    }
}

fn apply_declaration(k: &str, v: &str, style: &mut ResolvedStyle, inherited: &ResolvedStyle) {
    match k {
        "font-size" => {
            if let Some(s) = parse_font_size(v, inherited.font_size) {
                style.font_size = Some(s);
            }
        }
        "font-weight" => {
            if let Some(w) = parse_font_weight(v, inherited.font_weight) {
                style.font_weight = Some(w);
            }
        }
        "font-style" => style.italic = Some(v.contains("italic") || v.contains("oblique")),
        "text-decoration" | "text-decoration-line" => style.underline = Some(v.contains("underline")),
        _ => {}
    }
}

/// Resolves the style of the last node of `chain` (outermost first),
/// inheriting down the chain: tag defaults, then stylesheet rules by
/// specificity, then inline `style`.
pub fn resolve_style(chain: &[&DomNode], sheet: &PageStyles) -> ResolvedStyle {
    let mut inherited = ResolvedStyle::default();
    for node in chain {
        let mut own = inherited;
        tag_default(&node.tag, &mut own);
        for (k, v) in sheet.matching(node) {
            apply_declaration(k, v, &mut own, &inherited);
        }
        if let Some(inline) = node.attr("style") {
            for (k, v) in parse_declarations(inline) {
                apply_declaration(&k, &v, &mut own, &inherited);
            }
        }
        inherited = own;
    }
    inherited
}

// ---------------------------------------------------------------------------
// Block collection

/// A text block inside the policy element, with any lists that follow it.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub text: String,
    pub features: BlockFeatures,
    pub lists: Vec<List>,
}

impl Block {
    /// A bare paragraph block, mostly useful for tests and synthetic data.
    pub fn paragraph(text: impl Into<String>) -> Self {
        let text = text.into();
        let features = features_for_text(&text, ResolvedStyle::default(), 1, TagCode::P);
        Self { text, features, lists: Vec::new() }
    }
}

fn features_for_text(text: &str, style: ResolvedStyle, depth: usize, tag_code: TagCode) -> BlockFeatures {
    let text_length = text.chars().count();
    BlockFeatures {
        text_length,
        font_size: style.font_size.unwrap_or(-1.0),
        font_weight: style.font_weight.unwrap_or(-1.0),
        is_italic: style.italic.unwrap_or(false),
        is_underlined: style.underline.unwrap_or(false),
        dom_depth: depth,
        tag_code,
        ends_with_punctuation: text.trim_end().ends_with(['.', ';', '!', '?']),
        lol: parse_leading_ordinal_label(text),
    }
}

/// Features of a single element, `depth` edges below the policy element.
/// `ancestors` lists the elements above `node`, outermost first.
///
/// A block whose only content is one highlighted inline element (a bold
/// heading wrapped in `<p>`) takes that element's style and tag family.
pub fn extract_block_features(
    node: &DomNode,
    ancestors: &[&DomNode],
    depth: usize,
    sheet: &PageStyles,
) -> BlockFeatures {
    let text = node.visible_text();
    let mut chain: Vec<&DomNode> = ancestors.to_vec();
    chain.push(node);
    let mut tag_code = TagCode::of(&node.tag);
    if let Some(inner) = sole_highlight(node) {
        chain.push(inner);
        tag_code = TagCode::HighlightedInline;
    }
    let style = resolve_style(&chain, sheet);
    features_for_text(&text, style, depth, tag_code)
}

fn sole_highlight(node: &DomNode) -> Option<&DomNode> {
    let mut only: Option<&DomNode> = None;
    for c in &node.children {
        match c {
            DomChild::Text(t) if t.trim().is_empty() => {}
            DomChild::Text(_) => return None,
            DomChild::Element(e) => {
                if only.is_some() {
                    return None;
                }
                only = Some(e);
            }
        }
    }
    only.filter(|e| HIGHLIGHT_TAGS.contains(&e.tag.as_str()) || sole_highlight(e).is_some())
        .map(|e| if HIGHLIGHT_TAGS.contains(&e.tag.as_str()) { e } else { sole_highlight(e).unwrap_or(e) })
}

fn is_list_tag(tag: &str) -> bool {
    matches!(tag, "ul" | "ol" | "dl")
}

fn is_container_tag(tag: &str) -> bool {
    (is_block_level(tag) && !matches!(tag, "br" | "hr")) || is_list_tag(tag)
}

/// Walks the policy element and returns its text blocks in document order.
/// Lists are converted directly and attached to the preceding block.
pub fn collect_blocks(pp: &DomNode, sheet: &PageStyles) -> Vec<Block> {
    let mut out = Vec::new();
    let mut chain = Vec::new();
    walk(pp, 0, &mut chain, sheet, &mut out);
    out
}

fn walk<'a>(node: &'a DomNode, depth: usize, chain: &mut Vec<&'a DomNode>, sheet: &PageStyles, out: &mut Vec<Block>) {
    if is_list_tag(&node.tag) {
        let list = convert_list(node);
        if !list.items.is_empty() {
            attach_list(out, list, depth);
        }
        return;
    }
    let has_block_children = node.elements().any(|e| is_container_tag(&e.tag));
    if !has_block_children {
        let f = extract_block_features(node, chain, depth, sheet);
        let text = node.visible_text();
        if !text.is_empty() {
            out.push(Block { text, features: f, lists: Vec::new() });
        }
        return;
    }
    chain.push(node);
    let mut inline = DomNode { tag: node.tag.clone(), attrs: node.attrs.clone(), children: Vec::new() };
    for c in &node.children {
        match c {
            DomChild::Element(e) if is_container_tag(&e.tag) => {
                flush_inline(&mut inline, chain, depth, sheet, out);
                walk(e, depth + 1, chain, sheet, out);
            }
            other => inline.children.push(other.clone()),
        }
    }
    flush_inline(&mut inline, chain, depth, sheet, out);
    chain.pop();
}

fn flush_inline(inline: &mut DomNode, chain: &[&DomNode], depth: usize, sheet: &PageStyles, out: &mut Vec<Block>) {
    if inline.children.is_empty() {
        return;
    }
    let text = inline.visible_text();
    if !text.is_empty() {
        // `chain` already ends with the real element; style the anonymous run as that element.
        let ancestors = &chain[..chain.len().saturating_sub(1)];
        let features = extract_block_features(inline, ancestors, depth, sheet);
        out.push(Block { text, features, lists: Vec::new() });
    }
    inline.children.clear();
}

fn attach_list(out: &mut Vec<Block>, list: List, depth: usize) {
    match out.last_mut() {
        Some(b) => b.lists.push(list),
        None => out.push(Block {
            text: String::new(),
            features: features_for_text("", ResolvedStyle::default(), depth, TagCode::Other),
            lists: vec![list],
        }),
    }
}

fn convert_list(node: &DomNode) -> List {
    let mut items = Vec::new();
    if node.tag == "dl" {
        for e in node.elements() {
            match e.tag.as_str() {
                "dt" => items.push(convert_item(e)),
                "dd" => {
                    let nested = List { items: vec![convert_item(e)] };
                    match items.last_mut() {
                        Some(Item { lists, .. }) => lists.push(nested),
                        None => items.push(Item { text: String::new(), lists: vec![nested] }),
                    }
                }
                _ => {}
            }
        }
    } else {
        for e in node.elements() {
            if e.tag == "li" {
                items.push(convert_item(e));
            }
        }
    }
    List { items }
}

fn convert_item(node: &DomNode) -> Item {
    let mut raw = String::new();
    let mut lists = Vec::new();
    fn gather(node: &DomNode, raw: &mut String, lists: &mut Vec<List>) {
        for c in &node.children {
            match c {
                DomChild::Text(t) => raw.push_str(t),
                DomChild::Element(e) if is_list_tag(&e.tag) => {
                    let l = convert_list(e);
                    if !l.items.is_empty() {
                        lists.push(l);
                    }
                }
                DomChild::Element(e) => {
                    raw.push(' ');
                    gather(e, raw, lists);
                    raw.push(' ');
                }
            }
        }
    }
    gather(node, &mut raw, &mut lists);
    Item { text: collapse_whitespace(&raw), lists }
}

/// Rule-based classes for pages processed without a trained model:
/// `h1`–`h4` map to their level (`h5`/`h6` to level 4); short bold or
/// highlighted blocks become titles at their ordinal-label depth.
pub fn heuristic_class(f: &BlockFeatures) -> BlockClass {
    if let Some(h) = f.tag_code.heading_level() {
        return BlockClass::title(h.min(4));
    }
    let emphasised = f.tag_code == TagCode::HighlightedInline || f.font_weight >= 600.0;
    if emphasised && f.text_length > 0 && f.text_length <= 120 && !f.ends_with_punctuation {
        return BlockClass::title(f.lol.depth().max(1) as u8);
    }
    BlockClass::Paragraph
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::html::parse_html;

    fn body(html: &str) -> DomNode {
        parse_html(html).find("body").unwrap().clone()
    }

    #[test]
    fn heading_features() {
        let b = body("<body><div><section><h2>2. Data we collect</h2></section></div></body>");
        let blocks = collect_blocks(&b, &PageStyles::default());
        assert_eq!(blocks.len(), 1);
        let f = blocks[0].features;
        assert_eq!(f.tag_code, TagCode::H2);
        assert_eq!(f.text_length, 18);
        assert_eq!(f.dom_depth, 3);
        assert_eq!(f.lol.0, [1, 2, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(f.font_size, 24.0);
        assert_eq!(f.font_weight, 700.0);
        assert_eq!(f.to_vector().len(), BLOCK_FEATURE_DIM);
    }

    #[test]
    fn empty_paragraph_features() {
        let p = DomNode::new("p");
        let f = extract_block_features(&p, &[], 1, &PageStyles::default());
        assert_eq!(f.text_length, 0);
        assert!(f.lol.is_empty());
        assert_eq!(f.font_size, -1.0);
        assert_eq!(f.font_weight, -1.0);
    }

    #[test]
    fn inline_bold_weight() {
        let d = DomNode::new("div").with_attr("style", "font-weight:bold").with_text("B");
        let f = extract_block_features(&d, &[], 0, &PageStyles::default());
        assert_eq!(f.font_weight, 700.0);
    }

    #[test]
    fn stylesheet_and_inheritance() {
        let doc = parse_html(
            "<html><head><style>.big { font-size: 1.5em } p.note{font-style:italic} #x{text-decoration:underline}</style></head>\
             <body><div class='big'><p class='note'>inherits</p><p id='x' style='font-size:12pt'>own</p></div></body></html>",
        );
        let sheet = PageStyles::from_document(&doc);
        let body = doc.find("body").unwrap();
        let blocks = collect_blocks(body, &sheet);
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].features.font_size, 24.0);
        assert!(blocks[0].features.is_italic);
        assert_eq!(blocks[1].features.font_size, 16.0);
        assert!(blocks[1].features.is_underlined);
    }

    #[test]
    fn sole_bold_child_promotes() {
        let b = body("<body><p><strong>Your rights</strong></p><p>Some <b>bold</b> words.</p></body>");
        let blocks = collect_blocks(&b, &PageStyles::default());
        assert_eq!(blocks[0].features.tag_code, TagCode::HighlightedInline);
        assert_eq!(blocks[0].features.font_weight, 700.0);
        assert_eq!(blocks[1].features.tag_code, TagCode::P);
        assert_eq!(blocks[1].features.font_weight, -1.0);
        assert_eq!(heuristic_class(&blocks[0].features), BlockClass::TitleL1);
        assert_eq!(heuristic_class(&blocks[1].features), BlockClass::Paragraph);
    }

    #[test]
    fn lists_attach_to_previous_block() {
        let b = body(
            "<body><p>We collect:</p><ul><li>name</li><li>email<ol><li>work</li></ol></li></ul>\
             <dl><dt>term</dt><dd>definition</dd></dl></body>",
        );
        let blocks = collect_blocks(&b, &PageStyles::default());
        assert_eq!(blocks.len(), 1);
        let lists = &blocks[0].lists;
        assert_eq!(lists.len(), 2);
        assert_eq!(lists[0].items[1].text, "email");
        assert_eq!(lists[0].items[1].lists[0].items[0].text, "work");
        assert_eq!(lists[1].items[0].lists[0].items[0].text, "definition");
    }

    #[test]
    fn loose_text_becomes_block() {
        let b = body("<body><div>Intro text<p>para</p>tail</div></body>");
        let texts: Vec<_> = collect_blocks(&b, &PageStyles::default()).into_iter().map(|b| b.text).collect();
        assert_eq!(texts, ["Intro text", "para", "tail"]);
    }

    #[test]
    fn font_size_units() {
        assert_eq!(parse_font_size("12pt", None), Some(16.0));
        assert_eq!(parse_font_size("150%", Some(20.0)), Some(30.0));
        assert_eq!(parse_font_size("2rem", Some(10.0)), Some(32.0));
        assert_eq!(parse_font_size("large", None), Some(18.0));
        assert_eq!(parse_font_size("bogus", None), None);
        assert_eq!(parse_font_weight("bold", None), Some(700.0));
        assert_eq!(parse_font_weight("600", None), Some(600.0));
    }
}
