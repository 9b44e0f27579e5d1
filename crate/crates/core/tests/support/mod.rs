//! Generators and oracles shared by the integration tests.
#![allow(dead_code)]

use policykit::html::{text_length, DomNode};
use policykit::structure::{Item, List, Paragraph, PolicyChild, PolicyDocument, Segment, Title};
use proptest::prelude::*;

const LABELS: &[&str] = &["DATA SHARING", "DATA SHARING.CONDITION", "DATA RETENTION", "DP PRINCIPLE"];

fn text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 <>&\"'.,;:\\t\\n\u{e9}\u{4e2d}-]{0,24}"
}

fn labels() -> impl Strategy<Value = Vec<String>> {
    prop::sample::subsequence(LABELS, 0..=2).prop_map(|v| v.into_iter().map(String::from).collect())
}

fn list(depth: u32) -> BoxedStrategy<List> {
    let item = if depth == 0 {
        text().prop_map(|text| Item { text, lists: vec![] }).boxed()
    } else {
        (text(), prop::collection::vec(list(depth - 1), 0..2)).prop_map(|(text, lists)| Item { text, lists }).boxed()
    };
    prop::collection::vec(item, 1..4).prop_map(|items| List { items }).boxed()
}

fn paragraph() -> impl Strategy<Value = PolicyChild> {
    (text(), labels(), prop::collection::vec(list(1), 0..2))
        .prop_map(|(text, labels, lists)| PolicyChild::Paragraph(Paragraph { id: String::new(), text, labels, lists }))
}

fn children(level: u8) -> BoxedStrategy<Vec<PolicyChild>> {
    if level >= 4 {
        return prop::collection::vec(paragraph(), 0..3).boxed();
    }
    let seg = (level + 1..=4u8, text(), labels())
        .prop_flat_map(|(lvl, t, l)| {
            children(lvl).prop_map(move |children| {
                PolicyChild::Segment(Segment {
                    level: lvl,
                    title: Title { id: String::new(), text: t.clone(), labels: l.clone() },
                    children,
                })
            })
        })
        .boxed();
    prop::collection::vec(prop_oneof![3 => paragraph(), 1 => seg], 0..4).boxed()
}

/// Valid PP-XML documents with numbered nodes.
pub fn policy_document() -> impl Strategy<Value = PolicyDocument> {
    (prop::option::of("[a-z:/._]{1,20}"), children(0)).prop_map(|(source, children)| {
        let mut d = PolicyDocument { source, children };
        d.renumber();
        d
    })
}

/// The element a correct extractor must return on a planted page: the
/// deepest element with at least two element children of near-equal text
/// length (max/min ≤ 1.1) that holds at least 90% of the page text.
pub fn planted_oracle(root: &DomNode) -> Option<&DomNode> {
    let total = text_length(root) as f64;
    let mut best: Option<(usize, &DomNode)> = None;
    fn walk<'a>(n: &'a DomNode, depth: usize, total: f64, best: &mut Option<(usize, &'a DomNode)>) {
        let lens: Vec<usize> = n.elements().map(text_length).collect();
        if lens.len() >= 2 {
            let (lo, hi) = (*lens.iter().min().unwrap(), *lens.iter().max().unwrap());
            let uniform = lo > 0 && hi as f64 / lo as f64 <= 1.1;
            if uniform && text_length(n) as f64 >= 0.9 * total && best.map_or(true, |(d, _)| depth > d) {
                *best = Some((depth, n));
            }
        }
        for c in n.elements() {
            walk(c, depth + 1, total, best);
        }
    }
    walk(root, 0, total, &mut best);
    best.map(|(_, n)| n)
}
