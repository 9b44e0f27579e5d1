//! Nests classified blocks into segments.

use super::block::{Block, BlockClass};
use super::ppxml::{Paragraph, PolicyChild, PolicyDocument, Segment, Title};

/// Builds the segment tree from blocks in document order.
///
/// A title opens a segment at its level. Following paragraphs go into the
/// innermost open segment. A deeper title nests inside it (without inventing
/// intermediate levels); an equal or shallower title closes segments first.
/// Lists carried by a title block move into a text-less paragraph after it.
pub fn build_segment_tree(classified: &[(Block, BlockClass)]) -> PolicyDocument {
    let mut root: Vec<PolicyChild> = Vec::new();
    let mut open: Vec<Segment> = Vec::new();

    fn close_one(open: &mut Vec<Segment>, root: &mut Vec<PolicyChild>) {
        let seg = open.pop().expect("segment stack not empty");
        match open.last_mut() {
            Some(parent) => parent.children.push(PolicyChild::Segment(seg)),
            None => root.push(PolicyChild::Segment(seg)),
        }
    }

    for (block, class) in classified {
        match class.title_level() {
            Some(level) if !block.text.is_empty() => {
                while open.last().is_some_and(|s| s.level >= level) {
                    close_one(&mut open, &mut root);
                }
                open.push(Segment {
                    level,
                    title: Title { id: String::new(), text: block.text.clone(), labels: Vec::new() },
                    children: Vec::new(),
                });
                if !block.lists.is_empty() {
                    let p = Paragraph { lists: block.lists.clone(), ..Default::default() };
                    open.last_mut().unwrap().children.push(PolicyChild::Paragraph(p));
                }
            }
            _ => {
                let p = Paragraph {
                    id: String::new(),
                    text: block.text.clone(),
                    labels: Vec::new(),
                    lists: block.lists.clone(),
                };
                match open.last_mut() {
                    Some(seg) => seg.children.push(PolicyChild::Paragraph(p)),
                    None => root.push(PolicyChild::Paragraph(p)),
                }
            }
        }
    }
    while !open.is_empty() {
        close_one(&mut open, &mut root);
    }
    let mut doc = PolicyDocument { source: None, children: root };
    doc.renumber();
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::ppxml::NodeKind;
    use proptest::prelude::*;

    fn b(text: &str) -> Block {
        Block::paragraph(text)
    }

    fn shape(children: &[PolicyChild]) -> String {
        children
            .iter()
            .map(|c| match c {
                PolicyChild::Paragraph(p) => format!("P({})", p.text),
                PolicyChild::Segment(s) => format!("S{}[{}|{}]", s.level, s.title.text, shape(&s.children)),
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    #[test]
    fn nesting_trace() {
        use BlockClass::*;
        let seq = vec![
            (b("T1"), TitleL1),
            (b("a"), Paragraph),
            (b("t2"), TitleL2),
            (b("b"), Paragraph),
            (b("T1'"), TitleL1),
            (b("c"), Paragraph),
        ];
        let doc = build_segment_tree(&seq);
        assert_eq!(shape(&doc.children), "S1[T1|P(a),S2[t2|P(b)]],S1[T1'|P(c)]");
        let ids: Vec<_> = doc.text_nodes().iter().map(|n| n.id.to_string()).collect();
        assert_eq!(ids, ["n0001", "n0002", "n0003", "n0004", "n0005", "n0006"]);
    }

    #[test]
    fn paragraphs_only_and_empty() {
        let doc = build_segment_tree(&[(b("x"), BlockClass::Paragraph), (b("y"), BlockClass::Paragraph)]);
        assert_eq!(shape(&doc.children), "P(x),P(y)");
        assert!(build_segment_tree(&[]).children.is_empty());
    }

    #[test]
    fn starts_at_level_two() {
        let doc = build_segment_tree(&[(b("t2"), BlockClass::TitleL2), (b("p"), BlockClass::Paragraph)]);
        assert_eq!(shape(&doc.children), "S2[t2|P(p)]");
    }

    #[test]
    fn skipped_level_nests_directly() {
        use BlockClass::*;
        let doc = build_segment_tree(&[(b("A"), TitleL1), (b("c"), TitleL3), (b("B"), TitleL2)]);
        assert_eq!(shape(&doc.children), "S1[A|S3[c|],S2[B|]]");
        doc.validate().unwrap();
    }

    fn class_strategy() -> impl Strategy<Value = BlockClass> {
        (0usize..5).prop_map(|i| BlockClass::from_index(i).unwrap())
    }

    proptest! {
        #[test]
        fn in_order_traversal_preserves_blocks(classes in prop::collection::vec(class_strategy(), 0..40)) {
            let seq: Vec<(Block, BlockClass)> =
                classes.iter().enumerate().map(|(i, c)| (b(&format!("block {i}")), *c)).collect();
            let doc = build_segment_tree(&seq);
            doc.validate().unwrap();
            let nodes = doc.text_nodes();
            prop_assert_eq!(nodes.len(), seq.len());
            for (n, (blk, class)) in nodes.iter().zip(&seq) {
                prop_assert_eq!(&n.text, &blk.text);
                let kind = if class.title_level().is_some() { NodeKind::Title } else { NodeKind::Paragraph };
                prop_assert_eq!(n.kind, kind);
            }
        }
    }
}
