use thiserror::Error;

use super::dom::DomNode;

#[derive(Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error("leaf node <{0}> has no children to score")]
    LeafNode(String),
    #[error("ratio threshold must lie in (0, 1), got {0}")]
    BadThreshold(f64),
}

/// Tuning for [`extract_pp_element`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionConfig {
    /// A candidate whose children-similarity score falls below this
    /// fraction of the running average over rejected ancestors is accepted.
    pub ratio_threshold: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self { ratio_threshold: 0.55 }
    }
}

impl ExtractionConfig {
    pub fn new(ratio_threshold: f64) -> Result<Self, ExtractError> {
        if ratio_threshold > 0.0 && ratio_threshold < 1.0 {
            Ok(Self { ratio_threshold })
        } else {
            Err(ExtractError::BadThreshold(ratio_threshold))
        }
    }
}

/// Number of characters a reader sees in the subtree.
pub fn text_length(node: &DomNode) -> usize {
    node.visible_text().chars().count()
}

/// Population standard deviation of the children's text lengths.
pub fn children_similarity_score(node: &DomNode) -> Result<f64, ExtractError> {
    let lengths: Vec<f64> = node.elements().map(|c| text_length(c) as f64).collect();
    if lengths.is_empty() {
        return Err(ExtractError::LeafNode(node.tag.clone()));
    }
    Ok(population_std(&lengths))
}

fn population_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Descends from `node` towards the element holding the policy body.
///
/// At each step the current element's children-similarity score is compared
/// with the average over the ancestors already rejected; a ratio below the
/// threshold accepts the element, otherwise the walk moves to the child with
/// the longest visible text. Leaves are returned as-is.
pub fn extract_pp_element<'a>(node: &'a DomNode, cfg: &ExtractionConfig) -> &'a DomNode {
    extract_with_trace(node, cfg).0
}

/// Same as [`extract_pp_element`] but also returns the scores seen on the way
/// down, one per visited non-leaf element.
pub fn extract_with_trace<'a>(node: &'a DomNode, cfg: &ExtractionConfig) -> (&'a DomNode, Vec<f64>) {
    let mut rejected: Vec<f64> = Vec::new();
    let mut current = node;
    loop {
        let Ok(score) = children_similarity_score(current) else {
            return (current, rejected);
        };
        let ratio = if rejected.is_empty() {
            f64::INFINITY
        } else {
            let avg = rejected.iter().sum::<f64>() / rejected.len() as f64;
            if avg == 0.0 {
                f64::INFINITY
            } else {
                score / avg
            }
        };
        if ratio < cfg.ratio_threshold {
            return (current, rejected);
        }
        rejected.push(score);
        current = longest_child(current).expect("non-leaf has an element child");
    }
}

/// Child element with the most visible text; the first wins ties.
fn longest_child(node: &DomNode) -> Option<&DomNode> {
    let mut best: Option<(&DomNode, usize)> = None;
    for child in node.elements() {
        let len = text_length(child);
        if best.map_or(true, |(_, b)| len > b) {
            best = Some((child, len));
        }
    }
    best.map(|(n, _)| n)
}
