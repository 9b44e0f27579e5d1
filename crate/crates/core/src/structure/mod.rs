//! Cleaned DOM → classified blocks → PP-XML document.

mod block;
mod block_classifier;
mod builder;
mod lol;
mod ppxml;

pub use block::{
    collect_blocks, extract_block_features, heuristic_class, resolve_style, Block, BlockClass, BlockFeatures,
    PageStyles, ResolvedStyle, TagCode, BLOCK_FEATURE_DIM,
};
pub use block_classifier::{
    classify_blocks, evaluate_block_classifier, label_blocks, macro_f1, parse_block_samples, train_block_classifier,
    write_block_samples, BlockClassifierModel,
    BlockEvaluation, BlockModelError,
};
pub use builder::build_segment_tree;
pub use lol::{parse_leading_ordinal_label, LabelFormat, LolDescriptor, SeparatorFormat};
pub use ppxml::{
    node_id, parse_ppxml, serialize_ppxml, validation_report, Item, List, NodeKind, Paragraph, PolicyChild,
    PolicyDocument, PpXmlError, Segment, TextNodeRef, Title,
};

use crate::html::{extract_pp_element, parse_html, strip_irrelevant_elements, ExtractionConfig};

/// Cleans the page, locates the policy element and collects its blocks.
pub fn page_blocks(html: &str, cfg: &ExtractionConfig) -> Vec<Block> {
    let doc = parse_html(html);
    let sheet = PageStyles::from_document(&doc);
    let body = doc.find("body").cloned().unwrap_or(doc);
    let cleaned = strip_irrelevant_elements(&body);
    let pp = extract_pp_element(&cleaned, cfg);
    collect_blocks(pp, &sheet)
}

/// Full page-to-document pipeline: [`page_blocks`], classification, nesting.
/// Without a model, [`heuristic_class`] labels the blocks.
pub fn structure_page(
    html: &str,
    cfg: &ExtractionConfig,
    model: Option<&BlockClassifierModel>,
) -> PolicyDocument {
    let classified: Vec<(Block, BlockClass)> = page_blocks(html, cfg)
        .into_iter()
        .map(|b| {
            let c = match model {
                Some(m) => m.classify(&b.features),
                None => heuristic_class(&b.features),
            };
            (b, c)
        })
        .collect();
    build_segment_tree(&classified)
}
