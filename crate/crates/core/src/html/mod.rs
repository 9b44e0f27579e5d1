//! Saved policy page → cleaned DOM → the element holding the policy text.

mod clean;
mod dom;
mod extract;

pub use clean::{
    find_policy_links, find_registration_links, is_irrelevant, strip_irrelevant_elements, Link,
    CHROME_TAGS, EMBED_TAGS, MEDIA_TAGS, POLICY_LINK_KEYWORDS, REGISTRATION_LINK_KEYWORDS,
};
pub(crate) use dom::is_block_level;
pub use dom::{collapse_whitespace, parse_html, to_html, Descendants, DomChild, DomNode};
pub use extract::{
    children_similarity_score, extract_pp_element, extract_with_trace, text_length, ExtractError,
    ExtractionConfig,
};

/// Source of page bytes. Tests and the CLI read saved files; a live
/// fetcher can implement this without touching the rest of the pipeline.
pub trait PageFetcher {
    fn fetch(&self, location: &str) -> std::io::Result<Vec<u8>>;
}

/// Reads pages from the local filesystem.
#[derive(Debug, Default, Clone, Copy)]
pub struct FileFetcher;

impl PageFetcher for FileFetcher {
    fn fetch(&self, location: &str) -> std::io::Result<Vec<u8>> {
        std::fs::read(location)
    }
}

/// Parses a saved page and returns its cleaned `<body>` (or the whole
/// document when no body exists).
pub fn load_clean_body(html: &str) -> DomNode {
    let doc = parse_html(html);
    let body = doc.find("body").cloned().unwrap_or(doc);
    strip_irrelevant_elements(&body)
}
