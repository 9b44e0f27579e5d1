use super::dom::{DomChild, DomNode};

/// Media and other elements that carry no readable policy text.
pub const MEDIA_TAGS: &[&str] = &[
    "img", "picture", "video", "audio", "canvas", "map", "area", "figure", "figcaption", "source",
    "track", "svg",
];

/// Elements embedding a non-textual object or an external page.
pub const EMBED_TAGS: &[&str] = &["applet", "embed", "object", "param", "script", "noscript", "iframe"];

/// Page furniture and input controls.
pub const CHROME_TAGS: &[&str] = &[
    "footer", "nav", "form", "input", "button", "select", "textarea", "option", "optgroup",
    "datalist", "output", "keygen",
];

pub const POLICY_LINK_KEYWORDS: &[&str] = &["privacy policy", "privacy notice", "privacy terms"];

pub const REGISTRATION_LINK_KEYWORDS: &[&str] = &["create account", "register", "sign up", "sign-up"];

pub fn is_irrelevant(tag: &str) -> bool {
    MEDIA_TAGS.contains(&tag) || EMBED_TAGS.contains(&tag) || CHROME_TAGS.contains(&tag)
}

/// Returns a copy of the tree with every irrelevant element removed along
/// with its subtree. The root itself is never removed.
pub fn strip_irrelevant_elements(root: &DomNode) -> DomNode {
    let mut out = DomNode { tag: root.tag.clone(), attrs: root.attrs.clone(), children: Vec::new() };
    for child in &root.children {
        match child {
            DomChild::Element(e) if is_irrelevant(&e.tag) => {}
            DomChild::Element(e) => out.children.push(DomChild::Element(strip_irrelevant_elements(e))),
            DomChild::Text(t) => out.children.push(DomChild::Text(t.clone())),
        }
    }
    out
}

/// A candidate hyperlink found on a page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub text: String,
    pub href: String,
}

fn links_matching(root: &DomNode, keywords: &[&str]) -> Vec<Link> {
    root.descendants()
        .filter(|n| n.tag == "a")
        .filter_map(|a| {
            let text = a.visible_text();
            let lower = text.to_lowercase();
            keywords.iter().any(|k| lower.contains(k)).then(|| Link {
                text,
                href: a.attr("href").unwrap_or_default().to_string(),
            })
        })
        .collect()
}

/// Anchors whose visible text mentions a privacy policy, in document order.
pub fn find_policy_links(root: &DomNode) -> Vec<Link> {
    links_matching(root, POLICY_LINK_KEYWORDS)
}

/// Anchors pointing at a sign-up page, where a policy link usually lives.
pub fn find_registration_links(root: &DomNode) -> Vec<Link> {
    links_matching(root, REGISTRATION_LINK_KEYWORDS)
}
