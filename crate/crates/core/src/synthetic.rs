//! Seeded generators for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, CorpusDocument};
use crate::html::{text_length, DomNode};
use crate::structure::{
    parse_leading_ordinal_label, BlockClass, BlockFeatures, Paragraph, PolicyChild, PolicyDocument, Segment, TagCode,
    Title,
};
use crate::taxonomy::Taxonomy;

/// Blocks where titles are short, bold and large and paragraphs are long
/// and plain. Title level follows the depth of a leading ordinal label.
pub fn separable_blocks(n: usize, seed: u64) -> Vec<(BlockFeatures, BlockClass)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            if i % 2 == 0 {
                let level = rng.gen_range(1..=4usize);
                let label: Vec<String> = (0..level).map(|_| rng.gen_range(1..10).to_string()).collect();
                let text = format!("{}. Heading", label.join("."));
                let f = BlockFeatures {
                    text_length: rng.gen_range(8..40),
                    font_size: rng.gen_range(20.0..32.0),
                    font_weight: 700.0,
                    is_italic: false,
                    is_underlined: false,
                    dom_depth: rng.gen_range(1..5),
                    tag_code: TagCode::of(&format!("h{level}")),
                    ends_with_punctuation: false,
                    lol: parse_leading_ordinal_label(&text),
                };
                (f, BlockClass::title(level as u8))
            } else {
                let f = BlockFeatures {
                    text_length: rng.gen_range(120..900),
                    font_size: rng.gen_range(12.0..16.0),
                    font_weight: 400.0,
                    is_italic: rng.gen_bool(0.1),
                    is_underlined: false,
                    dom_depth: rng.gen_range(1..6),
                    tag_code: TagCode::P,
                    ends_with_punctuation: true,
                    lol: Default::default(),
                };
                (f, BlockClass::Paragraph)
            }
        })
        .collect()
}

/// Shape of the leakage corpus: every document gets private trigger tokens
/// for the concepts it covers, so pooled node splits leak them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageCorpusSpec {
    pub n_docs: usize,
    pub n_concepts: usize,
    pub concepts_per_doc: usize,
    /// Labelled paragraphs per covered concept (the title is labelled too).
    pub paragraphs_per_concept: usize,
    /// Chance that a labelled node also carries its concept's shared cue word.
    pub cue_rate: f64,
    /// Chance that a labelled paragraph carries one of the first two
    /// children of its segment's concept instead of the concept itself.
    pub child_rate: f64,
    pub seed: u64,
}

impl Default for LeakageCorpusSpec {
    fn default() -> Self {
        Self { n_docs: 50, n_concepts: 8, concepts_per_doc: 4, paragraphs_per_concept: 3, cue_rate: 0.3, child_rate: 0.0, seed: 0 }
    }
}

const FILLER: &[&str] = &[
    "about", "account", "also", "any", "apply", "available", "before", "being", "below", "both", "can", "certain",
    "change", "company", "contact", "content", "could", "customer", "described", "details", "each", "either",
    "example", "following", "from", "further", "general", "have", "help", "here", "include", "information",
    "item", "like", "make", "many", "more", "most", "need", "notice", "number", "other", "our", "page", "part",
    "please", "product", "provide", "reason", "refer", "relevant", "section", "service", "some", "such", "support",
    "terms", "their", "these", "this", "through", "time", "under", "using", "various", "website", "which", "with",
    "within", "would", "your", "user", "site", "app", "team", "question", "request", "review", "subject", "today",
];

fn random_word(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| (b'a' + rng.gen_range(0..26u8)) as char).collect()
}

fn filler_text(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| FILLER[rng.gen_range(0..FILLER.len())].to_string()).collect()
}

/// A corpus whose only strong concept signal is a token private to one
/// document and concept. Each covered concept becomes a level-1 segment
/// (labelled title, labelled paragraphs, one unlabelled paragraph), after
/// two unlabelled leading paragraphs. Concepts are the first `n_concepts`
/// level-1 nodes of `t`.
pub fn leakage_corpus(spec: &LeakageCorpusSpec, t: &Taxonomy) -> Corpus {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let concepts: Vec<String> = t.roots().iter().take(spec.n_concepts).map(|s| s.to_string()).collect();
    let kids: Vec<Vec<String>> = concepts
        .iter()
        .map(|c| t.children_of(c).expect("root concept").into_iter().take(2).map(String::from).collect())
        .collect();
    let cues: Vec<String> = (0..concepts.len()).map(|_| format!("cue{}", random_word(&mut rng, 6))).collect();
    let mut docs = Vec::new();
    for d in 0..spec.n_docs {
        let mut picked: Vec<usize> = (0..concepts.len()).collect();
        picked.shuffle(&mut rng);
        picked.truncate(spec.concepts_per_doc);
        picked.sort_unstable();
        let mut children = Vec::new();
        for _ in 0..2 {
            let text = filler_text(&mut rng, 10).join(" ");
            children.push(PolicyChild::Paragraph(Paragraph { text, ..Default::default() }));
        }
        for &ci in &picked {
            let trigger = format!("tk{}", random_word(&mut rng, 8));
            let labelled = |rng: &mut ChaCha8Rng, n_filler: usize| {
                let mut words = filler_text(rng, n_filler);
                words.insert(rng.gen_range(0..=words.len()), trigger.clone());
                if rng.gen_bool(spec.cue_rate) {
                    words.insert(rng.gen_range(0..=words.len()), cues[ci].clone());
                }
                words.join(" ")
            };
            let title = Title { text: labelled(&mut rng, 2), labels: vec![concepts[ci].clone()], ..Default::default() };
            let mut seg_children = Vec::new();
            for _ in 0..spec.paragraphs_per_concept {
                let label = if !kids[ci].is_empty() && rng.gen_bool(spec.child_rate) {
                    kids[ci][rng.gen_range(0..kids[ci].len())].clone()
                } else {
                    concepts[ci].clone()
                };
                seg_children.push(PolicyChild::Paragraph(Paragraph {
                    text: labelled(&mut rng, 10),
                    labels: vec![label],
                    ..Default::default()
                }));
            }
            seg_children.push(PolicyChild::Paragraph(Paragraph {
                text: filler_text(&mut rng, 10).join(" "),
                ..Default::default()
            }));
            children.push(PolicyChild::Segment(Segment { level: 1, title, children: seg_children }));
        }
        let mut doc = PolicyDocument { source: None, children };
        doc.renumber();
        docs.push(CorpusDocument::new(format!("doc{d:03}"), doc));
    }
    Corpus::new(docs).expect("generated ids are unique")
}

/// A page with a known policy element. `planted_path` lists element-child
/// indices from `root` down to it.
#[derive(Debug, Clone)]
pub struct PlantedDom {
    pub root: DomNode,
    pub planted_path: Vec<usize>,
}

impl PlantedDom {
    pub fn planted(&self) -> &DomNode {
        let mut n = &self.root;
        for &i in &self.planted_path {
            n = n.elements().nth(i).expect("valid planted path");
        }
        n
    }
}

const NOISE_TAGS: &[&str] = &["span", "a", "p", "div", "header", "aside"];
const WRAPPER_TAGS: &[&str] = &["div", "main", "article", "section"];

fn lorem(rng: &mut ChaCha8Rng, len: usize) -> String {
    let mut s = String::with_capacity(len);
    while s.len() < len {
        if !s.is_empty() {
            s.push(' ');
        }
        s.push_str(FILLER[rng.gen_range(0..FILLER.len())]);
    }
    s.truncate(len);
    s.trim_end().to_string()
}

fn noise_node(rng: &mut ChaCha8Rng) -> DomNode {
    let tag = NOISE_TAGS[rng.gen_range(0..NOISE_TAGS.len())];
    let len = rng.gen_range(5..20);
    if tag == "div" && rng.gen_bool(0.5) {
        DomNode::new("div").with_child(DomNode::new("span").with_text(lorem(rng, len)))
    } else {
        DomNode::new(tag).with_text(lorem(rng, len))
    }
}

/// A random `<body>` where 1–4 wrapper levels, each padded with short noise
/// siblings, lead to an element whose 4–10 paragraph children have nearly
/// equal lengths and hold at least 92% of the page text.
pub fn planted_dom(seed: u64) -> PlantedDom {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n_para = rng.gen_range(4..=10);
        let base = rng.gen_range(400..800usize);
        let mut pp = DomNode::new(WRAPPER_TAGS[rng.gen_range(0..WRAPPER_TAGS.len())]);
        for _ in 0..n_para {
            let len = base + rng.gen_range(0..=base / 50);
            let p = if rng.gen_bool(0.3) {
                let lead = rng.gen_range(5..20);
                DomNode::new("p")
                    .with_child(DomNode::new("b").with_text(lorem(&mut rng, lead)))
                    .with_text(format!(" {}", lorem(&mut rng, len.saturating_sub(lead + 1))))
            } else {
                DomNode::new("p").with_text(lorem(&mut rng, len))
            };
            pp = pp.with_child(p);
        }

        let levels = rng.gen_range(1..=4);
        let mut node = pp;
        let mut path_rev = Vec::new();
        for level in 0..levels {
            let tag = if level + 1 == levels { "body" } else { WRAPPER_TAGS[rng.gen_range(0..WRAPPER_TAGS.len())] };
            let n_noise = rng.gen_range(1..=2);
            let pos = rng.gen_range(0..=n_noise);
            let mut w = DomNode::new(tag);
            for i in 0..=n_noise {
                if i == pos {
                    w = w.with_child(node.clone());
                } else {
                    w = w.with_child(noise_node(&mut rng));
                }
            }
            path_rev.push(pos);
            node = w;
        }
        path_rev.reverse();
        let planted = PlantedDom { root: node, planted_path: path_rev };
        let total = text_length(&planted.root) as f64;
        if text_length(planted.planted()) as f64 >= 0.92 * total {
            return planted;
        }
    }
}
