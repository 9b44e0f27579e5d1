//! Node features: TF-IDF of the node and its context, keyword hits and
//! precomputed embeddings, assembled per classifier type.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnnotatedNode, CorpusDocument, NodeKey};
use crate::taxonomy::Taxonomy;

const BUILTIN_KEYWORDS: &str = include_str!("../data/gdpr_keywords.csv");

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("empty corpus vocabulary")]
    EmptyVocabulary,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("keyword table: {0}")]
    Keywords(String),
    #[error("embedding store line {line}: {reason}")]
    Embedding { line: usize, reason: String },
    #[error("unknown classifier type {0} (expected 1..=12)")]
    UnknownType(u8),
    #[error("{0}")]
    MissingResource(String),
}

// ---------------------------------------------------------------------------
// TF-IDF

/// Lowercase alphanumeric runs of at least two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() > 1)
        .map(str::to_lowercase)
        .collect()
}

/// Terms ordered by descending document frequency, plus the corpus size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    terms: Vec<(String, usize)>,
    n_docs: usize,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyData {
    terms: Vec<(String, usize)>,
    n_docs: usize,
}

impl From<VocabularyData> for Vocabulary {
    fn from(d: VocabularyData) -> Self {
        Vocabulary::from_terms(d.terms, d.n_docs)
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData { terms: v.terms, n_docs: v.n_docs }
    }
}

impl Vocabulary {
    pub fn from_terms(terms: Vec<(String, usize)>, n_docs: usize) -> Self {
        let index = terms.iter().enumerate().map(|(i, (t, _))| (t.clone(), i)).collect();
        Self { terms, n_docs, index }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[(String, usize)] {
        &self.terms
    }

    pub fn df(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|&i| self.terms[i].1)
    }
}

/// Keeps the `dim` terms with the highest document frequency, breaking
/// ties lexicographically. Shrinks (with a warning) when fewer terms exist.
pub fn fit_tfidf<S: AsRef<str>>(texts: &[S], dim: usize) -> Result<Vocabulary, FeatureError> {
    if dim == 0 {
        return Err(FeatureError::ZeroDimension);
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    for t in texts {
        let uniq: HashSet<String> = tokenize(t.as_ref()).into_iter().collect();
        for term in uniq {
            *df.entry(term).or_default() += 1;
        }
    }
    if df.is_empty() {
        return Err(FeatureError::EmptyVocabulary);
    }
    let mut terms: Vec<(String, usize)> = df.into_iter().collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if terms.len() < dim {
        log::warn!("vocabulary has only {} distinct terms; shrinking from {dim}", terms.len());
    }
    terms.truncate(dim);
    Ok(Vocabulary::from_terms(terms, texts.len()))
}

/// `tf · ln(N / df)` per vocabulary term, L2-normalised unless all zero.
pub fn transform_tfidf(v: &Vocabulary, text: &str) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for tok in tokenize(text) {
        if let Some(&i) = v.index.get(&tok) {
            out[i] += 1.0;
        }
    }
    for (i, w) in out.iter_mut().enumerate() {
        if *w > 0.0 {
            *w *= (v.n_docs as f64 / v.terms[i].1 as f64).ln();
        }
    }
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
    }
    out
}

// ---------------------------------------------------------------------------
// Keywords

fn keyword_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Keyword phrases per concept, already tokenised.
#[derive(Debug, Clone, PartialEq)]
pub struct KeywordTable {
    entries: BTreeMap<String, Vec<Vec<String>>>,
}

impl KeywordTable {
    pub fn builtin(t: &Taxonomy) -> Result<Self, FeatureError> {
        Self::parse_csv(BUILTIN_KEYWORDS, t)
    }

    pub fn load(path: &Path, t: &Taxonomy) -> Result<Self, FeatureError> {
        Self::parse_csv(&std::fs::read_to_string(path)?, t)
    }

    /// Reads `concept_id,keyword` rows. Every taxonomy concept needs at
    /// least one keyword and unknown concepts are rejected.
    pub fn parse_csv(text: &str, t: &Taxonomy) -> Result<Self, FeatureError> {
        let err = |m: String| FeatureError::Keywords(m);
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let mut entries: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| err(e.to_string()))?;
            let (Some(id), Some(kw)) = (rec.get(0), rec.get(1)) else {
                return Err(err(format!("row {} needs two fields", i + 2)));
            };
            let id = id.trim();
            if !t.contains(id) {
                return Err(err(format!("row {}: unknown concept {id:?}", i + 2)));
            }
            let toks = keyword_tokens(kw);
            if toks.is_empty() {
                return Err(err(format!("row {}: empty keyword for {id}", i + 2)));
            }
            entries.entry(id.to_string()).or_default().push(toks);
        }
        if let Some(n) = t.nodes().iter().find(|n| !entries.contains_key(&n.id)) {
            return Err(err(format!("no keywords for concept {}", n.id)));
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keywords(&self, concept: &str) -> &[Vec<String>] {
        self.entries.get(concept).map_or(&[], Vec::as_slice)
    }
}

/// One bit per concept in taxonomy order: a keyword of the concept occurs
/// as a whole-token sequence in `text`, ignoring case.
pub fn keyword_vector(kt: &KeywordTable, t: &Taxonomy, text: &str) -> Vec<f64> {
    let toks = keyword_tokens(text);
    t.nodes()
        .iter()
        .map(|n| {
            let hit = kt.keywords(&n.id).iter().any(|kw| toks.windows(kw.len()).any(|w| w == kw.as_slice()));
            f64::from(u8::from(hit))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Embeddings

/// Precomputed node embeddings keyed by `(doc-id, node-id)`.
#[derive(Debug, Default)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: HashMap<NodeKey, Vec<f32>>,
    missing: AtomicUsize,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        Self { dim, ..Default::default() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, key: NodeKey, v: Vec<f32>) -> Result<(), FeatureError> {
        if v.len() != self.dim {
            return Err(FeatureError::Embedding {
                line: 0,
                reason: format!("record {key} has {} values, expected {}", v.len(), self.dim),
            });
        }
        if self.vectors.insert(key.clone(), v).is_some() {
            return Err(FeatureError::Embedding { line: 0, reason: format!("duplicate key {key}") });
        }
        Ok(())
    }

    /// The stored vector, or zeros (counted as a miss) when absent.
    pub fn lookup(&self, key: &NodeKey) -> Vec<f64> {
        match self.vectors.get(key) {
            Some(v) => v.iter().map(|&x| f64::from(x)).collect(),
            None => {
                self.missing.fetch_add(1, Ordering::Relaxed);
                vec![0.0; self.dim]
            }
        }
    }

    pub fn missing_lookups(&self) -> usize {
        self.missing.load(Ordering::Relaxed)
    }

    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let bad = |line: usize, reason: String| FeatureError::Embedding { line, reason };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing #dim header".into()))?;
        let dim: usize = header
            .trim()
            .strip_prefix("#dim=")
            .and_then(|d| d.parse().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| bad(1, format!("expected #dim=<D>, found {header:?}")))?;
        let mut store = Self::new(dim);
        for (i, line) in lines {
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (key, vals) = line.split_once('\t').ok_or_else(|| bad(n, "expected <key><TAB><values>".into()))?;
            let key = NodeKey::parse(key).ok_or_else(|| bad(n, format!("bad key {key:?}")))?;
            let v: Vec<f32> = vals
                .split_ascii_whitespace()
                .map(|x| x.parse::<f32>())
                .collect::<Result<_, _>>()
                .map_err(|e| bad(n, format!("record {key}: {e}")))?;
            if v.len() != dim {
                return Err(bad(n, format!("record {key} has {} values, expected {dim}", v.len())));
            }
            if store.vectors.insert(key.clone(), v).is_some() {
                return Err(bad(n, format!("duplicate key {key}")));
            }
        }
        Ok(store)
    }
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore, FeatureError> {
    EmbeddingStore::parse(&std::fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Configurations

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureSource {
    Tfidf,
    Embedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Architecture {
    Lcn,
    Lcpn,
}

impl Architecture {
    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Lcn => "LCN",
            Architecture::Lcpn => "LCPN",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const KEYWORD_DIM: usize = 96;
pub const CURRENT_TFIDF_DIM: usize = 300;
pub const PARENT_TFIDF_DIM: usize = 100;
pub const SIBLING_TFIDF_DIM: usize = 300;

/// One of the twelve classifier types. Types 1–6 are per-node forests and
/// 7–12 per-parent networks; within each half the rows are: current node,
/// +context, +keywords, +context+keywords, embedding, embedding+context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub type_id: u8,
    pub source: FeatureSource,
    pub use_context: bool,
    pub use_keywords: bool,
    pub current_dim: usize,
    pub parent_dim: usize,
    pub sibling_dim: usize,
}

impl FeatureConfig {
    /// The configuration of `type_id`. Embedding types need the store
    /// dimension.
    pub fn for_type(type_id: u8, embedding_dim: Option<usize>) -> Result<Self, FeatureError> {
        if !(1..=12).contains(&type_id) {
            return Err(FeatureError::UnknownType(type_id));
        }
        let row = (type_id - 1) % 6;
        let (source, use_context, use_keywords) = match row {
            0 => (FeatureSource::Tfidf, false, false),
            1 => (FeatureSource::Tfidf, true, false),
            2 => (FeatureSource::Tfidf, false, true),
            3 => (FeatureSource::Tfidf, true, true),
            4 => (FeatureSource::Embedding, false, false),
            _ => (FeatureSource::Embedding, true, false),
        };
        let (c, p, s) = match source {
            FeatureSource::Tfidf => (CURRENT_TFIDF_DIM, PARENT_TFIDF_DIM, SIBLING_TFIDF_DIM),
            FeatureSource::Embedding => {
                let d = embedding_dim.ok_or_else(|| {
                    FeatureError::MissingResource(format!("embedding store required for type {type_id}"))
                })?;
                (d, d, d)
            }
        };
        Ok(Self { type_id, source, use_context, use_keywords, current_dim: c, parent_dim: p, sibling_dim: s })
    }

    pub fn needs_embeddings(type_id: u8) -> bool {
        matches!((type_id.wrapping_sub(1)) % 6, 4 | 5)
    }

    pub fn architecture(&self) -> Architecture {
        if self.type_id <= 6 {
            Architecture::Lcn
        } else {
            Architecture::Lcpn
        }
    }

    pub fn dimension(&self) -> usize {
        let mut d = self.current_dim;
        if self.use_context {
            d += self.parent_dim + self.sibling_dim;
        }
        if self.use_keywords {
            d += KEYWORD_DIM;
        }
        d
    }
}

/// Everything [`assemble_features`] may need. Which parts are required
/// depends on the configuration.
#[derive(Debug, Clone, Copy)]
pub struct FeatureResources<'a> {
    pub taxonomy: &'a Taxonomy,
    pub current_vocab: Option<&'a Vocabulary>,
    pub parent_vocab: Option<&'a Vocabulary>,
    pub keywords: Option<&'a KeywordTable>,
    pub embeddings: Option<&'a EmbeddingStore>,
}

impl FeatureResources<'_> {
    /// Fails with a message naming the first resource `cfg` lacks.
    pub fn check(&self, cfg: &FeatureConfig) -> Result<(), FeatureError> {
        let missing = |what: &str| Err(FeatureError::MissingResource(format!("{what} required for type {}", cfg.type_id)));
        match cfg.source {
            FeatureSource::Tfidf => {
                if self.current_vocab.is_none() {
                    return missing("TF-IDF vocabulary");
                }
                if cfg.use_context && self.parent_vocab.is_none() {
                    return missing("parent TF-IDF vocabulary");
                }
            }
            FeatureSource::Embedding => match self.embeddings {
                None => return missing("embedding store"),
                Some(s) if s.dim() != cfg.current_dim => {
                    return Err(FeatureError::MissingResource(format!(
                        "embedding store has dimension {}, type {} was configured for {}",
                        s.dim(),
                        cfg.type_id,
                        cfg.current_dim
                    )))
                }
                Some(_) => {}
            },
        }
        if cfg.use_keywords && self.keywords.is_none() {
            return missing("keyword table");
        }
        Ok(())
    }
}

fn padded(mut v: Vec<f64>, dim: usize) -> Vec<f64> {
    v.resize(dim, 0.0);
    v
}

/// Fitted TF-IDF vocabularies for one training set: the current/sibling
/// vocabulary over paragraph texts and the parent vocabulary over titles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedVocabularies {
    pub current: Vocabulary,
    pub parent: Option<Vocabulary>,
}

impl FittedVocabularies {
    pub fn fit(cfg: &FeatureConfig, train: &[&AnnotatedNode]) -> Result<Option<Self>, FeatureError> {
        if cfg.source != FeatureSource::Tfidf {
            return Ok(None);
        }
        use crate::structure::NodeKind;
        let paragraphs: Vec<&str> =
            train.iter().filter(|n| n.kind == NodeKind::Paragraph).map(|n| n.text.as_str()).collect();
        let current = fit_tfidf(&paragraphs, cfg.current_dim)?;
        let parent = if cfg.use_context {
            let titles: Vec<&str> = train.iter().filter(|n| n.kind == NodeKind::Title).map(|n| n.text.as_str()).collect();
            match fit_tfidf(&titles, cfg.parent_dim) {
                Ok(v) => Some(v),
                Err(FeatureError::EmptyVocabulary) => {
                    log::warn!("no title text in the training set; parent context stays zero");
                    Some(Vocabulary::from_terms(Vec::new(), 0))
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        Ok(Some(Self { current, parent }))
    }
}

/// Concatenates `[current | parent | sibling | keywords]` for one node as
/// `cfg` dictates. Missing parent or sibling context gives zeros.
pub fn assemble_features(
    cfg: &FeatureConfig,
    node: &AnnotatedNode,
    doc: &CorpusDocument,
    res: &FeatureResources<'_>,
) -> Result<Vec<f64>, FeatureError> {
    res.check(cfg)?;
    let mut out = Vec::with_capacity(cfg.dimension());
    let context_node = |id: &Option<String>| id.as_deref().and_then(|i| doc.node(i));
    match cfg.source {
        FeatureSource::Tfidf => {
            let cur = res.current_vocab.expect("checked");
            out.extend(padded(transform_tfidf(cur, &node.text), cfg.current_dim));
            if cfg.use_context {
                let par = res.parent_vocab.expect("checked");
                let p = context_node(&node.parent_title_id)
                    .map_or_else(Vec::new, |p| transform_tfidf(par, &p.text));
                out.extend(padded(p, cfg.parent_dim));
                let s = context_node(&node.preceding_sibling_id)
                    .map_or_else(Vec::new, |s| transform_tfidf(cur, &s.text));
                out.extend(padded(s, cfg.sibling_dim));
            }
        }
        FeatureSource::Embedding => {
            let store = res.embeddings.expect("checked");
            out.extend(store.lookup(&node.key()));
            if cfg.use_context {
                for id in [&node.parent_title_id, &node.preceding_sibling_id] {
                    match id {
                        Some(id) => out.extend(store.lookup(&NodeKey::new(&doc.id, id))),
                        None => out.extend(std::iter::repeat(0.0).take(store.dim())),
                    }
                }
            }
        }
    }
    if cfg.use_keywords {
        out.extend(keyword_vector(res.keywords.expect("checked"), res.taxonomy, &node.text));
    }
    debug_assert_eq!(out.len(), cfg.dimension());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{Paragraph, PolicyChild, PolicyDocument, Segment, Title};
    use proptest::prelude::*;

    #[test]
    fn tfidf_tie_break_and_weights() {
        let v = fit_tfidf(&["data privacy", "data use"], 2).unwrap();
        assert_eq!(v.terms(), &[("data".to_string(), 2), ("privacy".to_string(), 1)]);
        let x = transform_tfidf(&v, "privacy privacy");
        assert_eq!(x, vec![0.0, 1.0]);
        assert_eq!(transform_tfidf(&v, ""), vec![0.0, 0.0]);
        assert_eq!(transform_tfidf(&v, "unknown words"), vec![0.0, 0.0]);
        assert!(matches!(fit_tfidf(&[""], 5), Err(FeatureError::EmptyVocabulary)));
        assert_eq!(fit_tfidf(&["aa bb cc"], 10).unwrap().len(), 3);
    }

    #[test]
    fn tokenizer_drops_single_chars() {
        assert_eq!(tokenize("A b-cd, EF1 x"), ["cd", "ef1"]);
    }

    #[test]
    fn keywords_whole_token_case_insensitive() {
        let t = Taxonomy::builtin();
        let kt = KeywordTable::builtin(&t).unwrap();
        assert_eq!(kt.len(), 96);
        let pos = t.position("DATA SHARING.CONDITION").unwrap();
        let v = keyword_vector(&kt, &t, "When Google shares your information");
        assert_eq!(v.len(), 96);
        assert_eq!(v[pos], 1.0);
        assert_eq!(v[t.position("DATA SHARING").unwrap()], 1.0);
        assert!(keyword_vector(&kt, &t, "").iter().all(|&x| x == 0.0));
        assert_eq!(keyword_vector(&kt, &t, "SHARE"), keyword_vector(&kt, &t, "share"));
        let sharer = keyword_vector(&kt, &t, "sharer");
        assert_eq!(sharer[t.position("DATA SHARING").unwrap()], 0.0);
    }

    #[test]
    fn keyword_table_rejects_gaps() {
        let t = Taxonomy::builtin();
        assert!(KeywordTable::parse_csv("concept_id,keyword\nCOMPLAINT,complain\n", &t).is_err());
        assert!(KeywordTable::parse_csv("concept_id,keyword\nNOPE,x\n", &t).is_err());
    }

    #[test]
    fn embedding_store_format() {
        let mut text = String::from("#dim=768\n");
        for i in 0..3 {
            let v: Vec<String> = (0..768).map(|j| format!("{}", (i * j) as f32 / 1000.0)).collect();
            text.push_str(&format!("d1/n000{}\t{}\n", i + 1, v.join(" ")));
        }
        let s = EmbeddingStore::parse(&text).unwrap();
        assert_eq!((s.len(), s.dim()), (3, 768));
        assert_eq!(s.lookup(&NodeKey::new("zz", "n0001")), vec![0.0; 768]);
        assert_eq!(s.missing_lookups(), 1);

        let short: Vec<String> = (0..767).map(|_| "0".to_string()).collect();
        let err = EmbeddingStore::parse(&format!("#dim=768\nd/n0001\t{}\n", short.join(" "))).unwrap_err();
        assert!(err.to_string().contains("d/n0001"), "{err}");
        assert!(EmbeddingStore::parse("#dim=1\na/n1\t0\na/n1\t1\n").unwrap_err().to_string().contains("duplicate"));
    }

    fn sample_doc() -> CorpusDocument {
        let mut d = PolicyDocument {
            source: None,
            children: vec![
                PolicyChild::Paragraph(Paragraph { text: "leading data text".into(), ..Default::default() }),
                PolicyChild::Segment(Segment {
                    level: 1,
                    title: Title { text: "Sharing data".into(), ..Default::default() },
                    children: vec![
                        PolicyChild::Paragraph(Paragraph { text: "we share data".into(), ..Default::default() }),
                        PolicyChild::Paragraph(Paragraph { text: "when required".into(), ..Default::default() }),
                    ],
                }),
                PolicyChild::Segment(Segment {
                    level: 1,
                    title: Title { text: "Retention".into(), ..Default::default() },
                    children: vec![PolicyChild::Paragraph(Paragraph { text: "kept briefly".into(), ..Default::default() })],
                }),
            ],
        };
        d.renumber();
        CorpusDocument::new("doc", d)
    }

    #[test]
    fn dimensions_per_type() {
        let expect = [300, 700, 396, 796, 768, 2304, 300, 700, 396, 796, 768, 2304];
        for (i, e) in expect.iter().enumerate() {
            let cfg = FeatureConfig::for_type(i as u8 + 1, Some(768)).unwrap();
            assert_eq!(cfg.dimension(), *e, "type {}", i + 1);
            assert_eq!(cfg.architecture(), if i < 6 { Architecture::Lcn } else { Architecture::Lcpn });
        }
        let err = FeatureConfig::for_type(5, None).unwrap_err();
        assert_eq!(err.to_string(), "embedding store required for type 5");
        assert!(FeatureConfig::for_type(13, None).is_err());
    }

    #[test]
    fn assembled_context_rules() {
        let t = Taxonomy::builtin();
        let kt = KeywordTable::builtin(&t).unwrap();
        let doc = sample_doc();
        let nodes: Vec<&AnnotatedNode> = doc.nodes.iter().collect();
        let cfg = FeatureConfig::for_type(4, None).unwrap();
        let v = FittedVocabularies::fit(&cfg, &nodes).unwrap().unwrap();
        let res = FeatureResources {
            taxonomy: &t,
            current_vocab: Some(&v.current),
            parent_vocab: v.parent.as_ref(),
            keywords: Some(&kt),
            embeddings: None,
        };
        let leading = assemble_features(&cfg, &doc.nodes[0], &doc, &res).unwrap();
        assert_eq!(leading.len(), 796);
        assert!(leading[300..700].iter().all(|&x| x == 0.0));
        let second = assemble_features(&cfg, &doc.nodes[3], &doc, &res).unwrap();
        assert!(second[300..400].iter().any(|&x| x != 0.0), "parent title context");
        assert!(second[400..700].iter().any(|&x| x != 0.0), "sibling context");

        let t5 = FeatureConfig::for_type(5, Some(4)).unwrap();
        let err = assemble_features(&t5, &doc.nodes[0], &doc, &res).unwrap_err();
        assert_eq!(err.to_string(), "embedding store required for type 5");
    }

    #[test]
    fn embedding_context() {
        let t = Taxonomy::builtin();
        let doc = sample_doc();
        let mut store = EmbeddingStore::new(2);
        store.insert(NodeKey::new("doc", "n0002"), vec![1.0, 2.0]).unwrap();
        store.insert(NodeKey::new("doc", "n0003"), vec![3.0, 4.0]).unwrap();
        store.insert(NodeKey::new("doc", "n0004"), vec![5.0, 6.0]).unwrap();
        let res = FeatureResources { taxonomy: &t, current_vocab: None, parent_vocab: None, keywords: None, embeddings: Some(&store) };
        let cfg = FeatureConfig::for_type(12, Some(2)).unwrap();
        let v = assemble_features(&cfg, &doc.nodes[3], &doc, &res).unwrap();
        assert_eq!(v, vec![5.0, 6.0, 1.0, 2.0, 3.0, 4.0]);
    }

    proptest! {
        #[test]
        fn tfidf_norm_is_zero_or_one(
            corpus in prop::collection::vec("[a-e ]{0,30}", 1..8),
            text in "[a-f ]{0,40}",
            dim in 1usize..10,
        ) {
            let corpus: Vec<String> = corpus.into_iter().chain(["ab cd".to_string()]).collect();
            let v = fit_tfidf(&corpus, dim).unwrap();
            let x = transform_tfidf(&v, &text);
            let n = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-9);
        }

        #[test]
        fn keyword_vector_case_and_punctuation(text in "[a-zA-Z ]{0,60}") {
            let t = Taxonomy::builtin();
            let kt = KeywordTable::builtin(&t).unwrap();
            let base = keyword_vector(&kt, &t, &text);
            prop_assert_eq!(&base, &keyword_vector(&kt, &t, &text.to_uppercase()));
            let punct: String = text.split(' ').map(|w| format!("({w}),")).collect::<Vec<_>>().join(" ");
            prop_assert_eq!(&base, &keyword_vector(&kt, &t, &punct));
        }
    }
}
