//! Annotated PP-XML corpora, train/test splits, agreement and coverage.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure::{parse_ppxml, NodeKind, PolicyDocument};
use crate::taxonomy::Taxonomy;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("no documents in {0}")]
    NoDocuments(PathBuf),
    #[error("{}", .0.join("; "))]
    Files(Vec<String>),
    #[error("duplicate document id {0}")]
    DuplicateDoc(String),
    #[error("n_test must lie in 1..{n_docs}, got {n_test}")]
    BadTestCount { n_test: usize, n_docs: usize },
    #[error("test fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty judgment lists")]
    EmptyJudgments,
    #[error("malformed split file line {line}: {reason}")]
    SplitFormat { line: usize, reason: String },
}

/// `(doc-id, node-id)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub doc: String,
    pub node: String,
}

impl NodeKey {
    pub fn new(doc: impl Into<String>, node: impl Into<String>) -> Self {
        Self { doc: doc.into(), node: node.into() }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (d, n) = s.rsplit_once('/')?;
        (!d.is_empty() && !n.is_empty()).then(|| Self::new(d, n))
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.doc, self.node)
    }
}

/// A title or paragraph with its labels and context references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedNode {
    pub doc_id: String,
    pub node_id: String,
    pub kind: NodeKind,
    pub text: String,
    pub labels: BTreeSet<String>,
    pub parent_title_id: Option<String>,
    pub preceding_sibling_id: Option<String>,
}

impl AnnotatedNode {
    pub fn key(&self) -> NodeKey {
        NodeKey::new(&self.doc_id, &self.node_id)
    }
}

/// Flattens a document into annotated nodes in document order.
pub fn annotated_nodes(doc_id: &str, doc: &PolicyDocument) -> Vec<AnnotatedNode> {
    doc.text_nodes()
        .into_iter()
        .map(|n| AnnotatedNode {
            doc_id: doc_id.to_string(),
            node_id: n.id.to_string(),
            kind: n.kind,
            text: n.text,
            labels: n.labels.iter().cloned().collect(),
            parent_title_id: n.parent_title_id.map(str::to_string),
            preceding_sibling_id: n.preceding_sibling_id.map(str::to_string),
        })
        .collect()
}

/// One annotated document with its flat node list.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusDocument {
    pub id: String,
    pub doc: PolicyDocument,
    pub nodes: Vec<AnnotatedNode>,
}

impl CorpusDocument {
    pub fn new(id: impl Into<String>, doc: PolicyDocument) -> Self {
        let id = id.into();
        let nodes = annotated_nodes(&id, &doc);
        Self { id, doc, nodes }
    }

    pub fn node(&self, node_id: &str) -> Option<&AnnotatedNode> {
        self.nodes.iter().find(|n| n.node_id == node_id)
    }
}

/// Documents sorted by id. Immutable once built.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    documents: Vec<CorpusDocument>,
}

impl Corpus {
    pub fn new(mut documents: Vec<CorpusDocument>) -> Result<Self, CorpusError> {
        documents.sort_by(|a, b| a.id.cmp(&b.id));
        for w in documents.windows(2) {
            if w[0].id == w[1].id {
                return Err(CorpusError::DuplicateDoc(w[0].id.clone()));
            }
        }
        Ok(Self { documents })
    }

    pub fn documents(&self) -> &[CorpusDocument] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn document(&self, id: &str) -> Option<&CorpusDocument> {
        self.documents.binary_search_by(|d| d.id.as_str().cmp(id)).ok().map(|i| &self.documents[i])
    }

    pub fn nodes(&self) -> impl Iterator<Item = &AnnotatedNode> {
        self.documents.iter().flat_map(|d| d.nodes.iter())
    }

    pub fn node(&self, key: &NodeKey) -> Option<&AnnotatedNode> {
        self.document(&key.doc)?.node(&key.node)
    }

    pub fn node_keys(&self) -> Vec<NodeKey> {
        self.nodes().map(AnnotatedNode::key).collect()
    }

    /// `(documents, titles, paragraphs)`.
    pub fn summary(&self) -> (usize, usize, usize) {
        let titles = self.nodes().filter(|n| n.kind == NodeKind::Title).count();
        (self.len(), titles, self.nodes().count() - titles)
    }
}

/// Loads every `<doc-id>.ppxml` in `dir`, validating labels against `t`.
/// Errors from all files are collected before failing.
pub fn load_corpus(dir: &Path, t: &Taxonomy) -> Result<Corpus, CorpusError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "ppxml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CorpusError::NoDocuments(dir.to_path_buf()));
    }
    let results: Vec<Result<CorpusDocument, String>> = paths.par_iter().map(|p| load_one(p, t)).collect();
    let mut docs = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(d) => docs.push(d),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(CorpusError::Files(errors));
    }
    let corpus = Corpus::new(docs)?;
    let (n, titles, paras) = corpus.summary();
    log::info!("loaded {n} documents: {titles} titles, {paras} paragraphs");
    Ok(corpus)
}

fn load_one(path: &Path, t: &Taxonomy) -> Result<CorpusDocument, String> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let id = path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let bytes = std::fs::read(path).map_err(|e| format!("{name}: {e}"))?;
    let doc = parse_ppxml(&bytes).map_err(|e| format!("{name}: {e}"))?;
    for n in doc.text_nodes() {
        t.validate_label_set(n.labels.iter().map(String::as_str)).map_err(|e| format!("{name}: node {}: {e}", n.id))?;
    }
    Ok(CorpusDocument::new(id, doc))
}

// ---------------------------------------------------------------------------
// Splits

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Segment,
    Document,
}

impl SplitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitMode::Segment => "segment",
            SplitMode::Document => "document",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "segment" => Some(SplitMode::Segment),
            "document" => Some(SplitMode::Document),
            _ => None,
        }
    }
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Train/test partition. Keys are doc-ids in document mode and
/// `doc-id/node-id` node keys in segment mode. Both sides are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub seed: u64,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl SplitSpec {
    fn from_keys(mode: SplitMode, seed: u64, mut train: Vec<String>, mut test: Vec<String>) -> Self {
        train.sort();
        test.sort();
        Self { mode, seed, train, test }
    }

    /// Whether `key` is on the test side.
    pub fn is_test(&self, key: &NodeKey) -> bool {
        match self.mode {
            SplitMode::Document => self.test.binary_search(&key.doc).is_ok(),
            SplitMode::Segment => self.test.binary_search(&key.to_string()).is_ok(),
        }
    }

    pub fn is_train(&self, key: &NodeKey) -> bool {
        match self.mode {
            SplitMode::Document => self.train.binary_search(&key.doc).is_ok(),
            SplitMode::Segment => self.train.binary_search(&key.to_string()).is_ok(),
        }
    }

    pub fn train_nodes<'c>(&self, c: &'c Corpus) -> Vec<&'c AnnotatedNode> {
        c.nodes().filter(|n| self.is_train(&n.key())).collect()
    }

    pub fn test_nodes<'c>(&self, c: &'c Corpus) -> Vec<&'c AnnotatedNode> {
        c.nodes().filter(|n| self.is_test(&n.key())).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("#mode={}\n#seed={}\n", self.mode, self.seed);
        for k in &self.train {
            s.push_str(&format!("train\t{k}\n"));
        }
        for k in &self.test {
            s.push_str(&format!("test\t{k}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let bad = |line: usize, reason: &str| CorpusError::SplitFormat { line, reason: reason.into() };
        let (mut mode, mut seed) = (None, None);
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if let Some(v) = line.strip_prefix("#mode=") {
                mode = Some(SplitMode::parse(v).ok_or_else(|| bad(n, "unknown mode"))?);
            } else if let Some(v) = line.strip_prefix("#seed=") {
                seed = Some(v.trim().parse().map_err(|_| bad(n, "bad seed"))?);
            } else if line.starts_with('#') || line.trim().is_empty() {
                continue;
            } else {
                match line.split_once('\t') {
                    Some(("train", k)) => train.push(k.to_string()),
                    Some(("test", k)) => test.push(k.to_string()),
                    _ => return Err(bad(n, "expected `train<TAB>key` or `test<TAB>key`")),
                }
            }
        }
        let mode = mode.ok_or_else(|| bad(0, "missing #mode header"))?;
        let seed = seed.ok_or_else(|| bad(0, "missing #seed header"))?;
        Ok(Self::from_keys(mode, seed, train, test))
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Holds out `n_test` whole documents chosen uniformly at random.
pub fn split_document_level(c: &Corpus, n_test: usize, seed: u64) -> Result<SplitSpec, CorpusError> {
    if n_test == 0 || n_test >= c.len() {
        return Err(CorpusError::BadTestCount { n_test, n_docs: c.len() });
    }
    let mut ids: Vec<String> = c.documents().iter().map(|d| d.id.clone()).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train = ids.split_off(n_test);
    Ok(SplitSpec::from_keys(SplitMode::Document, seed, train, ids))
}

/// Pools every node of every document and holds out
/// `round(fraction · nodes)` of them at random.
pub fn split_segment_level(c: &Corpus, test_fraction: f64, seed: u64) -> Result<SplitSpec, CorpusError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::BadFraction(test_fraction));
    }
    let mut keys: Vec<String> = c.node_keys().iter().map(NodeKey::to_string).collect();
    keys.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((keys.len() as f64) * test_fraction).round() as usize;
    let train = keys.split_off(n_test.min(keys.len()));
    Ok(SplitSpec::from_keys(SplitMode::Segment, seed, train, keys))
}

// ---------------------------------------------------------------------------
// Agreement

/// Cohen's kappa of two binary judgment lists.
pub fn cohens_kappa(a: &[bool], b: &[bool]) -> Result<f64, CorpusError> {
    if a.len() != b.len() {
        return Err(CorpusError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(CorpusError::EmptyJudgments);
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let pa = a.iter().filter(|x| **x).count() as f64 / n;
    let pb = b.iter().filter(|x| **x).count() as f64 / n;
    let p_o = agree / n;
    let p_e = pa * pb + (1.0 - pa) * (1.0 - pb);
    if (1.0 - p_e).abs() < 1e-12 {
        // Both annotators constant. Identical constants agree perfectly.
        return Ok(if p_o >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Agreement between two annotations of the same documents.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaReport {
    /// Mean kappa per document, over the concepts either annotator used.
    pub per_document: BTreeMap<String, f64>,
    pub mean: f64,
}

/// Per-concept node-level kappa, averaged over concepts used by either
/// annotator within a document, then over documents.
/// Documents must have the same node ids on both sides.
pub fn corpus_kappa(a: &Corpus, b: &Corpus) -> Result<KappaReport, CorpusError> {
    let mut per_document = BTreeMap::new();
    for da in a.documents() {
        let Some(db) = b.document(&da.id) else { continue };
        if da.nodes.len() != db.nodes.len() {
            return Err(CorpusError::LengthMismatch(da.nodes.len(), db.nodes.len()));
        }
        let concepts: BTreeSet<&String> =
            da.nodes.iter().chain(&db.nodes).flat_map(|n| n.labels.iter()).collect();
        if concepts.is_empty() {
            continue;
        }
        let mut sum = 0.0;
        for c in &concepts {
            let ja: Vec<bool> = da.nodes.iter().map(|n| n.labels.contains(*c)).collect();
            let jb: Vec<bool> = db.nodes.iter().map(|n| n.labels.contains(*c)).collect();
            sum += cohens_kappa(&ja, &jb)?;
        }
        per_document.insert(da.id.clone(), sum / concepts.len() as f64);
    }
    let mean = if per_document.is_empty() {
        0.0
    } else {
        per_document.values().sum::<f64>() / per_document.len() as f64
    };
    Ok(KappaReport { per_document, mean })
}

// ---------------------------------------------------------------------------
// Coverage

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub concept_id: String,
    pub docs_covered: usize,
    pub coverage_fraction: f64,
}

/// Fraction of documents with at least one node labelled with each concept,
/// in taxonomy order. With `include_descendants`, a descendant label also
/// covers its ancestors.
pub fn corpus_statistics(c: &Corpus, t: &Taxonomy, include_descendants: bool) -> Vec<CoverageRow> {
    let per_doc: Vec<HashSet<String>> = c
        .documents()
        .iter()
        .map(|d| {
            let labels = d.nodes.iter().flat_map(|n| n.labels.iter().map(String::as_str));
            if include_descendants {
                t.close_under_ancestors(labels).into_iter().collect()
            } else {
                labels.map(str::to_string).collect()
            }
        })
        .collect();
    t.nodes()
        .iter()
        .map(|n| {
            let docs_covered = per_doc.iter().filter(|s| s.contains(&n.id)).count();
            let coverage_fraction = if c.is_empty() { 0.0 } else { docs_covered as f64 / c.len() as f64 };
            CoverageRow { concept_id: n.id.clone(), docs_covered, coverage_fraction }
        })
        .collect()
}

pub fn write_statistics_csv<W: Write>(rows: &[CoverageRow], w: W) -> Result<(), CorpusError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["concept_id", "docs_covered", "coverage_fraction"]).map_err(csv_io)?;
    for r in rows {
        out.write_record([r.concept_id.clone(), r.docs_covered.to_string(), format!("{:.6}", r.coverage_fraction)])
            .map_err(csv_io)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> CorpusError {
    CorpusError::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{Paragraph, PolicyChild};
    use proptest::prelude::*;

    fn doc_with(labels: &[&[&str]]) -> PolicyDocument {
        let mut d = PolicyDocument {
            source: None,
            children: labels
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    PolicyChild::Paragraph(Paragraph {
                        text: format!("p{i}"),
                        labels: l.iter().map(|s| s.to_string()).collect(),
                        ..Default::default()
                    })
                })
                .collect(),
        };
        d.renumber();
        d
    }

    fn corpus(n_docs: usize, nodes: usize) -> Corpus {
        Corpus::new(
            (0..n_docs).map(|i| CorpusDocument::new(format!("d{i:03}"), doc_with(&vec![&[][..]; nodes]))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn kappa_examples() {
        let a = [true, false, true];
        assert_eq!(cohens_kappa(&a, &a).unwrap(), 1.0);
        let mut xa = Vec::new();
        let mut xb = Vec::new();
        for (n, va, vb) in [(20, true, true), (5, true, false), (10, false, true), (15, false, false)] {
            xa.extend(std::iter::repeat(va).take(n));
            xb.extend(std::iter::repeat(vb).take(n));
        }
        assert!((cohens_kappa(&xa, &xb).unwrap() - 0.4).abs() < 1e-12);
        assert!(matches!(cohens_kappa(&[true], &[]), Err(CorpusError::LengthMismatch(1, 0))));
        assert_eq!(cohens_kappa(&[false; 4], &[false; 4]).unwrap(), 1.0);
    }

    #[test]
    fn kappa_random_vs_constant() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<bool> = (0..1000).map(|_| rng.gen_bool(0.5)).collect();
        let b = vec![true; 1000];
        assert!(cohens_kappa(&a, &b).unwrap().abs() < 0.1);
    }

    #[test]
    fn document_split() {
        let c = corpus(150, 2);
        let s = split_document_level(&c, 30, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (120, 30));
        assert_eq!(s, split_document_level(&c, 30, 1).unwrap());
        assert_ne!(s.test, split_document_level(&c, 30, 2).unwrap().test);
        assert!(split_document_level(&c, 150, 1).is_err());
        assert!(split_document_level(&c, 0, 1).is_err());
    }

    #[test]
    fn segment_split() {
        let c = corpus(10, 10);
        let s = split_segment_level(&c, 0.2, 3).unwrap();
        assert_eq!(s.test.len(), 20);
        assert!(split_segment_level(&c, 0.0, 3).is_err());
        assert!(split_segment_level(&c, 1.0, 3).is_err());
    }

    #[test]
    fn two_node_document_can_straddle() {
        let c = corpus(1, 2);
        let straddles = (0..64).any(|seed| {
            let s = split_segment_level(&c, 0.5, seed).unwrap();
            s.train.len() == 1 && s.test.len() == 1
        });
        assert!(straddles);
    }

    #[test]
    fn split_file_round_trip() {
        let c = corpus(5, 3);
        for s in [split_document_level(&c, 2, 4).unwrap(), split_segment_level(&c, 0.3, 4).unwrap()] {
            assert_eq!(SplitSpec::parse(&s.to_text()).unwrap(), s);
        }
        assert!(SplitSpec::parse("#mode=document\nbogus\n").is_err());
    }

    #[test]
    fn coverage() {
        let t = Taxonomy::builtin();
        let c = Corpus::new(vec![
            CorpusDocument::new("a", doc_with(&[&["DATA SHARING.CONDITION"]])),
            CorpusDocument::new("b", doc_with(&[&[]])),
        ])
        .unwrap();
        let rows = corpus_statistics(&c, &t, true);
        assert_eq!(rows.len(), 96);
        let get = |id: &str| rows.iter().find(|r| r.concept_id == id).unwrap().coverage_fraction;
        assert_eq!(get("DATA SHARING.CONDITION"), 0.5);
        assert_eq!(get("DATA SHARING"), 0.5);
        let exact = corpus_statistics(&c, &t, false);
        assert_eq!(exact.iter().find(|r| r.concept_id == "DATA SHARING").unwrap().docs_covered, 0);
        let empty = corpus_statistics(&Corpus::default(), &t, true);
        assert!(empty.iter().all(|r| r.coverage_fraction == 0.0));
        let mut buf = Vec::new();
        write_statistics_csv(&rows[..1], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("concept_id,docs_covered,coverage_fraction\n"));
    }

    #[test]
    fn corpus_kappa_identical() {
        let d = CorpusDocument::new("a", doc_with(&[&["COMPLAINT"], &[]]));
        let c = Corpus::new(vec![d]).unwrap();
        assert_eq!(corpus_kappa(&c, &c).unwrap().mean, 1.0);
    }

    #[test]
    fn duplicate_doc_ids() {
        let d = CorpusDocument::new("a", doc_with(&[]));
        assert!(matches!(Corpus::new(vec![d.clone(), d]), Err(CorpusError::DuplicateDoc(_))));
    }

    proptest! {
        #[test]
        fn splits_partition_population(n_docs in 2usize..20, nodes in 1usize..6, seed in any::<u64>(), frac in 0.05f64..0.95) {
            let c = corpus(n_docs, nodes);
            let n_test = 1 + (seed as usize % (n_docs - 1));
            let d = split_document_level(&c, n_test, seed).unwrap();
            let all_docs: BTreeSet<String> = c.documents().iter().map(|d| d.id.clone()).collect();
            let (tr, te): (BTreeSet<_>, BTreeSet<_>) = (d.train.iter().cloned().collect(), d.test.iter().cloned().collect());
            prop_assert!(tr.is_disjoint(&te));
            prop_assert_eq!(tr.union(&te).cloned().collect::<BTreeSet<_>>(), all_docs);
            for n in c.nodes() {
                prop_assert!(d.is_train(&n.key()) != d.is_test(&n.key()));
            }

            let s = split_segment_level(&c, frac, seed).unwrap();
            let all: BTreeSet<String> = c.node_keys().iter().map(|k| k.to_string()).collect();
            let (tr, te): (BTreeSet<_>, BTreeSet<_>) = (s.train.iter().cloned().collect(), s.test.iter().cloned().collect());
            prop_assert!(tr.is_disjoint(&te));
            prop_assert_eq!(tr.union(&te).cloned().collect::<BTreeSet<_>>(), all);
        }

        #[test]
        fn kappa_symmetric(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..60)) {
            let (a, b): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let k1 = cohens_kappa(&a, &b).unwrap();
            let k2 = cohens_kappa(&b, &a).unwrap();
            prop_assert!((k1 - k2).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&k1));
        }
    }
}
