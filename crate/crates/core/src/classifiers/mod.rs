//! Per-node forests (LCN) and per-parent networks (LCPN) over the taxonomy.

mod mlp;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mlp::{Mlp, MlpParams};

use crate::corpus::{AnnotatedNode, Corpus, CorpusDocument, SplitSpec};
use crate::features::{
    assemble_features, Architecture, EmbeddingStore, FeatureConfig, FeatureError, FeatureResources,
    FittedVocabularies, KeywordTable,
};
use crate::forest::{DecisionForest, ForestError, ForestParams};
use crate::taxonomy::Taxonomy;

const LCN_MAGIC: &str = "LCNF1";
const LCPN_MAGIC: &str = "LCPN1";
const MANIFEST_FORMAT: u32 = 1;

/// Key of the virtual parent above the level-1 concepts.
pub const VIRTUAL_ROOT: &str = "";

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("cannot upsample empty class")]
    NoPositives,
    #[error("upsampling ratio must be positive, got {0}")]
    BadRatio(f64),
    #[error("type {type_id} is {actual}, expected {expected}")]
    WrongArchitecture { type_id: u8, actual: Architecture, expected: Architecture },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("model bundle: {0}")]
    Bundle(String),
}

/// Duplicates random positives (with replacement) until
/// `positives / negatives ≥ ratio_target`. Originals come first, unchanged.
pub fn upsample_positives<T: Clone>(
    samples: &[(T, bool)],
    ratio_target: f64,
    seed: u64,
) -> Result<Vec<(T, bool)>, ClassifierError> {
    if !(ratio_target > 0.0) {
        return Err(ClassifierError::BadRatio(ratio_target));
    }
    let pos: Vec<usize> = samples.iter().enumerate().filter(|(_, s)| s.1).map(|(i, _)| i).collect();
    if pos.is_empty() {
        return Err(ClassifierError::NoPositives);
    }
    let neg = samples.len() - pos.len();
    let needed = (ratio_target * neg as f64 - 1e-9).ceil().max(0.0) as usize;
    let mut out = samples.to_vec();
    if needed > pos.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..needed - pos.len() {
            out.push(samples[pos[rng.gen_range(0..pos.len())]].clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    /// LCN concepts with fewer positive training nodes are skipped.
    pub min_pos: usize,
    pub upsample_ratio: f64,
    pub threshold: f64,
    pub forest: ForestParams,
    pub mlp: MlpParams,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            min_pos: 20,
            upsample_ratio: 1.0 / 3.0,
            threshold: 0.5,
            forest: ForestParams::random_forest(),
            mlp: MlpParams::default(),
        }
    }
}

/// Shared inputs that are not learned from the training split.
#[derive(Debug, Clone, Copy)]
pub struct ExternalResources<'a> {
    pub taxonomy: &'a Taxonomy,
    pub keywords: Option<&'a KeywordTable>,
    pub embeddings: Option<&'a EmbeddingStore>,
}

/// Outputs of one LCPN parent. Without a network the single output is
/// inherited whenever the parent is predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcpnParent {
    pub outputs: Vec<String>,
    pub network: Option<Mlp>,
}

#[derive(Debug, Clone, PartialEq)]
enum Models {
    Lcn(BTreeMap<String, DecisionForest>),
    Lcpn(BTreeMap<String, LcpnParent>),
}

/// A trained hierarchy of classifiers plus the vocabularies its features
/// were built with.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyClassifier {
    pub config: FeatureConfig,
    pub seed: u64,
    pub options: TrainOptions,
    pub vocabularies: Option<FittedVocabularies>,
    /// `(concept, reason)` for every concept without a classifier.
    pub skipped: Vec<(String, String)>,
    models: Models,
}

fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ salt.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct TrainingSet<'c> {
    x: Vec<Vec<f64>>,
    labels: Vec<BTreeSet<String>>,
    vocabularies: Option<FittedVocabularies>,
    _nodes: Vec<&'c AnnotatedNode>,
}

fn resources<'a>(ext: &ExternalResources<'a>, v: Option<&'a FittedVocabularies>) -> FeatureResources<'a> {
    FeatureResources {
        taxonomy: ext.taxonomy,
        current_vocab: v.map(|v| &v.current),
        parent_vocab: v.and_then(|v| v.parent.as_ref()),
        keywords: ext.keywords,
        embeddings: ext.embeddings,
    }
}

fn node_features(
    cfg: &FeatureConfig,
    nodes: &[&AnnotatedNode],
    corpus: &Corpus,
    res: &FeatureResources<'_>,
) -> Result<Vec<Vec<f64>>, ClassifierError> {
    res.check(cfg)?;
    nodes
        .par_iter()
        .map(|n| {
            let doc = corpus.document(&n.doc_id).expect("node belongs to corpus");
            assemble_features(cfg, n, doc, res).map_err(ClassifierError::from)
        })
        .collect()
}

fn training_set<'c>(
    corpus: &'c Corpus,
    split: &SplitSpec,
    cfg: &FeatureConfig,
    ext: &ExternalResources<'_>,
) -> Result<TrainingSet<'c>, ClassifierError> {
    let nodes = split.train_nodes(corpus);
    if nodes.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let vocabularies = FittedVocabularies::fit(cfg, &nodes)?;
    let x = node_features(cfg, &nodes, corpus, &resources(ext, vocabularies.as_ref()))?;
    let labels = nodes.iter().map(|n| ext.taxonomy.close_under_ancestors(n.labels.iter().map(String::as_str))).collect();
    Ok(TrainingSet { x, labels, vocabularies, _nodes: nodes })
}

fn check_arch(cfg: &FeatureConfig, expected: Architecture) -> Result<(), ClassifierError> {
    if cfg.architecture() != expected {
        return Err(ClassifierError::WrongArchitecture { type_id: cfg.type_id, actual: cfg.architecture(), expected });
    }
    Ok(())
}

/// One binary forest per concept with at least `min_pos` positive training
/// nodes. A node is positive when it carries the concept or a descendant.
pub fn train_lcn(
    corpus: &Corpus,
    split: &SplitSpec,
    cfg: &FeatureConfig,
    ext: &ExternalResources<'_>,
    opts: &TrainOptions,
    seed: u64,
) -> Result<HierarchyClassifier, ClassifierError> {
    check_arch(cfg, Architecture::Lcn)?;
    let ts = training_set(corpus, split, cfg, ext)?;
    let concepts: Vec<(usize, &str)> = ext.taxonomy.nodes().iter().map(|n| n.id.as_str()).enumerate().collect();
    let results: Vec<Result<(String, Result<DecisionForest, String>), ClassifierError>> = concepts
        .par_iter()
        .map(|&(ci, concept)| {
            let samples: Vec<(usize, bool)> =
                ts.labels.iter().enumerate().map(|(i, l)| (i, l.contains(concept))).collect();
            let n_pos = samples.iter().filter(|s| s.1).count();
            let n_neg = samples.len() - n_pos;
            if n_pos < opts.min_pos || n_pos == 0 {
                let reason = format!("{n_pos} positive training nodes (min_pos {})", opts.min_pos);
                return Ok((concept.to_string(), Err(reason)));
            }
            if n_neg == 0 {
                return Ok((concept.to_string(), Err("no negative training nodes".to_string())));
            }
            let concept_seed = derive_seed(seed, ci as u64);
            let up = upsample_positives(&samples, opts.upsample_ratio, concept_seed)?;
            let x: Vec<&[f64]> = up.iter().map(|(i, _)| ts.x[*i].as_slice()).collect();
            let y: Vec<usize> = up.iter().map(|(_, p)| usize::from(*p)).collect();
            let forest = DecisionForest::fit(&x, &y, 2, &opts.forest, concept_seed)?;
            Ok((concept.to_string(), Ok(forest)))
        })
        .collect();
    let mut models = BTreeMap::new();
    let mut skipped = Vec::new();
    for r in results {
        match r? {
            (c, Ok(f)) => {
                models.insert(c, f);
            }
            (c, Err(reason)) => skipped.push((c, reason)),
        }
    }
    log::info!("type {}: trained {} LCN concepts, skipped {}", cfg.type_id, models.len(), skipped.len());
    Ok(HierarchyClassifier {
        config: *cfg,
        seed,
        options: *opts,
        vocabularies: ts.vocabularies,
        skipped,
        models: Models::Lcn(models),
    })
}

/// One network per parent (the virtual root included) over the children
/// that have positive training nodes. A parent with a single such child
/// gets no network; the child inherits the parent's prediction.
pub fn train_lcpn(
    corpus: &Corpus,
    split: &SplitSpec,
    cfg: &FeatureConfig,
    ext: &ExternalResources<'_>,
    opts: &TrainOptions,
    seed: u64,
) -> Result<HierarchyClassifier, ClassifierError> {
    check_arch(cfg, Architecture::Lcpn)?;
    let t = ext.taxonomy;
    let ts = training_set(corpus, split, cfg, ext)?;
    let mut parents: Vec<(String, Vec<String>)> =
        vec![(VIRTUAL_ROOT.to_string(), t.roots().iter().map(|s| s.to_string()).collect())];
    for n in t.nodes() {
        let kids = t.children_of(&n.id).unwrap_or_default();
        if !kids.is_empty() {
            parents.push((n.id.clone(), kids.iter().map(|s| s.to_string()).collect()));
        }
    }
    let results: Vec<(String, Option<LcpnParent>, Vec<(String, String)>)> = parents
        .par_iter()
        .enumerate()
        .map(|(pi, (parent, kids))| {
            let idx: Vec<usize> = (0..ts.x.len())
                .filter(|&i| parent.is_empty() || ts.labels[i].contains(parent))
                .collect();
            let mut skipped = Vec::new();
            let mut eligible = Vec::new();
            for k in kids {
                if idx.iter().any(|&i| ts.labels[i].contains(k)) {
                    eligible.push(k.clone());
                } else {
                    skipped.push((k.clone(), "no positive training nodes under its parent".to_string()));
                }
            }
            let model = match eligible.len() {
                0 => None,
                1 => Some(LcpnParent { outputs: eligible, network: None }),
                _ => {
                    let x: Vec<Vec<f64>> = idx.iter().map(|&i| ts.x[i].clone()).collect();
                    let y: Vec<Vec<f64>> = idx
                        .iter()
                        .map(|&i| eligible.iter().map(|k| f64::from(u8::from(ts.labels[i].contains(k)))).collect())
                        .collect();
                    let net = Mlp::train(&x, &y, &opts.mlp, derive_seed(seed, pi as u64));
                    Some(LcpnParent { outputs: eligible, network: Some(net) })
                }
            };
            (parent.clone(), model, skipped)
        })
        .collect();
    let mut models = BTreeMap::new();
    let mut skipped = Vec::new();
    for (p, m, s) in results {
        if let Some(m) = m {
            models.insert(p, m);
        }
        skipped.extend(s);
    }
    // Descendants of a skipped concept can never be reached either.
    let unreachable: BTreeSet<String> = skipped.iter().map(|(c, _)| c.clone()).collect();
    for n in t.nodes() {
        if !unreachable.contains(&n.id)
            && t.ancestors_of(&n.id).unwrap_or_default().iter().any(|a| unreachable.contains(*a))
        {
            skipped.push((n.id.clone(), "an ancestor has no classifier".to_string()));
        }
    }
    skipped.sort_by_key(|(c, _)| t.position(c).unwrap_or(usize::MAX));
    skipped.dedup_by(|a, b| a.0 == b.0);
    log::info!("type {}: trained {} LCPN parents, skipped {} concepts", cfg.type_id, models.len(), skipped.len());
    Ok(HierarchyClassifier {
        config: *cfg,
        seed,
        options: *opts,
        vocabularies: ts.vocabularies,
        skipped,
        models: Models::Lcpn(models),
    })
}

/// Trains the architecture that `cfg`'s type prescribes.
pub fn train(
    corpus: &Corpus,
    split: &SplitSpec,
    cfg: &FeatureConfig,
    ext: &ExternalResources<'_>,
    opts: &TrainOptions,
    seed: u64,
) -> Result<HierarchyClassifier, ClassifierError> {
    match cfg.architecture() {
        Architecture::Lcn => train_lcn(corpus, split, cfg, ext, opts, seed),
        Architecture::Lcpn => train_lcpn(corpus, split, cfg, ext, opts, seed),
    }
}

/// Walks the hierarchy from the virtual root. `decide(parent)` returns the
/// decision for each output of that parent, or `None` when it has no
/// model. Children of a negative concept are never visited.
pub fn cascade_labels<F>(mut decide: F) -> BTreeSet<String>
where
    F: FnMut(&str) -> Option<Vec<(String, bool)>>,
{
    let mut out = BTreeSet::new();
    let mut stack = vec![VIRTUAL_ROOT.to_string()];
    while let Some(parent) = stack.pop() {
        for (child, positive) in decide(&parent).unwrap_or_default() {
            if positive && out.insert(child.clone()) {
                stack.push(child);
            }
        }
    }
    out
}

/// Predicted labels per node id.
pub type NodePredictions = BTreeMap<String, BTreeSet<String>>;

impl HierarchyClassifier {
    pub fn architecture(&self) -> Architecture {
        match self.models {
            Models::Lcn(_) => Architecture::Lcn,
            Models::Lcpn(_) => Architecture::Lcpn,
        }
    }

    /// Concepts a prediction can contain.
    pub fn covered_concepts(&self) -> BTreeSet<String> {
        match &self.models {
            Models::Lcn(m) => m.keys().cloned().collect(),
            Models::Lcpn(m) => m.values().flat_map(|p| p.outputs.iter().cloned()).collect(),
        }
    }

    pub fn lcn_models(&self) -> Option<&BTreeMap<String, DecisionForest>> {
        match &self.models {
            Models::Lcn(m) => Some(m),
            Models::Lcpn(_) => None,
        }
    }

    pub fn lcpn_models(&self) -> Option<&BTreeMap<String, LcpnParent>> {
        match &self.models {
            Models::Lcpn(m) => Some(m),
            Models::Lcn(_) => None,
        }
    }

    fn feature_resources<'a>(&'a self, ext: &ExternalResources<'a>) -> FeatureResources<'a> {
        resources(ext, self.vocabularies.as_ref())
    }

    /// Labels for one feature vector.
    pub fn predict_vector(&self, t: &Taxonomy, x: &[f64]) -> Result<BTreeSet<String>, ClassifierError> {
        let thr = self.options.threshold;
        match &self.models {
            Models::Lcn(models) => {
                let mut hits = Vec::new();
                for (c, f) in models {
                    if f.predict_proba(x)?[1] >= thr {
                        hits.push(c.as_str());
                    }
                }
                Ok(t.close_under_ancestors(hits))
            }
            Models::Lcpn(models) => Ok(cascade_labels(|parent| {
                let p = models.get(parent)?;
                Some(match &p.network {
                    Some(net) => p.outputs.iter().cloned().zip(net.predict(x).into_iter().map(|s| s >= thr)).collect(),
                    None => p.outputs.iter().map(|c| (c.clone(), true)).collect(),
                })
            })),
        }
    }

    /// Predicts the listed nodes of `doc` (all nodes when `only` is None).
    pub fn predict_nodes(
        &self,
        doc: &CorpusDocument,
        only: Option<&BTreeSet<String>>,
        ext: &ExternalResources<'_>,
    ) -> Result<NodePredictions, ClassifierError> {
        let res = self.feature_resources(ext);
        res.check(&self.config)?;
        let nodes: Vec<&AnnotatedNode> =
            doc.nodes.iter().filter(|n| only.map_or(true, |o| o.contains(&n.node_id))).collect();
        let out: Result<Vec<(String, BTreeSet<String>)>, ClassifierError> = nodes
            .par_iter()
            .map(|n| {
                let x = assemble_features(&self.config, n, doc, &res)?;
                Ok((n.node_id.clone(), self.predict_vector(ext.taxonomy, &x)?))
            })
            .collect();
        Ok(out?.into_iter().collect())
    }

    // -----------------------------------------------------------------------
    // Bundles

    /// Writes `manifest`, `vocabularies.json` and one file per model.
    pub fn save(&self, dir: &Path) -> Result<(), ClassifierError> {
        std::fs::create_dir_all(dir.join("models"))?;
        let mut entries = Vec::new();
        let write_model = |file: &str, magic: &str, json: String| -> Result<(), ClassifierError> {
            let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("models").join(file))?);
            writeln!(w, "{magic}")?;
            w.write_all(json.as_bytes())?;
            w.flush()?;
            Ok(())
        };
        match &self.models {
            Models::Lcn(m) => {
                for (i, (c, f)) in m.iter().enumerate() {
                    let file = format!("{i:03}.lcnf");
                    write_model(&file, LCN_MAGIC, serde_json::to_string(f).map_err(bundle_err)?)?;
                    entries.push(ManifestEntry { concept: c.clone(), file });
                }
            }
            Models::Lcpn(m) => {
                for (i, (c, p)) in m.iter().enumerate() {
                    let file = format!("{i:03}.lcpn");
                    write_model(&file, LCPN_MAGIC, serde_json::to_string(p).map_err(bundle_err)?)?;
                    entries.push(ManifestEntry { concept: c.clone(), file });
                }
            }
        }
        let manifest = Manifest {
            format: MANIFEST_FORMAT,
            architecture: self.architecture(),
            config: self.config,
            seed: self.seed,
            options: self.options,
            skipped: self.skipped.clone(),
            models: entries,
        };
        std::fs::write(dir.join("manifest"), serde_json::to_string_pretty(&manifest).map_err(bundle_err)? + "\n")?;
        std::fs::write(
            dir.join("vocabularies.json"),
            serde_json::to_string(&self.vocabularies).map_err(bundle_err)?,
        )?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, ClassifierError> {
        let manifest: Manifest =
            serde_json::from_str(&std::fs::read_to_string(dir.join("manifest"))?).map_err(bundle_err)?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(ClassifierError::Bundle(format!("unsupported manifest format {}", manifest.format)));
        }
        let vocabularies: Option<FittedVocabularies> =
            serde_json::from_str(&std::fs::read_to_string(dir.join("vocabularies.json"))?).map_err(bundle_err)?;
        let read_model = |file: &str, magic: &str| -> Result<std::io::BufReader<std::fs::File>, ClassifierError> {
            let mut r = std::io::BufReader::new(std::fs::File::open(dir.join("models").join(file))?);
            let mut header = String::new();
            r.read_line(&mut header)?;
            if header.trim_end() != magic {
                return Err(ClassifierError::Bundle(format!("{file}: missing {magic} header")));
            }
            Ok(r)
        };
        let models = match manifest.architecture {
            Architecture::Lcn => {
                let mut m = BTreeMap::new();
                for e in &manifest.models {
                    let f: DecisionForest =
                        serde_json::from_reader(read_model(&e.file, LCN_MAGIC)?).map_err(bundle_err)?;
                    m.insert(e.concept.clone(), f);
                }
                Models::Lcn(m)
            }
            Architecture::Lcpn => {
                let mut m = BTreeMap::new();
                for e in &manifest.models {
                    let p: LcpnParent =
                        serde_json::from_reader(read_model(&e.file, LCPN_MAGIC)?).map_err(bundle_err)?;
                    m.insert(e.concept.clone(), p);
                }
                Models::Lcpn(m)
            }
        };
        Ok(Self {
            config: manifest.config,
            seed: manifest.seed,
            options: manifest.options,
            vocabularies,
            skipped: manifest.skipped,
            models,
        })
    }
}

fn bundle_err(e: serde_json::Error) -> ClassifierError {
    ClassifierError::Bundle(e.to_string())
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    concept: String,
    file: String,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: u32,
    architecture: Architecture,
    config: FeatureConfig,
    seed: u64,
    options: TrainOptions,
    skipped: Vec<(String, String)>,
    models: Vec<ManifestEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn upsample_arithmetic() {
        let mut s: Vec<(usize, bool)> = (0..10).map(|i| (i, true)).collect();
        s.extend((10..100).map(|i| (i, false)));
        let up = upsample_positives(&s, 1.0 / 3.0, 1).unwrap();
        assert_eq!(up.iter().filter(|x| x.1).count(), 30);
        assert_eq!(up.iter().filter(|x| !x.1).count(), 90);
        assert_eq!(&up[..100], &s[..]);

        let balanced: Vec<(usize, bool)> = (0..20).map(|i| (i, i % 2 == 0)).collect();
        assert_eq!(upsample_positives(&balanced, 1.0 / 3.0, 1).unwrap(), balanced);
        let none: Vec<(usize, bool)> = vec![(0, false)];
        assert_eq!(upsample_positives(&none, 0.5, 1).unwrap_err().to_string(), "cannot upsample empty class");
    }

    #[test]
    fn cascade_gate() {
        let t = Taxonomy::builtin();
        let decide = |root_lb: bool| {
            move |p: &str| -> Option<Vec<(String, bool)>> {
                match p {
                    "" => Some(vec![("LAWFUL BASIS".into(), root_lb), ("COMPLAINT".into(), true)]),
                    "LAWFUL BASIS" => Some(vec![("LAWFUL BASIS.CONSENT".into(), true)]),
                    _ => None,
                }
            }
        };
        let off = cascade_labels(decide(false));
        assert_eq!(off, BTreeSet::from(["COMPLAINT".to_string()]));
        let on = cascade_labels(decide(true));
        assert!(on.contains("LAWFUL BASIS.CONSENT"));
        assert_eq!(t.close_under_ancestors(on.iter().map(String::as_str)), on);
    }

    fn random_decisions(t: &Taxonomy, bits: &[bool]) -> BTreeMap<String, Vec<(String, bool)>> {
        let mut m = BTreeMap::new();
        let mut i = 0;
        let mut next = || {
            i += 1;
            bits[i % bits.len()]
        };
        m.insert(String::new(), t.roots().iter().map(|r| (r.to_string(), next())).collect());
        for n in t.nodes() {
            let kids = t.children_of(&n.id).unwrap();
            if !kids.is_empty() {
                m.insert(n.id.clone(), kids.iter().map(|k| (k.to_string(), next())).collect());
            }
        }
        m
    }

    proptest! {
        #[test]
        fn cascade_closed_and_monotone(bits in prop::collection::vec(any::<bool>(), 1..200), flip in 0usize..19) {
            let t = Taxonomy::builtin();
            let table = random_decisions(&t, &bits);
            let full = cascade_labels(|p| table.get(p).cloned());
            prop_assert_eq!(&t.close_under_ancestors(full.iter().map(String::as_str)), &full);
            let mut flipped = table.clone();
            flipped.get_mut("").unwrap()[flip].1 = false;
            let smaller = cascade_labels(|p| flipped.get(p).cloned());
            prop_assert!(smaller.is_subset(&full));
        }

        #[test]
        fn upsample_never_removes(n_pos in 1usize..20, n_neg in 0usize..100, ratio in 0.05f64..2.0, seed in any::<u64>()) {
            let s: Vec<(usize, bool)> = (0..n_pos + n_neg).map(|i| (i, i < n_pos)).collect();
            let up = upsample_positives(&s, ratio, seed).unwrap();
            prop_assert_eq!(&up[..s.len()], &s[..]);
            let p = up.iter().filter(|x| x.1).count() as f64;
            prop_assert!(n_neg == 0 || p / n_neg as f64 >= ratio - 1e-9);
        }
    }
}
