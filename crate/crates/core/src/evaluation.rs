//! Per-concept scoring and segment-vs-document comparisons.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::classifiers::{train, ClassifierError, ExternalResources, HierarchyClassifier, TrainOptions};
use crate::corpus::{
    split_document_level, split_segment_level, AnnotatedNode, Corpus, CorpusError, NodeKey, SplitMode, SplitSpec,
};
use crate::features::{FeatureConfig, FeatureError};
use crate::taxonomy::Taxonomy;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no prediction for test node {0}")]
    MissingPrediction(String),
    #[error("prediction for node {0}, which is not on the test side")]
    UnexpectedPrediction(String),
    #[error("no configuration to compare")]
    NothingToCompare,
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, gold: bool, predicted: bool) {
        match (gold, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

/// `(P, R, F1)`; every zero denominator yields 0.
pub fn precision_recall_f1(c: &ConfusionCounts) -> (f64, f64, f64) {
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let p = ratio(c.tp, c.tp + c.fp);
    let r = ratio(c.tp, c.tp + c.fn_);
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptMetrics {
    pub concept_id: String,
    pub level: u8,
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold positive test nodes.
    pub support: u64,
    /// Counted in the macro averages.
    pub evaluated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub type_id: u8,
    pub mode: String,
    pub seed: u64,
    pub min_support: u64,
    pub test_nodes: usize,
    pub rows: Vec<ConceptMetrics>,
    pub macro_f1_level1: f64,
    pub macro_f1_all: f64,
    pub evaluated_level1: Vec<String>,
    pub evaluated_all: Vec<String>,
}

/// Scoring switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub min_support: u64,
    /// Count a node as positive for a concept when a descendant is labelled.
    pub descendant_inclusive: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { min_support: 5, descendant_inclusive: true }
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Scores predictions for exactly the `gold` nodes. Concepts qualify for
/// the macro averages when they are in `candidates` (all concepts when
/// `None`) and have at least `min_support` gold positives.
pub fn evaluate_run(
    predictions: &BTreeMap<NodeKey, BTreeSet<String>>,
    gold: &[&AnnotatedNode],
    t: &Taxonomy,
    candidates: Option<&BTreeSet<String>>,
    opts: &EvalOptions,
) -> Result<MetricsReport, EvalError> {
    let gold_keys: BTreeSet<NodeKey> = gold.iter().map(|n| n.key()).collect();
    if let Some(k) = predictions.keys().find(|k| !gold_keys.contains(k)) {
        return Err(EvalError::UnexpectedPrediction(k.to_string()));
    }
    let mut gold_sets = Vec::with_capacity(gold.len());
    let mut pred_sets = Vec::with_capacity(gold.len());
    for n in gold {
        let key = n.key();
        let p = predictions.get(&key).ok_or_else(|| EvalError::MissingPrediction(key.to_string()))?;
        let g: BTreeSet<String> = if opts.descendant_inclusive {
            t.close_under_ancestors(n.labels.iter().map(String::as_str))
        } else {
            n.labels.clone()
        };
        gold_sets.push(g);
        pred_sets.push(p);
    }
    let rows: Vec<ConceptMetrics> = t
        .nodes()
        .iter()
        .map(|c| {
            let mut counts = ConfusionCounts::default();
            for (g, p) in gold_sets.iter().zip(&pred_sets) {
                counts.record(g.contains(&c.id), p.contains(&c.id));
            }
            let (precision, recall, f1) = precision_recall_f1(&counts);
            let support = counts.tp + counts.fn_;
            let evaluated = support >= opts.min_support && candidates.map_or(true, |s| s.contains(&c.id));
            ConceptMetrics { concept_id: c.id.clone(), level: c.level, counts, precision, recall, f1, support, evaluated }
        })
        .collect();
    let evaluated_all: Vec<String> = rows.iter().filter(|r| r.evaluated).map(|r| r.concept_id.clone()).collect();
    let evaluated_level1: Vec<String> =
        rows.iter().filter(|r| r.evaluated && r.level == 1).map(|r| r.concept_id.clone()).collect();
    Ok(MetricsReport {
        type_id: 0,
        mode: String::new(),
        seed: 0,
        min_support: opts.min_support,
        test_nodes: gold.len(),
        macro_f1_level1: mean(rows.iter().filter(|r| r.evaluated && r.level == 1).map(|r| r.f1)),
        macro_f1_all: mean(rows.iter().filter(|r| r.evaluated).map(|r| r.f1)),
        rows,
        evaluated_level1,
        evaluated_all,
    })
}

pub const REPORT_HEADER: [&str; 12] =
    ["type_id", "mode", "concept_id", "level", "tp", "fp", "fn", "tn", "precision", "recall", "f1", "support"];

fn csv_err(e: csv::Error) -> EvalError {
    EvalError::Io(std::io::Error::other(e))
}

/// One row per concept.
pub fn write_report_csv<W: Write>(reports: &[MetricsReport], w: W) -> Result<(), EvalError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(REPORT_HEADER).map_err(csv_err)?;
    for rep in reports {
        for r in &rep.rows {
            out.write_record([
                rep.type_id.to_string(),
                rep.mode.clone(),
                r.concept_id.clone(),
                r.level.to_string(),
                r.counts.tp.to_string(),
                r.counts.fp.to_string(),
                r.counts.fn_.to_string(),
                r.counts.tn.to_string(),
                format!("{:.6}", r.precision),
                format!("{:.6}", r.recall),
                format!("{:.6}", r.f1),
                r.support.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Single runs and comparisons

/// How to split and train for one comparison.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub n_test_docs: usize,
    pub test_fraction: f64,
    pub train: TrainOptions,
    pub eval: EvalOptions,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self { n_test_docs: 30, test_fraction: 0.2, train: TrainOptions::default(), eval: EvalOptions::default() }
    }
}

pub fn make_split(corpus: &Corpus, mode: SplitMode, spec: &ExperimentSpec, seed: u64) -> Result<SplitSpec, EvalError> {
    Ok(match mode {
        SplitMode::Document => split_document_level(corpus, spec.n_test_docs, seed)?,
        SplitMode::Segment => split_segment_level(corpus, spec.test_fraction, seed)?,
    })
}

/// Trains on the split's training side and scores its test side.
pub fn evaluate_split(
    corpus: &Corpus,
    split: &SplitSpec,
    cfg: &FeatureConfig,
    ext: &ExternalResources<'_>,
    spec: &ExperimentSpec,
) -> Result<MetricsReport, EvalError> {
    let h = train(corpus, split, cfg, ext, &spec.train, split.seed)?;
    evaluate_trained(corpus, split, &h, ext, &spec.eval)
}

/// Scores an already trained classifier on the split's test side.
pub fn evaluate_trained(
    corpus: &Corpus,
    split: &SplitSpec,
    h: &HierarchyClassifier,
    ext: &ExternalResources<'_>,
    opts: &EvalOptions,
) -> Result<MetricsReport, EvalError> {
    let test = split.test_nodes(corpus);
    let mut by_doc: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for n in &test {
        by_doc.entry(n.doc_id.as_str()).or_default().insert(n.node_id.clone());
    }
    let mut predictions = BTreeMap::new();
    for (doc_id, ids) in by_doc {
        let doc = corpus.document(doc_id).expect("test node from corpus");
        for (node, labels) in h.predict_nodes(doc, Some(&ids), ext)? {
            predictions.insert(NodeKey::new(doc_id, node), labels);
        }
    }
    let covered = h.covered_concepts();
    let mut report = evaluate_run(&predictions, &test, ext.taxonomy, Some(&covered), opts)?;
    report.type_id = h.config.type_id;
    report.mode = split.mode.to_string();
    report.seed = split.seed;
    Ok(report)
}

/// One (type, mode) row of a comparison, averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub type_id: u8,
    pub mode: SplitMode,
    pub macro_f1_level1: f64,
    pub macro_f1_all: f64,
    pub per_seed_level1: Vec<f64>,
    pub per_seed_all: Vec<f64>,
    /// Concepts where this type reached the highest F1 of its mode (ties count for every tied type).
    pub best_level1: usize,
    pub best_all: usize,
    pub compared_level1: usize,
    pub compared_all: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub seeds: Vec<u64>,
    pub rows: Vec<ComparisonRow>,
    pub reports: Vec<MetricsReport>,
}


/// Trains and scores every `(type, mode, seed)` combination, then builds
/// macro rows and best-F1 tallies per mode. Runs go in a fixed order so the
/// table is identical for identical inputs.
pub fn compare_frameworks(
    corpus: &Corpus,
    configs: &[FeatureConfig],
    modes: &[SplitMode],
    seeds: &[u64],
    ext: &ExternalResources<'_>,
    spec: &ExperimentSpec,
) -> Result<ComparisonTable, EvalError> {
    if configs.is_empty() || modes.is_empty() || seeds.is_empty() {
        return Err(EvalError::NothingToCompare);
    }
    let mut modes = modes.to_vec();
    modes.sort();
    modes.dedup();
    let mut reports = Vec::new();
    for &mode in &modes {
        for &seed in seeds {
            let split = make_split(corpus, mode, spec, seed)?;
            for cfg in configs {
                log::info!("run: type {} / {mode} / seed {seed}", cfg.type_id);
                reports.push(evaluate_split(corpus, &split, cfg, ext, spec)?);
            }
        }
    }

    let mut rows = Vec::new();
    for &mode in &modes {
        let mode_str = mode.to_string();
        // Mean F1 per (type, concept) over seeds, for concepts evaluated in every seed.
        let mut per_type: Vec<BTreeMap<String, (u8, f64)>> = Vec::new();
        for cfg in configs {
            let runs: Vec<&MetricsReport> =
                reports.iter().filter(|r| r.mode == mode_str && r.type_id == cfg.type_id).collect();
            let mut m = BTreeMap::new();
            for row in &runs[0].rows {
                let all_eval = runs.iter().all(|r| r.rows.iter().any(|x| x.concept_id == row.concept_id && x.evaluated));
                if all_eval {
                    let f = mean(runs.iter().map(|r| {
                        r.rows.iter().find(|x| x.concept_id == row.concept_id).map_or(0.0, |x| x.f1)
                    }));
                    m.insert(row.concept_id.clone(), (row.level, f));
                }
            }
            per_type.push(m);
        }
        let common: BTreeSet<&String> = per_type
            .iter()
            .map(|m| m.keys().collect::<BTreeSet<_>>())
            .reduce(|a, b| a.intersection(&b).copied().collect())
            .unwrap_or_default();
        let best: BTreeMap<&String, f64> = common
            .iter()
            .map(|c| (*c, per_type.iter().map(|m| m[*c].1).fold(f64::NEG_INFINITY, f64::max)))
            .collect();
        let compared_level1 = common.iter().filter(|c| per_type[0][**c].0 == 1).count();
        for (ti, cfg) in configs.iter().enumerate() {
            let runs: Vec<&MetricsReport> =
                reports.iter().filter(|r| r.mode == mode_str && r.type_id == cfg.type_id).collect();
            let per_seed_level1: Vec<f64> = runs.iter().map(|r| r.macro_f1_level1).collect();
            let per_seed_all: Vec<f64> = runs.iter().map(|r| r.macro_f1_all).collect();
            let is_best = |c: &&&String| (per_type[ti][**c].1 - best[**c]).abs() < 1e-12;
            rows.push(ComparisonRow {
                type_id: cfg.type_id,
                mode,
                macro_f1_level1: mean(per_seed_level1.iter().copied()),
                macro_f1_all: mean(per_seed_all.iter().copied()),
                per_seed_level1,
                per_seed_all,
                best_level1: common.iter().filter(|c| per_type[ti][**c].0 == 1).filter(is_best).count(),
                best_all: common.iter().filter(is_best).count(),
                compared_level1,
                compared_all: common.len(),
            });
        }
    }
    Ok(ComparisonTable { seeds: seeds.to_vec(), rows, reports })
}

pub const SUMMARY_HEADER: [&str; 9] = [
    "type_id",
    "mode",
    "macro_f1_level1",
    "macro_f1_all",
    "best_level1",
    "compared_level1",
    "best_all",
    "compared_all",
    "seeds",
];

pub fn write_summary_csv<W: Write>(table: &ComparisonTable, w: W) -> Result<(), EvalError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    let seeds = table.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
    for r in &table.rows {
        out.write_record([
            r.type_id.to_string(),
            r.mode.to_string(),
            format!("{:.6}", r.macro_f1_level1),
            format!("{:.6}", r.macro_f1_all),
            r.best_level1.to_string(),
            r.compared_level1.to_string(),
            r.best_all.to_string(),
            r.compared_all.to_string(),
            seeds.clone(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Plain-text table with one column per type and two rows per mode.
pub fn render_table(table: &ComparisonTable) -> String {
    let mut types: Vec<u8> = table.rows.iter().map(|r| r.type_id).collect();
    types.dedup();
    let mut modes: Vec<SplitMode> = table.rows.iter().map(|r| r.mode).collect();
    modes.dedup();
    let mut s = String::new();
    let _ = write!(s, "{:<30}", "");
    for t in &types {
        let _ = write!(s, "{:>10}", format!("Type {t}"));
    }
    s.push('\n');
    for m in modes {
        let _ = writeln!(s, "[{m}-level]");
        let rows: Vec<&ComparisonRow> = table.rows.iter().filter(|r| r.mode == m).collect();
        let _ = write!(s, "{:<30}", "macro F1 (level-1 nodes)");
        for r in &rows {
            let _ = write!(s, "{:>10.3}", r.macro_f1_level1);
        }
        s.push('\n');
        let _ = write!(s, "{:<30}", "macro F1 (all nodes)");
        for r in &rows {
            let _ = write!(s, "{:>10.3}", r.macro_f1_all);
        }
        s.push('\n');
        let _ = write!(s, "{:<30}", "best F1 (level-1)");
        for r in &rows {
            let _ = write!(s, "{:>10}", format!("{}/{}", r.best_level1, r.compared_level1));
        }
        s.push('\n');
        let _ = write!(s, "{:<30}", "best F1 (all)");
        for r in &rows {
            let _ = write!(s, "{:>10}", format!("{}/{}", r.best_all, r.compared_all));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::NodeKind;
    use proptest::prelude::*;

    fn counts(tp: u64, fp: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, fn_, tn: 0 }
    }

    #[test]
    fn metric_identities() {
        let (p, r, f) = precision_recall_f1(&counts(51, 19, 7));
        assert!((p - 51.0 / 70.0).abs() < 1e-12);
        assert!((r - 51.0 / 58.0).abs() < 1e-12);
        assert!((f - 0.797).abs() < 0.001);
        assert_eq!(precision_recall_f1(&counts(9, 0, 0)), (1.0, 1.0, 1.0));
        assert_eq!(precision_recall_f1(&counts(0, 3, 4)), (0.0, 0.0, 0.0));
        assert_eq!(precision_recall_f1(&ConfusionCounts::default()), (0.0, 0.0, 0.0));
    }

    fn node(doc: &str, id: &str, labels: &[&str]) -> AnnotatedNode {
        AnnotatedNode {
            doc_id: doc.into(),
            node_id: id.into(),
            kind: NodeKind::Paragraph,
            text: String::new(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            parent_title_id: None,
            preceding_sibling_id: None,
        }
    }

    fn gold() -> Vec<AnnotatedNode> {
        (0..10)
            .map(|i| {
                let l: &[&str] = if i < 6 { &["DATA SHARING.CONDITION"] } else { &[] };
                node("d", &format!("n{i:04}"), l)
            })
            .collect()
    }

    #[test]
    fn perfect_and_empty_predictors() {
        let t = Taxonomy::builtin();
        let g = gold();
        let refs: Vec<&AnnotatedNode> = g.iter().collect();
        let perfect: BTreeMap<NodeKey, BTreeSet<String>> =
            g.iter().map(|n| (n.key(), t.close_under_ancestors(n.labels.iter().map(String::as_str)))).collect();
        let rep = evaluate_run(&perfect, &refs, &t, None, &EvalOptions::default()).unwrap();
        assert_eq!(rep.evaluated_all, ["DATA SHARING", "DATA SHARING.CONDITION"]);
        assert_eq!(rep.evaluated_level1, ["DATA SHARING"]);
        assert_eq!((rep.macro_f1_level1, rep.macro_f1_all), (1.0, 1.0));
        let support = rep.rows.iter().find(|r| r.concept_id == "DATA SHARING").unwrap().support;
        assert_eq!(support, 6);
        assert!(rep.rows.iter().all(|r| r.counts.total() == 10));

        let empty: BTreeMap<NodeKey, BTreeSet<String>> = g.iter().map(|n| (n.key(), BTreeSet::new())).collect();
        let rep = evaluate_run(&empty, &refs, &t, None, &EvalOptions::default()).unwrap();
        assert_eq!(rep.macro_f1_all, 0.0);

        let exact = EvalOptions { descendant_inclusive: false, ..Default::default() };
        let rep = evaluate_run(&perfect, &refs, &t, None, &exact).unwrap();
        assert_eq!(rep.evaluated_all, ["DATA SHARING.CONDITION"]);
    }

    #[test]
    fn key_mismatch() {
        let t = Taxonomy::builtin();
        let g = gold();
        let refs: Vec<&AnnotatedNode> = g.iter().collect();
        let mut preds: BTreeMap<NodeKey, BTreeSet<String>> = g.iter().skip(1).map(|n| (n.key(), BTreeSet::new())).collect();
        assert!(matches!(evaluate_run(&preds, &refs, &t, None, &EvalOptions::default()), Err(EvalError::MissingPrediction(_))));
        preds.insert(NodeKey::new("x", "n0001"), BTreeSet::new());
        assert!(matches!(evaluate_run(&preds, &refs, &t, None, &EvalOptions::default()), Err(EvalError::UnexpectedPrediction(_))));
    }

    #[test]
    fn report_csv_header() {
        let mut buf = Vec::new();
        write_report_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "type_id,mode,concept_id,level,tp,fp,fn,tn,precision,recall,f1,support\n");
    }

    proptest! {
        #[test]
        fn f1_between_p_and_r(tp in 0u64..200, fp in 0u64..200, fn_ in 0u64..200) {
            let (p, r, f) = precision_recall_f1(&counts(tp, fp, fn_));
            let (p2, r2, f2) = precision_recall_f1(&counts(tp, fn_, fp));
            prop_assert!((p - r2).abs() < 1e-12 && (r - p2).abs() < 1e-12);
            prop_assert!((f - f2).abs() < 1e-12);
            if p + r > 0.0 {
                prop_assert!(p.min(r) - 1e-12 <= f && f <= p.max(r) + 1e-12);
            }
        }

        #[test]
        fn macro_invariant_to_concept_order(labels in prop::collection::vec((0usize..19, any::<bool>()), 5..60)) {
            let t = Taxonomy::builtin();
            let roots = t.roots();
            let g: Vec<AnnotatedNode> = labels.iter().enumerate().map(|(i, (c, _))| node("d", &format!("n{i:04}"), &[roots[*c]])).collect();
            let refs: Vec<&AnnotatedNode> = g.iter().collect();
            let preds: BTreeMap<NodeKey, BTreeSet<String>> = g.iter().zip(&labels)
                .map(|(n, (c, hit))| (n.key(), if *hit { BTreeSet::from([roots[*c].to_string()]) } else { BTreeSet::new() }))
                .collect();
            let opts = EvalOptions { min_support: 1, ..Default::default() };
            let rep = evaluate_run(&preds, &refs, &t, None, &opts).unwrap();
            let mut f1s: Vec<f64> = rep.rows.iter().filter(|r| r.evaluated).map(|r| r.f1).collect();
            f1s.reverse();
            let reversed = f1s.iter().sum::<f64>() / f1s.len().max(1) as f64;
            prop_assert!((reversed - rep.macro_f1_all).abs() < 1e-9);
            // Support cross-check against an independent count.
            for r in rep.rows.iter().filter(|r| r.level == 1) {
                let direct = labels.iter().filter(|(c, _)| roots[*c] == r.concept_id).count() as u64;
                prop_assert_eq!(r.support, direct);
            }
        }
    }
}
