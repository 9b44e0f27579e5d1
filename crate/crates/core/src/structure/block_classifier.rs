//! Title/paragraph classifier over [`BlockFeatures`].

use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::block::{Block, BlockClass, BlockFeatures, BLOCK_FEATURE_DIM};
use super::ppxml::{PolicyChild, PolicyDocument};
use crate::html::collapse_whitespace;
use crate::forest::{DecisionForest, ForestError, ForestParams};

const MAGIC: &str = "PPSB1";

#[derive(Debug, Error)]
pub enum BlockModelError {
    #[error("empty sample list")]
    Empty,
    #[error("single class: only {0:?} present")]
    SingleClass(BlockClass),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a block-classifier model (missing {MAGIC} header)")]
    BadMagic,
    #[error("corrupt model: {0}")]
    Corrupt(String),
    #[error("block samples line {line}: {reason}")]
    SampleFormat { line: usize, reason: String },
}

/// Trained block classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockClassifierModel {
    forest: DecisionForest,
}

/// Labels blocks of a page against its gold PP-XML: a block whose text
/// matches an unused gold title becomes a title of that segment's level,
/// everything else a paragraph. Titles are matched in document order.
pub fn label_blocks(blocks: Vec<Block>, gold: &PolicyDocument) -> Vec<(BlockFeatures, BlockClass)> {
    fn titles(children: &[PolicyChild], out: &mut Vec<(String, u8)>) {
        for c in children {
            if let PolicyChild::Segment(s) = c {
                out.push((collapse_whitespace(&s.title.text), s.level));
                titles(&s.children, out);
            }
        }
    }
    let mut gold_titles = Vec::new();
    titles(&gold.children, &mut gold_titles);
    let mut next = 0;
    blocks
        .into_iter()
        .map(|b| {
            let text = collapse_whitespace(&b.text);
            let hit = gold_titles[next..].iter().position(|(t, _)| !t.is_empty() && *t == text);
            let class = match hit {
                Some(i) => {
                    let level = gold_titles[next + i].1;
                    next += i + 1;
                    BlockClass::title(level)
                }
                None => BlockClass::Paragraph,
            };
            (b.features, class)
        })
        .collect()
}

/// Writes samples as `class<TAB>v1,...,v20` lines.
pub fn write_block_samples<W: Write>(samples: &[(BlockFeatures, BlockClass)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "#dim={BLOCK_FEATURE_DIM}")?;
    for (f, c) in samples {
        let v: Vec<String> = f.to_vector().iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}\t{}", c.name(), v.join(","))?;
    }
    Ok(())
}

pub fn parse_block_samples<R: BufRead>(r: R) -> Result<Vec<(BlockFeatures, BlockClass)>, BlockModelError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let bad = |reason: &str| BlockModelError::SampleFormat { line: i + 1, reason: reason.into() };
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let (class, values) = line.split_once('\t').ok_or_else(|| bad("expected `class<TAB>values`"))?;
        let class = BlockClass::parse(class).ok_or_else(|| bad("unknown class"))?;
        let v: Vec<f64> = values
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("non-numeric value"))?;
        let f = BlockFeatures::from_vector(&v).ok_or_else(|| bad("not a valid 20-value block vector"))?;
        out.push((f, class));
    }
    Ok(out)
}

/// Trains an extremely-randomized forest on labelled blocks.
pub fn train_block_classifier(
    samples: &[(BlockFeatures, BlockClass)],
    params: &ForestParams,
    seed: u64,
) -> Result<BlockClassifierModel, BlockModelError> {
    let first = samples.first().ok_or(BlockModelError::Empty)?.1;
    if samples.iter().all(|(_, c)| *c == first) {
        return Err(BlockModelError::SingleClass(first));
    }
    let x: Vec<Vec<f64>> = samples.iter().map(|(f, _)| f.to_vector()).collect();
    let y: Vec<usize> = samples.iter().map(|(_, c)| c.index()).collect();
    let forest = DecisionForest::fit(&x, &y, BlockClass::ALL.len(), params, seed)?;
    Ok(BlockClassifierModel { forest })
}

impl BlockClassifierModel {
    pub fn classify(&self, f: &BlockFeatures) -> BlockClass {
        let idx = self.forest.predict(&f.to_vector()).expect("block vectors have a fixed width");
        BlockClass::from_index(idx).unwrap_or(BlockClass::Paragraph)
    }

    /// Classifies raw vectors, checking their width.
    pub fn classify_vector(&self, v: &[f64]) -> Result<BlockClass, BlockModelError> {
        let idx = self.forest.predict(v)?;
        Ok(BlockClass::from_index(idx).unwrap_or(BlockClass::Paragraph))
    }

    pub fn forest(&self) -> &DecisionForest {
        &self.forest
    }

    pub fn save(&self, path: &Path) -> Result<(), BlockModelError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "{MAGIC}")?;
        serde_json::to_writer(&mut w, self).map_err(|e| BlockModelError::Corrupt(e.to_string()))?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, BlockModelError> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut header = String::new();
        r.read_line(&mut header)?;
        if header.trim_end() != MAGIC {
            return Err(BlockModelError::BadMagic);
        }
        let model: Self = serde_json::from_reader(r).map_err(|e| BlockModelError::Corrupt(e.to_string()))?;
        if model.forest.n_features() != BLOCK_FEATURE_DIM || model.forest.n_classes() != BlockClass::ALL.len() {
            return Err(BlockModelError::Corrupt("unexpected feature layout".into()));
        }
        Ok(model)
    }
}

/// One class per block.
pub fn classify_blocks(model: &BlockClassifierModel, blocks: &[BlockFeatures]) -> Vec<BlockClass> {
    blocks.iter().map(|b| model.classify(b)).collect()
}

/// Macro F1 over the classes present in `gold`.
pub fn macro_f1(gold: &[BlockClass], predicted: &[BlockClass]) -> f64 {
    let mut f1s = Vec::new();
    for c in BlockClass::ALL {
        let support = gold.iter().filter(|g| **g == c).count();
        if support == 0 {
            continue;
        }
        let tp = gold.iter().zip(predicted).filter(|(g, p)| **g == c && **p == c).count() as f64;
        let fp = gold.iter().zip(predicted).filter(|(g, p)| **g != c && **p == c).count() as f64;
        let fn_ = support as f64 - tp;
        let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let r = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        f1s.push(if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 });
    }
    if f1s.is_empty() {
        0.0
    } else {
        f1s.iter().sum::<f64>() / f1s.len() as f64
    }
}

/// Held-out scores of the block classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEvaluation {
    /// Macro F1 of each cross-validation fold on the training part.
    pub fold_f1: Vec<f64>,
    /// Macro F1 on the held-out test part, model fitted on the full training part.
    pub test_f1: f64,
}

/// Shuffles, holds out `test_fraction` of the samples, runs `k`-fold cross
/// validation on the rest, then scores a model trained on all of the rest.
pub fn evaluate_block_classifier(
    samples: &[(BlockFeatures, BlockClass)],
    params: &ForestParams,
    k: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<BlockEvaluation, BlockModelError> {
    if samples.is_empty() {
        return Err(BlockModelError::Empty);
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((samples.len() as f64) * test_fraction).round() as usize;
    let (test_idx, train_idx) = order.split_at(n_test.min(samples.len().saturating_sub(2)));
    let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i]).collect::<Vec<_>>();
    let train = pick(train_idx);

    let k = k.max(2).min(train.len());
    let mut fold_f1 = Vec::with_capacity(k);
    for fold in 0..k {
        let (mut fit, mut held) = (Vec::new(), Vec::new());
        for (i, s) in train.iter().enumerate() {
            if i % k == fold { held.push(*s) } else { fit.push(*s) }
        }
        let Ok(model) = train_block_classifier(&fit, params, seed.wrapping_add(fold as u64 + 1)) else {
            continue;
        };
        let gold: Vec<_> = held.iter().map(|s| s.1).collect();
        let pred = classify_blocks(&model, &held.iter().map(|s| s.0).collect::<Vec<_>>());
        fold_f1.push(macro_f1(&gold, &pred));
    }

    let model = train_block_classifier(&train, params, seed)?;
    let test = pick(test_idx);
    let gold: Vec<_> = test.iter().map(|s| s.1).collect();
    let pred = classify_blocks(&model, &test.iter().map(|s| s.0).collect::<Vec<_>>());
    let test_f1 = if test.is_empty() { 0.0 } else { macro_f1(&gold, &pred) };
    Ok(BlockEvaluation { fold_f1, test_f1 })
}
