//! Randomized decision-forest classifiers.
//!
//! Two split strategies are supported: the classic random forest (bootstrap
//! rows, best Gini threshold over a random feature subset) and extremely
//! randomized trees (all rows, one uniformly drawn threshold per candidate
//! feature). Every tree draws from its own ChaCha stream, so a forest is a
//! pure function of (data, params, seed) regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ForestError {
    #[error("empty training set")]
    Empty,
    #[error("single class: every sample has label {0}")]
    SingleClass(usize),
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    Label { label: usize, n_classes: usize },
    #[error("{0} labels for {1} samples")]
    Length(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitRule {
    /// Best threshold per candidate feature.
    Best,
    /// One random threshold per candidate feature.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().round() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub split_rule: SplitRule,
    pub bootstrap: bool,
}

impl ForestParams {
    pub fn random_forest() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            split_rule: SplitRule::Best,
            bootstrap: true,
        }
    }

    pub fn extra_trees() -> Self {
        Self {
            n_trees: 200,
            split_rule: SplitRule::Random,
            bootstrap: false,
            ..Self::random_forest()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum TreeNode {
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
    Leaf { dist: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    fn leaf(&self, x: &[f64]) -> &[f64] {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { dist } => return dist,
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if x[*feature as usize] <= *threshold { *left } else { *right } as usize;
                }
            }
        }
    }
}

/// A trained ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionForest {
    n_features: usize,
    n_classes: usize,
    seed: u64,
    params: ForestParams,
    trees: Vec<Tree>,
}

impl DecisionForest {
    /// Fits a forest. Rows may repeat (upsampled data is passed by reference).
    pub fn fit<R: AsRef<[f64]> + Sync>(
        x: &[R],
        y: &[usize],
        n_classes: usize,
        params: &ForestParams,
        seed: u64,
    ) -> Result<Self, ForestError> {
        if x.is_empty() {
            return Err(ForestError::Empty);
        }
        if x.len() != y.len() {
            return Err(ForestError::Length(y.len(), x.len()));
        }
        let n_features = x[0].as_ref().len();
        for row in x {
            if row.as_ref().len() != n_features {
                return Err(ForestError::Dimension { expected: n_features, got: row.as_ref().len() });
            }
        }
        if let Some(&label) = y.iter().find(|&&l| l >= n_classes) {
            return Err(ForestError::Label { label, n_classes });
        }
        if y.iter().all(|&l| l == y[0]) {
            return Err(ForestError::SingleClass(y[0]));
        }
        let data = Columns::new(x, n_features);
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                TreeBuilder { data: &data, y, n_classes, params, rng, slot: vec![u32::MAX; n_features] }.build()
            })
            .collect();
        Ok(Self { n_features, n_classes, seed, params: *params, trees })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    /// Mean of the leaf class distributions over all trees.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, ForestError> {
        if x.len() != self.n_features {
            return Err(ForestError::Dimension { expected: self.n_features, got: x.len() });
        }
        let mut acc = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.leaf(x)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(acc)
    }

    /// Most probable class; the lowest index wins ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize, ForestError> {
        let p = self.predict_proba(x)?;
        let mut best = 0;
        for (i, v) in p.iter().enumerate() {
            if *v > p[best] {
                best = i;
            }
        }
        Ok(best)
    }
}

/// Training matrix stored by feature, plus the nonzero entries of each
/// row so a node only looks at the values that are present.
struct Columns {
    cols: Vec<Vec<f64>>,
    nonzero: Vec<Vec<(u32, f64)>>,
}

impl Columns {
    fn new<R: AsRef<[f64]>>(x: &[R], n_features: usize) -> Self {
        let mut cols = vec![Vec::with_capacity(x.len()); n_features];
        let mut nonzero = Vec::with_capacity(x.len());
        for row in x {
            let row = row.as_ref();
            let mut nz = Vec::new();
            for (f, &v) in row.iter().enumerate() {
                cols[f].push(v);
                if v != 0.0 {
                    nz.push((f as u32, v));
                }
            }
            nonzero.push(nz);
        }
        Self { cols, nonzero }
    }

    fn n_rows(&self) -> usize {
        self.nonzero.len()
    }
}

struct TreeBuilder<'a> {
    data: &'a Columns,
    y: &'a [usize],
    n_classes: usize,
    params: &'a ForestParams,
    rng: ChaCha8Rng,
    /// Per-feature slot into the current node's entry lists; `u32::MAX`
    /// between calls.
    slot: Vec<u32>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl TreeBuilder<'_> {
    fn build(mut self) -> Tree {
        let n = self.data.n_rows();
        let rows: Vec<usize> = if self.params.bootstrap {
            (0..n).map(|_| self.rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut nodes = Vec::new();
        // (rows, depth, slot in `nodes`)
        let mut stack = vec![(rows, 0usize, 0usize)];
        nodes.push(TreeNode::Leaf { dist: Vec::new() });
        while let Some((rows, depth, slot)) = stack.pop() {
            let counts = self.counts(&rows);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
            let split = if pure || depth_capped || rows.len() < self.params.min_samples_split {
                None
            } else {
                self.find_split(&rows, &counts)
            };
            match split {
                None => {
                    let total = rows.len() as f64;
                    nodes[slot] = TreeNode::Leaf { dist: counts.iter().map(|&c| c as f64 / total).collect() };
                }
                Some(c) => {
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        rows.iter().partition(|&&i| self.data.cols[c.feature][i] <= c.threshold);
                    let left = nodes.len();
                    nodes.push(TreeNode::Leaf { dist: Vec::new() });
                    let right = nodes.len();
                    nodes.push(TreeNode::Leaf { dist: Vec::new() });
                    nodes[slot] = TreeNode::Split {
                        feature: c.feature as u32,
                        threshold: c.threshold,
                        left: left as u32,
                        right: right as u32,
                    };
                    stack.push((r, depth + 1, right));
                    stack.push((l, depth + 1, left));
                }
            }
        }
        Tree { nodes }
    }

    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in rows {
            c[self.y[i]] += 1;
        }
        c
    }

    /// Nonzero `(value, class)` entries of every feature that takes more
    /// than one value over `rows`, as ranges into one flat buffer. A
    /// feature that is zero on every row never shows up in the nonzero lists.
    fn varying_features(&mut self, rows: &[usize]) -> (Vec<(usize, usize, usize)>, Vec<(f64, usize)>) {
        // (feature, start, len)
        let mut spans: Vec<(usize, usize, usize)> = Vec::new();
        for &i in rows {
            for &(f, _) in &self.data.nonzero[i] {
                let f = f as usize;
                if self.slot[f] == u32::MAX {
                    self.slot[f] = spans.len() as u32;
                    spans.push((f, 0, 0));
                }
                spans[self.slot[f] as usize].2 += 1;
            }
        }
        let mut start = 0;
        for sp in &mut spans {
            sp.1 = start;
            start += sp.2;
        }
        let mut fill: Vec<usize> = spans.iter().map(|sp| sp.1).collect();
        let mut flat = vec![(0.0, 0usize); start];
        for &i in rows {
            for &(f, v) in &self.data.nonzero[i] {
                let k = self.slot[f as usize] as usize;
                flat[fill[k]] = (v, self.y[i]);
                fill[k] += 1;
            }
        }
        for (f, _, _) in &spans {
            self.slot[*f] = u32::MAX;
        }
        spans.retain(|&(_, st, len)| {
            let e = &flat[st..st + len];
            len < rows.len() || e.iter().any(|p| p.0 != e[0].0)
        });
        spans.sort_unstable_by_key(|sp| sp.0);
        (spans, flat)
    }

    /// Tries `max_features` randomly chosen non-constant features and keeps
    /// the split with the lowest weighted Gini impurity.
    fn find_split(&mut self, rows: &[usize], counts: &[usize]) -> Option<Candidate> {
        let (mut features, mut flat) = self.varying_features(rows);
        let budget = self.params.max_features.resolve(self.data.cols.len()).min(features.len());
        let n = rows.len();
        let mut best: Option<Candidate> = None;
        for k in 0..budget {
            let j = self.rng.gen_range(k..features.len());
            features.swap(k, j);
            let (f, st, len) = features[k];
            let entries = &mut flat[st..st + len];
            let has_zero = len < n;
            let cand = match self.params.split_rule {
                SplitRule::Best => best_threshold(f, entries, counts, n, self.params.min_samples_leaf),
                SplitRule::Random => {
                    let init = if has_zero { (0.0, 0.0) } else { (f64::INFINITY, f64::NEG_INFINITY) };
                    let (lo, hi) = entries.iter().fold(init, |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
                    let mut t = self.rng.gen_range(lo..hi);
                    if t >= hi {
                        t = lo;
                    }
                    score_threshold(f, t, entries, counts, n, self.params.min_samples_leaf)
                }
            };
            if let Some(c) = cand {
                if best.as_ref().map_or(true, |b| c.impurity < b.impurity) {
                    best = Some(c);
                }
            }
        }
        best
    }
}

/// Class counts of the rows whose value is zero: node counts minus the
/// nonzero entries.
fn zero_counts(entries: &[(f64, usize)], counts: &[usize]) -> Vec<usize> {
    let mut z = counts.to_vec();
    for &(_, c) in entries {
        z[c] -= 1;
    }
    z
}

fn score_threshold(
    f: usize,
    t: f64,
    entries: &[(f64, usize)],
    counts: &[usize],
    n: usize,
    min_leaf: usize,
) -> Option<Candidate> {
    let mut left = if 0.0 <= t { zero_counts(entries, counts) } else { vec![0; counts.len()] };
    for &(v, c) in entries {
        if v <= t {
            left[c] += 1;
        }
    }
    let right: Vec<usize> = counts.iter().zip(&left).map(|(a, b)| a - b).collect();
    let nl: usize = left.iter().sum();
    let nr = n - nl;
    if nl < min_leaf.max(1) || nr < min_leaf.max(1) {
        return None;
    }
    Some(Candidate { feature: f, threshold: t, impurity: weighted_gini(&left, nl, &right, nr) })
}

/// Best threshold for one feature. Zeros are handled as one block, so only
/// the nonzero entries are sorted.
fn best_threshold(
    f: usize,
    entries: &mut [(f64, usize)],
    counts: &[usize],
    n: usize,
    min_leaf: usize,
) -> Option<Candidate> {
    let zeros = zero_counts(entries, counts);
    let n_zero = n - entries.len();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let neg = entries.partition_point(|p| p.0 < 0.0);
    // `None` stands for the block of zeros.
    let steps: Vec<(f64, Option<usize>)> = entries[..neg]
        .iter()
        .map(|&(v, c)| (v, Some(c)))
        .chain((n_zero > 0).then_some((0.0, None)))
        .chain(entries[neg..].iter().map(|&(v, c)| (v, Some(c))))
        .collect();

    let mut left = vec![0usize; counts.len()];
    let mut right = counts.to_vec();
    let min_leaf = min_leaf.max(1);
    let mut best: Option<Candidate> = None;
    let mut nl = 0;
    for k in 0..steps.len().saturating_sub(1) {
        match steps[k].1 {
            Some(c) => {
                left[c] += 1;
                right[c] -= 1;
                nl += 1;
            }
            None => {
                for (c, z) in zeros.iter().enumerate() {
                    left[c] += z;
                    right[c] -= z;
                }
                nl += n_zero;
            }
        }
        let nr = n - nl;
        let (v, next) = (steps[k].0, steps[k + 1].0);
        if v == next || nl < min_leaf || nr < min_leaf {
            continue;
        }
        let imp = weighted_gini(&left, nl, &right, nr);
        if best.as_ref().map_or(true, |b| imp < b.impurity) {
            let mut threshold = v + (next - v) / 2.0;
            if threshold >= next {
                threshold = v;
            }
            best = Some(Candidate { feature: f, threshold, impurity: imp });
        }
    }
    best
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn weighted_gini(left: &[usize], nl: usize, right: &[usize], nr: usize) -> f64 {
    let n = (nl + nr) as f64;
    (nl as f64 / n) * gini(left, nl) + (nr as f64 / n) * gini(right, nr)
}
