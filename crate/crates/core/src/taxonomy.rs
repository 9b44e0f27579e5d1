//! The extended GDPR concept taxonomy.
//!
//! Concepts are identified by an uppercase dot-path (`"DATA SHARING.CONDITION"`).
//! The tree is loaded from a small text file so it can be extended without
//! rebuilding; the default tree ships inside the crate.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

/// Number of nodes in the GDPR taxonomy.
pub const EXPECTED_NODES: usize = 96;
/// Number of first-level concepts.
pub const EXPECTED_ROOTS: usize = 19;
/// Deepest allowed level.
pub const MAX_LEVEL: u8 = 3;

const BUILTIN: &str = include_str!("../data/gdpr_taxonomy.tsv");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("io error reading {path}: {message}")]
    Io { path: String, message: String },
    #[error("missing `#count=` header")]
    MissingHeader,
    #[error("malformed line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("duplicate id {0:?}")]
    Duplicate(String),
    #[error("orphan parent for {id:?}: {parent:?} is not defined above it")]
    OrphanParent { id: String, parent: String },
    #[error("level {level} does not match id depth for {id:?}")]
    LevelMismatch { id: String, level: u8 },
    #[error("node-count mismatch (expected {expected}, found {found})")]
    NodeCountMismatch { expected: usize, found: usize },
    #[error("root-count mismatch (expected {expected}, found {found})")]
    RootCountMismatch { expected: usize, found: usize },
    #[error("unknown concept id {0:?}")]
    UnknownId(String),
    #[error("unknown labels: {}", .0.join(", "))]
    UnknownLabels(Vec<String>),
}

/// One concept in the tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConceptNode {
    pub id: String,
    pub name: String,
    pub level: u8,
    pub parent: Option<String>,
}

/// Immutable concept tree; nodes are kept in file order.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    nodes: Vec<ConceptNode>,
    index: HashMap<String, usize>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
}

impl PartialEq for Taxonomy {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
    }
}

impl Taxonomy {
    /// The shipped GDPR taxonomy.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("shipped taxonomy is valid")
    }

    /// Reads and validates a taxonomy file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| TaxonomyError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Parses taxonomy text. The header must declare [`EXPECTED_NODES`]
    /// and the body must match it with [`EXPECTED_ROOTS`] first-level nodes.
    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let mut declared = None;
        let mut nodes: Vec<ConceptNode> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if let Some(rest) = line.strip_prefix("#count=") {
                let n = rest.trim().parse::<usize>().map_err(|_| TaxonomyError::Malformed {
                    line: lineno + 1,
                    reason: format!("bad count {rest:?}"),
                })?;
                declared = Some(n);
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (level, id) = line.split_once('\t').ok_or_else(|| TaxonomyError::Malformed {
                line: lineno + 1,
                reason: "expected LEVEL<TAB>ID".into(),
            })?;
            let level: u8 = level.trim().parse().map_err(|_| TaxonomyError::Malformed {
                line: lineno + 1,
                reason: format!("bad level {level:?}"),
            })?;
            let id = id.trim().to_string();
            if !(1..=MAX_LEVEL).contains(&level) {
                return Err(TaxonomyError::Malformed {
                    line: lineno + 1,
                    reason: format!("level {level} outside 1..={MAX_LEVEL}"),
                });
            }
            if id.is_empty() || id.split('.').any(|p| p.trim().is_empty()) {
                return Err(TaxonomyError::Malformed {
                    line: lineno + 1,
                    reason: format!("bad id {id:?}"),
                });
            }
            if index.contains_key(&id) {
                return Err(TaxonomyError::Duplicate(id));
            }
            let (parent, name) = match id.rsplit_once('.') {
                Some((p, n)) => (Some(p.to_string()), n.to_string()),
                None => (None, id.clone()),
            };
            let depth = id.split('.').count() as u8;
            if depth != level {
                return Err(TaxonomyError::LevelMismatch { id, level });
            }
            if let Some(p) = &parent {
                if !index.contains_key(p) {
                    return Err(TaxonomyError::OrphanParent { id, parent: p.clone() });
                }
            }
            index.insert(id.clone(), nodes.len());
            nodes.push(ConceptNode { id, name, level, parent });
        }

        let declared = declared.ok_or(TaxonomyError::MissingHeader)?;
        if declared != EXPECTED_NODES {
            return Err(TaxonomyError::NodeCountMismatch { expected: EXPECTED_NODES, found: declared });
        }
        if nodes.len() != declared {
            return Err(TaxonomyError::NodeCountMismatch { expected: EXPECTED_NODES, found: nodes.len() });
        }

        let tax = Self::from_validated(nodes, index);
        if tax.roots.len() != EXPECTED_ROOTS {
            return Err(TaxonomyError::RootCountMismatch {
                expected: EXPECTED_ROOTS,
                found: tax.roots.len(),
            });
        }
        Ok(tax)
    }

    fn from_validated(nodes: Vec<ConceptNode>, index: HashMap<String, usize>) -> Self {
        let mut children = vec![Vec::new(); nodes.len()];
        let mut roots = Vec::new();
        for (i, n) in nodes.iter().enumerate() {
            match &n.parent {
                Some(p) => children[index[p]].push(i),
                None => roots.push(i),
            }
        }
        Self { nodes, index, children, roots }
    }

    /// Serializes back to the on-disk format.
    pub fn to_text(&self) -> String {
        let mut out = format!("#count={}\n", self.nodes.len());
        for n in &self.nodes {
            let _ = writeln!(out, "{}\t{}", n.level, n.id);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All nodes in file order.
    pub fn nodes(&self) -> &[ConceptNode] {
        &self.nodes
    }

    /// Level-1 ids in file order.
    pub fn roots(&self) -> Vec<&str> {
        self.roots.iter().map(|&i| self.nodes[i].id.as_str()).collect()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Result<&ConceptNode, TaxonomyError> {
        self.index
            .get(id)
            .map(|&i| &self.nodes[i])
            .ok_or_else(|| TaxonomyError::UnknownId(id.to_string()))
    }

    /// Position of `id` in file order; this is the concept's feature index.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn max_depth(&self) -> u8 {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    /// Direct children of `id` in file order.
    pub fn children_of(&self, id: &str) -> Result<Vec<&str>, TaxonomyError> {
        let i = *self.index.get(id).ok_or_else(|| TaxonomyError::UnknownId(id.to_string()))?;
        Ok(self.children[i].iter().map(|&c| self.nodes[c].id.as_str()).collect())
    }

    /// Strict ancestors of `id`, nearest first.
    pub fn ancestors_of(&self, id: &str) -> Result<Vec<&str>, TaxonomyError> {
        let mut node = self.get(id)?;
        let mut out = Vec::new();
        while let Some(p) = &node.parent {
            node = &self.nodes[self.index[p]];
            out.push(node.id.as_str());
        }
        Ok(out)
    }

    /// True when `ancestor` is `id` itself or one of its ancestors.
    pub fn is_self_or_ancestor(&self, ancestor: &str, id: &str) -> bool {
        id == ancestor
            || (id.len() > ancestor.len()
                && id.starts_with(ancestor)
                && id.as_bytes()[ancestor.len()] == b'.')
    }

    /// Checks every label, drops duplicates and sorts into file order.
    pub fn validate_label_set<I, S>(&self, labels: I) -> Result<Vec<String>, TaxonomyError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut known = BTreeSet::new();
        let mut unknown = BTreeSet::new();
        for l in labels {
            let l = l.as_ref();
            match self.index.get(l) {
                Some(&i) => {
                    known.insert(i);
                }
                None => {
                    unknown.insert(l.to_string());
                }
            }
        }
        if !unknown.is_empty() {
            return Err(TaxonomyError::UnknownLabels(unknown.into_iter().collect()));
        }
        Ok(known.into_iter().map(|i| self.nodes[i].id.clone()).collect())
    }

    /// Adds every ancestor of every label; result is in file order.
    pub fn close_under_ancestors<'a, I>(&self, labels: I) -> BTreeSet<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out = BTreeSet::new();
        for l in labels {
            if let Ok(anc) = self.ancestors_of(l) {
                out.insert(l.to_string());
                out.extend(anc.into_iter().map(str::to_string));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_counts() {
        let t = Taxonomy::builtin();
        assert_eq!(t.len(), 96);
        assert_eq!(t.roots().len(), 19);
        assert_eq!(t.max_depth(), 3);
    }

    #[test]
    fn empty_file_with_zero_header() {
        let err = Taxonomy::parse("#count=0\n").unwrap_err();
        assert_eq!(err, TaxonomyError::NodeCountMismatch { expected: 96, found: 0 });
        assert!(err.to_string().starts_with("node-count mismatch (expected 96"));
    }

    #[test]
    fn orphan_parent_rejected() {
        let err = Taxonomy::parse("#count=96\n2\tDATA SHARING.CONDITION\n").unwrap_err();
        assert!(matches!(err, TaxonomyError::OrphanParent { .. }));
        assert!(err.to_string().contains("orphan parent"));
    }

    #[test]
    fn duplicate_and_malformed_rejected() {
        let err = Taxonomy::parse("#count=96\n1\tA\n1\tA\n").unwrap_err();
        assert_eq!(err, TaxonomyError::Duplicate("A".into()));
        let err = Taxonomy::parse("#count=96\n1 A\n").unwrap_err();
        assert!(matches!(err, TaxonomyError::Malformed { line: 2, .. }));
        let err = Taxonomy::parse("#count=96\n2\tA\n").unwrap_err();
        assert!(matches!(err, TaxonomyError::LevelMismatch { .. }));
    }

    #[test]
    fn children_in_file_order() {
        let t = Taxonomy::builtin();
        assert_eq!(
            t.children_of("PD ORIGIN").unwrap(),
            ["PD ORIGIN.DIRECT ACTIVE", "PD ORIGIN.DIRECT PASSIVE", "PD ORIGIN.INDIRECT"]
        );
        assert!(t.children_of("PD ORIGIN.DIRECT PASSIVE.COOKIE").unwrap().is_empty());
        assert!(t.children_of("NOSUCH").is_err());
    }

    #[test]
    fn ancestors_nearest_first() {
        let t = Taxonomy::builtin();
        assert_eq!(
            t.ancestors_of("DATA SUBJECT RIGHT.INFORMATION.POLICY CHANGE").unwrap(),
            ["DATA SUBJECT RIGHT.INFORMATION", "DATA SUBJECT RIGHT"]
        );
        assert!(t.ancestors_of("CONTROLLER").unwrap().is_empty());
        assert_eq!(t.ancestors_of("BAD.ID"), Err(TaxonomyError::UnknownId("BAD.ID".into())));
    }

    #[test]
    fn label_sets() {
        let t = Taxonomy::builtin();
        assert_eq!(t.validate_label_set(["PD ORIGIN", "PD ORIGIN"]).unwrap(), ["PD ORIGIN"]);
        assert!(t.validate_label_set(Vec::<&str>::new()).unwrap().is_empty());
        let err = t.validate_label_set(["PD ORIGIN", "XYZ"]).unwrap_err();
        assert_eq!(err, TaxonomyError::UnknownLabels(vec!["XYZ".into()]));
        // canonical order is file order, not input order
        assert_eq!(
            t.validate_label_set(["DATA SHARING", "CONTROLLER"]).unwrap(),
            ["CONTROLLER", "DATA SHARING"]
        );
    }

    #[test]
    fn structural_invariants() {
        let t = Taxonomy::builtin();
        for n in t.nodes() {
            match &n.parent {
                None => assert_eq!(n.level, 1),
                Some(p) => {
                    let parent = t.get(p).unwrap();
                    assert_eq!(n.level, parent.level + 1);
                    assert_eq!(n.id, format!("{}.{}", p, n.name));
                    assert!(t.children_of(p).unwrap().contains(&n.id.as_str()));
                }
            }
            assert!(t.ancestors_of(&n.id).unwrap().len() <= 2);
        }
    }

    #[test]
    fn text_round_trip() {
        let t = Taxonomy::builtin();
        let again = Taxonomy::parse(&t.to_text()).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn prefix_check_respects_segment_boundary() {
        let t = Taxonomy::builtin();
        assert!(t.is_self_or_ancestor("PD CATEGORY", "PD CATEGORY.SPECIAL"));
        assert!(!t.is_self_or_ancestor("PD", "PD CATEGORY"));
    }
}
