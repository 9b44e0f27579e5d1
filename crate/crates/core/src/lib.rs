//! Privacy-policy structuring and GDPR concept classification.

pub mod classifiers;
pub mod corpus;
pub mod evaluation;
pub mod features;
pub mod forest;
pub mod html;
pub mod structure;
pub mod synthetic;
pub mod taxonomy;

pub use taxonomy::{ConceptNode, Taxonomy, TaxonomyError};
