//! Semantic integration of business-component models.
//!
//! The pipeline turns each component into an ontology, anchors its concepts
//! in a domain ontology, classifies cross-component concept pairs as
//! synonyms, homonyms or equivalents, proposes resolution actions from a
//! rule catalog (adjusted by the designers' past choices) and finally merges
//! the components into one.

pub mod align;
pub mod error;
mod graph;
pub mod ingest;
pub mod isocheck;
pub mod merge;
pub mod model;
pub mod pipeline;
pub mod resolve;
pub mod transform;

pub use error::{LabelError, SyntaxError};
pub use ingest::{
    parse_bcm, parse_lexicon, parse_onto, serialize_bcm, serialize_onto, BcmError, Lexicon,
    LexiconError, OntoError,
};
pub use model::{
    normalize_label, validate, ComponentKind, ComponentModel, Concept, Finding, FindingCode,
    Relation, RelationKind, Reuse, Structure,
};
pub use transform::{to_ontology, Ontology};

pub(crate) fn format_findings(findings: &[model::Finding]) -> String {
    findings
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
