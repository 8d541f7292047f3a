//! Ontologies, and the mapping from a business component to its ontology.
//!
//! The same [`Ontology`] type holds component-derived ontologies and the
//! domain (background) ontology. Synthesized concepts use reserved id
//! prefixes that cannot collide with model identifiers: the per-component
//! root is `component:<Name>` and attribute value types are
//! `valuetype:<type>`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate, ComponentModel, Finding, RelationKind};

pub const ROOT_PREFIX: &str = "component:";
pub const VALUE_TYPE_PREFIX: &str = "valuetype:";
pub const PART_OF: &str = "partOf";
pub const HAS_ATTR: &str = "hasAttr:";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Domain,
    Component(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntoConcept {
    pub id: String,
    pub label: String,
    pub aliases: BTreeSet<String>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelEdge {
    pub id: String,
    pub source: String,
    pub target: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Ontology {
    pub name: String,
    pub concepts: BTreeMap<String, OntoConcept>,
    /// `(child, parent)` pairs.
    pub isa_edges: BTreeSet<(String, String)>,
    pub rel_edges: BTreeMap<String, RelEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("is-a cycle through {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("invalid component model: {}", crate::format_findings(.0))]
    Invalid(Vec<Finding>),
}

impl Ontology {
    pub fn new(name: impl Into<String>) -> Self {
        Ontology {
            name: name.into(),
            ..Ontology::default()
        }
    }

    pub fn add_concept(&mut self, id: impl Into<String>, label: impl Into<String>, origin: Origin) {
        let id = id.into();
        self.concepts.insert(
            id.clone(),
            OntoConcept {
                id,
                label: label.into(),
                aliases: BTreeSet::new(),
                origin,
            },
        );
    }

    pub fn add_isa(&mut self, child: impl Into<String>, parent: impl Into<String>) {
        self.isa_edges.insert((child.into(), parent.into()));
    }

    pub fn add_rel(
        &mut self,
        id: impl Into<String>,
        source: impl Into<String>,
        target: impl Into<String>,
        label: impl Into<String>,
    ) {
        let id = id.into();
        self.rel_edges.insert(
            id.clone(),
            RelEdge {
                id,
                source: source.into(),
                target: target.into(),
                label: label.into(),
            },
        );
    }

    pub fn concept(&self, id: &str) -> Option<&OntoConcept> {
        self.concepts.get(id)
    }

    pub fn is_root(id: &str) -> bool {
        id.starts_with(ROOT_PREFIX)
    }

    pub fn is_value_type(id: &str) -> bool {
        id.starts_with(VALUE_TYPE_PREFIX)
    }

    /// Concepts that came from the component's own model (neither the root
    /// nor a synthesized value type).
    pub fn model_concepts(&self) -> impl Iterator<Item = &OntoConcept> {
        self.concepts
            .values()
            .filter(|c| !Self::is_root(&c.id) && !Self::is_value_type(&c.id))
    }

    pub fn parents<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.isa_edges
            .iter()
            .filter(move |(c, _)| c == id)
            .map(|(_, p)| p.as_str())
    }

    /// Neighbours along is-a edges in either direction.
    pub fn isa_neighbors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.isa_edges.iter().filter_map(move |(c, p)| {
            if c == id {
                Some(p.as_str())
            } else if p == id {
                Some(c.as_str())
            } else {
                None
            }
        })
    }

    /// Attribute names attached through `hasAttr:` edges.
    pub fn attribute_names(&self, id: &str) -> BTreeSet<&str> {
        self.rel_edges
            .values()
            .filter(|e| e.source == id)
            .filter_map(|e| e.label.strip_prefix(HAS_ATTR))
            .collect()
    }

    /// Checks reference integrity and is-a acyclicity.
    pub fn check(&self) -> Result<(), OntologyError> {
        let known = |id: &str| {
            if self.concepts.contains_key(id) {
                Ok(())
            } else {
                Err(OntologyError::UnknownConcept(id.to_string()))
            }
        };
        for (c, p) in &self.isa_edges {
            known(c)?;
            known(p)?;
        }
        for e in self.rel_edges.values() {
            known(&e.source)?;
            known(&e.target)?;
        }
        let edges: Vec<(&str, &str)> = self
            .isa_edges
            .iter()
            .map(|(c, p)| (c.as_str(), p.as_str()))
            .collect();
        match crate::graph::find_cycle(&edges) {
            Some(cycle) => Err(OntologyError::Cycle(cycle)),
            None => Ok(()),
        }
    }
}

pub fn concept_count(o: &Ontology) -> usize {
    o.concepts.len()
}

pub fn root_id(component: &str) -> String {
    format!("{ROOT_PREFIX}{component}")
}

pub fn value_type_id(value_type: &str) -> String {
    format!("{VALUE_TYPE_PREFIX}{value_type}")
}

/// Builds the ontology of a component. Generic components are flattened
/// first (union of structures, concepts merged by normalized label).
pub fn to_ontology(model: &ComponentModel) -> Result<Ontology, TransformError> {
    let findings = validate(model);
    if !findings.is_empty() {
        return Err(TransformError::Invalid(findings));
    }
    let origin = Origin::Component(model.name.clone());
    let mut onto = Ontology::new(model.name.clone());
    let root = root_id(&model.name);
    onto.add_concept(root.clone(), model.name.clone(), origin.clone());

    let mut flat = model.flatten();
    flat.canonicalize();

    for c in &flat.concepts {
        onto.add_concept(c.name.clone(), c.name.clone(), origin.clone());
        onto.add_rel(format!("{PART_OF}:{}", c.name), &c.name, &root, PART_OF);
        for a in &c.attributes {
            let vt = value_type_id(&a.value_type);
            if !onto.concepts.contains_key(&vt) {
                onto.add_concept(vt.clone(), a.value_type.clone(), origin.clone());
            }
            onto.add_rel(
                format!("attr:{}:{}", c.name, a.name),
                &c.name,
                vt,
                format!("{HAS_ATTR}{}", a.name),
            );
        }
    }

    let mut next_rel = 0usize;
    for r in &flat.relations {
        match r.kind {
            RelationKind::Isa => onto.add_isa(&r.source, &r.target),
            RelationKind::Association | RelationKind::Composition => {
                let label = r
                    .label
                    .clone()
                    .unwrap_or_else(|| r.kind.keyword().to_string());
                onto.add_rel(format!("rel:{next_rel}"), &r.source, &r.target, label);
                next_rel += 1;
            }
        }
    }
    Ok(onto)
}
