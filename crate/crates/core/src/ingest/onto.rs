//! The `.onto` ontology format.
//!
//! ```text
//! ontology D
//! concept Paper label="Paper"
//! concept Document label="Document"
//! isa Paper Document
//! rel cites Paper Paper label="cites"
//! syn Paper "Article"
//! ```
//!
//! Concepts may carry `origin=<Component>` to mark component-derived
//! concepts; without it the concept belongs to the domain.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::cursor::{directive_lines, quote, Cursor};
use crate::error::SyntaxError;
use crate::transform::{Ontology, OntologyError, Origin};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntoError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("line {line}: concept `{id}` declared twice")]
    DuplicateConcept { line: usize, id: String },
    #[error("line {line}: relation `{id}` declared twice")]
    DuplicateRelation { line: usize, id: String },
    #[error("line {line}: unknown concept `{id}`")]
    UnknownConcept { line: usize, id: String },
    #[error("is-a cycle through {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

fn is_id_tail(c: char) -> bool {
    c == ':' || c == '+'
}

pub fn parse_onto(text: &str) -> Result<Ontology, OntoError> {
    let mut lines = directive_lines(text);
    let Some((line_no, header)) = lines.next() else {
        let last = text.lines().count().max(1);
        return Err(Cursor::new(last, "").error("`ontology` header").into());
    };
    let mut cur = Cursor::new(line_no, header);
    cur.keyword("ontology")?;
    let mut onto = Ontology::new(cur.ident_with("ontology name", |c| c == '+')?);
    cur.finish()?;

    // Edge endpoints are resolved after all concepts are known.
    let mut references: Vec<(usize, String)> = Vec::new();
    let mut aliases: BTreeMap<String, Vec<String>> = BTreeMap::new();

    for (line_no, text) in lines {
        let mut cur = Cursor::new(line_no, text);
        let directive = cur.ident("directive")?;
        match directive.as_str() {
            "concept" => {
                let id = cur.ident_with("concept id", is_id_tail)?;
                let mut label = None;
                let mut origin = Origin::Domain;
                let mut seen_origin = false;
                while !cur.at_end() {
                    let err = cur.error("`label=` or `origin=`");
                    match cur.key("`label=` or `origin=`")?.as_str() {
                        "label" if label.is_none() => label = Some(cur.quoted("quoted label")?),
                        "origin" if !seen_origin => {
                            origin =
                                Origin::Component(cur.ident_with("component name", |c| c == '+')?);
                            seen_origin = true;
                        }
                        _ => return Err(err.into()),
                    }
                }
                if onto.concepts.contains_key(&id) {
                    return Err(OntoError::DuplicateConcept { line: line_no, id });
                }
                let label = label.unwrap_or_else(|| id.clone());
                onto.add_concept(id, label, origin);
            }
            "isa" => {
                let child = cur.ident_with("child concept", is_id_tail)?;
                let parent = cur.ident_with("parent concept", is_id_tail)?;
                cur.finish()?;
                references.push((line_no, child.clone()));
                references.push((line_no, parent.clone()));
                onto.add_isa(child, parent);
            }
            "rel" => {
                let id = cur.ident_with("relation id", is_id_tail)?;
                let src = cur.ident_with("source concept", is_id_tail)?;
                let dst = cur.ident_with("target concept", is_id_tail)?;
                cur.keyword("label")?;
                cur.expect("=")?;
                let label = cur.quoted("quoted label")?;
                cur.finish()?;
                if onto.rel_edges.contains_key(&id) {
                    return Err(OntoError::DuplicateRelation { line: line_no, id });
                }
                references.push((line_no, src.clone()));
                references.push((line_no, dst.clone()));
                onto.add_rel(id, src, dst, label);
            }
            "syn" => {
                let id = cur.ident_with("concept id", is_id_tail)?;
                let mut list = vec![cur.quoted("quoted alias")?];
                while !cur.at_end() {
                    list.push(cur.quoted("quoted alias")?);
                }
                references.push((line_no, id.clone()));
                aliases.entry(id).or_default().extend(list);
            }
            _ => {
                return Err(Cursor::new(line_no, text)
                    .error("`concept`, `isa`, `rel` or `syn`")
                    .into())
            }
        }
    }

    for (line, id) in references {
        if !onto.concepts.contains_key(&id) {
            return Err(OntoError::UnknownConcept { line, id });
        }
    }
    for (id, list) in aliases {
        if let Some(c) = onto.concepts.get_mut(&id) {
            c.aliases.extend(list);
        }
    }
    match onto.check() {
        Ok(()) => Ok(onto),
        Err(OntologyError::Cycle(c)) => Err(OntoError::Cycle(c)),
        Err(OntologyError::UnknownConcept(id)) => Err(OntoError::UnknownConcept { line: 0, id }),
    }
}

pub fn serialize_onto(onto: &Ontology) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ontology {}", onto.name);
    for c in onto.concepts.values() {
        let _ = write!(out, "concept {} label={}", c.id, quote(&c.label));
        if let Origin::Component(name) = &c.origin {
            let _ = write!(out, " origin={name}");
        }
        out.push('\n');
    }
    for (child, parent) in &onto.isa_edges {
        let _ = writeln!(out, "isa {child} {parent}");
    }
    for e in onto.rel_edges.values() {
        let _ = writeln!(
            out,
            "rel {} {} {} label={}",
            e.id,
            e.source,
            e.target,
            quote(&e.label)
        );
    }
    for c in onto.concepts.values().filter(|c| !c.aliases.is_empty()) {
        let quoted: BTreeSet<String> = c.aliases.iter().map(|a| quote(a)).collect();
        let _ = writeln!(
            out,
            "syn {} {}",
            c.id,
            quoted.into_iter().collect::<Vec<_>>().join(" ")
        );
    }
    out
}
