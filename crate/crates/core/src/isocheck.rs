//! Cheap non-isomorphism pre-filter for sub-components, and an exhaustive
//! isomorphism search used to validate it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ComponentModel, Relation, Structure};

/// Largest member count the exhaustive search accepts.
pub const BRUTE_FORCE_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsoError {
    #[error("sub-component needs at least one concept")]
    Empty,
    #[error("`{0}` is not a concept of component `{1}`")]
    UnknownConcept(String, String),
    #[error("exhaustive search is limited to {BRUTE_FORCE_LIMIT} concepts, got {0}")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Out,
    In,
}

/// A subset of one component's concepts, viewed over its flattened structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubComponent {
    component: String,
    structure: Structure,
    members: BTreeSet<String>,
}

fn tag(r: &Relation) -> String {
    format!("{}:{}", r.kind.keyword(), r.label.as_deref().unwrap_or(""))
}

impl SubComponent {
    pub fn new<I, S>(parent: &ComponentModel, members: I) -> Result<Self, IsoError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let structure = parent.flatten();
        let members: BTreeSet<String> = members.into_iter().map(Into::into).collect();
        if members.is_empty() {
            return Err(IsoError::Empty);
        }
        if let Some(m) = members.iter().find(|m| structure.concept(m).is_none()) {
            return Err(IsoError::UnknownConcept(m.clone(), parent.name.clone()));
        }
        Ok(SubComponent {
            component: parent.name.clone(),
            structure,
            members,
        })
    }

    /// The sub-component made of every concept.
    pub fn whole(parent: &ComponentModel) -> Result<Self, IsoError> {
        let names: Vec<String> = parent
            .flatten()
            .concepts
            .into_iter()
            .map(|c| c.name)
            .collect();
        Self::new(parent, names)
    }

    pub fn component(&self) -> &str {
        &self.component
    }

    pub fn members(&self) -> &BTreeSet<String> {
        &self.members
    }

    fn contains(&self, name: &str) -> bool {
        self.members.contains(name)
    }

    fn boundary(&self) -> impl Iterator<Item = &Relation> {
        self.structure
            .relations
            .iter()
            .filter(|r| self.contains(&r.source) != self.contains(&r.target))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeSignature {
    pub label_set: BTreeSet<String>,
    pub degree: usize,
}

pub fn set_type(s: &SubComponent) -> TypeSignature {
    let tags: Vec<String> = s.boundary().map(tag).collect();
    TypeSignature {
        degree: tags.len(),
        label_set: tags.into_iter().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "verdict", content = "rule")]
pub enum Verdict {
    NonIsomorphic(Rule),
    PossiblyIsomorphic,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::NonIsomorphic(Rule::A) => f.write_str("nonIsomorphic(A)"),
            Verdict::NonIsomorphic(Rule::B) => f.write_str("nonIsomorphic(B)"),
            Verdict::PossiblyIsomorphic => f.write_str("possiblyIsomorphic"),
        }
    }
}

/// Rule A: external relation types differ. Rule B: boundary degree or
/// member count differs.
pub fn non_iso_check(s1: &SubComponent, s2: &SubComponent) -> Verdict {
    let t1 = set_type(s1);
    let t2 = set_type(s2);
    if t1.label_set != t2.label_set {
        Verdict::NonIsomorphic(Rule::A)
    } else if t1.degree != t2.degree || s1.members.len() != s2.members.len() {
        Verdict::NonIsomorphic(Rule::B)
    } else {
        Verdict::PossiblyIsomorphic
    }
}

/// Member-indexed view used by the exhaustive search.
struct Indexed {
    internal: BTreeMap<(usize, usize), Vec<String>>,
    boundary: Vec<Vec<(Direction, String)>>,
}

impl Indexed {
    fn new(s: &SubComponent) -> Self {
        let pos: BTreeMap<&str, usize> = s
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| (m.as_str(), i))
            .collect();
        let mut internal: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
        let mut boundary = vec![Vec::new(); pos.len()];
        for r in &s.structure.relations {
            match (pos.get(r.source.as_str()), pos.get(r.target.as_str())) {
                (Some(&a), Some(&b)) => internal.entry((a, b)).or_default().push(tag(r)),
                (Some(&a), None) => boundary[a].push((Direction::Out, tag(r))),
                (None, Some(&b)) => boundary[b].push((Direction::In, tag(r))),
                (None, None) => {}
            }
        }
        internal.values_mut().for_each(|v| v.sort());
        boundary.iter_mut().for_each(|v| v.sort());
        Indexed { internal, boundary }
    }

    fn edges(&self, a: usize, b: usize) -> &[String] {
        self.internal.get(&(a, b)).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// True when some bijection between the members preserves internal edges
/// (direction, kind and label) and each concept's boundary edges.
pub fn brute_force_isomorphic(s1: &SubComponent, s2: &SubComponent) -> Result<bool, IsoError> {
    for s in [s1, s2] {
        if s.members.len() > BRUTE_FORCE_LIMIT {
            return Err(IsoError::TooLarge(s.members.len()));
        }
    }
    if s1.members.len() != s2.members.len() {
        return Ok(false);
    }
    let g1 = Indexed::new(s1);
    let g2 = Indexed::new(s2);
    let n = s1.members.len();
    let mut mapping = Vec::with_capacity(n);
    let mut used = vec![false; n];
    Ok(extend(&g1, &g2, &mut mapping, &mut used))
}

fn extend(g1: &Indexed, g2: &Indexed, mapping: &mut Vec<usize>, used: &mut [bool]) -> bool {
    let i = mapping.len();
    if i == used.len() {
        return true;
    }
    for j in 0..used.len() {
        if used[j] || g1.boundary[i] != g2.boundary[j] {
            continue;
        }
        mapping.push(j);
        // Check edges between i and every already-mapped member, including itself.
        let consistent = mapping
            .iter()
            .enumerate()
            .all(|(k, &mk)| g1.edges(i, k) == g2.edges(j, mk) && g1.edges(k, i) == g2.edges(mk, j));
        if consistent {
            used[j] = true;
            if extend(g1, g2, mapping, used) {
                return true;
            }
            used[j] = false;
        }
        mapping.pop();
    }
    false
}
