//! Business-component model types, label normalization and validation.
//!
//! A [`ComponentModel`] is either *reusable* (a single [`Structure`]) or
//! *generic* (several alternative structures for the same business object).
//! Everything downstream (transformation, alignment, merge) works on these
//! plain values.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LabelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Entity,
    Process,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Entity => "entity",
            ComponentKind::Process => "process",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reuse {
    Reusable,
    Generic,
}

impl Reuse {
    pub fn as_str(self) -> &'static str {
        match self {
            Reuse::Reusable => "reusable",
            Reuse::Generic => "generic",
        }
    }
}

/// Where a model came from. Not part of the `.bcm` text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Parsed from in-memory text.
    #[default]
    Inline,
    Source(String),
    Merged,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Inline => f.write_str("inline"),
            Provenance::Source(path) => f.write_str(path),
            Provenance::Merged => f.write_str("merged"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentModel {
    pub name: String,
    pub kind: ComponentKind,
    pub reuse: Reuse,
    pub structures: Vec<Structure>,
    #[serde(default)]
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Structure {
    pub id: String,
    pub concepts: Vec<Concept>,
    pub relations: Vec<Relation>,
    pub services: Vec<ServiceSignature>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub value_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub name: String,
    pub attributes: Vec<Attribute>,
}

impl Concept {
    pub fn new(name: impl Into<String>) -> Self {
        Concept {
            name: name.into(),
            attributes: Vec::new(),
        }
    }

    pub fn with_attr(mut self, name: impl Into<String>, value_type: impl Into<String>) -> Self {
        self.attributes.push(Attribute {
            name: name.into(),
            value_type: value_type.into(),
        });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    #[serde(rename = "assoc")]
    Association,
    Isa,
    #[serde(rename = "comp")]
    Composition,
}

impl RelationKind {
    /// Keyword used in the `.bcm` grammar and in edge tags.
    pub fn keyword(self) -> &'static str {
        match self {
            RelationKind::Association => "assoc",
            RelationKind::Isa => "isa",
            RelationKind::Composition => "comp",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "assoc" => Some(RelationKind::Association),
            "isa" => Some(RelationKind::Isa),
            "comp" => Some(RelationKind::Composition),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub source: String,
    pub target: String,
    pub kind: RelationKind,
    pub label: Option<String>,
    pub cardinality: Option<String>,
}

impl Relation {
    pub fn new(source: impl Into<String>, target: impl Into<String>, kind: RelationKind) -> Self {
        Relation {
            source: source.into(),
            target: target.into(),
            kind,
            label: None,
            cardinality: None,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn identity(&self) -> (&str, &str, RelationKind, Option<&str>) {
        (&self.source, &self.target, self.kind, self.label.as_deref())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ServiceSignature {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: Option<String>,
}

/// Lowercases a label and splits camelCase, snake_case, kebab-case and
/// whitespace-separated tokens, re-joining them with single spaces.
pub fn normalize_label(raw: &str) -> Result<String, LabelError> {
    let mut tokens: Vec<String> = Vec::new();
    let mut current = String::new();
    let chars: Vec<char> = raw.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_whitespace() || c == '_' || c == '-' {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.is_ascii_uppercase() && !current.is_empty() {
            let prev = chars[i - 1];
            let next_is_lower = chars.get(i + 1).is_some_and(|n| n.is_ascii_lowercase());
            // "conferenceSession" and "HTTPServer" both split before the capital.
            if prev.is_ascii_lowercase()
                || prev.is_ascii_digit()
                || (prev.is_ascii_uppercase() && next_is_lower)
            {
                tokens.push(std::mem::take(&mut current));
            }
        }
        current.push(c);
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    if tokens.is_empty() {
        return Err(LabelError::Empty);
    }
    Ok(tokens
        .iter()
        .map(|t| t.to_lowercase())
        .collect::<Vec<_>>()
        .join(" "))
}

/// ASCII letter followed by ASCII letters, digits or underscores.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Component names are identifiers, or identifiers joined by `+` for merged
/// components.
pub fn is_component_name(s: &str) -> bool {
    s.split('+').all(is_identifier)
}

/// Turns a free-text label into an identifier: normalized tokens joined by
/// underscores.
pub fn label_to_identifier(raw: &str) -> Option<String> {
    let joined = normalize_label(raw).ok()?.replace(' ', "_");
    is_identifier(&joined).then_some(joined)
}

fn is_cardinality(s: &str) -> bool {
    let Some((lo, hi)) = s.split_once("..") else {
        return false;
    };
    let digits = |p: &str| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit());
    digits(lo) && (hi == "*" || digits(hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FindingCode {
    #[serde(rename = "STRUCT_COUNT")]
    StructCount,
    #[serde(rename = "BAD_IDENT")]
    BadIdent,
    #[serde(rename = "DUP_CONCEPT")]
    DupConcept,
    #[serde(rename = "DUP_ATTR")]
    DupAttr,
    #[serde(rename = "DUP_PARAM")]
    DupParam,
    #[serde(rename = "DUP_RELATION")]
    DupRelation,
    #[serde(rename = "DANGLING_REF")]
    DanglingRef,
    #[serde(rename = "ISA_LABEL")]
    IsaLabel,
    #[serde(rename = "ISA_CYCLE")]
    IsaCycle,
    #[serde(rename = "BAD_CARD")]
    BadCard,
}

impl FindingCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::StructCount => "STRUCT_COUNT",
            FindingCode::BadIdent => "BAD_IDENT",
            FindingCode::DupConcept => "DUP_CONCEPT",
            FindingCode::DupAttr => "DUP_ATTR",
            FindingCode::DupParam => "DUP_PARAM",
            FindingCode::DupRelation => "DUP_RELATION",
            FindingCode::DanglingRef => "DANGLING_REF",
            FindingCode::IsaLabel => "ISA_LABEL",
            FindingCode::IsaCycle => "ISA_CYCLE",
            FindingCode::BadCard => "BAD_CARD",
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single invariant violation, with the path of the offending element
/// (e.g. `SubmissionMgr/main/concept:Article/attr:title`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub code: FindingCode,
    pub path: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.code, self.path)
    }
}

pub fn validate(model: &ComponentModel) -> Vec<Finding> {
    let mut findings = Vec::new();
    let mut push = |code, path: String| findings.push(Finding { code, path });

    if !is_component_name(&model.name) {
        push(FindingCode::BadIdent, model.name.clone());
    }
    let count_ok = match model.reuse {
        Reuse::Reusable => model.structures.len() == 1,
        Reuse::Generic => !model.structures.is_empty(),
    };
    if !count_ok {
        push(FindingCode::StructCount, model.name.clone());
    }

    for s in &model.structures {
        let base = format!("{}/{}", model.name, s.id);
        if !is_identifier(&s.id) {
            push(FindingCode::BadIdent, base.clone());
        }

        let mut seen = HashSet::new();
        for c in &s.concepts {
            let cpath = format!("{base}/concept:{}", c.name);
            if !is_identifier(&c.name) {
                push(FindingCode::BadIdent, cpath.clone());
            }
            if !seen.insert(normalize_label(&c.name).unwrap_or_default()) {
                push(FindingCode::DupConcept, cpath.clone());
            }
            let mut attrs = HashSet::new();
            for a in &c.attributes {
                let apath = format!("{cpath}/attr:{}", a.name);
                if !is_identifier(&a.name) || !is_identifier(&a.value_type) {
                    push(FindingCode::BadIdent, apath.clone());
                }
                if !attrs.insert(normalize_label(&a.name).unwrap_or_default()) {
                    push(FindingCode::DupAttr, apath);
                }
            }
        }

        let names: HashSet<&str> = s.concepts.iter().map(|c| c.name.as_str()).collect();
        let mut rels = HashSet::new();
        for (i, r) in s.relations.iter().enumerate() {
            let rpath = format!("{base}/relation[{i}]:{}->{}", r.source, r.target);
            for end in [&r.source, &r.target] {
                if !names.contains(end.as_str()) {
                    push(FindingCode::DanglingRef, format!("{rpath}/{end}"));
                }
            }
            if r.kind == RelationKind::Isa && r.label.is_some() {
                push(FindingCode::IsaLabel, rpath.clone());
            }
            if r.label.as_deref().is_some_and(|l| !is_identifier(l)) {
                push(FindingCode::BadIdent, rpath.clone());
            }
            if r.cardinality.as_deref().is_some_and(|c| !is_cardinality(c)) {
                push(FindingCode::BadCard, rpath.clone());
            }
            if !rels.insert(r.identity()) {
                push(FindingCode::DupRelation, rpath);
            }
        }
        if let Some(cycle) = isa_cycle(&s.relations) {
            push(
                FindingCode::IsaCycle,
                format!("{base}/{}", cycle.join("->")),
            );
        }

        for svc in &s.services {
            let spath = format!("{base}/service:{}", svc.name);
            if !is_identifier(&svc.name)
                || svc
                    .return_type
                    .as_deref()
                    .is_some_and(|t| !is_identifier(t))
            {
                push(FindingCode::BadIdent, spath.clone());
            }
            let mut params = HashSet::new();
            for p in &svc.params {
                if !is_identifier(&p.name) || !is_identifier(&p.value_type) {
                    push(FindingCode::BadIdent, format!("{spath}/{}", p.name));
                }
                if !params.insert(p.name.as_str()) {
                    push(FindingCode::DupParam, format!("{spath}/{}", p.name));
                }
            }
        }
    }
    findings
}

/// Returns the concepts of one is-a cycle, if any.
pub(crate) fn isa_cycle(relations: &[Relation]) -> Option<Vec<String>> {
    let mut parents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for r in relations.iter().filter(|r| r.kind == RelationKind::Isa) {
        parents.entry(&r.source).or_default().push(&r.target);
    }
    let edges: Vec<(&str, &str)> = parents
        .iter()
        .flat_map(|(c, ps)| ps.iter().map(move |p| (*c, *p)))
        .collect();
    crate::graph::find_cycle(&edges)
}

impl ComponentModel {
    pub fn concept_count(&self) -> usize {
        self.structures.iter().map(|s| s.concepts.len()).sum()
    }

    /// Sorts every unordered collection so that equal models compare equal.
    pub fn canonicalize(&mut self) {
        for s in &mut self.structures {
            s.canonicalize();
        }
    }

    pub fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    /// Union of all structures. Concepts are deduplicated by normalized label
    /// (first occurrence wins, attributes are unioned), relation endpoints are
    /// re-pointed to the surviving names and exact duplicate relations dropped.
    pub fn flatten(&self) -> Structure {
        let mut out = Structure {
            id: self
                .structures
                .first()
                .map(|s| s.id.clone())
                .unwrap_or_else(|| "main".to_string()),
            ..Structure::default()
        };
        let mut by_label: HashMap<String, usize> = HashMap::new();
        let mut rename: HashMap<String, String> = HashMap::new();
        for s in &self.structures {
            for c in &s.concepts {
                let key = normalize_label(&c.name).unwrap_or_else(|_| c.name.clone());
                match by_label.get(&key) {
                    Some(&idx) => {
                        let target: &mut Concept = &mut out.concepts[idx];
                        rename.insert(c.name.clone(), target.name.clone());
                        for a in &c.attributes {
                            let akey = normalize_label(&a.name).ok();
                            let present = target
                                .attributes
                                .iter()
                                .any(|b| normalize_label(&b.name).ok() == akey);
                            if !present {
                                target.attributes.push(a.clone());
                            }
                        }
                    }
                    None => {
                        by_label.insert(key, out.concepts.len());
                        rename.insert(c.name.clone(), c.name.clone());
                        out.concepts.push(c.clone());
                    }
                }
            }
        }
        let mut seen = HashSet::new();
        let mut services = BTreeSet::new();
        for s in &self.structures {
            for r in &s.relations {
                let mut r = r.clone();
                if let Some(n) = rename.get(&r.source) {
                    r.source = n.clone();
                }
                if let Some(n) = rename.get(&r.target) {
                    r.target = n.clone();
                }
                let key = (r.source.clone(), r.target.clone(), r.kind, r.label.clone());
                if seen.insert(key) {
                    out.relations.push(r);
                }
            }
            for svc in &s.services {
                if services.insert(svc.name.clone()) {
                    out.services.push(svc.clone());
                }
            }
        }
        out
    }
}

impl Structure {
    pub fn canonicalize(&mut self) {
        for c in &mut self.concepts {
            c.attributes.sort();
        }
        self.concepts.sort_by(|a, b| a.name.cmp(&b.name));
        self.relations.sort();
        self.services.sort();
    }

    pub fn concept(&self, name: &str) -> Option<&Concept> {
        self.concepts.iter().find(|c| c.name == name)
    }
}
