//! Applies decided resolution actions to produce the integrated component.
//!
//! Inputs are flattened into one disjoint working graph, then decisions are
//! applied in conflict order. Concepts that get unified share one node;
//! relation endpoints follow the node they were merged into.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{ConceptRef, Correspondence, RelationType};
use crate::model::{
    is_identifier, label_to_identifier, normalize_label, validate, Attribute, ComponentKind,
    ComponentModel, Concept, Finding, Provenance, Relation, RelationKind, Reuse, ServiceSignature,
    Structure,
};
use crate::resolve::{split_labels, Conflict, ResolutionAction, Side};
use crate::transform::Ontology;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("nothing to integrate")]
    NoModels,
    #[error("component `{0}` appears more than once")]
    DuplicateComponent(String),
    #[error("input component `{component}` is invalid: {}", crate::format_findings(.findings))]
    InvalidInput {
        component: String,
        findings: Vec<Finding>,
    },
    #[error("conflicts still pending: {0:?}")]
    Undecided(Vec<usize>),
    #[error("decision references unknown concept {0}")]
    UnknownConcept(ConceptRef),
    #[error("merged model is invalid: {}", crate::format_findings(.0))]
    Invalid(Vec<Finding>),
}

/// Target label for a synonym pair: the shared anchor's domain label when
/// anchored, otherwise the smaller normalized label. Either is turned into
/// an identifier.
pub fn choose_rename_label(c: &Correspondence, domain: &Ontology) -> String {
    if let Some(anchor) = c.anchor() {
        if let Some(concept) = domain.concept(anchor) {
            if is_identifier(&concept.label) {
                return concept.label.clone();
            }
            if let Some(id) = label_to_identifier(&concept.label) {
                return id;
            }
        }
        if is_identifier(anchor) {
            return anchor.to_string();
        }
    }
    let a = normalize_label(&c.source.concept).unwrap_or_else(|_| c.source.concept.clone());
    let b = normalize_label(&c.target.concept).unwrap_or_else(|_| c.target.concept.clone());
    let smaller = if a <= b { a } else { b };
    label_to_identifier(&smaller).unwrap_or(smaller)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum NodeState {
    Live,
    MergedInto(usize),
    Deleted,
}

#[derive(Debug, Clone)]
struct Node {
    label: String,
    attributes: Vec<Attribute>,
    origins: Vec<ConceptRef>,
    state: NodeState,
}

#[derive(Debug, Clone)]
struct Edge {
    source: usize,
    target: usize,
    kind: RelationKind,
    label: Option<String>,
    cardinality: Option<String>,
}

/// Disjoint union of the input components.
struct Workspace {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: HashMap<ConceptRef, usize>,
    services: Vec<ServiceSignature>,
}

impl Workspace {
    fn new(models: &[ComponentModel]) -> Result<Self, MergeError> {
        let mut ws = Workspace {
            nodes: Vec::new(),
            edges: Vec::new(),
            index: HashMap::new(),
            services: Vec::new(),
        };
        let mut seen_services = HashSet::new();
        for m in models {
            let mut flat = m.flatten();
            flat.canonicalize();
            let base = ws.nodes.len();
            let mut local = HashMap::new();
            for (i, c) in flat.concepts.iter().enumerate() {
                let r = ConceptRef::new(m.name.clone(), c.name.clone());
                ws.index.insert(r.clone(), base + i);
                local.insert(c.name.as_str(), base + i);
                ws.nodes.push(Node {
                    label: c.name.clone(),
                    attributes: c.attributes.clone(),
                    origins: vec![r],
                    state: NodeState::Live,
                });
            }
            for r in &flat.relations {
                ws.edges.push(Edge {
                    source: local[r.source.as_str()],
                    target: local[r.target.as_str()],
                    kind: r.kind,
                    label: r.label.clone(),
                    cardinality: r.cardinality.clone(),
                });
            }
            for s in flat.services {
                if seen_services.insert(s.clone()) {
                    ws.services.push(s);
                }
            }
        }
        Ok(ws)
    }

    fn find(&self, mut idx: usize) -> usize {
        while let NodeState::MergedInto(next) = self.nodes[idx].state {
            idx = next;
        }
        idx
    }

    fn resolve(&self, r: &ConceptRef) -> Result<usize, MergeError> {
        self.index
            .get(r)
            .map(|&i| self.find(i))
            .ok_or_else(|| MergeError::UnknownConcept(r.clone()))
    }

    fn is_deleted(&self, idx: usize) -> bool {
        self.nodes[idx].state == NodeState::Deleted
    }

    /// Folds `other` into `keep`: attributes are unioned by normalized name.
    fn unify(&mut self, keep: usize, other: usize, label: String) {
        let moved = std::mem::take(&mut self.nodes[other].attributes);
        let origins = std::mem::take(&mut self.nodes[other].origins);
        self.nodes[other].state = NodeState::MergedInto(keep);
        let node = &mut self.nodes[keep];
        let mut names: HashSet<String> = node
            .attributes
            .iter()
            .map(|a| normalize_label(&a.name).unwrap_or_default())
            .collect();
        for a in moved {
            if names.insert(normalize_label(&a.name).unwrap_or_default()) {
                node.attributes.push(a);
            }
        }
        node.origins.extend(origins);
        node.label = label;
    }

    fn label_taken(&self, label: &str, except: usize) -> bool {
        let norm = normalize_label(label).unwrap_or_default();
        self.live_nodes()
            .any(|(i, n)| i != except && normalize_label(&n.label).unwrap_or_default() == norm)
    }

    /// Sets a node's label. A label already held by another concept gets
    /// the node's component as suffix (then a counter) so that renaming
    /// never creates a duplicate.
    fn relabel(&mut self, idx: usize, wanted: &str) -> Option<String> {
        if !self.label_taken(wanted, idx) {
            self.nodes[idx].label = wanted.to_string();
            return None;
        }
        let suffix = self.nodes[idx].origins[0].component.replace('+', "_");
        let base = format!("{wanted}_{suffix}");
        let mut label = base.clone();
        let mut n = 2;
        while self.label_taken(&label, idx) {
            label = format!("{base}_{n}");
            n += 1;
        }
        self.nodes[idx].label = label.clone();
        Some(format!("label {wanted} is taken; used {label}"))
    }

    /// Applies one action; returns a note when it had nothing to act on or
    /// had to adjust a label.
    fn apply(
        &mut self,
        c: &Correspondence,
        action: &ResolutionAction,
    ) -> Result<Option<String>, MergeError> {
        let src = self.resolve(&c.source)?;
        let tgt = self.resolve(&c.target)?;
        if self.is_deleted(src) || self.is_deleted(tgt) {
            return Ok(Some(
                "skipped: a concept was removed by an earlier decision".into(),
            ));
        }
        let same = src == tgt;
        let unified = || Ok(Some("skipped: concepts were already unified".into()));
        let note = match action {
            ResolutionAction::RenameSame { label } => {
                if !same {
                    let current = self.nodes[src].label.clone();
                    self.unify(src, tgt, current);
                }
                self.relabel(src, label)
            }
            ResolutionAction::MergeConcepts => {
                if !same {
                    let label = self.nodes[src]
                        .label
                        .clone()
                        .min(self.nodes[tgt].label.clone());
                    self.unify(src, tgt, label);
                }
                None
            }
            ResolutionAction::RenameDifferent { label_a, label_b } => {
                if same {
                    return unified();
                }
                self.rename_apart(src, tgt, label_a, label_b)
            }
            ResolutionAction::KeepBoth => {
                if same {
                    return unified();
                }
                let (a, b) = split_labels(c);
                self.rename_apart(src, tgt, &a, &b)
            }
            ResolutionAction::DeleteOne { kept } => {
                if same {
                    return unified();
                }
                let dropped = match kept {
                    Side::Source => tgt,
                    Side::Target => src,
                };
                self.nodes[dropped].state = NodeState::Deleted;
                None
            }
        };
        Ok(note)
    }

    fn rename_apart(&mut self, src: usize, tgt: usize, a: &str, b: &str) -> Option<String> {
        // Park the source first so the target never collides with its old label.
        self.nodes[src].label = a.to_string();
        let notes: Vec<String> = [self.relabel(tgt, b), self.relabel(src, a)]
            .into_iter()
            .flatten()
            .collect();
        (!notes.is_empty()).then(|| notes.join("; "))
    }

    fn labels(&self, c: &Correspondence) -> [String; 2] {
        [&c.source, &c.target].map(|r| {
            self.index
                .get(r)
                .map(|&i| {
                    let n = self.find(i);
                    if self.is_deleted(n) {
                        "-".to_string()
                    } else {
                        self.nodes[n].label.clone()
                    }
                })
                .unwrap_or_else(|| "?".to_string())
        })
    }

    fn live_nodes(&self) -> impl Iterator<Item = (usize, &Node)> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.state == NodeState::Live)
    }

    /// Relations between surviving nodes, exact duplicates removed.
    fn live_edges(&self) -> Vec<(usize, usize, &Edge)> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for e in &self.edges {
            let s = self.find(e.source);
            let t = self.find(e.target);
            if self.is_deleted(s) || self.is_deleted(t) {
                continue;
            }
            let key = (
                self.nodes[s].label.clone(),
                self.nodes[t].label.clone(),
                e.kind,
                e.label.clone(),
            );
            if seen.insert(key) {
                out.push((s, t, e));
            }
        }
        out
    }

    fn into_structure(self, id: String) -> Structure {
        let concepts = self
            .live_nodes()
            .map(|(_, n)| Concept {
                name: n.label.clone(),
                attributes: n.attributes.clone(),
            })
            .collect();
        let relations = self
            .live_edges()
            .into_iter()
            .map(|(s, t, e)| Relation {
                source: self.nodes[s].label.clone(),
                target: self.nodes[t].label.clone(),
                kind: e.kind,
                label: e.label.clone(),
                cardinality: e.cardinality.clone(),
            })
            .collect();
        let mut s = Structure {
            id,
            concepts,
            relations,
            services: self.services,
        };
        s.canonicalize();
        s
    }
}

/// One applied decision, with the labels of both sides before and after.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub index: usize,
    pub relation: RelationType,
    pub context_key: String,
    pub action: ResolutionAction,
    pub source: ConceptRef,
    pub target: ConceptRef,
    pub before: [String; 2],
    pub after: [String; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntegrationReport {
    pub entries: Vec<ReportEntry>,
}

impl IntegrationReport {
    /// One line per decision: `<index>\t<relation>\t<contextKey>\t<action>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                e.index, e.relation, e.context_key, e.action
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeOutput {
    pub model: ComponentModel,
    pub report: IntegrationReport,
}

fn check_inputs(models: &[ComponentModel]) -> Result<(), MergeError> {
    if models.is_empty() {
        return Err(MergeError::NoModels);
    }
    let mut names = HashSet::new();
    for m in models {
        if !names.insert(m.name.as_str()) {
            return Err(MergeError::DuplicateComponent(m.name.clone()));
        }
        let findings = validate(m);
        if !findings.is_empty() {
            return Err(MergeError::InvalidInput {
                component: m.name.clone(),
                findings,
            });
        }
    }
    Ok(())
}

fn merged_header(models: &[ComponentModel]) -> (String, ComponentKind, String) {
    let name = models
        .iter()
        .map(|m| m.name.as_str())
        .collect::<Vec<_>>()
        .join("+");
    let kind = if models.iter().all(|m| m.kind == ComponentKind::Entity) {
        ComponentKind::Entity
    } else {
        ComponentKind::Process
    };
    let structure_id = match models {
        [single] => single
            .structures
            .first()
            .map(|s| s.id.clone())
            .unwrap_or_else(|| "merged".into()),
        _ => "merged".into(),
    };
    (name, kind, structure_id)
}

fn apply_decided(
    ws: &mut Workspace,
    conflicts: &[Conflict],
) -> Result<IntegrationReport, MergeError> {
    let mut report = IntegrationReport::default();
    for (index, conflict) in conflicts.iter().enumerate() {
        let Some(action) = conflict.decided_action() else {
            continue;
        };
        let c = &conflict.correspondence;
        let before = ws.labels(c);
        let note = ws.apply(c, action)?;
        let after = ws.labels(c);
        report.entries.push(ReportEntry {
            index,
            relation: c.relation,
            context_key: conflict.context_key.clone(),
            action: action.clone(),
            source: c.source.clone(),
            target: c.target.clone(),
            before,
            after,
            note,
        });
    }
    Ok(report)
}

/// Integrates the components by applying every decision. All conflicts must
/// be decided; the result is validated and never silently repaired.
pub fn integrate(
    models: &[ComponentModel],
    decisions: &[Conflict],
) -> Result<MergeOutput, MergeError> {
    check_inputs(models)?;
    let pending: Vec<usize> = decisions
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_pending())
        .map(|(i, _)| i)
        .collect();
    if !pending.is_empty() {
        return Err(MergeError::Undecided(pending));
    }
    let mut ws = Workspace::new(models)?;
    let report = apply_decided(&mut ws, decisions)?;
    let (name, kind, structure_id) = merged_header(models);
    let model = ComponentModel {
        name,
        kind,
        reuse: Reuse::Reusable,
        structures: vec![ws.into_structure(structure_id)],
        provenance: Provenance::Merged,
    };
    let findings = validate(&model);
    if !findings.is_empty() {
        return Err(MergeError::Invalid(findings));
    }
    Ok(MergeOutput { model, report })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreviewConcept {
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub origins: Vec<ConceptRef>,
    /// Indices of pending conflicts that involve this concept.
    pub unresolved: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreviewRelation {
    pub source: String,
    pub target: String,
    pub kind: RelationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cardinality: Option<String>,
}

/// What-if view of the merge: decided conflicts applied, pending ones left
/// in place and marked. Not validated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preview {
    pub name: String,
    pub kind: ComponentKind,
    pub concepts: Vec<PreviewConcept>,
    pub relations: Vec<PreviewRelation>,
    pub pending: Vec<usize>,
    pub report: IntegrationReport,
}

pub fn preview(models: &[ComponentModel], conflicts: &[Conflict]) -> Result<Preview, MergeError> {
    check_inputs(models)?;
    let mut ws = Workspace::new(models)?;
    let report = apply_decided(&mut ws, conflicts)?;
    let mut marks: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    let mut pending = Vec::new();
    for (i, c) in conflicts.iter().enumerate().filter(|(_, c)| c.is_pending()) {
        pending.push(i);
        for r in [&c.correspondence.source, &c.correspondence.target] {
            marks.entry(ws.resolve(r)?).or_default().insert(i);
        }
    }
    let mut concepts: Vec<PreviewConcept> = ws
        .live_nodes()
        .map(|(idx, n)| {
            let mut attributes = n.attributes.clone();
            attributes.sort();
            let mut origins = n.origins.clone();
            origins.sort();
            PreviewConcept {
                name: n.label.clone(),
                attributes,
                origins,
                unresolved: marks
                    .get(&idx)
                    .map(|s| s.iter().copied().collect())
                    .unwrap_or_default(),
            }
        })
        .collect();
    concepts.sort_by(|a, b| (&a.name, &a.origins).cmp(&(&b.name, &b.origins)));
    let mut relations: Vec<PreviewRelation> = ws
        .live_edges()
        .into_iter()
        .map(|(s, t, e)| PreviewRelation {
            source: ws.nodes[s].label.clone(),
            target: ws.nodes[t].label.clone(),
            kind: e.kind,
            label: e.label.clone(),
            cardinality: e.cardinality.clone(),
        })
        .collect();
    relations.sort_by(|a, b| {
        (&a.source, &a.target, a.kind, &a.label).cmp(&(&b.source, &b.target, b.kind, &b.label))
    });
    let (name, kind, _) = merged_header(models);
    Ok(Preview {
        name,
        kind,
        concepts,
        relations,
        pending,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{align_many, AlignmentParams, ResourceSet};
    use crate::ingest::{parse_bcm, parse_lexicon, parse_onto, serialize_bcm};
    use crate::resolve::{detect_conflicts, ConflictStatus};
    use crate::transform::{to_ontology, Origin};

    const BC1: &str = "component SubmissionMgr kind=entity reuse=reusable\nstructure main\n\
        concept Article\n  attr title : string\nconcept Writer\n\
        relation Writer -> Article kind=assoc label=writes\n";
    const BC2: &str = "component ReviewMgr kind=entity reuse=reusable\nstructure main\n\
        concept Paper\n  attr title : string\n  attr abstract : string\nconcept Reviewer\n\
        relation Reviewer -> Paper kind=assoc label=reviews\n";
    const D: &str =
        "ontology D\nconcept Document label=\"Document\"\nconcept Paper label=\"Paper\"\n\
        concept Event\nconcept Session label=\"Session\"\nisa Session Event\nisa Paper Document\n\
        syn Paper \"Article\"\n";

    fn conflicts_for(models: &[ComponentModel]) -> Vec<Conflict> {
        let resources = ResourceSet {
            domain: parse_onto(D).unwrap(),
            lexicon: parse_lexicon("Author, Writer").unwrap(),
        };
        let ontos: Vec<Ontology> = models.iter().map(|m| to_ontology(m).unwrap()).collect();
        let refs: Vec<&Ontology> = ontos.iter().collect();
        let co = align_many(&refs, &resources, &AlignmentParams::default()).unwrap();
        detect_conflicts(&co, &resources.domain)
    }

    fn decide_defaults(conflicts: &mut [Conflict]) {
        for c in conflicts {
            c.status = ConflictStatus::Decided(c.default_action.clone());
        }
    }

    #[test]
    fn fixture_merge_renames_to_paper() {
        let models = vec![parse_bcm(BC1).unwrap(), parse_bcm(BC2).unwrap()];
        let mut conflicts = conflicts_for(&models);
        assert_eq!(conflicts.len(), 1);
        decide_defaults(&mut conflicts);
        let out = integrate(&models, &conflicts).unwrap();
        assert_eq!(out.model.name, "SubmissionMgr+ReviewMgr");
        let text = serialize_bcm(&out.model).unwrap();
        assert_eq!(
            text,
            "component SubmissionMgr+ReviewMgr kind=entity reuse=reusable\nstructure merged\n\
             concept Paper\n  attr abstract : string\n  attr title : string\nconcept Reviewer\n\
             concept Writer\nrelation Reviewer -> Paper kind=assoc label=reviews\n\
             relation Writer -> Paper kind=assoc label=writes\n"
        );
        assert_eq!(
            out.report.to_text(),
            "0\tsynonym\tsynonym|Paper\trenameSame(Paper)\n"
        );
        assert_eq!(
            out.report.entries[0].before,
            ["Article".to_string(), "Paper".to_string()]
        );
        assert_eq!(
            out.report.entries[0].after,
            ["Paper".to_string(), "Paper".to_string()]
        );
    }

    #[test]
    fn single_model_is_identity() {
        let m = parse_bcm(BC1).unwrap();
        let out = integrate(std::slice::from_ref(&m), &[]).unwrap();
        let mut got = out.model;
        got.provenance = m.provenance.clone();
        assert_eq!(got, m.canonical());
    }

    #[test]
    fn homonym_defaults_rename_apart() {
        let a = parse_bcm("component BC1 kind=entity reuse=reusable\nstructure s\nconcept Session\n  attr token : string\n  attr expiry : date\n").unwrap();
        let b = parse_bcm("component BC2 kind=process reuse=reusable\nstructure s\nconcept Session\n  attr room : string\n  attr chair : string\n").unwrap();
        let models = vec![a, b];
        let mut conflicts = conflicts_for(&models);
        assert_eq!(conflicts.len(), 1);
        assert_eq!(conflicts[0].correspondence.relation, RelationType::Homonym);
        decide_defaults(&mut conflicts);
        let out = integrate(&models, &conflicts).unwrap();
        let names: Vec<&str> = out.model.structures[0]
            .concepts
            .iter()
            .map(|c| c.name.as_str())
            .collect();
        assert_eq!(names, vec!["Session_BC1", "Session_BC2"]);
        assert_eq!(out.model.kind, ComponentKind::Process);
    }

    #[test]
    fn undecided_conflicts_are_rejected() {
        let models = vec![parse_bcm(BC1).unwrap(), parse_bcm(BC2).unwrap()];
        let conflicts = conflicts_for(&models);
        assert_eq!(
            integrate(&models, &conflicts),
            Err(MergeError::Undecided(vec![0]))
        );
    }

    #[test]
    fn unknown_concept_in_decision() {
        let models = vec![parse_bcm(BC1).unwrap(), parse_bcm(BC2).unwrap()];
        let mut conflicts = conflicts_for(&models);
        decide_defaults(&mut conflicts);
        conflicts[0].correspondence.source.concept = "Ghost".into();
        assert!(matches!(
            integrate(&models, &conflicts),
            Err(MergeError::UnknownConcept(_))
        ));
    }

    #[test]
    fn delete_one_drops_incident_relations() {
        let models = vec![parse_bcm(BC1).unwrap(), parse_bcm(BC2).unwrap()];
        let mut conflicts = conflicts_for(&models);
        conflicts[0].status =
            ConflictStatus::Decided(ResolutionAction::DeleteOne { kept: Side::Target });
        let out = integrate(&models, &conflicts).unwrap();
        let s = &out.model.structures[0];
        assert!(s.concept("Article").is_none());
        assert_eq!(s.relations.len(), 1);
        assert_eq!(s.relations[0].label.as_deref(), Some("reviews"));
    }

    #[test]
    fn keep_both_uses_component_suffix() {
        let models = vec![parse_bcm(BC1).unwrap(), parse_bcm(BC2).unwrap()];
        let mut conflicts = conflicts_for(&models);
        conflicts[0].status = ConflictStatus::Decided(ResolutionAction::KeepBoth);
        let out = integrate(&models, &conflicts).unwrap();
        assert!(out.model.structures[0]
            .concept("Article_SubmissionMgr")
            .is_some());
        assert!(out.model.structures[0].concept("Paper_ReviewMgr").is_some());
    }

    #[test]
    fn post_merge_validation_failure_is_reported() {
        let a = parse_bcm("component A kind=entity reuse=reusable\nstructure s\nconcept Paper\nconcept Document\nrelation Paper -> Document kind=isa\n").unwrap();
        let b = parse_bcm("component B kind=entity reuse=reusable\nstructure s\nconcept Paper\nconcept Document\nrelation Document -> Paper kind=isa\n").unwrap();
        let models = vec![a, b];
        let mut conflicts = conflicts_for(&models);
        assert_eq!(conflicts.len(), 2);
        decide_defaults(&mut conflicts);
        match integrate(&models, &conflicts) {
            Err(MergeError::Invalid(findings)) => {
                assert!(findings
                    .iter()
                    .any(|f| f.code == crate::model::FindingCode::IsaCycle))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rename_onto_taken_label_is_suffixed() {
        let models = vec![parse_bcm(BC1).unwrap(), parse_bcm(BC2).unwrap()];
        let mut conflicts = conflicts_for(&models);
        conflicts[0].status = ConflictStatus::Decided(ResolutionAction::RenameSame {
            label: "Writer".into(),
        });
        let out = integrate(&models, &conflicts).unwrap();
        let names: Vec<&str> = out.model.structures[0]
            .concepts
            .iter()
            .map(|c| c.name.as_str())
            .collect();
        assert_eq!(names, vec!["Reviewer", "Writer", "Writer_SubmissionMgr"]);
        assert_eq!(
            out.report.entries[0].note.as_deref(),
            Some("label Writer is taken; used Writer_SubmissionMgr")
        );
    }

    #[test]
    fn preview_marks_pending_pairs() {
        let models = vec![parse_bcm(BC1).unwrap(), parse_bcm(BC2).unwrap()];
        let mut conflicts = conflicts_for(&models);
        let p = preview(&models, &conflicts).unwrap();
        assert_eq!(p.pending, vec![0]);
        let marked: Vec<&str> = p
            .concepts
            .iter()
            .filter(|c| !c.unresolved.is_empty())
            .map(|c| c.name.as_str())
            .collect();
        assert_eq!(marked, vec!["Article", "Paper"]);
        decide_defaults(&mut conflicts);
        let p = preview(&models, &conflicts).unwrap();
        assert_eq!(p.concepts.iter().filter(|c| c.name == "Paper").count(), 1);
        assert!(p.pending.is_empty());
    }

    #[test]
    fn rename_label_rules() {
        let mut domain = Ontology::new("D");
        domain.add_concept("Paper", "Paper", Origin::Domain);
        domain.add_concept("Conf", "Conference Session", Origin::Domain);
        let mut c = Correspondence {
            source: ConceptRef::new("A", "Article"),
            target: ConceptRef::new("B", "Paper"),
            relation: RelationType::Synonym,
            confidence: 1.0,
            source_anchor: Some("Paper".into()),
            target_anchor: Some("Paper".into()),
        };
        assert_eq!(choose_rename_label(&c, &domain), "Paper");
        c.source_anchor = Some("Conf".into());
        c.target_anchor = Some("Conf".into());
        assert_eq!(choose_rename_label(&c, &domain), "conference_session");
        c.source = ConceptRef::new("A", "Auto");
        c.target = ConceptRef::new("B", "Car");
        c.source_anchor = None;
        c.target_anchor = None;
        assert_eq!(choose_rename_label(&c, &domain), "auto");
    }
}
