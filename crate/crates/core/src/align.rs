//! Similarity measures, anchoring in the domain ontology, and pairwise
//! alignment of component ontologies into a correspondence ontology.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::bfs_distances;
use crate::ingest::Lexicon;
use crate::model::normalize_label;
use crate::transform::Ontology;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentParams {
    /// Minimum lexical score for a concept to be anchored.
    pub anchor_threshold: f64,
    /// Equal-label pairs whose attribute Jaccard falls below this are homonyms.
    pub homonym_attr_jaccard_max: f64,
    /// Weight of the lexical term in [`blended_similarity`].
    pub lexical_weight: f64,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        AlignmentParams {
            anchor_threshold: 0.8,
            homonym_attr_jaccard_max: 0.25,
            lexical_weight: 0.5,
        }
    }
}

impl AlignmentParams {
    pub fn new(
        anchor_threshold: f64,
        homonym_attr_jaccard_max: f64,
        lexical_weight: f64,
    ) -> Result<Self, AlignError> {
        for (name, v) in [
            ("anchor_threshold", anchor_threshold),
            ("homonym_attr_jaccard_max", homonym_attr_jaccard_max),
            ("lexical_weight", lexical_weight),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(AlignError::ParamOutOfRange { name, value: v });
            }
        }
        Ok(AlignmentParams {
            anchor_threshold,
            homonym_attr_jaccard_max,
            lexical_weight,
        })
    }
}

/// Background knowledge available to the matcher.
#[derive(Debug, Clone, Default)]
pub struct ResourceSet {
    pub domain: Ontology,
    pub lexicon: Lexicon,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlignError {
    #[error("unknown domain concept `{0}`")]
    UnknownConcept(String),
    #[error("cannot align component `{0}` with itself")]
    SameComponent(String),
    #[error("parameter {name} = {value} is outside [0, 1]")]
    ParamOutOfRange { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationType {
    Equivalent,
    Homonym,
    Synonym,
}

impl RelationType {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationType::Equivalent => "equivalent",
            RelationType::Homonym => "homonym",
            RelationType::Synonym => "synonym",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "equivalent" => Some(RelationType::Equivalent),
            "homonym" => Some(RelationType::Homonym),
            "synonym" => Some(RelationType::Synonym),
            _ => None,
        }
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConceptRef {
    pub component: String,
    pub concept: String,
}

impl ConceptRef {
    pub fn new(component: impl Into<String>, concept: impl Into<String>) -> Self {
        ConceptRef {
            component: component.into(),
            concept: concept.into(),
        }
    }
}

impl fmt::Display for ConceptRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.concept)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub source: ConceptRef,
    pub target: ConceptRef,
    pub relation: RelationType,
    pub confidence: f64,
    pub source_anchor: Option<String>,
    pub target_anchor: Option<String>,
}

impl Correspondence {
    /// The domain concept both sides are anchored at, if they agree.
    pub fn anchor(&self) -> Option<&str> {
        match (&self.source_anchor, &self.target_anchor) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn swapped(&self) -> Correspondence {
        Correspondence {
            source: self.target.clone(),
            target: self.source.clone(),
            relation: self.relation,
            confidence: self.confidence,
            source_anchor: self.target_anchor.clone(),
            target_anchor: self.source_anchor.clone(),
        }
    }

    fn order_key(&self) -> (&ConceptRef, &ConceptRef) {
        (&self.source, &self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentCorrespondence {
    pub a: String,
    pub b: String,
    pub relation: RelationType,
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrespondenceOntology {
    pub correspondences: Vec<Correspondence>,
    pub components: Vec<ComponentCorrespondence>,
}

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Labels that fail to normalize (empty or separator-only) compare as "".
fn lenient_normalize(s: &str) -> String {
    normalize_label(s).unwrap_or_default()
}

/// Normalized edit-distance similarity in `[0, 1]`.
pub fn lexical_similarity(a: &str, b: &str) -> f64 {
    let a = lenient_normalize(a);
    let b = lenient_normalize(b);
    if a == b {
        return 1.0;
    }
    let longest = a.chars().count().max(b.chars().count());
    1.0 - edit_distance(&a, &b) as f64 / longest as f64
}

/// `1 / (1 + d)` with `d` the undirected is-a path length; `0` when the two
/// concepts are not connected.
pub fn semantic_similarity(c1: &str, c2: &str, domain: &Ontology) -> Result<f64, AlignError> {
    for c in [c1, c2] {
        if domain.concept(c).is_none() {
            return Err(AlignError::UnknownConcept(c.to_string()));
        }
    }
    let dist = bfs_distances(c1, |n| domain.isa_neighbors(n).collect::<Vec<_>>());
    Ok(match dist.get(c2) {
        Some(&d) => 1.0 / (1.0 + d as f64),
        None => 0.0,
    })
}

/// Weighted mix of lexical similarity of two labels and semantic
/// similarity of their anchors (zero when either is unanchored).
pub fn blended_similarity(
    a: (&str, Option<&str>),
    b: (&str, Option<&str>),
    domain: &Ontology,
    params: &AlignmentParams,
) -> f64 {
    let lexical = lexical_similarity(a.0, b.0);
    let semantic = match (a.1, b.1) {
        (Some(x), Some(y)) => semantic_similarity(x, y, domain).unwrap_or(0.0),
        _ => 0.0,
    };
    params.lexical_weight * lexical + (1.0 - params.lexical_weight) * semantic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub concept: String,
    pub score: f64,
}

/// Best-matching domain concept for a label, if its score reaches the
/// anchor threshold. Ties go to the smallest domain concept id.
pub fn anchor(label: &str, resources: &ResourceSet, params: &AlignmentParams) -> Option<Anchor> {
    let norm = lenient_normalize(label);
    let mut best: Option<Anchor> = None;
    // BTreeMap iteration is id-ordered, so a strict `>` keeps the smallest id.
    for d in resources.domain.concepts.values() {
        let score = std::iter::once(&d.label)
            .chain(d.aliases.iter())
            .map(|candidate| {
                let cand = lenient_normalize(candidate);
                if resources.lexicon.share_synset(&norm, &cand) {
                    1.0
                } else {
                    lexical_similarity(&norm, &cand)
                }
            })
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| score > b.score) {
            best = Some(Anchor {
                concept: d.id.clone(),
                score,
            });
        }
    }
    best.filter(|b| b.score >= params.anchor_threshold)
}

/// A component concept prepared for classification.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchoredConcept {
    pub reference: ConceptRef,
    pub label: String,
    pub attributes: BTreeSet<String>,
    pub anchor: Option<Anchor>,
}

impl AnchoredConcept {
    pub fn new(
        reference: ConceptRef,
        label: &str,
        attributes: impl IntoIterator<Item = impl AsRef<str>>,
        resources: &ResourceSet,
        params: &AlignmentParams,
    ) -> Self {
        AnchoredConcept {
            reference,
            label: lenient_normalize(label),
            attributes: attributes
                .into_iter()
                .map(|a| lenient_normalize(a.as_ref()))
                .collect(),
            anchor: anchor(label, resources, params),
        }
    }

    fn anchor_id(&self) -> Option<&str> {
        self.anchor.as_ref().map(|a| a.concept.as_str())
    }

    fn anchor_score(&self) -> f64 {
        self.anchor.as_ref().map_or(1.0, |a| a.score)
    }
}

/// Jaccard index of two sets; two empty sets count as identical.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

pub fn classify(
    a: &AnchoredConcept,
    b: &AnchoredConcept,
    params: &AlignmentParams,
) -> Option<Correspondence> {
    let same_anchor = a.anchor_id() == b.anchor_id();
    let overlap = jaccard(&a.attributes, &b.attributes);
    let (relation, confidence) = if a.label == b.label {
        if same_anchor && overlap >= params.homonym_attr_jaccard_max {
            (
                RelationType::Equivalent,
                a.anchor_score() * b.anchor_score(),
            )
        } else {
            (RelationType::Homonym, 1.0 - overlap)
        }
    } else if same_anchor && a.anchor.is_some() {
        (RelationType::Synonym, a.anchor_score() * b.anchor_score())
    } else {
        return None;
    };
    Some(Correspondence {
        source: a.reference.clone(),
        target: b.reference.clone(),
        relation,
        confidence,
        source_anchor: a.anchor_id().map(str::to_string),
        target_anchor: b.anchor_id().map(str::to_string),
    })
}

/// Prepares every model concept of a component ontology for classification.
pub fn anchored_concepts(
    o: &Ontology,
    resources: &ResourceSet,
    params: &AlignmentParams,
) -> Vec<AnchoredConcept> {
    o.model_concepts()
        .map(|c| {
            AnchoredConcept::new(
                ConceptRef::new(o.name.clone(), c.id.clone()),
                &c.label,
                o.attribute_names(&c.id),
                resources,
                params,
            )
        })
        .collect()
}

pub fn align_pair(
    o1: &Ontology,
    o2: &Ontology,
    resources: &ResourceSet,
    params: &AlignmentParams,
) -> Result<CorrespondenceOntology, AlignError> {
    align_many(&[o1, o2], resources, params)
}

/// Aligns every pair of ontologies (in input order) and aggregates the
/// result into one correspondence ontology.
pub fn align_many(
    ontologies: &[&Ontology],
    resources: &ResourceSet,
    params: &AlignmentParams,
) -> Result<CorrespondenceOntology, AlignError> {
    let mut names = BTreeSet::new();
    for o in ontologies {
        if !names.insert(o.name.as_str()) {
            return Err(AlignError::SameComponent(o.name.clone()));
        }
    }
    let prepared: Vec<Vec<AnchoredConcept>> = ontologies
        .iter()
        .map(|o| anchored_concepts(o, resources, params))
        .collect();
    let mut correspondences = Vec::new();
    for i in 0..prepared.len() {
        for j in i + 1..prepared.len() {
            for a in &prepared[i] {
                for b in &prepared[j] {
                    correspondences.extend(classify(a, b, params));
                }
            }
        }
    }
    correspondences.sort_by(|x, y| x.order_key().cmp(&y.order_key()));
    let sizes: BTreeMap<String, usize> = ontologies
        .iter()
        .zip(&prepared)
        .map(|(o, p)| (o.name.clone(), p.len()))
        .collect();
    let components = build_bcco(&correspondences, &sizes);
    Ok(CorrespondenceOntology {
        correspondences,
        components,
    })
}

/// Minimum support for a component-level synonym.
pub const BCCO_SUPPORT_CUTOFF: f64 = 0.5;

/// Aggregates concept correspondences to the component level.
///
/// `support = (#synonym + #equivalent) / min(|A|, |B|)`, capped at 1. Pairs
/// below [`BCCO_SUPPORT_CUTOFF`] are omitted.
pub fn build_bcco(
    correspondences: &[Correspondence],
    component_sizes: &BTreeMap<String, usize>,
) -> Vec<ComponentCorrespondence> {
    let mut counts: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for c in correspondences {
        let entry = counts
            .entry((&c.source.component, &c.target.component))
            .or_default();
        if matches!(c.relation, RelationType::Synonym | RelationType::Equivalent) {
            *entry += 1;
        }
    }
    counts
        .into_iter()
        .filter_map(|((a, b), n)| {
            let smaller = (*component_sizes.get(a)?).min(*component_sizes.get(b)?);
            if smaller == 0 {
                return None;
            }
            let support = (n as f64 / smaller as f64).min(1.0);
            (support >= BCCO_SUPPORT_CUTOFF).then(|| ComponentCorrespondence {
                a: a.to_string(),
                b: b.to_string(),
                relation: RelationType::Synonym,
                support,
            })
        })
        .collect()
}

/// JSON alignment document with sorted keys and canonical array order.
pub fn alignment_export(co: &CorrespondenceOntology) -> Value {
    let mut corrs: Vec<&Correspondence> = co.correspondences.iter().collect();
    corrs.sort_by(|x, y| x.order_key().cmp(&y.order_key()));
    let mut comps: Vec<&ComponentCorrespondence> = co.components.iter().collect();
    comps.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
    json!({
        "correspondences": corrs.iter().map(|c| json!({
            "source": {"component": c.source.component, "concept": c.source.concept},
            "target": {"component": c.target.component, "concept": c.target.concept},
            "relation": c.relation.as_str(),
            "confidence": c.confidence,
            "anchor": c.anchor(),
        })).collect::<Vec<_>>(),
        "components": comps.iter().map(|c| json!({
            "a": c.a,
            "b": c.b,
            "relation": c.relation.as_str(),
            "support": c.support,
        })).collect::<Vec<_>>(),
    })
}

/// Pretty-printed [`alignment_export`] followed by a newline.
pub fn alignment_export_string(co: &CorrespondenceOntology) -> String {
    let mut s = serde_json::to_string_pretty(&alignment_export(co)).unwrap_or_default();
    s.push('\n');
    s
}

/// Total order on correspondences used wherever a canonical order is needed.
pub fn compare(x: &Correspondence, y: &Correspondence) -> Ordering {
    x.order_key().cmp(&y.order_key())
}
