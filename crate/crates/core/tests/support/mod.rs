//! Seeded generators and property checks shared by the property suites
//! and the acceptance target.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bcfuse_core::align::{
    align_pair, lexical_similarity, semantic_similarity, AlignmentParams, ResourceSet,
};
use bcfuse_core::isocheck::{brute_force_isomorphic, non_iso_check, SubComponent, Verdict};
use bcfuse_core::merge::{integrate, preview};
use bcfuse_core::model::{Attribute, Param, Provenance, ServiceSignature};
use bcfuse_core::resolve::{detect_conflicts, ConflictStatus, ResolutionAction};
use bcfuse_core::transform::{concept_count, Ontology};
use bcfuse_core::{
    normalize_label, parse_bcm, parse_lexicon, parse_onto, serialize_bcm, to_ontology, validate,
    ComponentKind, ComponentModel, Concept, Relation, RelationKind, Reuse, Structure,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub const DOMAIN: &str = include_str!("../../fixtures/domain.onto");
pub const LEXICON: &str = include_str!("../../fixtures/lexicon.syn");

/// Concept names grouped by the domain concept they anchor to (the last
/// groups anchor nowhere). Is-a relations only point from a later group to
/// an earlier one, so no merge can close an is-a cycle.
pub const GROUPS: &[&[&str]] = &[
    &["Document"],
    &["Paper", "Article", "Manuscript"],
    &["Person"],
    &["Author", "Writer"],
    &["Reviewer"],
    &["Review"],
    &["Event"],
    &["Session"],
    &["Conference"],
    &["Room"],
    &["Invoice"],
    &["Track"],
];

const ATTRS: &[&str] = &[
    "title", "abstract", "name", "date", "room", "token", "amount", "email",
];
const TYPES: &[&str] = &["string", "int", "date", "bool"];
const LABELS: &[&str] = &["writes", "reviews", "holds", "owns", "cites"];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn resources() -> ResourceSet {
    ResourceSet {
        domain: parse_onto(DOMAIN).expect("domain fixture"),
        lexicon: parse_lexicon(LEXICON).expect("lexicon fixture"),
    }
}

fn group_of(name: &str) -> usize {
    GROUPS
        .iter()
        .position(|g| g.contains(&name))
        .expect("generated names come from GROUPS")
}

fn random_structure(rng: &mut StdRng, id: &str, max_concepts: usize) -> Structure {
    let mut names: Vec<&str> = GROUPS.iter().flat_map(|g| g.iter().copied()).collect();
    names.shuffle(rng);
    let n = rng.gen_range(1..=max_concepts);
    let concepts: Vec<Concept> = names[..n]
        .iter()
        .map(|name| {
            let mut attrs: Vec<&str> = ATTRS.to_vec();
            attrs.shuffle(rng);
            let k = rng.gen_range(0..=3);
            Concept {
                name: name.to_string(),
                attributes: attrs[..k]
                    .iter()
                    .map(|a| Attribute {
                        name: a.to_string(),
                        value_type: TYPES[rng.gen_range(0..TYPES.len())].to_string(),
                    })
                    .collect(),
            }
        })
        .collect();
    let mut relations: Vec<Relation> = Vec::new();
    for _ in 0..rng.gen_range(0..=n + 1) {
        let a = &concepts[rng.gen_range(0..n)].name;
        let b = &concepts[rng.gen_range(0..n)].name;
        let r = match rng.gen_range(0..3) {
            0 if group_of(a) > group_of(b) => Relation::new(a, b, RelationKind::Isa),
            0 | 1 => Relation::new(a, b, RelationKind::Association)
                .labeled(LABELS[rng.gen_range(0..LABELS.len())]),
            _ => Relation::new(a, b, RelationKind::Composition),
        };
        if !relations.iter().any(|x| x.identity() == r.identity()) {
            relations.push(r);
        }
    }
    let services = (0..rng.gen_range(0..=1))
        .map(|i| ServiceSignature {
            name: format!("op{i}"),
            params: vec![Param {
                name: "id".into(),
                value_type: "int".into(),
            }],
            return_type: Some("bool".into()),
        })
        .collect();
    Structure {
        id: id.to_string(),
        concepts,
        relations,
        services,
    }
}

/// A valid component model with up to `max_concepts` concepts per structure.
pub fn random_model(rng: &mut StdRng, name: &str, max_concepts: usize) -> ComponentModel {
    let reuse = if rng.gen_bool(0.25) {
        Reuse::Generic
    } else {
        Reuse::Reusable
    };
    let count = match reuse {
        Reuse::Generic => rng.gen_range(1..=2),
        Reuse::Reusable => 1,
    };
    let model = ComponentModel {
        name: name.to_string(),
        kind: if rng.gen_bool(0.5) {
            ComponentKind::Entity
        } else {
            ComponentKind::Process
        },
        reuse,
        structures: (0..count)
            .map(|i| random_structure(rng, &format!("s{i}"), max_concepts))
            .collect(),
        provenance: Provenance::Inline,
    };
    assert_eq!(
        validate(&model),
        vec![],
        "generator produced an invalid model"
    );
    model
}

/// Printable junk biased towards the grammar's keywords and punctuation.
pub fn random_text(rng: &mut StdRng, max_len: usize) -> String {
    const PIECES: &[&str] = &[
        "component ",
        "structure ",
        "concept ",
        "attr ",
        "relation ",
        "service ",
        "ontology ",
        "isa ",
        "rel ",
        "syn ",
        "kind=",
        "reuse=",
        "label=",
        "card=",
        "entity",
        "generic",
        "assoc",
        "comp",
        "->",
        " : ",
        "(",
        ")",
        ",",
        "\"",
        "\\",
        "#",
        "\n",
        "  ",
        "A",
        "b_1",
        "0..*",
        "+",
        "é",
        "\t",
        "=",
        ":",
    ];
    let mut s = String::new();
    while s.len() < max_len {
        if rng.gen_bool(0.2) {
            s.push(char::from_u32(rng.gen_range(0..0x2FFF)).unwrap_or('?'));
        } else {
            s.push_str(PIECES[rng.gen_range(0..PIECES.len())]);
        }
        if rng.gen_bool(0.05) {
            break;
        }
    }
    s
}

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn check_normalize_idempotent(s: &str) -> Check {
    if let Ok(once) = normalize_label(s) {
        let twice = normalize_label(&once).map_err(|e| format!("{s:?}: {e}"))?;
        ensure(once == twice, || format!("{s:?}: {once:?} then {twice:?}"))?;
    }
    Ok(())
}

pub fn check_round_trip(model: &ComponentModel) -> Check {
    let text = serialize_bcm(model).map_err(|e| e.to_string())?;
    let back = parse_bcm(&text).map_err(|e| format!("{e}\n{text}"))?;
    ensure(back.canonical() == model.clone().canonical(), || {
        format!("round trip changed the model:\n{text}")
    })
}

/// Every parser returns instead of panicking.
pub fn check_parsers_total(input: &str) -> Check {
    catch_unwind(AssertUnwindSafe(|| {
        let _ = parse_bcm(input);
        let _ = parse_onto(input);
        let _ = parse_lexicon(input);
    }))
    .map_err(|_| format!("parser panicked on {input:?}"))
}

pub fn check_lexical_axioms(a: &str, b: &str) -> Check {
    let ab = lexical_similarity(a, b);
    let ba = lexical_similarity(b, a);
    ensure(ab == ba, || format!("lexical asymmetric on {a:?}/{b:?}"))?;
    ensure((0.0..=1.0).contains(&ab), || {
        format!("lexical {ab} out of range")
    })?;
    ensure(lexical_similarity(a, a) == 1.0, || {
        format!("lexical identity fails on {a:?}")
    })
}

pub fn check_semantic_axioms(domain: &Ontology, a: &str, b: &str) -> Check {
    let ab = semantic_similarity(a, b, domain).map_err(|e| e.to_string())?;
    let ba = semantic_similarity(b, a, domain).map_err(|e| e.to_string())?;
    ensure(ab == ba, || format!("semantic asymmetric on {a}/{b}"))?;
    ensure((0.0..=1.0).contains(&ab), || {
        format!("semantic {ab} out of range")
    })?;
    let aa = semantic_similarity(a, a, domain).map_err(|e| e.to_string())?;
    ensure(aa == 1.0, || format!("semantic identity fails on {a}"))
}

pub fn check_alignment_symmetry(m1: &ComponentModel, m2: &ComponentModel) -> Check {
    let res = resources();
    let params = AlignmentParams::default();
    let o1 = to_ontology(m1).map_err(|e| e.to_string())?;
    let o2 = to_ontology(m2).map_err(|e| e.to_string())?;
    let forward = align_pair(&o1, &o2, &res, &params).map_err(|e| e.to_string())?;
    let backward = align_pair(&o2, &o1, &res, &params).map_err(|e| e.to_string())?;
    let key = |c: &bcfuse_core::align::Correspondence| {
        (
            c.source.clone(),
            c.target.clone(),
            c.relation,
            c.confidence.to_bits(),
            c.source_anchor.clone(),
            c.target_anchor.clone(),
        )
    };
    let f: BTreeSet<_> = forward.correspondences.iter().map(key).collect();
    let b: BTreeSet<_> = backward
        .correspondences
        .iter()
        .map(|c| key(&c.swapped()))
        .collect();
    ensure(f == b, || format!("alignment not symmetric:\n{f:?}\n{b:?}"))?;
    ensure(
        forward.correspondences.len() == backward.correspondences.len(),
        || "correspondence counts differ".into(),
    )
}

pub fn check_transform_counts(model: &ComponentModel) -> Check {
    let onto = to_ontology(model).map_err(|e| e.to_string())?;
    let flat = model.flatten();
    let labels: BTreeSet<String> = model
        .structures
        .iter()
        .flat_map(|s| &s.concepts)
        .map(|c| normalize_label(&c.name).unwrap())
        .collect();
    let types: BTreeSet<&str> = flat
        .concepts
        .iter()
        .flat_map(|c| &c.attributes)
        .map(|a| a.value_type.as_str())
        .collect();
    let expected = labels.len() + 1 + types.len();
    ensure(concept_count(&onto) == expected, || {
        format!("concept count {} != {expected}", concept_count(&onto))
    })?;
    let isa = flat
        .relations
        .iter()
        .filter(|r| r.kind == RelationKind::Isa)
        .count();
    let other = flat.relations.len() - isa;
    let attrs: usize = flat.concepts.iter().map(|c| c.attributes.len()).sum();
    ensure(onto.isa_edges.len() == isa, || {
        format!("isa edges {} != {isa}", onto.isa_edges.len())
    })?;
    let expected_rel = other + attrs + flat.concepts.len();
    ensure(onto.rel_edges.len() == expected_rel, || {
        format!("relation edges {} != {expected_rel}", onto.rel_edges.len())
    })
}

/// Integrates with every conflict decided by its catalog default and checks
/// conservation plus the naming-conflict-free postcondition.
pub fn check_default_merge(models: &[ComponentModel]) -> Check {
    let res = resources();
    let params = AlignmentParams::default();
    let ontos: Vec<Ontology> = models.iter().map(|m| to_ontology(m).unwrap()).collect();
    let refs: Vec<&Ontology> = ontos.iter().collect();
    let co = bcfuse_core::align::align_many(&refs, &res, &params).map_err(|e| e.to_string())?;
    let mut conflicts = detect_conflicts(&co, &res.domain);
    ensure(conflicts.len() == co.correspondences.len(), || {
        "conflict count".into()
    })?;
    for c in &mut conflicts {
        c.status = ConflictStatus::Decided(c.default_action.clone());
    }
    let out = integrate(models, &conflicts).map_err(|e| e.to_string())?;
    let merged = &out.model.structures[0];
    let mut seen = BTreeSet::new();
    for c in &merged.concepts {
        let norm = normalize_label(&c.name).unwrap();
        ensure(seen.insert(norm), || format!("duplicate label {}", c.name))?;
    }

    let view = preview(models, &conflicts).map_err(|e| e.to_string())?;
    let view_names: Vec<&str> = view.concepts.iter().map(|c| c.name.as_str()).collect();
    let out_names: Vec<&str> = merged.concepts.iter().map(|c| c.name.as_str()).collect();
    ensure(view_names == out_names, || {
        "preview disagrees with integrate".into()
    })?;
    let mut owner: BTreeMap<(String, String), &str> = BTreeMap::new();
    for c in &view.concepts {
        for o in &c.origins {
            let prev = owner.insert((o.component.clone(), o.concept.clone()), &c.name);
            ensure(prev.is_none(), || format!("{o} owned twice"))?;
        }
    }
    for m in models {
        let flat = m.flatten();
        for c in &flat.concepts {
            let target = owner
                .get(&(m.name.clone(), c.name.clone()))
                .ok_or_else(|| format!("{}.{} lost", m.name, c.name))?;
            let out_concept = merged.concept(target).unwrap();
            for a in &c.attributes {
                let norm = normalize_label(&a.name).unwrap();
                let hits = out_concept
                    .attributes
                    .iter()
                    .filter(|x| normalize_label(&x.name).unwrap() == norm)
                    .count();
                ensure(hits == 1, || {
                    format!(
                        "{}.{}.{} appears {hits} times on {target}",
                        m.name, c.name, a.name
                    )
                })?;
            }
        }
        for r in &flat.relations {
            let s = owner[&(m.name.clone(), r.source.clone())];
            let t = owner[&(m.name.clone(), r.target.clone())];
            ensure(
                merged.relations.iter().any(|x| {
                    x.source == s && x.target == t && x.kind == r.kind && x.label == r.label
                }),
                || format!("relation {}->{} of {} dropped", r.source, r.target, m.name),
            )?;
        }
    }
    Ok(())
}

/// Merging a model with a renamed copy of itself, equivalents decided by
/// mergeConcepts, gives back the original concept labels.
pub fn check_self_merge(model: &ComponentModel) -> Check {
    let mut copy = model.clone();
    copy.name = format!("{}Copy", model.name);
    let models = vec![model.clone(), copy];
    let res = ResourceSet::default();
    let ontos: Vec<Ontology> = models.iter().map(|m| to_ontology(m).unwrap()).collect();
    let co = align_pair(&ontos[0], &ontos[1], &res, &AlignmentParams::default())
        .map_err(|e| e.to_string())?;
    let mut conflicts = detect_conflicts(&co, &res.domain);
    for c in &mut conflicts {
        ensure(
            c.correspondence.relation == bcfuse_core::align::RelationType::Equivalent,
            || format!("unexpected {} correspondence", c.correspondence.relation),
        )?;
        c.status = ConflictStatus::Decided(ResolutionAction::MergeConcepts);
    }
    let out = integrate(&models, &conflicts).map_err(|e| e.to_string())?;
    let got: BTreeSet<String> = out.model.structures[0]
        .concepts
        .iter()
        .map(|c| c.name.clone())
        .collect();
    let want: BTreeSet<String> = model
        .flatten()
        .concepts
        .into_iter()
        .map(|c| c.name)
        .collect();
    ensure(got == want, || format!("{got:?} != {want:?}"))
}

/// Sub-component of `model` from a random member subset.
pub fn random_subcomponent(rng: &mut StdRng, model: &ComponentModel) -> SubComponent {
    let names: Vec<String> = model
        .flatten()
        .concepts
        .into_iter()
        .map(|c| c.name)
        .collect();
    let k = rng.gen_range(1..=names.len());
    let members: Vec<String> = names.choose_multiple(rng, k).cloned().collect();
    SubComponent::new(model, members).unwrap()
}

/// A model whose concepts are a renamed permutation of `model`'s, so a
/// sub-component over the image is isomorphic by construction.
pub fn permuted_copy(
    rng: &mut StdRng,
    model: &ComponentModel,
) -> (ComponentModel, BTreeMap<String, String>) {
    let flat = model.flatten();
    let mut fresh: Vec<String> = (0..flat.concepts.len()).map(|i| format!("N{i}")).collect();
    fresh.shuffle(rng);
    let map: BTreeMap<String, String> = flat
        .concepts
        .iter()
        .map(|c| c.name.clone())
        .zip(fresh)
        .collect();
    let mut concepts: Vec<Concept> = flat
        .concepts
        .iter()
        .map(|c| Concept {
            name: map[&c.name].clone(),
            attributes: c.attributes.clone(),
        })
        .collect();
    concepts.shuffle(rng);
    let relations = flat
        .relations
        .iter()
        .map(|r| Relation {
            source: map[&r.source].clone(),
            target: map[&r.target].clone(),
            ..r.clone()
        })
        .collect();
    let copy = ComponentModel {
        name: format!("{}Perm", model.name),
        kind: model.kind,
        reuse: Reuse::Reusable,
        structures: vec![Structure {
            id: "main".into(),
            concepts,
            relations,
            services: vec![],
        }],
        provenance: Provenance::Inline,
    };
    (copy, map)
}

/// Outcome of one soundness trial.
pub struct IsoTrial {
    pub isomorphic: bool,
    pub verdict: Verdict,
}

/// One random pair; odd seeds build a permuted copy so that truly
/// isomorphic pairs are well represented.
pub fn iso_trial(seed: u64) -> Result<IsoTrial, String> {
    let mut r = rng(seed);
    let m1 = random_model(&mut r, "Left", 6);
    let s1 = random_subcomponent(&mut r, &m1);
    let s2 = if seed % 2 == 1 {
        let (m2, map) = permuted_copy(&mut r, &m1);
        let image: Vec<String> = s1.members().iter().map(|m| map[m].clone()).collect();
        SubComponent::new(&m2, image).unwrap()
    } else {
        let m2 = random_model(&mut r, "Right", 6);
        random_subcomponent(&mut r, &m2)
    };
    let verdict = non_iso_check(&s1, &s2);
    if verdict != non_iso_check(&s2, &s1) {
        return Err(format!("seed {seed}: verdict not symmetric"));
    }
    let isomorphic = brute_force_isomorphic(&s1, &s2).map_err(|e| e.to_string())?;
    if isomorphic != brute_force_isomorphic(&s2, &s1).map_err(|e| e.to_string())? {
        return Err(format!("seed {seed}: exhaustive search not symmetric"));
    }
    if seed % 2 == 1 && !isomorphic {
        return Err(format!("seed {seed}: permuted copy not found isomorphic"));
    }
    if isomorphic && verdict != Verdict::PossiblyIsomorphic {
        return Err(format!(
            "seed {seed}: isomorphic pair rejected by {verdict}"
        ));
    }
    Ok(IsoTrial {
        isomorphic,
        verdict,
    })
}
