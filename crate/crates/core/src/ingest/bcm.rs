//! The `.bcm` component-model format.
//!
//! ```text
//! component SubmissionMgr kind=entity reuse=reusable
//! structure main
//! concept Article
//!   attr title : string
//! concept Writer
//! relation Writer -> Article kind=assoc label=writes
//! service submit(title:string) : Receipt
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::cursor::{directive_lines, Cursor};
use crate::error::SyntaxError;
use crate::model::{
    validate, Attribute, ComponentKind, ComponentModel, Concept, Finding, Param, Provenance,
    Relation, RelationKind, Reuse, ServiceSignature, Structure,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BcmError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("invalid component model: {}", crate::format_findings(.0))]
    Invalid(Vec<Finding>),
}

/// Parses and validates a component model.
pub fn parse_bcm(text: &str) -> Result<ComponentModel, BcmError> {
    let model = parse_bcm_unchecked(text)?;
    let findings = validate(&model);
    if findings.is_empty() {
        Ok(model)
    } else {
        Err(BcmError::Invalid(findings))
    }
}

/// Syntactic parse only; semantic checks are left to [`validate`].
pub fn parse_bcm_unchecked(text: &str) -> Result<ComponentModel, BcmError> {
    let mut lines = directive_lines(text);
    let Some((line_no, header)) = lines.next() else {
        let last = text.lines().count().max(1);
        return Err(Cursor::new(last, "").error("`component` header").into());
    };
    let mut model = parse_header(&mut Cursor::new(line_no, header))?;

    // Index of the concept that `attr` lines attach to.
    let mut attr_target: Option<usize> = None;
    for (line_no, text) in lines {
        let mut cur = Cursor::new(line_no, text);
        let directive = cur.ident("directive")?;
        if directive == "structure" {
            let id = cur.ident("structure id")?;
            cur.finish()?;
            model.structures.push(Structure {
                id,
                ..Structure::default()
            });
            attr_target = None;
            continue;
        }
        let Some(structure) = model.structures.last_mut() else {
            return Err(Cursor::new(line_no, text).error("`structure`").into());
        };
        match directive.as_str() {
            "concept" => {
                let name = cur.ident("concept name")?;
                cur.finish()?;
                structure.concepts.push(Concept::new(name));
                attr_target = Some(structure.concepts.len() - 1);
            }
            "attr" => {
                let Some(idx) = attr_target else {
                    return Err(Cursor::new(line_no, text)
                        .error("`concept` before `attr`")
                        .into());
                };
                let name = cur.ident("attribute name")?;
                cur.expect(":")?;
                let value_type = cur.ident("attribute type")?;
                cur.finish()?;
                structure.concepts[idx]
                    .attributes
                    .push(Attribute { name, value_type });
            }
            "relation" => {
                structure.relations.push(parse_relation(&mut cur)?);
                attr_target = None;
            }
            "service" => {
                structure.services.push(parse_service(&mut cur)?);
                attr_target = None;
            }
            _ => {
                return Err(Cursor::new(line_no, text)
                    .error("`structure`, `concept`, `attr`, `relation` or `service`")
                    .into())
            }
        }
    }
    Ok(model)
}

fn parse_header(cur: &mut Cursor) -> Result<ComponentModel, SyntaxError> {
    cur.keyword("component")?;
    let name = cur.ident_with("component name", |c| c == '+')?;
    let mut kind = None;
    let mut reuse = None;
    while !cur.at_end() {
        let err = cur.error("`kind=` or `reuse=`");
        match cur.key("`kind=` or `reuse=`")?.as_str() {
            "kind" if kind.is_none() => {
                let err = cur.error("`entity` or `process`");
                kind = Some(match cur.ident("component kind")?.as_str() {
                    "entity" => ComponentKind::Entity,
                    "process" => ComponentKind::Process,
                    _ => return Err(err),
                });
            }
            "reuse" if reuse.is_none() => {
                let err = cur.error("`reusable` or `generic`");
                reuse = Some(match cur.ident("reuse")?.as_str() {
                    "reusable" => Reuse::Reusable,
                    "generic" => Reuse::Generic,
                    _ => return Err(err),
                });
            }
            _ => return Err(err),
        }
    }
    match (kind, reuse) {
        (Some(kind), Some(reuse)) => Ok(ComponentModel {
            name,
            kind,
            reuse,
            structures: Vec::new(),
            provenance: Provenance::Inline,
        }),
        (None, _) => Err(cur.error("`kind=`")),
        (_, None) => Err(cur.error("`reuse=`")),
    }
}

fn parse_relation(cur: &mut Cursor) -> Result<Relation, SyntaxError> {
    let source = cur.ident("source concept")?;
    cur.expect("->")?;
    let target = cur.ident("target concept")?;
    let mut kind = None;
    let mut label = None;
    let mut cardinality = None;
    while !cur.at_end() {
        let err = cur.error("`kind=`, `label=` or `card=`");
        match cur.key("`kind=`, `label=` or `card=`")?.as_str() {
            "kind" if kind.is_none() => {
                let err = cur.error("`assoc`, `isa` or `comp`");
                kind = Some(RelationKind::from_keyword(&cur.ident("relation kind")?).ok_or(err)?);
            }
            "label" if label.is_none() => label = Some(cur.ident("relation label")?),
            "card" if cardinality.is_none() => cardinality = Some(cur.word("cardinality")?),
            _ => return Err(err),
        }
    }
    let kind = kind.ok_or_else(|| cur.error("`kind=`"))?;
    Ok(Relation {
        source,
        target,
        kind,
        label,
        cardinality,
    })
}

fn parse_service(cur: &mut Cursor) -> Result<ServiceSignature, SyntaxError> {
    let name = cur.ident("service name")?;
    cur.expect("(")?;
    let mut params = Vec::new();
    if !cur.eat(")") {
        loop {
            let pname = cur.ident("parameter name")?;
            cur.expect(":")?;
            let value_type = cur.ident("parameter type")?;
            params.push(Param {
                name: pname,
                value_type,
            });
            if cur.eat(")") {
                break;
            }
            cur.expect(",")?;
        }
    }
    let return_type = if cur.eat(":") {
        Some(cur.ident("return type")?)
    } else {
        None
    };
    cur.finish()?;
    Ok(ServiceSignature {
        name,
        params,
        return_type,
    })
}

/// Canonical text: every collection sorted lexicographically, structures in
/// model order.
pub fn serialize_bcm(model: &ComponentModel) -> Result<String, BcmError> {
    let findings = validate(model);
    if !findings.is_empty() {
        return Err(BcmError::Invalid(findings));
    }
    let model = model.clone().canonical();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "component {} kind={} reuse={}",
        model.name,
        model.kind.as_str(),
        model.reuse.as_str()
    );
    for s in &model.structures {
        let _ = writeln!(out, "structure {}", s.id);
        for c in &s.concepts {
            let _ = writeln!(out, "concept {}", c.name);
            for a in &c.attributes {
                let _ = writeln!(out, "  attr {} : {}", a.name, a.value_type);
            }
        }
        for r in &s.relations {
            let _ = write!(
                out,
                "relation {} -> {} kind={}",
                r.source,
                r.target,
                r.kind.keyword()
            );
            if let Some(l) = &r.label {
                let _ = write!(out, " label={l}");
            }
            if let Some(c) = &r.cardinality {
                let _ = write!(out, " card={c}");
            }
            out.push('\n');
        }
        for svc in &s.services {
            let params: Vec<String> = svc
                .params
                .iter()
                .map(|p| format!("{}:{}", p.name, p.value_type))
                .collect();
            let _ = write!(out, "service {}({})", svc.name, params.join(", "));
            if let Some(rt) = &svc.return_type {
                let _ = write!(out, " : {rt}");
            }
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FindingCode;

    const BC1: &str = "\
# submission side
component SubmissionMgr kind=entity reuse=reusable
structure main
concept Article
  attr title : string
concept Writer
relation Writer -> Article kind=assoc label=writes
";

    #[test]
    fn parses_fixture() {
        let m = parse_bcm(BC1).unwrap();
        assert_eq!(m.name, "SubmissionMgr");
        assert_eq!(m.kind, ComponentKind::Entity);
        assert_eq!(m.reuse, Reuse::Reusable);
        let s = &m.structures[0];
        assert_eq!(s.concepts.len(), 2);
        assert_eq!(s.relations.len(), 1);
        assert_eq!(s.relations[0].label.as_deref(), Some("writes"));
        assert_eq!(
            s.concept("Article").unwrap().attributes[0].value_type,
            "string"
        );
    }

    #[test]
    fn empty_file_is_syntax_error_on_line_one() {
        match parse_bcm("") {
            Err(BcmError::Syntax(e)) => assert_eq!((e.line, e.column), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_concept_parses_then_fails_validation() {
        let text = format!("{BC1}concept Article\n");
        let unchecked = parse_bcm_unchecked(&text).unwrap();
        assert_eq!(unchecked.structures[0].concepts.len(), 3);
        match parse_bcm(&text) {
            Err(BcmError::Invalid(f)) => {
                assert_eq!(
                    f.iter().map(|f| f.code).collect::<Vec<_>>(),
                    vec![FindingCode::DupConcept]
                )
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_line_and_column() {
        let text =
            "component A kind=entity reuse=reusable\nstructure s\nrelation A => B kind=assoc\n";
        match parse_bcm(text) {
            Err(BcmError::Syntax(e)) => {
                assert_eq!((e.line, e.column), (3, 12));
                assert_eq!(e.expected, "`->`");
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "component A kind=thing reuse=reusable\n";
        match parse_bcm(text) {
            Err(BcmError::Syntax(e)) => assert_eq!((e.line, e.column), (1, 18)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn concept_before_structure_is_rejected() {
        let err = parse_bcm("component A kind=entity reuse=reusable\nconcept X\n").unwrap_err();
        assert!(matches!(err, BcmError::Syntax(SyntaxError { line: 2, .. })));
    }

    #[test]
    fn services_and_cardinalities() {
        let text = "component A kind=process reuse=generic\nstructure s1\nconcept X\nconcept Y\n\
                    relation X -> Y kind=comp card=0..*\nservice ping()\n\
                    service submit(a:int, b:Text) : Receipt\nstructure s2\n";
        let m = parse_bcm(text).unwrap();
        assert_eq!(m.structures.len(), 2);
        let s = &m.structures[0];
        assert_eq!(s.relations[0].cardinality.as_deref(), Some("0..*"));
        assert_eq!(s.services[1].params.len(), 2);
        assert_eq!(s.services[1].return_type.as_deref(), Some("Receipt"));
        let back = parse_bcm(&serialize_bcm(&m).unwrap()).unwrap();
        assert_eq!(back, m.canonical());
    }

    #[test]
    fn serializes_canonically() {
        let m = parse_bcm(BC1).unwrap();
        let text = serialize_bcm(&m).unwrap();
        assert_eq!(
            text,
            "component SubmissionMgr kind=entity reuse=reusable\nstructure main\nconcept Article\n  \
             attr title : string\nconcept Writer\nrelation Writer -> Article kind=assoc label=writes\n"
        );
        assert_eq!(parse_bcm(&text).unwrap(), m);
    }

    #[test]
    fn zero_concepts_serializes_header_only() {
        let m = parse_bcm("component Empty kind=entity reuse=reusable\nstructure main\n").unwrap();
        assert_eq!(
            serialize_bcm(&m).unwrap(),
            "component Empty kind=entity reuse=reusable\nstructure main\n"
        );
    }

    #[test]
    fn serialize_rejects_invalid_model() {
        let mut m = parse_bcm(BC1).unwrap();
        m.structures.push(m.structures[0].clone());
        assert!(matches!(serialize_bcm(&m), Err(BcmError::Invalid(_))));
    }
}
