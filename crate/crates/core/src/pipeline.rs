//! End-to-end integration over raw file contents, shared by the batch
//! driver and the session service so both produce the same bytes.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::align::{
    align_many, alignment_export_string, AlignError, AlignmentParams, CorrespondenceOntology,
    ResourceSet,
};
use crate::ingest::{
    parse_bcm, parse_lexicon, parse_onto, serialize_bcm, BcmError, Lexicon, LexiconError, OntoError,
};
use crate::merge::{integrate, preview, IntegrationReport, MergeError, Preview};
use crate::model::ComponentModel;
use crate::resolve::{
    apply_recommendations, detect_conflicts, ActionHistory, Conflict, ConflictStatus, DecideError,
    HistoryRecord, HistoryStore, ResolutionAction, ResolveError,
};
use crate::transform::{to_ontology, Ontology, TransformError};

/// One component file: a display name (usually the path) and its text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSource {
    pub origin: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineInput {
    pub components: Vec<ComponentSource>,
    pub domain: String,
    pub lexicon: Option<String>,
    pub params: AlignmentParams,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{origin}: {error}")]
    Component { origin: String, error: BcmError },
    #[error("domain ontology: {0}")]
    Domain(#[from] OntoError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("at least one component is required")]
    NoComponents,
    #[error("component name `{0}` is used by more than one input")]
    DuplicateComponent(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error("decisions line {line}: {message}")]
    DecisionSyntax { line: usize, message: String },
    #[error("conflict {index} does not exist ({count} conflicts)")]
    NoSuchConflict { index: usize, count: usize },
    #[error("conflict {index}: {error}")]
    Decide { index: usize, error: DecideError },
}

/// An explicit designer choice for one conflict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub index: usize,
    pub action: ResolutionAction,
}

/// Parses `<conflictIndex>\t<action>` lines; blank lines and `#` comments
/// are skipped.
pub fn parse_decisions(text: &str) -> Result<Vec<Decision>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| PipelineError::DecisionSyntax {
            line: i + 1,
            message,
        };
        let (index, action) = trimmed
            .split_once(char::is_whitespace)
            .ok_or_else(|| err("expected `<index>\\t<action>`".into()))?;
        let index = index
            .parse()
            .map_err(|_| err(format!("`{index}` is not a conflict index")))?;
        let action = action
            .trim()
            .parse()
            .map_err(|e: ResolveError| err(e.to_string()))?;
        out.push(Decision { index, action });
    }
    Ok(out)
}

pub fn format_decisions(decisions: &[Decision]) -> String {
    let mut out = String::new();
    for d in decisions {
        let _ = writeln!(out, "{}\t{}", d.index, d.action);
    }
    out
}

/// The merged component as `.bcm` text plus the decision report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finalized {
    pub model: ComponentModel,
    pub bcm: String,
    pub report: IntegrationReport,
}

impl Finalized {
    pub fn report_text(&self) -> String {
        self.report.to_text()
    }
}

/// Parsed inputs, alignment and the conflicts awaiting decisions.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub models: Vec<ComponentModel>,
    pub ontologies: Vec<Ontology>,
    pub resources: ResourceSet,
    pub alignment: CorrespondenceOntology,
    pub conflicts: Vec<Conflict>,
}

impl Prepared {
    /// Parses and validates every input, aligns all component pairs and
    /// attaches history-based recommendations to the detected conflicts.
    pub fn new(input: &PipelineInput, history: &ActionHistory) -> Result<Self, PipelineError> {
        if input.components.is_empty() {
            return Err(PipelineError::NoComponents);
        }
        let mut models = Vec::with_capacity(input.components.len());
        let mut names = BTreeSet::new();
        for src in &input.components {
            let model = parse_bcm(&src.text).map_err(|error| PipelineError::Component {
                origin: src.origin.clone(),
                error,
            })?;
            if !names.insert(model.name.clone()) {
                return Err(PipelineError::DuplicateComponent(model.name));
            }
            models.push(model);
        }
        let resources = ResourceSet {
            domain: parse_onto(&input.domain)?,
            lexicon: match &input.lexicon {
                Some(text) => parse_lexicon(text)?,
                None => Lexicon::default(),
            },
        };
        let ontologies = models
            .iter()
            .map(to_ontology)
            .collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&Ontology> = ontologies.iter().collect();
        let alignment = align_many(&refs, &resources, &input.params)?;
        let mut conflicts = detect_conflicts(&alignment, &resources.domain);
        apply_recommendations(&mut conflicts, history);
        Ok(Prepared {
            models,
            ontologies,
            resources,
            alignment,
            conflicts,
        })
    }

    pub fn alignment_export(&self) -> String {
        alignment_export_string(&self.alignment)
    }

    pub fn pending(&self) -> Vec<usize> {
        self.conflicts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_pending())
            .map(|(i, _)| i)
            .collect()
    }

    /// Decides one conflict, persisting the choice to the store first.
    pub fn decide(
        &mut self,
        index: usize,
        action: ResolutionAction,
        store: &mut HistoryStore,
        timestamp: DateTime<Utc>,
    ) -> Result<HistoryRecord, PipelineError> {
        let count = self.conflicts.len();
        let conflict = self
            .conflicts
            .get_mut(index)
            .ok_or(PipelineError::NoSuchConflict { index, count })?;
        store
            .decide(conflict, action, timestamp)
            .map_err(|error| PipelineError::Decide { index, error })
    }

    /// Batch resolution: the explicit decisions are applied and recorded in
    /// order, then every conflict still pending takes its recommendation
    /// without being recorded.
    pub fn resolve_batch(
        &mut self,
        decisions: &[Decision],
        store: &mut HistoryStore,
        mut clock: impl FnMut() -> DateTime<Utc>,
    ) -> Result<(), PipelineError> {
        for d in decisions {
            self.decide(d.index, d.action.clone(), store, clock())?;
        }
        for c in self.conflicts.iter_mut().filter(|c| c.is_pending()) {
            c.status = ConflictStatus::Decided(c.recommended_action.clone());
        }
        Ok(())
    }

    pub fn preview(&self) -> Result<Preview, PipelineError> {
        Ok(preview(&self.models, &self.conflicts)?)
    }

    /// Merges with the current decisions; every conflict must be decided.
    pub fn finalize(&self) -> Result<Finalized, PipelineError> {
        let out = integrate(&self.models, &self.conflicts)?;
        let bcm = serialize_bcm(&out.model).map_err(|e| match e {
            BcmError::Invalid(f) => PipelineError::Merge(MergeError::Invalid(f)),
            other => PipelineError::Component {
                origin: out.model.name.clone(),
                error: other,
            },
        })?;
        Ok(Finalized {
            model: out.model,
            bcm,
            report: out.report,
        })
    }
}
