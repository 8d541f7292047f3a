//! Conflict detection, the resolution rule catalog, and the history-driven
//! action recommender.
//!
//! Every correspondence becomes a [`Conflict`]. The catalog supplies the
//! default action for its relation type; once designers have picked some
//! other action at least `threshold` times in the same context, that action
//! is recommended instead.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{Correspondence, CorrespondenceOntology, RelationType};
use crate::graph::bfs_distances;
use crate::merge::choose_rename_label;
use crate::model::{is_identifier, normalize_label};
use crate::transform::Ontology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ActionKind {
    RenameSame,
    RenameDifferent,
    MergeConcepts,
    DeleteOne,
    KeepBoth,
}

impl ActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::RenameSame => "renameSame",
            ActionKind::RenameDifferent => "renameDifferent",
            ActionKind::MergeConcepts => "mergeConcepts",
            ActionKind::DeleteOne => "deleteOne",
            ActionKind::KeepBoth => "keepBoth",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActionKind {
    type Err = ResolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "renameSame" => ActionKind::RenameSame,
            "renameDifferent" => ActionKind::RenameDifferent,
            "mergeConcepts" => ActionKind::MergeConcepts,
            "deleteOne" => ActionKind::DeleteOne,
            "keepBoth" => ActionKind::KeepBoth,
            _ => return Err(ResolveError::UnknownAction(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Source => "source",
            Side::Target => "target",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ResolutionAction {
    RenameSame {
        label: String,
    },
    #[serde(rename_all = "camelCase")]
    RenameDifferent {
        label_a: String,
        label_b: String,
    },
    MergeConcepts,
    DeleteOne {
        kept: Side,
    },
    KeepBoth,
}

impl ResolutionAction {
    pub fn kind(&self) -> ActionKind {
        match self {
            ResolutionAction::RenameSame { .. } => ActionKind::RenameSame,
            ResolutionAction::RenameDifferent { .. } => ActionKind::RenameDifferent,
            ResolutionAction::MergeConcepts => ActionKind::MergeConcepts,
            ResolutionAction::DeleteOne { .. } => ActionKind::DeleteOne,
            ResolutionAction::KeepBoth => ActionKind::KeepBoth,
        }
    }
}

/// Compact textual form, e.g. `renameSame(Paper)` or `deleteOne(source)`.
impl fmt::Display for ResolutionAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolutionAction::RenameSame { label } => write!(f, "renameSame({label})"),
            ResolutionAction::RenameDifferent { label_a, label_b } => {
                write!(f, "renameDifferent({label_a},{label_b})")
            }
            ResolutionAction::MergeConcepts => f.write_str("mergeConcepts"),
            ResolutionAction::DeleteOne { kept } => write!(f, "deleteOne({})", kept.as_str()),
            ResolutionAction::KeepBoth => f.write_str("keepBoth"),
        }
    }
}

impl FromStr for ResolutionAction {
    type Err = ResolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ResolveError::UnknownAction(s.to_string());
        let (name, args) = match s.split_once('(') {
            Some((name, rest)) => (name, Some(rest.strip_suffix(')').ok_or_else(bad)?)),
            None => (s, None),
        };
        let args: Vec<&str> = args
            .map(|a| a.split(',').map(str::trim).collect())
            .unwrap_or_default();
        Ok(match (name.parse::<ActionKind>()?, args.as_slice()) {
            (ActionKind::RenameSame, [label]) => ResolutionAction::RenameSame {
                label: label.to_string(),
            },
            (ActionKind::RenameDifferent, [a, b]) => ResolutionAction::RenameDifferent {
                label_a: a.to_string(),
                label_b: b.to_string(),
            },
            (ActionKind::MergeConcepts, []) => ResolutionAction::MergeConcepts,
            (ActionKind::DeleteOne, [side]) => ResolutionAction::DeleteOne {
                kept: match *side {
                    "source" => Side::Source,
                    "target" => Side::Target,
                    _ => return Err(bad()),
                },
            },
            (ActionKind::KeepBoth, []) => ResolutionAction::KeepBoth,
            _ => return Err(bad()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleCatalogEntry {
    pub relation: RelationType,
    pub default_action: ActionKind,
    pub alternatives: Vec<ActionKind>,
}

impl RuleCatalogEntry {
    pub fn allows(&self, kind: ActionKind) -> bool {
        self.default_action == kind || self.alternatives.contains(&kind)
    }
}

/// Synonyms are renamed to one name, homonyms apart; equivalents are merge
/// opportunities.
pub fn lookup_rule(relation: RelationType) -> RuleCatalogEntry {
    use ActionKind::*;
    let (default_action, alternatives) = match relation {
        RelationType::Synonym => (RenameSame, vec![MergeConcepts, DeleteOne, KeepBoth]),
        RelationType::Homonym => (RenameDifferent, vec![KeepBoth]),
        RelationType::Equivalent => (MergeConcepts, vec![KeepBoth, DeleteOne]),
    };
    RuleCatalogEntry {
        relation,
        default_action,
        alternatives,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "action", rename_all = "lowercase")]
pub enum ConflictStatus {
    Pending,
    Decided(ResolutionAction),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conflict {
    pub correspondence: Correspondence,
    pub context_key: String,
    pub default_action: ResolutionAction,
    pub recommended_action: ResolutionAction,
    pub status: ConflictStatus,
}

impl Conflict {
    pub fn rule(&self) -> RuleCatalogEntry {
        lookup_rule(self.correspondence.relation)
    }

    pub fn is_pending(&self) -> bool {
        self.status == ConflictStatus::Pending
    }

    pub fn decided_action(&self) -> Option<&ResolutionAction> {
        match &self.status {
            ConflictStatus::Decided(a) => Some(a),
            ConflictStatus::Pending => None,
        }
    }

    /// Concrete action of the given kind, with default parameters.
    pub fn instantiate(&self, kind: ActionKind) -> ResolutionAction {
        match kind {
            ActionKind::RenameSame => match &self.default_action {
                ResolutionAction::RenameSame { label } => ResolutionAction::RenameSame {
                    label: label.clone(),
                },
                _ => ResolutionAction::RenameSame {
                    label: fallback_common_label(&self.correspondence),
                },
            },
            ActionKind::RenameDifferent => {
                let (label_a, label_b) = split_labels(&self.correspondence);
                ResolutionAction::RenameDifferent { label_a, label_b }
            }
            ActionKind::MergeConcepts => ResolutionAction::MergeConcepts,
            ActionKind::DeleteOne => ResolutionAction::DeleteOne { kept: Side::Source },
            ActionKind::KeepBoth => ResolutionAction::KeepBoth,
        }
    }

    /// Checks that `action` is legal for this conflict's relation and well
    /// formed.
    pub fn check_action(&self, action: &ResolutionAction) -> Result<(), ResolveError> {
        let illegal = |reason: String| ResolveError::IllegalAction {
            action: action.to_string(),
            reason,
        };
        if !self.rule().allows(action.kind()) {
            return Err(illegal(format!(
                "not in the catalog for {} relations",
                self.correspondence.relation
            )));
        }
        match action {
            ResolutionAction::RenameSame { label } if !is_identifier(label) => {
                Err(illegal(format!("`{label}` is not an identifier")))
            }
            ResolutionAction::RenameDifferent { label_a, label_b } => {
                for l in [label_a, label_b] {
                    if !is_identifier(l) {
                        return Err(illegal(format!("`{l}` is not an identifier")));
                    }
                }
                if normalize_label(label_a) == normalize_label(label_b) {
                    return Err(illegal("labels must differ after normalization".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn component_suffix(component: &str) -> String {
    component.replace('+', "_")
}

/// Default labels for renaming the two sides apart: `<concept>_<component>`.
pub fn split_labels(c: &Correspondence) -> (String, String) {
    (
        format!(
            "{}_{}",
            c.source.concept,
            component_suffix(&c.source.component)
        ),
        format!(
            "{}_{}",
            c.target.concept,
            component_suffix(&c.target.component)
        ),
    )
}

fn fallback_common_label(c: &Correspondence) -> String {
    if c.source.concept <= c.target.concept {
        c.source.concept.clone()
    } else {
        c.target.concept.clone()
    }
}

/// Catalog default, instantiated for this correspondence.
pub fn default_action(c: &Correspondence, domain: &Ontology) -> ResolutionAction {
    match lookup_rule(c.relation).default_action {
        ActionKind::RenameSame => ResolutionAction::RenameSame {
            label: choose_rename_label(c, domain),
        },
        ActionKind::RenameDifferent => {
            let (label_a, label_b) = split_labels(c);
            ResolutionAction::RenameDifferent { label_a, label_b }
        }
        ActionKind::MergeConcepts => ResolutionAction::MergeConcepts,
        ActionKind::DeleteOne => ResolutionAction::DeleteOne { kept: Side::Source },
        ActionKind::KeepBoth => ResolutionAction::KeepBoth,
    }
}

/// Nearest common is-a ancestor (each concept is its own ancestor). The
/// nearest minimises the summed distance; ties go to the smaller id.
pub fn nearest_common_ancestor(a: &str, b: &str, domain: &Ontology) -> Option<String> {
    let from_a = bfs_distances(a, |n| domain.parents(n).collect::<Vec<_>>());
    let from_b = bfs_distances(b, |n| domain.parents(n).collect::<Vec<_>>());
    from_a
        .iter()
        .filter_map(|(node, da)| from_b.get(node).map(|db| (da + db, *node)))
        .min()
        .map(|(_, node)| node.to_string())
}

/// `<relation>|<nearest common ancestor of the anchors>`, with `unanchored`
/// when either side lacks an anchor and `unrelated` when the anchors share
/// no ancestor.
pub fn context_key(c: &Correspondence, domain: &Ontology) -> String {
    let scope = match (&c.source_anchor, &c.target_anchor) {
        (Some(a), Some(b)) => {
            nearest_common_ancestor(a, b, domain).unwrap_or_else(|| "unrelated".to_string())
        }
        _ => "unanchored".to_string(),
    };
    format!("{}|{}", c.relation, scope)
}

/// One conflict per correspondence, ordered by relation then source and
/// target. Recommendations start out equal to the catalog default.
pub fn detect_conflicts(co: &CorrespondenceOntology, domain: &Ontology) -> Vec<Conflict> {
    let mut corrs: Vec<&Correspondence> = co.correspondences.iter().collect();
    corrs.sort_by(|x, y| {
        (x.relation.as_str(), &x.source, &x.target).cmp(&(
            y.relation.as_str(),
            &y.source,
            &y.target,
        ))
    });
    corrs
        .into_iter()
        .map(|c| {
            let default = default_action(c, domain);
            Conflict {
                correspondence: c.clone(),
                context_key: context_key(c, domain),
                recommended_action: default.clone(),
                default_action: default,
                status: ConflictStatus::Pending,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub timestamp: DateTime<Utc>,
    pub relation: RelationType,
    pub context_key: String,
    pub action: ActionKind,
}

impl HistoryRecord {
    /// `<iso8601>\t<relation>\t<contextKey>\t<actionKind>`
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            self.timestamp.to_rfc3339_opts(SecondsFormat::Millis, true),
            self.relation,
            self.context_key,
            self.action
        )
    }

    pub fn parse_line(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [ts, relation, context_key, action] = fields.as_slice() else {
            return Err(format!(
                "expected 4 tab-separated fields, found {}",
                fields.len()
            ));
        };
        let timestamp = DateTime::parse_from_rfc3339(ts)
            .map_err(|e| format!("bad timestamp `{ts}`: {e}"))?
            .with_timezone(&Utc);
        let relation = RelationType::parse(relation)
            .ok_or_else(|| format!("unknown relation `{relation}`"))?;
        let action = action
            .parse::<ActionKind>()
            .map_err(|_| format!("unknown action `{action}`"))?;
        Ok(HistoryRecord {
            timestamp,
            relation,
            context_key: context_key.to_string(),
            action,
        })
    }
}

pub const DEFAULT_THRESHOLD: u32 = 3;

/// Append-only log of designer choices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionHistory {
    records: Vec<HistoryRecord>,
    threshold: u32,
}

impl Default for ActionHistory {
    fn default() -> Self {
        ActionHistory {
            records: Vec::new(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl ActionHistory {
    pub fn new(threshold: u32) -> Result<Self, ResolveError> {
        if threshold == 0 {
            return Err(ResolveError::BadThreshold);
        }
        Ok(ActionHistory {
            records: Vec::new(),
            threshold,
        })
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn records(&self) -> &[HistoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: HistoryRecord) {
        self.records.push(record);
    }

    pub fn parse(text: &str, threshold: u32) -> Result<Self, HistoryError> {
        let mut history = ActionHistory::new(threshold).map_err(|_| HistoryError::Parse {
            line: 0,
            message: "threshold must be at least 1".into(),
        })?;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record =
                HistoryRecord::parse_line(line).map_err(|message| HistoryError::Parse {
                    line: i + 1,
                    message,
                })?;
            history.records.push(record);
        }
        Ok(history)
    }

    pub fn to_text(&self) -> String {
        self.records.iter().map(|r| r.to_line() + "\n").collect()
    }
}

/// Recommended action for a conflict: the most frequent choice in the same
/// `(relation, context)` once its count reaches the threshold (ties go to
/// the most recently chosen action), otherwise the catalog default.
pub fn recommend(conflict: &Conflict, history: &ActionHistory) -> ResolutionAction {
    let rule = conflict.rule();
    // kind -> (count, most recent (timestamp, position))
    let mut tally: BTreeMap<ActionKind, (u32, (DateTime<Utc>, usize))> = BTreeMap::new();
    for (pos, r) in history.records.iter().enumerate() {
        if r.relation != conflict.correspondence.relation
            || r.context_key != conflict.context_key
            || !rule.allows(r.action)
        {
            continue;
        }
        let entry = tally.entry(r.action).or_insert((0, (r.timestamp, pos)));
        entry.0 += 1;
        entry.1 = entry.1.max((r.timestamp, pos));
    }
    let best = tally
        .into_iter()
        .filter(|(_, (count, _))| *count >= history.threshold)
        .max_by_key(|(_, (count, recent))| (*count, *recent));
    match best {
        Some((kind, _)) if kind != conflict.default_action.kind() => conflict.instantiate(kind),
        _ => conflict.default_action.clone(),
    }
}

/// Refreshes `recommended_action` of every conflict from the history.
pub fn apply_recommendations(conflicts: &mut [Conflict], history: &ActionHistory) {
    for c in conflicts {
        c.recommended_action = recommend(c, history);
    }
}

fn decision_record(
    conflict: &Conflict,
    action: &ResolutionAction,
    timestamp: DateTime<Utc>,
) -> Result<HistoryRecord, ResolveError> {
    if !conflict.is_pending() {
        return Err(ResolveError::AlreadyDecided);
    }
    conflict.check_action(action)?;
    Ok(HistoryRecord {
        timestamp,
        relation: conflict.correspondence.relation,
        context_key: conflict.context_key.clone(),
        action: action.kind(),
    })
}

/// Marks the conflict decided and appends the choice to the history.
pub fn record_decision(
    history: &mut ActionHistory,
    conflict: &mut Conflict,
    action: ResolutionAction,
    timestamp: DateTime<Utc>,
) -> Result<HistoryRecord, ResolveError> {
    let record = decision_record(conflict, &action, timestamp)?;
    conflict.status = ConflictStatus::Decided(action);
    history.push(record.clone());
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("conflict is already decided")]
    AlreadyDecided,
    #[error("illegal action {action}: {reason}")]
    IllegalAction { action: String, reason: String },
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("threshold must be at least 1")]
    BadThreshold,
}

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("history file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("history line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// An [`ActionHistory`] optionally mirrored to an append-only file.
#[derive(Debug)]
pub struct HistoryStore {
    path: Option<PathBuf>,
    history: ActionHistory,
}

impl HistoryStore {
    pub fn in_memory(history: ActionHistory) -> Self {
        HistoryStore {
            path: None,
            history,
        }
    }

    /// Loads the file if it exists; a missing file is an empty history.
    pub fn open(path: impl AsRef<Path>, threshold: u32) -> Result<Self, HistoryError> {
        let path = path.as_ref().to_path_buf();
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(source) => return Err(HistoryError::Io { path, source }),
        };
        let history = ActionHistory::parse(&text, threshold)?;
        Ok(HistoryStore {
            path: Some(path),
            history,
        })
    }

    pub fn history(&self) -> &ActionHistory {
        &self.history
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Writes the record to disk (when file-backed) before keeping it in
    /// memory.
    pub fn append(&mut self, record: HistoryRecord) -> Result<(), HistoryError> {
        if let Some(path) = &self.path {
            let io = |source| HistoryError::Io {
                path: path.clone(),
                source,
            };
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(io)?;
            writeln!(file, "{}", record.to_line()).map_err(io)?;
            file.flush().map_err(io)?;
        }
        self.history.push(record);
        Ok(())
    }

    /// [`record_decision`] against the store. The record is persisted
    /// before the conflict is marked decided.
    pub fn decide(
        &mut self,
        conflict: &mut Conflict,
        action: ResolutionAction,
        timestamp: DateTime<Utc>,
    ) -> Result<HistoryRecord, DecideError> {
        let record = decision_record(conflict, &action, timestamp)?;
        self.append(record.clone())?;
        conflict.status = ConflictStatus::Decided(action);
        Ok(record)
    }
}

#[derive(Debug, Error)]
pub enum DecideError {
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    History(#[from] HistoryError),
}
