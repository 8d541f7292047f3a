//! Synonym lexicon: one synset per line, comma-separated terms.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::normalize_label;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Lexicon {
    pub synsets: Vec<BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lexicon line {line}: {message}")]
pub struct LexiconError {
    pub line: usize,
    pub message: String,
}

impl Lexicon {
    /// True when the two normalized labels appear together in some synset.
    pub fn share_synset(&self, a: &str, b: &str) -> bool {
        self.synsets.iter().any(|s| s.contains(a) && s.contains(b))
    }
}

pub fn parse_lexicon(text: &str) -> Result<Lexicon, LexiconError> {
    let mut synsets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut set = BTreeSet::new();
        for term in trimmed.split(',') {
            let norm = normalize_label(term).map_err(|_| LexiconError {
                line: i + 1,
                message: "empty term".to_string(),
            })?;
            set.insert(norm);
        }
        if set.len() < 2 {
            return Err(LexiconError {
                line: i + 1,
                message: format!(
                    "a synset needs at least two distinct terms, found {}",
                    set.len()
                ),
            });
        }
        synsets.push(set);
    }
    Ok(Lexicon { synsets })
}
