//! Parsers and serializers for the three input formats: component models
//! (`.bcm`), ontologies (`.onto`) and synonym lexicons (`.syn`).

mod bcm;
mod cursor;
mod lexicon;
mod onto;

pub use bcm::{parse_bcm, parse_bcm_unchecked, serialize_bcm, BcmError};
pub use lexicon::{parse_lexicon, Lexicon, LexiconError};
pub use onto::{parse_onto, serialize_onto, OntoError};
