//! Corpus files: a JSON array of named equations with expected verdicts.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use mongeampere_core::expr::parse;
use mongeampere_core::tensor::MAX_DIM;
use mongeampere_core::{ExprError, MaKind};

#[derive(Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub name: String,
    pub n: usize,
    pub expression: String,
    pub expected_classification: String,
    pub expected_exceptional: bool,
    #[serde(default)]
    pub notes: String,
}

impl CorpusEntry {
    pub fn expected_kind(&self) -> MaKind {
        MaKind::from_name(&self.expected_classification).expect("validated on load")
    }
}

#[derive(Debug)]
pub enum CorpusError {
    Io { path: PathBuf, source: std::io::Error },
    Json(serde_json::Error),
    Empty,
    DuplicateName(String),
    UnknownClassification { name: String, value: String },
    Dimension { name: String, n: usize },
    Expression { name: String, error: ExprError },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::Io { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            CorpusError::Json(e) => write!(f, "corpus is not a valid entry list: {e}"),
            CorpusError::Empty => f.write_str("corpus has no entries"),
            CorpusError::DuplicateName(n) => write!(f, "duplicate entry name `{n}`"),
            CorpusError::UnknownClassification { name, value } => write!(
                f,
                "entry `{name}`: expected_classification `{value}` is not one of \
                 linear, quasi-linear, monge-ampere, non-monge-ampere"
            ),
            CorpusError::Dimension { name, n } => {
                write!(f, "entry `{name}`: n = {n} is outside 2..={MAX_DIM}")
            }
            CorpusError::Expression { name, error } => write!(f, "entry `{name}`: {error}"),
        }
    }
}

impl std::error::Error for CorpusError {}

/// Parses and validates corpus text.
pub fn from_str(text: &str) -> Result<Vec<CorpusEntry>, CorpusError> {
    let entries: Vec<CorpusEntry> = serde_json::from_str(text).map_err(CorpusError::Json)?;
    if entries.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut names = HashSet::new();
    for e in &entries {
        if !names.insert(e.name.as_str()) {
            return Err(CorpusError::DuplicateName(e.name.clone()));
        }
        if MaKind::from_name(&e.expected_classification).is_none() {
            return Err(CorpusError::UnknownClassification {
                name: e.name.clone(),
                value: e.expected_classification.clone(),
            });
        }
        if !(2..=MAX_DIM).contains(&e.n) {
            return Err(CorpusError::Dimension { name: e.name.clone(), n: e.n });
        }
        parse(&e.expression, e.n).map_err(|error| CorpusError::Expression {
            name: e.name.clone(),
            error,
        })?;
    }
    Ok(entries)
}

pub fn load(path: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_str(&text)
}

/// The corpus shipped with the tool.
pub const BUNDLED: &str = include_str!("../corpus/bundled.json");

/// Seed for one entry: FNV-1a of the name folded into the global seed,
/// then mixed with the splitmix64 finalizer.
pub fn entry_seed(global: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = global ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_corpus_is_valid() {
        let c = from_str(BUNDLED).unwrap();
        assert_eq!(c.len(), 10);
    }

    #[test]
    fn rejects_bad_corpora() {
        assert!(matches!(from_str("[]"), Err(CorpusError::Empty)));
        assert!(matches!(from_str("{}"), Err(CorpusError::Json(_))));
        let e = r#"{"name":"a","n":2,"expression":"u11","expected_classification":"linear","expected_exceptional":true}"#;
        assert!(matches!(from_str(&format!("[{e},{e}]")), Err(CorpusError::DuplicateName(_))));
        let bad = e.replace("\"linear\"", "\"elliptic\"");
        assert!(matches!(from_str(&format!("[{bad}]")), Err(CorpusError::UnknownClassification { .. })));
        let bad = e.replace("\"u11\"", "\"u11+*u22\"");
        assert!(matches!(from_str(&format!("[{bad}]")), Err(CorpusError::Expression { .. })));
        let bad = e.replace("\"n\":2", "\"n\":5");
        assert!(matches!(from_str(&format!("[{bad}]")), Err(CorpusError::Dimension { .. })));
        let bad = e.replace("\"n\":2", "\"n\":2,\"extra\":1");
        assert!(matches!(from_str(&format!("[{bad}]")), Err(CorpusError::Json(_))));
    }

    #[test]
    fn seeds_depend_on_name_and_global_seed() {
        assert_eq!(entry_seed(42, "wave"), entry_seed(42, "wave"));
        assert_ne!(entry_seed(42, "wave"), entry_seed(42, "laplace"));
        assert_ne!(entry_seed(42, "wave"), entry_seed(43, "wave"));
    }
}
