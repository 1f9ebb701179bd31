//! Data-file lookup.
//!
//! Every table ships embedded in the library. When `ONOMA_DATA_DIR` is set,
//! a file of the same name in that directory replaces the embedded copy;
//! files missing from the directory fall back to the embedded ones.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::evalsuite::{EvalError, PredicateTable};
use crate::motion::{MotionError, Skeleton};
use crate::phonology::{PhonologyError, PhonologyTables};
use crate::symbolism::{RuleTable, ScaleRegistry, SymbolismError};

pub const DATA_DIR_ENV: &str = "ONOMA_DATA_DIR";

pub const FOLDING_FILE: &str = "folding.tsv";
pub const CONSONANTS_FILE: &str = "consonants.tsv";
pub const SCALES_FILE: &str = "scales.tsv";
pub const RULES_FILE: &str = "rules.json";
pub const SKELETON_FILE: &str = "skeleton.tsv";
pub const PREDICATES_FILE: &str = "predicates.tsv";

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}: {source}")]
    Phonology { file: &'static str, source: PhonologyError },
    #[error("{file}: {source}")]
    Symbolism { file: &'static str, source: SymbolismError },
    #[error("{file}: {source}")]
    Motion { file: &'static str, source: MotionError },
    #[error("{file}: {source}")]
    Eval { file: &'static str, source: EvalError },
}

/// Where overrides are read from; `None` means embedded data only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DataDir(pub Option<PathBuf>);

impl DataDir {
    pub fn from_env() -> Self {
        DataDir(std::env::var_os(DATA_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
    }

    pub fn embedded() -> Self {
        DataDir(None)
    }

    pub fn at(dir: impl AsRef<Path>) -> Self {
        DataDir(Some(dir.as_ref().to_path_buf()))
    }

    fn read(&self, file: &str) -> Result<Option<String>, ResourceError> {
        let Some(dir) = &self.0 else { return Ok(None) };
        let path = dir.join(file);
        if !path.is_file() {
            return Ok(None);
        }
        std::fs::read_to_string(&path)
            .map(Some)
            .map_err(|source| ResourceError::Io { path, source })
    }

    pub fn phonology(&self) -> Result<PhonologyTables, ResourceError> {
        let folding = self.read(FOLDING_FILE)?;
        let consonants = self.read(CONSONANTS_FILE)?;
        if folding.is_none() && consonants.is_none() {
            return Ok(PhonologyTables::default());
        }
        let folding = folding.unwrap_or_else(|| include_str!("../data/folding.tsv").to_string());
        let consonants = consonants.unwrap_or_else(|| include_str!("../data/consonants.tsv").to_string());
        PhonologyTables::from_tsv(&folding, &consonants).map_err(|source| ResourceError::Phonology {
            file: FOLDING_FILE,
            source,
        })
    }

    pub fn scales(&self) -> Result<ScaleRegistry, ResourceError> {
        match self.read(SCALES_FILE)? {
            None => Ok(ScaleRegistry::default()),
            Some(t) => ScaleRegistry::from_tsv(&t).map_err(|source| ResourceError::Symbolism {
                file: SCALES_FILE,
                source,
            }),
        }
    }

    pub fn rules(&self) -> Result<RuleTable, ResourceError> {
        match self.read(RULES_FILE)? {
            None => Ok(RuleTable::default()),
            Some(t) => RuleTable::from_json(&t).map_err(|source| ResourceError::Symbolism {
                file: RULES_FILE,
                source,
            }),
        }
    }

    pub fn skeleton(&self) -> Result<Skeleton, ResourceError> {
        match self.read(SKELETON_FILE)? {
            None => Ok(Skeleton::default_body()),
            Some(t) => Skeleton::from_tsv(&t).map_err(|source| ResourceError::Motion {
                file: SKELETON_FILE,
                source,
            }),
        }
    }

    pub fn predicates(&self) -> Result<PredicateTable, ResourceError> {
        match self.read(PREDICATES_FILE)? {
            None => Ok(PredicateTable::default()),
            Some(t) => PredicateTable::from_tsv(&t).map_err(|source| ResourceError::Eval {
                file: PREDICATES_FILE,
                source,
            }),
        }
    }
}
