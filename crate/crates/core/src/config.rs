//! Fully resolved run configuration and its fingerprints.
//!
//! Settings come from defaults, then an optional `key=value` file, then
//! explicit overrides (environment or flags). The fingerprint is a digest of
//! the canonical `key=value` rendering, so artifacts produced under different
//! settings cannot be mixed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{PreprocessConfig, DEFAULT_STOP_POS};
use crate::targets::{MatchConfig, MatchField};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("config line {0}: expected key=value")]
    MalformedLine(usize),
}

/// How AP treats items with equal scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieMode {
    /// Equal scores ordered by ascending target id.
    #[default]
    IdOrder,
    /// Expected AP over uniformly random orders within tie groups.
    Expected,
}

impl fmt::Display for TieMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieMode::IdOrder => "id",
            TieMode::Expected => "expected",
        })
    }
}

impl FromStr for TieMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "id" => Ok(TieMode::IdOrder),
            "expected" => Ok(TieMode::Expected),
            other => Err(format!("unknown tie mode {other:?} (expected id or expected)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub window: usize,
    pub min_count: u64,
    pub stop_pos: BTreeSet<String>,
    pub log_base: f64,
    pub match_field: MatchField,
    pub case_fold: bool,
    pub longest_match: bool,
    pub allowed_pos: Option<BTreeSet<String>>,
    /// Count target occurrences in the unfiltered corpus.
    pub count_unfiltered: bool,
    /// Keep zero-frequency gold items in the evaluation.
    pub include_missing: bool,
    pub ap_ties: TieMode,
    pub output_dir: PathBuf,
    /// Worker threads; 0 means all available cores.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            window: 2,
            min_count: 1,
            stop_pos: DEFAULT_STOP_POS.iter().map(|s| s.to_string()).collect(),
            log_base: 2.0,
            match_field: MatchField::Surface,
            case_fold: true,
            longest_match: true,
            allowed_pos: None,
            count_unfiltered: false,
            include_missing: true,
            ap_ties: TieMode::IdOrder,
            output_dir: PathBuf::from("out"),
            threads: 0,
        }
    }
}

/// Keys accepted by [`RunConfig::set`], in canonical order.
pub const KEYS: &[&str] = &[
    "window",
    "min_count",
    "stop_pos",
    "match_field",
    "case_fold",
    "longest_match",
    "allowed_pos",
    "count_unfiltered",
    "log_base",
    "include_missing",
    "ap_ties",
    "output_dir",
    "threads",
];

// keys that influence counting
const COUNT_KEYS: &[&str] = &[
    "window",
    "min_count",
    "stop_pos",
    "match_field",
    "case_fold",
    "longest_match",
    "allowed_pos",
    "count_unfiltered",
];

fn join_set(set: &BTreeSet<String>) -> String {
    set.iter().cloned().collect::<Vec<_>>().join(",")
}

fn parse_set(value: &str) -> BTreeSet<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

fn parse_bool(value: &str) -> Option<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let bad = |reason: &str| ConfigError::BadValue {
            key: key.to_owned(),
            value: value.to_owned(),
            reason: reason.to_owned(),
        };
        match key {
            "window" => {
                let w: usize = value.parse().map_err(|_| bad("not a positive integer"))?;
                if w == 0 {
                    return Err(bad("window must be at least 1"));
                }
                self.window = w;
            }
            "min_count" => self.min_count = value.parse().map_err(|_| bad("not a nonnegative integer"))?,
            "stop_pos" => self.stop_pos = parse_set(value),
            "log_base" => {
                let b: f64 = value.parse().map_err(|_| bad("not a number"))?;
                if !(b.is_finite() && b > 1.0) {
                    return Err(bad("log base must be greater than 1"));
                }
                self.log_base = b;
            }
            "match_field" => self.match_field = value.parse().map_err(|e: String| bad(&e))?,
            "case_fold" => self.case_fold = parse_bool(value).ok_or_else(|| bad("not a boolean"))?,
            "longest_match" => {
                self.longest_match = parse_bool(value).ok_or_else(|| bad("not a boolean"))?
            }
            "allowed_pos" => {
                let set = parse_set(value);
                self.allowed_pos = (!set.is_empty()).then_some(set);
            }
            "count_unfiltered" => {
                self.count_unfiltered = parse_bool(value).ok_or_else(|| bad("not a boolean"))?
            }
            "include_missing" => {
                self.include_missing = parse_bool(value).ok_or_else(|| bad("not a boolean"))?
            }
            "ap_ties" => self.ap_ties = value.parse().map_err(|e: String| bad(&e))?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "threads" => self.threads = value.parse().map_err(|_| bad("not a nonnegative integer"))?,
            other => return Err(ConfigError::UnknownKey(other.to_owned())),
        }
        Ok(())
    }

    /// Applies a `key=value` file; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::MalformedLine(i + 1))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "window" => self.window.to_string(),
            "min_count" => self.min_count.to_string(),
            "stop_pos" => join_set(&self.stop_pos),
            "log_base" => self.log_base.to_string(),
            "match_field" => self.match_field.to_string(),
            "case_fold" => self.case_fold.to_string(),
            "longest_match" => self.longest_match.to_string(),
            "allowed_pos" => self.allowed_pos.as_ref().map(join_set).unwrap_or_default(),
            "count_unfiltered" => self.count_unfiltered.to_string(),
            "include_missing" => self.include_missing.to_string(),
            "ap_ties" => self.ap_ties.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            "threads" => self.threads.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Settings that influence output bytes, in canonical order. Output
    /// location and thread count are excluded.
    pub fn pairs(&self) -> Vec<(String, String)> {
        KEYS.iter()
            .filter(|k| !matches!(**k, "output_dir" | "threads"))
            .map(|k| (k.to_string(), self.value_of(k)))
            .collect()
    }

    pub fn count_pairs(&self) -> Vec<(String, String)> {
        COUNT_KEYS.iter().map(|k| (k.to_string(), self.value_of(k))).collect()
    }

    /// Digest of all output-relevant settings.
    pub fn fingerprint(&self) -> String {
        digest(&self.pairs())
    }

    /// Digest of the settings that influence co-occurrence counts.
    pub fn count_fingerprint(&self) -> String {
        digest(&self.count_pairs())
    }

    pub fn pairs_map(&self) -> BTreeMap<String, String> {
        self.pairs().into_iter().collect()
    }

    pub fn preprocess(&self) -> PreprocessConfig {
        PreprocessConfig {
            stop_pos: self.stop_pos.clone(),
            min_count: self.min_count,
            case_fold: self.case_fold,
        }
    }

    pub fn match_config(&self) -> MatchConfig {
        MatchConfig {
            field: self.match_field,
            case_fold: self.case_fold,
            longest_match: self.longest_match,
            allowed_pos: self.allowed_pos.clone(),
        }
    }
}

fn digest(pairs: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    for (k, v) in pairs {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}
