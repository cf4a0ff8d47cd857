//! Gold test set and target matching.
//!
//! A gold item is a (possibly multi-token) preposition such as `trotz` or
//! `am Rande` with a degree of grammaticalization from 1 (low) to 4 (high).
//! [`TargetLexicon`] compiles all forms into a first-key index and finds
//! non-overlapping occurrences left to right.

use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnnotatedToken, Sentence};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GoldError {
    #[error("line {line}: degree {value:?} is not one of 1, 2, 3, 4")]
    BadDegree { line: usize, value: String },
    #[error("line {line}: duplicate form {form:?}")]
    DuplicateForm { line: usize, form: String },
    #[error("line {0}: expected \"form<TAB>degree\"")]
    MalformedLine(usize),
    #[error("line {0}: invalid UTF-8")]
    InvalidEncoding(usize),
    #[error("read error: {0}")]
    Io(String),
}

/// Degree of grammaticalization, 1 (low) to 4 (high).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Degree(u8);

impl Degree {
    pub const ALL: [Degree; 4] = [Degree(1), Degree(2), Degree(3), Degree(4)];

    pub fn new(value: u8) -> Option<Self> {
        (1..=4).contains(&value).then_some(Degree(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Degree {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        Degree::new(v).ok_or_else(|| format!("degree {v} out of range 1..=4"))
    }
}

impl From<Degree> for u8 {
    fn from(d: Degree) -> u8 {
        d.0
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldItem {
    /// Canonical id: the form tokens joined by single spaces.
    pub id: String,
    pub form: Vec<String>,
    pub degree: Degree,
}

impl GoldItem {
    pub fn new(form: &str, degree: Degree) -> Self {
        let form: Vec<String> = form.split(' ').map(str::to_owned).collect();
        Self {
            id: form.join(" "),
            form,
            degree,
        }
    }
}

/// Gold items in file order, ids unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldSet {
    items: Vec<GoldItem>,
}

impl GoldSet {
    pub fn new(items: Vec<GoldItem>) -> Result<Self, GoldError> {
        let mut seen = HashSet::new();
        for (i, item) in items.iter().enumerate() {
            if !seen.insert(item.id.as_str()) {
                return Err(GoldError::DuplicateForm {
                    line: i + 1,
                    form: item.id.clone(),
                });
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[GoldItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&GoldItem> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn to_tsv(&self) -> String {
        self.items
            .iter()
            .map(|i| format!("{}\t{}\n", i.id, i.degree))
            .collect()
    }
}

/// Reads `form<TAB>degree` lines; `#` comments and blank lines are skipped.
pub fn load_goldset<R: BufRead>(mut reader: R) -> Result<GoldSet, GoldError> {
    let mut items = Vec::new();
    let mut seen = HashSet::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| GoldError::Io(e.to_string()))?
            == 0
        {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf)
            .map_err(|_| GoldError::InvalidEncoding(line_no))?
            .trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (form, degree) = line
            .split_once('\t')
            .ok_or(GoldError::MalformedLine(line_no))?;
        if form.is_empty() || form.split(' ').any(str::is_empty) || degree.contains('\t') {
            return Err(GoldError::MalformedLine(line_no));
        }
        let degree = u8::from_str(degree.trim())
            .ok()
            .and_then(Degree::new)
            .ok_or_else(|| GoldError::BadDegree {
                line: line_no,
                value: degree.to_owned(),
            })?;
        let item = GoldItem::new(form, degree);
        if !seen.insert(item.id.clone()) {
            return Err(GoldError::DuplicateForm {
                line: line_no,
                form: item.id,
            });
        }
        items.push(item);
    }
    Ok(GoldSet { items })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchField {
    #[default]
    Surface,
    Lemma,
}

impl FromStr for MatchField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "surface" => Ok(MatchField::Surface),
            "lemma" => Ok(MatchField::Lemma),
            other => Err(format!("unknown match field {other:?} (expected surface or lemma)")),
        }
    }
}

impl fmt::Display for MatchField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchField::Surface => "surface",
            MatchField::Lemma => "lemma",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchConfig {
    pub field: MatchField,
    pub case_fold: bool,
    pub longest_match: bool,
    /// When set, an occurrence only counts if its first token carries one of
    /// these tags.
    pub allowed_pos: Option<BTreeSet<String>>,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            field: MatchField::Surface,
            case_fold: true,
            longest_match: true,
            allowed_pos: None,
        }
    }
}

/// One target occurrence, `start..=end` in token positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetMatch {
    pub item: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
struct Entry {
    keys: Vec<String>,
    item: usize,
}

/// Compiled, immutable matcher over all gold forms.
#[derive(Debug, Clone)]
pub struct TargetLexicon {
    items: Vec<GoldItem>,
    config: MatchConfig,
    // first key -> entries, preferred entry first
    index: HashMap<String, Vec<Entry>>,
}

impl TargetLexicon {
    pub fn compile(gold: &GoldSet, config: MatchConfig) -> Self {
        let items = gold.items().to_vec();
        let mut index: HashMap<String, Vec<Entry>> = HashMap::new();
        for (item, g) in items.iter().enumerate() {
            let keys: Vec<String> = g.form.iter().map(|k| fold(k, config.case_fold).into_owned()).collect();
            index.entry(keys[0].clone()).or_default().push(Entry { keys, item });
        }
        for entries in index.values_mut() {
            if config.longest_match {
                entries.sort_by(|a, b| b.keys.len().cmp(&a.keys.len()).then(a.item.cmp(&b.item)));
            } else {
                entries.sort_by(|a, b| a.keys.len().cmp(&b.keys.len()).then(a.item.cmp(&b.item)));
            }
        }
        Self {
            items,
            config,
            index,
        }
    }

    pub fn items(&self) -> &[GoldItem] {
        &self.items
    }

    pub fn id(&self, item: usize) -> &str {
        &self.items[item].id
    }

    pub fn config(&self) -> &MatchConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Match key of a token under this lexicon's field and case settings.
    pub fn token_key<'a>(&self, token: &'a AnnotatedToken) -> Cow<'a, str> {
        let raw = match self.config.field {
            MatchField::Surface => &token.surface,
            MatchField::Lemma => &token.lemma,
        };
        fold(raw, self.config.case_fold)
    }

    /// Non-overlapping occurrences in `sentence`, scanned left to right.
    pub fn match_targets(&self, sentence: &Sentence) -> Vec<TargetMatch> {
        let tokens = &sentence.tokens;
        let keys: Vec<Cow<'_, str>> = tokens.iter().map(|t| self.token_key(t)).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < keys.len() {
            let hit = self.index.get(keys[i].as_ref()).and_then(|entries| {
                if let Some(allowed) = &self.config.allowed_pos {
                    if !allowed.contains(&tokens[i].pos) {
                        return None;
                    }
                }
                entries.iter().find(|e| {
                    i + e.keys.len() <= keys.len()
                        && e.keys.iter().zip(&keys[i..]).all(|(a, b)| a == b)
                })
            });
            match hit {
                Some(e) => {
                    let end = i + e.keys.len() - 1;
                    out.push(TargetMatch {
                        item: e.item,
                        start: i,
                        end,
                    });
                    i = end + 1;
                }
                None => i += 1,
            }
        }
        out
    }
}

/// Free-function form of [`TargetLexicon::match_targets`].
pub fn match_targets(sentence: &Sentence, lexicon: &TargetLexicon) -> Vec<TargetMatch> {
    lexicon.match_targets(sentence)
}

fn fold(s: &str, case_fold: bool) -> Cow<'_, str> {
    if case_fold && s.chars().any(char::is_uppercase) {
        Cow::Owned(s.to_lowercase())
    } else {
        Cow::Borrowed(s)
    }
}
