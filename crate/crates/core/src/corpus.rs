//! Vertical-format corpus reading and preprocessing.
//!
//! Input is one token per line (`surface<TAB>lemma<TAB>pos`, further columns
//! ignored) with blank lines between sentences. Preprocessing maps every token
//! to a `lemma:POS` context key and deletes function-word tags and rare keys.
//! Deleted tokens close the gap, so later windows span deletion sites.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;

use rayon::prelude::*;
use thiserror::Error;

use crate::targets::TargetLexicon;

/// Separator between lemma and POS inside a context key.
pub const KEY_SEPARATOR: char = ':';

/// STTS function-word tags removed by default.
pub const DEFAULT_STOP_POS: &[&str] = &[
    "ART", "APPR", "APPRART", "APPO", "APZR", "KON", "KOUS", "KOUI", "KOKOM", "PTKZU", "PTKNEG",
    "PTKVZ", "PTKANT", "PTKA", "PPER", "PRF", "PPOSAT", "PDAT", "PIAT", "PRELS", "PWS", "PAV",
    "VAFIN", "VAINF", "VAIMP", "VAPP",
];

/// Frequency floor suggested for corpora of realistic size. The default
/// (`1`) deletes nothing.
pub const RECOMMENDED_MIN_COUNT: u64 = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {0}: expected at least 3 tab-separated fields (surface, lemma, pos)")]
    MalformedLine(usize),
    #[error("line {0}: empty field")]
    EmptyField(usize),
    #[error("line {0}: invalid UTF-8")]
    InvalidEncoding(usize),
    #[error("read error: {0}")]
    Io(String),
}

/// One annotated corpus token.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnnotatedToken {
    pub surface: String,
    pub lemma: String,
    pub pos: String,
}

impl AnnotatedToken {
    pub fn new(
        surface: impl Into<String>,
        lemma: impl Into<String>,
        pos: impl Into<String>,
    ) -> Self {
        Self {
            surface: surface.into(),
            lemma: lemma.into(),
            pos: pos.into(),
        }
    }
}

impl fmt::Display for AnnotatedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.surface, self.lemma, self.pos)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub tokens: Vec<AnnotatedToken>,
}

impl Sentence {
    pub fn new(tokens: Vec<AnnotatedToken>) -> Self {
        Self { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Deletion settings for [`apply_filters`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub stop_pos: BTreeSet<String>,
    /// Tokens whose key occurs fewer times than this in the corpus are removed.
    pub min_count: u64,
    /// Lowercase lemmas when building context keys.
    pub case_fold: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            stop_pos: DEFAULT_STOP_POS.iter().map(|s| s.to_string()).collect(),
            min_count: 1,
            case_fold: true,
        }
    }
}

impl PreprocessConfig {
    /// A configuration that deletes nothing.
    pub fn keep_all() -> Self {
        Self {
            stop_pos: BTreeSet::new(),
            min_count: 0,
            case_fold: true,
        }
    }
}

/// Streaming reader over a vertical corpus, yielding one sentence at a time.
pub struct VerticalReader<R> {
    inner: R,
    line_no: usize,
    buf: Vec<u8>,
    done: bool,
}

impl<R: BufRead> VerticalReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            line_no: 0,
            buf: Vec::new(),
            done: false,
        }
    }

    fn parse_line(&self, line: &str) -> Result<AnnotatedToken, CorpusError> {
        let mut fields = line.split('\t');
        let (surface, lemma, pos) = match (fields.next(), fields.next(), fields.next()) {
            (Some(s), Some(l), Some(p)) => (s, l, p),
            _ => return Err(CorpusError::MalformedLine(self.line_no)),
        };
        if surface.is_empty() || lemma.is_empty() || pos.is_empty() {
            return Err(CorpusError::EmptyField(self.line_no));
        }
        Ok(AnnotatedToken::new(surface, lemma, pos))
    }
}

impl<R: BufRead> Iterator for VerticalReader<R> {
    type Item = Result<Sentence, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut tokens = Vec::new();
        loop {
            self.buf.clear();
            let n = match self.inner.read_until(b'\n', &mut self.buf) {
                Ok(n) => n,
                Err(e) => {
                    self.done = true;
                    return Some(Err(CorpusError::Io(e.to_string())));
                }
            };
            if n == 0 {
                self.done = true;
                return if tokens.is_empty() {
                    None
                } else {
                    Some(Ok(Sentence::new(tokens)))
                };
            }
            self.line_no += 1;
            let line = match std::str::from_utf8(&self.buf) {
                Ok(s) => s.trim_end_matches(['\n', '\r']),
                Err(_) => {
                    self.done = true;
                    return Some(Err(CorpusError::InvalidEncoding(self.line_no)));
                }
            };
            if line.trim().is_empty() {
                if tokens.is_empty() {
                    continue;
                }
                return Some(Ok(Sentence::new(tokens)));
            }
            match self.parse_line(line) {
                Ok(tok) => tokens.push(tok),
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

/// Reads a whole vertical corpus into memory.
pub fn parse_vertical<R: BufRead>(reader: R) -> Result<Vec<Sentence>, CorpusError> {
    VerticalReader::new(reader).collect()
}

/// Writes sentences back in vertical format (three columns, blank line after
/// each sentence).
pub fn write_vertical(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        for t in &s.tokens {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Context key of a token: `lemma:POS`, with the lemma lowercased when
/// `case_fold` is set.
pub fn normalize(token: &AnnotatedToken, case_fold: bool) -> String {
    let mut key = String::with_capacity(token.lemma.len() + token.pos.len() + 1);
    if case_fold {
        key.push_str(&token.lemma.to_lowercase());
    } else {
        key.push_str(&token.lemma);
    }
    key.push(KEY_SEPARATOR);
    key.push_str(&token.pos);
    key
}

/// Corpus counts of normalized keys.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: &str, n: u64) {
        if let Some(c) = self.counts.get_mut(key) {
            *c += n;
        } else {
            self.counts.insert(key.to_owned(), n);
        }
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn merge(mut self, other: FrequencyTable) -> FrequencyTable {
        if self.counts.len() < other.counts.len() {
            return other.merge(self);
        }
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self
    }

    /// Entries sorted by key.
    pub fn sorted(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<_> = self.counts.iter().map(|(k, &c)| (k.as_str(), c)).collect();
        v.sort_unstable();
        v
    }
}

pub fn count_sentence_keys(table: &mut FrequencyTable, sentence: &Sentence, case_fold: bool) {
    for t in &sentence.tokens {
        table.add(&normalize(t, case_fold), 1);
    }
}

/// Exact corpus counts of normalized keys. Shards are counted in parallel and
/// merged; the result does not depend on the thread count.
pub fn build_frequency_table(sentences: &[Sentence], case_fold: bool) -> FrequencyTable {
    sentences
        .par_chunks(4096)
        .map(|chunk| {
            let mut t = FrequencyTable::new();
            for s in chunk {
                count_sentence_keys(&mut t, s, case_fold);
            }
            t
        })
        .reduce(FrequencyTable::new, FrequencyTable::merge)
}

/// Removes stop-POS and low-frequency tokens. Tokens inside a gold target
/// occurrence (matched on the unfiltered sentence) are never removed.
/// Sentences left empty are dropped.
///
/// Filtering is idempotent as long as no gold form ends with a proper prefix
/// of another form; otherwise closing a gap can re-segment matches.
pub fn apply_filters(
    sentences: &[Sentence],
    config: &PreprocessConfig,
    freq: &FrequencyTable,
    protected: Option<&TargetLexicon>,
) -> Vec<Sentence> {
    sentences
        .iter()
        .filter_map(|s| filter_sentence(s, config, freq, protected))
        .collect()
}

pub fn filter_sentence(
    sentence: &Sentence,
    config: &PreprocessConfig,
    freq: &FrequencyTable,
    protected: Option<&TargetLexicon>,
) -> Option<Sentence> {
    let mut keep = vec![false; sentence.len()];
    if let Some(lexicon) = protected {
        for m in lexicon.match_targets(sentence) {
            keep[m.start..=m.end].fill(true);
        }
    }
    let tokens: Vec<AnnotatedToken> = sentence
        .tokens
        .iter()
        .zip(keep)
        .filter(|(t, protect)| {
            *protect
                || (!config.stop_pos.contains(&t.pos)
                    && (config.min_count <= 1
                        || freq.get(&normalize(t, config.case_fold)) >= config.min_count))
        })
        .map(|(t, _)| t.clone())
        .collect();
    if tokens.is_empty() {
        None
    } else {
        Some(Sentence::new(tokens))
    }
}
