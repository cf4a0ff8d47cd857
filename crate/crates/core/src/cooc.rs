//! Symmetric window co-occurrence counts for gold targets.
//!
//! For a match spanning tokens `i..=j`, the tokens at `i-w..i` and
//! `j+1..=j+w` (clipped to the sentence) each add one to the target's count
//! for their context key. Windows never cross sentence boundaries and are not
//! distance weighted. Other gold targets inside the window count like any
//! other word.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{normalize, Sentence};
use crate::targets::TargetLexicon;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoocError {
    #[error("cannot merge counts: {0}")]
    FingerprintMismatch(String),
    #[error("counts line {0}: expected \"target<TAB>context<TAB>count\"")]
    MalformedLine(usize),
    #[error("counts line {line}: target {target:?} is not listed in the metadata")]
    UnknownTarget { line: usize, target: String },
    #[error("bad counts metadata: {0}")]
    BadSidecar(String),
}

/// Order-independent digest of a corpus: the wrapping sum of per-sentence
/// SHA-256 prefixes. Concatenating corpora adds their digests, so merged
/// shard tables carry the digest of the whole corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CorpusDigest(pub u128);

impl CorpusDigest {
    pub fn of_sentence(sentence: &Sentence) -> Self {
        let mut h = Sha256::new();
        for t in &sentence.tokens {
            h.update(t.surface.as_bytes());
            h.update(b"\t");
            h.update(t.lemma.as_bytes());
            h.update(b"\t");
            h.update(t.pos.as_bytes());
            h.update(b"\n");
        }
        let out = h.finalize();
        let mut bytes = [0u8; 16];
        bytes.copy_from_slice(&out[..16]);
        CorpusDigest(u128::from_be_bytes(bytes))
    }

    pub fn of_corpus(sentences: &[Sentence]) -> Self {
        sentences
            .iter()
            .fold(CorpusDigest::default(), |d, s| d.combine(CorpusDigest::of_sentence(s)))
    }

    pub fn combine(self, other: CorpusDigest) -> CorpusDigest {
        CorpusDigest(self.0.wrapping_add(other.0))
    }

    pub fn to_hex(self) -> String {
        format!("{:032x}", self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        u128::from_str_radix(s, 16).ok().map(CorpusDigest)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TargetCounts {
    pub occurrences: u64,
    pub contexts: HashMap<String, u64>,
}

impl TargetCounts {
    pub fn context_total(&self) -> u64 {
        self.contexts.values().sum()
    }
}

/// Per-target context counts and occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoocTable {
    window: usize,
    config_fingerprint: String,
    corpus_digest: CorpusDigest,
    rows: BTreeMap<String, TargetCounts>,
}

impl CoocTable {
    /// Table with a zero row for every lexicon item.
    pub fn empty(lexicon: &TargetLexicon, window: usize) -> Self {
        assert!(window >= 1, "window must be at least 1");
        Self {
            window,
            config_fingerprint: String::new(),
            corpus_digest: CorpusDigest::default(),
            rows: lexicon
                .items()
                .iter()
                .map(|g| (g.id.clone(), TargetCounts::default()))
                .collect(),
        }
    }

    pub fn with_config_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.config_fingerprint = fingerprint.into();
        self
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn config_fingerprint(&self) -> &str {
        &self.config_fingerprint
    }

    pub fn corpus_digest(&self) -> CorpusDigest {
        self.corpus_digest
    }

    pub fn rows(&self) -> &BTreeMap<String, TargetCounts> {
        &self.rows
    }

    pub fn get(&self, id: &str) -> Option<&TargetCounts> {
        self.rows.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    /// Replaces occurrence counts, e.g. with counts from the unfiltered corpus.
    pub fn set_occurrences(&mut self, occurrences: &BTreeMap<String, u64>) {
        for (id, row) in self.rows.iter_mut() {
            row.occurrences = occurrences.get(id).copied().unwrap_or(0);
        }
    }

    /// Adds one sentence to the table.
    pub fn add_sentence(&mut self, sentence: &Sentence, lexicon: &TargetLexicon, case_fold: bool) {
        self.corpus_digest = self.corpus_digest.combine(CorpusDigest::of_sentence(sentence));
        let matches = lexicon.match_targets(sentence);
        if matches.is_empty() {
            return;
        }
        let n = sentence.len();
        let mut keys: Vec<Option<String>> = vec![None; n];
        for m in matches {
            let row = self
                .rows
                .entry(lexicon.id(m.item).to_owned())
                .or_default();
            row.occurrences += 1;
            let left = m.start.saturating_sub(self.window)..m.start;
            let right = (m.end + 1)..(m.end + 1 + self.window).min(n);
            for pos in left.chain(right) {
                let key = keys[pos].get_or_insert_with(|| normalize(&sentence.tokens[pos], case_fold));
                if let Some(c) = row.contexts.get_mut(key.as_str()) {
                    *c += 1;
                } else {
                    row.contexts.insert(key.clone(), 1);
                }
            }
        }
    }

    /// Pointwise sum of two tables built under the same window and
    /// configuration.
    pub fn merge(mut self, other: CoocTable) -> Result<CoocTable, CoocError> {
        if self.window != other.window {
            return Err(CoocError::FingerprintMismatch(format!(
                "window {} vs {}",
                self.window, other.window
            )));
        }
        if self.config_fingerprint != other.config_fingerprint {
            return Err(CoocError::FingerprintMismatch(format!(
                "config {:?} vs {:?}",
                self.config_fingerprint, other.config_fingerprint
            )));
        }
        self.corpus_digest = self.corpus_digest.combine(other.corpus_digest);
        for (id, theirs) in other.rows {
            match self.rows.get_mut(&id) {
                None => {
                    self.rows.insert(id, theirs);
                }
                Some(mine) => {
                    mine.occurrences += theirs.occurrences;
                    for (k, v) in theirs.contexts {
                        *mine.contexts.entry(k).or_insert(0) += v;
                    }
                }
            }
        }
        Ok(self)
    }

    /// `target<TAB>context<TAB>count` lines sorted by target then context,
    /// preceded by `# key=value` header lines.
    pub fn to_tsv(&self, header: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in header {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("target\tcontext\tcount\n");
        for (id, row) in &self.rows {
            let mut ctx: Vec<_> = row.contexts.iter().collect();
            ctx.sort_unstable();
            for (key, count) in ctx {
                let _ = writeln!(out, "{id}\t{key}\t{count}");
            }
        }
        out
    }

    pub fn sidecar(&self, config: &BTreeMap<String, String>) -> CountsSidecar {
        CountsSidecar {
            window: self.window,
            config_fingerprint: self.config_fingerprint.clone(),
            corpus_digest: self.corpus_digest.to_hex(),
            occurrences: self
                .rows
                .iter()
                .map(|(id, r)| (id.clone(), r.occurrences))
                .collect(),
            config: config.clone(),
        }
    }

    /// Rebuilds a table from its TSV and metadata sidecar.
    pub fn from_serialized(tsv: &str, sidecar: &CountsSidecar) -> Result<CoocTable, CoocError> {
        if sidecar.window == 0 {
            return Err(CoocError::BadSidecar("window must be at least 1".into()));
        }
        let corpus_digest = CorpusDigest::from_hex(&sidecar.corpus_digest)
            .ok_or_else(|| CoocError::BadSidecar("corpus_digest is not hex".into()))?;
        let mut rows: BTreeMap<String, TargetCounts> = sidecar
            .occurrences
            .iter()
            .map(|(id, &n)| {
                (
                    id.clone(),
                    TargetCounts {
                        occurrences: n,
                        contexts: HashMap::new(),
                    },
                )
            })
            .collect();
        let mut seen_header = false;
        for (i, line) in tsv.lines().enumerate() {
            let line_no = i + 1;
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            if !seen_header && line == "target\tcontext\tcount" {
                seen_header = true;
                continue;
            }
            let mut f = line.split('\t');
            let (Some(target), Some(context), Some(count), None) = (f.next(), f.next(), f.next(), f.next())
            else {
                return Err(CoocError::MalformedLine(line_no));
            };
            let count: u64 = count.parse().map_err(|_| CoocError::MalformedLine(line_no))?;
            if count == 0 {
                return Err(CoocError::MalformedLine(line_no));
            }
            let row = rows.get_mut(target).ok_or_else(|| CoocError::UnknownTarget {
                line: line_no,
                target: target.to_owned(),
            })?;
            *row.contexts.entry(context.to_owned()).or_insert(0) += count;
        }
        Ok(CoocTable {
            window: sidecar.window,
            config_fingerprint: sidecar.config_fingerprint.clone(),
            corpus_digest,
            rows,
        })
    }
}

/// Metadata written next to a counts TSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsSidecar {
    pub window: usize,
    pub config_fingerprint: String,
    pub corpus_digest: String,
    pub occurrences: BTreeMap<String, u64>,
    pub config: BTreeMap<String, String>,
}

/// Counts co-occurrences of all lexicon targets in already filtered
/// sentences. Sentence shards are counted in parallel and merged; the table
/// does not depend on the number of threads.
pub fn count_cooccurrences(
    sentences: &[Sentence],
    lexicon: &TargetLexicon,
    window: usize,
    case_fold: bool,
) -> CoocTable {
    sentences
        .par_chunks(2048)
        .map(|chunk| {
            let mut t = CoocTable::empty(lexicon, window);
            for s in chunk {
                t.add_sentence(s, lexicon, case_fold);
            }
            t
        })
        .reduce(
            || CoocTable::empty(lexicon, window),
            |a, b| a.merge(b).expect("shards share window and fingerprint"),
        )
}

/// Occurrence counts of every lexicon item.
pub fn count_occurrences(sentences: &[Sentence], lexicon: &TargetLexicon) -> BTreeMap<String, u64> {
    let mut counts = vec![0u64; lexicon.len()];
    for s in sentences {
        for m in lexicon.match_targets(s) {
            counts[m.item] += 1;
        }
    }
    lexicon
        .items()
        .iter()
        .zip(counts)
        .map(|(g, n)| (g.id.clone(), n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnnotatedToken;
    use crate::targets::{Degree, GoldItem, GoldSet, MatchConfig};
    use proptest::prelude::*;

    fn sent(words: &[&str]) -> Sentence {
        Sentence::new(words.iter().map(|w| AnnotatedToken::new(*w, *w, "X")).collect())
    }

    fn lex(forms: &[&str]) -> TargetLexicon {
        let gold = GoldSet::new(forms.iter().map(|f| GoldItem::new(f, Degree::new(1).unwrap())).collect()).unwrap();
        TargetLexicon::compile(&gold, MatchConfig::default())
    }

    fn contexts(t: &CoocTable, id: &str) -> BTreeMap<String, u64> {
        t.get(id).unwrap().contexts.iter().map(|(k, v)| (k.clone(), *v)).collect()
    }

    fn ctx(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
        pairs.iter().map(|(k, v)| (format!("{k}:X"), *v)).collect()
    }

    #[test]
    fn centre_target() {
        let t = count_cooccurrences(&[sent(&["a", "b", "T", "c", "d"])], &lex(&["T"]), 2, false);
        assert_eq!(contexts(&t, "T"), ctx(&[("a", 1), ("b", 1), ("c", 1), ("d", 1)]));
        assert_eq!(t.get("T").unwrap().occurrences, 1);
    }

    #[test]
    fn clipped_at_sentence_start() {
        let t = count_cooccurrences(&[sent(&["T", "c"])], &lex(&["T"]), 2, false);
        assert_eq!(contexts(&t, "T"), ctx(&[("c", 1)]));
    }

    #[test]
    fn span_edges() {
        let t = count_cooccurrences(&[sent(&["a", "T1", "T2", "b"])], &lex(&["T1 T2"]), 2, false);
        assert_eq!(contexts(&t, "T1 T2"), ctx(&[("a", 1), ("b", 1)]));
    }

    #[test]
    fn other_targets_are_contexts_and_windows_stay_in_sentence() {
        let t = count_cooccurrences(&[sent(&["T", "U"]), sent(&["x", "y"])], &lex(&["T", "U"]), 2, false);
        assert_eq!(contexts(&t, "T"), ctx(&[("U", 1)]));
        assert_eq!(contexts(&t, "U"), ctx(&[("T", 1)]));
    }

    #[test]
    fn unmatched_target_has_zero_row() {
        let t = count_cooccurrences(&[sent(&["a"])], &lex(&["T"]), 2, false);
        assert_eq!(t.get("T").unwrap(), &TargetCounts::default());
    }

    #[test]
    fn merge_identity_and_mismatch() {
        let l = lex(&["T"]);
        let a = count_cooccurrences(&[sent(&["a", "T", "b"])], &l, 2, false);
        assert_eq!(a.clone().merge(CoocTable::empty(&l, 2)).unwrap(), a);
        assert!(matches!(
            a.clone().merge(CoocTable::empty(&l, 1)),
            Err(CoocError::FingerprintMismatch(_))
        ));
        assert!(matches!(
            a.clone().merge(CoocTable::empty(&l, 2).with_config_fingerprint("x")),
            Err(CoocError::FingerprintMismatch(_))
        ));
    }

    #[test]
    fn serialization_round_trip() {
        let l = lex(&["T", "am Rande", "nie"]);
        let t = count_cooccurrences(
            &[sent(&["a", "T", "b", "am", "Rande", "c"]), sent(&["T", "x"])],
            &l,
            2,
            false,
        )
        .with_config_fingerprint("abc");
        let tsv = t.to_tsv(&[("window".into(), "2".into())]);
        let side = t.sidecar(&BTreeMap::new());
        let json = serde_json::to_string(&side).unwrap();
        let back = CoocTable::from_serialized(&tsv, &serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_unknown_target_line() {
        let l = lex(&["T"]);
        let side = CoocTable::empty(&l, 2).sidecar(&BTreeMap::new());
        assert!(matches!(
            CoocTable::from_serialized("U\ta:X\t1\n", &side),
            Err(CoocError::UnknownTarget { line: 1, .. })
        ));
        assert_eq!(
            CoocTable::from_serialized("T\ta:X\n", &side),
            Err(CoocError::MalformedLine(1))
        );
    }

    /// Brute force: for every target occurrence, walk every sentence position
    /// and test the window condition directly.
    fn brute_force(corpus: &[Vec<&str>], targets: &[&str], window: usize) -> BTreeMap<String, (u64, BTreeMap<String, u64>)> {
        let mut out: BTreeMap<String, (u64, BTreeMap<String, u64>)> = BTreeMap::new();
        for t in targets {
            out.insert(t.to_string(), (0, BTreeMap::new()));
        }
        for s in corpus {
            for (i, w) in s.iter().enumerate() {
                if let Some(e) = out.get_mut(*w) {
                    e.0 += 1;
                    for (j, c) in s.iter().enumerate() {
                        if j != i && i.abs_diff(j) <= window {
                            *e.1.entry(format!("{c}:X")).or_insert(0) += 1;
                        }
                    }
                }
            }
        }
        out
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<&'static str>>> {
        prop::collection::vec(
            prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "T", "U"]), 1..10),
            0..10,
        )
    }

    proptest! {
        #[test]
        fn matches_brute_force(corpus in corpus_strategy(), window in 1usize..4) {
            let sents: Vec<Sentence> = corpus.iter().map(|s| sent(s)).collect();
            let t = count_cooccurrences(&sents, &lex(&["T", "U"]), window, false);
            let expected = brute_force(&corpus, &["T", "U"], window);
            for (id, (occ, ctxs)) in expected {
                let row = t.get(&id).unwrap();
                prop_assert_eq!(row.occurrences, occ);
                prop_assert_eq!(contexts(&t, &id), ctxs);
                prop_assert!(row.context_total() <= row.occurrences * 2 * window as u64);
                prop_assert!(row.contexts.values().all(|&c| c >= 1));
            }
        }

        #[test]
        fn shard_merge_laws(corpus in corpus_strategy(), c1 in 0usize..10, c2 in 0usize..10) {
            let sents: Vec<Sentence> = corpus.iter().map(|s| sent(s)).collect();
            let (c1, c2) = (c1.min(sents.len()), c2.min(sents.len()));
            let (lo, hi) = (c1.min(c2), c1.max(c2));
            let l = lex(&["T", "U"]);
            let whole = count_cooccurrences(&sents, &l, 2, false);
            let a = count_cooccurrences(&sents[..lo], &l, 2, false);
            let b = count_cooccurrences(&sents[lo..hi], &l, 2, false);
            let c = count_cooccurrences(&sents[hi..], &l, 2, false);
            let left = a.clone().merge(b.clone()).unwrap().merge(c.clone()).unwrap();
            let right = a.clone().merge(b.clone().merge(c.clone()).unwrap()).unwrap();
            prop_assert_eq!(&left, &whole);
            prop_assert_eq!(&right, &whole);
            prop_assert_eq!(c.merge(b).unwrap().merge(a).unwrap(), whole);
        }

        #[test]
        fn interior_targets_fill_both_windows(
            prefix in prop::collection::vec(prop::sample::select(vec!["a", "b"]), 2..5),
            suffix in prop::collection::vec(prop::sample::select(vec!["a", "b"]), 2..5),
        ) {
            let mut words = prefix.clone();
            words.push("T");
            words.extend(&suffix);
            let t = count_cooccurrences(&[sent(&words)], &lex(&["T"]), 2, false);
            let row = t.get("T").unwrap();
            prop_assert_eq!(row.context_total(), row.occurrences * 4);
        }
    }
}
