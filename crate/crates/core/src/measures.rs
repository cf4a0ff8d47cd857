//! Contextual-dispersion scores: context entropy, frequency, context types.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::cooc::CoocTable;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("target has no contexts")]
    NoContexts,
    #[error("unknown target {0:?}")]
    UnknownTarget(String),
    #[error("log base must be a finite number greater than 1, got {0}")]
    BadLogBase(f64),
    #[error("scores line {0}: expected \"target<TAB>frequency<TAB>types<TAB>entropy\"")]
    MalformedLine(usize),
    #[error("scores line {line}: duplicate target {target:?}")]
    DuplicateTarget { line: usize, target: String },
}

/// Shannon entropy of a count distribution in units of `log_base`.
///
/// Computed as `log N - (1/N) Σ c log c` in base 2 and rescaled, so that a
/// uniform distribution over `k` types gives exactly `log2 k` bits.
pub fn entropy<I>(counts: I, log_base: f64) -> Result<f64, MeasureError>
where
    I: IntoIterator<Item = u64>,
{
    let mut total = 0u64;
    let mut weighted = 0.0f64;
    let mut types = 0usize;
    for c in counts {
        if c == 0 {
            continue;
        }
        types += 1;
        total += c;
        if c > 1 {
            let c = c as f64;
            weighted += c * c.log2();
        }
    }
    if types == 0 {
        return Err(MeasureError::NoContexts);
    }
    if types == 1 {
        return Ok(0.0);
    }
    let n = total as f64;
    let bits = (n.log2() - weighted / n).max(0.0);
    Ok(if log_base == 2.0 { bits } else { bits / log_base.log2() })
}

pub fn frequency(id: &str, table: &CoocTable) -> Result<u64, MeasureError> {
    table
        .get(id)
        .map(|r| r.occurrences)
        .ok_or_else(|| MeasureError::UnknownTarget(id.to_owned()))
}

pub fn context_types(id: &str, table: &CoocTable) -> Result<u64, MeasureError> {
    table
        .get(id)
        .map(|r| r.contexts.values().filter(|&&c| c >= 1).count() as u64)
        .ok_or_else(|| MeasureError::UnknownTarget(id.to_owned()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRow {
    pub entropy: f64,
    pub frequency: u64,
    pub types: u64,
}

impl ScoreRow {
    /// No observed contexts; entropy is recorded as 0.
    pub fn no_data(&self) -> bool {
        self.types == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub rows: BTreeMap<String, ScoreRow>,
    pub log_base: f64,
}

impl ScoreTable {
    pub fn get(&self, id: &str) -> Option<&ScoreRow> {
        self.rows.get(id)
    }

    /// Scores every target in `table`. Targets without contexts get entropy 0
    /// and are reported by [`ScoreRow::no_data`].
    pub fn from_counts(table: &CoocTable, log_base: f64) -> Result<Self, MeasureError> {
        check_log_base(log_base)?;
        let rows = table
            .rows()
            .par_iter()
            .map(|(id, counts)| {
                let entropy = match entropy(counts.contexts.values().copied(), log_base) {
                    Ok(h) => h,
                    Err(MeasureError::NoContexts) => 0.0,
                    Err(e) => return Err(e),
                };
                Ok((
                    id.clone(),
                    ScoreRow {
                        entropy,
                        frequency: counts.occurrences,
                        types: counts.contexts.len() as u64,
                    },
                ))
            })
            .collect::<Result<BTreeMap<_, _>, _>>()?;
        Ok(Self { rows, log_base })
    }

    /// `target<TAB>frequency<TAB>types<TAB>entropy`, sorted by target, entropy
    /// with 6 decimals, preceded by `# key=value` header lines.
    pub fn to_tsv(&self, header: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in header {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("target\tfrequency\ttypes\tentropy\n");
        for (id, r) in &self.rows {
            let _ = writeln!(out, "{id}\t{}\t{}\t{:.6}", r.frequency, r.types, r.entropy);
        }
        out
    }

    /// Parses [`ScoreTable::to_tsv`] output. Returns the table and the header
    /// key/value pairs.
    pub fn from_tsv(text: &str) -> Result<(Self, BTreeMap<String, String>), MeasureError> {
        let mut header = BTreeMap::new();
        let mut rows = BTreeMap::new();
        let mut seen_columns = false;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(kv) = line.strip_prefix("# ") {
                if let Some((k, v)) = kv.split_once('=') {
                    header.insert(k.to_owned(), v.to_owned());
                }
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !seen_columns && line == "target\tfrequency\ttypes\tentropy" {
                seen_columns = true;
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let [id, freq, types, h] = f[..] else {
                return Err(MeasureError::MalformedLine(line_no));
            };
            let bad = || MeasureError::MalformedLine(line_no);
            let row = ScoreRow {
                frequency: freq.parse().map_err(|_| bad())?,
                types: types.parse().map_err(|_| bad())?,
                entropy: h.parse().map_err(|_| bad())?,
            };
            if !row.entropy.is_finite() || row.entropy < 0.0 {
                return Err(bad());
            }
            if rows.insert(id.to_owned(), row).is_some() {
                return Err(MeasureError::DuplicateTarget {
                    line: line_no,
                    target: id.to_owned(),
                });
            }
        }
        let log_base = match header.get("log_base") {
            Some(b) => b.parse().map_err(|_| MeasureError::BadLogBase(f64::NAN))?,
            None => 2.0,
        };
        Ok((Self { rows, log_base }, header))
    }
}

pub fn check_log_base(log_base: f64) -> Result<(), MeasureError> {
    if log_base.is_finite() && log_base > 1.0 {
        Ok(())
    } else {
        Err(MeasureError::BadLogBase(log_base))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotatedToken, Sentence};
    use crate::cooc::count_cooccurrences;
    use crate::targets::{Degree, GoldItem, GoldSet, MatchConfig, TargetLexicon};
    use proptest::prelude::*;

    /// Textbook form, evaluated independently of the implementation path.
    fn naive_entropy(counts: &[u64]) -> f64 {
        let n: u64 = counts.iter().sum();
        -counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n as f64;
                p * p.log2()
            })
            .sum::<f64>()
    }

    #[test]
    fn examples() {
        assert_eq!(entropy([1, 1, 1, 1], 2.0).unwrap(), 2.0);
        assert_eq!(entropy([5], 2.0).unwrap(), 0.0);
        assert!((entropy([3, 1], 2.0).unwrap() - 0.811278).abs() < 1e-6);
        assert_eq!(entropy(Vec::<u64>::new(), 2.0), Err(MeasureError::NoContexts));
    }

    #[test]
    fn natural_log_base() {
        let h = entropy([1, 1], std::f64::consts::E).unwrap();
        assert!((h - std::f64::consts::LN_2).abs() < 1e-15);
    }

    fn toy_table() -> CoocTable {
        let gold = GoldSet::new(vec![
            GoldItem::new("T", Degree::new(1).unwrap()),
            GoldItem::new("nie", Degree::new(2).unwrap()),
        ])
        .unwrap();
        let lex = TargetLexicon::compile(&gold, MatchConfig::default());
        let s: Vec<Sentence> = ["a T a b", "T c", "a T"]
            .iter()
            .map(|s| Sentence::new(s.split(' ').map(|w| AnnotatedToken::new(w, w, "X")).collect()))
            .collect();
        count_cooccurrences(&s, &lex, 2, false)
    }

    #[test]
    fn frequency_and_types() {
        let t = toy_table();
        assert_eq!(frequency("T", &t).unwrap(), 3);
        assert_eq!(frequency("nie", &t).unwrap(), 0);
        assert_eq!(context_types("T", &t).unwrap(), 3);
        assert_eq!(context_types("nie", &t).unwrap(), 0);
        assert_eq!(frequency("x", &t), Err(MeasureError::UnknownTarget("x".into())));
        assert_eq!(context_types("x", &t), Err(MeasureError::UnknownTarget("x".into())));
    }

    #[test]
    fn score_table_and_tsv() {
        let t = toy_table();
        let s = ScoreTable::from_counts(&t, 2.0).unwrap();
        // T: a:3 b:1 c:1
        assert!((s.get("T").unwrap().entropy - naive_entropy(&[3, 1, 1])).abs() < 1e-12);
        assert!(s.get("nie").unwrap().no_data());
        let tsv = s.to_tsv(&[("log_base".into(), "2".into())]);
        assert_eq!(
            tsv,
            "# log_base=2\ntarget\tfrequency\ttypes\tentropy\nT\t3\t3\t1.370951\nnie\t0\t0\t0.000000\n"
        );
        let (back, header) = ScoreTable::from_tsv(&tsv).unwrap();
        assert_eq!(back.get("T").unwrap().frequency, 3);
        assert_eq!(header["log_base"], "2");
        assert!(matches!(ScoreTable::from_counts(&t, 1.0), Err(MeasureError::BadLogBase(_))));
        assert_eq!(ScoreTable::from_tsv("a\t1\t2\n"), Err(MeasureError::MalformedLine(1)));
    }

    fn dist() -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(1u64..50, 1..30)
    }

    proptest! {
        #[test]
        fn agrees_with_textbook_form(d in dist()) {
            prop_assert!((entropy(d.iter().copied(), 2.0).unwrap() - naive_entropy(&d)).abs() < 1e-9);
        }

        #[test]
        fn bounded_by_log_types(d in dist()) {
            let h = entropy(d.iter().copied(), 2.0).unwrap();
            prop_assert!(h >= 0.0 && h.is_finite());
            prop_assert!(h <= (d.len() as f64).log2() + 1e-12);
        }

        #[test]
        fn permutation_and_scale_invariant(d in dist(), m in 1u64..100, seed in any::<u64>()) {
            let h = entropy(d.iter().copied(), 2.0).unwrap();
            let mut p = d.clone();
            let len = p.len();
            p.rotate_left((seed as usize) % len);
            p.reverse();
            prop_assert!((entropy(p.iter().copied(), 2.0).unwrap() - h).abs() < 1e-12);
            prop_assert!((entropy(d.iter().map(|c| c * m), 2.0).unwrap() - h).abs() < 1e-9);
        }

        #[test]
        fn new_type_raises_single_type_entropy(c in 1u64..1000, extra in 1u64..5) {
            prop_assert_eq!(entropy([c], 2.0).unwrap(), 0.0);
            prop_assert!(entropy([c, extra], 2.0).unwrap() > 0.0);
        }
    }
}
