//! Evaluation of dispersion scores against gold degrees.
//!
//! The report has one column per measure (entropy, frequency, types), six
//! pairwise Average Precision rows (degrees `i` vs `j`, higher degree
//! positive, ranked by descending score) and a Spearman row, followed by
//! t-test p-values and Steiger comparisons between the measures.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::TieMode;
use crate::measures::{ScoreRow, ScoreTable};
use crate::stats::{
    expected_average_precision, ranked_average_precision, rho_t_test_p, spearman_rho, steiger_z,
    CorrelationComparison, PairedSample, ScoredItem, StatsError,
};
use crate::targets::{Degree, GoldItem, GoldSet};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("gold set is empty")]
    EmptyGoldSet,
    #[error("no scores for {} gold item(s): {}", .0.len(), .0.join(", "))]
    MissingScores(Vec<String>),
    #[error("degree {degree} has no items for AP (degrees {pair})")]
    EmptyClass { pair: DegreePair, degree: u8 },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Entropy,
    Frequency,
    Types,
}

impl Measure {
    /// Column order of the report.
    pub const ALL: [Measure; 3] = [Measure::Entropy, Measure::Frequency, Measure::Types];

    pub fn value(self, row: &ScoreRow) -> f64 {
        match self {
            Measure::Entropy => row.entropy,
            Measure::Frequency => row.frequency as f64,
            Measure::Types => row.types as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Entropy => "entropy",
            Measure::Frequency => "frequency",
            Measure::Types => "types",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DegreePair {
    pub lower: Degree,
    pub higher: Degree,
}

impl DegreePair {
    pub fn all() -> Vec<DegreePair> {
        let mut out = Vec::with_capacity(6);
        for (i, &lower) in Degree::ALL.iter().enumerate() {
            for &higher in &Degree::ALL[i + 1..] {
                out.push(DegreePair { lower, higher });
            }
        }
        out
    }
}

impl fmt::Display for DegreePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vs. {}", self.lower, self.higher)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApCell {
    pub ap: f64,
    /// A group of equal scores spans both classes, so the tie rule matters.
    pub ties: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApRow {
    pub pair: DegreePair,
    /// Indexed like [`Measure::ALL`].
    pub cells: [ApCell; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoResult {
    pub measure: Measure,
    /// `None` when the measure (or gold) column is constant.
    pub rho: Option<f64>,
    pub p_two_tailed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureComparison {
    pub first: Measure,
    pub second: Measure,
    pub result: Option<CorrelationComparison>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub gold_size: usize,
    pub rho: Vec<RhoResult>,
    pub ap: Vec<ApRow>,
    pub comparisons: Vec<MeasureComparison>,
    /// Items scored without contexts (entropy recorded as 0).
    pub no_data: Vec<String>,
    /// Zero-frequency items left out of the evaluation.
    pub excluded: Vec<String>,
    pub settings: Vec<(String, String)>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub include_missing: bool,
    pub ap_ties: TieMode,
    /// Echoed into the report header, in order.
    pub settings: Vec<(String, String)>,
}

impl EvalOptions {
    pub fn new() -> Self {
        Self {
            include_missing: true,
            ..Self::default()
        }
    }
}

fn lookup<'a>(scores: &'a ScoreTable, gold: &'a [GoldItem]) -> Result<Vec<(&'a GoldItem, &'a ScoreRow)>, EvalError> {
    let mut missing = Vec::new();
    let mut rows = Vec::with_capacity(gold.len());
    for g in gold {
        match scores.get(&g.id) {
            Some(r) => rows.push((g, r)),
            None => missing.push(g.id.clone()),
        }
    }
    if missing.is_empty() {
        Ok(rows)
    } else {
        Err(EvalError::MissingScores(missing))
    }
}

/// AP for each degree pair and measure.
pub fn pairwise_ap_matrix(scores: &ScoreTable, gold: &GoldSet, ties: TieMode) -> Result<Vec<ApRow>, EvalError> {
    let rows = lookup(scores, gold.items())?;
    ap_rows(&rows, ties)
}

fn ap_rows(rows: &[(&GoldItem, &ScoreRow)], ties: TieMode) -> Result<Vec<ApRow>, EvalError> {
    DegreePair::all()
        .into_iter()
        .map(|pair| {
            let subset: Vec<_> = rows
                .iter()
                .filter(|(g, _)| g.degree == pair.lower || g.degree == pair.higher)
                .collect();
            for d in [pair.lower, pair.higher] {
                if !subset.iter().any(|(g, _)| g.degree == d) {
                    return Err(EvalError::EmptyClass { pair, degree: d.get() });
                }
            }
            let mut cells = [ApCell { ap: 0.0, ties: false }; 3];
            for (cell, m) in cells.iter_mut().zip(Measure::ALL) {
                let items: Vec<ScoredItem<'_>> = subset
                    .iter()
                    .map(|(g, r)| ScoredItem {
                        id: &g.id,
                        score: m.value(r),
                        positive: g.degree == pair.higher,
                    })
                    .collect();
                cell.ties = mixed_ties(&items);
                cell.ap = match ties {
                    TieMode::IdOrder => ranked_average_precision(&items)?,
                    TieMode::Expected => expected_average_precision(&items)?,
                };
            }
            Ok(ApRow { pair, cells })
        })
        .collect()
}

// A tie group holding both classes makes AP depend on the tie rule.
fn mixed_ties(items: &[ScoredItem<'_>]) -> bool {
    let mut sorted: Vec<(f64, bool)> = items.iter().map(|i| (i.score, i.positive)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted.chunk_by(|a, b| a.0 == b.0).any(|g| g.iter().any(|x| x.1) && g.iter().any(|x| !x.1))
}

fn rho_or_degenerate(x: &[f64], y: &[f64]) -> Result<Option<f64>, EvalError> {
    match spearman_rho(&PairedSample::new(x.to_vec(), y.to_vec())?) {
        Ok(r) => Ok(Some(r)),
        Err(StatsError::DegenerateSample) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Fills every report field from a score table and the gold set.
pub fn build_report(scores: &ScoreTable, gold: &GoldSet, options: &EvalOptions) -> Result<EvalReport, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGoldSet);
    }
    let all = lookup(scores, gold.items())?;
    let mut excluded = Vec::new();
    let rows: Vec<_> = all
        .into_iter()
        .filter(|(g, r)| {
            let keep = options.include_missing || r.frequency > 0;
            if !keep {
                excluded.push(g.id.clone());
            }
            keep
        })
        .collect();
    let no_data = rows.iter().filter(|(_, r)| r.no_data()).map(|(g, _)| g.id.clone()).collect();
    let n = rows.len();

    let degrees: Vec<f64> = rows.iter().map(|(g, _)| g.degree.get() as f64).collect();
    let columns: Vec<Vec<f64>> = Measure::ALL
        .iter()
        .map(|m| rows.iter().map(|(_, r)| m.value(r)).collect())
        .collect();

    let mut rho = Vec::with_capacity(3);
    for (m, col) in Measure::ALL.iter().zip(&columns) {
        let r = rho_or_degenerate(col, &degrees)?;
        let p = r.map(|r| rho_t_test_p(r, n)).transpose()?;
        rho.push(RhoResult {
            measure: *m,
            rho: r,
            p_two_tailed: p,
        });
    }

    let mut comparisons = Vec::with_capacity(3);
    for (a, b) in [(1usize, 2usize), (1, 0), (2, 0)] {
        let (first, second) = (Measure::ALL[a], Measure::ALL[b]);
        let outcome = match (rho[a].rho, rho[b].rho) {
            (Some(r1), Some(r2)) => match rho_or_degenerate(&columns[a], &columns[b])? {
                Some(r12) => steiger_z(r1, r2, r12, n).map_err(|e| e.to_string()),
                None => Err("measures are constant".to_owned()),
            },
            _ => Err("correlation with gold undefined".to_owned()),
        };
        comparisons.push(MeasureComparison {
            first,
            second,
            result: outcome.as_ref().ok().copied(),
            error: outcome.err(),
        });
    }

    Ok(EvalReport {
        n,
        gold_size: gold.len(),
        rho,
        ap: ap_rows(&rows, options.ap_ties)?,
        comparisons,
        no_data,
        excluded,
        settings: options.settings.clone(),
        notes: vec![
            "rho: Spearman on midranks; p: two-tailed t approximation, df = n - 2, no tie correction".into(),
            "steiger: pooled mean-r form, r12 = Spearman between the two measures".into(),
            match options.ap_ties {
                TieMode::IdOrder => "ap: higher degree positive, descending score, ties by ascending id".into(),
                TieMode::Expected => {
                    "ap: higher degree positive, descending score, expected over random tie orders".into()
                }
            },
        ],
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "NA".into())
}

fn fmt_p(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "NA".into())
}

impl EvalReport {
    /// Table layout: AP rows for the six degree pairs, then the rho row,
    /// measures as columns. Header and footer lines start with `#`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.settings {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "# n={}", self.n);
        let _ = writeln!(out, "# gold_size={}", self.gold_size);
        out.push_str("\tentropy\tfrequency\ttypes\n");
        for row in &self.ap {
            let _ = write!(out, "AP (degrees {})", row.pair);
            for c in &row.cells {
                let _ = write!(out, "\t{:.6}", c.ap);
            }
            out.push('\n');
        }
        out.push_str("Spearman's rho (rank)");
        for r in &self.rho {
            let _ = write!(out, "\t{}", fmt_opt(r.rho));
        }
        out.push('\n');
        out.push_str("# p (two-tailed, t-test)");
        for r in &self.rho {
            let _ = write!(out, "\t{}", fmt_p(r.p_two_tailed));
        }
        out.push('\n');
        for c in &self.comparisons {
            let _ = write!(out, "# steiger {} vs {}", c.first.name(), c.second.name());
            match &c.result {
                Some(r) => {
                    let _ = writeln!(out, "\tz={:.6}\tp={:.6}", r.z_stat, r.p_two_tailed);
                }
                None => {
                    let _ = writeln!(out, "\tNA\t{}", c.error.as_deref().unwrap_or(""));
                }
            }
        }
        let ties: Vec<String> = self
            .ap
            .iter()
            .flat_map(|row| {
                Measure::ALL
                    .iter()
                    .zip(&row.cells)
                    .filter(|(_, c)| c.ties)
                    .map(move |(m, _)| format!("{}:{}", row.pair, m.name()))
            })
            .collect();
        if !ties.is_empty() {
            let _ = writeln!(out, "# warning: tied scores in AP cells {}", ties.join(", "));
        }
        if !self.no_data.is_empty() {
            let _ = writeln!(out, "# no_data={}", self.no_data.join(","));
        }
        if !self.excluded.is_empty() {
            let _ = writeln!(out, "# excluded={}", self.excluded.join(","));
        }
        for note in &self.notes {
            let _ = writeln!(out, "# note: {note}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn rho_of(&self, m: Measure) -> Option<f64> {
        self.rho.iter().find(|r| r.measure == m).and_then(|r| r.rho)
    }

    pub fn ap_of(&self, pair: DegreePair, m: Measure) -> Option<f64> {
        let col = Measure::ALL.iter().position(|x| *x == m)?;
        self.ap.iter().find(|r| r.pair == pair).map(|r| r.cells[col].ap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::average_precision;
    use std::collections::BTreeMap;

    fn gold(items: &[(&str, u8)]) -> GoldSet {
        GoldSet::new(
            items
                .iter()
                .map(|(f, d)| GoldItem::new(f, Degree::new(*d).unwrap()))
                .collect(),
        )
        .unwrap()
    }

    fn scores(rows: &[(&str, f64, u64, u64)]) -> ScoreTable {
        ScoreTable {
            rows: rows
                .iter()
                .map(|(id, h, f, t)| {
                    (
                        id.to_string(),
                        ScoreRow {
                            entropy: *h,
                            frequency: *f,
                            types: *t,
                        },
                    )
                })
                .collect::<BTreeMap<_, _>>(),
            log_base: 2.0,
        }
    }

    fn pair(a: u8, b: u8) -> DegreePair {
        DegreePair {
            lower: Degree::new(a).unwrap(),
            higher: Degree::new(b).unwrap(),
        }
    }

    #[test]
    fn perfect_order() {
        let g = gold(&[("a", 1), ("b", 2), ("c", 3), ("d", 4)]);
        let s = scores(&[("a", 1.0, 1, 1), ("b", 2.0, 2, 2), ("c", 3.0, 3, 3), ("d", 4.0, 4, 4)]);
        let r = build_report(&s, &g, &EvalOptions::new()).unwrap();
        assert_eq!(r.n, 4);
        for m in Measure::ALL {
            assert!((r.rho_of(m).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(r.ap.iter().all(|row| row.cells.iter().all(|c| c.ap == 1.0 && !c.ties)));
        assert_eq!(r.ap.len(), 6);
    }

    #[test]
    fn anti_ordered_cells_equal_positives_last() {
        // three items per degree, scores descending with degree
        let mut items = Vec::new();
        let mut rows = Vec::new();
        let ids: Vec<String> = (0..12).map(|i| format!("t{i:02}")).collect();
        for (i, id) in ids.iter().enumerate() {
            let d = (i / 3) as u8 + 1;
            items.push((id.as_str(), d));
            rows.push((id.as_str(), 100.0 - i as f64, 100 - i as u64, 100 - i as u64));
        }
        let r = pairwise_ap_matrix(&scores(&rows), &gold(&items), TieMode::IdOrder).unwrap();
        // positives all last: 3 negatives then 3 positives
        let expected = average_precision(&[false, false, false, true, true, true]).unwrap();
        assert!((expected - (1.0 / 4.0 + 2.0 / 5.0 + 3.0 / 6.0) / 3.0).abs() < 1e-15);
        for row in r {
            for c in row.cells {
                assert!((c.ap - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_scores_are_degenerate_with_tie_warning() {
        let g = gold(&[("a", 1), ("b", 2), ("c", 3), ("d", 4)]);
        let s = scores(&[("a", 1.0, 5, 1), ("b", 1.0, 5, 2), ("c", 1.0, 5, 3), ("d", 1.0, 5, 4)]);
        let r = build_report(&s, &g, &EvalOptions::new()).unwrap();
        assert_eq!(r.rho_of(Measure::Entropy), None);
        assert_eq!(r.rho_of(Measure::Frequency), None);
        assert!(r.rho_of(Measure::Types).is_some());
        assert!(r.ap.iter().all(|row| row.cells[0].ties));
        assert!(r.comparisons.iter().all(|c| c.result.is_none()));
        assert!(r.to_tsv().contains("# warning: tied scores"));
    }

    #[test]
    fn errors() {
        let s = scores(&[("a", 1.0, 1, 1)]);
        assert_eq!(build_report(&s, &gold(&[]), &EvalOptions::new()), Err(EvalError::EmptyGoldSet));
        assert_eq!(
            build_report(&s, &gold(&[("a", 1), ("zz", 2)]), &EvalOptions::new()),
            Err(EvalError::MissingScores(vec!["zz".into()]))
        );
        assert!(matches!(
            pairwise_ap_matrix(&s, &gold(&[("a", 1)]), TieMode::IdOrder),
            Err(EvalError::EmptyClass { degree: 2, .. })
        ));
    }

    #[test]
    fn exclusion_mode_drops_zero_frequency() {
        let g = gold(&[("a", 1), ("b", 2), ("c", 3), ("d", 4), ("e", 4), ("z", 1)]);
        let s = scores(&[
            ("a", 1.0, 1, 1),
            ("b", 2.0, 2, 2),
            ("c", 3.0, 3, 3),
            ("d", 4.0, 4, 4),
            ("e", 3.5, 5, 4),
            ("z", 0.0, 0, 0),
        ]);
        let opts = EvalOptions {
            include_missing: false,
            ..EvalOptions::new()
        };
        let r = build_report(&s, &g, &opts).unwrap();
        assert_eq!(r.n, 5);
        assert_eq!(r.excluded, vec!["z".to_string()]);
        let r = build_report(&s, &g, &EvalOptions::new()).unwrap();
        assert_eq!(r.n, 6);
        assert_eq!(r.no_data, vec!["z".to_string()]);
    }

    #[test]
    fn table_layout() {
        let g = gold(&[("a", 1), ("b", 2), ("c", 3), ("d", 4)]);
        let s = scores(&[("a", 1.0, 1, 1), ("b", 2.0, 2, 2), ("c", 3.0, 3, 3), ("d", 4.0, 4, 4)]);
        let tsv = build_report(&s, &g, &EvalOptions::new()).unwrap().to_tsv();
        let body: Vec<&str> = tsv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], "\tentropy\tfrequency\ttypes");
        assert_eq!(body[1], "AP (degrees 1 vs. 2)\t1.000000\t1.000000\t1.000000");
        assert!(body[6].starts_with("AP (degrees 3 vs. 4)"));
        assert!(body[7].starts_with("Spearman's rho (rank)\t1.000000"));
        assert_eq!(body.len(), 8);
        assert_eq!(pair(1, 2).to_string(), "1 vs. 2");
    }
}
