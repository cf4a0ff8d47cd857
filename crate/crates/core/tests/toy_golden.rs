//! End-to-end runs on the bundled toy corpus against committed golden files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gramdisp::config::RunConfig;
use gramdisp::pipeline::{self, COUNTS_FILE, COUNTS_META_FILE, REPORT_JSON_FILE, REPORT_TSV_FILE, SCORES_FILE};
use gramdisp::{Measure, PipelineError};

const ARTIFACTS: [&str; 5] = [COUNTS_FILE, COUNTS_META_FILE, SCORES_FILE, REPORT_TSV_FILE, REPORT_JSON_FILE];

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy").join(name)
}

fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/toy").join(name);
    fs::read_to_string(p).unwrap()
}

fn run_into(dir: &Path, threads: usize) -> RunConfig {
    let config = RunConfig {
        output_dir: dir.to_owned(),
        threads,
        ..RunConfig::default()
    };
    pipeline::run_pipeline(&data("corpus.vert"), &data("gold.tsv"), &config).unwrap();
    config
}

#[test]
fn run_matches_golden_files_for_any_thread_count() {
    for threads in [1, 2, 4] {
        let dir = tempfile::tempdir().unwrap();
        run_into(dir.path(), threads);
        for name in ARTIFACTS {
            let got = fs::read_to_string(dir.path().join(name)).unwrap();
            assert_eq!(got, golden(name), "{name} differs with {threads} threads");
        }
    }
}

#[test]
fn chained_stages_equal_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        output_dir: dir.path().to_owned(),
        ..RunConfig::default()
    };
    pipeline::cmd_count(&data("corpus.vert"), &data("gold.tsv"), &config).unwrap();
    pipeline::cmd_score(&dir.path().join(COUNTS_FILE), &config).unwrap();
    pipeline::cmd_evaluate(&dir.path().join(SCORES_FILE), &data("gold.tsv"), &config).unwrap();
    for name in ARTIFACTS {
        assert_eq!(fs::read_to_string(dir.path().join(name)).unwrap(), golden(name), "{name}");
    }
}

#[test]
fn config_is_echoed_in_every_header() {
    let config = RunConfig::default();
    for name in [COUNTS_FILE, SCORES_FILE, REPORT_TSV_FILE] {
        let text = golden(name);
        for (k, v) in config.pairs() {
            assert!(text.contains(&format!("# {k}={v}\n")), "{name} lacks {k}");
        }
        assert!(text.contains(&format!("# config_fingerprint={}\n", config.fingerprint())));
    }
    assert!(golden(COUNTS_META_FILE).contains(&config.count_fingerprint()));
}

/// Independent recount straight from the vertical text: find gold forms on
/// lowercased surfaces, drop stop tags outside occurrences, then collect
/// `lemma:POS` keys within two positions of each occurrence.
fn naive_counts() -> BTreeMap<String, (u64, BTreeMap<String, u64>)> {
    let stop: Vec<String> = RunConfig::default().stop_pos.into_iter().collect();
    let ids: Vec<String> = fs::read_to_string(data("gold.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split('\t').next().unwrap().to_owned())
        .collect();
    let gold: Vec<Vec<String>> = ids.iter().map(|id| id.split(' ').map(str::to_lowercase).collect()).collect();
    let text = fs::read_to_string(data("corpus.vert")).unwrap();
    let mut out: BTreeMap<String, (u64, BTreeMap<String, u64>)> =
        ids.iter().map(|id| (id.clone(), (0, BTreeMap::new()))).collect();
    let find = |toks: &[(String, String, String)], i: usize| -> Option<usize> {
        // longest form first
        let mut best: Option<usize> = None;
        for (gi, g) in gold.iter().enumerate() {
            if i + g.len() <= toks.len()
                && g.iter().zip(&toks[i..]).all(|(a, t)| *a == t.0.to_lowercase())
                && best.is_none_or(|b| gold[b].len() < g.len())
            {
                best = Some(gi);
            }
        }
        best
    };
    for block in text.split("\n\n").filter(|b| !b.trim().is_empty()) {
        let toks: Vec<(String, String, String)> = block
            .lines()
            .map(|l| {
                let f: Vec<&str> = l.split('\t').collect();
                (f[0].to_owned(), f[1].to_owned(), f[2].to_owned())
            })
            .collect();
        let mut protect = vec![false; toks.len()];
        let mut i = 0;
        while i < toks.len() {
            if let Some(g) = find(&toks, i) {
                protect[i..i + gold[g].len()].fill(true);
                i += gold[g].len();
            } else {
                i += 1;
            }
        }
        let kept: Vec<_> = toks
            .into_iter()
            .zip(protect)
            .filter(|(t, p)| *p || !stop.contains(&t.2))
            .map(|(t, _)| t)
            .collect();
        let mut i = 0;
        while i < kept.len() {
            let Some(g) = find(&kept, i) else {
                i += 1;
                continue;
            };
            let end = i + gold[g].len() - 1;
            let entry = out.get_mut(&ids[g]).unwrap();
            entry.0 += 1;
            for (j, t) in kept.iter().enumerate() {
                if (j < i && i - j <= 2) || (j > end && j - end <= 2) {
                    *entry.1.entry(format!("{}:{}", t.1.to_lowercase(), t.2)).or_insert(0) += 1;
                }
            }
            i = end + 1;
        }
    }
    out
}

#[test]
fn golden_counts_agree_with_naive_recount() {
    let expected = naive_counts();
    let config = RunConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let counts_path = dir.path().join(COUNTS_FILE);
    fs::write(&counts_path, golden(COUNTS_FILE)).unwrap();
    fs::write(pipeline::sidecar_path(&counts_path), golden(COUNTS_META_FILE)).unwrap();
    let table = pipeline::read_counts(&counts_path, &config).unwrap();
    assert_eq!(table.rows().len(), 8);
    for (id, (occ, ctx)) in expected {
        let row = table.get(&id).unwrap();
        assert_eq!(row.occurrences, occ, "{id}");
        let got: BTreeMap<String, u64> = row.contexts.iter().map(|(k, v)| (k.clone(), *v)).collect();
        assert_eq!(got, ctx, "{id}");
    }
}

#[test]
fn golden_report_values() {
    // Spearman rho and t-test p checked against scipy.stats.spearmanr on the
    // golden score file.
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        output_dir: dir.path().to_owned(),
        ..RunConfig::default()
    };
    let (_, report) = pipeline::run_pipeline(&data("corpus.vert"), &data("gold.tsv"), &config).unwrap();
    let expected = [
        (Measure::Entropy, 0.7901836773196718, 0.019610509311949128),
        (Measure::Frequency, 0.7745966692414833, 0.024008196755730956),
        (Measure::Types, 0.7453559924999299, 0.03379778750009085),
    ];
    for (r, (m, rho, p)) in report.rho.iter().zip(expected) {
        assert_eq!(r.measure, m);
        assert!((r.rho.unwrap() - rho).abs() < 1e-12);
        assert!((r.p_two_tailed.unwrap() - p).abs() < 1e-9);
    }
    assert_eq!(report.n, 8);
    assert!(report.no_data.is_empty());
}

#[test]
fn window_one_halves_context_totals_without_boundaries() {
    // every target has at least two kept tokens on both sides
    let corpus = "a\ta\tNN\nb\tb\tNN\nvor\tvor\tAPPR\nc\tc\tNN\nd\td\tNN\n\n\
                  x\tx\tNN\ny\ty\tNN\nmit\tmit\tAPPR\nz\tz\tNN\nw\tw\tNN\nvor\tvor\tAPPR\nq\tq\tNN\nr\tr\tNN\n";
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("c.vert");
    let gold_path = dir.path().join("g.tsv");
    fs::write(&corpus_path, corpus).unwrap();
    fs::write(&gold_path, "vor\t4\nmit\t4\n").unwrap();
    let total = |window: usize| -> u64 {
        let config = RunConfig {
            window,
            output_dir: dir.path().join(format!("w{window}")),
            ..RunConfig::default()
        };
        let t = pipeline::cmd_count(&corpus_path, &gold_path, &config).unwrap();
        t.rows().values().map(|r| r.context_total()).sum()
    };
    // brute force: 3 occurrences x 2 sides x window
    assert_eq!(total(2), 12);
    assert_eq!(total(1), 6);
}

#[test]
fn empty_gold_set_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let gold = dir.path().join("empty.tsv");
    fs::write(&gold, "# nothing\n").unwrap();
    let config = RunConfig {
        output_dir: dir.path().join("out"),
        ..RunConfig::default()
    };
    let err = pipeline::run_pipeline(&data("corpus.vert"), &gold, &config).unwrap_err();
    assert!(matches!(err, PipelineError::Eval(gramdisp::eval::EvalError::EmptyGoldSet)));
}

#[test]
fn counts_from_other_config_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        output_dir: dir.path().to_owned(),
        ..RunConfig::default()
    };
    pipeline::cmd_count(&data("corpus.vert"), &data("gold.tsv"), &config).unwrap();
    let other = RunConfig {
        window: 3,
        ..config.clone()
    };
    let err = pipeline::cmd_score(&dir.path().join(COUNTS_FILE), &other).unwrap_err();
    assert!(matches!(err, PipelineError::FingerprintMismatch { .. }), "{err}");
    pipeline::cmd_score(&dir.path().join(COUNTS_FILE), &config).unwrap();
    let other = RunConfig {
        min_count: 2,
        ..config
    };
    let err = pipeline::cmd_evaluate(&dir.path().join(SCORES_FILE), &data("gold.tsv"), &other).unwrap_err();
    assert!(matches!(err, PipelineError::FingerprintMismatch { .. }), "{err}");
}

#[test]
fn unfiltered_occurrence_mode_and_exclusion() {
    let dir = tempfile::tempdir().unwrap();
    let gold = dir.path().join("g.tsv");
    fs::write(&gold, "vor\t4\nmit\t4\nam Rande\t1\nim Zuge\t2\ntrotz\t3\nnirgends\t1\n").unwrap();
    let config = RunConfig {
        output_dir: dir.path().join("a"),
        count_unfiltered: true,
        include_missing: false,
        ..RunConfig::default()
    };
    let (scores, report) = pipeline::run_pipeline(&data("corpus.vert"), &gold, &config).unwrap();
    assert_eq!(scores.get("vor").unwrap().frequency, 5);
    assert_eq!(scores.get("nirgends").unwrap().frequency, 0);
    assert_eq!(report.excluded, vec!["nirgends".to_string()]);
    assert_eq!(report.n, 5);
}
