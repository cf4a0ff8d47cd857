//! End-to-end composition: parse, filter, match, count, score, evaluate.
//!
//! Every stage writes its artifact into the output directory with the
//! resolved configuration echoed as `# key=value` header lines:
//!
//! | file               | stage    | content                                  |
//! |--------------------|----------|------------------------------------------|
//! | `counts.tsv`       | count    | `target<TAB>context<TAB>count`           |
//! | `counts.meta.json` | count    | window, fingerprints, occurrences        |
//! | `scores.tsv`       | score    | `target<TAB>frequency<TAB>types<TAB>entropy` |
//! | `report.tsv`       | evaluate | AP rows and the rho row, one column per measure |
//! | `report.json`      | evaluate | the full report, including p-values      |
//!
//! Evaluation always reads the published score file, so `run` and the
//! chained `count`, `score`, `evaluate` stages produce identical bytes.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::cooc::{count_occurrences, CoocError, CoocTable, CountsSidecar};
use crate::corpus::{
    build_frequency_table, count_sentence_keys, filter_sentence, CorpusError, FrequencyTable, Sentence,
    VerticalReader,
};
use crate::eval::{build_report, EvalError, EvalOptions, EvalReport};
use crate::measures::{MeasureError, ScoreTable};
use crate::targets::{load_goldset, GoldError, GoldSet, TargetLexicon};

pub const COUNTS_FILE: &str = "counts.tsv";
pub const COUNTS_META_FILE: &str = "counts.meta.json";
pub const SCORES_FILE: &str = "scores.tsv";
pub const REPORT_TSV_FILE: &str = "report.tsv";
pub const REPORT_JSON_FILE: &str = "report.json";

const BATCH_SENTENCES: usize = 1 << 16;
const SHARD_SENTENCES: usize = 1024;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Corpus { path: PathBuf, source: CorpusError },
    #[error("{}: {source}", path.display())]
    Gold { path: PathBuf, source: GoldError },
    #[error("{}: {source}", path.display())]
    Counts { path: PathBuf, source: CoocError },
    #[error("{}: {source}", path.display())]
    Scores { path: PathBuf, source: MeasureError },
    #[error("{}: {message}", path.display())]
    BadMetadata { path: PathBuf, message: String },
    #[error("{}: fingerprint mismatch: artifact has {found}, configuration gives {expected}", path.display())]
    FingerprintMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Runs `f` on a pool of `threads` workers (0 = all cores).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| PipelineError::ThreadPool(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn load_gold_file(path: &Path) -> Result<GoldSet, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    load_goldset(BufReader::new(file)).map_err(|source| PipelineError::Gold {
        path: path.to_owned(),
        source,
    })
}

pub fn compile_lexicon(gold: &GoldSet, config: &RunConfig) -> TargetLexicon {
    TargetLexicon::compile(gold, config.match_config())
}

/// Header lines shared by all artifacts.
pub fn artifact_header(config: &RunConfig, corpus_digest: &str) -> Vec<(String, String)> {
    let mut h = config.pairs();
    h.push(("count_fingerprint".into(), config.count_fingerprint()));
    h.push(("config_fingerprint".into(), config.fingerprint()));
    h.push(("corpus_digest".into(), corpus_digest.to_owned()));
    h
}

fn count_batch(
    raw: &[Sentence],
    lexicon: &TargetLexicon,
    config: &RunConfig,
    freq: &FrequencyTable,
) -> (CoocTable, Option<BTreeMap<String, u64>>) {
    let pre = config.preprocess();
    let fp = config.count_fingerprint();
    let empty = || CoocTable::empty(lexicon, config.window).with_config_fingerprint(fp.clone());
    let table = raw
        .par_chunks(SHARD_SENTENCES)
        .map(|chunk| {
            let mut t = empty();
            for s in chunk {
                if let Some(f) = filter_sentence(s, &pre, freq, Some(lexicon)) {
                    t.add_sentence(&f, lexicon, config.case_fold);
                }
            }
            t
        })
        .reduce(empty, |a, b| a.merge(b).expect("shards share window and fingerprint"));
    let occurrences = config.count_unfiltered.then(|| {
        raw.par_chunks(SHARD_SENTENCES)
            .map(|chunk| count_occurrences(chunk, lexicon))
            .reduce(BTreeMap::new, add_occurrences)
    });
    (table, occurrences)
}

fn add_occurrences(mut a: BTreeMap<String, u64>, b: BTreeMap<String, u64>) -> BTreeMap<String, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// Filters and counts an in-memory corpus.
pub fn count_sentences(raw: &[Sentence], lexicon: &TargetLexicon, config: &RunConfig) -> CoocTable {
    let freq = if config.min_count > 1 {
        build_frequency_table(raw, config.case_fold)
    } else {
        FrequencyTable::new()
    };
    let (mut table, occurrences) = count_batch(raw, lexicon, config, &freq);
    if let Some(occ) = occurrences {
        table.set_occurrences(&occ);
    }
    table
}

fn for_each_batch(
    path: &Path,
    mut f: impl FnMut(&[Sentence]),
) -> Result<(), PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = VerticalReader::new(BufReader::with_capacity(1 << 20, file));
    let mut batch = Vec::with_capacity(BATCH_SENTENCES);
    loop {
        batch.clear();
        for s in reader.by_ref().take(BATCH_SENTENCES) {
            batch.push(s.map_err(|source| PipelineError::Corpus {
                path: path.to_owned(),
                source,
            })?);
        }
        if batch.is_empty() {
            return Ok(());
        }
        f(&batch);
    }
}

/// Streams a vertical corpus file in batches. A first pass builds the key
/// frequency table when a frequency floor is set; the second filters and
/// counts. The result is independent of batch size and thread count.
pub fn count_corpus_file(path: &Path, lexicon: &TargetLexicon, config: &RunConfig) -> Result<CoocTable, PipelineError> {
    let mut freq = FrequencyTable::new();
    if config.min_count > 1 {
        for_each_batch(path, |batch| {
            let part = batch
                .par_chunks(SHARD_SENTENCES)
                .map(|chunk| {
                    let mut t = FrequencyTable::new();
                    for s in chunk {
                        count_sentence_keys(&mut t, s, config.case_fold);
                    }
                    t
                })
                .reduce(FrequencyTable::new, FrequencyTable::merge);
            freq = std::mem::take(&mut freq).merge(part);
        })?;
    }
    let mut table = CoocTable::empty(lexicon, config.window).with_config_fingerprint(config.count_fingerprint());
    let mut occurrences = config.count_unfiltered.then(BTreeMap::new);
    for_each_batch(path, |batch| {
        let (t, occ) = count_batch(batch, lexicon, config, &freq);
        table = std::mem::replace(&mut table, CoocTable::empty(lexicon, config.window))
            .merge(t)
            .expect("batches share window and fingerprint");
        if let (Some(acc), Some(occ)) = (occurrences.as_mut(), occ) {
            *acc = add_occurrences(std::mem::take(acc), occ);
        }
    })?;
    if let Some(occ) = occurrences {
        table.set_occurrences(&occ);
    }
    Ok(table)
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn read_file(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn ensure_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Sidecar path for a counts TSV: `x.tsv` becomes `x.meta.json`.
pub fn sidecar_path(counts: &Path) -> PathBuf {
    counts.with_extension("meta.json")
}

pub fn write_counts(dir: &Path, table: &CoocTable, config: &RunConfig) -> Result<PathBuf, PipelineError> {
    ensure_dir(dir)?;
    let path = dir.join(COUNTS_FILE);
    let header = artifact_header(config, &table.corpus_digest().to_hex());
    write_file(&path, &table.to_tsv(&header))?;
    let sidecar = table.sidecar(&config.pairs_map());
    let mut json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    json.push('\n');
    write_file(&sidecar_path(&path), &json)?;
    Ok(path)
}

/// Reads a counts TSV and its sidecar, checking the count fingerprint
/// against `config`.
pub fn read_counts(path: &Path, config: &RunConfig) -> Result<CoocTable, PipelineError> {
    let meta_path = sidecar_path(path);
    let sidecar: CountsSidecar = serde_json::from_str(&read_file(&meta_path)?).map_err(|e| {
        PipelineError::BadMetadata {
            path: meta_path.clone(),
            message: e.to_string(),
        }
    })?;
    if sidecar.config_fingerprint != config.count_fingerprint() {
        return Err(PipelineError::FingerprintMismatch {
            path: meta_path,
            expected: config.count_fingerprint(),
            found: sidecar.config_fingerprint,
        });
    }
    if sidecar.window != config.window {
        return Err(PipelineError::FingerprintMismatch {
            path: meta_path,
            expected: format!("window={}", config.window),
            found: format!("window={}", sidecar.window),
        });
    }
    CoocTable::from_serialized(&read_file(path)?, &sidecar).map_err(|source| PipelineError::Counts {
        path: path.to_owned(),
        source,
    })
}

/// Scores rendered as the published TSV.
pub fn scores_tsv(table: &CoocTable, config: &RunConfig) -> Result<(ScoreTable, String), PipelineError> {
    let scores = ScoreTable::from_counts(table, config.log_base)?;
    let header = artifact_header(config, &table.corpus_digest().to_hex());
    let tsv = scores.to_tsv(&header);
    Ok((scores, tsv))
}

/// Parsed score file: table plus the corpus digest it was derived from.
pub struct PublishedScores {
    pub scores: ScoreTable,
    pub corpus_digest: String,
}

pub fn parse_scores(text: &str, path: &Path, config: &RunConfig) -> Result<PublishedScores, PipelineError> {
    let (scores, header) = ScoreTable::from_tsv(text).map_err(|source| PipelineError::Scores {
        path: path.to_owned(),
        source,
    })?;
    let found = header.get("count_fingerprint").cloned().unwrap_or_default();
    if found != config.count_fingerprint() {
        return Err(PipelineError::FingerprintMismatch {
            path: path.to_owned(),
            expected: config.count_fingerprint(),
            found,
        });
    }
    if scores.log_base != config.log_base {
        return Err(PipelineError::FingerprintMismatch {
            path: path.to_owned(),
            expected: format!("log_base={}", config.log_base),
            found: format!("log_base={}", scores.log_base),
        });
    }
    Ok(PublishedScores {
        scores,
        corpus_digest: header.get("corpus_digest").cloned().unwrap_or_default(),
    })
}

pub fn evaluate_scores(
    published: &PublishedScores,
    gold: &GoldSet,
    config: &RunConfig,
) -> Result<EvalReport, PipelineError> {
    let options = EvalOptions {
        include_missing: config.include_missing,
        ap_ties: config.ap_ties,
        settings: artifact_header(config, &published.corpus_digest),
    };
    Ok(build_report(&published.scores, gold, &options)?)
}

pub fn write_report(dir: &Path, report: &EvalReport) -> Result<(), PipelineError> {
    ensure_dir(dir)?;
    write_file(&dir.join(REPORT_TSV_FILE), &report.to_tsv())?;
    write_file(&dir.join(REPORT_JSON_FILE), &report.to_json())
}

/// `count` stage: corpus and gold file to counts TSV plus sidecar.
pub fn cmd_count(corpus: &Path, gold: &Path, config: &RunConfig) -> Result<CoocTable, PipelineError> {
    let gold = load_gold_file(gold)?;
    let lexicon = compile_lexicon(&gold, config);
    let table = with_threads(config.threads, || count_corpus_file(corpus, &lexicon, config))??;
    write_counts(&config.output_dir, &table, config)?;
    Ok(table)
}

/// `score` stage: counts TSV to scores TSV.
pub fn cmd_score(counts: &Path, config: &RunConfig) -> Result<ScoreTable, PipelineError> {
    let table = read_counts(counts, config)?;
    let (scores, tsv) = with_threads(config.threads, || scores_tsv(&table, config))??;
    ensure_dir(&config.output_dir)?;
    write_file(&config.output_dir.join(SCORES_FILE), &tsv)?;
    Ok(scores)
}

/// `evaluate` stage: scores TSV and gold file to the report files.
pub fn cmd_evaluate(scores: &Path, gold: &Path, config: &RunConfig) -> Result<EvalReport, PipelineError> {
    let gold = load_gold_file(gold)?;
    let published = parse_scores(&read_file(scores)?, scores, config)?;
    let report = evaluate_scores(&published, &gold, config)?;
    write_report(&config.output_dir, &report)?;
    Ok(report)
}

/// All stages in one process. Returns the published scores and the report.
pub fn run_pipeline(corpus: &Path, gold_path: &Path, config: &RunConfig) -> Result<(ScoreTable, EvalReport), PipelineError> {
    let gold = load_gold_file(gold_path)?;
    if gold.is_empty() {
        return Err(EvalError::EmptyGoldSet.into());
    }
    let lexicon = compile_lexicon(&gold, config);
    let (table, tsv) = with_threads(config.threads, || -> Result<_, PipelineError> {
        let table = count_corpus_file(corpus, &lexicon, config)?;
        let (_, tsv) = scores_tsv(&table, config)?;
        Ok((table, tsv))
    })??;
    let dir = &config.output_dir;
    write_counts(dir, &table, config)?;
    let scores_path = dir.join(SCORES_FILE);
    write_file(&scores_path, &tsv)?;
    let published = parse_scores(&tsv, &scores_path, config)?;
    let report = evaluate_scores(&published, &gold, config)?;
    write_report(dir, &report)?;
    Ok((published.scores, report))
}

/// Reads a whole corpus file into memory.
pub fn read_corpus_file(path: &Path) -> Result<Vec<Sentence>, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    VerticalReader::new(BufReader::new(file))
        .collect::<Result<_, _>>()
        .map_err(|source| PipelineError::Corpus {
            path: path.to_owned(),
            source,
        })
}

