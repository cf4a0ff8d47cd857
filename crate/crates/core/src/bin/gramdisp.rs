//! Batch command line for the dispersion pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gramdisp::config::{ConfigError, RunConfig};
use gramdisp::pipeline::{self, PipelineError};

#[derive(Parser)]
#[command(name = "gramdisp", version, about = "Contextual dispersion scores and their evaluation against gold degrees of grammaticalization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count window co-occurrences of all gold targets (writes counts.tsv, counts.meta.json)
    Count {
        /// Vertical corpus: surface<TAB>lemma<TAB>pos per line, blank line between sentences
        corpus: PathBuf,
        /// Gold set: form<TAB>degree per line
        gold: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Compute entropy, frequency and context types from counts (writes scores.tsv)
    Score {
        /// counts.tsv written by `count`; its counts.meta.json must sit next to it
        counts: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Evaluate scores against the gold set (writes report.tsv, report.json)
    Evaluate {
        /// scores.tsv written by `score`
        scores: PathBuf,
        /// Gold set: form<TAB>degree per line
        gold: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// count, score and evaluate in one go
    Run {
        corpus: PathBuf,
        gold: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
}

/// Flags override the config file, which overrides the defaults. Every flag
/// can also be set through a GRAMDISP_* environment variable.
#[derive(Args)]
struct Opts {
    /// key=value file with any of the settings below (keys as in the report header)
    #[arg(long, env = "GRAMDISP_CONFIG")]
    config: Option<PathBuf>,
    /// Context window on each side of a target [default: 2]
    #[arg(long, env = "GRAMDISP_WINDOW")]
    window: Option<String>,
    /// Delete tokens whose lemma:POS key occurs fewer times [default: 1, i.e. keep all; 3 recommended]
    #[arg(long, env = "GRAMDISP_MIN_COUNT")]
    min_count: Option<String>,
    /// Comma-separated POS tags to delete [default: STTS function-word tags]
    #[arg(long, env = "GRAMDISP_STOP_POS")]
    stop_pos: Option<String>,
    /// Entropy log base [default: 2]
    #[arg(long, env = "GRAMDISP_LOG_BASE")]
    log_base: Option<String>,
    /// Token field matched against gold forms: surface or lemma [default: surface]
    #[arg(long, env = "GRAMDISP_MATCH_FIELD")]
    match_field: Option<String>,
    /// Lowercase lemmas and match keys: true or false [default: true]
    #[arg(long, env = "GRAMDISP_CASE_FOLD")]
    case_fold: Option<String>,
    /// Prefer the longest gold form starting at a position [default: true]
    #[arg(long, env = "GRAMDISP_LONGEST_MATCH")]
    longest_match: Option<String>,
    /// Comma-separated POS tags a target's first token must carry [default: any]
    #[arg(long, env = "GRAMDISP_ALLOWED_POS")]
    allowed_pos: Option<String>,
    /// Count target frequency in the unfiltered corpus [default: false]
    #[arg(long, env = "GRAMDISP_COUNT_UNFILTERED")]
    count_unfiltered: Option<String>,
    /// Keep zero-frequency gold items in the evaluation [default: true]
    #[arg(long, env = "GRAMDISP_INCLUDE_MISSING")]
    include_missing: Option<String>,
    /// AP tie handling: id (ascending target id) or expected (mean over random orders) [default: id]
    #[arg(long, env = "GRAMDISP_AP_TIES")]
    ap_ties: Option<String>,
    /// Output directory [default: out]
    #[arg(long, short = 'o', env = "GRAMDISP_OUTPUT_DIR")]
    output_dir: Option<String>,
    /// Worker threads, 0 = all cores; output does not depend on it [default: 0]
    #[arg(long, env = "GRAMDISP_THREADS")]
    threads: Option<String>,
}

impl Opts {
    fn resolve(&self) -> Result<RunConfig, PipelineError> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
                path: path.clone(),
                source,
            })?;
            config.apply_file(&text)?;
        }
        let overrides = [
            ("window", &self.window),
            ("min_count", &self.min_count),
            ("stop_pos", &self.stop_pos),
            ("log_base", &self.log_base),
            ("match_field", &self.match_field),
            ("case_fold", &self.case_fold),
            ("longest_match", &self.longest_match),
            ("allowed_pos", &self.allowed_pos),
            ("count_unfiltered", &self.count_unfiltered),
            ("include_missing", &self.include_missing),
            ("ap_ties", &self.ap_ties),
            ("output_dir", &self.output_dir),
            ("threads", &self.threads),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                config.set(key, v).map_err(|e: ConfigError| PipelineError::Config(e))?;
            }
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Count { corpus, gold, opts } => {
            let config = opts.resolve()?;
            pipeline::cmd_count(&corpus, &gold, &config)?;
        }
        Command::Score { counts, opts } => {
            let config = opts.resolve()?;
            pipeline::cmd_score(&counts, &config)?;
        }
        Command::Evaluate { scores, gold, opts } => {
            let config = opts.resolve()?;
            let report = pipeline::cmd_evaluate(&scores, &gold, &config)?;
            print!("{}", report.to_tsv());
        }
        Command::Run { corpus, gold, opts } => {
            let config = opts.resolve()?;
            let (_, report) = pipeline::run_pipeline(&corpus, &gold, &config)?;
            print!("{}", report.to_tsv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gramdisp: {e}");
            ExitCode::from(2)
        }
    }
}
