//! Contextual dispersion of German prepositions as a predictor of their
//! degree of grammaticalization.
//!
//! The pipeline reads an annotated vertical corpus, replaces every token by
//! its `lemma:POS` key, deletes function words and rare keys, counts the
//! context keys within a symmetric window around each gold target, scores
//! each target by context entropy, frequency and number of context types,
//! and evaluates the scores against gold degrees 1 to 4 with Spearman's rho
//! (t-test), Steiger's Z between measures and pairwise Average Precision.
//!
//! ```no_run
//! use gramdisp::{run_pipeline, RunConfig};
//! use std::path::Path;
//!
//! let config = RunConfig::default();
//! let (scores, report) = run_pipeline(Path::new("corpus.vert"), Path::new("gold.tsv"), &config)?;
//! print!("{}", report.to_tsv());
//! # Ok::<(), gramdisp::PipelineError>(())
//! ```
//!
//! See the `examples/` directory for one program per stage.

pub mod config;
pub mod cooc;
pub mod corpus;
pub mod eval;
pub mod measures;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod targets;

pub use config::{RunConfig, TieMode};
pub use cooc::{count_cooccurrences, CoocTable};
pub use corpus::{apply_filters, build_frequency_table, normalize, parse_vertical, AnnotatedToken, PreprocessConfig, Sentence};
pub use eval::{build_report, pairwise_ap_matrix, EvalOptions, EvalReport, Measure};
pub use measures::{entropy, ScoreRow, ScoreTable};
pub use pipeline::{run_pipeline, PipelineError};
pub use targets::{load_goldset, Degree, GoldItem, GoldSet, MatchConfig, MatchField, TargetLexicon};
