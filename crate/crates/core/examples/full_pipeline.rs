//! count -> score -> evaluate on the toy corpus, once as separate stages and
//! once as a single run, with every artifact written to an output directory.
//!
//! cargo run --example full_pipeline -- [output_dir]

use std::fs;
use std::path::PathBuf;

use gramdisp::pipeline::{self, COUNTS_FILE, REPORT_TSV_FILE, SCORES_FILE};
use gramdisp::RunConfig;

fn main() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let corpus = root.join("data/toy/corpus.vert");
    let gold = root.join("data/toy/gold.tsv");
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("gramdisp-full-pipeline"), PathBuf::from);

    let staged = RunConfig {
        output_dir: out.join("staged"),
        ..RunConfig::default()
    };
    let counts = pipeline::cmd_count(&corpus, &gold, &staged).unwrap();
    println!("counted {} targets, corpus digest {}", counts.rows().len(), counts.corpus_digest().to_hex());
    let scores = pipeline::cmd_score(&staged.output_dir.join(COUNTS_FILE), &staged).unwrap();
    for (id, row) in &scores.rows {
        println!("  {id:<10} f={:<3} types={:<3} H={:.6}", row.frequency, row.types, row.entropy);
    }
    pipeline::cmd_evaluate(&staged.output_dir.join(SCORES_FILE), &gold, &staged).unwrap();

    let single = RunConfig {
        output_dir: out.join("run"),
        ..RunConfig::default()
    };
    let (_, report) = pipeline::run_pipeline(&corpus, &gold, &single).unwrap();
    print!("\n{}", report.to_tsv());

    let same = [COUNTS_FILE, SCORES_FILE, REPORT_TSV_FILE]
        .iter()
        .all(|f| fs::read(staged.output_dir.join(f)).unwrap() == fs::read(single.output_dir.join(f)).unwrap());
    println!("\nstaged and single run byte-identical: {same} ({})", out.display());
}
