//! Evaluate a published score file against a gold set and print the report
//! as TSV and JSON.
//!
//! cargo run --example evaluate_report -- [scores.tsv] [gold.tsv]

use std::path::PathBuf;

use gramdisp::pipeline;
use gramdisp::RunConfig;

fn main() {
    let mut args = std::env::args().skip(1);
    let root = env!("CARGO_MANIFEST_DIR");
    let scores = PathBuf::from(args.next().unwrap_or(format!("{root}/tests/golden/toy/scores.tsv")));
    let gold = PathBuf::from(args.next().unwrap_or(format!("{root}/data/toy/gold.tsv")));
    let dir = std::env::temp_dir().join("gramdisp-evaluate-example");
    let config = RunConfig {
        output_dir: dir.clone(),
        ..RunConfig::default()
    };
    let report = match pipeline::cmd_evaluate(&scores, &gold, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    print!("{}", report.to_tsv());
    println!();
    print!("{}", report.to_json());
    println!("\n(written to {})", dir.display());
}
