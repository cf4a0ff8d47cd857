//! Controlled-dispersion corpus: degree-d targets draw their contexts
//! uniformly from 10 * 4^(d-1) nouns, every target equally frequent. Prints
//! the scores and the evaluation for a few corpus sizes.
//!
//! cargo run --example synthetic_hypothesis -- [occurrences ...]

use gramdisp::pipeline;
use gramdisp::synth::{dispersion_corpus, DispersionSpec};
use gramdisp::{build_report, EvalOptions, RunConfig, ScoreTable};

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("occurrence count")).collect();
    let sizes = if args.is_empty() { vec![3, 16] } else { args };
    let config = RunConfig::default();
    for occurrences in sizes {
        let spec = DispersionSpec {
            occurrences,
            ..DispersionSpec::default()
        };
        let (sentences, gold) = dispersion_corpus(&spec);
        let lexicon = pipeline::compile_lexicon(&gold, &config);
        let counts = pipeline::count_sentences(&sentences, &lexicon, &config);
        let scores = ScoreTable::from_counts(&counts, config.log_base).unwrap();
        let report = build_report(&scores, &gold, &EvalOptions::new()).unwrap();
        println!("== {} targets per degree, {occurrences} occurrences each", spec.targets_per_degree);
        print!("{}", scores.to_tsv(&[]));
        print!("{}", report.to_tsv());
        println!();
    }
}
