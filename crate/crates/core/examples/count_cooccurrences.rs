//! Window co-occurrence counting: the table for a small corpus, how window
//! size changes it, and why shard merging gives the same result.
//!
//! cargo run --example count_cooccurrences -- [window]

use std::fs::File;
use std::io::BufReader;

use gramdisp::cooc::CoocTable;
use gramdisp::pipeline;
use gramdisp::{count_cooccurrences, load_goldset, parse_vertical, RunConfig};

fn main() {
    let window: usize = std::env::args().nth(1).map_or(2, |s| s.parse().expect("window"));
    let root = env!("CARGO_MANIFEST_DIR");
    let raw = parse_vertical(BufReader::new(File::open(format!("{root}/data/toy/corpus.vert")).unwrap())).unwrap();
    let gold = load_goldset(BufReader::new(File::open(format!("{root}/data/toy/gold.tsv")).unwrap())).unwrap();

    let config = RunConfig {
        window,
        ..RunConfig::default()
    };
    let lexicon = pipeline::compile_lexicon(&gold, &config);
    let table = pipeline::count_sentences(&raw, &lexicon, &config);
    print!("{}", table.to_tsv(&[("window".into(), window.to_string())]));

    // Counting shard by shard and merging is the same as counting at once.
    let filtered = gramdisp::apply_filters(
        &raw,
        &config.preprocess(),
        &gramdisp::build_frequency_table(&raw, true),
        Some(&lexicon),
    );
    let whole = count_cooccurrences(&filtered, &lexicon, window, true);
    let merged = filtered
        .chunks(7)
        .map(|chunk| count_cooccurrences(chunk, &lexicon, window, true))
        .try_fold(CoocTable::empty(&lexicon, window), CoocTable::merge)
        .unwrap();
    println!("\nmerged shards equal one pass: {}", merged == whole);
    for (id, row) in whole.rows() {
        println!("  {id:<10} occurrences {:>2}  context tokens {:>3}", row.occurrences, row.context_total());
    }
}
