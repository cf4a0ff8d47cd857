//! Parse a vertical corpus, show `lemma:POS` keys, then delete function words
//! and rare keys while keeping gold targets intact.
//!
//! cargo run --example parse_and_filter -- [corpus.vert] [gold.tsv] [min_count]

use std::fs::File;
use std::io::BufReader;

use gramdisp::corpus::write_vertical;
use gramdisp::{apply_filters, build_frequency_table, load_goldset, normalize, parse_vertical};
use gramdisp::{MatchConfig, PreprocessConfig, TargetLexicon};

fn main() {
    let mut args = std::env::args().skip(1);
    let root = env!("CARGO_MANIFEST_DIR");
    let corpus = args.next().unwrap_or(format!("{root}/data/toy/corpus.vert"));
    let gold = args.next().unwrap_or(format!("{root}/data/toy/gold.tsv"));
    let min_count: u64 = args.next().map_or(2, |s| s.parse().expect("min_count"));

    let sentences = parse_vertical(BufReader::new(File::open(&corpus).unwrap())).unwrap();
    let gold = load_goldset(BufReader::new(File::open(&gold).unwrap())).unwrap();
    let lexicon = TargetLexicon::compile(&gold, MatchConfig::default());

    let first = &sentences[0];
    let keys: Vec<String> = first.tokens.iter().map(|t| normalize(t, true)).collect();
    println!("first sentence as keys: {}", keys.join(" "));

    let freq = build_frequency_table(&sentences, true);
    println!("{} sentences, {} tokens, {} key types", sentences.len(), freq.total(), freq.sorted().len());
    println!("most frequent keys:");
    let mut by_count = freq.sorted();
    by_count.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    for (key, n) in by_count.into_iter().take(5) {
        println!("  {n:>3}  {key}");
    }

    let config = PreprocessConfig {
        min_count,
        ..PreprocessConfig::default()
    };
    let kept = apply_filters(&sentences, &config, &freq, Some(&lexicon));
    let after: usize = kept.iter().map(|s| s.tokens.len()).sum();
    println!("after stop-POS and min_count={min_count}: {after} tokens in {} sentences", kept.len());
    println!("first two filtered sentences:");
    print!("{}", write_vertical(&kept[..2]));
}
