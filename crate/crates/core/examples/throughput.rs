//! Counting throughput on a random vertical corpus streamed from disk.
//!
//! cargo run --release --example throughput -- [million_tokens] [threads]

use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use gramdisp::pipeline;
use gramdisp::synth::{random_gold, write_random_corpus};
use gramdisp::RunConfig;

fn main() {
    let mut args = std::env::args().skip(1);
    let millions: f64 = args.next().map_or(10.0, |s| s.parse().expect("million tokens"));
    let threads: usize = args.next().map_or(0, |s| s.parse().expect("threads"));
    let dir = tempfile_dir();
    let path = dir.join("random.vert");

    let start = Instant::now();
    let written = write_random_corpus(
        BufWriter::new(File::create(&path).unwrap()),
        (millions * 1e6) as u64,
        200_000,
        200,
        8,
    )
    .unwrap();
    println!("generated {written} tokens in {:.1} s", start.elapsed().as_secs_f64());

    let config = RunConfig {
        threads,
        ..RunConfig::default()
    };
    let lexicon = pipeline::compile_lexicon(&random_gold(200), &config);
    let start = Instant::now();
    let table = pipeline::with_threads(threads, || pipeline::count_corpus_file(&path, &lexicon, &config))
        .unwrap()
        .unwrap();
    let secs = start.elapsed().as_secs_f64();
    let contexts: u64 = table.rows().values().map(|r| r.context_total()).sum();
    println!(
        "counted in {secs:.2} s: {:.2} M tokens/s, {contexts} context tokens, {} threads",
        written as f64 / secs / 1e6,
        if threads == 0 { rayon::current_num_threads() } else { threads }
    );
    std::fs::remove_dir_all(&dir).ok();
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("gramdisp-throughput-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
