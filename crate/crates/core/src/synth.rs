//! Seeded synthetic corpora: a controlled-dispersion corpus for checking the
//! direction of the entropy hypothesis, and a large random vertical corpus for
//! throughput runs.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AnnotatedToken, Sentence};
use crate::targets::{Degree, GoldItem, GoldSet};

/// Context vocabulary size for degree `d`: `10 * 4^(d-1)`.
pub fn vocabulary_size(degree: Degree) -> usize {
    10 * 4usize.pow(u32::from(degree.get()) - 1)
}

/// Shape of the controlled-dispersion corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DispersionSpec {
    pub targets_per_degree: usize,
    /// Occurrences of every target (equal token frequency).
    pub occurrences: usize,
    /// Context tokens on each side of an occurrence.
    pub side: usize,
    pub seed: u64,
}

impl Default for DispersionSpec {
    fn default() -> Self {
        Self {
            targets_per_degree: 10,
            occurrences: 16,
            side: 2,
            seed: 7,
        }
    }
}

fn token(form: String, pos: &str) -> AnnotatedToken {
    AnnotatedToken {
        lemma: form.clone(),
        surface: form,
        pos: pos.to_owned(),
    }
}

/// One sentence per occurrence: `side` contexts, the target, `side` contexts.
/// Contexts of a degree-`d` target are drawn uniformly from a vocabulary of
/// [`vocabulary_size`] nouns shared by all targets of that degree. Sentences
/// are shuffled so targets interleave.
pub fn dispersion_corpus(spec: &DispersionSpec) -> (Vec<Sentence>, GoldSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut items = Vec::new();
    let mut sentences = Vec::new();
    for degree in Degree::ALL {
        let d = degree.get();
        let k = vocabulary_size(degree);
        for t in 0..spec.targets_per_degree {
            let form = format!("p{d}x{t:03}");
            items.push(GoldItem::new(&form, degree));
            for _ in 0..spec.occurrences {
                let mut tokens = Vec::with_capacity(2 * spec.side + 1);
                for i in 0..2 * spec.side + 1 {
                    if i == spec.side {
                        tokens.push(token(form.clone(), "APPR"));
                    } else {
                        tokens.push(token(format!("n{d}w{}", rng.gen_range(0..k)), "NN"));
                    }
                }
                sentences.push(Sentence { tokens });
            }
        }
    }
    // Fisher-Yates with the same generator keeps the corpus a function of the seed
    for i in (1..sentences.len()).rev() {
        sentences.swap(i, rng.gen_range(0..=i));
    }
    let gold = GoldSet::new(items).expect("generated forms are unique");
    (sentences, gold)
}

/// Gold set for [`write_random_corpus`]: `n` single-token prepositions
/// `q0 .. q{n-1}` plus two multiword forms `im q0` and `am q1`, degrees
/// cycling 1..4.
pub fn random_gold(n: usize) -> GoldSet {
    let mut items: Vec<GoldItem> = (0..n)
        .map(|i| GoldItem::new(&format!("q{i}"), Degree::ALL[i % 4]))
        .collect();
    if n >= 2 {
        items.push(GoldItem::new("im q0", Degree::ALL[0]));
        items.push(GoldItem::new("am q1", Degree::ALL[1]));
    }
    GoldSet::new(items).expect("generated forms are unique")
}

const RANDOM_POS: [&str; 8] = ["NN", "NN", "NE", "ADJA", "VVFIN", "ADV", "ART", "APPR"];

/// Writes roughly `tokens` tokens of random vertical text. Lemmas follow a
/// log-uniform (Zipf-like) law over `vocabulary` types, sentences are 8 to 30
/// tokens long, and about one token in twenty is one of the `targets`
/// prepositions of [`random_gold`]. Returns the number of tokens written.
pub fn write_random_corpus<W: Write>(
    mut out: W,
    tokens: u64,
    vocabulary: u32,
    targets: usize,
    seed: u64,
) -> io::Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ln_v = f64::from(vocabulary.max(2)).ln();
    let mut written = 0u64;
    while written < tokens {
        let len = rng.gen_range(8..=30);
        for _ in 0..len {
            if targets > 0 && rng.gen_ratio(1, 20) {
                let q = rng.gen_range(0..targets);
                if q < 2 && rng.gen_bool(0.5) {
                    let (surface, lemma) = if q == 0 { ("im", "in") } else { ("am", "an") };
                    writeln!(out, "{surface}\t{lemma}\tAPPRART")?;
                    written += 1;
                }
                writeln!(out, "q{q}\tq{q}\tAPPR")?;
            } else {
                let w = (rng.gen::<f64>() * ln_v).exp() as u32;
                let pos = RANDOM_POS[rng.gen_range(0..RANDOM_POS.len())];
                writeln!(out, "w{w}\tw{w}\t{pos}")?;
            }
            written += 1;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(written)
}
