//! Entropy, frequency and context types for a few hand-made context
//! distributions, in bits and in other log bases.
//!
//! cargo run --example dispersion_measures

use gramdisp::entropy;

fn main() {
    let cases: [(&str, Vec<u64>); 5] = [
        ("one context", vec![12]),
        ("uniform over 4", vec![3, 3, 3, 3]),
        ("uniform over 4, scaled", vec![300, 300, 300, 300]),
        ("skewed", vec![9, 1, 1, 1]),
        ("toy T", vec![2, 1, 1, 1]),
    ];
    println!("{:<24} {:>6} {:>6} {:>9} {:>9}", "distribution", "tokens", "types", "H bits", "H nats");
    for (name, counts) in cases {
        let tokens: u64 = counts.iter().sum();
        let bits = entropy(counts.iter().copied(), 2.0).unwrap();
        let nats = entropy(counts.iter().copied(), std::f64::consts::E).unwrap();
        println!("{name:<24} {tokens:>6} {:>6} {bits:>9.6} {nats:>9.6}", counts.len());
    }
    println!("\nno contexts: {:?}", entropy(Vec::<u64>::new(), 2.0).unwrap_err());
}
