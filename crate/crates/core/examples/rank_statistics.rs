//! The statistics behind the evaluation: midranks, Spearman's rho with its
//! t-test, Steiger's Z for two dependent correlations, and Average Precision.
//!
//! cargo run --example rank_statistics

use gramdisp::stats::{
    average_precision, expected_average_precision, midranks, ranked_average_precision, rho_t_test_p, spearman_rho,
    steiger_z, PairedSample, ScoredItem,
};

fn main() {
    let x = vec![10.0, 20.0, 20.0, 30.0];
    let y = vec![1.0, 2.0, 3.0, 4.0];
    println!("midranks of {x:?}: {:?}", midranks(&x).unwrap());
    let rho = spearman_rho(&PairedSample::new(x, y).unwrap()).unwrap();
    println!("rho = {rho:.6}");

    for (r, n) in [(0.42, 206), (0.46, 206), (0.2, 30)] {
        println!("p(rho = {r}, n = {n}) = {:.3e}", rho_t_test_p(r, n).unwrap());
    }

    let c = steiger_z(0.5, 0.3, 0.6, 103).unwrap();
    println!("Steiger: r1 = 0.5, r2 = 0.3, r12 = 0.6, n = 103 -> Z = {:.3}, p = {:.4}", c.z_stat, c.p_two_tailed);

    println!("AP [P, N, P] = {:.6}", average_precision(&[true, false, true]).unwrap());
    let items = [
        ScoredItem { id: "a", score: 3.0, positive: false },
        ScoredItem { id: "b", score: 3.0, positive: true },
        ScoredItem { id: "c", score: 2.0, positive: true },
        ScoredItem { id: "d", score: 1.0, positive: false },
    ];
    println!(
        "tied top scores: AP by id order = {:.6}, expected over tie orders = {:.6}",
        ranked_average_precision(&items).unwrap(),
        expected_average_precision(&items).unwrap()
    );
}
