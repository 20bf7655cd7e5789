//! Paired sign-flip permutation test: is system A's per-query
//! advantage over system B more than chance?
//!
//! Run: `cargo run --example significance`

use ranklab::metrics::{paired_permutation_test, PerQuery};

fn main() -> ranklab::Result<()> {
    // Reciprocal ranks for 24 queries under two systems. A wins on
    // most queries by a small margin.
    let mut a = PerQuery::new();
    let mut b = PerQuery::new();
    for i in 0..24 {
        let qid = format!("q{i:02}");
        let base = 1.0 / (1.0 + (i % 5) as f64);
        a.insert(qid.clone(), (base + 0.18).min(1.0));
        b.insert(qid, base);
    }

    let p = paired_permutation_test(&a, &b, 10_000, 7)?;
    println!("consistent improvement over 24 queries: p = {p:.6}");

    // The same margin spread over only 5 queries is far weaker
    // evidence.
    let a_small: PerQuery = a.iter().take(5).map(|(k, v)| (k.clone(), *v)).collect();
    let b_small: PerQuery = b.iter().take(5).map(|(k, v)| (k.clone(), *v)).collect();
    let p = paired_permutation_test(&a_small, &b_small, 10_000, 7)?;
    println!("same margin over 5 queries:            p = {p:.6}");

    // Identical inputs can never be significant.
    let p = paired_permutation_test(&a, &a.clone(), 10_000, 7)?;
    println!("system compared with itself:           p = {p:.6}");
    Ok(())
}
