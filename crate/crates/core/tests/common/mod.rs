//! Shared graph corpus for the integration tests.
#![allow(dead_code)]

use gcr::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GAMMA: f64 = 0.9;
pub const TOL: f64 = 1e-9;
pub const MAX_ITERS: usize = 100_000;

pub struct Named {
    pub name: String,
    pub graph: Graph,
}

fn named(name: impl Into<String>, graph: Graph) -> Named {
    Named {
        name: name.into(),
        graph,
    }
}

pub fn paths(range: std::ops::RangeInclusive<usize>) -> Vec<Named> {
    range.map(|n| named(format!("P{n}"), Graph::path(n))).collect()
}

pub fn cycles(range: std::ops::RangeInclusive<usize>) -> Vec<Named> {
    range.map(|n| named(format!("C{n}"), Graph::cycle(n))).collect()
}

pub fn star3() -> Named {
    named("K1,3", Graph::star(3))
}

/// 25 labelled trees from uniform Prüfer sequences, 4 to 8 vertices, with a
/// fixed seed.
pub fn random_trees() -> Vec<Named> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c0b_5eed);
    (0..25)
        .map(|i| {
            let n: usize = rng.gen_range(4..=8);
            let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(1..=n)).collect();
            named(
                format!("T{i}[n={n}]"),
                Graph::from_prufer(&seq).expect("valid Prüfer sequence"),
            )
        })
        .collect()
}

/// Paths, cycles, the claw and the random trees.
pub fn full_corpus() -> Vec<Named> {
    let mut all = paths(2..=6);
    all.extend(cycles(3..=6));
    all.push(star3());
    all.extend(random_trees());
    all
}

/// Every tree of the corpus with at most `max_n` vertices.
pub fn trees_up_to(max_n: usize) -> Vec<Named> {
    full_corpus()
        .into_iter()
        .filter(|g| g.graph.is_tree() && g.graph.vertex_count() <= max_n)
        .collect()
}
