//! Inputs shared by the benchmarks and their smoke test.

use hardcore::cluster::SmallGraph;
use hardcore::{BipartiteGraph, Fugacities, GraphFamily};

/// Graphs timed by the exact partition function benchmark.
pub const EXACT_GRAPHS: [&str; 3] = [
    "even_cycle(20)",
    "random_biregular(2,3,12,1)",
    "complete_bipartite(10,10)",
];

/// Cutoffs timed on the 12-cycle.
pub const EXPANSION_CUTOFFS: [usize; 3] = [4, 6, 8];

pub fn graph(spec: &str) -> BipartiteGraph {
    spec.parse::<GraphFamily>()
        .expect("valid family")
        .generate()
        .expect("family generates")
}

/// Fugacities deep inside the certified regime.
pub fn certified_fugacities() -> Fugacities {
    Fugacities::new(50.0, 0.1).unwrap()
}

pub fn ursell_inputs() -> Vec<(&'static str, SmallGraph)> {
    vec![
        ("K5", SmallGraph::complete(5)),
        ("K7", SmallGraph::complete(7)),
        ("C8", SmallGraph::cycle(8)),
    ]
}
