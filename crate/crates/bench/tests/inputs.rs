use hardcore::{exact_log_z, ursell, Fugacities};
use hardcore_bench::{graph, ursell_inputs, EXACT_GRAPHS};
use num_rational::Ratio;

#[test]
fn benchmark_graphs_generate() {
    for spec in EXACT_GRAPHS {
        assert!(graph(spec).n_vertices() <= 30, "{spec}");
    }
}

#[test]
fn complete_bipartite_input_has_known_partition_function() {
    // at unit fugacities every independent set of K_{a,b} lies on one side
    let z = exact_log_z(
        &graph("complete_bipartite(10,10)"),
        &Fugacities::new(1.0, 1.0).unwrap(),
    )
    .unwrap();
    assert!((z - 2047f64.ln()).abs() < 1e-12);
}

#[test]
fn ursell_inputs_match_closed_forms() {
    // φ(K_n) = (−1)^{n−1}/n and φ(C_n) = (−1)^{n−1}(n−1)/n!
    let expected = [Ratio::new(1, 5), Ratio::new(1, 7), Ratio::new(-7, 40320)];
    for ((name, h), want) in ursell_inputs().iter().zip(expected) {
        assert_eq!(ursell(h).unwrap(), want, "{name}");
    }
}
