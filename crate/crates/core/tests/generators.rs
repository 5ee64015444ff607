use rand::seq::SliceRandom;

use propset::generators::{generate_jin, JinConfig};
use propset::{build_graph, Graph, Seed};

/// Global clustering coefficient: 3 * triangles / connected triples.
fn transitivity(g: &Graph) -> f64 {
    let mut closed = 0usize;
    let mut triples = 0usize;
    for x in 0..g.num_nodes() {
        let nb = g.neighbors(x);
        let d = nb.len();
        triples += d * d.saturating_sub(1) / 2;
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if g.has_edge(a, b) {
                    closed += 1;
                }
            }
        }
    }
    if triples == 0 {
        0.0
    } else {
        closed as f64 / triples as f64
    }
}

/// Stub matching on the same degree sequence; loops and repeats are dropped.
fn configuration_model(g: &Graph, seed: Seed) -> Graph {
    let mut stubs: Vec<usize> = (0..g.num_nodes())
        .flat_map(|x| std::iter::repeat_n(x, g.degree(x)))
        .collect();
    stubs.shuffle(&mut seed.rng());
    let pairs = stubs.chunks_exact(2).map(|c| (c[0], c[1])).filter(|(a, b)| a != b);
    Graph::from_edges(g.num_nodes(), pairs).unwrap()
}

#[test]
fn growth_model_clusters_beyond_degree_matched_baseline() {
    for s in 0..5u64 {
        let edges = generate_jin(&JinConfig::social(Seed(40 + s))).unwrap();
        let (g, stats) = build_graph(2000, &edges).unwrap();
        assert_eq!((stats.duplicates, stats.self_loops), (0, 0));
        let observed = transitivity(&g);
        let baseline: f64 = (0..5)
            .map(|r| transitivity(&configuration_model(&g, Seed(s).derive_indexed("config", r))))
            .sum::<f64>()
            / 5.0;
        assert!(
            observed > 3.0 * baseline,
            "seed {s}: clustering {observed:.4} vs degree-matched {baseline:.4}"
        );
    }
}

#[test]
fn growth_model_equilibrium_is_sparse() {
    let edges = generate_jin(&JinConfig::social(Seed(3))).unwrap();
    let mean_degree = 2.0 * edges.len() as f64 / 2000.0;
    assert!((2.0..10.0).contains(&mean_degree), "mean degree {mean_degree}");
    assert!(edges.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
}
