//! Cross-checks the union-find sweep against an independent component-
//! tracking oracle, plus the invariances the construction must satisfy.

use treeph::diagmetrics::bottleneck;
use treeph::diagram::PersistenceDiagram;
use treeph::ph0::{persistence0, VertexFiltration};
use treeph_testkit::fixtures::random_graph;
use treeph_testkit::sweep0_oracle;

fn pairs(d: &PersistenceDiagram<f64>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = d.dots().iter().map(|x| (x.birth, x.death)).collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

fn graph_size(seed: u64) -> usize {
    2 + (seed as usize * 7919) % 49
}

#[test]
fn matches_component_tracking_oracle_on_200_random_graphs() {
    for seed in 0..200u64 {
        let (values, edges) = random_graph(seed, graph_size(seed));
        let f = VertexFiltration::new(values.clone(), &edges).unwrap();
        let got = pairs(&persistence0(&f));
        let want = sweep0_oracle(&values, &edges);
        assert_eq!(got, want, "seed {seed}");
    }
}

#[test]
fn dot_count_equals_number_of_local_minima() {
    for seed in 0..50u64 {
        let n = graph_size(seed);
        let (mut values, edges) = random_graph(seed, n);
        // Distinct values: a tie can merge a component at its own birth
        // height, and that zero-persistence pair is (correctly) not stored.
        for (i, v) in values.iter_mut().enumerate() {
            *v += i as f64 * 1e-9;
        }
        let f = VertexFiltration::new(values.clone(), &edges).unwrap();
        let dgm = persistence0(&f);

        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let minima = (0..n)
            .filter(|&v| {
                adj[v]
                    .iter()
                    .all(|&w| (values[w], w as u64) > (values[v], v as u64))
            })
            .count();
        assert_eq!(dgm.dots().len(), minima, "seed {seed}");
    }
}

#[test]
fn adding_a_constant_translates_every_dot_exactly() {
    let c = 0.25;
    for seed in 0..30u64 {
        let (values, edges) = random_graph(seed, graph_size(seed));
        let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
        let base = pairs(&persistence0(
            &VertexFiltration::new(values, &edges).unwrap(),
        ));
        let moved = pairs(&persistence0(
            &VertexFiltration::new(shifted, &edges).unwrap(),
        ));
        let expected: Vec<(f64, f64)> = base.iter().map(|&(b, d)| (b + c, d + c)).collect();
        assert_eq!(moved, expected, "seed {seed}");
    }
}

#[test]
fn positive_scaling_scales_every_dot_exactly() {
    // Power of two keeps the multiplication exact in binary floating point.
    let lambda = 2.0;
    for seed in 0..30u64 {
        let (values, edges) = random_graph(seed, graph_size(seed));
        let scaled: Vec<f64> = values.iter().map(|v| v * lambda).collect();
        let base = pairs(&persistence0(
            &VertexFiltration::new(values, &edges).unwrap(),
        ));
        let moved = pairs(&persistence0(
            &VertexFiltration::new(scaled, &edges).unwrap(),
        ));
        let expected: Vec<(f64, f64)> =
            base.iter().map(|&(b, d)| (b * lambda, d * lambda)).collect();
        assert_eq!(moved, expected, "seed {seed}");
    }
}

#[test]
fn relabeling_vertices_leaves_the_diagram_unchanged_for_distinct_values() {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    for seed in 0..30u64 {
        let n = graph_size(seed);
        let (mut values, edges) = random_graph(seed, n);
        // Force distinct values; ties would make the output depend on labels.
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        if values.len() < n {
            let start = *values.last().unwrap();
            for i in values.len()..n {
                values.push(start + (i + 1) as f64 * 0.001);
            }
        }
        let base = pairs(&persistence0(
            &VertexFiltration::new(values.clone(), &edges).unwrap(),
        ));

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut relabeled_values = vec![0.0; n];
        for (old, &new) in perm.iter().enumerate() {
            relabeled_values[new] = values[old];
        }
        let relabeled_edges: Vec<(usize, usize)> =
            edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let moved = pairs(&persistence0(
            &VertexFiltration::new(relabeled_values, &relabeled_edges).unwrap(),
        ));
        assert_eq!(base, moved, "seed {seed}");
    }
}

#[test]
fn bottleneck_between_perturbed_functions_is_bounded_by_sup_norm() {
    use rand::Rng;
    use rand::SeedableRng;
    for seed in 0..100u64 {
        let n = graph_size(seed);
        let (values, edges) = random_graph(seed, n);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
        let eps: f64 = rng.gen_range(0.01..1.5);
        let perturbed: Vec<f64> = values
            .iter()
            .map(|v| v + rng.gen_range(-eps..eps))
            .collect();
        let sup: f64 = values
            .iter()
            .zip(&perturbed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);

        let da = persistence0(&VertexFiltration::new(values, &edges).unwrap());
        let db = persistence0(&VertexFiltration::new(perturbed, &edges).unwrap());
        let dist = bottleneck(&da, &db).unwrap();
        assert!(
            dist <= sup + 1e-9,
            "seed {seed}: bottleneck {dist} exceeds sup-norm {sup}"
        );
    }
}
