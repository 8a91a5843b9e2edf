//! Tree ingestion properties: length accounting, subsample coverage, and
//! lossless round-trips.

use treeph::diagmetrics::hausdorff;
use treeph::geom::Point3;
use treeph::treeio::EmbeddedTree;
use treeph_testkit::fixtures::{random_tree, rigid_motion};

#[test]
fn total_length_equals_reordered_edge_sum() {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    for seed in 0..20u64 {
        let tree = random_tree(seed, 51); // 50 edges
        let total: f64 = tree.total_length();

        let mut terms: Vec<f64> = tree
            .edges()
            .iter()
            .map(|&(u, v)| tree.vertices()[u].pos.dist(tree.vertices()[v].pos))
            .collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x77);
        terms.shuffle(&mut rng);
        let reordered: f64 = terms.iter().sum();
        assert!(
            (total - reordered).abs() <= 1e-12 * total.abs().max(1.0),
            "seed {seed}: {total} vs {reordered}"
        );
    }
}

/// Rebuild a tree with every vertex position transformed, same topology.
fn map_positions(tree: &EmbeddedTree<f64>, moved: &[Point3<f64>]) -> EmbeddedTree<f64> {
    let mut text = String::new();
    for (v, p) in tree.vertices().iter().zip(moved) {
        text.push_str(&format!("v {} {} {} {}\n", v.id, p.x, p.y, p.z));
    }
    for &(u, w) in tree.edges() {
        text.push_str(&format!(
            "e {} {}\n",
            tree.vertices()[u].id,
            tree.vertices()[w].id
        ));
    }
    EmbeddedTree::parse(text.as_bytes()).unwrap().0
}

#[test]
fn total_length_is_rigid_motion_invariant() {
    for seed in 0..20u64 {
        let tree = random_tree(seed + 40, 30);
        let moved_pts = rigid_motion(
            &tree.positions(),
            Point3::new(0.3, -1.0, 2.0),
            1.234,
            Point3::new(-3.0, 8.0, 1.0),
        );
        let moved = map_positions(&tree, &moved_pts);
        let a: f64 = tree.total_length();
        let b: f64 = moved.total_length();
        assert!(
            (a - b).abs() <= 1e-9 * a.abs().max(1.0),
            "seed {seed}: {a} vs {b}"
        );
    }
}

/// Five straight branches of exactly 20mm each, polyline steps of 1mm.
fn uniform_star() -> EmbeddedTree<f64> {
    let dirs = [
        (1.0, 0.0, 0.0),
        (-1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, -1.0, 0.0),
        (0.0, 0.0, 1.0),
    ];
    let mut text = String::from("v 0 0 0 0\n");
    let mut next_id = 1u64;
    let mut edges = String::new();
    for (dx, dy, dz) in dirs {
        let mut prev = 0u64;
        for step in 1..=20 {
            let s = step as f64;
            text.push_str(&format!(
                "v {next_id} {} {} {}\n",
                dx * s,
                dy * s,
                dz * s
            ));
            edges.push_str(&format!("e {prev} {next_id}\n"));
            prev = next_id;
            next_id += 1;
        }
    }
    text.push_str(&edges);
    let (tree, warnings) = EmbeddedTree::parse(text.as_bytes()).unwrap();
    assert!(warnings.is_empty());
    tree
}

#[test]
fn subsample_stays_within_the_per_branch_spacing_bound() {
    let tree = uniform_star();
    assert_eq!(tree.branches().len(), 5);
    // 25 points over 5 equal branches allocate exactly 5 per branch, so no
    // vertex is farther than branch_length / 5 from the sample.
    let m = 25;
    let bound = 20.0 / 5.0;
    for seed in 0..10u64 {
        let cloud = tree.subsample(m, seed).unwrap();
        assert_eq!(cloud.len(), m);
        let dist = hausdorff(&tree.positions(), &cloud.points).unwrap();
        assert!(dist <= bound + 1e-9, "seed {seed}: {dist} > {bound}");
    }
}

#[test]
fn subsample_is_deterministic_per_seed() {
    let tree = random_tree(9, 40);
    let a = tree.subsample(17, 123).unwrap();
    let b = tree.subsample(17, 123).unwrap();
    assert_eq!(a, b);
}

#[test]
fn parse_serialize_parse_is_lossless() {
    for seed in 0..20u64 {
        let tree = random_tree(seed + 300, 2 + (seed as usize % 40));
        let text = tree.to_string_fmt();
        let (again, warnings) = EmbeddedTree::parse(text.as_bytes()).unwrap();
        assert!(warnings.is_empty(), "seed {seed}");
        assert_eq!(tree.vertices(), again.vertices(), "seed {seed}");
        assert_eq!(tree.edges(), again.edges(), "seed {seed}");
    }
}
