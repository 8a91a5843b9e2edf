//! Randomized inputs for property suites. Everything is seeded so failures
//! replay exactly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treeph::geom::Point3;
use treeph::treeio::EmbeddedTree;

/// Connected graph with `n` vertices, random extra edges, and finite values.
/// Returns (values, edges). Values may contain ties.
pub fn random_graph(seed: u64, n: usize) -> (Vec<f64>, Vec<(usize, usize)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.2) {
                // Quantized so ties actually happen.
                rng.gen_range(-2i32..=2) as f64
            } else {
                rng.gen_range(-10.0..10.0)
            }
        })
        .collect();
    let mut edges = Vec::new();
    // Random spanning tree keeps it connected.
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v));
    }
    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && !edges.contains(&(u.min(v), u.max(v))) {
            edges.push((u.min(v), u.max(v)));
        }
    }
    (values, edges)
}

/// Point cloud of `n` points in a box of the given half-width.
pub fn random_cloud(seed: u64, n: usize, half_width: f64) -> Vec<Point3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            Point3::new(
                rng.gen_range(-half_width..half_width),
                rng.gen_range(-half_width..half_width),
                rng.gen_range(-half_width..half_width),
            )
        })
        .collect()
}

/// Finite diagram dots as (birth, death) with death > birth.
pub fn random_finite_dots(seed: u64, n: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let birth = rng.gen_range(0.0..5.0);
            let pers = rng.gen_range(0.01..3.0);
            (birth, birth + pers)
        })
        .collect()
}

/// Random embedded tree: `n` vertices, spanning-tree edges, positions in a
/// 40mm box. Vertex ids are 1-based to exercise the id/index split.
pub fn random_tree(seed: u64, n: usize) -> EmbeddedTree<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    for i in 0..n {
        let x = rng.gen_range(-20.0..20.0);
        let y = rng.gen_range(-20.0..20.0);
        let z = rng.gen_range(-20.0..20.0);
        text.push_str(&format!("v {} {x} {y} {z}\n", i + 1));
    }
    for v in 1..n {
        let u = rng.gen_range(0..v);
        text.push_str(&format!("e {} {}\n", u + 1, v + 1));
    }
    let (tree, warnings) = EmbeddedTree::parse(text.as_bytes()).expect("generated tree parses");
    assert!(warnings.is_empty(), "spanning tree is clean");
    tree
}

/// Rotation about `axis` by `angle` plus `shift`, applied to every point.
/// Rodrigues' formula; axis need not be normalized.
pub fn rigid_motion(
    points: &[Point3<f64>],
    axis: Point3<f64>,
    angle: f64,
    shift: Point3<f64>,
) -> Vec<Point3<f64>> {
    let k = axis.normalized().expect("axis must be nonzero");
    let (sin, cos) = angle.sin_cos();
    points
        .iter()
        .map(|&p| {
            let kxp = Point3::new(
                k.y * p.z - k.z * p.y,
                k.z * p.x - k.x * p.z,
                k.x * p.y - k.y * p.x,
            );
            let kdp = k.dot(p);
            let rotated = p.scale(cos).add(kxp.scale(sin)).add(k.scale(kdp * (1.0 - cos)));
            rotated.add(shift)
        })
        .collect()
}

/// Perturb each coordinate by at most `eps` (L-inf jitter).
pub fn jitter(points: &[Point3<f64>], seed: u64, eps: f64) -> Vec<Point3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    points
        .iter()
        .map(|&p| {
            Point3::new(
                p.x + rng.gen_range(-eps..eps),
                p.y + rng.gen_range(-eps..eps),
                p.z + rng.gen_range(-eps..eps),
            )
        })
        .collect()
}
