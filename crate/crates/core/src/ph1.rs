//! Dimension-1 persistence of a Vietoris-Rips complex over a point cloud.
//!
//! An edge appears at half the distance between its endpoints; a triangle
//! appears with its last edge (flag complex). Homology is computed over
//! GF(2) by column reduction of the triangle boundary matrix, with edges
//! pre-classified by union-find so only creator edges can give birth to
//! loops. Loops still open at `max_scale` are reported at infinity and the
//! diagram is flagged as truncated.

use std::collections::HashMap;

use thiserror::Error;

use crate::diagram::{Dot, PersistenceDiagram};
use crate::num::Real;
use crate::treeio::{EmbeddedTree, PointCloud, SubsampleError};

#[derive(Debug, Error)]
pub enum RipsError {
    #[error("max_scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error(transparent)]
    Subsample(#[from] SubsampleError),
}

/// Edge of the Rips filtration; `u < v` and `scale` is half the point
/// distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipsEdge<R> {
    pub scale: R,
    pub u: u32,
    pub v: u32,
}

/// Triangle of the flag complex: appears at the max of its edge scales.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RipsTriangle<R> {
    scale: R,
    verts: [u32; 3],
    edges: [u32; 3],
}

/// Rips filtration capped at `max_scale`, with simplices in filtration
/// order: by scale, then dimension, then lexicographic vertex tuple.
#[derive(Debug, Clone)]
pub struct RipsFiltration<R> {
    n_points: usize,
    max_scale: R,
    edges: Vec<RipsEdge<R>>,
    triangles: Vec<RipsTriangle<R>>,
}

impl<R: Real> RipsFiltration<R> {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn max_scale(&self) -> R {
        self.max_scale
    }

    pub fn edges(&self) -> &[RipsEdge<R>] {
        &self.edges
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }
}

/// Builds the Rips filtration of `cloud` up to `max_scale`.
pub fn build_rips<R: Real>(
    cloud: &PointCloud<R>,
    max_scale: R,
) -> Result<RipsFiltration<R>, RipsError> {
    if !(max_scale > R::zero() && max_scale.is_finite()) {
        return Err(RipsError::BadScale(max_scale.to_f64_lossy()));
    }
    if cloud.is_empty() {
        return Err(RipsError::EmptyCloud);
    }
    let pts = &cloud.points;
    let n = pts.len();
    let half = R::of(0.5);

    let mut edges: Vec<RipsEdge<R>> = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let scale = pts[u].dist(pts[v]) * half;
            if scale <= max_scale {
                edges.push(RipsEdge {
                    scale,
                    u: u as u32,
                    v: v as u32,
                });
            }
        }
    }
    edges.sort_by(|a, b| {
        (a.scale, a.u, a.v)
            .partial_cmp(&(b.scale, b.u, b.v))
            .expect("scales are finite")
    });

    let mut edge_index = HashMap::with_capacity(edges.len());
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        edge_index.insert((e.u, e.v), k as u32);
        adjacency[e.u as usize].push(e.v);
        adjacency[e.v as usize].push(e.u);
    }
    for nb in adjacency.iter_mut() {
        nb.sort_unstable();
    }

    let mut triangles: Vec<RipsTriangle<R>> = Vec::new();
    for e in &edges {
        let (u, v) = (e.u, e.v);
        // Common neighbors w > v close a triangle u < v < w exactly once.
        let (au, av) = (&adjacency[u as usize], &adjacency[v as usize]);
        let (mut i, mut j) = (0usize, 0usize);
        while i < au.len() && j < av.len() {
            let (a, b) = (au[i], av[j]);
            if a == b {
                if a > v {
                    let w = a;
                    let euv = edge_index[&(u, v)];
                    let euw = edge_index[&(u, w)];
                    let evw = edge_index[&(v, w)];
                    let scale = edges[euv as usize]
                        .scale
                        .max(edges[euw as usize].scale)
                        .max(edges[evw as usize].scale);
                    triangles.push(RipsTriangle {
                        scale,
                        verts: [u, v, w],
                        edges: [euv, euw, evw],
                    });
                }
                i += 1;
                j += 1;
            } else if a < b {
                i += 1;
            } else {
                j += 1;
            }
        }
    }
    triangles.sort_by(|a, b| {
        (a.scale, a.verts)
            .partial_cmp(&(b.scale, b.verts))
            .expect("scales are finite")
    });

    Ok(RipsFiltration {
        n_points: n,
        max_scale,
        edges,
        triangles,
    })
}

/// Symmetric difference of two ascending index lists (GF(2) column add).
fn xor_columns(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Dimension-1 persistence diagram of the filtration. Dots with equal birth
/// and death are dropped; loops that outlive `max_scale` appear at infinity
/// and mark the diagram truncated.
pub fn persistence1<R: Real>(rips: &RipsFiltration<R>) -> PersistenceDiagram<R> {
    let n_edges = rips.edges.len();

    // Edges that do not merge components create 1-cycles.
    let mut parent: Vec<u32> = (0..rips.n_points as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    let mut is_creator = vec![false; n_edges];
    for (k, e) in rips.edges.iter().enumerate() {
        let (ru, rv) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if ru == rv {
            is_creator[k] = true;
        } else {
            parent[ru as usize] = rv;
        }
    }

    let mut pivot_of_edge: Vec<Option<usize>> = vec![None; n_edges];
    let mut reduced: Vec<Vec<u32>> = Vec::with_capacity(rips.triangles.len());
    let mut dots = Vec::new();

    for (t, tri) in rips.triangles.iter().enumerate() {
        let mut col: Vec<u32> = tri.edges.to_vec();
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match pivot_of_edge[low as usize] {
                Some(t2) => col = xor_columns(&col, &reduced[t2]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_of_edge[low as usize] = Some(t);
            debug_assert!(is_creator[low as usize], "pivot must be a creator edge");
            let birth = rips.edges[low as usize].scale;
            let death = tri.scale;
            if death > birth {
                dots.push(Dot::new(1, birth, death));
            }
        }
        reduced.push(col);
    }

    let mut truncated = false;
    for k in 0..n_edges {
        if is_creator[k] && pivot_of_edge[k].is_none() {
            truncated = true;
            dots.push(Dot::new(1, rips.edges[k].scale, R::infinity()));
        }
    }

    let truncated_at = truncated.then_some(rips.max_scale);
    PersistenceDiagram::new(dots, truncated_at).expect("reduction emits only valid dots")
}

/// Loops of a tree's shape: subsample `target` points (seeded), build the
/// Rips filtration, and return its dimension-1 diagram. Without an explicit
/// `max_scale` the cap is half the subsample's bounding-box diagonal, which
/// cones the complex off completely (no truncation). A degenerate cloud
/// (single point or all points coincident) has no loops.
pub fn tree_loops<R: Real>(
    tree: &EmbeddedTree<R>,
    target: usize,
    seed: u64,
    max_scale: Option<R>,
) -> Result<PersistenceDiagram<R>, RipsError> {
    let cloud = tree.subsample(target, seed)?;
    let scale = match max_scale {
        Some(s) => s,
        None => {
            let auto = cloud.bounding_diagonal() * R::of(0.5);
            if auto <= R::zero() {
                return Ok(PersistenceDiagram::empty());
            }
            auto
        }
    };
    let rips = build_rips(&cloud, scale)?;
    Ok(persistence1(&rips))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point3;

    fn cloud(pts: &[(f64, f64, f64)]) -> PointCloud<f64> {
        PointCloud::new(pts.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect())
    }

    #[test]
    fn triangle_cloud_builds_expected_complex() {
        // Equilateral side 2: edges at scale 1, one triangle at scale 1.
        let c = cloud(&[(0.0, 0.0, 0.0), (2.0, 0.0, 0.0), (1.0, 3.0f64.sqrt(), 0.0)]);
        let r = build_rips(&c, 1.5).unwrap();
        assert_eq!(r.edges().len(), 3);
        assert!(r.edges().iter().all(|e| (e.scale - 1.0).abs() < 1e-12));
        assert_eq!(r.triangle_count(), 1);
    }

    #[test]
    fn distant_points_stay_disconnected() {
        let c = cloud(&[(0.0, 0.0, 0.0), (10.0, 0.0, 0.0)]);
        let r = build_rips(&c, 1.0).unwrap();
        assert!(r.edges().is_empty());
        assert_eq!(r.triangle_count(), 0);
    }

    #[test]
    fn scale_cap_is_validated() {
        let c = cloud(&[(0.0, 0.0, 0.0)]);
        assert!(matches!(build_rips(&c, 0.0), Err(RipsError::BadScale(_))));
        assert!(matches!(
            build_rips(&c, f64::INFINITY),
            Err(RipsError::BadScale(_))
        ));
        let empty = PointCloud::<f64>::new(vec![]);
        assert!(matches!(build_rips(&empty, 1.0), Err(RipsError::EmptyCloud)));
    }

    #[test]
    fn unit_square_has_one_loop() {
        let c = cloud(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (1.0, 1.0, 0.0), (0.0, 1.0, 0.0)]);
        let r = build_rips(&c, 1.0).unwrap();
        // Four sides at scale 1/2, two diagonals at sqrt(2)/2, four triangles.
        assert_eq!(r.edges().len(), 6);
        assert_eq!(r.triangle_count(), 4);
        let d = persistence1(&r);
        assert_eq!(d.dots().len(), 1);
        let dot = d.dots()[0];
        assert_eq!(dot.dim, 1);
        assert!((dot.birth - 0.5).abs() < 1e-15);
        assert!((dot.death - 2.0f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(!d.is_truncated());
    }

    #[test]
    fn collinear_points_have_no_loops() {
        let c = cloud(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (2.0, 0.0, 0.0)]);
        let r = build_rips(&c, 5.0).unwrap();
        let d = persistence1(&r);
        assert!(d.dots().is_empty());
    }

    #[test]
    fn tight_cap_truncates_open_loops() {
        // Square whose loop closes at sqrt(2)/2; cap below that leaves it
        // open.
        let c = cloud(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (1.0, 1.0, 0.0), (0.0, 1.0, 0.0)]);
        let r = build_rips(&c, 0.6).unwrap();
        let d = persistence1(&r);
        assert_eq!(d.dots().len(), 1);
        assert!(d.dots()[0].is_infinite());
        assert_eq!(d.dots()[0].birth, 0.5);
        assert_eq!(d.truncated_at(), Some(0.6));
    }

    #[test]
    fn duplicate_points_are_tolerated() {
        let c = cloud(&[
            (0.0, 0.0, 0.0),
            (0.0, 0.0, 0.0),
            (1.0, 0.0, 0.0),
            (1.0, 1.0, 0.0),
            (0.0, 1.0, 0.0),
        ]);
        let r = build_rips(&c, 1.0).unwrap();
        let d = persistence1(&r);
        // The duplicated corner changes nothing topologically.
        assert_eq!(d.dots().len(), 1);
        assert!((d.dots()[0].death - 2.0f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn straight_tree_has_no_loops() {
        let (t, _) = EmbeddedTree::<f64>::parse(
            "v 0 0 0 0\nv 1 1 0 0\nv 2 2 0 0\nv 3 3 0 0\ne 0 1\ne 1 2\ne 2 3\n".as_bytes(),
        )
        .unwrap();
        let d = tree_loops(&t, 10, 0, None).unwrap();
        assert!(d.dots().is_empty());
    }

    #[test]
    fn single_point_tree_has_empty_loop_diagram() {
        let (t, _) = EmbeddedTree::<f64>::parse("v 0 1 2 3\n".as_bytes()).unwrap();
        let d = tree_loops(&t, 5, 0, None).unwrap();
        assert!(d.dots().is_empty());
        assert!(!d.is_truncated());
    }
}
