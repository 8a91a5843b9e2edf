//! Dimension-1 Rips oracle via persistent Betti number tables.
//!
//! Instead of pairing simplices through matrix reduction, this computes the
//! rank of every map H1(K_a) -> H1(K_b) directly from GF(2) matrix ranks and
//! reads the diagram off the inclusion-exclusion multiplicities
//!   mu(a, b) = [beta(a, b-1) - beta(a-1, b-1)] - [beta(a, b) - beta(a-1, b)]
//! with essential classes from the final complex. Quadratic in everything,
//! fine for a dozen points.

use treeph::geom::Point3;

/// GF(2) column vector as a bitmask over at most 128 rows.
type Col = u128;

fn rank_gf2(mut cols: Vec<Col>) -> usize {
    let mut rank = 0usize;
    let mut pivots: Vec<Col> = Vec::new();
    for col in cols.iter_mut() {
        let mut c = *col;
        for &p in &pivots {
            let p_low = 127 - p.leading_zeros();
            if c >> p_low & 1 == 1 {
                c ^= p;
            }
        }
        if c != 0 {
            pivots.push(c);
            pivots.sort_by_key(|p| std::cmp::Reverse(127 - p.leading_zeros()));
            rank += 1;
        }
    }
    rank
}

/// Dimension-1 persistence of the Rips filtration on `points` capped at
/// `max_scale`, as (birth, death) pairs (death = +inf for classes that
/// survive to the cap), sorted. Zero-persistence classes are dropped.
pub fn rips_betti_oracle(points: &[Point3<f64>], max_scale: f64) -> Vec<(f64, f64)> {
    let n = points.len();
    assert!(n <= 16, "oracle is sized for small clouds");

    struct Edge {
        scale: f64,
        u: usize,
        v: usize,
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let scale = points[u].dist(points[v]) / 2.0;
            if scale <= max_scale {
                edges.push(Edge { scale, u, v });
            }
        }
    }
    edges.sort_by(|a, b| (a.scale, a.u, a.v).partial_cmp(&(b.scale, b.u, b.v)).unwrap());
    let edge_pos = |u: usize, v: usize| -> Option<usize> {
        edges
            .iter()
            .position(|e| e.u == u.min(v) && e.v == u.max(v))
    };

    struct Tri {
        scale: f64,
        edges: [usize; 3],
    }
    let mut tris = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                let (Some(eab), Some(eac), Some(ebc)) =
                    (edge_pos(a, b), edge_pos(a, c), edge_pos(b, c))
                else {
                    continue;
                };
                let scale = edges[eab].scale.max(edges[eac].scale).max(edges[ebc].scale);
                tris.push(Tri {
                    scale,
                    edges: [eab, eac, ebc],
                });
            }
        }
    }

    // Critical scales: where the complex changes.
    let mut scales: Vec<f64> = edges.iter().map(|e| e.scale).collect();
    scales.extend(tris.iter().map(|t| t.scale));
    scales.sort_by(|a, b| a.partial_cmp(b).unwrap());
    scales.dedup();
    let k = scales.len();
    if k == 0 {
        return Vec::new();
    }

    // Number of edges present at scale index i (1-based; 0 = no edges).
    let edges_at = |i: usize| -> usize {
        if i == 0 {
            0
        } else {
            edges.iter().take_while(|e| e.scale <= scales[i - 1]).count()
        }
    };

    // Components of the 1-skeleton at scale index i (all n vertices present).
    let components_at = |i: usize| -> usize {
        let m = edges_at(i);
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for e in edges.iter().take(m) {
            let (ru, rv) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if ru != rv {
                parent[ru] = rv;
            }
        }
        (0..n).filter(|&v| find(&mut parent, v) == v).count()
    };

    // dim Z1(K_i) = E_i - n + c_i.
    let cycle_dim: Vec<usize> = (0..=k)
        .map(|i| edges_at(i) + components_at(i) - n)
        .collect();

    // dim(B1(K_j) intersect C1(K_i)) =
    //   rank d2(K_j) - rank of d2(K_j) restricted to rows E_j \ E_i.
    let boundary_rank = |i: usize, j: usize| -> usize {
        let e_i = edges_at(i);
        let e_j = edges_at(j);
        let full: Vec<Col> = tris
            .iter()
            .filter(|t| j > 0 && t.scale <= scales[j - 1])
            .map(|t| t.edges.iter().fold(0 as Col, |acc, &e| acc | 1 << e))
            .collect();
        let rank_full = rank_gf2(full.clone());
        // Mask away rows that already exist in K_i (row indices < e_i,
        // since edges are sorted by scale).
        debug_assert!(e_i <= e_j);
        let high_mask: Col = if e_j == 0 {
            0
        } else {
            let all: Col = if e_j >= 128 { !0 } else { (1 << e_j) - 1 };
            let low: Col = if e_i >= 128 { !0 } else { (1 << e_i) - 1 };
            all & !low
        };
        let restricted: Vec<Col> = full.iter().map(|c| c & high_mask).collect();
        rank_full - rank_gf2(restricted)
    };

    // beta(i, j): rank of H1(K_i) -> H1(K_j) for 0 <= i <= j <= k.
    let mut beta = vec![vec![0isize; k + 1]; k + 1];
    for i in 0..=k {
        for j in i..=k {
            beta[i][j] = cycle_dim[i] as isize - boundary_rank(i, j) as isize;
        }
    }

    let mut dots = Vec::new();
    for a in 1..=k {
        for b in (a + 1)..=k {
            let mu = (beta[a][b - 1] - beta[a - 1][b - 1]) - (beta[a][b] - beta[a - 1][b]);
            debug_assert!(mu >= 0, "multiplicities are counts");
            for _ in 0..mu {
                dots.push((scales[a - 1], scales[b - 1]));
            }
        }
        let essential = beta[a][k] - beta[a - 1][k];
        debug_assert!(essential >= 0);
        for _ in 0..essential {
            dots.push((scales[a - 1], f64::INFINITY));
        }
    }
    dots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dots
}
