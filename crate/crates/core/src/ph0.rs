//! Dimension-0 persistence of a real-valued function on a graph's vertices,
//! swept by sublevel sets.

use thiserror::Error;

use crate::diagram::{Dot, PersistenceDiagram};
use crate::geom::Point3;
use crate::num::Real;
use crate::treeio::EmbeddedTree;

#[derive(Debug, Error)]
pub enum FiltrationError {
    #[error("vertex {vertex} has a non-finite filtration value")]
    NonFinite { vertex: usize },
    #[error("edge ({u}, {v}) references a vertex out of range (n = {n})")]
    EdgeOutOfRange { u: usize, v: usize, n: usize },
    #[error("direction vector must be nonzero")]
    ZeroDirection,
}

/// Graph with one filtration value per vertex. An edge enters the sweep at
/// the larger of its endpoint values. Ties between equal values are resolved
/// by the per-vertex key, making the sweep a total order.
#[derive(Debug, Clone)]
pub struct VertexFiltration<R> {
    values: Vec<R>,
    keys: Vec<u64>,
    adjacency: Vec<Vec<usize>>,
}

impl<R: Real> VertexFiltration<R> {
    /// Builds a filtration over `values.len()` vertices with tie-break keys
    /// equal to the vertex indices.
    pub fn new(values: Vec<R>, edges: &[(usize, usize)]) -> Result<Self, FiltrationError> {
        let keys = (0..values.len() as u64).collect();
        Self::with_keys(values, keys, edges)
    }

    /// As [`new`](Self::new) but with caller-supplied tie-break keys (for
    /// example, original vertex ids), so the result does not depend on input
    /// ordering even when values collide.
    pub fn with_keys(
        values: Vec<R>,
        keys: Vec<u64>,
        edges: &[(usize, usize)],
    ) -> Result<Self, FiltrationError> {
        assert_eq!(values.len(), keys.len(), "one key per vertex");
        let n = values.len();
        for (v, &x) in values.iter().enumerate() {
            if !x.is_finite() {
                return Err(FiltrationError::NonFinite { vertex: v });
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(FiltrationError::EdgeOutOfRange { u, v, n });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(VertexFiltration {
            values,
            keys,
            adjacency,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn value(&self, v: usize) -> R {
        self.values[v]
    }

    /// Filtration value of an edge: the larger endpoint value.
    pub fn edge_value(&self, u: usize, v: usize) -> R {
        self.values[u].max(self.values[v])
    }

    fn sweep_key(&self, v: usize) -> (R, u64) {
        (self.values[v], self.keys[v])
    }
}

/// Height function `h(v) = <position, direction/|direction|>` over a tree's
/// vertices, with original vertex ids as tie-break keys.
pub fn height_filtration<R: Real>(
    tree: &EmbeddedTree<R>,
    direction: Point3<R>,
) -> Result<VertexFiltration<R>, FiltrationError> {
    let unit = direction
        .normalized()
        .ok_or(FiltrationError::ZeroDirection)?;
    let values: Vec<R> = tree.vertices().iter().map(|v| v.pos.dot(unit)).collect();
    let keys: Vec<u64> = tree.vertices().iter().map(|v| v.id).collect();
    VertexFiltration::with_keys(values, keys, tree.edges())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Sweeps the sublevel sets of the filtration and returns the dimension-0
/// diagram: one dot per local minimum, where a merge kills the component
/// with the younger minimum (elder rule) and every surviving component
/// contributes an infinite dot. Zero-persistence pairs are dropped.
pub fn persistence0<R: Real>(f: &VertexFiltration<R>) -> PersistenceDiagram<R> {
    let n = f.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        f.sweep_key(a)
            .partial_cmp(&f.sweep_key(b))
            .expect("filtration values are finite")
    });

    let mut uf = UnionFind::new(n);
    // Root -> vertex realizing the component minimum under the sweep order.
    let birth_vertex: Vec<usize> = (0..n).collect();
    let mut placed = vec![false; n];
    let mut dots = Vec::new();

    for &v in &order {
        placed[v] = true;
        let mut roots: Vec<usize> = f.adjacency[v]
            .iter()
            .filter(|&&w| placed[w])
            .map(|&w| uf.find(w))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        if roots.is_empty() {
            continue;
        }
        let winner = *roots
            .iter()
            .min_by(|&&a, &&b| {
                f.sweep_key(birth_vertex[a])
                    .partial_cmp(&f.sweep_key(birth_vertex[b]))
                    .expect("filtration values are finite")
            })
            .expect("at least one root");
        for &r in &roots {
            if r == winner {
                continue;
            }
            let birth = f.value(birth_vertex[r]);
            let death = f.value(v);
            if death > birth {
                dots.push(Dot::new(0, birth, death));
            }
            uf.parent[r] = winner;
        }
        uf.parent[v] = winner;
    }

    for v in 0..n {
        if uf.find(v) == v {
            dots.push(Dot::new(0, f.value(birth_vertex[v]), R::infinity()));
        }
    }

    PersistenceDiagram::new(dots, None).expect("sweep emits only valid dots")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treeio::EmbeddedTree;

    fn tree(text: &str) -> EmbeddedTree<f64> {
        EmbeddedTree::parse(text.as_bytes()).unwrap().0
    }

    fn sorted_pairs(d: &PersistenceDiagram<f64>) -> Vec<(f64, f64)> {
        d.sorted_dots().iter().map(|d| (d.birth, d.death)).collect()
    }

    #[test]
    fn height_projects_onto_unit_direction() {
        let t = tree("v 0 3 4 5\n");
        let f = height_filtration(&t, Point3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(f.value(0), 5.0);
        let f = height_filtration(&t, Point3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(f.value(0), 3.0);
        // Direction is normalized, so scaling it changes nothing.
        let f = height_filtration(&t, Point3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(f.value(0), 5.0);
    }

    #[test]
    fn zero_direction_is_rejected() {
        let t = tree("v 0 1 1 1\n");
        assert!(matches!(
            height_filtration(&t, Point3::new(0.0, 0.0, 0.0)),
            Err(FiltrationError::ZeroDirection)
        ));
    }

    #[test]
    fn edge_enters_at_larger_endpoint() {
        let f = VertexFiltration::new(vec![1.0, 4.0], &[(0, 1)]).unwrap();
        assert_eq!(f.edge_value(0, 1), 4.0);
        assert_eq!(f.edge_value(1, 0), 4.0);
    }

    #[test]
    fn non_finite_value_is_rejected() {
        assert!(VertexFiltration::new(vec![f64::NAN], &[]).is_err());
        assert!(VertexFiltration::new(vec![f64::INFINITY], &[]).is_err());
    }

    #[test]
    fn three_path_applies_elder_rule() {
        // Values 0 - 2 - 1: minima at both ends, younger one (1) dies at 2.
        let f = VertexFiltration::new(vec![0.0, 2.0, 1.0], &[(0, 1), (1, 2)]).unwrap();
        let d = persistence0(&f);
        assert_eq!(sorted_pairs(&d), vec![(0.0, f64::INFINITY), (1.0, 2.0)]);
    }

    #[test]
    fn seven_vertex_zigzag_path() {
        // Path with heights 1-8-2-6-3-5-4: four local minima, three saddles.
        let f = VertexFiltration::new(
            vec![1.0, 8.0, 2.0, 6.0, 3.0, 5.0, 4.0],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)],
        )
        .unwrap();
        let d = persistence0(&f);
        assert_eq!(
            sorted_pairs(&d),
            vec![(1.0, f64::INFINITY), (2.0, 8.0), (3.0, 6.0), (4.0, 5.0)]
        );
    }

    #[test]
    fn each_component_gets_one_infinite_dot() {
        let f = VertexFiltration::new(vec![0.0, 1.0, 5.0], &[(0, 1)]).unwrap();
        let d = persistence0(&f);
        let inf: Vec<_> = d.dots().iter().filter(|d| d.is_infinite()).collect();
        assert_eq!(inf.len(), 2);
        assert_eq!(sorted_pairs(&d), vec![(0.0, f64::INFINITY), (5.0, f64::INFINITY)]);
    }

    #[test]
    fn equal_minima_resolve_by_key_deterministically() {
        // V shape: two zero-height ends joined through a peak. One end
        // survives, the other dies at the peak; the survivor is the one with
        // the smaller key.
        let f = VertexFiltration::new(vec![0.0, 5.0, 0.0], &[(0, 1), (1, 2)]).unwrap();
        let d = persistence0(&f);
        assert_eq!(sorted_pairs(&d), vec![(0.0, 5.0), (0.0, f64::INFINITY)]);
    }

    #[test]
    fn plateau_produces_single_essential_dot() {
        let f = VertexFiltration::new(vec![2.0; 5], &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let d = persistence0(&f);
        assert_eq!(sorted_pairs(&d), vec![(2.0, f64::INFINITY)]);
    }

    #[test]
    fn empty_graph_yields_empty_diagram() {
        let f = VertexFiltration::<f64>::new(vec![], &[]).unwrap();
        assert!(persistence0(&f).dots().is_empty());
    }

    #[test]
    fn dots_count_local_minima() {
        // Star where the center is below all leaves: one minimum only, and
        // leaf attachments create no finite dots.
        let f = VertexFiltration::new(vec![0.0, 3.0, 2.0, 7.0], &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let d = persistence0(&f);
        assert_eq!(sorted_pairs(&d), vec![(0.0, f64::INFINITY)]);
    }
}
