//! Square assignment: exact min-cost solver plus a boolean perfect-matching
//! test, both used by the diagram distances.

use crate::num::Real;

/// Minimum-cost perfect assignment on a square cost matrix, via shortest
/// augmenting paths with dual potentials. Returns the column assigned to
/// each row and the total cost (recomputed from `cost`, so the potentials'
/// rounding never leaks into the reported value).
pub fn solve_min_cost<R: Real>(cost: &[Vec<R>]) -> (Vec<usize>, R) {
    let n = cost.len();
    if n == 0 {
        return (Vec::new(), R::zero());
    }
    debug_assert!(cost.iter().all(|row| row.len() == n), "matrix must be square");

    // 1-indexed arrays; p[j] is the row matched to column j, 0 = free.
    let mut u = vec![R::zero(); n + 1];
    let mut v = vec![R::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![R::infinity(); n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = R::infinity();
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] = u[p[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    let total = row_to_col
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .sum();
    (row_to_col, total)
}

/// Whether the bipartite graph on `n + n` vertices with edges given by `adj`
/// admits a perfect matching (Kuhn's augmenting paths).
pub fn has_perfect_matching<F: Fn(usize, usize) -> bool>(n: usize, adj: F) -> bool {
    let mut match_of_col: Vec<Option<usize>> = vec![None; n];

    fn try_augment<F: Fn(usize, usize) -> bool>(
        row: usize,
        n: usize,
        adj: &F,
        visited: &mut [bool],
        match_of_col: &mut [Option<usize>],
    ) -> bool {
        for col in 0..n {
            if visited[col] || !adj(row, col) {
                continue;
            }
            visited[col] = true;
            let free = match match_of_col[col] {
                None => true,
                Some(prev) => try_augment(prev, n, adj, visited, match_of_col),
            };
            if free {
                match_of_col[col] = Some(row);
                return true;
            }
        }
        false
    }

    for row in 0..n {
        let mut visited = vec![false; n];
        if !try_augment(row, n, &adj, &mut visited, &mut match_of_col) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_off_diagonal_when_cheaper() {
        let cost = vec![vec![4.0, 1.0], vec![1.0, 4.0]];
        let (assign, total) = solve_min_cost(&cost);
        assert_eq!(assign, vec![1, 0]);
        assert_eq!(total, 2.0);
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(1..=6);
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect())
                .collect();
            let (_, total) = solve_min_cost(&cost);
            let best = permutations_min(&cost);
            assert!((total - best).abs() < 1e-9, "total {total} vs brute {best}");
        }
    }

    fn permutations_min(cost: &[Vec<f64>]) -> f64 {
        let n = cost.len();
        let mut cols: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut cols, 0, cost, &mut best);
        best
    }

    fn permute(cols: &mut Vec<usize>, k: usize, cost: &[Vec<f64>], best: &mut f64) {
        if k == cols.len() {
            let total: f64 = cols.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            *best = best.min(total);
            return;
        }
        for i in k..cols.len() {
            cols.swap(k, i);
            permute(cols, k + 1, cost, best);
            cols.swap(k, i);
        }
    }

    #[test]
    fn empty_matrix_costs_nothing() {
        let (assign, total) = solve_min_cost::<f64>(&[]);
        assert!(assign.is_empty());
        assert_eq!(total, 0.0);
    }

    #[test]
    fn matching_feasibility_flips_with_the_graph() {
        // Both rows only reach column 0: no perfect matching.
        assert!(!has_perfect_matching(2, |_, c| c == 0));
        // Identity adjacency: perfect matching exists.
        assert!(has_perfect_matching(3, |r, c| r == c));
        // Crossed pairs.
        assert!(has_perfect_matching(2, |r, c| r != c));
    }
}
