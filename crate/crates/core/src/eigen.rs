//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use crate::num::Real;

/// Eigenvalues and orthonormal eigenvectors of a symmetric matrix, sorted by
/// descending eigenvalue. Eigenvectors are returned row-wise (one `Vec` per
/// eigenpair). The input is consumed as working storage.
pub fn symmetric_eigen<R: Real>(mut a: Vec<Vec<R>>) -> (Vec<R>, Vec<Vec<R>>) {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n), "matrix must be square");
    let mut v: Vec<Vec<R>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { R::one() } else { R::zero() })
                .collect()
        })
        .collect();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }

    let frob: R = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|&x| x * x)
        .sum::<R>()
        .sqrt();
    let tol = frob * R::epsilon() * R::of(n as f64);

    for _sweep in 0..100 {
        let mut off = R::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= tol || off == R::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == R::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (R::of(2.0) * apq);
                let t = {
                    let denom = theta.abs() + (theta * theta + R::one()).sqrt();
                    let t = if denom.is_finite() && denom > R::zero() {
                        R::one() / denom
                    } else {
                        // Huge theta: rotation angle ~ 1 / (2 theta).
                        (R::of(2.0) * theta.abs()).recip()
                    };
                    if theta < R::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;

                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        a[y][y]
            .partial_cmp(&a[x][x])
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<R> = order.iter().map(|&j| a[j][j]).collect();
    let eigenvectors: Vec<Vec<R>> = order
        .iter()
        .map(|&j| (0..n).map(|i| v[i][j]).collect())
        .collect();
    (eigenvalues, eigenvectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_has_known_spectrum() {
        let a: Vec<Vec<f64>> = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(a);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert!((vecs[0][0].abs() - inv_sqrt2).abs() < 1e-12);
        assert!((vecs[0][1].abs() - inv_sqrt2).abs() < 1e-12);
        // Same sign on both entries for the (1,1) direction.
        assert!(vecs[0][0] * vecs[0][1] > 0.0);
    }

    #[test]
    fn diagonal_matrix_is_already_solved() {
        let a: Vec<Vec<f64>> = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 5.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ];
        let (vals, vecs) = symmetric_eigen(a);
        assert_eq!(vals, vec![5.0, 3.0, 1.0]);
        assert_eq!(vecs[0][1].abs(), 1.0);
        assert_eq!(vecs[1][2].abs(), 1.0);
        assert_eq!(vecs[2][0].abs(), 1.0);
    }

    #[test]
    fn random_symmetric_matrix_satisfies_eigen_equation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 8;
        let mut a = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in i..n {
                let x = rng.gen_range(-2.0..2.0);
                a[i][j] = x;
                a[j][i] = x;
            }
        }
        let (vals, vecs) = symmetric_eigen(a.clone());
        for (lambda, vec_) in vals.iter().zip(&vecs) {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[i][j] * vec_[j]).sum();
                assert!(
                    (av - lambda * vec_[i]).abs() < 1e-9,
                    "eigen equation violated: {av} vs {}",
                    lambda * vec_[i]
                );
            }
        }
        for i in 0..n {
            for j in i..n {
                let dot: f64 = (0..n).map(|k| vecs[i][k] * vecs[j][k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10);
            }
        }
        // Sorted descending.
        for w in vals.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }
}
