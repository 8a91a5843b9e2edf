//! Direct, slow reference computations.

use treeph::geom::Point3;

/// Dimension-0 sweep oracle: processes vertices in (value, index) order and
/// recomputes connected components from scratch with BFS after every step.
/// A component whose minimum vertex stops being a component minimum has died
/// at the newly added vertex. Returns (birth, death) pairs, death = +inf for
/// survivors, zero-persistence pairs dropped, sorted.
pub fn sweep0_oracle(values: &[f64], edges: &[(usize, usize)]) -> Vec<(f64, f64)> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| (values[a], a).partial_cmp(&(values[b], b)).unwrap());
    let rank_of = {
        let mut r = vec![0usize; n];
        for (pos, &v) in order.iter().enumerate() {
            r[v] = pos;
        }
        r
    };

    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }

    // Components of the subgraph on the first `count` vertices in sweep
    // order, each identified by its sweep-minimal vertex.
    let components = |count: usize| -> Vec<usize> {
        let mut seen = vec![false; n];
        let mut mins = Vec::new();
        for &start in order.iter().take(count) {
            if seen[start] {
                continue;
            }
            let mut queue = vec![start];
            seen[start] = true;
            let mut min_v = start;
            while let Some(v) = queue.pop() {
                if rank_of[v] < rank_of[min_v] {
                    min_v = v;
                }
                for &w in &adj[v] {
                    if rank_of[w] < count && !seen[w] {
                        seen[w] = true;
                        queue.push(w);
                    }
                }
            }
            mins.push(min_v);
        }
        mins
    };

    let mut dots = Vec::new();
    let mut alive = components(0);
    for step in 1..=n {
        let now = components(step);
        let v_new = order[step - 1];
        for &m in &alive {
            if !now.contains(&m) {
                // The component led by m merged into an older one at v_new.
                if values[v_new] > values[m] {
                    dots.push((values[m], values[v_new]));
                }
            }
        }
        alive = now;
    }
    for &m in &alive {
        dots.push((values[m], f64::INFINITY));
    }
    dots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dots
}

/// Exhaustive Wasserstein oracle over finite dots: enumerates every partial
/// injection from left dots to right dots (the rest retire to the diagonal)
/// and returns the minimal cost at exponent `p` with the max-coordinate
/// ground norm (`q = None`) or the q-norm.
pub fn wasserstein_oracle(
    left: &[(f64, f64)],
    right: &[(f64, f64)],
    p: f64,
    q: Option<f64>,
) -> f64 {
    fn ground(a: (f64, f64), b: (f64, f64), q: Option<f64>) -> f64 {
        let db = (a.0 - b.0).abs();
        let dd = (a.1 - b.1).abs();
        match q {
            None => db.max(dd),
            Some(q) => (db.powf(q) + dd.powf(q)).powf(1.0 / q),
        }
    }
    fn diagonal(a: (f64, f64), q: Option<f64>) -> f64 {
        let half = (a.1 - a.0) / 2.0;
        match q {
            None => half,
            Some(q) => half * 2.0f64.powf(1.0 / q),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        i: usize,
        left: &[(f64, f64)],
        right: &[(f64, f64)],
        used: &mut Vec<bool>,
        acc: f64,
        best: &mut f64,
        p: f64,
        q: Option<f64>,
    ) {
        if acc >= *best {
            return;
        }
        if i == left.len() {
            let mut total = acc;
            for (j, &r) in right.iter().enumerate() {
                if !used[j] {
                    total += diagonal(r, q).powf(p);
                }
            }
            if total < *best {
                *best = total;
            }
            return;
        }
        // Left dot i retires to the diagonal.
        recurse(
            i + 1,
            left,
            right,
            used,
            acc + diagonal(left[i], q).powf(p),
            best,
            p,
            q,
        );
        // Or matches any unused right dot.
        for j in 0..right.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            recurse(
                i + 1,
                left,
                right,
                used,
                acc + ground(left[i], right[j], q).powf(p),
                best,
                p,
                q,
            );
            used[j] = false;
        }
    }

    let mut best = f64::INFINITY;
    let mut used = vec![false; right.len()];
    recurse(0, left, right, &mut used, 0.0, &mut best, p, q);
    best.powf(1.0 / p)
}

/// Hausdorff reference: literal two-sided max of min distances.
pub fn hausdorff_oracle(a: &[Point3<f64>], b: &[Point3<f64>]) -> f64 {
    fn directed(from: &[Point3<f64>], to: &[Point3<f64>]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..from.len() {
            let mut best = f64::INFINITY;
            for j in 0..to.len() {
                let dx = from[i].x - to[j].x;
                let dy = from[i].y - to[j].y;
                let dz = from[i].z - to[j].z;
                let d = (dx * dx + dy * dy + dz * dz).sqrt();
                if d < best {
                    best = d;
                }
            }
            if best > worst {
                worst = best;
            }
        }
        worst
    }
    directed(a, b).max(directed(b, a))
}

/// PCA reference by power iteration with deflation on the explicit
/// covariance matrix. Returns (variances, loadings), loadings normalized
/// with the largest-magnitude entry positive.
pub fn pca_power_oracle(rows: &[Vec<f64>], k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let s = rows.len();
    let f = rows[0].len();
    let mean: Vec<f64> = (0..f)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / s as f64)
        .collect();
    let x: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(a, m)| a - m).collect())
        .collect();
    let mut cov = vec![vec![0.0f64; f]; f];
    for r in &x {
        for i in 0..f {
            for j in 0..f {
                cov[i][j] += r[i] * r[j] / (s - 1) as f64;
            }
        }
    }

    let mut variances = Vec::new();
    let mut loadings: Vec<Vec<f64>> = Vec::new();
    let mut work = cov;
    for _ in 0..k {
        let mut v = vec![0.0f64; f];
        // Deterministic start that is unlikely to be orthogonal to the top
        // eigenvector.
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = 1.0 + (i as f64) * 0.137;
        }
        let mut lambda = 0.0f64;
        for _ in 0..200_000 {
            let mut w = vec![0.0f64; f];
            for i in 0..f {
                for j in 0..f {
                    w[i] += work[i][j] * v[j];
                }
            }
            let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            for a in w.iter_mut() {
                *a /= norm;
            }
            let new_lambda: f64 = {
                let mut acc = 0.0;
                for i in 0..f {
                    for j in 0..f {
                        acc += w[i] * work[i][j] * w[j];
                    }
                }
                acc
            };
            // Deflated spectra are nonnegative, so the iterate does not
            // oscillate in sign; converge on the vector, not the eigenvalue,
            // which settles orders of magnitude earlier.
            let drift = v
                .iter()
                .zip(&w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            v = w;
            lambda = new_lambda;
            if drift < 1e-13 {
                break;
            }
        }
        // Sign convention: largest-magnitude entry positive.
        let mut arg = 0usize;
        for (i, &a) in v.iter().enumerate() {
            if a.abs() > v[arg].abs() {
                arg = i;
            }
        }
        if v[arg] < 0.0 {
            for a in v.iter_mut() {
                *a = -*a;
            }
        }
        variances.push(lambda.max(0.0));
        // Deflate.
        for i in 0..f {
            for j in 0..f {
                work[i][j] -= lambda * v[i] * v[j];
            }
        }
        loadings.push(v);
    }
    (variances, loadings)
}

/// Ordinary least squares residuals of y on x via the closed-form normal
/// equations (computed with raw sums, unlike the centered production form).
pub fn ols_residual_oracle(y: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    x.iter()
        .zip(y)
        .map(|(a, b)| b - (intercept + slope * a))
        .collect()
}
