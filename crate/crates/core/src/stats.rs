//! Cohort statistics over feature vectors: PCA, correlation against a
//! covariate, a two-group mean-difference permutation test, and the
//! rank-window heat maps that scan every feature window at once.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::diagram::PersistenceDiagram;
use crate::eigen::symmetric_eigen;
use crate::features::{sorted_persistences, window_slice};
use crate::num::Real;
use crate::treeio::Sex;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least {need} subjects, got {got}")]
    TooFewSubjects { got: usize, need: usize },
    #[error("feature rows have inconsistent widths")]
    RaggedMatrix,
    #[error("feature rows must be non-empty")]
    EmptyFeatures,
    #[error("component count k = {k} must satisfy 1 <= k <= {max}")]
    BadComponentCount { k: usize, max: usize },
    #[error("{0} is constant; the statistic is undefined")]
    ConstantInput(&'static str),
    #[error("covariate length does not match subject count")]
    LengthMismatch,
    #[error("permutation count must be positive")]
    ZeroPermutations,
    #[error("both groups need at least one subject")]
    EmptyGroup,
    #[error("heat map needs n_max >= 2, got {0}")]
    BadGridBound(usize),
    #[error("non-finite value in input")]
    NonFinite,
}

/// Principal component model of a centered feature matrix.
#[derive(Debug, Clone)]
pub struct PcaModel<R> {
    /// Feature-space mean the rows were centered by.
    pub mean: Vec<R>,
    /// Unit loading vectors, one per component, largest variance first.
    pub loadings: Vec<Vec<R>>,
    /// Per-subject component scores (subjects x components).
    pub scores: Vec<Vec<R>>,
    /// Variance explained by each component (1/(s-1) normalization).
    pub variances: Vec<R>,
}

/// Principal component analysis of `rows` (subjects x features), keeping `k`
/// components. Chooses the covariance eigenproblem when features fit, or the
/// Gram (subject-space) eigenproblem when the matrix is wide. Loading signs
/// are fixed by making each loading's largest-magnitude entry positive.
pub fn pca<R: Real>(rows: &[Vec<R>], k: usize) -> Result<PcaModel<R>, StatsError> {
    let s = rows.len();
    if s < 2 {
        return Err(StatsError::TooFewSubjects { got: s, need: 2 });
    }
    let f = rows[0].len();
    if f == 0 {
        return Err(StatsError::EmptyFeatures);
    }
    if rows.iter().any(|r| r.len() != f) {
        return Err(StatsError::RaggedMatrix);
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let max_k = (s - 1).min(f);
    if k < 1 || k > max_k {
        return Err(StatsError::BadComponentCount { k, max: max_k });
    }

    let sn = R::of(s as f64);
    let denom = R::of((s - 1) as f64);
    let mut mean = vec![R::zero(); f];
    for r in rows {
        for (m, &x) in mean.iter_mut().zip(r) {
            *m = *m + x;
        }
    }
    for m in mean.iter_mut() {
        *m = *m / sn;
    }
    let centered: Vec<Vec<R>> = rows
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(&x, &m)| x - m).collect())
        .collect();

    let mut loadings: Vec<Vec<R>> = Vec::with_capacity(k);
    let mut variances: Vec<R> = Vec::with_capacity(k);

    if f <= s {
        let mut cov = vec![vec![R::zero(); f]; f];
        for r in &centered {
            for i in 0..f {
                let ri = r[i];
                if ri == R::zero() {
                    continue;
                }
                for j in i..f {
                    cov[i][j] = cov[i][j] + ri * r[j];
                }
            }
        }
        for i in 0..f {
            for j in i..f {
                let x = cov[i][j] / denom;
                cov[i][j] = x;
                cov[j][i] = x;
            }
        }
        let (vals, vecs) = symmetric_eigen(cov);
        for j in 0..k {
            variances.push(vals[j].max(R::zero()));
            loadings.push(vecs[j].clone());
        }
    } else {
        // Wide matrix: eigenvectors of the Gram matrix G = X Xt / (s-1)
        // lift to feature space as Xt u / |Xt u|.
        let mut gram = vec![vec![R::zero(); s]; s];
        for i in 0..s {
            for j in i..s {
                let dot: R = centered[i]
                    .iter()
                    .zip(&centered[j])
                    .map(|(&a, &b)| a * b)
                    .sum();
                let x = dot / denom;
                gram[i][j] = x;
                gram[j][i] = x;
            }
        }
        let (vals, vecs) = symmetric_eigen(gram);
        let scale_floor = vals.first().copied().unwrap_or(R::zero()) * R::of(1e-12);
        for j in 0..k {
            let lambda = vals[j].max(R::zero());
            variances.push(lambda);
            let u = &vecs[j];
            let mut w = vec![R::zero(); f];
            for (row, &ui) in centered.iter().zip(u) {
                if ui == R::zero() {
                    continue;
                }
                for (wi, &x) in w.iter_mut().zip(row) {
                    *wi = *wi + ui * x;
                }
            }
            let norm = w.iter().map(|&x| x * x).sum::<R>().sqrt();
            if lambda > scale_floor && norm > R::zero() {
                for x in w.iter_mut() {
                    *x = *x / norm;
                }
                loadings.push(w);
            } else {
                // Rank-deficient direction: any unit vector orthogonal to
                // the accepted loadings completes the basis.
                loadings.push(orthonormal_filler(&loadings, f));
            }
        }
    }

    for loading in loadings.iter_mut() {
        let mut arg = 0usize;
        let mut best = R::zero();
        for (i, &x) in loading.iter().enumerate() {
            if x.abs() > best {
                best = x.abs();
                arg = i;
            }
        }
        if loading[arg] < R::zero() {
            for x in loading.iter_mut() {
                *x = -*x;
            }
        }
    }

    let scores: Vec<Vec<R>> = centered
        .iter()
        .map(|r| {
            loadings
                .iter()
                .map(|l| l.iter().zip(r).map(|(&a, &b)| a * b).sum())
                .collect()
        })
        .collect();

    Ok(PcaModel {
        mean,
        loadings,
        scores,
        variances,
    })
}

/// A unit vector orthogonal to all of `basis`, found by projecting out the
/// basis from standard basis vectors.
fn orthonormal_filler<R: Real>(basis: &[Vec<R>], f: usize) -> Vec<R> {
    for axis in 0..f {
        let mut w = vec![R::zero(); f];
        w[axis] = R::one();
        for b in basis {
            let proj: R = b.iter().zip(&w).map(|(&a, &x)| a * x).sum();
            for (wi, &bi) in w.iter_mut().zip(b) {
                *wi = *wi - proj * bi;
            }
        }
        let norm = w.iter().map(|&x| x * x).sum::<R>().sqrt();
        if norm > R::of(1e-6) {
            for x in w.iter_mut() {
                *x = *x / norm;
            }
            return w;
        }
    }
    // Unreachable while the basis has fewer than f vectors.
    let mut w = vec![R::zero(); f];
    w[0] = R::one();
    w
}

/// Pearson correlation with a two-sided p-value from the t distribution on
/// n - 2 degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult<R> {
    pub rho: R,
    pub p_value: f64,
    pub n: usize,
}

pub fn pearson<R: Real>(x: &[R], y: &[R]) -> Result<CorrelationResult<R>, StatsError> {
    let n = x.len();
    if y.len() != n {
        return Err(StatsError::LengthMismatch);
    }
    if n < 3 {
        return Err(StatsError::TooFewSubjects { got: n, need: 3 });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let nf = R::of(n as f64);
    let mx = x.iter().copied().sum::<R>() / nf;
    let my = y.iter().copied().sum::<R>() / nf;
    let mut sxx = R::zero();
    let mut syy = R::zero();
    let mut sxy = R::zero();
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
        sxy = sxy + dx * dy;
    }
    if sxx <= R::zero() {
        return Err(StatsError::ConstantInput("x"));
    }
    if syy <= R::zero() {
        return Err(StatsError::ConstantInput("y"));
    }
    let rho = (sxy / (sxx * syy).sqrt())
        .max(-R::one())
        .min(R::one());
    let p_value = pearson_p_value(rho.to_f64_lossy(), n);
    Ok(CorrelationResult { rho, p_value, n })
}

/// Two-sided p-value for an observed correlation at sample size `n`, via
/// t = rho * sqrt((n-2) / (1 - rho^2)).
pub fn pearson_p_value(rho: f64, n: usize) -> f64 {
    assert!(n >= 3, "p-value needs n >= 3");
    let df = (n - 2) as f64;
    let denom = 1.0 - rho * rho;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = rho.abs() * (df / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * dist.sf(t)).min(1.0)
}

/// Result of the two-group mean-difference permutation test.
#[derive(Debug, Clone)]
pub struct DiPropermResult<R> {
    /// Euclidean distance between the two group means.
    pub observed: R,
    /// The same statistic under each label permutation.
    pub permuted: Vec<R>,
    /// Fraction of permuted statistics strictly exceeding the observed one.
    pub p_emp: f64,
    pub n_perm: usize,
    pub seed: u64,
}

/// Tests whether two groups of feature vectors differ in mean, by comparing
/// the observed distance between group means against its distribution under
/// random relabeling (group sizes preserved).
pub fn diproperm<R: Real>(
    group_a: &[Vec<R>],
    group_b: &[Vec<R>],
    n_perm: usize,
    seed: u64,
) -> Result<DiPropermResult<R>, StatsError> {
    if group_a.is_empty() || group_b.is_empty() {
        return Err(StatsError::EmptyGroup);
    }
    if n_perm == 0 {
        return Err(StatsError::ZeroPermutations);
    }
    let f = group_a[0].len();
    if f == 0 {
        return Err(StatsError::EmptyFeatures);
    }
    let pool: Vec<&Vec<R>> = group_a.iter().chain(group_b.iter()).collect();
    if pool.iter().any(|r| r.len() != f) {
        return Err(StatsError::RaggedMatrix);
    }
    if pool.iter().flat_map(|r| r.iter()).any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }

    let na = group_a.len();
    let mean_gap = |idx: &[usize]| -> R {
        let mut diff = vec![R::zero(); f];
        let fa = R::of(na as f64);
        let fb = R::of((pool.len() - na) as f64);
        for (pos, &i) in idx.iter().enumerate() {
            let row = pool[i];
            if pos < na {
                for (d, &x) in diff.iter_mut().zip(row) {
                    *d = *d + x / fa;
                }
            } else {
                for (d, &x) in diff.iter_mut().zip(row) {
                    *d = *d - x / fb;
                }
            }
        }
        diff.iter().map(|&x| x * x).sum::<R>().sqrt()
    };

    let identity: Vec<usize> = (0..pool.len()).collect();
    let observed = mean_gap(&identity);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = identity;
    let mut permuted = Vec::with_capacity(n_perm);
    for _ in 0..n_perm {
        idx.shuffle(&mut rng);
        permuted.push(mean_gap(&idx));
    }
    let p_emp = empirical_p(observed, &permuted);
    Ok(DiPropermResult {
        observed,
        permuted,
        p_emp,
        n_perm,
        seed,
    })
}

/// Fraction of reference statistics strictly greater than the observed one.
pub fn empirical_p<R: Real>(observed: R, reference: &[R]) -> f64 {
    let exceed = reference.iter().filter(|&&s| s > observed).count();
    exceed as f64 / reference.len() as f64
}

/// Which statistic fills a heat map cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatKind {
    /// Pearson correlation of PC1 scores against age.
    AgeCorrelation,
    /// Empirical p of the two-group permutation test on the window vectors.
    SexPermutation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatCell {
    pub first_rank: usize,
    pub last_rank: usize,
    pub value: f64,
}

/// One value per rank window (n, N) with 1 <= n < N <= n_max.
#[derive(Debug, Clone)]
pub struct HeatGrid {
    pub kind: HeatKind,
    pub n_max: usize,
    pub cells: Vec<HeatCell>,
}

impl HeatGrid {
    /// `n,N,value` rows in row-major window order.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,N,value")?;
        for c in &self.cells {
            writeln!(w, "{},{},{}", c.first_rank, c.last_rank, c.value)?;
        }
        Ok(())
    }
}

fn window_cells(n_max: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::with_capacity(n_max * (n_max - 1) / 2);
    for n in 1..n_max {
        for big_n in (n + 1)..=n_max {
            cells.push((n, big_n));
        }
    }
    cells
}

fn sorted_cohort<R: Real>(
    diagrams: &[PersistenceDiagram<R>],
) -> Result<Vec<Vec<R>>, StatsError> {
    if diagrams.len() < 3 {
        return Err(StatsError::TooFewSubjects {
            got: diagrams.len(),
            need: 3,
        });
    }
    Ok(diagrams.iter().map(sorted_persistences).collect())
}

/// Heat map of age correlation: every window (n, N) gets the Pearson rho of
/// PC1 scores against age. Any degenerate cell aborts the whole map.
pub fn heatmap_age<R: Real>(
    diagrams: &[PersistenceDiagram<R>],
    ages: &[R],
    n_max: usize,
) -> Result<HeatGrid, StatsError> {
    if n_max < 2 {
        return Err(StatsError::BadGridBound(n_max));
    }
    let sorted = sorted_cohort(diagrams)?;
    if ages.len() != sorted.len() {
        return Err(StatsError::LengthMismatch);
    }
    let spread = ages
        .iter()
        .fold((R::infinity(), R::neg_infinity()), |(lo, hi), &a| {
            (lo.min(a), hi.max(a))
        });
    if spread.1 <= spread.0 {
        return Err(StatsError::ConstantInput("age"));
    }

    let cells: Vec<HeatCell> = window_cells(n_max)
        .into_par_iter()
        .map(|(n, big_n)| -> Result<HeatCell, StatsError> {
            let rows: Vec<Vec<R>> = sorted.iter().map(|s| window_slice(s, (n, big_n))).collect();
            let model = pca(&rows, 1)?;
            let scores: Vec<R> = model.scores.iter().map(|r| r[0]).collect();
            let corr = pearson(&scores, ages)?;
            Ok(HeatCell {
                first_rank: n,
                last_rank: big_n,
                value: corr.rho.to_f64_lossy(),
            })
        })
        .collect::<Result<_, _>>()?;

    Ok(HeatGrid {
        kind: HeatKind::AgeCorrelation,
        n_max,
        cells,
    })
}

/// Heat map of the sex permutation test: every window (n, N) gets the
/// empirical p of the group mean gap. Each cell draws its permutations from
/// a stream derived from (seed, n, N), so cell values do not depend on
/// evaluation order or worker count.
pub fn heatmap_sex<R: Real>(
    diagrams: &[PersistenceDiagram<R>],
    sexes: &[Sex],
    n_max: usize,
    n_perm: usize,
    seed: u64,
) -> Result<HeatGrid, StatsError> {
    if n_max < 2 {
        return Err(StatsError::BadGridBound(n_max));
    }
    let sorted = sorted_cohort(diagrams)?;
    if sexes.len() != sorted.len() {
        return Err(StatsError::LengthMismatch);
    }
    if !sexes.contains(&Sex::M) || !sexes.contains(&Sex::F) {
        return Err(StatsError::ConstantInput("sex"));
    }

    let cells: Vec<HeatCell> = window_cells(n_max)
        .into_par_iter()
        .map(|(n, big_n)| -> Result<HeatCell, StatsError> {
            let mut rows_m = Vec::new();
            let mut rows_f = Vec::new();
            for (s, &sex) in sorted.iter().zip(sexes) {
                let row = window_slice(s, (n, big_n));
                match sex {
                    Sex::M => rows_m.push(row),
                    Sex::F => rows_f.push(row),
                }
            }
            let cell_seed = cell_stream(seed, n as u64, big_n as u64);
            let result = diproperm(&rows_m, &rows_f, n_perm, cell_seed)?;
            Ok(HeatCell {
                first_rank: n,
                last_rank: big_n,
                value: result.p_emp,
            })
        })
        .collect::<Result<_, _>>()?;

    Ok(HeatGrid {
        kind: HeatKind::SexPermutation,
        n_max,
        cells,
    })
}

/// Independent per-cell seed derived from the run seed and window bounds.
fn cell_stream(seed: u64, n: u64, big_n: u64) -> u64 {
    crate::num::mix_seed(
        seed.wrapping_add(n.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        big_n,
    )
}
