//! Distances between persistence diagrams and between point clouds.
//!
//! Wasserstein and bottleneck distances match dots across two diagrams,
//! allowing any dot to retire to the diagonal. Dots at infinity never reach
//! the diagonal: they must pair with each other, so diagrams with different
//! essential-class counts are at infinite distance (reported as an error).

use thiserror::Error;

use crate::assignment::{has_perfect_matching, solve_min_cost};
use crate::diagram::{Dot, PersistenceDiagram};
use crate::geom::Point3;
use crate::num::Real;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("matching exponent p must satisfy 1 <= p < inf, got {0}")]
    InvalidExponent(f64),
    #[error("ground norm exponent q must satisfy 1 <= q, got {0}")]
    InvalidGround(f64),
    #[error("diagrams mix homology dimensions")]
    MixedDimensions,
    #[error("diagrams have different homology dimensions ({left} vs {right})")]
    DimensionMismatch { left: u8, right: u8 },
    #[error("diagrams have {left} vs {right} infinite dots; distance is infinite")]
    InfiniteCountMismatch { left: usize, right: usize },
    #[error("point cloud is empty")]
    EmptyCloud,
}

/// Norm applied to the (birth, death) displacement between two dots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ground<R> {
    /// Max of the coordinate displacements.
    LInf,
    /// q-norm of the displacement, 1 <= q < inf.
    Lq(R),
}

impl<R: Real> Ground<R> {
    fn validate(self) -> Result<Self, MetricError> {
        if let Ground::Lq(q) = self {
            if !(q >= R::one() && q.is_finite()) {
                return Err(MetricError::InvalidGround(q.to_f64_lossy()));
            }
        }
        Ok(self)
    }

    /// Distance between two finite dots.
    fn between(self, a: &Dot<R>, b: &Dot<R>) -> R {
        let db = (a.birth - b.birth).abs();
        let dd = (a.death - b.death).abs();
        match self {
            Ground::LInf => db.max(dd),
            Ground::Lq(q) => (db.powf(q) + dd.powf(q)).powf(R::one() / q),
        }
    }

    /// Distance from a finite dot to the nearest diagonal point.
    fn to_diagonal(self, d: &Dot<R>) -> R {
        let half = (d.death - d.birth) / R::of(2.0);
        match self {
            Ground::LInf => half,
            Ground::Lq(q) => half * R::of(2.0).powf(R::one() / q),
        }
    }
}

/// Cost model for [`wasserstein`]: outer exponent `p` and ground norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingCost<R> {
    p: R,
    ground: Ground<R>,
}

impl<R: Real> MatchingCost<R> {
    pub fn new(p: R, ground: Ground<R>) -> Result<Self, MetricError> {
        if !(p >= R::one() && p.is_finite()) {
            return Err(MetricError::InvalidExponent(p.to_f64_lossy()));
        }
        Ok(MatchingCost {
            p,
            ground: ground.validate()?,
        })
    }

    /// Exponent `p` with the max-coordinate ground norm (the usual default).
    pub fn wasserstein(p: R) -> Result<Self, MetricError> {
        Self::new(p, Ground::LInf)
    }

    pub fn p(&self) -> R {
        self.p
    }

    pub fn ground(&self) -> Ground<R> {
        self.ground
    }
}

/// The single homology dimension present in both diagrams, or an error when
/// either mixes dimensions or they disagree. Empty diagrams match anything.
fn common_dimension<R: Real>(
    a: &PersistenceDiagram<R>,
    b: &PersistenceDiagram<R>,
) -> Result<(), MetricError> {
    let dim_of = |d: &PersistenceDiagram<R>| -> Result<Option<u8>, MetricError> {
        let mut it = d.dots().iter();
        let Some(first) = it.next() else { return Ok(None) };
        if it.any(|x| x.dim != first.dim) {
            return Err(MetricError::MixedDimensions);
        }
        Ok(Some(first.dim))
    };
    match (dim_of(a)?, dim_of(b)?) {
        (Some(x), Some(y)) if x != y => Err(MetricError::DimensionMismatch { left: x, right: y }),
        _ => Ok(()),
    }
}

/// Births of the infinite dots, sorted, paired across the diagrams. Returns
/// the per-pair birth gaps.
fn infinite_birth_gaps<R: Real>(
    a: &PersistenceDiagram<R>,
    b: &PersistenceDiagram<R>,
) -> Result<Vec<R>, MetricError> {
    let births = |d: &PersistenceDiagram<R>| -> Vec<R> {
        let mut v: Vec<R> = d
            .dots()
            .iter()
            .filter(|x| x.is_infinite())
            .map(|x| x.birth)
            .collect();
        v.sort_by(|x, y| x.partial_cmp(y).expect("births are finite"));
        v
    };
    let ba = births(a);
    let bb = births(b);
    if ba.len() != bb.len() {
        return Err(MetricError::InfiniteCountMismatch {
            left: ba.len(),
            right: bb.len(),
        });
    }
    Ok(ba
        .iter()
        .zip(&bb)
        .map(|(&x, &y)| (x - y).abs())
        .collect())
}

fn finite_dots<R: Real>(d: &PersistenceDiagram<R>) -> Vec<Dot<R>> {
    d.dots().iter().filter(|x| !x.is_infinite()).copied().collect()
}

/// p-Wasserstein distance: minimal transport cost over matchings that may
/// send any finite dot to the diagonal. Infinite dots pair by sorted birth
/// and contribute their birth gaps at exponent p.
pub fn wasserstein<R: Real>(
    a: &PersistenceDiagram<R>,
    b: &PersistenceDiagram<R>,
    cost: MatchingCost<R>,
) -> Result<R, MetricError> {
    common_dimension(a, b)?;
    let inf_gaps = infinite_birth_gaps(a, b)?;
    let fa = finite_dots(a);
    let fb = finite_dots(b);
    let (n, m) = (fa.len(), fb.len());
    let p = cost.p;
    let g = cost.ground;

    let mut total_p = inf_gaps.into_iter().map(|gap| gap.powf(p)).sum::<R>();
    let k = n + m;
    if k > 0 {
        let mut matrix = vec![vec![R::zero(); k]; k];
        for (i, da) in fa.iter().enumerate() {
            let diag = g.to_diagonal(da).powf(p);
            for j in 0..k {
                matrix[i][j] = match fb.get(j) {
                    Some(db) => g.between(da, db).powf(p),
                    None => diag,
                };
            }
        }
        for i in n..k {
            for (j, db) in fb.iter().enumerate() {
                matrix[i][j] = g.to_diagonal(db).powf(p);
            }
        }
        let (_, transport) = solve_min_cost(&matrix);
        total_p = total_p + transport;
    }
    Ok(total_p.powf(R::one() / p))
}

/// Bottleneck distance: the smallest bound that admits a perfect matching
/// (diagonal allowed) under the max-coordinate ground norm. Infinite dots
/// pair by sorted birth and force the bound up to their largest gap.
pub fn bottleneck<R: Real>(
    a: &PersistenceDiagram<R>,
    b: &PersistenceDiagram<R>,
) -> Result<R, MetricError> {
    common_dimension(a, b)?;
    let inf_gaps = infinite_birth_gaps(a, b)?;
    let inf_part = inf_gaps
        .into_iter()
        .fold(R::zero(), |acc, gap| acc.max(gap));

    let fa = finite_dots(a);
    let fb = finite_dots(b);
    let (n, m) = (fa.len(), fb.len());
    let k = n + m;
    if k == 0 {
        return Ok(inf_part);
    }

    let g = Ground::LInf;
    let mut candidates: Vec<R> = vec![R::zero()];
    for da in &fa {
        candidates.push(g.to_diagonal(da));
        for db in &fb {
            candidates.push(g.between(da, db));
        }
    }
    for db in &fb {
        candidates.push(g.to_diagonal(db));
    }
    candidates.sort_by(|x, y| x.partial_cmp(y).expect("distances are finite"));
    candidates.dedup();

    let feasible = |eps: R| -> bool {
        has_perfect_matching(k, |i, j| match (fa.get(i), fb.get(j)) {
            (Some(da), Some(db)) => g.between(da, db) <= eps,
            (Some(da), None) => g.to_diagonal(da) <= eps,
            (None, Some(db)) => g.to_diagonal(db) <= eps,
            (None, None) => true,
        })
    };

    // Smallest candidate admitting a perfect matching; the largest always
    // does (everything can pair directly or through the diagonal).
    let mut lo = 0usize;
    let mut hi = candidates.len() - 1;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(inf_part.max(candidates[lo]))
}

/// Directed Hausdorff distance: the farthest any point of `from` sits from
/// the set `to`.
pub fn directed_hausdorff<R: Real>(from: &[Point3<R>], to: &[Point3<R>]) -> Result<R, MetricError> {
    if from.is_empty() || to.is_empty() {
        return Err(MetricError::EmptyCloud);
    }
    let mut worst = R::zero();
    for p in from {
        let nearest = to
            .iter()
            .map(|q| p.dist(*q))
            .fold(R::infinity(), |acc, d| acc.min(d));
        worst = worst.max(nearest);
    }
    Ok(worst)
}

/// Symmetric Hausdorff distance between two point sets.
pub fn hausdorff<R: Real>(a: &[Point3<R>], b: &[Point3<R>]) -> Result<R, MetricError> {
    let ab = directed_hausdorff(a, b)?;
    let ba = directed_hausdorff(b, a)?;
    Ok(ab.max(ba))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dgm(pairs: &[(f64, f64)]) -> PersistenceDiagram<f64> {
        let dots = pairs.iter().map(|&(b, d)| Dot::new(0, b, d)).collect();
        PersistenceDiagram::new(dots, None).unwrap()
    }

    fn w1(a: &PersistenceDiagram<f64>, b: &PersistenceDiagram<f64>) -> f64 {
        wasserstein(a, b, MatchingCost::wasserstein(1.0).unwrap()).unwrap()
    }

    #[test]
    fn identical_diagrams_are_at_distance_zero() {
        let d = dgm(&[(0.0, 2.0), (1.0, 4.0), (0.5, f64::INFINITY)]);
        assert_eq!(w1(&d, &d), 0.0);
        assert_eq!(bottleneck(&d, &d).unwrap(), 0.0);
    }

    #[test]
    fn lone_dot_retires_to_the_diagonal() {
        let d = dgm(&[(0.0, 2.0)]);
        let empty = dgm(&[]);
        assert_eq!(w1(&d, &empty), 1.0);
        assert_eq!(w1(&empty, &d), 1.0);
        assert_eq!(bottleneck(&d, &empty).unwrap(), 1.0);
    }

    #[test]
    fn direct_match_beats_double_retirement() {
        let a = dgm(&[(0.0, 2.0)]);
        let b = dgm(&[(0.0, 3.0)]);
        // Matching directly costs 1; retiring both would cost 1 + 1.5.
        assert_eq!(w1(&a, &b), 1.0);
    }

    #[test]
    fn bottleneck_of_shifted_birth() {
        let a = dgm(&[(0.0, 4.0)]);
        let b = dgm(&[(1.0, 4.0)]);
        assert_eq!(bottleneck(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn infinite_dots_pair_by_sorted_birth() {
        let a = dgm(&[(0.0, f64::INFINITY), (5.0, f64::INFINITY)]);
        let b = dgm(&[(4.0, f64::INFINITY), (1.0, f64::INFINITY)]);
        // Sorted births pair (0,1) and (5,4): total 2 at p = 1, max 1.
        assert_eq!(w1(&a, &b), 2.0);
        assert_eq!(bottleneck(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn mismatched_infinite_counts_are_an_error() {
        let a = dgm(&[(0.0, f64::INFINITY)]);
        let b = dgm(&[]);
        assert!(matches!(
            w1_checked(&a, &b),
            Err(MetricError::InfiniteCountMismatch { left: 1, right: 0 })
        ));
        assert!(matches!(
            bottleneck(&a, &b),
            Err(MetricError::InfiniteCountMismatch { .. })
        ));
    }

    fn w1_checked(
        a: &PersistenceDiagram<f64>,
        b: &PersistenceDiagram<f64>,
    ) -> Result<f64, MetricError> {
        wasserstein(a, b, MatchingCost::wasserstein(1.0).unwrap())
    }

    #[test]
    fn exponents_are_validated() {
        assert!(matches!(
            MatchingCost::<f64>::wasserstein(0.5),
            Err(MetricError::InvalidExponent(_))
        ));
        assert!(matches!(
            MatchingCost::<f64>::new(1.0, Ground::Lq(0.9)),
            Err(MetricError::InvalidGround(_))
        ));
        assert!(MatchingCost::<f64>::new(2.0, Ground::Lq(2.0)).is_ok());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = dgm(&[(0.0, 1.0)]);
        let b = PersistenceDiagram::new(vec![Dot::new(1, 0.0, 1.0)], None).unwrap();
        assert!(matches!(
            w1_checked(&a, &b),
            Err(MetricError::DimensionMismatch { left: 0, right: 1 })
        ));
    }

    #[test]
    fn euclidean_ground_norm_changes_diagonal_cost() {
        // With the 2-norm, retiring (0, 2) costs sqrt(2) instead of 1.
        let d = dgm(&[(0.0, 2.0)]);
        let empty = dgm(&[]);
        let c = MatchingCost::new(1.0, Ground::Lq(2.0)).unwrap();
        let got = wasserstein(&d, &empty, c).unwrap();
        assert!((got - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_is_symmetric() {
        let a = dgm(&[(0.0, 2.0), (1.0, 3.0), (2.0, 9.0)]);
        let b = dgm(&[(0.5, 2.5), (4.0, 5.0)]);
        let c = MatchingCost::wasserstein(2.0).unwrap();
        let ab = wasserstein(&a, &b, c).unwrap();
        let ba = wasserstein(&b, &a, c).unwrap();
        assert!((ab - ba).abs() < 1e-12);
        assert_eq!(bottleneck(&a, &b).unwrap(), bottleneck(&b, &a).unwrap());
    }

    #[test]
    fn hausdorff_basics() {
        let origin = vec![Point3::new(0.0, 0.0, 0.0)];
        let two = vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)];
        assert_eq!(hausdorff(&origin, &origin).unwrap(), 0.0);
        assert_eq!(hausdorff(&origin, &two).unwrap(), 1.0);
        assert_eq!(directed_hausdorff(&origin, &two).unwrap(), 0.0);
        assert!(matches!(
            hausdorff(&origin, &[]),
            Err(MetricError::EmptyCloud)
        ));
    }
}
