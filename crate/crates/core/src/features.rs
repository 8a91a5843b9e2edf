//! Rank-window feature vectors from diagrams, plus the length controls used
//! to decouple topological signal from overall tree size.

use std::io::{self, Write};

use thiserror::Error;

use crate::diagram::PersistenceDiagram;
use crate::num::Real;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("window must satisfy 1 <= first <= last, got ({0}, {1})")]
    BadWindow(usize, usize),
    #[error("need at least {need} subjects, got {got}")]
    TooFewSubjects { got: usize, need: usize },
    #[error("feature rows have inconsistent widths")]
    RaggedMatrix,
    #[error("one length per subject is required")]
    LengthMismatch,
    #[error("lengths are all equal; regression on length is degenerate")]
    DegenerateLengths,
    #[error("tree length must be positive and finite, got {0}")]
    BadLength(f64),
}

/// Descending finite persistence values ranked `window.0 ..= window.1`
/// (1-indexed), zero-padded past the diagram's dot count.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<R> {
    values: Vec<R>,
    window: (usize, usize),
    dim: u8,
}

impl<R: Real> FeatureVector<R> {
    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn window(&self) -> (usize, usize) {
        self.window
    }

    /// Homology dimension the source diagram lived in.
    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sorted finite persistences of a diagram, largest first. Ties order by
/// birth, then death, so the ranking is total. Infinite dots are excluded:
/// they reflect global structure (components, truncation), not feature-scale
/// shape.
pub fn sorted_persistences<R: Real>(d: &PersistenceDiagram<R>) -> Vec<R> {
    let mut dots: Vec<_> = d.dots().iter().filter(|x| !x.is_infinite()).collect();
    dots.sort_by(|a, b| {
        (b.persistence(), a.birth, a.death)
            .partial_cmp(&(a.persistence(), b.birth, b.death))
            .expect("finite dots compare")
    });
    dots.iter().map(|x| x.persistence()).collect()
}

/// Extracts ranks `window.0 ..= window.1` from the sorted persistences.
pub fn persistence_vector<R: Real>(
    d: &PersistenceDiagram<R>,
    window: (usize, usize),
) -> Result<FeatureVector<R>, FeatureError> {
    let (first, last) = window;
    if first < 1 || last < first {
        return Err(FeatureError::BadWindow(first, last));
    }
    let sorted = sorted_persistences(d);
    let dim = d.dots().first().map(|x| x.dim).unwrap_or(0);
    let values = window_slice(&sorted, window);
    Ok(FeatureVector {
        values,
        window: (first, last),
        dim,
    })
}

/// Ranks `window.0 ..= window.1` (1-indexed) of an already-sorted
/// persistence list, zero-padded at the tail.
pub fn window_slice<R: Real>(sorted: &[R], window: (usize, usize)) -> Vec<R> {
    let (first, last) = window;
    (first..=last)
        .map(|rank| sorted.get(rank - 1).copied().unwrap_or_else(R::zero))
        .collect()
}

/// Ordinary least-squares residuals of every feature coordinate regressed on
/// tree length, across the cohort. Removes the linear size effect while
/// keeping coordinate-wise structure.
pub fn residualize<R: Real>(
    rows: &[Vec<R>],
    lengths: &[R],
) -> Result<Vec<Vec<R>>, FeatureError> {
    let s = rows.len();
    if s < 3 {
        return Err(FeatureError::TooFewSubjects { got: s, need: 3 });
    }
    if lengths.len() != s {
        return Err(FeatureError::LengthMismatch);
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(FeatureError::RaggedMatrix);
    }

    let sn = R::of(s as f64);
    let mean_l = lengths.iter().copied().sum::<R>() / sn;
    let var_l: R = lengths
        .iter()
        .map(|&l| (l - mean_l) * (l - mean_l))
        .sum();
    if var_l <= R::zero() {
        return Err(FeatureError::DegenerateLengths);
    }

    let mut out = vec![vec![R::zero(); width]; s];
    for j in 0..width {
        let mean_y = rows.iter().map(|r| r[j]).sum::<R>() / sn;
        let cov: R = rows
            .iter()
            .zip(lengths)
            .map(|(r, &l)| (l - mean_l) * (r[j] - mean_y))
            .sum();
        let slope = cov / var_l;
        let intercept = mean_y - slope * mean_l;
        for (i, r) in rows.iter().enumerate() {
            out[i][j] = r[j] - (intercept + slope * lengths[i]);
        }
    }
    Ok(out)
}

/// Exponent applied to tree length when normalizing features by size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthExponent {
    Full,
    Sqrt,
    Cbrt,
}

impl LengthExponent {
    pub fn apply<R: Real>(self, length: R) -> R {
        match self {
            LengthExponent::Full => length,
            LengthExponent::Sqrt => length.sqrt(),
            LengthExponent::Cbrt => length.cbrt(),
        }
    }
}

/// Divides every feature by `length` raised to the chosen exponent.
pub fn scale_by_length<R: Real>(
    v: &FeatureVector<R>,
    length: R,
    exponent: LengthExponent,
) -> Result<FeatureVector<R>, FeatureError> {
    if !(length > R::zero() && length.is_finite()) {
        return Err(FeatureError::BadLength(length.to_f64_lossy()));
    }
    let divisor = exponent.apply(length);
    Ok(FeatureVector {
        values: v.values.iter().map(|&x| x / divisor).collect(),
        window: v.window,
        dim: v.dim,
    })
}

/// Writes the cohort feature table: a window comment, a header naming each
/// rank column, then one row per subject.
pub fn write_feature_csv<R: Real, W: Write>(
    subject_ids: &[String],
    vectors: &[FeatureVector<R>],
    mut w: W,
) -> io::Result<()> {
    assert_eq!(subject_ids.len(), vectors.len(), "one id per vector");
    let window = vectors.first().map(|v| v.window).unwrap_or((1, 0));
    writeln!(w, "# window {} {}", window.0, window.1)?;
    let mut header = String::from("subject_id");
    for rank in window.0..=window.1 {
        header.push_str(&format!(",f_{rank}"));
    }
    writeln!(w, "{header}")?;
    for (id, v) in subject_ids.iter().zip(vectors) {
        debug_assert_eq!(v.window, window, "uniform windows per table");
        let mut line = id.clone();
        for x in &v.values {
            line.push_str(&format!(",{x}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
