//! Persistence diagrams and their on-disk CSV form.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::num::Real;

/// One birth/death pair. `death` may be infinite; a finite death strictly
/// exceeds the birth (zero-persistence pairs are never stored).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dot<R> {
    pub dim: u8,
    pub birth: R,
    pub death: R,
}

impl<R: Real> Dot<R> {
    pub fn new(dim: u8, birth: R, death: R) -> Self {
        Dot { dim, birth, death }
    }

    /// Lifetime `death - birth`; infinite for essential classes.
    pub fn persistence(&self) -> R {
        self.death - self.birth
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }
}

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("invalid dot (dim {dim}, birth {birth}, death {death}): {reason}")]
    InvalidDot {
        dim: u8,
        birth: f64,
        death: f64,
        reason: &'static str,
    },
    #[error("diagram parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Multiset of dots, optionally marked as truncated at the scale where the
/// underlying filtration stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram<R> {
    dots: Vec<Dot<R>>,
    truncated_at: Option<R>,
}

impl<R: Real> PersistenceDiagram<R> {
    /// Validates every dot: finite birth, death either infinite or strictly
    /// greater than birth, no NaN anywhere.
    pub fn new(dots: Vec<Dot<R>>, truncated_at: Option<R>) -> Result<Self, DiagramError> {
        for d in &dots {
            let reason = if d.birth.is_nan() || d.death.is_nan() {
                Some("NaN coordinate")
            } else if !d.birth.is_finite() {
                Some("birth must be finite")
            } else if !d.death.is_infinite() && d.death <= d.birth {
                Some("finite death must exceed birth")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(DiagramError::InvalidDot {
                    dim: d.dim,
                    birth: d.birth.to_f64_lossy(),
                    death: d.death.to_f64_lossy(),
                    reason,
                });
            }
        }
        Ok(PersistenceDiagram { dots, truncated_at })
    }

    pub fn empty() -> Self {
        PersistenceDiagram {
            dots: Vec::new(),
            truncated_at: None,
        }
    }

    pub fn dots(&self) -> &[Dot<R>] {
        &self.dots
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated_at.is_some()
    }

    pub fn truncated_at(&self) -> Option<R> {
        self.truncated_at
    }

    pub fn iter_dim(&self, dim: u8) -> impl Iterator<Item = &Dot<R>> {
        self.dots.iter().filter(move |d| d.dim == dim)
    }

    /// Dots sorted by (dim, birth, death) with infinite deaths last within a
    /// dim/birth group. Canonical order for multiset comparison.
    pub fn sorted_dots(&self) -> Vec<Dot<R>> {
        let mut dots = self.dots.clone();
        dots.sort_by(|a, b| {
            (a.dim, a.birth, a.death)
                .partial_cmp(&(b.dim, b.birth, b.death))
                .expect("validated dots contain no NaN")
        });
        dots
    }

    /// Writes the `dim,birth,death` CSV, with `inf` for essential classes and
    /// a leading comment when the diagram is truncated.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        if let Some(scale) = self.truncated_at {
            writeln!(w, "# truncated at {scale}")?;
        }
        writeln!(w, "dim,birth,death")?;
        for d in &self.dots {
            if d.death.is_infinite() {
                writeln!(w, "{},{},inf", d.dim, d.birth)?;
            } else {
                writeln!(w, "{},{},{}", d.dim, d.birth, d.death)?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parses the CSV form produced by [`write_csv`](Self::write_csv).
    /// Comment lines (`#`) are allowed before the header; `truncated at`
    /// comments restore the truncation scale.
    pub fn read_csv<B: BufRead>(reader: B) -> Result<Self, DiagramError> {
        let mut dots = Vec::new();
        let mut truncated_at = None;
        let mut saw_header = false;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(value) = comment.strip_prefix("truncated at") {
                    let scale = parse_scalar::<R>(value.trim(), line_no, "truncation scale")?;
                    truncated_at = Some(scale);
                }
                continue;
            }
            if !saw_header {
                if line != "dim,birth,death" {
                    return Err(DiagramError::Parse {
                        line: line_no,
                        msg: format!("expected header 'dim,birth,death', got '{line}'"),
                    });
                }
                saw_header = true;
                continue;
            }
            let mut parts = line.split(',');
            let (dim_s, birth_s, death_s) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(c)) if parts.next().is_none() => (a, b, c),
                _ => {
                    return Err(DiagramError::Parse {
                        line: line_no,
                        msg: "expected three comma-separated fields".into(),
                    })
                }
            };
            let dim: u8 = dim_s.trim().parse().map_err(|_| DiagramError::Parse {
                line: line_no,
                msg: format!("bad dimension '{dim_s}'"),
            })?;
            let birth = parse_scalar::<R>(birth_s.trim(), line_no, "birth")?;
            let death_s = death_s.trim();
            let death = if death_s == "inf" {
                R::infinity()
            } else {
                parse_scalar::<R>(death_s, line_no, "death")?
            };
            dots.push(Dot::new(dim, birth, death));
        }
        if !saw_header {
            return Err(DiagramError::Parse {
                line: 0,
                msg: "missing 'dim,birth,death' header".into(),
            });
        }
        PersistenceDiagram::new(dots, truncated_at)
    }
}

fn parse_scalar<R: Real>(s: &str, line: usize, what: &str) -> Result<R, DiagramError> {
    let v: f64 = s.parse().map_err(|_| DiagramError::Parse {
        line,
        msg: format!("bad {what} '{s}'"),
    })?;
    Ok(R::of(v))
}
