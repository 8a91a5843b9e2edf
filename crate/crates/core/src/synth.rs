//! Synthetic cohorts with controllable effects: branch dips whose depth
//! grows with age (dimension-0 signal) and near-loop structures whose radius
//! differs by sex (dimension-1 signal). Trees stay connected and acyclic, so
//! every planted loop is a shape loop, not a graph cycle.

use std::f64::consts::PI;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::Point3;
use crate::num::mix_seed;
use crate::treeio::{CohortManifest, EmbeddedTree, Sex, SubjectRow, Vertex};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("cohort needs at least one subject")]
    NoSubjects,
    #[error("branch count range ({0}, {1}) is invalid")]
    BadBranchRange(usize, usize),
    #[error("probability must lie in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("{what} must be non-negative and finite, got {value}")]
    BadAmplitude { what: &'static str, value: f64 },
    #[error("sex effect size must be positive and finite, got {0}")]
    BadEffect(f64),
    #[error("age range ({0}, {1}) is invalid")]
    BadAgeRange(f64, f64),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Knobs for cohort generation. Dip depth for a subject of age `a` is
/// `bend_base + bend_age_slope * a + N(0, bend_noise)`, clamped at zero;
/// loop radius is `loop_radius` (scaled by `sex_effect_size` for male
/// subjects), with each branch sprouting a near-loop with probability
/// `loop_probability`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_subjects: usize,
    pub seed: u64,
    /// Inclusive range of branch counts per tree.
    pub branch_count: (usize, usize),
    pub bend_base: f64,
    pub bend_age_slope: f64,
    pub bend_noise: f64,
    pub loop_probability: f64,
    pub loop_radius: f64,
    pub sex_effect_size: f64,
    pub age_range: (f64, f64),
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_subjects: 20,
            seed: 0,
            branch_count: (8, 15),
            bend_base: 2.0,
            bend_age_slope: 0.0,
            bend_noise: 0.1,
            loop_probability: 0.3,
            loop_radius: 5.0,
            sex_effect_size: 1.0,
            age_range: (20.0, 80.0),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_subjects == 0 {
            return Err(SynthError::NoSubjects);
        }
        let (lo, hi) = self.branch_count;
        if lo < 1 || hi < lo {
            return Err(SynthError::BadBranchRange(lo, hi));
        }
        if !(0.0..=1.0).contains(&self.loop_probability) {
            return Err(SynthError::BadProbability(self.loop_probability));
        }
        for (what, value) in [
            ("bend_base", self.bend_base),
            ("bend_age_slope", self.bend_age_slope),
            ("bend_noise", self.bend_noise),
            ("loop_radius", self.loop_radius),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(SynthError::BadAmplitude { what, value });
            }
        }
        if !(self.sex_effect_size > 0.0 && self.sex_effect_size.is_finite()) {
            return Err(SynthError::BadEffect(self.sex_effect_size));
        }
        let (a0, a1) = self.age_range;
        if !(a0.is_finite() && a1.is_finite() && a0 <= a1) {
            return Err(SynthError::BadAgeRange(a0, a1));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthSubject {
    pub id: String,
    pub age: f64,
    pub sex: Sex,
    pub tree: EmbeddedTree<f64>,
}

#[derive(Debug, Clone)]
pub struct SynthCohort {
    pub subjects: Vec<SynthSubject>,
}

impl SynthCohort {
    /// Manifest with tree paths `<id>.tree`, relative to the cohort
    /// directory.
    pub fn manifest(&self) -> CohortManifest {
        CohortManifest {
            rows: self
                .subjects
                .iter()
                .map(|s| SubjectRow {
                    subject_id: s.id.clone(),
                    tree_path: format!("{}.tree", s.id),
                    age: s.age,
                    sex: s.sex,
                })
                .collect(),
        }
    }

    /// Writes one tree file per subject plus `manifest.csv`; returns the
    /// manifest path.
    pub fn write_to_dir(&self, dir: &Path) -> Result<PathBuf, SynthError> {
        fs::create_dir_all(dir)?;
        for s in &self.subjects {
            fs::write(dir.join(format!("{}.tree", s.id)), s.tree.to_string_fmt())?;
        }
        let manifest_path = dir.join("manifest.csv");
        let mut buf = Vec::new();
        self.manifest()
            .write_csv(&mut buf)
            .expect("manifest serialization cannot fail in memory");
        fs::write(&manifest_path, buf)?;
        Ok(manifest_path)
    }
}

/// Standard normal draw (Box-Muller).
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Uniform unit vector with the z component damped by `z_damp`, so branches
/// run mostly horizontally and vertical structure comes from planted dips.
fn unit_direction(rng: &mut ChaCha8Rng, z_damp: f64) -> Point3<f64> {
    loop {
        let v = Point3::new(normal(rng), normal(rng), normal(rng) * z_damp);
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

struct TreeAccum {
    vertices: Vec<Vertex<f64>>,
    edges: Vec<(u64, u64)>,
}

impl TreeAccum {
    fn new() -> Self {
        TreeAccum {
            vertices: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn add_vertex(&mut self, pos: Point3<f64>) -> u64 {
        let id = self.vertices.len() as u64;
        self.vertices.push(Vertex {
            id,
            pos,
            radius: None,
        });
        id
    }

    fn add_edge(&mut self, a: u64, b: u64) {
        self.edges.push((a, b));
    }

    fn position(&self, id: u64) -> Point3<f64> {
        self.vertices[id as usize].pos
    }
}

fn generate_tree(spec: &SynthSpec, age: f64, sex: Sex, rng: &mut ChaCha8Rng) -> EmbeddedTree<f64> {
    let mut acc = TreeAccum::new();
    let root = acc.add_vertex(Point3::new(0.0, 0.0, 0.0));
    let n_branches = rng.gen_range(spec.branch_count.0..=spec.branch_count.1);

    let mut branch_mids: Vec<u64> = Vec::new();
    for b in 0..n_branches {
        let anchor = if b == 0 {
            root
        } else {
            rng.gen_range(0..acc.vertices.len() as u64)
        };
        let dir = unit_direction(rng, 0.05);
        let length: f64 = rng.gen_range(20.0..40.0);
        let n_seg = ((length / 2.0).ceil() as usize).max(4);
        let step = length / n_seg as f64;

        let depth = {
            let base = spec.bend_base + spec.bend_age_slope * age + spec.bend_noise * normal(rng);
            let per_branch = rng.gen_range(0.7..1.3);
            (base * per_branch).max(0.0)
        };

        let start = acc.position(anchor);
        let mut prev = anchor;
        let mut mid = anchor;
        for i in 1..=n_seg {
            let t = i as f64 / n_seg as f64;
            let mut pos = start.add(dir.scale(step * i as f64));
            pos.z -= depth * (PI * t).sin();
            let v = acc.add_vertex(pos);
            acc.add_edge(prev, v);
            if i == n_seg / 2 {
                mid = v;
            }
            prev = v;
        }
        branch_mids.push(mid);
    }

    // Near-loops: two semicircular arcs from one junction, leaving a small
    // gap so the graph stays acyclic while the shape reads as a circle.
    for &mid in &branch_mids {
        if rng.gen::<f64>() >= spec.loop_probability {
            continue;
        }
        let sex_scale = if sex == Sex::M {
            spec.sex_effect_size
        } else {
            1.0
        };
        let radius = spec.loop_radius * rng.gen_range(0.8..1.2) * sex_scale;
        if radius <= 0.0 {
            continue;
        }
        let e1 = unit_direction(rng, 1.0);
        let e2 = {
            loop {
                let raw = unit_direction(rng, 1.0);
                let ortho = raw.sub(e1.scale(raw.dot(e1)));
                if let Some(u) = ortho.normalized() {
                    break u;
                }
            }
        };
        let center = acc.position(mid).add(e1.scale(radius));
        let point_at = |theta: f64| {
            center
                .sub(e1.scale(radius * theta.cos()))
                .add(e2.scale(radius * theta.sin()))
        };
        let arc_steps = 12usize;
        let gap = 0.15f64;
        // First arc sweeps 0..pi, second sweeps 2pi..pi+gap; both start at
        // the junction (theta = 0 mod 2pi).
        for (span_start, span_end) in [(0.0, PI), (2.0 * PI, PI + gap)] {
            let mut prev = mid;
            for j in 1..=arc_steps {
                let t = j as f64 / arc_steps as f64;
                let theta = span_start + (span_end - span_start) * t;
                let v = acc.add_vertex(point_at(theta));
                acc.add_edge(prev, v);
                prev = v;
            }
        }
    }

    let edge_lines = vec![0usize; acc.edges.len()];
    let (tree, warnings) = EmbeddedTree::assemble(acc.vertices, &acc.edges, &edge_lines)
        .expect("generated tree is structurally valid");
    debug_assert!(warnings.is_empty(), "generated tree must be a clean tree");
    tree
}

/// Generates the cohort: ages uniform over the range, sexes alternating
/// F/M, and one reproducible RNG substream per subject (derived from the
/// spec seed and the subject index).
pub fn generate_cohort(spec: &SynthSpec) -> Result<SynthCohort, SynthError> {
    spec.validate()?;
    let mut subjects = Vec::with_capacity(spec.n_subjects);
    for i in 0..spec.n_subjects {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, i as u64));
        let (a0, a1) = spec.age_range;
        let age = if a1 > a0 {
            let u: f64 = rng.gen();
            a0 + u * (a1 - a0)
        } else {
            a0
        };
        let sex = if i % 2 == 0 { Sex::F } else { Sex::M };
        let tree = generate_tree(spec, age, sex, &mut rng);
        subjects.push(SynthSubject {
            id: format!("s{i:04}"),
            age,
            sex,
            tree,
        });
    }
    Ok(SynthCohort { subjects })
}
