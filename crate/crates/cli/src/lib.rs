//! Cohort pipeline around the treeph library: compute per-subject diagrams,
//! vectorize them, and run the age/sex statistics, all driven from a
//! manifest file. Every command is deterministic given (config, seed), and
//! the worker count never changes numeric output.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use treeph::diagmetrics::{bottleneck, hausdorff, wasserstein, Ground, MatchingCost};
use treeph::diagram::PersistenceDiagram;
use treeph::features::{persistence_vector, residualize, scale_by_length, LengthExponent};
use treeph::geom::Point3;
use treeph::num::mix_seed;
use treeph::ph0::{height_filtration, persistence0};
use treeph::ph1::tree_loops;
use treeph::stats::{diproperm, heatmap_age, heatmap_sex, pca, pearson, HeatGrid};
use treeph::synth::{generate_cohort, SynthSpec};
use treeph::treeio::{CohortManifest, EmbeddedTree, PointCloud, Sex};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("manifest: {0}")]
    Manifest(#[from] treeph::treeio::ManifestError),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} missing; run the diagrams step first")]
    MissingInput { path: PathBuf },
    #[error("invalid argument: {0}")]
    BadArg(String),
    #[error(transparent)]
    Diagram(#[from] treeph::diagram::DiagramError),
    #[error(transparent)]
    Feature(#[from] treeph::features::FeatureError),
    #[error(transparent)]
    Stats(#[from] treeph::stats::StatsError),
    #[error(transparent)]
    Metric(#[from] treeph::diagmetrics::MetricError),
    #[error(transparent)]
    Synth(#[from] treeph::synth::SynthError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which homology dimensions the diagrams step computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DimSelect {
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
    Both,
}

impl DimSelect {
    fn wants0(self) -> bool {
        matches!(self, DimSelect::Zero | DimSelect::Both)
    }
    fn wants1(self) -> bool {
        matches!(self, DimSelect::One | DimSelect::Both)
    }
}

/// Homology dimension of the diagram files a statistics command reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum HomDim {
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
}

impl HomDim {
    pub fn as_u8(self) -> u8 {
        match self {
            HomDim::Zero => 0,
            HomDim::One => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Covariate {
    Age,
    Sex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LengthControl {
    None,
    /// Regress each feature rank on total length, keep the residual.
    Residual,
    /// Divide by total length.
    L,
    /// Divide by sqrt of total length.
    SqrtL,
    /// Divide by cube root of total length.
    CbrtL,
}

impl LengthControl {
    fn label(self) -> &'static str {
        match self {
            LengthControl::None => "none",
            LengthControl::Residual => "residual",
            LengthControl::L => "l",
            LengthControl::SqrtL => "sqrtl",
            LengthControl::CbrtL => "cbrtl",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub manifest: PathBuf,
    pub out_dir: PathBuf,
    /// Height-filtration direction for dimension 0.
    pub direction: [f64; 3],
    /// Subsample size per tree for dimension 1.
    pub subsample: usize,
    /// Rips scale cap; None picks half the subsample's bounding diagonal.
    pub max_scale: Option<f64>,
    /// Feature ranks (first, last), 1-indexed inclusive.
    pub window: (usize, usize),
    pub n_perm: usize,
    pub seed: u64,
    /// Worker threads for per-subject work; 0 lets the pool decide.
    pub workers: usize,
    pub dims: DimSelect,
    /// Recompute outputs that already exist.
    pub force: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            manifest: PathBuf::new(),
            out_dir: PathBuf::new(),
            direction: [0.0, 0.0, 1.0],
            subsample: 3000,
            max_scale: None,
            window: (1, 100),
            n_perm: 1000,
            seed: 0,
            workers: 0,
            dims: DimSelect::Both,
            force: false,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubjectFailure {
    pub subject_id: String,
    pub error: String,
}

/// Outcome of a diagrams run, also written as JSON next to the outputs.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub computed: Vec<String>,
    pub skipped: Vec<String>,
    pub failures: Vec<SubjectFailure>,
    pub params: ReportParams,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportParams {
    pub direction: [f64; 3],
    pub subsample: usize,
    pub max_scale: Option<f64>,
    pub seed: u64,
    pub dims: String,
}

impl RunReport {
    pub fn all_succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

fn dgm_path(out_dir: &Path, subject: &str, dim: u8) -> PathBuf {
    out_dir.join(format!("{subject}.dgm{dim}.csv"))
}

fn lengths_path(out_dir: &Path) -> PathBuf {
    out_dir.join("lengths.csv")
}

/// Subject ids become file names; refuse anything that could escape out_dir.
fn check_subject_id(id: &str) -> Result<(), PipelineError> {
    let ok = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && id != "."
        && id != "..";
    if ok {
        Ok(())
    } else {
        Err(PipelineError::BadArg(format!(
            "subject id '{id}' is not a safe file name"
        )))
    }
}

fn read_manifest(cfg: &PipelineConfig) -> Result<CohortManifest, PipelineError> {
    let file = File::open(&cfg.manifest).map_err(|source| PipelineError::File {
        path: cfg.manifest.clone(),
        source,
    })?;
    let manifest = CohortManifest::read_csv(BufReader::new(file))?;
    for row in &manifest.rows {
        check_subject_id(&row.subject_id)?;
    }
    Ok(manifest)
}

fn read_lengths(out_dir: &Path) -> Result<HashMap<String, f64>, PipelineError> {
    let path = lengths_path(out_dir);
    let file = File::open(&path).map_err(|_| PipelineError::MissingInput { path: path.clone() })?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let mut map = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| PipelineError::BadArg(format!("{path:?}: {e}")))?;
        let id = record.get(0).unwrap_or("").to_string();
        let len: f64 = record
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|_| PipelineError::BadArg(format!("{path:?}: bad length for '{id}'")))?;
        map.insert(id, len);
    }
    Ok(map)
}

fn worker_pool(workers: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::BadArg(format!("worker pool: {e}")))
}

enum SubjectOutcome {
    Computed { length: f64 },
    Skipped { length: Option<f64> },
    Failed { error: String },
}

/// Compute (or reuse) per-subject diagram files plus `lengths.csv` and a
/// JSON run report. Subjects fail independently; the report lists them.
pub fn cmd_diagrams(cfg: &PipelineConfig) -> Result<RunReport, PipelineError> {
    let manifest = read_manifest(cfg)?;
    fs::create_dir_all(&cfg.out_dir).map_err(|source| PipelineError::File {
        path: cfg.out_dir.clone(),
        source,
    })?;
    let direction = Point3::new(cfg.direction[0], cfg.direction[1], cfg.direction[2]);
    if cfg.dims.wants0() && direction.norm() == 0.0 {
        return Err(PipelineError::BadArg(
            "direction must be a nonzero vector".into(),
        ));
    }
    if cfg.subsample == 0 {
        return Err(PipelineError::BadArg("subsample must be at least 1".into()));
    }
    if let Some(s) = cfg.max_scale {
        if !(s > 0.0 && s.is_finite()) {
            return Err(PipelineError::BadArg(format!(
                "max-scale must be positive and finite, got {s}"
            )));
        }
    }
    let manifest_dir = cfg
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let known_lengths = if cfg.force {
        HashMap::new()
    } else {
        read_lengths(&cfg.out_dir).unwrap_or_default()
    };

    let pool = worker_pool(cfg.workers)?;
    let outcomes: Vec<SubjectOutcome> = pool.install(|| {
        manifest
            .rows
            .par_iter()
            .enumerate()
            .map(|(idx, row)| {
                let path0 = dgm_path(&cfg.out_dir, &row.subject_id, 0);
                let path1 = dgm_path(&cfg.out_dir, &row.subject_id, 1);
                let have0 = !cfg.dims.wants0() || path0.exists();
                let have1 = !cfg.dims.wants1() || path1.exists();
                if !cfg.force && have0 && have1 {
                    return SubjectOutcome::Skipped {
                        length: known_lengths.get(&row.subject_id).copied(),
                    };
                }
                let run = || -> Result<f64, String> {
                    let tree_file = manifest_dir.join(&row.tree_path);
                    let reader = File::open(&tree_file)
                        .map(BufReader::new)
                        .map_err(|e| format!("{}: {e}", tree_file.display()))?;
                    let (tree, _warnings) = EmbeddedTree::<f64>::parse(reader)
                        .map_err(|e| format!("{}: {e}", tree_file.display()))?;
                    if cfg.dims.wants0() && (cfg.force || !path0.exists()) {
                        let f = height_filtration(&tree, direction).map_err(|e| e.to_string())?;
                        let dgm = persistence0(&f);
                        write_diagram(&path0, &dgm)?;
                    }
                    if cfg.dims.wants1() && (cfg.force || !path1.exists()) {
                        let subject_seed = mix_seed(cfg.seed, idx as u64);
                        let dgm = tree_loops(&tree, cfg.subsample, subject_seed, cfg.max_scale)
                            .map_err(|e| e.to_string())?;
                        write_diagram(&path1, &dgm)?;
                    }
                    Ok(tree.total_length())
                };
                match run() {
                    Ok(length) => SubjectOutcome::Computed { length },
                    Err(error) => SubjectOutcome::Failed { error },
                }
            })
            .collect()
    });

    let mut report = RunReport {
        computed: Vec::new(),
        skipped: Vec::new(),
        failures: Vec::new(),
        params: ReportParams {
            direction: cfg.direction,
            subsample: cfg.subsample,
            max_scale: cfg.max_scale,
            seed: cfg.seed,
            dims: format!("{:?}", cfg.dims).to_lowercase(),
        },
    };
    let mut lengths: Vec<(String, Option<f64>)> = Vec::new();
    for (row, outcome) in manifest.rows.iter().zip(outcomes) {
        match outcome {
            SubjectOutcome::Computed { length } => {
                report.computed.push(row.subject_id.clone());
                lengths.push((row.subject_id.clone(), Some(length)));
            }
            SubjectOutcome::Skipped { length } => {
                report.skipped.push(row.subject_id.clone());
                lengths.push((row.subject_id.clone(), length));
            }
            SubjectOutcome::Failed { error } => {
                report.failures.push(SubjectFailure {
                    subject_id: row.subject_id.clone(),
                    error,
                });
            }
        }
    }

    // A skipped subject without a recorded length forces one tree read; it
    // can only happen when lengths.csv was deleted out from under us.
    for (id, len) in lengths.iter_mut() {
        if len.is_none() {
            let row = manifest
                .rows
                .iter()
                .find(|r| &r.subject_id == id)
                .expect("id came from the manifest");
            let tree_file = manifest_dir.join(&row.tree_path);
            if let Ok(reader) = File::open(&tree_file).map(BufReader::new) {
                if let Ok((tree, _)) = EmbeddedTree::<f64>::parse(reader) {
                    *len = Some(tree.total_length());
                }
            }
        }
    }

    let lengths_file = lengths_path(&cfg.out_dir);
    let mut w = BufWriter::new(File::create(&lengths_file).map_err(|source| {
        PipelineError::File {
            path: lengths_file.clone(),
            source,
        }
    })?);
    writeln!(w, "subject_id,total_length")?;
    for (id, len) in &lengths {
        if let Some(len) = len {
            writeln!(w, "{id},{len}")?;
        }
    }
    w.flush()?;

    let report_path = cfg.out_dir.join("diagrams_report.json");
    fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n").map_err(|source| {
        PipelineError::File {
            path: report_path,
            source,
        }
    })?;
    Ok(report)
}

impl From<serde_json::Error> for PipelineError {
    fn from(e: serde_json::Error) -> Self {
        PipelineError::BadArg(format!("json: {e}"))
    }
}

fn write_diagram(path: &Path, dgm: &PersistenceDiagram<f64>) -> Result<(), String> {
    let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut w = BufWriter::new(file);
    dgm.write_csv(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn read_diagram(path: &Path) -> Result<PersistenceDiagram<f64>, PipelineError> {
    let file = File::open(path).map_err(|_| PipelineError::MissingInput {
        path: path.to_path_buf(),
    })?;
    Ok(PersistenceDiagram::read_csv(BufReader::new(file))?)
}

fn cohort_diagrams(
    cfg: &PipelineConfig,
    manifest: &CohortManifest,
    dim: HomDim,
) -> Result<Vec<PersistenceDiagram<f64>>, PipelineError> {
    manifest
        .rows
        .iter()
        .map(|row| read_diagram(&dgm_path(&cfg.out_dir, &row.subject_id, dim.as_u8())))
        .collect()
}

/// Feature rows (window slices of sorted persistences) for every subject,
/// in manifest order, with the requested length control applied.
fn feature_rows(
    cfg: &PipelineConfig,
    manifest: &CohortManifest,
    dim: HomDim,
    control: LengthControl,
) -> Result<Vec<Vec<f64>>, PipelineError> {
    let diagrams = cohort_diagrams(cfg, manifest, dim)?;
    let mut vectors = Vec::with_capacity(diagrams.len());
    for d in &diagrams {
        vectors.push(persistence_vector(d, cfg.window)?);
    }
    match control {
        LengthControl::None => Ok(vectors.into_iter().map(|v| v.values().to_vec()).collect()),
        LengthControl::Residual => {
            let lengths = subject_lengths(cfg, manifest)?;
            let rows: Vec<Vec<f64>> = vectors.into_iter().map(|v| v.values().to_vec()).collect();
            Ok(residualize(&rows, &lengths)?)
        }
        LengthControl::L | LengthControl::SqrtL | LengthControl::CbrtL => {
            let exponent = match control {
                LengthControl::L => LengthExponent::Full,
                LengthControl::SqrtL => LengthExponent::Sqrt,
                _ => LengthExponent::Cbrt,
            };
            let lengths = subject_lengths(cfg, manifest)?;
            let mut rows = Vec::with_capacity(vectors.len());
            for (v, &len) in vectors.iter().zip(&lengths) {
                rows.push(scale_by_length(v, len, exponent)?.values().to_vec());
            }
            Ok(rows)
        }
    }
}

fn subject_lengths(
    cfg: &PipelineConfig,
    manifest: &CohortManifest,
) -> Result<Vec<f64>, PipelineError> {
    let map = read_lengths(&cfg.out_dir)?;
    manifest
        .rows
        .iter()
        .map(|row| {
            map.get(&row.subject_id).copied().ok_or_else(|| {
                PipelineError::BadArg(format!(
                    "no recorded length for subject '{}'; rerun diagrams",
                    row.subject_id
                ))
            })
        })
        .collect()
}

/// Write the per-subject feature table for one homology dimension.
pub fn cmd_featurize(cfg: &PipelineConfig, dim: HomDim) -> Result<PathBuf, PipelineError> {
    let manifest = read_manifest(cfg)?;
    let diagrams = cohort_diagrams(cfg, &manifest, dim)?;
    let ids: Vec<String> = manifest.rows.iter().map(|r| r.subject_id.clone()).collect();
    let mut vectors = Vec::with_capacity(diagrams.len());
    for d in &diagrams {
        vectors.push(persistence_vector(d, cfg.window)?);
    }
    let path = cfg
        .out_dir
        .join(format!("features_dgm{}.csv", dim.as_u8()));
    let mut w = BufWriter::new(File::create(&path).map_err(|source| PipelineError::File {
        path: path.clone(),
        source,
    })?);
    treeph::features::write_feature_csv(&ids, &vectors, &mut w)?;
    w.flush()?;
    Ok(path)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PcaSummary {
    pub variances: Vec<f64>,
    pub loadings: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DipropermSummary {
    pub observed: f64,
    pub p_emp: f64,
    pub n_perm: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatsReport {
    pub covariate: String,
    pub dimension: u8,
    pub control: String,
    pub window: [usize; 2],
    pub n_subjects: usize,
    pub components: usize,
    pub pca: PcaSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diproperm: Option<DipropermSummary>,
}

/// Featurize, optionally control for total length, then test the covariate:
/// age via the correlation of PC1 scores, sex via the permutation test on
/// the feature vectors themselves. Writes and returns the report.
pub fn cmd_analyze(
    cfg: &PipelineConfig,
    covariate: Covariate,
    dim: HomDim,
    control: LengthControl,
    components: usize,
) -> Result<StatsReport, PipelineError> {
    let manifest = read_manifest(cfg)?;
    let rows = feature_rows(cfg, &manifest, dim, control)?;
    let s = rows.len();
    if s < 3 {
        return Err(PipelineError::BadArg(format!(
            "analysis needs at least 3 subjects, manifest has {s}"
        )));
    }
    let width = rows[0].len();
    let k = components.max(1).min(s - 1).min(width);
    let model = pca(&rows, k)?;

    let mut report = StatsReport {
        covariate: match covariate {
            Covariate::Age => "age".into(),
            Covariate::Sex => "sex".into(),
        },
        dimension: dim.as_u8(),
        control: control.label().into(),
        window: [cfg.window.0, cfg.window.1],
        n_subjects: s,
        components: k,
        pca: PcaSummary {
            variances: model.variances.clone(),
            loadings: model.loadings.clone(),
        },
        correlation: None,
        diproperm: None,
    };

    match covariate {
        Covariate::Age => {
            let ages: Vec<f64> = manifest.rows.iter().map(|r| r.age).collect();
            let pc1: Vec<f64> = model.scores.iter().map(|r| r[0]).collect();
            let corr = pearson(&pc1, &ages)?;
            report.correlation = Some(CorrelationSummary {
                rho: corr.rho,
                p_value: corr.p_value,
                n: corr.n,
            });
        }
        Covariate::Sex => {
            let mut group_m = Vec::new();
            let mut group_f = Vec::new();
            for (row, features) in manifest.rows.iter().zip(&rows) {
                match row.sex {
                    Sex::M => group_m.push(features.clone()),
                    Sex::F => group_f.push(features.clone()),
                }
            }
            let result = diproperm(&group_m, &group_f, cfg.n_perm, cfg.seed)?;
            report.diproperm = Some(DipropermSummary {
                observed: result.observed,
                p_emp: result.p_emp,
                n_perm: result.n_perm,
                seed: result.seed,
            });
        }
    }

    let path = cfg.out_dir.join(format!(
        "analysis_{}_dgm{}_{}.json",
        report.covariate,
        dim.as_u8(),
        control.label()
    ));
    fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").map_err(|source| {
        PipelineError::File { path, source }
    })?;
    Ok(report)
}

/// One statistic per feature window (n, N): age correlation of PC1 scores
/// or the sex permutation p-value. Writes `n,N,value` CSV and returns the
/// grid.
pub fn cmd_heatmap(
    cfg: &PipelineConfig,
    covariate: Covariate,
    dim: HomDim,
    n_max: usize,
) -> Result<(HeatGrid, PathBuf), PipelineError> {
    let manifest = read_manifest(cfg)?;
    let diagrams = cohort_diagrams(cfg, &manifest, dim)?;
    let grid = match covariate {
        Covariate::Age => {
            let ages: Vec<f64> = manifest.rows.iter().map(|r| r.age).collect();
            heatmap_age(&diagrams, &ages, n_max)?
        }
        Covariate::Sex => {
            let sexes: Vec<Sex> = manifest.rows.iter().map(|r| r.sex).collect();
            heatmap_sex(&diagrams, &sexes, n_max, cfg.n_perm, cfg.seed)?
        }
    };
    let label = match covariate {
        Covariate::Age => "age",
        Covariate::Sex => "sex",
    };
    let path = cfg
        .out_dir
        .join(format!("heatmap_{label}_dgm{}.csv", dim.as_u8()));
    let mut w = BufWriter::new(File::create(&path).map_err(|source| PipelineError::File {
        path: path.clone(),
        source,
    })?);
    grid.write_csv(&mut w)?;
    w.flush()?;
    Ok((grid, path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DistMetric {
    /// Between two diagram CSV files.
    Wasserstein,
    /// Between two diagram CSV files.
    Bottleneck,
    /// Between two point-cloud files (x y z per line).
    Hausdorff,
}

/// Distance between two files under the chosen metric. `p` is the outer
/// Wasserstein exponent; `ground_q` switches the planar norm from L-inf to
/// L_q.
pub fn cmd_dist(
    metric: DistMetric,
    p: f64,
    ground_q: Option<f64>,
    a: &Path,
    b: &Path,
) -> Result<f64, PipelineError> {
    match metric {
        DistMetric::Wasserstein => {
            let (da, db) = (read_diagram(a)?, read_diagram(b)?);
            let ground = match ground_q {
                None => Ground::LInf,
                Some(q) => Ground::Lq(q),
            };
            Ok(wasserstein(&da, &db, MatchingCost::new(p, ground)?)?)
        }
        DistMetric::Bottleneck => {
            let (da, db) = (read_diagram(a)?, read_diagram(b)?);
            Ok(bottleneck(&da, &db)?)
        }
        DistMetric::Hausdorff => {
            let ca = read_cloud(a)?;
            let cb = read_cloud(b)?;
            Ok(hausdorff(&ca.points, &cb.points)?)
        }
    }
}

fn read_cloud(path: &Path) -> Result<PointCloud<f64>, PipelineError> {
    let file = File::open(path).map_err(|source| PipelineError::File {
        path: path.to_path_buf(),
        source,
    })?;
    PointCloud::parse(BufReader::new(file))
        .map_err(|e| PipelineError::BadArg(format!("{}: {e}", path.display())))
}

/// Generate a synthetic cohort on disk; returns the manifest path.
pub fn cmd_synth(spec: &SynthSpec, out_dir: &Path) -> Result<PathBuf, PipelineError> {
    let cohort = generate_cohort(spec)?;
    Ok(cohort.write_to_dir(out_dir)?)
}
