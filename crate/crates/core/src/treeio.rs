//! Embedded-tree and point-cloud I/O, branch decomposition, subsampling,
//! and the cohort manifest format.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::Point3;
use crate::num::Real;

/// Vertex of an embedded tree: original file id, position, optional radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex<R> {
    pub id: u64,
    pub pos: Point3<R>,
    pub radius: Option<R>,
}

/// Maximal unbranched path: a run of vertices whose interior members all have
/// degree 2. A closed branch (from a pure-cycle component) repeats its first
/// vertex at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub vertices: Vec<usize>,
}

impl Branch {
    pub fn is_closed(&self) -> bool {
        self.vertices.len() > 2 && self.vertices.first() == self.vertices.last()
    }
}

#[derive(Debug, Error)]
pub enum TreeParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: duplicate vertex id {id}")]
    DuplicateVertex { line: usize, id: u64 },
    #[error("line {line}: edge references unknown vertex id {id}")]
    UnknownVertex { line: usize, id: u64 },
    #[error("line {line}: non-finite coordinate")]
    NonFinite { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Non-fatal findings during parsing or assembly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeWarning {
    /// The graph contains at least one cycle (`extra_edges` more edges than a
    /// forest on the same vertices would have).
    Cycle { extra_edges: usize },
    /// The graph is not connected.
    Disconnected { components: usize },
    /// An edge appeared more than once; only one copy is kept.
    DuplicateEdge { id1: u64, id2: u64 },
}

impl fmt::Display for TreeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeWarning::Cycle { extra_edges } => {
                write!(f, "graph contains cycles ({extra_edges} surplus edges)")
            }
            TreeWarning::Disconnected { components } => {
                write!(f, "graph has {components} connected components")
            }
            TreeWarning::DuplicateEdge { id1, id2 } => {
                write!(f, "duplicate edge {id1}-{id2} ignored")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum SubsampleError {
    #[error("subsample target must be positive")]
    ZeroTarget,
    #[error("tree has no vertices")]
    EmptyTree,
}

/// Tree (or near-tree graph) embedded in 3-space. Adjacency and the branch
/// decomposition are computed once at construction.
#[derive(Debug, Clone)]
pub struct EmbeddedTree<R> {
    vertices: Vec<Vertex<R>>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
    branches: Vec<Branch>,
}

impl<R: Real> EmbeddedTree<R> {
    /// Assembles a tree from vertex records and edges given by original ids.
    /// `edge_lines` supplies the source line for each edge when parsing; pass
    /// zeros for programmatic construction.
    pub fn assemble(
        vertices: Vec<Vertex<R>>,
        edge_ids: &[(u64, u64)],
        edge_lines: &[usize],
    ) -> Result<(Self, Vec<TreeWarning>), TreeParseError> {
        debug_assert_eq!(edge_ids.len(), edge_lines.len());
        let mut index_of = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index_of.insert(v.id, i).is_some() {
                return Err(TreeParseError::DuplicateVertex { line: 0, id: v.id });
            }
        }
        let mut warnings = Vec::new();
        let mut edges = Vec::with_capacity(edge_ids.len());
        let mut seen = HashMap::new();
        for (k, &(a, b)) in edge_ids.iter().enumerate() {
            let line = edge_lines[k];
            let ia = *index_of
                .get(&a)
                .ok_or(TreeParseError::UnknownVertex { line, id: a })?;
            let ib = *index_of
                .get(&b)
                .ok_or(TreeParseError::UnknownVertex { line, id: b })?;
            if ia == ib {
                return Err(TreeParseError::Malformed {
                    line,
                    msg: format!("self-loop on vertex id {a}"),
                });
            }
            let key = (ia.min(ib), ia.max(ib));
            if seen.insert(key, ()).is_some() {
                warnings.push(TreeWarning::DuplicateEdge { id1: a, id2: b });
                continue;
            }
            edges.push((ia, ib));
        }

        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (e, &(u, v)) in edges.iter().enumerate() {
            adjacency[u].push((v, e));
            adjacency[v].push((u, e));
        }

        let components = count_components(vertices.len(), &adjacency);
        if components > 1 {
            warnings.push(TreeWarning::Disconnected { components });
        }
        if !vertices.is_empty() {
            let forest_edges = vertices.len() - components;
            if edges.len() > forest_edges {
                warnings.push(TreeWarning::Cycle {
                    extra_edges: edges.len() - forest_edges,
                });
            }
        }

        let branches = decompose_branches(vertices.len(), &adjacency, &edges);
        Ok((
            EmbeddedTree {
                vertices,
                edges,
                adjacency,
                branches,
            },
            warnings,
        ))
    }

    /// Parses the `v`/`e` line format. `#` comments and blank lines are
    /// skipped. Structural oddities (cycles, disconnection, duplicate edges)
    /// come back as warnings; malformed records are errors.
    pub fn parse<B: BufRead>(reader: B) -> Result<(Self, Vec<TreeWarning>), TreeParseError> {
        let mut vertices: Vec<Vertex<R>> = Vec::new();
        let mut seen_ids: HashMap<u64, usize> = HashMap::new();
        let mut edge_ids = Vec::new();
        let mut edge_lines = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let content = match line.find('#') {
                Some(pos) => &line[..pos],
                None => &line[..],
            };
            let mut tok = content.split_whitespace();
            let Some(tag) = tok.next() else { continue };
            match tag {
                "v" => {
                    let fields: Vec<&str> = tok.collect();
                    if fields.len() < 4 || fields.len() > 5 {
                        return Err(TreeParseError::Malformed {
                            line: line_no,
                            msg: "vertex record needs id, x, y, z and optional radius".into(),
                        });
                    }
                    let id: u64 = fields[0].parse().map_err(|_| TreeParseError::Malformed {
                        line: line_no,
                        msg: format!("bad vertex id '{}'", fields[0]),
                    })?;
                    if seen_ids.contains_key(&id) {
                        return Err(TreeParseError::DuplicateVertex { line: line_no, id });
                    }
                    let mut coords = [R::zero(); 3];
                    for (slot, field) in coords.iter_mut().zip(&fields[1..4]) {
                        *slot = parse_coord(field, line_no)?;
                    }
                    let radius = match fields.get(4) {
                        Some(field) => Some(parse_coord(field, line_no)?),
                        None => None,
                    };
                    seen_ids.insert(id, vertices.len());
                    vertices.push(Vertex {
                        id,
                        pos: Point3::new(coords[0], coords[1], coords[2]),
                        radius,
                    });
                }
                "e" => {
                    let fields: Vec<&str> = tok.collect();
                    if fields.len() != 2 {
                        return Err(TreeParseError::Malformed {
                            line: line_no,
                            msg: "edge record needs exactly two vertex ids".into(),
                        });
                    }
                    let parse_id = |s: &str| -> Result<u64, TreeParseError> {
                        s.parse().map_err(|_| TreeParseError::Malformed {
                            line: line_no,
                            msg: format!("bad vertex id '{s}'"),
                        })
                    };
                    edge_ids.push((parse_id(fields[0])?, parse_id(fields[1])?));
                    edge_lines.push(line_no);
                }
                other => {
                    return Err(TreeParseError::Malformed {
                        line: line_no,
                        msg: format!("unknown record tag '{other}'"),
                    });
                }
            }
        }
        Self::assemble(vertices, &edge_ids, &edge_lines)
    }

    /// Serializes back to the `v`/`e` format (comments are not preserved).
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        for v in &self.vertices {
            match v.radius {
                Some(r) => writeln!(w, "v {} {} {} {} {}", v.id, v.pos.x, v.pos.y, v.pos.z, r)?,
                None => writeln!(w, "v {} {} {} {}", v.id, v.pos.x, v.pos.y, v.pos.z)?,
            }
        }
        for &(u, v) in &self.edges {
            writeln!(w, "e {} {}", self.vertices[u].id, self.vertices[v].id)?;
        }
        Ok(())
    }

    pub fn to_string_fmt(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("tree output is ASCII")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex<R>] {
        &self.vertices
    }

    /// Edges as pairs of vertex indices (not original ids).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn positions(&self) -> Vec<Point3<R>> {
        self.vertices.iter().map(|v| v.pos).collect()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn neighbor_indices(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(|&(w, _)| w)
    }

    /// Sum of Euclidean edge lengths.
    pub fn total_length(&self) -> R {
        self.edges
            .iter()
            .map(|&(u, v)| self.vertices[u].pos.dist(self.vertices[v].pos))
            .sum()
    }

    pub fn branch_length(&self, b: &Branch) -> R {
        b.vertices
            .windows(2)
            .map(|w| self.vertices[w[0]].pos.dist(self.vertices[w[1]].pos))
            .sum()
    }

    /// Spreads `target` sample points over the branches, proportionally to
    /// arc length, and spaces them uniformly along each branch (endpoints
    /// included). A tree with at most `target` vertices returns every vertex
    /// position unchanged. The `seed` only influences which branches receive
    /// the leftover points after proportional rounding, so the result is
    /// fully reproducible.
    pub fn subsample(&self, target: usize, seed: u64) -> Result<PointCloud<R>, SubsampleError> {
        if target == 0 {
            return Err(SubsampleError::ZeroTarget);
        }
        if self.vertices.is_empty() {
            return Err(SubsampleError::EmptyTree);
        }
        if self.vertices.len() <= target {
            return Ok(PointCloud {
                points: self.positions(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lengths: Vec<f64> = self
            .branches
            .iter()
            .map(|b| self.branch_length(b).to_f64_lossy())
            .collect();
        let counts = allocate_counts(&lengths, target, &mut rng);
        let mut points = Vec::with_capacity(target);
        for (b, &k) in self.branches.iter().zip(&counts) {
            if k == 0 {
                continue;
            }
            let total = self.branch_length(b);
            if k == 1 {
                points.push(self.point_at_arc(b, total * R::of(0.5), total));
                continue;
            }
            let step = total / R::of((k - 1) as f64);
            for i in 0..k {
                points.push(self.point_at_arc(b, step * R::of(i as f64), total));
            }
        }
        Ok(PointCloud { points })
    }

    /// Position at arc length `t` along the branch polyline, clamped to its
    /// ends.
    fn point_at_arc(&self, b: &Branch, t: R, total: R) -> Point3<R> {
        let verts = &b.vertices;
        if total <= R::zero() {
            return self.vertices[verts[0]].pos;
        }
        let t = t.max(R::zero()).min(total);
        let mut acc = R::zero();
        for w in verts.windows(2) {
            let p = self.vertices[w[0]].pos;
            let q = self.vertices[w[1]].pos;
            let seg = p.dist(q);
            if acc + seg >= t && seg > R::zero() {
                let local = (t - acc) / seg;
                return p.lerp(q, local);
            }
            acc = acc + seg;
        }
        self.vertices[*verts.last().expect("branch is non-empty")].pos
    }
}

fn parse_coord<R: Real>(s: &str, line: usize) -> Result<R, TreeParseError> {
    let v: f64 = s.parse().map_err(|_| TreeParseError::Malformed {
        line,
        msg: format!("bad number '{s}'"),
    })?;
    if !v.is_finite() {
        return Err(TreeParseError::NonFinite { line });
    }
    Ok(R::of(v))
}

fn count_components(n: usize, adjacency: &[Vec<(usize, usize)>]) -> usize {
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        components += 1;
        seen[s] = true;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &(w, _) in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    components
}

/// Splits the edge set into maximal unbranched paths. Every edge lands in
/// exactly one branch; path interiors have degree 2. Pure-cycle components
/// yield a single closed branch anchored at their lowest-index vertex.
fn decompose_branches(
    n: usize,
    adjacency: &[Vec<(usize, usize)>],
    edges: &[(usize, usize)],
) -> Vec<Branch> {
    let deg: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let mut edge_used = vec![false; edges.len()];
    let mut branches = Vec::new();

    let walk = |start: usize, first_edge: usize, edge_used: &mut Vec<bool>| -> Branch {
        let mut path = vec![start];
        let mut prev = start;
        let mut e = first_edge;
        loop {
            edge_used[e] = true;
            let (a, b) = edges[e];
            let next = if a == prev { b } else { a };
            path.push(next);
            if deg[next] != 2 || next == start {
                break;
            }
            let (_, e2) = adjacency[next]
                .iter()
                .copied()
                .find(|&(_, e2)| e2 != e)
                .expect("degree-2 vertex has a second incident edge");
            if edge_used[e2] {
                break;
            }
            prev = next;
            e = e2;
        }
        Branch { vertices: path }
    };

    for v in 0..n {
        if deg[v] == 2 {
            continue;
        }
        for &(_, e) in &adjacency[v] {
            if !edge_used[e] {
                branches.push(walk(v, e, &mut edge_used));
            }
        }
    }
    // Leftover edges belong to components where every vertex has degree 2:
    // pure cycles.
    for e in 0..edges.len() {
        if !edge_used[e] {
            let (a, b) = edges[e];
            let start = a.min(b);
            branches.push(walk(start, e, &mut edge_used));
        }
    }
    branches
}

/// Splits `target` into per-branch counts: one point per branch, the rest
/// proportional to length (floor), leftovers raffled by fractional remainder.
/// When there are more branches than points, the longest branches win.
fn allocate_counts(lengths: &[f64], target: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let nb = lengths.len();
    let mut counts = vec![0usize; nb];
    if nb == 0 {
        return counts;
    }
    if target <= nb {
        let mut order: Vec<usize> = (0..nb).collect();
        order.sort_by(|&a, &b| {
            lengths[b]
                .partial_cmp(&lengths[a])
                .expect("branch lengths are finite")
                .then(a.cmp(&b))
        });
        for &b in order.iter().take(target) {
            counts[b] = 1;
        }
        return counts;
    }
    for c in counts.iter_mut() {
        *c = 1;
    }
    let extra = target - nb;
    let total: f64 = lengths.iter().sum();
    let weights: Vec<f64> = if total > 0.0 {
        lengths.iter().map(|&l| l / total).collect()
    } else {
        vec![1.0 / nb as f64; nb]
    };
    let mut assigned = 0usize;
    let mut remainders = vec![0.0f64; nb];
    for b in 0..nb {
        let ideal = extra as f64 * weights[b];
        let fl = ideal.floor();
        counts[b] += fl as usize;
        assigned += fl as usize;
        remainders[b] = ideal - fl;
    }
    let mut leftover = extra.saturating_sub(assigned);
    while leftover > 0 {
        let total_rem: f64 = remainders.iter().sum();
        let pick = if total_rem > 0.0 {
            let mut u = rng.gen::<f64>() * total_rem;
            let mut chosen = nb - 1;
            for (b, &r) in remainders.iter().enumerate() {
                if r <= 0.0 {
                    continue;
                }
                if u < r {
                    chosen = b;
                    break;
                }
                u -= r;
            }
            chosen
        } else {
            rng.gen_range(0..nb)
        };
        counts[pick] += 1;
        remainders[pick] = 0.0;
        leftover -= 1;
    }
    counts
}

#[derive(Debug, Error)]
pub enum CloudParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: non-finite coordinate")]
    NonFinite { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Finite multiset of points in 3-space (duplicates allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<R> {
    pub points: Vec<Point3<R>>,
}

impl<R: Real> PointCloud<R> {
    pub fn new(points: Vec<Point3<R>>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Parses whitespace-separated `x y z` lines; `#` comments and blank
    /// lines are skipped.
    pub fn parse<B: BufRead>(reader: B) -> Result<Self, CloudParseError> {
        let mut points = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let content = match line.find('#') {
                Some(pos) => &line[..pos],
                None => &line[..],
            };
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 3 {
                return Err(CloudParseError::Malformed {
                    line: line_no,
                    msg: format!("expected 3 coordinates, got {}", fields.len()),
                });
            }
            let mut coords = [R::zero(); 3];
            for (slot, field) in coords.iter_mut().zip(&fields) {
                let v: f64 = field.parse().map_err(|_| CloudParseError::Malformed {
                    line: line_no,
                    msg: format!("bad number '{field}'"),
                })?;
                if !v.is_finite() {
                    return Err(CloudParseError::NonFinite { line: line_no });
                }
                *slot = R::of(v);
            }
            points.push(Point3::new(coords[0], coords[1], coords[2]));
        }
        Ok(PointCloud { points })
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        for p in &self.points {
            writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
        }
        Ok(())
    }

    /// Axis-aligned bounding box, `None` for an empty cloud.
    pub fn bounding_box(&self) -> Option<(Point3<R>, Point3<R>)> {
        let first = *self.points.first()?;
        let mut lo = first;
        let mut hi = first;
        for p in &self.points[1..] {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            lo.z = lo.z.min(p.z);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
            hi.z = hi.z.max(p.z);
        }
        Some((lo, hi))
    }

    /// Diagonal length of the bounding box; zero for empty or single-point
    /// clouds.
    pub fn bounding_diagonal(&self) -> R {
        match self.bounding_box() {
            Some((lo, hi)) => lo.dist(hi),
            None => R::zero(),
        }
    }
}

/// Subject sex as recorded in a cohort manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sex {
    M,
    F,
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sex::M => write!(f, "M"),
            Sex::F => write!(f, "F"),
        }
    }
}

impl FromStr for Sex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "M" => Ok(Sex::M),
            "F" => Ok(Sex::F),
            other => Err(format!("sex must be 'M' or 'F', got '{other}'")),
        }
    }
}

/// One manifest row: a subject and where to find their tree.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRow {
    pub subject_id: String,
    pub tree_path: String,
    pub age: f64,
    pub sex: Sex,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest header must be 'subject_id,tree_path,age,sex', got '{got}'")]
    Header { got: String },
    #[error("manifest row {row}: {msg}")]
    Row { row: usize, msg: String },
    #[error("duplicate subject id '{id}'")]
    DuplicateSubject { id: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Cohort manifest: ordered list of subjects with tree paths and covariates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CohortManifest {
    pub rows: Vec<SubjectRow>,
}

impl CohortManifest {
    pub fn read_csv<Rd: io::Read>(reader: Rd) -> Result<Self, ManifestError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        {
            let headers = rdr.headers()?;
            let expected = ["subject_id", "tree_path", "age", "sex"];
            let got: Vec<&str> = headers.iter().collect();
            if got != expected {
                return Err(ManifestError::Header {
                    got: got.join(","),
                });
            }
        }
        let mut rows = Vec::new();
        let mut seen = HashMap::new();
        for (i, record) in rdr.records().enumerate() {
            let row_no = i + 2;
            let record = record?;
            if record.len() != 4 {
                return Err(ManifestError::Row {
                    row: row_no,
                    msg: format!("expected 4 fields, got {}", record.len()),
                });
            }
            let subject_id = record[0].to_string();
            if subject_id.is_empty() {
                return Err(ManifestError::Row {
                    row: row_no,
                    msg: "empty subject_id".into(),
                });
            }
            if seen.insert(subject_id.clone(), ()).is_some() {
                return Err(ManifestError::DuplicateSubject { id: subject_id });
            }
            let age: f64 = record[2].parse().map_err(|_| ManifestError::Row {
                row: row_no,
                msg: format!("bad age '{}'", &record[2]),
            })?;
            if !age.is_finite() {
                return Err(ManifestError::Row {
                    row: row_no,
                    msg: "age must be finite".into(),
                });
            }
            let sex = record[3].parse().map_err(|msg: String| ManifestError::Row {
                row: row_no,
                msg,
            })?;
            rows.push(SubjectRow {
                subject_id,
                tree_path: record[1].to_string(),
                age,
                sex,
            });
        }
        Ok(CohortManifest { rows })
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), ManifestError> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["subject_id", "tree_path", "age", "sex"])?;
        for r in &self.rows {
            wtr.write_record([
                r.subject_id.as_str(),
                r.tree_path.as_str(),
                &r.age.to_string(),
                &r.sex.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_tree(text: &str) -> (EmbeddedTree<f64>, Vec<TreeWarning>) {
        EmbeddedTree::<f64>::parse(text.as_bytes()).unwrap()
    }

    #[test]
    fn parses_two_vertex_tree() {
        let (t, warnings) = parse_tree("v 0 0 0 0\nv 1 0 0 2\ne 0 1\n");
        assert_eq!(t.vertex_count(), 2);
        assert_eq!(t.edge_count(), 1);
        assert_eq!(t.branches().len(), 1);
        assert!(warnings.is_empty());
        assert_eq!(t.total_length(), 2.0);
    }

    #[test]
    fn comments_blanks_and_radius_are_accepted() {
        let (t, _) = parse_tree("# cohort subject 7\n\nv 10 1.5 0 0 0.25\nv 11 2.5 0 0\ne 10 11 # distal\n");
        assert_eq!(t.vertex_count(), 2);
        assert_eq!(t.vertices()[0].radius, Some(0.25));
        assert_eq!(t.vertices()[1].radius, None);
        assert_eq!(t.total_length(), 1.0);
    }

    #[test]
    fn edge_to_unknown_vertex_is_an_error() {
        let err = EmbeddedTree::<f64>::parse("e 0 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TreeParseError::UnknownVertex { id: 0, .. }));
    }

    #[test]
    fn duplicate_vertex_id_is_an_error() {
        let err = EmbeddedTree::<f64>::parse("v 3 0 0 0\nv 3 1 1 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TreeParseError::DuplicateVertex { id: 3, .. }));
    }

    #[test]
    fn non_finite_coordinate_is_an_error() {
        let err = EmbeddedTree::<f64>::parse("v 0 inf 0 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TreeParseError::NonFinite { line: 1 }));
    }

    #[test]
    fn y_shape_has_three_branches() {
        let (t, warnings) = parse_tree(
            "v 0 0 0 0\nv 1 1 0 0\nv 2 -1 0 0\nv 3 0 1 0\ne 0 1\ne 0 2\ne 0 3\n",
        );
        assert!(warnings.is_empty());
        assert_eq!(t.branches().len(), 3);
        for b in t.branches() {
            assert_eq!(b.vertices.len(), 2);
            assert_eq!(b.vertices[0], 0);
        }
    }

    #[test]
    fn path_through_degree_two_vertex_is_one_branch() {
        let (t, _) = parse_tree("v 0 0 0 0\nv 1 1 0 0\nv 2 3 0 0\ne 0 1\ne 1 2\n");
        assert_eq!(t.branches().len(), 1);
        assert_eq!(t.branches()[0].vertices.len(), 3);
        assert_eq!(t.total_length(), 3.0);
    }

    #[test]
    fn cycle_warns_and_produces_closed_branch() {
        let (t, warnings) = parse_tree(
            "v 0 0 0 0\nv 1 1 0 0\nv 2 0 1 0\ne 0 1\ne 1 2\ne 2 0\n",
        );
        assert!(warnings.contains(&TreeWarning::Cycle { extra_edges: 1 }));
        assert_eq!(t.branches().len(), 1);
        assert!(t.branches()[0].is_closed());
    }

    #[test]
    fn disconnected_graph_warns() {
        let (_, warnings) = parse_tree("v 0 0 0 0\nv 1 5 0 0\n");
        assert!(warnings.contains(&TreeWarning::Disconnected { components: 2 }));
    }

    #[test]
    fn duplicate_edge_warns_and_is_dropped() {
        let (t, warnings) = parse_tree("v 0 0 0 0\nv 1 1 0 0\ne 0 1\ne 1 0\n");
        assert_eq!(t.edge_count(), 1);
        assert!(warnings
            .iter()
            .any(|w| matches!(w, TreeWarning::DuplicateEdge { .. })));
    }

    #[test]
    fn every_edge_lies_in_exactly_one_branch() {
        let (t, _) = parse_tree(
            "v 0 0 0 0\nv 1 1 0 0\nv 2 2 0 0\nv 3 2 1 0\nv 4 2 -1 0\nv 5 3 1 0\n\
             e 0 1\ne 1 2\ne 2 3\ne 2 4\ne 3 5\n",
        );
        let mut covered = vec![0usize; t.edge_count()];
        for b in t.branches() {
            for w in b.vertices.windows(2) {
                let (u, v) = (w[0].min(w[1]), w[0].max(w[1]));
                let e = t
                    .edges()
                    .iter()
                    .position(|&(a, b)| (a.min(b), a.max(b)) == (u, v))
                    .unwrap();
                covered[e] += 1;
            }
        }
        assert!(covered.iter().all(|&c| c == 1));
    }

    #[test]
    fn small_tree_subsamples_to_its_vertices() {
        let (t, _) = parse_tree(
            "v 0 0 0 0\nv 1 1 0 0\nv 2 2 0 0\nv 3 2 1 0\ne 0 1\ne 1 2\ne 2 3\n",
        );
        let cloud = t.subsample(100, 7).unwrap();
        assert_eq!(cloud.points, t.positions());
    }

    #[test]
    fn straight_segment_subsamples_uniformly() {
        let mut text = String::new();
        // 21 vertices along a length-10 segment so the subsampler must reduce.
        for i in 0..21 {
            text.push_str(&format!("v {} {} 0 0\n", i, i as f64 * 0.5));
        }
        for i in 0..20 {
            text.push_str(&format!("e {} {}\n", i, i + 1));
        }
        let (t, _) = parse_tree(&text);
        let cloud = t.subsample(5, 0).unwrap();
        assert_eq!(cloud.len(), 5);
        for (i, p) in cloud.points.iter().enumerate() {
            assert!((p.x - i as f64 * 2.5).abs() < 1e-12);
            assert_eq!(p.y, 0.0);
        }
    }

    #[test]
    fn subsample_is_deterministic_per_seed() {
        let mut text = String::new();
        for i in 0..40 {
            text.push_str(&format!("v {} {} {} 0\n", i, (i % 7) as f64, (i / 7) as f64));
        }
        for i in 1..40 {
            text.push_str(&format!("e {} {}\n", i, (i - 1) / 2));
        }
        let (t, _) = parse_tree(&text);
        let a = t.subsample(17, 42).unwrap();
        let b = t.subsample(17, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 17);
    }

    #[test]
    fn zero_subsample_target_is_an_error() {
        let (t, _) = parse_tree("v 0 0 0 0\n");
        assert!(matches!(
            t.subsample(0, 0),
            Err(SubsampleError::ZeroTarget)
        ));
    }

    #[test]
    fn more_branches_than_points_keeps_longest() {
        // Star with 3 arms of lengths 3, 2, 1; target 2 points.
        let (t, _) = parse_tree(
            "v 0 0 0 0\nv 1 3 0 0\nv 2 0 2 0\nv 3 0 0 1\nv 9 9 9 9\n\
             e 0 1\ne 0 2\ne 0 3\n",
        );
        let cloud = t.subsample(2, 5).unwrap();
        assert_eq!(cloud.len(), 2);
        // Midpoints of the two longest arms.
        assert!(cloud.points.contains(&Point3::new(1.5, 0.0, 0.0)));
        assert!(cloud.points.contains(&Point3::new(0.0, 1.0, 0.0)));
    }

    #[test]
    fn tree_roundtrip_preserves_geometry() {
        let (t, _) = parse_tree("v 5 0.1 -0.2 0.3 1.5\nv 9 1 2 3\ne 5 9\n");
        let text = t.to_string_fmt();
        let (back, warnings) = EmbeddedTree::<f64>::parse(text.as_bytes()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(back.vertices(), t.vertices());
        assert_eq!(back.edges(), t.edges());
    }

    #[test]
    fn cloud_parse_and_bounding_box() {
        let c = PointCloud::<f64>::parse("0 0 0\n1 2 2\n# note\n-1 0 0\n".as_bytes()).unwrap();
        assert_eq!(c.len(), 3);
        let (lo, hi) = c.bounding_box().unwrap();
        assert_eq!(lo, Point3::new(-1.0, 0.0, 0.0));
        assert_eq!(hi, Point3::new(1.0, 2.0, 2.0));
        assert_eq!(c.bounding_diagonal(), 12.0f64.sqrt());
    }

    #[test]
    fn cloud_rejects_bad_rows() {
        assert!(PointCloud::<f64>::parse("1 2\n".as_bytes()).is_err());
        assert!(PointCloud::<f64>::parse("1 2 nan\n".as_bytes()).is_err());
    }

    #[test]
    fn manifest_roundtrip() {
        let m = CohortManifest {
            rows: vec![
                SubjectRow {
                    subject_id: "s001".into(),
                    tree_path: "trees/s001.tree".into(),
                    age: 34.5,
                    sex: Sex::F,
                },
                SubjectRow {
                    subject_id: "s002".into(),
                    tree_path: "trees/s002.tree".into(),
                    age: 61.0,
                    sex: Sex::M,
                },
            ],
        };
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = CohortManifest::read_csv(&buf[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn manifest_rejects_wrong_header_and_duplicates() {
        let bad = "id,tree,age,sex\ns1,a,30,M\n";
        assert!(matches!(
            CohortManifest::read_csv(bad.as_bytes()),
            Err(ManifestError::Header { .. })
        ));
        let dup = "subject_id,tree_path,age,sex\ns1,a,30,M\ns1,b,40,F\n";
        assert!(matches!(
            CohortManifest::read_csv(dup.as_bytes()),
            Err(ManifestError::DuplicateSubject { .. })
        ));
        let badsex = "subject_id,tree_path,age,sex\ns1,a,30,x\n";
        assert!(matches!(
            CohortManifest::read_csv(badsex.as_bytes()),
            Err(ManifestError::Row { .. })
        ));
    }
}
