//! End-to-end runs: load a mesh, build its contour tree, weigh superarcs,
//! decompose into branches and extract the top branches' contours.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::contour_tree::{ContourTree, ContourTreeError};
use crate::decomposition::{decompose, Branch, BranchDecomposition, DecompositionError};
use crate::geometry::build_tet_spline;
use crate::hypersweep::{
    build_tet_splines, compute_deltas, count_regular_nodes, count_weights, root_function,
    sweep_volumes, volume_weights, ArcWeights, HypersweepError,
};
use crate::isosurface::{
    extract_superarc_contour, rank_color, write_mtl, write_obj, IsosurfaceError,
};
use crate::mesh::{
    grid_to_tets, load_tetgen, parse_raw_grid, FieldSource, GridDims, MeshError, Point3, TetMesh,
    TopologyGraph, VertexOrder,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("load: {0}")]
    Load(#[from] MeshError),
    #[error("contour tree: {0}")]
    Tree(#[from] ContourTreeError),
    #[error("weights: {0}")]
    Weights(#[from] HypersweepError),
    #[error("branch decomposition: {0}")]
    Decomposition(#[from] DecompositionError),
    #[error("extraction: {0}")]
    Extraction(#[from] IsosurfaceError),
    #[error("output {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshInput {
    Tetgen {
        node: PathBuf,
        ele: PathBuf,
        field: FieldSource,
    },
    Grid {
        dims: GridDims,
        raw: PathBuf,
        spacing: Point3,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMethod {
    Count,
    Volume,
}

impl fmt::Display for WeightMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMethod::Count => "count",
            WeightMethod::Volume => "volume",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub input: MeshInput,
    pub weights: WeightMethod,
    pub top_k: usize,
    /// `(superarc, isovalue)` overrides for the branch containing the superarc.
    pub isovalues: Vec<(u32, f64)>,
    pub out_dir: PathBuf,
    /// Worker threads for the parallel passes; `None` uses all cores.
    pub threads: Option<usize>,
}

pub fn load_mesh(input: &MeshInput) -> Result<TetMesh, PipelineError> {
    Ok(match input {
        MeshInput::Tetgen { node, ele, field } => load_tetgen(node, ele, field)?,
        MeshInput::Grid { dims, raw, spacing } => {
            let bytes = std::fs::read(raw).map_err(|source| MeshError::Io {
                path: raw.clone(),
                source,
            })?;
            grid_to_tets(*dims, &parse_raw_grid(&bytes, *dims)?, *spacing)?
        }
    })
}

/// One row of the per-superarc table. `coeffs` is the cubic in force next
/// to the parent end (volume weights) or `[0, 0, 0, count]` (count weights).
#[derive(Clone, Debug, PartialEq)]
pub struct ArcRow {
    pub superarc: u32,
    pub h_lo: f64,
    pub h_hi: f64,
    pub coeffs: [f64; 4],
    /// What pruning the superarc at its parent end removes.
    pub weight: f64,
}

/// Everything computed from a mesh before extraction.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub method: WeightMethod,
    pub tree: ContourTree,
    pub weights: Vec<ArcWeights>,
    pub total: f64,
    pub rows: Vec<ArcRow>,
    pub decomposition: BranchDecomposition,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub load: Duration,
    pub tree: Duration,
    pub weights: Duration,
    pub decomposition: Duration,
    pub extraction: Duration,
    pub output: Duration,
}

fn timed<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *slot = start.elapsed();
    out
}

pub fn build_tree(mesh: &TetMesh) -> Result<ContourTree, ContourTreeError> {
    let order = VertexOrder::new(mesh);
    ContourTree::build(&TopologyGraph::from_mesh(mesh), &order, mesh.values())
}

/// Superarc weights, per-arc table and total weight.
pub fn weigh(
    mesh: &TetMesh,
    tree: &ContourTree,
    method: WeightMethod,
) -> Result<(Vec<ArcWeights>, Vec<ArcRow>, f64), HypersweepError> {
    let row = |e: u32, coeffs: [f64; 4], w: &ArcWeights| {
        let (h_lo, h_hi) = tree.arc_range(e);
        ArcRow {
            superarc: e,
            h_lo,
            h_hi,
            coeffs,
            weight: w.seen_from(tree, e, tree.parent_node(e)),
        }
    };
    match method {
        WeightMethod::Volume => {
            let order = VertexOrder::new(mesh);
            let deltas = compute_deltas(mesh.vertex_count(), &build_tet_splines(mesh, &order));
            let volumes = sweep_volumes(tree, &deltas)?;
            let total = root_function(tree, &volumes, &deltas).eval(0.0);
            let weights = volume_weights(tree, &volumes, total);
            let rows = volumes
                .iter()
                .zip(&weights)
                .map(|(v, w)| row(v.arc, v.full.coeffs(), w))
                .collect();
            Ok((weights, rows, total))
        }
        WeightMethod::Count => {
            let counts = count_regular_nodes(tree);
            let weights = count_weights(tree, &counts);
            let rows = (0..tree.superarc_count() as u32)
                .zip(&weights)
                .map(|(e, w)| row(e, [0.0, 0.0, 0.0, counts.subtree[e as usize] as f64], w))
                .collect();
            Ok((weights, rows, tree.vertex_count() as f64))
        }
    }
}

pub fn analyze(
    mesh: &TetMesh,
    method: WeightMethod,
    timings: &mut StageTimings,
) -> Result<Analysis, PipelineError> {
    let tree = timed(&mut timings.tree, || build_tree(mesh))?;
    let (weights, rows, total) = timed(&mut timings.weights, || weigh(mesh, &tree, method))?;
    let decomposition = timed(&mut timings.decomposition, || {
        decompose(&tree, &weights, total)
    })?;
    Ok(Analysis {
        method,
        tree,
        weights,
        total,
        rows,
        decomposition,
    })
}

/// Default contour of a branch: the master branch at the middle of its
/// value range, any other branch at the middle of its superarc next to the
/// attachment. `None` when that interval is empty (tied end values).
pub fn default_isovalue(tree: &ContourTree, branch: &Branch) -> Option<(u32, f64)> {
    let (arc, lo, hi) = match branch.attachment {
        None => {
            let (lo, hi) = (
                tree.supernode_value(branch.lo_node),
                tree.supernode_value(branch.hi_node),
            );
            let mid = lo + 0.5 * (hi - lo);
            let arc = *branch
                .superarcs
                .iter()
                .find(|&&e| tree.arc_contains(e, mid))?;
            (arc, lo, hi)
        }
        Some(node) => {
            let arc = if node == branch.lo_node {
                branch.superarcs[0]
            } else {
                *branch.superarcs.last()?
            };
            let (lo, hi) = tree.arc_range(arc);
            (arc, lo, hi)
        }
    };
    let mid = lo + 0.5 * (hi - lo);
    tree.arc_contains(arc, mid).then_some((arc, mid))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extracted {
    pub rank: u32,
    pub superarc: u32,
    pub isovalue: f64,
    pub triangles: usize,
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub vertices: usize,
    pub tets: usize,
    pub supernodes: usize,
    pub superarcs: usize,
    pub branches: usize,
    pub total_volume: f64,
    pub method: WeightMethod,
    pub total_weight: f64,
    pub extracted: Vec<Extracted>,
    pub warnings: Vec<String>,
    pub timings: StageTimings,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices      {}", self.vertices)?;
        writeln!(f, "tets          {}", self.tets)?;
        writeln!(f, "supernodes    {}", self.supernodes)?;
        writeln!(f, "superarcs     {}", self.superarcs)?;
        writeln!(f, "branches      {}", self.branches)?;
        writeln!(f, "total volume  {}", self.total_volume)?;
        writeln!(
            f,
            "weights       {} (total {})",
            self.method, self.total_weight
        )?;
        for e in &self.extracted {
            writeln!(
                f,
                "branch {:>3}    superarc {} at {} -> {} triangles, {}",
                e.rank,
                e.superarc,
                e.isovalue,
                e.triangles,
                e.path.display()
            )?;
        }
        let t = &self.timings;
        for (name, d) in [
            ("load", t.load),
            ("tree", t.tree),
            ("weights", t.weights),
            ("decomposition", t.decomposition),
            ("extraction", t.extraction),
            ("output", t.output),
        ] {
            writeln!(f, "time {name:<14} {:.3} s", d.as_secs_f64())?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| PipelineError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    writeln!(out).and_then(|_| out.flush()).map_err(io_at(path))
}

#[derive(Serialize)]
struct TreeJson {
    schema: u32,
    #[serde(rename = "vertexCount")]
    vertex_count: usize,
    supernodes: Vec<SupernodeJson>,
    superarcs: Vec<SuperarcJson>,
}

#[derive(Serialize)]
struct SupernodeJson {
    id: u32,
    vertex: u32,
    value: f64,
}

#[derive(Serialize)]
struct SuperarcJson {
    id: u32,
    lo: u32,
    hi: u32,
    #[serde(rename = "regularCount")]
    regular_count: usize,
}

pub fn write_tree_json(tree: &ContourTree, path: &Path) -> Result<(), PipelineError> {
    let supernodes = (0..tree.supernode_count() as u32)
        .map(|s| SupernodeJson {
            id: s,
            vertex: tree.supernode_vertex(s),
            value: tree.supernode_value(s),
        })
        .collect();
    let superarcs = tree
        .superarcs()
        .iter()
        .enumerate()
        .map(|(e, a)| SuperarcJson {
            id: e as u32,
            lo: a.lo,
            hi: a.hi,
            regular_count: tree.regular_vertices(e as u32).len(),
        })
        .collect();
    write_json(
        path,
        &TreeJson {
            schema: SCHEMA_VERSION,
            vertex_count: tree.vertex_count(),
            supernodes,
            superarcs,
        },
    )
}

pub fn write_weights_csv<W: Write + ?Sized>(rows: &[ArcRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "superarc,h_lo,h_hi,a,b,c,d,weight")?;
    for r in rows {
        let [a, b, c, d] = r.coeffs;
        writeln!(
            out,
            "{},{},{},{a},{b},{c},{d},{}",
            r.superarc, r.h_lo, r.h_hi, r.weight
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BranchJson<'a> {
    rank: u32,
    weight: f64,
    superarcs: &'a [u32],
    parent: Option<u32>,
    #[serde(rename = "attachmentSupernode")]
    attachment_supernode: Option<u32>,
    #[serde(rename = "loSupernode")]
    lo_supernode: u32,
    #[serde(rename = "hiSupernode")]
    hi_supernode: u32,
}

#[derive(Serialize)]
struct BranchesJson<'a> {
    schema: u32,
    #[serde(rename = "weightMethod")]
    weight_method: WeightMethod,
    #[serde(rename = "totalWeight")]
    total_weight: f64,
    branches: Vec<BranchJson<'a>>,
}

pub fn write_branches_json(analysis: &Analysis, path: &Path) -> Result<(), PipelineError> {
    let branches = analysis
        .decomposition
        .branches()
        .iter()
        .map(|b| BranchJson {
            rank: b.rank,
            weight: b.weight,
            superarcs: &b.superarcs,
            parent: b.parent,
            attachment_supernode: b.attachment,
            lo_supernode: b.lo_node,
            hi_supernode: b.hi_node,
        })
        .collect();
    write_json(
        path,
        &BranchesJson {
            schema: SCHEMA_VERSION,
            weight_method: analysis.method,
            total_weight: analysis.total,
            branches,
        },
    )
}

/// Contours to extract: the top `k` branches at their defaults, with
/// overrides replacing defaults and adding branches outside the top `k`.
fn extraction_plan(
    analysis: &Analysis,
    top_k: usize,
    overrides: &[(u32, f64)],
    warnings: &mut Vec<String>,
) -> Result<Vec<(u32, u32, f64)>, PipelineError> {
    let tree = &analysis.tree;
    let dec = &analysis.decomposition;
    let mut plan: Vec<(u32, Option<(u32, f64)>)> = dec
        .top_branches(top_k)
        .iter()
        .map(|b| (b.rank, default_isovalue(tree, b)))
        .collect();
    for &(arc, h) in overrides {
        if arc as usize >= tree.superarc_count() {
            return Err(IsosurfaceError::NoSuchArc(arc).into());
        }
        if !tree.arc_contains(arc, h) {
            let (lo, hi) = tree.arc_range(arc);
            return Err(IsosurfaceError::OutsideArc { arc, h, lo, hi }.into());
        }
        let rank = dec.branch_of(arc);
        match plan.iter_mut().find(|(r, _)| *r == rank) {
            Some(slot) => slot.1 = Some((arc, h)),
            None => plan.push((rank, Some((arc, h)))),
        }
    }
    plan.sort_by_key(|(r, _)| *r);
    Ok(plan
        .into_iter()
        .filter_map(|(rank, choice)| match choice {
            Some((arc, h)) => Some((rank, arc, h)),
            None => {
                warnings.push(format!(
                    "branch {rank} spans no value range; no contour extracted"
                ));
                None
            }
        })
        .collect())
}

fn run_inner(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    if config.top_k == 0 {
        return Err(PipelineError::Config("top K must be at least 1".into()));
    }
    let mut timings = StageTimings::default();
    let mesh = timed(&mut timings.load, || load_mesh(&config.input))?;
    let analysis = analyze(&mesh, config.weights, &mut timings)?;
    let tree = &analysis.tree;
    let mut warnings = Vec::new();
    let out_dir = &config.out_dir;
    std::fs::create_dir_all(out_dir).map_err(io_at(out_dir))?;

    let start = Instant::now();
    let plan = extraction_plan(&analysis, config.top_k, &config.isovalues, &mut warnings)?;
    let mut extracted = Vec::with_capacity(plan.len());
    for &(rank, arc, h) in &plan {
        let soup = extract_superarc_contour(&mesh, tree, arc, h)?;
        if soup.is_empty() {
            warnings.push(format!(
                "branch {rank}: contour of superarc {arc} at {h} is empty"
            ));
        }
        let path = out_dir.join(format!("branch_{rank}.obj"));
        let mut out = create(&path)?;
        let material = format!("branch_{rank}");
        write_obj(&soup, &mut out, Some(("branches.mtl", &material)))
            .and_then(|_| out.flush())
            .map_err(io_at(&path))?;
        extracted.push(Extracted {
            rank,
            superarc: arc,
            isovalue: h,
            triangles: soup.triangle_count(),
            path,
        });
    }
    let mtl = out_dir.join("branches.mtl");
    let colors: Vec<(u32, [f64; 3])> = plan.iter().map(|&(r, _, _)| (r, rank_color(r))).collect();
    let mut out = create(&mtl)?;
    write_mtl(&colors, &mut out)
        .and_then(|_| out.flush())
        .map_err(io_at(&mtl))?;
    timings.extraction = start.elapsed();

    let start = Instant::now();
    write_tree_json(tree, &out_dir.join("tree.json"))?;
    let csv = out_dir.join("weights.csv");
    let mut out = create(&csv)?;
    write_weights_csv(&analysis.rows, &mut out)
        .and_then(|_| out.flush())
        .map_err(io_at(&csv))?;
    write_branches_json(&analysis, &out_dir.join("branches.json"))?;
    timings.output = start.elapsed();

    Ok(RunSummary {
        vertices: mesh.vertex_count(),
        tets: mesh.tet_count(),
        supernodes: tree.supernode_count(),
        superarcs: tree.superarc_count(),
        branches: analysis.decomposition.len(),
        total_volume: mesh.total_volume(),
        method: analysis.method,
        total_weight: analysis.total,
        extracted,
        warnings,
        timings,
    })
}

/// Runs `f` on a pool of `threads` workers, or the global pool for `None`.
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, PipelineError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(PipelineError::Config(
            "thread count must be at least 1".into(),
        )),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Writes `tree.json`, `weights.csv`, `branches.json`, `branches.mtl` and
/// one `branch_<rank>.obj` per extracted branch into the output directory.
pub fn run(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    with_threads(config.threads, || run_inner(config))?
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub label: String,
    pub vertices: usize,
    pub tets: usize,
    pub supernodes: usize,
    pub construction: Duration,
    pub weights: Duration,
    pub decomposition: Duration,
}

/// Best of `repeats` timings of tree construction, weights and
/// decomposition.
pub fn bench(
    label: &str,
    mesh: &TetMesh,
    method: WeightMethod,
    repeats: usize,
) -> Result<BenchRow, PipelineError> {
    let mut best: Option<BenchRow> = None;
    for _ in 0..repeats.max(1) {
        let mut t = StageTimings::default();
        let analysis = analyze(mesh, method, &mut t)?;
        let row = BenchRow {
            label: label.to_string(),
            vertices: mesh.vertex_count(),
            tets: mesh.tet_count(),
            supernodes: analysis.tree.supernode_count(),
            construction: t.tree,
            weights: t.weights,
            decomposition: t.decomposition,
        };
        best = Some(match best {
            Some(b)
                if b.construction + b.weights + b.decomposition
                    <= row.construction + row.weights + row.decomposition =>
            {
                b
            }
            _ => row,
        });
    }
    Ok(best.expect("at least one repeat"))
}

pub fn write_bench_csv<W: Write + ?Sized>(rows: &[BenchRow], out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "mesh,vertices,tets,supernodes,construction_s,weights_s,branch_decomposition_s"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6}",
            r.label,
            r.vertices,
            r.tets,
            r.supernodes,
            r.construction.as_secs_f64(),
            r.weights.as_secs_f64(),
            r.decomposition.as_secs_f64()
        )?;
    }
    Ok(())
}

/// One row per non-empty spline piece of every tet:
/// `tet,piece,h_lo,h_hi,a,b,c,d`.
pub fn write_tet_coefficients<W: Write + ?Sized>(mesh: &TetMesh, out: &mut W) -> io::Result<()> {
    let order = VertexOrder::new(mesh);
    writeln!(out, "tet,piece,h_lo,h_hi,a,b,c,d")?;
    for t in 0..mesh.tet_count() {
        let s = build_tet_spline(mesh, &order, t);
        let bp = s.breakpoints();
        for (k, p) in s.pieces().iter().enumerate() {
            if bp[k] < bp[k + 1] {
                let [a, b, c, d] = p.coeffs();
                writeln!(out, "{t},{k},{},{},{a},{b},{c},{d}", bp[k], bp[k + 1])?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{write_ele, write_node};
    use crate::synth;

    fn write_tetgen(mesh: &TetMesh, dir: &Path) -> MeshInput {
        let node = dir.join("m.node");
        let ele = dir.join("m.ele");
        write_node(mesh, true, &mut File::create(&node).unwrap()).unwrap();
        write_ele(mesh, &mut File::create(&ele).unwrap()).unwrap();
        MeshInput::Tetgen {
            node,
            ele,
            field: FieldSource::Attribute(0),
        }
    }

    fn config(input: MeshInput, out: &Path, weights: WeightMethod) -> PipelineConfig {
        PipelineConfig {
            input,
            weights,
            top_k: 3,
            isovalues: vec![],
            out_dir: out.to_path_buf(),
            threads: Some(2),
        }
    }

    #[test]
    fn two_peaks_run_writes_every_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let input = write_tetgen(&synth::two_peak_grid(9), dir.path());
        let out = dir.path().join("out");
        let summary = run(&config(input, &out, WeightMethod::Volume)).unwrap();
        assert_eq!(summary.vertices, 729);
        assert!((summary.total_weight - 512.0).abs() < 1e-9);
        for f in [
            "tree.json",
            "weights.csv",
            "branches.json",
            "branches.mtl",
            "branch_0.obj",
        ] {
            assert!(out.join(f).exists(), "{f}");
        }
        assert!(summary.extracted.iter().all(|e| e.triangles > 0));
        let tree: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("tree.json")).unwrap()).unwrap();
        assert_eq!(tree["schema"], 1);
        assert_eq!(
            tree["superarcs"].as_array().unwrap().len(),
            summary.superarcs
        );
        let branches: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("branches.json")).unwrap())
                .unwrap();
        assert_eq!(branches["branches"][0]["parent"], serde_json::Value::Null);
        let csv = std::fs::read_to_string(out.join("weights.csv")).unwrap();
        assert_eq!(csv.lines().count(), summary.superarcs + 1);
    }

    #[test]
    fn grid_input_and_count_weights() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = synth::random_grid(5, 4);
        let raw = dir.path().join("f.f64");
        let bytes: Vec<u8> = mesh.values().iter().flat_map(|v| v.to_le_bytes()).collect();
        std::fs::write(&raw, bytes).unwrap();
        let input = MeshInput::Grid {
            dims: GridDims::new(5, 5, 5),
            raw,
            spacing: [1.0; 3],
        };
        let summary = run(&config(input, &dir.path().join("o"), WeightMethod::Count)).unwrap();
        assert_eq!(summary.total_weight, 125.0);
        let csv = std::fs::read_to_string(dir.path().join("o/weights.csv")).unwrap();
        let first = csv.lines().nth(1).unwrap();
        assert!(first.split(',').nth(3) == Some("0"));
    }

    #[test]
    fn overrides_are_checked() {
        let dir = tempfile::tempdir().unwrap();
        let input = write_tetgen(&synth::two_peak_grid(7), dir.path());
        let mut cfg = config(input, &dir.path().join("o"), WeightMethod::Volume);
        cfg.isovalues = vec![(0, 1e9)];
        assert!(matches!(
            run(&cfg),
            Err(PipelineError::Extraction(
                IsosurfaceError::OutsideArc { .. }
            ))
        ));
        cfg.isovalues = vec![(10_000, 0.5)];
        assert!(matches!(
            run(&cfg),
            Err(PipelineError::Extraction(IsosurfaceError::NoSuchArc(
                10_000
            )))
        ));
        cfg.isovalues = vec![];
        cfg.top_k = 0;
        assert!(matches!(run(&cfg), Err(PipelineError::Config(_))));
    }

    #[test]
    fn override_replaces_default() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = synth::two_peak_grid(9);
        let tree = build_tree(&mesh).unwrap();
        let input = write_tetgen(&mesh, dir.path());
        let mut cfg = config(input, &dir.path().join("o"), WeightMethod::Volume);
        cfg.top_k = 1;
        let base = run(&cfg).unwrap();
        let arc = base.extracted[0].superarc;
        let (lo, hi) = tree.arc_range(arc);
        let h = lo + 0.25 * (hi - lo);
        cfg.isovalues = vec![(arc, h)];
        let over = run(&cfg).unwrap();
        assert_eq!(over.extracted.len(), 1);
        assert_eq!(over.extracted[0].isovalue, h);
    }

    #[test]
    fn missing_input_names_the_stage() {
        let input = MeshInput::Tetgen {
            node: "/nonexistent/a.node".into(),
            ele: "/nonexistent/a.ele".into(),
            field: FieldSource::Attribute(0),
        };
        let err = run(&config(
            input,
            Path::new("/tmp/never"),
            WeightMethod::Volume,
        ))
        .unwrap_err();
        assert!(err.to_string().starts_with("load:"));
    }

    #[test]
    fn coefficient_rows_cover_every_tet() {
        let mesh = crate::mesh::tests::unit_tet([0.0, 1.0, 2.0, 3.0]);
        let mut buf = Vec::new();
        write_tet_coefficients(&mesh, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        let tied = crate::mesh::tests::unit_tet([0.0, 0.0, 2.0, 3.0]);
        let mut buf = Vec::new();
        write_tet_coefficients(&tied, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }

    #[test]
    fn bench_rows() {
        let mesh = synth::random_grid(6, 1);
        let row = bench("r6", &mesh, WeightMethod::Volume, 2).unwrap();
        assert_eq!(row.vertices, 216);
        let mut buf = Vec::new();
        write_bench_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("mesh,vertices,tets,supernodes,construction_s,weights_s,branch_decomposition_s\nr6,216,"));
    }
}
