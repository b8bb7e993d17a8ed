//! Marching tetrahedra, per-superarc contour filtering and OBJ output.

use std::collections::HashMap;
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::contour_tree::{ContourTree, UnionFind, NONE};
use crate::mesh::{cross, dot, norm, sub, Point3, TetMesh};

#[derive(Debug, Error, PartialEq)]
pub enum IsosurfaceError {
    #[error("isovalue {h} is outside superarc {arc}'s interval [{lo}, {hi})")]
    OutsideArc { arc: u32, h: f64, lo: f64, hi: f64 },
    #[error("superarc {0} does not exist")]
    NoSuchArc(u32),
}

#[derive(Debug, Error)]
pub enum ObjError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Unwelded triangles: three fresh vertices per triangle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleSoup {
    pub positions: Vec<Point3>,
    /// Mesh edge `(lower id, higher id)` each soup vertex lies on.
    pub edge_keys: Vec<(u32, u32)>,
    pub triangles: Vec<[u32; 3]>,
    pub source_tet: Vec<u32>,
    /// Superarc of each triangle, or `NONE` when unfiltered.
    pub superarc: Vec<u32>,
}

impl TriangleSoup {
    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.positions[i as usize]);
                0.5 * norm(cross(sub(b, a), sub(c, a)))
            })
            .sum()
    }

    fn push_triangle(&mut self, corners: [(Point3, (u32, u32)); 3], tet: u32, arc: u32) {
        let base = self.positions.len() as u32;
        for (p, key) in corners {
            self.positions.push(p);
            self.edge_keys.push(key);
        }
        self.triangles.push([base, base + 1, base + 2]);
        self.source_tet.push(tet);
        self.superarc.push(arc);
    }

    fn append(&mut self, other: TriangleSoup) {
        let base = self.positions.len() as u32;
        self.positions.extend(other.positions);
        self.edge_keys.extend(other.edge_keys);
        self.triangles
            .extend(other.triangles.into_iter().map(|t| t.map(|i| i + base)));
        self.source_tet.extend(other.source_tet);
        self.superarc.extend(other.superarc);
    }

    /// Triangles of several soups in order, e.g. one per superarc.
    pub fn concat(soups: impl IntoIterator<Item = TriangleSoup>) -> TriangleSoup {
        let mut out = TriangleSoup::default();
        for s in soups {
            out.append(s);
        }
        out
    }
}

/// Contour triangles of one tet at `h`, oriented with normals toward higher
/// values. Vertices at exactly `h` count as below.
fn march_one(mesh: &TetMesh, t: usize, h: f64, arc: u32, out: &mut TriangleSoup) {
    let tet = mesh.tets()[t];
    let below: Vec<u32> = tet
        .iter()
        .copied()
        .filter(|&v| mesh.value(v) <= h)
        .collect();
    let above: Vec<u32> = tet.iter().copied().filter(|&v| mesh.value(v) > h).collect();
    if below.is_empty() || above.is_empty() {
        return;
    }
    let crossing = |u: u32, w: u32| -> (Point3, (u32, u32)) {
        let (fu, fw) = (mesh.value(u), mesh.value(w));
        let s = (h - fu) / (fw - fu);
        let (pu, pw) = (mesh.position(u), mesh.position(w));
        let p = [
            pu[0] + (pw[0] - pu[0]) * s,
            pu[1] + (pw[1] - pu[1]) * s,
            pu[2] + (pw[2] - pu[2]) * s,
        ];
        (p, (u.min(w), u.max(w)))
    };
    let mut tris: Vec<[(Point3, (u32, u32)); 3]> = Vec::with_capacity(2);
    match (below.len(), above.len()) {
        (1, 3) => tris.push([
            crossing(below[0], above[0]),
            crossing(below[0], above[1]),
            crossing(below[0], above[2]),
        ]),
        (3, 1) => tris.push([
            crossing(below[0], above[0]),
            crossing(below[1], above[0]),
            crossing(below[2], above[0]),
        ]),
        _ => {
            let (a, b, c, d) = (below[0], below[1], above[0], above[1]);
            let (ac, ad, bd, bc) = (
                crossing(a, c),
                crossing(a, d),
                crossing(b, d),
                crossing(b, c),
            );
            tris.push([ac, ad, bd]);
            tris.push([ac, bd, bc]);
        }
    }
    let up = mesh.position(above[0]);
    for mut tri in tris {
        let n = cross(sub(tri[1].0, tri[0].0), sub(tri[2].0, tri[0].0));
        if dot(n, sub(up, tri[0].0)) < 0.0 {
            tri.swap(1, 2);
        }
        out.push_triangle(tri, t as u32, arc);
    }
}

fn march_filtered(
    mesh: &TetMesh,
    h: f64,
    keep: impl Fn(usize) -> Option<u32> + Sync,
) -> TriangleSoup {
    let parts: Vec<TriangleSoup> = (0..mesh.tet_count())
        .into_par_iter()
        .fold(TriangleSoup::default, |mut soup, t| {
            if let Some(arc) = keep(t) {
                march_one(mesh, t, h, arc, &mut soup);
            }
            soup
        })
        .collect();
    TriangleSoup::concat(parts)
}

/// Full level set at `h`; empty when `h` is outside the field's range.
/// Triangles are ordered by source tet.
pub fn march_tets(mesh: &TetMesh, h: f64) -> TriangleSoup {
    march_filtered(mesh, h, |_| Some(NONE))
}

/// The single contour of `arc` at `h`: triangles of tets whose lowest and
/// highest vertices are separated, at `h`, by that superarc.
pub fn extract_superarc_contour(
    mesh: &TetMesh,
    tree: &ContourTree,
    arc: u32,
    h: f64,
) -> Result<TriangleSoup, IsosurfaceError> {
    if arc as usize >= tree.superarc_count() {
        return Err(IsosurfaceError::NoSuchArc(arc));
    }
    if !tree.arc_contains(arc, h) {
        let (lo, hi) = tree.arc_range(arc);
        return Err(IsosurfaceError::OutsideArc { arc, h, lo, hi });
    }
    Ok(march_filtered(mesh, h, |t| {
        let tet = mesh.tets()[t];
        let lo = *tet
            .iter()
            .min_by(|a, b| mesh.value(**a).total_cmp(&mesh.value(**b)).then(a.cmp(b)))?;
        let hi = *tet
            .iter()
            .max_by(|a, b| mesh.value(**a).total_cmp(&mesh.value(**b)).then(a.cmp(b)))?;
        if !(mesh.value(lo) <= h && h < mesh.value(hi)) {
            return None;
        }
        (tree.superarc_between(lo, hi, h) == Some(arc)).then_some(arc)
    }))
}

/// Indexed triangle mesh with shared vertices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeldedMesh {
    pub positions: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
}

impl WeldedMesh {
    fn edges(&self) -> HashMap<(u32, u32), u32> {
        let mut count = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        count
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        let used = {
            let mut u = vec![false; self.positions.len()];
            for t in &self.triangles {
                for &i in t {
                    u[i as usize] = true;
                }
            }
            u.iter().filter(|&&b| b).count() as i64
        };
        used - self.edges().len() as i64 + self.triangles.len() as i64
    }

    /// Every edge borders exactly two triangles.
    pub fn is_closed_manifold(&self) -> bool {
        self.edges().values().all(|&c| c == 2)
    }

    /// Connected components of triangles sharing an edge.
    pub fn component_count(&self) -> usize {
        let mut first: HashMap<(u32, u32), u32> = HashMap::new();
        let mut uf = UnionFind::new(self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                match first.entry((a.min(b), a.max(b))) {
                    std::collections::hash_map::Entry::Occupied(o) => {
                        let (x, y) = (uf.find(*o.get()), uf.find(i as u32));
                        if x != y {
                            uf.union_roots(x, y);
                        }
                    }
                    std::collections::hash_map::Entry::Vacant(v) => {
                        v.insert(i as u32);
                    }
                }
            }
        }
        let mut roots: Vec<u32> = (0..self.triangles.len() as u32)
            .map(|i| uf.find(i))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

/// Merges soup vertices lying on the same mesh edge. Crossing points are a
/// function of the edge alone, so this is exact. Triangles that collapse
/// (two corners on one edge, possible only when a vertex sits at `h`) are
/// dropped.
pub fn weld(soup: &TriangleSoup) -> WeldedMesh {
    let mut index: HashMap<(u32, u32), u32> = HashMap::new();
    let mut positions = Vec::new();
    let mut remap = Vec::with_capacity(soup.positions.len());
    for (p, key) in soup.positions.iter().zip(&soup.edge_keys) {
        let id = *index.entry(*key).or_insert_with(|| {
            positions.push(*p);
            positions.len() as u32 - 1
        });
        remap.push(id);
    }
    let triangles = soup
        .triangles
        .iter()
        .map(|t| t.map(|i| remap[i as usize]))
        .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
        .collect();
    WeldedMesh {
        positions,
        triangles,
    }
}

/// Writes `v`/`f` records (1-based) with a `g` group per run of triangles
/// sharing a superarc. `material` names an `mtllib` file and the material
/// to use.
pub fn write_obj<W: Write + ?Sized>(
    soup: &TriangleSoup,
    out: &mut W,
    material: Option<(&str, &str)>,
) -> io::Result<()> {
    if let Some((lib, _)) = material {
        writeln!(out, "mtllib {lib}")?;
    }
    for p in &soup.positions {
        writeln!(out, "v {} {} {}", p[0], p[1], p[2])?;
    }
    let mut current = None;
    for (t, &arc) in soup.triangles.iter().zip(&soup.superarc) {
        if current != Some(arc) {
            if arc == NONE {
                writeln!(out, "g isosurface")?;
            } else {
                writeln!(out, "g superarc_{arc}")?;
            }
            if let Some((_, name)) = material {
                writeln!(out, "usemtl {name}")?;
            }
            current = Some(arc);
        }
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

/// One flat-coloured material per entry, named `branch_<rank>`.
pub fn write_mtl<W: Write + ?Sized>(colors: &[(u32, [f64; 3])], out: &mut W) -> io::Result<()> {
    for (rank, c) in colors {
        writeln!(out, "newmtl branch_{rank}")?;
        writeln!(out, "Kd {} {} {}", c[0], c[1], c[2])?;
    }
    Ok(())
}

/// Categorical colour for a branch rank.
pub fn rank_color(rank: u32) -> [f64; 3] {
    const PALETTE: [[f64; 3]; 8] = [
        [0.894, 0.102, 0.110],
        [0.216, 0.494, 0.722],
        [0.302, 0.686, 0.290],
        [0.596, 0.306, 0.639],
        [1.000, 0.498, 0.000],
        [1.000, 1.000, 0.200],
        [0.651, 0.337, 0.157],
        [0.969, 0.506, 0.749],
    ];
    PALETTE[rank as usize % PALETTE.len()]
}

/// Triangles and vertices of an OBJ file, with the group of each triangle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObjMesh {
    pub positions: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
    pub groups: Vec<String>,
    pub triangle_group: Vec<u32>,
}

/// Reads the subset written by [`write_obj`]: `v`, triangular `f` (plain or
/// `v/vt/vn` indices, negative indices relative), `g`; other records are
/// skipped.
pub fn parse_obj(text: &str) -> Result<ObjMesh, ObjError> {
    let mut mesh = ObjMesh::default();
    let mut group: Option<u32> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| ObjError::Parse { line, msg };
        let content = raw.split('#').next().unwrap_or("");
        let mut fields = content.split_whitespace();
        match fields.next() {
            Some("v") => {
                let mut p = [0.0; 3];
                for c in &mut p {
                    let s = fields
                        .next()
                        .ok_or_else(|| err("vertex needs 3 coordinates".into()))?;
                    *c = s
                        .parse()
                        .map_err(|_| err(format!("bad coordinate {s:?}")))?;
                }
                mesh.positions.push(p);
            }
            Some("f") => {
                let idx: Vec<&str> = fields.collect();
                if idx.len() != 3 {
                    return Err(err(format!(
                        "expected a triangle, got {} corners",
                        idx.len()
                    )));
                }
                let mut t = [0u32; 3];
                for (slot, s) in t.iter_mut().zip(&idx) {
                    let first = s.split('/').next().unwrap_or("");
                    let k: i64 = first.parse().map_err(|_| err(format!("bad index {s:?}")))?;
                    let n = mesh.positions.len() as i64;
                    let resolved = if k > 0 { k - 1 } else { n + k };
                    if k == 0 || resolved < 0 || resolved >= n {
                        return Err(err(format!("index {k} out of range for {n} vertices")));
                    }
                    *slot = resolved as u32;
                }
                let g = match group {
                    Some(g) => g,
                    None => {
                        mesh.groups.push("default".into());
                        let g = mesh.groups.len() as u32 - 1;
                        group = Some(g);
                        g
                    }
                };
                mesh.triangles.push(t);
                mesh.triangle_group.push(g);
            }
            Some("g") => {
                let name = fields.collect::<Vec<_>>().join(" ");
                mesh.groups.push(name);
                group = Some(mesh.groups.len() as u32 - 1);
            }
            _ => {}
        }
    }
    Ok(mesh)
}
