//! Tetrahedral meshes, their topology graph and the global vertex order.

mod graph;
mod grid;
mod tetgen;

use std::path::PathBuf;

use thiserror::Error;

pub use graph::TopologyGraph;
pub use grid::{grid_to_tets, parse_raw_grid, GridDims};
pub use tetgen::{
    load_tetgen, parse_ele, parse_field_values, parse_node, tetgen_mesh, EleFile, FieldSource,
    FieldValues, NodeFile,
};
pub use tetgen::{write_ele, write_field_values, write_node};

pub type Point3 = [f64; 3];

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("tet {tet} references vertex {index}, but the mesh has {count} vertices")]
    IndexOutOfRange {
        tet: usize,
        index: i64,
        count: usize,
    },
    #[error("tet {tet} uses vertex {vertex} more than once")]
    RepeatedVertex { tet: usize, vertex: u32 },
    #[error("vertex {vertex} has non-finite scalar value {value}")]
    NonFiniteValue { vertex: usize, value: f64 },
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFinitePosition { vertex: usize },
    #[error("{} degenerate (zero-volume) tets: {}", .tets.len(), preview(.tets))]
    DegenerateTets { tets: Vec<usize> },
    #[error("field has {got} values but the mesh has {expected} vertices")]
    FieldCount { got: usize, expected: usize },
    #[error("field attribute {requested} requested but the .node file declares {available}")]
    MissingAttribute { requested: usize, available: usize },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("mesh has no tetrahedra")]
    Empty,
    #[error("mesh has {0} vertices; indices must fit in 32 bits")]
    TooLarge(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn preview(tets: &[usize]) -> String {
    let shown: Vec<String> = tets.iter().take(16).map(|t| t.to_string()).collect();
    if tets.len() > 16 {
        format!("{}, ...", shown.join(", "))
    } else {
        shown.join(", ")
    }
}

/// A tetrahedral mesh with one scalar per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct TetMesh {
    positions: Vec<Point3>,
    values: Vec<f64>,
    tets: Vec<[u32; 4]>,
}

/// Relative threshold below which `6 * volume / longest_edge^3` counts as flat.
const DEGENERACY_TOLERANCE: f64 = 1e-12;

impl TetMesh {
    /// Validates and builds a mesh. Tets keep the vertex order they are given in.
    pub fn new(
        positions: Vec<Point3>,
        values: Vec<f64>,
        tets: Vec<[u32; 4]>,
    ) -> Result<Self, MeshError> {
        let n = positions.len();
        if n > u32::MAX as usize - 1 {
            return Err(MeshError::TooLarge(n));
        }
        if values.len() != n {
            return Err(MeshError::FieldCount {
                got: values.len(),
                expected: n,
            });
        }
        if tets.is_empty() {
            return Err(MeshError::Empty);
        }
        if let Some(vertex) = positions
            .iter()
            .position(|p| p.iter().any(|c| !c.is_finite()))
        {
            return Err(MeshError::NonFinitePosition { vertex });
        }
        if let Some(vertex) = values.iter().position(|v| !v.is_finite()) {
            return Err(MeshError::NonFiniteValue {
                vertex,
                value: values[vertex],
            });
        }
        for (t, tet) in tets.iter().enumerate() {
            for (i, &v) in tet.iter().enumerate() {
                if v as usize >= n {
                    return Err(MeshError::IndexOutOfRange {
                        tet: t,
                        index: v as i64,
                        count: n,
                    });
                }
                if tet[..i].contains(&v) {
                    return Err(MeshError::RepeatedVertex { tet: t, vertex: v });
                }
            }
        }
        let mesh = TetMesh {
            positions,
            values,
            tets,
        };
        let degenerate: Vec<usize> = (0..mesh.tets.len())
            .filter(|&t| mesh.is_degenerate(t))
            .collect();
        if !degenerate.is_empty() {
            return Err(MeshError::DegenerateTets { tets: degenerate });
        }
        Ok(mesh)
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tets(&self) -> &[[u32; 4]] {
        &self.tets
    }

    pub fn position(&self, v: u32) -> Point3 {
        self.positions[v as usize]
    }

    pub fn value(&self, v: u32) -> f64 {
        self.values[v as usize]
    }

    /// Same geometry and connectivity with a different scalar field.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, MeshError> {
        if values.len() != self.vertex_count() {
            return Err(MeshError::FieldCount {
                got: values.len(),
                expected: self.vertex_count(),
            });
        }
        if let Some(vertex) = values.iter().position(|v| !v.is_finite()) {
            return Err(MeshError::NonFiniteValue {
                vertex,
                value: values[vertex],
            });
        }
        Ok(TetMesh {
            positions: self.positions.clone(),
            values,
            tets: self.tets.clone(),
        })
    }

    /// Scalar triple product `(b - a) . ((c - a) x (d - a))`, i.e. six times
    /// the signed volume.
    pub fn signed_volume6(&self, t: usize) -> f64 {
        let [a, b, c, d] = self.tets[t].map(|v| self.positions[v as usize]);
        let u = sub(b, a);
        let v = sub(c, a);
        let w = sub(d, a);
        dot(u, cross(v, w))
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        self.signed_volume6(t).abs() / 6.0
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.tet_count())
            .map(|t| self.tet_volume(t))
            .collect::<crate::numeric::CompensatedSum>()
            .value()
    }

    fn is_degenerate(&self, t: usize) -> bool {
        let p = self.tets[t].map(|v| self.positions[v as usize]);
        let mut longest: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                longest = longest.max(norm(sub(p[i], p[j])));
            }
        }
        let v6 = self.signed_volume6(t).abs();
        v6.is_nan() || v6 <= DEGENERACY_TOLERANCE * longest.powi(3)
    }

    /// Flips tets with negative signed volume so that every tet is positively oriented.
    pub fn orient_positive(&mut self) {
        for t in 0..self.tets.len() {
            if self.signed_volume6(t) < 0.0 {
                self.tets[t].swap(2, 3);
            }
        }
    }

    /// Replaces vertex coordinates, revalidating the geometry.
    pub fn with_positions(&self, positions: Vec<Point3>) -> Result<Self, MeshError> {
        TetMesh::new(positions, self.values.clone(), self.tets.clone())
    }
}

/// Total order on vertices: ascending value, ties broken by ascending index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexOrder {
    sort_index: Vec<u32>,
    rank: Vec<u32>,
}

impl VertexOrder {
    pub fn new(mesh: &TetMesh) -> Self {
        Self::from_values(mesh.values())
    }

    pub fn from_values(values: &[f64]) -> Self {
        let mut sort_index: Vec<u32> = (0..values.len() as u32).collect();
        sort_index.sort_unstable_by(|&a, &b| {
            values[a as usize]
                .total_cmp(&values[b as usize])
                .then(a.cmp(&b))
        });
        let mut rank = vec![0u32; values.len()];
        for (i, &v) in sort_index.iter().enumerate() {
            rank[v as usize] = i as u32;
        }
        VertexOrder { sort_index, rank }
    }

    pub fn len(&self) -> usize {
        self.sort_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sort_index.is_empty()
    }

    /// Vertices in ascending order.
    pub fn sort_index(&self) -> &[u32] {
        &self.sort_index
    }

    pub fn rank(&self) -> &[u32] {
        &self.rank
    }

    #[inline]
    pub fn rank_of(&self, v: u32) -> u32 {
        self.rank[v as usize]
    }

    #[inline]
    pub fn is_below(&self, u: u32, v: u32) -> bool {
        self.rank[u as usize] < self.rank[v as usize]
    }

    /// The reversed order, i.e. the order of the negated field with the
    /// same tie-breaks reversed.
    pub fn reversed(&self) -> Self {
        let n = self.len() as u32;
        let sort_index: Vec<u32> = self.sort_index.iter().rev().copied().collect();
        let rank = self.rank.iter().map(|&r| n - 1 - r).collect();
        VertexOrder { sort_index, rank }
    }
}

#[inline]
pub(crate) fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}
