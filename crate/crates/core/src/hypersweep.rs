//! Per-superarc volume functions from per-vertex coefficient deltas.
//!
//! Each tet's spline changes piece exactly when `h` passes one of its
//! vertices; the change is recorded as a cubic delta on that vertex. For a
//! vertex set `S` that contains a rank-prefix of every tet it touches, the
//! sum of the deltas over `S` evaluated at any `h` inside the prefix's
//! range is the sublevel volume of those tets (and symmetrically for
//! suffixes and superlevel volume). The child side of a superarc's contour
//! is such a set, so accumulating deltas from the leaves toward the root
//! yields every region volume as a cubic in `h`.

use rayon::prelude::*;
use thiserror::Error;

use crate::contour_tree::ContourTree;
use crate::geometry::{build_tet_spline, TetSpline};
use crate::mesh::{TetMesh, VertexOrder};
use crate::poly::{CubicPoly, PiecewiseCubic};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HypersweepError {
    #[error("tree covers {tree} vertices but {deltas} deltas were supplied")]
    VertexCountMismatch { tree: usize, deltas: usize },
}

pub fn build_tet_splines(mesh: &TetMesh, order: &VertexOrder) -> Vec<TetSpline> {
    (0..mesh.tet_count())
        .into_par_iter()
        .map(|t| build_tet_spline(mesh, order, t))
        .collect()
}

/// Per-vertex sum of the deltas of every incident tet, accumulated in
/// ascending tet order.
pub fn compute_deltas(vertex_count: usize, splines: &[TetSpline]) -> Vec<CubicPoly> {
    let mut offsets = vec![0u32; vertex_count + 1];
    for s in splines {
        for v in s.vertices() {
            offsets[v as usize + 1] += 1;
        }
    }
    for i in 0..vertex_count {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    // (tet, position of the vertex within the tet's rank order)
    let mut incident = vec![(0u32, 0u8); offsets[vertex_count] as usize];
    for (t, s) in splines.iter().enumerate() {
        for (k, v) in s.vertices().into_iter().enumerate() {
            incident[fill[v as usize] as usize] = (t as u32, k as u8);
            fill[v as usize] += 1;
        }
    }
    (0..vertex_count)
        .into_par_iter()
        .map(|v| {
            incident[offsets[v] as usize..offsets[v + 1] as usize]
                .iter()
                .map(|&(t, k)| splines[t as usize].deltas()[k as usize])
                .sum()
        })
        .collect()
}

/// Volume of the region cut off by one superarc's contour, on the side
/// away from the root, as a function of the isovalue on that superarc.
#[derive(Clone, Debug)]
pub struct SuperarcVolume {
    pub arc: u32,
    pub h_lo: f64,
    pub h_hi: f64,
    /// Whether the region lies below the contour (child end is the lower end).
    pub child_lower: bool,
    /// One piece per span between consecutive regular vertices.
    pub function: PiecewiseCubic,
    /// Sum over the child node and everything below it.
    pub base: CubicPoly,
    /// `base` plus every regular vertex of the arc: the piece in force next
    /// to the parent end.
    pub full: CubicPoly,
    pub weight_at_bottom: f64,
    pub weight_at_top: f64,
}

impl SuperarcVolume {
    pub fn eval(&self, h: f64) -> f64 {
        self.function.eval(h)
    }
}

/// Volume functions for every superarc, leaves first.
pub fn sweep_volumes(
    tree: &ContourTree,
    deltas: &[CubicPoly],
) -> Result<Vec<SuperarcVolume>, HypersweepError> {
    if deltas.len() != tree.vertex_count() {
        return Err(HypersweepError::VertexCountMismatch {
            tree: tree.vertex_count(),
            deltas: deltas.len(),
        });
    }
    let m = tree.superarc_count();
    let mut full: Vec<CubicPoly> = vec![CubicPoly::ZERO; m];
    let mut out: Vec<Option<SuperarcVolume>> = vec![None; m];
    for e in tree.bottom_up_arcs() {
        let c = tree.child_node(e);
        let mut base = deltas[tree.supernode_vertex(c) as usize];
        for child in tree.child_arcs(c) {
            base += full[child as usize];
        }
        let regular = tree.regular_vertices(e);
        let (h_lo, h_hi) = tree.arc_range(e);
        let child_lower = tree.child_is_lower(e);
        let mut breakpoints = Vec::with_capacity(regular.len() + 2);
        breakpoints.push(h_lo);
        breakpoints.extend(regular.iter().map(|&r| tree.vertex_value(r)));
        breakpoints.push(h_hi);
        let mut pieces = Vec::with_capacity(regular.len() + 1);
        let mut acc = base;
        pieces.push(acc);
        if child_lower {
            for &r in regular {
                acc += deltas[r as usize];
                pieces.push(acc);
            }
        } else {
            for &r in regular.iter().rev() {
                acc += deltas[r as usize];
                pieces.push(acc);
            }
            pieces.reverse();
        }
        full[e as usize] = acc;
        let function = PiecewiseCubic::new(breakpoints, pieces);
        let weight_at_bottom = function.first().eval(h_lo);
        let weight_at_top = function.last().eval(h_hi);
        out[e as usize] = Some(SuperarcVolume {
            arc: e,
            h_lo,
            h_hi,
            child_lower,
            function,
            base,
            full: acc,
            weight_at_bottom,
            weight_at_top,
        });
    }
    Ok(out
        .into_iter()
        .map(|v| v.expect("every arc visited"))
        .collect())
}

/// Sum of all vertex deltas: the whole mesh's sublevel volume just above
/// the global maximum, a constant equal to the total volume.
pub fn root_function(
    tree: &ContourTree,
    volumes: &[SuperarcVolume],
    deltas: &[CubicPoly],
) -> CubicPoly {
    let root = tree.root();
    let mut acc = deltas[tree.supernode_vertex(root) as usize];
    for e in tree.child_arcs(root) {
        acc += volumes[e as usize].full;
    }
    acc
}

/// Weight of the part of the tree beyond an arc, seen from each end: from
/// the lower end this is what lies past the upper end and vice versa.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcWeights {
    pub from_lo: f64,
    pub from_hi: f64,
}

impl ArcWeights {
    /// Weight seen from `node`, one of the arc's ends.
    pub fn seen_from(&self, tree: &ContourTree, arc: u32, node: u32) -> f64 {
        if tree.superarc(arc).lo == node {
            self.from_lo
        } else {
            self.from_hi
        }
    }
}

/// Exact volume weights: the child side evaluated at the parent's value,
/// and the complement of the child side evaluated at the child's value.
pub fn volume_weights(
    tree: &ContourTree,
    volumes: &[SuperarcVolume],
    total: f64,
) -> Vec<ArcWeights> {
    volumes
        .iter()
        .map(|v| {
            let e = v.arc;
            let parent_value = tree.supernode_value(tree.parent_node(e));
            let child_value = tree.supernode_value(tree.child_node(e));
            let prune = v.full.eval(parent_value);
            let reverse = total - v.base.eval(child_value);
            if v.child_lower {
                ArcWeights {
                    from_lo: reverse,
                    from_hi: prune,
                }
            } else {
                ArcWeights {
                    from_lo: prune,
                    from_hi: reverse,
                }
            }
        })
        .collect()
}

/// Vertex counts per superarc under the canonical assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeCountWeight {
    /// Vertices assigned to each arc.
    pub per_arc: Vec<u64>,
    /// Vertices on the child side of each arc (excluding the root vertex).
    pub subtree: Vec<u64>,
    /// `subtree` minus the arc's own regular vertices.
    pub base: Vec<u64>,
}

pub fn count_regular_nodes(tree: &ContourTree) -> NodeCountWeight {
    let m = tree.superarc_count();
    let root_arc = tree.incident_arcs(tree.root())[0];
    let per_arc: Vec<u64> = (0..m as u32)
        .map(|e| tree.regular_vertices(e).len() as u64 + 1 + u64::from(e == root_arc))
        .collect();
    let mut subtree = vec![0u64; m];
    let mut base = vec![0u64; m];
    for e in tree.bottom_up_arcs() {
        let c = tree.child_node(e);
        base[e as usize] = 1 + tree.child_arcs(c).map(|x| subtree[x as usize]).sum::<u64>();
        subtree[e as usize] = base[e as usize] + tree.regular_vertices(e).len() as u64;
    }
    NodeCountWeight {
        per_arc,
        subtree,
        base,
    }
}

pub fn count_weights(tree: &ContourTree, counts: &NodeCountWeight) -> Vec<ArcWeights> {
    let n = tree.vertex_count() as u64;
    (0..tree.superarc_count() as u32)
        .map(|e| {
            let prune = counts.subtree[e as usize] as f64;
            let reverse = (n - counts.base[e as usize]) as f64;
            if tree.child_is_lower(e) {
                ArcWeights {
                    from_lo: reverse,
                    from_hi: prune,
                }
            } else {
                ArcWeights {
                    from_lo: prune,
                    from_hi: reverse,
                }
            }
        })
        .collect()
}
