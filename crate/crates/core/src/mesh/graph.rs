use rayon::prelude::*;

use super::TetMesh;

const TET_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Per-vertex sorted neighbour lists in compressed (offset + flat index) form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopologyGraph {
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
}

impl TopologyGraph {
    /// The 1-skeleton of a tet mesh.
    ///
    /// Emits 12 directed half-edges per tet, sorts them by (source, target),
    /// drops duplicates and builds offsets with a prefix count. Sorting keys
    /// are the full records, so parallel and serial runs agree bit for bit.
    pub fn from_mesh(mesh: &TetMesh) -> Self {
        let mut half_edges: Vec<(u32, u32)> = mesh
            .tets()
            .par_iter()
            .flat_map_iter(|tet| {
                TET_EDGES
                    .iter()
                    .flat_map(move |&(i, j)| [(tet[i], tet[j]), (tet[j], tet[i])])
            })
            .collect();
        Self::from_half_edges(mesh.vertex_count(), &mut half_edges)
    }

    /// Builds a symmetric graph from undirected edges. Self-loops are dropped.
    pub fn from_edges(vertex_count: usize, edges: &[(u32, u32)]) -> Self {
        let mut half_edges: Vec<(u32, u32)> = edges
            .iter()
            .filter(|(a, b)| a != b)
            .flat_map(|&(a, b)| [(a, b), (b, a)])
            .collect();
        Self::from_half_edges(vertex_count, &mut half_edges)
    }

    fn from_half_edges(vertex_count: usize, half_edges: &mut Vec<(u32, u32)>) -> Self {
        half_edges.par_sort_unstable();
        half_edges.dedup();
        let mut offsets = vec![0u32; vertex_count + 1];
        for &(s, _) in half_edges.iter() {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..vertex_count {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = half_edges.iter().map(|&(_, t)| t).collect();
        TopologyGraph { offsets, neighbors }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.neighbors(v).len()
    }

    pub fn neighbor_offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub fn neighbor_indices(&self) -> &[u32] {
        &self.neighbors
    }

    /// Number of connected components (isolated vertices count as components).
    pub fn component_count(&self) -> usize {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut components = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            components += 1;
            seen[s] = true;
            stack.push(s as u32);
            while let Some(v) = stack.pop() {
                for &u in self.neighbors(v) {
                    if !seen[u as usize] {
                        seen[u as usize] = true;
                        stack.push(u);
                    }
                }
            }
        }
        components
    }
}
