use crate::mesh::{TopologyGraph, VertexOrder};

use super::NONE;

/// Disjoint sets with path halving and union by size.
pub(crate) struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    /// Unions two roots and returns the surviving root.
    pub(crate) fn union_roots(&mut self, a: u32, b: u32) -> u32 {
        let (big, small) = if self.size[a as usize] >= self.size[b as usize] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        big
    }
}

/// Augmented join or split tree: one parent pointer per vertex toward the
/// root, which is the last vertex of the sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeTree {
    parent: Vec<u32>,
    root: u32,
}

impl MergeTree {
    pub fn parent(&self, v: u32) -> Option<u32> {
        match self.parent[v as usize] {
            NONE => None,
            p => Some(p),
        }
    }

    pub fn parents(&self) -> &[u32] {
        &self.parent
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    /// Number of vertices without a parent; 1 for a connected graph.
    pub fn root_count(&self) -> usize {
        self.parent.iter().filter(|&&p| p == NONE).count()
    }

    pub fn child_counts(&self) -> Vec<u32> {
        let mut c = vec![0u32; self.parent.len()];
        for &p in &self.parent {
            if p != NONE {
                c[p as usize] += 1;
            }
        }
        c
    }

    /// Vertices with no children: the maxima for a join tree, minima for a split tree.
    pub fn leaves(&self) -> Vec<u32> {
        let c = self.child_counts();
        (0..c.len() as u32)
            .filter(|&v| c[v as usize] == 0)
            .collect()
    }
}

/// Sweeps vertices in `sequence`, joining each to the components of the
/// neighbours already swept. The component's most recently swept vertex
/// becomes a child of the current vertex.
fn sweep<'a>(
    graph: &TopologyGraph,
    sequence: impl Iterator<Item = &'a u32>,
    swept_before: impl Fn(u32, u32) -> bool,
) -> MergeTree {
    let n = graph.vertex_count();
    let mut uf = UnionFind::new(n);
    let mut last = vec![NONE; n];
    let mut parent = vec![NONE; n];
    let mut root = NONE;
    for &v in sequence {
        last[v as usize] = v;
        for &u in graph.neighbors(v) {
            if !swept_before(u, v) {
                continue;
            }
            let ru = uf.find(u);
            let rv = uf.find(v);
            if ru != rv {
                parent[last[ru as usize] as usize] = v;
                let r = uf.union_roots(ru, rv);
                last[r as usize] = v;
            }
        }
        root = v;
    }
    MergeTree { parent, root }
}

/// Join tree: sweep from the highest vertex down, merging superlevel components.
/// Rooted at the global minimum.
pub fn build_join_tree(graph: &TopologyGraph, order: &VertexOrder) -> MergeTree {
    let rank = order.rank();
    sweep(graph, order.sort_index().iter().rev(), |u, v| {
        rank[u as usize] > rank[v as usize]
    })
}

/// Split tree: sweep from the lowest vertex up, merging sublevel components.
/// Rooted at the global maximum.
pub fn build_split_tree(graph: &TopologyGraph, order: &VertexOrder) -> MergeTree {
    let rank = order.rank();
    sweep(graph, order.sort_index().iter(), |u, v| {
        rank[u as usize] < rank[v as usize]
    })
}
