//! Augmented contour trees built from join and split trees.
//!
//! The tree is stored at two levels: supernodes (critical vertices) joined
//! by superarcs, and the regular vertices lying along each superarc in
//! ascending order. It is also rooted at the global maximum; every
//! supernode except the root has a parent arc, and every superarc has a
//! child end (away from the root) and a parent end.
//!
//! Vertex-to-superarc assignment: a regular vertex belongs to the superarc
//! it lies on; a supernode belongs to its parent arc; the root belongs to
//! its single (downward) arc. This partitions the vertices, and the set of
//! vertices assigned to the subtree below an arc is exactly the vertex set
//! of the region cut off by that arc.

mod merge_tree;

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

pub(crate) use merge_tree::UnionFind;
pub use merge_tree::{build_join_tree, build_split_tree, MergeTree};

use crate::mesh::{TopologyGraph, VertexOrder};

/// Sentinel for "no vertex / node / arc".
pub const NONE: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContourTreeError {
    #[error("topology graph has {0} connected components; a contour tree needs exactly one")]
    Disconnected(usize),
    #[error("need at least two vertices, got {0}")]
    TooSmall(usize),
    #[error("join and split trees disagree: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LookupError {
    #[error("no superarc at this isovalue is reachable monotonically from the seed")]
    NotFound,
    #[error("several superarcs at this isovalue are reachable from the seed: {0:?}")]
    Ambiguous(Vec<u32>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Superarc {
    /// Lower supernode id.
    pub lo: u32,
    /// Upper supernode id.
    pub hi: u32,
}

#[derive(Clone, Debug)]
pub struct ContourTree {
    node_vertex: Vec<u32>,
    node_value: Vec<f64>,
    node_of_vertex: Vec<u32>,
    vertex_value: Vec<f64>,
    arcs: Vec<Superarc>,
    regular_offsets: Vec<u32>,
    regular: Vec<u32>,
    arc_of: Vec<u32>,
    node_arc_offsets: Vec<u32>,
    node_arcs: Vec<u32>,
    root: u32,
    parent_arc: Vec<u32>,
    depth: Vec<u32>,
    /// Nodes in breadth-first order from the root.
    bfs: Vec<u32>,
}

impl ContourTree {
    /// Join tree, split tree, merge.
    pub fn build(
        graph: &TopologyGraph,
        order: &VertexOrder,
        values: &[f64],
    ) -> Result<Self, ContourTreeError> {
        let n = graph.vertex_count();
        if n < 2 {
            return Err(ContourTreeError::TooSmall(n));
        }
        let join = build_join_tree(graph, order);
        if join.root_count() != 1 {
            return Err(ContourTreeError::Disconnected(graph.component_count()));
        }
        let split = build_split_tree(graph, order);
        merge_trees(&join, &split, order, values)
    }

    pub fn vertex_count(&self) -> usize {
        self.arc_of.len()
    }

    pub fn supernode_count(&self) -> usize {
        self.node_vertex.len()
    }

    pub fn superarc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn supernode_vertex(&self, node: u32) -> u32 {
        self.node_vertex[node as usize]
    }

    pub fn supernode_value(&self, node: u32) -> f64 {
        self.node_value[node as usize]
    }

    /// Supernode id of a vertex, if it is critical.
    pub fn supernode_of(&self, v: u32) -> Option<u32> {
        match self.node_of_vertex[v as usize] {
            NONE => None,
            s => Some(s),
        }
    }

    pub fn vertex_value(&self, v: u32) -> f64 {
        self.vertex_value[v as usize]
    }

    pub fn superarcs(&self) -> &[Superarc] {
        &self.arcs
    }

    pub fn superarc(&self, arc: u32) -> Superarc {
        self.arcs[arc as usize]
    }

    /// `(value of lower end, value of upper end)`.
    pub fn arc_range(&self, arc: u32) -> (f64, f64) {
        let a = self.arcs[arc as usize];
        (
            self.node_value[a.lo as usize],
            self.node_value[a.hi as usize],
        )
    }

    /// Whether the arc's interval contains `h` with right-continuous
    /// (`h` treated as just above any vertex at value `h`) semantics.
    pub fn arc_contains(&self, arc: u32, h: f64) -> bool {
        let (lo, hi) = self.arc_range(arc);
        lo <= h && h < hi
    }

    /// Regular vertices strictly inside the arc, ascending.
    pub fn regular_vertices(&self, arc: u32) -> &[u32] {
        let a = arc as usize;
        &self.regular[self.regular_offsets[a] as usize..self.regular_offsets[a + 1] as usize]
    }

    /// Canonical superarc of every vertex.
    pub fn arc_of(&self, v: u32) -> u32 {
        self.arc_of[v as usize]
    }

    pub fn arc_assignment(&self) -> &[u32] {
        &self.arc_of
    }

    /// All arcs incident to a supernode.
    pub fn incident_arcs(&self, node: u32) -> &[u32] {
        let n = node as usize;
        &self.node_arcs[self.node_arc_offsets[n] as usize..self.node_arc_offsets[n + 1] as usize]
    }

    pub fn up_arcs(&self, node: u32) -> impl Iterator<Item = u32> + '_ {
        self.incident_arcs(node)
            .iter()
            .copied()
            .filter(move |&e| self.arcs[e as usize].lo == node)
    }

    pub fn down_arcs(&self, node: u32) -> impl Iterator<Item = u32> + '_ {
        self.incident_arcs(node)
            .iter()
            .copied()
            .filter(move |&e| self.arcs[e as usize].hi == node)
    }

    pub fn degree(&self, node: u32) -> usize {
        self.incident_arcs(node).len()
    }

    pub fn is_leaf(&self, node: u32) -> bool {
        self.degree(node) == 1
    }

    pub fn leaves(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.supernode_count() as u32).filter(move |&s| self.is_leaf(s))
    }

    /// Supernode of the global maximum.
    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn parent_arc(&self, node: u32) -> Option<u32> {
        match self.parent_arc[node as usize] {
            NONE => None,
            e => Some(e),
        }
    }

    pub fn depth(&self, node: u32) -> u32 {
        self.depth[node as usize]
    }

    /// Supernode at the end of `arc` away from the root.
    pub fn child_node(&self, arc: u32) -> u32 {
        let a = self.arcs[arc as usize];
        if self.parent_arc[a.lo as usize] == arc {
            a.lo
        } else {
            a.hi
        }
    }

    /// Supernode at the end of `arc` toward the root.
    pub fn parent_node(&self, arc: u32) -> u32 {
        self.other_end(arc, self.child_node(arc))
    }

    pub fn child_is_lower(&self, arc: u32) -> bool {
        self.child_node(arc) == self.arcs[arc as usize].lo
    }

    pub fn other_end(&self, arc: u32, node: u32) -> u32 {
        let a = self.arcs[arc as usize];
        if a.lo == node {
            a.hi
        } else {
            a.lo
        }
    }

    /// Arcs hanging below `node` in the rooted tree.
    pub fn child_arcs(&self, node: u32) -> impl Iterator<Item = u32> + '_ {
        let parent = self.parent_arc[node as usize];
        self.incident_arcs(node)
            .iter()
            .copied()
            .filter(move |&e| e != parent)
    }

    /// Supernodes ordered root first, each before its children.
    pub fn top_down_nodes(&self) -> &[u32] {
        &self.bfs
    }

    /// Arcs ordered so that every arc comes after all arcs below it.
    pub fn bottom_up_arcs(&self) -> Vec<u32> {
        self.bfs
            .iter()
            .rev()
            .filter_map(|&n| self.parent_arc(n))
            .collect()
    }

    /// Supernodes in the subtree hanging below `arc`, child node first.
    pub fn subtree_nodes(&self, arc: u32) -> Vec<u32> {
        let mut out = vec![self.child_node(arc)];
        let mut i = 0;
        while i < out.len() {
            let s = out[i];
            i += 1;
            out.extend(self.child_arcs(s).map(|e| self.other_end(e, s)));
        }
        out
    }

    /// Vertices on the child side of the contour of `arc` at `h`: those
    /// assigned below the arc, the child node, and the arc's regular
    /// vertices between the child node and `h`.
    pub fn child_side_mask(&self, arc: u32, h: f64) -> Vec<bool> {
        let mut in_subtree = vec![false; self.arcs.len()];
        let nodes = self.subtree_nodes(arc);
        for &s in &nodes[1..] {
            in_subtree[self.parent_arc[s as usize] as usize] = true;
        }
        let mut mask: Vec<bool> = self
            .arc_of
            .iter()
            .map(|&e| in_subtree[e as usize])
            .collect();
        mask[self.node_vertex[nodes[0] as usize] as usize] = true;
        let lower = self.child_is_lower(arc);
        for &r in self.regular_vertices(arc) {
            if (self.vertex_value[r as usize] <= h) == lower {
                mask[r as usize] = true;
            }
        }
        mask
    }

    /// Number of arcs whose open value interval contains `t`.
    pub fn arcs_straddling(&self, t: f64) -> usize {
        (0..self.arcs.len() as u32)
            .filter(|&e| {
                let (lo, hi) = self.arc_range(e);
                lo < t && t < hi
            })
            .count()
    }

    /// Superarc containing the contour at isovalue `h` reachable from
    /// `seed` along a monotone path (upward if `h >= f(seed)`, else
    /// downward). At a supernode value the arc just above is chosen.
    pub fn superarc_at_value(&self, seed: u32, h: f64) -> Result<u32, LookupError> {
        let seed_value = self.vertex_value[seed as usize];
        let ascending = h >= seed_value;
        let mut stack = Vec::new();
        match self.supernode_of(seed) {
            Some(node) => stack.push(node),
            None => {
                let e = self.arc_of[seed as usize];
                let (lo, hi) = self.arc_range(e);
                if (ascending && h < hi) || (!ascending && lo <= h) {
                    return Ok(e);
                }
                let a = self.arcs[e as usize];
                stack.push(if ascending { a.hi } else { a.lo });
            }
        }
        let mut found = BTreeSet::new();
        while let Some(node) = stack.pop() {
            for &e in self.incident_arcs(node) {
                let a = self.arcs[e as usize];
                let next = if ascending && a.lo == node {
                    a.hi
                } else if !ascending && a.hi == node {
                    a.lo
                } else {
                    continue;
                };
                if self.arc_contains(e, h) {
                    found.insert(e);
                } else {
                    stack.push(next);
                }
            }
        }
        match found.len() {
            0 => Err(LookupError::NotFound),
            1 => Ok(*found.iter().next().unwrap()),
            _ => Err(LookupError::Ambiguous(found.into_iter().collect())),
        }
    }

    /// Superarc carrying the contour at `h` that separates vertex `lower`
    /// from vertex `upper`, for mesh neighbours with
    /// `f(lower) <= h < f(upper)`. The tree path between adjacent vertices
    /// is monotone, so the answer is unique.
    pub fn superarc_between(&self, lower: u32, upper: u32, h: f64) -> Option<u32> {
        let start = match self.supernode_of(lower) {
            Some(s) => s,
            None => {
                let e = self.arc_of[lower as usize];
                if h < self.arc_range(e).1 {
                    return Some(e);
                }
                self.arcs[e as usize].hi
            }
        };
        let end = match self.supernode_of(upper) {
            Some(s) => s,
            None => {
                let e = self.arc_of[upper as usize];
                if self.arc_range(e).0 <= h {
                    return Some(e);
                }
                self.arcs[e as usize].lo
            }
        };
        let (mut a, mut b) = (start, end);
        while a != b {
            let step_a = self.depth[a as usize] >= self.depth[b as usize];
            let node = if step_a { a } else { b };
            let e = self.parent_arc[node as usize];
            if e == NONE {
                return None;
            }
            if self.arc_contains(e, h) {
                return Some(e);
            }
            let next = self.other_end(e, node);
            if step_a {
                a = next;
            } else {
                b = next;
            }
        }
        None
    }
}

/// Merges join and split trees by repeatedly peeling leaves, producing the
/// fully augmented tree, then collapses regular chains into superarcs.
pub fn merge_trees(
    join: &MergeTree,
    split: &MergeTree,
    order: &VertexOrder,
    values: &[f64],
) -> Result<ContourTree, ContourTreeError> {
    let n = join.vertex_count();
    if split.vertex_count() != n || order.len() != n || values.len() != n {
        return Err(ContourTreeError::Inconsistent(
            "trees cover different vertex sets".into(),
        ));
    }
    if n < 2 {
        return Err(ContourTreeError::TooSmall(n));
    }
    if join.root_count() != 1 || split.root_count() != 1 {
        return Err(ContourTreeError::Disconnected(
            join.root_count().max(split.root_count()),
        ));
    }

    // Parent pointers plus child count and XOR of child ids: when a vertex
    // has exactly one child the XOR is that child.
    let mut jt_parent = join.parents().to_vec();
    let mut st_parent = split.parents().to_vec();
    let mut jt_children = vec![0u32; n];
    let mut st_children = vec![0u32; n];
    let mut jt_xor = vec![0u32; n];
    let mut st_xor = vec![0u32; n];
    for v in 0..n as u32 {
        let p = jt_parent[v as usize];
        if p != NONE {
            jt_children[p as usize] += 1;
            jt_xor[p as usize] ^= v;
        }
        let p = st_parent[v as usize];
        if p != NONE {
            st_children[p as usize] += 1;
            st_xor[p as usize] ^= v;
        }
    }

    let mut queue: VecDeque<u32> = order
        .sort_index()
        .iter()
        .copied()
        .filter(|&v| jt_children[v as usize] + st_children[v as usize] == 1)
        .collect();
    // Augmented edges as (lower, upper).
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(n - 1);
    let mut remaining = n;
    while remaining > 1 {
        let v = queue.pop_front().ok_or_else(|| {
            ContourTreeError::Inconsistent("ran out of leaves before the tree was complete".into())
        })?;
        let vi = v as usize;
        if jt_children[vi] == 0 && st_children[vi] == 1 {
            // Upper leaf: the contour tree edge goes down to its join-tree parent.
            let w = jt_parent[vi];
            if w == NONE {
                return Err(ContourTreeError::Inconsistent(format!(
                    "upper leaf {v} has no join parent"
                )));
            }
            edges.push((w, v));
            jt_children[w as usize] -= 1;
            jt_xor[w as usize] ^= v;
            let c = st_xor[vi];
            let p = st_parent[vi];
            st_parent[c as usize] = p;
            if p != NONE {
                st_xor[p as usize] ^= v ^ c;
            }
            if jt_children[w as usize] + st_children[w as usize] == 1 {
                queue.push_back(w);
            }
        } else if st_children[vi] == 0 && jt_children[vi] == 1 {
            let w = st_parent[vi];
            if w == NONE {
                return Err(ContourTreeError::Inconsistent(format!(
                    "lower leaf {v} has no split parent"
                )));
            }
            edges.push((v, w));
            st_children[w as usize] -= 1;
            st_xor[w as usize] ^= v;
            let c = jt_xor[vi];
            let p = jt_parent[vi];
            jt_parent[c as usize] = p;
            if p != NONE {
                jt_xor[p as usize] ^= v ^ c;
            }
            if jt_children[w as usize] + st_children[w as usize] == 1 {
                queue.push_back(w);
            }
        } else {
            return Err(ContourTreeError::Inconsistent(format!(
                "vertex {v} queued but is not a leaf"
            )));
        }
        remaining -= 1;
    }
    if edges.len() != n - 1 {
        return Err(ContourTreeError::Inconsistent(format!(
            "{} augmented edges for {n} vertices",
            edges.len()
        )));
    }
    reduce(edges, order, values)
}

/// Collapses the augmented tree (an edge per pair of adjacent vertices)
/// into supernodes and superarcs.
fn reduce(
    edges: Vec<(u32, u32)>,
    order: &VertexOrder,
    values: &[f64],
) -> Result<ContourTree, ContourTreeError> {
    let n = values.len();
    let mut up_count = vec![0u32; n];
    let mut down_count = vec![0u32; n];
    for &(lo, hi) in &edges {
        up_count[lo as usize] += 1;
        down_count[hi as usize] += 1;
    }
    // Upward neighbours in CSR form, sorted by rank for deterministic arc ids.
    let mut up_offsets = vec![0u32; n + 1];
    for v in 0..n {
        up_offsets[v + 1] = up_offsets[v] + up_count[v];
    }
    let mut fill = up_offsets.clone();
    let mut up = vec![0u32; edges.len()];
    for &(lo, hi) in &edges {
        up[fill[lo as usize] as usize] = hi;
        fill[lo as usize] += 1;
    }
    for v in 0..n {
        up[up_offsets[v] as usize..up_offsets[v + 1] as usize]
            .sort_unstable_by_key(|&u| order.rank_of(u));
    }

    let mut node_of_vertex = vec![NONE; n];
    let mut node_vertex = Vec::new();
    for &v in order.sort_index() {
        if !(up_count[v as usize] == 1 && down_count[v as usize] == 1) {
            node_of_vertex[v as usize] = node_vertex.len() as u32;
            node_vertex.push(v);
        }
    }
    let node_value: Vec<f64> = node_vertex.iter().map(|&v| values[v as usize]).collect();

    let mut arcs = Vec::with_capacity(node_vertex.len().saturating_sub(1));
    let mut regular_offsets = vec![0u32];
    let mut regular = Vec::with_capacity(n - node_vertex.len());
    let mut arc_of = vec![NONE; n];
    for (s, &v) in node_vertex.iter().enumerate() {
        for k in up_offsets[v as usize]..up_offsets[v as usize + 1] {
            let arc = arcs.len() as u32;
            let mut x = up[k as usize];
            while node_of_vertex[x as usize] == NONE {
                regular.push(x);
                arc_of[x as usize] = arc;
                x = up[up_offsets[x as usize] as usize];
            }
            arcs.push(Superarc {
                lo: s as u32,
                hi: node_of_vertex[x as usize],
            });
            regular_offsets.push(regular.len() as u32);
        }
    }
    let nodes = node_vertex.len();
    if arcs.len() + 1 != nodes {
        return Err(ContourTreeError::Inconsistent(format!(
            "{} superarcs for {nodes} supernodes",
            arcs.len()
        )));
    }

    let mut node_arc_offsets = vec![0u32; nodes + 1];
    for a in &arcs {
        node_arc_offsets[a.lo as usize + 1] += 1;
        node_arc_offsets[a.hi as usize + 1] += 1;
    }
    for i in 0..nodes {
        node_arc_offsets[i + 1] += node_arc_offsets[i];
    }
    let mut fill = node_arc_offsets.clone();
    let mut node_arcs = vec![0u32; 2 * arcs.len()];
    for (e, a) in arcs.iter().enumerate() {
        for end in [a.lo, a.hi] {
            node_arcs[fill[end as usize] as usize] = e as u32;
            fill[end as usize] += 1;
        }
    }

    let root = node_of_vertex[*order.sort_index().last().expect("non-empty") as usize];
    let mut parent_arc = vec![NONE; nodes];
    let mut depth = vec![0u32; nodes];
    let mut visited = vec![false; nodes];
    let mut bfs = Vec::with_capacity(nodes);
    visited[root as usize] = true;
    bfs.push(root);
    let mut head = 0;
    while head < bfs.len() {
        let s = bfs[head];
        head += 1;
        let range =
            node_arc_offsets[s as usize] as usize..node_arc_offsets[s as usize + 1] as usize;
        for &e in &node_arcs[range] {
            let a = arcs[e as usize];
            let t = if a.lo == s { a.hi } else { a.lo };
            if !visited[t as usize] {
                visited[t as usize] = true;
                parent_arc[t as usize] = e;
                depth[t as usize] = depth[s as usize] + 1;
                bfs.push(t);
            }
        }
    }
    if bfs.len() != nodes {
        return Err(ContourTreeError::Inconsistent(
            "superarcs do not connect all supernodes".into(),
        ));
    }
    for (s, &v) in node_vertex.iter().enumerate() {
        arc_of[v as usize] = match parent_arc[s] {
            NONE => node_arcs[node_arc_offsets[s] as usize],
            e => e,
        };
    }

    Ok(ContourTree {
        node_vertex,
        node_value,
        node_of_vertex,
        vertex_value: values.to_vec(),
        arcs,
        regular_offsets,
        regular,
        arc_of,
        node_arc_offsets,
        node_arcs,
        root,
        parent_arc,
        depth,
        bfs,
    })
}
