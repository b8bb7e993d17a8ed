//! Branch decomposition by best-up / best-down pairing at every supernode.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::contour_tree::{ContourTree, NONE};
use crate::hypersweep::ArcWeights;

#[derive(Debug, Error, PartialEq)]
pub enum DecompositionError {
    #[error("expected {expected} superarc weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("supernode {0} has several arcs on one side and none on the other; no branch passes through it")]
    NoThroughBranch(u32),
    #[error("{0} branches run between two leaves; expected exactly one")]
    RootCount(usize),
}

/// A monotone chain of superarcs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Branch {
    pub rank: u32,
    /// Superarc ids from the lower end upward.
    pub superarcs: Vec<u32>,
    pub lo_node: u32,
    pub hi_node: u32,
    /// Rank of the branch this one hangs off; `None` for the master branch.
    pub parent: Option<u32>,
    /// Supernode where this branch meets its parent.
    pub attachment: Option<u32>,
    pub weight: f64,
}

impl Branch {
    pub fn max_superarc(&self) -> u32 {
        *self.superarcs.iter().max().expect("branches are non-empty")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchDecomposition {
    /// Ordered by rank; the master branch is first.
    branches: Vec<Branch>,
    branch_of_arc: Vec<u32>,
}

impl BranchDecomposition {
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn master(&self) -> &Branch {
        &self.branches[0]
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// Rank of the branch containing `arc`.
    pub fn branch_of(&self, arc: u32) -> u32 {
        self.branch_of_arc[arc as usize]
    }

    /// The `k` highest-ranked branches.
    pub fn top_branches(&self, k: usize) -> &[Branch] {
        &self.branches[..k.min(self.branches.len())]
    }
}

/// `(weight, arc id)` comparison; the larger id wins ties.
fn heavier(w: &[ArcWeights], tree: &ContourTree, node: u32, a: u32, b: u32) -> Ordering {
    let wa = w[a as usize].seen_from(tree, a, node);
    let wb = w[b as usize].seen_from(tree, b, node);
    wa.total_cmp(&wb).then(a.cmp(&b))
}

fn best(w: &[ArcWeights], tree: &ContourTree, node: u32, arcs: impl Iterator<Item = u32>) -> u32 {
    arcs.max_by(|&a, &b| heavier(w, tree, node, a, b))
        .unwrap_or(NONE)
}

/// Pairs, at each supernode, the heaviest upward arc with the heaviest
/// downward arc. Maximal paired chains are the branches; the one running
/// leaf to leaf is the master branch with weight `total`, and every other
/// branch takes the weight of its end arc seen from where it attaches.
pub fn decompose(
    tree: &ContourTree,
    weights: &[ArcWeights],
    total: f64,
) -> Result<BranchDecomposition, DecompositionError> {
    let m = tree.superarc_count();
    if weights.len() != m {
        return Err(DecompositionError::WeightCount {
            expected: m,
            got: weights.len(),
        });
    }
    let nodes = tree.supernode_count();
    let mut best_up = vec![NONE; nodes];
    let mut best_down = vec![NONE; nodes];
    let mut up_link = vec![NONE; m];
    let mut down_link = vec![NONE; m];
    for s in 0..nodes as u32 {
        let u = best(weights, tree, s, tree.up_arcs(s));
        let d = best(weights, tree, s, tree.down_arcs(s));
        best_up[s as usize] = u;
        best_down[s as usize] = d;
        if u != NONE && d != NONE {
            up_link[d as usize] = u;
            down_link[u as usize] = d;
        }
    }

    struct Chain {
        arcs: Vec<u32>,
        lo: u32,
        hi: u32,
    }
    let mut chain_of_arc = vec![NONE; m];
    let mut chains: Vec<Chain> = Vec::new();
    for start in 0..m as u32 {
        if down_link[start as usize] != NONE {
            continue;
        }
        let mut arcs = vec![start];
        let mut e = start;
        while up_link[e as usize] != NONE {
            e = up_link[e as usize];
            arcs.push(e);
        }
        for &a in &arcs {
            chain_of_arc[a as usize] = chains.len() as u32;
        }
        let lo = tree.superarc(start).lo;
        let hi = tree.superarc(e).hi;
        chains.push(Chain { arcs, lo, hi });
    }

    // Attachment of each chain: its non-leaf end, and the chain through it.
    let through = |s: u32| -> Result<u32, DecompositionError> {
        let e = best_up[s as usize];
        if e == NONE || best_down[s as usize] == NONE {
            return Err(DecompositionError::NoThroughBranch(s));
        }
        Ok(chain_of_arc[e as usize])
    };
    let mut roots = Vec::new();
    let mut attach: Vec<Option<(u32, u32, f64)>> = Vec::with_capacity(chains.len());
    for (i, c) in chains.iter().enumerate() {
        let at = if !tree.is_leaf(c.lo) {
            let end_arc = c.arcs[0];
            Some((c.lo, through(c.lo)?, weights[end_arc as usize].from_lo))
        } else if !tree.is_leaf(c.hi) {
            let end_arc = *c.arcs.last().unwrap();
            Some((c.hi, through(c.hi)?, weights[end_arc as usize].from_hi))
        } else {
            roots.push(i);
            None
        };
        attach.push(at);
    }
    if roots.len() != 1 {
        return Err(DecompositionError::RootCount(roots.len()));
    }

    let mut order: Vec<usize> = (0..chains.len()).filter(|&i| i != roots[0]).collect();
    let weight_of = |i: usize| attach[i].map_or(total, |(_, _, w)| w);
    let max_arc = |i: usize| *chains[i].arcs.iter().max().unwrap();
    order.sort_by(|&a, &b| {
        weight_of(b)
            .total_cmp(&weight_of(a))
            .then(max_arc(a).cmp(&max_arc(b)))
    });
    order.insert(0, roots[0]);
    let mut rank_of = vec![0u32; chains.len()];
    for (r, &i) in order.iter().enumerate() {
        rank_of[i] = r as u32;
    }
    let branches = order
        .iter()
        .enumerate()
        .map(|(r, &i)| Branch {
            rank: r as u32,
            superarcs: chains[i].arcs.clone(),
            lo_node: chains[i].lo,
            hi_node: chains[i].hi,
            parent: attach[i].map(|(_, p, _)| rank_of[p as usize]),
            attachment: attach[i].map(|(s, _, _)| s),
            weight: weight_of(i),
        })
        .collect();
    let branch_of_arc = chain_of_arc.iter().map(|&c| rank_of[c as usize]).collect();
    Ok(BranchDecomposition {
        branches,
        branch_of_arc,
    })
}
