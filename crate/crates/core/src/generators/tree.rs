//! Uniform spanning trees on induced subgraphs and balanced edge cuts.

use rand::Rng;

use crate::graph::DualGraph;

const NONE: usize = usize::MAX;

/// Induced subgraph over `units`, with local indices `0..units.len()`.
pub(crate) struct SubGraph {
    pub units: Vec<usize>,
    pub adj: Vec<Vec<usize>>,
    pub pops: Vec<u64>,
}

impl SubGraph {
    pub fn new(graph: &DualGraph, units: Vec<usize>) -> Self {
        let mut local = vec![NONE; graph.len()];
        for (i, &u) in units.iter().enumerate() {
            local[u] = i;
        }
        let adj = units
            .iter()
            .map(|&u| {
                graph
                    .neighbors(u)
                    .iter()
                    .map(|nb| local[nb.unit])
                    .filter(|&l| l != NONE)
                    .collect()
            })
            .collect();
        let pops = units.iter().map(|&u| graph.population(u)).collect();
        Self { units, adj, pops }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }
}

/// Spanning tree rooted at `root`, with subtree populations.
pub(crate) struct RootedTree {
    pub root: usize,
    children: Vec<Vec<usize>>,
    pub subtree_pop: Vec<u64>,
}

impl RootedTree {
    /// Local indices in the subtree hanging below (and including) `v`.
    pub fn subtree(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out
    }

    /// Non-root vertices whose parent edge, when cut, leaves a subtree of
    /// population `s` and a remainder `total - s` with `accept(s, rest)`.
    pub fn cuts(&self, mut accept: impl FnMut(u64, u64) -> bool) -> Vec<usize> {
        let total = self.subtree_pop[self.root];
        (0..self.subtree_pop.len())
            .filter(|&v| v != self.root)
            .filter(|&v| accept(self.subtree_pop[v], total - self.subtree_pop[v]))
            .collect()
    }
}

/// Wilson's algorithm: loop-erased random walks into a growing tree give
/// a spanning tree drawn uniformly from all spanning trees of `sub`.
/// `sub` must be connected.
pub(crate) fn uniform_spanning_tree<R: Rng>(sub: &SubGraph, rng: &mut R) -> RootedTree {
    let n = sub.len();
    let root = rng.random_range(0..n);
    let mut in_tree = vec![false; n];
    let mut next = vec![NONE; n];
    in_tree[root] = true;
    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            let nbrs = &sub.adj[u];
            next[u] = nbrs[rng.random_range(0..nbrs.len())];
            u = next[u];
        }
        u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }

    let mut children = vec![Vec::new(); n];
    for (v, &p) in next.iter().enumerate() {
        if p != NONE {
            children[p].push(v);
        }
    }
    let mut order = Vec::with_capacity(n);
    order.push(root);
    let mut i = 0;
    while i < order.len() {
        order.extend_from_slice(&children[order[i]]);
        i += 1;
    }
    assert_eq!(order.len(), n, "spanning tree does not reach every vertex");
    let mut subtree_pop = sub.pops.clone();
    for &v in order.iter().rev() {
        if next[v] != NONE {
            subtree_pop[next[v]] += subtree_pop[v];
        }
    }
    RootedTree {
        root,
        children,
        subtree_pop,
    }
}
