//! Classification of half-edges by the size of what hangs behind them.
//!
//! A half-edge at `w` is `Ext` when the component of `w` after deleting its
//! edge has fewer than `threshold` vertices and `Surv` otherwise. Only
//! bridges can shrink a component, so one bridge-finding pass with subtree
//! sizes settles every half-edge.

use serde::{Deserialize, Serialize};

/// Per-degree and total counts of `Ext` and `Surv` half-edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfEdgeClasses {
    /// Component-size cutoff `N^delta`.
    pub threshold: f64,
    /// Indexed by the degree of the endpoint.
    pub ext_by_degree: Vec<u64>,
    pub surv_by_degree: Vec<u64>,
    pub ext: u64,
    pub surv: u64,
}

impl HalfEdgeClasses {
    pub fn half_edges(&self) -> u64 {
        self.ext + self.surv
    }

    pub fn surv_fraction(&self) -> f64 {
        self.surv as f64 / self.half_edges().max(1) as f64
    }

    pub fn ext_fraction_at(&self, degree: usize) -> f64 {
        self.ext_by_degree.get(degree).copied().unwrap_or(0) as f64
            / self.half_edges().max(1) as f64
    }
}

/// Classifies every half-edge of the multigraph on `n` vertices with the
/// given edges, using the cutoff `n^delta`.
pub fn classify_half_edges(n: usize, edges: &[(u32, u32)], delta: f64) -> HalfEdgeClasses {
    let threshold = (n as f64).powf(delta);
    let mut degree = vec![0usize; n];
    for &(u, v) in edges {
        degree[u as usize] += 1;
        degree[v as usize] += 1;
    }
    // Adjacency in CSR form carrying edge ids.
    let mut start = vec![0usize; n + 1];
    for v in 0..n {
        start[v + 1] = start[v] + degree[v];
    }
    let mut fill = start.clone();
    let mut adj = vec![(0u32, 0u32); start[n]];
    for (e, &(u, v)) in edges.iter().enumerate() {
        adj[fill[u as usize]] = (v, e as u32);
        fill[u as usize] += 1;
        adj[fill[v as usize]] = (u, e as u32);
        fill[v as usize] += 1;
    }

    const UNSEEN: u32 = u32::MAX;
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut subtree = vec![1usize; n];
    let mut comp_size_of = vec![0usize; n];
    // side[e] = (vertex on the child side, child subtree size) for bridges
    let mut bridge_child: Vec<Option<u32>> = vec![None; edges.len()];
    let mut clock = 0u32;
    let mut stack: Vec<(u32, u32, usize)> = Vec::new();
    let mut members: Vec<u32> = Vec::new();

    for root in 0..n as u32 {
        if disc[root as usize] != UNSEEN {
            continue;
        }
        members.clear();
        disc[root as usize] = clock;
        low[root as usize] = clock;
        clock += 1;
        members.push(root);
        stack.push((root, u32::MAX, start[root as usize]));
        while let Some(&mut (v, parent_edge, ref mut cursor)) = stack.last_mut() {
            let vi = v as usize;
            if *cursor < start[vi + 1] {
                let (w, e) = adj[*cursor];
                *cursor += 1;
                if e == parent_edge {
                    continue;
                }
                let wi = w as usize;
                if disc[wi] == UNSEEN {
                    disc[wi] = clock;
                    low[wi] = clock;
                    clock += 1;
                    members.push(w);
                    stack.push((w, e, start[wi]));
                } else {
                    low[vi] = low[vi].min(disc[wi]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    let pi = p as usize;
                    low[pi] = low[pi].min(low[vi]);
                    subtree[pi] += subtree[vi];
                    if low[vi] > disc[pi] {
                        bridge_child[parent_edge as usize] = Some(v);
                    }
                }
            }
        }
        let size = subtree[root as usize];
        for &m in &members {
            comp_size_of[m as usize] = size;
        }
    }

    let max_degree = degree.iter().copied().max().unwrap_or(0);
    let mut ext_by_degree = vec![0u64; max_degree + 1];
    let mut surv_by_degree = vec![0u64; max_degree + 1];
    let mut record = |w: u32, side: usize| {
        let d = degree[w as usize];
        if (side as f64) < threshold {
            ext_by_degree[d] += 1;
        } else {
            surv_by_degree[d] += 1;
        }
    };
    for (e, &(u, v)) in edges.iter().enumerate() {
        match bridge_child[e] {
            Some(child) => {
                let below = subtree[child as usize];
                let whole = comp_size_of[child as usize];
                let parent = if child == u { v } else { u };
                record(child, below);
                record(parent, whole - below);
            }
            None => {
                record(u, comp_size_of[u as usize]);
                record(v, comp_size_of[v as usize]);
            }
        }
    }
    let ext = ext_by_degree.iter().sum();
    let surv = surv_by_degree.iter().sum();
    HalfEdgeClasses {
        threshold,
        ext_by_degree,
        surv_by_degree,
        ext,
        surv,
    }
}
