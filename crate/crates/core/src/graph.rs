//! Undirected simple graphs with sorted adjacency lists.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Marker for "not reached" in distance buffers.
pub const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { adjacency: vec![Vec::new(); n], edges: 0 }
    }

    /// Builds a graph from an edge list. Duplicate edges are merged; self
    /// loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, len: n });
                }
            }
            if u == v {
                return Err(Error::InvalidParameter { name: "self loop", value: u as f64 });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut total = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            total += list.len();
        }
        Ok(Graph { adjacency, edges: total / 2 })
    }

    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("valid path")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs three nodes");
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
    }

    /// Node 0 is the center.
    pub fn star(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (0, i))).expect("valid star")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::from_edges(n, edges).expect("valid complete graph")
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().copied().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Symmetric, loop-free and duplicate-free with sorted lists.
    pub fn is_simple(&self) -> bool {
        let mut count = 0;
        for (u, list) in self.adjacency.iter().enumerate() {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for &v in list {
                if v == u || v >= self.node_count() || !self.has_edge(v, u) {
                    return false;
                }
            }
            count += list.len();
        }
        count == 2 * self.edges
    }

    /// Breadth-first distances from `source`, stopping after `max_depth`
    /// levels. Unreached nodes hold [`UNREACHED`]. `dist` is resized and reset.
    pub fn bfs_distances(&self, source: usize, max_depth: Option<u32>, dist: &mut Vec<u32>) {
        dist.clear();
        dist.resize(self.node_count(), UNREACHED);
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if max_depth.is_some_and(|m| du >= m) {
                continue;
            }
            for &v in &self.adjacency[u] {
                if dist[v] == UNREACHED {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
    }

    /// All-pairs shortest-path distances. Quadratic memory; meant for small graphs.
    pub fn distance_matrix(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut buf = Vec::new();
        for s in 0..self.node_count() {
            self.bfs_distances(s, None, &mut buf);
            out.push(buf.clone());
        }
        out
    }

    /// Component label per node, labels assigned in order of lowest member id.
    pub fn components(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }
}
