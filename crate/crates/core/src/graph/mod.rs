//! Immutable undirected simple graphs in compressed sparse row layout.
//!
//! Each undirected edge `{u, v}` is stored twice, once in each endpoint's
//! neighbor list, and every neighbor list is sorted ascending so that
//! membership is a binary search and common neighbors are a linear merge.

pub mod io;

use std::collections::VecDeque;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proposal::ProposalSet;
use crate::scalar::Scalar;

/// An unordered node pair. Canonical form has `u < v`.
pub type Edge = (usize, usize);

#[inline]
pub fn canonical(u: usize, v: usize) -> Edge {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// One row of an ingested edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    pub timestamp: Option<i64>,
}

impl EdgeRecord {
    pub fn new(u: usize, v: usize) -> Self {
        Self {
            u,
            v,
            timestamp: None,
        }
    }

    pub fn timed(u: usize, v: usize, timestamp: i64) -> Self {
        Self {
            u,
            v,
            timestamp: Some(timestamp),
        }
    }

    pub fn edge(&self) -> Edge {
        canonical(self.u, self.v)
    }
}

pub type EdgeList = Vec<EdgeRecord>;

/// What [`build_graph`] discarded while normalizing its input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub duplicates: usize,
    pub self_loops: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    num_edges: usize,
}

/// Builds a simple undirected graph, dropping self-loops and collapsing
/// duplicate or reversed rows.
pub fn build_graph(num_nodes: usize, edges: &[EdgeRecord]) -> Result<(Graph, BuildStats)> {
    let mut pairs = Vec::with_capacity(edges.len());
    let mut stats = BuildStats::default();
    for (row, rec) in edges.iter().enumerate() {
        for node in [rec.u, rec.v] {
            if node >= num_nodes {
                return Err(Error::EndpointOutOfRange {
                    row,
                    node,
                    num_nodes,
                });
            }
        }
        if rec.u == rec.v {
            stats.self_loops += 1;
            continue;
        }
        pairs.push(rec.edge());
    }
    let (graph, duplicates) = Graph::from_canonical_pairs(num_nodes, pairs);
    stats.duplicates = duplicates;
    if stats.duplicates > 0 || stats.self_loops > 0 {
        debug!(
            "build_graph dropped {} duplicate rows and {} self-loops",
            stats.duplicates, stats.self_loops
        );
    }
    Ok((graph, stats))
}

impl Graph {
    pub fn empty(num_nodes: usize) -> Self {
        Self {
            offsets: vec![0; num_nodes + 1],
            neighbors: Vec::new(),
            num_edges: 0,
        }
    }

    /// Builds from unordered pairs; see [`build_graph`] for the normalization rules.
    pub fn from_edges<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        let records: Vec<EdgeRecord> = edges
            .into_iter()
            .map(|(u, v)| EdgeRecord::new(u, v))
            .collect();
        build_graph(num_nodes, &records).map(|(g, _)| g)
    }

    // Pairs must be canonical, in range and loop-free.
    fn from_canonical_pairs(num_nodes: usize, mut pairs: Vec<Edge>) -> (Self, usize) {
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        let duplicates = before - pairs.len();

        let mut degree = vec![0usize; num_nodes];
        for &(u, v) in &pairs {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..num_nodes].to_vec();
        let mut neighbors = vec![0usize; 2 * pairs.len()];
        // Lexicographic pair order fills every list in ascending order: all
        // smaller partners arrive (as second components) before larger ones.
        for &(u, v) in &pairs {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
            neighbors[cursor[v]] = u;
            cursor[v] += 1;
        }
        let graph = Self {
            offsets,
            neighbors,
            num_edges: pairs.len(),
        };
        (graph, duplicates)
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Canonical edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Shared neighbors of `u` and `v`, ascending.
    pub fn common_neighbor_iter(&self, u: usize, v: usize) -> CommonNeighbors<'_> {
        CommonNeighbors {
            a: self.neighbors(u),
            b: self.neighbors(v),
        }
    }

    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        self.common_neighbor_iter(u, v).count()
    }

    /// A new graph with `extra` edges added. Existing edges and self-loops
    /// in `extra` contribute nothing.
    pub fn with_edges<I>(&self, extra: I) -> Result<Graph>
    where
        I: IntoIterator<Item = Edge>,
    {
        let n = self.num_nodes();
        let mut pairs: Vec<Edge> = self.edges().collect();
        for (row, (u, v)) in extra.into_iter().enumerate() {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::EndpointOutOfRange {
                        row,
                        node,
                        num_nodes: n,
                    });
                }
            }
            if u != v {
                pairs.push(canonical(u, v));
            }
        }
        Ok(Self::from_canonical_pairs(n, pairs).0)
    }

    /// Connected component label per node. Labels are assigned in order of
    /// each component's smallest node, starting at 0.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.num_nodes();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            queue.push_back(start);
            while let Some(x) = queue.pop_front() {
                for &y in self.neighbors(x) {
                    if label[y] == usize::MAX {
                        label[y] = next;
                        queue.push_back(y);
                    }
                }
            }
            next += 1;
        }
        (label, next)
    }

    pub fn to_edge_list(&self) -> EdgeList {
        self.edges().map(|(u, v)| EdgeRecord::new(u, v)).collect()
    }
}

/// Adds the first `k` proposal edges to `g`.
pub fn augment<T: Scalar>(g: &Graph, proposal: &ProposalSet<T>, k: usize) -> Result<Graph> {
    if k > proposal.len() {
        return Err(Error::ProposalTooShort {
            requested: k,
            available: proposal.len(),
        });
    }
    if k == 0 {
        return Ok(g.clone());
    }
    g.with_edges(proposal.edges().take(k))
}

/// Sorted-merge intersection of two neighbor lists.
pub struct CommonNeighbors<'a> {
    a: &'a [usize],
    b: &'a [usize],
}

impl Iterator for CommonNeighbors<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while let (Some(&x), Some(&y)) = (self.a.first(), self.b.first()) {
            match x.cmp(&y) {
                std::cmp::Ordering::Less => self.a = &self.a[1..],
                std::cmp::Ordering::Greater => self.b = &self.b[1..],
                std::cmp::Ordering::Equal => {
                    self.a = &self.a[1..];
                    self.b = &self.b[1..];
                    return Some(x);
                }
            }
        }
        None
    }
}
