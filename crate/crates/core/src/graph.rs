//! Simple undirected graphs and planted bisections.
//!
//! Vertices are 0-based inside the library. The 1-based numbering used by
//! edge-list and partition files is handled in [`crate::io`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Immutable simple undirected graph.
///
/// Edges are stored once as sorted `(u, v)` pairs with `u < v`, and a CSR
/// neighbor index is kept alongside for operator application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Graph {
    /// Builds a graph from 0-based pairs. Pairs are canonicalized (`u < v`),
    /// sorted and deduplicated.
    pub fn from_edges<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n < 2 {
            return Err(Error::TooFewVertices(n));
        }
        let mut edges = Vec::new();
        for (a, b) in pairs {
            for x in [a, b] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            edges.push((u as u32, v as u32));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_sorted_unique(n, edges))
    }

    /// Builds the graph from edges that are already canonical, sorted and unique.
    pub(crate) fn from_sorted_unique(n: usize, edges: Vec<(u32, u32)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        // Edges are sorted by (u, v), so filling in this order leaves every
        // neighbor list sorted: lower neighbors arrive before higher ones.
        for &(u, v) in &edges {
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for &(u, v) in &edges {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
        }
        Graph {
            n,
            edges,
            offsets,
            neighbors,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical 0-based edges, `u < v`, lexicographically sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// Returns the graph with extra 0-based edges added; duplicates are ignored.
    pub fn with_extra_edges<I>(&self, extra: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Graph::from_edges(self.n, self.edges().chain(extra))
    }
}

/// Two-sided labeling of the vertex set.
///
/// Planted partitions are balanced; partitions produced by the zero-cut rule
/// may not be.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<u8>,
}

impl Partition {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidLabel(bad));
        }
        Ok(Partition { labels })
    }

    /// The canonical planted bisection: first `n/2` vertices on side 0.
    pub fn halves(n: usize) -> Self {
        let labels = (0..n).map(|v| u8::from(v >= n / 2)).collect();
        Partition { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn side(&self, v: usize) -> u8 {
        self.labels[v]
    }

    pub fn count_ones(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn is_balanced(&self) -> bool {
        self.labels.len() % 2 == 0 && 2 * self.count_ones() == self.labels.len()
    }

    pub fn ensure_balanced(&self) -> Result<()> {
        if self.is_balanced() {
            Ok(())
        } else {
            let ones = self.count_ones();
            Err(Error::Unbalanced {
                zeros: self.labels.len() - ones,
                ones,
            })
        }
    }

    pub fn flipped(&self) -> Self {
        Partition {
            labels: self.labels.iter().map(|l| 1 - l).collect(),
        }
    }

    pub fn same_side(&self, u: usize, v: usize) -> bool {
        self.labels[u] == self.labels[v]
    }
}

/// The matrices spectral bisection can be run with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatrixKind {
    Adjacency,
    UnnormalizedLaplacian,
    SymNormalizedLaplacian,
    RwNormalizedLaplacian,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 4] = [
        MatrixKind::UnnormalizedLaplacian,
        MatrixKind::SymNormalizedLaplacian,
        MatrixKind::RwNormalizedLaplacian,
        MatrixKind::Adjacency,
    ];

    /// Short name used in CSV files and on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            MatrixKind::Adjacency => "A",
            MatrixKind::UnnormalizedLaplacian => "L",
            MatrixKind::SymNormalizedLaplacian => "Lsym",
            MatrixKind::RwNormalizedLaplacian => "Lrw",
        }
    }

    pub fn is_normalized(self) -> bool {
        matches!(
            self,
            MatrixKind::SymNormalizedLaplacian | MatrixKind::RwNormalizedLaplacian
        )
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "adj" | "adjacency" => Ok(MatrixKind::Adjacency),
            "l" | "unnormalized" | "laplacian" => Ok(MatrixKind::UnnormalizedLaplacian),
            "lsym" | "sym" | "normalized" => Ok(MatrixKind::SymNormalizedLaplacian),
            "lrw" | "rw" | "random-walk" => Ok(MatrixKind::RwNormalizedLaplacian),
            other => Err(Error::Parse(format!("unknown matrix kind '{other}'"))),
        }
    }
}

/// Internal and crossing degree of every vertex with respect to `planted`.
pub fn degree_split(g: &Graph, planted: &Partition) -> Result<(Vec<usize>, Vec<usize>)> {
    if planted.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            actual: planted.len(),
        });
    }
    let mut d_in = vec![0usize; g.n()];
    let mut d_out = vec![0usize; g.n()];
    for (u, v) in g.edges() {
        let slot = if planted.same_side(u, v) {
            &mut d_in
        } else {
            &mut d_out
        };
        slot[u] += 1;
        slot[v] += 1;
    }
    Ok((d_in, d_out))
}
