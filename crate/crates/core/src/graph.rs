//! Edge-labelled complete graphs stored as adjacency of "similar" pairs.
//!
//! A pair `{u, v}` is labelled similar iff it is an edge; every other pair is
//! implicitly labelled dissimilar. The vertex universe is fixed at
//! construction and label flips are the only mutation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    adj: Vec<BTreeSet<Vertex>>,
    edges: usize,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn new(n: usize) -> Self {
        Self { adj: vec![BTreeSet::new(); n], edges: 0 }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut g = Self::new(n);
        for (u, v) in edges {
            g.check_pair(u, v)?;
            if !g.has_edge(u, v) {
                g.insert_unchecked(u, v);
            }
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert_unchecked(u, v);
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn pair_count(&self) -> usize {
        let n = self.n();
        n * n.saturating_sub(1) / 2
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, v: Vertex) -> &BTreeSet<Vertex> {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, nbrs)| nbrs.range(u + 1..).map(move |&v| (u, v)))
    }

    fn check_pair(&self, u: Vertex, v: Vertex) -> Result<()> {
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop at vertex {u}")));
        }
        let n = self.n();
        if u >= n || v >= n {
            return Err(Error::InvalidArgument(format!("pair ({u}, {v}) out of range for {n} vertices")));
        }
        Ok(())
    }

    fn insert_unchecked(&mut self, u: Vertex, v: Vertex) {
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        self.edges += 1;
    }

    /// Toggles the label of `{u, v}`. Returns `true` if the pair is an edge
    /// afterwards.
    pub fn flip_edge(&mut self, u: Vertex, v: Vertex) -> Result<bool> {
        self.check_pair(u, v)?;
        if self.adj[u].remove(&v) {
            self.adj[v].remove(&u);
            self.edges -= 1;
            Ok(false)
        } else {
            self.insert_unchecked(u, v);
            Ok(true)
        }
    }

    /// `(|N(u) ∩ S|, |N(u) Δ S|)` for an arbitrary vertex set `S`.
    ///
    /// `u` may belong to `S`; it then counts towards the symmetric difference
    /// since `u ∉ N(u)`.
    pub fn count_common_and_symdiff(&self, u: Vertex, s: &BTreeSet<Vertex>) -> (usize, usize) {
        let nbrs = &self.adj[u];
        let common = if nbrs.len() <= s.len() {
            nbrs.iter().filter(|w| s.contains(w)).count()
        } else {
            s.iter().filter(|w| nbrs.contains(w)).count()
        };
        (common, nbrs.len() + s.len() - 2 * common)
    }

    /// Every bad triangle, each once, in lexicographic order.
    pub fn enumerate_bad_triangles(&self) -> Vec<BadTriangle> {
        let mut out = Vec::new();
        // A bad triangle has a unique centre adjacent to both other vertices.
        for c in 0..self.n() {
            let nbrs: Vec<Vertex> = self.adj[c].iter().copied().collect();
            for (i, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[i + 1..] {
                    if !self.adj[a].contains(&b) {
                        out.push(BadTriangle::new(a, b, c));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_bad_triangle(&self, t: &BadTriangle) -> bool {
        let [a, b, c] = t.vertices();
        let edges = [self.has_edge(a, b), self.has_edge(a, c), self.has_edge(b, c)];
        edges.iter().filter(|&&e| e).count() == 2
    }

    /// Checks symmetry and absence of self-loops.
    pub fn check_invariants(&self) -> bool {
        let mut twice = 0;
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if v == u || v >= self.n() || !self.adj[v].contains(&u) {
                    return false;
                }
                twice += 1;
            }
        }
        twice == 2 * self.edges
    }
}

/// Three distinct vertices in sorted order with exactly two edges among them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BadTriangle([Vertex; 3]);

impl BadTriangle {
    pub fn new(a: Vertex, b: Vertex, c: Vertex) -> Self {
        let mut t = [a, b, c];
        t.sort_unstable();
        debug_assert!(t[0] != t[1] && t[1] != t[2], "triangle vertices must be distinct");
        Self(t)
    }

    pub fn vertices(&self) -> [Vertex; 3] {
        self.0
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.contains(&v)
    }

    /// The three unordered pairs, each as `(lo, hi)`.
    pub fn pairs(&self) -> [(Vertex, Vertex); 3] {
        let [a, b, c] = self.0;
        [(a, b), (a, c), (b, c)]
    }
}

pub type ClusterId = usize;

/// Partition of the vertex set given by one opaque cluster id per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    labels: Vec<ClusterId>,
}

impl Clustering {
    pub fn from_labels(labels: Vec<ClusterId>) -> Self {
        Self { labels }
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_labels((0..n).collect())
    }

    pub fn single_cluster(n: usize) -> Self {
        Self::from_labels(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_of(&self, v: Vertex) -> ClusterId {
        self.labels[v]
    }

    pub fn labels(&self) -> &[ClusterId] {
        &self.labels
    }

    pub fn same_cluster(&self, u: Vertex, v: Vertex) -> bool {
        self.labels[u] == self.labels[v]
    }

    pub fn cluster_count(&self) -> usize {
        self.labels.iter().collect::<BTreeSet<_>>().len()
    }

    /// Clusters as sorted member lists, ordered by smallest member.
    pub fn clusters(&self) -> Vec<Vec<Vertex>> {
        let mut by_label: std::collections::BTreeMap<ClusterId, Vec<Vertex>> = Default::default();
        for (v, &l) in self.labels.iter().enumerate() {
            by_label.entry(l).or_default().push(v);
        }
        let mut out: Vec<Vec<Vertex>> = by_label.into_values().collect();
        out.sort();
        out
    }

    /// True iff both describe the same partition, up to renaming of ids.
    pub fn same_partition(&self, other: &Clustering) -> bool {
        self.len() == other.len() && self.clusters() == other.clusters()
    }
}

/// Non-edges inside clusters plus edges across clusters.
///
/// # Panics
///
/// If the clustering does not cover exactly the vertices of `g`.
pub fn clustering_cost(g: &Graph, c: &Clustering) -> usize {
    assert_eq!(g.n(), c.len(), "clustering must assign every vertex");
    let mut sizes: std::collections::HashMap<ClusterId, usize> = Default::default();
    for &l in c.labels() {
        *sizes.entry(l).or_default() += 1;
    }
    let inside_pairs: usize = sizes.values().map(|&s| s * s.saturating_sub(1) / 2).sum();
    let inside_edges = g.edges().filter(|&(u, v)| c.same_cluster(u, v)).count();
    (inside_pairs - inside_edges) + (g.edge_count() - inside_edges)
}
