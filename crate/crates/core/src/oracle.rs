//! Exact optimum by exhaustive search, and a triangle-packing lower bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BadTriangle, Clustering, Graph, Vertex};

pub const MAX_BRUTE_FORCE_N: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptResult {
    pub cost: usize,
    /// Lexicographically first optimal labelling in restricted-growth form.
    pub clustering: Clustering,
    pub partitions_examined: u64,
}

struct Search<'a> {
    g: &'a Graph,
    n: usize,
    labels: Vec<usize>,
    best_cost: usize,
    best: Vec<usize>,
    examined: u64,
}

impl Search<'_> {
    /// Cost contributed by putting `v` in cluster `c` given the labels of `0..v`:
    /// non-edges into `c` plus edges to every other cluster.
    fn step_cost(&self, v: Vertex, c: usize) -> usize {
        let mut cost = 0;
        for u in 0..v {
            let same = self.labels[u] == c;
            if same != self.g.has_edge(u, v) {
                cost += 1;
            }
        }
        cost
    }

    fn run(&mut self, v: Vertex, blocks: usize, cost: usize) {
        if v == self.n {
            self.examined += 1;
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best.clone_from(&self.labels);
            }
            return;
        }
        for c in 0..=blocks {
            let next = cost + self.step_cost(v, c);
            self.labels[v] = c;
            self.run(v + 1, blocks.max(c + 1), next);
        }
    }
}

/// Every restricted-growth prefix of length `len`, with its block count.
fn prefixes(len: usize) -> Vec<(Vec<usize>, usize)> {
    let mut out = vec![(Vec::new(), 0)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|(p, blocks)| {
                (0..=blocks).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    (q, blocks.max(c + 1))
                })
            })
            .collect();
    }
    out
}

/// Minimum disagreement cost over all partitions of `V`.
///
/// Partitions are enumerated as restricted-growth strings (Bell(n) of them)
/// with cost maintained incrementally. The first few labels are split into
/// independent shards evaluated in parallel; the shard results are merged in
/// enumeration order, so the answer is deterministic.
pub fn brute_force_opt(g: &Graph) -> Result<OptResult> {
    let n = g.n();
    if n > MAX_BRUTE_FORCE_N {
        return Err(Error::SizeLimit { n, max: MAX_BRUTE_FORCE_N });
    }
    let shard_len = n.min(4);
    let results: Vec<(usize, Vec<usize>, u64)> = prefixes(shard_len)
        .into_par_iter()
        .map(|(prefix, blocks)| {
            let mut s = Search { g, n, labels: vec![0; n], best_cost: usize::MAX, best: Vec::new(), examined: 0 };
            let mut cost = 0;
            for (v, &c) in prefix.iter().enumerate() {
                cost += s.step_cost(v, c);
                s.labels[v] = c;
            }
            s.run(shard_len, blocks, cost);
            (s.best_cost, s.best, s.examined)
        })
        .collect();

    let examined = results.iter().map(|r| r.2).sum();
    let (cost, labels, _) = results.into_iter().min_by_key(|r| r.0).expect("at least the empty prefix");
    Ok(OptResult { cost, clustering: Clustering::from_labels(labels), partitions_examined: examined })
}

/// Greedy pair-disjoint packing of bad triangles in canonical order.
///
/// Every clustering pays at least one disagreement inside each bad triangle,
/// so the packing size is a lower bound on the optimum.
pub fn triangle_packing(g: &Graph) -> Vec<BadTriangle> {
    let n = g.n();
    let mut used = vec![false; n * n];
    let mut packing = Vec::new();
    for t in g.enumerate_bad_triangles() {
        let pairs = t.pairs();
        if pairs.iter().any(|&(a, b)| used[a * n + b]) {
            continue;
        }
        for (a, b) in pairs {
            used[a * n + b] = true;
        }
        packing.push(t);
    }
    packing
}

pub fn triangle_packing_lower_bound(g: &Graph) -> usize {
    triangle_packing(g).len()
}

/// Bell numbers `B_0..=B_n`.
pub fn bell_numbers(n: usize) -> Vec<u64> {
    let mut row = vec![1u64];
    let mut out = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            next.push(next.last().unwrap() + x);
        }
        out.push(next[0]);
        row = next;
    }
    out.truncate(n + 1);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::clustering_cost;

    #[test]
    fn bell_sequence() {
        assert_eq!(bell_numbers(8), vec![1, 1, 2, 5, 15, 52, 203, 877, 4140]);
    }

    #[test]
    fn enumeration_visits_every_partition_once() {
        let bell = bell_numbers(9);
        for n in 0..=8 {
            let r = brute_force_opt(&Graph::new(n)).unwrap();
            assert_eq!(r.partitions_examined, bell[n]);
            assert_eq!(r.cost, 0);
        }
    }

    #[test]
    fn two_triangles_with_bridge() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap();
        let r = brute_force_opt(&g).unwrap();
        assert_eq!(r.cost, 1);
        assert_eq!(clustering_cost(&g, &r.clustering), 1);
        assert_eq!(r.clustering.cluster_count(), 2);
        assert_eq!(triangle_packing_lower_bound(&g), 1);
    }

    #[test]
    fn complete_minus_edge() {
        let mut g = Graph::complete(6);
        g.flip_edge(0, 1).unwrap();
        assert_eq!(brute_force_opt(&g).unwrap().cost, 1);
        assert_eq!(triangle_packing_lower_bound(&g), 1);
    }

    #[test]
    fn complete_bipartite_two_three() {
        let g = Graph::from_edges(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap();
        let r = brute_force_opt(&g).unwrap();
        assert_eq!(clustering_cost(&g, &r.clustering), r.cost);
        assert_eq!(r.cost, 4);
        let lb = triangle_packing_lower_bound(&g);
        assert!(lb <= r.cost && lb >= 1);
    }

    #[test]
    fn rejects_large_instances() {
        assert_eq!(brute_force_opt(&Graph::new(13)), Err(Error::SizeLimit { n: 13, max: MAX_BRUTE_FORCE_N }));
    }

    #[test]
    fn packing_is_pair_disjoint() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (0, 2)]).unwrap();
        let p = triangle_packing(&g);
        let mut seen = std::collections::BTreeSet::new();
        for t in &p {
            assert!(g.is_bad_triangle(t));
            for pair in t.pairs() {
                assert!(seen.insert(pair));
            }
        }
    }
}
