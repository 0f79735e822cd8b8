//! Per-vertex random ranks that determinize pivot order and subsampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::Vertex;

/// A 64-bit uniform draw with the vertex id as tie-break, giving a strict
/// total order over vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rank {
    pub draw: u64,
    pub vertex: Vertex,
}

impl Rank {
    /// The draw mapped into `[0, 1)`.
    pub fn real(&self) -> f64 {
        self.draw as f64 / 18_446_744_073_709_551_616.0
    }
}

/// Pivot ranks `π` and subsample ranks `σ` for every vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomTape {
    pi: Vec<u64>,
    sigma: Vec<u64>,
    seed: u64,
}

impl RandomTape {
    /// Tape for `n` vertices, a pure function of `(n, seed)`.
    pub fn new(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = (0..n).map(|_| rng.gen()).collect();
        let sigma = (0..n).map(|_| rng.gen()).collect();
        Self { pi, sigma, seed }
    }

    /// Tape with explicit draws; the seed is recorded as 0.
    pub fn from_draws(pi: Vec<u64>, sigma: Vec<u64>) -> Self {
        assert_eq!(pi.len(), sigma.len(), "pi and sigma must cover the same vertices");
        Self { pi, sigma, seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn pi(&self, v: Vertex) -> Rank {
        Rank { draw: self.pi[v], vertex: v }
    }

    pub fn sigma(&self, v: Vertex) -> Rank {
        Rank { draw: self.sigma[v], vertex: v }
    }

    /// Vertices in increasing `π`.
    pub fn pivot_order(&self) -> Vec<Vertex> {
        let mut order: Vec<Vertex> = (0..self.len()).collect();
        order.sort_unstable_by_key(|&v| self.pi(v));
        order
    }

    /// Gives `v` the globally smallest pivot rank.
    pub fn promote(&mut self, v: Vertex) {
        for d in self.pi.iter_mut() {
            if *d == 0 {
                *d = 1;
            }
        }
        self.pi[v] = 0;
    }

    /// Gives `v` the globally largest pivot rank.
    pub fn demote(&mut self, v: Vertex) {
        for d in self.pi.iter_mut() {
            if *d == u64::MAX {
                *d = u64::MAX - 1;
            }
        }
        self.pi[v] = u64::MAX;
    }
}

pub fn make_tape(n: usize, seed: u64) -> RandomTape {
    RandomTape::new(n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn single_vertex_tape() {
        let t = make_tape(1, 9);
        assert_eq!(t.len(), 1);
        assert!((0.0..1.0).contains(&t.pi(0).real()));
    }

    #[test]
    fn tapes_are_deterministic() {
        assert_eq!(make_tape(5, 42), make_tape(5, 42));
        assert_ne!(make_tape(5, 42), make_tape(5, 43));
    }

    #[test]
    fn ranks_are_distinct() {
        let t = make_tape(10_000, 3);
        let pi: HashSet<Rank> = (0..t.len()).map(|v| t.pi(v)).collect();
        let sigma: HashSet<Rank> = (0..t.len()).map(|v| t.sigma(v)).collect();
        assert_eq!(pi.len(), 10_000);
        assert_eq!(sigma.len(), 10_000);
    }

    #[test]
    fn ties_break_by_vertex_id() {
        let t = RandomTape::from_draws(vec![5, 5, 1], vec![0, 0, 0]);
        assert_eq!(t.pivot_order(), vec![2, 0, 1]);
        assert!(t.sigma(0) < t.sigma(1));
    }

    #[test]
    fn promote_and_demote() {
        let mut t = make_tape(20, 1);
        t.promote(13);
        assert_eq!(t.pivot_order()[0], 13);
        t.demote(4);
        assert_eq!(*t.pivot_order().last().unwrap(), 4);
    }
}
