//! Fully dynamic maintenance of the ModifiedPivot clustering under label flips.
//!
//! The state keeps, for a fixed [`RandomTape`]:
//!
//! * `elim(u)`, the pivot that clusters `u` in the rank-greedy execution;
//! * `N⁻(u)`, neighbours `y` with `π(elim y) ≤ π(elim u)` in an
//!   order-statistic tree keyed by `(π(elim y), y)`, and `N⁺(u)`, neighbours
//!   with `π(elim y) ≥ π(elim u)` keyed by id;
//! * per-pivot `C_v`, σ-ordered `D_v` and `A_v`, and their σ-prefixes;
//! * the pair predicate `pair(u, v)`: `v` is a pivot, `π(v) < π(elim u)` and
//!   `|N(u) Δ C_v| ≤ ε|C_v| − 1`, with `N(u)` restricted to the vertices still
//!   unclustered when `v` is processed.
//!
//! The global claimed set is implicit: `I_A(u)` is the lowest-π pivot with
//! `pair(u, v)`, and `A_v = {u : I_A(u) = v}`.
//!
//! After [`DynamicState::build`] and after every [`DynamicState::apply_update`]
//! the labelling equals [`run_modified_pivot`](crate::run_modified_pivot) on
//! the current graph with the same tape.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ClusterId, Clustering, Graph, Vertex};
use crate::ostree::OsTree;
use crate::params::Params;
use crate::pivot::{pivot_cluster_id, singleton_cluster_id};
use crate::scalar::Scalar;
use crate::tape::{RandomTape, Rank};

/// How candidate near twins of a pivot's cluster are found when `C_v` changes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discovery {
    /// `∪ N⁺(x)` over `Θ(log n)` sampled members `x` of `C_v`.
    #[default]
    Sampled,
    /// `∪ N⁺(x)` over every member of `C_v`.
    Exhaustive,
}

/// Per-update statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateStats {
    /// `|𝒜|`, vertices whose eliminator changed.
    pub affected: usize,
    pub micros: u64,
    /// Tree entries rewritten plus predicates evaluated.
    pub touched: usize,
}

type MinusKey = (Rank, Vertex);

/// Read-only view of `elim`, `N⁻` and `N⁺`.
pub struct EliminatorState<'a> {
    elim: &'a [Vertex],
    nminus: &'a [OsTree<MinusKey>],
    nplus: &'a [BTreeSet<Vertex>],
}

impl EliminatorState<'_> {
    pub fn elim(&self, u: Vertex) -> Vertex {
        self.elim[u]
    }

    pub fn is_pivot(&self, u: Vertex) -> bool {
        self.elim[u] == u
    }

    /// Members of `N⁻(u)` in key order.
    pub fn nminus(&self, u: Vertex) -> Vec<Vertex> {
        self.nminus[u].keys().into_iter().map(|(_, y)| y).collect()
    }

    pub fn nplus(&self, u: Vertex) -> &BTreeSet<Vertex> {
        &self.nplus[u]
    }
}

/// Read-only view of the `I_S` pointers.
pub struct SetPointers<'a> {
    elim: &'a [Vertex],
    i_d: &'a [Option<Vertex>],
    i_dprime: &'a [Option<Vertex>],
    i_a: &'a [Option<Vertex>],
    i_aprime: &'a [Option<Vertex>],
    claimants: &'a [BTreeSet<Vertex>],
}

impl SetPointers<'_> {
    /// The pivot whose `C_v` contains `u`; always set.
    pub fn i_c(&self, u: Vertex) -> Option<Vertex> {
        Some(self.elim[u])
    }

    pub fn i_d(&self, u: Vertex) -> Option<Vertex> {
        self.i_d[u]
    }

    pub fn i_dprime(&self, u: Vertex) -> Option<Vertex> {
        self.i_dprime[u]
    }

    pub fn i_a(&self, u: Vertex) -> Option<Vertex> {
        self.i_a[u]
    }

    pub fn i_aprime(&self, u: Vertex) -> Option<Vertex> {
        self.i_aprime[u]
    }

    pub fn i_a_pair(&self, u: Vertex, v: Vertex) -> bool {
        self.claimants[v].contains(&u)
    }
}

#[derive(Clone, Debug)]
pub struct DynamicState<T> {
    graph: Graph,
    params: Params<T>,
    discovery: Discovery,
    rng: ChaCha8Rng,
    pi: Vec<Rank>,
    sigma: Vec<Rank>,

    elim: Vec<Vertex>,
    nminus: Vec<OsTree<MinusKey>>,
    nplus: Vec<BTreeSet<Vertex>>,

    /// `C_v` for pivots, empty otherwise; `member_pos[u]` indexes `members[elim u]`.
    members: Vec<Vec<Vertex>>,
    member_pos: Vec<usize>,
    d_sets: Vec<BTreeSet<(Rank, Vertex)>>,
    a_sets: Vec<BTreeSet<(Rank, Vertex)>>,
    d_prime: Vec<Vec<Vertex>>,
    a_prime: Vec<Vec<Vertex>>,
    /// Pivots `v` with `pair(u, v)`, keyed by `π(v)`.
    pairs: Vec<BTreeSet<(Rank, Vertex)>>,
    /// Vertices `u` with `pair(u, v)`, per pivot `v`.
    claimants: Vec<BTreeSet<Vertex>>,

    i_d: Vec<Option<Vertex>>,
    i_dprime: Vec<Option<Vertex>>,
    i_a: Vec<Option<Vertex>>,
    i_aprime: Vec<Option<Vertex>>,
    labels: Vec<ClusterId>,
}

/// Work lists shared by the phases of one refresh.
#[derive(Default)]
struct Dirty {
    pair_vertices: HashSet<Vertex>,
    prefix_pivots: HashSet<Vertex>,
    relabel: HashSet<Vertex>,
    touched: usize,
}

impl<T: Scalar> DynamicState<T> {
    /// Cold start on `g`, with sampled near-twin discovery.
    pub fn build(g: Graph, tape: &RandomTape, params: Params<T>) -> Result<Self> {
        Self::build_with(g, tape, params, Discovery::Sampled, tape.seed())
    }

    /// Cold start with an explicit discovery mode and sampler seed.
    pub fn build_with(
        g: Graph,
        tape: &RandomTape,
        params: Params<T>,
        discovery: Discovery,
        sampler_seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        let n = g.n();
        if tape.len() != n {
            return Err(Error::InvalidArgument(format!("tape covers {} vertices, graph has {n}", tape.len())));
        }
        let mut s = Self {
            graph: g,
            params,
            discovery,
            rng: ChaCha8Rng::seed_from_u64(sampler_seed),
            pi: (0..n).map(|v| tape.pi(v)).collect(),
            sigma: (0..n).map(|v| tape.sigma(v)).collect(),
            elim: vec![0; n],
            nminus: (0..n).map(|u| OsTree::with_seed(u as u64)).collect(),
            nplus: vec![BTreeSet::new(); n],
            members: vec![Vec::new(); n],
            member_pos: vec![0; n],
            d_sets: vec![BTreeSet::new(); n],
            a_sets: vec![BTreeSet::new(); n],
            d_prime: vec![Vec::new(); n],
            a_prime: vec![Vec::new(); n],
            pairs: vec![BTreeSet::new(); n],
            claimants: vec![BTreeSet::new(); n],
            i_d: vec![None; n],
            i_dprime: vec![None; n],
            i_a: vec![None; n],
            i_aprime: vec![None; n],
            labels: vec![0; n],
        };

        let mut assigned = vec![false; n];
        for v in tape.pivot_order() {
            if assigned[v] {
                continue;
            }
            assigned[v] = true;
            s.elim[v] = v;
            for &u in s.graph.neighbors(v) {
                if !assigned[u] {
                    assigned[u] = true;
                    s.elim[u] = v;
                }
            }
        }
        for u in 0..n {
            s.rebuild_neighbourhood(u);
            let p = s.elim[u];
            s.member_pos[u] = s.members[p].len();
            s.members[p].push(u);
        }

        let mut dirty = Dirty::default();
        for v in 0..n {
            if s.is_pivot(v) {
                s.recompute_d(v, &mut dirty);
            }
        }
        for u in 0..n {
            s.reevaluate_vertex(u, &mut dirty);
        }
        s.finish(dirty);
        for u in 0..n {
            s.labels[u] = s.derive_label(u);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    pub fn discovery(&self) -> Discovery {
        self.discovery
    }

    pub fn is_pivot(&self, u: Vertex) -> bool {
        self.elim[u] == u
    }

    pub fn eliminators(&self) -> EliminatorState<'_> {
        EliminatorState { elim: &self.elim, nminus: &self.nminus, nplus: &self.nplus }
    }

    pub fn pointers(&self) -> SetPointers<'_> {
        SetPointers {
            elim: &self.elim,
            i_d: &self.i_d,
            i_dprime: &self.i_dprime,
            i_a: &self.i_a,
            i_aprime: &self.i_aprime,
            claimants: &self.claimants,
        }
    }

    /// Members of `C_v`, ascending; empty unless `v` is a pivot.
    pub fn cluster_members(&self, v: Vertex) -> Vec<Vertex> {
        let mut m = self.members[v].clone();
        m.sort_unstable();
        m
    }

    /// Pivots in increasing `π`.
    pub fn pivots(&self) -> Vec<Vertex> {
        let mut p: Vec<Vertex> = (0..self.n()).filter(|&v| self.is_pivot(v)).collect();
        p.sort_unstable_by_key(|&v| self.pi[v]);
        p
    }

    pub fn query_cluster(&self, v: Vertex) -> ClusterId {
        self.labels[v]
    }

    pub fn labels(&self) -> &[ClusterId] {
        &self.labels
    }

    pub fn clustering(&self) -> Clustering {
        Clustering::from_labels(self.labels.clone())
    }

    /// `(|N(u) ∩ C_v|, |N(u) Δ C_v|)` from the order-statistic trees, with
    /// `N(u)` restricted to vertices unclustered when pivot `v` is processed.
    pub fn count_common_and_symdiff(&self, u: Vertex, v: Vertex) -> Result<(usize, usize)> {
        if u >= self.n() || v >= self.n() {
            return Err(Error::InvalidArgument(format!("vertex out of range for n = {}", self.n())));
        }
        if !self.is_pivot(v) {
            return Err(Error::InvalidArgument(format!("{v} is not a pivot")));
        }
        if self.pi[self.elim[u]] < self.pi[v] {
            return Err(Error::InvalidArgument(format!("{u} is clustered before pivot {v}")));
        }
        Ok(self.counts(u, v))
    }

    fn counts(&self, u: Vertex, v: Vertex) -> (usize, usize) {
        let rv = self.pi[v];
        let ru = self.pi[self.elim[u]];
        let tree = &self.nminus[u];
        let common = tree.count_range(&(rv, 0), &(rv, Vertex::MAX));
        let remaining_degree = self.nplus[u].len() + tree.count_range(&(rv, 0), &(ru, 0));
        let size = self.members[v].len();
        (common, remaining_degree + size - 2 * common)
    }

    /// Candidate near twins of `C_v`: `∪ N⁺(x)` over a sample of `C_v`
    /// without the members themselves. Sampled mode draws
    /// `min(|C_v|, max(8, ⌈4 ln n⌉))` members.
    pub fn sampled_a_discovery(&mut self, v: Vertex) -> Result<Vec<Vertex>> {
        if v >= self.n() || !self.is_pivot(v) {
            return Err(Error::InvalidArgument(format!("{v} is not a pivot")));
        }
        Ok(self.discover(v))
    }

    fn sample_size(&self, size: usize) -> usize {
        match self.discovery {
            Discovery::Exhaustive => size,
            Discovery::Sampled => {
                let log_n = (4.0 * (self.n().max(2) as f64).ln()).ceil() as usize;
                size.min(log_n.max(8))
            }
        }
    }

    fn discover(&mut self, v: Vertex) -> Vec<Vertex> {
        let size = self.members[v].len();
        let s = self.sample_size(size);
        let sample: Vec<Vertex> = if s == size {
            self.members[v].clone()
        } else {
            index::sample(&mut self.rng, size, s).into_iter().map(|i| self.members[v][i]).collect()
        };
        let mut out: Vec<Vertex> =
            sample.iter().flat_map(|&x| self.nplus[x].iter().copied()).filter(|&w| self.elim[w] != v).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Exact `pair(u, v)`.
    pub fn a_pair(&self, u: Vertex, v: Vertex) -> bool {
        if !self.is_pivot(v) || self.pi[v] >= self.pi[self.elim[u]] {
            return false;
        }
        let size = self.members[v].len();
        if !self.params.absorption_possible(size) {
            return false;
        }
        let (_, symdiff) = self.counts(u, v);
        self.params.absorbs(symdiff, size)
    }

    /// Flips the label of `{u, v}` and restores every structure.
    pub fn apply_update(&mut self, u: Vertex, v: Vertex) -> Result<UpdateStats> {
        let start = Instant::now();
        let now_edge = self.graph.flip_edge(u, v)?;
        let mut dirty = Dirty::default();
        if now_edge {
            self.link(u, v);
            self.link(v, u);
        } else {
            self.unlink(u, v);
            self.unlink(v, u);
        }
        dirty.touched += 2;

        let affected = self.propagate(u, v);
        let affected_set: HashSet<Vertex> = affected.iter().map(|&(y, _)| y).collect();

        // N± entries of neighbours whose own eliminator did not move.
        for &(y, old) in &affected {
            let old_key = (self.pi[old], y);
            let nbrs: Vec<Vertex> = self.graph.neighbors(y).iter().copied().collect();
            for x in nbrs {
                if affected_set.contains(&x) {
                    continue;
                }
                self.nminus[x].remove(&old_key);
                self.nplus[x].remove(&y);
                self.link(x, y);
                dirty.touched += 1;
            }
        }
        for &(y, old) in &affected {
            self.rebuild_neighbourhood(y);
            dirty.touched += self.graph.degree(y);
            self.move_member(y, old);
        }

        let mut c_dirty: BTreeSet<Vertex> = BTreeSet::new();
        for &(y, old) in &affected {
            if old == y && !self.is_pivot(y) {
                self.drop_pivot(y, &mut dirty);
            }
            c_dirty.insert(old);
            c_dirty.insert(self.elim[y]);
            dirty.relabel.insert(y);
        }
        c_dirty.retain(|&p| self.is_pivot(p));

        let mut d_dirty = c_dirty.clone();
        d_dirty.insert(self.elim[u]);
        d_dirty.insert(self.elim[v]);
        for &p in &d_dirty {
            self.recompute_d(p, &mut dirty);
        }

        for &p in &c_dirty {
            self.rediscover(p, &mut dirty);
        }
        let mut region: BTreeSet<Vertex> = BTreeSet::from([u, v]);
        for &(y, _) in &affected {
            region.insert(y);
            region.extend(self.graph.neighbors(y).iter().copied());
        }
        for w in region {
            self.reevaluate_vertex(w, &mut dirty);
        }

        let touched = dirty.touched;
        let relabel = self.finish(dirty);
        for w in relabel {
            self.labels[w] = self.derive_label(w);
        }
        Ok(UpdateStats { affected: affected.len(), micros: start.elapsed().as_micros() as u64, touched })
    }

    /// Inserts `y` into `N⁻(x)` and/or `N⁺(x)` by the current eliminator ranks.
    fn link(&mut self, x: Vertex, y: Vertex) {
        let ry = self.pi[self.elim[y]];
        let rx = self.pi[self.elim[x]];
        if ry <= rx {
            self.nminus[x].insert((ry, y));
        }
        if ry >= rx {
            self.nplus[x].insert(y);
        }
    }

    fn unlink(&mut self, x: Vertex, y: Vertex) {
        let ry = self.pi[self.elim[y]];
        self.nminus[x].remove(&(ry, y));
        self.nplus[x].remove(&y);
    }

    fn rebuild_neighbourhood(&mut self, u: Vertex) {
        self.nminus[u].clear();
        self.nplus[u].clear();
        let nbrs: Vec<Vertex> = self.graph.neighbors(u).iter().copied().collect();
        for y in nbrs {
            self.link(u, y);
        }
    }

    /// Re-runs the rank-greedy choice of eliminators from the flipped pair,
    /// in increasing `π`. Returns each vertex whose eliminator changed with
    /// its previous eliminator.
    fn propagate(&mut self, a: Vertex, b: Vertex) -> Vec<(Vertex, Vertex)> {
        let mut heap = BinaryHeap::new();
        let mut queued = HashSet::new();
        for x in [a, b] {
            if queued.insert(x) {
                heap.push(Reverse((self.pi[x], x)));
            }
        }
        let mut changed = Vec::new();
        while let Some(Reverse((rx, x))) = heap.pop() {
            let new = self
                .graph
                .neighbors(x)
                .iter()
                .copied()
                .filter(|&y| self.pi[y] < rx && self.elim[y] == y)
                .min_by_key(|&y| self.pi[y])
                .unwrap_or(x);
            let old = self.elim[x];
            if new == old {
                continue;
            }
            changed.push((x, old));
            self.elim[x] = new;
            if (old == x) != (new == x) {
                for &y in self.graph.neighbors(x) {
                    if self.pi[y] > rx && queued.insert(y) {
                        heap.push(Reverse((self.pi[y], y)));
                    }
                }
            }
        }
        changed
    }

    fn move_member(&mut self, y: Vertex, old: Vertex) {
        let pos = self.member_pos[y];
        let list = &mut self.members[old];
        debug_assert_eq!(list[pos], y);
        list.swap_remove(pos);
        if let Some(&moved) = list.get(pos) {
            self.member_pos[moved] = pos;
        }
        let new = self.elim[y];
        self.member_pos[y] = self.members[new].len();
        self.members[new].push(y);
    }

    /// Clears the per-pivot structures of a vertex that stopped being a pivot.
    fn drop_pivot(&mut self, x: Vertex, dirty: &mut Dirty) {
        for w in std::mem::take(&mut self.claimants[x]) {
            self.pairs[w].remove(&(self.pi[x], x));
            dirty.pair_vertices.insert(w);
        }
        for (_, u) in std::mem::take(&mut self.d_sets[x]) {
            if self.i_d[u] == Some(x) {
                self.i_d[u] = None;
            }
        }
        for u in std::mem::take(&mut self.d_prime[x]) {
            if self.i_dprime[u] == Some(x) {
                self.i_dprime[u] = None;
            }
            dirty.relabel.insert(u);
        }
        for u in std::mem::take(&mut self.a_prime[x]) {
            if self.i_aprime[u] == Some(x) {
                self.i_aprime[u] = None;
            }
            dirty.relabel.insert(u);
        }
        self.a_sets[x].clear();
    }

    fn recompute_d(&mut self, v: Vertex, dirty: &mut Dirty) {
        let size = self.members[v].len();
        let fresh: BTreeSet<(Rank, Vertex)> = self.members[v]
            .iter()
            .copied()
            .filter(|&u| u != v)
            .filter(|&u| {
                let common = self.nminus[u].count_range(&(self.pi[v], 0), &(self.pi[v], Vertex::MAX));
                self.params.ejects(common, size)
            })
            .map(|u| (self.sigma[u], u))
            .collect();
        dirty.touched += size;
        let old = std::mem::replace(&mut self.d_sets[v], fresh);
        for &(_, u) in old.difference(&self.d_sets[v]) {
            if self.i_d[u] == Some(v) {
                self.i_d[u] = None;
            }
        }
        for &(_, u) in &self.d_sets[v] {
            self.i_d[u] = Some(v);
        }
        dirty.prefix_pivots.insert(v);
    }

    fn set_pair(&mut self, w: Vertex, v: Vertex, on: bool, dirty: &mut Dirty) {
        let changed = if on {
            self.claimants[v].insert(w);
            self.pairs[w].insert((self.pi[v], v))
        } else {
            self.claimants[v].remove(&w);
            self.pairs[w].remove(&(self.pi[v], v))
        };
        if changed {
            dirty.pair_vertices.insert(w);
        }
    }

    /// Re-derives `pair(·, v)` after `C_v` changed: existing claimants are
    /// re-verified and candidates from [`Self::discover`] verified exactly.
    fn rediscover(&mut self, v: Vertex, dirty: &mut Dirty) {
        let mut candidates: Vec<Vertex> = self.claimants[v].iter().copied().collect();
        if self.params.absorption_possible(self.members[v].len()) {
            candidates.extend(self.discover(v));
        }
        candidates.sort_unstable();
        candidates.dedup();
        for w in candidates {
            let on = self.a_pair(w, v);
            dirty.touched += 1;
            self.set_pair(w, v, on, dirty);
        }
    }

    /// Re-derives `pair(w, ·)` for every pivot that can pair with `w`: those
    /// already paired and the eliminators of lower-ranked neighbours.
    fn reevaluate_vertex(&mut self, w: Vertex, dirty: &mut Dirty) {
        let mut candidates: Vec<Vertex> = self.pairs[w].iter().map(|&(_, v)| v).collect();
        let bound = (self.pi[self.elim[w]], 0);
        for (_, y) in self.nminus[w].keys_lt(&bound) {
            let p = self.elim[y];
            if self.params.absorption_possible(self.members[p].len()) {
                candidates.push(p);
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        for v in candidates {
            let on = self.a_pair(w, v);
            dirty.touched += 1;
            self.set_pair(w, v, on, dirty);
        }
    }

    /// Settles `I_A` and the σ-prefixes; returns the vertices to relabel.
    fn finish(&mut self, mut dirty: Dirty) -> HashSet<Vertex> {
        let mut pair_vertices: Vec<Vertex> = dirty.pair_vertices.drain().collect();
        pair_vertices.sort_unstable();
        for w in pair_vertices {
            let new = self.pairs[w].first().map(|&(_, v)| v);
            let old = self.i_a[w];
            if new == old {
                continue;
            }
            if let Some(o) = old {
                self.a_sets[o].remove(&(self.sigma[w], w));
                dirty.prefix_pivots.insert(o);
            }
            if let Some(p) = new {
                self.a_sets[p].insert((self.sigma[w], w));
                dirty.prefix_pivots.insert(p);
            }
            self.i_a[w] = new;
            dirty.relabel.insert(w);
        }

        let mut pivots: Vec<Vertex> = dirty.prefix_pivots.drain().collect();
        pivots.sort_unstable();
        for v in pivots {
            if !self.is_pivot(v) {
                continue;
            }
            let cap = self.params.subsample_cap(self.members[v].len());
            let d: Vec<Vertex> = self.d_sets[v].iter().take(cap).map(|&(_, u)| u).collect();
            let a: Vec<Vertex> = self.a_sets[v].iter().take(cap).map(|&(_, u)| u).collect();
            for u in std::mem::replace(&mut self.d_prime[v], d.clone()) {
                if self.i_dprime[u] == Some(v) {
                    self.i_dprime[u] = None;
                }
                dirty.relabel.insert(u);
            }
            for &u in &d {
                self.i_dprime[u] = Some(v);
                dirty.relabel.insert(u);
            }
            for u in std::mem::replace(&mut self.a_prime[v], a.clone()) {
                if self.i_aprime[u] == Some(v) {
                    self.i_aprime[u] = None;
                }
                dirty.relabel.insert(u);
            }
            for &u in &a {
                self.i_aprime[u] = Some(v);
                dirty.relabel.insert(u);
            }
        }
        dirty.relabel
    }

    fn derive_label(&self, u: Vertex) -> ClusterId {
        let n = self.n();
        if let Some(a) = self.i_a[u] {
            return if self.i_aprime[u] == Some(a) { pivot_cluster_id(a) } else { singleton_cluster_id(n, u) };
        }
        let v = self.elim[u];
        if self.i_dprime[u] == Some(v) {
            singleton_cluster_id(n, u)
        } else {
            pivot_cluster_id(v)
        }
    }

    /// Recomputes every structure from the graph and compares; for tests.
    pub fn check_consistency(&self, tape: &RandomTape) -> Result<()> {
        let fresh = Self::build_with(self.graph.clone(), tape, self.params, Discovery::Exhaustive, 0)?;
        let bad = |what: &str| Err(Error::Inconsistent(format!("{what} differs from a rebuild")));
        if self.elim != fresh.elim {
            return bad("elim");
        }
        for u in 0..self.n() {
            if self.nminus[u].keys() != fresh.nminus[u].keys() || self.nplus[u] != fresh.nplus[u] {
                return bad("neighbour trees");
            }
            if self.cluster_members(u) != fresh.cluster_members(u) {
                return bad("cluster members");
            }
        }
        if self.d_sets != fresh.d_sets || self.i_d != fresh.i_d || self.i_dprime != fresh.i_dprime {
            return bad("ejection sets");
        }
        if self.pairs != fresh.pairs || self.claimants != fresh.claimants {
            return bad("pair predicate");
        }
        if self.a_sets != fresh.a_sets || self.i_a != fresh.i_a || self.i_aprime != fresh.i_aprime {
            return bad("absorption sets");
        }
        if self.labels != fresh.labels {
            return bad("labels");
        }
        Ok(())
    }
}
