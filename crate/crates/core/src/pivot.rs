//! Rank-driven Pivot and ModifiedPivot.
//!
//! Both algorithms visit vertices in increasing `π`; a vertex still in the
//! remaining set when visited becomes a pivot. ModifiedPivot additionally
//! ejects a capped subsample of low-overlap neighbours (`D′_v`) to singletons
//! and absorbs a capped subsample of near-twin non-neighbours (`A′_v`) into
//! the pivot's cluster. Subsamples are the members with the smallest `σ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ClusterId, Clustering, Graph, Vertex};
use crate::params::Params;
use crate::scalar::Scalar;
use crate::tape::RandomTape;

/// Cluster id of the cluster formed around pivot `v`.
pub fn pivot_cluster_id(v: Vertex) -> ClusterId {
    v
}

/// Cluster id of the singleton holding `u` in a graph on `n` vertices.
pub fn singleton_cluster_id(n: usize, u: Vertex) -> ClusterId {
    n + u
}

/// The graph restricted to the vertices still in `V`.
#[derive(Clone, Copy)]
pub struct RemainingView<'a> {
    pub graph: &'a Graph,
    pub alive: &'a [bool],
}

impl<'a> RemainingView<'a> {
    pub fn new(graph: &'a Graph, alive: &'a [bool]) -> Self {
        assert_eq!(graph.n(), alive.len());
        Self { graph, alive }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.alive[v]
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.graph.neighbors(v).iter().copied().filter(|&w| self.alive[w])
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.neighbors(v).count()
    }
}

/// The five sets one iteration of ModifiedPivot computes around its pivot.
/// All lists are sorted by vertex id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotSets {
    /// `C_v`: the pivot and its remaining neighbours.
    pub cluster: Vec<Vertex>,
    /// `D_v`: neighbours with `|N(u) ∩ C_v| ≤ δ|C_v| − 1`.
    pub ejectable: Vec<Vertex>,
    /// `D′_v`: the `min(|D_v|, ⌊δ|C_v|⌋)` lowest-`σ` members of `D_v`.
    pub ejected: Vec<Vertex>,
    /// `A_v`: unclaimed remaining non-neighbours with `|N(w) Δ C_v| ≤ ε|C_v| − 1`.
    pub absorbable: Vec<Vertex>,
    /// `A′_v`: the `min(|A_v|, ⌊δ|C_v|⌋)` lowest-`σ` members of `A_v`.
    pub absorbed: Vec<Vertex>,
}

/// The `cap` members with the smallest `σ`, returned sorted by vertex id.
pub fn sigma_prefix(members: &[Vertex], cap: usize, tape: &RandomTape) -> Vec<Vertex> {
    if cap >= members.len() {
        return members.to_vec();
    }
    let mut by_sigma = members.to_vec();
    by_sigma.sort_unstable_by_key(|&u| tape.sigma(u));
    by_sigma.truncate(cap);
    by_sigma.sort_unstable();
    by_sigma
}

/// Computes `C_v, D_v, D′_v, A_v, A′_v` for pivot `v` against the remaining
/// graph, where `claimed[w]` marks membership of the global set `A`.
pub fn pivot_sets_at<T: Scalar>(
    view: &RemainingView<'_>,
    v: Vertex,
    claimed: &[bool],
    params: &Params<T>,
    tape: &RandomTape,
) -> PivotSets {
    let (cluster, ejectable, absorbable) = unsampled_sets(view, v, claimed, params);
    let cap = params.subsample_cap(cluster.len());
    PivotSets {
        ejected: sigma_prefix(&ejectable, cap, tape),
        absorbed: sigma_prefix(&absorbable, cap, tape),
        cluster,
        ejectable,
        absorbable,
    }
}

/// `(C_v, D_v, A_v)`, the part of the pivot sets that needs no randomness.
pub(crate) fn unsampled_sets<T: Scalar>(
    view: &RemainingView<'_>,
    v: Vertex,
    claimed: &[bool],
    params: &Params<T>,
) -> (Vec<Vertex>, Vec<Vertex>, Vec<Vertex>) {
    debug_assert!(view.contains(v), "pivot must be in the remaining set");
    let n = view.graph.n();
    let mut in_cluster = vec![false; n];
    let mut cluster: Vec<Vertex> = std::iter::once(v).chain(view.neighbors(v)).collect();
    cluster.sort_unstable();
    for &u in &cluster {
        in_cluster[u] = true;
    }
    let size = cluster.len();

    let ejectable: Vec<Vertex> = cluster
        .iter()
        .copied()
        .filter(|&u| u != v)
        .filter(|&u| {
            let common = view.graph.neighbors(u).iter().filter(|&&w| in_cluster[w]).count();
            params.ejects(common, size)
        })
        .collect();

    let mut absorbable = Vec::new();
    if params.absorption_possible(size) {
        // A near twin is adjacent to all but fewer than ε|C_v| members, so it
        // is a neighbour of some member.
        let mut common = vec![0usize; n];
        let mut touched = Vec::new();
        for &x in &cluster {
            for w in view.neighbors(x) {
                if in_cluster[w] || claimed[w] {
                    continue;
                }
                if common[w] == 0 {
                    touched.push(w);
                }
                common[w] += 1;
            }
        }
        for w in touched {
            let symdiff = view.degree(w) + size - 2 * common[w];
            if params.absorbs(symdiff, size) {
                absorbable.push(w);
            }
        }
        absorbable.sort_unstable();
    }
    (cluster, ejectable, absorbable)
}

/// One iteration of ModifiedPivot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub pivot: Vertex,
    #[serde(flatten)]
    pub sets: PivotSets,
    /// Snapshot of the global set `A` at the start of the iteration.
    pub claimed_before: Vec<Vertex>,
    /// `|V|` at the start of the iteration.
    pub remaining: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub n: usize,
    pub iterations: Vec<IterationRecord>,
}

impl ExecutionTrace {
    pub fn pivots(&self) -> Vec<Vertex> {
        self.iterations.iter().map(|r| r.pivot).collect()
    }

    /// Rebuilds the clustering the iterations describe.
    pub fn clustering(&self) -> Result<Clustering> {
        let mut labels: Vec<Option<ClusterId>> = vec![None; self.n];
        let mut claimed = vec![false; self.n];
        for (i, r) in self.iterations.iter().enumerate() {
            assign_iteration(self.n, r.pivot, &r.sets, &claimed, &mut labels)
                .map_err(|v| Error::Inconsistent(format!("vertex {v} clustered twice (iteration {i})")))?;
            for &w in &r.sets.absorbable {
                claimed[w] = true;
            }
        }
        labels
            .into_iter()
            .enumerate()
            .map(|(v, l)| l.ok_or_else(|| Error::Inconsistent(format!("vertex {v} never clustered"))))
            .collect::<Result<Vec<_>>>()
            .map(Clustering::from_labels)
    }
}

/// Applies one iteration's cluster assignments. Fails with the offending
/// vertex if it was already clustered.
fn assign_iteration(
    n: usize,
    pivot: Vertex,
    sets: &PivotSets,
    claimed: &[bool],
    labels: &mut [Option<ClusterId>],
) -> std::result::Result<(), Vertex> {
    let mut put = |u: Vertex, id: ClusterId| {
        if labels[u].is_some() {
            return Err(u);
        }
        labels[u] = Some(id);
        Ok(())
    };
    // (D′_v \ A) ∪ (A_v \ A′_v) become singletons
    for &u in &sets.ejected {
        if !claimed[u] {
            put(u, singleton_cluster_id(n, u))?;
        }
    }
    for &u in &sets.absorbable {
        if sets.absorbed.binary_search(&u).is_err() {
            put(u, singleton_cluster_id(n, u))?;
        }
    }
    // (C_v ∪ A′_v) \ (D′_v ∪ A) join the pivot's cluster
    let id = pivot_cluster_id(pivot);
    for &u in sets.cluster.iter().chain(&sets.absorbed) {
        if !claimed[u] && sets.ejected.binary_search(&u).is_err() {
            put(u, id)?;
        }
    }
    Ok(())
}

fn check_tape(g: &Graph, tape: &RandomTape) -> Result<()> {
    if tape.len() != g.n() {
        return Err(Error::InvalidArgument(format!("tape covers {} vertices, graph has {}", tape.len(), g.n())));
    }
    Ok(())
}

/// Classic Pivot. Returns the clustering and the pivots in visiting order.
pub fn run_pivot(g: &Graph, tape: &RandomTape) -> Result<(Clustering, Vec<Vertex>)> {
    check_tape(g, tape)?;
    let n = g.n();
    let mut labels: Vec<Option<ClusterId>> = vec![None; n];
    let mut pivots = Vec::new();
    for v in tape.pivot_order() {
        if labels[v].is_some() {
            continue;
        }
        pivots.push(v);
        let id = pivot_cluster_id(v);
        labels[v] = Some(id);
        for &u in g.neighbors(v) {
            if labels[u].is_none() {
                labels[u] = Some(id);
            }
        }
    }
    let labels = labels.into_iter().map(|l| l.expect("every vertex is visited")).collect();
    Ok((Clustering::from_labels(labels), pivots))
}

/// ModifiedPivot with pivots in `π` order and `σ`-prefix subsamples.
pub fn run_modified_pivot<T: Scalar>(
    g: &Graph,
    tape: &RandomTape,
    params: &Params<T>,
) -> Result<(Clustering, ExecutionTrace)> {
    params.validate()?;
    check_tape(g, tape)?;
    let n = g.n();
    let mut alive = vec![true; n];
    let mut claimed = vec![false; n];
    let mut claimed_list: Vec<Vertex> = Vec::new();
    let mut remaining = n;
    let mut labels: Vec<Option<ClusterId>> = vec![None; n];
    let mut iterations = Vec::new();

    for v in tape.pivot_order() {
        if !alive[v] {
            continue;
        }
        let sets = pivot_sets_at(&RemainingView::new(g, &alive), v, &claimed, params, tape);
        assign_iteration(n, v, &sets, &claimed, &mut labels).unwrap_or_else(|u| panic!("vertex {u} clustered twice"));

        let mut claimed_before = claimed_list.clone();
        claimed_before.sort_unstable();
        for &w in &sets.absorbable {
            claimed[w] = true;
            claimed_list.push(w);
        }
        for &u in &sets.cluster {
            alive[u] = false;
        }
        iterations.push(IterationRecord { pivot: v, claimed_before, remaining, sets });
        remaining -= iterations.last().map_or(0, |r| r.sets.cluster.len());
    }

    let labels = labels.into_iter().map(|l| l.expect("ModifiedPivot clusters every vertex")).collect();
    Ok((Clustering::from_labels(labels), ExecutionTrace { n, iterations }))
}
