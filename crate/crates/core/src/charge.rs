//! Bad-triangle charging for ModifiedPivot.
//!
//! The charging scheme replays a recorded [`ExecutionTrace`], so charges and
//! the clustering they are compared against come from the same coins. Each
//! iteration charges bad triangles through one of eight lines
//! (see [`ChargeLine`]); charges to the same triangle accumulate.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{clustering_cost, BadTriangle, Clustering, Graph, Vertex};
use crate::params::Params;
use crate::pivot::{run_modified_pivot, unsampled_sets, ExecutionTrace, RemainingView};
use crate::scalar::Scalar;
use crate::tape::RandomTape;

/// Which rule of the charging scheme produced a charge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeLine {
    /// Non-edge inside `C_v`, neither endpoint ejected: `1`.
    InternalKept,
    /// Non-edge inside `C_v` with an ejected endpoint: `2δ/(1 − 3δ/2)`.
    InternalEjected,
    /// Light case, edge from `C_v` to a vertex outside `A_v`: `1`.
    Outward,
    /// Light case, edge from `C_v` into `A′_v`: `δ`.
    OutwardAbsorbed,
    /// Light case, edge from `C_v` into `A_v \ A′_v`: `1 + ε/(1 − ε)`.
    OutwardUnabsorbed,
    /// Heavy case, cut edge from `C_v` to a vertex outside `A_v`: `1`.
    HeavyOutward,
    /// Heavy case, cut edge from `C_v` into `A_v`: `1 − ε/(1 − ε)`.
    HeavyNearTwin,
    /// Heavy case, triangle `(u, w, x)` with `u ∈ N(v)`, `w, x ∈ A_v`:
    /// `(5ε/(1 − ε)) / (|A_v| − 1)`.
    NonLocal,
}

impl ChargeLine {
    pub const ALL: [ChargeLine; 8] = [
        ChargeLine::InternalKept,
        ChargeLine::InternalEjected,
        ChargeLine::Outward,
        ChargeLine::OutwardAbsorbed,
        ChargeLine::OutwardUnabsorbed,
        ChargeLine::HeavyOutward,
        ChargeLine::HeavyNearTwin,
        ChargeLine::NonLocal,
    ];

    fn index(self) -> usize {
        self as usize
    }

    /// Every line except [`ChargeLine::NonLocal`] charges a triangle through the pivot.
    pub fn contains_pivot(self) -> bool {
        self != ChargeLine::NonLocal
    }
}

/// One charge made while replaying a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeEvent<T> {
    pub iteration: usize,
    pub line: ChargeLine,
    pub triangle: BadTriangle,
    pub amount: T,
}

/// Sparse nonnegative charges `y_t` on bad triangles.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChargeVector<T> {
    charges: HashMap<BadTriangle, T>,
}

impl<T: Scalar> ChargeVector<T> {
    pub fn new() -> Self {
        Self { charges: HashMap::new() }
    }

    pub fn add(&mut self, t: BadTriangle, amount: T) {
        *self.charges.entry(t).or_insert_with(T::zero) += amount;
    }

    pub fn get(&self, t: &BadTriangle) -> T {
        self.charges.get(t).copied().unwrap_or_else(T::zero)
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BadTriangle, &T)> {
        self.charges.iter()
    }

    /// `Σ_t y_t`, summed in canonical triangle order so the result does not
    /// depend on hash order.
    pub fn total(&self) -> T {
        let mut entries: Vec<(&BadTriangle, &T)> = self.charges.iter().collect();
        entries.sort_unstable_by_key(|(t, _)| **t);
        entries.into_iter().map(|(_, &y)| y).sum()
    }

    /// `y_(a,b)`: total charge on triangles containing both `a` and `b`.
    pub fn pair_total(&self, a: Vertex, b: Vertex) -> T {
        self.charges.iter().filter(|(t, _)| t.contains(a) && t.contains(b)).map(|(_, &y)| y).sum()
    }

    /// `y_(a,b)` for every pair, packed as [`pair_index`] describes.
    pub fn pair_totals(&self, n: usize) -> Vec<T> {
        let mut out = vec![T::zero(); n * n.saturating_sub(1) / 2];
        for (t, &y) in &self.charges {
            for (a, b) in t.pairs() {
                out[pair_index(n, a, b)] += y;
            }
        }
        out
    }
}

/// Position of the pair `{a, b}` in a packed upper-triangular array.
pub fn pair_index(n: usize, a: Vertex, b: Vertex) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    debug_assert!(b < n && a != b);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// Per-iteration membership masks reconstructed from a trace.
struct Masks {
    cluster: Vec<bool>,
    ejected: Vec<bool>,
    absorbable: Vec<bool>,
    absorbed: Vec<bool>,
}

impl Masks {
    fn new(n: usize) -> Self {
        Self { cluster: vec![false; n], ejected: vec![false; n], absorbable: vec![false; n], absorbed: vec![false; n] }
    }

    fn set(&mut self, r: &crate::pivot::IterationRecord, on: bool) {
        for &u in &r.sets.cluster {
            self.cluster[u] = on;
        }
        for &u in &r.sets.ejected {
            self.ejected[u] = on;
        }
        for &u in &r.sets.absorbable {
            self.absorbable[u] = on;
        }
        for &u in &r.sets.absorbed {
            self.absorbed[u] = on;
        }
    }
}

/// Walks the trace iteration by iteration with the remaining set `V` and the
/// claimed set `A` as they stood at the start of each iteration, checking
/// every record against the graph on the way.
fn replay<F>(g: &Graph, trace: &ExecutionTrace, params: &Params<impl Scalar>, mut visit: F) -> Result<()>
where
    F: FnMut(usize, &crate::pivot::IterationRecord, &[bool], &[bool], &Masks) -> Result<()>,
{
    let n = g.n();
    if trace.n != n {
        return Err(Error::Inconsistent(format!("trace covers {} vertices, graph has {n}", trace.n)));
    }
    let mut alive = vec![true; n];
    let mut claimed = vec![false; n];
    let mut remaining = n;
    let mut masks = Masks::new(n);
    for (i, r) in trace.iterations.iter().enumerate() {
        let v = r.pivot;
        if v >= n || !alive[v] {
            return Err(Error::Inconsistent(format!("iteration {i}: pivot {v} is not in V")));
        }
        if r.remaining != remaining {
            return Err(Error::Inconsistent(format!(
                "iteration {i}: records |V| = {}, replay has {remaining}",
                r.remaining
            )));
        }
        let before: Vec<Vertex> = (0..n).filter(|&w| claimed[w]).collect();
        if r.claimed_before != before {
            return Err(Error::Inconsistent(format!("iteration {i}: snapshot of A differs from replay")));
        }
        let view = RemainingView::new(g, &alive);
        let (cluster, ejectable, absorbable) = unsampled_sets(&view, v, &claimed, params);
        let cap = params.subsample_cap(cluster.len());
        let s = &r.sets;
        let subsample_ok = |sub: &[Vertex], of: &[Vertex]| {
            sub.len() == of.len().min(cap) && sub.iter().all(|u| of.binary_search(u).is_ok())
        };
        if s.cluster != cluster
            || s.ejectable != ejectable
            || s.absorbable != absorbable
            || !subsample_ok(&s.ejected, &ejectable)
            || !subsample_ok(&s.absorbed, &absorbable)
        {
            return Err(Error::Inconsistent(format!("iteration {i}: pivot sets of {v} differ from the graph")));
        }

        masks.set(r, true);
        visit(i, r, &alive, &claimed, &masks)?;
        masks.set(r, false);

        for &w in &s.absorbable {
            claimed[w] = true;
        }
        for &u in &s.cluster {
            alive[u] = false;
        }
        remaining -= s.cluster.len();
    }
    if remaining != 0 {
        return Err(Error::Inconsistent(format!("{remaining} vertices never removed from V")));
    }
    Ok(())
}

/// Replays the charging scheme over `trace`, returning every individual charge.
pub fn charge_events<T: Scalar>(g: &Graph, trace: &ExecutionTrace, params: &Params<T>) -> Result<Vec<ChargeEvent<T>>> {
    params.validate()?;
    let clustering = trace.clustering()?;
    let one = T::one();
    let (eps, delta) = (params.epsilon, params.delta);
    let ejected_rate = T::lit(2.0) * delta / (one - T::lit(1.5) * delta);
    let twin_bonus = eps / (one - eps);

    let mut events = Vec::new();
    replay(g, trace, params, |i, r, alive, claimed, m| {
        let v = r.pivot;
        let s = &r.sets;
        let mut emit = |line, triangle, amount| {
            events.push(ChargeEvent { iteration: i, line, triangle, amount });
        };

        for (j, &u) in s.cluster.iter().enumerate() {
            for &w in &s.cluster[j + 1..] {
                if u == v || w == v || g.has_edge(u, w) {
                    continue;
                }
                if !m.ejected[u] && !m.ejected[w] {
                    emit(ChargeLine::InternalKept, BadTriangle::new(v, u, w), one);
                } else {
                    emit(ChargeLine::InternalEjected, BadTriangle::new(v, u, w), ejected_rate);
                }
            }
        }

        let light = params.is_light(s.absorbable.len(), s.cluster.len());
        for &u in &s.cluster {
            for &w in g.neighbors(u) {
                if !alive[w] || m.cluster[w] || claimed[w] {
                    continue;
                }
                let t = BadTriangle::new(v, u, w);
                if light {
                    if !m.absorbable[w] {
                        emit(ChargeLine::Outward, t, one);
                    } else if m.absorbed[w] {
                        emit(ChargeLine::OutwardAbsorbed, t, delta);
                    } else {
                        emit(ChargeLine::OutwardUnabsorbed, t, one + twin_bonus);
                    }
                } else if !clustering.same_cluster(u, w) {
                    if !m.absorbable[w] {
                        emit(ChargeLine::HeavyOutward, t, one);
                    } else {
                        emit(ChargeLine::HeavyNearTwin, t, one - twin_bonus);
                    }
                }
            }
        }

        // A single near twin cannot form a (w, x) pair, so |A_v| − 1 ≥ 1 below.
        if !light && s.absorbable.len() >= 2 {
            let amount = T::lit(5.0) * twin_bonus / T::from_count(s.absorbable.len() - 1);
            for &u in &s.cluster {
                if u == v {
                    continue;
                }
                let twins: Vec<Vertex> = g.neighbors(u).iter().copied().filter(|&w| m.absorbable[w]).collect();
                for (j, &w) in twins.iter().enumerate() {
                    for &x in &twins[j + 1..] {
                        if !g.has_edge(w, x) {
                            emit(ChargeLine::NonLocal, BadTriangle::new(u, w, x), amount);
                        }
                    }
                }
            }
        }
        Ok(())
    })?;
    Ok(events)
}

/// The charge vector `y` for a trace of [`run_modified_pivot`] on `g`.
pub fn compute_charges<T: Scalar>(g: &Graph, trace: &ExecutionTrace, params: &Params<T>) -> Result<ChargeVector<T>> {
    let mut y = ChargeVector::new();
    for e in charge_events(g, trace, params)? {
        y.add(e.triangle, e.amount);
    }
    Ok(y)
}

/// Outcome of comparing total charge against the clustering cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dominance<T> {
    pub holds: bool,
    /// `Σ y_t − cost`.
    pub margin: T,
    pub total_charge: T,
    pub cost: usize,
}

/// Checks `Σ_t y_t ≥ cost(C)` for the clustering of `trace`.
///
/// Floating-point summation error is tolerated up to `len(y) · ε_mach · Σ y`.
pub fn verify_charge_dominance<T: Scalar>(
    g: &Graph,
    trace: &ExecutionTrace,
    charges: &ChargeVector<T>,
) -> Result<Dominance<T>> {
    let cost = clustering_cost(g, &trace.clustering()?);
    let total = charges.total();
    let margin = total - T::from_count(cost);
    let slack = T::from_count(charges.len() + 1) * T::epsilon() * total.max(T::one());
    Ok(Dominance { holds: margin >= -slack, margin, total_charge: total, cost })
}

/// Per-line charge totals of one iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LineTotals<T>([T; 8]);

impl<T: Scalar> LineTotals<T> {
    pub fn get(&self, line: ChargeLine) -> T {
        self.0[line.index()]
    }

    fn add(&mut self, line: ChargeLine, amount: T) {
        self.0[line.index()] += amount;
    }
}

/// Mistake counts by type and charge totals by line for one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationAudit<T> {
    pub iteration: usize,
    pub pivot: Vertex,
    /// `|A_v| ≤ k|C_v|`.
    pub light: bool,
    /// `counts[j]` is the number of type `j + 1` mistakes.
    pub counts: [usize; 7],
    pub lines: LineTotals<T>,
}

/// A per-iteration inequality between mistakes and charges that failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityViolation {
    pub iteration: usize,
    pub inequality: String,
    pub mistakes: usize,
    pub charge: f64,
}

impl<T: Scalar> IterationAudit<T> {
    pub fn mistakes(&self) -> usize {
        self.counts.iter().sum()
    }

    /// The per-iteration inequalities "mistakes of these types ≤ charge of
    /// these lines" that together give charge dominance.
    pub fn inequalities(&self) -> Vec<(&'static str, usize, T)> {
        use ChargeLine::*;
        let c = |types: &[usize]| types.iter().map(|&j| self.counts[j - 1]).sum::<usize>();
        let y = |lines: &[ChargeLine]| lines.iter().map(|&l| self.lines.get(l)).sum::<T>();
        let mut out = vec![
            ("c1 <= internal_kept", c(&[1]), y(&[InternalKept])),
            ("c2 <= internal_ejected", c(&[2]), y(&[InternalEjected])),
        ];
        if self.light {
            out.push(("c3 <= outward", c(&[3]), y(&[Outward])));
            out.push(("c4 + c5 <= outward_absorbed", c(&[4, 5]), y(&[OutwardAbsorbed])));
            out.push(("c6 + c7 <= outward_unabsorbed", c(&[6, 7]), y(&[OutwardUnabsorbed])));
        } else {
            out.push(("c3 <= heavy_outward", c(&[3]), y(&[HeavyOutward])));
            out.push((
                "c4 + c5 + c6 + c7 <= heavy_near_twin + non_local",
                c(&[4, 5, 6, 7]),
                y(&[HeavyNearTwin, NonLocal]),
            ));
        }
        out
    }

    pub fn violations(&self) -> Vec<InequalityViolation> {
        self.inequalities()
            .into_iter()
            .filter(|&(_, mistakes, charge)| {
                let slack = T::lit(64.0) * T::epsilon() * charge.max(T::one());
                T::from_count(mistakes) > charge + slack
            })
            .map(|(name, mistakes, charge)| InequalityViolation {
                iteration: self.iteration,
                inequality: name.to_string(),
                mistakes,
                charge: charge.as_f64(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MistakeReport<T> {
    pub iterations: Vec<IterationAudit<T>>,
    /// Mistake counts by type summed over iterations.
    pub totals: [usize; 7],
}

impl<T: Scalar> MistakeReport<T> {
    pub fn total_mistakes(&self) -> usize {
        self.totals.iter().sum()
    }

    pub fn violations(&self) -> Vec<InequalityViolation> {
        self.iterations.iter().flat_map(|a| a.violations()).collect()
    }
}

/// Types `1..=7` whose condition `(x, z)` satisfies in either orientation.
fn matching_types(g: &Graph, x: Vertex, z: Vertex, alive: &[bool], claimed: &[bool], m: &Masks) -> Vec<u8> {
    let edge = g.has_edge(x, z);
    let kept = |a: Vertex| m.cluster[a] && !m.ejected[a];
    let later = |a: Vertex| alive[a] && !m.cluster[a] && !m.absorbable[a] && !claimed[a];
    let outside_merged = |a: Vertex| alive[a] && !m.cluster[a] && !m.absorbed[a];
    let unabsorbed = |a: Vertex| m.absorbable[a] && !m.absorbed[a];

    let conditions: [&dyn Fn(Vertex, Vertex) -> bool; 7] = [
        &|a, b| !edge && kept(a) && kept(b),
        &|a, b| edge && m.ejected[a] && (m.cluster[b] || m.absorbed[b]),
        &|a, b| edge && m.cluster[a] && later(b),
        &|a, b| !edge && m.absorbed[a] && m.absorbed[b],
        &|a, b| (edge && m.absorbed[a] && outside_merged(b)) || (!edge && m.absorbed[a] && kept(b)),
        &|a, b| edge && unabsorbed(a) && m.cluster[b],
        &|a, b| edge && unabsorbed(a) && outside_merged(b),
    ];
    (1..=7u8).zip(conditions).filter(|(_, cond)| cond(x, z) || cond(z, x)).map(|(j, _)| j).collect()
}

/// Classifies every mistake of every iteration into exactly one type and
/// collects the per-line charges of the same iteration.
///
/// The mistakes of an iteration are the disagreeing pairs with both
/// endpoints unclustered at its start and at least one endpoint in
/// `C_v ∪ A_v`. Summed over iterations they account for the whole cost.
pub fn classify_mistakes<T: Scalar>(g: &Graph, trace: &ExecutionTrace, params: &Params<T>) -> Result<MistakeReport<T>> {
    let clustering: Clustering = trace.clustering()?;
    let mut lines = vec![LineTotals::<T>::default(); trace.iterations.len()];
    for e in charge_events(g, trace, params)? {
        lines[e.iteration].add(e.line, e.amount);
    }

    let n = g.n();
    let mut iterations = Vec::with_capacity(trace.iterations.len());
    let mut totals = [0usize; 7];
    replay(g, trace, params, |i, r, alive, claimed, m| {
        let fresh = |a: Vertex| (m.cluster[a] || m.absorbable[a]) && !claimed[a];
        let newly: Vec<Vertex> =
            r.sets.cluster.iter().chain(&r.sets.absorbable).copied().filter(|&a| !claimed[a]).collect();
        let mut counts = [0usize; 7];
        for &x in &newly {
            for z in 0..n {
                if z == x || !alive[z] || claimed[z] || (fresh(z) && z < x) {
                    continue;
                }
                let mistake = g.has_edge(x, z) != clustering.same_cluster(x, z);
                if !mistake {
                    continue;
                }
                let matched = matching_types(g, x, z, alive, claimed, m);
                if matched.len() != 1 {
                    return Err(Error::ClassificationViolation { iteration: i, x, z, matched });
                }
                counts[matched[0] as usize - 1] += 1;
            }
        }
        for (t, c) in totals.iter_mut().zip(counts) {
            *t += c;
        }
        iterations.push(IterationAudit {
            iteration: i,
            pivot: r.pivot,
            light: params.is_light(r.sets.absorbable.len(), r.sets.cluster.len()),
            counts,
            lines: lines[i],
        });
        Ok(())
    })?;
    Ok(MistakeReport { iterations, totals })
}

/// Monte-Carlo estimate of `E[y_(a,b)]` for one pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairWidth<T> {
    pub u: Vertex,
    pub v: Vertex,
    pub mean: T,
    pub se: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate<T> {
    pub n: usize,
    pub trials: usize,
    /// Every unordered pair, lexicographically.
    pub pairs: Vec<PairWidth<T>>,
}

impl<T: Scalar> WidthEstimate<T> {
    /// Pair with the largest estimated mean.
    pub fn max(&self) -> Option<&PairWidth<T>> {
        self.pairs.iter().max_by(|a, b| a.mean.partial_cmp(&b.mean).unwrap_or(std::cmp::Ordering::Equal))
    }

    pub fn mean_over_pairs(&self) -> T {
        if self.pairs.is_empty() {
            return T::zero();
        }
        self.pairs.iter().map(|p| p.mean).sum::<T>() / T::from_count(self.pairs.len())
    }

    /// Pairs whose mean exceeds `bound` by more than `z` standard errors.
    pub fn exceeding(&self, bound: T, z: T) -> Vec<PairWidth<T>> {
        self.pairs.iter().filter(|p| p.mean > bound + z * p.se).copied().collect()
    }

    /// Counts of pair means in `bins` equal-width buckets over `[0, upper)`;
    /// means at or above `upper` land in the last bucket.
    pub fn histogram(&self, bins: usize, upper: T) -> Vec<usize> {
        let mut out = vec![0; bins.max(1)];
        let last = out.len() - 1;
        for p in &self.pairs {
            let b = (p.mean / upper * T::from_count(out.len())).floor_count().min(last);
            out[b] += 1;
        }
        out
    }
}

/// Seed of trial `i` in a run seeded with `seed`.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    seed ^ i as u64
}

const TRIAL_CHUNK: usize = 128;

/// Runs ModifiedPivot and the charging scheme on `trials` independent tapes and
/// aggregates `y_(a,b)` for every pair. The result does not depend on the
/// number of worker threads.
pub fn estimate_pair_width<T: Scalar>(
    g: &Graph,
    params: &Params<T>,
    trials: usize,
    seed: u64,
) -> Result<WidthEstimate<T>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    params.validate()?;
    let n = g.n();
    let pairs = n * n.saturating_sub(1) / 2;
    let chunks: Vec<(usize, usize)> =
        (0..trials).step_by(TRIAL_CHUNK).map(|lo| (lo, (lo + TRIAL_CHUNK).min(trials))).collect();

    let partials: Vec<(Vec<T>, Vec<T>)> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut sum = vec![T::zero(); pairs];
            let mut sumsq = vec![T::zero(); pairs];
            for i in lo..hi {
                let tape = RandomTape::new(n, trial_seed(seed, i));
                let (_, trace) = run_modified_pivot(g, &tape, params)?;
                let y = compute_charges(g, &trace, params)?.pair_totals(n);
                for (k, &val) in y.iter().enumerate() {
                    if val != T::zero() {
                        sum[k] += val;
                        sumsq[k] += val * val;
                    }
                }
            }
            Ok((sum, sumsq))
        })
        .collect::<Result<_>>()?;

    let mut sum = vec![T::zero(); pairs];
    let mut sumsq = vec![T::zero(); pairs];
    for (s, q) in partials {
        for k in 0..pairs {
            sum[k] += s[k];
            sumsq[k] += q[k];
        }
    }
    let count = T::from_count(trials);
    let mut out = Vec::with_capacity(pairs);
    for a in 0..n {
        for b in a + 1..n {
            let k = pair_index(n, a, b);
            let mean = sum[k] / count;
            let se = if trials > 1 {
                let var = (sumsq[k] - count * mean * mean) / (count - T::one());
                (var.max(T::zero()) / count).sqrt()
            } else {
                T::zero()
            };
            out.push(PairWidth { u: a, v: b, mean, se });
        }
    }
    Ok(WidthEstimate { n, trials, pairs: out })
}
