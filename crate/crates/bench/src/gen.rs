//! Instance families and flip-stream generation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use corrclust::{Error, Flip, Graph, Result, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// ChaCha stream used for instance coins, kept apart from the tape stream
/// so a graph and a tape built from the same seed are independent.
const INSTANCE_STREAM: u64 = 1;
const FLIP_STREAM: u64 = 2;

/// Two `half`-cliques on `0..half` and `half..2·half` joined by the edge `(0, half)`.
pub fn two_cliques(half: usize) -> Result<Graph> {
    if half < 2 {
        return Err(Error::InvalidArgument(format!("two-cliques needs half >= 2, got {half}")));
    }
    let n = 2 * half;
    let mut edges = Vec::with_capacity(half * (half - 1) + 1);
    for base in [0, half] {
        for u in base..base + half {
            for v in u + 1..base + half {
                edges.push((u, v));
            }
        }
    }
    edges.push((0, half));
    Graph::from_edges(n, edges)
}

/// `K_n` without the edge `(0, 1)`.
pub fn complete_minus_edge(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("complete-minus-edge needs n >= 2, got {n}")));
    }
    let mut g = Graph::complete(n);
    g.flip_edge(0, 1)?;
    Ok(g)
}

/// `K_{n1,n2}` with parts `0..n1` and `n1..n1+n2`.
pub fn complete_bipartite(n1: usize, n2: usize) -> Result<Graph> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument(format!("bipartite parts must be nonempty, got {n1} and {n2}")));
    }
    let edges = (0..n1).flat_map(|a| (n1..n1 + n2).map(move |b| (a, b)));
    Graph::from_edges(n1 + n2, edges)
}

/// `G(n, p)`, a pure function of `(n, p, seed)`.
pub fn er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INSTANCE_STREAM);
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.flip_edge(u, v)?;
            }
        }
    }
    Ok(g)
}

/// Edge set with O(1) uniform sampling and removal.
struct EdgePool {
    list: Vec<(Vertex, Vertex)>,
    pos: HashMap<(Vertex, Vertex), usize>,
}

impl EdgePool {
    fn new(g: &Graph) -> Self {
        let list: Vec<_> = g.edges().collect();
        let pos = list.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Self { list, pos }
    }

    fn insert(&mut self, e: (Vertex, Vertex)) {
        self.pos.insert(e, self.list.len());
        self.list.push(e);
    }

    fn remove(&mut self, e: (Vertex, Vertex)) {
        let i = self.pos.remove(&e).expect("edge in pool");
        self.list.swap_remove(i);
        if let Some(&moved) = self.list.get(i) {
            self.pos.insert(moved, i);
        }
    }
}

/// `length` flips starting from `start`. Each flip is an insertion of a
/// uniform non-edge with probability `bias` and a deletion of a uniform edge
/// otherwise; when the chosen kind is impossible the other one is used.
pub fn flip_stream(start: &Graph, length: usize, seed: u64, bias: f64) -> Result<Vec<Flip>> {
    if !(0.0..=1.0).contains(&bias) {
        return Err(Error::InvalidArgument(format!("bias {bias} outside [0, 1]")));
    }
    let n = start.n();
    if length > 0 && n < 2 {
        return Err(Error::InvalidArgument("flip stream needs at least 2 vertices".into()));
    }
    let pairs = start.pair_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(FLIP_STREAM);
    let mut pool = EdgePool::new(start);
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        let insert = match (pool.list.is_empty(), pool.list.len() == pairs) {
            (true, _) => true,
            (_, true) => false,
            _ => rng.gen_bool(bias),
        };
        let e = if insert {
            loop {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                let e = (u.min(v), u.max(v));
                if u != v && !pool.pos.contains_key(&e) {
                    break e;
                }
            }
        } else {
            pool.list[rng.gen_range(0..pool.list.len())]
        };
        if insert {
            pool.insert(e);
        } else {
            pool.remove(e);
        }
        out.push(Flip::new(e.0, e.1));
    }
    Ok(out)
}

/// An instance family with its size parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InstanceSpec {
    TwoCliques { half: usize },
    CompleteMinusEdge { n: usize },
    CompleteBipartite { n1: usize, n2: usize },
    Er { n: usize, p: f64 },
}

impl InstanceSpec {
    pub fn n(&self) -> usize {
        match *self {
            InstanceSpec::TwoCliques { half } => 2 * half,
            InstanceSpec::CompleteMinusEdge { n } | InstanceSpec::Er { n, .. } => n,
            InstanceSpec::CompleteBipartite { n1, n2 } => n1 + n2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() < 2 {
            return Err(Error::InvalidArgument(format!("instance {self} has fewer than 2 vertices")));
        }
        Ok(())
    }

    /// The graph; only `Er` uses the seed.
    pub fn build(&self, seed: u64) -> Result<Graph> {
        match *self {
            InstanceSpec::TwoCliques { half } => two_cliques(half),
            InstanceSpec::CompleteMinusEdge { n } => complete_minus_edge(n),
            InstanceSpec::CompleteBipartite { n1, n2 } => complete_bipartite(n1, n2),
            InstanceSpec::Er { n, p } => er(n, p, seed),
        }
    }

    /// Builds the family named `name` from CLI-style size arguments.
    /// `n` is the total vertex count, except for bipartite where it is `n1`.
    pub fn from_parts(name: &str, n: usize, n2: Option<usize>, p: Option<f64>) -> Result<Self> {
        let family: Family = name.parse()?;
        let spec = match family {
            Family::TwoCliques => {
                if !n.is_multiple_of(2) {
                    return Err(Error::InvalidArgument(format!("two-cliques needs an even n, got {n}")));
                }
                InstanceSpec::TwoCliques { half: n / 2 }
            }
            Family::CompleteMinusEdge => InstanceSpec::CompleteMinusEdge { n },
            Family::CompleteBipartite => InstanceSpec::CompleteBipartite {
                n1: n,
                n2: n2.ok_or_else(|| Error::InvalidArgument("bipartite needs --n2".into()))?,
            },
            Family::Er => InstanceSpec::Er { n, p: p.ok_or_else(|| Error::InvalidArgument("er needs --p".into()))? },
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            InstanceSpec::TwoCliques { half } => write!(f, "two-cliques(half={half})"),
            InstanceSpec::CompleteMinusEdge { n } => write!(f, "complete-minus-edge(n={n})"),
            InstanceSpec::CompleteBipartite { n1, n2 } => write!(f, "bipartite(n1={n1}, n2={n2})"),
            InstanceSpec::Er { n, p } => write!(f, "er(n={n}, p={p})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    TwoCliques,
    CompleteMinusEdge,
    CompleteBipartite,
    Er,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-cliques" => Ok(Family::TwoCliques),
            "complete-minus-edge" | "kn-minus-edge" => Ok(Family::CompleteMinusEdge),
            "bipartite" | "complete-bipartite" => Ok(Family::CompleteBipartite),
            "er" => Ok(Family::Er),
            other => Err(Error::InvalidArgument(format!(
                "unknown instance `{other}`; expected two-cliques, complete-minus-edge, bipartite or er"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cliques_counts() {
        assert!(two_cliques(1).is_err());
        let g = two_cliques(2).unwrap();
        assert_eq!((g.n(), g.edge_count()), (4, 3));
        let g = two_cliques(3).unwrap();
        assert_eq!((g.n(), g.edge_count()), (6, 7));
        assert!(g.has_edge(0, 3) && g.check_invariants());
    }

    #[test]
    fn complete_minus_edge_counts() {
        assert!(complete_minus_edge(1).is_err());
        let g = complete_minus_edge(3).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(!g.has_edge(0, 1));
        assert_eq!(complete_minus_edge(6).unwrap().edge_count(), 14);
    }

    #[test]
    fn bipartite_counts() {
        assert_eq!(complete_bipartite(1, 1).unwrap().edge_count(), 1);
        let g = complete_bipartite(2, 3).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!(!g.has_edge(0, 1) && !g.has_edge(2, 3) && g.has_edge(1, 4));
        assert!(complete_bipartite(0, 3).is_err());
    }

    #[test]
    fn er_extremes_and_determinism() {
        assert_eq!(er(10, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(er(10, 1.0, 1).unwrap().edge_count(), 45);
        assert_eq!(er(30, 0.3, 5).unwrap(), er(30, 0.3, 5).unwrap());
        assert!(er(5, 1.5, 0).is_err());
    }

    #[test]
    fn er_edge_count_concentrates() {
        // Binomial(4950, 1/2): mean 2475, sd ≈ 35.2
        for seed in 0..20 {
            let m = er(100, 0.5, seed).unwrap().edge_count() as f64;
            assert!((m - 2475.0).abs() <= 4.0 * 35.18, "seed {seed}: {m}");
        }
    }

    #[test]
    fn flip_stream_properties() {
        let g = er(40, 0.1, 3).unwrap();
        assert!(flip_stream(&g, 0, 1, 0.5).unwrap().is_empty());
        let a = flip_stream(&g, 300, 9, 0.5).unwrap();
        assert_eq!(a, flip_stream(&g, 300, 9, 0.5).unwrap());
        assert_ne!(a, flip_stream(&g, 300, 10, 0.5).unwrap());

        let mut h = g.clone();
        for f in &a {
            h.flip_edge(f.u, f.v).unwrap();
        }
        for f in a.iter().rev() {
            h.flip_edge(f.u, f.v).unwrap();
        }
        assert_eq!(h, g);
    }

    #[test]
    fn flip_stream_bias_controls_direction() {
        let g = er(50, 0.2, 1).unwrap();
        let count_after = |bias| {
            let mut h = g.clone();
            for f in flip_stream(&g, 200, 4, bias).unwrap() {
                h.flip_edge(f.u, f.v).unwrap();
            }
            h.edge_count()
        };
        assert_eq!(count_after(1.0), g.edge_count() + 200);
        assert_eq!(count_after(0.0), g.edge_count() - 200);
        // empty graph forces an insertion, then bias 0 deletes it again
        let e = Graph::new(5);
        let mut h = e.clone();
        let inserted: Vec<bool> =
            flip_stream(&e, 4, 0, 0.0).unwrap().iter().map(|f| h.flip_edge(f.u, f.v).unwrap()).collect();
        assert_eq!(inserted, [true, false, true, false]);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(
            InstanceSpec::from_parts("two-cliques", 100, None, None).unwrap(),
            InstanceSpec::TwoCliques { half: 50 }
        );
        assert!(InstanceSpec::from_parts("two-cliques", 7, None, None).is_err());
        assert!(InstanceSpec::from_parts("er", 10, None, None).is_err());
        assert!(InstanceSpec::from_parts("bipartite", 3, None, None).is_err());
        assert!(InstanceSpec::from_parts("nope", 3, None, None).is_err());
        assert!(InstanceSpec::from_parts("complete-minus-edge", 1, None, None).is_err());
        assert_eq!(InstanceSpec::from_parts("bipartite", 2, Some(3), None).unwrap().n(), 5);
    }
}
