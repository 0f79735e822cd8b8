use corrclust::charge::{classify_mistakes, compute_charges, verify_charge_dominance, ChargeLine};
use corrclust::params::Params;
use corrclust::{charge_events, clustering_cost, run_modified_pivot, Graph, RandomTape};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn er(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.flip_edge(u, v).unwrap();
            }
        }
    }
    g
}

/// A few near-duplicate groups with noise, so absorption actually happens.
fn planted(groups: usize, size: usize, noise: f64, seed: u64) -> Graph {
    let n = groups * size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            let same = u / size == v / size;
            if same != rng.gen_bool(noise) {
                g.flip_edge(u, v).unwrap();
            }
        }
    }
    g
}

fn param_sets() -> Vec<Params<f64>> {
    vec![
        Params::default(),
        Params::extreme(),
        Params::from_f64(0.05, 0.2, 2.0).unwrap(),
        Params::from_f64(0.05, 0.2, 1.0).unwrap(),
    ]
}

fn audit(g: &Graph, seed: u64, p: &Params<f64>) {
    let tape = RandomTape::new(g.n(), seed);
    let (clustering, trace) = run_modified_pivot(g, &tape, p).unwrap();
    let y = compute_charges(g, &trace, p).unwrap();
    let d = verify_charge_dominance(g, &trace, &y).unwrap();
    assert!(d.holds, "seed {seed}, {p:?}: charge {} < cost {}", d.total_charge, d.cost);
    let report = classify_mistakes(g, &trace, p).unwrap();
    assert_eq!(report.total_mistakes(), clustering_cost(g, &clustering));
    let v = report.violations();
    assert!(v.is_empty(), "seed {seed}, {p:?}: {v:?}");
}

#[test]
fn dominance_on_random_graphs() {
    for seed in 0..200 {
        let g = er(30, 0.4, seed);
        for p in &param_sets() {
            audit(&g, seed, p);
        }
    }
}

#[test]
fn dominance_on_planted_graphs() {
    for seed in 0..60 {
        let g = planted(3, 12, 0.03, seed);
        for p in &param_sets() {
            audit(&g, seed, p);
        }
    }
}

#[test]
fn charges_are_local_to_the_pivot() {
    let p = Params::<f64>::extreme();
    for seed in 0..50 {
        let g = planted(2, 15, 0.05, seed);
        let (_, trace) = run_modified_pivot(&g, &RandomTape::new(g.n(), seed), &p).unwrap();
        for e in charge_events(&g, &trace, &p).unwrap() {
            assert!(g.is_bad_triangle(&e.triangle));
            assert!(e.amount > 0.0);
            let v = trace.iterations[e.iteration].pivot;
            assert_eq!(e.triangle.contains(v), e.line.contains_pivot(), "{e:?}");
        }
    }
}

#[test]
fn f32_charges_track_f64() {
    let g = planted(3, 10, 0.05, 3);
    let p64 = Params::<f64>::from_f64(0.05, 0.2, 2.0).unwrap();
    let p32 = Params::<f32>::new(0.05, 0.2, 2.0).unwrap();
    let tape = RandomTape::new(g.n(), 8);
    let (c64, t64) = run_modified_pivot(&g, &tape, &p64).unwrap();
    let (c32, t32) = run_modified_pivot(&g, &tape, &p32).unwrap();
    assert_eq!(c64, c32);
    let y64 = compute_charges(&g, &t64, &p64).unwrap().total();
    let y32 = compute_charges(&g, &t32, &p32).unwrap().total();
    assert!((y64 - y32 as f64).abs() <= 1e-4 * y64.max(1.0));
    assert!(verify_charge_dominance(&g, &t32, &compute_charges(&g, &t32, &p32).unwrap()).unwrap().holds);
}

/// `K_{a,b}` with each pair flipped with probability `noise`.
fn noisy_bipartite(a: usize, b: usize, noise: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(a + b);
    for u in 0..a + b {
        for v in u + 1..a + b {
            let across = (u < a) != (v < a);
            if across != rng.gen_bool(noise) {
                g.flip_edge(u, v).unwrap();
            }
        }
    }
    g
}

#[test]
fn every_line_is_exercised() {
    let mut seen = std::collections::BTreeSet::new();
    let heavy = Params::<f64>::from_f64(1.0 / 14.0, 2.0 / 7.0, 1.0).unwrap();
    for seed in 0..40 {
        let cases =
            [(planted(2, 40, 0.003, seed), Params::<f64>::extreme()), (noisy_bipartite(28, 60, 0.002, seed), heavy)];
        for (g, p) in cases {
            audit(&g, seed, &p);
            let (_, trace) = run_modified_pivot(&g, &RandomTape::new(g.n(), seed), &p).unwrap();
            for e in charge_events(&g, &trace, &p).unwrap() {
                seen.insert(e.line);
            }
        }
    }
    assert_eq!(seen.into_iter().collect::<Vec<_>>(), ChargeLine::ALL.to_vec());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn audit_holds_on_small_graphs(
        n in 1usize..16,
        p in 0.0f64..1.0,
        graph_seed in any::<u64>(),
        tape_seed in any::<u64>(),
        which in 0usize..4,
    ) {
        let g = er(n, p, graph_seed);
        audit(&g, tape_seed, &param_sets()[which]);
    }
}
