use corrclust::oracle::{bell_numbers, brute_force_opt, triangle_packing_lower_bound};
use corrclust::params::Params;
use corrclust::{clustering_cost, run_modified_pivot, run_pivot, Clustering, Graph, RandomTape};
use proptest::prelude::*;

/// Tries every label vector in `[0, n)^n`, without any canonical form.
fn naive_opt(g: &Graph) -> usize {
    let n = g.n();
    if n == 0 {
        return 0;
    }
    let mut labels = vec![0usize; n];
    let mut best = usize::MAX;
    loop {
        best = best.min(clustering_cost(g, &Clustering::from_labels(labels.clone())));
        let mut i = 0;
        while i < n {
            labels[i] += 1;
            if labels[i] < n {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

fn graph_from_bits(n: usize, bits: u64) -> Graph {
    let mut g = Graph::new(n);
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            if bits >> (k % 64) & 1 == 1 {
                g.flip_edge(u, v).unwrap();
            }
            k += 1;
        }
    }
    g
}

#[test]
fn partitions_examined_is_bell() {
    let bell = bell_numbers(10);
    for n in 0..=10 {
        let g = graph_from_bits(n, 0x5555_5555_5555);
        assert_eq!(brute_force_opt(&g).unwrap().partitions_examined, bell[n]);
    }
}

#[test]
fn twelve_vertices_is_feasible() {
    let g = graph_from_bits(12, 0x0123_4567_89ab_cdef);
    let r = brute_force_opt(&g).unwrap();
    assert_eq!(r.partitions_examined, 4_213_597);
    assert_eq!(clustering_cost(&g, &r.clustering), r.cost);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn matches_naive_search(n in 0usize..7, bits in any::<u64>()) {
        let g = graph_from_bits(n, bits);
        let r = brute_force_opt(&g).unwrap();
        prop_assert_eq!(r.cost, naive_opt(&g));
        prop_assert_eq!(clustering_cost(&g, &r.clustering), r.cost);
    }

    #[test]
    fn sandwich(n in 0usize..10, bits in any::<u64>(), seed in any::<u64>()) {
        let g = graph_from_bits(n, bits);
        let opt = brute_force_opt(&g).unwrap().cost;
        let tape = RandomTape::new(n, seed);
        prop_assert!(triangle_packing_lower_bound(&g) <= opt);
        let (c, _) = run_pivot(&g, &tape).unwrap();
        prop_assert!(opt <= clustering_cost(&g, &c));
        let (c, _) = run_modified_pivot(&g, &tape, &Params::<f64>::default()).unwrap();
        prop_assert!(opt <= clustering_cost(&g, &c));
    }
}
