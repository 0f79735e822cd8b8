//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any hard criterion fails. Criterion 8 is soft: a failure
//! prints the affected-set distribution without failing the run.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use corrclust::params::WIDTH_BOUND;
use corrclust::{clustering_cost, run_modified_pivot, Graph, Params, RandomTape};
use corrclust_bench::experiment::{self, locality_bound, Summary};
use corrclust_bench::{complete_bipartite, complete_minus_edge, er, flip_stream, two_cliques};

struct Line {
    id: usize,
    pass: bool,
    soft: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

impl Line {
    fn print(&self) {
        let verdict = match (self.pass, self.soft) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (soft)",
        };
        println!(
            "criterion {}: {verdict} [{:.1}s / {}s] {}",
            self.id,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs(),
            self.detail
        );
    }
}

fn timed<F: FnOnce() -> (bool, String)>(id: usize, limit_secs: u64, soft: bool, f: F) -> Line {
    let start = Instant::now();
    let (ok, detail) = f();
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(limit_secs);
    Line { id, pass: ok && elapsed < limit, soft, detail, elapsed, limit }
}

/// Expected Pivot cost when a bridge-like pair costs `bad` with
/// probability `2/n` and 1 otherwise.
fn two_point_mean(n: usize, bad: f64) -> f64 {
    let n = n as f64;
    (1.0 - 2.0 / n) + (2.0 / n) * bad
}

fn criterion_1() -> (bool, String) {
    let g = two_cliques(50).unwrap();
    let s = experiment::static_costs(&g, &Params::default(), 10_000, 1).unwrap();
    let target = two_point_mean(100, 98.0);
    let pivot_ok = s.pivot.near(target, 3.0);
    let modified_ok = s.modified.at_most(2.0, 3.0);
    (
        pivot_ok && modified_ok,
        format!(
            "pivot {:.4} ± {:.4} vs {target:.4}; modified {:.4} ± {:.4} vs <= 2",
            s.pivot.mean, s.pivot.se, s.modified.mean, s.modified.se
        ),
    )
}

fn criterion_2() -> (bool, String) {
    let g = complete_minus_edge(400).unwrap();
    let s = experiment::static_costs(&g, &Params::default(), 1000, 2).unwrap();
    let target = two_point_mean(400, 398.0);
    let exact = s.modified.min == 1.0 && s.modified.max == 1.0;
    let pivot_ok = s.pivot.near(target, 3.0);
    (
        exact && pivot_ok,
        format!(
            "modified cost range [{}, {}] over {} tapes; pivot {:.4} ± {:.4} vs {target:.4}",
            s.modified.min, s.modified.max, s.modified.count, s.pivot.mean, s.pivot.se
        ),
    )
}

/// The dominance and taxonomy suite across all four families.
fn audit_suite() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for half in [2, 3, 5, 10, 25, 50] {
        out.push((format!("two-cliques({half})"), two_cliques(half).unwrap()));
    }
    for n in [4, 10, 50, 100, 200] {
        out.push((format!("K_{n}-e"), complete_minus_edge(n).unwrap()));
    }
    for n1 in [2, 4, 8] {
        for ratio in [1, 5, 20] {
            out.push((format!("K_{n1},{}", n1 * ratio), complete_bipartite(n1, n1 * ratio).unwrap()));
        }
    }
    for n in [10, 30, 50] {
        for p in [0.1, 0.5, 0.9] {
            for seed in 0..3 {
                out.push((format!("er({n}, {p}, #{seed})"), er(n, p, seed).unwrap()));
            }
        }
    }
    out
}

const AUDIT_TAPES: usize = 110;

struct AuditTotals {
    runs: usize,
    dominance: usize,
    classification: usize,
    inequality: usize,
    first: Option<String>,
}

fn run_audit_suite() -> Vec<(String, AuditTotals)> {
    let suite = audit_suite();
    let param_sets = [
        ("default", Params::default()),
        ("(1/14, 2/7, 1)", Params::extreme()),
        ("(0.05, 0.2, 1)", Params::from_f64(0.05, 0.2, 1.0).unwrap()),
    ];
    param_sets
        .iter()
        .map(|(name, p)| {
            let mut t = AuditTotals { runs: 0, dominance: 0, classification: 0, inequality: 0, first: None };
            for (i, (label, g)) in suite.iter().enumerate() {
                let a = experiment::audit(g, p, AUDIT_TAPES, 1000 + i as u64).unwrap();
                t.runs += a.runs;
                t.dominance += a.dominance_failures;
                t.classification += a.classification_failures;
                t.inequality += a.inequality_failures;
                if t.first.is_none() {
                    t.first = a.first_failure.map(|f| format!("{label}: {f}"));
                }
            }
            (name.to_string(), t)
        })
        .collect()
}

fn criterion_3(results: &[(String, AuditTotals)]) -> (bool, String) {
    let runs: usize = results.iter().map(|(_, t)| t.runs).sum();
    let fails: usize = results.iter().map(|(_, t)| t.dominance).sum();
    let per: Vec<String> =
        results.iter().map(|(n, t)| format!("{n}: {}/{} hold", t.runs - t.dominance, t.runs)).collect();
    let default_runs = results[0].1.runs;
    (fails == 0 && default_runs >= 5000, format!("{runs} runs, {fails} dominance failures ({})", per.join("; ")))
}

fn criterion_4(results: &[(String, AuditTotals)]) -> (bool, String) {
    let c: usize = results.iter().map(|(_, t)| t.classification).sum();
    let i: usize = results.iter().map(|(_, t)| t.inequality).sum();
    let first = results.iter().find_map(|(_, t)| t.first.clone());
    let mut detail = format!("{c} classification violations, {i} inequality violations");
    if let Some(f) = first {
        detail.push_str(&format!("; first: {f}"));
    }
    (c == 0 && i == 0, detail)
}

fn criterion_5() -> (bool, String) {
    let g = er(50, 0.5, 5).unwrap();
    let w = experiment::width(&g, &Params::default(), 20_000, 5).unwrap();
    let max = w.max_pair.clone().unwrap();
    (
        w.pairs_exceeding == 0,
        format!(
            "max pair ({}, {}) E[y] = {:.4} ± {:.4} vs {WIDTH_BOUND}; {} pairs above bound + 3 SE; mean over pairs {:.4}",
            max.u, max.v, max.mean, max.se, w.pairs_exceeding, w.mean_over_pairs
        ),
    )
}

fn criterion_6() -> (bool, String) {
    let mut failures = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for i in 0..50u64 {
        let p = [0.3, 0.5, 0.7][i as usize % 3];
        let g = er(9, p, 600 + i).unwrap();
        let o = experiment::oracle(&g, &Params::default(), 2000, 600 + i).unwrap();
        if let Some(r) = o.ratio {
            worst_ratio = worst_ratio.max(r);
        }
        let sandwich = o.packing_lower_bound <= o.opt && o.modified.min >= o.opt as f64;
        if !o.within_bound || !sandwich {
            failures.push(format!("instance {i}: opt {} mean {:.3} ± {:.3}", o.opt, o.modified.mean, o.modified.se));
        }
    }
    let mut detail = format!("50 instances, worst mean/opt {worst_ratio:.4}, {} outside bound", failures.len());
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    (failures.is_empty(), detail)
}

fn stream_on(g: &Graph, steps: usize, seed: u64) -> experiment::DynamicOutcome {
    let flips = flip_stream(g, steps, seed, 0.5).unwrap();
    experiment::dynamic(g, &Params::default(), &flips, seed, true).unwrap().0
}

fn criterion_7() -> (bool, String) {
    let g = er(200, 0.05, 7).unwrap();
    let d = stream_on(&g, 5000, 7);
    let matches = d.steps - d.mismatches;
    let mut detail = format!("{matches}/{} exact matches", d.steps);
    if let Some(s) = d.first_mismatch {
        detail.push_str(&format!(", first mismatch at step {s}"));
    }
    (d.mismatches == 0 && d.steps == 5000, detail)
}

fn criterion_8() -> (bool, String) {
    let g = er(1000, 0.01, 8).unwrap();
    let flips = flip_stream(&g, 5000, 8, 0.5).unwrap();
    let (d, rows) = experiment::dynamic(&g, &Params::default(), &flips, 8, true).unwrap();
    let micros = Summary::of(&rows.iter().map(|r| r.micros as f64).collect::<Vec<_>>());
    let bound = locality_bound(1000);
    let ok = d.affected.mean <= bound && d.mismatches == 0;
    let mut detail = format!(
        "mean |A| {:.3} (p50 {}, p90 {}, p99 {}, max {}) vs bound {bound:.1}; mean update {:.1} us; {} mismatches",
        d.affected.mean,
        d.affected_percentiles[0],
        d.affected_percentiles[1],
        d.affected_percentiles[2],
        d.affected.max,
        micros.mean,
        d.mismatches
    );
    if !ok {
        let mut hist = [0usize; 8];
        for r in &rows {
            hist[(usize::BITS - r.affected.leading_zeros()).min(7) as usize] += 1;
        }
        detail.push_str(&format!("; |A| histogram by bit length {hist:?}"));
    }
    (ok, detail)
}

/// Hand-simulated spot check that the closed forms above describe the
/// instances: the bridge pivot on two cliques and an endpoint pivot on
/// K_n − e are the only expensive tapes for Pivot.
fn closed_form_sanity() -> bool {
    let g = two_cliques(50).unwrap();
    let mut tape = RandomTape::new(100, 0);
    tape.promote(0);
    let (c, _) = corrclust::run_pivot(&g, &tape).unwrap();
    let bridge = clustering_cost(&g, &c) == 98;
    let (m, _) = run_modified_pivot(&g, &tape, &Params::default()).unwrap();
    bridge && clustering_cost(&g, &m) == 50
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        // `cargo test -- --list` probes test binaries; nothing to list here.
        return ExitCode::SUCCESS;
    }
    assert!(closed_form_sanity(), "closed-form instances do not behave as assumed");

    let mut lines = vec![timed(1, 60, false, criterion_1), timed(2, 120, false, criterion_2)];
    let start = Instant::now();
    let audit = run_audit_suite();
    let audit_time = start.elapsed();
    // one suite run serves both criteria; its time counts against #3
    let mut l3 = timed(3, 300, false, || criterion_3(&audit));
    l3.elapsed += audit_time;
    l3.pass &= l3.elapsed < l3.limit;
    lines.push(l3);
    lines.push(timed(4, 300, false, || criterion_4(&audit)));
    lines.push(timed(5, 600, false, criterion_5));
    lines.push(timed(6, 300, false, criterion_6));
    lines.push(timed(7, 300, false, criterion_7));
    lines.push(timed(8, 300, true, criterion_8));
    for l in &lines {
        l.print();
    }

    let hard_failures = lines.iter().filter(|l| !l.pass && !l.soft).count();
    println!("acceptance: {}/{} criteria pass", lines.iter().filter(|l| l.pass).count(), lines.len());
    if hard_failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
