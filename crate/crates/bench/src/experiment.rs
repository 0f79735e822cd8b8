//! Experiment configurations and their drivers.
//!
//! Every report is a pure function of its configuration: trial `t` uses the
//! tape seeded with `seed ^ t`, trials run in parallel and are aggregated in
//! trial order. Wall-clock times only appear in the per-update CSV rows.

use std::io::Write;
use std::str::FromStr;

use corrclust::charge::trial_seed;
use corrclust::oracle::{brute_force_opt, triangle_packing_lower_bound, MAX_BRUTE_FORCE_N};
use corrclust::params::WIDTH_BOUND;
use corrclust::{
    classify_mistakes, clustering_cost, compute_charges, estimate_pair_width, run_modified_pivot, run_pivot,
    verify_charge_dominance, DynamicState, Error, Flip, Graph, Params, RandomTape, Result, Vertex,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gen::{flip_stream, InstanceSpec};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Static,
    Dynamic,
    Audit,
    Width,
    Oracle,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Mode::Static),
            "dynamic" => Ok(Mode::Dynamic),
            "audit" => Ok(Mode::Audit),
            "width" => Ok(Mode::Width),
            "oracle" => Ok(Mode::Oracle),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Generated instance; `None` when the graph was loaded from `graph_file`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_file: Option<String>,
    pub params: Params,
    pub mode: Mode,
    /// Tapes for static, audit, width and oracle; ignored by dynamic.
    pub trials: usize,
    pub seed: u64,
    /// Flip-stream length for dynamic.
    pub steps: usize,
    /// Insertion probability of the flip stream.
    pub bias: f64,
    /// Compare against a static recompute after every flip.
    pub verify: bool,
}

impl ExperimentConfig {
    pub fn new(instance: InstanceSpec, mode: Mode) -> Self {
        Self::with_source(Some(instance), None, mode)
    }

    /// Config for a graph read from `path`.
    pub fn for_file(path: impl Into<String>, mode: Mode) -> Self {
        Self::with_source(None, Some(path.into()), mode)
    }

    fn with_source(instance: Option<InstanceSpec>, graph_file: Option<String>, mode: Mode) -> Self {
        Self {
            instance,
            graph_file,
            params: Params::default(),
            mode,
            trials: 1000,
            seed: 0,
            steps: 1000,
            bias: 0.5,
            verify: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = &self.instance {
            i.validate()?;
        }
        self.params.validate()?;
        if self.trials == 0 && self.mode != Mode::Dynamic {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.bias) {
            return Err(Error::InvalidArgument(format!("bias {} outside [0, 1]", self.bias)));
        }
        if let Some(i) = &self.instance {
            if self.mode == Mode::Oracle && i.n() > MAX_BRUTE_FORCE_N {
                return Err(Error::SizeLimit { n: i.n(), max: MAX_BRUTE_FORCE_N });
            }
        }
        Ok(())
    }
}

/// Mean, standard error and range of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub se: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self { count, mean: 0.0, se: 0.0, min: 0.0, max: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let se = if count > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { count, mean, se, min, max }
    }

    pub fn of_counts(xs: &[usize]) -> Self {
        Self::of(&xs.iter().map(|&x| x as f64).collect::<Vec<_>>())
    }

    /// `mean ≤ bound + z·se`.
    pub fn at_most(&self, bound: f64, z: f64) -> bool {
        self.mean <= bound + z * self.se
    }

    /// `|mean − target| ≤ z·se`.
    pub fn near(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.se
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticOutcome {
    pub pivot: Summary,
    pub modified: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOutcome {
    pub runs: usize,
    pub dominance_failures: usize,
    pub classification_failures: usize,
    pub inequality_failures: usize,
    /// `Σ y_t − cost`, over runs.
    pub margin: Summary,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub u: Vertex,
    pub v: Vertex,
    pub mean: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthOutcome {
    pub trials: usize,
    pub bound: f64,
    pub max_pair: Option<PairSummary>,
    pub mean_over_pairs: f64,
    /// Pairs whose mean exceeds the bound by more than 3 standard errors.
    pub pairs_exceeding: usize,
    /// Pair means in ten buckets over `[0, bound)`.
    pub histogram: Vec<usize>,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub opt: usize,
    pub packing_lower_bound: usize,
    pub partitions_examined: u64,
    pub pivot: Summary,
    pub modified: Summary,
    /// Mean ModifiedPivot cost over `opt`; absent when `opt = 0`.
    pub ratio: Option<f64>,
    /// `mean ≤ 2.997·opt + 3·se`.
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicOutcome {
    pub steps: usize,
    pub verified: bool,
    pub mismatches: usize,
    pub first_mismatch: Option<usize>,
    pub affected: Summary,
    /// Affected-set percentiles 50, 90, 99.
    pub affected_percentiles: [usize; 3],
    pub locality_bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Outcome {
    Static(StaticOutcome),
    Dynamic(DynamicOutcome),
    Audit(AuditOutcome),
    Width(WidthOutcome),
    Oracle(OracleOutcome),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub n: usize,
    pub edges: usize,
    /// Deterministic invariant violations (dominance, classification,
    /// dynamic equivalence, oracle sandwich). Nonzero means failure.
    pub violations: usize,
    pub outcome: Outcome,
}

/// One row of the per-update CSV.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateRow {
    pub step: usize,
    pub flip_u: Vertex,
    pub flip_v: Vertex,
    pub affected: usize,
    pub micros: u64,
}

pub fn write_update_csv<W: Write>(out: W, rows: &[UpdateRow]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `50 · ln² n`, the generous locality allowance for mean `|𝒜|`.
pub fn locality_bound(n: usize) -> f64 {
    let l = (n.max(2) as f64).ln();
    50.0 * l * l
}

/// Builds the configured instance and runs the experiment on it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Report, Vec<UpdateRow>)> {
    cfg.validate()?;
    let Some(instance) = &cfg.instance else {
        return Err(Error::InvalidArgument("config names no instance to generate".into()));
    };
    let g = instance.build(cfg.seed)?;
    run_on_graph(cfg, &g, None)
}

/// Runs the experiment on `g`; `stream` replaces the generated flip stream.
pub fn run_on_graph(cfg: &ExperimentConfig, g: &Graph, stream: Option<&[Flip]>) -> Result<(Report, Vec<UpdateRow>)> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let (outcome, violations) = match cfg.mode {
        Mode::Static => (Outcome::Static(static_costs(g, &cfg.params, cfg.trials, cfg.seed)?), 0),
        Mode::Audit => {
            let a = audit(g, &cfg.params, cfg.trials, cfg.seed)?;
            let v = a.dominance_failures + a.classification_failures + a.inequality_failures;
            (Outcome::Audit(a), v)
        }
        Mode::Width => (Outcome::Width(width(g, &cfg.params, cfg.trials, cfg.seed)?), 0),
        Mode::Oracle => {
            let o = oracle(g, &cfg.params, cfg.trials, cfg.seed)?;
            let sandwich =
                o.packing_lower_bound <= o.opt && o.modified.min >= o.opt as f64 && o.pivot.min >= o.opt as f64;
            (Outcome::Oracle(o), usize::from(!sandwich))
        }
        Mode::Dynamic => {
            let generated;
            let flips = match stream {
                Some(s) => s,
                None => {
                    generated = flip_stream(g, cfg.steps, cfg.seed, cfg.bias)?;
                    &generated
                }
            };
            let (d, r) = dynamic(g, &cfg.params, flips, cfg.seed, cfg.verify)?;
            rows = r;
            let v = d.mismatches;
            (Outcome::Dynamic(d), v)
        }
    };
    let report = Report { schema: SCHEMA, config: cfg.clone(), n: g.n(), edges: g.edge_count(), violations, outcome };
    Ok((report, rows))
}

/// Pivot and ModifiedPivot costs on `trials` tapes.
pub fn static_costs(g: &Graph, params: &Params, trials: usize, seed: u64) -> Result<StaticOutcome> {
    let costs: Vec<(usize, usize)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let tape = RandomTape::new(g.n(), trial_seed(seed, t));
            let (c, _) = run_pivot(g, &tape)?;
            let (m, _) = run_modified_pivot(g, &tape, params)?;
            Ok((clustering_cost(g, &c), clustering_cost(g, &m)))
        })
        .collect::<Result<_>>()?;
    let (p, m): (Vec<usize>, Vec<usize>) = costs.into_iter().unzip();
    Ok(StaticOutcome { pivot: Summary::of_counts(&p), modified: Summary::of_counts(&m) })
}

enum TrialAudit {
    Ok(f64),
    Dominance(f64, String),
    Classification(f64, String),
    Inequality(f64, String),
}

/// Charge dominance, mistake classification and the per-iteration
/// inequalities on `trials` tapes.
pub fn audit(g: &Graph, params: &Params, trials: usize, seed: u64) -> Result<AuditOutcome> {
    let results: Vec<TrialAudit> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let tape = RandomTape::new(g.n(), trial_seed(seed, t));
            let (_, trace) = run_modified_pivot(g, &tape, params)?;
            let y = compute_charges(g, &trace, params)?;
            let d = verify_charge_dominance(g, &trace, &y)?;
            if !d.holds {
                return Ok(TrialAudit::Dominance(
                    d.margin,
                    format!("trial {t}: charge {} below cost {}", d.total_charge, d.cost),
                ));
            }
            match classify_mistakes(g, &trace, params) {
                Err(e @ Error::ClassificationViolation { .. }) => {
                    Ok(TrialAudit::Classification(d.margin, format!("trial {t}: {e}")))
                }
                Err(e) => Err(e),
                Ok(report) => match report.violations().first() {
                    Some(v) => Ok(TrialAudit::Inequality(
                        d.margin,
                        format!(
                            "trial {t}, iteration {}: {} ({} mistakes, charge {})",
                            v.iteration, v.inequality, v.mistakes, v.charge
                        ),
                    )),
                    None => Ok(TrialAudit::Ok(d.margin)),
                },
            }
        })
        .collect::<Result<_>>()?;

    let mut out = AuditOutcome {
        runs: trials,
        dominance_failures: 0,
        classification_failures: 0,
        inequality_failures: 0,
        margin: Summary::of(&[]),
        first_failure: None,
    };
    let mut margins = Vec::with_capacity(trials);
    for r in results {
        let (m, failure) = match r {
            TrialAudit::Ok(m) => (m, None),
            TrialAudit::Dominance(m, s) => {
                out.dominance_failures += 1;
                (m, Some(s))
            }
            TrialAudit::Classification(m, s) => {
                out.classification_failures += 1;
                (m, Some(s))
            }
            TrialAudit::Inequality(m, s) => {
                out.inequality_failures += 1;
                (m, Some(s))
            }
        };
        margins.push(m);
        if out.first_failure.is_none() {
            out.first_failure = failure;
        }
    }
    out.margin = Summary::of(&margins);
    Ok(out)
}

pub fn width(g: &Graph, params: &Params, trials: usize, seed: u64) -> Result<WidthOutcome> {
    let w = estimate_pair_width(g, params, trials, seed)?;
    let exceeding = w.exceeding(WIDTH_BOUND, 3.0).len();
    Ok(WidthOutcome {
        trials,
        bound: WIDTH_BOUND,
        max_pair: w.max().map(|p| PairSummary { u: p.u, v: p.v, mean: p.mean, se: p.se }),
        mean_over_pairs: w.mean_over_pairs(),
        pairs_exceeding: exceeding,
        histogram: w.histogram(10, WIDTH_BOUND),
        within_bound: exceeding == 0,
    })
}

pub fn oracle(g: &Graph, params: &Params, trials: usize, seed: u64) -> Result<OracleOutcome> {
    let opt = brute_force_opt(g)?;
    let costs = static_costs(g, params, trials, seed)?;
    let bound = WIDTH_BOUND * opt.cost as f64;
    Ok(OracleOutcome {
        opt: opt.cost,
        packing_lower_bound: triangle_packing_lower_bound(g),
        partitions_examined: opt.partitions_examined,
        within_bound: costs.modified.at_most(bound, 3.0),
        ratio: (opt.cost > 0).then(|| costs.modified.mean / opt.cost as f64),
        pivot: costs.pivot,
        modified: costs.modified,
    })
}

fn percentile(sorted: &[usize], q: f64) -> usize {
    if sorted.is_empty() {
        return 0;
    }
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

/// Applies `flips` to a dynamic state built on `g` with the tape seeded by
/// `seed`, optionally checking each step against a static recompute.
pub fn dynamic(
    g: &Graph,
    params: &Params,
    flips: &[Flip],
    seed: u64,
    verify: bool,
) -> Result<(DynamicOutcome, Vec<UpdateRow>)> {
    let tape = RandomTape::new(g.n(), seed);
    let mut state = DynamicState::build(g.clone(), &tape, *params)?;
    let mut rows = Vec::with_capacity(flips.len());
    let mut mismatches = 0;
    let mut first_mismatch = None;
    for (step, f) in flips.iter().enumerate() {
        let st = state.apply_update(f.u, f.v)?;
        rows.push(UpdateRow { step, flip_u: f.u, flip_v: f.v, affected: st.affected, micros: st.micros });
        if verify {
            let (c, _) = run_modified_pivot(state.graph(), &tape, params)?;
            if c.labels() != state.labels() {
                mismatches += 1;
                first_mismatch.get_or_insert(step);
            }
        }
    }
    let affected: Vec<usize> = rows.iter().map(|r| r.affected).collect();
    let mut sorted = affected.clone();
    sorted.sort_unstable();
    let summary = Summary::of_counts(&affected);
    let bound = locality_bound(g.n());
    Ok((
        DynamicOutcome {
            steps: flips.len(),
            verified: verify,
            mismatches,
            first_mismatch,
            affected: summary,
            affected_percentiles: [percentile(&sorted, 0.5), percentile(&sorted, 0.9), percentile(&sorted, 0.99)],
            locality_bound: bound,
            within_bound: summary.mean <= bound,
        },
        rows,
    ))
}
