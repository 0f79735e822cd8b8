use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use corrclust::io::{format_edge_list, format_update_stream, parse_edge_list, parse_update_stream};
use corrclust::params::{DEFAULT_DELTA, DEFAULT_EPSILON, DEFAULT_K};
use corrclust::{Graph, Params};
use corrclust_bench::experiment::{write_update_csv, Outcome};
use corrclust_bench::{flip_stream, run_on_graph, ExperimentConfig, InstanceSpec, Mode, Report};

#[derive(Parser)]
#[command(name = "corrclust", version, about = "ModifiedPivot correlation clustering experiments")]
struct Cli {
    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true, env = "CORRCLUST_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance as an edge list, or a flip stream over it.
    Gen {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Emit this many flips in the update-stream format instead.
        #[arg(long)]
        flips: Option<usize>,
        /// Insertion probability of generated flips.
        #[arg(long, default_value_t = 0.5)]
        bias: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pivot and ModifiedPivot costs over many tapes.
    Static(RunArgs),
    /// Charge dominance and mistake classification over many tapes.
    Audit(RunArgs),
    /// Monte-Carlo per-pair charge load.
    Width(RunArgs),
    /// Exact optimum against the algorithms' mean cost (n <= 12).
    Oracle(RunArgs),
    /// Maintain the clustering under a flip stream.
    Dynamic {
        #[command(flatten)]
        run: RunArgs,
        /// Number of generated flips.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 0.5)]
        bias: f64,
        /// Read flips from an update-stream file instead of generating them.
        #[arg(long)]
        updates: Option<PathBuf>,
        /// Per-update CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Skip the static recompute after every flip.
        #[arg(long)]
        no_verify: bool,
    },
    /// Run a fixed suite covering every mode and print a summary.
    Bench {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// two-cliques, complete-minus-edge, bipartite or er.
    #[arg(long, default_value = "er")]
    instance: String,
    /// Vertex count (first part size for bipartite).
    #[arg(long, default_value_t = 30)]
    n: usize,
    /// Second part size for bipartite.
    #[arg(long)]
    n2: Option<usize>,
    /// Edge probability for er.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Read the graph from an edge-list file instead of generating it.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: f64,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl InstanceArgs {
    fn spec(&self) -> Result<InstanceSpec> {
        Ok(InstanceSpec::from_parts(&self.instance, self.n, self.n2, self.p)?)
    }
}

impl RunArgs {
    fn config(&self, mode: Mode) -> Result<(ExperimentConfig, Graph)> {
        let (mut cfg, g) = match &self.graph {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let g = parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))?;
                (ExperimentConfig::for_file(path.display().to_string(), mode), Some(g))
            }
            None => (ExperimentConfig::new(self.instance.spec()?, mode), None),
        };
        cfg.params = Params::from_f64(self.epsilon, self.delta, self.k)?;
        cfg.trials = self.trials;
        cfg.seed = self.instance.seed;
        cfg.validate()?;
        let g = match (g, &cfg.instance) {
            (Some(g), _) => g,
            (None, Some(spec)) => spec.build(cfg.seed)?,
            (None, None) => unreachable!("config without graph or instance"),
        };
        Ok((cfg, g))
    }
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn one_line(r: &Report) -> String {
    let source = match (&r.config.instance, &r.config.graph_file) {
        (Some(i), _) => i.to_string(),
        (None, Some(f)) => f.clone(),
        (None, None) => String::new(),
    };
    let head = format!("{:<8} {:<34}", mode_name(&r.outcome), source);
    let body = match &r.outcome {
        Outcome::Static(s) => format!(
            "pivot {:.3} ± {:.3}   modified {:.3} ± {:.3}",
            s.pivot.mean, s.pivot.se, s.modified.mean, s.modified.se
        ),
        Outcome::Audit(a) => format!(
            "{} runs, {} dominance / {} classification / {} inequality failures",
            a.runs, a.dominance_failures, a.classification_failures, a.inequality_failures
        ),
        Outcome::Width(w) => match &w.max_pair {
            Some(p) => format!("max E[y] {:.3} ± {:.3} at ({}, {})", p.mean, p.se, p.u, p.v),
            None => "no pairs".to_string(),
        },
        Outcome::Oracle(o) => format!(
            "opt {}  packing {}  modified {:.3} ± {:.3}",
            o.opt, o.packing_lower_bound, o.modified.mean, o.modified.se
        ),
        Outcome::Dynamic(d) => format!(
            "{} flips, {} mismatches, mean |A| {:.2} (p99 {})",
            d.steps, d.mismatches, d.affected.mean, d.affected_percentiles[2]
        ),
    };
    format!("{head} {body}")
}

fn mode_name(o: &Outcome) -> &'static str {
    match o {
        Outcome::Static(_) => "static",
        Outcome::Audit(_) => "audit",
        Outcome::Width(_) => "width",
        Outcome::Oracle(_) => "oracle",
        Outcome::Dynamic(_) => "dynamic",
    }
}

fn bench_suite(trials: usize, seed: u64) -> Vec<ExperimentConfig> {
    let with = |instance, mode, trials| {
        let mut c = ExperimentConfig::new(instance, mode);
        c.trials = trials;
        c.seed = seed;
        c
    };
    let mut dynamic = with(InstanceSpec::Er { n: 200, p: 0.05 }, Mode::Dynamic, 1);
    dynamic.steps = trials * 5;
    vec![
        with(InstanceSpec::TwoCliques { half: 50 }, Mode::Static, trials * 10),
        with(InstanceSpec::CompleteMinusEdge { n: 400 }, Mode::Static, trials),
        with(InstanceSpec::Er { n: 30, p: 0.5 }, Mode::Audit, trials),
        with(InstanceSpec::Er { n: 50, p: 0.5 }, Mode::Width, trials),
        with(InstanceSpec::Er { n: 9, p: 0.5 }, Mode::Oracle, trials),
        dynamic,
    ]
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("thread count must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }

    let emit = |report: &Report, out: Option<&PathBuf>| -> Result<u8> {
        write_output(out, &(serde_json::to_string_pretty(report)? + "\n"))?;
        eprintln!("{}", one_line(report));
        Ok(u8::from(report.violations > 0) * 2)
    };

    match cli.command {
        Command::Gen { instance, flips, bias, out } => {
            let g = instance.spec()?.build(instance.seed)?;
            let text = match flips {
                Some(k) => format_update_stream(&flip_stream(&g, k, instance.seed, bias)?),
                None => format_edge_list(&g),
            };
            write_output(out.as_ref(), &text)?;
            Ok(0)
        }
        Command::Static(a) => {
            let (cfg, g) = a.config(Mode::Static)?;
            emit(&run_on_graph(&cfg, &g, None)?.0, a.out.as_ref())
        }
        Command::Audit(a) => {
            let (cfg, g) = a.config(Mode::Audit)?;
            emit(&run_on_graph(&cfg, &g, None)?.0, a.out.as_ref())
        }
        Command::Width(a) => {
            let (cfg, g) = a.config(Mode::Width)?;
            emit(&run_on_graph(&cfg, &g, None)?.0, a.out.as_ref())
        }
        Command::Oracle(a) => {
            let (cfg, g) = a.config(Mode::Oracle)?;
            emit(&run_on_graph(&cfg, &g, None)?.0, a.out.as_ref())
        }
        Command::Dynamic { run, steps, bias, updates, csv, no_verify } => {
            let (mut cfg, g) = run.config(Mode::Dynamic)?;
            cfg.steps = steps;
            cfg.bias = bias;
            cfg.verify = !no_verify;
            let flips = match &updates {
                Some(path) => {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    Some(parse_update_stream(&text).with_context(|| format!("parsing {}", path.display()))?)
                }
                None => None,
            };
            let (report, rows) = run_on_graph(&cfg, &g, flips.as_deref())?;
            if let Some(path) = &csv {
                let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_update_csv(f, &rows)?;
            }
            emit(&report, run.out.as_ref())
        }
        Command::Bench { trials, seed, out } => {
            let mut reports = Vec::new();
            for cfg in bench_suite(trials.max(1), seed) {
                let (r, _) = corrclust_bench::run_experiment(&cfg)?;
                eprintln!("{}", one_line(&r));
                reports.push(r);
            }
            write_output(out.as_ref(), &(serde_json::to_string_pretty(&reports)? + "\n"))?;
            Ok(u8::from(reports.iter().any(|r| r.violations > 0)) * 2)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
