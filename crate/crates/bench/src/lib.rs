//! Instance generators and experiment drivers behind the `corrclust` binary.

pub mod experiment;
pub mod gen;

pub use experiment::{run_experiment, run_on_graph, ExperimentConfig, Mode, Outcome, Report, Summary, UpdateRow};
pub use gen::{complete_bipartite, complete_minus_edge, er, flip_stream, two_cliques, InstanceSpec};
