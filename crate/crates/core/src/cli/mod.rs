//! Command-line front end: TOML run configuration, the four commands and
//! exit-code mapping.

mod commands;
mod config;

pub use commands::{
    cmd_bench, cmd_forward, cmd_precompute, cmd_reconstruct, exit_code, parse_trace, BenchReport, ForwardReport,
    PrecomputeReport, ReconstructReport, TraceSpec,
};
pub use config::{
    GridSection, LawSpec, NoiseSection, PotentialSection, RegionSpec, Resolved, RunConfig, ScenarioSection,
    SolverSection,
};
