//! Scenario files, parameter sweeps and report generation.

mod run;
mod scenario;

pub use run::{
    format_sig, replication_seed, run_experiment, sim_options, ExperimentReport, PointResult, BLOCKING_HEADER,
    CONFIDENCE, DELAY_HEADER, JITTER_HEADER, STABILITY_HEADER,
};
pub use scenario::{parse_scenario, render, ExperimentSpec, OutputKind, Sweep, SweepParam};
