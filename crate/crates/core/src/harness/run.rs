//! Experiment execution and CSV reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::scenario::{ExperimentSpec, OutputKind};
use crate::analysis::{analyze, circuit_delay, jitter_bound, AnalysisResult, EtaPolicy, PacketDelay};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::sim::{confidence_interval, simulate, SimMetrics, SimOptions};

pub const CONFIDENCE: f64 = 0.90;

pub const BLOCKING_HEADER: &str = "chi,C_c,holding,class,b,analytic,simulated,ci90";
pub const DELAY_HEADER: &str = "chi,C_c,pi,holding,low_traffic_polling,eta,analytic,simulated,ci90,std_dev";
pub const JITTER_HEADER: &str =
    "chi,C_c,holding,class,b,jitter_bound,max_jitter,violations,circuit_delay,simulated_circuit_delay";
pub const STABILITY_HEADER: &str =
    "chi,C_c,pi,holding,low_traffic_polling,pi_max,exhausted,unstable_runs,runs,final_backlog_bits";

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn replication_seed(master: u64, point: usize, replication: usize) -> u64 {
    splitmix(splitmix(master ^ splitmix(point as u64)).wrapping_add(replication as u64))
}

/// Four significant digits, plain notation where it stays short.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-3..6).contains(&exp) {
        let decimals = (3 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.3e}")
    }
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub config: ScenarioConfig,
    pub analysis: Result<AnalysisResult>,
    pub runs: Vec<Result<SimMetrics>>,
}

impl PointResult {
    fn metrics(&self) -> impl Iterator<Item = &SimMetrics> {
        self.runs.iter().filter_map(|r| r.as_ref().ok())
    }

    fn infeasible_runs(&self) -> bool {
        self.runs.iter().any(|r| r.is_err())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub points: Vec<PointResult>,
    pub files: Vec<(OutputKind, String)>,
}

impl ExperimentReport {
    pub fn file(&self, kind: OutputKind) -> Option<&str> {
        self.files.iter().find(|f| f.0 == kind).map(|f| f.1.as_str())
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.files
            .iter()
            .map(|(kind, body)| {
                let path = dir.join(kind.file_name());
                std::fs::write(&path, body)?;
                Ok(path)
            })
            .collect()
    }
}

pub fn sim_options(spec: &ExperimentSpec) -> SimOptions {
    SimOptions {
        duration: spec.duration,
        warmup: spec.warmup,
        unstable_factor: spec.unstable_factor,
        record_trace: false,
    }
}

/// Runs the analysis and all replications of every grid point.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let grid = spec.grid();
    let opts = sim_options(spec);
    let jobs: Vec<(usize, usize)> =
        (0..grid.len()).flat_map(|p| (0..spec.replications).map(move |r| (p, r))).collect();
    let mut runs: Vec<Result<SimMetrics>> = jobs
        .par_iter()
        .map(|&(p, r)| simulate(&grid[p], &opts, replication_seed(spec.seed, p, r)))
        .collect();

    let mut points = Vec::with_capacity(grid.len());
    for config in grid.into_iter().rev() {
        let rest = runs.split_off(runs.len() - spec.replications);
        let analysis = analyze(&config, spec.eta);
        points.push(PointResult { config, analysis, runs: rest });
    }
    points.reverse();

    let files = spec
        .outputs
        .iter()
        .map(|&kind| {
            let body = match kind {
                OutputKind::BlockingTable => blocking_table(&points),
                OutputKind::DelayCurve => delay_curve(&points, spec.eta),
                OutputKind::JitterReport => jitter_report(&points),
                OutputKind::StabilityReport => stability_report(&points),
            };
            (kind, body)
        })
        .collect();
    Ok(ExperimentReport { points, files })
}

struct Estimate {
    mean: String,
    ci: String,
}

fn estimate(samples: &[f64]) -> Estimate {
    match samples.len() {
        0 => Estimate { mean: "na".into(), ci: "na".into() },
        1 => Estimate { mean: format_sig(samples[0]), ci: "na".into() },
        _ => {
            let ci = confidence_interval(samples, CONFIDENCE).expect("two or more samples");
            Estimate { mean: format_sig(ci.mean), ci: format_sig(ci.half_width) }
        }
    }
}

fn point_key(cfg: &ScenarioConfig) -> String {
    format!(
        "{},{},{}",
        format_sig(cfg.circuit_load()),
        format_sig(cfg.circuit_limit),
        format_sig(cfg.mean_holding_time())
    )
}

fn blocking_table(points: &[PointResult]) -> String {
    let mut out = format!("{BLOCKING_HEADER}\n");
    for p in points {
        let key = point_key(&p.config);
        let metrics: Vec<_> = p.metrics().collect();
        let classes = p.config.classes.len();
        for class in 0..=classes {
            let (label, rate) = if class < classes {
                (class.to_string(), format_sig(p.config.classes.rate(class)))
            } else {
                ("all".to_string(), format_sig(p.config.classes.mean_rate()))
            };
            let analytic = match &p.analysis {
                Ok(a) if class < classes => format_sig(a.blocking.per_class[class]),
                Ok(a) => format_sig(a.blocking.average),
                Err(_) => "infeasible".into(),
            };
            let samples: Vec<f64> = metrics
                .iter()
                .map(|m| if class < classes { m.blocking(class) } else { m.average_blocking() })
                .collect();
            let e = estimate(&samples);
            writeln!(out, "{key},{label},{rate},{analytic},{},{}", e.mean, e.ci).unwrap();
        }
    }
    out
}

fn delay_curve(points: &[PointResult], eta: EtaPolicy) -> String {
    let mut out = format!("{DELAY_HEADER}\n");
    for p in points {
        let c = &p.config;
        let (eta_used, analytic) = match &p.analysis {
            Ok(a) => (
                format_sig(a.packet.eta),
                match a.packet.delay {
                    PacketDelay::Stable { total, .. } => format_sig(total),
                    PacketDelay::Unstable => "unstable".into(),
                },
            ),
            Err(_) => (
                match eta {
                    EtaPolicy::Fixed(v) => format_sig(v),
                    EtaPolicy::ExpectedActive => "na".into(),
                },
                "infeasible".into(),
            ),
        };
        let metrics: Vec<_> = p.metrics().collect();
        let (sim, ci, sd) = if p.infeasible_runs() {
            ("infeasible".into(), "na".into(), "na".into())
        } else if metrics.iter().any(|m| m.unstable) {
            ("unstable".into(), "na".into(), "na".into())
        } else {
            let means: Vec<f64> = metrics.iter().filter(|m| m.delay.count() > 0).map(|m| m.delay.mean()).collect();
            let sds: Vec<f64> = metrics.iter().filter(|m| m.delay.count() > 1).map(|m| m.delay.std_dev()).collect();
            let e = estimate(&means);
            let sd = if sds.is_empty() { "na".into() } else { format_sig(sds.iter().sum::<f64>() / sds.len() as f64) };
            (e.mean, e.ci, sd)
        };
        writeln!(
            out,
            "{},{},{},{},{},{eta_used},{analytic},{sim},{ci},{sd}",
            format_sig(c.circuit_load()),
            format_sig(c.circuit_limit),
            format_sig(c.packet_load()),
            format_sig(c.mean_holding_time()),
            if c.low_traffic_polling { "on" } else { "off" },
        )
        .unwrap();
    }
    out
}

fn jitter_report(points: &[PointResult]) -> String {
    let mut out = format!("{JITTER_HEADER}\n");
    for p in points {
        let c = &p.config;
        let key = point_key(c);
        let metrics: Vec<_> = p.metrics().collect();
        for (class, &rate) in c.classes.rates().iter().enumerate() {
            let stats: Vec<_> = metrics.iter().map(|m| &m.circuits.per_class[class]).collect();
            let max_jitter = stats.iter().map(|s| s.max_jitter).fold(0.0, f64::max);
            let violations: u64 = metrics
                .iter()
                .map(|m| m.circuits.per_class[class].max_jitter > jitter_bound(rate, c) + 1e-12)
                .filter(|&v| v)
                .count() as u64;
            let delays: Vec<f64> =
                stats.iter().filter(|s| s.chunk_delay.count() > 0).map(|s| s.chunk_delay.mean()).collect();
            let sim_delay = if delays.is_empty() {
                "na".into()
            } else {
                format_sig(delays.iter().sum::<f64>() / delays.len() as f64)
            };
            let observed = if stats.iter().all(|s| s.circuits == 0) { "na".into() } else { format_sig(max_jitter) };
            writeln!(
                out,
                "{key},{class},{},{},{observed},{violations},{},{sim_delay}",
                format_sig(rate),
                format_sig(jitter_bound(rate, c)),
                format_sig(circuit_delay(rate, c)),
            )
            .unwrap();
        }
    }
    out
}

fn stability_report(points: &[PointResult]) -> String {
    let mut out = format!("{STABILITY_HEADER}\n");
    for p in points {
        let c = &p.config;
        let (limit, exhausted) = match &p.analysis {
            Ok(a) => (format_sig(a.packet.stability_limit.value), a.packet.stability_limit.exhausted.to_string()),
            Err(Error::InfeasibleCycle { .. }) => ("infeasible".into(), "true".into()),
            Err(_) => ("na".into(), "na".into()),
        };
        let metrics: Vec<_> = p.metrics().collect();
        let unstable = metrics.iter().filter(|m| m.unstable).count() + (p.runs.len() - metrics.len());
        let backlog = if metrics.is_empty() {
            "na".into()
        } else {
            format_sig(metrics.iter().map(|m| m.final_backlog_bits).sum::<f64>() / metrics.len() as f64)
        };
        writeln!(
            out,
            "{},{},{},{},{},{limit},{exhausted},{unstable},{},{backlog}",
            format_sig(c.circuit_load()),
            format_sig(c.circuit_limit),
            format_sig(c.packet_load()),
            format_sig(c.mean_holding_time()),
            if c.low_traffic_polling { "on" } else { "off" },
            p.runs.len(),
        )
        .unwrap();
    }
    out
}
