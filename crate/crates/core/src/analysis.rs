//! Closed-form circuit metrics and the approximate mean packet delay.
//!
//! Packet metrics weigh per-occupancy quantities linearly with the knapsack
//! distribution `q(beta)`. Correlations between slow circuit fluctuations
//! and packet backlogs are ignored, so the delay is optimistic when the
//! occupied bandwidth can swing widely over long holding times.

use crate::config::{PacketSizeDistribution, ScenarioConfig};
use crate::error::{Error, Result};
use crate::knapsack::{
    blocking, kaufman_roberts, mean_active_circuits, BlockingResult, OccupancyDistribution,
};

/// How the analysis counts ONUs that hold circuits (one guard time each).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaPolicy {
    /// `min(J, E[active circuits])` under the equilibrium distribution.
    ExpectedActive,
    Fixed(f64),
}

/// Guard and report overhead of one cycle: `eta t_g + J (t_R + t_g)`.
pub fn overhead_per_cycle(eta: f64, cfg: &ScenarioConfig) -> f64 {
    eta * cfg.guard_time + cfg.onus as f64 * (cfg.report_time() + cfg.guard_time)
}

/// Half a mean packet per ONU left unused at the end of each grant.
pub fn unused_slot_remainder(cfg: &ScenarioConfig) -> f64 {
    cfg.onus as f64 * cfg.packet_sizes.mean() / (2.0 * cfg.line_rate)
}

/// `E[max(2 tau, beta Gamma / C)]`: the time from cycle start until packet
/// transmissions can arrive.
pub fn expected_packet_partition_offset(q: &OccupancyDistribution, cfg: &ScenarioConfig) -> f64 {
    let round_trip = 2.0 * cfg.propagation_delay;
    q.expect(|beta| round_trip.max(beta * cfg.cycle / cfg.line_rate))
}

/// Mean aggregate packet window per cycle.
pub fn packet_partition_mean(q: &OccupancyDistribution, cfg: &ScenarioConfig, eta: f64) -> Result<f64> {
    let window = cfg.cycle - expected_packet_partition_offset(q, cfg) - overhead_per_cycle(eta, cfg);
    let required = cfg.onus as f64 * cfg.report_time();
    if window < required {
        return Err(Error::InfeasibleCycle { available: window, required });
    }
    Ok(window)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityLimit {
    /// Largest packet load with finite delay, clamped at zero.
    pub value: f64,
    /// Set when circuits and overheads leave no room for packets at all.
    pub exhausted: bool,
}

pub fn stability_limit(q: &OccupancyDistribution, cfg: &ScenarioConfig, eta: f64) -> StabilityLimit {
    let round_trip_share = 2.0 * cfg.propagation_delay / cfg.cycle;
    let busy = q.expect(|beta| round_trip_share.max(beta / cfg.line_rate));
    let raw = 1.0
        - busy
        - (overhead_per_cycle(eta, cfg) + unused_slot_remainder(cfg)) / cfg.cycle;
    StabilityLimit { value: raw.max(0.0), exhausted: raw <= 0.0 }
}

/// Accumulation, transmission and propagation delay of circuit bits:
/// `Gamma (1 + b / C) + tau`.
pub fn circuit_delay(rate: f64, cfg: &ScenarioConfig) -> f64 {
    cfg.cycle * (1.0 + rate / cfg.line_rate) + cfg.propagation_delay
}

/// Worst-case shift of a circuit's window inside the circuit partition.
pub fn jitter_bound(rate: f64, cfg: &ScenarioConfig) -> f64 {
    cfg.cycle * (cfg.circuit_limit - rate) / cfg.line_rate
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketMoments {
    pub mean: f64,
    pub variance: f64,
    /// `variance / mean^2`.
    pub normalized_variance: f64,
}

pub fn packet_moments(sizes: &PacketSizeDistribution) -> PacketMoments {
    PacketMoments {
        mean: sizes.mean(),
        variance: sizes.variance(),
        normalized_variance: sizes.variance() / (sizes.mean() * sizes.mean()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PacketDelay {
    Stable {
        /// M/G/1 waiting time at the effective load.
        queueing: f64,
        total: f64,
    },
    /// Packet load at or above the stability limit.
    Unstable,
}

impl PacketDelay {
    pub fn total(&self) -> Option<f64> {
        match self {
            PacketDelay::Stable { total, .. } => Some(*total),
            PacketDelay::Unstable => None,
        }
    }
}

/// Packet-side quantities of one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketAnalysis {
    pub eta: f64,
    /// Mean occupied circuit bandwidth (bit/s).
    pub mean_circuit_bandwidth: f64,
    /// Mean circuit partition `beta_bar Gamma / C`.
    pub mean_circuit_partition: f64,
    pub overhead: f64,
    pub unused_remainder: f64,
    pub packet_partition: f64,
    pub stability_limit: StabilityLimit,
    /// `pi / pi_max` when below one.
    pub effective_load: Option<f64>,
    /// From report transmission to the start of the next packet partition.
    pub report_to_partition: f64,
    pub delay: PacketDelay,
}

/// Mean packet delay `Gamma/2 + D_rp + D_q + P_bar/C + tau`.
pub fn mean_packet_delay(
    q: &OccupancyDistribution,
    cfg: &ScenarioConfig,
    eta: f64,
) -> Result<PacketAnalysis> {
    let mean_circuit_bandwidth = q.mean();
    let offset = expected_packet_partition_offset(q, cfg);
    let overhead = overhead_per_cycle(eta, cfg);
    let packet_partition = packet_partition_mean(q, cfg, eta)?;
    let limit = stability_limit(q, cfg, eta);
    let report_to_partition = 0.5 * (cfg.cycle + offset - overhead);

    let moments = packet_moments(&cfg.packet_sizes);
    let pi = cfg.packet_load();
    let service = moments.mean / cfg.line_rate;

    let (effective_load, delay) = if !limit.exhausted && pi < limit.value {
        let rho = pi / limit.value;
        let queueing = rho * service * (1.0 + moments.normalized_variance) / (2.0 * (1.0 - rho));
        let total = cfg.cycle / 2.0 + report_to_partition + queueing + service + cfg.propagation_delay;
        (Some(rho), PacketDelay::Stable { queueing, total })
    } else {
        (None, PacketDelay::Unstable)
    };

    Ok(PacketAnalysis {
        eta,
        mean_circuit_bandwidth,
        mean_circuit_partition: mean_circuit_bandwidth * cfg.cycle / cfg.line_rate,
        overhead,
        unused_remainder: unused_slot_remainder(cfg),
        packet_partition,
        stability_limit: limit,
        effective_load,
        report_to_partition,
        delay,
    })
}

/// Full analytical evaluation of one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    pub occupancy: OccupancyDistribution,
    pub blocking: BlockingResult,
    pub mean_active_circuits: f64,
    pub packet: PacketAnalysis,
}

pub fn resolve_eta(policy: EtaPolicy, cfg: &ScenarioConfig, mean_active: f64) -> f64 {
    match policy {
        EtaPolicy::ExpectedActive => mean_active.min(cfg.onus as f64),
        EtaPolicy::Fixed(eta) => eta,
    }
}

pub fn analyze(cfg: &ScenarioConfig, policy: EtaPolicy) -> Result<AnalysisResult> {
    cfg.validate()?;
    let knapsack = cfg.knapsack()?;
    let occupancy = kaufman_roberts(&knapsack);
    let blocking = blocking(&occupancy, &knapsack, &cfg.classes);
    let mean_active = mean_active_circuits(&knapsack, &blocking);
    let eta = resolve_eta(policy, cfg, mean_active);
    let packet = mean_packet_delay(&occupancy, cfg, eta)?;
    Ok(AnalysisResult { occupancy, blocking, mean_active_circuits: mean_active, packet })
}

/// Packet metrics in the limit of unbounded circuit load, where the
/// occupied bandwidth sits at the circuit limit and, under
/// [`EtaPolicy::ExpectedActive`], every ONU ends up holding a circuit.
pub fn saturation_limit(cfg: &ScenarioConfig, policy: EtaPolicy) -> Result<PacketAnalysis> {
    let q = OccupancyDistribution::point_mass(cfg.circuit_limit);
    let eta = resolve_eta(policy, cfg, f64::INFINITY);
    mean_packet_delay(&q, cfg, eta)
}
