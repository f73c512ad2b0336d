//! Network, traffic and protocol parameters of one experiment.

use crate::error::{Error, Result};
use crate::knapsack::{normalize, CircuitClassSet, NormalizedKnapsack};

/// Discrete packet size distribution. Sizes are in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketSizeDistribution {
    entries: Vec<(f64, f64)>,
    mean: f64,
    variance: f64,
}

impl PacketSizeDistribution {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidPacketSizes("no sizes given".into()));
        }
        for &(size, p) in &entries {
            if !(size.is_finite() && size > 0.0) {
                return Err(Error::InvalidPacketSizes(format!("size {size} is not positive")));
            }
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidPacketSizes(format!("probability {p} is negative")));
            }
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPacketSizes(format!("probabilities sum to {total}, not 1")));
        }
        let mean: f64 = entries.iter().map(|(s, p)| s * p).sum();
        let second: f64 = entries.iter().map(|(s, p)| s * s * p).sum();
        let variance = (second - mean * mean).max(0.0);
        Ok(Self { entries, mean, variance })
    }

    /// Ethernet mix: 64 B (60 %), 300 B (4 %), 580 B (11 %), 1518 B (25 %).
    pub fn ethernet_mix() -> Self {
        Self::new(vec![
            (64.0 * 8.0, 0.60),
            (300.0 * 8.0, 0.04),
            (580.0 * 8.0, 0.11),
            (1518.0 * 8.0, 0.25),
        ])
        .expect("reference mix is valid")
    }

    pub fn fixed(size_bits: f64) -> Result<Self> {
        Self::new(vec![(size_bits, 1.0)])
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn max_size(&self) -> f64 {
        self.entries.iter().map(|e| e.0).fold(0.0, f64::max)
    }
}

/// All parameters of one operating point. Rates are bit/s, times seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Upstream channel rate `C`.
    pub line_rate: f64,
    /// Bandwidth available for circuits, `C_c <= C`.
    pub circuit_limit: f64,
    /// Number of ONUs `J`.
    pub onus: usize,
    /// One-way propagation delay `tau`.
    pub propagation_delay: f64,
    /// Fixed cycle duration `Gamma`.
    pub cycle: f64,
    pub guard_time: f64,
    /// Report message size in bits; its airtime is `report_bits / line_rate`.
    pub report_bits: f64,
    /// Aggregate circuit request rate `lambda_c`.
    pub circuit_request_rate: f64,
    /// Inverse mean holding time `mu`.
    pub circuit_departure_rate: f64,
    /// Aggregate packet arrival rate `lambda_p`.
    pub packet_rate: f64,
    pub classes: CircuitClassSet,
    pub packet_sizes: PacketSizeDistribution,
    pub low_traffic_polling: bool,
    /// Per-ONU grant cap as a multiple of the Limited grant size.
    pub excess_bound_factor: f64,
}

impl Default for ScenarioConfig {
    /// A 32-ONU, 10 Gb/s channel with 2 ms cycles, 96 us propagation delay,
    /// 5 us guards and 64 B reports; 2 Gb/s circuit limit, circuit load 0.4,
    /// packet load 0.5 and 0.5 s mean holding time.
    fn default() -> Self {
        let cfg = Self {
            line_rate: 10e9,
            circuit_limit: 2e9,
            onus: 32,
            propagation_delay: 96e-6,
            cycle: 2e-3,
            guard_time: 5e-6,
            report_bits: 64.0 * 8.0,
            circuit_request_rate: 0.0,
            circuit_departure_rate: 2.0,
            packet_rate: 0.0,
            classes: CircuitClassSet::reference(),
            packet_sizes: PacketSizeDistribution::ethernet_mix(),
            low_traffic_polling: false,
            excess_bound_factor: 2.0,
        };
        cfg.with_circuit_load(0.4).with_packet_load(0.5)
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if !(self.line_rate.is_finite() && self.line_rate > 0.0) {
            return bad(format!("channel rate {} must be positive", self.line_rate));
        }
        if !(self.circuit_limit > 0.0 && self.circuit_limit <= self.line_rate) {
            return bad(format!(
                "circuit limit {} must be in (0, {}]",
                self.circuit_limit, self.line_rate
            ));
        }
        if self.onus == 0 {
            return bad("at least one ONU is required".into());
        }
        if !(self.cycle.is_finite() && self.cycle > 0.0) {
            return bad(format!("cycle duration {} must be positive", self.cycle));
        }
        for (name, v) in [
            ("propagation delay", self.propagation_delay),
            ("guard time", self.guard_time),
            ("report size", self.report_bits),
            ("circuit request rate", self.circuit_request_rate),
            ("packet rate", self.packet_rate),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} {v} must be non-negative"));
            }
        }
        if !(self.circuit_departure_rate.is_finite() && self.circuit_departure_rate > 0.0) {
            return bad(format!("departure rate {} must be positive", self.circuit_departure_rate));
        }
        if self.excess_bound_factor.is_nan() || self.excess_bound_factor < 1.0 {
            return bad(format!("excess bound factor {} must be at least 1", self.excess_bound_factor));
        }
        Ok(())
    }

    pub fn report_time(&self) -> f64 {
        self.report_bits / self.line_rate
    }

    pub fn mean_holding_time(&self) -> f64 {
        1.0 / self.circuit_departure_rate
    }

    /// Offered circuit load `chi = lambda_c * b_bar / (mu * C)`.
    pub fn circuit_load(&self) -> f64 {
        self.circuit_request_rate * self.classes.mean_rate()
            / (self.circuit_departure_rate * self.line_rate)
    }

    /// Packet load `pi = lambda_p * P_bar / C`.
    pub fn packet_load(&self) -> f64 {
        self.packet_rate * self.packet_sizes.mean() / self.line_rate
    }

    /// Sets `lambda_c` so that the offered circuit load equals `chi`.
    pub fn with_circuit_load(mut self, chi: f64) -> Self {
        self.circuit_request_rate =
            chi * self.circuit_departure_rate * self.line_rate / self.classes.mean_rate();
        self
    }

    /// Sets `lambda_p` so that the packet load equals `pi`.
    pub fn with_packet_load(mut self, pi: f64) -> Self {
        self.packet_rate = pi * self.line_rate / self.packet_sizes.mean();
        self
    }

    /// Changes the mean holding time while keeping the offered load fixed.
    pub fn with_mean_holding_time(self, holding: f64) -> Self {
        let chi = self.circuit_load();
        let mut cfg = self;
        cfg.circuit_departure_rate = 1.0 / holding;
        cfg.with_circuit_load(chi)
    }

    pub fn knapsack(&self) -> Result<NormalizedKnapsack> {
        normalize(
            &self.classes,
            self.circuit_limit,
            self.circuit_request_rate,
            self.circuit_departure_rate,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn loads_round_trip_through_rates() {
        let cfg = ScenarioConfig::default().with_circuit_load(0.7).with_packet_load(0.3);
        assert_relative_eq!(cfg.circuit_load(), 0.7, max_relative = 1e-12);
        assert_relative_eq!(cfg.packet_load(), 0.3, max_relative = 1e-12);

        let cfg = cfg.with_mean_holding_time(0.02);
        assert_relative_eq!(cfg.circuit_load(), 0.7, max_relative = 1e-12);
        assert_relative_eq!(cfg.circuit_departure_rate, 50.0, max_relative = 1e-12);
    }

    #[test]
    fn reference_report_airtime() {
        let cfg = ScenarioConfig::default();
        assert_relative_eq!(cfg.report_time(), 51.2e-9, max_relative = 1e-12);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_limit_above_line_rate() {
        let cfg = ScenarioConfig { circuit_limit: 20e9, ..ScenarioConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = ScenarioConfig { onus: 0, ..ScenarioConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn packet_mix_moments() {
        let d = PacketSizeDistribution::ethernet_mix();
        assert_relative_eq!(d.mean() / 8.0, 493.7, max_relative = 1e-12);
        assert!(PacketSizeDistribution::new(vec![(100.0, 0.5)]).is_err());
        assert_eq!(PacketSizeDistribution::fixed(800.0).unwrap().variance(), 0.0);
    }
}
