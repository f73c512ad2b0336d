//! Medium access mechanics of the OLT: circuit admission, circuit partition
//! layout, Limited grant sizing with excess distribution, and cycle assembly.
//!
//! Offsets in a [`CycleSchedule`] are measured from the cycle start as seen
//! by the OLT receiver. Each upstream burst is followed by one guard time.

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::knapsack::CircuitClassSet;

/// An admitted circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitRecord {
    pub id: u64,
    pub class: usize,
    pub rate: f64,
    /// First cycle whose circuit partition carries this circuit.
    pub first_cycle: u64,
    /// Time at which the bandwidth is returned.
    pub expiry: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissionDecision {
    Admitted { id: u64 },
    Blocked,
}

/// Circuits currently holding bandwidth, per class and per ONU.
#[derive(Debug, Clone)]
pub struct AdmissionState {
    rates: Vec<f64>,
    counts: Vec<u64>,
    per_onu: Vec<Vec<CircuitRecord>>,
    active_onus: usize,
    next_id: u64,
}

impl AdmissionState {
    pub fn new(classes: &CircuitClassSet, onus: usize) -> Self {
        Self {
            rates: classes.rates().to_vec(),
            counts: vec![0; classes.len()],
            per_onu: vec![Vec::new(); onus],
            active_onus: 0,
            next_id: 0,
        }
    }

    /// Active circuits per class.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Aggregate circuit bandwidth `b . n`.
    pub fn beta(&self) -> f64 {
        self.rates.iter().zip(&self.counts).map(|(b, &n)| b * n as f64).sum()
    }

    /// Number of ONUs holding at least one circuit.
    pub fn eta(&self) -> usize {
        self.active_onus
    }

    pub fn onus(&self) -> usize {
        self.per_onu.len()
    }

    pub fn circuits(&self, onu: usize) -> &[CircuitRecord] {
        &self.per_onu[onu]
    }

    pub fn total_circuits(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Whether a class-`class` circuit fits: `beta + b_k <= C_c`.
    pub fn fits(&self, class: usize, limit: f64) -> bool {
        self.beta() + self.rates[class] <= limit * (1.0 + 1e-12)
    }

    pub fn admit(
        &mut self,
        onu: usize,
        class: usize,
        limit: f64,
        first_cycle: u64,
        expiry: f64,
    ) -> AdmissionDecision {
        if !self.fits(class, limit) {
            return AdmissionDecision::Blocked;
        }
        let id = self.next_id;
        self.next_id += 1;
        let list = &mut self.per_onu[onu];
        if list.is_empty() {
            self.active_onus += 1;
        }
        list.push(CircuitRecord { id, class, rate: self.rates[class], first_cycle, expiry });
        self.counts[class] += 1;
        AdmissionDecision::Admitted { id }
    }

    pub fn release(&mut self, onu: usize, id: u64) -> Option<CircuitRecord> {
        let list = &mut self.per_onu[onu];
        let pos = list.iter().position(|c| c.id == id)?;
        let record = list.remove(pos);
        if list.is_empty() {
            self.active_onus -= 1;
        }
        self.counts[record.class] -= 1;
        Some(record)
    }
}

/// Admission test for a class-`class` request at ONU 0 with no timing.
pub fn admit_circuit(state: &mut AdmissionState, class: usize, limit: f64) -> AdmissionDecision {
    state.admit(0, class, limit, 0, f64::INFINITY)
}

/// One upstream burst.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grant {
    pub onu: usize,
    pub start: f64,
    pub duration: f64,
}

impl Grant {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Placement of a single circuit inside its ONU's circuit burst.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitWindow {
    pub circuit: u64,
    pub onu: usize,
    pub class: usize,
    pub rate: f64,
    pub start: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircuitPartition {
    /// `Xi = beta Gamma / C` over the transmitting circuits.
    pub duration: f64,
    /// ONUs with at least one transmitting circuit.
    pub active_onus: usize,
    pub grants: Vec<Grant>,
    pub windows: Vec<CircuitWindow>,
}

impl CircuitPartition {
    /// Airtime including one guard time per burst.
    pub fn span(&self, guard_time: f64) -> f64 {
        self.duration + self.active_onus as f64 * guard_time
    }
}

/// Lays out the circuits that transmit in `cycle`: ONUs in id order, each
/// ONU's circuits back to back in admission order.
pub fn circuit_partition(state: &AdmissionState, cfg: &ScenarioConfig, cycle: u64) -> CircuitPartition {
    let mut partition = CircuitPartition::default();
    let mut cursor = 0.0;
    for onu in 0..state.onus() {
        let burst_start = cursor;
        for circuit in state.circuits(onu).iter().filter(|c| c.first_cycle <= cycle) {
            let window = circuit.rate * cfg.cycle / cfg.line_rate;
            partition.windows.push(CircuitWindow {
                circuit: circuit.id,
                onu,
                class: circuit.class,
                rate: circuit.rate,
                start: cursor,
                duration: window,
            });
            cursor += window;
            partition.duration += window;
        }
        if cursor > burst_start {
            partition.grants.push(Grant { onu, start: burst_start, duration: cursor - burst_start });
            partition.active_onus += 1;
            cursor += cfg.guard_time;
        }
    }
    partition
}

/// Limited grant sizing with excess distribution.
///
/// `requests` are the durations each ONU asked for (report included) and
/// `budget` the aggregate airtime for all grants. Every ONU gets at least
/// the report time, at most `G_max = budget / J` up front; the slack left by
/// light ONUs is shared among heavy ONUs in proportion to their demand above
/// `G_max`, with each grant capped at its request and at
/// `excess_bound_factor * G_max`. Slack that cannot be placed stays idle.
pub fn size_packet_grants(requests: &[f64], budget: f64, cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    let onus = requests.len();
    let report = cfg.report_time();
    let required = onus as f64 * report;
    if onus == 0 {
        return Ok(Vec::new());
    }
    if budget < required {
        return Err(Error::InfeasibleCycle { available: budget, required });
    }
    let limit = budget / onus as f64;
    let cap = cfg.excess_bound_factor * limit;

    let mut grants = Vec::with_capacity(onus);
    let mut excess = 0.0;
    let mut unmet_total = 0.0;
    for &request in requests {
        let wanted = request.max(report);
        let base = wanted.min(limit);
        grants.push(base);
        if wanted < limit {
            excess += limit - base;
        } else {
            unmet_total += wanted - limit;
        }
    }
    if excess > 0.0 && unmet_total > 0.0 {
        for (grant, &request) in grants.iter_mut().zip(requests) {
            let wanted = request.max(report);
            if wanted > limit {
                let share = excess * (wanted - limit) / unmet_total;
                *grant = (limit + share).min(wanted).min(cap);
            }
        }
    }
    Ok(grants)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleSchedule {
    pub index: u64,
    /// Circuit partition duration `Xi`.
    pub circuit_partition: f64,
    pub circuit_grants: Vec<Grant>,
    pub circuit_windows: Vec<CircuitWindow>,
    /// ONUs with transmitting circuits in this cycle.
    pub eta: usize,
    /// Aggregate packet window `Gamma - max(2 tau, Xi) - omega_o`.
    pub packet_window: f64,
    /// Limited grant size.
    pub grant_limit: f64,
    pub overhead: f64,
    /// Offset at which the first packet burst arrives.
    pub packet_partition_start: f64,
    pub packet_grants: Vec<Grant>,
}

/// Builds the schedule of cycle `index` from the admission state and the
/// latest per-ONU requests.
///
/// Packet grants carry the ONU report, so they share the packet window plus
/// the report airtime that the overhead term already reserves.
pub fn assemble_cycle(
    state: &AdmissionState,
    requests: &[f64],
    cfg: &ScenarioConfig,
    index: u64,
) -> Result<CycleSchedule> {
    let circuits = circuit_partition(state, cfg, index);
    let eta = circuits.active_onus;
    let round_trip = 2.0 * cfg.propagation_delay;
    let overhead = eta as f64 * cfg.guard_time
        + cfg.onus as f64 * (cfg.report_time() + cfg.guard_time);
    let packet_window = cfg.cycle - round_trip.max(circuits.duration) - overhead;
    let reports = cfg.onus as f64 * cfg.report_time();
    if packet_window < reports {
        return Err(Error::InfeasibleCycle { available: packet_window, required: reports });
    }

    let sizes = size_packet_grants(requests, packet_window + reports, cfg)?;
    let start = round_trip.max(circuits.span(cfg.guard_time));
    let mut cursor = start;
    let packet_grants = sizes
        .iter()
        .enumerate()
        .map(|(onu, &duration)| {
            let grant = Grant { onu, start: cursor, duration };
            cursor += duration + cfg.guard_time;
            grant
        })
        .collect();

    Ok(CycleSchedule {
        index,
        circuit_partition: circuits.duration,
        circuit_grants: circuits.grants,
        circuit_windows: circuits.windows,
        eta,
        packet_window,
        grant_limit: (packet_window + reports) / cfg.onus as f64,
        overhead,
        packet_partition_start: start,
        packet_grants,
    })
}

/// Whether the OLT may start another polling round before the next circuit
/// partition arrives.
pub fn low_traffic_poll_check(now: f64, next_circuit_partition: f64, cfg: &ScenarioConfig) -> bool {
    let needed = cfg.onus as f64 * (cfg.report_time() + cfg.guard_time) + 2.0 * cfg.propagation_delay;
    next_circuit_partition - now > needed
}

/// Grants for an extra polling round whose gates leave the OLT at `now`.
/// The round is sized to finish before `deadline`.
pub fn polling_round(requests: &[f64], now: f64, deadline: f64, cfg: &ScenarioConfig) -> Result<Vec<Grant>> {
    let start = now + 2.0 * cfg.propagation_delay;
    let budget = deadline - start - cfg.onus as f64 * cfg.guard_time;
    let sizes = size_packet_grants(requests, budget, cfg)?;
    let mut cursor = start;
    Ok(sizes
        .into_iter()
        .enumerate()
        .map(|(onu, duration)| {
            let grant = Grant { onu, start: cursor, duration };
            cursor += duration + cfg.guard_time;
            grant
        })
        .collect())
}
