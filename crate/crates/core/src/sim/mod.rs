//! Discrete-event simulation of the hybrid access protocol.
//!
//! Times are global seconds. Gates leave the OLT at the start of each cycle;
//! an ONU transmits `tau` before its burst is due at the OLT.

mod event;
mod onu;
mod stats;
mod traffic;

use std::collections::HashMap;

pub use event::{Event, EventKind, EventQueue};
pub use onu::{Delivered, Onu, PendingRequest, QueuedPacket};
pub use stats::{confidence_interval, ConfidenceInterval, Summary};
pub use traffic::{CircuitRequestDraw, PacketDraw, TrafficSources};

use crate::analysis::{circuit_delay, jitter_bound};
use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::protocol::{
    assemble_cycle, low_traffic_poll_check, polling_round, AdmissionDecision, AdmissionState, Grant,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub duration: f64,
    pub warmup: f64,
    /// Backlog at the end, in cycles' worth of mean packet arrivals, above
    /// which a run is flagged unstable.
    pub unstable_factor: f64,
    pub record_trace: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { duration: 10.0, warmup: 1.0, unstable_factor: 100.0, record_trace: false }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClassCounts {
    pub offered: u64,
    pub admitted: u64,
    pub blocked: u64,
}

impl ClassCounts {
    pub fn blocking(&self) -> f64 {
        if self.offered == 0 {
            0.0
        } else {
            self.blocked as f64 / self.offered as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassCircuitStats {
    /// Delay of every chunk sent in consecutive cycles.
    pub chunk_delay: Summary,
    /// Chunks whose window did not move since the previous cycle.
    pub steady_chunks: u64,
    /// Largest start-time spread of any circuit of the class.
    pub max_jitter: f64,
    pub jitter_bound: f64,
    pub circuits: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CircuitStats {
    pub per_class: Vec<ClassCircuitStats>,
    /// Largest deviation of a steady chunk's delay from `Gamma (1 + b/C) + tau`.
    pub max_chunk_delay_error: f64,
    /// Largest `jitter - bound` over all circuits; negative when all are inside.
    pub max_jitter_excess: f64,
    pub jitter_violations: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimMetrics {
    pub seed: u64,
    pub cycles: u64,
    pub polling_rounds: u64,
    pub classes: Vec<ClassCounts>,
    pub delay: Summary,
    /// Admitted circuit bandwidth sampled at every cycle start.
    pub occupancy: Summary,
    /// ONUs with transmitting circuits, per cycle.
    pub active_onus: Summary,
    pub circuit_partition: Summary,
    pub circuit_partition_trace: Vec<f64>,
    pub circuits: CircuitStats,
    pub packets_arrived: u64,
    pub packets_sent: u64,
    pub packets_queued: u64,
    pub final_backlog_bits: f64,
    pub backlog_limit_bits: f64,
    pub unstable: bool,
}

impl SimMetrics {
    pub fn blocking(&self, class: usize) -> f64 {
        self.classes[class].blocking()
    }

    /// Fraction of all requests that were blocked.
    pub fn average_blocking(&self) -> f64 {
        let offered: u64 = self.classes.iter().map(|c| c.offered).sum();
        let blocked: u64 = self.classes.iter().map(|c| c.blocked).sum();
        if offered == 0 {
            0.0
        } else {
            blocked as f64 / offered as f64
        }
    }

    pub fn offered_fraction(&self, class: usize) -> f64 {
        let offered: u64 = self.classes.iter().map(|c| c.offered).sum();
        self.classes[class].offered as f64 / offered.max(1) as f64
    }
}

#[derive(Debug, Clone, Copy)]
struct CircuitTrack {
    class: usize,
    rate: f64,
    last_cycle: u64,
    last_start: f64,
    min_start: f64,
    max_start: f64,
}

struct Simulator<'a> {
    cfg: &'a ScenarioConfig,
    opts: &'a SimOptions,
    sources: TrafficSources,
    queue: EventQueue,
    onus: Vec<Onu>,
    admission: AdmissionState,
    requests: Vec<f64>,
    inbox: Vec<PendingRequest>,
    tracks: HashMap<u64, CircuitTrack>,
    cycle: u64,
    round: u64,
    delivered: Vec<Delivered>,
    m: SimMetrics,
}

/// Runs one replication.
pub fn simulate(cfg: &ScenarioConfig, opts: &SimOptions, seed: u64) -> Result<SimMetrics> {
    cfg.validate()?;
    let mut sim = Simulator::new(cfg, opts, seed);
    sim.run()?;
    Ok(sim.finish())
}

impl<'a> Simulator<'a> {
    fn new(cfg: &'a ScenarioConfig, opts: &'a SimOptions, seed: u64) -> Self {
        let per_class = cfg
            .classes
            .rates()
            .iter()
            .map(|&b| ClassCircuitStats { jitter_bound: jitter_bound(b, cfg), ..Default::default() })
            .collect();
        Self {
            cfg,
            opts,
            sources: TrafficSources::new(cfg, seed),
            queue: EventQueue::new(),
            onus: vec![Onu::default(); cfg.onus],
            admission: AdmissionState::new(&cfg.classes, cfg.onus),
            requests: vec![0.0; cfg.onus],
            inbox: Vec::new(),
            tracks: HashMap::new(),
            cycle: 0,
            round: 0,
            delivered: Vec::new(),
            m: SimMetrics {
                seed,
                classes: vec![ClassCounts::default(); cfg.classes.len()],
                circuits: CircuitStats {
                    per_class,
                    max_jitter_excess: f64::NEG_INFINITY,
                    ..Default::default()
                },
                ..Default::default()
            },
        }
    }

    fn run(&mut self) -> Result<()> {
        self.schedule_circuit_request(0.0);
        self.schedule_packet(0.0);
        self.queue.push(0.0, EventKind::CycleStart { index: 0 });
        while let Some(Event { time, kind, .. }) = self.queue.pop() {
            match kind {
                EventKind::CircuitExpiry { onu, circuit } => {
                    self.admission.release(onu, circuit);
                    self.close_track(circuit);
                }
                EventKind::PacketArrival { onu, size } => {
                    self.onus[onu].enqueue(QueuedPacket { arrival: time, size });
                    self.schedule_packet(time);
                }
                EventKind::CircuitRequestArrival { onu, class, holding } => {
                    self.onus[onu].request_circuit(PendingRequest { arrival: time, onu, class, holding });
                    self.schedule_circuit_request(time);
                }
                EventKind::GrantStart { onu, olt_start: _, duration } => self.burst(time, onu, duration),
                EventKind::UpstreamTransmissionEnd { round } => {
                    let next = (self.cycle + 1) as f64 * self.cfg.cycle;
                    if round == self.round
                        && self.cfg.low_traffic_polling
                        && next < self.opts.duration
                        && low_traffic_poll_check(time, next, self.cfg)
                    {
                        self.queue.push(time, EventKind::LowTrafficPollRound);
                    }
                }
                EventKind::LowTrafficPollRound => {
                    let deadline = (self.cycle + 1) as f64 * self.cfg.cycle;
                    let grants = polling_round(&self.requests, time, deadline, self.cfg)?;
                    self.m.polling_rounds += 1;
                    // Polling-round offsets are already absolute.
                    self.launch_round(0.0, &grants);
                }
                EventKind::CycleStart { index } => self.cycle_start(time, index)?,
            }
        }
        Ok(())
    }

    fn schedule_packet(&mut self, now: f64) {
        if let Some(d) = self.sources.next_packet() {
            let t = now + d.interarrival;
            if t < self.opts.duration {
                self.queue.push(t, EventKind::PacketArrival { onu: d.onu, size: d.size });
            }
        }
    }

    fn schedule_circuit_request(&mut self, now: f64) {
        if let Some(d) = self.sources.next_circuit_request() {
            let t = now + d.interarrival;
            if t < self.opts.duration {
                let kind = EventKind::CircuitRequestArrival { onu: d.onu, class: d.class, holding: d.holding };
                self.queue.push(t, kind);
            }
        }
    }

    /// Schedules packet grants whose offsets are relative to `gate_time`.
    fn launch_round(&mut self, gate_time: f64, grants: &[Grant]) {
        let tau = self.cfg.propagation_delay;
        self.round += 1;
        for g in grants {
            let olt_start = gate_time + g.start;
            let kind = EventKind::GrantStart { onu: g.onu, olt_start, duration: g.duration };
            self.queue.push(olt_start - tau, kind);
        }
        if let Some(last) = grants.last() {
            self.queue.push(gate_time + last.end(), EventKind::UpstreamTransmissionEnd { round: self.round });
        }
    }

    fn cycle_start(&mut self, now: f64, index: u64) -> Result<()> {
        let cfg = self.cfg;
        self.cycle = index;
        self.m.cycles += 1;
        let measuring = now >= self.opts.warmup;

        // Requests reported during the previous cycle, oldest first.
        let mut inbox = std::mem::take(&mut self.inbox);
        inbox.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
        let first = (index + 1) as f64 * cfg.cycle;
        for r in inbox.drain(..) {
            let expiry = first + r.holding;
            let release_cycle = (expiry / cfg.cycle).floor() as u64 + 1;
            let decision = self.admission.admit(r.onu, r.class, cfg.circuit_limit, index + 1, expiry);
            let counted = r.arrival >= self.opts.warmup;
            let counts = &mut self.m.classes[r.class];
            if counted {
                counts.offered += 1;
            }
            match decision {
                AdmissionDecision::Admitted { id } => {
                    if counted {
                        counts.admitted += 1;
                    }
                    let release = release_cycle as f64 * cfg.cycle;
                    if release < self.opts.duration {
                        self.queue.push(release, EventKind::CircuitExpiry { onu: r.onu, circuit: id });
                    }
                }
                AdmissionDecision::Blocked => {
                    if counted {
                        counts.blocked += 1;
                    }
                }
            }
        }
        self.inbox = inbox;

        let schedule = assemble_cycle(&self.admission, &self.requests, cfg, index)?;
        if measuring {
            self.m.occupancy.push(self.admission.beta());
            self.m.active_onus.push(schedule.eta as f64);
            self.m.circuit_partition.push(schedule.circuit_partition);
            if self.opts.record_trace {
                self.m.circuit_partition_trace.push(schedule.circuit_partition);
            }
        }
        for w in &schedule.circuit_windows {
            self.observe_window(index, w.circuit, w.class, w.rate, w.start, w.duration, measuring);
        }
        self.launch_round(now, &schedule.packet_grants);

        let next = index + 1;
        if (next as f64) * cfg.cycle < self.opts.duration {
            self.queue.push(next as f64 * cfg.cycle, EventKind::CycleStart { index: next });
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn observe_window(
        &mut self,
        index: u64,
        circuit: u64,
        class: usize,
        rate: f64,
        start: f64,
        duration: f64,
        measuring: bool,
    ) {
        let cfg = self.cfg;
        let track = self.tracks.entry(circuit).or_insert(CircuitTrack {
            class,
            rate,
            last_cycle: index,
            last_start: start,
            min_start: start,
            max_start: start,
        });
        if track.last_cycle + 1 == index && measuring {
            // From the first bit entering the ONU at the previous window's
            // start to the chunk's last bit reaching the OLT.
            let entered = (index - 1) as f64 * cfg.cycle + track.last_start - cfg.propagation_delay;
            let received = index as f64 * cfg.cycle + start + duration;
            let delay = received - entered;
            let stats = &mut self.m.circuits;
            stats.per_class[class].chunk_delay.push(delay);
            if track.last_start == start {
                stats.per_class[class].steady_chunks += 1;
                let error = (delay - circuit_delay(rate, cfg)).abs();
                stats.max_chunk_delay_error = stats.max_chunk_delay_error.max(error);
            }
        }
        track.last_cycle = index;
        track.last_start = start;
        track.min_start = track.min_start.min(start);
        track.max_start = track.max_start.max(start);
    }

    fn close_track(&mut self, circuit: u64) {
        if let Some(t) = self.tracks.remove(&circuit) {
            self.record_jitter(t);
        }
    }

    fn record_jitter(&mut self, t: CircuitTrack) {
        let stats = &mut self.m.circuits;
        let class = &mut stats.per_class[t.class];
        let jitter = t.max_start - t.min_start;
        class.circuits += 1;
        class.max_jitter = class.max_jitter.max(jitter);
        let excess = jitter - jitter_bound(t.rate, self.cfg);
        stats.max_jitter_excess = stats.max_jitter_excess.max(excess);
        if excess > 1e-12 {
            stats.jitter_violations += 1;
        }
    }

    fn burst(&mut self, now: f64, onu: usize, duration: f64) {
        let cfg = self.cfg;
        let station = &mut self.onus[onu];
        self.inbox.extend(station.take_requests());
        self.delivered.clear();
        station.serve_packet_grant(
            now,
            duration,
            cfg.line_rate,
            cfg.report_time(),
            cfg.propagation_delay,
            &mut self.delivered,
        );
        for d in &self.delivered {
            if d.arrival >= self.opts.warmup {
                self.m.delay.push(d.delivered - d.arrival);
            }
        }
        self.requests[onu] = cfg.report_time() + station.queued_bits() / cfg.line_rate;
    }

    fn finish(mut self) -> SimMetrics {
        let open: Vec<_> = self.tracks.drain().map(|(_, t)| t).collect();
        for t in open {
            self.record_jitter(t);
        }
        let cfg = self.cfg;
        let m = &mut self.m;
        m.packets_arrived = self.onus.iter().map(|o| o.arrived).sum();
        m.packets_sent = self.onus.iter().map(|o| o.sent).sum();
        m.packets_queued = self.onus.iter().map(|o| o.queued_packets() as u64).sum();
        m.final_backlog_bits = self.onus.iter().map(|o| o.queued_bits()).sum();
        m.backlog_limit_bits =
            self.opts.unstable_factor * cfg.packet_rate * cfg.packet_sizes.mean() * cfg.cycle;
        m.unstable = cfg.packet_rate > 0.0 && m.final_backlog_bits > m.backlog_limit_bits;
        if m.circuits.max_jitter_excess == f64::NEG_INFINITY {
            m.circuits.max_jitter_excess = 0.0;
        }
        self.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short() -> SimOptions {
        SimOptions { duration: 0.2, warmup: 0.02, ..SimOptions::default() }
    }

    #[test]
    fn packets_are_conserved() {
        let cfg = ScenarioConfig::default();
        let m = simulate(&cfg, &short(), 5).unwrap();
        assert!(m.packets_arrived > 0);
        assert_eq!(m.packets_arrived, m.packets_sent + m.packets_queued);
        assert!(!m.unstable);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = ScenarioConfig::default();
        let a = simulate(&cfg, &short(), 11).unwrap();
        let b = simulate(&cfg, &short(), 11).unwrap();
        assert_eq!(a, b);
        let c = simulate(&cfg, &short(), 12).unwrap();
        assert_ne!(a.delay, c.delay);
    }

    #[test]
    fn idle_network() {
        let cfg = ScenarioConfig::default().with_circuit_load(0.0).with_packet_load(0.0);
        let m = simulate(&cfg, &short(), 1).unwrap();
        assert_eq!(m.packets_arrived, 0);
        assert_eq!(m.average_blocking(), 0.0);
        assert_eq!(m.occupancy.mean(), 0.0);
        assert_eq!(m.cycles, 100);
    }

    #[test]
    fn occupancy_never_exceeds_limit() {
        let cfg = ScenarioConfig::default().with_circuit_load(2.0).with_packet_load(0.1);
        let m = simulate(&cfg, &short(), 2).unwrap();
        assert!(m.average_blocking() > 0.0);
        assert!(m.circuit_partition.mean() <= cfg.circuit_limit * cfg.cycle / cfg.line_rate + 1e-12);
    }

    #[test]
    fn low_traffic_polling_runs_extra_rounds() {
        let mut cfg = ScenarioConfig::default().with_circuit_load(0.1).with_packet_load(0.1);
        cfg.low_traffic_polling = true;
        let m = simulate(&cfg, &short(), 3).unwrap();
        assert!(m.polling_rounds > m.cycles, "{} rounds in {} cycles", m.polling_rounds, m.cycles);
        cfg.low_traffic_polling = false;
        assert_eq!(simulate(&cfg, &short(), 3).unwrap().polling_rounds, 0);
    }
}
