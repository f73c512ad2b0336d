//! Deterministic event queue.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    /// Bandwidth of a circuit is returned at the end of its last cycle.
    CircuitExpiry { onu: usize, circuit: u64 },
    PacketArrival { onu: usize, size: f64 },
    CircuitRequestArrival { onu: usize, class: usize, holding: f64 },
    /// An ONU starts an upstream packet burst: report, then queued packets.
    /// `olt_start` is the instant the burst begins to arrive at the OLT.
    GrantStart { onu: usize, olt_start: f64, duration: f64 },
    /// The last burst of a polling round has fully arrived at the OLT.
    UpstreamTransmissionEnd { round: u64 },
    LowTrafficPollRound,
    CycleStart { index: u64 },
}

impl EventKind {
    /// Tie-break order for events at the same instant.
    fn priority(&self) -> u8 {
        match self {
            EventKind::CircuitExpiry { .. } => 0,
            EventKind::PacketArrival { .. } => 1,
            EventKind::CircuitRequestArrival { .. } => 2,
            EventKind::GrantStart { .. } => 3,
            EventKind::UpstreamTransmissionEnd { .. } => 4,
            EventKind::LowTrafficPollRound => 5,
            EventKind::CycleStart { .. } => 6,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    seq: u64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed so that the max-heap pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.kind.priority().cmp(&self.kind.priority()))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: f64, kind: EventKind) {
        debug_assert!(time.is_finite());
        self.heap.push(Event { time, kind, seq: self.seq });
        self.seq += 1;
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
