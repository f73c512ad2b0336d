//! Random traffic sources. Each source draws from its own ChaCha stream so
//! that changing one part of the workload leaves the others untouched.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;

use crate::config::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitRequestDraw {
    pub interarrival: f64,
    pub onu: usize,
    pub class: usize,
    pub holding: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketDraw {
    pub interarrival: f64,
    pub onu: usize,
    pub size: f64,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone)]
pub struct TrafficSources {
    onus: usize,
    circuit_gap: Option<Exp<f64>>,
    holding: Exp<f64>,
    class: WeightedIndex<f64>,
    packet_gap: Option<Exp<f64>>,
    sizes: Vec<f64>,
    size_index: WeightedIndex<f64>,
    circuit_arrivals: ChaCha8Rng,
    class_rng: ChaCha8Rng,
    holding_rng: ChaCha8Rng,
    circuit_onu: ChaCha8Rng,
    packet_arrivals: ChaCha8Rng,
    size_rng: ChaCha8Rng,
    packet_onu: ChaCha8Rng,
}

impl TrafficSources {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Self {
        let rate = |r: f64| (r > 0.0).then(|| Exp::new(r).expect("positive rate"));
        let entries = cfg.packet_sizes.entries();
        Self {
            onus: cfg.onus,
            circuit_gap: rate(cfg.circuit_request_rate),
            holding: Exp::new(cfg.circuit_departure_rate).expect("positive departure rate"),
            class: WeightedIndex::new(cfg.classes.probabilities()).expect("valid class weights"),
            packet_gap: rate(cfg.packet_rate),
            sizes: entries.iter().map(|e| e.0).collect(),
            size_index: WeightedIndex::new(entries.iter().map(|e| e.1)).expect("valid size weights"),
            circuit_arrivals: stream(seed, 1),
            class_rng: stream(seed, 2),
            holding_rng: stream(seed, 3),
            circuit_onu: stream(seed, 4),
            packet_arrivals: stream(seed, 5),
            size_rng: stream(seed, 6),
            packet_onu: stream(seed, 7),
        }
    }

    /// Next circuit request, or `None` when no circuits are offered.
    pub fn next_circuit_request(&mut self) -> Option<CircuitRequestDraw> {
        let gap = self.circuit_gap.as_ref()?;
        Some(CircuitRequestDraw {
            interarrival: gap.sample(&mut self.circuit_arrivals),
            onu: self.circuit_onu.random_range(0..self.onus),
            class: self.class.sample(&mut self.class_rng),
            holding: self.holding.sample(&mut self.holding_rng),
        })
    }

    pub fn next_packet(&mut self) -> Option<PacketDraw> {
        let gap = self.packet_gap.as_ref()?;
        Some(PacketDraw {
            interarrival: gap.sample(&mut self.packet_arrivals),
            onu: self.packet_onu.random_range(0..self.onus),
            size: self.sizes[self.size_index.sample(&mut self.size_rng)],
        })
    }
}
