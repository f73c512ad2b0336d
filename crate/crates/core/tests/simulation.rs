use hybrid_pon::analysis::{analyze, EtaPolicy};
use hybrid_pon::sim::{simulate, SimOptions};
use hybrid_pon::ScenarioConfig;
use proptest::prelude::*;

fn opts(duration: f64) -> SimOptions {
    SimOptions { duration, warmup: duration / 10.0, ..SimOptions::default() }
}

#[test]
fn light_packet_delay_is_bounded_by_cycle_structure() {
    // With no circuits and light load a packet waits for its ONU's report,
    // then for the grant in the next cycle.
    let cfg = ScenarioConfig::default().with_circuit_load(0.0).with_packet_load(0.05);
    let m = simulate(&cfg, &opts(2.0), 1).unwrap();
    let d = m.delay.mean();
    assert!(d > cfg.cycle && d < 2.0 * cfg.cycle, "{d}");
}

#[test]
fn occupancy_matches_knapsack_mean() {
    let cfg = ScenarioConfig::default().with_mean_holding_time(0.05).with_packet_load(0.0);
    let m = simulate(&cfg, &opts(40.0), 3).unwrap();
    let a = analyze(&cfg, EtaPolicy::ExpectedActive).unwrap();
    let rel = m.occupancy.mean() / a.packet.mean_circuit_bandwidth - 1.0;
    // Cycle-granular admission and release stretch holding times slightly.
    assert!(rel > -0.03 && rel < 0.12, "{rel}");
}

#[test]
fn class_mix_follows_request_probabilities() {
    let cfg = ScenarioConfig::default().with_mean_holding_time(0.02).with_packet_load(0.0);
    let m = simulate(&cfg, &opts(40.0), 4).unwrap();
    let offered: u64 = m.classes.iter().map(|c| c.offered).sum();
    assert!(offered > 30_000);
    // The reference weights are renormalized to sum to one.
    let expected = [0.5356 / 0.98, 0.2888 / 0.98, 0.1556 / 0.98];
    for (k, p) in expected.into_iter().enumerate() {
        assert!((m.offered_fraction(k) - p).abs() < 0.01, "class {k}: {}", m.offered_fraction(k));
    }
}

#[test]
fn circuits_at_the_limit_never_overflow_the_cycle() {
    let cfg = ScenarioConfig { circuit_limit: 4e9, ..ScenarioConfig::default() }
        .with_circuit_load(3.0)
        .with_mean_holding_time(0.01)
        .with_packet_load(0.3);
    let m = simulate(&cfg, &opts(2.0), 5).unwrap();
    assert!(m.occupancy.mean() <= 4e9);
    assert_eq!(m.circuits.jitter_violations, 0);
}

#[test]
fn infeasible_cycles_are_reported() {
    let cfg = ScenarioConfig { guard_time: 100e-6, ..ScenarioConfig::default() };
    assert!(matches!(simulate(&cfg, &opts(0.1), 1), Err(hybrid_pon::Error::InfeasibleCycle { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn conservation_and_determinism(seed in any::<u64>(), chi in 0.0f64..1.0, pi in 0.0f64..0.6, ltp in any::<bool>()) {
        let mut cfg = ScenarioConfig::default().with_circuit_load(chi).with_packet_load(pi).with_mean_holding_time(0.05);
        cfg.low_traffic_polling = ltp;
        let a = simulate(&cfg, &opts(0.1), seed).unwrap();
        prop_assert_eq!(a.packets_arrived, a.packets_sent + a.packets_queued);
        for c in &a.classes {
            prop_assert_eq!(c.offered, c.admitted + c.blocked);
        }
        let b = simulate(&cfg, &opts(0.1), seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
