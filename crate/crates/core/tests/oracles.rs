mod common;

use common::{ctmc_occupancy, erlang_b};
use hybrid_pon::knapsack::{blocking, kaufman_roberts, CircuitClassSet, NormalizedKnapsack};
use proptest::prelude::*;

fn single_class(servers: usize, load: f64) -> f64 {
    let k = NormalizedKnapsack::from_parts(1.0, vec![1], servers, vec![load]).unwrap();
    let classes = CircuitClassSet::new(vec![1.0], vec![1.0]).unwrap();
    blocking(&kaufman_roberts(&k), &k, &classes).per_class[0]
}

#[test]
fn erlang_b_known_values() {
    // Tabulated: B(10, 5) = 0.018384, B(1, 1) = 0.5.
    assert!((erlang_b(10, 5.0) - 0.018_384).abs() < 1e-6);
    assert_eq!(erlang_b(1, 1.0), 0.5);
    assert!((single_class(10, 5.0) - 0.018_384).abs() < 1e-6);
}

#[test]
fn single_class_is_erlang_b() {
    for servers in 1..=50 {
        for load in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
            let got = single_class(servers, load);
            let want = erlang_b(servers, load);
            assert!((got - want).abs() < 1e-9, "m={servers} rho={load}: {got} vs {want}");
        }
    }
}

#[test]
fn ctmc_oracle_sanity() {
    // One class of size 1 is M/M/m/m: q is a truncated Poisson.
    let q = ctmc_occupancy(&[1], 3, &[2.0]);
    let w = [1.0, 2.0, 2.0, 4.0 / 3.0];
    let total: f64 = w.iter().sum();
    for (a, b) in q.iter().zip(w) {
        assert!((a - b / total).abs() < 1e-12);
    }
}

#[test]
fn reference_classes_against_ctmc() {
    // 52/156/624 Mb/s in a 1.248 Gb/s limit: sizes 1, 3, 12 with capacity 24.
    let sizes = vec![1, 3, 12];
    let loads = vec![3.0, 1.5, 0.7];
    let k = NormalizedKnapsack::from_parts(52e6, sizes.clone(), 24, loads.clone()).unwrap();
    let q = kaufman_roberts(&k);
    let oracle = ctmc_occupancy(&sizes, 24, &loads);
    for (a, b) in q.probabilities().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn recursion_matches_ctmc(
        capacity in 1usize..=8,
        classes in prop::collection::vec((1usize..=8, 0.01f64..5.0), 1..=3),
    ) {
        let sizes: Vec<usize> = classes.iter().map(|c| c.0.min(capacity)).collect();
        let loads: Vec<f64> = classes.iter().map(|c| c.1).collect();
        let k = NormalizedKnapsack::from_parts(1.0, sizes.clone(), capacity, loads.clone()).unwrap();
        let q = kaufman_roberts(&k);
        let oracle = ctmc_occupancy(&sizes, capacity, &loads);
        for (a, b) in q.probabilities().iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-8, "{:?} vs {:?}", q.probabilities(), oracle);
        }
    }
}
