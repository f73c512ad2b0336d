//! Equilibrium analysis of dynamic circuits as a stochastic knapsack.
//!
//! Circuits of `K` classes arrive as independent Poisson streams and hold a
//! fixed bandwidth for an exponential time. A request is admitted when its
//! bandwidth still fits under the circuit limit. The occupied bandwidth then
//! has a product-form equilibrium distribution which the Kaufman-Roberts
//! recursion evaluates in `O(capacity * K)` time.

use crate::error::{Error, Result};

/// Resolution at which bit rates are expressed before the common quantum
/// is computed.
pub const RATE_RESOLUTION: f64 = 1e6;

const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Circuit bit rates and request probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitClassSet {
    rates: Vec<f64>,
    probabilities: Vec<f64>,
    mean_rate: f64,
}

impl CircuitClassSet {
    pub fn new(rates: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidClasses("at least one class is required".into()));
        }
        if rates.len() != probabilities.len() {
            return Err(Error::InvalidClasses(format!(
                "{} rates but {} probabilities",
                rates.len(),
                probabilities.len()
            )));
        }
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::InvalidClasses(format!("rate {r} is not positive")));
        }
        if let Some(p) = probabilities.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidClasses(format!("probability {p} is negative")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidClasses(format!(
                "request probabilities sum to {total}, not 1"
            )));
        }
        let mean_rate = rates.iter().zip(&probabilities).map(|(b, p)| b * p).sum();
        Ok(Self { rates, probabilities, mean_rate })
    }

    /// Three classes of 52, 156 and 624 Mb/s requested in the proportions
    /// 53.56 : 28.88 : 15.56 (rescaled to sum to one).
    pub fn reference() -> Self {
        let weights = [0.5356, 0.2888, 0.1556];
        let total: f64 = weights.iter().sum();
        Self::new(
            vec![52e6, 156e6, 624e6],
            weights.iter().map(|w| w / total).collect(),
        )
        .expect("reference classes are valid")
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn rate(&self, class: usize) -> f64 {
        self.rates[class]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Mean requested bit rate, `sum p_k b_k`.
    pub fn mean_rate(&self) -> f64 {
        self.mean_rate
    }
}

/// The knapsack in integer bandwidth quanta.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedKnapsack {
    unit: f64,
    sizes: Vec<usize>,
    capacity: usize,
    loads: Vec<f64>,
}

impl NormalizedKnapsack {
    /// Builds a knapsack directly from quanta. Every size must be in
    /// `1..=capacity` and every load non-negative.
    pub fn from_parts(unit: f64, sizes: Vec<usize>, capacity: usize, loads: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() || sizes.len() != loads.len() {
            return Err(Error::InvalidClasses("sizes and loads must be non-empty and of equal length".into()));
        }
        if !(unit.is_finite() && unit > 0.0) {
            return Err(Error::InvalidClasses(format!("quantum {unit} is not positive")));
        }
        for (class, &size) in sizes.iter().enumerate() {
            if size == 0 {
                return Err(Error::InvalidClasses(format!("class {class} has zero size")));
            }
            if size > capacity {
                return Err(Error::ClassExceedsLimit {
                    class,
                    rate: size as f64 * unit,
                    limit: capacity as f64 * unit,
                });
            }
        }
        if let Some(l) = loads.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::InvalidClasses(format!("offered load {l} is negative")));
        }
        Ok(Self { unit, sizes, capacity, loads })
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Offered loads `p_k * lambda_c / mu`, i.e. mean circuits per class if
    /// nothing were blocked.
    pub fn loads(&self) -> &[f64] {
        &self.loads
    }
}

/// Expresses the classes and the circuit limit in integer multiples of the
/// greatest common quantum of the class rates.
pub fn normalize(
    classes: &CircuitClassSet,
    circuit_limit: f64,
    request_rate: f64,
    departure_rate: f64,
) -> Result<NormalizedKnapsack> {
    if !(circuit_limit.is_finite() && circuit_limit > 0.0) {
        return Err(Error::InvalidScenario(format!("circuit limit {circuit_limit} is not positive")));
    }
    if !(request_rate.is_finite() && request_rate >= 0.0) {
        return Err(Error::InvalidScenario(format!("request rate {request_rate} is negative")));
    }
    if !(departure_rate.is_finite() && departure_rate > 0.0) {
        return Err(Error::InvalidScenario(format!("departure rate {departure_rate} is not positive")));
    }

    let mut quanta = Vec::with_capacity(classes.len());
    for &rate in classes.rates() {
        let scaled = rate / RATE_RESOLUTION;
        let rounded = scaled.round();
        if rounded < 1.0 || (scaled - rounded).abs() > 1e-9 * scaled.max(1.0) {
            return Err(Error::NonIntegralRate { rate, unit: RATE_RESOLUTION });
        }
        quanta.push(rounded as u64);
    }
    let common = quanta.iter().copied().fold(0, gcd);
    let unit = common as f64 * RATE_RESOLUTION;

    // Floor, with a little slack so that e.g. 4 * 52 Mb/s is not lost to rounding.
    let capacity = ((circuit_limit / unit) * (1.0 + 1e-12)).floor() as usize;

    let sizes: Vec<usize> = quanta.iter().map(|q| (q / common) as usize).collect();
    for (class, (&size, &rate)) in sizes.iter().zip(classes.rates()).enumerate() {
        if size > capacity {
            return Err(Error::ClassExceedsLimit { class, rate, limit: circuit_limit });
        }
        let exact = size as f64 * unit;
        if (exact - rate).abs() > 1e-9 * rate {
            return Err(Error::NonIntegralRate { rate, unit });
        }
    }

    let loads = classes
        .probabilities()
        .iter()
        .map(|p| p * request_rate / departure_rate)
        .collect();

    NormalizedKnapsack::from_parts(unit, sizes, capacity, loads)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Equilibrium probabilities `q(beta)` of the occupied bandwidth, indexed in
/// quanta `beta = 0..=capacity`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyDistribution {
    q: Vec<f64>,
    unit: f64,
}

impl OccupancyDistribution {
    /// All mass on a single bandwidth value. Useful for saturation limits
    /// and for deterministic occupancy.
    pub fn point_mass(bandwidth: f64) -> Self {
        if bandwidth <= 0.0 {
            Self { q: vec![1.0], unit: 1.0 }
        } else {
            Self { q: vec![0.0, 1.0], unit: bandwidth }
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.q
    }

    pub fn capacity(&self) -> usize {
        self.q.len() - 1
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    /// `sum_beta f(beta * unit) q(beta)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.q
            .iter()
            .enumerate()
            .map(|(beta, &q)| if q == 0.0 { 0.0 } else { f(beta as f64 * self.unit) * q })
            .sum()
    }

    /// Mean occupied bandwidth in bit/s.
    pub fn mean(&self) -> f64 {
        self.expect(|beta| beta)
    }
}

/// Kaufman-Roberts recursion:
/// `g(beta) = (1/beta) sum_k size_k load_k g(beta - size_k)`, normalized.
pub fn kaufman_roberts(knapsack: &NormalizedKnapsack) -> OccupancyDistribution {
    let capacity = knapsack.capacity();
    let mut g = vec![0.0f64; capacity + 1];
    g[0] = 1.0;
    for beta in 1..=capacity {
        let mut acc = 0.0;
        for (&size, &load) in knapsack.sizes().iter().zip(knapsack.loads()) {
            if size <= beta {
                acc += size as f64 * load * g[beta - size];
            }
        }
        g[beta] = acc / beta as f64;
        // Rescaling all earlier terms by one factor leaves q unchanged.
        if g[beta] > 1e250 {
            let scale = 1.0 / g[beta];
            g[..=beta].iter_mut().for_each(|v| *v *= scale);
        }
    }
    let total: f64 = g.iter().sum();
    let q = g.into_iter().map(|v| v / total).collect();
    OccupancyDistribution { q, unit: knapsack.unit() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockingResult {
    /// Per-class blocking probabilities `B_k`.
    pub per_class: Vec<f64>,
    /// Request-weighted average `sum p_k B_k`.
    pub average: f64,
}

/// `B_k` sums `q` over the states with fewer than `size_k` free quanta.
pub fn blocking(
    occupancy: &OccupancyDistribution,
    knapsack: &NormalizedKnapsack,
    classes: &CircuitClassSet,
) -> BlockingResult {
    let q = occupancy.probabilities();
    let capacity = occupancy.capacity();
    let per_class: Vec<f64> = knapsack
        .sizes()
        .iter()
        .map(|&size| {
            let first = (capacity + 1).saturating_sub(size);
            q[first..].iter().sum::<f64>().clamp(0.0, 1.0)
        })
        .collect();
    let average = per_class
        .iter()
        .zip(classes.probabilities())
        .map(|(b, p)| b * p)
        .sum();
    BlockingResult { per_class, average }
}

/// Mean number of circuits in service, `sum_k load_k (1 - B_k)`.
pub fn mean_active_circuits(knapsack: &NormalizedKnapsack, blocking: &BlockingResult) -> f64 {
    knapsack
        .loads()
        .iter()
        .zip(&blocking.per_class)
        .map(|(load, b)| load * (1.0 - b))
        .sum()
}
