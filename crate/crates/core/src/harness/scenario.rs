//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! C = 10 Gb/s
//! C_c = 2 Gb/s
//! b = 52 Mb/s, 156 Mb/s, 624 Mb/s
//! p = 0.5, 0.3, 0.2
//! chi = 0.4
//! sweep pi = 0.1, 0.3, 0.5
//! ```
//!
//! Numbers take an optional unit; a bare number is in bit/s, seconds or bits.

use crate::analysis::EtaPolicy;
use crate::config::{PacketSizeDistribution, ScenarioConfig};
use crate::error::{Error, Result};
use crate::knapsack::CircuitClassSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputKind {
    BlockingTable,
    DelayCurve,
    JitterReport,
    StabilityReport,
}

impl OutputKind {
    pub const ALL: [OutputKind; 4] =
        [Self::BlockingTable, Self::DelayCurve, Self::JitterReport, Self::StabilityReport];

    pub fn name(self) -> &'static str {
        match self {
            Self::BlockingTable => "blocking-table",
            Self::DelayCurve => "delay-curve",
            Self::JitterReport => "jitter-report",
            Self::StabilityReport => "stability-report",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    PacketLoad,
    CircuitLoad,
    CircuitLimit,
    HoldingTime,
    LowTrafficPolling,
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            Self::PacketLoad => "pi",
            Self::CircuitLoad => "chi",
            Self::CircuitLimit => "C_c",
            Self::HoldingTime => "holding",
            Self::LowTrafficPolling => "low_traffic_polling",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Self::PacketLoad, Self::CircuitLoad, Self::CircuitLimit, Self::HoldingTime, Self::LowTrafficPolling]
            .into_iter()
            .find(|p| p.key() == s)
    }

    /// Returns `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let cfg = cfg.clone();
        match self {
            Self::PacketLoad => cfg.with_packet_load(value),
            Self::CircuitLoad => cfg.with_circuit_load(value),
            Self::CircuitLimit => ScenarioConfig { circuit_limit: value, ..cfg },
            Self::HoldingTime => cfg.with_mean_holding_time(value),
            Self::LowTrafficPolling => ScenarioConfig { low_traffic_polling: value != 0.0, ..cfg },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: ScenarioConfig,
    pub eta: EtaPolicy,
    pub replications: usize,
    pub seed: u64,
    pub duration: f64,
    pub warmup: f64,
    pub unstable_factor: f64,
    pub outputs: Vec<OutputKind>,
    pub sweeps: Vec<Sweep>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            base: ScenarioConfig::default(),
            eta: EtaPolicy::ExpectedActive,
            replications: 5,
            seed: 1,
            duration: 10.0,
            warmup: 1.0,
            unstable_factor: 100.0,
            outputs: OutputKind::ALL.to_vec(),
            sweeps: Vec::new(),
        }
    }
}

impl ExperimentSpec {
    /// Every combination of sweep values, first sweep varying slowest.
    pub fn grid(&self) -> Vec<ScenarioConfig> {
        let mut points = vec![self.base.clone()];
        for sweep in &self.sweeps {
            points = points
                .iter()
                .flat_map(|cfg| sweep.values.iter().map(move |&v| sweep.param.apply(cfg, v)))
                .collect();
        }
        points
    }
}

#[derive(Clone, Copy)]
enum Quantity {
    Rate,
    Time,
    Size,
    Plain,
}

fn unit_scale(q: Quantity, unit: &str) -> Option<f64> {
    let scale = match (q, unit) {
        (_, "") => 1.0,
        (Quantity::Rate, "b/s" | "bit/s" | "bps") => 1.0,
        (Quantity::Rate, "kb/s") => 1e3,
        (Quantity::Rate, "Mb/s") => 1e6,
        (Quantity::Rate, "Gb/s") => 1e9,
        (Quantity::Time, "s") => 1.0,
        (Quantity::Time, "ms") => 1e-3,
        (Quantity::Time, "us" | "µs") => 1e-6,
        (Quantity::Time, "ns") => 1e-9,
        (Quantity::Size, "bit" | "bits") => 1.0,
        (Quantity::Size, "B") => 8.0,
        _ => return None,
    };
    Some(scale)
}

struct Line<'a> {
    number: usize,
    key: &'a str,
    value: &'a str,
}

impl Line<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { line: self.number, message: message.into() })
    }

    fn number(&self, token: &str, q: Quantity) -> Result<f64> {
        let token = token.trim();
        let split = token
            .char_indices()
            .find(|&(_, c)| c.is_whitespace() || (c.is_alphabetic() && c != 'e' && c != 'E') || c == 'µ')
            .map_or(token.len(), |(i, _)| i);
        let (num, unit) = token.split_at(split);
        let Ok(x) = num.parse::<f64>() else {
            return self.err(format!("`{token}` is not a number"));
        };
        let Some(scale) = unit_scale(q, unit.trim()) else {
            return self.err(format!("unknown unit `{}` for {}", unit.trim(), self.key));
        };
        if !x.is_finite() {
            return self.err(format!("`{token}` is not finite"));
        }
        Ok(x * scale)
    }

    fn scalar(&self, q: Quantity) -> Result<f64> {
        self.number(self.value, q)
    }

    fn list(&self, q: Quantity) -> Result<Vec<f64>> {
        self.value.split(',').map(|t| self.number(t, q)).collect()
    }

    fn integer(&self) -> Result<u64> {
        match self.value.trim().parse::<u64>() {
            Ok(n) => Ok(n),
            Err(_) => self.err(format!("`{}` is not a non-negative integer", self.value.trim())),
        }
    }

    fn flag(&self, token: &str) -> Result<f64> {
        match token.trim() {
            "on" | "true" | "1" => Ok(1.0),
            "off" | "false" | "0" => Ok(0.0),
            other => self.err(format!("`{other}` is not on/off")),
        }
    }
}

enum Load {
    Relative(f64),
    Rate(f64),
}

enum Holding {
    Time(f64),
    Rate(f64),
}

/// Parses a scenario file. Errors carry the 1-based line number.
pub fn parse_scenario(text: &str) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::default();
    let mut cfg = ScenarioConfig::default();
    let mut rates: Option<(usize, Vec<f64>)> = None;
    let mut probs: Option<(usize, Vec<f64>)> = None;
    let mut sizes: Option<(usize, Vec<f64>)> = None;
    let mut size_probs: Option<(usize, Vec<f64>)> = None;
    let mut circuit = Load::Relative(0.4);
    let mut packet = Load::Relative(0.5);
    let mut holding = Holding::Time(cfg.mean_holding_time());
    let mut seen: Vec<&str> = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        last_line = number;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((lhs, value)) = content.split_once('=') else {
            return Err(Error::Parse { line: number, message: format!("expected `key = value`, got `{content}`") });
        };
        let lhs = lhs.trim();
        if let Some(name) = lhs.strip_prefix("sweep ") {
            let line = Line { number, key: name.trim(), value };
            let Some(param) = SweepParam::parse(line.key) else {
                return line.err(format!("cannot sweep `{}`", line.key));
            };
            if spec.sweeps.iter().any(|s| s.param == param) {
                return line.err(format!("`{}` is swept twice", line.key));
            }
            let values = match param {
                SweepParam::PacketLoad | SweepParam::CircuitLoad => line.list(Quantity::Plain)?,
                SweepParam::CircuitLimit => line.list(Quantity::Rate)?,
                SweepParam::HoldingTime => line.list(Quantity::Time)?,
                SweepParam::LowTrafficPolling => value.split(',').map(|t| line.flag(t)).collect::<Result<_>>()?,
            };
            spec.sweeps.push(Sweep { param, values });
            continue;
        }

        let line = Line { number, key: lhs, value };
        if seen.contains(&lhs) {
            return line.err(format!("`{lhs}` is given twice"));
        }
        seen.push(lhs);
        match lhs {
            "C" => cfg.line_rate = line.scalar(Quantity::Rate)?,
            "C_c" => cfg.circuit_limit = line.scalar(Quantity::Rate)?,
            "J" => cfg.onus = line.integer()? as usize,
            "tau" => cfg.propagation_delay = line.scalar(Quantity::Time)?,
            "Gamma" => cfg.cycle = line.scalar(Quantity::Time)?,
            "t_g" => cfg.guard_time = line.scalar(Quantity::Time)?,
            "report_size" => cfg.report_bits = line.scalar(Quantity::Size)?,
            "b" => rates = Some((number, line.list(Quantity::Rate)?)),
            "p" => probs = Some((number, line.list(Quantity::Plain)?)),
            "chi" => circuit = Load::Relative(line.scalar(Quantity::Plain)?),
            "lambda_c" => circuit = Load::Rate(line.scalar(Quantity::Plain)?),
            "holding" => holding = Holding::Time(line.scalar(Quantity::Time)?),
            "mu" => holding = Holding::Rate(line.scalar(Quantity::Plain)?),
            "pi" => packet = Load::Relative(line.scalar(Quantity::Plain)?),
            "lambda_p" => packet = Load::Rate(line.scalar(Quantity::Plain)?),
            "packet_sizes" => sizes = Some((number, line.list(Quantity::Size)?)),
            "packet_probs" => size_probs = Some((number, line.list(Quantity::Plain)?)),
            "low_traffic_polling" => cfg.low_traffic_polling = line.flag(value)? != 0.0,
            "excess_bound_factor" => cfg.excess_bound_factor = line.scalar(Quantity::Plain)?,
            "eta" => {
                spec.eta = match value.trim() {
                    "expected" => EtaPolicy::ExpectedActive,
                    _ => EtaPolicy::Fixed(line.scalar(Quantity::Plain)?),
                }
            }
            "replications" => spec.replications = line.integer()? as usize,
            "seed" => spec.seed = line.integer()?,
            "duration" => spec.duration = line.scalar(Quantity::Time)?,
            "warmup" => spec.warmup = line.scalar(Quantity::Time)?,
            "unstable_factor" => spec.unstable_factor = line.scalar(Quantity::Plain)?,
            "outputs" => {
                spec.outputs = value
                    .split(',')
                    .map(|t| match OutputKind::parse(t.trim()) {
                        Some(k) => Ok(k),
                        None => line.err(format!("unknown output `{}`", t.trim())),
                    })
                    .collect::<Result<_>>()?;
            }
            other => return line.err(format!("unknown key `{other}`")),
        }
    }

    let at = |n: usize, e: Error| Error::Parse { line: n, message: e.to_string() };
    match (rates, probs) {
        (None, None) => {}
        (Some((n, b)), Some((_, p))) => cfg.classes = CircuitClassSet::new(b, p).map_err(|e| at(n, e))?,
        (Some((n, _)), None) | (None, Some((n, _))) => {
            return Err(Error::Parse { line: n, message: "`b` and `p` must be given together".into() })
        }
    }
    match (sizes, size_probs) {
        (None, None) => {}
        (Some((n, s)), Some((_, p))) => {
            if s.len() != p.len() {
                return Err(Error::Parse { line: n, message: "`packet_sizes` and `packet_probs` differ in length".into() });
            }
            cfg.packet_sizes = PacketSizeDistribution::new(s.into_iter().zip(p).collect()).map_err(|e| at(n, e))?;
        }
        (Some((n, _)), None) | (None, Some((n, _))) => {
            return Err(Error::Parse { line: n, message: "`packet_sizes` and `packet_probs` must be given together".into() })
        }
    }
    cfg.circuit_departure_rate = match holding {
        Holding::Time(h) => 1.0 / h,
        Holding::Rate(mu) => mu,
    };
    cfg = match circuit {
        Load::Relative(chi) => cfg.with_circuit_load(chi),
        Load::Rate(r) => ScenarioConfig { circuit_request_rate: r, ..cfg },
    };
    cfg = match packet {
        Load::Relative(pi) => cfg.with_packet_load(pi),
        Load::Rate(r) => ScenarioConfig { packet_rate: r, ..cfg },
    };
    cfg.validate().map_err(|e| at(last_line, e))?;
    if !(spec.duration > 0.0 && spec.warmup >= 0.0 && spec.warmup < spec.duration) {
        return Err(Error::Parse { line: last_line, message: "need 0 <= warmup < duration".into() });
    }
    spec.base = cfg;
    Ok(spec)
}

fn join(values: &[f64], unit: &str) -> String {
    values.iter().map(|v| format!("{v}{unit}")).collect::<Vec<_>>().join(", ")
}

/// Writes `spec` in the scenario format. Rates are emitted as absolute
/// values so that parsing the output reproduces `spec` exactly.
pub fn render(spec: &ExperimentSpec) -> String {
    let c = &spec.base;
    let on_off = |b: bool| if b { "on" } else { "off" };
    let mut out = String::new();
    let mut kv = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
    kv("C", format!("{} b/s", c.line_rate));
    kv("C_c", format!("{} b/s", c.circuit_limit));
    kv("J", c.onus.to_string());
    kv("tau", format!("{} s", c.propagation_delay));
    kv("Gamma", format!("{} s", c.cycle));
    kv("t_g", format!("{} s", c.guard_time));
    kv("report_size", format!("{} bit", c.report_bits));
    kv("b", join(c.classes.rates(), " b/s"));
    kv("p", join(c.classes.probabilities(), ""));
    kv("lambda_c", c.circuit_request_rate.to_string());
    kv("mu", c.circuit_departure_rate.to_string());
    kv("lambda_p", c.packet_rate.to_string());
    let entries = c.packet_sizes.entries();
    kv("packet_sizes", join(&entries.iter().map(|e| e.0).collect::<Vec<_>>(), " bit"));
    kv("packet_probs", join(&entries.iter().map(|e| e.1).collect::<Vec<_>>(), ""));
    kv("low_traffic_polling", on_off(c.low_traffic_polling).into());
    kv("excess_bound_factor", c.excess_bound_factor.to_string());
    kv(
        "eta",
        match spec.eta {
            EtaPolicy::ExpectedActive => "expected".into(),
            EtaPolicy::Fixed(v) => v.to_string(),
        },
    );
    kv("replications", spec.replications.to_string());
    kv("seed", spec.seed.to_string());
    kv("duration", format!("{} s", spec.duration));
    kv("warmup", format!("{} s", spec.warmup));
    kv("unstable_factor", spec.unstable_factor.to_string());
    kv("outputs", spec.outputs.iter().map(|o| o.name()).collect::<Vec<_>>().join(", "));
    for s in &spec.sweeps {
        let values = match s.param {
            SweepParam::LowTrafficPolling => {
                s.values.iter().map(|&v| on_off(v != 0.0)).collect::<Vec<_>>().join(", ")
            }
            SweepParam::CircuitLimit => join(&s.values, " b/s"),
            SweepParam::HoldingTime => join(&s.values, " s"),
            _ => join(&s.values, ""),
        };
        kv(&format!("sweep {}", s.param.key()), values);
    }
    out
}
