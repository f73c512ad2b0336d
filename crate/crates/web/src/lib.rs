//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use hybrid_pon::analysis::{analyze, EtaPolicy};
use hybrid_pon::sim::{simulate, SimOptions};
use hybrid_pon::ScenarioConfig;

fn scenario(circuit_limit_gbps: f64) -> ScenarioConfig {
    ScenarioConfig { circuit_limit: circuit_limit_gbps * 1e9, ..ScenarioConfig::default() }
}

fn round(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

pub fn blocking_curve_value(circuit_limit_gbps: f64, max_chi: f64, points: usize) -> Result<Value, String> {
    let base = scenario(circuit_limit_gbps);
    base.validate().map_err(|e| e.to_string())?;
    let points = points.clamp(2, 400);
    let mut chi = Vec::with_capacity(points);
    let mut per_class = vec![Vec::with_capacity(points); base.classes.len()];
    let mut average = Vec::with_capacity(points);
    let mut occupancy = Vec::with_capacity(points);
    for i in 0..points {
        let x = max_chi * (i + 1) as f64 / points as f64;
        let a = analyze(&base.clone().with_circuit_load(x), EtaPolicy::ExpectedActive).map_err(|e| e.to_string())?;
        chi.push(round(x));
        for (series, b) in per_class.iter_mut().zip(&a.blocking.per_class) {
            series.push(round(*b));
        }
        average.push(round(a.blocking.average));
        occupancy.push(round(a.packet.mean_circuit_bandwidth / 1e9));
    }
    let rates: Vec<f64> = base.classes.rates().iter().map(|r| r / 1e6).collect();
    Ok(json!({
        "chi": chi,
        "class_rates_mbps": rates,
        "per_class": per_class,
        "average": average,
        "occupancy_gbps": occupancy,
    }))
}

pub fn delay_curve_value(chi: f64, circuit_limit_gbps: f64, points: usize) -> Result<Value, String> {
    let base = scenario(circuit_limit_gbps).with_circuit_load(chi);
    base.validate().map_err(|e| e.to_string())?;
    let limit = match analyze(&base, EtaPolicy::ExpectedActive) {
        Ok(a) => a.packet.stability_limit.value,
        Err(e) => return Err(e.to_string()),
    };
    let points = points.clamp(2, 400);
    let mut pi = Vec::new();
    let mut delay_ms = Vec::new();
    for i in 0..points {
        let x = limit * i as f64 / points as f64;
        let a = analyze(&base.clone().with_packet_load(x), EtaPolicy::ExpectedActive).map_err(|e| e.to_string())?;
        if let Some(d) = a.packet.delay.total() {
            pi.push(round(x));
            delay_ms.push(round(d * 1e3));
        }
    }
    Ok(json!({ "pi": pi, "delay_ms": delay_ms, "pi_max": round(limit) }))
}

pub fn simulate_value(
    chi: f64,
    pi: f64,
    circuit_limit_gbps: f64,
    holding: f64,
    seconds: f64,
    seed: u64,
    low_traffic_polling: bool,
) -> Result<Value, String> {
    let mut cfg = scenario(circuit_limit_gbps).with_mean_holding_time(holding).with_circuit_load(chi).with_packet_load(pi);
    cfg.low_traffic_polling = low_traffic_polling;
    let opts = SimOptions { duration: seconds, warmup: seconds * 0.1, ..SimOptions::default() };
    let m = simulate(&cfg, &opts, seed).map_err(|e| e.to_string())?;
    let analytic = analyze(&cfg, EtaPolicy::ExpectedActive).ok();
    Ok(json!({
        "cycles": m.cycles,
        "blocking": (0..cfg.classes.len()).map(|k| round(m.blocking(k))).collect::<Vec<_>>(),
        "average_blocking": round(m.average_blocking()),
        "mean_delay_ms": round(m.delay.mean() * 1e3),
        "delay_sd_ms": round(m.delay.std_dev() * 1e3),
        "occupancy_gbps": round(m.occupancy.mean() / 1e9),
        "unstable": m.unstable,
        "analysis_delay_ms": analytic.as_ref().and_then(|a| a.packet.delay.total()).map(|d| round(d * 1e3)),
        "analysis_blocking": analytic.as_ref().map(|a| round(a.blocking.average)),
    }))
}

fn to_js(v: Result<Value, String>) -> Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

/// Knapsack blocking and mean circuit bandwidth against circuit load.
#[wasm_bindgen]
pub fn blocking_curve(circuit_limit_gbps: f64, max_chi: f64, points: usize) -> Result<String, JsValue> {
    to_js(blocking_curve_value(circuit_limit_gbps, max_chi, points))
}

/// Mean packet delay against packet load, up to the stability limit.
#[wasm_bindgen]
pub fn delay_curve(chi: f64, circuit_limit_gbps: f64, points: usize) -> Result<String, JsValue> {
    to_js(delay_curve_value(chi, circuit_limit_gbps, points))
}

/// One short simulation run next to the analytic values.
#[wasm_bindgen]
pub fn simulate_point(
    chi: f64,
    pi: f64,
    circuit_limit_gbps: f64,
    holding: f64,
    seconds: f64,
    seed: u32,
    low_traffic_polling: bool,
) -> Result<String, JsValue> {
    to_js(simulate_value(chi, pi, circuit_limit_gbps, holding, seconds, seed as u64, low_traffic_polling))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocking_curve_shape() {
        let v = blocking_curve_value(2.0, 1.0, 10).unwrap();
        let avg = v["average"].as_array().unwrap();
        assert_eq!(avg.len(), 10);
        let xs: Vec<f64> = avg.iter().map(|x| x.as_f64().unwrap()).collect();
        assert!(xs.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(v["per_class"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn delay_curve_stops_before_the_limit() {
        let v = delay_curve_value(0.4, 2.0, 20).unwrap();
        let pi_max = v["pi_max"].as_f64().unwrap();
        assert!(v["pi"].as_array().unwrap().iter().all(|p| p.as_f64().unwrap() < pi_max));
        assert!(delay_curve_value(0.4, 20.0, 20).is_err());
    }

    #[test]
    fn short_simulation() {
        let v = simulate_value(0.2, 0.2, 2.0, 0.05, 0.2, 1, true).unwrap();
        assert_eq!(v["cycles"].as_u64(), Some(100));
        assert!(v["mean_delay_ms"].as_f64().unwrap() > 0.0);
    }
}
