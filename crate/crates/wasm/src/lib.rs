//! Browser bindings for the interactive demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, so the page
//! needs no generated type glue beyond `wasm-bindgen`'s string passing.

use keyrate::analysis::{find_eta_threshold, sweep, tradeoff_curve};
use keyrate::{EcParams, Mode, Scheme};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const TOL: f64 = 1e-6;

fn parse_scheme(name: &str) -> Result<Scheme, String> {
    name.parse::<Scheme>().map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Thresholds {
    coarse: Option<f64>,
    refined: Option<f64>,
}

/// Coarse and refined rate curves over `[eta_min, eta_max]`.
pub fn rate_curves_json(scheme: &str, e_s: f64, eta_min: f64, eta_max: f64, steps: usize, f: f64) -> Result<String, String> {
    let ec = EcParams::new(f).map_err(|e| e.to_string())?;
    let rows = sweep(parse_scheme(scheme)?, e_s, eta_min, eta_max, steps, ec).map_err(|e| e.to_string())?;
    to_json(&rows)
}

/// Transmittance thresholds of both modes; `null` where none exists.
pub fn thresholds_json(scheme: &str, e_s: f64, f: f64) -> Result<String, String> {
    let ec = EcParams::new(f).map_err(|e| e.to_string())?;
    let scheme = parse_scheme(scheme)?;
    let find = |mode| {
        find_eta_threshold(scheme, mode, e_s, TOL, ec)
            .map(|t| t.map(|t| t.root()))
            .map_err(|e| e.to_string())
    };
    to_json(&Thresholds { coarse: find(Mode::Coarse)?, refined: find(Mode::Refined)? })
}

/// Threshold-versus-error-rate curve on `[0, es_max]`.
pub fn tradeoff_json(scheme: &str, es_max: f64, steps: usize, f: f64) -> Result<String, String> {
    let ec = EcParams::new(f).map_err(|e| e.to_string())?;
    let points = tradeoff_curve(parse_scheme(scheme)?, 0.0, es_max, steps, TOL, ec).map_err(|e| e.to_string())?;
    to_json(&points)
}

#[wasm_bindgen]
pub fn rate_curves(scheme: &str, e_s: f64, eta_min: f64, eta_max: f64, steps: usize, f: f64) -> Result<String, JsValue> {
    rate_curves_json(scheme, e_s, eta_min, eta_max, steps, f).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn thresholds(scheme: &str, e_s: f64, f: f64) -> Result<String, JsValue> {
    thresholds_json(scheme, e_s, f).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn tradeoff(scheme: &str, es_max: f64, steps: usize, f: f64) -> Result<String, JsValue> {
    tradeoff_json(scheme, es_max, steps, f).map_err(|e| JsValue::from_str(&e))
}
