//! Browser bindings: each export takes plain numbers and returns JSON.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use maus_core::codes::{self, maus_code};
use maus_core::device::{self, SpeciesPresets};
use maus_core::dynamics::NoiseParams;
use maus_core::protocol::{CycleOptions, CycleSimulator};
use maus_core::HalfInteger;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 400;

#[derive(Serialize)]
struct IdealPoint {
    gn_t: f64,
    infidelity: f64,
    baseline: f64,
}

#[derive(Serialize)]
struct ProtocolPoint {
    gn_t: f64,
    corrected: f64,
    uncorrected: f64,
    expected_rounds: f64,
}

fn grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>, String> {
    if !(min > 0.0 && max > min) || !max.is_finite() {
        return Err(format!("need 0 < min < max, got [{min}, {max}]"));
    }
    if !(2..=MAX_POINTS).contains(&count) {
        return Err(format!("point count must be in 2..={MAX_POINTS}"));
    }
    let (a, b) = (min.log10(), max.log10());
    Ok((0..count).map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64)).collect())
}

fn spin_from_twice(twice: u32) -> Result<HalfInteger, String> {
    let spin = HalfInteger::from_twice(twice as i32);
    if !(3..=15).contains(&twice) || twice.is_multiple_of(2) {
        return Err(format!("2I = {twice} is not a code spin"));
    }
    Ok(spin)
}

fn json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Ideal-recovery infidelity of the MAUS code against the bare baseline.
pub fn ideal_curve_json(spin_twice: u32, min: f64, max: f64, count: usize) -> Result<String, String> {
    let code = maus_code(spin_from_twice(spin_twice)?).map_err(|e| e.to_string())?;
    let points = grid(min, max, count)?
        .into_iter()
        .map(|x| {
            let loss = codes::ideal_corrected_infidelity(&code, x).map_err(|e| e.to_string())?;
            Ok(IdealPoint { gn_t: x, infidelity: loss, baseline: codes::breakeven_baseline_infidelity(x) })
        })
        .collect::<Result<Vec<_>, String>>()?;
    json(&points)
}

/// One noisy correction cycle per wait time.
pub fn protocol_curve_json(
    spin_twice: u32,
    gamma_n: f64,
    gamma_e: f64,
    min: f64,
    max: f64,
    count: usize,
    quantize_wait: bool,
) -> Result<String, String> {
    let spin = spin_from_twice(spin_twice)?;
    if !(gamma_n > 0.0) {
        return Err("gamma_n must be positive".into());
    }
    let noise = NoiseParams::new(gamma_n, gamma_e).map_err(|e| e.to_string())?;
    let options = CycleOptions { quantize_wait, ..CycleOptions::default() };
    let sim = CycleSimulator::new(spin, noise, options).map_err(|e| e.to_string())?;
    let points = grid(min, max, count)?
        .into_iter()
        .map(|x| {
            let r = sim.run(x / gamma_n).map_err(|e| e.to_string())?;
            let x_eff = gamma_n * r.t_wait;
            Ok(ProtocolPoint {
                gn_t: x_eff,
                corrected: 1.0 - r.entanglement_fidelity().map_err(|e| e.to_string())?,
                uncorrected: codes::breakeven_baseline_infidelity(x_eff),
                expected_rounds: r.expected_rounds(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    json(&points)
}

/// NMR and ESR lines of a preset species at field `bz` (tesla).
pub fn spectrum_json(species: &str, bz: f64) -> Result<String, String> {
    let mut params = SpeciesPresets::bundled().get(species).map_err(|e| e.to_string())?.clone();
    if !(bz > 0.0) || !bz.is_finite() {
        return Err(format!("field must be positive, got {bz}"));
    }
    params.bz = bz;
    json(&device::spectrum(&params).map_err(|e| e.to_string())?)
}

#[wasm_bindgen]
pub fn ideal_curve(spin_twice: u32, min: f64, max: f64, count: usize) -> Result<String, JsValue> {
    ideal_curve_json(spin_twice, min, max, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn protocol_curve(
    spin_twice: u32,
    gamma_n: f64,
    gamma_e: f64,
    min: f64,
    max: f64,
    count: usize,
    quantize_wait: bool,
) -> Result<String, JsValue> {
    protocol_curve_json(spin_twice, gamma_n, gamma_e, min, max, count, quantize_wait).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn spectrum(species: &str, bz: f64) -> Result<String, JsValue> {
    spectrum_json(species, bz).map_err(|e| JsValue::from_str(&e))
}
