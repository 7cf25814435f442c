use maus_wasm::{ideal_curve_json, protocol_curve_json, spectrum_json};
use serde_json::Value;

fn parse(s: &str) -> Vec<Value> {
    serde_json::from_str::<Value>(s).unwrap().as_array().unwrap().clone()
}

#[test]
fn ideal_curve_rows() {
    let rows = parse(&ideal_curve_json(5, 1e-3, 1.0, 7).unwrap());
    assert_eq!(rows.len(), 7);
    for r in &rows {
        assert!(r["infidelity"].as_f64().unwrap() <= r["baseline"].as_f64().unwrap());
    }
    assert!(ideal_curve_json(4, 1e-3, 1.0, 7).is_err());
    assert!(ideal_curve_json(3, 1.0, 1e-3, 7).is_err());
    assert!(ideal_curve_json(3, 1e-3, 1.0, 100_000).is_err());
}

#[test]
fn protocol_curve_rows() {
    let rows = parse(&protocol_curve_json(3, 1e-4, 5e-4, 1e-2, 1e-1, 3, true).unwrap());
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r["corrected"].as_f64().unwrap() < r["uncorrected"].as_f64().unwrap());
    }
    assert!(protocol_curve_json(3, 0.0, 5e-4, 1e-2, 1e-1, 3, true).is_err());
}

#[test]
fn spectrum_rows() {
    let rows = parse(&spectrum_json("arsenic", 1.0).unwrap());
    assert_eq!(rows.len(), 7);
    assert!(spectrum_json("arsenic", -1.0).is_err());
    assert!(spectrum_json("nope", 1.0).is_err());
}
