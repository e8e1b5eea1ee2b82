#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

use serde_json::{json, Value};

pub fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/coupled_mathieu_hill.json")
}

pub fn bundled_json() -> Value {
    serde_json::from_str(&std::fs::read_to_string(bundled()).unwrap()).unwrap()
}

/// Decoupled linear oscillators, forcing only on the first one, slave at rest.
pub fn trivial_json() -> Value {
    json!({
        "version": 1,
        "dimension": 4,
        "b0": [[0, 1, 0, 0], [-3, 0, 0, 0], [0, 0, 0, 1], [0, 0, -5, 0]],
        "forcing_frequencies": [{"label": "w", "omega": 1.0}],
        "forcing_terms": [{"row": 1, "amplitude": 1.0, "frequency": "w", "phase": "cos"}],
        "initial_state": [0.1, 0, 0, 0],
        "simulation": {"t_end": 60.0, "step": 0.001, "stride": 10}
    })
}

/// `2 lambda_1 = lambda_s`: modes at 1.1 and 2.2 rad/s with a quadratic drive on the second.
pub fn internal_resonance_json() -> Value {
    json!({
        "version": 1,
        "dimension": 4,
        "b0": [[0, 1, 0, 0], [-1.21, 0, 0, 0], [0, 0, 0, 1], [0, 0, -4.84, 0]],
        "nonlinear_terms": [{"row": 3, "exponents": [2, 0, 0, 0], "coefficient": 1.0}],
        "initial_state": [0.1, 0, 0, 0],
        "masters": [0, 1]
    })
}

pub fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

pub fn cli(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_qpreduce"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn run_cli(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    cli(&args)
}

pub fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Imaginary parts of a `[[re, im], ...]` list, ascending.
pub fn sorted_im(v: &Value) -> Vec<f64> {
    let mut im: Vec<f64> = v.as_array().unwrap().iter().map(|z| z[1].as_f64().unwrap()).collect();
    im.sort_by(f64::total_cmp);
    im
}
