//! Browser bindings for the Hadamard-square demo page in `www/`.
//!
//! Every export has a plain Rust counterpart (`*_json`, `slice_values`) so the
//! logic is testable off the browser.

use serde::Serialize;
use tucker_cross::bench::{core_memory_mb, density_at, run_pipeline_full, BenchConfig};
use tucker_cross::formats::element;
use wasm_bindgen::prelude::*;

/// Grid size cap for interactive use.
pub const MAX_N: usize = 128;

fn config(n: usize, terms: usize, seed: u64, eps_gram: f64) -> Result<BenchConfig, String> {
    if n > MAX_N {
        return Err(format!("n = {n} is above the demo limit {MAX_N}"));
    }
    let mut cfg = BenchConfig::random(n, terms, seed);
    cfg.eps_gram = eps_gram;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// Full benchmark report (schema `bench-v1`) as JSON.
pub fn hadamard_json(n: usize, terms: usize, seed: u64, eps_gram: f64) -> Result<String, String> {
    let cfg = config(n, terms, seed, eps_gram)?;
    let out = run_pipeline_full(&cfg).map_err(|e| e.to_string())?;
    serde_json::to_string(&out.report).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct MemoryRow {
    r: usize,
    mb: Vec<f64>,
}

/// Table of `r^d` storage in MB for `d = 3..=6`, one row per entry of a
/// comma-separated rank list.
pub fn memory_json(ranks: &str) -> Result<String, String> {
    let mut rows = Vec::new();
    for item in ranks.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let r: usize = item.parse().map_err(|_| format!("not a rank: {item:?}"))?;
        let mb = (3..=6)
            .map(|d| core_memory_mb(r, d))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        rows.push(MemoryRow { r, mb });
    }
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

/// Slice `k` of the squared density followed by the pointwise error of the
/// refined Tucker approximation, both `n x n` row-major.
pub fn slice_values(n: usize, terms: usize, seed: u64, eps_gram: f64, k: usize) -> Result<Vec<f64>, String> {
    let cfg = config(n, terms, seed, eps_gram)?;
    if k >= n {
        return Err(format!("slice {k} outside 0..{n}"));
    }
    let out = run_pipeline_full(&cfg).map_err(|e| e.to_string())?;
    let mut exact = Vec::with_capacity(n * n);
    let mut error = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let f = density_at(&cfg, i, j, k).powi(2);
            let approx = element(&out.output, i, j, k).map_err(|e| e.to_string())?;
            exact.push(f);
            error.push((f - approx).abs());
        }
    }
    exact.extend(error);
    Ok(exact)
}

#[wasm_bindgen]
pub fn run_hadamard(n: usize, terms: usize, seed: u32, eps_gram: f64) -> Result<String, JsError> {
    hadamard_json(n, terms, seed as u64, eps_gram).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn memory_table(ranks: &str) -> Result<String, JsError> {
    memory_json(ranks).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn density_slice(n: usize, terms: usize, seed: u32, eps_gram: f64, k: usize) -> Result<Vec<f64>, JsError> {
    slice_values(n, terms, seed as u64, eps_gram, k).map_err(|e| JsError::new(&e))
}
