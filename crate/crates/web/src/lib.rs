//! Browser bindings for the waiting-time plots: the exact delivery-time PMF
//! against its moment-matched geometric fit, and the relative error of the
//! closed-form mean approximations as the swap probability varies.

use qnetkit::chain::{ChainParams, Protocol};
use qnetkit::disttrack::{chain_distribution, chain_mean, moment_matched_geometric, TrackConfig};
use qnetkit::formulas;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps interactive requests short enough for the main thread.
const MAX_LEVEL: u32 = 4;
const MAX_POINTS: u32 = 200;

#[derive(Debug, Serialize)]
pub struct PmfOverlay {
    pub mean: f64,
    pub captured_mass: f64,
    /// Time of the largest absolute gap between the two curves.
    pub t_star: usize,
    pub t: Vec<usize>,
    pub exact: Vec<f64>,
    pub geometric: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ErrorRow {
    pub p_s: f64,
    pub exact: f64,
    pub mean_only: f64,
    pub three_over_two: f64,
    pub geometric_level: f64,
    pub det_swap: f64,
}

fn params(n: u32, p_g: f64, p_s: f64) -> Result<ChainParams, String> {
    if n == 0 || n > MAX_LEVEL {
        return Err(format!("n must be between 1 and {MAX_LEVEL}"));
    }
    let p = ChainParams::new(n, p_g, p_s);
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

pub fn pmf_overlay_data(n: u32, p_g: f64, p_s: f64, t_max: usize) -> Result<PmfOverlay, String> {
    let p = params(n, p_g, p_s)?;
    let d = chain_distribution(&p, &Protocol::swap_only(n), &TrackConfig::default()).map_err(|e| e.to_string())?;
    let g = moment_matched_geometric(&d).map_err(|e| e.to_string())?;
    let t_star = (1..=d.t_trunc)
        .max_by(|&a, &b| {
            let da = (d.pmf_at(a) - g.pmf_at(a)).abs();
            let db = (d.pmf_at(b) - g.pmf_at(b)).abs();
            da.total_cmp(&db)
        })
        .unwrap_or(1);
    let t: Vec<usize> = (1..=t_max.min(d.t_trunc)).collect();
    Ok(PmfOverlay {
        mean: d.mean(),
        captured_mass: d.captured_mass,
        t_star,
        exact: t.iter().map(|&i| d.pmf_at(i)).collect(),
        geometric: t.iter().map(|&i| g.pmf_at(i)).collect(),
        t,
    })
}

fn rel(a: f64, e: f64) -> f64 {
    (a - e).abs() / e
}

pub fn error_curve_data(n: u32, p_g: f64, points: u32) -> Result<Vec<ErrorRow>, String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must be between 2 and {MAX_POINTS}"));
    }
    (0..points)
        .map(|i| {
            let p_s = 0.05 + 0.9 * f64::from(i) / f64::from(points - 1);
            let p = params(n, p_g, p_s)?;
            let exact = chain_mean(&p, &Protocol::swap_only(n), &TrackConfig::default())
                .map_err(|e| e.to_string())?
                .mean;
            let f = |r: Result<f64, formulas::FormulaError>| r.map_err(|e| e.to_string());
            Ok(ErrorRow {
                p_s,
                exact,
                mean_only: rel(f(formulas::mean_only(&p))?, exact),
                three_over_two: rel(f(formulas::three_over_two(&p))?, exact),
                geometric_level: rel(f(formulas::geometric_level_mean(&p))?, exact),
                det_swap: rel(f(formulas::det_swap_mean(p.segments(), p_g))?, exact),
            })
        })
        .collect()
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plot data serializes")
}

/// Exact PMF and geometric fit as JSON.
#[wasm_bindgen]
pub fn pmf_overlay(n: u32, p_g: f64, p_s: f64, t_max: u32) -> Result<String, JsError> {
    pmf_overlay_data(n, p_g, p_s, t_max as usize)
        .map(|d| to_json(&d))
        .map_err(|e| JsError::new(&e))
}

/// Relative errors of the four approximations on `points` swap
/// probabilities in [0.05, 0.95], as JSON.
#[wasm_bindgen]
pub fn error_curves(n: u32, p_g: f64, points: u32) -> Result<String, JsError> {
    error_curve_data(n, p_g, points)
        .map(|d| to_json(&d))
        .map_err(|e| JsError::new(&e))
}
