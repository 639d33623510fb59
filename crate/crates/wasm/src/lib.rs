//! Browser bindings for the demo page in `www/`. Every export returns a
//! JSON string; the `*_json` functions behind them run natively too.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use semadev_core::allan::{self, AllanCurve};
use semadev_core::embedding::read_jsonl_str;
use semadev_core::rng::mix_seed;
use semadev_core::scaling::{self, HorizonParams, HorizonResult, LocalSlope, SlopeFit};
use semadev_core::signal::{self, IncrementSeries};
use semadev_core::synth::{self, SignalKind};

const POINTS_PER_DECADE: usize = 20;
const MAX_LEN: usize = 200_000;

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub source_id: String,
    pub n_sentences: usize,
    pub curve: AllanCurve,
    pub reference: AllanCurve,
    pub fit: SlopeFit,
    pub local_slopes: Vec<LocalSlope>,
    pub horizon: HorizonResult,
}

#[derive(Debug, Serialize)]
pub struct ShuffleComparison {
    pub original: Analysis,
    /// Curve of the first shuffle, for plotting.
    pub shuffled_curve: AllanCurve,
    pub shuffled_alphas: Vec<f64>,
    pub mean_shuffled_alpha: f64,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn kind_from(name: &str, hurst: f64) -> Result<SignalKind, String> {
    match name {
        "white" => Ok(SignalKind::White { sigma: 1.0 }),
        "fgn" => Ok(SignalKind::Fgn { hurst }),
        "crossover" => Ok(SignalKind::Crossover {
            sigma: 1.0,
            amplitude: 0.15,
            hurst,
        }),
        other => Err(format!("unknown signal kind {other:?}")),
    }
}

fn check_len(n: usize) -> Result<(), String> {
    if n > MAX_LEN {
        return Err(format!("length {n} exceeds the demo limit of {MAX_LEN}"));
    }
    Ok(())
}

/// Curve, short-time fit, local slopes and horizon with default settings.
pub fn analyze_increments(inc: &IncrementSeries, threshold: f64) -> Result<Analysis, String> {
    let n_sentences = inc.len() + 1;
    let phase = signal::build_phase(inc);
    let grid = allan::make_tau_grid(phase.len(), POINTS_PER_DECADE).map_err(err)?;
    let curve = allan::adev_curve(phase.values(), &grid, inc.source_id.clone()).map_err(err)?;
    let fit =
        scaling::fit_exponent(&curve, n_sentences, scaling::DEFAULT_FIT_FRACTION).map_err(err)?;
    let params = HorizonParams {
        threshold,
        ..HorizonParams::default()
    };
    let local_slopes = scaling::local_slopes(&curve, params.window).map_err(err)?;
    let horizon = scaling::detect_horizon(&curve, &fit, &params, None).map_err(err)?;
    let anchor = allan::intermediate_tau(grid.taus(), fit.fit_tau_min, fit.fit_tau_max)
        .ok_or("empty fit window")?;
    let anchor_sigma = curve
        .points
        .iter()
        .find(|p| p.tau == anchor)
        .map_or(0.0, |p| p.sigma);
    let reference =
        allan::reference_curve(fit.alpha, anchor, anchor_sigma, &grid, "reference").map_err(err)?;
    Ok(Analysis {
        source_id: inc.source_id.clone(),
        n_sentences,
        curve,
        reference,
        fit,
        local_slopes,
        horizon,
    })
}

pub fn simulate_json(
    kind: &str,
    n: usize,
    seed: u32,
    hurst: f64,
    threshold: f64,
) -> Result<String, String> {
    check_len(n)?;
    let inc = synth::simulate(&kind_from(kind, hurst)?, n, seed as u64).map_err(err)?;
    serde_json::to_string(&analyze_increments(&inc, threshold)?).map_err(err)
}

pub fn shuffle_json(
    kind: &str,
    n: usize,
    seed: u32,
    hurst: f64,
    n_shuffles: usize,
) -> Result<String, String> {
    check_len(n)?;
    if n_shuffles == 0 {
        return Err("at least one shuffle is needed".into());
    }
    let inc = synth::simulate(&kind_from(kind, hurst)?, n, seed as u64).map_err(err)?;
    let original = analyze_increments(&inc, scaling::DEFAULT_THRESHOLD)?;
    let mut shuffled_curve = None;
    let mut alphas = Vec::with_capacity(n_shuffles);
    for i in 0..n_shuffles {
        let a = analyze_increments(
            &inc.permuted(mix_seed(seed as u64, 0, i as u64)),
            scaling::DEFAULT_THRESHOLD,
        )?;
        alphas.push(a.fit.alpha);
        shuffled_curve.get_or_insert(a.curve);
    }
    let mean = alphas.iter().sum::<f64>() / alphas.len() as f64;
    serde_json::to_string(&ShuffleComparison {
        original,
        shuffled_curve: shuffled_curve.expect("one shuffle ran"),
        shuffled_alphas: alphas,
        mean_shuffled_alpha: mean,
    })
    .map_err(err)
}

/// Analyzes pasted JSONL embeddings (one vector per line).
pub fn jsonl_json(text: &str, threshold: f64) -> Result<String, String> {
    let series = read_jsonl_str(text, "pasted").map_err(err)?;
    check_len(series.len())?;
    let inc = signal::increments(&series).map_err(err)?;
    serde_json::to_string(&analyze_increments(&inc, threshold)?).map_err(err)
}

#[wasm_bindgen]
pub fn simulate(
    kind: &str,
    n: usize,
    seed: u32,
    hurst: f64,
    threshold: f64,
) -> Result<String, JsValue> {
    simulate_json(kind, n, seed, hurst, threshold).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn shuffle_test(
    kind: &str,
    n: usize,
    seed: u32,
    hurst: f64,
    n_shuffles: usize,
) -> Result<String, JsValue> {
    shuffle_json(kind, n, seed, hurst, n_shuffles).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn analyze_jsonl(text: &str, threshold: f64) -> Result<String, JsValue> {
    jsonl_json(text, threshold).map_err(|e| JsValue::from_str(&e))
}
