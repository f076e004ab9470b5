//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes plain strings and numbers and returns a JSON document;
//! the same functions are callable natively under a `_json` suffix.

use serde::Serialize;
use vdhla::experiment::{run_trial, ExperimentConfig};
use vdhla::hybrid::DEFAULT_MAX_DEPTH;
use vdhla::markov::{self, TransitionMatrix};
use vdhla::probability::UpdateScheme;
use vdhla::selfish::sweep::threshold;
use vdhla::selfish::{run_simulation, ControllerSpec, DefenseSpec, NikSpec, SimulationSpec};
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
struct TrialCurves {
    name: String,
    automaton: &'static str,
    iterations: usize,
    tnr: usize,
    tnas: usize,
    p_favorable: Option<f64>,
    /// Sampled `[iteration, cum_tnr, cum_tnas, p_favorable]` rows.
    points: Vec<(usize, usize, usize, Option<f64>)>,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

/// One seeded trial of an experiment config written in TOML, down-sampled to
/// at most `max_points` points.
pub fn automaton_trial_json(
    config_toml: &str,
    seed: u64,
    max_points: usize,
) -> Result<String, String> {
    let config = ExperimentConfig::from_toml(config_toml).map_err(|e| e.to_string())?;
    let trace = run_trial(&config, seed).map_err(|e| e.to_string())?;
    let outcome = trace.outcome();
    let stride = trace.len().div_ceil(max_points.max(1)).max(1);
    let points = trace
        .records
        .iter()
        .filter(|r| r.iteration % stride == 0 || r.iteration == trace.len())
        .map(|r| (r.iteration, r.cum_tnr, r.cum_tnas, r.p_favorable))
        .collect();
    Ok(to_json(&TrialCurves {
        name: config.name.clone(),
        automaton: config.automaton.label(),
        iterations: outcome.iterations,
        tnr: outcome.tnr,
        tnas: outcome.tnas,
        p_favorable: outcome.p_favorable,
        points,
    }))
}

#[derive(Debug, Serialize)]
struct SteadyState {
    stationary: Vec<f64>,
    effective: Option<Vec<f64>>,
}

fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>, String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
                .collect()
        })
        .collect()
}

/// Stationary distribution of a whitespace-separated matrix and, when a
/// reward matrix is given, the chain-averaged reward probability per action.
pub fn steady_state_json(matrix: &str, reward: &str) -> Result<String, String> {
    let t = TransitionMatrix::parse(matrix).map_err(|e| e.to_string())?;
    let stationary = markov::steady_state(&t).map_err(|e| e.to_string())?;
    let effective = if reward.trim().is_empty() {
        None
    } else {
        let r = parse_rows(reward)?;
        Some(markov::effective_stationary(&t, &r).map_err(|e| e.to_string())?)
    };
    Ok(to_json(&SteadyState {
        stationary,
        effective,
    }))
}

#[derive(Debug, Serialize)]
struct RevenueCurve {
    label: String,
    threshold: f64,
    crossed: bool,
    /// `[alpha, mean selfish revenue]` pairs.
    points: Vec<(f64, f64)>,
}

fn controller(name: &str) -> Result<ControllerSpec, String> {
    let scheme = UpdateScheme {
        reward: 0.1,
        penalty: 0.01,
    };
    Ok(match name {
        "fsla" => ControllerSpec::Fsla { depth: 2 },
        "svdhla" => ControllerSpec::Svdhla {
            depth: 2,
            scheme,
            max_depth: DEFAULT_MAX_DEPTH,
        },
        "avdhla" => ControllerSpec::Avdhla {
            depth: 2,
            scheme,
            max_depth: DEFAULT_MAX_DEPTH,
        },
        "fixed" => ControllerSpec::Fixed,
        other => return Err(format!("unknown controller {other:?}")),
    })
}

/// Mean selfish revenue against α for tie-breaking and for Nik with the
/// named controller, on the grid `step, 2·step, …` below 0.5.
pub fn selfish_curves_json(
    controller_name: &str,
    k_max: u64,
    tau: u64,
    theta: u64,
    blocks: u64,
    seeds: u64,
    step: f64,
) -> Result<String, String> {
    if !(0.005..0.5).contains(&step) {
        return Err("alpha step must be in [0.005, 0.5)".into());
    }
    if seeds == 0 || blocks == 0 {
        return Err("seeds and blocks must be positive".into());
    }
    let nik = NikSpec {
        k_max,
        tau,
        theta,
        ..NikSpec::new(controller(controller_name)?)
    };
    let defenses = [
        ("tie-breaking".to_string(), DefenseSpec::TieBreaking),
        (format!("nik-{controller_name}"), DefenseSpec::Nik(nik)),
    ];
    let alphas: Vec<f64> = (1..)
        .map(|i| (i as f64 * step * 1e6).round() / 1e6)
        .take_while(|&a| a < 0.5)
        .collect();
    let mut curves = Vec::new();
    for (label, defense) in defenses {
        let mut points = Vec::with_capacity(alphas.len());
        for &alpha in &alphas {
            let spec = SimulationSpec {
                total_blocks: blocks,
                ..SimulationSpec::new(alpha, defense.clone())
            };
            let mut total = 0.0;
            for seed in 0..seeds {
                total += run_simulation(&spec, seed)
                    .map_err(|e| e.to_string())?
                    .selfish_revenue;
            }
            points.push((alpha, total / seeds as f64));
        }
        let t = threshold(&points);
        curves.push(RevenueCurve {
            label,
            threshold: t.value(),
            crossed: matches!(t, vdhla::selfish::Threshold::At(_)),
            points,
        });
    }
    Ok(to_json(&curves))
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = automatonTrial)]
pub fn automaton_trial(config_toml: &str, seed: u32, max_points: u32) -> Result<String, JsError> {
    js(automaton_trial_json(
        config_toml,
        seed.into(),
        max_points as usize,
    ))
}

#[wasm_bindgen(js_name = steadyState)]
pub fn steady_state(matrix: &str, reward: &str) -> Result<String, JsError> {
    js(steady_state_json(matrix, reward))
}

#[wasm_bindgen(js_name = selfishCurves)]
pub fn selfish_curves(
    controller: &str,
    k_max: u32,
    tau: u32,
    theta: u32,
    blocks: u32,
    seeds: u32,
    step: f64,
) -> Result<String, JsError> {
    js(selfish_curves_json(
        controller,
        k_max.into(),
        tau.into(),
        theta.into(),
        blocks.into(),
        seeds.into(),
        step,
    ))
}
