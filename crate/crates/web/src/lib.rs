//! Browser demo: Chase decoding of one noisy row, BER sweeps on a small product code,
//! and the confidence model's score for a candidate set.
//!
//! The `*_json` functions hold the logic and are plain Rust; the `#[wasm_bindgen]`
//! wrappers only convert errors.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use pcfec::channel::{bipolar_map, ebn0_to_sigma, frame_rng};
use pcfec::confidence::{extract_features, FEATURE_NAMES};
use pcfec::harness::{simulate_point, SimConfig};
use pcfec::pyndiah::{compute_extrinsic_row, flag_top2};
use pcfec::{chase_decode, ComponentCode, ConfidenceModel, DecoderParams, Variant};
use rand::Rng;
use rand_distr::StandardNormal;

const MODEL_JSON: &str = include_str!("../../../params/confidence_ebch_256_239_p6.json");

fn shipped_model() -> ConfidenceModel {
    ConfidenceModel::from_json(MODEL_JSON).expect("shipped model parses")
}

#[derive(Serialize)]
struct CandidateView {
    bits: Vec<u8>,
    euclid: f64,
    destructive: f64,
}

#[derive(Serialize)]
struct RowView {
    n: usize,
    sigma: f64,
    transmitted: Vec<u8>,
    r: Vec<f64>,
    hard: Vec<u8>,
    lrp: Vec<usize>,
    test_patterns: usize,
    candidates: Vec<CandidateView>,
    decision: Option<usize>,
    decision_correct: bool,
    extrinsic: Vec<f64>,
    top2_flag: bool,
    features: Option<Vec<(String, f64)>>,
    model_score: Option<f64>,
    model_flag: Option<bool>,
}

/// Chase-decodes one random noisy codeword of `code_name`.
pub fn chase_row_json(
    code_name: &str,
    ebn0_db: f64,
    p: usize,
    beta: f64,
    t2: f64,
    seed: u64,
) -> Result<String, String> {
    let code = ComponentCode::by_name(code_name).map_err(|e| e.to_string())?;
    let sigma = ebn0_to_sigma(ebn0_db, code.product_rate()).map_err(|e| e.to_string())?;
    let mut rng = frame_rng(seed, 0);
    let msg: Vec<u8> = (0..code.k()).map(|_| rng.random::<bool>() as u8).collect();
    let transmitted = code.encode(&msg).map_err(|e| e.to_string())?;
    let r: Vec<f64> = bipolar_map(&transmitted)
        .into_iter()
        .map(|s| s + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let cs = chase_decode(&r, p, &code).map_err(|e| e.to_string())?;
    let candidates = cs
        .ranked()
        .iter()
        .map(|&i| CandidateView {
            bits: cs.candidate(i),
            euclid: cs.euclid()[i],
            destructive: cs.destructive(i, &r),
        })
        .collect();
    let decision = cs.decision();
    let (extrinsic, features, model_score, model_flag) = if cs.is_empty() {
        (vec![0.0; code.n()], None, None, None)
    } else {
        let l = compute_extrinsic_row(&r, &cs, beta).map_err(|e| e.to_string())?;
        let x = extract_features(&cs, sigma, &r).map_err(|e| e.to_string())?;
        let (score, flag) = shipped_model().predict_flag(&x);
        let named = FEATURE_NAMES
            .iter()
            .map(|s| s.to_string())
            .zip(x.0)
            .collect();
        (l, Some(named), Some(score), Some(flag))
    };
    let view = RowView {
        n: code.n(),
        sigma,
        decision_correct: decision.as_deref() == Some(&transmitted[..]),
        transmitted,
        hard: cs.hard_decision().to_vec(),
        lrp: cs.lrp().to_vec(),
        test_patterns: cs.test_patterns(),
        candidates,
        decision: cs.decision_index().map(|_| 0),
        extrinsic,
        top2_flag: flag_top2(&cs, t2),
        features,
        model_score,
        model_flag,
        r,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// BER/FER over a list of Eb/N0 points for one variant with the classic α/β schedule.
#[allow(clippy::too_many_arguments)]
pub fn sweep_json(
    code_name: &str,
    variant: &str,
    ebn0_list: &[f64],
    iterations: usize,
    p: usize,
    gamma: f64,
    t2: f64,
    frames: u32,
    seed: u64,
) -> Result<String, String> {
    let code = ComponentCode::by_name(code_name).map_err(|e| e.to_string())?;
    let variant: Variant = variant.parse().map_err(|e: pcfec::Error| e.to_string())?;
    let mut params = match variant {
        Variant::Genie => DecoderParams::genie(iterations, p),
        _ => DecoderParams::pyndiah_classic(iterations, p),
    };
    if variant != Variant::Genie {
        params.variant = variant;
        params.gamma = vec![gamma; params.half_iterations()];
        params.t2 = t2;
    }
    let model = shipped_model();
    let cfg = SimConfig {
        ebn0_db: ebn0_list.to_vec(),
        max_frames: u64::from(frames),
        fe_target: u64::MAX,
        seed,
        threads: 1,
    };
    let points = ebn0_list
        .iter()
        .map(|&e| simulate_point(&code, &params, Some(&model), e, &cfg))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

/// Score and flag of the shipped model for a 10-entry feature vector.
pub fn score_json(features: &[f64]) -> Result<String, String> {
    let x: [f64; 10] = features
        .try_into()
        .map_err(|_| format!("expected 10 features, got {}", features.len()))?;
    let model = shipped_model();
    let x = pcfec::FeatureVector(x);
    let (score, flag) = model.predict_flag(&x);
    serde_json::to_string(&serde_json::json!({
        "score": score,
        "probability": model.probability(&x),
        "flag": flag,
        "weights": model.weights,
        "bias": model.bias,
    }))
    .map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn chase_row(
    code_name: &str,
    ebn0_db: f64,
    p: usize,
    beta: f64,
    t2: f64,
    seed: u64,
) -> Result<String, JsError> {
    js(chase_row_json(code_name, ebn0_db, p, beta, t2, seed))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    code_name: &str,
    variant: &str,
    ebn0_list: Vec<f64>,
    iterations: usize,
    p: usize,
    gamma: f64,
    t2: f64,
    frames: u32,
    seed: u64,
) -> Result<String, JsError> {
    js(sweep_json(
        code_name, variant, &ebn0_list, iterations, p, gamma, t2, frames, seed,
    ))
}

#[wasm_bindgen]
pub fn score(features: Vec<f64>) -> Result<String, JsError> {
    js(score_json(&features))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chase_row_reports_ranked_candidates() {
        let out: serde_json::Value =
            serde_json::from_str(&chase_row_json("ebch_32_21", 4.0, 4, 0.5, 1.0, 3).unwrap())
                .unwrap();
        assert_eq!(out["n"], 32);
        assert_eq!(out["test_patterns"], 16);
        let cands = out["candidates"].as_array().unwrap();
        let metrics: Vec<f64> = cands
            .iter()
            .map(|c| c["euclid"].as_f64().unwrap())
            .collect();
        assert!(metrics.windows(2).all(|w| w[0] <= w[1]));
        assert!(chase_row_json("nope", 4.0, 4, 0.5, 1.0, 3).is_err());
    }

    #[test]
    fn sweep_returns_one_point_per_snr() {
        let out: serde_json::Value = serde_json::from_str(
            &sweep_json("ebch_32_21", "baseline", &[2.0, 3.0], 2, 3, 1.0, 0.0, 4, 1).unwrap(),
        )
        .unwrap();
        assert_eq!(out.as_array().unwrap().len(), 2);
        assert!(sweep_json("ebch_32_21", "turbo", &[2.0], 2, 3, 1.0, 0.0, 4, 1).is_err());
    }

    #[test]
    fn score_checks_length() {
        assert!(score_json(&[0.0; 9]).is_err());
        let v: serde_json::Value = serde_json::from_str(&score_json(&[0.5; 10]).unwrap()).unwrap();
        assert!(v["probability"].as_f64().unwrap() > 0.0);
    }
}
