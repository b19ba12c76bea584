//! Logistic-regression confidence estimator for Chase decisions.
//!
//! Ten features summarize a [`CandidateSet`]; a single sigmoid neuron estimates the
//! probability that the decision is wrong. At decode time only the sign of the affine
//! score matters.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chase::CandidateSet;
use crate::codec::ComponentCode;
use crate::error::{Error, Result};
use crate::harness::{for_each_frame_collect, Frame};
use crate::pyndiah::{decode_product_observed, DecoderParams, SideInfo};

pub const NUM_FEATURES: usize = 10;

/// Serialized feature order; also the dataset CSV header (plus `label`).
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "sigma",
    "omega_ratio",
    "euclid_1",
    "euclid_2",
    "euclid_3",
    "euclid_4",
    "destructive_1",
    "destructive_2",
    "destructive_3",
    "destructive_4",
];

/// Operation counters for the confidence path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub feature_extractions: u64,
    pub destructive_evals: u64,
    pub model_evals: u64,
    pub multiply_adds: u64,
}

impl std::ops::AddAssign for Tally {
    fn add_assign(&mut self, o: Self) {
        self.feature_extractions += o.feature_extractions;
        self.destructive_evals += o.destructive_evals;
        self.model_evals += o.model_evals;
        self.multiply_adds += o.multiply_adds;
    }
}

/// [σ, |Ω|/2^p, d^E_(1..4)/n, D_(1..4)], candidates ranked by ascending d^E.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledSample {
    pub x: FeatureVector,
    /// 1 when the Chase decision is wrong.
    pub label: u8,
}

/// Builds the feature vector. With fewer than four candidates the worst present candidate
/// fills the remaining slots.
pub fn extract_features(cs: &CandidateSet, sigma: f64, r: &[f64]) -> Result<FeatureVector> {
    extract_features_tallied(cs, sigma, r, &mut Tally::default())
}

pub fn extract_features_tallied(
    cs: &CandidateSet,
    sigma: f64,
    r: &[f64],
    tally: &mut Tally,
) -> Result<FeatureVector> {
    if cs.is_empty() {
        return Err(Error::InvalidParams(
            "no candidates to extract features from".into(),
        ));
    }
    let ranked = cs.ranked();
    let n = cs.n() as f64;
    let mut x = [0.0; NUM_FEATURES];
    x[0] = sigma;
    x[1] = cs.len() as f64 / cs.test_patterns() as f64;
    for slot in 0..4 {
        let idx = ranked[slot.min(ranked.len() - 1)];
        x[2 + slot] = cs.euclid()[idx] / n;
        x[6 + slot] = cs.destructive(idx, r);
    }
    tally.feature_extractions += 1;
    tally.destructive_evals += 4;
    Ok(FeatureVector(x))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub samples: usize,
    #[serde(default)]
    pub epochs: usize,
    #[serde(default)]
    pub learning_rate: f64,
    #[serde(default)]
    pub batch: usize,
}

/// P̂ = sigmoid(wᵀx + ε).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceModel {
    pub weights: [f64; NUM_FEATURES],
    pub bias: f64,
    #[serde(default = "default_feature_order")]
    pub feature_order: Vec<String>,
    #[serde(default)]
    pub metadata: ModelMetadata,
}

fn default_feature_order() -> Vec<String> {
    FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl ConfidenceModel {
    pub fn new(weights: [f64; NUM_FEATURES], bias: f64) -> Self {
        Self {
            weights,
            bias,
            feature_order: default_feature_order(),
            metadata: ModelMetadata::default(),
        }
    }

    pub fn zeros() -> Self {
        Self::new([0.0; NUM_FEATURES], 0.0)
    }

    /// Affine score wᵀx + ε.
    pub fn score(&self, x: &FeatureVector) -> f64 {
        self.score_tallied(x, &mut Tally::default())
    }

    pub fn score_tallied(&self, x: &FeatureVector, tally: &mut Tally) -> f64 {
        let mut acc = self.bias;
        for (w, v) in self.weights.iter().zip(&x.0) {
            acc += w * v;
            tally.multiply_adds += 1;
        }
        tally.model_evals += 1;
        acc
    }

    /// Flag the decision as unreliable iff the score is strictly positive.
    pub fn predict_flag(&self, x: &FeatureVector) -> (f64, bool) {
        let s = self.score(x);
        (s, s > 0.0)
    }

    /// Estimated probability that the decision is erroneous.
    pub fn probability(&self, x: &FeatureVector) -> f64 {
        sigmoid(self.score(x))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParams(
                "model parameters must be finite".into(),
            ));
        }
        if self.feature_order != default_feature_order() {
            return Err(Error::InvalidParams(format!(
                "model feature order {:?} differs from {:?}",
                self.feature_order, FEATURE_NAMES
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Mean binary cross-entropy and its gradient (10 weights, then bias).
pub fn bce_loss_and_grad(
    model: &ConfidenceModel,
    samples: &[LabeledSample],
) -> (f64, [f64; NUM_FEATURES + 1]) {
    let mut loss = 0.0;
    let mut grad = [0.0; NUM_FEATURES + 1];
    for s in samples {
        let z = model.score(&s.x);
        let y = f64::from(s.label);
        // softplus(z) − y·z, written to avoid overflow.
        loss += z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z;
        let e = sigmoid(z) - y;
        for (g, v) in grad.iter_mut().zip(&s.x.0) {
            *g += e * v;
        }
        grad[NUM_FEATURES] += e;
    }
    let m = samples.len().max(1) as f64;
    grad.iter_mut().for_each(|g| *g /= m);
    (loss / m, grad)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    /// Train on standardized features and fold the scaling back into the weights.
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            epochs: 5000,
            batch: 1280,
            seed: 0,
            standardize: true,
        }
    }
}

/// Per-feature mean and standard deviation (constant features get scale 1).
fn feature_moments(samples: &[LabeledSample]) -> ([f64; NUM_FEATURES], [f64; NUM_FEATURES]) {
    let m = samples.len() as f64;
    let mut mean = [0.0; NUM_FEATURES];
    for s in samples {
        mean.iter_mut().zip(&s.x.0).for_each(|(a, v)| *a += v / m);
    }
    let mut var = [0.0; NUM_FEATURES];
    for s in samples {
        for k in 0..NUM_FEATURES {
            var[k] += (s.x.0[k] - mean[k]).powi(2) / m;
        }
    }
    let scale = var.map(|v| if v > 0.0 { v.sqrt() } else { 1.0 });
    (mean, scale)
}

fn class_counts(samples: &[LabeledSample]) -> (usize, usize) {
    let errs = samples.iter().filter(|s| s.label == 1).count();
    (errs, samples.len() - errs)
}

/// Mini-batch gradient descent on BCE from a zero initialization.
///
/// The sample order is shuffled once; each epoch visits the resulting batches in a fresh
/// random order. With `standardize`, descent runs on z-scored features and the returned
/// model is the equivalent one on raw features.
pub fn train_model(samples: &[LabeledSample], cfg: &TrainConfig) -> Result<ConfidenceModel> {
    let (errs, oks) = class_counts(samples);
    if errs == 0 || oks == 0 {
        return Err(Error::Dataset(format!(
            "training needs both classes (erroneous: {errs}, correct: {oks})"
        )));
    }
    if cfg.batch == 0 || cfg.learning_rate.is_nan() || cfg.learning_rate <= 0.0 {
        return Err(Error::InvalidParams(
            "batch must be ≥ 1 and learning rate > 0".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mean, scale) = if cfg.standardize {
        feature_moments(samples)
    } else {
        ([0.0; NUM_FEATURES], [1.0; NUM_FEATURES])
    };
    let mut data: Vec<LabeledSample> = samples
        .iter()
        .map(|s| {
            let mut x = s.x;
            for k in 0..NUM_FEATURES {
                x.0[k] = (x.0[k] - mean[k]) / scale[k];
            }
            LabeledSample { x, label: s.label }
        })
        .collect();
    data.shuffle(&mut rng);
    let batches: Vec<&[LabeledSample]> = data.chunks(cfg.batch).collect();
    let mut order: Vec<usize> = (0..batches.len()).collect();

    let mut w = [0.0; NUM_FEATURES];
    let mut b = 0.0;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &bi in &order {
            let batch = batches[bi];
            let mut g = [0.0; NUM_FEATURES];
            let mut gb = 0.0;
            for s in batch {
                let mut z = b;
                for (wk, xk) in w.iter().zip(&s.x.0) {
                    z += wk * xk;
                }
                let e = sigmoid(z) - f64::from(s.label);
                for (gk, xk) in g.iter_mut().zip(&s.x.0) {
                    *gk += e * xk;
                }
                gb += e;
            }
            let step = cfg.learning_rate / batch.len() as f64;
            for (wk, gk) in w.iter_mut().zip(&g) {
                *wk -= step * gk;
            }
            b -= step * gb;
        }
    }
    for k in 0..NUM_FEATURES {
        w[k] /= scale[k];
        b -= w[k] * mean[k];
    }
    let mut model = ConfidenceModel::new(w, b);
    model.metadata = ModelMetadata {
        description: String::new(),
        seed: cfg.seed,
        samples: samples.len(),
        epochs: cfg.epochs,
        learning_rate: cfg.learning_rate,
        batch: cfg.batch,
    };
    Ok(model)
}

/// Confusion matrix normalized per ground-truth class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Confusion {
    pub flagged_given_erroneous: f64,
    pub flagged_given_correct: f64,
    pub unflagged_given_erroneous: f64,
    pub unflagged_given_correct: f64,
    pub erroneous: usize,
    pub correct: usize,
}

impl Confusion {
    /// Rows (flagged, not flagged) × columns (erroneous d, correct d).
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [
            [self.flagged_given_erroneous, self.flagged_given_correct],
            [self.unflagged_given_erroneous, self.unflagged_given_correct],
        ]
    }
}

pub fn confusion(model: &ConfidenceModel, samples: &[LabeledSample]) -> Result<Confusion> {
    let (errs, oks) = class_counts(samples);
    if errs == 0 || oks == 0 {
        return Err(Error::Dataset(format!(
            "confusion matrix needs both classes (erroneous: {errs}, correct: {oks})"
        )));
    }
    let mut flag_err = 0usize;
    let mut flag_ok = 0usize;
    for s in samples {
        if model.predict_flag(&s.x).1 {
            if s.label == 1 {
                flag_err += 1;
            } else {
                flag_ok += 1;
            }
        }
    }
    let fe = flag_err as f64 / errs as f64;
    let fc = flag_ok as f64 / oks as f64;
    Ok(Confusion {
        flagged_given_erroneous: fe,
        flagged_given_correct: fc,
        unflagged_given_erroneous: 1.0 - fe,
        unflagged_given_correct: 1.0 - fc,
        erroneous: errs,
        correct: oks,
    })
}

/// Settings for decoder-generated training data.
#[derive(Clone, Debug)]
pub struct DatasetConfig {
    pub ebn0_db: Vec<f64>,
    pub frames_per_point: u64,
    pub seed: u64,
    pub threads: usize,
    /// Downsample the majority class to the minority count.
    pub balance: bool,
}

/// Runs the decoder on random frames and records (features, label) for every component
/// decoding with a nonempty candidate set, across all half-iterations.
pub fn generate_dataset(
    code: &ComponentCode,
    params: &DecoderParams,
    model: Option<&ConfidenceModel>,
    cfg: &DatasetConfig,
) -> Result<Vec<LabeledSample>> {
    if cfg.ebn0_db.is_empty() {
        return Err(Error::InvalidParams(
            "dataset needs at least one Eb/N0 point".into(),
        ));
    }
    params.validate()?;
    let mut samples = Vec::new();
    for (pi, &ebn0) in cfg.ebn0_db.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(pi as u64);
        let per_frame = for_each_frame_collect(cfg.frames_per_point, cfg.threads, |f| {
            let frame = Frame::generate(code, ebn0, seed, f)?;
            let side = SideInfo {
                sigma: frame.sigma,
                model,
                truth: Some(frame.codeword.bits()),
            };
            let mut local = Vec::new();
            decode_product_observed(&frame.y, params, code, &side, &mut |ev| {
                let (Some(d), Some(truth)) = (ev.candidates.decision_index(), ev.truth_row) else {
                    return;
                };
                let wrong = (0..ev.r.len()).any(|j| ev.candidates.bit(d, j) != truth[j]);
                let x = extract_features(ev.candidates, frame.sigma, ev.r).expect("nonempty set");
                local.push(LabeledSample {
                    x,
                    label: u8::from(wrong),
                });
            })?;
            Ok(local)
        })?;
        samples.extend(per_frame.into_iter().flatten());
    }
    let (errs, oks) = class_counts(&samples);
    if errs == 0 {
        return Err(Error::Dataset(format!(
            "no erroneous decisions among {oks} samples; lower the Eb/N0"
        )));
    }
    if cfg.balance {
        balance_classes(&mut samples, cfg.seed);
    }
    Ok(samples)
}

/// Downsamples the majority class; keeps the original relative order of survivors.
pub fn balance_classes(samples: &mut Vec<LabeledSample>, seed: u64) {
    let (errs, oks) = class_counts(samples);
    let (major, keep) = if errs > oks { (1u8, oks) } else { (0u8, errs) };
    let mut major_idx: Vec<usize> = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.label == major)
        .map(|(i, _)| i)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBA1A_2CE5);
    major_idx.shuffle(&mut rng);
    let mut drop = vec![false; samples.len()];
    for &i in &major_idx[keep..] {
        drop[i] = true;
    }
    let mut it = drop.iter();
    samples.retain(|_| !*it.next().unwrap());
}

/// Writes samples as CSV with the fixed header (10 features + `label`).
pub fn write_dataset_csv<W: Write>(samples: &[LabeledSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = FEATURE_NAMES.to_vec();
    header.push("label");
    w.write_record(&header)?;
    for s in samples {
        let mut rec: Vec<String> = s.x.0.iter().map(|v| format!("{v:e}")).collect();
        rec.push(s.label.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset_csv<R: Read>(input: R) -> Result<Vec<LabeledSample>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let expected: Vec<&str> = FEATURE_NAMES.iter().copied().chain(["label"]).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Dataset(format!("unexpected header {:?}", header)));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Dataset(format!("row {}: {e}", line + 1)))
        };
        let mut x = [0.0; NUM_FEATURES];
        for (k, v) in x.iter_mut().enumerate() {
            *v = parse(k)?;
        }
        let label = match rec[NUM_FEATURES].trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::Dataset(format!("row {}: label `{other}`", line + 1))),
        };
        out.push(LabeledSample {
            x: FeatureVector(x),
            label,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bipolar_map;
    use crate::chase::chase_decode;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn toy() -> ComponentCode {
        ComponentCode::by_name("ebch_32_21").unwrap()
    }

    #[test]
    fn features_of_noiseless_vector() {
        let code = toy();
        let c = code.encode(&[1; 21]).unwrap();
        let r = bipolar_map(&c);
        let cs = chase_decode(&r, 3, &code).unwrap();
        let x = extract_features(&cs, 0.5, &r).unwrap();
        assert_eq!(x.0[0], 0.5);
        assert_eq!(x.0[2], 0.0);
        assert_eq!(x.0[6], 0.0);
        assert!(x.0[1] > 0.0 && x.0[1] <= 1.0);
    }

    #[test]
    fn features_pad_with_worst_candidate() {
        let code = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        for _ in 0..2000 {
            let r: Vec<f64> = (0..32)
                .map(|_| 1.0 + 0.9 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let cs = chase_decode(&r, 2, &code).unwrap();
            if cs.len() == 3 {
                let x = extract_features(&cs, 0.9, &r).unwrap();
                assert_eq!(x.0[5], x.0[4]);
                assert_eq!(x.0[9], x.0[8]);
                assert!(x.0[2] <= x.0[3] && x.0[3] <= x.0[4]);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn empty_set_is_rejected() {
        let cs = CandidateSet::default();
        assert!(extract_features(&cs, 0.5, &[]).is_err());
    }

    #[test]
    fn zero_model_scores_zero_and_does_not_flag() {
        let m = ConfidenceModel::zeros();
        let x = FeatureVector([1.0; NUM_FEATURES]);
        assert_eq!(m.predict_flag(&x), (0.0, false));
        assert_eq!(m.probability(&x), 0.5);
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn initial_loss_is_ln2() {
        let samples: Vec<LabeledSample> = (0..10)
            .map(|i| LabeledSample {
                x: FeatureVector([i as f64; NUM_FEATURES]),
                label: (i % 2) as u8,
            })
            .collect();
        let (loss, _) = bce_loss_and_grad(&ConfidenceModel::zeros(), &samples);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn training_rejects_single_class() {
        let samples = vec![
            LabeledSample {
                x: FeatureVector::default(),
                label: 0
            };
            5
        ];
        assert!(train_model(&samples, &TrainConfig::default()).is_err());
        assert!(confusion(&ConfidenceModel::zeros(), &samples).is_err());
    }

    #[test]
    fn flag_everything_model_confusion() {
        let mut samples = vec![
            LabeledSample {
                x: FeatureVector::default(),
                label: 0
            };
            3
        ];
        samples.push(LabeledSample {
            x: FeatureVector::default(),
            label: 1,
        });
        let m = ConfidenceModel::new([0.0; NUM_FEATURES], 1.0);
        let c = confusion(&m, &samples).unwrap();
        assert_eq!(
            (c.flagged_given_erroneous, c.flagged_given_correct),
            (1.0, 1.0)
        );
        for col in 0..2 {
            assert!((c.matrix()[0][col] + c.matrix()[1][col] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn balancing_equalizes_classes() {
        let mut samples: Vec<LabeledSample> = (0..100)
            .map(|i| LabeledSample {
                x: FeatureVector([i as f64; NUM_FEATURES]),
                label: u8::from(i % 10 == 0),
            })
            .collect();
        balance_classes(&mut samples, 3);
        assert_eq!(class_counts(&samples), (10, 10));
    }

    #[test]
    fn csv_round_trip() {
        let samples = vec![
            LabeledSample {
                x: FeatureVector([0.1, 1.0, 0.2, 0.3, 0.4, 0.5, 1.5, 2.5, 3.5, 4.5]),
                label: 1,
            },
            LabeledSample {
                x: FeatureVector([0.5; NUM_FEATURES]),
                label: 0,
            },
        ];
        let mut buf = Vec::new();
        write_dataset_csv(&samples, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("sigma,omega_ratio,euclid_1"));
        assert_eq!(read_dataset_csv(&buf[..]).unwrap(), samples);
        assert!(read_dataset_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let mut m = ConfidenceModel::new([0.5, -1.0, 2.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.3, 0.4], -0.7);
        m.metadata.seed = 9;
        let back = ConfidenceModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let mut bad = m.clone();
        bad.feature_order.swap(0, 1);
        assert!(ConfidenceModel::from_json(&bad.to_json().unwrap()).is_err());
    }
}
