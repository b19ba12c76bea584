//! Iterative Chase–Pyndiah decoding of product codes with optional confidence-based
//! scaling of extrinsic messages.
//!
//! Each half-iteration ℓ Chase-decodes every row of R, computes extrinsic rows, normalizes
//! L to unit mean magnitude, scales flagged rows by γ_ℓ, sets R = Y + α_ℓ L and transposes
//! Y, R and L. The final hard decision is cleaned up with iterative BDD.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{bipolar, hard_bit};
use crate::chase::CandidateSet;
use crate::codec::{ibdd_in_place, ComponentCode};
use crate::confidence::{extract_features_tallied, ConfidenceModel, Tally};
use crate::error::{check_len, Error, Result};
use crate::matrix::{BitMatrix, SoftMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Plain Chase–Pyndiah; nothing is flagged.
    Baseline,
    /// Flag by the top-2 metric gap, then scale by γ.
    ScaledTop2,
    /// Flag by the logistic confidence model, then scale by γ.
    NnAssisted,
    /// Zero the messages of every wrong decision (needs the transmitted codeword).
    Genie,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Baseline,
        Variant::ScaledTop2,
        Variant::NnAssisted,
        Variant::Genie,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::ScaledTop2 => "scaled_top2",
            Variant::NnAssisted => "nn_assisted",
            Variant::Genie => "genie",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown variant `{s}`")))
    }
}

fn default_ibdd_iters() -> usize {
    2
}

/// Decoder configuration; α, β, γ hold one entry per half-iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderParams {
    pub variant: Variant,
    #[serde(alias = "I")]
    pub iterations: usize,
    pub p: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Empty means γ = 1 everywhere.
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub t2: f64,
    #[serde(default = "default_ibdd_iters")]
    pub ibdd_iters: usize,
}

/// Classic weight schedules for the first eight half-iterations; later ones repeat the last.
const CLASSIC_ALPHA: [f64; 8] = [0.0, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0, 1.0];
const CLASSIC_BETA: [f64; 8] = [0.2, 0.4, 0.6, 0.8, 1.0, 1.0, 1.0, 1.0];

impl DecoderParams {
    /// The classic Pyndiah α/β schedules (tuned for other codes; a fallback only).
    pub fn pyndiah_classic(iterations: usize, p: usize) -> Self {
        let pick = |tab: &[f64; 8], l: usize| tab[l.min(7)];
        Self {
            variant: Variant::Baseline,
            iterations,
            p,
            alpha: (0..2 * iterations)
                .map(|l| pick(&CLASSIC_ALPHA, l))
                .collect(),
            beta: (0..2 * iterations)
                .map(|l| pick(&CLASSIC_BETA, l))
                .collect(),
            gamma: Vec::new(),
            t2: 0.0,
            ibdd_iters: 2,
        }
    }

    /// Genie-aided reference: α = β = 1, wrong decisions get zero messages.
    pub fn genie(iterations: usize, p: usize) -> Self {
        Self {
            variant: Variant::Genie,
            iterations,
            p,
            alpha: vec![1.0; 2 * iterations],
            beta: vec![1.0; 2 * iterations],
            gamma: vec![0.0; 2 * iterations],
            t2: 0.0,
            ibdd_iters: 2,
        }
    }

    pub fn half_iterations(&self) -> usize {
        2 * self.iterations
    }

    pub fn gamma_at(&self, l: usize) -> f64 {
        match self.variant {
            Variant::Genie => 0.0,
            _ => self.gamma.get(l).copied().unwrap_or(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.half_iterations();
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.iterations == 0 {
            return bad("iterations must be ≥ 1".into());
        }
        if self.alpha.len() != h || self.beta.len() != h {
            return bad(format!("alpha and beta need {h} entries (2 × iterations)"));
        }
        if !self.gamma.is_empty() && self.gamma.len() != h {
            return bad(format!("gamma needs {h} entries or none"));
        }
        if self.alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return bad("alpha entries must be finite and ≥ 0".into());
        }
        if self.beta.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return bad("beta entries must be finite and > 0".into());
        }
        if self.gamma.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return bad("gamma entries must lie in [0, 1]".into());
        }
        if !self.t2.is_finite() {
            return bad("t2 must be finite".into());
        }
        Ok(())
    }

    /// α and β nondecreasing over the half-iterations.
    pub fn is_monotone(&self) -> bool {
        let nondecreasing = |v: &[f64]| v.windows(2).all(|w| w[0] <= w[1]);
        nondecreasing(&self.alpha) && nondecreasing(&self.beta)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
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

/// Side information a variant may need.
#[derive(Clone, Copy, Debug, Default)]
pub struct SideInfo<'a> {
    /// Channel noise standard deviation (a model feature).
    pub sigma: f64,
    pub model: Option<&'a ConfidenceModel>,
    /// Transmitted codeword, for the genie variant and for labeling.
    pub truth: Option<&'a BitMatrix>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct HalfIterationStats {
    /// Fraction of component decodings flagged (empty candidate sets count as flagged).
    pub flag_rate: f64,
    pub empty_rows: usize,
    /// mean |L| before normalization.
    pub mean_abs_l_raw: f64,
    /// mean |L| measured right after normalization, before γ scaling.
    pub mean_abs_l: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DecodeTrace {
    pub half_iterations: Vec<HalfIterationStats>,
    pub iterations: usize,
    pub component_decodes: u64,
    pub flagged: u64,
    pub tally: Tally,
}

impl DecodeTrace {
    /// Flagged component decodings over all half-iterations.
    pub fn flag_rate(&self) -> f64 {
        if self.component_decodes == 0 {
            0.0
        } else {
            self.flagged as f64 / self.component_decodes as f64
        }
    }
}

/// One component decoding, reported to observers before its extrinsic row is computed.
pub struct ComponentEvent<'a> {
    pub half_iteration: usize,
    pub index: usize,
    pub r: &'a [f64],
    pub candidates: &'a CandidateSet,
    pub truth_row: Option<&'a [u8]>,
    pub flagged: bool,
}

/// Extrinsic message of one component word.
pub fn compute_extrinsic_row(r: &[f64], cs: &CandidateSet, beta: f64) -> Result<Vec<f64>> {
    check_len(cs.n(), r.len())?;
    if cs.is_empty() {
        return Err(Error::InvalidParams(
            "extrinsic row needs a nonempty candidate set".into(),
        ));
    }
    let mut out = vec![0.0; r.len()];
    let mut seen = Vec::new();
    extrinsic_into(r, cs, beta, &mut out, &mut seen);
    Ok(out)
}

/// Only positions where some candidate leaves the hard decision can have a competitor.
fn extrinsic_into(r: &[f64], cs: &CandidateSet, beta: f64, out: &mut [f64], seen: &mut Vec<u64>) {
    let d = cs.decision_index().expect("nonempty candidate set");
    let e_d = cs.euclid()[d];
    let hard = cs.hard_decision();
    for (o, &w) in out.iter_mut().zip(hard) {
        *o = bipolar(w) * beta;
    }
    for &j in cs.flips_of(d) {
        out[j as usize] = -out[j as usize];
    }
    seen.clear();
    seen.resize(r.len().div_ceil(64), 0);
    for &idx in cs.ranked() {
        for &j in cs.flips_of(idx) {
            seen[j as usize / 64] |= 1 << (j % 64);
        }
    }
    let ranked = &cs.ranked()[1..];
    for (word_idx, &word) in seen.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let j = word_idx * 64 + bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let dj = cs.flipped(d, j);
            if let Some(c) = ranked.iter().copied().find(|&i| cs.flipped(i, j) != dj) {
                out[j] = extrinsic_value(hard[j] ^ u8::from(dj), cs.euclid()[c], e_d, r[j]);
            }
        }
    }
}

/// μ(d_j)·(d^E(d̄) − d^E(d))/4 − r_j.
#[inline]
pub fn extrinsic_value(
    decision_bit: u8,
    competitor_metric: f64,
    decision_metric: f64,
    r_j: f64,
) -> f64 {
    bipolar(decision_bit) * (competitor_metric - decision_metric) / 4.0 - r_j
}

/// Divides L by mean(|L|); an all-zero L is left as is. Returns the mean before scaling.
pub fn normalize_l(l: &mut SoftMatrix) -> f64 {
    let mean = l.mean_abs();
    if mean > 0.0 {
        let inv = 1.0 / mean;
        l.as_mut_slice().iter_mut().for_each(|v| *v *= inv);
    }
    mean
}

/// Top-2 criterion: flagged when fewer than two candidates exist or the metric gap between
/// the two best is below `t2`.
pub fn flag_top2(cs: &CandidateSet, t2: f64) -> bool {
    match (cs.decision_index(), cs.second_index()) {
        (Some(d), Some(s)) => cs.euclid()[s] - cs.euclid()[d] < t2,
        _ => true,
    }
}

/// R = Y + α L.
pub fn update_soft(y: &SoftMatrix, l: &SoftMatrix, alpha: f64) -> Result<SoftMatrix> {
    check_len(y.n(), l.n())?;
    let data = y
        .as_slice()
        .iter()
        .zip(l.as_slice())
        .map(|(a, b)| a + alpha * b)
        .collect();
    SoftMatrix::from_vec(y.n(), data)
}

/// Full decoder; returns the hard decision after iBDD and a trace.
pub fn decode_product(
    y: &SoftMatrix,
    params: &DecoderParams,
    code: &ComponentCode,
    side: &SideInfo<'_>,
) -> Result<(BitMatrix, DecodeTrace)> {
    decode_product_observed(y, params, code, side, &mut |_| {})
}

pub fn decode_product_observed(
    y: &SoftMatrix,
    params: &DecoderParams,
    code: &ComponentCode,
    side: &SideInfo<'_>,
    observer: &mut dyn FnMut(&ComponentEvent<'_>),
) -> Result<(BitMatrix, DecodeTrace)> {
    params.validate()?;
    let n = code.n();
    check_len(n, y.n())?;
    let model = match (params.variant, side.model) {
        (Variant::NnAssisted, None) => {
            return Err(Error::MissingInput {
                variant: "nn_assisted",
                what: "a confidence model",
            })
        }
        (_, m) => m,
    };
    let mut truth = match (params.variant, side.truth) {
        (Variant::Genie, None) => {
            return Err(Error::MissingInput {
                variant: "genie",
                what: "the transmitted codeword",
            })
        }
        (_, Some(t)) => {
            check_len(n, t.n())?;
            Some(t.clone())
        }
        (_, None) => None,
    };

    let mut y = y.clone();
    let mut r = y.clone();
    let mut l = SoftMatrix::zeros(n);
    let mut flags = vec![false; n];
    let mut cs = CandidateSet::default();
    let mut seen = Vec::new();
    let mut trace = DecodeTrace {
        iterations: params.iterations,
        ..Default::default()
    };

    for hl in 0..params.half_iterations() {
        let mut empty = 0usize;
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            let ri = r.row(i);
            cs.decode(ri, params.p, code)?;
            trace.component_decodes += 1;
            let truth_row = truth.as_ref().map(|t| t.row(i));
            if cs.is_empty() {
                empty += 1;
                flags[i] = true;
                l.row_mut(i).fill(0.0);
                continue;
            }
            flags[i] = match params.variant {
                Variant::Baseline => false,
                Variant::ScaledTop2 => flag_top2(&cs, params.t2),
                Variant::NnAssisted => {
                    let m = model.expect("checked above");
                    let x = extract_features_tallied(&cs, side.sigma, ri, &mut trace.tally)?;
                    m.score_tallied(&x, &mut trace.tally) > 0.0
                }
                Variant::Genie => {
                    let t = truth_row.expect("checked above");
                    let d = cs.decision_index().expect("nonempty");
                    (0..n).any(|j| cs.bit(d, j) != t[j])
                }
            };
            observer(&ComponentEvent {
                half_iteration: hl,
                index: i,
                r: ri,
                candidates: &cs,
                truth_row,
                flagged: flags[i],
            });
            extrinsic_into(ri, &cs, params.beta[hl], l.row_mut(i), &mut seen);
        }

        let raw = normalize_l(&mut l);
        let normalized = l.mean_abs();
        let gamma = params.gamma_at(hl);
        let flagged = flags.iter().filter(|&&f| f).count();
        if gamma != 1.0 {
            for (i, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
                l.row_mut(i).iter_mut().for_each(|v| *v *= gamma);
            }
        }
        trace.flagged += flagged as u64;
        trace.half_iterations.push(HalfIterationStats {
            flag_rate: flagged as f64 / n as f64,
            empty_rows: empty,
            mean_abs_l_raw: raw,
            mean_abs_l: normalized,
        });

        let alpha = params.alpha[hl];
        for ((rv, yv), lv) in r
            .as_mut_slice()
            .iter_mut()
            .zip(y.as_slice())
            .zip(l.as_slice())
        {
            *rv = yv + alpha * lv;
        }
        y.transpose_in_place();
        r.transpose_in_place();
        l.transpose_in_place();
        if let Some(t) = truth.as_mut() {
            t.transpose_in_place();
        }
    }

    let mut hard = BitMatrix::from_vec(n, r.as_slice().iter().map(|&v| hard_bit(v)).collect())?;
    ibdd_in_place(&mut hard, params.ibdd_iters, code);
    Ok((hard, trace))
}
