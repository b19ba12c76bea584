//! Monte Carlo BER/FER simulation, Eb/N0 sweeps and random-search parameter tuning.
//!
//! Frame `f` of a run with seed `s` is fully determined by `(s, f)`: message bits and
//! channel noise both come from [`frame_rng`]. Frames are decoded in batches and reduced
//! in frame order, so a run stops at the same frame whatever the thread count.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ebn0_to_esn0, ebn0_to_sigma, frame_rng, transmit_with};
use crate::codec::{pc_encode, ComponentCode, PcCodeword};
use crate::confidence::ConfidenceModel;
use crate::error::{Error, Result};
use crate::matrix::SoftMatrix;
use crate::pyndiah::{decode_product, DecoderParams, SideInfo};

/// One transmitted frame.
#[derive(Clone, Debug)]
pub struct Frame {
    pub codeword: PcCodeword,
    pub y: SoftMatrix,
    pub sigma: f64,
}

impl Frame {
    pub fn generate(code: &ComponentCode, ebn0_db: f64, seed: u64, index: u64) -> Result<Self> {
        let sigma = ebn0_to_sigma(ebn0_db, code.product_rate())?;
        Ok(Self::generate_with_sigma(code, sigma, seed, index))
    }

    pub fn generate_with_sigma(code: &ComponentCode, sigma: f64, seed: u64, index: u64) -> Self {
        let mut rng = frame_rng(seed, index);
        let k = code.k();
        let msg: Vec<u8> = (0..k * k).map(|_| rng.random::<bool>() as u8).collect();
        let codeword = pc_encode(&msg, code).expect("message has k² bits");
        let y = transmit_with(&codeword, sigma, &mut rng);
        Self { codeword, y, sigma }
    }
}

/// Maps `f` over frame indices `range`, in parallel when enabled, preserving order.
fn map_frames<T, F>(range: std::ops::Range<u64>, threads: usize, f: &F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    #[cfg(feature = "parallel")]
    if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
        return pool.install(|| range.into_par_iter().map(f).collect());
    }
    let _ = threads;
    range.map(f).collect()
}

/// Runs `f` on frames `0..frames` and returns the results in frame order.
pub fn for_each_frame_collect<T, F>(frames: u64, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    map_frames(0..frames, threads, &f)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub ebn0_db: Vec<f64>,
    pub max_frames: u64,
    /// Stop a point once this many frame errors are counted.
    pub fe_target: u64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            ebn0_db: Vec::new(),
            max_frames: 10_000,
            fe_target: 100,
            seed: 1,
            threads: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fe_target == 0 || self.max_frames == 0 {
            return Err(Error::InvalidParams(
                "fe_target and max_frames must be ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

/// One row of a BER table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub ebn0: f64,
    pub esn0: f64,
    pub frames: u64,
    pub fe: u64,
    pub fer: f64,
    pub ber: f64,
    pub be: u64,
    pub flag_rate: f64,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default)]
struct FrameOutcome {
    bit_errors: u64,
    flagged: u64,
    decodes: u64,
}

fn elapsed_seconds(start: Option<std::time::Instant>) -> f64 {
    start.map(|s| s.elapsed().as_secs_f64()).unwrap_or(0.0)
}

fn now() -> Option<std::time::Instant> {
    // std::time::Instant is unavailable on wasm32-unknown-unknown.
    if cfg!(target_arch = "wasm32") {
        None
    } else {
        Some(std::time::Instant::now())
    }
}

/// Simulates one Eb/N0 point until `fe_target` frame errors or `max_frames` frames.
pub fn simulate_point(
    code: &ComponentCode,
    params: &DecoderParams,
    model: Option<&ConfidenceModel>,
    ebn0_db: f64,
    cfg: &SimConfig,
) -> Result<SimPoint> {
    cfg.validate()?;
    params.validate()?;
    let rate = code.product_rate();
    let sigma = ebn0_to_sigma(ebn0_db, rate)?;
    let start = now();
    let one = |f: u64| -> Result<FrameOutcome> {
        let frame = Frame::generate_with_sigma(code, sigma, cfg.seed, f);
        let side = SideInfo {
            sigma,
            model,
            truth: Some(frame.codeword.bits()),
        };
        let (hard, trace) = decode_product(&frame.y, params, code, &side)?;
        Ok(FrameOutcome {
            bit_errors: hard.hamming_distance(frame.codeword.bits()) as u64,
            flagged: trace.flagged,
            decodes: trace.component_decodes,
        })
    };

    let batch = cfg.threads.max(1) as u64;
    let (mut frames, mut fe, mut be, mut flagged, mut decodes) = (0u64, 0u64, 0u64, 0u64, 0u64);
    'outer: while frames < cfg.max_frames && fe < cfg.fe_target {
        let end = (frames + batch).min(cfg.max_frames);
        for out in map_frames(frames..end, cfg.threads, &one)? {
            frames += 1;
            be += out.bit_errors;
            fe += u64::from(out.bit_errors > 0);
            flagged += out.flagged;
            decodes += out.decodes;
            if fe >= cfg.fe_target {
                break 'outer;
            }
        }
    }
    let bits = frames as f64 * (code.n() * code.n()) as f64;
    Ok(SimPoint {
        ebn0: ebn0_db,
        esn0: ebn0_to_esn0(ebn0_db, rate),
        frames,
        fe,
        fer: fe as f64 / frames as f64,
        ber: be as f64 / bits,
        be,
        flag_rate: if decodes == 0 {
            0.0
        } else {
            flagged as f64 / decodes as f64
        },
        seconds: elapsed_seconds(start),
        seed: Some(cfg.seed),
    })
}

/// Simulates every point of `cfg.ebn0_db`, all with the same frame seeds.
pub fn sweep(
    code: &ComponentCode,
    params: &DecoderParams,
    model: Option<&ConfidenceModel>,
    cfg: &SimConfig,
) -> Result<Vec<SimPoint>> {
    if cfg.ebn0_db.is_empty() {
        return Err(Error::InvalidParams(
            "sweep needs at least one Eb/N0 point".into(),
        ));
    }
    cfg.ebn0_db
        .iter()
        .map(|&e| simulate_point(code, params, model, e, cfg))
        .collect()
}

pub const CSV_COLUMNS: [&str; 9] = [
    "ebn0",
    "esn0",
    "frames",
    "fe",
    "fer",
    "ber",
    "be",
    "flag_rate",
    "seconds",
];

pub fn write_csv<W: Write>(points: &[SimPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for p in points {
        w.write_record(&[
            format!("{}", p.ebn0),
            format!("{:.5}", p.esn0),
            p.frames.to_string(),
            p.fe.to_string(),
            format!("{:e}", p.fer),
            format!("{:e}", p.ber),
            p.be.to_string(),
            format!("{:.6}", p.flag_rate),
            format!("{:.3}", p.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(points: &[SimPoint], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, points)?;
    writeln!(out)?;
    Ok(())
}

/// Per-half-iteration bounds `[lo, hi]`; a single entry applies to every half-iteration.
/// Absent fields keep the base parameters' values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    #[serde(default)]
    pub alpha: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub beta: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub gamma: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub t2: Option<[f64; 2]>,
}

impl SearchSpace {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug)]
pub struct TuneConfig {
    pub budget: usize,
    pub ebn0_db: f64,
    /// Frames per evaluation (no early stop, so every candidate sees the same frames).
    pub frames: u64,
    pub eval_seed: u64,
    pub search_seed: u64,
    pub threads: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trial {
    pub params: DecoderParams,
    pub ber: f64,
    pub fer: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TuneOutcome {
    pub best: DecoderParams,
    pub best_ber: f64,
    pub trials: Vec<Trial>,
}

const MAX_REJECTIONS: usize = 100_000;

fn expand_bounds(bounds: &[[f64; 2]], len: usize, what: &str) -> Result<Vec<[f64; 2]>> {
    let out: Vec<[f64; 2]> = match bounds.len() {
        1 => vec![bounds[0]; len],
        l if l == len => bounds.to_vec(),
        l => {
            return Err(Error::InvalidParams(format!(
                "{what}: {l} bounds for {len} half-iterations"
            )))
        }
    };
    if out
        .iter()
        .any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo <= hi))
    {
        return Err(Error::InvalidParams(format!(
            "{what}: empty or non-finite bound"
        )));
    }
    Ok(out)
}

fn sample_uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Draws a nondecreasing vector inside per-entry bounds by sorting and rejecting.
fn sample_monotone(rng: &mut ChaCha8Rng, bounds: &[[f64; 2]], what: &str) -> Result<Vec<f64>> {
    for _ in 0..MAX_REJECTIONS {
        let mut v: Vec<f64> = bounds.iter().map(|&b| sample_uniform(rng, b)).collect();
        v.sort_by(f64::total_cmp);
        if v.iter().zip(bounds).all(|(x, [lo, hi])| lo <= x && x <= hi) {
            return Ok(v);
        }
    }
    Err(Error::InvalidParams(format!(
        "{what}: bounds admit no nondecreasing schedule"
    )))
}

/// Random search: evaluates `budget` sampled parameter sets at one Eb/N0 on common
/// frames and returns the lowest BER (first found on ties). α and β are sampled
/// nondecreasing.
pub fn tune_random_search(
    code: &ComponentCode,
    base: &DecoderParams,
    space: &SearchSpace,
    model: Option<&ConfidenceModel>,
    cfg: &TuneConfig,
) -> Result<TuneOutcome> {
    if cfg.budget == 0 {
        return Err(Error::InvalidParams("budget must be ≥ 1".into()));
    }
    if space == &SearchSpace::default() {
        return Err(Error::InvalidParams("search space is empty".into()));
    }
    let h = base.half_iterations();
    let alpha = space
        .alpha
        .as_deref()
        .map(|b| expand_bounds(b, h, "alpha"))
        .transpose()?;
    let beta = space
        .beta
        .as_deref()
        .map(|b| expand_bounds(b, h, "beta"))
        .transpose()?;
    let gamma = space
        .gamma
        .as_deref()
        .map(|b| expand_bounds(b, h, "gamma"))
        .transpose()?;
    let t2 = space.t2.map(|b| expand_bounds(&[b], 1, "t2")).transpose()?;

    let sim = SimConfig {
        ebn0_db: vec![cfg.ebn0_db],
        max_frames: cfg.frames,
        fe_target: u64::MAX,
        seed: cfg.eval_seed,
        threads: cfg.threads,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.search_seed);
    let mut trials: Vec<Trial> = Vec::with_capacity(cfg.budget);
    let mut best: Option<usize> = None;
    for _ in 0..cfg.budget {
        let mut params = base.clone();
        if let Some(b) = &alpha {
            params.alpha = sample_monotone(&mut rng, b, "alpha")?;
        }
        if let Some(b) = &beta {
            params.beta = sample_monotone(&mut rng, b, "beta")?;
        }
        if let Some(b) = &gamma {
            params.gamma = b.iter().map(|&b| sample_uniform(&mut rng, b)).collect();
        }
        if let Some(b) = &t2 {
            params.t2 = sample_uniform(&mut rng, b[0]);
        }
        let point = simulate_point(code, &params, model, cfg.ebn0_db, &sim)?;
        trials.push(Trial {
            params,
            ber: point.ber,
            fer: point.fer,
        });
        let idx = trials.len() - 1;
        if best.is_none_or(|b| trials[idx].ber < trials[b].ber) {
            best = Some(idx);
        }
    }
    let b = best.expect("budget ≥ 1");
    Ok(TuneOutcome {
        best: trials[b].params.clone(),
        best_ber: trials[b].ber,
        trials,
    })
}
