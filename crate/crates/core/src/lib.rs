//! Product-code forward error correction with Chase–Pyndiah soft decoding.
//!
//! * [`codec`]: GF(2^m), extended BCH component codes, product encoding, iBDD.
//! * [`channel`]: BPSK over AWGN with per-frame deterministic noise streams.
//! * [`chase`]: Chase-II candidate search and metrics.
//! * [`pyndiah`]: extrinsic messages and the iterative decoder with its flagging variants.
//! * [`confidence`]: the logistic confidence model, its features, training and evaluation.
//! * [`harness`]: Monte Carlo simulation, sweeps and parameter search.

pub mod channel;
pub mod chase;
pub mod codec;
pub mod confidence;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod pyndiah;

pub use chase::{chase_decode, CandidateSet};
pub use codec::{ComponentCode, PcCodeword};
pub use confidence::{ConfidenceModel, FeatureVector, LabeledSample};
pub use error::{Error, Result};
pub use matrix::{BitMatrix, SoftMatrix};
pub use pyndiah::{decode_product, DecoderParams, SideInfo, Variant};
