//! BPSK mapping, hard decisions and the AWGN channel.
//!
//! Noise streams are counter-based: frame `f` under seed `s` draws from ChaCha8 keyed by
//! `s` on stream `f`, so frames can be generated in any order or in parallel.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::codec::PcCodeword;
use crate::error::{Error, Result};
use crate::matrix::SoftMatrix;

/// μ(b) = 1 − 2b.
#[inline]
pub fn bipolar(bit: u8) -> f64 {
    1.0 - 2.0 * f64::from(bit)
}

/// ψ(v) = (1 − sign(v))/2 with sign(0) = +1.
#[inline]
pub fn hard_bit(v: f64) -> u8 {
    u8::from(v < 0.0)
}

pub fn bipolar_map(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| bipolar(b)).collect()
}

pub fn hard_decision(values: &[f64]) -> Vec<u8> {
    values.iter().map(|&v| hard_bit(v)).collect()
}

/// σ = sqrt(1 / (2 R 10^(Eb/N0 / 10))).
pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "code rate {rate} not in (0, 1]"
        )));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// Es/N0 = Eb/N0 + 10 log10 R, in dB.
pub fn ebn0_to_esn0(ebn0_db: f64, rate: f64) -> f64 {
    ebn0_db + 10.0 * rate.log10()
}

/// Deterministic RNG for one frame.
pub fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSpec {
    pub ebn0_db: f64,
    pub rate: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl ChannelSpec {
    pub fn new(ebn0_db: f64, rate: f64, seed: u64) -> Result<Self> {
        let sigma = ebn0_to_sigma(ebn0_db, rate)?;
        Ok(Self {
            ebn0_db,
            rate,
            sigma,
            seed,
        })
    }

    /// Noise-free channel (σ = 0): Y = μ(B) exactly.
    pub fn noiseless(rate: f64, seed: u64) -> Self {
        Self {
            ebn0_db: f64::INFINITY,
            rate,
            sigma: 0.0,
            seed,
        }
    }

    pub fn esn0_db(&self) -> f64 {
        ebn0_to_esn0(self.ebn0_db, self.rate)
    }
}

/// Y = μ(B) + N with N ~ N(0, σ²) drawn from `rng`.
pub fn transmit_with<R: Rng + ?Sized>(
    codeword: &PcCodeword,
    sigma: f64,
    rng: &mut R,
) -> SoftMatrix {
    let bits = codeword.bits();
    let data = bits
        .as_slice()
        .iter()
        .map(|&b| {
            let noise: f64 = if sigma > 0.0 {
                sigma * rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            bipolar(b) + noise
        })
        .collect();
    SoftMatrix::from_vec(bits.n(), data).expect("square by construction")
}

/// Transmits one codeword; the noise stream is stream 0 of `spec.seed`.
pub fn transmit(codeword: &PcCodeword, spec: &ChannelSpec) -> SoftMatrix {
    transmit_with(codeword, spec.sigma, &mut frame_rng(spec.seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{pc_encode, ComponentCode};

    #[test]
    fn bipolar_and_hard_decision() {
        assert_eq!(bipolar_map(&[0, 1]), vec![1.0, -1.0]);
        assert_eq!(hard_decision(&[0.7, -0.7, 0.0]), vec![0, 1, 0]);
        for v in [-3.2, -1e-9, 2e-7, 5.0] {
            assert_eq!(bipolar(hard_bit(v)), v.signum());
        }
    }

    #[test]
    fn sigma_conversion() {
        assert!((ebn0_to_sigma(0.0, 1.0).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let rate = (239.0f64 / 256.0).powi(2);
        assert!((ebn0_to_esn0(3.65, rate) - 3.05316).abs() < 5e-5);
        // σ = sqrt(1/(2·R·10^0.365)), evaluated independently.
        let expect = 1.0 / (2.0 * rate * 2.317_394_649_968_48_f64).sqrt();
        let sigma = ebn0_to_sigma(3.65, rate).unwrap();
        assert!((sigma - expect).abs() < 1e-9);
        assert!((sigma - 0.4975).abs() < 5e-5);
        assert!(ebn0_to_sigma(3.0, 0.0).is_err());
        assert!(ebn0_to_sigma(3.0, 1.5).is_err());
    }

    #[test]
    fn noiseless_transmission_is_exact() {
        let code = ComponentCode::by_name("ebch_32_21").unwrap();
        let pc = pc_encode(&vec![1; 21 * 21], &code).unwrap();
        let y = transmit(&pc, &ChannelSpec::noiseless(code.product_rate(), 0));
        assert_eq!(y.as_slice(), bipolar_map(pc.bits().as_slice()).as_slice());
    }

    #[test]
    fn noise_moments_and_determinism() {
        let code = ComponentCode::by_name("ebch_256_239").unwrap();
        let pc = PcCodeword::zeros(&code);
        let spec = ChannelSpec::new(3.65, code.product_rate(), 42).unwrap();
        let y = transmit(&pc, &spec);
        assert_eq!(y, transmit(&pc, &spec));
        let count = y.as_slice().len() as f64;
        let noise: Vec<f64> = y.as_slice().iter().map(|v| v - 1.0).collect();
        let mean = noise.iter().sum::<f64>() / count;
        let var = noise.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / count;
        let tol = 3.0 / count.sqrt();
        assert!(mean.abs() < tol * spec.sigma, "mean {mean}");
        assert!(
            (var / (spec.sigma * spec.sigma) - 1.0).abs() < tol,
            "var {var}"
        );
    }
}
