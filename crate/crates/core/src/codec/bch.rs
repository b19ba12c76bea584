//! Extended BCH component codes: systematic encoding and bounded-distance decoding.
//!
//! Bit layout for a code of length n = 2^m: inner position j < n − 1 carries the
//! coefficient of x^j (evaluated at α^j by the syndrome), positions `0..n−1−k` hold the
//! remainder, positions `n−1−k..n−1` hold the message, and position n − 1 is the overall
//! even-parity extension bit.

use super::gf::{poly_mul_gf2, GaloisField};
use crate::error::{check_len, Error, Result};

/// Syndrome pair (S1, S3) of the inner word. S3 is unused for t = 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Syndrome {
    pub s1: u16,
    pub s3: u16,
}

impl Syndrome {
    #[inline]
    pub fn is_zero(&self) -> bool {
        self.s1 == 0 && self.s3 == 0
    }
}

impl std::ops::BitXorAssign for Syndrome {
    #[inline]
    fn bitxor_assign(&mut self, rhs: Self) {
        self.s1 ^= rhs.s1;
        self.s3 ^= rhs.s3;
    }
}

/// Inner error positions located by the algebraic decoder (at most t = 2).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Correction {
    pos: [u16; 2],
    len: u8,
}

impl Correction {
    pub fn positions(&self) -> &[u16] {
        &self.pos[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// An extended binary BCH code with design distance d ∈ {4, 6}.
#[derive(Clone, Debug)]
pub struct ComponentCode {
    name: String,
    n: usize,
    k: usize,
    d: usize,
    t: usize,
    gf: GaloisField,
    generator: Vec<u8>,
    /// Generator without its leading x^r term, packed low to high.
    gen_low: u64,
    /// Per position: (α^j, α^{3j}); zero for the extension bit.
    position_syndromes: Vec<Syndrome>,
    /// For each c, a root z of z² + z = c, or `NO_ROOT`.
    quadratic_roots: Vec<u16>,
}

const NO_ROOT: u16 = u16::MAX;

impl ComponentCode {
    pub const EBCH_256_239: &'static str = "ebch_256_239";
    pub const EBCH_32_21: &'static str = "ebch_32_21";

    /// Looks up one of the shipped codes by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            Self::EBCH_256_239 => Self::new(8, 6),
            Self::EBCH_32_21 => Self::new(5, 6),
            other => Err(Error::UnknownCode(other.to_string())),
        }
    }

    /// Extended BCH code of length 2^m and minimum distance `d` (4 or 6).
    pub fn new(m: u32, d: usize) -> Result<Self> {
        let gf = GaloisField::new(m).ok_or_else(|| {
            Error::UnsupportedCode(format!(
                "m = {m} outside {}..={}",
                GaloisField::MIN_M,
                GaloisField::MAX_M
            ))
        })?;
        let t = match d {
            4 => 1,
            6 => 2,
            _ => return Err(Error::UnsupportedCode(format!("d = {d}; only d = 4 or 6"))),
        };
        let n = 1usize << m;
        let order = gf.order();

        let mut generator = gf.minimal_poly(1);
        if t == 2 {
            generator = poly_mul_gf2(&generator, &gf.minimal_poly(3));
        }
        let r = generator.len() - 1;
        let k = order - r;
        let gen_low = generator[..r]
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &c)| acc | ((c as u64) << i));

        let mut position_syndromes: Vec<Syndrome> = (0..order)
            .map(|j| Syndrome {
                s1: gf.alpha_pow(j),
                s3: if t == 2 { gf.alpha_pow(3 * j) } else { 0 },
            })
            .collect();
        position_syndromes.push(Syndrome::default());

        let mut quadratic_roots = vec![NO_ROOT; n];
        for z in 0..n as u16 {
            let c = gf.mul(z, z) ^ z;
            if quadratic_roots[c as usize] == NO_ROOT {
                quadratic_roots[c as usize] = z;
            }
        }

        let name = match (m, d) {
            (8, 6) => Self::EBCH_256_239.to_string(),
            (5, 6) => Self::EBCH_32_21.to_string(),
            _ => format!("ebch_{n}_{k}"),
        };
        Ok(Self {
            name,
            n,
            k,
            d,
            t,
            gf,
            generator,
            gen_low,
            position_syndromes,
            quadratic_roots,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> u32 {
        self.gf.m()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Correction radius of the inner decoder.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Number of inner parity bits (degree of the generator).
    pub fn redundancy(&self) -> usize {
        self.generator.len() - 1
    }

    /// Generator polynomial coefficients, low to high.
    pub fn generator(&self) -> &[u8] {
        &self.generator
    }

    pub fn field(&self) -> &GaloisField {
        &self.gf
    }

    /// Positions of the message bits inside a codeword.
    pub fn info_positions(&self) -> std::ops::Range<usize> {
        self.redundancy()..self.n - 1
    }

    /// Index of the overall parity bit.
    pub fn parity_position(&self) -> usize {
        self.n - 1
    }

    /// Component code rate k/n.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Product code rate (k/n)².
    pub fn product_rate(&self) -> f64 {
        self.rate() * self.rate()
    }

    /// Systematic encoding of `k` message bits into an n-bit codeword.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        check_len(self.k, message.len())?;
        let mut out = vec![0u8; self.n];
        self.encode_into(message, &mut out);
        Ok(out)
    }

    /// Encodes into `out` (length n). Lengths are checked by the caller.
    pub(crate) fn encode_into(&self, message: &[u8], out: &mut [u8]) {
        let r = self.redundancy();
        let top = 1u64 << (r - 1);
        let mask = (1u64 << r) - 1;
        let mut reg = 0u64;
        for &bit in message.iter().rev() {
            let feedback = (bit & 1) as u64 ^ u64::from(reg & top != 0);
            reg = (reg << 1) & mask;
            if feedback != 0 {
                reg ^= self.gen_low;
            }
        }
        for (j, o) in out[..r].iter_mut().enumerate() {
            *o = ((reg >> j) & 1) as u8;
        }
        out[r..self.n - 1].copy_from_slice(message);
        out[self.n - 1] = out[..self.n - 1].iter().fold(0, |a, &b| a ^ b);
    }

    /// Syndrome contribution of a single flipped position.
    #[inline]
    pub fn position_syndrome(&self, j: usize) -> Syndrome {
        self.position_syndromes[j]
    }

    /// Syndrome of the inner n − 1 bits of `word`.
    pub fn syndrome(&self, word: &[u8]) -> Syndrome {
        let mut s = Syndrome::default();
        for (j, &b) in word[..self.n - 1].iter().enumerate() {
            if b != 0 {
                s ^= self.position_syndromes[j];
            }
        }
        s
    }

    /// Locates up to t inner errors from a syndrome; `None` on decoding failure.
    #[inline]
    pub fn locate(&self, s: Syndrome) -> Option<Correction> {
        if s.s1 == 0 {
            return if s.s3 == 0 {
                Some(Correction::default())
            } else {
                None
            };
        }
        let gf = &self.gf;
        let s1_cubed = gf.cube(s.s1);
        if self.t == 1 || s.s3 == s1_cubed {
            return Some(Correction {
                pos: [gf.log(s.s1) as u16, 0],
                len: 1,
            });
        }
        // Locators X1 + X2 = S1, X1·X2 = (S3 + S1³)/S1; substitute X = S1·z.
        let c = gf.div(s.s3 ^ s1_cubed, s1_cubed);
        let z = self.quadratic_roots[c as usize];
        if z == NO_ROOT {
            return None;
        }
        let x1 = gf.mul(s.s1, z);
        let x2 = gf.mul(s.s1, z ^ 1);
        Some(Correction {
            pos: [gf.log(x1) as u16, gf.log(x2) as u16],
            len: 2,
        })
    }

    /// Bounded-distance decoding: corrects up to t inner errors and recomputes the
    /// parity bit. `Ok(None)` is a decoding failure.
    pub fn bdd_decode(&self, word: &[u8]) -> Result<Option<Vec<u8>>> {
        check_len(self.n, word.len())?;
        let mut out = word.to_vec();
        Ok(self.bdd_in_place(&mut out).then_some(out))
    }

    /// In-place BDD; returns false (and leaves `word` untouched) on failure.
    pub fn bdd_in_place(&self, word: &mut [u8]) -> bool {
        match self.locate(self.syndrome(word)) {
            Some(corr) => {
                for &p in corr.positions() {
                    word[p as usize] ^= 1;
                }
                word[self.n - 1] = word[..self.n - 1].iter().fold(0, |a, &b| a ^ b);
                true
            }
            None => false,
        }
    }

    /// True iff `word` is a codeword (zero syndrome and even overall parity).
    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.n
            && self.syndrome(word).is_zero()
            && word.iter().fold(0u8, |a, &b| a ^ b) == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shipped_code_dimensions() {
        let big = ComponentCode::by_name("ebch_256_239").unwrap();
        assert_eq!((big.n(), big.k(), big.d(), big.t()), (256, 239, 6, 2));
        let toy = ComponentCode::by_name("ebch_32_21").unwrap();
        assert_eq!((toy.n(), toy.k(), toy.d(), toy.t()), (32, 21, 6, 2));
        assert_eq!(ComponentCode::new(6, 4).unwrap().k(), 57);
    }

    #[test]
    fn rejects_unknown_and_unsupported() {
        assert!(matches!(
            ComponentCode::by_name("rs_255"),
            Err(Error::UnknownCode(_))
        ));
        assert!(ComponentCode::new(8, 8).is_err());
        assert!(ComponentCode::new(1, 6).is_err());
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let code = ComponentCode::by_name("ebch_256_239").unwrap();
        assert!(code.encode(&vec![0; 239]).unwrap().iter().all(|&b| b == 0));
        assert!(code.encode(&[0; 10]).is_err());
    }

    #[test]
    fn all_zero_word_decodes_to_itself() {
        let code = ComponentCode::by_name("ebch_32_21").unwrap();
        assert_eq!(code.bdd_decode(&[0; 32]).unwrap(), Some(vec![0; 32]));
        assert!(code.bdd_decode(&[0; 31]).is_err());
    }

    #[test]
    fn encoded_words_are_codewords_with_even_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for name in ["ebch_256_239", "ebch_32_21"] {
            let code = ComponentCode::by_name(name).unwrap();
            for _ in 0..50 {
                let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
                let c = code.encode(&msg).unwrap();
                assert!(code.is_codeword(&c));
                assert_eq!(&c[code.info_positions()], &msg[..]);
            }
        }
    }

    #[test]
    fn corrects_up_to_two_inner_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let code = ComponentCode::by_name("ebch_256_239").unwrap();
        for _ in 0..500 {
            let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let c = code.encode(&msg).unwrap();
            let mut w = c.clone();
            let flips = rng.random_range(0..=2);
            let mut used = Vec::new();
            while used.len() < flips {
                let p = rng.random_range(0..255);
                if !used.contains(&p) {
                    used.push(p);
                    w[p] ^= 1;
                }
            }
            // The parity bit is recomputed, so flipping it must not matter.
            if rng.random_bool(0.5) {
                w[255] ^= 1;
            }
            assert_eq!(code.bdd_decode(&w).unwrap(), Some(c));
        }
    }

    #[test]
    fn distance_four_code_corrects_single_errors() {
        let code = ComponentCode::new(6, 4).unwrap();
        let msg = vec![1u8; code.k()];
        let c = code.encode(&msg).unwrap();
        for p in 0..63 {
            let mut w = c.clone();
            w[p] ^= 1;
            assert_eq!(code.bdd_decode(&w).unwrap(), Some(c.clone()));
        }
    }
}
