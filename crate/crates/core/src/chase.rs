//! Chase-II component decoding.
//!
//! Candidates are stored as flip sets relative to the hard decision w = ψ(r). Every
//! candidate differs from w in at most p + t + 1 positions, which keeps metrics, dedup and
//! the competitor search proportional to the flip count instead of n.

use crate::channel::{bipolar, hard_bit};
use crate::codec::{ComponentCode, Syndrome};
use crate::error::{check_len, Error, Result};

/// Largest supported number of least-reliable positions.
pub const MAX_P: usize = 20;

/// Chase output Ω for one soft vector r.
#[derive(Clone, Debug, Default)]
pub struct CandidateSet {
    n: usize,
    p: usize,
    lrp: Vec<usize>,
    hard: Vec<u8>,
    base_metric: f64,
    flips: Vec<u16>,
    offsets: Vec<usize>,
    masks: Vec<u64>,
    words: usize,
    fingerprints: Vec<u64>,
    euclid: Vec<f64>,
    ranked: Vec<usize>,
    // Scratch reused across calls.
    pattern_syndromes: Vec<Syndrome>,
}

#[inline]
fn position_key(j: usize) -> u64 {
    // SplitMix64 finalizer: a fixed pseudo-random key per position for set fingerprints.
    let mut z = (j as u64)
        .wrapping_add(1)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Chase-II decoding of `r` with `p` least reliable positions.
pub fn chase_decode(r: &[f64], p: usize, code: &ComponentCode) -> Result<CandidateSet> {
    let mut cs = CandidateSet::default();
    cs.decode(r, p, code)?;
    Ok(cs)
}

impl CandidateSet {
    /// Re-runs Chase decoding into this set, reusing its buffers.
    pub fn decode(&mut self, r: &[f64], p: usize, code: &ComponentCode) -> Result<()> {
        let n = code.n();
        check_len(n, r.len())?;
        if p == 0 || p > n || p > MAX_P {
            return Err(Error::InvalidParams(format!(
                "p = {p} must be in 1..={}",
                n.min(MAX_P)
            )));
        }
        self.reset(n, p);

        let mut syn_w = Syndrome::default();
        let mut inner_parity = 0u8;
        let mut base = 0.0;
        for (j, &v) in r.iter().enumerate() {
            let b = hard_bit(v);
            self.hard.push(b);
            let a = v.abs() - 1.0;
            base += a * a;
            if b != 0 && j < n - 1 {
                syn_w ^= code.position_syndrome(j);
                inner_parity ^= 1;
            }
        }
        self.base_metric = base;
        select_least_reliable(r, p, &mut self.lrp);

        // Syndrome of each test pattern, built from the pattern with its lowest bit cleared.
        let patterns = 1usize << p;
        self.pattern_syndromes.clear();
        self.pattern_syndromes.push(syn_w);
        for i in 1..patterns {
            let low = i.trailing_zeros() as usize;
            let mut s = self.pattern_syndromes[i & (i - 1)];
            s ^= code.position_syndrome(self.lrp[low]);
            self.pattern_syndromes.push(s);
        }

        let parity_pos = n - 1;
        let hard_parity = self.hard[parity_pos];
        let mut scratch: Vec<u16> = Vec::with_capacity(p + 3);
        for i in 0..patterns {
            let Some(corr) = code.locate(self.pattern_syndromes[i]) else {
                continue;
            };
            scratch.clear();
            let mut bits = i;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if self.lrp[b] != parity_pos {
                    scratch.push(self.lrp[b] as u16);
                }
            }
            for &e in corr.positions() {
                match scratch.iter().position(|&x| x == e) {
                    Some(at) => {
                        scratch.swap_remove(at);
                    }
                    None => scratch.push(e),
                }
            }
            let candidate_parity = inner_parity ^ (scratch.len() & 1) as u8;
            if candidate_parity != hard_parity {
                scratch.push(parity_pos as u16);
            }
            self.push_unique(&scratch, r);
        }

        self.ranked.extend(0..self.euclid.len());
        let euclid = &self.euclid;
        self.ranked
            .sort_by(|&a, &b| euclid[a].total_cmp(&euclid[b]).then(a.cmp(&b)));
        Ok(())
    }

    /// Builds a set from explicit codewords (deduplicated, in the given order), as if a
    /// Chase search over `p` positions had produced them.
    pub fn from_codewords(r: &[f64], p: usize, codewords: &[Vec<u8>]) -> Result<Self> {
        let n = r.len();
        let mut cs = Self::default();
        cs.reset(n, p);
        cs.hard.extend(r.iter().map(|&v| hard_bit(v)));
        cs.base_metric = r.iter().map(|v| (v.abs() - 1.0).powi(2)).sum();
        select_least_reliable(r, p.min(n), &mut cs.lrp);
        let mut flips = Vec::new();
        for c in codewords {
            check_len(n, c.len())?;
            flips.clear();
            flips.extend((0..n).filter(|&j| c[j] != cs.hard[j]).map(|j| j as u16));
            cs.push_unique(&flips, r);
        }
        cs.ranked.extend(0..cs.euclid.len());
        let euclid = &cs.euclid;
        cs.ranked
            .sort_by(|&a, &b| euclid[a].total_cmp(&euclid[b]).then(a.cmp(&b)));
        Ok(cs)
    }

    fn reset(&mut self, n: usize, p: usize) {
        self.n = n;
        self.p = p;
        self.words = n.div_ceil(64);
        self.lrp.clear();
        self.hard.clear();
        self.flips.clear();
        self.offsets.clear();
        self.offsets.push(0);
        self.masks.clear();
        self.fingerprints.clear();
        self.euclid.clear();
        self.ranked.clear();
    }

    fn push_unique(&mut self, flips: &[u16], r: &[f64]) {
        let fp = flips
            .iter()
            .fold(0u64, |acc, &j| acc ^ position_key(j as usize));
        for (idx, &other) in self.fingerprints.iter().enumerate() {
            if other == fp && self.same_flips(idx, flips) {
                return;
            }
        }
        let start = self.masks.len();
        self.masks.resize(start + self.words, 0);
        let mut metric = self.base_metric;
        for &j in flips {
            let j = j as usize;
            self.masks[start + j / 64] |= 1 << (j % 64);
            metric += 4.0 * r[j].abs();
        }
        self.flips.extend_from_slice(flips);
        self.offsets.push(self.flips.len());
        self.fingerprints.push(fp);
        self.euclid.push(metric);
    }

    fn same_flips(&self, idx: usize, flips: &[u16]) -> bool {
        let own = self.flips_of(idx);
        own.len() == flips.len() && flips.iter().all(|&j| self.flipped(idx, j as usize))
    }

    /// Number of unique candidates |Ω|.
    pub fn len(&self) -> usize {
        self.euclid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.euclid.is_empty()
    }

    /// Code length the set was decoded for.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of test patterns 2^p.
    pub fn test_patterns(&self) -> usize {
        1 << self.p
    }

    /// Least reliable positions P, least reliable first.
    pub fn lrp(&self) -> &[usize] {
        &self.lrp
    }

    /// Hard decision w = ψ(r).
    pub fn hard_decision(&self) -> &[u8] {
        &self.hard
    }

    /// d^E_i = ||r − μ(c_i)||² for each candidate, in discovery order.
    pub fn euclid(&self) -> &[f64] {
        &self.euclid
    }

    /// Candidate indices ordered by ascending d^E (ties by index).
    pub fn ranked(&self) -> &[usize] {
        &self.ranked
    }

    /// Index of the decision d, if Ω is nonempty.
    pub fn decision_index(&self) -> Option<usize> {
        self.ranked.first().copied()
    }

    /// Index of the second most likely candidate d′.
    pub fn second_index(&self) -> Option<usize> {
        self.ranked.get(1).copied()
    }

    /// Positions where candidate `idx` differs from the hard decision.
    pub fn flips_of(&self, idx: usize) -> &[u16] {
        &self.flips[self.offsets[idx]..self.offsets[idx + 1]]
    }

    /// Whether candidate `idx` differs from the hard decision at `j`.
    #[inline]
    pub fn flipped(&self, idx: usize, j: usize) -> bool {
        self.masks[idx * self.words + j / 64] >> (j % 64) & 1 != 0
    }

    /// Bit j of candidate `idx`.
    #[inline]
    pub fn bit(&self, idx: usize, j: usize) -> u8 {
        self.hard[j] ^ u8::from(self.flipped(idx, j))
    }

    /// Candidate `idx` as an n-bit word.
    pub fn candidate(&self, idx: usize) -> Vec<u8> {
        let mut c = self.hard.clone();
        for &j in self.flips_of(idx) {
            c[j as usize] ^= 1;
        }
        c
    }

    /// The decision d as an n-bit word.
    pub fn decision(&self) -> Option<Vec<u8>> {
        self.decision_index().map(|i| self.candidate(i))
    }

    /// Competitor d̄ for bit j: the minimum-d^E candidate whose bit j differs from d_j.
    pub fn find_competitor(&self, j: usize) -> Result<Option<usize>> {
        if j >= self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.n,
            });
        }
        let Some(d) = self.decision_index() else {
            return Ok(None);
        };
        let dj = self.flipped(d, j);
        Ok(self.ranked[1..]
            .iter()
            .copied()
            .find(|&i| self.flipped(i, j) != dj))
    }

    /// Destructive distance of candidate `idx`; only the flipped positions contribute.
    pub fn destructive(&self, idx: usize, r: &[f64]) -> f64 {
        self.flips_of(idx)
            .iter()
            .map(|&j| {
                let a = r[j as usize].abs() + 1.0;
                a * a
            })
            .sum()
    }
}

/// Indices of the p smallest |r_j|, least reliable first; ties go to the lower index.
fn select_least_reliable(r: &[f64], p: usize, out: &mut Vec<usize>) {
    out.clear();
    for (j, v) in r.iter().enumerate() {
        let a = v.abs();
        if out.len() == p {
            if a >= r[out[p - 1]].abs() {
                continue;
            }
            out.pop();
        }
        let at = out.partition_point(|&i| r[i].abs() <= a);
        out.insert(at, j);
    }
}

/// The 2^p Chase-II test patterns t_i = w ⊕ f_i, where bit b of i − 1 flips the b-th least
/// reliable position.
pub fn test_patterns(r: &[f64], p: usize) -> Result<Vec<Vec<u8>>> {
    if p == 0 || p > r.len() || p > MAX_P {
        return Err(Error::InvalidParams(format!(
            "p = {p} must be in 1..={}",
            r.len().min(MAX_P)
        )));
    }
    let mut lrp = Vec::new();
    select_least_reliable(r, p, &mut lrp);
    let w: Vec<u8> = r.iter().map(|&v| hard_bit(v)).collect();
    Ok((0..1usize << p)
        .map(|i| {
            let mut t = w.clone();
            for (b, &j) in lrp.iter().enumerate() {
                t[j] ^= ((i >> b) & 1) as u8;
            }
            t
        })
        .collect())
}

/// ||r − μ(c)||².
pub fn euclidean_distance(r: &[f64], c: &[u8]) -> f64 {
    r.iter()
        .zip(c)
        .map(|(&v, &b)| (v - bipolar(b)).powi(2))
        .sum()
}

/// Σ over positions with c_j ≠ ψ(r_j) of (r_j − μ(c_j))².
pub fn destructive_distance(r: &[f64], c: &[u8]) -> f64 {
    r.iter()
        .zip(c)
        .filter(|(&v, &b)| b != hard_bit(v))
        .map(|(&v, &b)| (v - bipolar(b)).powi(2))
        .sum()
}
