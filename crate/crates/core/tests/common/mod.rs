#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

/// GF(2^m) arithmetic by shift-and-add, kept separate from the library's log tables.
pub struct Gf {
    pub m: u32,
    pub poly: u32,
}

impl Gf {
    pub fn new(m: u32, poly: u32) -> Self {
        Self { m, poly }
    }

    pub fn mul(&self, mut a: u32, mut b: u32) -> u32 {
        let mut acc = 0;
        while b != 0 {
            if b & 1 != 0 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a >> self.m != 0 {
                a ^= self.poly;
            }
        }
        acc
    }

    pub fn pow(&self, a: u32, e: usize) -> u32 {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }
}

/// g(x) = ∏ (x − β) over the conjugates of α and α³; coefficients low to high.
pub fn bch_generator(gf: &Gf) -> Vec<u8> {
    let order = (1usize << gf.m) - 1;
    let mut roots = Vec::new();
    for base in [1usize, 3] {
        let mut e = base;
        loop {
            if !roots.contains(&e) {
                roots.push(e);
            }
            e = (e * 2) % order;
            if e == base {
                break;
            }
        }
    }
    let alpha = 2u32;
    let mut g: Vec<u32> = vec![1];
    for &e in &roots {
        let root = gf.pow(alpha, e);
        let mut next = vec![0u32; g.len() + 1];
        for (i, &c) in g.iter().enumerate() {
            next[i + 1] ^= c;
            next[i] ^= gf.mul(c, root);
        }
        g = next;
    }
    g.into_iter()
        .map(|c| {
            assert!(c <= 1, "generator must have binary coefficients");
            c as u8
        })
        .collect()
}

/// Evaluates the inner word at α^e with Horner's rule.
pub fn eval_at(gf: &Gf, word: &[u8], e: usize) -> u32 {
    let x = gf.pow(2, e);
    word.iter()
        .rev()
        .fold(0, |acc, &b| gf.mul(acc, x) ^ u32::from(b))
}

/// Independent membership test: roots α, α³ on the inner bits and even overall weight.
pub fn is_codeword_oracle(gf: &Gf, word: &[u8]) -> bool {
    let inner = &word[..word.len() - 1];
    eval_at(gf, inner, 1) == 0
        && eval_at(gf, inner, 3) == 0
        && word.iter().map(|&b| u32::from(b)).sum::<u32>() % 2 == 0
}

pub fn toy_field() -> Gf {
    Gf::new(5, 0x25)
}

pub const TOY_N: usize = 32;
pub const TOY_K: usize = 21;

pub fn pack(bits: &[u8]) -> u32 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (j, &b)| acc | (u32::from(b) << j))
}

pub fn unpack(word: u32) -> Vec<u8> {
    (0..TOY_N).map(|j| ((word >> j) & 1) as u8).collect()
}

/// All 2^21 codewords of eBCH[32,21,6] packed as u32 (bit j = position j), sorted.
///
/// Spanned by the shifts x^i·g(x) with the parity bit appended, so nothing here
/// touches the library encoder.
pub fn toy_codebook() -> &'static [u32] {
    static BOOK: OnceLock<Vec<u32>> = OnceLock::new();
    BOOK.get_or_init(|| {
        let gf = toy_field();
        let g = bch_generator(&gf);
        assert_eq!(g.len() - 1, TOY_N - 1 - TOY_K);
        let basis: Vec<u32> = (0..TOY_K)
            .map(|i| {
                let inner: u32 = g
                    .iter()
                    .enumerate()
                    .fold(0, |a, (j, &c)| a | (u32::from(c) << (i + j)));
                inner | ((inner.count_ones() & 1) << (TOY_N - 1))
            })
            .collect();
        let mut book = Vec::with_capacity(1 << TOY_K);
        let mut w = 0u32;
        book.push(w);
        for i in 1u32..(1 << TOY_K) {
            w ^= basis[i.trailing_zeros() as usize];
            book.push(w);
        }
        book.sort_unstable();
        book
    })
}

pub fn in_codebook(word: u32) -> bool {
    toy_codebook().binary_search(&word).is_ok()
}

/// Every codeword whose inner 31 bits lie within Hamming distance 2 of `word`'s.
pub fn codewords_within_inner_2(word: u32) -> Vec<u32> {
    let inner_mask = (1u32 << (TOY_N - 1)) - 1;
    let mut found = Vec::new();
    let mut try_inner = |inner: u32| {
        let c = inner | ((inner.count_ones() & 1) << (TOY_N - 1));
        if in_codebook(c) {
            found.push(c);
        }
    };
    let base = word & inner_mask;
    try_inner(base);
    for a in 0..TOY_N - 1 {
        try_inner(base ^ (1 << a));
        for b in a + 1..TOY_N - 1 {
            try_inner(base ^ (1 << a) ^ (1 << b));
        }
    }
    found
}

pub fn params_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../params")
}
