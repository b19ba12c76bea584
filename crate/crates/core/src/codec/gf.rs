//! GF(2^m) arithmetic with log/antilog tables.

/// Primitive polynomials, indexed by m, including the x^m term.
const PRIMITIVE_POLYS: [u32; 17] = [
    0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

#[derive(Clone, Debug)]
pub struct GaloisField {
    m: u32,
    order: usize,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl GaloisField {
    pub const MIN_M: u32 = 3;
    pub const MAX_M: u32 = 16;

    /// Builds the field from the fixed primitive polynomial for `m`.
    pub fn new(m: u32) -> Option<Self> {
        if !(Self::MIN_M..=Self::MAX_M).contains(&m) {
            return None;
        }
        let poly = PRIMITIVE_POLYS[m as usize];
        let size = 1usize << m;
        let order = size - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; size];
        let mut x: u32 = 1;
        for (i, e) in exp.iter_mut().take(order).enumerate() {
            *e = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        debug_assert_eq!(x, 1, "polynomial for m={m} is not primitive");
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Some(Self { m, order, exp, log })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Multiplicative group order 2^m − 1.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn primitive_poly(&self) -> u32 {
        PRIMITIVE_POLYS[self.m as usize]
    }

    /// α^e for any nonnegative exponent.
    #[inline]
    pub fn alpha_pow(&self, e: usize) -> u16 {
        self.exp[e % self.order]
    }

    /// Discrete log; `x` must be nonzero.
    #[inline]
    pub fn log(&self, x: u16) -> usize {
        debug_assert!(x != 0);
        self.log[x as usize] as usize
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    #[inline]
    pub fn div(&self, a: u16, b: u16) -> u16 {
        debug_assert!(b != 0);
        if a == 0 {
            0
        } else {
            let la = self.log[a as usize] as usize;
            let lb = self.log[b as usize] as usize;
            self.exp[la + self.order - lb]
        }
    }

    #[inline]
    pub fn cube(&self, a: u16) -> u16 {
        if a == 0 {
            0
        } else {
            self.exp[(3 * self.log[a as usize] as usize) % self.order]
        }
    }

    /// Minimal polynomial over GF(2) of α^i, coefficients low to high.
    pub fn minimal_poly(&self, i: usize) -> Vec<u8> {
        let mut coset = vec![i % self.order];
        loop {
            let next = (coset.last().unwrap() * 2) % self.order;
            if next == coset[0] {
                break;
            }
            coset.push(next);
        }
        // Product of (x + α^c) over the coset, with field coefficients.
        let mut poly: Vec<u16> = vec![1];
        for &c in &coset {
            let root = self.alpha_pow(c);
            let mut next = vec![0u16; poly.len() + 1];
            for (deg, &coef) in poly.iter().enumerate() {
                next[deg + 1] ^= coef;
                next[deg] ^= self.mul(coef, root);
            }
            poly = next;
        }
        poly.into_iter()
            .map(|c| {
                debug_assert!(c <= 1, "minimal polynomial must be binary");
                c as u8
            })
            .collect()
    }
}

/// Product of binary polynomials, coefficients low to high.
pub fn poly_mul_gf2(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] ^= y;
        }
    }
    out
}
