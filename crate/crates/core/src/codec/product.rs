//! Product codes built from a [`ComponentCode`], and hard-decision iterative BDD.

use super::bch::ComponentCode;
use crate::error::{check_len, Error, Result};
use crate::matrix::BitMatrix;

/// An n×n array whose every row and column is a component codeword.
#[derive(Clone, Debug, PartialEq)]
pub struct PcCodeword(BitMatrix);

impl PcCodeword {
    /// Wraps `bits` after checking all 2n component constraints.
    pub fn new(bits: BitMatrix, code: &ComponentCode) -> Result<Self> {
        check_len(code.n(), bits.n())?;
        if !is_pc_codeword(&bits, code) {
            return Err(Error::InvalidParams(
                "matrix is not a product codeword".into(),
            ));
        }
        Ok(Self(bits))
    }

    pub fn zeros(code: &ComponentCode) -> Self {
        Self(BitMatrix::zeros(code.n()))
    }

    pub fn bits(&self) -> &BitMatrix {
        &self.0
    }

    pub fn into_bits(self) -> BitMatrix {
        self.0
    }
}

/// True iff every row and column of `bits` is a codeword.
pub fn is_pc_codeword(bits: &BitMatrix, code: &ComponentCode) -> bool {
    bits.n() == code.n()
        && bits.rows().all(|r| code.is_codeword(r))
        && bits.transpose().rows().all(|c| code.is_codeword(c))
}

/// Encodes a row-major k×k message: the message rows are encoded first, then every column.
pub fn pc_encode(message: &[u8], code: &ComponentCode) -> Result<PcCodeword> {
    let (n, k) = (code.n(), code.k());
    check_len(k * k, message.len())?;
    let info = code.info_positions();

    // Row pass, writing encoded rows at the info row indices of the transposed layout.
    let mut bits = BitMatrix::zeros(n);
    for (i, msg_row) in message.chunks(k).enumerate() {
        code.encode_into(msg_row, bits.row_mut(info.start + i));
    }
    // Column pass: transpose so columns become rows, encode from their info part.
    bits.transpose_in_place();
    let mut scratch = vec![0u8; k];
    for j in 0..n {
        let row = bits.row_mut(j);
        scratch.copy_from_slice(&row[info.clone()]);
        code.encode_into(&scratch, row);
    }
    bits.transpose_in_place();
    Ok(PcCodeword(bits))
}

/// Iterative bounded-distance decoding: each iteration replaces every row, then every
/// column, by its BDD output; rows whose BDD fails are left unchanged.
pub fn ibdd_decode(bits: &BitMatrix, iters: usize, code: &ComponentCode) -> Result<BitMatrix> {
    check_len(code.n(), bits.n())?;
    let mut work = bits.clone();
    ibdd_in_place(&mut work, iters, code);
    Ok(work)
}

pub(crate) fn ibdd_in_place(bits: &mut BitMatrix, iters: usize, code: &ComponentCode) {
    for _ in 0..iters {
        for _half in 0..2 {
            for i in 0..bits.n() {
                code.bdd_in_place(bits.row_mut(i));
            }
            bits.transpose_in_place();
        }
    }
}
