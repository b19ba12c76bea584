//! Binary field arithmetic, extended-BCH component codes, product codes and iBDD.

mod bch;
mod gf;
mod product;

pub use bch::{ComponentCode, Correction, Syndrome};
pub use gf::GaloisField;
pub(crate) use product::ibdd_in_place;
pub use product::{ibdd_decode, is_pc_codeword, pc_encode, PcCodeword};
