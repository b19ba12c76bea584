//! Square row-major matrices used for codewords (`BitMatrix`) and soft values (`SoftMatrix`).

use crate::error::{check_len, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

/// n×n binary array with entries in {0, 1}.
pub type BitMatrix = Matrix<u8>;

/// n×n real array (channel values Y, soft information R, extrinsic messages L).
pub type SoftMatrix = Matrix<f64>;

impl<T: Copy + Default> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::default(); n * n],
        }
    }

    pub fn from_vec(n: usize, data: Vec<T>) -> Result<Self> {
        check_len(n * n, data.len())?;
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, T> {
        self.data.chunks(self.n)
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = self.clone();
        out.transpose_in_place();
        out
    }

    pub fn transpose_in_place(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                self.data.swap(i * n + j, j * n + i);
            }
        }
    }
}

impl SoftMatrix {
    /// Mean of |x| over all n² entries.
    pub fn mean_abs(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|v| v.abs()).sum::<f64>() / self.data.len() as f64
    }
}

impl BitMatrix {
    /// Number of positions where `self` and `other` differ.
    pub fn hamming_distance(&self, other: &BitMatrix) -> usize {
        self.data
            .iter()
            .zip(&other.data)
            .filter(|(a, b)| a != b)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_twice_is_identity() {
        let m = SoftMatrix::from_vec(3, (0..9).map(f64::from).collect()).unwrap();
        let t = m.transpose();
        assert_eq!(t.get(0, 2), m.get(2, 0));
        assert_eq!(t.transpose(), m);
    }

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(BitMatrix::from_vec(4, vec![0; 15]).is_err());
    }
}
