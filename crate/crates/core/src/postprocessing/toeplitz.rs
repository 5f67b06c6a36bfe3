//! Privacy amplification with random binary Toeplitz matrices.
//!
//! The hash is defined by `l1 + l2 - 1` bits on its diagonals. Entry `(i, j)`,
//! for input index `i < l1` and output index `j < l2`, is
//! `diagonal[i - j + l2 - 1]`, and output bit `j` is the GF(2) inner product of
//! that column with the input.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::postprocessing::pack_bits;
use crate::rng::Stream;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzHash {
    l1: usize,
    l2: usize,
    diagonal: Vec<bool>,
}

impl ToeplitzHash {
    pub fn new(l1: usize, l2: usize, diagonal: Vec<bool>) -> Result<Self> {
        if l2 > l1 {
            return Err(Error::Dimension(format!("output length {l2} exceeds input length {l1}")));
        }
        let expected = (l1 + l2).saturating_sub(1);
        if diagonal.len() != expected {
            return Err(Error::Dimension(format!(
                "{} diagonal bits for a {l1}x{l2} hash (need {expected})",
                diagonal.len()
            )));
        }
        Ok(Self { l1, l2, diagonal })
    }

    pub fn random(l1: usize, l2: usize, rng: &mut Stream) -> Result<Self> {
        let diagonal = (0..(l1 + l2).saturating_sub(1)).map(|_| rng.bit()).collect();
        Self::new(l1, l2, diagonal)
    }

    pub fn input_len(&self) -> usize {
        self.l1
    }

    pub fn output_len(&self) -> usize {
        self.l2
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.diagonal[i + self.l2 - 1 - j]
    }

    pub fn apply(&self, input: &[bool]) -> Result<Vec<bool>> {
        if input.len() != self.l1 {
            return Err(Error::Dimension(format!(
                "input of {} bits for a hash of input length {}",
                input.len(),
                self.l1
            )));
        }
        let v = pack_bits(input);
        let words = v.len();
        let mut d = pack_bits(&self.diagonal);
        d.extend([0, 0]);
        // shifted[r][k] holds diagonal bits 64k + r .. 64k + r + 63, so every
        // column's window is a contiguous word slice. Input padding bits are
        // zero, so no tail mask is needed.
        let shifted: Vec<Vec<u64>> = (0..64)
            .map(|r| {
                (0..d.len() - 1)
                    .map(|k| if r == 0 { d[k] } else { (d[k] >> r) | (d[k + 1] << (64 - r)) })
                    .collect()
            })
            .collect();
        Ok((0..self.l2)
            .into_par_iter()
            .map(|j| {
                let start = self.l2 - 1 - j;
                let window = &shifted[start % 64][start / 64..start / 64 + words];
                let acc = window.iter().zip(&v).fold(0u64, |acc, (a, b)| acc ^ (a & b));
                acc.count_ones() & 1 == 1
            })
            .collect())
    }
}

/// Compresses `key` by `eve_bits`: output length is `key.len() - eve_bits`.
pub fn privacy_amplify(key: &[bool], eve_bits: usize, hash: &ToeplitzHash) -> Result<Vec<bool>> {
    if eve_bits > key.len() {
        return Err(Error::Dimension(format!(
            "cannot remove {eve_bits} bits from a key of {}",
            key.len()
        )));
    }
    if hash.output_len() != key.len() - eve_bits {
        return Err(Error::Dimension(format!(
            "hash outputs {} bits, expected {}",
            hash.output_len(),
            key.len() - eve_bits
        )));
    }
    hash.apply(key)
}
