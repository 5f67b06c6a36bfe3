//! Classical post-processing: error estimation, syndrome-based reconciliation
//! and privacy amplification.
//!
//! Bits are `bool`, with `false` for bit 0. Bit 0 is the positive amplitude,
//! so a positive quadrature or a positive log-likelihood ratio favours `false`.

pub mod estimate;
pub mod ldpc;
pub mod reconcile;
pub mod toeplitz;

pub use estimate::{
    estimate_ber_disclosure, estimate_ber_parity, invert_parity_mismatch, parity_mismatch_probability,
    DisclosureEstimate, ParityEstimate,
};
pub use ldpc::{ldpc_correct, Correction, SyndromeCode};
pub use reconcile::{adaptive_correct, CodeLadder, Reconciliation, ReconcileOptions};
pub use toeplitz::{privacy_amplify, ToeplitzHash};

use crate::detection::SignalPath;
use crate::error::{Error, Result};

/// Bob's conclusive bits with the quadrature each was decided from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SiftedKey {
    pub bits: Vec<bool>,
    pub soft_q: Vec<f64>,
}

impl SiftedKey {
    pub fn new(bits: Vec<bool>, soft_q: Vec<f64>) -> Result<Self> {
        if bits.len() != soft_q.len() {
            return Err(Error::Dimension(format!(
                "{} bits but {} quadrature values",
                bits.len(),
                soft_q.len()
            )));
        }
        Ok(Self { bits, soft_q })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Drops the (sorted, distinct) positions, e.g. after they were disclosed.
    pub fn remove_positions(&mut self, positions: &[usize]) {
        remove_positions(&mut self.bits, positions);
        remove_positions(&mut self.soft_q, positions);
    }
}

/// Removes sorted, distinct `positions` from `items`, keeping order.
pub fn remove_positions<T>(items: &mut Vec<T>, positions: &[usize]) {
    let mut next = positions.iter().copied().peekable();
    let mut index = 0;
    items.retain(|_| {
        let drop = next.peek() == Some(&index);
        if drop {
            next.next();
        }
        index += 1;
        !drop
    });
}

/// Gaussian likelihoods of Bob's quadrature under the two bit values:
/// `N(+mean, variance)` for bit 0 and `N(-mean, variance)` for bit 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePosterior {
    pub mean: f64,
    pub variance: f64,
}

impl QuadraturePosterior {
    pub fn from_path(path: &SignalPath) -> Self {
        let q = path.bob_quadrature(false);
        Self {
            mean: q.mean,
            variance: q.variance,
        }
    }

    /// `ln p(q | bit 0) - ln p(q | bit 1) = 2·mean·q / variance`.
    pub fn llr(&self, q: f64) -> f64 {
        2.0 * self.mean * q / self.variance
    }

    /// Posterior probability (equal priors) that the sent bit differs from
    /// the sign decision on `q`.
    pub fn error_prob(&self, q: f64) -> f64 {
        bit_error_prob_from_llr(self.llr(q))
    }

    pub fn llrs(&self, soft_q: &[f64]) -> Vec<f64> {
        soft_q.iter().map(|&q| self.llr(q)).collect()
    }
}

pub fn bit_error_prob_from_q(q: f64, posterior: &QuadraturePosterior) -> f64 {
    posterior.error_prob(q)
}

/// `1 / (1 + e^{|llr|})`.
pub fn bit_error_prob_from_llr(llr: f64) -> f64 {
    let x = (-llr.abs()).exp();
    x / (1.0 + x)
}

/// Log-likelihood ratio of a binary symmetric channel with crossover `p` for an observed bit.
pub fn bsc_llr(bit: bool, p: f64) -> f64 {
    let magnitude = ((1.0 - p) / p).ln();
    if bit {
        -magnitude
    } else {
        magnitude
    }
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Packs bits little-endian into 64-bit words.
pub fn pack_bits(bits: &[bool]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_prob_examples() {
        let post = QuadraturePosterior { mean: 2.0, variance: 0.5 };
        assert_eq!(post.error_prob(0.0), 0.5);
        assert_eq!(post.error_prob(1e6), 0.0);
        for q in [0.1, 0.7, 3.0] {
            assert_eq!(post.error_prob(q), post.error_prob(-q));
        }
        // Direct likelihood ratio with the normal densities.
        let q = 0.3;
        let (l0, l1) = (
            crate::special::normal_pdf(q, 2.0, 0.5),
            crate::special::normal_pdf(q, -2.0, 0.5),
        );
        assert!((post.error_prob(q) - l1 / (l0 + l1)).abs() < 1e-15);
    }

    #[test]
    fn removing_positions() {
        let mut v: Vec<u32> = (0..10).collect();
        remove_positions(&mut v, &[0, 3, 9]);
        assert_eq!(v, vec![1, 2, 4, 5, 6, 7, 8]);
        let mut key = SiftedKey::new(vec![true, false, true], vec![1.0, 2.0, 3.0]).unwrap();
        key.remove_positions(&[1]);
        assert_eq!(key.bits, vec![true, true]);
        assert_eq!(key.soft_q, vec![1.0, 3.0]);
        assert!(SiftedKey::new(vec![true], vec![]).is_err());
    }

    #[test]
    fn packing() {
        let bits: Vec<bool> = (0..70).map(|i| i % 3 == 0).collect();
        let w = pack_bits(&bits);
        assert_eq!(w.len(), 2);
        for (i, &b) in bits.iter().enumerate() {
            assert_eq!((w[i / 64] >> (i % 64)) & 1 == 1, b);
        }
    }
}
