//! Bit-error-rate estimation from disclosed bits or disclosed block parities.
//!
//! Both estimators report a 95% highest-posterior-density interval under a
//! uniform Beta(1, 1) prior.

use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Posterior mass of the reported intervals.
pub const CREDIBLE_MASS: f64 = 0.95;

/// Shortest interval holding `mass` of Beta(a, b), for `a, b >= 1`.
pub fn beta_hpd(a: f64, b: f64, mass: f64) -> (f64, f64) {
    // Parameters are >= 1, so construction cannot fail.
    let dist = Beta::new(a, b).expect("valid Beta shape");
    let q = |p: f64| dist.inverse_cdf(p.clamp(0.0, 1.0));
    if a <= 1.0 {
        return (0.0, q(mass));
    }
    if b <= 1.0 {
        return (q(1.0 - mass), 1.0);
    }
    // Interval width is unimodal in the lower tail mass; golden-section search.
    let width = |t: f64| q(t + mass) - q(t);
    let (mut lo, mut hi) = (0.0, 1.0 - mass);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = hi - ratio * (hi - lo);
        let x2 = lo + ratio * (hi - lo);
        if width(x1) < width(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let t = 0.5 * (lo + hi);
    (q(t), q(t + mass))
}

/// `count` distinct positions in `0..len`, sorted.
pub fn sample_positions(len: usize, count: usize, rng: &mut Stream) -> Result<Vec<usize>> {
    if count > len {
        return Err(Error::Dimension(format!("cannot sample {count} of {len} positions")));
    }
    let mut pool: Vec<usize> = (0..len).collect();
    for i in 0..count {
        let j = i + rng.below((len - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool.sort_unstable();
    Ok(pool)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisclosureEstimate {
    pub sample_size: usize,
    pub mismatches: usize,
    pub ber: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Compares the keys at `positions`. The caller removes these positions from
/// both keys afterwards; they are public.
pub fn estimate_ber_disclosure(key_a: &[bool], key_b: &[bool], positions: &[usize]) -> Result<DisclosureEstimate> {
    if positions.is_empty() {
        return Err(Error::Empty("disclosure sample"));
    }
    if key_a.len() != key_b.len() {
        return Err(Error::Dimension(format!("keys of length {} and {}", key_a.len(), key_b.len())));
    }
    let mut mismatches = 0;
    for &p in positions {
        if p >= key_a.len() {
            return Err(Error::Dimension(format!("position {p} beyond key length {}", key_a.len())));
        }
        mismatches += usize::from(key_a[p] != key_b[p]);
    }
    let n = positions.len();
    let (lower, upper) = beta_hpd(1.0 + mismatches as f64, 1.0 + (n - mismatches) as f64, CREDIBLE_MASS);
    Ok(DisclosureEstimate {
        sample_size: n,
        mismatches,
        ber: mismatches as f64 / n as f64,
        lower,
        upper,
    })
}

/// Probability that a block of `block_size` bits has mismatched parity:
/// `(1 - (1 - 2·ber)^block_size) / 2`.
pub fn parity_mismatch_probability(ber: f64, block_size: usize) -> f64 {
    0.5 * (1.0 - (1.0 - 2.0 * ber).powi(block_size as i32))
}

/// Inverse of [`parity_mismatch_probability`] on `[0, 1/2]`.
/// Returns `(ber, saturated)`; at or above 1/2 the inversion is singular and
/// the estimate saturates at 1/2.
pub fn invert_parity_mismatch(mismatch_rate: f64, block_size: usize) -> (f64, bool) {
    if mismatch_rate >= 0.5 {
        return (0.5, true);
    }
    let base = 1.0 - 2.0 * mismatch_rate.max(0.0);
    (0.5 * (1.0 - base.powf(1.0 / block_size as f64)), false)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityEstimate {
    pub block_size: usize,
    pub blocks: usize,
    pub mismatches: usize,
    pub mismatch_rate: f64,
    pub inferred_ber: f64,
    pub lower: f64,
    pub upper: f64,
    /// The mismatch rate reached 1/2, where the inversion is singular.
    pub saturated: bool,
}

/// Compares parities of consecutive blocks of `block_size` bits; a trailing
/// partial block is ignored. Each block discloses one parity bit.
pub fn estimate_ber_parity(key_a: &[bool], key_b: &[bool], block_size: usize) -> Result<ParityEstimate> {
    if block_size == 0 {
        return Err(Error::Domain {
            name: "block_size",
            value: 0.0,
            expected: ">= 1",
        });
    }
    if key_a.len() != key_b.len() {
        return Err(Error::Dimension(format!("keys of length {} and {}", key_a.len(), key_b.len())));
    }
    if block_size > key_a.len() {
        return Err(Error::Dimension(format!(
            "block size {block_size} exceeds key length {}",
            key_a.len()
        )));
    }
    let parity = |bits: &[bool]| bits.iter().fold(false, |acc, &b| acc ^ b);
    let blocks = key_a.len() / block_size;
    let mismatches = key_a
        .chunks_exact(block_size)
        .zip(key_b.chunks_exact(block_size))
        .filter(|(a, b)| parity(a) != parity(b))
        .count();
    let mismatch_rate = mismatches as f64 / blocks as f64;
    let (inferred_ber, saturated) = invert_parity_mismatch(mismatch_rate, block_size);
    let (lo, hi) = beta_hpd(1.0 + mismatches as f64, 1.0 + (blocks - mismatches) as f64, CREDIBLE_MASS);
    Ok(ParityEstimate {
        block_size,
        blocks,
        mismatches,
        mismatch_rate,
        inferred_ber,
        lower: invert_parity_mismatch(lo, block_size).0,
        upper: invert_parity_mismatch(hi, block_size).0,
        saturated,
    })
}
