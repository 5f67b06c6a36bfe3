//! Adaptive chunk-by-chunk reconciliation.
//!
//! The key is corrected one code block at a time. Each block is decoded with
//! the highest-rate code whose capacity margin covers the current error-rate
//! bound; Bob counts the bits he flipped, which refines the bound for the next
//! block. A block that fails is retried with the next lower rate, and every
//! syndrome sent counts as leakage. A block that fails at the lowest rate is
//! discarded by both sides.

use crate::error::{Error, Result};
use crate::postprocessing::estimate::{beta_hpd, CREDIBLE_MASS};
use crate::postprocessing::hamming;
use crate::postprocessing::ldpc::SyndromeCode;
use crate::security::binary_entropy_unchecked;

/// Code rates of the standard ladder, highest first.
pub const STANDARD_RATES: [f64; 4] = [0.8, 0.7, 0.6, 0.5];
pub const STANDARD_BLOCK_LEN: usize = 1000;
const CODE_SEED: u64 = 0x5eed_c0de;

/// Codes of one block length, ordered by decreasing rate.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeLadder {
    codes: Vec<SyndromeCode>,
}

impl CodeLadder {
    pub fn new(mut codes: Vec<SyndromeCode>) -> Result<Self> {
        let Some(first) = codes.first() else {
            return Err(Error::Empty("code ladder"));
        };
        let n = first.block_len();
        if codes.iter().any(|c| c.block_len() != n) {
            return Err(Error::Dimension("codes of different block lengths".into()));
        }
        codes.sort_by(|a, b| b.rate().total_cmp(&a.rate()));
        Ok(Self { codes })
    }

    /// PEG codes at [`STANDARD_RATES`] with the [`standard_degrees`] profile.
    pub fn standard(block_len: usize) -> Result<Self> {
        let codes = STANDARD_RATES
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let syndrome_len = ((1.0 - r) * block_len as f64).round() as usize;
                SyndromeCode::peg_with_degrees(
                    &standard_degrees(block_len, syndrome_len),
                    syndrome_len,
                    CODE_SEED + i as u64,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(codes)
    }

    pub fn block_len(&self) -> usize {
        self.codes[0].block_len()
    }

    pub fn codes(&self) -> &[SyndromeCode] {
        &self.codes
    }

    /// Index of the highest-rate code with `1 - rate >= efficiency·h(ber)`,
    /// or the lowest rate when none qualifies.
    pub fn choose(&self, ber: f64, efficiency: f64) -> usize {
        let needed = efficiency * binary_entropy_unchecked(ber.clamp(0.0, 0.5));
        self.codes
            .iter()
            .position(|c| 1.0 - c.rate() >= needed)
            .unwrap_or(self.codes.len() - 1)
    }
}

/// Variable degrees: `0.9·m` of degree 2 (fewer than the checks, so they
/// close no cycle among themselves), 15% of degree 8, the rest degree 3.
pub fn standard_degrees(block_len: usize, syndrome_len: usize) -> Vec<usize> {
    let twos = (0.9 * syndrome_len as f64) as usize;
    let eights = if syndrome_len >= 8 { (0.15 * block_len as f64) as usize } else { 0 };
    let threes = block_len.saturating_sub(twos + eights);
    let mut degrees = vec![2; twos.min(block_len)];
    degrees.extend(std::iter::repeat_n(3, threes));
    degrees.extend(std::iter::repeat_n(8, block_len - degrees.len()));
    degrees
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconcileOptions {
    /// Error-rate bound for the first block when nothing is known yet.
    pub initial_ber: f64,
    /// Prior upper bound on the error rate (e.g. from disclosed bits); replaces `initial_ber`.
    pub prior_ber: Option<f64>,
    /// Syndrome length per block relative to `h(ber)`. With soft homodyne
    /// input the standard codes decode reliably down to about 1.0; 1.1 leaves margin.
    pub efficiency: f64,
    pub max_iterations: usize,
    /// Abort when more than this fraction of blocks is discarded.
    pub max_discard_fraction: f64,
}

impl Default for ReconcileOptions {
    fn default() -> Self {
        Self {
            initial_ber: 0.10,
            prior_ber: None,
            efficiency: 1.1,
            max_iterations: 100,
            max_discard_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkReport {
    pub index: usize,
    /// Error-rate bound the first code was chosen for.
    pub target_ber: f64,
    /// Rates tried, in order.
    pub rates: Vec<f64>,
    pub leaked_bits: usize,
    /// Bits Bob flipped; `None` if the block was discarded.
    pub errors: Option<usize>,
    /// Running error-rate estimate and its standard error after this block.
    pub ber_estimate: f64,
    pub ber_std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconciliation {
    /// Alice's bits of the kept blocks.
    pub key_a: Vec<bool>,
    /// Bob's corrected bits of the kept blocks.
    pub key_b: Vec<bool>,
    /// Syndrome bits disclosed, including those of failed attempts and discarded blocks.
    pub leaked_bits: usize,
    pub errors: usize,
    pub chunks: Vec<ChunkReport>,
    pub discarded: Vec<usize>,
    /// Bits left over after the last whole block; not reconciled.
    pub dropped_tail: usize,
}

impl Reconciliation {
    pub fn ber_estimate(&self) -> Option<f64> {
        self.chunks.last().map(|c| c.ber_estimate)
    }
}

/// Reconciles `key_b` to `key_a` block by block.
///
/// `llr` holds Bob's per-bit log-likelihood ratios (positive favours 0).
/// Alice's side enters only through the syndromes of her blocks.
pub fn adaptive_correct(
    key_a: &[bool],
    key_b: &[bool],
    llr: &[f64],
    ladder: &CodeLadder,
    options: &ReconcileOptions,
) -> Result<Reconciliation> {
    if key_a.len() != key_b.len() || key_b.len() != llr.len() {
        return Err(Error::Dimension(format!(
            "key lengths {} / {} with {} likelihoods",
            key_a.len(),
            key_b.len(),
            llr.len()
        )));
    }
    let n = ladder.block_len();
    if key_a.len() < n {
        return Err(Error::Dimension(format!(
            "key of {} bits is shorter than one block of {n}",
            key_a.len()
        )));
    }
    let blocks = key_a.len() / n;
    let mut out = Reconciliation {
        key_a: Vec::with_capacity(blocks * n),
        key_b: Vec::with_capacity(blocks * n),
        leaked_bits: 0,
        errors: 0,
        chunks: Vec::with_capacity(blocks),
        discarded: Vec::new(),
        dropped_tail: key_a.len() - blocks * n,
    };
    let (mut seen_bits, mut seen_errors) = (0usize, 0usize);
    let mut target = options.prior_ber.unwrap_or(options.initial_ber);

    for index in 0..blocks {
        let range = index * n..(index + 1) * n;
        let (a, b, l) = (&key_a[range.clone()], &key_b[range.clone()], &llr[range]);
        let mut rates = Vec::new();
        let mut leaked = 0;
        let mut corrected = None;
        for code in &ladder.codes()[ladder.choose(target, options.efficiency)..] {
            rates.push(code.rate());
            leaked += code.syndrome_len();
            if let Ok((bits, _)) = code.decode(l, &code.syndrome(a)?, options.max_iterations) {
                corrected = Some(bits);
                break;
            }
        }
        out.leaked_bits += leaked;
        let errors = corrected.as_ref().map(|bits| hamming(bits, b));
        match corrected {
            Some(bits) => {
                let e = hamming(&bits, b);
                seen_bits += n;
                seen_errors += e;
                out.errors += e;
                out.key_a.extend_from_slice(a);
                out.key_b.extend(bits);
            }
            None => out.discarded.push(index),
        }

        let (estimate, std_error) = if seen_bits == 0 {
            (target, f64::NAN)
        } else {
            let p = seen_errors as f64 / seen_bits as f64;
            (p, (p * (1.0 - p) / seen_bits as f64).sqrt())
        };
        out.chunks.push(ChunkReport {
            index,
            target_ber: target,
            rates,
            leaked_bits: leaked,
            errors,
            ber_estimate: estimate,
            ber_std_error: std_error,
        });
        if seen_bits > 0 {
            let k = seen_errors as f64;
            target = beta_hpd(1.0 + k, 1.0 + seen_bits as f64 - k, CREDIBLE_MASS).1;
        }
    }

    if out.discarded.len() as f64 > options.max_discard_fraction * blocks as f64 {
        return Err(Error::ReconciliationAborted {
            failed: out.discarded.len(),
            total: blocks,
        });
    }
    Ok(out)
}
