use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{RoundGenerator, SimConfig};
use crate::detection::{Outcome, OutcomeProbs};
use crate::error::Result;
use crate::postprocessing::estimate::sample_positions;
use crate::postprocessing::{
    adaptive_correct, estimate_ber_disclosure, hamming, pack_bits, privacy_amplify, remove_positions, CodeLadder,
    DisclosureEstimate, QuadraturePosterior, ReconcileOptions, Reconciliation, ToeplitzHash,
};
use crate::rng::{Domain, Stream};
use crate::security::{evaluate_path, SecurityReport};

/// Outcome of a simulated session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    /// The configuration actually run (`gamma`, `theta` resolved).
    pub config: SimConfig,
    /// `counts[a][k]` for Alice's bit `a` and outcome index `k` (0, 1, fail).
    pub counts: [[u64; 3]; 2],
    pub sifted_len: usize,
    /// Sifted bits where Bob's decision differs from Alice's bit.
    pub sifted_errors: usize,
    pub disclosure: Option<DisclosureEstimate>,
    /// Sifted bits made public for the error estimate (and removed).
    pub disclosed_bits: usize,
    /// Syndrome bits sent during reconciliation.
    pub leaked_bits: usize,
    /// Bits removed by privacy amplification.
    pub eve_bits: usize,
    /// Length of the reconciled key entering privacy amplification.
    pub reconciled_len: usize,
    /// Blocks dropped because no code corrected them.
    pub discarded_chunks: usize,
    pub final_len: usize,
    pub empirical_p: OutcomeProbs,
    pub analytic_p: OutcomeProbs,
    pub analytic: SecurityReport,
    pub key_a: Vec<bool>,
    pub key_b_final: Vec<bool>,
}

impl SessionResult {
    pub fn rounds(&self) -> u64 {
        self.config.rounds
    }

    pub fn keys_agree(&self) -> bool {
        self.key_a == self.key_b_final
    }

    /// Hex SHA-256 of Alice's final key, packed little-endian.
    pub fn final_key_digest(&self) -> String {
        let mut hasher = Sha256::new();
        for word in pack_bits(&self.key_a) {
            hasher.update(word.to_le_bytes());
        }
        hasher.update((self.key_a.len() as u64).to_le_bytes());
        hex::encode(hasher.finalize())
    }

    pub fn sifted_ber(&self) -> Option<f64> {
        (self.sifted_len > 0).then(|| self.sifted_errors as f64 / self.sifted_len as f64)
    }
}

fn outcome_index(outcome: Outcome) -> usize {
    match outcome {
        Outcome::Zero => 0,
        Outcome::One => 1,
        Outcome::Fail => 2,
    }
}

/// Runs all rounds, sifts, estimates the error rate on disclosed bits,
/// reconciles and privacy-amplifies.
///
/// A sifted key too short for the disclosure sample plus one reconciliation
/// block yields an empty final key rather than an error.
pub fn run_session(config: &SimConfig) -> Result<SessionResult> {
    let config = config.resolved()?;
    let gen = RoundGenerator::new(&config)?;

    let mut counts = [[0u64; 3]; 2];
    let mut key_a = Vec::new();
    let mut key_b = Vec::new();
    let mut soft_q = Vec::new();
    let batch = config.batch as u64;
    let mut start = 0;
    while start < config.rounds {
        let end = (start + batch).min(config.rounds);
        let records: Vec<_> = (start..end).into_par_iter().map(|i| gen.round(i)).collect();
        for r in records {
            counts[usize::from(r.a)][outcome_index(r.outcome)] += 1;
            if let Some(bit) = r.outcome.bit() {
                key_a.push(r.a);
                key_b.push(bit);
                soft_q.push(r.q);
            }
        }
        start = end;
    }

    let n = config.rounds as f64;
    let correct = (counts[0][0] + counts[1][1]) as f64 / n;
    let wrong = (counts[0][1] + counts[1][0]) as f64 / n;
    let empirical_p = OutcomeProbs {
        p00: correct,
        p10: wrong,
        p01: wrong,
        p11: correct,
        p_ok: correct + wrong,
    };
    let analytic = evaluate_path(&gen.path, &gen.params);
    let sifted_len = key_a.len();
    let sifted_errors = hamming(&key_a, &key_b);

    let mut result = SessionResult {
        config,
        counts,
        sifted_len,
        sifted_errors,
        disclosure: None,
        disclosed_bits: 0,
        leaked_bits: 0,
        eve_bits: 0,
        reconciled_len: 0,
        discarded_chunks: 0,
        final_len: 0,
        empirical_p,
        analytic_p: analytic.probs,
        analytic,
        key_a: Vec::new(),
        key_b_final: Vec::new(),
    };
    if sifted_len < config.disclosure + config.chunk {
        return Ok(result);
    }

    let mut disclosure_rng = Stream::from_seed(config.seed, Domain::Disclosure);
    let positions = sample_positions(sifted_len, config.disclosure, &mut disclosure_rng)?;
    let disclosure = if positions.is_empty() {
        None
    } else {
        Some(estimate_ber_disclosure(&key_a, &key_b, &positions)?)
    };
    remove_positions(&mut key_a, &positions);
    remove_positions(&mut key_b, &positions);
    remove_positions(&mut soft_q, &positions);
    result.disclosure = disclosure;
    result.disclosed_bits = positions.len();

    let llr = QuadraturePosterior::from_path(&gen.path).llrs(&soft_q);
    let ladder = CodeLadder::standard(config.chunk)?;
    let options = ReconcileOptions {
        prior_ber: disclosure.map(|d| d.upper),
        ..ReconcileOptions::default()
    };
    let Reconciliation {
        key_a: rec_a,
        key_b: rec_b,
        leaked_bits,
        discarded,
        ..
    } = adaptive_correct(&key_a, &key_b, &llr, &ladder, &options)?;

    let eve_bits = (analytic.eve_info_bound * sifted_len as f64 + result.disclosed_bits as f64 + leaked_bits as f64)
        .ceil() as usize;
    let final_len = rec_a.len().saturating_sub(eve_bits);
    result.leaked_bits = leaked_bits;
    result.eve_bits = eve_bits;
    result.reconciled_len = rec_a.len();
    result.discarded_chunks = discarded.len();
    result.final_len = final_len;
    if final_len == 0 {
        return Ok(result);
    }

    let mut hash_rng = Stream::from_seed(config.seed, Domain::Hashing);
    let hash = ToeplitzHash::random(rec_a.len(), final_len, &mut hash_rng)?;
    let removed = rec_a.len() - final_len;
    result.key_a = privacy_amplify(&rec_a, removed, &hash)?;
    result.key_b_final = privacy_amplify(&rec_b, removed, &hash)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LineGeometry;

    fn smoke_config(rounds: u64) -> SimConfig {
        let g = LineGeometry::new(100.0, 50.0, 50.0, 0.0).unwrap();
        SimConfig::new(g, 100.0, 30.0).with_rounds(rounds)
    }

    #[test]
    fn strong_signal_short_line_smoke() {
        let r = run_session(&smoke_config(100_000)).unwrap();
        assert!(r.final_len > 0);
        assert!(r.keys_agree());
        assert_eq!(r.key_a.len(), r.final_len);
        assert!(r.final_len <= r.sifted_len);
        assert_eq!(r.counts.iter().flatten().sum::<u64>(), 100_000);
    }

    #[test]
    fn replay_is_bit_identical() {
        let c = smoke_config(20_000).with_seed(7);
        assert_eq!(run_session(&c).unwrap(), run_session(&c).unwrap());
        let other = run_session(&c.with_seed(8)).unwrap();
        assert_ne!(other.key_a, run_session(&c).unwrap().key_a);
    }

    #[test]
    fn batch_size_does_not_change_the_result() {
        let c = smoke_config(20_000);
        let small = SimConfig { batch: 333, ..c };
        let (a, b) = (run_session(&c).unwrap(), run_session(&small).unwrap());
        assert_eq!(a.key_a, b.key_a);
        assert_eq!(a.counts, b.counts);
    }

    #[test]
    fn too_few_rounds_gives_empty_key() {
        let r = run_session(&smoke_config(500)).unwrap();
        assert_eq!(r.final_len, 0);
        assert!(r.key_a.is_empty() && r.keys_agree());
    }
}
