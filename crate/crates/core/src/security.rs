//! Information-theoretic bounds and the asymptotic secret-key fraction.
//!
//! All entropies are in bits.

use crate::channel::LineGeometry;
use crate::detection::{path_outcome_probs, HomodyneParams, OutcomeProbs, SignalPath};
use crate::error::{check_probability, Error, Result};
use crate::special::half_erfc;

/// Conclusive probabilities below this are treated as zero.
pub const P_OK_FLOOR: f64 = 1e-300;

/// `h(p) = -p log₂ p - (1-p) log₂(1-p)` with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(binary_entropy_unchecked(p))
}

pub(crate) fn binary_entropy_unchecked(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// `⟨exp(-2 r_E |α|²)⟩` over the splice amplitudes of conclusive rounds.
///
/// The Gaussian integral is done in closed form: the weight `exp(-2 r_E|α|²)`
/// narrows the P-function around the splice by `k = 1 + 2 r_E ε₁` and the
/// conclusive probability is then evaluated under the tilted distribution.
pub fn eve_exp_term(path: &SignalPath, params: &HomodyneParams) -> Result<f64> {
    let probs = path_outcome_probs(path, params);
    eve_exp_term_with(path, params, &probs)
}

fn eve_exp_term_with(path: &SignalPath, params: &HomodyneParams, probs: &OutcomeProbs) -> Result<f64> {
    if probs.p_ok < P_OK_FLOOR {
        return Err(Error::Underflow { p_ok: probs.p_ok });
    }
    let r_e = path.r_e;
    if r_e == 0.0 {
        return Ok(1.0);
    }
    let gamma = path.gamma;
    let eps1 = path.before.excess_noise();
    let eps2 = path.after.excess_noise();
    let g1t1 = path.before.intensity_factor();
    let g2t2 = path.after.intensity_factor();

    let k = 1.0 + 2.0 * r_e * eps1;
    let prefactor = (-2.0 * r_e * g1t1 * gamma * gamma / k).exp() / k;
    let shift = ((1.0 - r_e) * g2t2 * g1t1).sqrt() * gamma / k;
    let spread = (2.0 * eps2 + 1.0 + 2.0 * (1.0 - r_e) * g2t2 * eps1 + 2.0 * r_e * (2.0 * eps2 + 1.0) * eps1).sqrt();
    let scale = (2.0 * k).sqrt() / spread;
    let theta = params.theta();
    let conclusive = half_erfc(scale * (theta - shift)) + half_erfc(scale * (theta + shift));
    Ok((prefactor * conclusive / probs.p_ok).clamp(0.0, 1.0))
}

/// Upper bound on Eve's information per sifted bit, `h((1 + ⟨e^{-2 r_E|α|²}⟩)/2)`.
pub fn eve_info_bound(path: &SignalPath, params: &HomodyneParams) -> Result<f64> {
    let mean = eve_exp_term(path, params)?;
    Ok(binary_entropy_unchecked(0.5 * (1.0 + mean)))
}

/// `H(A|B) = h(p00 / p(✓))`.
pub fn bob_cond_entropy(probs: &OutcomeProbs) -> Result<f64> {
    if probs.p_ok <= 0.0 {
        return Err(Error::Underflow { p_ok: probs.p_ok });
    }
    Ok(binary_entropy_unchecked((probs.p00 / probs.p_ok).clamp(0.0, 1.0)))
}

/// Everything the rate formula needs at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityReport {
    pub gamma: f64,
    pub theta: f64,
    pub probs: OutcomeProbs,
    pub p_ok: f64,
    pub eve_info_bound: f64,
    pub bob_cond_entropy: f64,
    /// `p(✓)(1 - I_E - H(A|B))` before clamping; negative means no key.
    pub raw_key_fraction: f64,
    /// `max(raw_key_fraction, 0)`.
    pub key_fraction: f64,
    /// Set when `p(✓)` underflowed and the rate was forced to zero.
    pub underflow: bool,
}

/// Evaluates the secret-key fraction `L_f / L` at `(gamma, theta)`.
pub fn evaluate(gamma: f64, theta: f64, geometry: &LineGeometry) -> Result<SecurityReport> {
    let path = SignalPath::from_geometry(geometry, gamma)?;
    let params = HomodyneParams::new(theta)?;
    Ok(evaluate_path(&path, &params))
}

pub fn evaluate_path(path: &SignalPath, params: &HomodyneParams) -> SecurityReport {
    let probs = path_outcome_probs(path, params);
    if probs.p_ok < P_OK_FLOOR {
        return SecurityReport {
            gamma: path.gamma,
            theta: params.theta(),
            probs,
            p_ok: probs.p_ok,
            eve_info_bound: 1.0,
            bob_cond_entropy: 1.0,
            raw_key_fraction: 0.0,
            key_fraction: 0.0,
            underflow: true,
        };
    }
    // p_ok is above the floor, so neither call can fail.
    let mean = eve_exp_term_with(path, params, &probs).unwrap_or(0.0);
    let eve = binary_entropy_unchecked(0.5 * (1.0 + mean));
    let bob = bob_cond_entropy(&probs).unwrap_or(1.0);
    let raw = probs.p_ok * (1.0 - eve - bob);
    SecurityReport {
        gamma: path.gamma,
        theta: params.theta(),
        probs,
        p_ok: probs.p_ok,
        eve_info_bound: eve,
        bob_cond_entropy: bob,
        raw_key_fraction: raw,
        key_fraction: raw.max(0.0),
        underflow: false,
    }
}

/// `L_f / L` at `(gamma, theta)`, clamped at zero.
pub fn key_fraction(gamma: f64, theta: f64, geometry: &LineGeometry) -> Result<f64> {
    evaluate(gamma, theta, geometry).map(|r| r.key_fraction)
}
