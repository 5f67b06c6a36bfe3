//! Homodyne detection of the q-quadrature with a symmetric dead zone.

use num_complex::Complex64;

use crate::channel::{ChannelPair, LineGeometry};
use crate::error::{check_fraction, Error, Result};
use crate::rng::Stream;
use crate::signal::{beamsplit, propagate, GaussianSignal};
use crate::special::half_erfc;

/// Variance of the q-quadrature `(a + a†)/2` in any coherent state.
pub const COHERENT_QUADRATURE_VARIANCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneParams {
    theta: f64,
}

impl HomodyneParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::Domain {
                name: "theta",
                value: theta,
                expected: "finite and >= 0",
            });
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Zero,
    One,
    Fail,
}

impl Outcome {
    pub fn bit(self) -> Option<bool> {
        match self {
            Outcome::Zero => Some(false),
            Outcome::One => Some(true),
            Outcome::Fail => None,
        }
    }
}

/// `q >= Θ` reads 0, `q <= -Θ` reads 1, anything strictly between is inconclusive.
pub fn classify(q: f64, params: &HomodyneParams) -> Outcome {
    if q >= params.theta {
        Outcome::Zero
    } else if q <= -params.theta {
        Outcome::One
    } else {
        Outcome::Fail
    }
}

/// Mean and variance of a quadrature measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureStats {
    pub mean: f64,
    pub variance: f64,
}

/// Distribution of `q` measured on `sig`: the coherent-state width 1/4
/// convolved with the P-function spread `p_var / 2` of the real part.
pub fn q_distribution(sig: &GaussianSignal) -> QuadratureStats {
    QuadratureStats {
        mean: sig.center.re,
        variance: COHERENT_QUADRATURE_VARIANCE + 0.5 * sig.p_var,
    }
}

/// `p(b|a)` for the four bit pairs and the conclusive probability `p(✓)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeProbs {
    pub p00: f64,
    pub p10: f64,
    pub p01: f64,
    pub p11: f64,
    pub p_ok: f64,
}

impl OutcomeProbs {
    /// Error probability among conclusive outcomes, `p(1|0)/p(✓)`.
    pub fn conditional_error(&self) -> Option<f64> {
        (self.p_ok > 0.0).then(|| self.p10 / self.p_ok)
    }
}

/// Alice's amplitude, the two reduced line segments and the tap fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalPath {
    pub gamma: f64,
    pub before: ChannelPair,
    pub after: ChannelPair,
    pub r_e: f64,
}

impl SignalPath {
    pub fn new(gamma: f64, before: ChannelPair, after: ChannelPair, r_e: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Domain {
                name: "gamma",
                value: gamma,
                expected: "finite and >= 0",
            });
        }
        check_fraction("r_E", r_e)?;
        Ok(Self {
            gamma,
            before,
            after,
            r_e,
        })
    }

    pub fn from_geometry(geometry: &LineGeometry, gamma: f64) -> Result<Self> {
        let (before, after) = geometry.segment_params()?;
        Self::new(gamma, before, after, geometry.r_e)
    }

    /// Alice's coherent amplitude for bit `a`.
    pub fn sent_amplitude(&self, a: bool) -> f64 {
        if a {
            -self.gamma
        } else {
            self.gamma
        }
    }

    /// Analytic distribution of Bob's `q` given Alice's bit.
    pub fn bob_quadrature(&self, a: bool) -> QuadratureStats {
        let at_splice = propagate(Complex64::new(self.sent_amplitude(a), 0.0), &self.before);
        let tapped = GaussianSignal {
            center: at_splice.center * (1.0 - self.r_e).sqrt(),
            p_var: (1.0 - self.r_e) * at_splice.p_var,
        };
        q_distribution(&tapped.through(&self.after))
    }

    /// Probability that Bob's outcome is conclusive given the amplitude `alpha` at the splice.
    pub fn conclusive_given_alpha(&self, alpha: Complex64, params: &HomodyneParams) -> f64 {
        let bob = propagate(alpha * (1.0 - self.r_e).sqrt(), &self.after);
        let q = q_distribution(&bob);
        let width = (2.0 * q.variance).sqrt();
        half_erfc((params.theta - q.mean) / width) + half_erfc((params.theta + q.mean) / width)
    }
}

/// Closed-form outcome probabilities for the tapped, amplified line.
pub fn outcome_probs(
    gamma: f64,
    pair1: &ChannelPair,
    pair2: &ChannelPair,
    r_e: f64,
    params: &HomodyneParams,
) -> Result<OutcomeProbs> {
    let path = SignalPath::new(gamma, *pair1, *pair2, r_e)?;
    Ok(path_outcome_probs(&path, params))
}

pub fn path_outcome_probs(path: &SignalPath, params: &HomodyneParams) -> OutcomeProbs {
    let q = path.bob_quadrature(false);
    let width = (2.0 * q.variance).sqrt();
    let right = half_erfc((params.theta - q.mean) / width);
    let wrong = half_erfc((params.theta + q.mean) / width);
    OutcomeProbs {
        p00: right,
        p10: wrong,
        p01: wrong,
        p11: right,
        p_ok: right + wrong,
    }
}

/// One simulated transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionSample {
    /// Amplitude arriving at the splice.
    pub alpha: Complex64,
    /// Amplitude diverted to the eavesdropper.
    pub eve_amp: Complex64,
    pub q: f64,
    pub outcome: Outcome,
}

/// Samples one round: P-function draw before the splice, ideal tap, second
/// P-function draw, then `q ~ N(Re β, 1/4)`.
pub fn sample_outcome(
    a: bool,
    path: &SignalPath,
    params: &HomodyneParams,
    rng: &mut Stream,
) -> DetectionSample {
    let sent = Complex64::new(path.sent_amplitude(a), 0.0);
    let alpha = propagate(sent, &path.before).sample_alpha(rng);
    // r_e was validated when the path was built.
    let split = beamsplit(alpha, path.r_e).expect("validated tap fraction");
    let beta = propagate(split.to_bob, &path.after).sample_alpha(rng);
    let q = rng.normal(beta.re, COHERENT_QUADRATURE_VARIANCE.sqrt());
    DetectionSample {
        alpha,
        eve_amp: split.to_eve,
        q,
        outcome: classify(q, params),
    }
}
