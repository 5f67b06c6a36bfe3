//! Loss-budget accounting and bright test pulses.
//!
//! The legitimate parties know the intrinsic loss `r0` of the line from
//! calibration. Any extra loss measured with a test pulse is attributed to a
//! tap: `(1 - r_t) = (1 - r_E)(1 - r0)`.

use crate::error::{check_fraction, check_open_unit, Error, Result};
use crate::rng::Stream;
use crate::signal::photon_variance;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Probes flag a tap when the loss estimate exceeds the intrinsic loss by this many sigmas.
pub const DETECTION_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBudget {
    /// Intrinsic loss fraction from calibration.
    pub r0: f64,
    /// Total measured loss fraction.
    pub rt: f64,
    /// Loss fraction attributed to the eavesdropper.
    pub r_e: f64,
}

impl LossBudget {
    pub fn infer(r0: f64, rt: f64) -> Result<Self> {
        Ok(Self {
            r0,
            rt,
            r_e: infer_r_e(r0, rt)?,
        })
    }
}

/// `r_E = 1 - (1 - r_t)/(1 - r0)`.
///
/// Fails when `r_t < r0`, which would mean negative leakage (calibration drift).
pub fn infer_r_e(r0: f64, rt: f64) -> Result<f64> {
    check_fraction("r0", r0)?;
    check_fraction("r_t", rt)?;
    if rt < r0 {
        return Err(Error::Domain {
            name: "r_t",
            value: rt,
            expected: ">= r0 (total loss includes the intrinsic loss)",
        });
    }
    Ok((rt - r0) / (1.0 - r0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestPulseSpec {
    /// Optical power, W.
    pub power: f64,
    /// Pulse duration, s.
    pub duration: f64,
    /// Optical frequency, Hz.
    pub frequency: f64,
}

impl TestPulseSpec {
    pub fn new(power: f64, duration: f64, frequency: f64) -> Result<Self> {
        for (name, value) in [("power", power), ("duration", duration), ("frequency", frequency)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Domain {
                    name,
                    value,
                    expected: "finite and >= 0",
                });
            }
        }
        if frequency == 0.0 {
            return Err(Error::Domain {
                name: "frequency",
                value: frequency,
                expected: "> 0",
            });
        }
        Ok(Self {
            power,
            duration,
            frequency,
        })
    }

    pub fn from_wavelength(power: f64, duration: f64, wavelength_m: f64) -> Result<Self> {
        Self::new(power, duration, SPEED_OF_LIGHT / wavelength_m)
    }

    /// `P·τ/(hν)`.
    pub fn photon_count(&self) -> f64 {
        self.power * self.duration / (PLANCK * self.frequency)
    }
}

pub fn test_pulse_photons(spec: &TestPulseSpec) -> f64 {
    spec.photon_count()
}

/// An amplified line of `stages` spans, each of transmission `span_transmission`
/// followed by an amplifier of gain `1/span_transmission`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeChain {
    pub span_transmission: f64,
    pub stages: u32,
}

impl ProbeChain {
    pub fn new(span_transmission: f64, stages: u32) -> Result<Self> {
        check_open_unit("T", span_transmission)?;
        if stages == 0 {
            return Err(Error::Domain {
                name: "M",
                value: 0.0,
                expected: ">= 1",
            });
        }
        Ok(Self {
            span_transmission,
            stages,
        })
    }

    /// Standard deviation of Bob's photon count for a pulse of mean `mean_photons`.
    pub fn count_std_dev(&self, mean_photons: f64) -> Result<f64> {
        photon_variance(mean_photons, self.span_transmission, self.stages).map(f64::sqrt)
    }
}

/// Smallest tap fraction a single test pulse of `n_t` photons resolves: `δn/n`.
pub fn min_detectable_leakage(n_t: f64, span_transmission: f64, stages: u32) -> Result<f64> {
    if !(n_t > 0.0) {
        return Err(Error::Domain {
            name: "n_T",
            value: n_t,
            expected: "> 0",
        });
    }
    Ok(ProbeChain::new(span_transmission, stages)?.count_std_dev(n_t)? / n_t)
}

/// One test pulse: Bob's count is drawn from the normal approximation with the
/// exact chain variance and the implied total loss `1 - n_B/n_T` is returned.
///
/// An infinite `n_t` is the noise-free limit and returns `true_rt` exactly.
pub fn simulate_loss_probe(true_rt: f64, n_t: f64, chain: &ProbeChain, rng: &mut Stream) -> Result<f64> {
    check_fraction("r_t", true_rt)?;
    if n_t.is_infinite() && n_t > 0.0 {
        return Ok(true_rt);
    }
    if !(n_t > 0.0) {
        return Err(Error::Domain {
            name: "n_T",
            value: n_t,
            expected: "> 0",
        });
    }
    let mean = n_t * (1.0 - true_rt);
    let received = rng.normal(mean, chain.count_std_dev(mean)?);
    Ok(1.0 - received / n_t)
}

/// Average of `probes` independent loss estimates.
pub fn simulate_loss_probes(
    true_rt: f64,
    n_t: f64,
    chain: &ProbeChain,
    probes: usize,
    rng: &mut Stream,
) -> Result<f64> {
    if probes == 0 {
        return Err(Error::Empty("probe count"));
    }
    let mut total = 0.0;
    for _ in 0..probes {
        total += simulate_loss_probe(true_rt, n_t, chain, rng)?;
    }
    Ok(total / probes as f64)
}

/// Whether an estimated total loss exceeds the intrinsic loss by more than
/// [`DETECTION_SIGMAS`] probe standard deviations.
pub fn splice_detected(estimated_rt: f64, r0: f64, sigma: f64) -> bool {
    estimated_rt - r0 > DETECTION_SIGMAS * sigma
}
