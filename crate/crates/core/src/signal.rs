//! Gaussian P-function states and their propagation, statistics and sampling.
//!
//! A coherent state `|γ⟩` sent through a loss–amplifier pair `{T, G}` becomes
//! a mixture of coherent states `|α⟩` with `α` complex-normal around
//! `sqrt(G T)·γ`. The stored `p_var` is the total complex variance `G - 1`,
//! i.e. each real component of `α` has variance `p_var / 2`.

use num_complex::Complex64;
use rand_distr::{Distribution, Poisson};

use crate::channel::{reduce_chain_preserving, ChannelPair};
use crate::error::{check_fraction, check_open_unit, Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSignal {
    pub center: Complex64,
    pub p_var: f64,
}

impl GaussianSignal {
    pub fn coherent(amplitude: Complex64) -> Self {
        Self {
            center: amplitude,
            p_var: 0.0,
        }
    }

    pub fn vacuum() -> Self {
        Self::coherent(Complex64::new(0.0, 0.0))
    }

    pub fn new(center: Complex64, p_var: f64) -> Result<Self> {
        if !(p_var >= 0.0 && p_var.is_finite()) {
            return Err(Error::Domain {
                name: "p_var",
                value: p_var,
                expected: "finite and >= 0",
            });
        }
        Ok(Self { center, p_var })
    }

    /// This state after a further loss–amplifier pair.
    pub fn through(&self, pair: &ChannelPair) -> Self {
        Self {
            center: self.center * pair.amplitude_factor(),
            p_var: pair.excess_noise() + pair.intensity_factor() * self.p_var,
        }
    }

    /// Mean photon number `|center|² + p_var`.
    pub fn photon_mean(&self) -> f64 {
        self.center.norm_sqr() + self.p_var
    }

    /// Draws one coherent amplitude from the P-function.
    pub fn sample_alpha(&self, rng: &mut Stream) -> Complex64 {
        if self.p_var == 0.0 {
            return self.center;
        }
        self.center + rng.complex_normal(0.5 * self.p_var)
    }

    /// Draws a photon count: `α` from the P-function, then Poisson in `|α|²`.
    pub fn sample_photon_count(&self, rng: &mut Stream) -> u64 {
        let intensity = self.sample_alpha(rng).norm_sqr();
        if intensity == 0.0 {
            return 0;
        }
        // Poisson::new only fails for non-positive or non-finite means.
        Poisson::new(intensity)
            .map(|p| p.sample(rng) as u64)
            .unwrap_or(0)
    }

    /// Photon-number distribution `p(0..=cutoff)` of this displaced thermal state.
    pub fn photon_distribution(&self, cutoff: usize) -> Vec<f64> {
        let displacement = self.center.norm_sqr();
        let thermal = self.p_var;
        let mut out = Vec::with_capacity(cutoff + 1);
        if thermal == 0.0 {
            // Poisson(|center|²)
            let mut p = (-displacement).exp();
            for m in 0..=cutoff {
                out.push(p);
                p *= displacement / (m + 1) as f64;
            }
            return out;
        }
        // n̄^m / (1+n̄)^(m+1) · exp(-|c|²/(1+n̄)) · L_m(-|c|² / (n̄(1+n̄)))
        let x = -displacement / (thermal * (1.0 + thermal));
        let ratio = thermal / (1.0 + thermal);
        let mut geometric = (-displacement / (1.0 + thermal)).exp() / (1.0 + thermal);
        let (mut prev, mut curr) = (0.0, 1.0);
        for m in 0..=cutoff {
            out.push(geometric * curr);
            let k = m as f64;
            let next = ((2.0 * k + 1.0 - x) * curr - k * prev) / (k + 1.0);
            prev = curr;
            curr = next;
            geometric *= ratio;
        }
        out
    }
}

/// Output state for input amplitude `gamma` after `pair`.
pub fn propagate(gamma: Complex64, pair: &ChannelPair) -> GaussianSignal {
    GaussianSignal::coherent(gamma).through(pair)
}

/// Mean photon number of `sig`.
pub fn photon_mean(sig: &GaussianSignal) -> f64 {
    sig.photon_mean()
}

/// Photon-number variance after `M` intensity-preserving stages (`G = 1/T`):
/// `GM(1-T)(GM(1-T) + 1) + |γ|²(2GM(1-T) + 1)`.
pub fn photon_variance(gamma_sq: f64, transmission: f64, stages: u32) -> Result<f64> {
    check_open_unit("T", transmission)?;
    if stages == 0 {
        return Err(Error::Domain {
            name: "M",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let noise = stages as f64 * (1.0 - transmission) / transmission;
    Ok(noise * (noise + 1.0) + gamma_sq * (2.0 * noise + 1.0))
}

/// Same as [`photon_variance`] but via the reduced chain; agrees with it exactly.
pub fn photon_variance_via_pair(gamma_sq: f64, transmission: f64, stages: u32) -> Result<f64> {
    let pair = reduce_chain_preserving(transmission, stages)?;
    let eps = pair.excess_noise();
    Ok(eps * (eps + 1.0) + gamma_sq * (2.0 * eps + 1.0))
}

/// Amplitudes leaving an ideal tap that diverts intensity fraction `r_e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitAmplitudes {
    pub to_bob: Complex64,
    pub to_eve: Complex64,
}

pub fn beamsplit(alpha: Complex64, r_e: f64) -> Result<SplitAmplitudes> {
    check_fraction("r_E", r_e)?;
    Ok(SplitAmplitudes {
        to_bob: alpha * (1.0 - r_e).sqrt(),
        to_eve: alpha * r_e.sqrt(),
    })
}
