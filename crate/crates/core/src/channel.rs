//! Algebra of phase-insensitive loss and amplification channels.
//!
//! Every finite chain of loss and quantum-limited amplification stages acts on
//! a single bosonic mode exactly like one loss channel followed by one
//! amplifier. [`ChannelPair`] stores that equivalent pair in log space so that
//! chains of many hundreds of stages neither overflow nor underflow.

use crate::error::{check_fraction, check_gain, check_open_unit, Error, Result};

/// Below this distance from 1 the product `G·T` is treated as exactly 1 and the
/// intensity-preserving closed form is used instead of the general one.
pub const PRESERVING_TOLERANCE: f64 = 1e-9;

/// Exponent magnitude beyond which `(GT)^M` is handled in log space.
const LOG_SPACE_EXPONENT: f64 = 300.0;

/// Relative tolerance when checking that a distance is a whole number of spans.
const STAGE_COUNT_TOLERANCE: f64 = 1e-9;

/// A pure loss channel transmitting the fraction `T` of the intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    transmission: f64,
}

impl LossChannel {
    pub fn new(transmission: f64) -> Result<Self> {
        check_open_unit("T", transmission)?;
        Ok(Self { transmission })
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn then(&self, next: &LossChannel) -> LossChannel {
        LossChannel {
            transmission: self.transmission * next.transmission,
        }
    }
}

/// A quantum-limited phase-insensitive amplifier of intensity gain `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmpChannel {
    gain: f64,
}

impl AmpChannel {
    pub fn new(gain: f64) -> Result<Self> {
        check_gain("G", gain)?;
        Ok(Self { gain })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn then(&self, next: &AmpChannel) -> AmpChannel {
        AmpChannel {
            gain: self.gain * next.gain,
        }
    }
}

/// Loss `T` followed by amplification `G`, the canonical form of any chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPair {
    ln_t: f64,
    ln_g: f64,
}

impl ChannelPair {
    pub const IDENTITY: ChannelPair = ChannelPair {
        ln_t: 0.0,
        ln_g: 0.0,
    };

    pub fn new(transmission: f64, gain: f64) -> Result<Self> {
        check_open_unit("T", transmission)?;
        check_gain("G", gain)?;
        Ok(Self {
            ln_t: transmission.ln(),
            ln_g: gain.ln(),
        })
    }

    /// Builds a pair directly from `ln T <= 0` and `ln G >= 0`.
    pub fn from_logs(ln_transmission: f64, ln_gain: f64) -> Result<Self> {
        if !(ln_transmission <= 0.0 && ln_transmission.is_finite()) {
            return Err(Error::Domain {
                name: "ln T",
                value: ln_transmission,
                expected: "finite and <= 0",
            });
        }
        if !(ln_gain >= 0.0 && ln_gain.is_finite()) {
            return Err(Error::Domain {
                name: "ln G",
                value: ln_gain,
                expected: "finite and >= 0",
            });
        }
        Ok(Self {
            ln_t: ln_transmission,
            ln_g: ln_gain,
        })
    }

    pub fn transmission(&self) -> f64 {
        self.ln_t.exp()
    }

    pub fn gain(&self) -> f64 {
        self.ln_g.exp()
    }

    pub fn ln_transmission(&self) -> f64 {
        self.ln_t
    }

    pub fn ln_gain(&self) -> f64 {
        self.ln_g
    }

    /// `G - 1`, the P-function variance added by the amplifier.
    pub fn excess_noise(&self) -> f64 {
        self.ln_g.exp_m1()
    }

    /// `sqrt(G·T)`, the factor applied to a coherent amplitude.
    pub fn amplitude_factor(&self) -> f64 {
        (0.5 * (self.ln_t + self.ln_g)).exp()
    }

    /// `G·T`, conserved under reordering of the stages.
    pub fn intensity_factor(&self) -> f64 {
        (self.ln_t + self.ln_g).exp()
    }

    /// The pair equivalent to applying `self` and then `next`.
    pub fn then(&self, next: &ChannelPair) -> ChannelPair {
        // Loss(T1) Amp(G1) Loss(T2) Amp(G2): move Loss(T2) in front of Amp(G1).
        let (ln_t, ln_g) = swap_logs(self.ln_g, next.ln_t);
        ChannelPair {
            ln_t: self.ln_t + ln_t,
            ln_g: ln_g + next.ln_g,
        }
    }
}

/// Two consecutive losses act as one loss of transmission `T1·T2`.
pub fn compose_losses(t1: f64, t2: f64) -> Result<f64> {
    let a = LossChannel::new(t1)?;
    let b = LossChannel::new(t2)?;
    Ok(a.then(&b).transmission())
}

/// Two consecutive amplifiers act as one amplifier of gain `G1·G2`.
pub fn compose_amps(g1: f64, g2: f64) -> Result<f64> {
    let a = AmpChannel::new(g1)?;
    let b = AmpChannel::new(g2)?;
    Ok(a.then(&b).gain())
}

/// Rewrites amplifier `G'` followed by loss `T'` as loss `T` followed by
/// amplifier `G`. Returns `(T, G)`; the product `G·T = G'·T'` is unchanged.
pub fn swap_amp_loss(gain: f64, transmission: f64) -> Result<(f64, f64)> {
    check_gain("G'", gain)?;
    check_open_unit("T'", transmission)?;
    let g = (gain - 1.0) * transmission + 1.0;
    let t = gain * transmission / g;
    Ok((t.min(1.0), g))
}

fn swap_logs(ln_gain: f64, ln_transmission: f64) -> (f64, f64) {
    // G = (G' - 1) T' + 1, computed as 1 + expm1(ln G') T' to keep precision near G' = 1.
    let added = ln_gain.exp_m1() * ln_transmission.exp();
    let ln_g = added.ln_1p();
    let ln_t = (ln_gain + ln_transmission - ln_g).min(0.0);
    (ln_t, ln_g)
}

/// Reduces `M` identical stages of loss `T` then gain `G` to one pair.
///
/// Uses `G∘ = 1 + (G - 1)(μ^M - 1)/(μ - 1)` with `μ = G·T`, which is the
/// general closed form rearranged, and `T∘ = μ^M / G∘`. Products within
/// [`PRESERVING_TOLERANCE`] of 1 are routed to [`reduce_chain_preserving`].
pub fn reduce_chain(gain: f64, transmission: f64, stages: u32) -> Result<ChannelPair> {
    check_gain("G", gain)?;
    check_open_unit("T", transmission)?;
    if stages == 0 {
        return Err(Error::Domain {
            name: "M",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let ln_mu = gain.ln() + transmission.ln();
    let mu_minus_one = ln_mu.exp_m1();
    if mu_minus_one.abs() < PRESERVING_TOLERANCE {
        // G·T = 1 within tolerance, so G is 1/T.
        return preserving_pair(transmission, stages as f64);
    }
    let m = stages as f64;
    let excess_gain = gain - 1.0;
    let ln_excess = if excess_gain == 0.0 {
        f64::NEG_INFINITY
    } else {
        excess_gain.ln()
    };

    let ln_g = if mu_minus_one > 0.0 && m * ln_mu > LOG_SPACE_EXPONENT {
        // ln[(μ^M - 1)/(μ - 1)] = M ln μ + ln(1 - μ^-M) - ln(μ - 1)
        let ln_series = m * ln_mu + (-(-m * ln_mu).exp()).ln_1p() - mu_minus_one.ln();
        let ln_added = ln_excess + ln_series;
        // ln(1 + e^x) = x + ln(1 + e^-x)
        ln_added + (-ln_added).exp().ln_1p()
    } else {
        let series = (m * ln_mu).exp_m1() / mu_minus_one;
        (excess_gain * series).ln_1p()
    };
    let ln_t = (m * ln_mu - ln_g).min(0.0);
    Ok(ChannelPair { ln_t, ln_g })
}

/// `M` stages whose amplifiers exactly compensate the loss (`G = 1/T`).
///
/// `G∘ = G(M(1 - T) + T)` and `T∘ = 1/G∘`, so the mean amplitude is preserved.
pub fn reduce_chain_preserving(transmission: f64, stages: u32) -> Result<ChannelPair> {
    check_open_unit("T", transmission)?;
    if stages == 0 {
        return Err(Error::Domain {
            name: "M",
            value: 0.0,
            expected: ">= 1",
        });
    }
    preserving_pair(transmission, stages as f64)
}

/// Intensity-preserving reduction for a possibly fractional stage count.
pub(crate) fn preserving_pair(transmission: f64, stages: f64) -> Result<ChannelPair> {
    check_open_unit("T", transmission)?;
    if !(stages > 0.0 && stages.is_finite()) {
        return Err(Error::Domain {
            name: "M",
            value: stages,
            expected: "> 0",
        });
    }
    // G∘ = 1 + M (1 - T)/T
    let ln_g = (stages * (1.0 - transmission) / transmission).ln_1p();
    Ok(ChannelPair { ln_t: -ln_g, ln_g })
}

/// Placement of the line, its amplifiers and the eavesdropper's splice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGeometry {
    /// Alice–Bob distance, km.
    pub d_ab: f64,
    /// Alice–splice distance, km.
    pub d_ae: f64,
    /// Amplifier spacing, km.
    pub spacing: f64,
    /// Loss coefficient, km⁻¹, with per-span transmission `10^(-mu·spacing)`.
    pub mu: f64,
    /// Fraction of the intensity diverted at the splice.
    pub r_e: f64,
    /// Accept distances that are not whole multiples of the spacing and use
    /// the continuous stage count in the closed forms.
    pub fractional_stages: bool,
}

impl LineGeometry {
    pub const DEFAULT_MU: f64 = 1.0 / 50.0;

    pub fn new(d_ab: f64, d_ae: f64, spacing: f64, r_e: f64) -> Result<Self> {
        let geometry = Self {
            d_ab,
            d_ae,
            spacing,
            mu: Self::DEFAULT_MU,
            r_e,
            fractional_stages: false,
        };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn with_mu(mut self, mu: f64) -> Result<Self> {
        self.mu = mu;
        self.validate()?;
        Ok(self)
    }

    pub fn with_fractional_stages(mut self, allow: bool) -> Result<Self> {
        self.fractional_stages = allow;
        self.validate()?;
        Ok(self)
    }

    pub fn with_r_e(mut self, r_e: f64) -> Result<Self> {
        self.r_e = r_e;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.d_ab, self.d_ae, self.spacing, self.mu]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Geometry("non-finite parameter".into()));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::Geometry(format!(
                "amplifier spacing must be positive, got {}",
                self.spacing
            )));
        }
        if !(self.mu > 0.0) {
            return Err(Error::Geometry(format!(
                "loss coefficient must be positive, got {}",
                self.mu
            )));
        }
        if !(self.d_ae > 0.0 && self.d_ae < self.d_ab) {
            return Err(Error::Geometry(format!(
                "need 0 < D_AE < D_AB, got D_AE = {}, D_AB = {}",
                self.d_ae, self.d_ab
            )));
        }
        check_fraction("r_E", self.r_e)?;
        self.stage_counts().map(|_| ())
    }

    /// Per-span transmission `10^(-mu·d)`.
    pub fn span_transmission(&self) -> f64 {
        10f64.powf(-self.mu * self.spacing)
    }

    /// Number of amplified spans before and after the splice.
    pub fn stage_counts(&self) -> Result<(f64, f64)> {
        let before = self.spans(self.d_ae)?;
        let after = self.spans(self.d_ab - self.d_ae)?;
        Ok((before, after))
    }

    fn spans(&self, distance: f64) -> Result<f64> {
        let ratio = distance / self.spacing;
        if self.fractional_stages {
            return Ok(ratio);
        }
        let rounded = ratio.round();
        if rounded < 1.0 || (ratio - rounded).abs() > STAGE_COUNT_TOLERANCE * rounded.max(1.0) {
            return Err(Error::NonIntegerStages {
                distance,
                spacing: self.spacing,
            });
        }
        Ok(rounded)
    }

    /// Equivalent pairs `{T1, G1}` before and `{T2, G2}` after the splice.
    pub fn segment_params(&self) -> Result<(ChannelPair, ChannelPair)> {
        segment_params(self)
    }
}

/// Reduces both halves of the line, each an intensity-preserving chain.
pub fn segment_params(geometry: &LineGeometry) -> Result<(ChannelPair, ChannelPair)> {
    geometry.validate()?;
    let t = geometry.span_transmission();
    let (before, after) = geometry.stage_counts()?;
    Ok((preserving_pair(t, before)?, preserving_pair(t, after)?))
}
