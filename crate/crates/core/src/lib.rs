//! Secret-key rates, Monte Carlo sessions and classical post-processing for
//! binary-phase coherent-state QKD over a long fiber with in-line phase-insensitive
//! amplifiers and a loss budget that bounds what an eavesdropper can tap.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod detection;
pub mod error;
pub mod line_control;
pub mod optimize;
pub mod postprocessing;
pub mod protocol;
pub mod rng;
pub mod security;
pub mod signal;
pub mod special;

pub use channel::{ChannelPair, LineGeometry};
pub use detection::{HomodyneParams, Outcome, OutcomeProbs, SignalPath};
pub use error::{Error, Result};
pub use optimize::{optimize_key_fraction, Optimum, SearchDomain};
pub use rng::{Domain, Stream, StreamFactory};
pub use security::{evaluate, key_fraction, SecurityReport};
pub use signal::GaussianSignal;
