//! End-to-end Monte Carlo sessions.
//!
//! Round `i` draws everything (Alice's bit, both P-function samples and the
//! homodyne noise) from stream `i` of the session seed, so any round can be
//! replayed on its own and batches can run in any order.

mod report;
mod session;
mod snapshot;

pub use report::{empirical_vs_analytic, Comparison};
pub use session::{run_session, SessionResult};
pub use snapshot::SessionSnapshot;

use num_complex::Complex64;

use crate::channel::LineGeometry;
use crate::detection::{sample_outcome, HomodyneParams, Outcome, SignalPath};
use crate::error::{Error, Result};
use crate::optimize::{optimize_key_fraction, SearchDomain};
use crate::rng::{Domain, StreamFactory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub geometry: LineGeometry,
    pub gamma: f64,
    pub theta: f64,
    /// Number of rounds `L`.
    pub rounds: u64,
    pub seed: u64,
    /// Reconciliation block length.
    pub chunk: usize,
    /// Replace `gamma` and `theta` by the key-fraction optimum before running.
    pub auto_optimize: bool,
    /// Sifted bits disclosed for the error-rate estimate.
    pub disclosure: usize,
    /// Rounds generated per parallel batch.
    pub batch: usize,
}

impl SimConfig {
    pub const DEFAULT_ROUNDS: u64 = 1_000_000;
    pub const DEFAULT_SEED: u64 = 42;
    pub const DEFAULT_CHUNK: usize = 1000;
    pub const DEFAULT_DISCLOSURE: usize = 1000;
    pub const DEFAULT_BATCH: usize = 10_000;

    pub fn new(geometry: LineGeometry, gamma: f64, theta: f64) -> Self {
        Self {
            geometry,
            gamma,
            theta,
            rounds: Self::DEFAULT_ROUNDS,
            seed: Self::DEFAULT_SEED,
            chunk: Self::DEFAULT_CHUNK,
            auto_optimize: false,
            disclosure: Self::DEFAULT_DISCLOSURE,
            batch: Self::DEFAULT_BATCH,
        }
    }

    pub fn with_rounds(mut self, rounds: u64) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if self.rounds == 0 {
            return Err(Error::Domain {
                name: "L",
                value: 0.0,
                expected: ">= 1",
            });
        }
        if self.chunk < 2 {
            return Err(Error::Domain {
                name: "chunk",
                value: self.chunk as f64,
                expected: ">= 2",
            });
        }
        if self.batch == 0 {
            return Err(Error::Domain {
                name: "batch",
                value: 0.0,
                expected: ">= 1",
            });
        }
        if !self.auto_optimize {
            HomodyneParams::new(self.theta)?;
            SignalPath::from_geometry(&self.geometry, self.gamma)?;
        }
        Ok(())
    }

    /// This configuration with `gamma` and `theta` fixed: optimized if requested.
    pub fn resolved(&self) -> Result<Self> {
        self.validate()?;
        if !self.auto_optimize {
            return Ok(*self);
        }
        let opt = optimize_key_fraction(&self.geometry, &SearchDomain::default())?;
        Ok(Self {
            gamma: opt.gamma,
            theta: opt.theta,
            auto_optimize: false,
            ..*self
        })
    }
}

/// Everything that happened in one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    /// Alice's bit (`true` is bit 1, sent as `-γ`).
    pub a: bool,
    /// Amplitude arriving at the splice.
    pub alpha: Complex64,
    /// Amplitude diverted to Eve.
    pub eve_amp: Complex64,
    pub q: f64,
    pub outcome: Outcome,
}

/// Precomputed line and detector for a resolved configuration.
#[derive(Debug, Clone)]
pub struct RoundGenerator {
    pub path: SignalPath,
    pub params: HomodyneParams,
    streams: StreamFactory,
}

impl RoundGenerator {
    pub fn new(config: &SimConfig) -> Result<Self> {
        Ok(Self {
            path: SignalPath::from_geometry(&config.geometry, config.gamma)?,
            params: HomodyneParams::new(config.theta)?,
            streams: StreamFactory::with_domain(config.seed, Domain::Rounds),
        })
    }

    pub fn round(&self, index: u64) -> RoundRecord {
        let mut rng = self.streams.stream(index);
        let a = rng.bit();
        let s = sample_outcome(a, &self.path, &self.params, &mut rng);
        RoundRecord {
            a,
            alpha: s.alpha,
            eve_amp: s.eve_amp,
            q: s.q,
            outcome: s.outcome,
        }
    }
}

/// Round `index` of the session described by `config` (with `gamma` and `theta` as given).
pub fn run_round(config: &SimConfig, index: u64) -> Result<RoundRecord> {
    Ok(RoundGenerator::new(config)?.round(index))
}
