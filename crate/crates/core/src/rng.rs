//! Reproducible counter-based random streams.
//!
//! A [`StreamFactory`] turns a 64-bit seed into a ChaCha8 key; stream `i` is
//! the ChaCha8 keystream with stream id `i`. Each round of a session reads only
//! its own stream, so rounds can be generated in any order or in parallel and
//! still reproduce bit-exactly. Independent purposes (rounds, sampling of
//! disclosed positions, hash seeds, code construction) use distinct domains,
//! which yield unrelated keys.
//!
//! Sampler version 1: uniforms take the top 53 bits of `next_u64`, normals use
//! the Box–Muller transform on two such uniforms.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Key-derivation domains. Round streams use [`Domain::Rounds`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Rounds,
    Disclosure,
    Hashing,
    Codes,
    Probes,
    Custom(u64),
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Rounds => 0,
            Domain::Disclosure => 0x6469_7363_6c6f_7365,
            Domain::Hashing => 0x6861_7368_696e_6700,
            Domain::Codes => 0x6c64_7063_636f_6465,
            Domain::Probes => 0x7072_6f62_6573_0000,
            Domain::Custom(tag) => tag ^ 0x8000_0000_0000_0000,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct StreamFactory {
    key: [u8; 32],
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self::with_domain(seed, Domain::Rounds)
    }

    pub fn with_domain(seed: u64, domain: Domain) -> Self {
        let mut state = seed ^ domain.tag();
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self { key }
    }

    pub fn stream(&self, index: u64) -> Stream {
        let mut inner = ChaCha8Rng::from_seed(self.key);
        inner.set_stream(index);
        Stream { inner }
    }
}

/// One independent random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    /// Convenience for one-off streams: stream 0 of the given domain.
    pub fn from_seed(seed: u64, domain: Domain) -> Self {
        StreamFactory::with_domain(seed, domain).stream(0)
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform_half_open(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normal deviates (Box–Muller).
    pub fn standard_normal_pair(&mut self) -> (f64, f64) {
        let radius = (-2.0 * self.uniform().ln()).sqrt();
        let angle = std::f64::consts::TAU * self.uniform_half_open();
        let (s, c) = angle.sin_cos();
        (radius * c, radius * s)
    }

    pub fn normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        mean + std_dev * self.standard_normal_pair().0
    }

    /// Complex normal with independent components of variance `component_variance`.
    pub fn complex_normal(&mut self, component_variance: f64) -> Complex64 {
        let (re, im) = self.standard_normal_pair();
        let s = component_variance.sqrt();
        Complex64::new(s * re, s * im)
    }

    pub fn bit(&mut self) -> bool {
        self.inner.next_u32() & 1 == 1
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        // Lemire's nearly-divisionless rejection.
        loop {
            let x = self.inner.next_u64();
            let m = (x as u128) * (bound as u128);
            let low = m as u64;
            if low >= bound.wrapping_neg() % bound {
                return (m >> 64) as u64;
            }
        }
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
