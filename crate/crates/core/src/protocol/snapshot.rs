//! Line-oriented session snapshots for regression checks.
//!
//! ```text
//! # lineqkd session v1
//! d_ab = 100
//! d_ae = 50
//! ...
//! final_key_sha256 = 3f1a...
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Configuration fields
//! come first, then counts. Floats use Rust's shortest round-trip form, so
//! parsing and re-serializing is lossless.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{SessionResult, SimConfig};
use crate::channel::LineGeometry;
use crate::error::{Error, Result};

pub const SNAPSHOT_HEADER: &str = "# lineqkd session v1";

#[derive(Debug, Clone, PartialEq)]
pub struct SessionSnapshot {
    pub config: SimConfig,
    pub counts: [[u64; 3]; 2],
    pub sifted_len: usize,
    pub sifted_errors: usize,
    pub disclosed_bits: usize,
    pub leaked_bits: usize,
    pub eve_bits: usize,
    pub reconciled_len: usize,
    pub discarded_chunks: usize,
    pub final_len: usize,
    pub keys_agree: bool,
    pub final_key_sha256: String,
}

const COUNT_KEYS: [[&str; 3]; 2] = [["a0_b0", "a0_b1", "a0_fail"], ["a1_b0", "a1_b1", "a1_fail"]];

impl SessionSnapshot {
    pub fn from_result(result: &SessionResult) -> Self {
        Self {
            config: result.config,
            counts: result.counts,
            sifted_len: result.sifted_len,
            sifted_errors: result.sifted_errors,
            disclosed_bits: result.disclosed_bits,
            leaked_bits: result.leaked_bits,
            eve_bits: result.eve_bits,
            reconciled_len: result.reconciled_len,
            discarded_chunks: result.discarded_chunks,
            final_len: result.final_len,
            keys_agree: result.keys_agree(),
            final_key_sha256: result.final_key_digest(),
        }
    }

    pub fn to_text(&self) -> String {
        let c = &self.config;
        let g = &c.geometry;
        let mut s = String::new();
        let mut line = |key: &str, value: &dyn std::fmt::Display| {
            // Writing to a String cannot fail.
            let _ = writeln!(s, "{key} = {value}");
        };
        line("d_ab", &g.d_ab);
        line("d_ae", &g.d_ae);
        line("spacing", &g.spacing);
        line("mu", &g.mu);
        line("r_e", &g.r_e);
        line("fractional_stages", &g.fractional_stages);
        line("gamma", &c.gamma);
        line("theta", &c.theta);
        line("rounds", &c.rounds);
        line("seed", &c.seed);
        line("chunk", &c.chunk);
        line("disclosure", &c.disclosure);
        line("batch", &c.batch);
        for (a, row) in self.counts.iter().enumerate() {
            for (k, count) in row.iter().enumerate() {
                line(COUNT_KEYS[a][k], count);
            }
        }
        line("sifted_len", &self.sifted_len);
        line("sifted_errors", &self.sifted_errors);
        line("disclosed_bits", &self.disclosed_bits);
        line("leaked_bits", &self.leaked_bits);
        line("eve_bits", &self.eve_bits);
        line("reconciled_len", &self.reconciled_len);
        line("discarded_chunks", &self.discarded_chunks);
        line("final_len", &self.final_len);
        line("keys_agree", &self.keys_agree);
        line("final_key_sha256", &self.final_key_sha256);
        format!("{SNAPSHOT_HEADER}\n{s}")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut fields: HashMap<&str, (usize, &str)> = HashMap::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            last_line = line_no;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(parse_error(line_no, format!("expected `key = value`, got `{line}`")));
            };
            if fields.insert(key.trim(), (line_no, value.trim())).is_some() {
                return Err(parse_error(line_no, format!("duplicate key `{}`", key.trim())));
            }
        }
        let mut fields = Fields { map: fields, end: last_line };

        let geometry = LineGeometry {
            d_ab: fields.get("d_ab")?,
            d_ae: fields.get("d_ae")?,
            spacing: fields.get("spacing")?,
            mu: fields.get("mu")?,
            r_e: fields.get("r_e")?,
            fractional_stages: fields.get("fractional_stages")?,
        };
        let config = SimConfig {
            geometry,
            gamma: fields.get("gamma")?,
            theta: fields.get("theta")?,
            rounds: fields.get("rounds")?,
            seed: fields.get("seed")?,
            chunk: fields.get("chunk")?,
            auto_optimize: false,
            disclosure: fields.get("disclosure")?,
            batch: fields.get("batch")?,
        };
        let mut counts = [[0u64; 3]; 2];
        for (a, row) in counts.iter_mut().enumerate() {
            for (k, count) in row.iter_mut().enumerate() {
                *count = fields.get(COUNT_KEYS[a][k])?;
            }
        }
        let snapshot = Self {
            config,
            counts,
            sifted_len: fields.get("sifted_len")?,
            sifted_errors: fields.get("sifted_errors")?,
            disclosed_bits: fields.get("disclosed_bits")?,
            leaked_bits: fields.get("leaked_bits")?,
            eve_bits: fields.get("eve_bits")?,
            reconciled_len: fields.get("reconciled_len")?,
            discarded_chunks: fields.get("discarded_chunks")?,
            final_len: fields.get("final_len")?,
            keys_agree: fields.get("keys_agree")?,
            final_key_sha256: fields.get("final_key_sha256")?,
        };
        if let Some((&key, &(line, _))) = fields.map.iter().min_by_key(|(_, (line, _))| *line) {
            return Err(parse_error(line, format!("unknown key `{key}`")));
        }
        Ok(snapshot)
    }
}

struct Fields<'a> {
    map: HashMap<&'a str, (usize, &'a str)>,
    end: usize,
}

impl Fields<'_> {
    fn get<T: std::str::FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let Some((line, value)) = self.map.remove(key) else {
            return Err(parse_error(self.end, format!("missing key `{key}`")));
        };
        value
            .parse()
            .map_err(|e| parse_error(line, format!("bad value for `{key}`: {e}")))
    }
}

fn parse_error(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}
