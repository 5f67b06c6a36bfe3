//! Flag values merged with the optional config file.
//!
//! Precedence, highest first: command-line flag, config file entry, built-in default.

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use lineqkd::protocol::SimConfig;
use lineqkd::LineGeometry;

use crate::args::Common;

pub const DEFAULT_DAB: f64 = 1000.0;
pub const DEFAULT_SPACING: f64 = 50.0;

const KNOWN_KEYS: [&str; 15] = [
    "out",
    "seed",
    "dab",
    "dae",
    "d",
    "re",
    "gamma",
    "theta",
    "L",
    "mu",
    "chunk",
    "disclosure",
    "fractional-stages",
    "var",
    "values",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub dab: f64,
    pub dae: Option<f64>,
    pub spacing: f64,
    pub re: f64,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub rounds: u64,
    pub mu: f64,
    pub chunk: usize,
    pub disclosure: usize,
    pub fractional_stages: bool,
    pub variable: Option<String>,
    pub values: Option<String>,
}

struct ConfigFile {
    path: PathBuf,
    entries: HashMap<String, (usize, String)>,
}

impl ConfigFile {
    fn load(path: &PathBuf) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut entries = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), i + 1))?;
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            let key = if key.eq_ignore_ascii_case("l") { "L".to_string() } else { key };
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("{}:{}: unknown key `{key}`", path.display(), i + 1);
            }
            entries.insert(key, (i + 1, value.trim().to_string()));
        }
        Ok(Self {
            path: path.clone(),
            entries,
        })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.entries
            .get(key)
            .map(|(line, value)| {
                value
                    .parse()
                    .map_err(|e| anyhow!("{}:{line}: bad value for `{key}`: {e}", self.path.display()))
            })
            .transpose()
    }
}

impl Settings {
    pub fn resolve(flags: &Common, variable: Option<&str>, values: Option<&str>) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => Some(ConfigFile::load(path)?),
            None => None,
        };
        let from_file = |key: &str| -> Result<Option<String>> {
            match &file {
                Some(f) => f.get(key),
                None => Ok(None),
            }
        };
        macro_rules! pick {
            ($flag:expr, $key:literal) => {
                match $flag {
                    Some(v) => Some(v),
                    None => match &file {
                        Some(f) => f.get($key)?,
                        None => None,
                    },
                }
            };
        }
        Ok(Self {
            out: flags.out.clone().or(from_file("out")?.map(PathBuf::from)),
            seed: pick!(flags.seed, "seed").unwrap_or(SimConfig::DEFAULT_SEED),
            dab: pick!(flags.dab, "dab").unwrap_or(DEFAULT_DAB),
            dae: pick!(flags.dae, "dae"),
            spacing: pick!(flags.d, "d").unwrap_or(DEFAULT_SPACING),
            re: pick!(flags.re, "re").unwrap_or(0.0),
            gamma: pick!(flags.gamma, "gamma"),
            theta: pick!(flags.theta, "theta"),
            rounds: pick!(flags.rounds, "L").unwrap_or(SimConfig::DEFAULT_ROUNDS),
            mu: pick!(flags.mu, "mu").unwrap_or(LineGeometry::DEFAULT_MU),
            chunk: pick!(flags.chunk, "chunk").unwrap_or(SimConfig::DEFAULT_CHUNK),
            disclosure: pick!(flags.disclosure, "disclosure").unwrap_or(SimConfig::DEFAULT_DISCLOSURE),
            fractional_stages: flags.fractional_stages
                || pick!(None::<bool>, "fractional-stages").unwrap_or(false),
            variable: pick!(variable.map(str::to_string), "var"),
            values: pick!(values.map(str::to_string), "values"),
        })
    }

    pub fn geometry(&self) -> lineqkd::Result<LineGeometry> {
        let geometry = LineGeometry {
            d_ab: self.dab,
            d_ae: self.dae.unwrap_or(0.5 * self.dab),
            spacing: self.spacing,
            mu: self.mu,
            r_e: self.re,
            fractional_stages: self.fractional_stages,
        };
        geometry.validate()?;
        Ok(geometry)
    }
}
