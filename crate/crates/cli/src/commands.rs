use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context};
use lineqkd::protocol::{empirical_vs_analytic, run_session, SessionSnapshot, SimConfig};
use lineqkd::{evaluate, optimize_key_fraction, Error, LineGeometry, SearchDomain, SecurityReport};
use rayon::prelude::*;

use crate::settings::Settings;

pub const CSV_HEADER: &str = "variable,value,gamma_opt,theta_opt,p_ok,eve_bound,bob_entropy,rate";

/// Failure split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, bad config or parameters outside their domain (exit 1).
    Usage(anyhow::Error),
    /// Anything that went wrong while computing or writing (exit 2).
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(e) | Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } | Error::NonIntegerStages { .. } | Error::Geometry(_) => Failure::Usage(e.into()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// The best report at `geometry`, optimizing whichever of `gamma`, `theta`
/// is not given. `None` when no choice yields key.
fn operating_point(geometry: &LineGeometry, gamma: Option<f64>, theta: Option<f64>) -> lineqkd::Result<Option<SecurityReport>> {
    let domain = SearchDomain::default();
    let result = match (gamma, theta) {
        (Some(g), Some(t)) => return evaluate(g, t, geometry).map(Some),
        (Some(g), None) => optimize_key_fraction(geometry, &domain.with_fixed_gamma(g)),
        (None, Some(t)) => optimize_key_fraction(geometry, &domain.with_fixed_theta(t)),
        (None, None) => optimize_key_fraction(geometry, &domain),
    };
    match result {
        Ok(opt) => Ok(Some(opt.report)),
        Err(Error::NoPositiveRate { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn csv_row(variable: &str, value: f64, report: Option<&SecurityReport>) -> String {
    match report {
        Some(r) => format!(
            "{variable},{value},{},{},{},{},{},{}",
            r.gamma, r.theta, r.p_ok, r.eve_info_bound, r.bob_cond_entropy, r.key_fraction
        ),
        None => format!("{variable},{value},nan,nan,nan,nan,nan,0"),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Outcome<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Runtime),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn rate(settings: &Settings) -> Outcome<()> {
    let geometry = settings.geometry()?;
    let report = operating_point(&geometry, settings.gamma, settings.theta)?;
    if report.is_none() {
        eprintln!("no positive key rate at this operating point");
    }
    let text = format!("{CSV_HEADER}\n{}\n", csv_row("r_E", settings.re, report.as_ref()));
    emit(settings.out.as_deref(), &text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepVariable {
    TapFraction,
    Spacing,
    Distance,
    SpliceDistance,
    Gamma,
    Theta,
}

impl SweepVariable {
    fn parse(name: &str) -> Option<Self> {
        Some(match name.to_ascii_lowercase().as_str() {
            "r_e" | "re" => Self::TapFraction,
            "d" => Self::Spacing,
            "d_ab" | "dab" => Self::Distance,
            "d_ae" | "dae" => Self::SpliceDistance,
            "gamma" => Self::Gamma,
            "theta" => Self::Theta,
            _ => return None,
        })
    }

    fn label(self) -> &'static str {
        match self {
            Self::TapFraction => "r_E",
            Self::Spacing => "d",
            Self::Distance => "D_AB",
            Self::SpliceDistance => "D_AE",
            Self::Gamma => "gamma",
            Self::Theta => "theta",
        }
    }

    fn apply(self, base: &Settings, value: f64) -> Settings {
        let mut s = base.clone();
        match self {
            Self::TapFraction => s.re = value,
            Self::Spacing => s.spacing = value,
            Self::Distance => s.dab = value,
            Self::SpliceDistance => s.dae = Some(value),
            Self::Gamma => s.gamma = Some(value),
            Self::Theta => s.theta = Some(value),
        }
        s
    }
}

pub fn sweep(settings: &Settings) -> Outcome<()> {
    let name = settings
        .variable
        .as_deref()
        .ok_or_else(|| Failure::Usage(anyhow!("sweep needs --var")))?;
    let variable = SweepVariable::parse(name).ok_or_else(|| {
        Failure::Usage(anyhow!("unknown sweep variable `{name}` (expected r_E, d, D_AB, D_AE, gamma or theta)"))
    })?;
    let values: Vec<f64> = settings
        .values
        .as_deref()
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| Failure::Usage(anyhow!("bad sweep value `{v}`: {e}"))))
        .collect::<Outcome<_>>()?;
    if values.is_empty() {
        return Err(Failure::Usage(anyhow!("sweep needs a non-empty --values list")));
    }

    let points: Vec<(f64, Settings, LineGeometry)> = values
        .iter()
        .map(|&v| {
            let s = variable.apply(settings, v);
            let g = s.geometry().map_err(|e| Failure::Usage(anyhow!("{} = {v}: {e}", variable.label())))?;
            for (name, x) in [("gamma", s.gamma), ("theta", s.theta)] {
                if let Some(x) = x.filter(|x| !(*x >= 0.0 && x.is_finite())) {
                    return Err(Failure::Usage(anyhow!("{name} = {x} must be finite and >= 0")));
                }
            }
            Ok((v, s, g))
        })
        .collect::<Outcome<_>>()?;
    let reports: Vec<lineqkd::Result<Option<SecurityReport>>> = points
        .par_iter()
        .map(|(_, s, g)| operating_point(g, s.gamma, s.theta))
        .collect();

    let mut text = format!("{CSV_HEADER}\n");
    for ((value, ..), report) in points.iter().zip(reports) {
        let report = report?;
        // Writing to a String cannot fail.
        let _ = writeln!(text, "{}", csv_row(variable.label(), *value, report.as_ref()));
    }
    emit(settings.out.as_deref(), &text)
}

pub fn simulate(settings: &Settings) -> Outcome<()> {
    let geometry = settings.geometry()?;
    let mut config = SimConfig::new(geometry, 0.0, 0.0).with_rounds(settings.rounds).with_seed(settings.seed);
    config.chunk = settings.chunk;
    config.disclosure = settings.disclosure;
    config.auto_optimize = true;
    config.validate()?;

    let report = operating_point(&geometry, settings.gamma, settings.theta)?
        .ok_or_else(|| Failure::Runtime(anyhow!("no positive key rate at this operating point")))?;
    config.gamma = report.gamma;
    config.theta = report.theta;
    config.auto_optimize = false;
    config.validate()?;

    let result = run_session(&config)?;
    let snapshot = SessionSnapshot::from_result(&result).to_text();
    let mut text = String::new();
    if settings.out.is_none() {
        text.push_str(&snapshot);
    } else {
        emit(settings.out.as_deref(), &snapshot)?;
    }
    text.push_str("quantity,analytic,empirical,std_error,z\n");
    for q in empirical_vs_analytic(&result)? {
        let _ = writeln!(text, "{},{},{},{},{}", q.name, q.analytic, q.empirical, q.std_error, q.z);
    }
    print!("{text}");
    if !result.keys_agree() {
        return Err(Failure::Runtime(anyhow!("final keys differ")));
    }
    Ok(())
}
