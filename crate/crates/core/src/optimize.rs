//! Maximisation of the key fraction over Alice's amplitude and Bob's threshold.
//!
//! A log-spaced grid in `γ` and a linear grid in `Θ/γ` locate the basin, then a
//! Nelder–Mead simplex in `(log₁₀ γ, Θ/γ)` polishes it. Grid points are
//! evaluated in parallel but reduced in grid order, ties going to the smaller
//! `(γ, Θ)`, so the result does not depend on scheduling.

use rayon::prelude::*;

use crate::channel::LineGeometry;
use crate::detection::{HomodyneParams, SignalPath};
use crate::error::{Error, Result};
use crate::security::{evaluate_path, SecurityReport};

/// Search box and resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchDomain {
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// `Θ` ranges over `[0, theta_ratio_max·γ]`.
    pub theta_ratio_max: f64,
    pub gamma_points: usize,
    pub theta_points: usize,
    /// Hold `γ` at this value and search `Θ` only.
    pub fixed_gamma: Option<f64>,
    /// Hold `Θ` at this value and search `γ` only.
    pub fixed_theta: Option<f64>,
    pub max_iterations: usize,
}

impl Default for SearchDomain {
    fn default() -> Self {
        Self {
            gamma_min: 1.0,
            gamma_max: 1e5,
            theta_ratio_max: 10.0,
            gamma_points: 51,
            theta_points: 101,
            fixed_gamma: None,
            fixed_theta: None,
            max_iterations: 400,
        }
    }
}

impl SearchDomain {
    pub fn with_fixed_gamma(mut self, gamma: f64) -> Self {
        self.fixed_gamma = Some(gamma);
        self
    }

    pub fn with_fixed_theta(mut self, theta: f64) -> Self {
        self.fixed_theta = Some(theta);
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |name, value, expected| Err(Error::Domain { name, value, expected });
        if !(self.gamma_min > 0.0 && self.gamma_max >= self.gamma_min && self.gamma_max.is_finite()) {
            return bad("gamma range", self.gamma_max, "0 < gamma_min <= gamma_max < inf");
        }
        if !(self.theta_ratio_max >= 0.0 && self.theta_ratio_max.is_finite()) {
            return bad("theta_ratio_max", self.theta_ratio_max, "finite and >= 0");
        }
        if self.gamma_points < 2 || self.theta_points < 2 {
            return bad("grid points", self.gamma_points.min(self.theta_points) as f64, ">= 2");
        }
        if let Some(g) = self.fixed_gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return bad("gamma", g, "finite and >= 0");
            }
        }
        if let Some(t) = self.fixed_theta {
            if !(t >= 0.0 && t.is_finite()) {
                return bad("theta", t, "finite and >= 0");
            }
        }
        if self.fixed_gamma.is_some() && self.fixed_theta.is_some() {
            return Err(Error::Geometry("cannot fix both gamma and theta in a search".into()));
        }
        Ok(())
    }
}

/// Best operating point found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub gamma: f64,
    pub theta: f64,
    pub report: SecurityReport,
    pub evaluations: usize,
}

/// Search coordinates `x` mapped to `(γ, Θ)` for one search mode.
#[derive(Clone, Copy)]
enum Mode {
    Both { ratio_max: f64 },
    Gamma { theta: f64 },
    Theta { gamma: f64 },
}

struct Objective<'a> {
    geometry: &'a LineGeometry,
    domain: &'a SearchDomain,
    mode: Mode,
}

impl Objective<'_> {
    fn log_bounds(&self) -> (f64, f64) {
        (self.domain.gamma_min.log10(), self.domain.gamma_max.log10())
    }

    fn point(&self, x: &[f64]) -> (f64, f64) {
        let (lo, hi) = self.log_bounds();
        match self.mode {
            Mode::Both { ratio_max } => {
                let gamma = 10f64.powf(x[0].clamp(lo, hi));
                (gamma, gamma * x[1].clamp(0.0, ratio_max))
            }
            Mode::Gamma { theta } => (10f64.powf(x[0].clamp(lo, hi)), theta),
            Mode::Theta { gamma } => (gamma, gamma.max(f64::MIN_POSITIVE) * x[0].clamp(0.0, self.domain.theta_ratio_max)),
        }
    }

    fn report(&self, gamma: f64, theta: f64) -> Result<SecurityReport> {
        let path = SignalPath::from_geometry(self.geometry, gamma)?;
        let params = HomodyneParams::new(theta)?;
        Ok(evaluate_path(&path, &params))
    }

    /// Raw (unclamped) fraction, so the simplex still has a slope where no key
    /// survives. Underflowed points rank below everything else.
    fn value(&self, x: &[f64]) -> f64 {
        let (gamma, theta) = self.point(x);
        match self.report(gamma, theta) {
            Ok(r) if !r.underflow => r.raw_key_fraction,
            _ => f64::NEG_INFINITY,
        }
    }

    fn grid(&self) -> Vec<Vec<f64>> {
        let (lo, hi) = self.log_bounds();
        let d = self.domain;
        let logs = linspace(lo, hi, d.gamma_points);
        let ratios = linspace(0.0, d.theta_ratio_max, d.theta_points);
        match self.mode {
            Mode::Both { .. } => logs
                .iter()
                .flat_map(|&u| ratios.iter().map(move |&v| vec![u, v]))
                .collect(),
            Mode::Gamma { .. } => logs.into_iter().map(|u| vec![u]).collect(),
            Mode::Theta { .. } => ratios.into_iter().map(|v| vec![v]).collect(),
        }
    }

    fn steps(&self) -> Vec<f64> {
        let (lo, hi) = self.log_bounds();
        let log_step = ((hi - lo) / (self.domain.gamma_points - 1) as f64).max(1e-3);
        let ratio_step = (self.domain.theta_ratio_max / (self.domain.theta_points - 1) as f64).max(1e-3);
        match self.mode {
            Mode::Both { .. } => vec![log_step, ratio_step],
            Mode::Gamma { .. } => vec![log_step],
            Mode::Theta { .. } => vec![ratio_step],
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Finds `(γ, Θ)` maximising the key fraction on `geometry`.
///
/// Fails with [`Error::NoPositiveRate`] when no probed point yields key.
pub fn optimize_key_fraction(geometry: &LineGeometry, domain: &SearchDomain) -> Result<Optimum> {
    geometry.validate()?;
    domain.validate()?;
    let mode = match (domain.fixed_gamma, domain.fixed_theta) {
        (Some(gamma), None) => Mode::Theta { gamma },
        (None, Some(theta)) => Mode::Gamma { theta },
        _ => Mode::Both {
            ratio_max: domain.theta_ratio_max,
        },
    };
    let objective = Objective { geometry, domain, mode };

    let grid = objective.grid();
    let values: Vec<f64> = grid.par_iter().map(|x| objective.value(x)).collect();
    // First strict maximum in grid order; grid order is ascending in (γ, Θ/γ).
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let mut evaluations = grid.len();

    let (x, fx, used) = nelder_mead(
        |x| -objective.value(x),
        &grid[best],
        &objective.steps(),
        domain.max_iterations,
        1e-12,
    );
    evaluations += used;
    let x = if -fx > values[best] { x } else { grid[best].clone() };

    let (gamma, theta) = objective.point(&x);
    let report = objective.report(gamma, theta)?;
    if report.key_fraction <= 0.0 {
        return Err(Error::NoPositiveRate {
            best_raw: report.raw_key_fraction,
        });
    }
    Ok(Optimum {
        gamma,
        theta,
        report,
        evaluations,
    })
}

/// Minimises `f` from `start` with initial simplex offsets `steps`.
///
/// Returns the best vertex, its value and the number of evaluations. Stops
/// when the spread of values across the simplex falls below `tolerance`
/// (relative to the best value) or after `max_iterations`.
pub fn nelder_mead<F>(f: F, start: &[f64], steps: &[f64], max_iterations: usize, tolerance: f64) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += steps[i];
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evaluations = n + 1;
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));

    for _ in 0..max_iterations {
        order(&mut simplex);
        let (lo, hi) = (simplex[0].1, simplex[n].1);
        if (hi - lo).abs() <= tolerance * lo.abs().max(1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = f(&reflected);
        evaluations += 1;
        if fr < simplex[0].1 {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evaluations += 1;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[n].1 {
            let x = along(-0.5);
            let fx = f(&x);
            (x, fx)
        } else {
            let x = along(0.5);
            let fx = f(&x);
            (x, fx)
        };
        evaluations += 1;
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
            let fx = f(&x);
            *vertex = (x, fx);
        }
        evaluations += n;
    }
    order(&mut simplex);
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, evaluations)
}
