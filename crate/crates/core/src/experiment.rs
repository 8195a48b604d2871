//! Synthetic-noise experiments comparing plain least squares against the
//! stretched two-stage fit.
//!
//! A trial draws `n` abscissas on the configured domain, adds standardised
//! stretched Gaussian noise scaled by `η / 100` to the generating function,
//! fits both methods and scores them against the generator at the data
//! abscissas. A Monte-Carlo run repeats this on independent random streams
//! `(seed, trial index)` and counts strict wins of the stretched fit.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distribution::{sample_rejection, standardize, StretchedGaussian};
use crate::error::{Error, Result};
use crate::lsq::{fit, FitResult, ModelSpec, ParamVector};
use crate::rng::stream_rng;
use crate::stats::Spread;
use crate::stretched::{stretched_fit, StretchedFit, StretchedOptions};

/// Observations per trial in the reference protocol.
pub const DEFAULT_OBSERVATIONS: usize = 200;

/// The known generating function of a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub model: ModelSpec,
    pub params: ParamVector,
}

impl Generator {
    /// `x² + x + 2`.
    pub fn quadratic() -> Self {
        Self {
            model: ModelSpec::Polynomial { degree: 2 },
            params: vec![1.0, 1.0, 2.0].into(),
        }
    }

    /// `sin(x)`.
    pub fn sine() -> Self {
        Self {
            model: ModelSpec::Sinusoid,
            params: vec![1.0, 1.0, 0.0, 0.0].into(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.model.eval(&self.params, x)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissas {
    /// Equally spaced, both endpoints included.
    #[default]
    Grid,
    /// Sorted uniform draws on the domain.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub truth: Generator,
    pub regression: ModelSpec,
    pub n: usize,
    pub x_domain: (f64, f64),
    #[serde(default)]
    pub abscissas: Abscissas,
    pub noise_law: StretchedGaussian,
    /// Noise percentage η.
    pub eta: f64,
    /// Exponent of the horizontal reset.
    pub beta: f64,
    pub seed: u64,
    #[serde(default)]
    pub fitting: StretchedOptions,
}

impl TrialConfig {
    /// Reference-protocol configuration: `n = 200` equally spaced points on
    /// `[0, 1]`, noise law with `α = 1`, `t = 1`, `D = 0.25` and the trial's `β`.
    pub fn reference(model: ReferenceModel, beta: f64, eta: f64, seed: u64) -> Result<Self> {
        let truth = match model {
            ReferenceModel::Polynomial => Generator::quadratic(),
            ReferenceModel::Sine => Generator::sine(),
        };
        let cfg = Self {
            regression: truth.model,
            truth,
            n: DEFAULT_OBSERVATIONS,
            x_domain: (0.0, 1.0),
            abscissas: Abscissas::Grid,
            noise_law: StretchedGaussian::new(1.0, beta, 0.25, 1.0)?,
            eta,
            beta,
            seed,
            fitting: StretchedOptions::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.truth.params.len() != self.truth.model.param_count() {
            return Err(Error::invalid("truth", "parameter count does not match the model"));
        }
        if self.n < self.regression.param_count().max(2) {
            return Err(Error::invalid(
                "n",
                format!("{} observations cannot support a {} fit", self.n, self.regression),
            ));
        }
        let (lo, hi) = self.x_domain;
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::invalid("x_domain", format!("need 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid("eta", format!("must be nonnegative, got {}", self.eta)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid("beta", format!("must lie in (0, 1], got {}", self.beta)));
        }
        Ok(())
    }
}

fn abscissas<R: Rng + ?Sized>(cfg: &TrialConfig, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = cfg.x_domain;
    let n = cfg.n;
    match cfg.abscissas {
        Abscissas::Grid => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
        Abscissas::Uniform => {
            let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
            x.sort_by(f64::total_cmp);
            x
        }
    }
}

/// `y_i = f(x_i) + z_i · η / 100` with `z` standardised acceptance-rejection noise.
pub fn make_noisy_dataset<R: Rng + ?Sized>(cfg: &TrialConfig, rng: &mut R) -> Result<Dataset> {
    cfg.validate()?;
    let x = abscissas(cfg, rng);
    let noise = standardize(&sample_rejection(&cfg.noise_law, rng, cfg.n)?)?;
    let amplitude = cfg.eta / 100.0;
    let y = x
        .iter()
        .zip(&noise)
        .map(|(&xi, z)| cfg.truth.eval(xi) + z * amplitude)
        .collect();
    Dataset::new(x, y)
}

fn check_grid(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Contract("error metrics need at least one abscissa".into()));
    }
    Ok(())
}

/// Maximum absolute deviation `max |F(x_i) - f(x_i)|`.
pub fn error1<F, G>(fitted: F, truth: G, x: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    check_grid(x)?;
    Ok(x.iter().fold(0.0_f64, |m, &xi| m.max((fitted(xi) - truth(xi)).abs())))
}

/// Root-mean-square deviation `sqrt(Σ (F(x_i) - f(x_i))² / n)`.
pub fn error2<F, G>(fitted: F, truth: G, x: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    check_grid(x)?;
    let ss: f64 = x.iter().map(|&xi| (fitted(xi) - truth(xi)).powi(2)).sum();
    Ok((ss / x.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    pub index: u64,
    pub lsm_error1: f64,
    pub lsm_error2: f64,
    pub slsm_error1: f64,
    pub slsm_error2: f64,
    pub lsm_fit: FitResult,
    pub slsm_fit: StretchedFit,
}

impl TrialReport {
    pub fn wins_error1(&self) -> bool {
        self.slsm_error1 < self.lsm_error1
    }

    pub fn wins_error2(&self) -> bool {
        self.slsm_error2 < self.lsm_error2
    }
}

/// A trial that did not complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub index: u64,
    pub message: String,
}

/// Regenerates the noisy dataset of trial `index`.
pub fn trial_dataset(cfg: &TrialConfig, index: u64) -> Result<Dataset> {
    make_noisy_dataset(cfg, &mut stream_rng(cfg.seed, index))
}

fn best_effort(result: Result<FitResult>) -> Result<FitResult> {
    match result {
        Err(Error::NonConvergence(best)) => Ok(*best),
        other => other,
    }
}

/// One trial on stream `(cfg.seed, 0)`.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialReport> {
    run_trial_at(cfg, 0)
}

/// One trial on stream `(cfg.seed, index)`.
pub fn run_trial_at(cfg: &TrialConfig, index: u64) -> Result<TrialReport> {
    let data = trial_dataset(cfg, index)?;
    let lsm_fit = best_effort(fit(cfg.regression, &data, None, &cfg.fitting.nonlinear))?;
    let slsm_fit = stretched_fit(cfg.regression, &data, cfg.beta, &cfg.fitting)?;
    let truth = |x| cfg.truth.eval(x);
    let x = data.x();
    let report = TrialReport {
        seed: cfg.seed,
        index,
        lsm_error1: error1(|v| lsm_fit.eval(v), truth, x)?,
        lsm_error2: error2(|v| lsm_fit.eval(v), truth, x)?,
        slsm_error1: error1(|v| slsm_fit.final_fit.eval(v), truth, x)?,
        slsm_error2: error2(|v| slsm_fit.final_fit.eval(v), truth, x)?,
        lsm_fit,
        slsm_fit,
    };
    let errors = [report.lsm_error1, report.lsm_error2, report.slsm_error1, report.slsm_error2];
    if errors.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numeric("trial produced a non-finite error".into()));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub lsm_error1: Spread,
    pub lsm_error2: Spread,
    pub slsm_error1: Spread,
    pub slsm_error2: Spread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: TrialConfig,
    pub repetitions: usize,
    pub trials: Vec<TrialReport>,
    pub failures: Vec<TrialFailure>,
    /// Fraction of completed trials with `slsm_error1 < lsm_error1`.
    pub win_rate_error1: f64,
    /// Fraction of completed trials with `slsm_error2 < lsm_error2`.
    pub win_rate_error2: f64,
    /// Completed trials in which some fit stopped without converging.
    pub nonconverged: usize,
    pub summary: ErrorSummary,
}

impl ExperimentReport {
    fn aggregate(config: TrialConfig, repetitions: usize, trials: Vec<TrialReport>, failures: Vec<TrialFailure>) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::Numeric(format!(
                "all {repetitions} trials failed; first failure: {}",
                failures.first().map(|f| f.message.as_str()).unwrap_or("none")
            )));
        }
        let count = trials.len() as f64;
        let column = |f: fn(&TrialReport) -> f64| trials.iter().map(f).collect::<Vec<_>>();
        let summary = ErrorSummary {
            lsm_error1: Spread::of(&column(|t| t.lsm_error1)),
            lsm_error2: Spread::of(&column(|t| t.lsm_error2)),
            slsm_error1: Spread::of(&column(|t| t.slsm_error1)),
            slsm_error2: Spread::of(&column(|t| t.slsm_error2)),
        };
        Ok(Self {
            win_rate_error1: trials.iter().filter(|t| t.wins_error1()).count() as f64 / count,
            win_rate_error2: trials.iter().filter(|t| t.wins_error2()).count() as f64 / count,
            nonconverged: trials
                .iter()
                .filter(|t| !(t.lsm_fit.converged && t.slsm_fit.converged()))
                .count(),
            summary,
            config,
            repetitions,
            trials,
            failures,
        })
    }

    pub fn completed(&self) -> usize {
        self.trials.len()
    }

    pub fn excluded(&self) -> usize {
        self.failures.len()
    }

    /// The trial whose stretched Error2 is the (lower) median of the run;
    /// ties go to the lowest trial index.
    pub fn representative_trial(&self) -> &TrialReport {
        let mut order: Vec<&TrialReport> = self.trials.iter().collect();
        order.sort_by(|a, b| a.slsm_error2.total_cmp(&b.slsm_error2).then(a.index.cmp(&b.index)));
        order[(order.len() - 1) / 2]
    }
}

/// Runs `repetitions` independent trials in parallel; results are ordered by
/// trial index and independent of thread count.
pub fn run_monte_carlo(cfg: &TrialConfig, repetitions: usize) -> Result<ExperimentReport> {
    if repetitions == 0 {
        return Err(Error::Contract("at least one repetition is required".into()));
    }
    cfg.validate()?;
    let outcomes: Vec<(u64, Result<TrialReport>)> = (0..repetitions as u64)
        .into_par_iter()
        .map(|i| (i, run_trial_at(cfg, i)))
        .collect();
    let mut trials = Vec::with_capacity(repetitions);
    let mut failures = Vec::new();
    for (index, outcome) in outcomes {
        match outcome {
            Ok(report) => trials.push(report),
            Err(e) => failures.push(TrialFailure {
                index,
                message: e.to_string(),
            }),
        }
    }
    ExperimentReport::aggregate(cfg.clone(), repetitions, trials, failures)
}

/// Generating families of the reference grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceModel {
    Polynomial,
    Sine,
}

/// One cell of the reference grid, written `poly:b0.4:e30` or `sin:b0.8:e50`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ReferenceConfig {
    pub model: ReferenceModel,
    pub beta: f64,
    pub eta: f64,
}

impl ReferenceConfig {
    /// The eight cells: both models × `β ∈ {0.4, 0.8}` × `η ∈ {30, 50}`.
    pub fn grid() -> Vec<ReferenceConfig> {
        let mut out = Vec::with_capacity(8);
        for model in [ReferenceModel::Polynomial, ReferenceModel::Sine] {
            for eta in [30.0, 50.0] {
                for beta in [0.4, 0.8] {
                    out.push(ReferenceConfig { model, beta, eta });
                }
            }
        }
        out
    }

    pub fn trial_config(&self, seed: u64) -> Result<TrialConfig> {
        TrialConfig::reference(self.model, self.beta, self.eta, seed)
    }

    /// File-name friendly form, e.g. `poly_b0.4_e30`.
    pub fn slug(&self) -> String {
        self.to_string().replace(':', "_")
    }
}

impl fmt::Display for ReferenceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let model = match self.model {
            ReferenceModel::Polynomial => "poly",
            ReferenceModel::Sine => "sin",
        };
        write!(f, "{model}:b{}:e{}", self.beta, self.eta)
    }
}

impl FromStr for ReferenceConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("configs", format!("`{s}` is not of the form model:bBETA:eETA"));
        let mut parts = s.split(':');
        let model = match parts.next() {
            Some("poly") => ReferenceModel::Polynomial,
            Some("sin") => ReferenceModel::Sine,
            _ => return Err(bad()),
        };
        let beta: f64 = parts
            .next()
            .and_then(|p| p.strip_prefix('b'))
            .and_then(|p| p.parse().ok())
            .ok_or_else(bad)?;
        let eta: f64 = parts
            .next()
            .and_then(|p| p.strip_prefix('e'))
            .and_then(|p| p.parse().ok())
            .ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid("beta", format!("must lie in (0, 1], got {beta}")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::invalid("eta", format!("must be nonnegative, got {eta}")));
        }
        Ok(Self { model, beta, eta })
    }
}

impl TryFrom<String> for ReferenceConfig {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ReferenceConfig> for String {
    fn from(c: ReferenceConfig) -> String {
        c.to_string()
    }
}
