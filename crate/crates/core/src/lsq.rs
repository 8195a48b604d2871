//! Least-squares engines for the two regression families.
//!
//! Polynomials are fitted in closed form through a Householder QR
//! factorisation of the (column-equilibrated) Vandermonde matrix. The
//! sinusoid `a·sin(b·x + c) + d` is fitted by damped Gauss–Newton with an
//! analytic Jacobian, started from a fixed grid unless an initial guess is
//! supplied.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// A regression family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelSpec {
    /// `a_d x^d + … + a_1 x + a_0`, parameters ordered from the highest power.
    Polynomial { degree: usize },
    /// `a·sin(b·x + c) + d`, parameters ordered `(a, b, c, d)`.
    Sinusoid,
}

impl ModelSpec {
    pub fn param_count(&self) -> usize {
        match self {
            ModelSpec::Polynomial { degree } => degree + 1,
            ModelSpec::Sinusoid => 4,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, ModelSpec::Polynomial { .. })
    }

    /// Model value at a single abscissa. `params` must already have the right length.
    pub fn eval(&self, params: &[f64], x: f64) -> f64 {
        match self {
            ModelSpec::Polynomial { .. } => params.iter().fold(0.0, |acc, &p| acc * x + p),
            ModelSpec::Sinusoid => params[0] * (params[1] * x + params[2]).sin() + params[3],
        }
    }

    /// Analytic gradient of the model value with respect to the parameters.
    pub fn gradient(&self, params: &[f64], x: f64, out: &mut [f64]) {
        match self {
            ModelSpec::Polynomial { degree } => {
                let mut power = 1.0;
                for k in (0..=*degree).rev() {
                    out[k] = power;
                    power *= x;
                }
            }
            ModelSpec::Sinusoid => {
                let (a, b, c) = (params[0], params[1], params[2]);
                let phase = b * x + c;
                let (s, co) = phase.sin_cos();
                out[0] = s;
                out[1] = a * x * co;
                out[2] = a * co;
                out[3] = 1.0;
            }
        }
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Contract(format!(
                "model {self} takes {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Polynomial { degree } => write!(f, "poly{degree}"),
            ModelSpec::Sinusoid => f.write_str("sin"),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "sin" || s == "sinusoid" {
            return Ok(ModelSpec::Sinusoid);
        }
        let degree = s
            .strip_prefix("poly")
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| Error::invalid("model", format!("unknown model `{s}` (expected polyN or sin)")))?;
        Ok(ModelSpec::Polynomial { degree })
    }
}

impl TryFrom<String> for ModelSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelSpec> for String {
    fn from(m: ModelSpec) -> String {
        m.to_string()
    }
}

/// Concrete coefficients of a [`ModelSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelSpec,
    pub params: ParamVector,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&xi| self.model.eval(&self.params, xi)).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.model.eval(&self.params, x)
    }
}

/// Elementwise model evaluation.
pub fn predict(model: ModelSpec, params: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    model.check_params(params)?;
    Ok(x.iter().map(|&xi| model.eval(params, xi)).collect())
}

pub fn sse(model: ModelSpec, params: &[f64], data: &Dataset) -> f64 {
    data.points().map(|(x, y)| (model.eval(params, x) - y).powi(2)).sum()
}

/// Row-major `n × p` Jacobian of the model values at the data abscissas.
pub fn jacobian(model: ModelSpec, params: &[f64], x: &[f64]) -> Result<DMatrix<f64>> {
    model.check_params(params)?;
    let p = model.param_count();
    let mut jac = DMatrix::zeros(x.len(), p);
    let mut row = vec![0.0; p];
    for (i, &xi) in x.iter().enumerate() {
        model.gradient(params, xi, &mut row);
        for (j, v) in row.iter().enumerate() {
            jac[(i, j)] = *v;
        }
    }
    Ok(jac)
}

fn distinct_count(x: &[f64]) -> usize {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted.len()
}

/// Ordinary least squares for a polynomial of the given degree.
pub fn fit_linear(degree: usize, data: &Dataset) -> Result<FitResult> {
    let p = degree + 1;
    let n = data.len();
    if n < p {
        return Err(Error::Contract(format!(
            "degree {degree} polynomial needs at least {p} points, got {n}"
        )));
    }
    if distinct_count(data.x()) < p {
        return Err(Error::Singular(format!(
            "degree {degree} polynomial needs {p} distinct abscissas"
        )));
    }

    let model = ModelSpec::Polynomial { degree };
    let mut design = jacobian(model, &vec![0.0; p], data.x())?;
    let mut col_scale = vec![1.0; p];
    for (j, scale) in col_scale.iter_mut().enumerate() {
        let norm = design.column(j).norm();
        if norm > 0.0 {
            *scale = norm;
            design.column_mut(j).unscale_mut(norm);
        }
    }

    let qr = design.qr();
    let r = qr.r();
    let max_diag = r.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = max_diag * 1e-13 * n as f64;
    if r.diagonal().iter().any(|v| v.abs() <= tol) {
        return Err(Error::Singular("Vandermonde design matrix is rank deficient".into()));
    }
    let rhs = qr.q().transpose() * DVector::from_column_slice(data.y());
    let scaled = r
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let params: Vec<f64> = scaled.iter().zip(&col_scale).map(|(v, s)| v / s).collect();
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("polynomial coefficients are not finite".into()));
    }
    let sse = sse(model, &params, data);
    Ok(FitResult {
        model,
        params: params.into(),
        sse,
        iterations: 0,
        converged: true,
    })
}

/// Settings for [`fit_nonlinear`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearOptions {
    /// Number of multi-start grid points used when no initial guess is given (1..=15).
    pub starts: usize,
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub damping_factor: f64,
    pub sse_tolerance: f64,
    pub step_tolerance: f64,
}

impl Default for NonlinearOptions {
    fn default() -> Self {
        Self {
            starts: 15,
            max_iterations: 200,
            initial_damping: 1e-3,
            damping_factor: 10.0,
            sse_tolerance: 1e-12,
            step_tolerance: 1e-10,
        }
    }
}

const B_FACTORS: [f64; 5] = [1.0, 0.5, 2.0, 0.25, 4.0];
const PHASES: [f64; 3] = [0.0, -PI / 2.0, PI / 2.0];

/// The fixed start grid, central start first.
pub fn start_grid(model: ModelSpec, data: &Dataset) -> Vec<Vec<f64>> {
    match model {
        ModelSpec::Polynomial { degree } => vec![vec![0.0; degree + 1]],
        ModelSpec::Sinusoid => {
            let (lo, hi) = min_max(data.x());
            let (ylo, yhi) = min_max(data.y());
            let base = 2.0 * PI / (hi - lo);
            let a = 0.5 * (yhi - ylo);
            let d = data.y().iter().sum::<f64>() / data.len() as f64;
            B_FACTORS
                .iter()
                .flat_map(|f| PHASES.iter().map(move |c| vec![a, f * base, *c, d]))
                .collect()
        }
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Damped Gauss–Newton least squares.
///
/// With `init` the solver runs once from that point; otherwise it runs from
/// the first `options.starts` grid points and keeps the lowest-SSE result
/// (earliest start on ties). Sinusoid results are canonicalised to `b ≥ 0`,
/// `a > 0`, `c ∈ (-π, π]`. Fails with [`Error::NonConvergence`] only when no
/// start met the termination criterion.
pub fn fit_nonlinear(
    model: ModelSpec,
    data: &Dataset,
    init: Option<&[f64]>,
    options: &NonlinearOptions,
) -> Result<FitResult> {
    let p = model.param_count();
    if model == ModelSpec::Sinusoid && data.len() < 4 {
        return Err(Error::Contract(format!(
            "sinusoid fit needs at least 4 points, got {}",
            data.len()
        )));
    }
    if data.len() < p {
        return Err(Error::Contract(format!("{model} fit needs at least {p} points")));
    }
    let (lo, hi) = min_max(data.x());
    if !(hi > lo) {
        return Err(Error::Contract("abscissas must span a nonzero interval".into()));
    }

    let starts = match init {
        Some(guess) => {
            model.check_params(guess)?;
            vec![guess.to_vec()]
        }
        None => {
            if options.starts == 0 {
                return Err(Error::Contract("at least one start is required".into()));
            }
            let mut grid = start_grid(model, data);
            grid.truncate(options.starts);
            grid
        }
    };

    let mut best: Option<FitResult> = None;
    let mut any_converged = false;
    for start in starts {
        let Some(result) = damped_gauss_newton(model, data, start, options) else {
            continue;
        };
        any_converged |= result.converged;
        if best.as_ref().is_none_or(|b| result.sse < b.sse) {
            best = Some(result);
        }
    }
    let mut best = best.ok_or_else(|| Error::Numeric("every start diverged".into()))?;
    if model == ModelSpec::Sinusoid {
        canonicalize_sinusoid(&mut best.params.0);
    }
    if !any_converged {
        return Err(Error::NonConvergence(Box::new(best)));
    }
    Ok(best)
}

/// Dispatches to [`fit_linear`] or [`fit_nonlinear`] by family.
pub fn fit(model: ModelSpec, data: &Dataset, init: Option<&[f64]>, options: &NonlinearOptions) -> Result<FitResult> {
    match model {
        ModelSpec::Polynomial { degree } => fit_linear(degree, data),
        ModelSpec::Sinusoid => fit_nonlinear(model, data, init, options),
    }
}

/// `None` when the iterate leaves the finite reals.
fn damped_gauss_newton(
    model: ModelSpec,
    data: &Dataset,
    mut params: Vec<f64>,
    options: &NonlinearOptions,
) -> Option<FitResult> {
    let p = params.len();
    let mut current = sse(model, &params, data);
    if !current.is_finite() {
        return None;
    }
    let mut lambda = options.initial_damping;
    let mut grad_row = vec![0.0; p];
    let mut iterations = 0;
    let mut converged = current == 0.0;

    while !converged && iterations < options.max_iterations {
        iterations += 1;
        let mut jtj = DMatrix::<f64>::zeros(p, p);
        let mut jtr = DVector::<f64>::zeros(p);
        for (x, y) in data.points() {
            model.gradient(&params, x, &mut grad_row);
            let residual = model.eval(&params, x) - y;
            for i in 0..p {
                jtr[i] += grad_row[i] * residual;
                for j in 0..=i {
                    jtj[(i, j)] += grad_row[i] * grad_row[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                jtj[(j, i)] = jtj[(i, j)];
            }
        }
        let diag_floor = jtj.diagonal().max() * 1e-15 + f64::MIN_POSITIVE;

        loop {
            let mut damped = jtj.clone();
            for i in 0..p {
                damped[(i, i)] += lambda * jtj[(i, i)].max(diag_floor);
            }
            let step = solve_spd(damped, -&jtr);
            let Some(step) = step.filter(|s| s.iter().all(|v| v.is_finite())) else {
                lambda *= options.damping_factor;
                if lambda > 1e30 {
                    break;
                }
                continue;
            };
            let max_step = step.amax();
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_sse = sse(model, &trial, data);
            if trial_sse.is_finite() && trial_sse < current {
                let decrease = (current - trial_sse) / current;
                params = trial;
                current = trial_sse;
                lambda = (lambda / options.damping_factor).max(1e-300);
                if decrease < options.sse_tolerance || max_step < options.step_tolerance || current == 0.0 {
                    converged = true;
                }
                break;
            }
            if max_step < options.step_tolerance {
                // no representable improvement left
                converged = true;
                break;
            }
            lambda *= options.damping_factor;
            if lambda > 1e30 {
                break;
            }
        }
        if lambda > 1e30 {
            break;
        }
    }
    if params.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(FitResult {
        model,
        params: params.into(),
        sse: current,
        iterations,
        converged,
    })
}

fn solve_spd(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Option<DVector<f64>> {
    match matrix.clone().cholesky() {
        Some(chol) => Some(chol.solve(&rhs)),
        None => matrix.lu().solve(&rhs),
    }
}

/// Maps `(a, b, c, d)` onto the representative with `b ≥ 0`, `a ≥ 0`, `c ∈ (-π, π]`.
pub fn canonicalize_sinusoid(params: &mut [f64]) {
    if params[1] < 0.0 {
        params[0] = -params[0];
        params[1] = -params[1];
        params[2] = -params[2];
    }
    if params[0] < 0.0 {
        params[0] = -params[0];
        params[2] += PI;
    }
    params[2] = wrap_phase(params[2]);
}

fn wrap_phase(c: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let wrapped = c - two_pi * ((c - PI) / two_pi).ceil();
    if wrapped <= -PI {
        wrapped + two_pi
    } else {
        wrapped
    }
}
