//! Two-stage least squares on a Hausdorff-stretched horizontal axis.
//!
//! 1. Reset the abscissas: `xx_i = x_i + x_i^β`.
//! 2. Fit the transition curve `F_T` to `(xx_i, y_i)`.
//! 3. Fit the final curve `F` to `(x_i, F_T(xx_i))`.
//!
//! Both stages use the same model family. The final curve is the method's
//! prediction in the original coordinates.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result, Stage};
use crate::hausdorff::reset_horizontal;
use crate::lsq::{fit, fit_nonlinear, FitResult, ModelSpec, NonlinearOptions};

/// Where the transition curve is evaluated to produce the stage-3 ordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionEval {
    /// `F_T(xx_i)`, the transition curve at the stretched abscissa.
    #[default]
    Transformed,
    /// `F_T(x_i)`, kept for sensitivity analysis.
    Original,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StretchedOptions {
    pub transition_eval: TransitionEval,
    pub nonlinear: NonlinearOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchedFit {
    pub beta: f64,
    pub transition: FitResult,
    #[serde(rename = "final")]
    pub final_fit: FitResult,
    /// The stage-3 input `(x_i, F_Ti)`.
    pub transition_points: Dataset,
}

impl StretchedFit {
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.final_fit.predict(x)
    }

    pub fn converged(&self) -> bool {
        self.transition.converged && self.final_fit.converged
    }
}

fn keep_best_effort(result: Result<FitResult>) -> Result<FitResult> {
    match result {
        Err(Error::NonConvergence(best)) => Ok(*best),
        other => other,
    }
}

fn tag(stage: Stage) -> impl Fn(Error) -> Error {
    move |source| Error::Stage {
        stage,
        source: Box::new(source),
    }
}

pub fn stretched_fit(model: ModelSpec, data: &Dataset, beta: f64, options: &StretchedOptions) -> Result<StretchedFit> {
    let xx = reset_horizontal(data.x(), beta)?;
    let stretched = Dataset::new(xx.clone(), data.y().to_vec())?;
    let transition = keep_best_effort(fit(model, &stretched, None, &options.nonlinear)).map_err(tag(Stage::Transition))?;

    let ordinates = match options.transition_eval {
        TransitionEval::Transformed => transition.predict(&xx),
        TransitionEval::Original => transition.predict(data.x()),
    };
    let transition_points = Dataset::new(data.x().to_vec(), ordinates).map_err(tag(Stage::Final))?;

    let final_fit = match model {
        ModelSpec::Polynomial { .. } => fit(model, &transition_points, None, &options.nonlinear),
        ModelSpec::Sinusoid => warm_started_sinusoid(&transition, data.x(), &xx, &transition_points, &options.nonlinear),
    }
    .map_err(tag(Stage::Final))?;

    Ok(StretchedFit {
        beta,
        transition,
        final_fit,
        transition_points,
    })
}

/// Stage-3 sinusoid: start from the transition parameters with the frequency
/// rescaled by the mean stretch `xx / x`; fall back to the start grid when the
/// warm start does not converge.
fn warm_started_sinusoid(
    transition: &FitResult,
    x: &[f64],
    xx: &[f64],
    points: &Dataset,
    options: &NonlinearOptions,
) -> Result<FitResult> {
    let ratios: Vec<f64> = x.iter().zip(xx).filter(|(x, _)| **x > 0.0).map(|(x, xx)| xx / x).collect();
    let stretch = if ratios.is_empty() {
        1.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    let mut init = transition.params.to_vec();
    init[1] *= stretch;

    let warm = fit_nonlinear(ModelSpec::Sinusoid, points, Some(&init), options);
    match warm {
        Ok(result) if result.converged => Ok(result),
        Ok(_) | Err(Error::NonConvergence(_)) | Err(Error::Numeric(_)) => {
            let cold = keep_best_effort(fit_nonlinear(ModelSpec::Sinusoid, points, None, options));
            match (keep_best_effort(warm), cold) {
                (Ok(w), Ok(c)) => Ok(if c.sse < w.sse { c } else { w }),
                (Ok(w), Err(_)) => Ok(w),
                (Err(_), cold) => cold,
            }
        }
        Err(other) => Err(other),
    }
}
