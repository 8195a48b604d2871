//! Stretched least squares for data corrupted by stretched Gaussian noise.
//!
//! The crate is organised bottom-up:
//!
//! - [`distribution`]: the stretched Gaussian law `∝ exp(-|x|^(2β)/c)`, its
//!   density, moments and two independent samplers.
//! - [`hausdorff`]: fractal distance, Hausdorff integral and derivative, and
//!   the horizontal reset `x ↦ x + x^β`.
//! - [`lsq`]: polynomial (QR) and sinusoid (damped Gauss–Newton) least squares.
//! - [`stretched`]: the two-stage stretched fit built from the pieces above.
//! - [`experiment`]: noisy-data trials, Error1/Error2 and Monte-Carlo win rates.
//!
//! ```
//! use slsm_core::{fit_linear, stretched_fit, Dataset, ModelSpec, StretchedOptions};
//!
//! let x: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
//! let y: Vec<f64> = x.iter().map(|x| x * x + x + 2.0).collect();
//! let data = Dataset::new(x, y).unwrap();
//!
//! let plain = fit_linear(2, &data).unwrap();
//! let two_stage = stretched_fit(ModelSpec::Polynomial { degree: 2 }, &data, 1.0, &StretchedOptions::default()).unwrap();
//! let gap = (plain.eval(0.3) - two_stage.final_fit.eval(0.3)).abs();
//! assert!(gap < 1e-10);
//! ```

pub mod dataset;
pub mod distribution;
pub mod error;
pub mod experiment;
pub mod hausdorff;
pub mod lsq;
pub mod rng;
pub mod stats;
pub mod stretched;

pub use dataset::Dataset;
pub use distribution::{sample_exact, sample_rejection, standardize, RejectionSampler, RejectionStats, StretchedGaussian};
pub use error::{Error, Result, Stage};
pub use experiment::{
    error1, error2, make_noisy_dataset, run_monte_carlo, run_trial, run_trial_at, ExperimentReport, ReferenceConfig,
    ReferenceModel, TrialConfig, TrialReport,
};
pub use hausdorff::{fractal_distance, hausdorff_derivative, hausdorff_integral, metric_transform, reset_horizontal, FractalAxis};
pub use lsq::{fit, fit_linear, fit_nonlinear, predict, FitResult, ModelSpec, NonlinearOptions, ParamVector};
pub use stretched::{stretched_fit, StretchedFit, StretchedOptions, TransitionEval};
