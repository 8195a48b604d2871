//! Hausdorff fractal-metric operators.
//!
//! On an axis with exponent `α` and origin `t₀` the fractal distance of a
//! point `t` is `(t - t₀)^α`. The Hausdorff integral integrates against
//! `d(τ - t₀)^α` and the Hausdorff derivative differentiates with respect to
//! it. With `α = 1` every operator here is its classical counterpart.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes per Gauss–Legendre panel in [`hausdorff_integral`].
const PANEL_ORDER: usize = 8;

/// Ratio between consecutive panel end points in [`hausdorff_integral`].
const PANEL_GRADING: f64 = 0.2;

/// Relative default step for [`hausdorff_derivative`] when none is given.
const DEFAULT_RELATIVE_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractalAxis {
    exponent: f64,
    origin: f64,
}

impl FractalAxis {
    pub fn new(exponent: f64, origin: f64) -> Result<Self> {
        check_exponent(exponent)?;
        if !origin.is_finite() {
            return Err(Error::invalid("origin", format!("must be finite, got {origin}")));
        }
        Ok(Self { exponent, origin })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }
}

fn check_exponent(exponent: f64) -> Result<()> {
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(Error::invalid("exponent", format!("must lie in (0, 1], got {exponent}")));
    }
    Ok(())
}

/// `(point - origin)^exponent`.
pub fn fractal_distance(axis: &FractalAxis, point: f64) -> Result<f64> {
    if !(point >= axis.origin) {
        return Err(Error::Domain(format!(
            "point {point} lies before the axis origin {}",
            axis.origin
        )));
    }
    Ok((point - axis.origin).powf(axis.exponent))
}

/// `∫ v(τ) d(τ - t₀)^α` over `[t₀, upper]`.
///
/// Substituting `u = (τ - t₀)^α` turns the weighted integrand into the
/// bounded `v(t₀ + u^(1/α))` on `[0, (upper - t₀)^α]`, which is then
/// integrated with composite Gauss–Legendre using `quadrature_points` nodes
/// on panels that are refined geometrically towards `u = 0`.
pub fn hausdorff_integral<F>(v: F, axis: &FractalAxis, upper: f64, quadrature_points: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(upper > axis.origin) || !upper.is_finite() {
        return Err(Error::Domain(format!(
            "upper limit {upper} must exceed the axis origin {}",
            axis.origin
        )));
    }
    if quadrature_points == 0 {
        return Err(Error::Contract("quadrature needs at least one node".into()));
    }
    let order = quadrature_points.min(PANEL_ORDER);
    let panels = quadrature_points.div_ceil(order);
    let (nodes, weights) = gauss_legendre(order);

    let inv_exp = 1.0 / axis.exponent;
    let length = (upper - axis.origin).powf(axis.exponent);
    let mut total = 0.0;
    for (lo, hi) in panel_bounds(length, panels) {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut panel = 0.0;
        for (node, weight) in nodes.iter().zip(&weights) {
            let u = mid + half * node;
            let value = v(axis.origin + u.powf(inv_exp));
            if !value.is_finite() {
                return Err(Error::Numeric(format!("integrand is not finite at u = {u}")));
            }
            panel += weight * value;
        }
        total += half * panel;
    }
    Ok(total)
}

/// Central-difference estimate of `dl / d(t - t₀)^α` at `point`.
///
/// With `step = None` the step is `(point - origin) · 1e-6`.
pub fn hausdorff_derivative<F>(l: F, axis: &FractalAxis, point: f64, step: Option<f64>) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let distance = point - axis.origin;
    if !(distance > 0.0) || !point.is_finite() {
        return Err(Error::Domain(format!(
            "point {point} must lie strictly after the axis origin {}",
            axis.origin
        )));
    }
    let h = step.unwrap_or(distance * DEFAULT_RELATIVE_STEP);
    if !(h > 0.0) {
        return Err(Error::invalid("step", format!("must be positive, got {h}")));
    }
    if h >= distance {
        return Err(Error::StepTooLarge { step: h, distance });
    }
    let classical = (l(point + h) - l(point - h)) / (2.0 * h);
    if !classical.is_finite() {
        return Err(Error::Numeric(format!("difference quotient is not finite at {point}")));
    }
    let weight = axis.exponent * distance.powf(axis.exponent - 1.0);
    Ok(classical / weight)
}

/// The fractal metric scale transform `Δ ↦ Δ^exponent`.
pub fn metric_transform(delta: f64, exponent: f64) -> Result<f64> {
    check_exponent(exponent)?;
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("metric increment must be nonnegative, got {delta}")));
    }
    Ok(delta.powf(exponent))
}

/// `xx_i = x_i + x_i^beta`.
pub fn reset_horizontal(x: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_exponent(beta)?;
    x.iter()
        .map(|&xi| {
            if !(xi >= 0.0) || !xi.is_finite() {
                return Err(Error::Domain(format!("abscissa {xi} is negative or not finite")));
            }
            Ok(xi + xi.powf(beta))
        })
        .collect()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
/// Half the panels split `[0, length]` evenly; the rest subdivide the first
/// of those geometrically, since `u^(1/α)` is not smooth at `u = 0` unless
/// `1/α` is an integer.
fn panel_bounds(length: f64, panels: usize) -> Vec<(f64, f64)> {
    let graded = panels / 2;
    let uniform = panels - graded;
    let first = length / uniform as f64;
    let mut edges = vec![0.0];
    edges.extend((0..graded).map(|k| first * PANEL_GRADING.powi((graded - k) as i32)));
    edges.extend((1..=uniform).map(|k| length * k as f64 / uniform as f64));
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            derivative = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        if dp != 0.0 {
            derivative = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
