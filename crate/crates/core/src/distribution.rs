//! The stretched Gaussian law and its samplers.
//!
//! The density is `exp(-|x|^(2β) / c) / Z` with scale `c = 4·D·t^α` and
//! normaliser `Z = c^(1/(2β)) · Γ(1/(2β)) / β`. At `β = 1` this is a
//! zero-mean Gaussian of variance `c / 2`; at `β = 1/2` a Laplace law.
//!
//! `|X|^(2β) / c` is Gamma distributed with shape `1/(2β)`, which gives two
//! sampling routes: [`sample_exact`] draws the Gamma variate with
//! `rand_distr`, while [`sample_rejection`] runs its own squeeze-type
//! acceptance-rejection Gamma sampler. The two are kept independent so each
//! can be checked against the other.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr, ln_gamma};

use crate::error::{Error, Result};

/// Proposal cap per accepted draw in [`RejectionSampler`].
pub const DEFAULT_MAX_PROPOSALS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLaw")]
pub struct StretchedGaussian {
    alpha: f64,
    beta: f64,
    diffusivity: f64,
    time: f64,
}

#[derive(Deserialize)]
struct RawLaw {
    alpha: f64,
    beta: f64,
    diffusivity: f64,
    time: f64,
}

impl TryFrom<RawLaw> for StretchedGaussian {
    type Error = Error;

    fn try_from(raw: RawLaw) -> Result<Self> {
        StretchedGaussian::new(raw.alpha, raw.beta, raw.diffusivity, raw.time)
    }
}

fn check_exponent(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value <= 1.0) {
        return Err(Error::invalid(name, format!("must lie in (0, 1], got {value}")));
    }
    Ok(())
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::invalid(name, format!("must be positive and finite, got {value}")));
    }
    Ok(())
}

impl StretchedGaussian {
    pub fn new(alpha: f64, beta: f64, diffusivity: f64, time: f64) -> Result<Self> {
        check_exponent("alpha", alpha)?;
        check_exponent("beta", beta)?;
        check_positive("diffusivity", diffusivity)?;
        check_positive("time", time)?;
        let law = Self {
            alpha,
            beta,
            diffusivity,
            time,
        };
        let c = law.scale();
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("diffusivity", format!("derived scale {c} is not positive")));
        }
        Ok(law)
    }

    /// Law with `α = 1`, `t = 1` and `D = c / 4`, i.e. scale exactly `c`.
    pub fn with_scale(beta: f64, scale: f64) -> Result<Self> {
        check_positive("scale", scale)?;
        Self::new(1.0, beta, scale / 4.0, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `c = 4·D·t^α`.
    pub fn scale(&self) -> f64 {
        4.0 * self.diffusivity * self.time.powf(self.alpha)
    }

    /// Shape of the Gamma law followed by `|X|^(2β) / c`.
    pub fn gamma_shape(&self) -> f64 {
        0.5 / self.beta
    }

    /// `Z = ∫ exp(-|x|^(2β)/c) dx = c^(1/(2β)) Γ(1/(2β)) / β`.
    pub fn normalization_constant(&self) -> f64 {
        let a = self.gamma_shape();
        self.scale().powf(a) * gamma(a) / self.beta
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("pdf argument must be finite, got {x}")));
        }
        let kernel = (-x.abs().powf(2.0 * self.beta) / self.scale()).exp();
        Ok(kernel / self.normalization_constant())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("cdf argument is NaN".into()));
        }
        if x.is_infinite() {
            return Ok(if x > 0.0 { 1.0 } else { 0.0 });
        }
        if x == 0.0 {
            return Ok(0.5);
        }
        let z = x.abs().powf(2.0 * self.beta) / self.scale();
        let half_mass = 0.5 * gamma_lr(self.gamma_shape(), z);
        Ok(if x >= 0.0 { 0.5 + half_mass } else { 0.5 - half_mass })
    }

    /// `E|X|^k = c^(k/(2β)) Γ((k+1)/(2β)) / Γ(1/(2β))`; `k = 0` gives the total mass.
    pub fn absolute_moment(&self, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let a = self.gamma_shape();
        let k = f64::from(k);
        let log_ratio = ln_gamma((k + 1.0) * a) - ln_gamma(a);
        (k * a * self.scale().ln() + log_ratio).exp()
    }

    /// Standard deviation of the law, `sqrt(E X²)`.
    pub fn std_dev(&self) -> f64 {
        self.absolute_moment(2).sqrt()
    }

    /// Maps a unit-scale Gamma variate and a sign onto the real line.
    fn scale_gamma_draw(&self, g: f64, negative: bool) -> f64 {
        let magnitude = (self.scale() * g).powf(self.gamma_shape());
        if negative {
            -magnitude
        } else {
            magnitude
        }
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Contract("sample count must be at least 1".into()));
    }
    Ok(())
}

/// Draws `n` variates by `X = S·(c·G)^(1/(2β))` with `G ~ Gamma(1/(2β), 1)`.
pub fn sample_exact<R: Rng + ?Sized>(law: &StretchedGaussian, rng: &mut R, n: usize) -> Result<Vec<f64>> {
    check_count(n)?;
    let gamma = Gamma::new(law.gamma_shape(), 1.0).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok((0..n)
        .map(|_| {
            let g = gamma.sample(rng);
            let negative = rng.random::<bool>();
            law.scale_gamma_draw(g, negative)
        })
        .collect())
}

/// Proposal bookkeeping for the acceptance-rejection sampler.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RejectionStats {
    pub proposals: u64,
    pub accepted: u64,
}

impl RejectionStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            return 0.0;
        }
        self.accepted as f64 / self.proposals as f64
    }
}

/// Marsaglia–Tsang squeeze sampler for Gamma(shape, 1), boosted through
/// `G_a = G_(a+1) · U^(1/a)` when `shape < 1`.
#[derive(Debug, Clone, Copy)]
pub struct RejectionSampler {
    max_proposals: u64,
}

impl Default for RejectionSampler {
    fn default() -> Self {
        Self {
            max_proposals: DEFAULT_MAX_PROPOSALS,
        }
    }
}

impl RejectionSampler {
    pub fn with_max_proposals(max_proposals: u64) -> Self {
        Self { max_proposals }
    }

    pub fn max_proposals(&self) -> u64 {
        self.max_proposals
    }

    pub fn sample_gamma<R: Rng + ?Sized>(
        &self,
        shape: f64,
        rng: &mut R,
        stats: &mut RejectionStats,
    ) -> Result<f64> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::invalid("shape", format!("must be positive, got {shape}")));
        }
        if shape < 1.0 {
            let boosted = self.squeeze(shape + 1.0, rng, stats)?;
            // (0, 1] keeps the power finite
            let u = 1.0 - rng.random::<f64>();
            return Ok(boosted * u.powf(1.0 / shape));
        }
        self.squeeze(shape, rng, stats)
    }

    fn squeeze<R: Rng + ?Sized>(&self, shape: f64, rng: &mut R, stats: &mut RejectionStats) -> Result<f64> {
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        for _ in 0..self.max_proposals {
            stats.proposals += 1;
            let z: f64 = rng.sample(StandardNormal);
            let t = 1.0 + c * z;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = 1.0 - rng.random::<f64>();
            let z2 = z * z;
            if u < 1.0 - 0.0331 * z2 * z2 || u.ln() < 0.5 * z2 + d * (1.0 - v + v.ln()) {
                stats.accepted += 1;
                return Ok(d * v);
            }
        }
        Err(Error::SamplerFailure {
            proposals: self.max_proposals,
        })
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        law: &StretchedGaussian,
        rng: &mut R,
        n: usize,
        stats: &mut RejectionStats,
    ) -> Result<Vec<f64>> {
        check_count(n)?;
        let shape = law.gamma_shape();
        (0..n)
            .map(|_| {
                let g = self.sample_gamma(shape, rng, stats)?;
                let negative = rng.random::<bool>();
                Ok(law.scale_gamma_draw(g, negative))
            })
            .collect()
    }
}

/// Acceptance-rejection draws with the default proposal cap.
pub fn sample_rejection<R: Rng + ?Sized>(law: &StretchedGaussian, rng: &mut R, n: usize) -> Result<Vec<f64>> {
    RejectionSampler::default().sample(law, rng, n, &mut RejectionStats::default())
}

/// `(x - mean) / sd` with the `n - 1` divisor.
pub fn standardize(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::Contract(format!(
            "standardize needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("standardize input contains non-finite values".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|v| (v - mean).powi(2)).sum();
    let sd = (ss / (n - 1.0)).sqrt();
    let magnitude = samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if sd <= 1e-14 * magnitude || sd == 0.0 {
        return Err(Error::DegenerateScale);
    }
    let mut out: Vec<f64> = samples.iter().map(|v| (v - mean) / sd).collect();
    // second pass removes the rounding residue of the first mean
    let residual = out.iter().sum::<f64>() / n;
    out.iter_mut().for_each(|v| *v -= residual);
    Ok(out)
}
