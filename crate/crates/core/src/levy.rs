//! Inverse-Gaussian jump law: density, sampling, fitting and tilting.
//!
//! Parameterisation: `mean` is the distribution mean μ and `scale` is the
//! shape parameter λ, so that the density is
//! `sqrt(λ / (2π x³)) · exp(-λ (x - μ)² / (2 μ² x))` and the variance is
//! `μ³ / λ`. "Scale factor 1" in the simulation study is read as λ = 1.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{integrate_from_scaled, integrate_interval, QuadratureError, QuadratureSpec};
use crate::rng::Seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LevyError {
    #[error("invalid inverse-Gaussian parameters: mean = {mean}, scale = {scale}")]
    InvalidParams { mean: f64, scale: f64 },
    #[error("density argument must be positive, got {0}")]
    Domain(f64),
    #[error("fit needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("fit sample {index} is not positive and finite: {value}")]
    NonPositiveSample { index: usize, value: f64 },
    #[error("samples have no dispersion; the scale estimate is degenerate")]
    DegenerateScale,
    #[error("invalid tilt {0}; must be finite and >= 0")]
    InvalidTilt(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseGaussianParams {
    pub mean: f64,
    pub scale: f64,
}

impl InverseGaussianParams {
    pub fn new(mean: f64, scale: f64) -> Result<Self, LevyError> {
        let p = InverseGaussianParams { mean, scale };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), LevyError> {
        if self.mean > 0.0 && self.scale > 0.0 && self.mean.is_finite() && self.scale.is_finite() {
            Ok(())
        } else {
            Err(LevyError::InvalidParams { mean: self.mean, scale: self.scale })
        }
    }

    pub fn variance(&self) -> f64 {
        self.mean.powi(3) / self.scale
    }

    /// E[X²].
    pub fn second_moment(&self) -> f64 {
        self.mean * self.mean + self.variance()
    }

    /// E[X³] = μ³ + 3μ⁴/λ + 3μ⁵/λ².
    pub fn third_moment(&self) -> f64 {
        let (m, l) = (self.mean, self.scale);
        m.powi(3) + 3.0 * m.powi(4) / l + 3.0 * m.powi(5) / (l * l)
    }

    /// Supremum of the real arguments at which the moment generating function is finite.
    pub fn mgf_abscissa(&self) -> f64 {
        self.scale / (2.0 * self.mean * self.mean)
    }

    /// E[exp(cX)] for `Re(c) <= mgf_abscissa()` (principal square-root branch).
    pub fn mgf(&self, c: Complex64) -> Complex64 {
        let (m, l) = (self.mean, self.scale);
        let inner = Complex64::new(1.0, 0.0) - c * (2.0 * m * m / l);
        ((Complex64::new(1.0, 0.0) - inner.sqrt()) * (l / m)).exp()
    }

    /// Density without argument validation; zero for `x <= 0`.
    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 || !x.is_finite() {
            return 0.0;
        }
        let (m, l) = (self.mean, self.scale);
        let d = x - m;
        (l / (2.0 * std::f64::consts::PI * x * x * x)).sqrt() * (-l * d * d / (2.0 * m * m * x)).exp()
    }

    /// Length scale used when mapping half-line integrals against this density.
    pub fn quadrature_scale(&self) -> f64 {
        self.mean.min(self.mean * self.mean / self.scale).max(self.mean * 1e-3)
    }

    fn weighted<F: Fn(f64) -> f64>(&self, h: &F, x: f64) -> f64 {
        let d = self.density(x);
        if d == 0.0 {
            0.0
        } else {
            h(x) * d
        }
    }

    /// Integral of `h(x) ν(dx)` over `(0, ∞)`, splitting at the mean.
    pub fn expect<F: Fn(f64) -> f64>(&self, h: F, spec: &QuadratureSpec) -> Result<f64, LevyError> {
        let split = self.mean;
        let head = integrate_interval(|x| self.weighted(&h, x), 0.0, split, spec)?;
        let tail = integrate_from_scaled(|x| self.weighted(&h, x), split, self.tail_scale(), spec)?;
        Ok(head + tail)
    }

    /// Integral of `h(x) ν(dx)` over `(lo, hi)` with `hi` possibly infinite.
    pub fn expect_over<F: Fn(f64) -> f64>(&self, h: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64, LevyError> {
        if hi.is_finite() {
            Ok(integrate_interval(|x| self.weighted(&h, x), lo, hi, spec)?)
        } else if lo >= self.mean {
            Ok(integrate_from_scaled(|x| self.weighted(&h, x), lo, self.tail_scale(), spec)?)
        } else {
            let head = integrate_interval(|x| self.weighted(&h, x), lo, self.mean, spec)?;
            let tail = integrate_from_scaled(|x| self.weighted(&h, x), self.mean, self.tail_scale(), spec)?;
            Ok(head + tail)
        }
    }

    fn tail_scale(&self) -> f64 {
        // exponential tail rate is λ / (2μ²)
        (2.0 * self.mean * self.mean / self.scale).max(self.mean)
    }

    /// One draw by the transformation-with-rejection method:
    /// chi-square transform to the smaller root, then a uniform acceptance step.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (m, l) = (self.mean, self.scale);
        let n: f64 = rng.sample(StandardNormal);
        let y = n * n;
        let my = m * y;
        let x = m + m * my / (2.0 * l) - m / (2.0 * l) * (4.0 * m * l * y + my * my).sqrt();
        let u: f64 = rng.random();
        if u <= m / (m + x) {
            x
        } else {
            m * m / x
        }
    }
}

impl Distribution<f64> for InverseGaussianParams {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_with(rng)
    }
}

pub fn ig_pdf(x: f64, p: &InverseGaussianParams) -> Result<f64, LevyError> {
    p.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(LevyError::Domain(x));
    }
    Ok(p.density(x))
}

/// CDF by quadrature of the density.
pub fn ig_cdf(x: f64, p: &InverseGaussianParams, spec: &QuadratureSpec) -> Result<f64, LevyError> {
    p.validate()?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(integrate_interval(|t| p.density(t), 0.0, x, spec)?.clamp(0.0, 1.0))
}

pub fn ig_sample(p: &InverseGaussianParams, n: usize, seed: Seed) -> Result<Vec<f64>, LevyError> {
    p.validate()?;
    let mut rng = seed.rng();
    Ok((0..n).map(|_| p.sample_with(&mut rng)).collect())
}

/// Closed-form maximum-likelihood fit.
pub fn ig_fit(samples: &[f64]) -> Result<InverseGaussianParams, LevyError> {
    if samples.len() < 2 {
        return Err(LevyError::TooFewSamples(samples.len()));
    }
    if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
        return Err(LevyError::NonPositiveSample { index, value });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let inv_mean = 1.0 / mean;
    let dispersion: f64 = samples.iter().map(|x| 1.0 / x - inv_mean).sum();
    // relative threshold: a constant sample leaves only rounding noise here
    if !(dispersion > 1e-12 * n * inv_mean) {
        return Err(LevyError::DegenerateScale);
    }
    InverseGaussianParams::new(mean, n / dispersion)
}

/// Normalised exponentially-tilted law `(1 + a x) ν(dx) / (1 + a μ)`.
///
/// It is a mixture: with probability `1 / (1 + aμ)` a draw from ν, otherwise a
/// draw from the size-biased law `x ν(dx) / μ`, which for the inverse Gaussian
/// is the law of `μ² / X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltedInverseGaussian {
    pub base: InverseGaussianParams,
    pub tilt: f64,
}

impl TiltedInverseGaussian {
    pub fn new(base: InverseGaussianParams, tilt: f64) -> Result<Self, LevyError> {
        base.validate()?;
        if !(tilt >= 0.0) || !tilt.is_finite() {
            return Err(LevyError::InvalidTilt(tilt));
        }
        Ok(TiltedInverseGaussian { base, tilt })
    }

    /// Total mass of the unnormalised measure `(1 + a x) ν(dx)`.
    pub fn total_mass(&self) -> f64 {
        1.0 + self.tilt * self.base.mean
    }

    pub fn mean(&self) -> f64 {
        (self.base.mean + self.tilt * self.base.second_moment()) / self.total_mass()
    }
}

impl Distribution<f64> for TiltedInverseGaussian {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = self.base.sample_with(rng);
        let u: f64 = rng.random();
        if u * self.total_mass() < 1.0 {
            x
        } else {
            self.base.mean * self.base.mean / x
        }
    }
}
