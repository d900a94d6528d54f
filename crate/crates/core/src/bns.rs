//! Refined BN-S stochastic volatility model.
//!
//! Log-price `X` and spot variance `σ²` follow
//!
//! ```text
//! dX_t  = (μ + β σ_t²) dt + σ_t dW_t + ρ dZᵉ_{λt}
//! dσ_t² = -λ σ_t² dt + dZᵉ_{λt}
//! Zᵉ    = (1 - θ) Z + θ Z^b
//! ```
//!
//! where `Z` (small jumps) and `Z^b` (large jumps) are independent compound
//! Poisson subordinators with inverse-Gaussian marks. The same weight θ mixes
//! the subordinators in both equations. Time is the model's own clock; the
//! subordinators are run at speed λ, so a subordinator with `rate` jumps per
//! unit time produces `λ · rate` jumps per unit of model time.

use std::cell::RefCell;
use std::io::Write;

pub use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levy::{InverseGaussianParams, LevyError};
use crate::quadrature::{integrate_interval, QuadratureError, QuadratureSpec};
use crate::rng::{Seed, SimRng};

#[derive(Debug, Error)]
pub enum BnsError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("large-jump subordinator intensity {large} must exceed small-jump intensity {small}")]
    IntensityOrder { small: f64, large: f64 },
    #[error("cumulant diverges: Re(c) = {re} is not below the abscissa {bound}")]
    Divergence { re: f64, bound: f64 },
    #[error("Re(z) = {re} lies outside the strip ({lower}, {upper})")]
    OutsideStrip { re: f64, lower: f64, upper: f64 },
    #[error(transparent)]
    Levy(#[from] LevyError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("csv export failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BnsParams {
    pub mu: f64,
    pub beta: f64,
    pub rho: f64,
    pub lambda: f64,
    pub theta: f64,
    pub sigma0_sq: f64,
}

impl BnsParams {
    pub fn validate(&self) -> Result<(), BnsError> {
        let all_finite = [self.mu, self.beta, self.rho, self.lambda, self.theta, self.sigma0_sq]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(BnsError::InvalidParams(format!("non-finite field in {self:?}")));
        }
        if self.lambda <= 0.0 {
            return Err(BnsError::InvalidParams(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if self.rho > 0.0 {
            return Err(BnsError::InvalidParams(format!("rho must be <= 0, got {}", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(BnsError::InvalidParams(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if self.sigma0_sq <= 0.0 {
            return Err(BnsError::InvalidParams(format!("sigma0_sq must be > 0, got {}", self.sigma0_sq)));
        }
        Ok(())
    }

    /// Weight applied to a jump of the given source.
    pub fn weight(&self, source: JumpSource) -> f64 {
        match source {
            JumpSource::Small => 1.0 - self.theta,
            JumpSource::Large => self.theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubordinatorKind {
    InverseGaussianCompound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubordinatorSpec {
    pub kind: SubordinatorKind,
    pub params: InverseGaussianParams,
    /// Jumps per unit subordinator time.
    pub rate: f64,
}

impl SubordinatorSpec {
    pub fn inverse_gaussian(params: InverseGaussianParams, rate: f64) -> Result<Self, BnsError> {
        let s = SubordinatorSpec { kind: SubordinatorKind::InverseGaussianCompound, params, rate };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), BnsError> {
        self.params.validate()?;
        if !(self.rate > 0.0) || !self.rate.is_finite() {
            return Err(BnsError::InvalidParams(format!("subordinator rate must be > 0, got {}", self.rate)));
        }
        Ok(())
    }

    /// Expected increase per unit subordinator time.
    pub fn intensity(&self) -> f64 {
        self.rate * self.params.mean
    }

    /// Var(Z₁) = rate · E[J²].
    pub fn unit_variance(&self) -> f64 {
        self.rate * self.params.second_moment()
    }

    pub fn abscissa(&self) -> f64 {
        self.params.mgf_abscissa()
    }

    /// κ(c) = log E[exp(c Z₁)] = rate · (E[exp(cJ)] - 1).
    pub fn cumulant(&self, c: Complex64) -> Result<Complex64, BnsError> {
        let bound = self.abscissa();
        if !(c.re < bound) {
            return Err(BnsError::Divergence { re: c.re, bound });
        }
        Ok((self.params.mgf(c) - 1.0) * self.rate)
    }
}

fn check_pair(z: &SubordinatorSpec, zb: &SubordinatorSpec) -> Result<(), BnsError> {
    z.validate()?;
    zb.validate()?;
    if !(zb.intensity() > z.intensity()) {
        return Err(BnsError::IntensityOrder { small: z.intensity(), large: zb.intensity() });
    }
    Ok(())
}

/// Abscissa of convergence θ̂ of the effective cumulant for mixing weight θ.
pub fn effective_abscissa(z: &SubordinatorSpec, zb: &SubordinatorSpec, theta: f64) -> f64 {
    let part = |s: &SubordinatorSpec, w: f64| if w > 0.0 { s.abscissa() / w } else { f64::INFINITY };
    part(z, 1.0 - theta).min(part(zb, theta))
}

/// κᵉ(c) = κ_Z((1-θ)c) + κ_{Z^b}(θc).
pub fn cumulant_effective(c: Complex64, z: &SubordinatorSpec, zb: &SubordinatorSpec, theta: f64) -> Result<Complex64, BnsError> {
    let bound = effective_abscissa(z, zb, theta);
    if !(c.re < bound) {
        return Err(BnsError::Divergence { re: c.re, bound });
    }
    let mut total = Complex64::new(0.0, 0.0);
    if theta < 1.0 {
        total += z.cumulant(c * (1.0 - theta))?;
    }
    if theta > 0.0 {
        total += zb.cumulant(c * theta)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl PathGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self, BnsError> {
        let g = PathGrid { t0, t1, steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), BnsError> {
        if !(self.t1 > self.t0) || !self.t0.is_finite() || !self.t1.is_finite() || self.steps == 0 {
            return Err(BnsError::InvalidParams(format!("bad grid {self:?}")));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + self.dt() * k as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }
}

/// ε(s, T) = (1 - exp(-λ(T - s))) / λ.
pub fn epsilon(s: f64, t_end: f64, lambda: f64) -> Result<f64, BnsError> {
    if s > t_end {
        return Err(BnsError::Domain(format!("epsilon needs s <= T, got s = {s}, T = {t_end}")));
    }
    if !(lambda > 0.0) {
        return Err(BnsError::Domain(format!("epsilon needs lambda > 0, got {lambda}")));
    }
    Ok(epsilon_unchecked(s, t_end, lambda))
}

fn epsilon_unchecked(s: f64, t_end: f64, lambda: f64) -> f64 {
    -(-lambda * (t_end - s)).exp_m1() / lambda
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpSource {
    Small,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
    pub source: JumpSource,
}

/// Time-ordered jumps of both subordinators on a model-time interval.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpStream {
    pub jumps: Vec<Jump>,
}

impl JumpStream {
    pub fn new(mut jumps: Vec<Jump>) -> Self {
        jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
        JumpStream { jumps }
    }

    /// Number of jumps from `source` with time in `(from, to]`.
    pub fn count(&self, source: JumpSource, from: f64, to: f64) -> usize {
        self.jumps
            .iter()
            .filter(|j| j.source == source && j.time > from && j.time <= to)
            .count()
    }

    /// Σ Jⱼ² over jumps from `source` with time in `(from, to]`.
    pub fn square_sum(&self, source: JumpSource, from: f64, to: f64) -> f64 {
        self.jumps
            .iter()
            .filter(|j| j.source == source && j.time > from && j.time <= to)
            .map(|j| j.size * j.size)
            .sum()
    }

    /// Σ wⱼ Jⱼ over jumps with time in `(from, to]`.
    pub fn weighted_sum(&self, p: &BnsParams, from: f64, to: f64) -> f64 {
        self.jumps
            .iter()
            .filter(|j| j.time > from && j.time <= to)
            .map(|j| p.weight(j.source) * j.size)
            .sum()
    }
}

fn poisson_arrivals<R: Rng + ?Sized>(
    sub: &SubordinatorSpec,
    speed: f64,
    from: f64,
    to: f64,
    source: JumpSource,
    rng: &mut R,
    out: &mut Vec<Jump>,
) {
    let arrival = Exp::new(sub.rate * speed).expect("positive rate");
    let mut t = from;
    loop {
        t += arrival.sample(rng);
        if t > to {
            break;
        }
        out.push(Jump { time: t, size: sub.params.sample_with(rng), source });
    }
}

/// Jumps of both subordinators (run at speed λ) on `(from, to]`.
pub fn simulate_jump_stream<R: Rng + ?Sized>(
    p: &BnsParams,
    z: &SubordinatorSpec,
    zb: &SubordinatorSpec,
    from: f64,
    to: f64,
    rng: &mut R,
) -> JumpStream {
    let mut jumps = Vec::new();
    poisson_arrivals(z, p.lambda, from, to, JumpSource::Small, rng, &mut jumps);
    poisson_arrivals(zb, p.lambda, from, to, JumpSource::Large, rng, &mut jumps);
    JumpStream::new(jumps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnsPath {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub sigma_sq: Vec<f64>,
    pub jumps: JumpStream,
}

impl BnsPath {
    /// Trapezoid integral of the simulated variance over the whole grid.
    pub fn trapezoid_variance(&self) -> f64 {
        self.t
            .windows(2)
            .zip(self.sigma_sq.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
            .sum()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), BnsError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "X", "sigma_sq"])?;
        for i in 0..self.t.len() {
            w.write_record([self.t[i].to_string(), self.x[i].to_string(), self.sigma_sq[i].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Euler scheme on a given jump realization. `X` starts at 0 and σ² at
/// `sigma0_sq`, both at `grid.t0`. Within each step the continuous update
/// comes first (exact multiplicative decay for σ²), then the step's jumps.
pub fn evolve_path(p: &BnsParams, grid: &PathGrid, jumps: JumpStream, rng: &mut SimRng) -> BnsPath {
    let dt = grid.dt();
    let decay = (-p.lambda * dt).exp();
    let sqrt_dt = dt.sqrt();
    let mut t = Vec::with_capacity(grid.steps + 1);
    let mut x = Vec::with_capacity(grid.steps + 1);
    let mut v = Vec::with_capacity(grid.steps + 1);
    let (mut xc, mut vc) = (0.0, p.sigma0_sq);
    t.push(grid.t0);
    x.push(xc);
    v.push(vc);
    let mut next = 0;
    for k in 1..=grid.steps {
        let tk = grid.time(k);
        let n: f64 = rng.sample(StandardNormal);
        xc += (p.mu + p.beta * vc) * dt + vc.sqrt() * sqrt_dt * n;
        vc *= decay;
        let mut dz = 0.0;
        while next < jumps.jumps.len() && jumps.jumps[next].time <= tk {
            let j = &jumps.jumps[next];
            dz += p.weight(j.source) * j.size;
            next += 1;
        }
        xc += p.rho * dz;
        vc += dz;
        t.push(tk);
        x.push(xc);
        v.push(vc);
    }
    BnsPath { t, x, sigma_sq: v, jumps }
}

/// Simulate one path from a seed: jump stream first, then the Euler scheme.
pub fn simulate_path(
    p: &BnsParams,
    z: &SubordinatorSpec,
    zb: &SubordinatorSpec,
    grid: &PathGrid,
    seed: Seed,
) -> BnsPath {
    let mut rng = seed.rng();
    let jumps = simulate_jump_stream(p, z, zb, grid.t0, grid.t1, &mut rng);
    evolve_path(p, grid, jumps, &mut rng)
}

/// Independent paths, path `i` seeded by `seed.derive(i)`.
pub fn simulate_paths(
    p: &BnsParams,
    z: &SubordinatorSpec,
    zb: &SubordinatorSpec,
    grid: &PathGrid,
    n_paths: usize,
    seed: Seed,
) -> Result<Vec<BnsPath>, BnsError> {
    p.validate()?;
    check_pair(z, zb)?;
    grid.validate()?;
    Ok((0..n_paths)
        .into_par_iter()
        .map(|i| simulate_path(p, z, zb, grid, seed.derive(i as u64)))
        .collect())
}

/// σ_t² = e^{-λt} σ₀² + Σ_{uⱼ ≤ t} e^{-λ(t-uⱼ)} wⱼ Jⱼ, with σ₀² taken at time 0.
pub fn sigma_sq_closed_form(jumps: &JumpStream, p: &BnsParams, t: f64) -> f64 {
    let mut v = (-p.lambda * t).exp() * p.sigma0_sq;
    for j in jumps.jumps.iter().filter(|j| j.time <= t) {
        v += (-p.lambda * (t - j.time)).exp() * p.weight(j.source) * j.size;
    }
    v
}

/// σ_I² = ε(t,T) σ_t² + Σ_{t < sⱼ ≤ T} ε(sⱼ,T) wⱼ Jⱼ.
pub fn integrated_variance(sigma_t_sq: f64, jumps: &JumpStream, p: &BnsParams, t: f64, t_end: f64) -> Result<f64, BnsError> {
    if t > t_end {
        return Err(BnsError::Domain(format!("integrated_variance needs t <= T, got t = {t}, T = {t_end}")));
    }
    let mut total = epsilon_unchecked(t, t_end, p.lambda) * sigma_t_sq;
    for j in jumps.jumps.iter().filter(|j| j.time > t && j.time <= t_end) {
        total += epsilon_unchecked(j.time, t_end, p.lambda) * p.weight(j.source) * j.size;
    }
    Ok(total)
}

/// Realized quantities entering the correlation formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationInputs {
    /// ∫₀ˢ σ² dτ.
    pub int_var_s: f64,
    /// ∫₀ᵗ σ² dτ.
    pub int_var_t: f64,
    /// Σ J² over small-subordinator jumps by time s (realized quadratic variation).
    pub small_jump_qv_s: f64,
    /// Σ J² over large-subordinator jumps by time s.
    pub large_jump_qv_s: f64,
}

impl CorrelationInputs {
    /// Reads the inputs off a simulated path, integrating its variance by trapezoid.
    pub fn from_path(path: &BnsPath, s: f64, t: f64) -> Self {
        let int_to = |end: f64| -> f64 {
            let mut acc = 0.0;
            for i in 1..path.t.len() {
                let (a, b) = (path.t[i - 1], path.t[i]);
                if a >= end {
                    break;
                }
                let hi = b.min(end);
                let frac = (hi - a) / (b - a);
                let vhi = path.sigma_sq[i - 1] + frac * (path.sigma_sq[i] - path.sigma_sq[i - 1]);
                acc += 0.5 * (hi - a) * (path.sigma_sq[i - 1] + vhi);
            }
            acc
        };
        let t0 = path.t[0];
        CorrelationInputs {
            int_var_s: int_to(s),
            int_var_t: int_to(t),
            small_jump_qv_s: path.jumps.square_sum(JumpSource::Small, t0, s),
            large_jump_qv_s: path.jumps.square_sum(JumpSource::Large, t0, s),
        }
    }
}

/// Correlation formula for (X_t, X_s), s < t. The jump terms use the realized
/// quadratic variation of each subordinator, whose mean matches the
/// `Var(Z₁)` terms of the normaliser. Not clamped to [-1, 1].
pub fn correlation(
    p: &BnsParams,
    z: &SubordinatorSpec,
    zb: &SubordinatorSpec,
    s: f64,
    t: f64,
    inputs: &CorrelationInputs,
) -> Result<f64, BnsError> {
    p.validate()?;
    if !(0.0 < s && s < t) {
        return Err(BnsError::Domain(format!("correlation needs 0 < s < t, got s = {s}, t = {t}")));
    }
    let (w_small, w_large) = (1.0 - p.theta, p.theta);
    let rho2 = p.rho * p.rho;
    let jump_var = p.lambda * (w_small * w_small * z.unit_variance() + w_large * w_large * zb.unit_variance());
    let alpha = |horizon: f64, int_var: f64| int_var + horizon * rho2 * jump_var;
    let numerator = inputs.int_var_s
        + rho2 * w_small * w_small * inputs.small_jump_qv_s
        + rho2 * w_large * w_large * inputs.large_jump_qv_s;
    Ok(numerator / (alpha(t, inputs.int_var_t) * alpha(s, inputs.int_var_s)).sqrt())
}

/// Sample correlation of X at the grid points nearest `s` and `t`.
pub fn correlation_monte_carlo(
    p: &BnsParams,
    z: &SubordinatorSpec,
    zb: &SubordinatorSpec,
    grid: &PathGrid,
    s: f64,
    t: f64,
    n_paths: usize,
    seed: Seed,
) -> Result<f64, BnsError> {
    if !(grid.t0 <= s && s < t && t <= grid.t1) {
        return Err(BnsError::Domain(format!("need t0 <= s < t <= t1, got s = {s}, t = {t}")));
    }
    if n_paths < 2 {
        return Err(BnsError::Domain("need at least 2 paths".into()));
    }
    let idx = |u: f64| (((u - grid.t0) / grid.dt()).round() as usize).min(grid.steps);
    let (is, it) = (idx(s), idx(t));
    let paths = simulate_paths(p, z, zb, grid, n_paths, seed)?;
    let pairs: Vec<(f64, f64)> = paths.iter().map(|q| (q.x[is], q.x[it])).collect();
    Ok(sample_correlation(&pairs))
}

fn sample_correlation(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for &(a, b) in pairs {
        sab += (a - ma) * (b - mb);
        saa += (a - ma) * (a - ma);
        sbb += (b - mb) * (b - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Roots of ½ε z² + (βε + ρ) z - θ̂ = 0 as (lower, upper). With ε = 0 the
/// constraint is linear; infinite bounds mean no restriction on that side.
fn strip_roots(beta: f64, rho: f64, eps: f64, theta_hat: f64) -> (f64, f64) {
    let a = 0.5 * eps;
    let b = beta * eps + rho;
    let c = -theta_hat;
    if a <= 0.0 {
        return if b < 0.0 {
            (-c / b, f64::INFINITY)
        } else if b > 0.0 {
            (f64::NEG_INFINITY, -c / b)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        };
    }
    let disc = (b * b - 4.0 * a * c).sqrt();
    let q = -0.5 * (b + b.signum() * disc);
    let q = if q == 0.0 { -0.5 * disc } else { q };
    let (r1, r2) = (q / a, c / q);
    (r1.min(r2), r1.max(r2))
}

const STRIP_GRID: usize = 1024;

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn sup_over<F: Fn(f64) -> f64>(f: F, t: f64, t_end: f64) -> f64 {
    let h = (t_end - t) / STRIP_GRID as f64;
    let mut best = f64::NEG_INFINITY;
    let mut best_k = 0;
    for k in 0..=STRIP_GRID {
        let s = if k == STRIP_GRID { t_end } else { t + h * k as f64 };
        let v = f(s);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let lo = t + h * best_k.saturating_sub(1) as f64;
    let hi = (t + h * (best_k + 1) as f64).min(t_end);
    let (_, refined) = golden_max(&f, lo, hi);
    best.max(refined)
}

/// (θ₋, θ₊): sup over s ∈ [t, T] of the lower root and inf of the upper root.
pub fn strip_bounds(p: &BnsParams, t: f64, t_end: f64, theta_hat: f64) -> Result<(f64, f64), BnsError> {
    p.validate()?;
    if !(t < t_end) {
        return Err(BnsError::Domain(format!("strip_bounds needs t < T, got t = {t}, T = {t_end}")));
    }
    if !(theta_hat > 0.0) {
        return Err(BnsError::Domain(format!("strip_bounds needs theta_hat > 0, got {theta_hat}")));
    }
    let roots = |s: f64| strip_roots(p.beta, p.rho, epsilon_unchecked(s, t_end, p.lambda), theta_hat);
    let lower = sup_over(|s| roots(s).0, t, t_end);
    let upper = -sup_over(|s| -roots(s).1, t, t_end);
    Ok((lower, upper))
}

/// Conditional state at time t for the Laplace transform of X_T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalState {
    pub t: f64,
    pub t_end: f64,
    pub x_t: f64,
    pub sigma_t_sq: f64,
}

/// φ(z) = E[exp(z X_T) | F_t]. The s-integral of the effective cumulant is
/// evaluated by quadrature on its real and imaginary parts.
pub fn laplace_transform(
    z: Complex64,
    p: &BnsParams,
    small: &SubordinatorSpec,
    large: &SubordinatorSpec,
    state: &ConditionalState,
    spec: &QuadratureSpec,
) -> Result<Complex64, BnsError> {
    p.validate()?;
    small.validate()?;
    large.validate()?;
    let ConditionalState { t, t_end, x_t, sigma_t_sq } = *state;
    if !(t <= t_end) {
        return Err(BnsError::Domain(format!("laplace_transform needs t <= T, got t = {t}, T = {t_end}")));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let quad = z * z + z * (2.0 * p.beta);
    let g = |s: f64| -> Result<Complex64, BnsError> {
        let arg = z * p.rho + quad * (0.5 * epsilon_unchecked(s, t_end, p.lambda));
        cumulant_effective(arg, small, large, p.theta)
    };
    let theta_hat = effective_abscissa(small, large, p.theta);
    if t < t_end {
        let (lower, upper) = strip_bounds(p, t, t_end, theta_hat)?;
        if !(z.re > lower && z.re < upper) {
            // surface the cumulant's own divergence when it is the cause
            let h = (t_end - t) / STRIP_GRID as f64;
            for k in 0..=STRIP_GRID {
                g(t + h * k as f64)?;
            }
            return Err(BnsError::OutsideStrip { re: z.re, lower, upper });
        }
    }
    let failure: RefCell<Option<BnsError>> = RefCell::new(None);
    let part = |take_re: bool| {
        integrate_interval(
            |s| match g(s) {
                Ok(v) => if take_re { v.re } else { v.im },
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            t,
            t_end,
            spec,
        )
    };
    let re = part(true)?;
    let im = if z.im == 0.0 { 0.0 } else { part(false)? };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let exponent = z * (x_t + p.mu * (t_end - t))
        + quad * (0.5 * epsilon_unchecked(t, t_end, p.lambda) * sigma_t_sq)
        + Complex64::new(re, im) * p.lambda;
    Ok(exponent.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(theta: f64) -> BnsParams {
        BnsParams { mu: 0.05, beta: -0.5, rho: -0.3, lambda: 1.5, theta, sigma0_sq: 0.04 }
    }

    fn subs() -> (SubordinatorSpec, SubordinatorSpec) {
        let z = SubordinatorSpec::inverse_gaussian(InverseGaussianParams::new(0.02, 0.05).unwrap(), 2.0).unwrap();
        let zb = SubordinatorSpec::inverse_gaussian(InverseGaussianParams::new(0.08, 0.2).unwrap(), 2.0).unwrap();
        (z, zb)
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(epsilon(2.0, 2.0, 3.0).unwrap(), 0.0);
        assert!((epsilon(0.0, 1.0, 1.0).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert!((epsilon(0.0, 0.5, 2.0).unwrap() - 0.316_060_279_414_278_8).abs() < 1e-15);
        assert!(epsilon(1.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(params(0.3).validate().is_ok());
        assert!(BnsParams { rho: 0.1, ..params(0.3) }.validate().is_err());
        assert!(BnsParams { theta: 1.1, ..params(0.3) }.validate().is_err());
        assert!(BnsParams { lambda: 0.0, ..params(0.3) }.validate().is_err());
        assert!(BnsParams { sigma0_sq: 0.0, ..params(0.3) }.validate().is_err());
    }

    #[test]
    fn intensity_order_enforced() {
        let (z, zb) = subs();
        let grid = PathGrid::new(0.0, 1.0, 10).unwrap();
        assert!(matches!(
            simulate_paths(&params(0.3), &zb, &z, &grid, 2, Seed(1)),
            Err(BnsError::IntensityOrder { .. })
        ));
    }

    #[test]
    fn single_jump_closed_form() {
        let p = BnsParams { theta: 0.0, ..params(0.0) };
        let jumps = JumpStream::new(vec![Jump { time: 0.3, size: 0.5, source: JumpSource::Small }]);
        let t = 1.0;
        let expect = (-p.lambda * t).exp() * p.sigma0_sq + (-p.lambda * (t - 0.3)).exp() * 0.5;
        assert!((sigma_sq_closed_form(&jumps, &p, t) - expect).abs() < 1e-15);
        let empty = JumpStream::default();
        assert_eq!(sigma_sq_closed_form(&empty, &p, t), (-p.lambda * t).exp() * p.sigma0_sq);
    }

    #[test]
    fn strip_root_limits() {
        // β = ρ = 0: ±sqrt(2θ̂/ε)
        let (lo, hi) = strip_roots(0.0, 0.0, 0.5, 2.0);
        let r = 8f64.sqrt();
        assert!((lo + r).abs() < 1e-14 && (hi - r).abs() < 1e-14);
        // ε = 0 with ρ < 0 leaves only the lower bound θ̂/ρ
        let (lo, hi) = strip_roots(-0.5, -0.25, 0.0, 2.0);
        assert_eq!(lo, -8.0);
        assert!(hi.is_infinite());
        // tiny ε agrees with the linear limit
        let (lo, _) = strip_roots(-0.5, -0.25, 1e-14, 2.0);
        assert!((lo + 8.0).abs() < 1e-9, "{lo}");
    }

    #[test]
    fn cumulant_divergence() {
        let (z, zb) = subs();
        let bound = effective_abscissa(&z, &zb, 0.4);
        assert!(cumulant_effective(Complex64::new(bound * 0.99, 0.0), &z, &zb, 0.4).is_ok());
        assert!(matches!(
            cumulant_effective(Complex64::new(bound, 0.0), &z, &zb, 0.4),
            Err(BnsError::Divergence { .. })
        ));
    }
}
