//! Sequential test for large versus small jumps.
//!
//! The null hypothesis says negative percent jumps follow the base density ν;
//! the alternative tilts it to `(1 + a x) ν(dx)`. The log-likelihood process
//! `u_t` is a jump diffusion with drift γ, diffusion `|β|` and negative jumps
//! `-log(1 + X)` arriving at rate `M`. A decision interval `[l, r]` is built
//! from closed-form envelopes `f` (super-solution) and `g` (sub-solution) of
//! the exit-probability equation, and right-exit counts over simulated paths
//! of `u_t` serve as the large-jump statistic.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levy::{InverseGaussianParams, LevyError};
use crate::quadrature::QuadratureSpec;
use crate::rng::Seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeqTestError {
    #[error("tilt a = 0 gives identical hypotheses; there is no test to run")]
    DegenerateHypothesis,
    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),
    #[error("diffusion coefficient beta is zero; the sub-solution is undefined")]
    ZeroBeta,
    #[error("invalid decision rule: {0}")]
    InvalidRule(String),
    #[error("no positive right boundary solves {envelope}(0) = {target} for coefficients {coeffs:?}")]
    BoundarySolve {
        envelope: &'static str,
        target: f64,
        coeffs: GeneratorCoefficients,
    },
    #[error("envelope argument {x} outside [{l}, {r}]")]
    OutOfInterval { x: f64, l: f64, r: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no jumps supplied")]
    NoJumps,
    #[error("need at least {needed} prices, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("price {index} is not positive and finite: {value}")]
    BadPrice { index: usize, value: f64 },
    #[error(transparent)]
    Levy(#[from] LevyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpHypothesis {
    pub a: f64,
    pub nu: InverseGaussianParams,
    pub sigma: f64,
}

/// Reading of the squared-log term in γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaForm {
    /// `(log(1 + x))²`
    #[default]
    SquaredLog,
    /// `log((1 + x)²)`
    LogOfSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorCoefficients {
    pub beta: f64,
    pub m: f64,
    pub gamma: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// Total mass of the jump measure K.
    #[serde(rename = "M")]
    pub jump_mass: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

impl GeneratorCoefficients {
    /// Builds the set from the first five constants, with `B = 2(C + γ)/β²`.
    pub fn from_parts(beta: f64, m: f64, gamma: f64, c: f64, jump_mass: f64) -> Self {
        let b = if beta != 0.0 { 2.0 * (c + gamma) / (beta * beta) } else { 0.0 };
        GeneratorCoefficients { beta, m, gamma, c, jump_mass, b }
    }

    /// `√(2M + B²) / |β|`, the sinh rate of the sub-solution.
    pub fn sinh_rate(&self) -> f64 {
        (2.0 * self.jump_mass + self.b * self.b).sqrt() / self.beta.abs()
    }
}

/// `∫ h dK = a ∫ h(log(1 + x)) ν(dx)`.
pub fn k_integral<F: Fn(f64) -> f64>(h: F, a: f64, nu: &InverseGaussianParams, spec: &QuadratureSpec) -> Result<f64, SeqTestError> {
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok(a * nu.expect(|x| h(x.ln_1p()), spec)?)
}

pub fn generator_coeffs(hyp: &JumpHypothesis, form: GammaForm, spec: &QuadratureSpec) -> Result<GeneratorCoefficients, SeqTestError> {
    hyp.nu.validate()?;
    if !(hyp.sigma > 0.0) || !hyp.sigma.is_finite() {
        return Err(SeqTestError::InvalidHypothesis(format!("sigma must be > 0, got {}", hyp.sigma)));
    }
    if !(hyp.a >= 0.0) || !hyp.a.is_finite() {
        return Err(SeqTestError::InvalidHypothesis(format!("a must be >= 0, got {}", hyp.a)));
    }
    if hyp.a == 0.0 {
        return Err(SeqTestError::DegenerateHypothesis);
    }
    let (a, nu) = (hyp.a, &hyp.nu);
    let head_sq = nu.expect_over(|x| x * x, 0.0, 1.0, spec)?;
    let tail_mean = nu.expect_over(|x| x, 1.0, f64::INFINITY, spec)?;
    let beta = -a * (head_sq + tail_mean) / hyp.sigma;
    let m = a * tail_mean;
    let log_term = match form {
        GammaForm::SquaredLog => nu.expect_over(|x| x.ln_1p().powi(2) - x, 0.0, 1.0, spec)?,
        GammaForm::LogOfSquare => nu.expect_over(|x| 2.0 * x.ln_1p() - x, 0.0, 1.0, spec)?,
    };
    let gamma = m - 0.5 * beta * beta + a * log_term;
    let c = k_integral(|y| y / (1.0 + y), a, nu, spec)?;
    let jump_mass = k_integral(|_| 1.0, a, nu, spec)?;
    Ok(GeneratorCoefficients::from_parts(beta, m, gamma, c, jump_mass))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    pub l: f64,
    pub r: f64,
    pub alpha0: f64,
}

impl DecisionRule {
    pub fn new(l: f64, r: f64, alpha0: f64) -> Result<Self, SeqTestError> {
        let rule = DecisionRule { l, r, alpha0 };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<(), SeqTestError> {
        if !(self.l < 0.0 && 0.0 < self.r) || self.l.is_infinite() {
            return Err(SeqTestError::InvalidRule(format!("need l < 0 < r, got l = {}, r = {}", self.l, self.r)));
        }
        check_alpha0(self.alpha0)
    }
}

fn check_alpha0(alpha0: f64) -> Result<(), SeqTestError> {
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(SeqTestError::InvalidRule(format!("alpha0 must lie in (0, 1), got {alpha0}")));
    }
    Ok(())
}

fn check_in_rule(x: f64, rule: &DecisionRule) -> Result<(), SeqTestError> {
    rule.validate()?;
    if !(rule.l <= x && x <= rule.r) {
        return Err(SeqTestError::OutOfInterval { x, l: rule.l, r: rule.r });
    }
    Ok(())
}

/// Sub-solution `g(x) = e^{B(x-l)} sinh((r-x)k) / sinh((r-l)k)` with
/// `k = √(2M + B²)/|β|`, evaluated as
/// `e^{(B-k)(x-l)} · expm1(-2(r-x)k) / expm1(-2(r-l)k)`.
pub fn sub_solution_g(x: f64, rule: &DecisionRule, c: &GeneratorCoefficients) -> Result<f64, SeqTestError> {
    check_in_rule(x, rule)?;
    if c.beta == 0.0 {
        return Err(SeqTestError::ZeroBeta);
    }
    Ok(g_unchecked(x, rule.l, rule.r, c.b, c.sinh_rate()))
}

fn g_unchecked(x: f64, l: f64, r: f64, b: f64, k: f64) -> f64 {
    if x == l {
        return 1.0;
    }
    ((b - k) * (x - l)).exp() * (-2.0 * (r - x) * k).exp_m1() / (-2.0 * (r - l) * k).exp_m1()
}

/// Super-solution `f(x) = (e^{2Br} - e^{2Bx}) / (e^{2Br} - e^{2Bl})`, linear when B = 0.
pub fn super_solution_f(x: f64, rule: &DecisionRule, c: &GeneratorCoefficients) -> Result<f64, SeqTestError> {
    check_in_rule(x, rule)?;
    Ok(f_unchecked(x, rule.l, rule.r, c.b))
}

fn f_unchecked(x: f64, l: f64, r: f64, b: f64) -> f64 {
    if b > 0.0 {
        (2.0 * b * (x - r)).exp_m1() / (2.0 * b * (l - r)).exp_m1()
    } else if b < 0.0 {
        let span = (2.0 * b * (r - l)).exp_m1();
        (span - (2.0 * b * (x - l)).exp_m1()) / span
    } else {
        (r - x) / (r - l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySolution {
    pub r_f: Option<f64>,
    pub r_g: Option<f64>,
    /// Average of the available roots.
    pub r: f64,
}

/// What to do when one of the two envelope equations has no positive root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    /// Both roots are required.
    #[default]
    Strict,
    /// Use whichever roots exist; fail only if neither does.
    Available,
}

/// Closed-form root of `f(0) = 1 - α₀` in r.
pub fn right_boundary_f(alpha0: f64, l: f64, c: &GeneratorCoefficients) -> Result<f64, SeqTestError> {
    check_alpha0(alpha0)?;
    let target = 1.0 - alpha0;
    let fail = || SeqTestError::BoundarySolve { envelope: "f", target, coeffs: *c };
    let b = c.b;
    let r = if b == 0.0 {
        -target * l / alpha0
    } else {
        // e^{2Br} - 1 = -(1-α₀) expm1(2Bl) / α₀
        let arg = -target * (2.0 * b * l).exp_m1() / alpha0;
        if !(arg > -1.0) {
            return Err(fail());
        }
        arg.ln_1p() / (2.0 * b)
    };
    if r > 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(fail())
    }
}

const BRACKET_LIMIT: f64 = 1e8;

/// Root in r > 0 of an increasing function `h(r)` with `h(0+) < 0`.
fn bisect_increasing<F: Fn(f64) -> f64>(h: F, start: f64) -> Option<f64> {
    let mut lo = 0.0;
    let mut hi = start;
    while h(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > BRACKET_LIMIT {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (hl, hh) = (h(lo).abs(), h(hi).abs());
    Some(if lo > 0.0 && hl < hh { lo } else { hi })
}

/// Bisection root of `g(0) = 1 - α₀` in r. A root exists only when the
/// large-r limit `exp(l (k - B))` exceeds `1 - α₀`.
pub fn right_boundary_g(alpha0: f64, l: f64, c: &GeneratorCoefficients) -> Result<f64, SeqTestError> {
    check_alpha0(alpha0)?;
    if c.beta == 0.0 {
        return Err(SeqTestError::ZeroBeta);
    }
    let target = 1.0 - alpha0;
    let k = c.sinh_rate();
    let fail = || SeqTestError::BoundarySolve { envelope: "g", target, coeffs: *c };
    if !(l * (k - c.b) > target.ln()) {
        return Err(fail());
    }
    bisect_increasing(|r| g_unchecked(0.0, l, r, c.b, k) - target, -l).ok_or_else(fail)
}

/// Bisection root of `f(0) = 1 - α₀` in r; cross-check for the closed form.
pub fn right_boundary_f_numeric(alpha0: f64, l: f64, c: &GeneratorCoefficients) -> Result<f64, SeqTestError> {
    check_alpha0(alpha0)?;
    let target = 1.0 - alpha0;
    bisect_increasing(|r| f_unchecked(0.0, l, r, c.b) - target, -l)
        .ok_or(SeqTestError::BoundarySolve { envelope: "f", target, coeffs: *c })
}

/// Right boundary as the average of the f- and g-roots.
pub fn solve_right_boundary(alpha0: f64, l: f64, c: &GeneratorCoefficients) -> Result<BoundarySolution, SeqTestError> {
    solve_right_boundary_with(alpha0, l, c, BoundaryPolicy::Strict)
}

pub fn solve_right_boundary_with(
    alpha0: f64,
    l: f64,
    c: &GeneratorCoefficients,
    policy: BoundaryPolicy,
) -> Result<BoundarySolution, SeqTestError> {
    if !(l < 0.0) {
        return Err(SeqTestError::InvalidRule(format!("left boundary must be < 0, got {l}")));
    }
    let rf = right_boundary_f(alpha0, l, c);
    let rg = right_boundary_g(alpha0, l, c);
    match policy {
        BoundaryPolicy::Strict => {
            let (r_f, r_g) = (rf?, rg?);
            Ok(BoundarySolution { r_f: Some(r_f), r_g: Some(r_g), r: 0.5 * (r_f + r_g) })
        }
        BoundaryPolicy::Available => match (rf, rg) {
            (Ok(a), Ok(b)) => Ok(BoundarySolution { r_f: Some(a), r_g: Some(b), r: 0.5 * (a + b) }),
            (Ok(a), Err(_)) => Ok(BoundarySolution { r_f: Some(a), r_g: None, r: a }),
            (Err(_), Ok(b)) => Ok(BoundarySolution { r_f: None, r_g: Some(b), r: b }),
            (Err(e), Err(_)) => Err(e),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExitResult {
    pub exits_right: usize,
    pub exits_left: usize,
    pub no_exit: usize,
    pub n_sims: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exit {
    Left,
    Right,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationControls {
    pub n_sims: usize,
    pub t_max: f64,
    pub dt: f64,
}

impl Default for SimulationControls {
    fn default() -> Self {
        SimulationControls { n_sims: 10, t_max: 10.0, dt: 1e-3 }
    }
}

impl SimulationControls {
    pub fn validate(&self) -> Result<(), SeqTestError> {
        if self.n_sims == 0 {
            return Err(SeqTestError::InvalidConfig("n_sims must be >= 1".into()));
        }
        if !(self.t_max > 0.0) || !(self.dt > 0.0) || self.dt > self.t_max || !self.t_max.is_finite() {
            return Err(SeqTestError::InvalidConfig(format!(
                "need 0 < dt <= t_max, got dt = {}, t_max = {}",
                self.dt, self.t_max
            )));
        }
        Ok(())
    }
}

fn simulate_one(c: &GeneratorCoefficients, nu: &InverseGaussianParams, rule: &DecisionRule, ctl: &SimulationControls, seed: Seed) -> Exit {
    let mut rng = seed.rng();
    let steps = (ctl.t_max / ctl.dt).ceil() as usize;
    let diffusion = c.beta.abs() * ctl.dt.sqrt();
    let drift = c.gamma * ctl.dt;
    let arrival = if c.jump_mass > 0.0 { Exp::new(c.jump_mass).ok() } else { None };
    let mut next_jump = arrival.map_or(f64::INFINITY, |e| e.sample(&mut rng));
    let mut u = 0.0;
    for k in 1..=steps {
        let t = (k as f64 * ctl.dt).min(ctl.t_max);
        let n: f64 = rng.sample(StandardNormal);
        u += drift + diffusion * n;
        if u > rule.r {
            return Exit::Right;
        }
        if u < rule.l {
            return Exit::Left;
        }
        while next_jump <= t {
            u -= nu.sample_with(&mut rng).ln_1p();
            next_jump += arrival.map_or(f64::INFINITY, |e| e.sample(&mut rng));
        }
        if u < rule.l {
            return Exit::Left;
        }
    }
    Exit::None
}

/// Simulate `u_t` from 0 until it leaves `[l, r]` or reaches `t_max`.
/// Simulation `i` uses `seed.derive(i)`.
pub fn simulate_loglikelihood(
    c: &GeneratorCoefficients,
    hyp: &JumpHypothesis,
    rule: &DecisionRule,
    ctl: &SimulationControls,
    seed: Seed,
) -> Result<ExitResult, SeqTestError> {
    rule.validate()?;
    ctl.validate()?;
    hyp.nu.validate()?;
    let exits: Vec<Exit> = (0..ctl.n_sims)
        .into_par_iter()
        .map(|i| simulate_one(c, &hyp.nu, rule, ctl, seed.derive(i as u64)))
        .collect();
    let mut out = ExitResult { n_sims: ctl.n_sims, ..Default::default() };
    for e in exits {
        match e {
            Exit::Right => out.exits_right += 1,
            Exit::Left => out.exits_left += 1,
            Exit::None => out.no_exit += 1,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltFit {
    pub a: f64,
    pub capped: bool,
}

/// Moment-matching tilt: solves `(m₁ + a m₂)/(1 + a m₁) = mean(jumps)` and
/// clamps to `[0, a_max]`.
pub fn fit_tilt_a(period_jumps: &[f64], nu: &InverseGaussianParams, a_max: f64) -> Result<TiltFit, SeqTestError> {
    nu.validate()?;
    if period_jumps.is_empty() {
        return Err(SeqTestError::NoJumps);
    }
    let s = period_jumps.iter().sum::<f64>() / period_jumps.len() as f64;
    let m1 = nu.mean;
    let m2 = nu.second_moment();
    if s <= m1 {
        return Ok(TiltFit { a: 0.0, capped: false });
    }
    let denom = m2 - s * m1;
    let a = if denom > 0.0 { (s - m1) / denom } else { f64::INFINITY };
    if a > a_max {
        log::warn!("tilt estimate {a} for jump mean {s} capped at {a_max}");
        return Ok(TiltFit { a: a_max, capped: true });
    }
    Ok(TiltFit { a, capped: false })
}

/// 1 iff the period's mean jump magnitude exceeds the training mean.
pub fn naive_classify(period_jumps: &[f64], training_jumps: &[f64]) -> Result<u8, SeqTestError> {
    if period_jumps.is_empty() || training_jumps.is_empty() {
        return Err(SeqTestError::NoJumps);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(u8::from(mean(period_jumps) > mean(training_jumps)))
}

/// Percent changes `100 (p[i+1] - p[i]) / p[i]`.
pub fn percent_changes(prices: &[f64]) -> Vec<f64> {
    prices.windows(2).map(|w| 100.0 * (w[1] - w[0]) / w[0]).collect()
}

/// Magnitudes of the negative entries.
pub fn negative_jumps(changes: &[f64]) -> Vec<f64> {
    changes.iter().filter(|&&c| c < 0.0).map(|c| -c).collect()
}

/// Sample standard deviation with n - 1 in the denominator.
pub fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub l: f64,
    pub alpha0: f64,
    pub p_star: usize,
    pub n_sims: usize,
    pub t_max: f64,
    pub dt: f64,
    pub a_max: f64,
    pub gamma_form: GammaForm,
    pub quadrature: QuadratureSpec,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            l: -1.0,
            alpha0: 0.1,
            p_star: 8,
            n_sims: 10,
            t_max: 10.0,
            dt: 1e-3,
            a_max: 50.0,
            gamma_form: GammaForm::default(),
            quadrature: QuadratureSpec::default(),
        }
    }
}

impl DetectorConfig {
    pub fn controls(&self) -> SimulationControls {
        SimulationControls { n_sims: self.n_sims, t_max: self.t_max, dt: self.dt }
    }

    pub fn validate(&self) -> Result<(), SeqTestError> {
        if !(self.l < 0.0) || !self.l.is_finite() {
            return Err(SeqTestError::InvalidConfig(format!("l must be < 0, got {}", self.l)));
        }
        check_alpha0(self.alpha0).map_err(|_| SeqTestError::InvalidConfig(format!("alpha0 must lie in (0, 1), got {}", self.alpha0)))?;
        if self.p_star < 1 || self.p_star > self.n_sims {
            return Err(SeqTestError::InvalidConfig(format!(
                "need 1 <= p_star <= n_sims, got p_star = {}, n_sims = {}",
                self.p_star, self.n_sims
            )));
        }
        if !(self.a_max > 0.0) {
            return Err(SeqTestError::InvalidConfig(format!("a_max must be > 0, got {}", self.a_max)));
        }
        self.quadrature
            .validate()
            .map_err(|e| SeqTestError::InvalidConfig(e.to_string()))?;
        self.controls().validate()
    }
}

/// Per-window output of [`detect`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub period_start_index: usize,
    pub a_hat: f64,
    pub sigma: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[serde(rename = "M")]
    pub jump_mass: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub r_f: Option<f64>,
    pub r_g: Option<f64>,
    pub r: Option<f64>,
    pub right_exits: usize,
    pub left_exits: usize,
    pub no_exits: usize,
    pub label: u8,
}

impl DetectionRecord {
    fn degenerate(start: usize, a_hat: f64, sigma: f64, n_sims: usize) -> Self {
        DetectionRecord {
            period_start_index: start,
            a_hat,
            sigma,
            beta: None,
            gamma: None,
            c: None,
            jump_mass: None,
            b: None,
            r_f: None,
            r_g: None,
            r: None,
            right_exits: 0,
            left_exits: 0,
            no_exits: n_sims,
            label: 0,
        }
    }
}

/// Runs the detection algorithm on one window of prices.
///
/// Degenerate windows (no negative jumps, `â = 0`, zero spread, or no
/// solvable right boundary) yield zero right exits and label 0.
pub fn detect(
    prices: &[f64],
    training_nu: &InverseGaussianParams,
    cfg: &DetectorConfig,
    seed: Seed,
    period_start_index: usize,
) -> Result<DetectionRecord, SeqTestError> {
    cfg.validate()?;
    training_nu.validate()?;
    if prices.len() < 3 {
        return Err(SeqTestError::InsufficientData { needed: 3, got: prices.len() });
    }
    if let Some((index, &value)) = prices.iter().enumerate().find(|(_, p)| !(**p > 0.0) || !p.is_finite()) {
        return Err(SeqTestError::BadPrice { index, value });
    }
    let changes = percent_changes(prices);
    let sigma = sample_std(&changes);
    let jumps = negative_jumps(&changes);
    if jumps.is_empty() {
        return Ok(DetectionRecord::degenerate(period_start_index, 0.0, sigma, cfg.n_sims));
    }
    let a_hat = fit_tilt_a(&jumps, training_nu, cfg.a_max)?.a;
    if a_hat == 0.0 || !(sigma > 0.0) {
        return Ok(DetectionRecord::degenerate(period_start_index, a_hat, sigma, cfg.n_sims));
    }
    let hyp = JumpHypothesis { a: a_hat, nu: *training_nu, sigma };
    let coeffs = generator_coeffs(&hyp, cfg.gamma_form, &cfg.quadrature)?;
    let mut record = DetectionRecord {
        beta: Some(coeffs.beta),
        gamma: Some(coeffs.gamma),
        c: Some(coeffs.c),
        jump_mass: Some(coeffs.jump_mass),
        b: Some(coeffs.b),
        ..DetectionRecord::degenerate(period_start_index, a_hat, sigma, cfg.n_sims)
    };
    let boundary = match solve_right_boundary_with(cfg.alpha0, cfg.l, &coeffs, BoundaryPolicy::Available) {
        Ok(b) => b,
        Err(e) => {
            log::warn!("window {period_start_index}: {e}; labelled 0");
            return Ok(record);
        }
    };
    record.r_f = boundary.r_f;
    record.r_g = boundary.r_g;
    record.r = Some(boundary.r);
    let rule = DecisionRule::new(cfg.l, boundary.r, cfg.alpha0)?;
    let exits = simulate_loglikelihood(&coeffs, &hyp, &rule, &cfg.controls(), seed)?;
    record.right_exits = exits.exits_right;
    record.left_exits = exits.exits_left;
    record.no_exits = exits.no_exit;
    record.label = u8::from(exits.exits_right >= cfg.p_star);
    Ok(record)
}
