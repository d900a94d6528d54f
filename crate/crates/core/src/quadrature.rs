//! Adaptive Simpson quadrature on finite intervals and half-lines.
//!
//! Half-line integrals are mapped onto `(0, 1)` with `x = lower + scale * t / (1 - t)`.
//! The integrand is assumed to vanish at infinity, so the mapped integrand is
//! taken as zero at `t = 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_subdivisions: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("no convergence after {subdivisions} subdivisions (partial estimate {partial})")]
    NotConverged { partial: f64, subdivisions: usize },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self, QuadratureError> {
        let spec = QuadratureSpec { abs_tol, rel_tol, max_subdivisions };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidSpec(format!(
                "tolerances must be positive (abs_tol = {}, rel_tol = {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadratureError::InvalidSpec("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }
}

const INITIAL_PANELS: usize = 64;
const MAX_DEPTH: u32 = 60;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64, QuadratureError> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadratureError::NonFinite { x })
    }
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64, QuadratureError> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadratureError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(0.0);
    }

    let h = (b - a) / INITIAL_PANELS as f64;
    let mut nodes = Vec::with_capacity(2 * INITIAL_PANELS + 1);
    for i in 0..=2 * INITIAL_PANELS {
        let x = if i == 2 * INITIAL_PANELS { b } else { a + 0.5 * h * i as f64 };
        nodes.push((x, eval(f, x)?));
    }
    let mut coarse = 0.0;
    let mut stack = Vec::with_capacity(INITIAL_PANELS);
    for i in 0..INITIAL_PANELS {
        let (xa, fa) = nodes[2 * i];
        let (_, fm) = nodes[2 * i + 1];
        let (xb, fb) = nodes[2 * i + 2];
        let whole = simpson(xa, xb, fa, fm, fb);
        coarse += whole;
        stack.push(Panel { a: xa, b: xb, fa, fm, fb, whole, tol: 0.0, depth: 0 });
    }
    let total_tol = spec.abs_tol.max(spec.rel_tol * coarse.abs());
    for p in stack.iter_mut() {
        p.tol = total_tol / INITIAL_PANELS as f64;
    }

    let mut result = 0.0;
    let mut subdivisions = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = eval(f, lm)?;
        let frm = eval(f, rm)?;
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        if delta.abs() <= 15.0 * p.tol || p.depth >= MAX_DEPTH || (m - p.a) <= f64::EPSILON * m.abs() {
            result += left + right + delta / 15.0;
            continue;
        }
        subdivisions += 1;
        if subdivisions > spec.max_subdivisions {
            let pending: f64 = stack.iter().map(|q| q.whole).sum();
            return Err(QuadratureError::NotConverged {
                partial: result + left + right + pending,
                subdivisions,
            });
        }
        let tol = 0.5 * p.tol;
        stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol, depth: p.depth + 1 });
        stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, tol, depth: p.depth + 1 });
    }
    Ok(result)
}

/// Integral of `f` over `[a, b]`.
pub fn integrate_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64, QuadratureError> {
    adaptive_simpson(&f, a, b, spec)
}

/// Integral of `f` over `(lower, ∞)` using the map `x = lower + scale * t / (1 - t)`.
/// `scale` should be of the order of the integrand's decay length.
pub fn integrate_from_scaled<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QuadratureError> {
    if !(scale > 0.0) || !lower.is_finite() {
        return Err(QuadratureError::InvalidInterval { a: lower, b: f64::INFINITY });
    }
    let mapped = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - t;
        let x = lower + scale * t / one_minus;
        if !x.is_finite() {
            return 0.0;
        }
        f(x) * scale / (one_minus * one_minus)
    };
    adaptive_simpson(&mapped, 0.0, 1.0, spec)
}

/// Integral of `f` over `(lower, ∞)`.
pub fn integrate_from<F: Fn(f64) -> f64>(f: F, lower: f64, spec: &QuadratureSpec) -> Result<f64, QuadratureError> {
    integrate_from_scaled(f, lower, 1.0, spec)
}

/// Integral of `f` over `(0, ∞)`. `f` must be defined at 0 (use the limit value).
pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64, QuadratureError> {
    integrate_from(f, 0.0, spec)
}
