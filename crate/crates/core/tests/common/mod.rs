//! Oracles shared by the integration suites. Nothing here calls the library's
//! samplers or quadrature.
#![allow(dead_code)]

use levyjump::bns::{BnsParams, ConditionalState, SubordinatorSpec};
use levyjump::levy::InverseGaussianParams;
use rand::Rng;
use rand_distr::{Distribution, InverseGaussian, Poisson, StandardNormal};

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Sample variance and its standard error `√((m₄ - v²)/n)`.
pub fn var_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    (v, ((m4 - v * v) / n).sqrt())
}

pub fn eps(s: f64, t_end: f64, lambda: f64) -> f64 {
    (1.0 - (-lambda * (t_end - s)).exp()) / lambda
}

/// Exact draw of X_T given (x_t, σ_t²): Gaussian given the jump path.
pub fn exact_x_end<R: Rng>(p: &BnsParams, z: &SubordinatorSpec, zb: &SubordinatorSpec, st: &ConditionalState, rng: &mut R) -> f64 {
    let horizon = st.t_end - st.t;
    let mut int_var = eps(st.t, st.t_end, p.lambda) * st.sigma_t_sq;
    let mut dz = 0.0;
    for (sub, w) in [(z, 1.0 - p.theta), (zb, p.theta)] {
        let count = Poisson::new(p.lambda * sub.rate * horizon).unwrap().sample(rng) as usize;
        let law = InverseGaussian::new(sub.params.mean, sub.params.scale).unwrap();
        for _ in 0..count {
            let s = st.t + horizon * rng.random::<f64>();
            let j = w * law.sample(rng);
            int_var += eps(s, st.t_end, p.lambda) * j;
            dz += j;
        }
    }
    let n: f64 = rng.sample(StandardNormal);
    st.x_t + p.mu * horizon + p.beta * int_var + int_var.sqrt() * n + p.rho * dz
}

/// Draws from the normalised `(1 + a x)·IG` law by rejection from IG,
/// truncated where the base tail mass is below 1e-12.
pub fn tilted_rejection<R: Rng>(base: &InverseGaussianParams, a: f64, n: usize, rng: &mut R) -> Vec<f64> {
    let law = InverseGaussian::new(base.mean, base.scale).unwrap();
    // IG tail decays like exp(-λx/(2μ²))
    let cap = base.mean + 60.0 * base.mean * base.mean / base.scale + 30.0 * base.mean;
    let bound = 1.0 + a * cap;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x: f64 = law.sample(rng);
        if x <= cap && rng.random::<f64>() * bound < 1.0 + a * x {
            out.push(x);
        }
    }
    out
}

/// erfc with fractional error below 1.2e-7 (Chebyshev fit).
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807 + t * (-1.13520398 + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn ig_cdf_closed(x: f64, mean: f64, scale: f64) -> f64 {
    let r = (scale / x).sqrt();
    let second = if 2.0 * scale / mean > 700.0 {
        0.0
    } else {
        (2.0 * scale / mean).exp() * norm_cdf(-r * (x / mean + 1.0))
    };
    norm_cdf(r * (x / mean - 1.0)) + second
}

/// Relative error with an absolute floor for values near zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Central finite-difference gradient.
pub fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub const FIXTURE_SEED: u64 = 2009;

pub fn fixture_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/synthetic_2530.csv")
}

pub fn fixture() -> levyjump::features::PriceSeries {
    levyjump::features::ingest_csv(&fixture_path(), &Default::default()).expect("bundled fixture")
}
