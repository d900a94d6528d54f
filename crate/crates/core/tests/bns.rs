//! Refined BN-S model against exact conditional simulation and closed forms.

use levyjump::bns::*;
use levyjump::levy::InverseGaussianParams;
use levyjump::quadrature::QuadratureSpec;
use levyjump::Seed;
use num_complex::Complex64;
use rand_distr::{Distribution, InverseGaussian, Poisson};

mod common;
use common::{exact_x_end, mean_se, var_se};

fn params(theta: f64) -> BnsParams {
    BnsParams { mu: 0.05, beta: -0.5, rho: -0.3, lambda: 1.5, theta, sigma0_sq: 0.04 }
}

fn subs() -> (SubordinatorSpec, SubordinatorSpec) {
    let z = SubordinatorSpec::inverse_gaussian(InverseGaussianParams::new(0.02, 0.05).unwrap(), 2.0).unwrap();
    let zb = SubordinatorSpec::inverse_gaussian(InverseGaussianParams::new(0.08, 0.2).unwrap(), 2.0).unwrap();
    (z, zb)
}

fn state() -> ConditionalState {
    ConditionalState { t: 0.5, t_end: 1.5, x_t: 0.1, sigma_t_sq: 0.05 }
}

#[test]
fn transform_at_zero_is_one() {
    let (z, zb) = subs();
    let phi = laplace_transform(Complex64::new(0.0, 0.0), &params(0.4), &z, &zb, &state(), &QuadratureSpec::default()).unwrap();
    assert_eq!(phi, Complex64::new(1.0, 0.0));
}

#[test]
fn transform_matches_exact_monte_carlo() {
    let (z, zb) = subs();
    let p = params(0.4);
    let st = state();
    let n = 100_000;
    let mut rng = Seed(77).rng();
    let draws: Vec<f64> = (0..n).map(|_| exact_x_end(&p, &z, &zb, &st, &mut rng)).collect();
    let (lower, upper) = strip_bounds(&p, st.t, st.t_end, effective_abscissa(&z, &zb, p.theta)).unwrap();
    let zs = [-4.0, -3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0, 4.0];
    for &zr in &zs {
        assert!(lower < zr && zr < upper, "{zr} outside ({lower}, {upper})");
        let phi = laplace_transform(Complex64::new(zr, 0.0), &p, &z, &zb, &st, &QuadratureSpec::default()).unwrap();
        let vals: Vec<f64> = draws.iter().map(|x| (zr * x).exp()).collect();
        let (m, se) = mean_se(&vals);
        assert!(phi.im == 0.0);
        assert!((phi.re - m).abs() <= 3.0 * se, "z = {zr}: {} vs {m} ± {se}", phi.re);
    }
}

#[test]
fn characteristic_function_bounded() {
    let (z, zb) = subs();
    let p = params(0.7);
    for y in [-40.0, -7.5, -1.0, 0.3, 2.0, 12.0, 60.0] {
        let phi = laplace_transform(Complex64::new(0.0, y), &p, &z, &zb, &state(), &QuadratureSpec::default()).unwrap();
        assert!(phi.norm() <= 1.0 + 1e-12, "y = {y}: {phi}");
    }
}

#[test]
fn strip_contains_zero_and_guards_transform() {
    let (z, zb) = subs();
    let st = state();
    for theta in [0.0, 0.2, 0.5, 0.9, 1.0] {
        let p = params(theta);
        let hat = effective_abscissa(&z, &zb, theta);
        let (lower, upper) = strip_bounds(&p, st.t, st.t_end, hat).unwrap();
        assert!(lower < 0.0 && 0.0 < upper, "theta {theta}: ({lower}, {upper})");
        let spec = QuadratureSpec::default();
        let inside = laplace_transform(Complex64::new(0.999 * upper, 1.0), &p, &z, &zb, &st, &spec);
        assert!(inside.is_ok(), "theta {theta}: {inside:?}");
        let outside = laplace_transform(Complex64::new(1.001 * upper, 0.0), &p, &z, &zb, &st, &spec);
        assert!(
            matches!(outside, Err(BnsError::OutsideStrip { .. }) | Err(BnsError::Divergence { .. })),
            "theta {theta}: {outside:?}"
        );
        let below = laplace_transform(Complex64::new(1.001 * lower, 0.0), &p, &z, &zb, &st, &spec);
        assert!(below.is_err(), "theta {theta}: {below:?}");
    }
}

#[test]
fn cumulant_matches_monte_carlo() {
    let (z, _) = subs();
    let law = InverseGaussian::new(z.params.mean, z.params.scale).unwrap();
    let mut rng = Seed(5).rng();
    let totals: Vec<f64> = (0..100_000)
        .map(|_| {
            let count = Poisson::new(z.rate).unwrap().sample(&mut rng) as usize;
            (0..count).map(|_| law.sample(&mut rng)).sum()
        })
        .collect();
    for c in [-20.0, -3.0, 5.0, 30.0] {
        let k = z.cumulant(Complex64::new(c, 0.0)).unwrap();
        let vals: Vec<f64> = totals.iter().map(|x| (c * x).exp()).collect();
        let (m, se) = mean_se(&vals);
        assert!((k.re.exp() - m).abs() <= 3.0 * se, "c = {c}: {} vs {m} ± {se}", k.re.exp());
    }
}

#[test]
fn classical_model_distribution() {
    // θ = 0 reduces to the single-subordinator model; compare the Euler
    // scheme to exact simulation of X_T from time 0
    let (z, zb) = subs();
    let p = BnsParams { theta: 0.0, ..params(0.0) };
    let grid = PathGrid::new(0.0, 1.0, 500).unwrap();
    let n = 20_000;
    let euler: Vec<f64> = simulate_paths(&p, &z, &zb, &grid, n, Seed(11))
        .unwrap()
        .iter()
        .map(|path| *path.x.last().unwrap())
        .collect();
    let st = ConditionalState { t: 0.0, t_end: 1.0, x_t: 0.0, sigma_t_sq: p.sigma0_sq };
    let mut rng = Seed(12).rng();
    let exact: Vec<f64> = (0..n).map(|_| exact_x_end(&p, &z, &zb, &st, &mut rng)).collect();
    let ((m1, s1), (m2, s2)) = (mean_se(&euler), mean_se(&exact));
    assert!((m1 - m2).abs() <= 3.0 * s1.hypot(s2), "mean {m1} vs {m2}");
    let ((v1, e1), (v2, e2)) = (var_se(&euler), var_se(&exact));
    assert!((v1 - v2).abs() <= 3.0 * e1.hypot(e2), "variance {v1} vs {v2}");
}

#[test]
fn euler_variance_tracks_closed_form() {
    let (z, zb) = subs();
    let p = params(0.6);
    let grid = PathGrid::new(0.0, 2.0, 20_000).unwrap();
    for s in 0..5 {
        let path = simulate_path(&p, &z, &zb, &grid, Seed(300 + s));
        let total_jumps: f64 = path.jumps.jumps.iter().map(|j| p.weight(j.source) * j.size).sum();
        let tol = p.lambda * grid.dt() * total_jumps + 1e-12;
        for k in (0..=grid.steps).step_by(97) {
            let want = sigma_sq_closed_form(&path.jumps, &p, path.t[k]);
            assert!((path.sigma_sq[k] - want).abs() <= tol, "step {k}: {} vs {want}", path.sigma_sq[k]);
        }
        let iv = integrated_variance(p.sigma0_sq, &path.jumps, &p, 0.0, 2.0).unwrap();
        let trap = path.trapezoid_variance();
        assert!((iv - trap).abs() <= 1e-3 * iv, "{iv} vs {trap}");
    }
}

#[test]
fn correlation_reduces_to_time_ratio() {
    let (z, zb) = subs();
    let p = BnsParams { rho: 0.0, ..params(0.3) };
    let level = 0.07;
    for (s, t) in [(0.2, 1.0), (1.0, 4.0), (2.5, 2.6)] {
        let inputs = CorrelationInputs { int_var_s: level * s, int_var_t: level * t, small_jump_qv_s: 0.4, large_jump_qv_s: 0.9 };
        let c = correlation(&p, &z, &zb, s, t, &inputs).unwrap();
        assert!((c - (s / t).sqrt()).abs() < 1e-10, "{c}");
    }
}

#[test]
fn correlation_decays_with_lag() {
    let (z, zb) = subs();
    let p = params(0.5);
    let grid = PathGrid::new(0.0, 3.0, 3000).unwrap();
    let path = simulate_path(&p, &z, &zb, &grid, Seed(8));
    let s = 0.5;
    let mut last = 1.0;
    for t in [0.75, 1.0, 1.5, 2.0, 3.0] {
        let c = correlation(&p, &z, &zb, s, t, &CorrelationInputs::from_path(&path, s, t)).unwrap();
        assert!(c > 0.0 && c < last, "t = {t}: {c} after {last}");
        last = c;
    }
    assert!(correlation(&p, &z, &zb, 1.0, 1.0, &CorrelationInputs::from_path(&path, 1.0, 1.0)).is_err());
}

#[test]
fn correlation_tracks_monte_carlo_without_leverage() {
    // ρ = 0, near-constant σ²: sample correlation ≈ √(s/t)
    let small = SubordinatorSpec::inverse_gaussian(InverseGaussianParams::new(1e-6, 1e-5).unwrap(), 1.0).unwrap();
    let large = SubordinatorSpec::inverse_gaussian(InverseGaussianParams::new(2e-6, 1e-5).unwrap(), 1.0).unwrap();
    let p = BnsParams { mu: 0.0, beta: 0.0, rho: 0.0, lambda: 1e-6, theta: 0.5, sigma0_sq: 0.04 };
    let grid = PathGrid::new(0.0, 1.0, 100).unwrap();
    let mc = correlation_monte_carlo(&p, &small, &large, &grid, 0.25, 1.0, 20_000, Seed(4)).unwrap();
    assert!((mc - 0.5).abs() < 0.03, "{mc}");
}

#[test]
fn paths_reproducible() {
    let (z, zb) = subs();
    let grid = PathGrid::new(0.0, 1.0, 200).unwrap();
    let a = simulate_paths(&params(0.4), &z, &zb, &grid, 8, Seed(1)).unwrap();
    let b = simulate_paths(&params(0.4), &z, &zb, &grid, 8, Seed(1)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a[0], a[1]);
    let mut buf = Vec::new();
    a[0].write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,X,sigma_sq\n"));
    assert_eq!(text.lines().count(), 202);
}

#[test]
fn correlation_formula_matches_monte_carlo_with_leverage() {
    // with β = 0, Var(X_s) = E∫σ² + ρ²λs Σ w²Var(Z₁), so the formula at the
    // expected inputs is the true correlation
    let small = SubordinatorSpec::inverse_gaussian(InverseGaussianParams::new(0.1, 0.3).unwrap(), 2.0).unwrap();
    let large = SubordinatorSpec::inverse_gaussian(InverseGaussianParams::new(0.3, 0.5).unwrap(), 2.0).unwrap();
    let theta = 0.5;
    let level = (1.0 - theta) * small.intensity() + theta * large.intensity();
    let p = BnsParams { mu: 0.0, beta: 0.0, rho: -0.5, lambda: 1.0, theta, sigma0_sq: level };
    let (s, t) = (0.5, 2.0);
    let grid = PathGrid::new(0.0, t, 800).unwrap();
    let n = 20_000;
    let mc = correlation_monte_carlo(&p, &small, &large, &grid, s, t, n, Seed(21)).unwrap();
    let qv = |sub: &SubordinatorSpec, u: f64| p.lambda * u * sub.unit_variance();
    let inputs = CorrelationInputs {
        int_var_s: level * s,
        int_var_t: level * t,
        small_jump_qv_s: qv(&small, s),
        large_jump_qv_s: qv(&large, s),
    };
    let formula = correlation(&p, &small, &large, s, t, &inputs).unwrap();
    let se = (1.0 - formula * formula) / (n as f64).sqrt();
    assert!((mc - formula).abs() <= 3.0 * se, "{mc} vs {formula} ± {se}");
}
