use std::f64::consts::PI;

use riesz_eq::quadrature::{arcsine_weighted_integrate, gauss_legendre_integrate, QuadSpec};
use riesz_eq::riesz::*;
use riesz_eq::specfun::gamma_fn;

fn params(d: u32, s: f64) -> RieszParams {
    RieszParams::new(d, s).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn kernel_examples() {
    assert_eq!(kernel(&params(3, 0.0), 1.0).unwrap(), 0.0);
    assert_eq!(kernel(&params(3, 2.0), 2.0).unwrap(), 0.25);
    assert_eq!(kernel(&params(2, -1.0), 2.0).unwrap(), -2.0);
    assert!(kernel(&params(2, -1.0), 0.0).is_err());
}

#[test]
fn params_validation() {
    assert!(RieszParams::new(0, 1.0).is_err());
    assert!(RieszParams::new(2, -2.0).is_err());
    assert!(RieszParams::new(2, f64::NAN).is_err());
    assert!(params(3, 0.0).is_integrable());
    assert!(params(3, 2.9).is_integrable());
    assert!(!params(3, 3.0).is_integrable());
    let regime = RieszParams::field_regime(5).unwrap();
    assert_eq!(regime.s(), 2.0);
    assert!(regime.is_field_regime());
    assert!(RieszParams::field_regime(1).is_err());
    assert!(ProblemSpec::new(regime, -1.0, 1.0).is_err());
    assert!(ProblemSpec::new(regime, 1.0, 0.0).is_err());
}

#[test]
fn laplacian_constant_examples() {
    assert_eq!(laplacian_constant(&params(3, 0.0)).unwrap(), 1.0);
    assert_eq!(laplacian_constant(&params(2, -1.0)).unwrap(), 1.0);
    assert_eq!(laplacian_constant(&params(5, 2.0)).unwrap(), 2.0);
    assert!(laplacian_constant(&params(4, 2.0)).is_err());
}

#[test]
fn critical_radius_factor_matches_laplacian_constant() {
    for d in 2..=12u32 {
        let c = laplacian_constant(&RieszParams::field_regime(d).unwrap()).unwrap();
        assert_eq!(c, (d as f64 - 3.0).abs().max(1.0), "d = {d}");
    }
}

#[test]
fn sphere_area_examples() {
    assert!(rel(sphere_area(2).unwrap(), 2.0 * PI) < 1e-15);
    assert!(rel(sphere_area(3).unwrap(), 4.0 * PI) < 1e-15);
    assert!(rel(sphere_area(4).unwrap(), 2.0 * PI * PI) < 1e-15);
}

#[test]
fn tau_examples_and_normalization() {
    assert!(rel(tau(2).unwrap(), 1.0 / PI) < 1e-15);
    assert!(rel(tau(3).unwrap(), 0.5) < 1e-15);
    assert!(rel(tau(4).unwrap(), 2.0 / PI) < 1e-15);
    let gl = QuadSpec::gauss_legendre(64).unwrap();
    for d in 2..=10u32 {
        let integral = gauss_legendre_integrate(|t: f64| t.sin().powi(d as i32 - 2), 0.0, PI, &gl).unwrap();
        assert!((tau(d).unwrap() * integral - 1.0).abs() < 1e-10, "d = {d}");
    }
}

#[test]
fn critical_radius_table() {
    assert!((critical_radius(2, 1.0).unwrap() - PI / 8.0).abs() < 1e-15);
    assert!((critical_radius(3, 1.0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    assert!((critical_radius(4, 1.0).unwrap() - (0.75 * PI).powf(1.0 / 3.0) / 2.0).abs() < 1e-15);
    assert!((critical_radius(2, 2.0).unwrap() - PI / 16.0).abs() < 1e-15);
    assert!(critical_radius(1, 1.0).is_err());
    assert!(critical_radius(3, 0.0).is_err());
}

#[test]
fn critical_radius_extremes() {
    let radii: Vec<(u32, f64)> = (2..=64).map(|d| (d, critical_radius(d, 1.0).unwrap())).collect();
    let min = radii.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let max = radii.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(min.0, 2);
    assert!((min.1 - std::f64::consts::FRAC_PI_8).abs() < 1e-14);
    assert_eq!(max.0, 16);
    assert!((max.1 - 1.04747).abs() < 1e-5, "{}", max.1);
}

#[test]
fn critical_radius_decreases_beyond_sixteen() {
    let mut prev = critical_radius(16, 1.0).unwrap();
    for d in 17..=200 {
        let r = critical_radius(d, 1.0).unwrap();
        assert!(r < prev && r > 1.0, "d = {d}");
        prev = r;
    }
}

#[test]
#[ignore = "R(200) = 1.0109; the 1e-2 proximity to the d -> infinity limit is not reached until d ≈ 230"]
fn critical_radius_within_one_percent_of_limit_at_200() {
    let r = critical_radius(200, 1.0).unwrap();
    assert!((r - 1.0).abs() <= 1e-2, "R(200) = {r}");
}

#[test]
fn w_constant_examples() {
    assert!(rel(w_constant(3, 1.0).unwrap(), 2.0) < 1e-15);
    assert!(rel(w_constant(2, 1.0).unwrap(), PI / 2.0) < 1e-15);
    // W_1 = C_{d,1} |S^{d-1}| ∫₀¹ r^{d-1-(s+2)} / √(1-r²) dr with s = d - 3
    let d = 4u32;
    let c = gamma_fn(2.5).unwrap() / PI.powf(2.5);
    let radial = arcsine_weighted_integrate(|_| 1.0, &QuadSpec::arcsine_weighted(16).unwrap()).unwrap();
    let w1 = c * sphere_area(d).unwrap() * radial;
    assert!(rel(w_constant(d, 2.0).unwrap(), w1 / 8.0) < 1e-14);
}

fn fd_laplacian(p: &RieszParams, x: &[f64], h: f64) -> f64 {
    let k = |y: &[f64]| kernel(p, y.iter().map(|c| c * c).sum::<f64>().sqrt()).unwrap();
    let centre = k(x);
    let mut y = x.to_vec();
    let mut total = 0.0;
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let plus = k(&y);
        y[i] = x[i] - h;
        let minus = k(&y);
        y[i] = x[i];
        total += plus - 2.0 * centre + minus;
    }
    total / (h * h)
}

fn test_points(d: usize) -> Vec<Vec<f64>> {
    // five directions scaled to |x| ∈ [0.5, 2]
    (0..5)
        .map(|k| {
            let dir: Vec<f64> = (0..d).map(|i| ((k * d + i) as f64 * 0.7 + 0.3).sin()).collect();
            let n = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
            let r = 0.5 + 0.375 * k as f64;
            dir.iter().map(|c| c / n * r).collect()
        })
        .collect()
}

#[test]
fn laplacian_relation_by_finite_differences() {
    for (d, s) in [(4u32, 1.0), (5, 2.0), (6, 0.0), (3, -1.0), (4, 0.5)] {
        let p = params(d, s);
        let c = laplacian_constant(&p).unwrap();
        let p2 = params(d, s + 2.0);
        for x in test_points(d as usize) {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let expected = -c * kernel(&p2, r).unwrap();
            let fd = fd_laplacian(&p, &x, 1e-4);
            assert!(
                rel(fd, expected) < 1e-5,
                "(d, s) = ({d}, {s}), |x| = {r}: {fd} vs {expected}"
            );
        }
    }
}
