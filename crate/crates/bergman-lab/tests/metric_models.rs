use bergman_lab::cutoff::CutoffProfile;
use bergman_lab::metric_models::*;
use bergman_lab::quadrature::{angular_modes, integrate_disc, LogScalar, QuadSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fs_g(z: Complex64) -> f64 {
    1.0 / (2.0 * PI * (1.0 + z.norm_sqr()).powi(2))
}

/// `(1/2π)∂∂̄ log a + g` relative to `g`, from a Richardson-refined
/// five-point Laplacian with step scaled to the local length. The factor
/// balances truncation against the rounding of tabulated radial weights.
fn compatibility(model: &dyn MetricModel, z: Complex64) -> f64 {
    let g = model.metric_coeff(z);
    let h = 5e-3 * (1.0f64).min(z.norm().max(1e-3)).min(1.0 / (2.0 * g).sqrt());
    let lap = |h: f64| {
        let l = |dx: f64, dy: f64| model.log_weight(z + c(dx, dy));
        (l(h, 0.0) + l(-h, 0.0) + l(0.0, h) + l(0.0, -h) - 4.0 * l(0.0, 0.0)) / (h * h)
    };
    let refined = (4.0 * lap(0.5 * h) - lap(h)) / 3.0;
    (refined / (8.0 * PI) + g).abs() / g
}

#[test]
fn fs_weight_and_volume() {
    let fs = fubini_study();
    assert_eq!(fs.log_weight(c(0.0, 0.0)), 0.0);
    let vol = integrate_disc(|z| LogScalar::from_f64(2.0 * fs.metric_coeff(z)), f64::INFINITY, &QuadSpec::default())
        .unwrap();
    assert!((vol.value.to_f64() - 1.0).abs() < 1e-10, "{}", vol.value.to_f64());
}

#[test]
fn fs_compatibility_from_jet() {
    let fs = fubini_study();
    let z = c(0.7, 0.2);
    let j = metric_jet(&fs, z);
    assert!((j.g / fs_g(z) - 1.0).abs() < 1e-8);
    assert!((fs.metric_coeff(z) / fs_g(z) - 1.0).abs() < 1e-14);
}

#[test]
fn flat_gaussian_definition() {
    let flat = flat_gaussian(8.0).unwrap();
    assert_eq!(flat.log_weight(c(0.0, 0.0)), 0.0);
    for z in [c(0.3, -0.4), c(2.0, 1.0), c(-5.0, 0.5)] {
        assert!((flat.log_weight(z) + PI * z.norm_sqr()).abs() < 1e-12);
        // −(1/2π)∂∂̄ log a = 1/2
        assert!((metric_jet(&flat, z).g - 0.5).abs() < 1e-14);
        assert_eq!(curvature_at(&flat, z), 0.0);
    }
}

#[test]
fn flat_gaussian_mass() {
    let flat = flat_gaussian(8.0).unwrap();
    let m = 7.0;
    let r = flat.chart_radius();
    let out = integrate_disc(|z| LogScalar::from_ln(m * flat.log_weight(z)), r, &QuadSpec::default()).unwrap();
    let exact = -(-m * PI * r * r).exp_m1() / m;
    assert!((out.value.to_f64() / exact - 1.0).abs() < 1e-10);
}

#[test]
fn sharp_example_reduces_to_fs() {
    let sh = sharp_example(CutoffProfile::default()).unwrap();
    let fs = fubini_study();
    assert_eq!(sh.log_weight(c(0.0, 0.0)), 0.0);
    for z in [c(1.0, 0.0), c(0.0, -1.3), c(2.0, 2.0)] {
        assert!((sh.log_weight(z) + (1.0 + z.norm_sqr()).ln()).abs() < 1e-14);
        assert!((curvature_at(&sh, z) - curvature_at(&fs, z)).abs() < 1e-12);
    }
    // The perturbation vanishes to fourth order at the origin.
    let o = c(0.0, 0.0);
    assert!((sh.metric_coeff(o) - 1.0 / (2.0 * PI)).abs() < 1e-15);
    assert!((metric_jet(&sh, o).g - 1.0 / (2.0 * PI)).abs() < 1e-14);
    assert!(compatibility(&sh, c(1e-2, 0.0)) < 1e-6);
}

#[test]
fn fs_curvature_constant() {
    let fs = fubini_study();
    assert!((curvature_at(&fs, c(0.0, 0.0)) - 1.0 / PI).abs() < 1e-13);
    for z in [c(0.5, 0.5), c(-1.0, 3.0)] {
        assert!((gaussian_curvature(&fs, z) - 4.0 * PI).abs() < 1e-9);
    }
}

#[test]
fn neck_volume_between_two_and_twenty_pi() {
    for n in [2, 3] {
        let v = neck_family(n, CutoffProfile::default()).unwrap().raw_volume();
        assert!(v > 2.0 * PI && v < 20.0 * PI, "n = {n}: {v}");
    }
}

#[test]
fn neck_sectional_curvature_within_hundred_pi() {
    let neck = neck_family(2, CutoffProfile::default()).unwrap();
    let (lo, hi) = neck.table_range();
    let steps = ((hi - lo) * 256.0) as usize;
    let worst = (0..=steps)
        .map(|i| neck.raw_gaussian_curvature(lo + i as f64 / 256.0).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 100.0 * PI, "max |sec| = {worst:.1}, limit {:.1}", 100.0 * PI);
}

#[test]
fn neck_is_radial() {
    let neck = neck_family(2, CutoffProfile::default()).unwrap();
    for r in [0.2, 1.0, 3.0] {
        let base = neck.metric_coeff(c(r, 0.0));
        for k in 1..8 {
            let z = Complex64::from_polar(r, k as f64 * 0.7);
            assert!((neck.metric_coeff(z) / base - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn oscillation_potential() {
    for k in [8, 12, 16] {
        let m = oscillation_family(k, CutoffProfile::default()).unwrap();
        assert_eq!(m.phi(c(0.0, 0.0)), 0.0);
        let bound = (k as f64).powi(-4);
        for i in 0..200 {
            let z = Complex64::from_polar(i as f64 / 199.0 * 1.1, i as f64 * 0.37);
            assert!(m.phi(z).abs() <= bound);
        }
    }
}

#[test]
fn low_frequency_oscillation_is_rejected() {
    assert!(oscillation_family(1, CutoffProfile::default()).is_err());
}

#[test]
fn registry_builds_every_model() {
    for info in registry() {
        let m = build_model(info.name, &Default::default()).unwrap();
        assert_eq!(m.name(), info.name);
        assert!(m.metric_coeff(c(0.1, 0.05)) > 0.0);
    }
}

fn all_models() -> Vec<Box<dyn MetricModel>> {
    registry()
        .iter()
        .map(|i| build_model(i.name, &Default::default()).unwrap())
        .collect()
}

fn radial_modes_vanish(model: &dyn MetricModel, r: f64) -> f64 {
    let modes = angular_modes(
        |t| LogScalar::from_f64(model.metric_coeff(Complex64::from_polar(r, t))),
        8,
        &QuadSpec::default(),
    )
    .unwrap();
    let base = modes[0].to_complex().norm();
    modes[1..].iter().map(|m| m.to_complex().norm() / base).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn compatibility_at_random_points(r in 0.05f64..0.95, theta in 0.0f64..(2.0 * PI)) {
        let z = Complex64::from_polar(r, theta);
        for m in all_models() {
            let res = compatibility(m.as_ref(), z);
            prop_assert!(res < 1e-6, "{} at {z}: {res:e}", m.name());
        }
    }

    #[test]
    fn radial_models_have_no_angular_modes(r in 0.05f64..3.0) {
        for m in all_models().iter().filter(|m| m.symmetry() == Symmetry::Radial) {
            let r = r.min(0.99 * m.chart_radius());
            prop_assert!(radial_modes_vanish(m.as_ref(), r) < 1e-12, "{}", m.name());
        }
    }
}

/// `max |∇g(x) − ∇g(y)| / (|x−y|·|log|x−y||)` over pairs closer than 0.1 on
/// radial lines through the perturbation, sampled with spacing `h`.
fn log_lipschitz(model: &dyn MetricModel, h: f64) -> f64 {
    let n = (1.2 / h) as usize;
    let width = (0.1 / h) as usize;
    let mut worst: f64 = 0.0;
    for theta in [0.0, 0.4, 1.1, PI] {
        let e = Complex64::from_polar(1.0, theta);
        let grads: Vec<Complex64> = (0..=n)
            .map(|i| metric_jet(model, e * (i as f64 * h)).real_gradient())
            .collect();
        for a in 0..=n {
            for b in a + 1..=(a + width).min(n) {
                let d = (b - a) as f64 * h;
                if d < 0.1 {
                    worst = worst.max((grads[a] - grads[b]).norm() / (d * d.ln().abs()));
                }
            }
        }
    }
    worst
}

#[test]
fn sharp_gradient_is_log_lipschitz() {
    // The cutoff edge carries a Hessian of order 200 on a scale below 10⁻³,
    // so the sup settles once the spacing resolves it.
    let sh = sharp_example(CutoffProfile::default()).unwrap();
    let (coarse, fine) = (log_lipschitz(&sh, 2e-4), log_lipschitz(&sh, 1e-4));
    assert!(coarse.is_finite() && fine.is_finite());
    assert!((fine / coarse - 1.0).abs() < 0.2, "{coarse} → {fine}");
}
