use bergman_lab::fourier_bounds::*;
use bergman_lab::metric_models::fubini_study;
use bergman_lab::quadrature::QuadSpec;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::{E, PI};

fn quad() -> QuadSpec {
    QuadSpec::default()
}

fn re_power(n: u32) -> TestFunction<'static> {
    let order = if n >= 4 { 3 } else { 1 };
    TestFunction::new(format!("re_z{n}"), move |z: Complex64| z.powu(n).re, Some(Box::new(|_| 0.0)), order, 0.5)
        .unwrap()
}

#[test]
fn profiles_of_the_builtins() {
    let r = [0.05, 0.2, 0.45];
    let cases: [(TestFunction, usize, fn(f64) -> f64); 4] = [
        (TestFunction::modulus_squared(), 0, |r| 2.0 * PI * r * r),
        (TestFunction::re_z_squared(), 2, |r| PI * r * r),
        (TestFunction::log_quadratic(), 2, |r| PI * r * r * r.ln()),
        (TestFunction::log_quartic(), 4, |r| PI * r.powi(4) * r.ln()),
    ];
    for (tf, k, exact) in cases {
        let h = fourier_profile(&tf, k, &r, &quad()).unwrap();
        for (hi, ri) in h.iter().zip(r) {
            assert!((hi - exact(ri)).abs() < 1e-14, "{} at {ri}", tf.name);
        }
        let off = fourier_profile(&tf, k + 1, &r, &quad()).unwrap();
        assert!(off.iter().all(|v| v.abs() < 1e-14));
    }
}

#[test]
fn profile_outside_the_disc_is_rejected() {
    assert!(fourier_profile(&TestFunction::modulus_squared(), 0, &[0.6], &quad()).is_err());
}

#[test]
fn ode_with_known_right_sides() {
    let r: Vec<f64> = (1..=8).map(|i| 0.05 * i as f64).collect();
    let rows = ode_residual(&TestFunction::log_quadratic(), 2, &r, &quad()).unwrap();
    for row in &rows {
        assert!((row.rhs - 4.0 * PI).abs() < 1e-12);
        assert!(row.residual < 1e-6, "r = {}: {:e}", row.r, row.residual);
    }
    for row in ode_residual(&TestFunction::re_z_squared(), 2, &r, &quad()).unwrap() {
        // Rounding in the second difference dominates at small r.
        assert!(row.residual < 1e-7 && row.rhs.abs() < 1e-14, "{row:?}");
    }
    for row in ode_residual(&TestFunction::modulus_squared(), 0, &r, &quad()).unwrap() {
        assert!((row.rhs - 8.0 * PI).abs() < 1e-12 && row.residual < 1e-6);
    }
}

#[test]
fn ode_needs_a_laplacian_and_interior_radii() {
    let bare = TestFunction::new("bare", |z: Complex64| z.norm_sqr(), None, 1, 0.5).unwrap();
    assert!(ode_residual(&bare, 0, &[0.2], &quad()).is_err());
    assert!(ode_residual(&TestFunction::modulus_squared(), 0, &[0.4999], &quad()).is_err());
}

#[test]
fn log_quadratic_ratio_is_pi() {
    let b = check_bound(&TestFunction::log_quadratic(), 2, 0.3, &quad()).unwrap();
    assert_eq!(b.case, BoundCase::First);
    assert!((b.sup - PI).abs() < 1e-10);
    assert_eq!(b.samples.len(), BOUND_SAMPLES);
}

#[test]
fn log_quartic_ratio_is_pi() {
    let b = check_bound(&TestFunction::log_quartic(), 4, 1.0, &quad()).unwrap();
    assert_eq!(b.case, BoundCase::Third);
    assert!((b.sup - PI).abs() < 1e-10);
}

#[test]
fn first_mode_of_a_cubic_perturbation() {
    // (Re z)³ = r³(3cos θ + cos 3θ)/4, so h₁/r² = 3πr/4 peaks at r = 1/e.
    let tf = TestFunction::new("abs_z2_plus_re3", |z: Complex64| z.norm_sqr() + z.re.powi(3), None, 1, 0.5).unwrap();
    let b = check_bound(&tf, 1, 1.0, &quad()).unwrap();
    assert!((b.sup - 3.0 * PI / (4.0 * E)).abs() < 1e-10);
    assert!((b.r_at_sup - 1.0 / E).abs() < 1e-12);
}

#[test]
fn circle_free_modes_are_zero_at_k0() {
    let b = check_bound(&TestFunction::re_z_squared(), 0, 0.3, &quad()).unwrap();
    assert!(b.sup < 1e-10);
}

#[test]
fn declared_orders_are_checked() {
    assert!(TestFunction::new("shifted", |z: Complex64| 1.0 + z.re, None, 1, 0.5).is_err());
    assert!(TestFunction::new("linear", |z: Complex64| z.re, None, 1, 0.5).is_err());
    assert!(TestFunction::new("quadratic", |z: Complex64| z.norm_sqr(), None, 3, 0.5).is_err());
    assert!(TestFunction::new("order", |z: Complex64| z.norm_sqr(), None, 2, 0.5).is_err());
    let tf = TestFunction::modulus_squared();
    assert!((tf.k1 - 0.25).abs() < 1e-12);
    assert_eq!(tf.k2, Some(1.0));
}

#[test]
fn fubini_study_induced_functions() {
    let fs = fubini_study();
    let [psi, phi] = induced_functions(&fs).unwrap();
    assert!(psi.radial && phi.radial);
    let kappa = (1.0 / PI).sqrt();
    for r in [0.1, 0.3] {
        let w = Complex64::new(r, 0.0);
        let s = (r / kappa).powi(2);
        assert!((psi.eval(w) - (s - s.ln_1p())).abs() < 1e-14);
        assert!((phi.eval(w) - ((1.0 + s).powi(-2) - 1.0)).abs() < 1e-14);
    }
    let h = fourier_profile(&phi, 2, &[0.2], &quad()).unwrap();
    assert_eq!(h[0], 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profiles_are_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0usize..5, r in 0.05f64..0.45) {
        let f = |z: Complex64| z.norm_sqr() * z.re;
        let g = |z: Complex64| (z * z * z.conj()).im + z.norm_sqr().powi(2);
        let sum = TestFunction::new("sum", move |z| a * f(z) + b * g(z), None, 1, 0.5);
        prop_assume!(sum.is_ok());
        let hf = fourier_profile(&TestFunction::new("f", f, None, 1, 0.5).unwrap(), k, &[r], &quad()).unwrap()[0];
        let hg = fourier_profile(&TestFunction::new("g", g, None, 1, 0.5).unwrap(), k, &[r], &quad()).unwrap()[0];
        let hs = fourier_profile(&sum.unwrap(), k, &[r], &quad()).unwrap()[0];
        prop_assert!((hs - a * hf - b * hg).abs() < 1e-14);
    }

    #[test]
    fn harmonic_profiles_solve_the_homogeneous_ode(n in 2u32..7, r in 0.1f64..0.4) {
        let rows = ode_residual(&re_power(n), n as usize, &[r], &quad()).unwrap();
        prop_assert!(rows[0].residual < 1e-7, "n = {n}: {:e}", rows[0].residual);
    }
}
