use bergman_lab::cutoff::CutoffProfile;
use bergman_lab::metric_models::*;
use bergman_lab::peak_sections::*;
use bergman_lab::quadrature::QuadSpec;
use proptest::prelude::*;
use std::f64::consts::PI;

fn quad() -> QuadSpec {
    QuadSpec::default()
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Regularized lower incomplete gamma `P(p+1, x) = 1 − e^{−x} Σ_{k≤p} x^k/k!`.
fn lower_gamma(p: usize, x: f64) -> f64 {
    let mut term = 1.0;
    let mut s = 1.0;
    for k in 1..=p {
        term *= x / k as f64;
        s += term;
    }
    1.0 - (-x).exp() * s
}

/// `∫_{|w|≤c} |w|^{2p} e^{−πm|w|²} dA`.
fn flat_mass(p: usize, m: usize, c: f64) -> f64 {
    let mf = m as f64;
    fact(p) / (PI.powi(p as i32) * mf.powi(p as i32 + 1)) * lower_gamma(p, PI * mf * c * c)
}

#[test]
fn flat_masses_match_incomplete_gamma() {
    let flat = flat_gaussian(8.0).unwrap();
    for m in [16, 100, 1000] {
        for p in 0..5 {
            let spec = PeakSpec::new(p, m);
            let l = lambda_inv_sq(&flat, &spec, &quad()).unwrap();
            let exact = flat_mass(p, m, spec.cutoff_radius());
            assert!((l.to_f64() / exact - 1.0).abs() < 1e-9, "m = {m}, p = {p}");
        }
    }
}

#[test]
fn flat_masses_scale_with_degree() {
    // λ_p⁻²(2m, c/√2)·2^{p+1} = λ_p⁻²(m, c) since the weight depends on m|w|².
    let flat = flat_gaussian(8.0).unwrap();
    for p in 0..4 {
        let a = lambda_inv_sq(&flat, &PeakSpec::new(p, 64).with_cutoff(0.3), &quad()).unwrap();
        let b = lambda_inv_sq(&flat, &PeakSpec::new(p, 128).with_cutoff(0.3 / 2f64.sqrt()), &quad()).unwrap();
        assert!((b.log_mag + (p as f64 + 1.0) * 2f64.ln() - a.log_mag).abs() < 1e-9);
    }
}

#[test]
fn doubling_the_cutoff_adds_the_gaussian_shell() {
    let flat = flat_gaussian(8.0).unwrap();
    let (m, p, c) = (100, 2, 0.15);
    let inner = lambda_inv_sq(&flat, &PeakSpec::new(p, m).with_cutoff(c), &quad()).unwrap().to_f64();
    let outer = lambda_inv_sq(&flat, &PeakSpec::new(p, m).with_cutoff(2.0 * c), &quad()).unwrap().to_f64();
    let shell = ln_gaussian_tail(p, m, c).exp() - ln_gaussian_tail(p, m, 2.0 * c).exp();
    assert!(((outer - inner) / shell - 1.0).abs() < 1e-8);
    assert!((ln_gamma_tail(p, 3.0) - (1.0 - lower_gamma(p, 3.0)).ln()).abs() < 1e-13);
}

#[test]
fn masses_are_positive() {
    let sh = sharp_example(CutoffProfile::default()).unwrap();
    for p in 0..4 {
        let l = lambda_inv_sq(&sh, &PeakSpec::new(p, 256), &quad()).unwrap();
        assert!(l.log_mag.is_finite());
        assert!((l.phase.re - 1.0).abs() < 1e-12 && l.phase.im.abs() < 1e-12);
    }
}

#[test]
fn mass_residuals_are_bounded() {
    let ms = [64, 128, 256, 512, 1024];
    let fs = fubini_study();
    let sh = sharp_example(CutoffProfile::default()).unwrap();
    let t = check_peak_mass(&fs, 0, &ms, &quad()).unwrap();
    assert!(t.verdict.bounded, "{:?}", t.verdict);
    // On the sphere m·|m λ₀⁻² − 1| tends to one.
    assert!((t.rows.last().unwrap().residual - 1.0).abs() < 0.05);
    let t = check_peak_mass(&sh, 1, &ms, &quad()).unwrap();
    assert!(t.verdict.bounded, "{:?}", t.verdict);
}

#[test]
fn radial_overlaps_vanish() {
    let fs = fubini_study();
    for (p, q) in [(0, 1), (0, 2), (1, 3)] {
        let o = peak_overlap(&fs, 256, p, q, None, &quad()).unwrap();
        assert!(o.to_complex().norm() < 1e-13);
    }
}

#[test]
fn sharp_first_overlap_approaches_its_limit() {
    let sh = sharp_example(CutoffProfile::default()).unwrap();
    let limit = -15.0 * PI.sqrt() / 6400.0;
    let o = peak_overlap(&sh, 1024, 0, 1, None, &quad()).unwrap().to_complex() * 1024.0;
    assert!((o.re / limit - 1.0).abs() < 0.1, "{o}");
    assert!(o.im.abs() < 1e-12);
}

#[test]
fn higher_overlaps_are_bounded() {
    let sh = sharp_example(CutoffProfile::default()).unwrap();
    for (p, q) in [(0, 2), (1, 3)] {
        let (rows, v) = overlap_sweep(&sh, p, q, &[64, 128, 256, 512], &quad()).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(v.bounded, "({p},{q}): {v:?}");
    }
}

#[test]
fn invalid_requests_are_rejected() {
    let fs = fubini_study();
    assert!(peak_overlap(&fs, 64, 1, 1, None, &quad()).is_err());
    assert!(lambda_inv_sq(&fs, &PeakSpec::new(0, 4), &quad()).is_err());
    let flat = flat_gaussian(1.0).unwrap();
    assert!(lambda_inv_sq(&flat, &PeakSpec::new(0, 64).with_cutoff(5.0), &quad()).is_err());
}

#[test]
fn chart_scale_normalizes_the_volume() {
    assert!((chart_scale(&fubini_study()) - (1.0 / PI).sqrt()).abs() < 1e-15);
    assert!((chart_scale(&flat_gaussian(8.0).unwrap()) - 1.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn overlaps_are_hermitian(m in 16usize..512, p in 0usize..4, d in 1usize..4) {
        let sh = sharp_example(CutoffProfile::default()).unwrap();
        let q = p + d;
        let a = peak_overlap(&sh, m, p, q, None, &quad()).unwrap().to_complex();
        let b = peak_overlap(&sh, m, q, p, None, &quad()).unwrap().to_complex();
        prop_assert!((a - b.conj()).norm() <= 1e-12 + 1e-9 * a.norm());
    }
}
