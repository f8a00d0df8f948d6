use bergman_lab::cutoff::CutoffProfile;
use bergman_lab::examples_suite::*;
use bergman_lab::metric_models::*;
use bergman_lab::quadrature::QuadSpec;
use bergman_lab::section_space::GramSpec;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn quad() -> QuadSpec {
    QuadSpec { rel_tol: 1e-11, max_subdivisions: 400, ..QuadSpec::default() }
}

fn sharp() -> impl MetricModel {
    sharp_example(CutoffProfile::default()).unwrap()
}

fn sharp_report() -> &'static SharpReport {
    static R: OnceLock<SharpReport> = OnceLock::new();
    R.get_or_init(|| sharp_constants_report(&sharp(), &[256, 512], &GramSpec::default()).unwrap())
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x / target - 1.0).abs() < rel
}

#[test]
fn fubini_study_moment() {
    let mo = moment(&fubini_study(), 50, 1, 1, &quad()).unwrap();
    assert!((mo.value.to_f64() * 2550.0 - 1.0).abs() < 1e-10);
    assert!(mo.abs_error() < 1e-12);
}

#[test]
fn unperturbed_overlaps_vanish() {
    let flat = sharp_example_scaled(CutoffProfile::default(), 0.0).unwrap();
    for m in [64, 400] {
        let mo = moment(&flat, m, 1, 0, &quad()).unwrap();
        let scale = moment(&flat, m, 0, 0, &quad()).unwrap().value.to_f64();
        assert!(mo.value.to_complex().norm() < 1e-12 * scale);
    }
}

#[test]
fn leading_overlap_displayed_form() {
    let rows = sharp_overlap_asymptotics(&sharp(), &[400], 0, &quad()).unwrap();
    let r = &rows[0];
    assert!(r.displayed_ratio_minus_one.abs() < 0.05, "ratio − 1 = {:.3}", r.displayed_ratio_minus_one);
}

#[test]
fn leading_overlap_corrected_form() {
    // The corrected term leaves an O(1/m) relative remainder: it halves when m doubles.
    for k in 0..=3 {
        let rows = sharp_overlap_asymptotics(&sharp(), &[1024, 2048], k, &quad()).unwrap();
        let (a, b) = (rows[0].corrected_ratio_minus_one, rows[1].corrected_ratio_minus_one);
        assert!(a.abs() < 0.1, "k = {k}: {a:.3}");
        assert!((b / a - 0.5).abs() < 0.05, "k = {k}: {a:.3e} → {b:.3e}");
    }
}

#[test]
fn leading_norms() {
    let n0 = sharp_norm_asymptotics(&sharp(), &[400], 0, &quad()).unwrap();
    assert!(n0[0].ratio_minus_one.abs() < 0.01);
    let n2 = sharp_norm_asymptotics(&sharp(), &[400], 2, &quad()).unwrap();
    assert!(n2[0].ratio_minus_one.abs() < 0.02);
    assert!((norm_leading(2, 400) - 2.0 / 400f64.powi(3)).abs() < 1e-20);
}

#[test]
fn asymptotic_sweeps_validate_arguments() {
    assert!(sharp_overlap_asymptotics(&sharp(), &[400], 4, &quad()).is_err());
    assert!(sharp_norm_asymptotics(&sharp(), &[2], 1, &quad()).is_err());
}

#[test]
fn leading_terms_closed_forms() {
    let m = 100;
    // (4k−5)/1600 · Γ(k+5/2)/m^{k+5/2} at k = 0: Γ(5/2) = 3√π/4.
    let c0 = -5.0 / 1600.0 * 0.75 * PI.sqrt() / (m as f64).powf(2.5);
    assert!((overlap_leading_corrected(0, m) / c0 - 1.0).abs() < 1e-13);
    assert!((ln_double_factorial(7) - 105f64.ln()).abs() < 1e-14);
}

#[test]
fn richardson_on_exact_series() {
    let ms = [128, 256, 512];
    let qs: Vec<f64> = ms.iter().map(|&m| 2.5 - 0.7 / (m as f64).sqrt()).collect();
    let (limit, error, residual) = richardson(&ms, &qs);
    assert!((limit - 2.5).abs() < 1e-13 && error < 1e-13);
    assert!((residual - 0.7 / 512f64.sqrt()).abs() < 1e-13);
    let (_, e2, r2) = richardson(&ms[1..], &qs[1..]);
    assert_eq!(e2, r2);
}

#[test]
fn sharp_constants_displayed_values() {
    let last = sharp_report().last();
    assert!(within(last.m_beta01, sharp_limits::beta01_displayed(), 0.1), "m β₀₁ = {:.3e}", last.m_beta01);
    assert!(
        within(last.gradient_direct, sharp_limits::gradient_displayed(), 0.1),
        "√m ∂g = {:.3e}",
        last.gradient_direct
    );
}

#[test]
fn sharp_constants_corrected_values() {
    let r = sharp_report();
    let last = r.last();
    assert!(within(last.m_beta01, sharp_limits::beta01_corrected(), 0.1));
    assert!(within(last.gradient_direct, sharp_limits::gradient_corrected(), 0.1));
    assert!(within(last.gradient_perturbative, sharp_limits::gradient_corrected(), 0.1));
    // β₁₂ converges more slowly; check that it closes in.
    let c = sharp_limits::beta12_corrected();
    assert!((r.rows[1].m_beta12 - c).abs() < (r.rows[0].m_beta12 - c).abs());
    assert!(within(last.m_beta12, c, 0.2));
}

#[test]
fn sharp_paths_agree() {
    let r = sharp_report();
    assert!(r.all_agree());
    for row in &r.rows {
        assert!((row.gradient_direct - row.gradient_perturbative).abs() <= row.error_direct + row.error_perturbative);
        assert!(row.gradient_direct_im.abs() < 1e-12);
        assert!((row.m_beta01_gram / row.m_beta01 - 1.0).abs() < 1e-6);
    }
    assert!(r.extrapolated("gradient_direct").is_some());
}

#[test]
fn sharp_constants_reject_out_of_range_degrees() {
    assert!(sharp_constants(&sharp(), &[64, 128], &GramSpec::default()).is_err());
    assert!(sharp_constants(&sharp(), &[2048], &GramSpec::default()).is_err());
}

#[test]
fn neck_gap_lower_bound() {
    let spec = GramSpec::default();
    let gaps: Vec<NeckGap> = (1..=3).map(|n| neck_gap(n, 9, &spec).unwrap()).collect();
    for g in &gaps {
        assert!(g.bound_holds);
        assert!(g.bergman_normalized >= g.lower_bound);
        assert!((g.bergman_engine / g.bergman_normalized - 1.0).abs() < 1e-10);
        assert!(g.symmetry_defect < 1e-10);
        assert!((g.lower_bound - 1.0 / (400.0 * PI)).abs() < 1e-16);
    }
    assert!(gaps.windows(2).all(|w| w[1].metric_value < w[0].metric_value));
    assert!(neck_gap(2, 8, &spec).is_err());
}

#[test]
fn cusp_contrast() {
    let d = cusp_demo(&CUSP_DEFAULT_N, CUSP_DEFAULT_M, CUSP_DEFAULT_THETA, &GramSpec::default()).unwrap();
    assert_eq!(d.rows.len(), CUSP_DEFAULT_N.len());
    assert!(d.contrast, "growth {}, spread {}", d.metric_growth, d.bergman_spread);
    assert!(d.metric_growth > 10.0 * d.bergman_spread);
}

#[test]
fn oscillation_norms_stay_above_the_floor() {
    let t = oscillation_l1(&OSCILLATION_K, Reference::Zero, 256).unwrap();
    assert!(t.above_floor);
    for r in &t.rows {
        assert!((r.l1 / t.limit - 1.0).abs() < 2e-3, "k = {}: {}", r.k, r.l1);
    }
    assert!(oscillation_l1(&OSCILLATION_K, Reference::RunningMean, 256).unwrap().above_floor);
    let half = oscillation_l1(&OSCILLATION_K, Reference::HalfMean, 256).unwrap();
    assert!(half.above_floor && half.threshold == 0.5 * half.floor);
    let single = oscillation_l1(&OSCILLATION_K, Reference::Single(8), 256).unwrap();
    assert_eq!(single.rows[0].l1, 0.0);
    assert!(single.rows[1..].iter().all(|r| r.l1 > single.floor));
    assert!(oscillation_l1(&[], Reference::Zero, 64).is_err());
}

#[test]
fn curvature_identity_displayed_form() {
    let c = curvature_identity(&OSCILLATION_K, 64).unwrap();
    assert!(c.displayed_verdict.bounded, "k · sup = {:?}", c.rows.iter().map(|r| r.k as f64 * r.displayed_sup).collect::<Vec<_>>());
}

#[test]
fn curvature_identity_corrected_form() {
    let c = curvature_identity(&OSCILLATION_K, 64).unwrap();
    assert!(c.corrected_verdict.bounded);
    assert!(c.rows.windows(2).all(|w| w[1].corrected_sup < w[0].corrected_sup));
}

#[test]
fn hessian_demo_shape() {
    let d = hessian_l1_demo(16, &[8, 12], 24, &GramSpec::default()).unwrap();
    assert_eq!(d.rows.len(), 2);
    for r in &d.rows {
        assert!(r.model_l1 > 0.0 && r.l1 > 0.0);
        assert!((r.relative - r.l1 / r.model_l1).abs() < 1e-15);
    }
}

#[test]
fn disc_grid_area() {
    let g = disc_grid(400);
    let area: f64 = g.weights.iter().sum();
    assert!((area / PI - 1.0).abs() < 1e-3);
}
