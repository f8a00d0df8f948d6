//! Suite parts. Each part appends tables, flags and measured values to a
//! report; verbs and the reproduction driver compose them.

use crate::config::{Command, RunConfig};
use crate::error::RunError;
use crate::report::{Flag, Report, Table};
use crate::row;
use bergman_lab::bergman_engine::{
    all_pairs, boundedness, grad_modulus, metric_field, rate_report, Boundedness, Grid, ERROR_FLOOR,
};
use bergman_lab::examples_suite::{
    cusp_demo, curvature_identity, hessian_l1_demo, neck_gap, oscillation_l1, sharp_constants_report,
    sharp_limits, sharp_norm_asymptotics, sharp_overlap_asymptotics, Reference, CURVATURE_GRID,
    CUSP_DEFAULT_THETA, HESSIAN_GRID, L1_GRID,
};
use bergman_lab::fourier_bounds::{check_bound, induced_functions, ode_residual, TestFunction, ODE_TOL};
use bergman_lab::metric_models::{
    build_model, compatibility_residual, curvature_at, gaussian_curvature, metric_jet, registry,
    MetricModel,
};
use bergman_lab::peak_sections::{check_peak_mass, overlap_sweep};
use bergman_lab::quadrature::QuadSpec;
use bergman_lab::section_space::{jet_asymptotics, GramSpec, SectionBasis};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Relative finite-difference step and tolerance for the weight/metric
/// compatibility check. The step is scaled by the local length
/// `min(1, r, 1/√(2g))` so that thin caps and necks are resolved.
pub const COMPAT_STEP: f64 = 1e-3;
pub const COMPAT_TOL: f64 = 1e-4;

pub const SUP_SLOPE_WINDOW: (f64, f64) = (-1.15, -0.85);
pub const GRAD_SLOPE_WINDOW: (f64, f64) = (-0.65, -0.40);
pub const C1ALPHA_BAND: f64 = 3.0;
pub const BOUNDED_SPREAD: f64 = 10.0;
pub const BOUNDED_TREND: f64 = 0.1;

pub const SHARP_TOL: f64 = 0.10;
pub const ASYM_TOL: f64 = 0.05;
pub const ASYM_M: usize = 400;
pub const PI_TOL: f64 = 1e-4;
pub const ODE_RADII: [f64; 7] = [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4];
pub const BOUND_RMAX: f64 = 0.3;
pub const SYMMETRY_TOL: f64 = 1e-10;
pub const ENGINE_TOL: f64 = 1e-9;

fn verdict_detail(v: &Boundedness) -> String {
    if v.vanishing && v.slope == 0.0 && v.ratio == 1.0 {
        format!("max {:.3e}, below floor", v.max)
    } else {
        format!("max/min {:.3}, slope {:.3}", v.ratio, v.slope)
    }
}

fn record_verdict(report: &mut Report, key: &str, v: &Boundedness) {
    report.measured.insert(format!("{key}.ratio"), v.ratio);
    report.measured.insert(format!("{key}.slope"), v.slope);
    report.measured.insert(format!("{key}.max"), v.max);
}

pub fn model_from(cfg: &RunConfig) -> Result<Box<dyn MetricModel>, RunError> {
    let m = cfg
        .model
        .as_ref()
        .ok_or_else(|| RunError::Config("this suite needs a model".into()))?;
    Ok(build_model(&m.name, &m.params)?)
}

// ---------------------------------------------------------------------------
// models

pub fn part_registry(report: &mut Report) -> Result<(), RunError> {
    let mut t = Table::new("models_registry");
    for info in registry() {
        let model = build_model(info.name, &BTreeMap::new())?;
        let params: Vec<&str> = info.params.iter().map(|(p, _)| *p).collect();
        t.push(row![info.name, info.symmetry, params.join(";"), model.degree_cap(), info.summary]);
    }
    report.attach("registry", registry())?;
    report.tables.push(t);
    Ok(())
}

pub fn part_samples(report: &mut Report, models: &[Box<dyn MetricModel>]) -> Result<(), RunError> {
    let mut t = Table::new("models_samples");
    let theta = 0.3;
    let mut worst_compat: f64 = 0.0;
    let mut positive = true;
    for model in models {
        for r in [0.0, 0.25, 0.5, 0.75, 0.95] {
            if r >= model.chart_radius() {
                continue;
            }
            let z = Complex64::from_polar(r, theta);
            let g = model.metric_coeff(z);
            positive &= g > 0.0 && g.is_finite();
            let scale = (1.0f64).min(1.0 / (2.0 * g).sqrt()).min(if r > 0.0 { r } else { 1.0 });
            let compat = compatibility_residual(model.as_ref(), z, COMPAT_STEP * scale);
            worst_compat = worst_compat.max(compat);
            t.push(row![
                model.name(),
                r,
                theta,
                model.log_weight(z),
                g,
                curvature_at(model.as_ref(), z),
                gaussian_curvature(model.as_ref(), z),
                compat
            ]);
        }
    }
    report.tables.push(t);
    report.measured.insert("models.compatibility_max".into(), worst_compat);
    report.flags.push(Flag::gate("models.positive_metric", positive, "g > 0 at every sample"));
    report.flags.push(Flag::gate(
        "models.compatibility",
        worst_compat < COMPAT_TOL,
        format!("max residual {worst_compat:.3e}, limit {COMPAT_TOL:e}"),
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// rates

/// Rate grid: the default annulus plus `extra` seeded points of zero weight.
pub fn rate_grid(extra: usize, rng: &mut ChaCha8Rng) -> Grid {
    let mut grid = Grid::rate_default();
    for _ in 0..extra {
        let r = rng.gen_range(0.05..0.5);
        let th = rng.gen_range(0.0..2.0 * PI);
        grid.points.push(Complex64::from_polar(r, th));
        grid.weights.push(0.0);
    }
    grid
}

/// `count` distinct index pairs, or all of them if there are fewer.
pub fn sample_pairs(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let all = all_pairs(n);
    if count >= all.len() {
        return all;
    }
    rand::seq::index::sample(rng, all.len(), count)
        .into_iter()
        .map(|i| all[i])
        .collect::<Vec<_>>()
}

pub fn part_rates(report: &mut Report, model: &dyn MetricModel, cfg: &RunConfig) -> Result<(), RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let grid = rate_grid(cfg.random_points, &mut rng);
    let pairs = sample_pairs(grid.len(), cfg.modulus_pairs, &mut rng);
    let rr = rate_report(model, &cfg.m_list, &grid, cfg.alpha, cfg.q, &cfg.quadrature)?;

    let mut t = Table::new("rates");
    for r in &rr.rows {
        t.push(row![
            r.m,
            r.sup_err,
            r.grad_err,
            r.c1alpha_mod,
            r.w2q_norm,
            r.hess_zz_sup,
            r.hess_zzbar_sup,
            r.origin_err,
            r.origin_grad_err,
            r.origin_hess_zz,
            r.origin_hess_zzbar,
            r.gram_band,
            r.min_pivot
        ]);
    }
    report.tables.push(t);

    let mut slopes = Table::new("rates_slopes");
    for (name, fit) in [
        ("sup_err", rr.sup_slope),
        ("grad_err", rr.grad_slope),
        ("c1alpha_mod", rr.c1alpha_slope),
        ("w2q_norm", rr.w2q_slope),
        ("origin_grad_err", rr.origin_grad_slope),
    ] {
        if let Some(f) = fit {
            slopes.push(row![rr.model.as_str(), name, f.slope, f.intercept, f.residual_rms]);
            report.measured.insert(format!("rates.{name}.slope"), f.slope);
        }
    }
    report.tables.push(slopes);

    // Rate normalizations of the Hölder modulus and the Hessians.
    let ms = rr.ms();
    let a = cfg.alpha;
    let scaled: Vec<(f64, f64, f64)> = rr
        .rows
        .iter()
        .map(|r| {
            let mf = r.m as f64;
            let norm = mf.powf((a - 1.0) / 2.0) * mf.ln().powf(a);
            (r.c1alpha_mod / norm, r.hess_zz_sup / mf.ln(), r.hess_zzbar_sup)
        })
        .collect();
    let mut st = Table::new("rates_scaled");
    for (r, s) in rr.rows.iter().zip(&scaled) {
        st.push(row![r.m, s.0, s.1, s.2]);
    }
    report.tables.push(st);

    // Log-Lipschitz modulus of the gradient error on seeded pairs.
    let radial = model.radial_at(1.0).is_some();
    let exact: Vec<Complex64> = grid.points.iter().map(|z| metric_jet(model, *z).real_gradient()).collect();
    let mut mt = Table::new("rates_modulus");
    for &m in &cfg.m_list {
        let basis = SectionBasis::build(model, m, &cfg.quadrature)?;
        let field = metric_field(&basis, &grid.points, radial)?;
        let diffs: Vec<Complex64> = field.iter().zip(&exact).map(|(b, e)| b.real_gradient() - e).collect();
        let s = grad_modulus(&grid.points, &diffs, &pairs);
        mt.push(row![m, s.sup, s.pair.0, s.pair.1, s.pairs_used]);
    }
    report.tables.push(mt);

    let complete = rr.rows.len() == cfg.m_list.len()
        && rr.rows.iter().all(|r| r.sup_err.is_finite() && r.grad_err.is_finite());
    report.flags.push(Flag::gate("rates.sweep_complete", complete, format!("{} rows", rr.rows.len())));
    report.flags.push(Flag::gate(
        "rates.slopes_fitted",
        rr.sup_slope.is_some() && rr.grad_slope.is_some(),
        "sup and gradient slopes available",
    ));
    let min_pivot = rr.rows.iter().map(|r| r.min_pivot).fold(f64::INFINITY, f64::min);
    report.flags.push(Flag::gate(
        "rates.pivots_positive",
        min_pivot > 0.0,
        format!("min pivot {min_pivot:.3e}"),
    ));

    let window = |name: &str, fit: Option<f64>, w: (f64, f64)| {
        let pass = fit.map(|s| s >= w.0 && s <= w.1).unwrap_or(false);
        let detail = match fit {
            Some(s) => format!("slope {s:.4}, window [{}, {}]", w.0, w.1),
            None => "no fit".into(),
        };
        Flag::info(name.to_string(), pass, detail)
    };
    report.flags.push(window("rates.sup_slope_window", rr.sup_slope.map(|f| f.slope), SUP_SLOPE_WINDOW));
    report.flags.push(window("rates.grad_slope_window", rr.grad_slope.map(|f| f.slope), GRAD_SLOPE_WINDOW));
    report.flags.push(window(
        "rates.origin_grad_slope_window",
        rr.origin_grad_slope.map(|f| f.slope),
        GRAD_SLOPE_WINDOW,
    ));

    let c1: Vec<f64> = scaled.iter().map(|s| s.0).collect();
    let (lo, hi) = c1.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let band = hi / lo;
    report.measured.insert("rates.c1alpha_scaled.ratio".into(), band);
    report.flags.push(Flag::info(
        "rates.c1alpha_band",
        band < C1ALPHA_BAND,
        format!("max/min {band:.3}, limit {C1ALPHA_BAND}"),
    ));
    for (name, col) in [
        ("hess_zz_per_log_m", scaled.iter().map(|s| s.1).collect::<Vec<_>>()),
        ("hess_zzbar_sup", scaled.iter().map(|s| s.2).collect::<Vec<_>>()),
    ] {
        let v = boundedness(&ms, &col, BOUNDED_SPREAD, BOUNDED_TREND, ERROR_FLOOR);
        record_verdict(report, &format!("rates.{name}"), &v);
        report.flags.push(Flag::info(format!("rates.{name}_bounded"), v.bounded, verdict_detail(&v)));
    }
    report.attach("rate_report", &rr)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// peak

pub fn part_peak_mass(
    report: &mut Report,
    model: &dyn MetricModel,
    p_list: &[usize],
    m_list: &[usize],
    quad: &QuadSpec,
) -> Result<(), RunError> {
    let mut t = report.take_table("peak_mass");
    let mut tables = Vec::new();
    for &p in p_list {
        let table = check_peak_mass(model, p, m_list, quad)?;
        for r in &table.rows {
            t.push(row![table.model.as_str(), p, r.m, r.lambda_inv_sq_log, r.residual]);
        }
        let key = format!("peak_mass.{}.p{p}", model.name());
        record_verdict(report, &key, &table.verdict);
        report.flags.push(Flag::gate(key, table.verdict.bounded, verdict_detail(&table.verdict)));
        tables.push(table);
    }
    report.tables.push(t);
    report.append("peak_mass", tables)?;
    Ok(())
}

pub fn part_overlaps(
    report: &mut Report,
    model: &dyn MetricModel,
    p_list: &[usize],
    m_list: &[usize],
    quad: &QuadSpec,
) -> Result<(), RunError> {
    let mut t = Table::new("peak_overlaps");
    for (i, &p) in p_list.iter().enumerate() {
        for &pp in &p_list[i + 1..] {
            let (rows, v) = overlap_sweep(model, p, pp, m_list, quad)?;
            for r in &rows {
                t.push(row![model.name(), p, pp, r.m, r.overlap_re, r.overlap_im, r.scaled]);
            }
            let key = format!("overlap.{}.p{p}_p{pp}", model.name());
            record_verdict(report, &key, &v);
            report.flags.push(Flag::gate(key, v.bounded, verdict_detail(&v)));
        }
    }
    report.tables.push(t);
    Ok(())
}

pub fn part_jets(report: &mut Report, model: &dyn MetricModel, m_list: &[usize], spec: &GramSpec) -> Result<(), RunError> {
    let table = jet_asymptotics(model, m_list, spec)?;
    let mut t = report.take_table("peak_jets");
    for r in &table.rows {
        t.push(row![
            table.model.as_str(),
            r.m,
            r.f0,
            r.f1,
            r.f2,
            r.mixed,
            r.residuals[0],
            r.residuals[1],
            r.residuals[2]
        ]);
    }
    report.tables.push(t);
    for (name, v) in ["f0", "f1", "f2", "mixed"].iter().zip(&table.verdicts) {
        let key = format!("jets.{}.{name}", model.name());
        record_verdict(report, &key, v);
        report.flags.push(Flag::gate(key, v.bounded, verdict_detail(v)));
    }
    report.append("jets", vec![table])?;
    Ok(())
}

// ---------------------------------------------------------------------------
// fourier

pub fn part_fourier_bounds(report: &mut Report, quad: &QuadSpec) -> Result<(), RunError> {
    let mut summary = Table::new("fourier_bounds");
    let mut profile = Table::new("fourier_profile");
    let cases = [
        (TestFunction::log_quadratic(), 2usize),
        (TestFunction::modulus_squared(), 0),
        (TestFunction::log_quartic(), 4),
    ];
    let mut checks = Vec::new();
    for (tf, k) in &cases {
        let b = check_bound(tf, *k, BOUND_RMAX, quad)?;
        summary.push(row![tf.name.as_str(), *k, format!("{:?}", b.case), b.sup, b.r_at_sup]);
        for s in &b.samples {
            profile.push(row![tf.name.as_str(), *k, s.r, s.h, s.denominator, s.ratio]);
        }
        report.measured.insert(format!("fourier.{}.k{k}.sup", tf.name), b.sup);
        checks.push(b);
    }
    let sharp = checks[0].sup;
    report.flags.push(Flag::gate(
        "fourier.log_quadratic_sharp",
        (sharp - PI).abs() < PI_TOL,
        format!("sup {sharp:.10} vs π"),
    ));
    let companion = &checks[1];
    report.flags.push(Flag::gate(
        "fourier.companion_no_log",
        companion.sup.is_finite(),
        format!("k = 0 ratio {:.6} against r²", companion.sup),
    ));
    report.flags.push(Flag::gate(
        "fourier.case_ii_finite",
        checks[2].sup.is_finite(),
        format!("sup {:.6} against r⁴|log r|", checks[2].sup),
    ));
    report.tables.push(summary);
    report.tables.push(profile);
    report.attach("bounds", checks.iter().map(|b| (b.case, b.k, b.sup, b.r_at_sup)).collect::<Vec<_>>())?;
    Ok(())
}

pub fn part_ode(report: &mut Report, quad: &QuadSpec) -> Result<(), RunError> {
    let mut t = Table::new("fourier_ode");
    for (tf, k) in [
        (TestFunction::log_quadratic(), 2usize),
        (TestFunction::re_z_squared(), 2),
        (TestFunction::modulus_squared(), 0),
    ] {
        let rows = ode_residual(&tf, k, &ODE_RADII, quad)?;
        let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        for r in &rows {
            t.push(row![tf.name.as_str(), k, r.r, r.lhs, r.rhs, r.residual, r.truncation]);
        }
        report.measured.insert(format!("ode.{}.max_residual", tf.name), worst);
        report.flags.push(Flag::gate(
            format!("ode.{}", tf.name),
            worst < ODE_TOL,
            format!("max residual {worst:.3e}, limit {ODE_TOL:e}"),
        ));
    }
    report.tables.push(t);
    Ok(())
}

pub fn part_induced(report: &mut Report, models: &[Box<dyn MetricModel>], quad: &QuadSpec) -> Result<(), RunError> {
    let mut t = Table::new("fourier_induced");
    let mut finite = true;
    for model in models {
        for tf in induced_functions(model.as_ref())?.iter() {
            for k in 0..5 {
                let b = check_bound(tf, k, BOUND_RMAX, quad)?;
                finite &= b.sup.is_finite();
                t.push(row![model.name(), tf.name.as_str(), k, b.sup, b.r_at_sup]);
            }
        }
    }
    report.tables.push(t);
    report.flags.push(Flag::gate("fourier.induced_finite", finite, "finite sup for k = 0..4"));
    Ok(())
}

// ---------------------------------------------------------------------------
// sharp

fn rel_dev(value: f64, target: f64) -> f64 {
    (value / target - 1.0).abs()
}

pub fn part_sharp_asymptotics(report: &mut Report, model: &dyn MetricModel, m_list: &[usize], quad: &QuadSpec) -> Result<(), RunError> {
    let mut ms: Vec<usize> = m_list.to_vec();
    ms.push(ASYM_M);
    ms.sort_unstable();
    ms.dedup();
    let mut ot = Table::new("sharp_overlaps");
    let mut nt = Table::new("sharp_norms");
    let (mut disp, mut corr, mut norm) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..3 {
        for r in sharp_overlap_asymptotics(model, &ms, k, quad)? {
            ot.push(row![
                k,
                r.m,
                r.integral,
                r.abs_error,
                r.displayed,
                r.displayed_ratio_minus_one,
                r.corrected,
                r.corrected_ratio_minus_one
            ]);
            if r.m == ASYM_M {
                report.measured.insert(format!("overlap.k{k}.displayed_ratio_minus_one"), r.displayed_ratio_minus_one);
                report.measured.insert(format!("overlap.k{k}.corrected_ratio_minus_one"), r.corrected_ratio_minus_one);
                disp = disp.max(r.displayed_ratio_minus_one.abs());
                corr = corr.max(r.corrected_ratio_minus_one.abs());
            }
        }
        for r in sharp_norm_asymptotics(model, &ms, k, quad)? {
            nt.push(row![k, r.m, r.integral, r.leading, r.ratio_minus_one]);
            if r.m == ASYM_M {
                report.measured.insert(format!("norm.k{k}.ratio_minus_one"), r.ratio_minus_one);
                norm = norm.max(r.ratio_minus_one.abs());
            }
        }
    }
    report.tables.push(ot);
    report.tables.push(nt);
    report.flags.push(Flag::gate(
        "sharp.overlap_displayed_m400",
        disp <= ASYM_TOL,
        format!("max |ratio − 1| {disp:.4}, tolerance {ASYM_TOL}"),
    ));
    report.flags.push(Flag::gate(
        "sharp.norm_m400",
        norm <= ASYM_TOL,
        format!("max |ratio − 1| {norm:.2e}, tolerance {ASYM_TOL}"),
    ));
    report.flags.push(Flag::info(
        "sharp.overlap_corrected_m400",
        corr <= ASYM_TOL,
        format!("max |ratio − 1| {corr:.4}, tolerance {ASYM_TOL}"),
    ));
    Ok(())
}

pub fn part_sharp_constants(report: &mut Report, model: &dyn MetricModel, m_list: &[usize], spec: &GramSpec) -> Result<(), RunError> {
    let sr = sharp_constants_report(model, m_list, spec)?;
    let mut t = Table::new("sharp_constants");
    for r in &sr.rows {
        t.push(row![
            r.m,
            r.m_beta01,
            r.m_beta12,
            r.m_beta01_gram,
            r.gradient_perturbative,
            r.error_perturbative,
            r.gradient_direct,
            r.gradient_direct_im,
            r.error_direct,
            r.paths_agree
        ]);
    }
    report.tables.push(t);
    let mut et = Table::new("sharp_extrapolated");
    for e in &sr.extrapolated {
        et.push(row![e.quantity.as_str(), e.value, e.error, e.residual, e.displayed, e.corrected]);
        report.measured.insert(format!("sharp.{}.extrapolated", e.quantity), e.value);
    }
    report.tables.push(et);

    let last = sr.last();
    let m = last.m;
    report.measured.insert("sharp.last_m".into(), m as f64);
    report.measured.insert("sharp.m_beta01".into(), last.m_beta01);
    report.measured.insert("sharp.m_beta12".into(), last.m_beta12);
    report.measured.insert("sharp.gradient_direct".into(), last.gradient_direct);
    report.measured.insert("sharp.gradient_perturbative".into(), last.gradient_perturbative);
    report.measured.insert("sharp.error_direct".into(), last.error_direct);
    report.measured.insert("sharp.error_perturbative".into(), last.error_perturbative);
    for (name, value, displayed, corrected) in [
        ("beta01", last.m_beta01, sharp_limits::beta01_displayed(), sharp_limits::beta01_corrected()),
        ("beta12", last.m_beta12, sharp_limits::beta12_displayed(), sharp_limits::beta12_corrected()),
        (
            "gradient",
            last.gradient_direct,
            sharp_limits::gradient_displayed(),
            sharp_limits::gradient_corrected(),
        ),
    ] {
        let d = rel_dev(value, displayed);
        report.flags.push(Flag::gate(
            format!("sharp.{name}_displayed"),
            d <= SHARP_TOL,
            format!("{value:.4e} vs {displayed:.4e} at m = {m}, off by {:.1}%", 100.0 * d),
        ));
        let c = rel_dev(value, corrected);
        report.flags.push(Flag::info(
            format!("sharp.{name}_corrected"),
            c <= SHARP_TOL,
            format!("{value:.4e} vs {corrected:.4e} at m = {m}, off by {:.1}%", 100.0 * c),
        ));
    }
    let gap = (last.gradient_direct - last.gradient_perturbative).abs();
    report.flags.push(Flag::gate(
        "sharp.paths_agree",
        sr.all_agree(),
        format!("|direct − perturbative| {gap:.2e} at m = {m}"),
    ));
    report.attach("sharp_report", &sr)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// families

pub fn part_neck(report: &mut Report, n_list: &[u32], m_list: &[usize], spec: &GramSpec) -> Result<(), RunError> {
    let mut t = Table::new("families_neck");
    let mut gaps = Vec::new();
    for &m in m_list {
        for &n in n_list {
            let g = neck_gap(n, m, spec)?;
            t.push(row![
                n,
                m,
                g.bergman_value,
                g.bergman_normalized,
                g.bergman_engine,
                g.lower_bound,
                g.metric_value,
                g.symmetry_defect,
                g.bound_holds
            ]);
            report.measured.insert(format!("neck.n{n}.m{m}.normalized_over_bound"), g.bergman_normalized / g.lower_bound);
            report.measured.insert(format!("neck.n{n}.m{m}.value_over_bound"), g.bergman_value / g.lower_bound);
            gaps.push(g);
        }
    }
    report.tables.push(t);
    let holds = gaps.iter().all(|g| g.bound_holds);
    let margin = gaps
        .iter()
        .map(|g| g.bergman_normalized / g.lower_bound)
        .fold(f64::INFINITY, f64::min);
    report.flags.push(Flag::gate(
        "neck.lower_bound",
        holds,
        format!("min g_m(1)/bound {margin:.3}"),
    ));
    let sym = gaps.iter().map(|g| g.symmetry_defect).fold(0.0, f64::max);
    report.flags.push(Flag::gate(
        "neck.symmetry",
        sym < SYMMETRY_TOL,
        format!("max |a_j/a_(m−j) − 1| {sym:.2e}"),
    ));
    let eng = gaps
        .iter()
        .map(|g| rel_dev(g.bergman_normalized, g.bergman_engine))
        .fold(0.0, f64::max);
    report.flags.push(Flag::gate(
        "neck.engine_agreement",
        eng < ENGINE_TOL,
        format!("max relative gap to the cumulant path {eng:.2e}"),
    ));
    let mut metric: Vec<(u32, f64)> = gaps.iter().map(|g| (g.n, g.metric_value)).collect();
    metric.sort_by_key(|p| p.0);
    metric.dedup_by_key(|p| p.0);
    let decreasing = metric.windows(2).all(|w| w[1].1 < w[0].1);
    report.flags.push(Flag::gate(
        "neck.metric_decreasing",
        decreasing,
        format!(
            "g_n(1) = {}",
            metric.iter().map(|(_, v)| format!("{v:.4e}")).collect::<Vec<_>>().join(", ")
        ),
    ));
    report.attach("neck", &gaps)?;
    Ok(())
}

pub fn part_cusp(report: &mut Report, n_list: &[u32], m_list: &[usize], theta: f64, spec: &GramSpec) -> Result<(), RunError> {
    let mut t = Table::new("families_cusp");
    let mut demos = Vec::new();
    for &m in m_list {
        let d = cusp_demo(n_list, m, theta, spec)?;
        for r in &d.rows {
            t.push(row![r.n, r.m, r.metric_ratio_at_cusp, r.bergman_sup_ratio, r.sup_gap, r.gram_spread]);
        }
        report.measured.insert(format!("cusp.m{m}.metric_growth"), d.metric_growth);
        report.measured.insert(format!("cusp.m{m}.bergman_spread"), d.bergman_spread);
        report.flags.push(Flag::gate(
            format!("cusp.contrast_m{m}"),
            d.contrast,
            format!("model growth {:.1}, Bergman spread {:.2}", d.metric_growth, d.bergman_spread),
        ));
        demos.push(d);
    }
    report.tables.push(t);
    report.attach("cusp", &demos)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// oscillation

/// A fixed comparison frequency outside the sweep.
fn single_reference(k_list: &[u32]) -> u32 {
    (10..).find(|k| !k_list.contains(k)).expect("free frequency")
}

pub fn part_oscillation_l1(report: &mut Report, k_list: &[u32]) -> Result<(), RunError> {
    let mut t = Table::new("oscillation_l1");
    let refs = [
        Reference::Zero,
        Reference::Single(single_reference(k_list)),
        Reference::RunningMean,
        Reference::HalfMean,
    ];
    let mut tables = Vec::new();
    for reference in refs {
        let table = oscillation_l1(k_list, reference, L1_GRID)?;
        let label = match reference {
            Reference::Zero => "zero".to_string(),
            Reference::Single(k) => format!("single_{k}"),
            Reference::RunningMean => "running_mean".into(),
            Reference::HalfMean => "half_mean".into(),
        };
        for r in &table.rows {
            t.push(row![label.as_str(), r.k, r.l1]);
        }
        report.measured.insert(format!("l1.{label}.min"), table.min);
        report.flags.push(Flag::gate(
            format!("l1.{label}_above_floor"),
            table.above_floor,
            format!("min {:.4}, threshold {:.4}", table.min, table.threshold),
        ));
        tables.push(table);
    }
    report.tables.push(t);
    report.attach("l1", &tables)?;
    Ok(())
}

pub fn part_curvature(report: &mut Report, k_list: &[u32]) -> Result<(), RunError> {
    let c = curvature_identity(k_list, CURVATURE_GRID)?;
    let mut t = Table::new("oscillation_curvature");
    for r in &c.rows {
        t.push(row![r.k, r.displayed_sup, r.corrected_sup]);
    }
    report.tables.push(t);
    record_verdict(report, "curvature.displayed", &c.displayed_verdict);
    record_verdict(report, "curvature.corrected", &c.corrected_verdict);
    report.flags.push(Flag::gate(
        "curvature.displayed_identity",
        c.displayed_verdict.bounded,
        format!("k·residual: {}", verdict_detail(&c.displayed_verdict)),
    ));
    report.flags.push(Flag::info(
        "curvature.corrected_identity",
        c.corrected_verdict.bounded,
        format!("k·residual: {}", verdict_detail(&c.corrected_verdict)),
    ));
    report.attach("curvature", &c)?;
    Ok(())
}

pub fn part_hessian(report: &mut Report, m_list: &[usize], k_list: &[u32], spec: &GramSpec) -> Result<(), RunError> {
    let mut t = Table::new("oscillation_hessian");
    let mut demos = Vec::new();
    for &m in m_list {
        let d = hessian_l1_demo(m, k_list, HESSIAN_GRID, spec)?;
        for r in &d.rows {
            t.push(row![r.k, r.m, r.l1, r.model_l1, r.relative]);
            report.measured.insert(format!("hessian.m{m}.k{}.l1", r.k), r.l1);
            report.measured.insert(format!("hessian.m{m}.k{}.relative", r.k), r.relative);
        }
        let l1s = d.rows.iter().map(|r| format!("{:.4}", r.l1)).collect::<Vec<_>>().join(", ");
        let rel = d.rows.iter().map(|r| format!("{:.4}", r.relative)).collect::<Vec<_>>().join(", ");
        report.flags.push(Flag::gate(format!("hessian.non_decreasing_m{m}"), d.non_decreasing, format!("L¹ = {l1s}")));
        report.flags.push(Flag::info(
            format!("hessian.relative_non_decreasing_m{m}"),
            d.relative_non_decreasing,
            format!("relative = {rel}"),
        ));
        demos.push(d);
    }
    report.tables.push(t);
    report.attach("hessian", &demos)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// verbs

fn selected_models(cfg: &RunConfig) -> Result<Vec<Box<dyn MetricModel>>, RunError> {
    match &cfg.model {
        Some(m) => Ok(vec![build_model(&m.name, &m.params)?]),
        None => registry()
            .iter()
            .map(|i| build_model(i.name, &BTreeMap::new()).map_err(RunError::from))
            .collect(),
    }
}

fn require_model(cfg: &RunConfig, name: &str) -> Result<Box<dyn MetricModel>, RunError> {
    let model = model_from(cfg)?;
    if model.name() != name {
        return Err(RunError::Config(format!(
            "this suite is defined for {name}, got {}",
            model.name()
        )));
    }
    Ok(model)
}

/// Runs one verb on a resolved config.
pub fn run_command(command: Command, cfg: &RunConfig) -> Result<Vec<Report>, RunError> {
    let quad = &cfg.quadrature.quad;
    let spec = &cfg.quadrature;
    let report = match command {
        Command::Models => {
            let mut r = Report::new("models");
            part_registry(&mut r)?;
            part_samples(&mut r, &selected_models(cfg)?)?;
            r
        }
        Command::Rates => {
            let mut r = Report::new("rates");
            part_rates(&mut r, model_from(cfg)?.as_ref(), cfg)?;
            r
        }
        Command::Peak => {
            let mut r = Report::new("peak");
            let model = model_from(cfg)?;
            part_peak_mass(&mut r, model.as_ref(), &cfg.p_list, &cfg.m_list, quad)?;
            part_overlaps(&mut r, model.as_ref(), &cfg.p_list, &cfg.m_list, quad)?;
            part_jets(&mut r, model.as_ref(), &cfg.m_list, spec)?;
            r
        }
        Command::Fourier => {
            let mut r = Report::new("fourier");
            part_fourier_bounds(&mut r, quad)?;
            part_ode(&mut r, quad)?;
            part_induced(&mut r, &selected_models(cfg)?, quad)?;
            r
        }
        Command::Sharp => {
            let mut r = Report::new("sharp");
            let model = require_model(cfg, "sharp_example")?;
            part_sharp_asymptotics(&mut r, model.as_ref(), &cfg.m_list, quad)?;
            part_sharp_constants(&mut r, model.as_ref(), &cfg.m_list, spec)?;
            r
        }
        Command::Families if cfg.cusp => {
            let mut r = Report::new("families_cusp");
            let theta = cfg
                .model
                .as_ref()
                .filter(|m| m.name == "cusp_family")
                .and_then(|m| m.params.get("theta").copied())
                .unwrap_or(CUSP_DEFAULT_THETA);
            part_cusp(&mut r, &cfg.n_list, &cfg.m_list, theta, spec)?;
            r
        }
        Command::Families => {
            let mut r = Report::new("families");
            part_neck(&mut r, &cfg.n_list, &cfg.m_list, spec)?;
            r
        }
        Command::Oscillation => {
            let mut r = Report::new("oscillation");
            part_oscillation_l1(&mut r, &cfg.k_list)?;
            part_curvature(&mut r, &cfg.k_list)?;
            part_hessian(&mut r, &cfg.m_list, &cfg.k_list, spec)?;
            r
        }
        Command::All => {
            let mut out = Vec::new();
            for (sub, cusp) in [
                (Command::Models, false),
                (Command::Rates, false),
                (Command::Peak, false),
                (Command::Fourier, false),
                (Command::Sharp, false),
                (Command::Families, false),
                (Command::Families, true),
                (Command::Oscillation, false),
            ] {
                let base = RunConfig {
                    cusp,
                    ..cfg.defaults_only()
                };
                let sub_cfg = base.resolve(sub)?;
                out.extend(run_command(sub, &sub_cfg)?);
            }
            return Ok(out);
        }
    };
    Ok(vec![report])
}
