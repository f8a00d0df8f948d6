//! Quantitative content of the worked examples: the sharp-rate constants of
//! the perturbed sphere, the neck lower bound, the cusp contrast and the
//! oscillation obstruction.
//!
//! Integrals `G_jk = ∫ z^j z̄^k a^m ω` run over the whole chart with
//! `ω = 2g dA`, and `a(0) = 1` for every model used here.

use crate::bergman_engine::{bergman_jet, boundedness, metric_field, radial_direct, Boundedness, Grid};
use crate::cutoff::CutoffProfile;
use crate::error::{LabError, Result};
use crate::metric_models::{
    curvature_at, cusp_family, fubini_study, hessian_frobenius, metric_jet, neck_family, oscillation_family,
    MetricModel,
};
use crate::peak_sections::OVERLAP_ABS_TOL;
use crate::quadrature::{adaptive_gk15, integrate_disc, ln_factorial, ln_gamma, LogScalar, QuadSpec};
use crate::section_space::{gram, GramSpec, SectionBasis};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Moments

/// `∫ z^p z̄^q a^m ω` over the chart, with its relative error estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Moment {
    pub value: LogScalar,
    pub rel_error: f64,
}

impl Moment {
    /// Absolute error bound.
    pub fn abs_error(&self) -> f64 {
        self.rel_error * self.value.to_f64().abs()
    }
}

fn raw_moment(model: &dyn MetricModel, m: usize, p: usize, q: usize, quad: &QuadSpec) -> Result<Moment> {
    let mf = m as f64;
    let la0 = model.log_weight(Complex64::new(0.0, 0.0));
    let out = integrate_disc(
        |z| {
            let r = z.norm();
            let lm = (p + q) as f64 * r.ln() + mf * (model.log_weight(z) - la0) + (2.0 * model.metric_coeff(z)).ln();
            LogScalar {
                log_mag: lm,
                phase: Complex64::from_polar(1.0, (p as f64 - q as f64) * z.arg()),
            }
        },
        model.chart_radius(),
        quad,
    )?;
    Ok(Moment {
        value: out.value,
        rel_error: out.rel_error,
    })
}

/// `∫ z^p z̄^q a^m ω`. Off-diagonal moments can cancel to rounding level, so
/// they carry an absolute tolerance on the scale `√(G_pp G_qq)`.
pub fn moment(model: &dyn MetricModel, m: usize, p: usize, q: usize, quad: &QuadSpec) -> Result<Moment> {
    if p == q {
        return raw_moment(model, m, p, p, quad);
    }
    let np = raw_moment(model, m, p, p, quad)?;
    let nq = raw_moment(model, m, q, q, quad)?;
    let scale = 0.5 * (np.value.log_mag + nq.value.log_mag);
    let mut qs = quad.clone();
    qs.abs_tol_log = qs.abs_tol_log.max(OVERLAP_ABS_TOL.ln() + scale);
    let mut out = raw_moment(model, m, p, q, &qs)?;
    let floor = OVERLAP_ABS_TOL * scale.exp();
    let v = out.value.to_f64().abs();
    if v > 0.0 {
        out.rel_error = out.rel_error.max(floor / v);
    } else {
        out.rel_error = f64::INFINITY;
    }
    Ok(out)
}

fn check_sweep(model: &dyn MetricModel, m_list: &[usize], k: usize) -> Result<Vec<usize>> {
    if k > 3 {
        return Err(LabError::InvalidArgument(format!("k must be in 0..=3, got {k}")));
    }
    let mut ms = m_list.to_vec();
    ms.sort_unstable();
    ms.dedup();
    if let Some(&m) = ms.iter().find(|&&m| m > model.degree_cap() || m <= k + 1) {
        return Err(LabError::DegreeCap {
            model: model.name().to_string(),
            m,
            cap: model.degree_cap(),
        });
    }
    Ok(ms)
}

/// `ln n!!`, summed directly.
pub fn ln_double_factorial(n: usize) -> f64 {
    (1..=n).rev().step_by(2).map(|j| (j as f64).ln()).sum()
}

/// The displayed leading term `(4k+1)/800 · √π (2k+3)!! / (2^{k+3} m^{k+5/2})`.
pub fn overlap_leading_displayed(k: usize, m: usize) -> f64 {
    let kf = k as f64;
    let ln = 0.5 * PI.ln() + ln_double_factorial(2 * k + 3) - (kf + 3.0) * 2f64.ln() - (kf + 2.5) * (m as f64).ln();
    (4.0 * kf + 1.0) / 800.0 * ln.exp()
}

/// The leading term with the volume-form contribution included:
/// `(4k−5)/1600 · Γ(k+5/2) / m^{k+5/2}`.
pub fn overlap_leading_corrected(k: usize, m: usize) -> f64 {
    let kf = k as f64;
    let ln = ln_gamma(kf + 2.5) - (kf + 2.5) * (m as f64).ln();
    (4.0 * kf - 5.0) / 1600.0 * ln.exp()
}

/// `k!/m^{k+1}`.
pub fn norm_leading(k: usize, m: usize) -> f64 {
    (ln_factorial(k) - (k as f64 + 1.0) * (m as f64).ln()).exp()
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapAsymRow {
    pub m: usize,
    pub k: usize,
    /// `∫ |z|^{2k} z a^m ω`
    pub integral: f64,
    pub abs_error: f64,
    pub displayed: f64,
    pub displayed_ratio_minus_one: f64,
    pub corrected: f64,
    pub corrected_ratio_minus_one: f64,
}

pub fn sharp_overlap_asymptotics(model: &dyn MetricModel, m_list: &[usize], k: usize, quad: &QuadSpec) -> Result<Vec<OverlapAsymRow>> {
    let ms = check_sweep(model, m_list, k)?;
    ms.iter()
        .map(|&m| {
            let mo = moment(model, m, k + 1, k, quad)?;
            let v = mo.value.to_complex().re;
            let d = overlap_leading_displayed(k, m);
            let c = overlap_leading_corrected(k, m);
            Ok(OverlapAsymRow {
                m,
                k,
                integral: v,
                abs_error: mo.abs_error(),
                displayed: d,
                displayed_ratio_minus_one: v / d - 1.0,
                corrected: c,
                corrected_ratio_minus_one: v / c - 1.0,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct NormAsymRow {
    pub m: usize,
    pub k: usize,
    /// `∫ |z|^{2k} a^m ω`
    pub integral: f64,
    pub leading: f64,
    pub ratio_minus_one: f64,
}

pub fn sharp_norm_asymptotics(model: &dyn MetricModel, m_list: &[usize], k: usize, quad: &QuadSpec) -> Result<Vec<NormAsymRow>> {
    let ms = check_sweep(model, m_list, k)?;
    ms.iter()
        .map(|&m| {
            let v = moment(model, m, k, k, quad)?.value.to_f64();
            let l = norm_leading(k, m);
            Ok(NormAsymRow {
                m,
                k,
                integral: v,
                leading: l,
                ratio_minus_one: v / l - 1.0,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Sharp constants

/// Limits of the scaled quantities, as displayed and as re-derived.
pub mod sharp_limits {
    use std::f64::consts::PI;

    pub fn beta01_displayed() -> f64 {
        3.0 * PI.sqrt() / 6400.0
    }
    pub fn beta12_displayed() -> f64 {
        3.0 * PI.sqrt() / (512.0 * 2f64.sqrt())
    }
    pub fn gradient_displayed() -> f64 {
        -369.0 / (128000.0 * PI.sqrt())
    }
    pub fn beta01_corrected() -> f64 {
        -15.0 * PI.sqrt() / 6400.0
    }
    pub fn beta12_corrected() -> f64 {
        -15.0 * PI.sqrt() / (12800.0 * 2f64.sqrt())
    }
    pub fn gradient_corrected() -> f64 {
        -45.0 / (25600.0 * PI.sqrt())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpRow {
    pub m: usize,
    /// `I_k = ∫ |z|^{2k} z a^m ω`, `k = 0, 1, 2`.
    pub overlaps: [f64; 3],
    /// `N_k = ∫ |z|^{2k} a^m ω`, `k = 0, 1, 2`.
    pub norms: [f64; 3],
    /// `m·β₀₁` with `β₀₁ = I₀/√(N₀N₁)`.
    pub m_beta01: f64,
    /// `m·β₁₂` with `β₁₂ = I₁/√(N₁N₂)`.
    pub m_beta12: f64,
    /// `m·Ĝ₀₁` from the assembled Gram matrix.
    pub m_beta01_gram: f64,
    /// `√m·∂g_m/∂z(0)`, perturbative path.
    pub gradient_perturbative: f64,
    pub error_perturbative: f64,
    /// `√m·∂g_m/∂z(0)`, full Gram and jets.
    pub gradient_direct: f64,
    /// Imaginary part of the direct gradient; zero by reflection symmetry.
    pub gradient_direct_im: f64,
    pub error_direct: f64,
    pub paths_agree: bool,
}

/// Richardson limit of `q(m) = C + D/√m + …`.
#[derive(Clone, Debug, Serialize)]
pub struct Extrapolated {
    pub quantity: String,
    pub value: f64,
    /// Change of the limit when the pair of `m` values is shifted down by one.
    pub error: f64,
    /// `|q(m_last) − value|`.
    pub residual: f64,
    pub displayed: f64,
    pub corrected: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpReport {
    pub model: String,
    pub rows: Vec<SharpRow>,
    pub extrapolated: Vec<Extrapolated>,
}

impl SharpReport {
    pub fn last(&self) -> &SharpRow {
        self.rows.last().expect("report has rows")
    }

    pub fn extrapolated(&self, name: &str) -> Option<&Extrapolated> {
        self.extrapolated.iter().find(|e| e.quantity == name)
    }

    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(|r| r.paths_agree)
    }
}

fn richardson_pair(m1: usize, q1: f64, m2: usize, q2: f64) -> f64 {
    let (h1, h2) = (1.0 / (m1 as f64).sqrt(), 1.0 / (m2 as f64).sqrt());
    (q2 * h1 - q1 * h2) / (h1 - h2)
}

/// Limit from the last two rows; the error bar is the shift against the
/// previous pair, or the full residual when only two rows exist.
pub fn richardson(ms: &[usize], qs: &[f64]) -> (f64, f64, f64) {
    let n = ms.len();
    let last = qs[n - 1];
    if n < 2 {
        return (last, f64::INFINITY, 0.0);
    }
    let c = richardson_pair(ms[n - 2], qs[n - 2], ms[n - 1], qs[n - 1]);
    let residual = (last - c).abs();
    let error = if n >= 3 {
        (c - richardson_pair(ms[n - 3], qs[n - 3], ms[n - 2], qs[n - 2])).abs()
    } else {
        residual
    };
    (c, error, residual)
}

/// Bound on rounding in the jets at the base point, relative to `g_m(0)`.
const JET_ROUNDING: f64 = 1e-12;

fn sharp_row(model: &dyn MetricModel, m: usize, spec: &GramSpec) -> Result<SharpRow> {
    let quad = &spec.quad;
    let mf = m as f64;
    let n: Vec<Moment> = (0..3).map(|k| moment(model, m, k, k, quad)).collect::<Result<_>>()?;
    let i: Vec<Moment> = (0..3).map(|k| moment(model, m, k + 1, k, quad)).collect::<Result<_>>()?;
    let g02 = moment(model, m, 2, 0, quad)?;
    let g13 = moment(model, m, 3, 1, quad)?;
    let nv: Vec<f64> = n.iter().map(|x| x.value.to_f64()).collect();
    let iv: Vec<f64> = i.iter().map(|x| x.value.to_complex().re).collect();
    let n3 = moment(model, m, 3, 3, quad)?.value.to_f64();

    let beta01 = iv[0] / (nv[0] * nv[1]).sqrt();
    let beta12 = iv[1] / (nv[1] * nv[2]).sqrt();
    let g02_hat = g02.value.to_complex().norm() / (nv[0] * nv[2]).sqrt();
    let g13_hat = g13.value.to_complex().norm() / (nv[1] * n3).sqrt();

    // f₀ ≈ 1 − ε₀₁z, f₁ ≈ z − ε₁₂z² to first order in the off-diagonal Gram
    // entries, and ∂g_m/∂z(0) = (1/πm)(N₀/N₁)(ε₀₁ − ε₁₂).
    let (e01, e12) = (iv[0] / nv[1], iv[1] / nv[2]);
    let pref = nv[0] / nv[1] / (PI * mf);
    let grad_a = pref * (e01 - e12);
    let rel_n = n.iter().map(|x| x.rel_error).fold(0.0, f64::max);
    let err_a = pref * (i[0].abs_error() / nv[1] + i[1].abs_error() / nv[2])
        + grad_a.abs() * (3.0 * rel_n + beta01.abs() + beta12.abs() + g02_hat + g13_hat);

    let basis = SectionBasis::build(model, m, spec)?;
    let jet = bergman_jet(&basis.jets_at(Complex64::new(0.0, 0.0))?)?;
    let grad_b = jet.dz;
    let delta = basis.gram.quad_error.max(basis.gram.truncation).max(f64::EPSILON);
    let err_b = pref * delta * ((nv[0] / nv[1]).sqrt() + (nv[1] / nv[2]).sqrt()) + JET_ROUNDING * jet.value;

    let sm = mf.sqrt();
    Ok(SharpRow {
        m,
        overlaps: [iv[0], iv[1], iv[2]],
        norms: [nv[0], nv[1], nv[2]],
        m_beta01: mf * beta01,
        m_beta12: mf * beta12,
        m_beta01_gram: mf * basis.gram.normalized(0, 1).re,
        gradient_perturbative: sm * grad_a,
        error_perturbative: sm * err_a,
        gradient_direct: sm * grad_b.re,
        gradient_direct_im: sm * grad_b.im,
        error_direct: sm * err_b,
        paths_agree: (grad_a - grad_b.re).abs() <= err_a + err_b,
    })
}

/// Both computation paths over an `m` sweep in `[128, 1024]`, without
/// failing on disagreement.
pub fn sharp_constants_report(model: &dyn MetricModel, m_list: &[usize], spec: &GramSpec) -> Result<SharpReport> {
    let mut ms = m_list.to_vec();
    ms.sort_unstable();
    ms.dedup();
    if ms.is_empty() || ms[0] < 128 || ms[ms.len() - 1] > 1024 {
        return Err(LabError::InvalidArgument(format!(
            "sharp constants need m in [128, 1024], got {m_list:?}"
        )));
    }
    #[cfg(feature = "parallel")]
    let rows: Vec<Result<SharpRow>> = {
        use rayon::prelude::*;
        ms.par_iter().map(|&m| sharp_row(model, m, spec)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Result<SharpRow>> = ms.iter().map(|&m| sharp_row(model, m, spec)).collect();
    let rows: Vec<SharpRow> = rows.into_iter().collect::<Result<_>>()?;

    use sharp_limits::*;
    let series: [(&str, fn(&SharpRow) -> f64, f64, f64); 4] = [
        ("m_beta01", |r| r.m_beta01, beta01_displayed(), beta01_corrected()),
        ("m_beta12", |r| r.m_beta12, beta12_displayed(), beta12_corrected()),
        ("gradient_perturbative", |r| r.gradient_perturbative, gradient_displayed(), gradient_corrected()),
        ("gradient_direct", |r| r.gradient_direct, gradient_displayed(), gradient_corrected()),
    ];
    let extrapolated = series
        .iter()
        .map(|(name, f, displayed, corrected)| {
            let qs: Vec<f64> = rows.iter().map(f).collect();
            let (value, error, residual) = richardson(&ms, &qs);
            Extrapolated {
                quantity: name.to_string(),
                value,
                error,
                residual,
                displayed: *displayed,
                corrected: *corrected,
            }
        })
        .collect();
    Ok(SharpReport {
        model: model.name().to_string(),
        rows,
        extrapolated,
    })
}

/// As [`sharp_constants_report`], failing with `PathDisagreement` at the
/// first `m` where the two gradients differ by more than their error bars.
pub fn sharp_constants(model: &dyn MetricModel, m_list: &[usize], spec: &GramSpec) -> Result<SharpReport> {
    let report = sharp_constants_report(model, m_list, spec)?;
    if let Some(r) = report.rows.iter().find(|r| !r.paths_agree) {
        return Err(LabError::PathDisagreement {
            perturbative: r.gradient_perturbative,
            direct: r.gradient_direct,
            allowed: r.error_perturbative + r.error_direct,
        });
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Neck lower bound

#[derive(Clone, Debug, Serialize)]
pub struct NeckGap {
    pub n: u32,
    pub m: usize,
    /// `(1/2π)[Σj²a_j²/Σa_j² − (Σj a_j²/Σa_j²)²]` at `z = 1`, `a_j = G_jj^{−1/2}`.
    pub bergman_value: f64,
    /// The same with the `1/m` of `g_m`, i.e. the Bergman metric itself.
    pub bergman_normalized: f64,
    /// `g_m(1)` from the cumulant path, for cross-checking.
    pub bergman_engine: f64,
    pub lower_bound: f64,
    pub metric_value: f64,
    /// `max_j |a_j/a_{m−j} − 1|`.
    pub symmetry_defect: f64,
    pub bound_holds: bool,
}

pub fn neck_gap(n: u32, m: usize, spec: &GramSpec) -> Result<NeckGap> {
    if m % 2 == 0 {
        return Err(LabError::InvalidArgument(format!("neck gap needs odd m, got {m}")));
    }
    let model = neck_family(n, CutoffProfile::default())?;
    let g = gram(&model, m, spec)?;
    // log a_j² = −log G_jj
    let la2: Vec<f64> = g.log_diag.iter().map(|l| -l).collect();
    let top = la2.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = la2.iter().map(|l| (l - top).exp()).collect();
    let tot: f64 = w.iter().sum();
    let mean = w.iter().enumerate().map(|(j, p)| j as f64 * p).sum::<f64>() / tot;
    let second = w.iter().enumerate().map(|(j, p)| (j * j) as f64 * p).sum::<f64>() / tot;
    let literal = (second - mean * mean) / (2.0 * PI);
    let symmetry_defect = (0..=m)
        .map(|j| (0.5 * (la2[j] - la2[m - j])).exp_m1().abs())
        .fold(0.0, f64::max);
    let lower_bound = 1.0 / (4.0 * PI * ((m + 1) as f64).powi(2));
    let one = Complex64::new(1.0, 0.0);
    let normalized = literal / m as f64;
    Ok(NeckGap {
        n,
        m,
        bergman_value: literal,
        bergman_normalized: normalized,
        bergman_engine: radial_direct(&g.log_diag, one).value,
        lower_bound,
        metric_value: model.metric_coeff(one),
        symmetry_defect,
        bound_holds: literal >= lower_bound && normalized >= lower_bound,
    })
}

// ---------------------------------------------------------------------------
// Cusp contrast

#[derive(Clone, Debug, Serialize)]
pub struct CuspRow {
    pub n: u32,
    pub m: usize,
    /// `g_n(0)/g_FS(0)`.
    pub metric_ratio_at_cusp: f64,
    /// `sup g_{n,m}/g_FS` over the radial samples.
    pub bergman_sup_ratio: f64,
    /// `sup |g_{n,m} − g_n|/g_FS`.
    pub sup_gap: f64,
    /// `max_j/min_j` of `G_jj(n)/G_jj(FS)`.
    pub gram_spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CuspDemo {
    pub rows: Vec<CuspRow>,
    /// Growth factor of `g_n(0)/g_FS(0)` across the family.
    pub metric_growth: f64,
    /// Spread of `sup g_{n,m}/g_FS` across the family.
    pub bergman_spread: f64,
    /// The model ratio grows strictly while the Bergman ratio spreads by
    /// less than half as much.
    pub contrast: bool,
}

/// Radial sample points `0` and `10^{−4}…10^{4}`.
fn radial_samples() -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    pts.extend((0..=160).map(|i| Complex64::new(10f64.powf(-4.0 + 0.05 * i as f64), 0.0)));
    pts
}

/// Family members, tensor power and cone angle used by default.
pub const CUSP_DEFAULT_N: [u32; 3] = [2, 5, 8];
pub const CUSP_DEFAULT_M: usize = 8;
pub const CUSP_DEFAULT_THETA: f64 = 0.5;

pub fn cusp_demo(n_list: &[u32], m: usize, theta: f64, spec: &GramSpec) -> Result<CuspDemo> {
    let fs = fubini_study();
    let fs_diag: Vec<f64> = (0..=m)
        .map(|j| ln_factorial(j) + ln_factorial(m - j) - ln_factorial(m + 1))
        .collect();
    let pts = radial_samples();
    let mut rows = Vec::new();
    for &n in n_list {
        let model = cusp_family(n, theta, CutoffProfile::default())?;
        let basis = SectionBasis::build(&model, m, spec)?;
        let field = metric_field(&basis, &pts, true)?;
        let mut sup_ratio: f64 = 0.0;
        let mut sup_gap: f64 = 0.0;
        for j in &field {
            let gfs = fs.metric_coeff(j.point);
            sup_ratio = sup_ratio.max(j.value / gfs);
            sup_gap = sup_gap.max((j.value - model.metric_coeff(j.point)).abs() / gfs);
        }
        let diffs: Vec<f64> = basis.gram.log_diag.iter().zip(&fs_diag).map(|(a, b)| a - b).collect();
        let hi = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
        let origin = Complex64::new(0.0, 0.0);
        rows.push(CuspRow {
            n,
            m,
            metric_ratio_at_cusp: model.metric_coeff(origin) / fs.metric_coeff(origin),
            bergman_sup_ratio: sup_ratio,
            sup_gap,
            gram_spread: (hi - lo).exp(),
        });
    }
    let spread = |f: fn(&CuspRow) -> f64| {
        let v: Vec<f64> = rows.iter().map(f).collect();
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let metric_growth = spread(|r| r.metric_ratio_at_cusp);
    let bergman_spread = spread(|r| r.bergman_sup_ratio);
    let increasing = rows.windows(2).all(|w| w[1].metric_ratio_at_cusp > w[0].metric_ratio_at_cusp);
    Ok(CuspDemo {
        contrast: increasing && bergman_spread - 1.0 < 0.5 * (metric_growth - 1.0),
        rows,
        metric_growth,
        bergman_spread,
    })
}

// ---------------------------------------------------------------------------
// Oscillation family

/// Oscillation indices of the default sweeps.
pub const OSCILLATION_K: [u32; 3] = [8, 12, 16];
/// Grid sizes for the `L¹` norms, the curvature sup and the Hessian demo.
pub const L1_GRID: usize = 512;
pub const CURVATURE_GRID: usize = 128;
pub const HESSIAN_GRID: usize = 96;

/// Midpoint rule on an `n × n` Cartesian grid of `[−1,1]²`, restricted to the
/// open unit disc, with Euclidean area weights.
pub fn disc_grid(n: usize) -> Grid {
    let h = 2.0 / n as f64;
    let mut points = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let z = Complex64::new(-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h);
            if z.norm_sqr() < 1.0 {
                points.push(z);
            }
        }
    }
    let weights = vec![h * h; points.len()];
    Grid { points, weights }
}

/// Reference functions `f` for `‖k⁴φ_k − f‖_{L¹}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Reference {
    Zero,
    /// `k′⁴φ_{k′}` for a fixed `k′`.
    Single(u32),
    /// Mean of `j⁴φ_j` over the earlier entries of the sweep (zero for the first).
    RunningMean,
    /// Half the mean of `j⁴φ_j` over the whole sweep.
    HalfMean,
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillationRow {
    pub k: u32,
    pub l1: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillationTable {
    pub reference: Reference,
    pub rows: Vec<OscillationRow>,
    pub min: f64,
    /// `(4/π²)∫η dA`, the limit of `‖k⁴φ_k‖_{L¹}`.
    pub limit: f64,
    /// Half the limit.
    pub floor: f64,
    /// `floor`, or `floor/2` for [`Reference::HalfMean`].
    pub threshold: f64,
    pub above_floor: bool,
}

/// `‖sin(2kx)sin(2ky)η‖_{L¹}` tends to `(2/π)²∫η dA`.
pub fn oscillation_l1_limit(cutoff: &CutoffProfile) -> f64 {
    let (inner, _) = adaptive_gk15(&|r| cutoff.eta(r) * r, 0.5, 1.0, 1e-13);
    4.0 / (PI * PI) * 2.0 * PI * (0.125 + inner)
}

/// `k⁴φ_k` on `grid`.
fn scaled_phi(k: u32, grid: &Grid) -> Result<Vec<f64>> {
    let model = oscillation_family(k, CutoffProfile::default())?;
    let k4 = model.k().powi(4);
    Ok(grid.points.iter().map(|z| k4 * model.phi(*z)).collect())
}

pub fn oscillation_l1(k_list: &[u32], reference: Reference, grid_n: usize) -> Result<OscillationTable> {
    if k_list.is_empty() {
        return Err(LabError::InvalidArgument("empty k list".into()));
    }
    let grid = disc_grid(grid_n);
    let profiles: Vec<Vec<f64>> = k_list.iter().map(|&k| scaled_phi(k, &grid)).collect::<Result<_>>()?;
    let npts = grid.len();
    let mean_of = |idx: &[usize]| -> Vec<f64> {
        let mut out = vec![0.0; npts];
        for &i in idx {
            for (o, v) in out.iter_mut().zip(&profiles[i]) {
                *o += v / idx.len() as f64;
            }
        }
        out
    };
    let single = match reference {
        Reference::Single(kp) => Some(scaled_phi(kp, &grid)?),
        _ => None,
    };
    let all: Vec<usize> = (0..k_list.len()).collect();
    let half_mean: Vec<f64> = mean_of(&all).iter().map(|v| 0.5 * v).collect();
    let rows: Vec<OscillationRow> = k_list
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let f: Vec<f64> = match reference {
                Reference::Zero => vec![0.0; npts],
                Reference::Single(_) => single.clone().unwrap(),
                Reference::RunningMean => mean_of(&all[..i]),
                Reference::HalfMean => half_mean.clone(),
            };
            let l1 = profiles[i]
                .iter()
                .zip(&f)
                .zip(&grid.weights)
                .map(|((p, r), w)| (p - r).abs() * w)
                .sum();
            OscillationRow { k, l1 }
        })
        .collect();
    let min = rows.iter().map(|r| r.l1).fold(f64::INFINITY, f64::min);
    let limit = oscillation_l1_limit(&CutoffProfile::default());
    let floor = 0.5 * limit;
    let threshold = if reference == Reference::HalfMean { 0.5 * floor } else { floor };
    Ok(OscillationTable {
        reference,
        rows,
        min,
        limit,
        floor,
        threshold,
        above_floor: min > threshold,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureRow {
    pub k: u32,
    /// `sup |R_k + (64k⁴/π)φ_k − R_FS|`
    pub displayed_sup: f64,
    /// `sup |R_k − (2k⁴/π)φ_k − R_FS|`
    pub corrected_sup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureIdentity {
    pub rows: Vec<CurvatureRow>,
    /// `k·displayed_sup` over the sweep.
    pub displayed_verdict: Boundedness,
    /// `k·corrected_sup` over the sweep.
    pub corrected_verdict: Boundedness,
}

/// Residual sup below which the scaled identity counts as exact.
pub const CURVATURE_FLOOR: f64 = 1e-9;

pub fn curvature_identity(k_list: &[u32], grid_n: usize) -> Result<CurvatureIdentity> {
    let grid = disc_grid(grid_n);
    let fs = fubini_study();
    let rfs: Vec<f64> = grid.points.iter().map(|z| curvature_at(&fs, *z)).collect();
    let mut rows = Vec::new();
    for &k in k_list {
        let model = oscillation_family(k, CutoffProfile::default())?;
        let k4 = model.k().powi(4);
        let (mut lit, mut cor): (f64, f64) = (0.0, 0.0);
        for (z, r0) in grid.points.iter().zip(&rfs) {
            let rk = curvature_at(&model, *z);
            let phi = model.phi(*z);
            lit = lit.max((rk + 64.0 * k4 / PI * phi - r0).abs());
            cor = cor.max((rk - 2.0 * k4 / PI * phi - r0).abs());
        }
        rows.push(CurvatureRow {
            k,
            displayed_sup: lit,
            corrected_sup: cor,
        });
    }
    let ks: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
    let scaled = |f: fn(&CurvatureRow) -> f64| -> Vec<f64> { rows.iter().map(|r| r.k as f64 * f(r)).collect() };
    Ok(CurvatureIdentity {
        displayed_verdict: boundedness(&ks, &scaled(|r| r.displayed_sup), 10.0, 0.1, CURVATURE_FLOOR),
        corrected_verdict: boundedness(&ks, &scaled(|r| r.corrected_sup), 10.0, 0.1, CURVATURE_FLOOR),
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HessianRow {
    pub k: u32,
    pub m: usize,
    /// `‖∇²g_{m,k} − ∇²g_k‖_{L¹}` over the unit disc.
    pub l1: f64,
    /// `‖∇²g_k − ∇²g_FS‖_{L¹}`, the size of the oscillating part.
    pub model_l1: f64,
    /// `l1 / model_l1`: the share of the oscillation the Bergman metric misses.
    pub relative: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HessianDemo {
    pub rows: Vec<HessianRow>,
    /// `l1` is non-decreasing in `k`.
    pub non_decreasing: bool,
    /// `relative` is non-decreasing in `k`.
    pub relative_non_decreasing: bool,
}

pub fn hessian_l1_demo(m: usize, k_list: &[u32], grid_n: usize, spec: &GramSpec) -> Result<HessianDemo> {
    let grid = disc_grid(grid_n);
    let fs = fubini_study();
    let mut rows = Vec::new();
    for &k in k_list {
        let model = oscillation_family(k, CutoffProfile::default())?;
        let basis = SectionBasis::build(&model, m, spec)?;
        let field = metric_field(&basis, &grid.points, false)?;
        let (mut l1, mut model_l1) = (0.0, 0.0);
        for ((z, w), b) in grid.points.iter().zip(&grid.weights).zip(&field) {
            let mj = metric_jet(&model, *z);
            let fj = metric_jet(&fs, *z);
            l1 += w * hessian_frobenius(b.dzz - mj.dzz, b.dzzbar - mj.dzzbar);
            model_l1 += w * hessian_frobenius(mj.dzz - fj.dzz, mj.dzzbar - fj.dzzbar);
        }
        rows.push(HessianRow {
            k,
            m,
            l1,
            model_l1,
            relative: l1 / model_l1,
        });
    }
    Ok(HessianDemo {
        non_decreasing: rows.windows(2).all(|w| w[1].l1 >= w[0].l1),
        relative_non_decreasing: rows.windows(2).all(|w| w[1].relative >= w[0].relative),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_models::sharp_example_scaled;

    #[test]
    fn double_factorial_small() {
        assert!((ln_double_factorial(5) - 15f64.ln()).abs() < 1e-14);
        assert!((ln_double_factorial(6) - 48f64.ln()).abs() < 1e-14);
        assert_eq!(ln_double_factorial(0), 0.0);
    }

    #[test]
    fn displayed_k0_constant() {
        let m = 400;
        let c = overlap_leading_displayed(0, m) * (m as f64).powf(2.5);
        assert!((c - 3.0 * PI.sqrt() / 6400.0).abs() < 1e-16);
        let c1 = overlap_leading_displayed(1, m) * (m as f64).powf(3.5);
        assert!((c1 / (75.0 * PI.sqrt() / 12800.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn fs_beta_norm() {
        let fs = fubini_study();
        let v = moment(&fs, 50, 1, 1, &QuadSpec::default()).unwrap().value.to_f64();
        assert!((v * 50.0 * 51.0 - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn unperturbed_overlap_vanishes() {
        let flat = sharp_example_scaled(CutoffProfile::default(), 0.0).unwrap();
        let rows = sharp_overlap_asymptotics(&flat, &[100, 400], 0, &QuadSpec::default()).unwrap();
        for r in rows {
            assert!(r.integral.abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn richardson_recovers_linear_in_h() {
        let ms = [128, 256, 512, 1024];
        let qs: Vec<f64> = ms.iter().map(|&m| 2.0 + 3.0 / (m as f64).sqrt()).collect();
        let (c, e, _) = richardson(&ms, &qs);
        assert!((c - 2.0).abs() < 1e-12 && e < 1e-12);
    }

    #[test]
    fn oscillation_limit_matches_grid() {
        let t = oscillation_l1(&[24], Reference::Zero, 512).unwrap();
        assert!((t.rows[0].l1 / t.limit - 1.0).abs() < 0.02, "{t:?}");
    }
}
