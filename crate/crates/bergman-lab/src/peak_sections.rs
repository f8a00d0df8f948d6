//! Local peak-section integrals in the normalized chart.
//!
//! The normalized coordinate is `w = κz` with `κ² = 2g(0)`, so that the
//! volume density is 1 at the base point and `a ≈ e^{−π|w|²}`. The frame is
//! rescaled so that `a(0) = 1`. All integrals run over `|w| ≤ cutoff`, with the
//! default cutoff `log m / √m`.

use crate::bergman_engine::{boundedness, Boundedness};
use crate::error::{LabError, Result};
use crate::metric_models::MetricModel;
use crate::quadrature::{integrate_disc, integrate_radial, ln_factorial, LogScalar, QuadSpec};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeakSpec {
    pub p: usize,
    pub m: usize,
    /// Radius in the normalized chart; `None` means `log m / √m`.
    pub cutoff: Option<f64>,
}

impl PeakSpec {
    pub fn new(p: usize, m: usize) -> Self {
        PeakSpec { p, m, cutoff: None }
    }

    pub fn with_cutoff(mut self, c: f64) -> Self {
        self.cutoff = Some(c);
        self
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.cutoff
            .unwrap_or_else(|| (self.m as f64).ln() / (self.m as f64).sqrt())
    }
}

/// `κ = √(2g(0))`, the scale of the normalized chart.
pub fn chart_scale(model: &dyn MetricModel) -> f64 {
    (2.0 * model.metric_coeff(Complex64::new(0.0, 0.0))).sqrt()
}

fn check(model: &dyn MetricModel, spec: &PeakSpec) -> Result<f64> {
    if spec.m < 8 {
        return Err(LabError::InvalidArgument(format!(
            "peak sections need m ≥ 8, got {}",
            spec.m
        )));
    }
    let c = spec.cutoff_radius();
    let kappa = chart_scale(model);
    if !(c > 0.0) || c / kappa > model.chart_radius() {
        return Err(LabError::InvalidArgument(format!(
            "cutoff {c} lies outside the chart of `{}`",
            model.name()
        )));
    }
    Ok(kappa)
}

/// `∫_{|w|≤c} w^p w̄^q a^m dV` in the normalized chart.
fn local_moment(model: &dyn MetricModel, m: usize, p: usize, q: usize, cutoff: f64, quad: &QuadSpec) -> Result<LogScalar> {
    let kappa = (2.0 * model.metric_coeff(Complex64::new(0.0, 0.0))).sqrt();
    let la0 = model.log_weight(Complex64::new(0.0, 0.0));
    let mf = m as f64;
    let r_max = cutoff / kappa;
    let scale = (p + q) as f64 * kappa.ln();
    if p == q {
        if model.radial_at(r_max).is_some() {
            let out = integrate_radial(
                |r| {
                    let (la, g) = model.radial_at(r).unwrap();
                    LogScalar::from_ln(
                        scale + 2.0 * p as f64 * r.ln() + mf * (la - la0) + (4.0 * PI * g * r).ln(),
                    )
                },
                r_max,
                quad,
            )?;
            return Ok(out.value);
        }
    }
    let out = integrate_disc(
        |z| {
            let r = z.norm();
            let theta = z.arg();
            let angle = (p as f64 - q as f64) * theta;
            let lm = scale
                + (p + q) as f64 * r.ln()
                + mf * (model.log_weight(z) - la0)
                + (2.0 * model.metric_coeff(z)).ln();
            LogScalar {
                log_mag: lm,
                phase: Complex64::from_polar(1.0, angle),
            }
        },
        r_max,
        quad,
    )?;
    Ok(out.value)
}

/// `λ_p⁻² = ∫_{|w|≤c} |w|^{2p} a^m dV`.
pub fn lambda_inv_sq(model: &dyn MetricModel, spec: &PeakSpec, quad: &QuadSpec) -> Result<LogScalar> {
    check(model, spec)?;
    local_moment(model, spec.m, spec.p, spec.p, spec.cutoff_radius(), quad)
}

/// Normalized local overlap `λ_p λ_{p′} ∫ w^p w̄^{p′} a^m dV`.
pub fn peak_overlap(model: &dyn MetricModel, m: usize, p: usize, p_prime: usize, cutoff: Option<f64>, quad: &QuadSpec) -> Result<LogScalar> {
    if p == p_prime {
        return Err(LabError::InvalidArgument("overlap needs p ≠ p′".into()));
    }
    let spec = PeakSpec { p, m, cutoff };
    check(model, &spec)?;
    let c = spec.cutoff_radius();
    let np = local_moment(model, m, p, p, c, quad)?;
    let nq = local_moment(model, m, p_prime, p_prime, c, quad)?;
    // The cross moment may cancel to rounding level, so its tolerance is
    // absolute on the normalized scale.
    let mut q = quad.clone();
    q.abs_tol_log = q.abs_tol_log.max(OVERLAP_ABS_TOL.ln() + 0.5 * (np.log_mag + nq.log_mag));
    let cross = local_moment(model, m, p, p_prime, c, &q)?;
    Ok(cross / (np * nq).sqrt())
}

/// Absolute accuracy asked of a normalized overlap.
pub const OVERLAP_ABS_TOL: f64 = 1e-14;

/// `Q(p+1, x) = e^{−x} Σ_{k≤p} x^k/k!`, the regularized upper incomplete gamma
/// function at integer order, returned as a logarithm.
pub fn ln_gamma_tail(p: usize, x: f64) -> f64 {
    let terms = (0..=p).map(|k| LogScalar::from_ln(k as f64 * x.ln() - ln_factorial(k)));
    LogScalar::sum(terms).log_mag - x
}

/// Closed-form mass of `|w|^{2p} e^{−πm|w|²}` outside radius `c`, as a logarithm.
pub fn ln_gaussian_tail(p: usize, m: usize, c: f64) -> f64 {
    let mf = m as f64;
    ln_factorial(p) - p as f64 * PI.ln() - (p as f64 + 1.0) * mf.ln() + ln_gamma_tail(p, PI * mf * c * c)
}

#[derive(Clone, Debug, Serialize)]
pub struct PeakMassRow {
    pub m: usize,
    pub p: usize,
    pub lambda_inv_sq_log: f64,
    /// `m·|m^{1+p}λ_p⁻²/p! − π^{−p}|`
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeakMassTable {
    pub model: String,
    pub p: usize,
    pub rows: Vec<PeakMassRow>,
    pub verdict: Boundedness,
}

/// Values below this are rounding noise for the residual at desk scale.
pub const RESIDUAL_FLOOR: f64 = 1e-9;

pub fn check_peak_mass(model: &dyn MetricModel, p: usize, m_list: &[usize], quad: &QuadSpec) -> Result<PeakMassTable> {
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let l = lambda_inv_sq(model, &PeakSpec::new(p, m), quad)?;
        let mf = m as f64;
        let scaled = (l.log_mag + (1.0 + p as f64) * mf.ln() - ln_factorial(p)).exp();
        let residual = mf * (scaled - PI.powi(-(p as i32))).abs();
        rows.push(PeakMassRow {
            m,
            p,
            lambda_inv_sq_log: l.log_mag,
            residual,
        });
    }
    let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let vals: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    Ok(PeakMassTable {
        model: model.name().to_string(),
        p,
        verdict: boundedness(&ms, &vals, 10.0, 0.1, RESIDUAL_FLOOR),
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapRow {
    pub m: usize,
    pub overlap_re: f64,
    pub overlap_im: f64,
    pub scaled: f64,
}

/// `|overlap|·m`, divided by `log m` when `k = |p − p′|` is 2 or 4.
pub fn overlap_sweep(model: &dyn MetricModel, p: usize, p_prime: usize, m_list: &[usize], quad: &QuadSpec) -> Result<(Vec<OverlapRow>, Boundedness)> {
    let k = p.abs_diff(p_prime);
    let mut rows = Vec::new();
    for &m in m_list {
        let o = peak_overlap(model, m, p, p_prime, None, quad)?.to_complex();
        let mf = m as f64;
        let log_factor = if k == 2 || k == 4 { mf.ln() } else { 1.0 };
        rows.push(OverlapRow {
            m,
            overlap_re: o.re,
            overlap_im: o.im,
            scaled: o.norm() * mf / log_factor,
        });
    }
    let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let vals: Vec<f64> = rows.iter().map(|r| r.scaled).collect();
    let verdict = boundedness(&ms, &vals, 10.0, 0.1, RESIDUAL_FLOOR);
    Ok((rows, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::CutoffProfile;
    use crate::metric_models::{flat_gaussian, fubini_study, sharp_example};

    #[test]
    fn flat_mass_matches_closed_form() {
        let flat = flat_gaussian(8.0).unwrap();
        let quad = QuadSpec::default();
        for p in 0..3 {
            let spec = PeakSpec::new(p, 100);
            let l = lambda_inv_sq(&flat, &spec, &quad).unwrap();
            let c = spec.cutoff_radius();
            let full = ln_factorial(p) - p as f64 * PI.ln() - (p as f64 + 1.0) * 100f64.ln();
            let exact = full.exp() - ln_gaussian_tail(p, 100, c).exp();
            assert!((l.to_f64() / exact - 1.0).abs() < 1e-8, "p = {p}: {} vs {exact}", l.to_f64());
        }
    }

    #[test]
    fn fs_residual_tends_to_one() {
        let t = check_peak_mass(&fubini_study(), 0, &[64, 256, 1024], &QuadSpec::default()).unwrap();
        // λ⁻² = 1/(m+1) up to the tail, so m·|m/(m+1) − 1| = m/(m+1).
        for r in &t.rows {
            let m = r.m as f64;
            assert!((r.residual - m / (m + 1.0)).abs() < 1e-6, "{r:?}");
        }
        assert!(t.verdict.bounded);
    }

    #[test]
    fn radial_overlap_vanishes() {
        let o = peak_overlap(&fubini_study(), 128, 0, 1, None, &QuadSpec::default()).unwrap();
        assert!(o.to_complex().norm() < 1e-12);
    }

    #[test]
    fn overlap_is_conjugate_symmetric() {
        let sh = sharp_example(CutoffProfile::default()).unwrap();
        let q = QuadSpec::default();
        let a = peak_overlap(&sh, 128, 0, 1, None, &q).unwrap().to_complex();
        let b = peak_overlap(&sh, 128, 1, 0, None, &q).unwrap().to_complex();
        assert!((a - b.conj()).norm() <= 1e-14 * a.norm());
    }

    #[test]
    fn gamma_tail_small_cases() {
        assert!((ln_gamma_tail(0, 2.0) + 2.0).abs() < 1e-15);
        let q1 = (-3.0f64).exp() * 4.0;
        assert!((ln_gamma_tail(1, 3.0) - q1.ln()).abs() < 1e-14);
    }
}
