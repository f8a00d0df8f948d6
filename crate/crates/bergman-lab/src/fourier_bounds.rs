//! Angular Fourier profiles `h_k(r) = ∫ f(re^{iθ}) cos kθ dθ` of test
//! functions, the radial ODE they satisfy, and normalized growth bounds.

use crate::error::{LabError, Result};
use crate::metric_models::MetricModel;
use crate::peak_sections::chart_scale;
use crate::quadrature::{angular_modes, LogScalar, QuadSpec};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

type Field<'a> = Box<dyn Fn(Complex64) -> f64 + Send + Sync + 'a>;

/// A real function on a disc with a declared vanishing order at 0.
pub struct TestFunction<'a> {
    pub name: String,
    f: Field<'a>,
    laplacian: Option<Field<'a>>,
    /// Order of the jet that vanishes at 0: 1 means `f(0) = ∇f(0) = 0`.
    pub jet_order: u32,
    pub radius: f64,
    /// Rotation invariant: profiles are `2πf(r)` for `k = 0` and zero otherwise.
    pub radial: bool,
    /// `sup |f|` on the sampling grid.
    pub k1: f64,
    /// `sup |∂∂̄f|` on the sampling grid, when a Laplacian is available.
    pub k2: Option<f64>,
}

impl std::fmt::Debug for TestFunction<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("jet_order", &self.jet_order)
            .field("radius", &self.radius)
            .field("k1", &self.k1)
            .field("k2", &self.k2)
            .finish()
    }
}

/// Observed vanishing order `log(M(ρ₁)/M(ρ₂)) / log(ρ₁/ρ₂)` of the circle
/// maxima `M(ρ) = max_{|z|=ρ} |f|`.
fn local_order(f: &dyn Fn(Complex64) -> f64) -> f64 {
    let circle_max = |rho: f64| {
        (0..64)
            .map(|k| f(Complex64::from_polar(rho, 2.0 * PI * (k as f64 + 0.37) / 64.0)).abs())
            .fold(0.0, f64::max)
    };
    let (r1, r2) = (1e-2, 1e-3);
    let (m1, m2) = (circle_max(r1), circle_max(r2));
    if m2 == 0.0 {
        return f64::INFINITY;
    }
    (m1 / m2).ln() / (r1 / r2).ln()
}

impl<'a> TestFunction<'a> {
    /// Validates the vanishing order at 0 and records `K₁`, `K₂` on a polar grid.
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(Complex64) -> f64 + Send + Sync + 'a,
        laplacian: Option<Field<'a>>,
        jet_order: u32,
        radius: f64,
    ) -> Result<Self> {
        let name = name.into();
        let f: Field<'a> = Box::new(f);
        if !(radius > 0.0) || !(jet_order == 1 || jet_order == 3) {
            return Err(LabError::InvalidArgument(format!(
                "test function `{name}` needs radius > 0 and jet order 1 or 3"
            )));
        }
        let f0 = f(Complex64::new(0.0, 0.0));
        if !(f0.abs() < 1e-10) {
            return Err(LabError::InvalidArgument(format!(
                "test function `{name}` does not vanish at 0: f(0) = {f0:e}"
            )));
        }
        // Log factors lower the observed order by at most 1/|log ρ|.
        let order = local_order(&f);
        if order < jet_order as f64 + 0.5 {
            return Err(LabError::InvalidArgument(format!(
                "test function `{name}` vanishes to order {order:.2} at 0, below the declared {}",
                jet_order + 1
            )));
        }
        let mut k1: f64 = 0.0;
        let mut k2: f64 = 0.0;
        for i in 1..=40 {
            let r = radius * i as f64 / 40.0;
            for j in 0..64 {
                let z = Complex64::from_polar(r, 2.0 * PI * j as f64 / 64.0);
                k1 = k1.max(f(z).abs());
                if let Some(l) = &laplacian {
                    k2 = k2.max(l(z).abs() / 4.0);
                }
            }
        }
        Ok(TestFunction {
            name,
            k2: laplacian.as_ref().map(|_| k2),
            f,
            laplacian,
            jet_order,
            radius,
            radial: false,
            k1,
        })
    }

    pub fn into_radial(mut self) -> Self {
        self.radial = true;
        self
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        (self.f)(z)
    }

    pub fn laplacian(&self, z: Complex64) -> Option<f64> {
        self.laplacian.as_ref().map(|l| l(z))
    }

    /// `r² log r · cos 2θ`, with `Δf = 4 cos 2θ`.
    pub fn log_quadratic() -> Self {
        Self::new(
            "r2_log_r_cos2",
            |z: Complex64| {
                let r = z.norm();
                if r == 0.0 {
                    0.0
                } else {
                    r * r * r.ln() * (2.0 * z.arg()).cos()
                }
            },
            Some(Box::new(|z: Complex64| 4.0 * (2.0 * z.arg()).cos())),
            1,
            0.5,
        )
        .expect("valid test function")
    }

    /// `r⁴ log r · cos 4θ`, whose 3-jet vanishes.
    pub fn log_quartic() -> Self {
        Self::new(
            "r4_log_r_cos4",
            |z: Complex64| {
                let r = z.norm();
                if r == 0.0 {
                    0.0
                } else {
                    r.powi(4) * r.ln() * (4.0 * z.arg()).cos()
                }
            },
            // (r⁴ log r)'' + (r⁴ log r)'/r − 16 r² log r = 8r².
            Some(Box::new(|z: Complex64| 8.0 * z.norm_sqr() * (4.0 * z.arg()).cos())),
            3,
            0.5,
        )
        .expect("valid test function")
    }

    /// `Re z²`, harmonic.
    pub fn re_z_squared() -> Self {
        Self::new(
            "re_z2",
            |z: Complex64| (z * z).re,
            Some(Box::new(|_| 0.0)),
            1,
            0.5,
        )
        .expect("valid test function")
    }

    /// `|z|²`, with `Δf = 4`.
    pub fn modulus_squared() -> Self {
        Self::new(
            "abs_z2",
            |z: Complex64| z.norm_sqr(),
            Some(Box::new(|_| 4.0)),
            1,
            0.5,
        )
        .expect("valid test function")
    }
}

fn cosine_mode(f: &dyn Fn(Complex64) -> f64, r: f64, k: usize, quad: &QuadSpec) -> Result<f64> {
    let modes = angular_modes(
        |theta| LogScalar::from_f64(f(Complex64::from_polar(r, theta))),
        k,
        quad,
    )?;
    Ok(modes[k].to_complex().re)
}

/// `h_k(r) = ∫₀^{2π} f(re^{iθ}) cos kθ dθ` for each radius.
pub fn fourier_profile(tf: &TestFunction<'_>, k: usize, r_list: &[f64], quad: &QuadSpec) -> Result<Vec<f64>> {
    r_list
        .iter()
        .map(|&r| {
            if !(r >= 0.0 && r <= tf.radius) {
                return Err(LabError::InvalidArgument(format!(
                    "radius {r} outside the disc of `{}`",
                    tf.name
                )));
            }
            if tf.radial {
                return Ok(if k == 0 { 2.0 * PI * tf.eval(Complex64::new(r, 0.0)) } else { 0.0 });
            }
            cosine_mode(&*tf.f, r, k, quad)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OdeRow {
    pub r: f64,
    /// `h″ + h′/r − k²h/r²` by Richardson-refined central differences.
    pub lhs: f64,
    /// `∫ Δf cos kθ dθ`
    pub rhs: f64,
    pub residual: f64,
    /// `|L(δ) − L(δ/2)|/3`, the truncation error of the unrefined estimate.
    pub truncation: f64,
}

/// Residual tolerance above which a truncation-dominated residual is an error.
pub const ODE_TOL: f64 = 1e-6;

/// Relative finite-difference step `δ = STEP·r`.
pub const FD_STEP: f64 = 1e-3;

pub fn ode_residual(tf: &TestFunction<'_>, k: usize, r_list: &[f64], quad: &QuadSpec) -> Result<Vec<OdeRow>> {
    let lap = tf.laplacian.as_ref().ok_or_else(|| {
        LabError::InvalidArgument(format!("`{}` has no Laplacian for the right side", tf.name))
    })?;
    let kk = (k * k) as f64;
    let mut rows = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let d = FD_STEP * r;
        if !(r > 10.0 * d && r + d < tf.radius) {
            return Err(LabError::InvalidArgument(format!(
                "radius {r} too close to the boundary of the disc of `{}`",
                tf.name
            )));
        }
        let h = |x: f64| Ok(fourier_profile(tf, k, &[x], quad)?[0]);
        let h0 = h(r)?;
        let op = |d: f64| -> Result<f64> {
            let (hp, hm) = (h(r + d)?, h(r - d)?);
            let h2 = (hp - 2.0 * h0 + hm) / (d * d);
            let h1 = (hp - hm) / (2.0 * d);
            Ok(h2 + h1 / r - kk * h0 / (r * r))
        };
        let (coarse, fine) = (op(d)?, op(d / 2.0)?);
        let lhs = fine + (fine - coarse) / 3.0;
        let truncation = (fine - coarse).abs() / 3.0;
        let rhs = cosine_mode(&**lap, r, k, quad)?;
        let residual = (lhs - rhs).abs();
        let scale = rhs.abs().max(1.0);
        if residual > ODE_TOL * scale && truncation > 0.5 * residual {
            return Err(LabError::StepTooCoarse {
                r,
                estimate: truncation,
            });
        }
        rows.push(OdeRow {
            r,
            lhs,
            rhs,
            residual,
            truncation,
        });
    }
    Ok(rows)
}

/// Which growth estimate a check applies: `(i)` for a vanishing 1-jet,
/// `(ii)` for a vanishing 3-jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundCase {
    First,
    Third,
}

/// Dominant term of the growth bound at radius `r ≤ 1/e`.
pub fn bound_denominator(r: f64, k: usize, case: BoundCase) -> f64 {
    let log_term = r.ln().abs();
    match case {
        BoundCase::First if k == 2 => r * r * log_term,
        BoundCase::First => r * r,
        BoundCase::Third if k == 2 || k == 4 => r.powi(4) * log_term,
        BoundCase::Third => r.powi(4),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub case: BoundCase,
    pub k: usize,
    pub sup: f64,
    pub r_at_sup: f64,
    pub samples: Vec<BoundSample>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundSample {
    pub r: f64,
    pub h: f64,
    pub denominator: f64,
    pub ratio: f64,
}

/// Number of geometric radii used by [`check_bound`].
pub const BOUND_SAMPLES: usize = 121;

/// `sup |h_k(r)| / denominator(r)` over geometric radii in
/// `[10⁻⁴·r₁, r₁]`, `r₁ = min(r_max, 1/e)`.
pub fn check_bound(tf: &TestFunction<'_>, k: usize, r_max: f64, quad: &QuadSpec) -> Result<BoundCheck> {
    let case = if tf.jet_order == 3 {
        BoundCase::Third
    } else {
        BoundCase::First
    };
    let r1 = r_max.min((-1.0f64).exp()).min(tf.radius);
    if !(r1 > 0.0) {
        return Err(LabError::InvalidArgument(format!("r_max must be positive, got {r_max}")));
    }
    let r0 = 1e-4 * r1;
    let radii: Vec<f64> = (0..BOUND_SAMPLES)
        .map(|i| r0 * (r1 / r0).powf(i as f64 / (BOUND_SAMPLES - 1) as f64))
        .collect();
    let hs = fourier_profile(tf, k, &radii, quad)?;
    let samples: Vec<BoundSample> = radii
        .iter()
        .zip(&hs)
        .map(|(&r, &h)| {
            let denominator = bound_denominator(r, k, case);
            BoundSample {
                r,
                h,
                denominator,
                ratio: h.abs() / denominator,
            }
        })
        .collect();
    let best = samples
        .iter()
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .copied()
        .expect("nonempty sample set");
    Ok(BoundCheck {
        case,
        k,
        sup: best.ratio,
        r_at_sup: best.r,
        samples,
    })
}

/// The two functions of the normalized chart `w = κz` attached to a model:
/// `ψ = log a − log a(0) + π|w|²` and `φ = 2g/κ² − 1`.
pub fn induced_functions(model: &dyn MetricModel) -> Result<[TestFunction<'_>; 2]> {
    let kappa = chart_scale(model);
    let origin = Complex64::new(0.0, 0.0);
    let la0 = model.log_weight(origin);
    let radius = (0.5 * kappa * model.chart_radius()).min(0.5);
    // Radial models are sampled through their radial profile so that rounding
    // noise is constant on circles.
    let radial = model.radial_at(1.0).is_some();
    let eval = move |w: Complex64| -> (f64, f64) {
        let z = w / kappa;
        match radial {
            true => model.radial_at(z.norm()).expect("radial model"),
            false => (model.log_weight(z), model.metric_coeff(z)),
        }
    };
    let psi = TestFunction::new(
        format!("{}_psi", model.name()),
        move |w: Complex64| eval(w).0 - la0 + PI * w.norm_sqr(),
        None,
        1,
        radius,
    )?;
    let phi = TestFunction::new(
        format!("{}_phi", model.name()),
        move |w: Complex64| 2.0 * eval(w).1 / (kappa * kappa) - 1.0,
        None,
        1,
        radius,
    )?;
    Ok(match radial {
        true => [psi.into_radial(), phi.into_radial()],
        false => [psi, phi],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_harmonic_profiles() {
        let q = QuadSpec::default();
        let r = [0.1, 0.25, 0.4];
        let h = fourier_profile(&TestFunction::modulus_squared(), 0, &r, &q).unwrap();
        let h2 = fourier_profile(&TestFunction::re_z_squared(), 2, &r, &q).unwrap();
        let hl = fourier_profile(&TestFunction::log_quadratic(), 2, &r, &q).unwrap();
        for i in 0..3 {
            assert!((h[i] - 2.0 * PI * r[i] * r[i]).abs() < 1e-14);
            assert!((h2[i] - PI * r[i] * r[i]).abs() < 1e-14);
            assert!((hl[i] - PI * r[i] * r[i] * r[i].ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn log_quadratic_ratio_is_pi() {
        let b = check_bound(&TestFunction::log_quadratic(), 2, 0.3, &QuadSpec::default()).unwrap();
        assert!((b.sup - PI).abs() < 1e-10, "{}", b.sup);
    }

    #[test]
    fn ode_identity_on_modulus() {
        let rows = ode_residual(&TestFunction::modulus_squared(), 0, &[0.1, 0.2, 0.3], &QuadSpec::default()).unwrap();
        for row in rows {
            assert!((row.rhs - 8.0 * PI).abs() < 1e-12);
            assert!(row.residual < 1e-6, "{row:?}");
        }
    }

    #[test]
    fn induced_functions_have_finite_bounds() {
        use crate::metric_models::{build_model, registry};
        let q = QuadSpec::default();
        for info in registry() {
            let model = build_model(info.name, &Default::default()).unwrap();
            for tf in induced_functions(model.as_ref()).unwrap().iter() {
                for k in 0..5 {
                    let b = check_bound(tf, k, 0.3, &q).unwrap();
                    assert!(b.sup.is_finite(), "{} k = {k}", tf.name);
                }
            }
        }
    }

    #[test]
    fn rejects_wrong_vanishing_order() {
        let e = TestFunction::new("x", |z: Complex64| z.re, None, 1, 0.5);
        assert!(e.is_err());
        let e = TestFunction::new("z2", |z: Complex64| z.norm_sqr(), None, 3, 0.5);
        assert!(e.is_err());
    }
}
