//! Explicit polarized models on a chart of ℂ.
//!
//! Conventions: the Kähler form is `ω = √−1 g dz∧dz̄`, so the volume
//! density against Lebesgue measure is `2g`; curvature compatibility reads
//! `g = −(1/2π) ∂∂̄ log a`. Every model stores `log a` and derives `g` and its
//! derivatives from the same expression.

use crate::cutoff::CutoffProfile;
use crate::error::{LabError, Result};
use crate::jet::Jet2;
use crate::quadrature::adaptive_gk15;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Debug;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Radial,
    /// `log a` carries angular harmonics up to `e^{±iBθ}`.
    AngularBand(usize),
    Generic,
}

pub trait MetricModel: Send + Sync + Debug {
    fn name(&self) -> &str;
    /// Radius of the chart disc; `f64::INFINITY` for the dense chart of ℂP¹.
    fn chart_radius(&self) -> f64;
    fn symmetry(&self) -> Symmetry;
    fn degree_cap(&self) -> usize;
    fn params(&self) -> BTreeMap<String, f64>;
    fn log_weight(&self, z: Complex64) -> f64;
    fn metric_coeff(&self, z: Complex64) -> f64;
    /// Taylor jet of `log a` in `(x, y)` to total order 4.
    fn log_weight_jet(&self, z: Complex64) -> Jet2;

    /// `(log a, g)` at radius `r` for radial models.
    fn radial_at(&self, _r: f64) -> Option<(f64, f64)> {
        None
    }

    /// `log a` and `g` on the circle of radius `r` at `θ_k = 2πk/N`.
    fn polar_samples(&self, r: f64, log_a: &mut [f64], g: &mut [f64]) {
        let n = log_a.len();
        if let Some((la, gv)) = self.radial_at(r) {
            log_a.fill(la);
            g.fill(gv);
            return;
        }
        for k in 0..n {
            let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64);
            log_a[k] = self.log_weight(z);
            g[k] = self.metric_coeff(z);
        }
    }
}

/// `g` and its derivatives up to second order at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricJet {
    pub g: f64,
    /// `∂g/∂z`
    pub dz: Complex64,
    /// `∂²g/∂z²`
    pub dzz: Complex64,
    /// `∂²g/∂z∂z̄`
    pub dzzbar: f64,
}

impl MetricJet {
    /// Euclidean norm of the real gradient, `2|∂g|`.
    pub fn gradient_norm(&self) -> f64 {
        2.0 * self.dz.norm()
    }

    /// Real gradient `(∂ₓg, ∂ᵧg)` as a complex number `∂ₓg + i∂ᵧg`.
    pub fn real_gradient(&self) -> Complex64 {
        2.0 * self.dz.conj()
    }

    /// Frobenius norm of the real Hessian.
    pub fn hessian_norm(&self) -> f64 {
        hessian_frobenius(self.dzz, self.dzzbar)
    }
}

/// `‖∇²h‖_F` from the Wirtinger second derivatives `∂²h` and `∂∂̄h`.
pub fn hessian_frobenius(dzz: Complex64, dzzbar: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 * (dzz.norm_sqr() + dzzbar * dzzbar).sqrt()
}

pub fn metric_jet(model: &dyn MetricModel, z: Complex64) -> MetricJet {
    let j = model.log_weight_jet(z);
    let c = -1.0 / (2.0 * PI);
    MetricJet {
        g: c * j.wirtinger(1, 1).re,
        dz: j.wirtinger(2, 1) * c,
        dzz: j.wirtinger(3, 1) * c,
        dzzbar: c * j.wirtinger(2, 2).re,
    }
}

/// Curvature component `R = −∂∂̄g − g⁻¹|∂g|²`. Positive for the round sphere: `1/π` at the FS origin.
pub fn curvature_at(model: &dyn MetricModel, z: Complex64) -> f64 {
    let j = metric_jet(model, z);
    -j.dzzbar - j.dz.norm_sqr() / j.g
}

/// Gaussian curvature `−g⁻¹∂∂̄ log g` of `2g|dz|²`. Agrees with `R/g²`
/// wherever `∂g = 0`.
pub fn gaussian_curvature(model: &dyn MetricModel, z: Complex64) -> f64 {
    let j = metric_jet(model, z);
    -(j.dzzbar - j.dz.norm_sqr() / j.g) / (j.g * j.g)
}

/// Finite-difference residual of `(1/2π)∂∂̄ log a + g`, relative to `g`.
pub fn compatibility_residual(model: &dyn MetricModel, z: Complex64, step: f64) -> f64 {
    let h = step;
    let l = |dx: f64, dy: f64| model.log_weight(z + Complex64::new(dx, dy));
    let c = l(0.0, 0.0);
    let lap = (l(h, 0.0) + l(-h, 0.0) + l(0.0, h) + l(0.0, -h) - 4.0 * c) / (h * h);
    let g = model.metric_coeff(z);
    (lap / (8.0 * PI) + g).abs() / g.abs()
}

fn ln1p_sq(r: f64) -> f64 {
    if r > 1.0 {
        2.0 * r.ln() + (1.0 / (r * r)).ln_1p()
    } else {
        (r * r).ln_1p()
    }
}

fn fs_g(r: f64) -> f64 {
    1.0 / (2.0 * PI * (1.0 + r * r).powi(2))
}

fn fs_jet(z: Complex64) -> Jet2 {
    let (x, y) = Jet2::coords(z);
    -(x * x + y * y + 1.0).ln()
}

#[derive(Clone, Debug, Default)]
pub struct FubiniStudy;

pub fn fubini_study() -> FubiniStudy {
    FubiniStudy
}

impl MetricModel for FubiniStudy {
    fn name(&self) -> &str {
        "fubini_study"
    }
    fn chart_radius(&self) -> f64 {
        f64::INFINITY
    }
    fn symmetry(&self) -> Symmetry {
        Symmetry::Radial
    }
    fn degree_cap(&self) -> usize {
        4096
    }
    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::new()
    }
    fn log_weight(&self, z: Complex64) -> f64 {
        -ln1p_sq(z.norm())
    }
    fn metric_coeff(&self, z: Complex64) -> f64 {
        fs_g(z.norm())
    }
    fn log_weight_jet(&self, z: Complex64) -> Jet2 {
        fs_jet(z)
    }
    fn radial_at(&self, r: f64) -> Option<(f64, f64)> {
        Some((-ln1p_sq(r), fs_g(r)))
    }
}

#[derive(Clone, Debug)]
pub struct FlatGaussian {
    radius: f64,
}

pub fn flat_gaussian(radius: f64) -> Result<FlatGaussian> {
    if !(radius > 0.0) {
        return Err(LabError::InvalidModel(format!(
            "flat_gaussian radius must be positive, got {radius}"
        )));
    }
    Ok(FlatGaussian { radius })
}

impl Default for FlatGaussian {
    fn default() -> Self {
        FlatGaussian { radius: 8.0 }
    }
}

impl MetricModel for FlatGaussian {
    fn name(&self) -> &str {
        "flat_gaussian"
    }
    fn chart_radius(&self) -> f64 {
        self.radius
    }
    fn symmetry(&self) -> Symmetry {
        Symmetry::Radial
    }
    fn degree_cap(&self) -> usize {
        4096
    }
    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("radius".to_string(), self.radius)])
    }
    fn log_weight(&self, z: Complex64) -> f64 {
        -PI * z.norm_sqr()
    }
    fn metric_coeff(&self, _z: Complex64) -> f64 {
        0.5
    }
    fn log_weight_jet(&self, z: Complex64) -> Jet2 {
        let (x, y) = Jet2::coords(z);
        (x * x + y * y) * (-PI)
    }
    fn radial_at(&self, r: f64) -> Option<(f64, f64)> {
        Some((-PI * r * r, 0.5))
    }
}

/// FS weight times `exp(η(|z|)|z|³(z+z̄)/400)`: a `C^{3,1}` perturbation
/// supported in the unit disc with a single angular harmonic.
#[derive(Clone, Debug)]
pub struct SharpExample {
    cutoff: CutoffProfile,
    coefficient: f64,
}

pub fn sharp_example(cutoff: CutoffProfile) -> Result<SharpExample> {
    sharp_example_scaled(cutoff, 1.0 / 400.0)
}

/// The same construction with a different perturbation coefficient; `0` gives FS.
pub fn sharp_example_scaled(cutoff: CutoffProfile, coefficient: f64) -> Result<SharpExample> {
    let model = SharpExample { cutoff, coefficient };
    check_positive(&model, 1.0, 64, 64)?;
    Ok(model)
}

impl SharpExample {
    pub fn cutoff(&self) -> &CutoffProfile {
        &self.cutoff
    }

    /// `(P, ΔP/cos θ)` for the perturbation `P = c η r⁴ cos θ · 2`.
    fn radial_parts(&self, r: f64) -> (f64, f64) {
        if r >= 1.0 {
            return (0.0, 0.0);
        }
        let [e, e1, e2, _, _] = self.cutoff.derivs(r);
        let c = 2.0 * self.coefficient;
        let r2 = r * r;
        (
            c * e * r2 * r2,
            c * (e2 * r2 * r2 + 9.0 * e1 * r2 * r + 15.0 * e * r2),
        )
    }
}

impl MetricModel for SharpExample {
    fn name(&self) -> &str {
        "sharp_example"
    }
    fn chart_radius(&self) -> f64 {
        f64::INFINITY
    }
    fn symmetry(&self) -> Symmetry {
        Symmetry::AngularBand(1)
    }
    fn degree_cap(&self) -> usize {
        2048
    }
    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("coefficient".to_string(), self.coefficient),
            ("cutoff_eps".to_string(), self.cutoff.eps()),
        ])
    }
    fn log_weight(&self, z: Complex64) -> f64 {
        let r = z.norm();
        let (p, _) = self.radial_parts(r);
        let c = if r > 0.0 { z.re / r } else { 0.0 };
        -ln1p_sq(r) + p * c
    }
    fn metric_coeff(&self, z: Complex64) -> f64 {
        let r = z.norm();
        let (_, lap) = self.radial_parts(r);
        let c = if r > 0.0 { z.re / r } else { 0.0 };
        fs_g(r) - lap * c / (8.0 * PI)
    }
    fn log_weight_jet(&self, z: Complex64) -> Jet2 {
        let base = fs_jet(z);
        let r0 = z.norm();
        if r0 == 0.0 || r0 >= 1.0 + 1e-12 {
            // The perturbation is O(|z|⁴) at the origin: its 3-jet vanishes.
            return base;
        }
        let (x, y) = Jet2::coords(z);
        let s = x * x + y * y;
        let r = s.sqrt();
        let eta = self.cutoff.compose(r);
        base + eta * s.powf(1.5) * x * (2.0 * self.coefficient)
    }
    fn polar_samples(&self, r: f64, log_a: &mut [f64], g: &mut [f64]) {
        let n = log_a.len();
        let (p, lap) = self.radial_parts(r);
        let la0 = -ln1p_sq(r);
        let g0 = fs_g(r);
        for k in 0..n {
            let c = (2.0 * PI * k as f64 / n as f64).cos();
            log_a[k] = la0 + p * c;
            g[k] = g0 - lap * c / (8.0 * PI);
        }
    }
}

/// `log a = φ_k − log(1+|z|²)` with `φ_k = −k⁻⁴ sin(2kx) sin(2ky) η(|z|)`.
#[derive(Clone, Debug)]
pub struct OscillationFamily {
    k: f64,
    cutoff: CutoffProfile,
}

pub fn oscillation_family(k: u32, cutoff: CutoffProfile) -> Result<OscillationFamily> {
    if k == 0 {
        return Err(LabError::InvalidModel("oscillation index must be ≥ 1".into()));
    }
    let model = OscillationFamily {
        k: k as f64,
        cutoff,
    };
    check_positive(&model, 1.0, 96, 96).map_err(|e| match e {
        LabError::InvalidModel(msg) => LabError::InvalidModel(format!(
            "oscillation k = {k} is below the positivity threshold: {msg}"
        )),
        other => other,
    })?;
    Ok(model)
}

impl OscillationFamily {
    pub fn k(&self) -> f64 {
        self.k
    }

    /// `φ_k(z)`.
    pub fn phi(&self, z: Complex64) -> f64 {
        let k = self.k;
        -(2.0 * k * z.re).sin() * (2.0 * k * z.im).sin() * self.cutoff.eta(z.norm()) / k.powi(4)
    }

    /// `Δφ_k(z)` in closed form.
    pub fn laplacian_phi(&self, z: Complex64) -> f64 {
        let k = self.k;
        let r = z.norm();
        let (sx, cx) = (2.0 * k * z.re).sin_cos();
        let (sy, cy) = (2.0 * k * z.im).sin_cos();
        let s = sx * sy;
        let [e, e1, e2, _, _] = self.cutoff.derivs(r);
        let mut lap = -8.0 * k * k * s * e;
        if r > 0.0 && e1 != 0.0 {
            let grad = 2.0 * k * (cx * sy * z.re + sx * cy * z.im) / r;
            lap += 2.0 * grad * e1 + s * (e2 + e1 / r);
        }
        -lap / k.powi(4)
    }
}

impl MetricModel for OscillationFamily {
    fn name(&self) -> &str {
        "oscillation"
    }
    fn chart_radius(&self) -> f64 {
        f64::INFINITY
    }
    fn symmetry(&self) -> Symmetry {
        Symmetry::Generic
    }
    fn degree_cap(&self) -> usize {
        128
    }
    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("k".to_string(), self.k),
            ("cutoff_eps".to_string(), self.cutoff.eps()),
        ])
    }
    fn log_weight(&self, z: Complex64) -> f64 {
        self.phi(z) - ln1p_sq(z.norm())
    }
    fn metric_coeff(&self, z: Complex64) -> f64 {
        fs_g(z.norm()) - self.laplacian_phi(z) / (8.0 * PI)
    }
    fn log_weight_jet(&self, z: Complex64) -> Jet2 {
        let base = fs_jet(z);
        let r0 = z.norm();
        if r0 >= 1.0 + 1e-12 {
            return base;
        }
        let (x, y) = Jet2::coords(z);
        let k = self.k;
        let osc = (x * (2.0 * k)).sin() * (y * (2.0 * k)).sin();
        let eta = if r0 <= 0.5 - 1e-12 {
            Jet2::constant(1.0)
        } else {
            self.cutoff.compose((x * x + y * y).sqrt())
        };
        base - osc * eta * k.powi(-4)
    }
}

fn check_positive(model: &dyn MetricModel, radius: f64, nr: usize, nt: usize) -> Result<()> {
    for i in 0..=nr {
        let r = radius * i as f64 / nr as f64;
        for j in 0..nt {
            let z = Complex64::from_polar(r, 2.0 * PI * j as f64 / nt as f64);
            let g = model.metric_coeff(z);
            if !(g > 0.0) {
                return Err(LabError::InvalidModel(format!(
                    "{}: metric coefficient {g:.3e} ≤ 0 at z = {:.4}{:+.4}i",
                    model.name(),
                    z.re,
                    z.im
                )));
            }
        }
    }
    Ok(())
}

/// Raw cylinder density `q = r² g′` of a radial family, in `t = ln r`.
#[derive(Clone, Debug)]
enum ProfileShape {
    /// Flat caps joined by hyperbolic cusps to a long thin cylinder.
    Neck { n: u32, en: f64, cutoff: CutoffProfile },
    /// `g′ = e^{2f}` with a conical point smoothed at scale `e^{−n}`.
    Cusp { n: u32, theta: f64, cutoff: CutoffProfile },
}

impl ProfileShape {
    /// `η₂(ρ) = η(ρ − 1)`: one on `B_{3/2}`, supported in `B_2`.
    fn eta2(cutoff: &CutoffProfile, rho: Jet2) -> Jet2 {
        cutoff.compose(rho - 1.0)
    }

    /// `F(ℓ) = e^ℓ f(e^ℓ)` with `ℓ = log|u|` in the rescaled chart.
    fn neck_f(n: u32, en: f64, cutoff: &CutoffProfile, ell: Jet2) -> Jet2 {
        let u = ell.exp();
        let a = Self::eta2(cutoff, u);
        if a.value() == 1.0 && a.coeff(1, 0) == 0.0 {
            return u;
        }
        let b = Self::eta2(cutoff, (ell - en).exp());
        let one = Jet2::constant(1.0);
        let tail = (one - b) * (-(n as f64)).exp();
        let mid = if b.value() == 0.0 && b.coeff(1, 0) == 0.0 {
            tail
        } else {
            b / ell + tail
        };
        a * u + (one - a) * mid
    }

    fn q_jet(&self, t: Jet2) -> Jet2 {
        match self {
            ProfileShape::Neck { n, en, cutoff } => {
                let tt = if t.value() > 0.0 { -t } else { t };
                let f = Self::neck_f(*n, *en, cutoff, tt + 2.0 * en);
                f * f
            }
            ProfileShape::Cusp { n, theta, cutoff } => {
                let nn = *n as f64;
                let r = t.exp();
                let f = if t.value() < -nn {
                    (r * r * (2.0 * nn).exp() - 1.0 - 2.0 * nn) * (0.5 * (theta - 1.0))
                } else {
                    let eta = cutoff.compose(r);
                    let one = Jet2::constant(1.0);
                    eta * t * (theta - 1.0) - (one - eta) * (r * r + 1.0).ln()
                };
                (f * 2.0 + t * 2.0).exp()
            }
        }
    }

    fn q(&self, t: f64) -> f64 {
        self.q_jet(Jet2::var_x(t)).value()
    }

    /// Table range and step; the lower and upper tails are flat and spherical.
    fn range(&self) -> (f64, f64) {
        match self {
            ProfileShape::Neck { en, .. } => {
                let lo = 1.5f64.ln() - 2.0 * en;
                (lo, -lo)
            }
            ProfileShape::Cusp { n, .. } => (-(*n as f64) - 20.0, 20.0),
        }
    }
}

const TABLE_STEP: f64 = 1.0 / 64.0;

/// Radial model defined by a density profile; `log a` follows from the
/// curvature equation `L″ = −8πq` in `t = ln r`, with `a(0) = 1`.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    name: String,
    shape: ProfileShape,
    params: BTreeMap<String, f64>,
    scale: f64,
    raw_total: f64,
    t_min: f64,
    t_max: f64,
    q_lo: f64,
    q_hi: f64,
    l_knots: Vec<f64>,
    dl_knots: Vec<f64>,
}

impl RadialProfile {
    fn build(name: &str, shape: ProfileShape, params: BTreeMap<String, f64>) -> Result<Self> {
        let (t_min, t_max) = shape.range();
        let panels = ((t_max - t_min) / TABLE_STEP).round() as usize;
        let t_max = t_min + panels as f64 * TABLE_STEP;
        let q_lo_raw = shape.q(t_min);
        let q_hi_raw = shape.q(t_max);
        let mut mass = Vec::with_capacity(panels);
        let mut moment = Vec::with_capacity(panels);
        let mut total = 0.5 * q_lo_raw + 0.5 * q_hi_raw;
        for i in 0..panels {
            let a = t_min + i as f64 * TABLE_STEP;
            let b = a + TABLE_STEP;
            let qa = shape.q(a).max(shape.q(b)).max(f64::MIN_POSITIVE);
            let tol = 1e-15 * qa * TABLE_STEP;
            let (m0, _) = adaptive_gk15(&|s| shape.q(s), a, b, tol);
            let (m1, _) = adaptive_gk15(&|s| (b - s) * shape.q(s), a, b, tol * TABLE_STEP);
            total += m0;
            mass.push(m0);
            moment.push(m1);
        }
        if !(total > 0.0 && total.is_finite()) {
            return Err(LabError::InvalidModel(format!("{name}: profile mass {total}")));
        }
        let scale = 1.0 / (4.0 * PI * total);
        let q_lo = q_lo_raw * scale;
        let q_hi = q_hi_raw * scale;
        let mut l = vec![-2.0 * PI * q_lo];
        let mut dl = vec![-4.0 * PI * q_lo];
        for i in 0..panels {
            let (lk, dk) = (l[i], dl[i]);
            l.push(lk + dk * TABLE_STEP - 8.0 * PI * scale * moment[i]);
            dl.push(dk - 8.0 * PI * scale * mass[i]);
        }
        Ok(RadialProfile {
            name: name.to_string(),
            shape,
            params,
            scale,
            raw_total: total,
            t_min,
            t_max,
            q_lo,
            q_hi,
            l_knots: l,
            dl_knots: dl,
        })
    }

    /// Normalized density `q(t) = r² g(r)`.
    pub fn density(&self, t: f64) -> f64 {
        if t <= self.t_min {
            self.q_lo * (2.0 * (t - self.t_min)).exp()
        } else if t >= self.t_max {
            self.q_hi * (-2.0 * (t - self.t_max)).exp()
        } else {
            self.scale * self.shape.q(t)
        }
    }

    /// `L(t) = log a(e^t)` and `L′(t)`.
    pub fn log_weight_t(&self, t: f64) -> (f64, f64) {
        if t <= self.t_min {
            let e = (2.0 * t).exp() * (-2.0 * self.t_min).exp();
            return (-2.0 * PI * self.q_lo * e, -4.0 * PI * self.q_lo * e);
        }
        let last = self.l_knots.len() - 1;
        if t >= self.t_max {
            let d = t - self.t_max;
            let (lm, dm) = (self.l_knots[last], self.dl_knots[last]);
            let slope = dm - 4.0 * PI * self.q_hi;
            let decay = (-2.0 * d).exp();
            return (
                lm + slope * d - 2.0 * PI * self.q_hi * (decay - 1.0),
                slope + 4.0 * PI * self.q_hi * decay,
            );
        }
        let k = (((t - self.t_min) / TABLE_STEP).floor() as usize).min(last - 1);
        let tk = self.t_min + k as f64 * TABLE_STEP;
        let (m0, _) = crate::quadrature::gauss_kronrod_15(|s| self.shape.q(s), tk, t);
        let (m1, _) = crate::quadrature::gauss_kronrod_15(|s| (t - s) * self.shape.q(s), tk, t);
        let c = 8.0 * PI * self.scale;
        (
            self.l_knots[k] + self.dl_knots[k] * (t - tk) - c * m1,
            self.dl_knots[k] - c * m0,
        )
    }

    /// Riemannian area `2π∫q′ dt` of the unnormalized metric.
    pub fn raw_volume(&self) -> f64 {
        2.0 * PI * self.raw_total
    }

    /// Scale factor from the unnormalized to the unit-volume metric.
    pub fn normalization(&self) -> f64 {
        self.scale
    }

    /// Gaussian curvature of the unnormalized metric `g′|dz|²` at `t`.
    pub fn raw_gaussian_curvature(&self, t: f64) -> f64 {
        let q = self.shape.q_jet(Jet2::var_x(t));
        let lf = q.ln();
        -lf.partial(2, 0) / (2.0 * q.value())
    }

    pub fn table_range(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    fn l_derivs(&self, t: f64) -> [f64; 5] {
        let (l, dl) = self.log_weight_t(t);
        let c = -8.0 * PI;
        if t <= self.t_min || t >= self.t_max {
            let q = self.density(t);
            let s = if t <= self.t_min { 2.0 } else { -2.0 };
            return [l, dl, c * q, c * s * q, c * 4.0 * q];
        }
        let qj = self.shape.q_jet(Jet2::var_x(t));
        [
            l,
            dl,
            c * self.scale * qj.value(),
            c * self.scale * qj.partial(1, 0),
            c * self.scale * qj.partial(2, 0),
        ]
    }
}

impl MetricModel for RadialProfile {
    fn name(&self) -> &str {
        &self.name
    }
    fn chart_radius(&self) -> f64 {
        f64::INFINITY
    }
    fn symmetry(&self) -> Symmetry {
        Symmetry::Radial
    }
    fn degree_cap(&self) -> usize {
        4096
    }
    fn params(&self) -> BTreeMap<String, f64> {
        self.params.clone()
    }
    fn log_weight(&self, z: Complex64) -> f64 {
        self.radial_at(z.norm()).map(|v| v.0).unwrap_or(f64::NAN)
    }
    fn metric_coeff(&self, z: Complex64) -> f64 {
        self.radial_at(z.norm()).map(|v| v.1).unwrap_or(f64::NAN)
    }
    fn log_weight_jet(&self, z: Complex64) -> Jet2 {
        let r = z.norm();
        let (x, y) = Jet2::coords(z);
        let s = x * x + y * y;
        if r == 0.0 || r.ln() <= self.t_min {
            let g0 = self.q_lo * (-2.0 * self.t_min).exp();
            return s * (-2.0 * PI * g0);
        }
        let t = s.ln() * 0.5;
        t.compose(self.l_derivs(r.ln()))
    }
    fn radial_at(&self, r: f64) -> Option<(f64, f64)> {
        if r == 0.0 {
            return Some((0.0, self.q_lo * (-2.0 * self.t_min).exp()));
        }
        let t = r.ln();
        let (l, _) = self.log_weight_t(t);
        Some((l, self.density(t) * (-2.0 * t).exp()))
    }
}

/// Unit-volume radial metric whose unnormalized form has two flat caps of
/// curvature zero, hyperbolic necks (`K = −1`) and a cylinder of length
/// `≈ 2eⁿ` and circumference `≈ 2πe⁻ⁿ`. The metric at `|z| = 1` tends to 0.
pub fn neck_family(n: u32, cutoff: CutoffProfile) -> Result<RadialProfile> {
    if n == 0 || n > 5 {
        return Err(LabError::InvalidModel(format!(
            "neck_family index must be in 1..=5, got {n}"
        )));
    }
    let en = (n as f64).exp();
    let params = BTreeMap::from([
        ("n".to_string(), n as f64),
        ("cutoff_eps".to_string(), cutoff.eps()),
    ]);
    let shape = ProfileShape::Neck { n, en, cutoff };
    let model = RadialProfile::build("neck_family", shape, params)?;
    let vol = model.raw_volume();
    if !(vol > 2.0 * PI && vol < 20.0 * PI) {
        return Err(LabError::InvalidModel(format!(
            "neck_family({n}): unnormalized volume {vol:.6} outside (2π, 20π)"
        )));
    }
    Ok(model)
}

/// Unit-volume radial metric `∝ e^{2f_n}` with `f_n = (θ−1)log|w|` near the
/// origin, smoothed below `|w| = e⁻ⁿ`, and spherical beyond `|w| = 1`.
pub fn cusp_family(n: u32, theta: f64, cutoff: CutoffProfile) -> Result<RadialProfile> {
    if n == 0 || n > 12 {
        return Err(LabError::InvalidModel(format!(
            "cusp_family index must be in 1..=12, got {n}"
        )));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(LabError::InvalidModel(format!("cusp θ must lie in (0,1), got {theta}")));
    }
    let params = BTreeMap::from([
        ("n".to_string(), n as f64),
        ("theta".to_string(), theta),
        ("cutoff_eps".to_string(), cutoff.eps()),
    ]);
    RadialProfile::build("cusp_family", ProfileShape::Cusp { n, theta, cutoff }, params)
}

/// Registry entry for `models list`.
#[derive(Clone, Debug, Serialize)]
pub struct ModelInfo {
    pub name: &'static str,
    pub symmetry: &'static str,
    pub params: Vec<(&'static str, &'static str)>,
    pub summary: &'static str,
}

pub fn registry() -> Vec<ModelInfo> {
    vec![
        ModelInfo {
            name: "fubini_study",
            symmetry: "radial",
            params: vec![],
            summary: "round metric of unit volume on the dense chart; balanced for every m",
        },
        ModelInfo {
            name: "flat_gaussian",
            symmetry: "radial",
            params: vec![("radius", "chart radius (default 8)")],
            summary: "weight e^{-π|z|²} with g = 1/2 on a disc",
        },
        ModelInfo {
            name: "sharp_example",
            symmetry: "angular_band(1)",
            params: vec![
                ("coefficient", "perturbation coefficient (default 1/400)"),
                ("cutoff_eps", "cutoff bump sharpness (default 0.72)"),
            ],
            summary: "C^{1,1} perturbation of the round metric with a √m-rate gradient error",
        },
        ModelInfo {
            name: "neck_family",
            symmetry: "radial",
            params: vec![("n", "family index 1..=5"), ("cutoff_eps", "cutoff sharpness")],
            summary: "unit-volume sphere with a long thin cylinder through |z| = 1",
        },
        ModelInfo {
            name: "cusp_family",
            symmetry: "radial",
            params: vec![
                ("n", "family index 1..=12"),
                ("theta", "cone exponent in (0,1), default 0.5"),
                ("cutoff_eps", "cutoff sharpness"),
            ],
            summary: "round metric with a smoothed conical blow-up at the origin",
        },
        ModelInfo {
            name: "oscillation",
            symmetry: "generic",
            params: vec![("k", "oscillation frequency ≥ 3"), ("cutoff_eps", "cutoff sharpness")],
            summary: "round weight times exp(φ_k) with φ_k = -k⁻⁴ sin 2kx sin 2ky η",
        },
    ]
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn int_param(params: &BTreeMap<String, f64>, key: &str, default: u32) -> Result<u32> {
    let v = param(params, key, default as f64);
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(LabError::InvalidModel(format!("parameter {key} must be a non-negative integer, got {v}")));
    }
    Ok(v as u32)
}

/// Builds a model from its registry name and parameter map.
pub fn build_model(name: &str, params: &BTreeMap<String, f64>) -> Result<Box<dyn MetricModel>> {
    let known: Vec<&str> = registry().iter().map(|m| m.name).collect();
    if let Some(bad) = params.keys().find(|k| {
        registry()
            .iter()
            .find(|m| m.name == name)
            .map(|m| !m.params.iter().any(|(p, _)| p == k))
            .unwrap_or(false)
    }) {
        return Err(LabError::InvalidModel(format!(
            "model {name} has no parameter '{bad}'"
        )));
    }
    let cutoff = || CutoffProfile::new(param(params, "cutoff_eps", 0.72));
    Ok(match name {
        "fubini_study" => Box::new(fubini_study()),
        "flat_gaussian" => Box::new(flat_gaussian(param(params, "radius", 8.0))?),
        "sharp_example" => Box::new(sharp_example_scaled(cutoff(), param(params, "coefficient", 1.0 / 400.0))?),
        "neck_family" => Box::new(neck_family(int_param(params, "n", 2)?, cutoff())?),
        "cusp_family" => Box::new(cusp_family(
            int_param(params, "n", 2)?,
            param(params, "theta", 0.5),
            cutoff(),
        )?),
        "oscillation" => Box::new(oscillation_family(int_param(params, "k", 8)?, cutoff())?),
        other => {
            let mut ranked: Vec<(f64, &str)> = known
                .iter()
                .map(|k| (strsim::jaro_winkler(other, k), *k))
                .collect();
            ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
            let suggestions: Vec<&str> = ranked.iter().map(|r| r.1).collect();
            return Err(LabError::InvalidModel(format!(
                "unknown model '{other}'; known models: {}",
                suggestions.join(", ")
            )));
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fs_curvature_at_origin() {
        let fs = fubini_study();
        assert!((curvature_at(&fs, Complex64::new(0.0, 0.0)) - 1.0 / PI).abs() < 1e-13);
        let z = Complex64::new(0.3, -0.8);
        assert!((gaussian_curvature(&fs, z) - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn sharp_closed_form_matches_jet() {
        let m = sharp_example(CutoffProfile::default()).unwrap();
        for z in [
            Complex64::new(0.2, 0.1),
            Complex64::new(-0.4, 0.3),
            Complex64::new(0.55, 0.35),
            Complex64::new(0.1, -0.85),
        ] {
            let j = metric_jet(&m, z);
            assert!((j.g - m.metric_coeff(z)).abs() < 1e-12, "{z}");
            assert!((m.log_weight_jet(z).value() - m.log_weight(z)).abs() < 1e-14);
        }
    }

    #[test]
    fn oscillation_closed_form_matches_jet() {
        let m = oscillation_family(8, CutoffProfile::default()).unwrap();
        for z in [Complex64::new(0.2, 0.1), Complex64::new(0.6, -0.5), Complex64::new(0.05, 0.9)] {
            let j = metric_jet(&m, z);
            assert!((j.g - m.metric_coeff(z)).abs() < 1e-11, "{z}: {} {}", j.g, m.metric_coeff(z));
        }
    }

    #[test]
    fn neck_symmetry_of_weight() {
        let m = neck_family(1, CutoffProfile::default()).unwrap();
        for t in [0.3, 1.7, 4.0] {
            let (lp, _) = m.log_weight_t(t);
            let (lm, _) = m.log_weight_t(-t);
            assert!((lp - lm + 2.0 * t).abs() < 1e-9, "t={t}: {lp} {lm}");
        }
    }

    #[test]
    fn unknown_model_lists_suggestions() {
        let e = build_model("fubini", &BTreeMap::new()).unwrap_err().to_string();
        assert!(e.contains("fubini_study"));
    }
}
