//! Bergman metric `g_m = (1/2πm) ∂∂̄ log Σ|f_j|²` and its derivatives.
//!
//! At a point where the basis is in triangular gauge only `f_0..f_2` carry
//! low-order jets, and the derivatives of `log K` reduce to short rational
//! expressions in those jets. For radial models the same quantities are
//! cumulants of the index distribution `p_j ∝ |z|^{2j}/G_jj`.

use crate::error::{LabError, Result};
use crate::metric_models::{hessian_frobenius, metric_jet, MetricJet, MetricModel};
use crate::section_space::{GramSpec, OrthonormalJets, SectionBasis};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// `g_m` and its derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BergmanJet {
    pub m: usize,
    pub point: Complex64,
    pub value: f64,
    /// `∂g_m/∂z`
    pub dz: Complex64,
    /// `∂²g_m/∂z²`
    pub dzz: Complex64,
    /// `∂²g_m/∂z∂z̄`
    pub dzzbar: f64,
}

impl BergmanJet {
    pub fn as_metric_jet(&self) -> MetricJet {
        MetricJet {
            g: self.value,
            dz: self.dz,
            dzz: self.dzz,
            dzzbar: self.dzzbar,
        }
    }

    /// Real gradient `∂ₓg_m + i∂ᵧg_m`.
    pub fn real_gradient(&self) -> Complex64 {
        2.0 * self.dz.conj()
    }
}

struct Slots {
    f0p: Complex64,
    f0pp: Complex64,
    f1p: Complex64,
    f1pp: Complex64,
    f1ppp: Complex64,
    f2pp: Complex64,
}

fn slots(j: &OrthonormalJets) -> Result<Slots> {
    if j.m == 0 {
        return Err(LabError::InvalidArgument("Bergman metric needs m ≥ 1".into()));
    }
    if !j.log_f0.is_finite() {
        return Err(LabError::VanishingSection {
            re: j.point.re,
            im: j.point.im,
        });
    }
    let r = &j.ratio;
    Ok(Slots {
        f0p: r[0][1],
        f0pp: r[0][2],
        f1p: r[1][1],
        f1pp: r[1][2],
        f1ppp: r[1][3],
        f2pp: r[2][2],
    })
}

fn norm(m: usize) -> f64 {
    1.0 / (2.0 * PI * m as f64)
}

/// `g_m = (1/2πm)|f₁′|²/|f₀|²`.
pub fn metric_at(jets: &OrthonormalJets) -> Result<f64> {
    let s = slots(jets)?;
    Ok(norm(jets.m) * s.f1p.norm_sqr())
}

/// `∂g_m/∂z = (1/2πm)(f₁″ f̄₁′/|f₀|² − 2 f̄₀ f₀′ |f₁′|²/|f₀|⁴)`.
pub fn gradient_at(jets: &OrthonormalJets) -> Result<Complex64> {
    let s = slots(jets)?;
    let a = s.f1p.norm_sqr();
    Ok((s.f1pp * s.f1p.conj() - 2.0 * s.f0p * a) * norm(jets.m))
}

/// `(∂²g_m/∂z², ∂²g_m/∂z∂z̄)`.
pub fn hessian_at(jets: &OrthonormalJets) -> Result<(Complex64, f64)> {
    let s = slots(jets)?;
    let a = s.f1p.norm_sqr();
    let c = norm(jets.m);
    let zz = s.f1ppp * s.f1p.conj() - 3.0 * s.f0p * s.f1pp * s.f1p.conj() - 3.0 * s.f0pp * a
        + 6.0 * s.f0p * s.f0p * a;
    let zzbar = s.f1pp.norm_sqr() + s.f2pp.norm_sqr()
        - 4.0 * (s.f1pp * s.f1p.conj() * s.f0p.conj()).re
        + 4.0 * s.f0p.norm_sqr() * a
        - 2.0 * a * a;
    Ok((zz * c, zzbar * c))
}

pub fn bergman_jet(jets: &OrthonormalJets) -> Result<BergmanJet> {
    let (dzz, dzzbar) = hessian_at(jets)?;
    Ok(BergmanJet {
        m: jets.m,
        point: jets.point,
        value: metric_at(jets)?,
        dz: gradient_at(jets)?,
        dzz,
        dzzbar,
    })
}

/// Radial models: `g_m` from cumulants of `p_j ∝ |z|^{2j}/G_jj`.
pub fn radial_direct(log_diag: &[f64], z: Complex64) -> BergmanJet {
    let m = log_diag.len() - 1;
    let s = z.norm_sqr();
    let ls = s.ln();
    let logs: Vec<f64> = log_diag
        .iter()
        .enumerate()
        .map(|(j, g)| j as f64 * ls - g)
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let tot: f64 = w.iter().sum();
    let mean: f64 = w.iter().enumerate().map(|(j, p)| j as f64 * p).sum::<f64>() / tot;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for (j, p) in w.iter().enumerate() {
        let d = j as f64 - mean;
        let d2 = d * d;
        m2 += p * d2;
        m3 += p * d2 * d;
        m4 += p * d2 * d2;
    }
    let (k2, k3) = (m2 / tot, m3 / tot);
    let k4 = m4 / tot - 3.0 * k2 * k2;
    let c = norm(m);
    let zb = z.conj();
    BergmanJet {
        m,
        point: z,
        value: c * k2 / s,
        dz: c * (k3 - k2) / (z * z * zb),
        dzz: c * (k4 - 3.0 * k3 + 2.0 * k2) / (z * z * z * zb),
        dzzbar: c * (k4 - 2.0 * k3 + k2) / (s * s),
    }
}

/// Below this value of `m|z|²` the cumulant path loses digits and the
/// recentred jets are used instead.
const DIRECT_THRESHOLD: f64 = 0.05;

/// `g_m` on a list of points. Radial models use the cumulant path and are
/// cross-checked against recentred jets on three points.
pub fn metric_field(basis: &SectionBasis, points: &[Complex64], radial: bool) -> Result<Vec<BergmanJet>> {
    let m = basis.m();
    let eval = |z: &Complex64| -> Result<BergmanJet> {
        if radial && z.norm_sqr() * m as f64 >= DIRECT_THRESHOLD {
            Ok(radial_direct(&basis.gram.log_diag, *z))
        } else {
            bergman_jet(&basis.jets_at(*z)?)
        }
    };
    #[cfg(feature = "parallel")]
    let field: Vec<Result<BergmanJet>> = {
        use rayon::prelude::*;
        points.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let field: Vec<Result<BergmanJet>> = points.iter().map(eval).collect();
    let field: Vec<BergmanJet> = field.into_iter().collect::<Result<_>>()?;
    if radial && !points.is_empty() {
        let n = points.len();
        for idx in [0, n / 2, n - 1] {
            let z = points[idx];
            if z.norm_sqr() * (m as f64) < DIRECT_THRESHOLD {
                continue;
            }
            let a = bergman_jet(&basis.jets_at(z)?)?;
            let b = field[idx];
            let rel = path_gap(&a, &b);
            if rel > 1e-8 {
                return Err(LabError::PathDisagreement {
                    perturbative: b.value,
                    direct: a.value,
                    allowed: 1e-8,
                });
            }
        }
    }
    Ok(field)
}

/// Largest relative discrepancy between two jets, each component scaled by `g`.
pub fn path_gap(a: &BergmanJet, b: &BergmanJet) -> f64 {
    let s = a.value.abs().max(b.value.abs());
    [
        (a.value - b.value).abs(),
        (a.dz - b.dz).norm(),
        (a.dzz - b.dzz).norm(),
        (a.dzzbar - b.dzzbar).abs(),
    ]
    .iter()
    .fold(0.0f64, |w, v| w.max(v / s))
}

/// Points with quadrature weights for discrete norms.
#[derive(Clone, Debug, Serialize)]
pub struct Grid {
    pub points: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl Grid {
    /// `radii × n_angles` polar grid with area weights `r Δr Δθ`.
    pub fn annular(radii: &[f64], n_angles: usize) -> Grid {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let dtheta = 2.0 * PI / n_angles as f64;
        for (i, r) in radii.iter().enumerate() {
            let lo = if i == 0 { *r } else { 0.5 * (r + radii[i - 1]) };
            let hi = if i + 1 == radii.len() { *r } else { 0.5 * (r + radii[i + 1]) };
            let dr = (hi - lo).max(1e-300);
            for k in 0..n_angles {
                points.push(Complex64::from_polar(*r, k as f64 * dtheta));
                weights.push(r * dr * dtheta);
            }
        }
        Grid { points, weights }
    }

    /// The default rate grid: `r ∈ {0.05, 0.10, …, 0.50}`, 8 angles.
    pub fn rate_default() -> Grid {
        let radii: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
        Grid::annular(&radii, 8)
    }

    /// Adds the chart origin with zero quadrature weight.
    pub fn with_origin(mut self) -> Grid {
        self.points.insert(0, Complex64::new(0.0, 0.0));
        self.weights.insert(0, 0.0);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Least-squares fit `log y = c + slope·log x`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

/// Fits the log-log slope; `None` if any value is below `floor` or fewer than two points.
pub fn fit_slope(xs: &[f64], ys: &[f64], floor: f64) -> Option<SlopeFit> {
    if xs.len() < 2 || ys.iter().any(|y| !(*y > floor) || !y.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Some(SlopeFit {
        slope,
        intercept,
        residual_rms: (rss / n).sqrt(),
    })
}

/// Statistics of `|Δ∇g| / (|x−y| |log|x−y||)` over a pair list.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ModulusStats {
    pub sup: f64,
    pub pair: (usize, usize),
    pub pairs_used: usize,
}

/// Log-Lipschitz modulus of a gradient field over pairs with `0 < |x−y| < 1/e`.
pub fn grad_modulus(points: &[Complex64], gradients: &[Complex64], pairs: &[(usize, usize)]) -> ModulusStats {
    let mut best = ModulusStats {
        sup: 0.0,
        pair: (0, 0),
        pairs_used: 0,
    };
    let cap = (-1.0f64).exp();
    for &(i, j) in pairs {
        let d = (points[i] - points[j]).norm();
        if !(d > 0.0 && d < cap) {
            continue;
        }
        best.pairs_used += 1;
        let v = (gradients[i] - gradients[j]).norm() / (d * d.ln().abs());
        if v > best.sup {
            best.sup = v;
            best.pair = (i, j);
        }
    }
    best
}

/// All index pairs `i < j`.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// `sup |Δ(x) − Δ(y)| / |x − y|^α` over all pairs.
pub fn holder_modulus(points: &[Complex64], values: &[Complex64], alpha: f64) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = (points[i] - points[j]).norm();
            if d > 0.0 {
                best = best.max((values[i] - values[j]).norm() / d.powf(alpha));
            }
        }
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub m: usize,
    pub sup_err: f64,
    pub grad_err: f64,
    pub c1alpha_mod: f64,
    pub w2q_norm: f64,
    /// `sup |∂²g_m/∂z²|` over the grid.
    pub hess_zz_sup: f64,
    /// `sup |∂²g_m/∂z∂z̄|` over the grid.
    pub hess_zzbar_sup: f64,
    /// `|g_m − g|`, `|∇g_m − ∇g|`, `|∂²g_m|`, `|∂∂̄g_m|` at the chart origin.
    pub origin_err: f64,
    pub origin_grad_err: f64,
    pub origin_hess_zz: f64,
    pub origin_hess_zzbar: f64,
    pub gram_band: usize,
    pub min_pivot: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub model: String,
    pub alpha: f64,
    pub q: f64,
    pub grid_points: usize,
    pub rows: Vec<RateRow>,
    pub sup_slope: Option<SlopeFit>,
    pub grad_slope: Option<SlopeFit>,
    pub c1alpha_slope: Option<SlopeFit>,
    pub w2q_slope: Option<SlopeFit>,
    pub origin_grad_slope: Option<SlopeFit>,
}

impl RateReport {
    pub const CSV_HEADER: [&'static str; 13] = [
        "m",
        "sup_err",
        "grad_err",
        "c1alpha_mod",
        "w2q_norm",
        "hess_zz_sup",
        "hess_zzbar_sup",
        "origin_err",
        "origin_grad_err",
        "origin_hess_zz",
        "origin_hess_zzbar",
        "gram_band",
        "min_pivot",
    ];

    pub fn ms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.m as f64).collect()
    }

    pub fn column(&self, f: impl Fn(&RateRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

/// Errors reported as `None` slopes fall below this.
pub const ERROR_FLOOR: f64 = 1e-13;

/// Convergence table of `g_m → g` over `m_list` on `grid`.
pub fn rate_report(
    model: &dyn MetricModel,
    m_list: &[usize],
    grid: &Grid,
    alpha: f64,
    q: f64,
    spec: &GramSpec,
) -> Result<RateReport> {
    if m_list.len() < 4 || m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::InvalidArgument(
            "rate_report needs at least four ascending tensor powers".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) || !(q > 1.0) {
        return Err(LabError::InvalidArgument(format!(
            "need 0 < α < 1 and q > 1, got α = {alpha}, q = {q}"
        )));
    }
    let radial = model.radial_at(1.0).is_some();
    let exact: Vec<MetricJet> = grid.points.iter().map(|z| metric_jet(model, *z)).collect();
    let origin = Complex64::new(0.0, 0.0);
    let exact0 = metric_jet(model, origin);
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let basis = SectionBasis::build(model, m, spec)?;
        let field = metric_field(&basis, &grid.points, radial)?;
        let at0 = bergman_jet(&basis.jets_at(origin)?)?;
        let mut sup_err: f64 = 0.0;
        let mut grad_err: f64 = 0.0;
        let mut hzz: f64 = 0.0;
        let mut hzzb: f64 = 0.0;
        let mut lq = 0.0;
        let mut diffs = Vec::with_capacity(field.len());
        for ((b, e), w) in field.iter().zip(&exact).zip(&grid.weights) {
            sup_err = sup_err.max((b.value - e.g).abs());
            let dg = b.real_gradient() - e.real_gradient();
            grad_err = grad_err.max(dg.norm());
            diffs.push(dg);
            hzz = hzz.max(b.dzz.norm());
            hzzb = hzzb.max(b.dzzbar.abs());
            lq += w * hessian_frobenius(b.dzz, b.dzzbar).powf(q);
        }
        rows.push(RateRow {
            m,
            sup_err,
            grad_err,
            c1alpha_mod: holder_modulus(&grid.points, &diffs, alpha),
            w2q_norm: lq.powf(1.0 / q),
            hess_zz_sup: hzz,
            hess_zzbar_sup: hzzb,
            origin_err: (at0.value - exact0.g).abs(),
            origin_grad_err: (at0.real_gradient() - exact0.real_gradient()).norm(),
            origin_hess_zz: at0.dzz.norm(),
            origin_hess_zzbar: at0.dzzbar.abs(),
            gram_band: basis.gram.bandwidth(),
            min_pivot: basis.min_pivot(),
        });
    }
    let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let col = |f: &dyn Fn(&RateRow) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    Ok(RateReport {
        model: model.name().to_string(),
        alpha,
        q,
        grid_points: grid.len(),
        sup_slope: fit_slope(&ms, &col(&|r| r.sup_err), ERROR_FLOOR),
        grad_slope: fit_slope(&ms, &col(&|r| r.grad_err), ERROR_FLOOR),
        c1alpha_slope: fit_slope(&ms, &col(&|r| r.c1alpha_mod), ERROR_FLOOR),
        w2q_slope: fit_slope(&ms, &col(&|r| r.w2q_norm), ERROR_FLOOR),
        origin_grad_slope: fit_slope(&ms, &col(&|r| r.origin_grad_err), ERROR_FLOOR),
        rows,
    })
}

/// Verdict for "bounded over the sweep": positive values whose max/min
/// ratio stays below `spread` and whose log-log slope is at most `trend`.
/// Sweeps that sit below `floor`, or decay at least like `m^{−1/2}`, count
/// as vanishing and hence bounded.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Boundedness {
    pub max: f64,
    pub min: f64,
    pub ratio: f64,
    pub slope: f64,
    pub bounded: bool,
    pub vanishing: bool,
}

/// Fitted slope at or below which a sweep is treated as decaying to zero.
pub const DECAY_SLOPE: f64 = -0.5;

pub fn boundedness(ms: &[f64], values: &[f64], spread: f64, trend: f64, floor: f64) -> Boundedness {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if max < floor {
        return Boundedness {
            max,
            min,
            ratio: 1.0,
            slope: 0.0,
            bounded: true,
            vanishing: true,
        };
    }
    let slope = fit_slope(ms, values, 0.0).map(|f| f.slope).unwrap_or(f64::INFINITY);
    let ratio = if min > 0.0 { max / min } else { f64::INFINITY };
    let vanishing = slope <= DECAY_SLOPE;
    Boundedness {
        max,
        min,
        ratio,
        slope,
        bounded: vanishing || (ratio < spread && slope <= trend),
        vanishing,
    }
}

/// Convenience: jets at a point for a freshly assembled basis.
pub fn bergman_at(model: &dyn MetricModel, m: usize, z: Complex64, spec: &GramSpec) -> Result<BergmanJet> {
    bergman_jet(&SectionBasis::build(model, m, spec)?.jets_at(z)?)
}
