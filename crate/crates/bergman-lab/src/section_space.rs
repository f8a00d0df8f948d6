//! Gram matrices of monomial sections and their orthonormalization.
//!
//! `G_{jk} = ∫ z^j z̄^k a^m dV` depends only on the angular mode `d = k − j`
//! of `a^m·2g`, so a single vector radial integral per `s = j + k` yields a
//! whole anti-diagonal. Entries are stored as `log G_jj` plus the
//! normalized bands `Ĝ_{j,j+d} = G_{j,j+d}/√(G_jj G_{j+d,j+d})`.

use crate::bergman_engine::{boundedness, Boundedness};
use crate::error::{LabError, Result};
use crate::metric_models::{MetricModel, Symmetry};
use crate::quadrature::{integrate_log, ln_factorial, AngularFft, LogIntegrand, LogScalar, QuadSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GramSpec {
    pub quad: QuadSpec,
    /// Bands whose largest normalized entry falls below this are dropped.
    pub band_tol: f64,
    /// Override of the computed bandwidth.
    pub bandwidth: Option<usize>,
}

impl Default for GramSpec {
    fn default() -> Self {
        GramSpec {
            quad: QuadSpec {
                rel_tol: 1e-11,
                max_subdivisions: 400,
                ..QuadSpec::default()
            },
            band_tol: 1e-14,
            bandwidth: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GramMatrix {
    pub m: usize,
    pub model: String,
    /// `log G_jj`, `j = 0..=m`.
    pub log_diag: Vec<f64>,
    /// `bands[d][j] = Ĝ_{j,j+d}`; `bands[0]` is all ones.
    pub bands: Vec<Vec<Complex64>>,
    /// Bandwidth that was integrated.
    pub computed_band: usize,
    /// Largest normalized entry among the dropped bands.
    pub truncation: f64,
    /// Largest relative quadrature error estimate over all integrals.
    pub quad_error: f64,
    pub evaluations: usize,
}

/// One stored entry for text export.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GramEntry {
    pub j: usize,
    pub k: usize,
    pub log_mag: f64,
    pub phase: f64,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.m + 1
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    /// Normalized entry `Ĝ_{jk}` (zero outside the band).
    pub fn normalized(&self, j: usize, k: usize) -> Complex64 {
        let (lo, hi, conj) = if k >= j { (j, k, false) } else { (k, j, true) };
        let d = hi - lo;
        if d >= self.bands.len() {
            return Complex64::new(0.0, 0.0);
        }
        let v = self.bands[d][lo];
        if conj {
            v.conj()
        } else {
            v
        }
    }

    pub fn entry(&self, j: usize, k: usize) -> LogScalar {
        let v = self.normalized(j, k);
        LogScalar::scaled(v, 0.5 * (self.log_diag[j] + self.log_diag[k]))
    }

    /// Entries with `k ≥ j` inside the stored band as `(j, k, log|G|, arg G)`.
    pub fn entries(&self) -> Vec<GramEntry> {
        let mut out = Vec::new();
        for j in 0..self.dim() {
            for d in 0..self.bands.len() {
                let k = j + d;
                if k > self.m {
                    break;
                }
                let e = self.entry(j, k);
                out.push(GramEntry {
                    j,
                    k,
                    log_mag: e.log_mag,
                    phase: e.phase.arg(),
                });
            }
        }
        out
    }

    /// Relative Hermitian defect; zero by construction of the band storage.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.dim() {
            for k in 0..self.dim() {
                let a = self.normalized(j, k);
                let b = self.normalized(k, j).conj();
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }
}

/// Integrand `r^{s+2} W_d(r)` in `t = ln r` for the modes `d` of one anti-diagonal.
struct AntiDiagonal<'a> {
    model: &'a dyn MetricModel,
    m: f64,
    s: usize,
    modes: Vec<usize>,
    fft: Option<&'a AngularFft>,
}

impl AntiDiagonal<'_> {
    fn log_density(&self, la: f64, g: f64) -> f64 {
        self.m * la + (2.0 * g).ln()
    }
}

impl LogIntegrand for AntiDiagonal<'_> {
    fn dim(&self) -> usize {
        self.modes.len()
    }

    fn log_envelope(&self, t: f64) -> f64 {
        let r = t.exp();
        let base = (self.s as f64 + 2.0) * t + (2.0 * PI).ln();
        if let Some((la, g)) = self.model.radial_at(r) {
            return base + self.log_density(la, g);
        }
        let mut best = f64::NEG_INFINITY;
        for k in 0..4 {
            let z = Complex64::from_polar(r, 0.5 * PI * k as f64);
            let v = self.log_density(self.model.log_weight(z), self.model.metric_coeff(z));
            best = best.max(v);
        }
        base + best
    }

    fn eval(&self, t: f64, out: &mut [Complex64]) -> f64 {
        let r = t.exp();
        let base = (self.s as f64 + 2.0) * t;
        match self.fft {
            None => {
                let (la, g) = self
                    .model
                    .radial_at(r)
                    .expect("radial path requires radial_at");
                out[0] = Complex64::new(1.0, 0.0);
                base + (2.0 * PI).ln() + self.log_density(la, g)
            }
            Some(fft) => {
                let n = fft.len();
                let mut la = vec![0.0; n];
                let mut g = vec![0.0; n];
                self.model.polar_samples(r, &mut la, &mut g);
                let logs: Vec<f64> = la
                    .iter()
                    .zip(&g)
                    .map(|(a, b)| self.log_density(*a, *b))
                    .collect();
                let mut buf = Vec::with_capacity(n);
                let top = fft.modes_from_log(&logs, &mut buf);
                for (o, d) in out.iter_mut().zip(&self.modes) {
                    *o = buf[*d];
                }
                base + top
            }
        }
    }
}

fn initial_band(model: &dyn MetricModel, m: usize) -> usize {
    match model.symmetry() {
        Symmetry::Radial => 0,
        Symmetry::AngularBand(b) => m.min(8 * b + 8),
        Symmetry::Generic => m,
    }
}

/// Gram matrix of `{z^j}_{j=0..=m}` for `model`, with automatic band growth.
pub fn gram(model: &dyn MetricModel, m: usize, spec: &GramSpec) -> Result<GramMatrix> {
    if m == 0 {
        return Err(LabError::InvalidArgument("tensor power m must be ≥ 1".into()));
    }
    if m > model.degree_cap() {
        return Err(LabError::DegreeCap {
            model: model.name().to_string(),
            m,
            cap: model.degree_cap(),
        });
    }
    let mut band = spec.bandwidth.unwrap_or_else(|| initial_band(model, m)).min(m);
    loop {
        match gram_with_band(model, m, band, spec) {
            Err(LabError::BandwidthExceeded { .. }) if band < m && spec.bandwidth.is_none() => {
                band = (2 * band).max(1).min(m);
            }
            other => return other,
        }
    }
}

/// Gram matrix integrating modes `0..=band`. Fails with `BandwidthExceeded`
/// when the outermost integrated band is not negligible.
pub fn gram_with_band(
    model: &dyn MetricModel,
    m: usize,
    band: usize,
    spec: &GramSpec,
) -> Result<GramMatrix> {
    spec.quad.validate()?;
    let radial = band == 0 && model.radial_at(1.0).is_some();
    let nodes = spec.quad.nodes_for_band(band);
    let fft = if radial { None } else { Some(AngularFft::new(nodes)) };
    let t_hi = model.chart_radius().ln();

    let job = |s: usize| -> Result<(Vec<usize>, crate::quadrature::LogVector)> {
        let mut modes = vec![];
        if s % 2 == 1 {
            modes.push(0);
        }
        for d in (s % 2..=band.min(s)).step_by(2) {
            let j = (s - d) / 2;
            if j + d <= m {
                modes.push(d);
            }
        }
        if radial && s % 2 == 1 {
            return Ok((modes, crate::quadrature::LogVector {
                log_scale: 0.0,
                values: vec![],
                error: 0.0,
                evaluations: 0,
                panels: 0,
            }));
        }
        let integrand = AntiDiagonal {
            model,
            m: m as f64,
            s,
            modes: modes.clone(),
            fft: fft.as_ref(),
        };
        let v = integrate_log(&integrand, f64::NEG_INFINITY, t_hi, None, &spec.quad)?;
        Ok((modes, v))
    };

    let total = 2 * m + 1;
    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        (0..total).into_par_iter().map(job).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = (0..total).map(job).collect();

    let mut log_diag = vec![0.0; m + 1];
    let mut raw: Vec<Vec<LogScalar>> = vec![vec![LogScalar::ZERO; m + 1]; band + 1];
    let mut quad_error: f64 = 0.0;
    let mut evaluations = 0;
    for (s, res) in results.into_iter().enumerate() {
        let (modes, v) = res?;
        if v.values.is_empty() {
            continue;
        }
        quad_error = quad_error.max(v.relative_error());
        evaluations += v.evaluations;
        let skip = if s % 2 == 1 { 1 } else { 0 };
        for (i, d) in modes.iter().enumerate().skip(skip) {
            let j = (s - d) / 2;
            let e = v.component(i);
            if *d == 0 {
                if !(e.phase.re > 0.0) || !e.log_mag.is_finite() {
                    return Err(LabError::NotPositiveDefinite {
                        row: j,
                        pivot: e.to_f64(),
                    });
                }
                log_diag[j] = e.log_mag;
            }
            raw[*d][j] = e;
        }
    }
    let mut bands = vec![vec![Complex64::new(1.0, 0.0); m + 1]];
    let mut band_max = vec![0.0; band + 1];
    for d in 1..=band {
        let row: Vec<Complex64> = (0..=m - d)
            .map(|j| {
                let e = raw[d][j];
                if e.is_zero() {
                    Complex64::new(0.0, 0.0)
                } else {
                    e.phase * (e.log_mag - 0.5 * (log_diag[j] + log_diag[j + d])).exp()
                }
            })
            .collect();
        band_max[d] = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
        bands.push(row);
    }
    if band > 0 && band < m && band_max[band] > spec.band_tol {
        return Err(LabError::BandwidthExceeded {
            bandwidth: band,
            discarded: band_max[band],
        });
    }
    let kept = (0..=band).rev().find(|d| *d == 0 || band_max[*d] > spec.band_tol).unwrap_or(0);
    let truncation = band_max[kept + 1..].iter().cloned().fold(0.0, f64::max);
    bands.truncate(kept + 1);
    Ok(GramMatrix {
        m,
        model: model.name().to_string(),
        log_diag,
        bands,
        computed_band: band,
        truncation,
        quad_error,
        evaluations,
    })
}

/// Banded Cholesky factor `Ĝ = L L†` of the normalized Gram matrix.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    p: usize,
    /// `rows[i][q] = L_{i, i−p+q}`.
    rows: Vec<Vec<Complex64>>,
}

impl BandCholesky {
    pub fn factor(
        n: usize,
        p: usize,
        entry: impl Fn(usize, usize) -> Complex64,
    ) -> Result<BandCholesky> {
        let zero = Complex64::new(0.0, 0.0);
        let mut rows = vec![vec![zero; p + 1]; n];
        let at = |rows: &Vec<Vec<Complex64>>, i: usize, j: usize| -> Complex64 {
            if j + p < i || j > i {
                zero
            } else {
                rows[i][j + p - i]
            }
        };
        for i in 0..n {
            let j0 = i.saturating_sub(p);
            for j in j0..=i {
                let mut s = entry(i, j);
                for k in j0.max(j.saturating_sub(p))..j {
                    s -= at(&rows, i, k) * at(&rows, j, k).conj();
                }
                if j == i {
                    if !(s.re > 0.0) {
                        return Err(LabError::NotPositiveDefinite { row: i, pivot: s.re });
                    }
                    rows[i][p] = Complex64::new(s.re.sqrt(), 0.0);
                } else {
                    let d = at(&rows, j, j);
                    rows[i][j + p - i] = s / d;
                }
            }
        }
        Ok(BandCholesky { n, p, rows })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j > i || j + self.p < i {
            Complex64::new(0.0, 0.0)
        } else {
            self.rows[i][j + self.p - i]
        }
    }

    pub fn min_pivot(&self) -> f64 {
        (0..self.n).map(|i| self.rows[i][self.p].re).fold(f64::INFINITY, f64::min)
    }

    /// Solves `L y = b` in place.
    pub fn forward(&self, b: &mut [Complex64]) {
        for i in 0..self.n {
            let mut s = b[i];
            for j in i.saturating_sub(self.p)..i {
                s -= self.get(i, j) * b[j];
            }
            b[i] = s / self.rows[i][self.p].re;
        }
    }
}

/// Orthonormal basis of holomorphic sections represented through the factored Gram matrix.
#[derive(Clone, Debug)]
pub struct SectionBasis {
    pub gram: GramMatrix,
    chol: BandCholesky,
}

impl SectionBasis {
    pub fn new(gram: GramMatrix) -> Result<Self> {
        let chol = BandCholesky::factor(gram.dim(), gram.bandwidth(), |i, j| gram.normalized(i, j))?;
        Ok(SectionBasis { gram, chol })
    }

    pub fn build(model: &dyn MetricModel, m: usize, spec: &GramSpec) -> Result<Self> {
        Self::new(gram(model, m, spec)?)
    }

    pub fn m(&self) -> usize {
        self.gram.m
    }

    pub fn min_pivot(&self) -> f64 {
        self.chol.min_pivot()
    }

    /// `y = L⁻¹ D⁻¹ u` for `u_i = i!/(i−a)! z0^{i−a}`, scaled by `e^{−c}`; returns `c`.
    fn derivative_column(&self, z0: Complex64, a: usize, out: &mut Vec<Complex64>) -> f64 {
        let n = self.gram.dim();
        let lr = z0.norm().ln();
        let arg = z0.arg();
        let mut logs = vec![f64::NEG_INFINITY; n];
        for i in a..n {
            let p = (i - a) as f64;
            let lm = if i == a {
                0.0
            } else if z0.norm() == 0.0 {
                f64::NEG_INFINITY
            } else {
                p * lr
            };
            logs[i] = ln_factorial(i) - ln_factorial(i - a) + lm - 0.5 * self.gram.log_diag[i];
        }
        let c = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        out.clear();
        out.extend((0..n).map(|i| {
            if logs[i] == f64::NEG_INFINITY {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar((logs[i] - c).exp(), (i - a.min(i)) as f64 * arg)
            }
        }));
        self.chol.forward(out);
        c
    }

    /// Jets of the orthonormal basis at `z0` in the triangular gauge.
    pub fn jets_at(&self, z0: Complex64) -> Result<OrthonormalJets> {
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(4);
        let mut scales = [0.0; 4];
        for a in 0..4 {
            let mut y = Vec::new();
            scales[a] = self.derivative_column(z0, a, &mut y);
            cols.push(y);
        }
        let r = qr_r(&mut cols);
        let mut raw = [[LogScalar::ZERO; 4]; 4];
        for j in 0..4 {
            for a in j..4 {
                raw[j][a] = LogScalar::scaled(r[j][a], scales[a]);
            }
        }
        let f0 = raw[0][0];
        if f0.is_zero() || !f0.log_mag.is_finite() {
            return Err(LabError::VanishingSection { re: z0.re, im: z0.im });
        }
        let mut ratio = [[Complex64::new(0.0, 0.0); 4]; 4];
        for j in 0..4 {
            for a in j..4 {
                ratio[j][a] = (raw[j][a] / f0).to_complex();
            }
        }
        Ok(OrthonormalJets {
            m: self.m(),
            point: z0,
            log_f0: f0.log_mag,
            ratio,
        })
    }

    /// `log Σ_j |f_j(z)|²`, the log of the Bergman kernel on the diagonal in the chart frame.
    pub fn log_kernel(&self, z: Complex64) -> f64 {
        let mut y = Vec::new();
        let c = self.derivative_column(z, 0, &mut y);
        let s: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        s.ln() + 2.0 * c
    }

    /// Dense transform `C` (column `j` holds the monomial coefficients of `f_j`)
    /// of the triangular orthonormal basis at the origin.
    pub fn transform_at_origin(&self) -> Result<Vec<Vec<LogScalar>>> {
        let n = self.gram.dim();
        let p = self.gram.bandwidth();
        // Reverse-order factor: J Ĝ J = L' L'†, then Ĝ = U U† with U = J L' J upper.
        let rev = BandCholesky::factor(n, p, |i, j| self.gram.normalized(n - 1 - i, n - 1 - j))?;
        let u = |i: usize, j: usize| rev.get(n - 1 - i, n - 1 - j);
        // C^T = U⁻¹ D⁻¹ with U upper triangular: solve column by column.
        let mut c = vec![vec![LogScalar::ZERO; n]; n];
        for col in 0..n {
            // x = U⁻¹ e_col
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            x[col] = Complex64::new(1.0, 0.0);
            for i in (0..=col).rev() {
                let mut s = if i == col { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                for k in i + 1..=(i + p).min(col) {
                    s -= u(i, k) * x[k];
                }
                x[i] = s / u(i, i).re;
            }
            // (C^T)_{j,col} = x_j / √G_col,col  ⇒  C_{col, j}
            for (j, v) in x.iter().enumerate() {
                if v.norm() > 0.0 {
                    c[col][j] = LogScalar::scaled(*v, -0.5 * self.gram.log_diag[col]);
                }
            }
        }
        Ok(c)
    }
}

/// Orthogonal triangularization of four columns by modified Gram–Schmidt
/// with one reorthogonalization pass; returns the `4×4` upper factor.
fn qr_r(cols: &mut [Vec<Complex64>]) -> [[Complex64; 4]; 4] {
    let zero = Complex64::new(0.0, 0.0);
    let mut r = [[zero; 4]; 4];
    let k = cols.len();
    for a in 0..k {
        for _pass in 0..2 {
            for b in 0..a {
                let (qb, ca) = {
                    let (left, right) = cols.split_at_mut(a);
                    (&left[b], &mut right[0])
                };
                let proj: Complex64 = qb.iter().zip(ca.iter()).map(|(q, v)| q.conj() * v).sum();
                for (v, q) in ca.iter_mut().zip(qb.iter()) {
                    *v -= proj * q;
                }
                r[b][a] += proj;
            }
        }
        let norm = cols[a].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        r[a][a] = Complex64::new(norm, 0.0);
        if norm > 0.0 {
            for v in cols[a].iter_mut() {
                *v /= norm;
            }
        }
    }
    r
}

/// Value and first three derivatives of `f_0..f_3` at a point, divided by
/// `f_0(point)`; `f_j^{(a)} = 0` for `a < j`, diagonal entries real positive.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrthonormalJets {
    pub m: usize,
    pub point: Complex64,
    /// `log |f_0(point)|`.
    pub log_f0: f64,
    /// `ratio[j][a] = f_j^{(a)}(point) / f_0(point)`.
    pub ratio: [[Complex64; 4]; 4],
}

impl OrthonormalJets {
    /// `f_j^{(a)}(point)` in log form.
    pub fn jet(&self, j: usize, a: usize) -> LogScalar {
        LogScalar::scaled(self.ratio[j][a], self.log_f0)
    }

    /// `|f_j^{(a)}(point)|` as a float.
    pub fn abs(&self, j: usize, a: usize) -> f64 {
        self.jet(j, a).to_complex().norm()
    }

    /// The triangular gauge conditions, as the largest vanishing-slot magnitude relative to `|f_0|`.
    pub fn gauge_defect(&self) -> f64 {
        let mut w: f64 = 0.0;
        for j in 1..4 {
            for a in 0..j {
                w = w.max(self.ratio[j][a].norm());
            }
        }
        w
    }

    /// Multiplies `f_j` by the unit phase `e^{iφ_j}` (the residual gauge freedom).
    pub fn with_phases(&self, phases: [f64; 4]) -> Self {
        let mut out = *self;
        let p0 = Complex64::from_polar(1.0, phases[0]);
        for j in 0..4 {
            for a in 0..4 {
                out.ratio[j][a] = self.ratio[j][a] * Complex64::from_polar(1.0, phases[j]) / p0;
            }
        }
        out
    }
}

/// `jets_at` convenience: assemble, factor and evaluate.
pub fn jets_at(
    model: &dyn MetricModel,
    m: usize,
    basepoint: Complex64,
    spec: &GramSpec,
) -> Result<OrthonormalJets> {
    SectionBasis::build(model, m, spec)?.jets_at(basepoint)
}

/// Scaled base-point jets in the normalized chart `w = κz`, `κ² = 2g(0)`.
#[derive(Clone, Debug, Serialize)]
pub struct JetAsymRow {
    pub m: usize,
    /// `m^{−1/2}|f₀(0)|`, tends to 1.
    pub f0: f64,
    /// `m^{−1}|f₁′(0)|`, tends to `√π`.
    pub f1: f64,
    /// `(2m³)^{−1/2}|f₂″(0)|`, tends to `π`.
    pub f2: f64,
    /// `m^{−3/4}|f₁″(0)|`, bounded.
    pub mixed: f64,
    /// `m|f₀ − 1|`, `m|f₁ − √π|`, `m|f₂ − π|`.
    pub residuals: [f64; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct JetAsymTable {
    pub model: String,
    pub rows: Vec<JetAsymRow>,
    /// Verdicts for the three residual columns, then the mixed jet.
    pub verdicts: [Boundedness; 4],
}

impl JetAsymTable {
    pub fn bounded(&self) -> bool {
        self.verdicts.iter().all(|v| v.bounded)
    }
}

/// Residuals below this are rounding noise in the jets.
pub const JET_RESIDUAL_FLOOR: f64 = 1e-8;

pub fn jet_asymptotics(model: &dyn MetricModel, m_list: &[usize], spec: &GramSpec) -> Result<JetAsymTable> {
    let kappa = (2.0 * model.metric_coeff(Complex64::new(0.0, 0.0))).sqrt();
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let j = jets_at(model, m, Complex64::new(0.0, 0.0), spec)?;
        let mf = m as f64;
        let f0 = j.abs(0, 0) / mf.sqrt();
        let f1 = j.abs(1, 1) / (mf * kappa);
        let f2 = j.abs(2, 2) / ((2.0 * mf.powi(3)).sqrt() * kappa * kappa);
        rows.push(JetAsymRow {
            m,
            f0,
            f1,
            f2,
            mixed: j.abs(1, 2) / (mf.powf(0.75) * kappa * kappa),
            residuals: [mf * (f0 - 1.0).abs(), mf * (f1 - PI.sqrt()).abs(), mf * (f2 - PI).abs()],
        });
    }
    let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let col = |f: &dyn Fn(&JetAsymRow) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    let verdict = |v: Vec<f64>| boundedness(&ms, &v, 10.0, 0.1, JET_RESIDUAL_FLOOR);
    let verdicts = [
        verdict(col(&|r| r.residuals[0])),
        verdict(col(&|r| r.residuals[1])),
        verdict(col(&|r| r.residuals[2])),
        verdict(col(&|r| r.mixed)),
    ];
    Ok(JetAsymTable {
        model: model.name().to_string(),
        rows,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_cholesky_reconstructs() {
        let n = 7;
        let p = 2;
        let e = |i: usize, j: usize| -> Complex64 {
            let d = i as i64 - j as i64;
            match d.abs() {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.2, 0.1 * d as f64),
                2 => Complex64::new(0.05, 0.0),
                _ => Complex64::new(0.0, 0.0),
            }
        };
        let l = BandCholesky::factor(n, p, e).unwrap();
        for i in 0..n {
            for j in 0..n {
                let s: Complex64 = (0..n).map(|k| l.get(i, k) * l.get(j, k).conj()).sum();
                assert!((s - e(i, j)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn qr_is_triangular_with_positive_diagonal() {
        let mut cols: Vec<Vec<Complex64>> = (0..4)
            .map(|a| {
                (0..6)
                    .map(|i| Complex64::new(((i * 7 + a * 3) % 5) as f64 - 2.0, (i + a) as f64 * 0.1))
                    .collect()
            })
            .collect();
        let orig = cols.clone();
        let r = qr_r(&mut cols);
        for a in 0..4 {
            assert!(r[a][a].re > 0.0 && r[a][a].im == 0.0);
            for i in 0..6 {
                let v: Complex64 = (0..=a).map(|b| cols[b][i] * r[b][a]).sum();
                assert!((v - orig[a][i]).norm() < 1e-12);
            }
        }
    }
}
