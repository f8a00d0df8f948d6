//! Log-domain quadrature.
//!
//! Radial integrals are computed in the logarithmic variable `t = ln r`,
//! which turns power-law endpoint behaviour into exponential tails and keeps
//! peaked weights like `r^{2p+1} a(r)^m` well resolved. Integrands report a
//! log scale with each evaluation so that values such as `e^{−πm r²}` with
//! `m ~ 10⁴` never leave the representable range.

use crate::error::{LabError, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg};
use std::sync::Arc;

/// A real or complex number stored as `phase · exp(log_mag)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogScalar {
    pub log_mag: f64,
    pub phase: Complex64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar {
        log_mag: f64::NEG_INFINITY,
        phase: Complex64 { re: 1.0, im: 0.0 },
    };
    pub const ONE: LogScalar = LogScalar {
        log_mag: 0.0,
        phase: Complex64 { re: 1.0, im: 0.0 },
    };

    /// A positive number given by its logarithm.
    pub fn from_ln(log_mag: f64) -> Self {
        LogScalar {
            log_mag,
            phase: Complex64::new(1.0, 0.0),
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self::ZERO;
        }
        LogScalar {
            log_mag: x.abs().ln(),
            phase: Complex64::new(x.signum(), 0.0),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        let n = z.norm();
        if n == 0.0 {
            return Self::ZERO;
        }
        LogScalar {
            log_mag: n.ln(),
            phase: z / n,
        }
    }

    /// `z · exp(log_scale)` without forming `exp(log_scale)`.
    pub fn scaled(z: Complex64, log_scale: f64) -> Self {
        let mut s = Self::from_complex(z);
        if s.log_mag.is_finite() {
            s.log_mag += log_scale;
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.phase * self.log_mag.exp()
    }

    /// Real part as a native float (may overflow to ±∞).
    pub fn to_f64(&self) -> f64 {
        self.to_complex().re
    }

    pub fn conj(&self) -> Self {
        LogScalar {
            log_mag: self.log_mag,
            phase: self.phase.conj(),
        }
    }

    pub fn abs(&self) -> Self {
        Self::from_ln(self.log_mag)
    }

    pub fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        LogScalar {
            log_mag: self.log_mag * n as f64,
            phase: self.phase.powi(n),
        }
    }

    pub fn sqrt(&self) -> Self {
        LogScalar {
            log_mag: 0.5 * self.log_mag,
            phase: self.phase.sqrt(),
        }
    }

    /// Compensated, magnitude-sorted sum; independent of input order.
    pub fn sum<I: IntoIterator<Item = LogScalar>>(items: I) -> Self {
        let mut v: Vec<LogScalar> = items.into_iter().filter(|x| !x.is_zero()).collect();
        if v.is_empty() {
            return Self::ZERO;
        }
        v.sort_by(|a, b| {
            a.log_mag
                .partial_cmp(&b.log_mag)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.phase.re.total_cmp(&b.phase.re))
                .then(a.phase.im.total_cmp(&b.phase.im))
        });
        let top = v.last().map(|x| x.log_mag).unwrap_or(0.0);
        let mut s = Complex64::new(0.0, 0.0);
        let mut c = Complex64::new(0.0, 0.0);
        for x in &v {
            let term = x.phase * (x.log_mag - top).exp();
            s = neumaier(s, term, &mut c);
        }
        Self::scaled(s + c, top)
    }
}

fn neumaier(s: Complex64, x: Complex64, c: &mut Complex64) -> Complex64 {
    let part = |s: f64, x: f64, c: &mut f64| {
        let t = s + x;
        if s.abs() >= x.abs() {
            *c += (s - t) + x;
        } else {
            *c += (x - t) + s;
        }
        t
    };
    let mut cr = c.re;
    let mut ci = c.im;
    let re = part(s.re, x.re, &mut cr);
    let im = part(s.im, x.im, &mut ci);
    *c = Complex64::new(cr, ci);
    Complex64::new(re, im)
}

impl Mul for LogScalar {
    type Output = LogScalar;
    fn mul(self, o: LogScalar) -> LogScalar {
        if self.is_zero() || o.is_zero() {
            return LogScalar::ZERO;
        }
        LogScalar {
            log_mag: self.log_mag + o.log_mag,
            phase: self.phase * o.phase,
        }
    }
}

impl Div for LogScalar {
    type Output = LogScalar;
    fn div(self, o: LogScalar) -> LogScalar {
        if self.is_zero() {
            return LogScalar::ZERO;
        }
        LogScalar {
            log_mag: self.log_mag - o.log_mag,
            phase: self.phase / o.phase,
        }
    }
}

impl Add for LogScalar {
    type Output = LogScalar;
    fn add(self, o: LogScalar) -> LogScalar {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (big, small) = if self.log_mag >= o.log_mag {
            (self, o)
        } else {
            (o, self)
        };
        let s = big.phase + small.phase * (small.log_mag - big.log_mag).exp();
        LogScalar::scaled(s, big.log_mag)
    }
}

impl Neg for LogScalar {
    type Output = LogScalar;
    fn neg(self) -> LogScalar {
        LogScalar {
            log_mag: self.log_mag,
            phase: -self.phase,
        }
    }
}

/// Tolerances and sampling density for all quadrature in the crate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadSpec {
    pub rel_tol: f64,
    /// Natural log of an absolute tolerance; `-inf` disables it and is
    /// written as `null` in JSON.
    #[serde(with = "neg_inf_as_null")]
    pub abs_tol_log: f64,
    pub max_subdivisions: usize,
    pub angular_nodes: usize,
}

mod neg_inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rel_tol: 1e-10,
            abs_tol_log: f64::NEG_INFINITY,
            max_subdivisions: 60,
            angular_nodes: 256,
        }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(LabError::InvalidArgument("rel_tol must be positive".into()));
        }
        if !self.angular_nodes.is_power_of_two() || self.angular_nodes < 8 {
            return Err(LabError::InvalidArgument(format!(
                "angular_nodes must be a power of two ≥ 8, got {}",
                self.angular_nodes
            )));
        }
        Ok(())
    }

    /// Node count for a target angular bandwidth: at least `max(256, 8·band)`.
    pub fn nodes_for_band(&self, band: usize) -> usize {
        self.angular_nodes
            .max(256)
            .max((8 * band).next_power_of_two())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Single-panel 15-point Kronrod estimate with its 7-point Gauss companion.
/// Returns `(kronrod, |kronrod − gauss|)`.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Recursive Gauss–Kronrod on a finite interval to absolute tolerance `tol`
/// (at most 2¹² panels).
pub fn adaptive_gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
        let (v, e) = gauss_kronrod_15(f, a, b);
        if e <= tol || depth == 0 {
            return (v, e);
        }
        let c = 0.5 * (a + b);
        let (l, el) = rec(f, a, c, 0.5 * tol, depth - 1);
        let (r, er) = rec(f, c, b, 0.5 * tol, depth - 1);
        (l + r, el + er)
    }
    rec(f, a, b, tol, 12)
}

/// A (vector-valued) integrand in the variable `t`, evaluated in log scale.
pub trait LogIntegrand: Sync {
    fn dim(&self) -> usize;
    /// Cheap log-magnitude estimate used to locate the peak and the tails.
    fn log_envelope(&self, t: f64) -> f64;
    /// Writes the integrand divided by `exp(scale)` into `out` and returns `scale`.
    fn eval(&self, t: f64, out: &mut [Complex64]) -> f64;
}

/// Result of a vector integral: `values · exp(log_scale)`.
#[derive(Clone, Debug, Serialize)]
pub struct LogVector {
    pub log_scale: f64,
    pub values: Vec<Complex64>,
    /// Absolute error estimate in the same scaled units as `values`.
    pub error: f64,
    pub evaluations: usize,
    pub panels: usize,
}

impl LogVector {
    pub fn component(&self, i: usize) -> LogScalar {
        LogScalar::scaled(self.values[i], self.log_scale)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn relative_error(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            0.0
        } else {
            self.error / n
        }
    }

    fn zero(dim: usize) -> Self {
        LogVector {
            log_scale: 0.0,
            values: vec![Complex64::new(0.0, 0.0); dim],
            error: 0.0,
            evaluations: 0,
            panels: 0,
        }
    }
}

const DROP: f64 = 50.0;
const T_LIMIT: f64 = 740.0;

struct Panel {
    a: f64,
    b: f64,
    k: Vec<Complex64>,
    err: f64,
}

fn eval_panel<I: LogIntegrand + ?Sized>(
    f: &I,
    a: f64,
    b: f64,
    reference: f64,
    buf: &mut [Complex64],
) -> Panel {
    let n = f.dim();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![Complex64::new(0.0, 0.0); n];
    let mut g = vec![Complex64::new(0.0, 0.0); n];
    let mut absk = 0.0;
    let mut add = |t: f64, wk: f64, wg: f64, k: &mut [Complex64], g: &mut [Complex64]| {
        let s = f.eval(t, buf);
        let fac = if s == f64::NEG_INFINITY {
            0.0
        } else {
            (s - reference).exp()
        };
        if fac == 0.0 {
            return;
        }
        for i in 0..n {
            let v = buf[i] * fac;
            k[i] += v * wk;
            g[i] += v * wg;
            absk += wk * v.norm();
        }
    };
    add(c, WGK[7], WG[3], &mut k, &mut g);
    for i in 0..7 {
        let x = h * XGK[i];
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        add(c - x, WGK[i], wg, &mut k, &mut g);
        add(c + x, WGK[i], wg, &mut k, &mut g);
    }
    let mut err: f64 = 0.0;
    for i in 0..n {
        k[i] *= h;
        err = err.max(((k[i] - g[i] * h).norm()).abs());
    }
    let floor = 1e-15 * absk * h;
    Panel {
        a,
        b,
        k,
        err: if err < floor { floor } else { err },
    }
}

fn finite_env<I: LogIntegrand + ?Sized>(f: &I, t: f64) -> f64 {
    let e = f.log_envelope(t);
    if e.is_nan() {
        f64::NEG_INFINITY
    } else {
        e
    }
}

/// Locates the maximum of the envelope on `[lo, hi]` starting from `start`,
/// assuming it is unimodal near `start`.
fn locate_peak<I: LogIntegrand + ?Sized>(f: &I, lo: f64, hi: f64, start: f64) -> (f64, f64) {
    let clamp = |t: f64| t.max(lo).min(hi);
    let mut t0 = clamp(start);
    let mut e0 = finite_env(f, t0);
    if e0 == f64::NEG_INFINITY {
        // Search outward for any support.
        let mut best = (t0, e0);
        let mut step = 0.5;
        for _ in 0..60 {
            for cand in [t0 + step, t0 - step] {
                let c = clamp(cand);
                let e = finite_env(f, c);
                if e > best.1 {
                    best = (c, e);
                }
            }
            if best.1 > f64::NEG_INFINITY {
                break;
            }
            step *= 1.5;
        }
        if best.1 == f64::NEG_INFINITY {
            return best;
        }
        t0 = best.0;
        e0 = best.1;
    }
    let d = 1e-3;
    let up = finite_env(f, clamp(t0 + d));
    let dn = finite_env(f, clamp(t0 - d));
    let dir = if up >= dn { 1.0 } else { -1.0 };
    let mut a = t0;
    let mut b = t0;
    let mut eb = e0;
    let mut step = 0.05;
    loop {
        let c = clamp(b + dir * step);
        let ec = finite_env(f, c);
        if ec <= eb || c == b {
            let (l, r) = if dir > 0.0 { (a, c) } else { (c, a) };
            return golden(f, l, r);
        }
        a = b;
        b = c;
        eb = ec;
        step *= 1.6;
    }
}

fn golden<I: LogIntegrand + ?Sized>(f: &I, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = finite_env(f, c);
    let mut fd = finite_env(f, d);
    for _ in 0..80 {
        if (b - a).abs() < 1e-9 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = finite_env(f, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = finite_env(f, d);
        }
    }
    let ends = [(a, finite_env(f, a)), (b, finite_env(f, b)), (c, fc), (d, fd)];
    ends.into_iter()
        .fold((a, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
}

/// Adaptive Gauss–Kronrod integration of `f` over `t ∈ [t_lo, t_hi]` (either
/// end may be infinite). `hint` seeds the peak search.
pub fn integrate_log<I: LogIntegrand + ?Sized>(
    f: &I,
    t_lo: f64,
    t_hi: f64,
    hint: Option<f64>,
    spec: &QuadSpec,
) -> Result<LogVector> {
    let dim = f.dim();
    let lo = t_lo.max(-T_LIMIT);
    let hi = t_hi.min(T_LIMIT);
    if !(hi > lo) {
        return Ok(LogVector::zero(dim));
    }
    let start = hint.unwrap_or(if lo.is_finite() && hi.is_finite() && hi - lo < 4.0 {
        0.5 * (lo + hi)
    } else {
        0.0f64.max(lo).min(hi)
    });
    let (tp, ep) = locate_peak(f, lo, hi, start);
    if ep == f64::NEG_INFINITY {
        return Ok(LogVector::zero(dim));
    }
    let reference = ep;

    // Width from the envelope curvature.
    let d = 1e-3;
    let curv = if tp - d > lo && tp + d < hi {
        (finite_env(f, tp + d) - 2.0 * ep + finite_env(f, tp - d)) / (d * d)
    } else {
        0.0
    };
    let w = if curv < 0.0 && curv.is_finite() {
        (1.0 / (-curv).sqrt()).clamp(1e-7, 1.0)
    } else {
        0.5
    };

    let mut tail_err = 0.0;
    let mut walk = |sign: f64, bound: f64| -> Vec<f64> {
        let mut pts = Vec::new();
        let mut k = 0;
        let mut prev = tp;
        loop {
            let cand = tp + sign * w * 2f64.powi(k);
            let past = if sign > 0.0 { cand >= bound } else { cand <= bound };
            if past {
                pts.push(bound);
                let e = finite_env(f, bound);
                if (bound == hi && t_hi > hi) || (bound == lo && t_lo < lo) {
                    tail_err += (e - reference).exp();
                }
                break;
            }
            pts.push(cand);
            let e = finite_env(f, cand);
            if e < reference - DROP {
                let ep = finite_env(f, prev);
                let slope = ((ep - e) / (cand - prev).abs()).max(1e-3);
                tail_err += (e - reference).exp() / slope;
                break;
            }
            prev = cand;
            k += 1;
            if k > 60 {
                break;
            }
        }
        pts
    };
    let right = walk(1.0, hi);
    let left = walk(-1.0, lo);
    let mut bps: Vec<f64> = left.into_iter().rev().collect();
    bps.push(tp);
    bps.extend(right);
    bps.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let mut panels: Vec<Panel> = bps
        .windows(2)
        .filter(|p| p[1] > p[0])
        .map(|p| eval_panel(f, p[0], p[1], reference, &mut buf))
        .collect();
    let mut evaluations = 15 * panels.len();
    let mut subdivisions = 0;
    loop {
        let mut total = vec![Complex64::new(0.0, 0.0); dim];
        let mut err = tail_err;
        for p in &panels {
            for i in 0..dim {
                total[i] += p.k[i];
            }
            err += p.err;
        }
        let norm = total.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let abs_tol = (spec.abs_tol_log - reference).exp();
        let tol = (spec.rel_tol * norm).max(abs_tol);
        if err <= tol || norm == 0.0 && err == 0.0 {
            return Ok(LogVector {
                log_scale: reference,
                values: total,
                error: err,
                evaluations,
                panels: panels.len(),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.err > acc.1 { (i, p.err) } else { acc });
        let p = &panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if subdivisions >= spec.max_subdivisions || !(mid > p.a && mid < p.b) {
            return Err(LabError::NonConvergence {
                error: err / norm.max(f64::MIN_POSITIVE),
                tolerance: spec.rel_tol,
                subdivisions,
                log_estimate: reference + norm.ln(),
            });
        }
        let (a, b) = (p.a, p.b);
        let l = eval_panel(f, a, mid, reference, &mut buf);
        let r = eval_panel(f, mid, b, reference, &mut buf);
        panels[worst] = l;
        panels.push(r);
        evaluations += 30;
        subdivisions += 1;
    }
}

/// Outcome of a scalar integral.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadOutcome {
    pub value: LogScalar,
    pub rel_error: f64,
    pub evaluations: usize,
}

struct RadialAdapter<F> {
    f: F,
}

impl<F: Fn(f64) -> LogScalar + Sync> LogIntegrand for RadialAdapter<F> {
    fn dim(&self) -> usize {
        1
    }
    fn log_envelope(&self, t: f64) -> f64 {
        (self.f)(t.exp()).log_mag + t
    }
    fn eval(&self, t: f64, out: &mut [Complex64]) -> f64 {
        let v = (self.f)(t.exp());
        out[0] = v.phase;
        v.log_mag + t
    }
}

/// `∫₀^R f(r) dr` for a log-domain integrand; `r_max` may be infinite.
pub fn integrate_radial<F>(f: F, r_max: f64, spec: &QuadSpec) -> Result<QuadOutcome>
where
    F: Fn(f64) -> LogScalar + Sync,
{
    spec.validate()?;
    let ad = RadialAdapter { f };
    let v = integrate_log(&ad, f64::NEG_INFINITY, r_max.ln(), None, spec)?;
    Ok(QuadOutcome {
        value: v.component(0),
        rel_error: v.relative_error(),
        evaluations: v.evaluations,
    })
}

/// Shared forward FFT for equispaced angular samples.
#[derive(Clone)]
pub struct AngularFft {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for AngularFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AngularFft({})", self.n)
    }
}

impl AngularFft {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(n);
        AngularFft { n, fft }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Angles `θ_k = 2πk/N`.
    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n as f64
    }

    /// From log-samples `ℓ_k = ln w(θ_k)` returns `(s, W)` with
    /// `∫₀^{2π} w(θ) e^{−idθ} dθ = W[d] · e^{s}` for `d = 0..N`.
    pub fn modes_from_log(&self, log_samples: &[f64], buf: &mut Vec<Complex64>) -> f64 {
        let top = log_samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        buf.clear();
        if top == f64::NEG_INFINITY {
            buf.resize(self.n, Complex64::new(0.0, 0.0));
            return f64::NEG_INFINITY;
        }
        buf.extend(log_samples.iter().map(|l| Complex64::new((l - top).exp(), 0.0)));
        self.fft.process(buf);
        let w = 2.0 * PI / self.n as f64;
        for v in buf.iter_mut() {
            *v *= w;
        }
        top
    }

    /// Same as [`Self::modes_from_log`] for signed log-domain samples.
    pub fn modes_from_scalars(&self, samples: &[LogScalar], buf: &mut Vec<Complex64>) -> f64 {
        let top = samples
            .iter()
            .map(|s| s.log_mag)
            .fold(f64::NEG_INFINITY, f64::max);
        buf.clear();
        if top == f64::NEG_INFINITY {
            buf.resize(self.n, Complex64::new(0.0, 0.0));
            return f64::NEG_INFINITY;
        }
        buf.extend(samples.iter().map(|s| {
            if s.is_zero() {
                Complex64::new(0.0, 0.0)
            } else {
                s.phase * (s.log_mag - top).exp()
            }
        }));
        self.fft.process(buf);
        let w = 2.0 * PI / self.n as f64;
        for v in buf.iter_mut() {
            *v *= w;
        }
        top
    }
}

/// Angular Fourier coefficients `∫₀^{2π} f(θ) e^{−ikθ} dθ`, `k = 0..=n_modes`,
/// by the equispaced rule with `spec.angular_nodes` samples.
pub fn angular_modes<F>(f: F, n_modes: usize, spec: &QuadSpec) -> Result<Vec<LogScalar>>
where
    F: Fn(f64) -> LogScalar,
{
    spec.validate()?;
    let n = spec.angular_nodes;
    if 2 * n_modes + 2 > n {
        return Err(LabError::InvalidArgument(format!(
            "{n_modes} modes need more than {n} angular nodes"
        )));
    }
    let fft = AngularFft::new(n);
    let samples: Vec<LogScalar> = (0..n).map(|k| f(fft.angle(k))).collect();
    let mut buf = Vec::with_capacity(n);
    let top = fft.modes_from_scalars(&samples, &mut buf);
    if top == f64::NEG_INFINITY {
        return Ok(vec![LogScalar::ZERO; n_modes + 1]);
    }
    let energy: f64 = buf.iter().map(|c| c.norm_sqr()).sum();
    let half = n / 2;
    let decade = (half / 10).max(1);
    let tail: f64 = buf
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let freq = if *k <= half { *k } else { n - *k };
            freq + decade > half
        })
        .map(|(_, c)| c.norm_sqr())
        .sum();
    if energy > 0.0 && tail / energy > spec.rel_tol {
        return Err(LabError::AliasingSuspected {
            ratio: tail / energy,
        });
    }
    Ok((0..=n_modes).map(|k| LogScalar::scaled(buf[k], top)).collect())
}

struct DiscAdapter<'a, F> {
    f: &'a F,
    angles: Vec<Complex64>,
}

impl<F: Fn(Complex64) -> LogScalar + Sync> DiscAdapter<'_, F> {
    fn mean(&self, r: f64) -> LogScalar {
        let w = 2.0 * PI / self.angles.len() as f64;
        LogScalar::sum(self.angles.iter().map(|e| (self.f)(*e * r))) * LogScalar::from_f64(w * r)
    }
}

impl<F: Fn(Complex64) -> LogScalar + Sync> LogIntegrand for DiscAdapter<'_, F> {
    fn dim(&self) -> usize {
        1
    }
    fn log_envelope(&self, t: f64) -> f64 {
        self.mean(t.exp()).log_mag + t
    }
    fn eval(&self, t: f64, out: &mut [Complex64]) -> f64 {
        let v = self.mean(t.exp());
        out[0] = v.phase;
        v.log_mag + t
    }
}

/// `∫_{|z|<R} f dA` by the radial rule in `t = ln r` times the equispaced angular rule.
pub fn integrate_disc<F>(f: F, radius: f64, spec: &QuadSpec) -> Result<QuadOutcome>
where
    F: Fn(Complex64) -> LogScalar + Sync,
{
    spec.validate()?;
    let n = spec.angular_nodes;
    let angles = (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect();
    let ad = DiscAdapter { f: &f, angles };
    let v = integrate_log(&ad, f64::NEG_INFINITY, radius.ln(), None, spec)?;
    Ok(QuadOutcome {
        value: v.component(0),
        rel_error: v.relative_error(),
        evaluations: v.evaluations,
    })
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `ln n!` (exact summation below 64, Lanczos above).
pub fn ln_factorial(n: usize) -> f64 {
    if n < 64 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}
