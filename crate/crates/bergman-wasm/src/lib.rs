//! Browser bindings for the lab: a radial metric profile, a peak-overlap
//! sweep and a Fourier growth check, each returning JSON.
//!
//! The plain functions return `Result<String, String>` so they can be tested
//! natively; the `#[wasm_bindgen]` wrappers turn errors into JS exceptions.

use bergman_lab::bergman_engine::metric_field;
use bergman_lab::fourier_bounds::{check_bound, TestFunction};
use bergman_lab::metric_models::{build_model, metric_jet, registry, MetricModel};
use bergman_lab::peak_sections::overlap_sweep;
use bergman_lab::quadrature::QuadSpec;
use bergman_lab::section_space::{GramSpec, SectionBasis};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use wasm_bindgen::prelude::*;

/// Degrees above this are refused to keep the page responsive.
pub const MAX_DEGREE: usize = 512;

#[derive(Serialize)]
struct ModelEntry {
    name: &'static str,
    symmetry: &'static str,
    params: Vec<&'static str>,
    summary: &'static str,
}

#[derive(Serialize)]
struct Profile {
    model: String,
    m: usize,
    r: Vec<f64>,
    exact: Vec<f64>,
    bergman: Vec<f64>,
    sup_error: f64,
}

#[derive(Serialize)]
struct Sweep {
    model: String,
    p: usize,
    q: usize,
    m: Vec<usize>,
    scaled: Vec<f64>,
    bounded: bool,
}

#[derive(Serialize)]
struct Bound {
    function: String,
    k: usize,
    sup: f64,
    r_at_sup: f64,
    r: Vec<f64>,
    ratio: Vec<f64>,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn model(name: &str, params_json: &str) -> Result<Box<dyn MetricModel>, String> {
    let params: BTreeMap<String, f64> = if params_json.trim().is_empty() {
        BTreeMap::new()
    } else {
        serde_json::from_str(params_json).map_err(|e| format!("parameters: {e}"))?
    };
    build_model(name, &params).map_err(|e| e.to_string())
}

fn check_degree(m: usize) -> Result<(), String> {
    if m == 0 || m > MAX_DEGREE {
        return Err(format!("degree must be in 1..={MAX_DEGREE}, got {m}"));
    }
    Ok(())
}

/// The model registry.
pub fn models_json() -> Result<String, String> {
    let list: Vec<ModelEntry> = registry()
        .into_iter()
        .map(|m| ModelEntry {
            name: m.name,
            symmetry: m.symmetry,
            params: m.params.iter().map(|(p, _)| *p).collect(),
            summary: m.summary,
        })
        .collect();
    to_json(&list)
}

/// `g` and `g_m` on `n` points of the segment `(0, r_max]` of the real axis.
pub fn metric_profile_json(name: &str, params_json: &str, m: usize, r_max: f64, n: usize) -> Result<String, String> {
    check_degree(m)?;
    if !(r_max > 0.0) || !(2..=400).contains(&n) {
        return Err("need r_max > 0 and 2 ≤ n ≤ 400".into());
    }
    let model = model(name, params_json)?;
    let r_max = r_max.min(0.95 * model.chart_radius());
    let r: Vec<f64> = (1..=n).map(|i| r_max * i as f64 / n as f64).collect();
    let points: Vec<Complex64> = r.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let basis = SectionBasis::build(model.as_ref(), m, &GramSpec::default()).map_err(|e| e.to_string())?;
    let radial = model.radial_at(1.0).is_some();
    let field = metric_field(&basis, &points, radial).map_err(|e| e.to_string())?;
    let exact: Vec<f64> = points.iter().map(|z| metric_jet(model.as_ref(), *z).g).collect();
    let bergman: Vec<f64> = field.iter().map(|j| j.value).collect();
    let sup_error = exact.iter().zip(&bergman).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    to_json(&Profile {
        model: name.to_string(),
        m,
        r,
        exact,
        bergman,
        sup_error,
    })
}

/// `m·|overlap(p, q)|` (divided by `log m` for `|p − q|` of 2 or 4) over a degree list.
pub fn overlap_json(name: &str, params_json: &str, p: usize, q: usize, m_list: &[usize]) -> Result<String, String> {
    if m_list.is_empty() {
        return Err("empty degree list".into());
    }
    for &m in m_list {
        check_degree(m)?;
    }
    let model = model(name, params_json)?;
    let (rows, verdict) =
        overlap_sweep(model.as_ref(), p, q, m_list, &QuadSpec::default()).map_err(|e| e.to_string())?;
    to_json(&Sweep {
        model: name.to_string(),
        p,
        q,
        m: rows.iter().map(|r| r.m).collect(),
        scaled: rows.iter().map(|r| r.scaled).collect(),
        bounded: verdict.bounded,
    })
}

/// Growth ratio `|h_k(r)| / bound(r)` for one of the built-in test functions.
pub fn fourier_json(function: &str, k: usize) -> Result<String, String> {
    let tf = match function {
        "r2_log_r_cos2" => TestFunction::log_quadratic(),
        "r4_log_r_cos4" => TestFunction::log_quartic(),
        "re_z2" => TestFunction::re_z_squared(),
        "abs_z2" => TestFunction::modulus_squared(),
        other => return Err(format!("unknown test function `{other}`")),
    };
    if k > 16 {
        return Err(format!("mode must be at most 16, got {k}"));
    }
    let b = check_bound(&tf, k, 1.0, &QuadSpec::default()).map_err(|e| e.to_string())?;
    to_json(&Bound {
        function: function.to_string(),
        k,
        sup: b.sup,
        r_at_sup: b.r_at_sup,
        r: b.samples.iter().map(|s| s.r).collect(),
        ratio: b.samples.iter().map(|s| s.ratio).collect(),
    })
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn models() -> Result<String, JsError> {
    js(models_json())
}

#[wasm_bindgen]
pub fn metric_profile(name: &str, params_json: &str, m: usize, r_max: f64, n: usize) -> Result<String, JsError> {
    js(metric_profile_json(name, params_json, m, r_max, n))
}

#[wasm_bindgen]
pub fn overlap(name: &str, params_json: &str, p: usize, q: usize, m_list: Vec<usize>) -> Result<String, JsError> {
    js(overlap_json(name, params_json, p, q, &m_list))
}

#[wasm_bindgen]
pub fn fourier(function: &str, k: usize) -> Result<String, JsError> {
    js(fourier_json(function, k))
}
