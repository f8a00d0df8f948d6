//! Frozen CSV column orders. `SCHEMA.md` documents the same list and a test
//! keeps the two in sync.

use bergman_lab::bergman_engine::RateReport;

pub const TABLES: &[(&str, &[&str])] = &[
    ("models_registry", &["name", "symmetry", "params", "degree_cap", "summary"]),
    (
        "models_samples",
        &[
            "model",
            "r",
            "theta",
            "log_weight",
            "metric",
            "curvature",
            "gaussian_curvature",
            "compatibility_residual",
        ],
    ),
    ("rates", &RateReport::CSV_HEADER),
    ("rates_slopes", &["model", "quantity", "slope", "intercept", "residual_rms"]),
    ("rates_scaled", &["m", "c1alpha_scaled", "hess_zz_per_log_m", "hess_zzbar_sup"]),
    ("rates_modulus", &["m", "sup", "pair_i", "pair_j", "pairs_used"]),
    ("peak_mass", &["model", "p", "m", "lambda_inv_sq_log", "residual"]),
    ("peak_overlaps", &["model", "p", "p_prime", "m", "overlap_re", "overlap_im", "scaled"]),
    (
        "peak_jets",
        &["model", "m", "f0", "f1", "f2", "mixed", "residual_f0", "residual_f1", "residual_f2"],
    ),
    ("fourier_bounds", &["function", "k", "case", "sup", "r_at_sup"]),
    ("fourier_profile", &["function", "k", "r", "h", "bound_denominator", "ratio"]),
    ("fourier_ode", &["function", "k", "r", "lhs", "rhs", "residual", "truncation"]),
    ("fourier_induced", &["model", "function", "k", "sup", "r_at_sup"]),
    (
        "sharp_overlaps",
        &[
            "k",
            "m",
            "integral",
            "abs_error",
            "displayed",
            "displayed_ratio_minus_one",
            "corrected",
            "corrected_ratio_minus_one",
        ],
    ),
    ("sharp_norms", &["k", "m", "integral", "leading", "ratio_minus_one"]),
    (
        "sharp_constants",
        &[
            "m",
            "m_beta01",
            "m_beta12",
            "m_beta01_gram",
            "gradient_perturbative",
            "error_perturbative",
            "gradient_direct",
            "gradient_direct_im",
            "error_direct",
            "paths_agree",
        ],
    ),
    ("sharp_extrapolated", &["quantity", "value", "error", "residual", "displayed", "corrected"]),
    (
        "families_neck",
        &[
            "n",
            "m",
            "bergman_value",
            "bergman_normalized",
            "bergman_engine",
            "lower_bound",
            "metric_value",
            "symmetry_defect",
            "bound_holds",
        ],
    ),
    (
        "families_cusp",
        &["n", "m", "metric_ratio_at_cusp", "bergman_sup_ratio", "sup_gap", "gram_spread"],
    ),
    ("oscillation_l1", &["reference", "k", "l1"]),
    ("oscillation_curvature", &["k", "displayed_sup", "corrected_sup"]),
    ("oscillation_hessian", &["k", "m", "l1", "model_l1", "relative"]),
    ("balanced", &["m", "sup_error"]),
    ("gram_norms", &["m", "j", "log_norm", "log_expected", "rel_error"]),
];

pub fn header(name: &str) -> Option<&'static [&'static str]> {
    TABLES.iter().find(|(n, _)| *n == name).map(|(_, h)| *h)
}

/// The schema document shipped with the crate.
pub const SCHEMA_MD: &str = include_str!("../SCHEMA.md");
