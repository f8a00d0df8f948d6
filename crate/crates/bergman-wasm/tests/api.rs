use bergman_wasm::*;
use serde_json::Value;

fn parse(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.unwrap()).unwrap()
}

#[test]
fn registry_lists_every_model() {
    let v = parse(models_json());
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|m| m["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"fubini_study") && names.contains(&"sharp_example"));
}

#[test]
fn fubini_study_profile_is_exact() {
    let v = parse(metric_profile_json("fubini_study", "", 12, 1.5, 30));
    assert_eq!(v["r"].as_array().unwrap().len(), 30);
    assert!(v["sup_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn parameters_are_passed_through() {
    let v = parse(metric_profile_json("flat_gaussian", r#"{"radius": 3}"#, 32, 10.0, 10));
    // Points are clipped to the chart.
    assert!(v["r"][9].as_f64().unwrap() <= 0.95 * 3.0 + 1e-12);
    assert!(metric_profile_json("flat_gaussian", r#"{"radius": "x"}"#, 32, 1.0, 10).is_err());
    assert!(metric_profile_json("flat_gaussian", r#"{"size": 3}"#, 32, 1.0, 10).is_err());
}

#[test]
fn limits_are_enforced() {
    assert!(metric_profile_json("fubini_study", "", 0, 1.0, 10).is_err());
    assert!(metric_profile_json("fubini_study", "", MAX_DEGREE + 1, 1.0, 10).is_err());
    assert!(metric_profile_json("fubini_study", "", 8, 1.0, 1).is_err());
    assert!(metric_profile_json("nowhere", "", 8, 1.0, 10).is_err());
    assert!(overlap_json("sharp_example", "", 0, 1, &[]).is_err());
    assert!(fourier_json("unknown", 2).is_err());
}

#[test]
fn sharp_overlap_sweep() {
    let v = parse(overlap_json("sharp_example", "", 0, 1, &[64, 128, 256]));
    let scaled: Vec<f64> = v["scaled"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(scaled.len(), 3);
    assert!(scaled.iter().all(|s| *s > 3e-3 && *s < 6e-3));
    assert_eq!(v["bounded"], true);
}

#[test]
fn log_quadratic_bound() {
    let v = parse(fourier_json("r2_log_r_cos2", 2));
    assert!((v["sup"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-10);
}
