use bergman_cli::schema;
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bergman(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn csv_rows(path: PathBuf) -> (Vec<String>, usize) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    (header, r.records().count())
}

/// File name to contents, recursively.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("cfg.json");
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL_RATES: &[&str] = &["rates", "--m", "16,32,64,128", "--random-points", "20", "--seed", "5"];

#[test]
fn models_pass_and_echo_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bergman(&["models"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = json(tmp.path().join("models.json"));
    assert_eq!(doc["tool"], "bergman");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["command"], "models");
    assert!(doc["quadrature"]["quad"]["rel_tol"].is_number());
    assert_eq!(doc["passed"], true);
    let (_, n) = csv_rows(tmp.path().join("models_registry.csv"));
    assert_eq!(n, 6);
}

#[test]
fn rates_sweep_writes_one_row_per_degree() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bergman(SMALL_RATES, tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, n) = csv_rows(tmp.path().join("rates.csv"));
    assert_eq!(n, 4);
    let doc = json(tmp.path().join("rates.json"));
    assert_eq!(doc["config"]["model"]["name"], "sharp_example");
    assert_eq!(doc["config"]["m_list"], serde_json::json!([16, 32, 64, 128]));
    assert_eq!(doc["config"]["seed"], 5);
}

#[test]
fn csv_headers_follow_the_schema() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [&["models"][..], SMALL_RATES, &["fourier"][..]] {
        assert_eq!(code(&bergman(args, tmp.path())), 0);
    }
    let mut seen = 0;
    for e in std::fs::read_dir(tmp.path()).unwrap() {
        let p = e.unwrap().path();
        if p.extension().and_then(|x| x.to_str()) != Some("csv") {
            continue;
        }
        let stem = p.file_stem().unwrap().to_str().unwrap().to_string();
        let expected = schema::header(&stem).unwrap_or_else(|| panic!("{stem} not in schema"));
        let (header, _) = csv_rows(p);
        assert_eq!(header, expected, "{stem}");
        seen += 1;
    }
    assert!(seen >= 8, "only {seen} tables written");
}

#[test]
fn same_seed_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&bergman(SMALL_RATES, a.path())), 0);
    assert_eq!(code(&bergman(SMALL_RATES, b.path())), 0);
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>());
    for (name, bytes) in &sa {
        // The JSON echoes the output directory, which differs between runs.
        if name.extension().and_then(|x| x.to_str()) == Some("csv") {
            assert_eq!(bytes, &sb[name], "{}", name.display());
        }
    }
}

#[test]
fn reproduce_rerun_is_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_bergman"))
            .args(["reproduce", "--seed", "3", "--output-dir"])
            .arg(tmp.path())
            .output()
            .unwrap()
    };
    let first = run();
    let before = snapshot(tmp.path());
    let second = run();
    assert_eq!(code(&first), code(&second));
    assert!(before.contains_key(Path::new("manifest.json")));
    assert_eq!(before, snapshot(tmp.path()));
}

#[test]
fn unknown_model_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bergman(&["rates", "--model", "no_such_model"], tmp.path());
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.contains("no_such_model") && e.contains("sharp_example"), "{e}");
}

#[test]
fn malformed_config_points_at_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "{\n  \"alpha\": 0.5,\n  \"m_list\": [64, 32,]\n}\n");
    let o = bergman(&["rates", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("cfg.json:3"), "{}", stderr(&o));
}

#[test]
fn semantic_config_errors_are_located() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "{\n  \"alpha\": 0.5,\n  \"m_list\": [64, 32]\n}\n");
    let o = bergman(&["rates", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("cfg.json:3"), "{}", stderr(&o));

    let cfg = write_config(tmp.path(), "{\n  \"mlist\": [64]\n}\n");
    let o = bergman(&["rates", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("mlist"), "{}", stderr(&o));
}

#[test]
fn degree_limits_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bergman(&["oscillation", "--m", "256"], tmp.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let o = bergman(&["rates", "--m", "64,128"], tmp.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn starved_quadrature_is_non_convergence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"quadrature": {"quad": {"rel_tol": 1e-15, "max_subdivisions": 2}}}"#,
    );
    let o = bergman(&["peak", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn failing_gate_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bergman(&["sharp", "--m", "128,256"], tmp.path());
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let doc = json(tmp.path().join("sharp.json"));
    assert_eq!(doc["passed"], false);
    let flags = doc["flags"].as_array().unwrap();
    let paths = flags.iter().find(|f| f["name"] == "sharp.paths_agree").unwrap();
    assert_eq!(paths["pass"], true);
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"m_list": [16, 32, 64, 128, 256], "seed": 9}"#);
    let out = tmp.path().join("out");
    let o = bergman(
        &["rates", "--config", cfg.to_str().unwrap(), "--m", "16,32,64,128", "--random-points", "4"],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(csv_rows(out.join("rates.csv")).1, 4);
    assert_eq!(json(out.join("rates.json"))["config"]["seed"], 9);
}

#[test]
fn model_parameters_reach_the_echo() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bergman(
        &["peak", "--model", "flat_gaussian", "--param", "radius=3", "--m", "64,128", "--p", "0,1"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = json(tmp.path().join("peak.json"));
    assert_eq!(doc["config"]["model"]["params"]["radius"], 3.0);
    let (_, n) = csv_rows(tmp.path().join("peak_mass.csv"));
    assert_eq!(n, 4);

    let o = bergman(&["peak", "--model", "flat_gaussian", "--param", "radius"], tmp.path());
    assert_eq!(code(&o), 2);
}
