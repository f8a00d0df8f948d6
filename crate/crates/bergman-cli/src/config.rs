//! Run configuration: JSON file plus command-line overrides.

use crate::error::RunError;
use bergman_lab::metric_models::build_model;
use bergman_lab::section_space::GramSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Models,
    Rates,
    Peak,
    Fourier,
    Sharp,
    Families,
    Oscillation,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Models => "models",
            Command::Rates => "rates",
            Command::Peak => "peak",
            Command::Fourier => "fourier",
            Command::Sharp => "sharp",
            Command::Families => "families",
            Command::Oscillation => "oscillation",
            Command::All => "all",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// Everything a suite needs. Lists left empty in the file are filled with
/// per-command defaults by [`RunConfig::resolve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub model: Option<ModelConfig>,
    pub m_list: Vec<usize>,
    pub alpha: f64,
    pub q: f64,
    /// Peak orders for `peak`.
    pub p_list: Vec<usize>,
    /// Oscillation indices for `oscillation`.
    pub k_list: Vec<u32>,
    /// Family indices for `families`.
    pub n_list: Vec<u32>,
    /// Run the cusp contrast instead of the neck bound in `families`.
    pub cusp: bool,
    /// Extra grid points drawn uniformly from the rate annulus.
    pub random_points: usize,
    /// Number of random point pairs for the log-Lipschitz modulus.
    pub modulus_pairs: usize,
    pub quadrature: GramSpec,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            model: None,
            m_list: Vec::new(),
            alpha: 0.5,
            q: 2.0,
            p_list: Vec::new(),
            k_list: Vec::new(),
            n_list: Vec::new(),
            cusp: false,
            random_points: 0,
            modulus_pairs: 2000,
            quadrature: GramSpec::default(),
            output_dir: PathBuf::from("bergman-out"),
            seed: 0,
            format: Format::Both,
        }
    }
}

/// 1-based line of the first occurrence of `"key"` in `source`.
fn line_of(source: &str, key: &str) -> Option<usize> {
    let pat = format!("\"{key}\"");
    source.lines().position(|l| l.contains(&pat)).map(|i| i + 1)
}

impl RunConfig {
    /// Parses a JSON config; syntax and schema errors carry line and column.
    pub fn from_json(source: &str, origin: &str) -> Result<Self, RunError> {
        let cfg: RunConfig = serde_json::from_str(source).map_err(|e| {
            RunError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })?;
        cfg.validate_fields().map_err(|(key, msg)| {
            let at = line_of(source, key).map(|l| format!("{origin}:{l}: ")).unwrap_or_else(|| format!("{origin}: "));
            RunError::Config(format!("{at}{msg}"))
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Field-level checks that do not depend on the command.
    fn validate_fields(&self) -> Result<(), (&'static str, String)> {
        if self.m_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(("m_list", format!("m_list must be strictly ascending, got {:?}", self.m_list)));
        }
        if self.m_list.first() == Some(&0) {
            return Err(("m_list", "tensor powers must be ≥ 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(("alpha", format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.q > 1.0) {
            return Err(("q", format!("q must exceed 1, got {}", self.q)));
        }
        self.quadrature
            .quad
            .validate()
            .map_err(|e| ("quadrature", e.to_string()))?;
        if let Some(m) = &self.model {
            let model = build_model(&m.name, &m.params).map_err(|e| ("model", e.to_string()))?;
            if let Some(&bad) = self.m_list.iter().find(|&&k| k > model.degree_cap()) {
                return Err((
                    "m_list",
                    format!("m = {bad} exceeds the degree cap {} of {}", model.degree_cap(), m.name),
                ));
            }
        }
        Ok(())
    }

    /// Fills empty lists with the defaults of `command` and re-validates.
    pub fn resolve(mut self, command: Command) -> Result<Self, RunError> {
        self.command = Some(command);
        let default_model = match command {
            Command::Rates | Command::Sharp => Some("sharp_example"),
            Command::Peak => Some("flat_gaussian"),
            _ => None,
        };
        if self.model.is_none() {
            if let Some(name) = default_model {
                self.model = Some(ModelConfig {
                    name: name.into(),
                    params: BTreeMap::new(),
                });
            }
        }
        if self.m_list.is_empty() {
            self.m_list = match command {
                Command::Rates | Command::Peak => vec![64, 128, 256, 512, 1024],
                Command::Sharp => vec![128, 256, 512, 1024],
                Command::Families => vec![if self.cusp { 8 } else { 9 }, 21],
                Command::Oscillation => vec![32],
                _ => Vec::new(),
            };
            if command == Command::Families && self.cusp {
                self.m_list = vec![bergman_lab::examples_suite::CUSP_DEFAULT_M];
            }
        }
        if self.p_list.is_empty() {
            self.p_list = vec![0, 1, 2];
        }
        if self.k_list.is_empty() {
            self.k_list = bergman_lab::examples_suite::OSCILLATION_K.to_vec();
        }
        if self.n_list.is_empty() {
            self.n_list = if self.cusp {
                bergman_lab::examples_suite::CUSP_DEFAULT_N.to_vec()
            } else {
                vec![1, 2, 3]
            };
        }
        self.validate_fields().map_err(|(_, msg)| RunError::Config(msg))?;
        if command == Command::Rates && self.m_list.len() < 4 {
            return Err(RunError::Config("rates needs at least four tensor powers".into()));
        }
        if command == Command::Sharp && self.m_list.iter().any(|&m| !(128..=1024).contains(&m)) {
            return Err(RunError::Config(format!(
                "sharp needs m in [128, 1024], got {:?}",
                self.m_list
            )));
        }
        if command == Command::Oscillation && self.m_list.iter().any(|&m| m > 128) {
            return Err(RunError::Config(format!(
                "the oscillation family has degree cap 128, got {:?}",
                self.m_list
            )));
        }
        if command == Command::Oscillation && self.k_list.iter().any(|&k| k < 3) {
            return Err(RunError::Config("oscillation frequencies must be ≥ 3".into()));
        }
        if command == Command::Families && !self.cusp && self.m_list.iter().any(|m| m % 2 == 0) {
            return Err(RunError::Config(format!("the neck bound needs odd m, got {:?}", self.m_list)));
        }
        Ok(self)
    }

    /// Keeps run-wide settings and clears everything a suite resolves itself.
    pub fn defaults_only(&self) -> Self {
        RunConfig {
            alpha: self.alpha,
            q: self.q,
            random_points: self.random_points,
            modulus_pairs: self.modulus_pairs,
            quadrature: self.quadrature.clone(),
            output_dir: self.output_dir.clone(),
            seed: self.seed,
            format: self.format,
            ..RunConfig::default()
        }
    }

    /// Creates the output directory and checks that it is writable.
    pub fn prepare_output(&self) -> Result<(), RunError> {
        let dir = &self.output_dir;
        std::fs::create_dir_all(dir)
            .map_err(|e| RunError::Config(format!("output_dir {}: {e}", dir.display())))?;
        let probe = dir.join(".write-probe");
        std::fs::write(&probe, b"")
            .and_then(|_| std::fs::remove_file(&probe))
            .map_err(|e| RunError::Config(format!("output_dir {} is not writable: {e}", dir.display())))
    }
}

/// Parses `64,128,256` or a doubling range `64..1024`.
pub fn parse_m_list(s: &str) -> Result<Vec<usize>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let lo: usize = a.trim().parse().map_err(|_| format!("bad range start in '{s}'"))?;
        let hi: usize = b.trim().parse().map_err(|_| format!("bad range end in '{s}'"))?;
        if lo == 0 || hi < lo {
            return Err(format!("empty range '{s}'"));
        }
        let mut out = Vec::new();
        let mut m = lo;
        while m <= hi {
            out.push(m);
            m *= 2;
        }
        return Ok(out);
    }
    parse_list(s)
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| format!("cannot parse '{t}' in '{s}'")))
        .collect()
}

/// Parses `key=value`.
pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("parameter {k} is not a number: '{v}'"))?;
    Ok((k.trim().to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_range() {
        assert_eq!(parse_m_list("64..1024").unwrap(), vec![64, 128, 256, 512, 1024]);
        assert_eq!(parse_m_list("9,21").unwrap(), vec![9, 21]);
        assert!(parse_m_list("8..4").is_err());
    }

    #[test]
    fn syntax_error_has_line() {
        let src = "{\n  \"alpha\": 0.5,\n  \"q\": ,\n}";
        let e = RunConfig::from_json(src, "cfg.json").unwrap_err().to_string();
        assert!(e.contains("cfg.json:3:"), "{e}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let e = RunConfig::from_json("{\n\"alpah\": 0.5}", "c").unwrap_err().to_string();
        assert!(e.contains("alpah"), "{e}");
    }

    #[test]
    fn semantic_error_points_at_key() {
        let src = "{\n  \"seed\": 1,\n  \"m_list\": [64, 32]\n}";
        let e = RunConfig::from_json(src, "c.json").unwrap_err().to_string();
        assert!(e.contains(": c.json:3: m_list"), "{e}");
    }

    #[test]
    fn degree_cap_is_enforced() {
        let src = r#"{"model": {"name": "oscillation"}, "m_list": [64, 256]}"#;
        let e = RunConfig::from_json(src, "c").unwrap_err().to_string();
        assert!(e.contains("degree cap"), "{e}");
    }
}
