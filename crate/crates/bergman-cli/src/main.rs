use bergman_cli::config::{parse_list, parse_m_list, parse_param, Command, Format, ModelConfig, RunConfig};
use bergman_cli::error::RunError;
use bergman_cli::reproduce::reproduce;
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

/// Bergman metric convergence lab.
#[derive(Parser)]
#[command(name = "bergman", version, about)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// List registered models and sample their fields.
    Models(Common),
    /// Convergence rates of g_m → g.
    Rates(Common),
    /// Peak-section normalizations, overlaps and base-point jets.
    Peak(Common),
    /// Fourier growth bounds and the radial ODE identity.
    Fourier(Common),
    /// sharp_example overlap asymptotics and limiting constants.
    Sharp(Common),
    /// neck_family lower bound, or the cusp_family contrast with --cusp.
    Families(Common),
    /// Oscillation family L¹ norms, curvature identity and Hessian demo.
    Oscillation(Common),
    /// Every suite with default settings.
    All(Common),
    /// All acceptance criteria with pinned configs, plus manifest.json.
    Reproduce {
        #[arg(long, default_value = "bergman-reproduce")]
        output_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A comma-separated list parsed as one argument value.
#[derive(Clone, Debug)]
struct List<T>(Vec<T>);

fn m_list(s: &str) -> Result<List<usize>, String> {
    parse_m_list(s).map(List)
}

fn list<T: std::str::FromStr>(s: &str) -> Result<List<T>, String> {
    parse_list(s).map(List)
}

#[derive(Args, Default)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Model parameter, repeatable: --param n=2
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Tensor powers: 64,128,256 or a doubling range 64..1024.
    #[arg(long = "m", value_parser = m_list)]
    m_list: Option<List<usize>>,
    /// Peak orders.
    #[arg(long = "p", value_parser = list::<usize>)]
    p_list: Option<List<usize>>,
    /// Oscillation frequencies.
    #[arg(long = "k", value_parser = list::<u32>)]
    k_list: Option<List<u32>>,
    /// Family indices.
    #[arg(long = "n", value_parser = list::<u32>)]
    n_list: Option<List<u32>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    cusp: bool,
    #[arg(long)]
    random_points: Option<usize>,
    #[arg(long)]
    modulus_pairs: Option<usize>,
}

impl Common {
    fn into_config(self) -> Result<RunConfig, RunError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(name) = self.model {
            cfg.model = Some(ModelConfig {
                name,
                params: BTreeMap::new(),
            });
        }
        if !self.params.is_empty() {
            let m = cfg
                .model
                .as_mut()
                .ok_or_else(|| RunError::Config("--param needs --model".into()))?;
            m.params.extend(self.params);
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(alpha, q, seed, format, output_dir, random_points, modulus_pairs);
        macro_rules! set_list {
            ($($f:ident),*) => { $(if let Some(List(v)) = self.$f { cfg.$f = v; })* };
        }
        set_list!(m_list, p_list, k_list, n_list);
        cfg.cusp |= self.cusp;
        Ok(cfg)
    }
}

fn run_verb(command: Command, common: Common) -> Result<i32, RunError> {
    let outcome = bergman_cli::run(command, common.into_config()?)?;
    for r in &outcome.reports {
        print!("{}", r.summary());
    }
    println!("wrote {} files", outcome.files.len());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.verb {
        Verb::Models(c) => run_verb(Command::Models, c),
        Verb::Rates(c) => run_verb(Command::Rates, c),
        Verb::Peak(c) => run_verb(Command::Peak, c),
        Verb::Fourier(c) => run_verb(Command::Fourier, c),
        Verb::Sharp(c) => run_verb(Command::Sharp, c),
        Verb::Families(c) => run_verb(Command::Families, c),
        Verb::Oscillation(c) => run_verb(Command::Oscillation, c),
        Verb::All(c) => run_verb(Command::All, c),
        Verb::Reproduce { output_dir, seed } => reproduce(&output_dir, seed, |g| eprintln!("running {g}")).map(|m| {
            for c in &m.criteria {
                let status = if c.pass { "PASS" } else { "FAIL" };
                let note = c.error.as_deref().unwrap_or("");
                println!("{status}  criterion {:>2}  {}  {note}", c.id, c.title);
            }
            println!("manifest: {}", m.path.display());
            m.exit_code()
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
