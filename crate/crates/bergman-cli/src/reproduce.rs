//! One-shot driver for the acceptance criteria with pinned configurations.

use crate::config::{ModelConfig, RunConfig};
use crate::error::{exit, RunError};
use crate::report::{measured_json, Flag, Report, Table, TOOL, VERSION};
use crate::row;
use crate::suites::*;
use bergman_lab::bergman_engine::{metric_field, Grid};
use bergman_lab::examples_suite::OSCILLATION_K;
use bergman_lab::metric_models::{build_model, fubini_study, MetricModel};
use bergman_lab::quadrature::ln_factorial;
use bergman_lab::section_space::{gram, GramSpec, SectionBasis};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const BALANCED_M: [usize; 3] = [4, 16, 64];
pub const BALANCED_TOL: f64 = 1e-9;
pub const GRAM_M: usize = 32;
pub const GRAM_TOL: f64 = 1e-10;
pub const SWEEP_M: [usize; 5] = [64, 128, 256, 512, 1024];
pub const SHARP_M: [usize; 4] = [128, 256, 512, 1024];
pub const NECK_N: [u32; 2] = [1, 2];
pub const NECK_M: [usize; 2] = [9, 21];
pub const HESSIAN_M: usize = 32;

/// The 40-point check grid: five radii spanning both sides of `|z| = 1`, eight angles.
pub fn balanced_grid() -> Grid {
    Grid::annular(&[0.1, 0.3, 0.6, 1.0, 2.0], 8)
}

pub fn part_balanced(report: &mut Report, m_list: &[usize], spec: &GramSpec) -> Result<(), RunError> {
    let fs = fubini_study();
    let grid = balanced_grid();
    let mut t = Table::new("balanced");
    for &m in m_list {
        let basis = SectionBasis::build(&fs, m, spec)?;
        let field = metric_field(&basis, &grid.points, true)?;
        let sup = field
            .iter()
            .zip(&grid.points)
            .map(|(b, z)| (b.value - fs.metric_coeff(*z)).abs())
            .fold(0.0, f64::max);
        t.push(row![m, sup]);
        report.measured.insert(format!("balanced.m{m}.sup_error"), sup);
        report.flags.push(Flag::gate(
            format!("balanced.m{m}"),
            sup < BALANCED_TOL,
            format!("sup |g_m − g_FS| {sup:.2e}, limit {BALANCED_TOL:e}"),
        ));
    }
    report.tables.push(t);
    Ok(())
}

pub fn part_gram_norms(report: &mut Report, m: usize, spec: &GramSpec) -> Result<(), RunError> {
    let g = gram(&fubini_study(), m, spec)?;
    let mut t = Table::new("gram_norms");
    let mut worst: f64 = 0.0;
    for (j, &ln) in g.log_diag.iter().enumerate() {
        let expected = ln_factorial(j) + ln_factorial(m - j) - ln_factorial(m + 1);
        let rel = (ln - expected).exp_m1().abs();
        worst = worst.max(rel);
        t.push(row![m, j, ln, expected, rel]);
    }
    report.tables.push(t);
    report.measured.insert(format!("gram.m{m}.max_rel_error"), worst);
    report.flags.push(Flag::gate(
        format!("gram.fs_m{m}"),
        worst < GRAM_TOL,
        format!("max relative error {worst:.2e}, limit {GRAM_TOL:e}"),
    ));
    Ok(())
}

/// A group of parts sharing one artifact directory.
struct Group {
    dir: &'static str,
    config: RunConfig,
    run: fn(&mut Report, &RunConfig) -> Result<(), RunError>,
}

/// Which flags of which group decide a criterion.
struct CriterionSpec {
    id: u8,
    title: &'static str,
    group: &'static str,
    flags: &'static [&'static str],
}

fn model_cfg(name: &str) -> Option<ModelConfig> {
    Some(ModelConfig {
        name: name.into(),
        params: BTreeMap::new(),
    })
}

fn pinned(base: &Path, seed: u64, dir: &str, f: impl FnOnce(&mut RunConfig)) -> RunConfig {
    let mut c = RunConfig {
        output_dir: base.join(dir),
        seed,
        ..RunConfig::default()
    };
    f(&mut c);
    c
}

fn groups(base: &Path, seed: u64) -> Vec<Group> {
    vec![
        Group {
            dir: "balanced",
            config: pinned(base, seed, "balanced", |c| {
                c.model = model_cfg("fubini_study");
                c.m_list = BALANCED_M.to_vec();
            }),
            run: |r, c| part_balanced(r, &c.m_list, &c.quadrature),
        },
        Group {
            dir: "gram",
            config: pinned(base, seed, "gram", |c| {
                c.model = model_cfg("fubini_study");
                c.m_list = vec![GRAM_M];
            }),
            run: |r, c| part_gram_norms(r, c.m_list[0], &c.quadrature),
        },
        Group {
            dir: "peak_mass",
            config: pinned(base, seed, "peak_mass", |c| {
                c.m_list = SWEEP_M.to_vec();
                c.p_list = vec![0, 1, 2];
            }),
            run: |r, c| {
                for name in ["flat_gaussian", "sharp_example"] {
                    let model = build_model(name, &BTreeMap::new())?;
                    part_peak_mass(r, model.as_ref(), &c.p_list, &c.m_list, &c.quadrature.quad)?;
                }
                Ok(())
            },
        },
        Group {
            dir: "jets",
            config: pinned(base, seed, "jets", |c| {
                c.model = model_cfg("flat_gaussian");
                c.m_list = SWEEP_M.to_vec();
            }),
            run: |r, c| part_jets(r, model_from(c)?.as_ref(), &c.m_list, &c.quadrature),
        },
        Group {
            dir: "rates",
            config: pinned(base, seed, "rates", |c| {
                c.model = model_cfg("sharp_example");
                c.m_list = SWEEP_M.to_vec();
            }),
            run: |r, c| part_rates(r, model_from(c)?.as_ref(), c),
        },
        Group {
            dir: "sharp_constants",
            config: pinned(base, seed, "sharp_constants", |c| {
                c.model = model_cfg("sharp_example");
                c.m_list = SHARP_M.to_vec();
            }),
            run: |r, c| part_sharp_constants(r, model_from(c)?.as_ref(), &c.m_list, &c.quadrature),
        },
        Group {
            dir: "sharp_asymptotics",
            config: pinned(base, seed, "sharp_asymptotics", |c| {
                c.model = model_cfg("sharp_example");
                c.m_list = vec![ASYM_M];
            }),
            run: |r, c| part_sharp_asymptotics(r, model_from(c)?.as_ref(), &c.m_list, &c.quadrature.quad),
        },
        Group {
            dir: "fourier_bounds",
            config: pinned(base, seed, "fourier_bounds", |_| {}),
            run: |r, c| part_fourier_bounds(r, &c.quadrature.quad),
        },
        Group {
            dir: "fourier_ode",
            config: pinned(base, seed, "fourier_ode", |_| {}),
            run: |r, c| part_ode(r, &c.quadrature.quad),
        },
        Group {
            dir: "neck",
            config: pinned(base, seed, "neck", |c| {
                c.n_list = NECK_N.to_vec();
                c.m_list = NECK_M.to_vec();
            }),
            run: |r, c| part_neck(r, &c.n_list, &c.m_list, &c.quadrature),
        },
        Group {
            dir: "oscillation",
            config: pinned(base, seed, "oscillation", |c| {
                c.k_list = OSCILLATION_K.to_vec();
                c.m_list = vec![HESSIAN_M];
            }),
            run: |r, c| {
                part_curvature(r, &c.k_list)?;
                part_hessian(r, &c.m_list, &c.k_list, &c.quadrature)
            },
        },
    ]
}

const CRITERIA: &[CriterionSpec] = &[
    CriterionSpec {
        id: 1,
        title: "balanced Fubini–Study metric",
        group: "balanced",
        flags: &["balanced.m4", "balanced.m16", "balanced.m64"],
    },
    CriterionSpec {
        id: 2,
        title: "Fubini–Study monomial norms",
        group: "gram",
        flags: &["gram.fs_m32"],
    },
    CriterionSpec {
        id: 3,
        title: "peak normalization residual·m bounded",
        group: "peak_mass",
        flags: &[
            "peak_mass.flat_gaussian.p0",
            "peak_mass.flat_gaussian.p1",
            "peak_mass.flat_gaussian.p2",
            "peak_mass.sharp_example.p0",
            "peak_mass.sharp_example.p1",
            "peak_mass.sharp_example.p2",
        ],
    },
    CriterionSpec {
        id: 4,
        title: "base-point jet asymptotics on flat_gaussian",
        group: "jets",
        flags: &["jets.flat_gaussian.f0", "jets.flat_gaussian.f1", "jets.flat_gaussian.f2"],
    },
    CriterionSpec {
        id: 5,
        title: "C⁰ and C¹ rate slopes on sharp_example",
        group: "rates",
        flags: &["rates.sup_slope_window", "rates.grad_slope_window"],
    },
    CriterionSpec {
        id: 6,
        title: "sharp_example constants at the largest m",
        group: "sharp_constants",
        flags: &["sharp.beta01_displayed", "sharp.gradient_displayed", "sharp.paths_agree"],
    },
    CriterionSpec {
        id: 7,
        title: "sharp_example overlap and norm asymptotics at m = 400",
        group: "sharp_asymptotics",
        flags: &["sharp.overlap_displayed_m400", "sharp.norm_m400"],
    },
    CriterionSpec {
        id: 8,
        title: "growth bound attained by r² log r cos 2θ",
        group: "fourier_bounds",
        flags: &["fourier.log_quadratic_sharp", "fourier.companion_no_log"],
    },
    CriterionSpec {
        id: 9,
        title: "radial ODE identity for Fourier coefficients",
        group: "fourier_ode",
        flags: &["ode.r2_log_r_cos2", "ode.re_z2", "ode.abs_z2"],
    },
    CriterionSpec {
        id: 10,
        title: "C^{1,α} modulus within a factor-3 band of the rate",
        group: "rates",
        flags: &["rates.c1alpha_band"],
    },
    CriterionSpec {
        id: 11,
        title: "Hessian sups bounded at their rates",
        group: "rates",
        flags: &["rates.hess_zz_per_log_m_bounded", "rates.hess_zzbar_sup_bounded"],
    },
    CriterionSpec {
        id: 12,
        title: "neck_family lower bound at z = 1",
        group: "neck",
        flags: &["neck.lower_bound"],
    },
    CriterionSpec {
        id: 13,
        title: "oscillation mechanism: curvature identity and Hessian L¹",
        group: "oscillation",
        flags: &["curvature.displayed_identity", "hessian.non_decreasing_m32"],
    },
];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub error: Option<String>,
    pub flags: Vec<Flag>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
    #[serde(serialize_with = "ser_measured")]
    pub measured: BTreeMap<String, f64>,
}

fn ser_measured<S: serde::Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
    measured_json(m).serialize(s)
}

#[derive(Clone, Debug)]
pub struct Manifest {
    pub criteria: Vec<CriterionResult>,
    pub path: PathBuf,
    /// Non-convergence prevented at least one criterion from being evaluated.
    pub non_convergence: bool,
}

impl Manifest {
    pub fn exit_code(&self) -> i32 {
        if self.non_convergence {
            exit::NON_CONVERGENCE
        } else if self.criteria.iter().all(|c| c.pass) {
            exit::PASS
        } else {
            exit::SUITE_FAILURE
        }
    }
}

struct GroupOutcome {
    report: Option<Report>,
    artifacts: Vec<String>,
    error: Option<RunError>,
}

fn relative(base: &Path, p: &Path) -> String {
    p.strip_prefix(base).unwrap_or(p).to_string_lossy().replace('\\', "/")
}

/// Runs every criterion into `base` and writes `manifest.json`.
pub fn reproduce(base: &Path, seed: u64, mut progress: impl FnMut(&str)) -> Result<Manifest, RunError> {
    std::fs::create_dir_all(base).map_err(|e| RunError::Config(format!("output_dir {}: {e}", base.display())))?;
    let mut outcomes: BTreeMap<&'static str, GroupOutcome> = BTreeMap::new();
    for g in groups(base, seed) {
        progress(g.dir);
        g.config.prepare_output()?;
        let mut report = Report::new(g.dir);
        let outcome = match (g.run)(&mut report, &g.config) {
            Ok(()) => {
                let files = report.write(&g.config)?;
                GroupOutcome {
                    artifacts: files.iter().map(|p| relative(base, p)).collect(),
                    report: Some(report),
                    error: None,
                }
            }
            Err(RunError::Config(msg)) => return Err(RunError::Config(msg)),
            Err(e) => GroupOutcome {
                report: None,
                artifacts: Vec::new(),
                error: Some(e),
            },
        };
        outcomes.insert(g.dir, outcome);
    }

    let mut criteria = Vec::new();
    let mut non_convergence = false;
    for spec in CRITERIA {
        let o = &outcomes[spec.group];
        let (pass, error, flags, measured) = match (&o.report, &o.error) {
            (Some(r), _) => {
                let flags: Vec<Flag> = spec
                    .flags
                    .iter()
                    .map(|n| {
                        r.flag(n).cloned().unwrap_or_else(|| Flag::gate(*n, false, "flag not produced"))
                    })
                    .collect();
                (flags.iter().all(|f| f.pass), None, flags, r.measured.clone())
            }
            (None, Some(e)) => {
                non_convergence |= e.exit_code() == exit::NON_CONVERGENCE;
                (false, Some(e.to_string()), Vec::new(), BTreeMap::new())
            }
            (None, None) => unreachable!("group outcome without report or error"),
        };
        criteria.push(CriterionResult {
            id: spec.id,
            title: spec.title.into(),
            pass,
            error,
            flags,
            artifacts: o.artifacts.clone(),
            measured,
        });
    }

    let path = base.join("manifest.json");
    let doc: Value = json!({
        "tool": TOOL,
        "version": VERSION,
        "seed": seed,
        "attempted": criteria.len(),
        "passed": criteria.iter().filter(|c| c.pass).count(),
        "criteria": criteria,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(Manifest {
        criteria,
        path,
        non_convergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_criterion_names_a_group() {
        let base = Path::new("/nonexistent");
        let dirs: Vec<&str> = groups(base, 0).iter().map(|g| g.dir).collect();
        for c in CRITERIA {
            assert!(dirs.contains(&c.group), "criterion {}", c.id);
        }
        let ids: Vec<u8> = CRITERIA.iter().map(|c| c.id).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (1..=13).collect::<Vec<u8>>());
    }

    #[test]
    fn balanced_grid_has_forty_points() {
        assert_eq!(balanced_grid().len(), 40);
    }
}
