//! Command pipelines: each runs its module path on a parsed configuration
//! and writes CSV or JSON artifacts plus a provenance sidecar.

use crate::config::RunConfig;
use crate::json::{format_float, Json};
use degenctrl_core as core;
use degenctrl_core::{CoupledVariant, ObservabilityMethod, Profile, RatioEntry, SingleVariant};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Output table format for the check commands; structured reports are
/// always JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub format: Format,
    pub jobs: usize,
}

/// Top-level command error with the exit category attached.
#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("{0}")]
    Core(#[from] core::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CommandError {
    /// Stable machine-readable category, one exit code per category.
    pub fn category(&self) -> (&'static str, i32) {
        match self {
            CommandError::Config(_) => ("config", 3),
            CommandError::Core(e) => match e {
                core::Error::InvalidArgument(_)
                | core::Error::OutOfRange(_)
                | core::Error::Domain(_)
                | core::Error::UnsupportedParameter(_)
                | core::Error::UnknownProfile(_) => ("argument", 4),
                core::Error::HypothesisViolated(_) => ("hypothesis", 5),
                core::Error::SingularSystem(_) | core::Error::SingularIntegral(_) => {
                    ("numerical", 6)
                }
                core::Error::CgDidNotConverge { .. } => ("convergence", 7),
            },
            CommandError::Io { .. } => ("io", 8),
        }
    }
}

pub type CommandResult = Result<Vec<PathBuf>, CommandError>;

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CommandError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CommandError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    let mut file = fs::File::create(path).map_err(|source| CommandError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(contents.as_bytes())
        .map_err(|source| CommandError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Provenance sidecar: tool, version and the canonical configuration. No
/// timestamps, so identical runs produce identical trees.
pub(crate) fn write_sidecar(
    opts: &OutputOptions,
    command: &str,
    config: &RunConfig,
    stem: &str,
) -> Result<PathBuf, CommandError> {
    let path = opts.dir.join(format!("{stem}.meta.json"));
    let doc = Json::object(vec![
        ("tool", Json::Str("degenctrl".into())),
        ("version", Json::Str(env!("CARGO_PKG_VERSION").into())),
        ("command", Json::Str(command.into())),
        ("config", Json::Str(config.serialize())),
    ]);
    write_file(&path, &doc.render())?;
    Ok(path)
}

fn csv_row(cells: &[String]) -> String {
    cells.join(",")
}

fn fmt_f(x: f64) -> String {
    if x.is_finite() {
        format_float(x)
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Write ratio rows either as the fixed CSV schema (s, lhs, rhs, ratio,
/// variant) or as a JSON array of the same records.
fn write_ratio_table(
    opts: &OutputOptions,
    stem: &str,
    rows: &[(RatioEntry, String)],
) -> Result<PathBuf, CommandError> {
    match opts.format {
        Format::Csv => {
            let mut out = String::from("s,lhs,rhs,ratio,variant\n");
            for (entry, variant) in rows {
                out.push_str(&csv_row(&[
                    fmt_f(entry.s),
                    fmt_f(entry.lhs),
                    fmt_f(entry.rhs),
                    fmt_f(entry.ratio),
                    variant.clone(),
                ]));
                out.push('\n');
            }
            let path = opts.dir.join(format!("{stem}.csv"));
            write_file(&path, &out)?;
            Ok(path)
        }
        Format::Json => {
            let items: Vec<Json> = rows
                .iter()
                .map(|(entry, variant)| {
                    Json::object(vec![
                        ("s", Json::Float(entry.s)),
                        ("lhs", Json::Float(entry.lhs)),
                        ("rhs", Json::Float(entry.rhs)),
                        ("ratio", Json::float_or_null(entry.ratio)),
                        ("variant", Json::Str(variant.clone())),
                    ])
                })
                .collect();
            let path = opts.dir.join(format!("{stem}.json"));
            write_file(&path, &Json::Array(items).render())?;
            Ok(path)
        }
    }
}

fn energy_json(report: &core::EnergyReport, final_norm: f64) -> Json {
    Json::object(vec![
        ("sup_norm_sq", Json::Float(report.sup_norm_sq)),
        ("gradient_integral", Json::Float(report.gradient_integral)),
        ("source_norm_sq", Json::Float(report.source_norm_sq)),
        ("initial_norm_sq", Json::Float(report.initial_norm_sq)),
        ("bound_ratio", Json::Float(report.bound_ratio)),
        ("final_norm", Json::Float(final_norm)),
    ])
}

pub fn run_solve(config: &RunConfig, opts: &OutputOptions) -> CommandResult {
    let mesh = config.system.mesh()?;
    let (u0, v0) = config.initial_profile.sample(&mesh);
    let field = core::solve_forward(&config.system, &u0, &v0, None)?;
    let report = core::energy_report(&field, &config.system, None);
    let path = opts.dir.join("solve.json");
    write_file(&path, &energy_json(&report, field.final_norm()).render())?;
    let meta = write_sidecar(opts, "solve", config, "solve")?;
    Ok(vec![path, meta])
}

pub fn run_adjoint(config: &RunConfig, opts: &OutputOptions) -> CommandResult {
    let mesh = config.system.mesh()?;
    let (u0, v0) = config.initial_profile.sample(&mesh);
    let field = core::solve_adjoint_forward(&config.system, &u0, &v0)?;
    let report = core::energy_report(&field, &config.system, None);
    let path = opts.dir.join("adjoint.json");
    write_file(&path, &energy_json(&report, field.final_norm()).render())?;
    let meta = write_sidecar(opts, "adjoint", config, "adjoint")?;
    Ok(vec![path, meta])
}

fn hum_result_json(result: &core::HumResult, include_control: bool) -> Json {
    let control_norm_sq: f64 = {
        // dt-weighted l2 of the control levels, a compact size readout.
        let levels = &result.control;
        levels
            .iter()
            .map(|level| level.iter().map(|h| h * h).sum::<f64>())
            .sum::<f64>()
            / levels.len() as f64
    };
    let mut fields = vec![
        ("epsilon", Json::Float(result.epsilon)),
        ("cg_iterations", Json::Int(result.cg_iterations as i64)),
        ("cg_residual", Json::Float(result.cg_residual)),
        ("cost", Json::Float(result.cost)),
        ("final_norm", Json::Float(result.final_norm)),
        (
            "uncontrolled_final_norm",
            Json::Float(result.uncontrolled_final_norm),
        ),
        ("control_mean_square", Json::Float(control_norm_sq)),
    ];
    if include_control {
        fields.push((
            "control",
            Json::Array(
                result
                    .control
                    .iter()
                    .map(|level| Json::Array(level.iter().map(|&h| Json::Float(h)).collect()))
                    .collect(),
            ),
        ));
    }
    Json::object(fields)
}

pub fn run_hum(config: &RunConfig, opts: &OutputOptions) -> CommandResult {
    if config.system.coupling_lower_bound() <= 0.0 {
        eprintln!(
            "warning: b21 is not bounded below on omega1; the second component \
             is not reached through the coupling and the control may stall"
        );
    }
    let mesh = config.system.mesh()?;
    let (u0, v0) = config.initial_profile.sample(&mesh);
    let mut runs = Vec::new();
    for &epsilon in &config.epsilons {
        let result = core::hum_solve(
            &config.system,
            &u0,
            &v0,
            epsilon,
            config.cg_tol,
            config.cg_max_iter,
        )?;
        runs.push(hum_result_json(&result, config.epsilons.len() == 1));
    }
    let doc = Json::object(vec![("runs", Json::Array(runs))]);
    let path = opts.dir.join("hum.json");
    write_file(&path, &doc.render())?;
    let meta = write_sidecar(opts, "hum", config, "hum")?;
    Ok(vec![path, meta])
}

pub fn run_observability(config: &RunConfig, opts: &OutputOptions) -> CommandResult {
    let estimate =
        core::observability_estimate(&config.system, config.basis_size, config.obs_method)?;
    let doc = Json::object(vec![
        ("c_obs", Json::float_or_null(estimate.c_obs)),
        ("observable", Json::Bool(estimate.c_obs.is_finite())),
        ("basis_size", Json::Int(estimate.basis_size as i64)),
        (
            "method",
            Json::Str(
                match estimate.method {
                    ObservabilityMethod::ReducedBasis => "reduced-basis",
                    ObservabilityMethod::DenseOracle => "dense-oracle",
                }
                .into(),
            ),
        ),
    ]);
    let path = opts.dir.join("observability.json");
    write_file(&path, &doc.render())?;
    let meta = write_sidecar(opts, "observability", config, "observability")?;
    Ok(vec![path, meta])
}

/// Hardy table: for each gamma, four monomial profiles approaching the
/// sharp exponent from above.
pub const HARDY_GAMMAS: [f64; 4] = [-1.0, -0.5, 0.0, 0.5];
pub const HARDY_OFFSETS: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

pub fn run_check_hardy(config: &RunConfig, opts: &OutputOptions) -> CommandResult {
    let mesh = core::Mesh::graded(config.system.nx.max(400), config.system.grading_exponent)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for &gamma in &HARDY_GAMMAS {
        for &offset in &HARDY_OFFSETS {
            let exponent = (1.0 - gamma) / 2.0 + offset;
            let v = mesh.sample(|x| x.powf(exponent));
            let check = core::hardy_ratio(gamma, &v, &mesh, 1e-3)?;
            rows.push(vec![
                fmt_f(gamma),
                format!("x^{exponent}"),
                fmt_f(check.lhs),
                fmt_f(check.rhs_integral),
                fmt_f(check.c_gamma),
                check.pass.to_string(),
            ]);
        }
    }
    let path = match opts.format {
        Format::Csv => {
            let mut out = String::from("gamma,profile,lhs,rhs_integral,c_gamma,pass\n");
            for row in &rows {
                out.push_str(&csv_row(row));
                out.push('\n');
            }
            let path = opts.dir.join("hardy.csv");
            write_file(&path, &out)?;
            path
        }
        Format::Json => {
            let items: Vec<Json> = rows
                .iter()
                .map(|row| {
                    Json::object(vec![
                        ("gamma", Json::Str(row[0].clone())),
                        ("profile", Json::Str(row[1].clone())),
                        ("lhs", Json::Str(row[2].clone())),
                        ("rhs_integral", Json::Str(row[3].clone())),
                        ("c_gamma", Json::Str(row[4].clone())),
                        ("pass", Json::Bool(row[5] == "true")),
                    ])
                })
                .collect();
            let path = opts.dir.join("hardy.json");
            write_file(&path, &Json::Array(items).render())?;
            path
        }
    };
    let meta = write_sidecar(opts, "check-hardy", config, "hardy")?;
    Ok(vec![path, meta])
}

pub fn run_check_caccioppoli(config: &RunConfig, opts: &OutputOptions) -> CommandResult {
    let mesh = config.system.mesh()?;
    let (u0, v0) = config.initial_profile.sample(&mesh);
    let field = core::solve_adjoint_forward(&config.system, &u0, &v0)?;
    let spec = config.carleman_spec()?;
    let mut rows = Vec::new();
    for &s in &spec.s_grid {
        let entry = core::caccioppoli_check(
            &field,
            &spec.params,
            &config.system.omega,
            &spec.omega_prime,
            s,
        )?;
        rows.push((entry, "caccioppoli".to_string()));
    }
    let path = write_ratio_table(opts, "caccioppoli", &rows)?;
    let meta = write_sidecar(opts, "check-caccioppoli", config, "caccioppoli")?;
    Ok(vec![path, meta])
}

pub fn run_check_carleman(config: &RunConfig, opts: &OutputOptions) -> CommandResult {
    let mesh = config.system.mesh()?;
    let spec = config.carleman_spec()?;
    let mut rows: Vec<(RatioEntry, String)> = Vec::new();

    // Single-equation suite on a manufactured solution.
    let (y, f) = core::manufacture_solution(
        Profile::PolyBump,
        config.system.alpha1,
        config.system.t_final,
        &mesh,
        config.system.nt,
    );
    for &s in &spec.s_grid {
        let entry = core::carleman_single(
            &y,
            &f,
            &spec.params,
            config.system.alpha1,
            s,
            SingleVariant::FullBoundary,
        )?;
        rows.push((entry, "single-full-boundary".into()));
        let entry = core::carleman_single(
            &y,
            &f,
            &spec.params,
            config.system.alpha1,
            s,
            SingleVariant::Localized(spec.omega_prime),
        )?;
        rows.push((entry, "single-localized".into()));
    }

    // Coupled suite on the adjoint trajectory of the configured system.
    let (u0, v0) = config.initial_profile.sample(&mesh);
    let field = core::solve_adjoint_forward(&config.system, &u0, &v0)?;
    let one_force_ok = config.system.coupling_lower_bound() > 0.0;
    if !one_force_ok {
        eprintln!("note: skipping one-force variants (b21 not bounded below on omega1)");
    }
    let mut variants = vec![
        CoupledVariant::TwoObservation,
        CoupledVariant::TwoObservationDensity,
    ];
    if one_force_ok {
        variants.push(CoupledVariant::OneForce);
        variants.push(CoupledVariant::OneForceDensity);
    }
    for variant in variants {
        for &s in &spec.s_grid {
            let entry = core::carleman_coupled(&field, &config.system, &spec, s, variant)?;
            rows.push((entry, variant.label().to_string()));
        }
    }
    let path = write_ratio_table(opts, "carleman", &rows)?;
    let meta = write_sidecar(opts, "check-carleman", config, "carleman")?;
    Ok(vec![path, meta])
}

pub fn run_check_weights(config: &RunConfig, opts: &OutputOptions) -> CommandResult {
    let params = config.weight_params()?;
    let report = core::validate_params(&params);
    let bounds = core::theta_bound_constants(params.t_final, params.k)?;
    let mesh = config.system.mesh()?;
    let times = core::time_grid(params.t_final, config.system.nt);
    let ordering = core::check_phi_ordering(&params, &mesh.nodes, &times);
    let spec = config.carleman_spec()?;
    let s_anchor = spec.s_grid[0];
    let comparison = core::weight_comparison_constants(
        &params,
        config.system.alpha1.max(config.system.alpha2),
        &mesh.nodes,
        &times,
        s_anchor,
    );
    let doc = Json::object(vec![
        (
            "admissibility",
            Json::object(vec![
                ("d_ok", Json::Bool(report.d_ok)),
                ("k_ok", Json::Bool(report.k_ok)),
                ("rho_ok", Json::Bool(report.rho_ok)),
                ("beta_ok", Json::Bool(report.beta_ok)),
                ("lambda_lo", Json::Float(report.lambda_interval.0)),
                ("lambda_hi", Json::Float(report.lambda_interval.1)),
                ("interval_nonempty", Json::Bool(report.interval_nonempty)),
                ("lambda", Json::Float(params.lambda)),
                ("lambda_in_interval", Json::Bool(report.lambda_in_interval)),
                ("default_lambda", Json::Float(report.default_lambda)),
                ("admissible", Json::Bool(report.admissible)),
            ]),
        ),
        (
            "ordering",
            Json::object(vec![
                ("holds", Json::Bool(ordering.holds)),
                (
                    "worst_upper_margin",
                    Json::Float(ordering.worst_upper_margin),
                ),
                (
                    "worst_lower_margin",
                    Json::Float(ordering.worst_lower_margin),
                ),
                ("samples", Json::Int(ordering.samples as i64)),
            ]),
        ),
        (
            "theta_bounds",
            Json::object(vec![
                ("c1", Json::Float(bounds.c1)),
                ("c2", Json::Float(bounds.c2)),
                ("c3", Json::Float(bounds.c3)),
                ("c4", Json::Float(bounds.c4)),
                ("observed_min_theta", Json::Float(bounds.observed_min_theta)),
                ("observed_c2", Json::Float(bounds.observed_c2)),
                ("observed_c3", Json::Float(bounds.observed_c3)),
                ("observed_c4", Json::Float(bounds.observed_c4)),
            ]),
        ),
        (
            "comparison",
            Json::object(vec![
                ("s", Json::Float(s_anchor)),
                ("linear_constant", Json::Float(comparison.linear)),
                ("cubic_constant", Json::Float(comparison.cubic)),
            ]),
        ),
        (
            "s_anchors",
            Json::object(vec![
                ("edge_decay_floor", Json::Float(params.empirical_s0())),
                (
                    "interior_separation",
                    Json::Float(params.interior_separation_s()),
                ),
                (
                    "empirical_s0",
                    match spec.empirical_s0() {
                        Some(s) => Json::Float(s),
                        None => Json::Null,
                    },
                ),
            ]),
        ),
    ]);
    let path = opts.dir.join("weights.json");
    write_file(&path, &doc.render())?;
    let meta = write_sidecar(opts, "check-weights", config, "weights")?;
    Ok(vec![path, meta])
}
