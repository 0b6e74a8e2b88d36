//! Parameter sweep: Cartesian product of named override lists, executed on
//! a bounded worker pool with a deterministic output row order.

use crate::commands::{CommandError, Format, OutputOptions};
use crate::config::RunConfig;
use crate::json::{format_float, Json};
use degenctrl_core as core;
use rayon::prelude::*;
use std::path::PathBuf;

/// Metric columns per cell run type.
fn metric_columns(run: &str) -> Result<&'static [&'static str], CommandError> {
    Ok(match run {
        "hum" => &[
            "epsilon_used",
            "final_norm",
            "uncontrolled_final_norm",
            "cg_iterations",
            "cost",
        ],
        "solve" => &["final_norm", "bound_ratio"],
        "check-carleman" | "check-caccioppoli" => &["max_ratio", "log_slope", "all_finite"],
        "check-hardy" => &["n_pass", "n_total"],
        "observability" => &["c_obs", "observable"],
        other => {
            return Err(CommandError::Config(crate::config::ConfigError(format!(
                "sweep_run = {other}: expected hum, solve, check-carleman, \
                 check-caccioppoli, check-hardy or observability"
            ))))
        }
    })
}

fn fmt_cell(x: f64) -> String {
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

/// Run one cell and return its metric cells.
fn run_cell(run: &str, config: &RunConfig) -> Result<Vec<String>, CommandError> {
    let mesh = config.system.mesh()?;
    let (u0, v0) = config.initial_profile.sample(&mesh);
    match run {
        "hum" => {
            let result = core::hum_solve(
                &config.system,
                &u0,
                &v0,
                config.epsilons[0],
                config.cg_tol,
                config.cg_max_iter,
            )?;
            Ok(vec![
                fmt_cell(result.epsilon),
                fmt_cell(result.final_norm),
                fmt_cell(result.uncontrolled_final_norm),
                result.cg_iterations.to_string(),
                fmt_cell(result.cost),
            ])
        }
        "solve" => {
            let field = core::solve_forward(&config.system, &u0, &v0, None)?;
            let report = core::energy_report(&field, &config.system, None);
            Ok(vec![
                fmt_cell(field.final_norm()),
                fmt_cell(report.bound_ratio),
            ])
        }
        "check-carleman" => {
            let spec = config.carleman_spec()?;
            let field = core::solve_adjoint_forward(&config.system, &u0, &v0)?;
            let mut variants = vec![
                core::CoupledVariant::TwoObservation,
                core::CoupledVariant::TwoObservationDensity,
            ];
            if config.system.coupling_lower_bound() > 0.0 {
                variants.push(core::CoupledVariant::OneForce);
                variants.push(core::CoupledVariant::OneForceDensity);
            }
            let mut max_ratio = 0.0f64;
            let mut max_slope = f64::NEG_INFINITY;
            let mut all_finite = true;
            for variant in variants {
                let report = core::sweep_ratio(&spec.s_grid, |s| {
                    core::carleman_coupled(&field, &config.system, &spec, s, variant)
                })?;
                max_ratio = max_ratio.max(report.max_ratio);
                if spec.s_grid.len() >= 2 {
                    max_slope = max_slope.max(report.log_log_slope());
                }
                all_finite &= report.all_finite;
            }
            if !max_slope.is_finite() {
                max_slope = 0.0;
            }
            Ok(vec![
                fmt_cell(max_ratio),
                fmt_cell(max_slope),
                all_finite.to_string(),
            ])
        }
        "check-caccioppoli" => {
            let spec = config.carleman_spec()?;
            let field = core::solve_adjoint_forward(&config.system, &u0, &v0)?;
            let report = core::sweep_ratio(&spec.s_grid, |s| {
                core::caccioppoli_check(
                    &field,
                    &spec.params,
                    &config.system.omega,
                    &spec.omega_prime,
                    s,
                )
            })?;
            let slope = if spec.s_grid.len() >= 2 {
                report.log_log_slope()
            } else {
                0.0
            };
            Ok(vec![
                fmt_cell(report.max_ratio),
                fmt_cell(slope),
                report.all_finite.to_string(),
            ])
        }
        "check-hardy" => {
            let mesh =
                core::Mesh::graded(config.system.nx.max(400), config.system.grading_exponent)?;
            let mut n_pass = 0usize;
            let mut n_total = 0usize;
            for &gamma in &crate::commands::HARDY_GAMMAS {
                for &offset in &crate::commands::HARDY_OFFSETS {
                    let m = (1.0 - gamma) / 2.0 + offset;
                    let v = mesh.sample(|x| x.powf(m));
                    let check = core::hardy_ratio(gamma, &v, &mesh, 1e-3)?;
                    n_total += 1;
                    if check.pass {
                        n_pass += 1;
                    }
                }
            }
            Ok(vec![n_pass.to_string(), n_total.to_string()])
        }
        "observability" => {
            let estimate =
                core::observability_estimate(&config.system, config.basis_size, config.obs_method)?;
            Ok(vec![
                fmt_cell(estimate.c_obs),
                estimate.c_obs.is_finite().to_string(),
            ])
        }
        other => Err(CommandError::Config(crate::config::ConfigError(format!(
            "sweep_run = {other} not handled"
        )))),
    }
}

/// Cartesian product of the override lists in sorted key order.
fn cells(grid: &[(String, Vec<String>)]) -> Vec<Vec<(String, String)>> {
    let mut out: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in grid {
        let mut next = Vec::with_capacity(out.len() * values.len());
        for prefix in &out {
            for value in values {
                let mut cell = prefix.clone();
                cell.push((key.clone(), value.clone()));
                next.push(cell);
            }
        }
        out = next;
    }
    if grid.is_empty() {
        out.clear();
    }
    out
}

pub fn run_sweep(config: &RunConfig, opts: &OutputOptions) -> Result<Vec<PathBuf>, CommandError> {
    let run = config.sweep_run.clone();
    let metrics = metric_columns(&run)?;
    let grid = &config.sweep_grid;
    let all_cells = cells(grid);

    let header: Vec<String> = grid
        .iter()
        .map(|(k, _)| k.clone())
        .chain(std::iter::once("status".to_string()))
        .chain(metrics.iter().map(|m| m.to_string()))
        .collect();

    let evaluate = |cell: &Vec<(String, String)>| -> Vec<String> {
        let mut row: Vec<String> = cell.iter().map(|(_, v)| v.clone()).collect();
        let mut overridden = Ok(config.clone());
        for (key, value) in cell {
            overridden = overridden.and_then(|c| c.with_override(key, value));
        }
        match overridden
            .map_err(CommandError::from)
            .and_then(|c| run_cell(&run, &c))
        {
            Ok(cells) => {
                row.push("ok".to_string());
                row.extend(cells);
            }
            Err(e) => {
                row.push(e.category().0.to_string());
                row.extend(metrics.iter().map(|_| String::new()));
            }
        }
        row
    };

    // Bounded pool; collect preserves cell order, so the table is identical
    // for any worker count.
    let rows: Vec<Vec<String>> = if opts.jobs == 1 || all_cells.len() <= 1 {
        all_cells.iter().map(evaluate).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| {
                CommandError::Config(crate::config::ConfigError(format!(
                    "could not build worker pool: {e}"
                )))
            })?;
        pool.install(|| all_cells.par_iter().map(evaluate).collect())
    };

    let path = match opts.format {
        Format::Csv => {
            let mut out = header.join(",");
            out.push('\n');
            for row in &rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
            let path = opts.dir.join("sweep.csv");
            crate::commands::write_file(&path, &out)?;
            path
        }
        Format::Json => {
            let items: Vec<Json> = rows
                .iter()
                .map(|row| {
                    Json::Object(
                        header
                            .iter()
                            .zip(row)
                            .map(|(k, v)| (k.clone(), Json::Str(v.clone())))
                            .collect(),
                    )
                })
                .collect();
            let path = opts.dir.join("sweep.json");
            crate::commands::write_file(&path, &Json::Array(items).render())?;
            path
        }
    };
    let meta = crate::commands::write_sidecar(opts, "sweep", config, "sweep")?;
    Ok(vec![path, meta])
}
