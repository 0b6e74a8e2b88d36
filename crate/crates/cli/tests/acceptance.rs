//! Acceptance suite: every numbered criterion below runs standalone, pins
//! its tolerances in code and prints one PASS/FAIL line (visible with
//! `cargo test -p degenctrl-cli --test acceptance -- --nocapture`).

use degenctrl_core as core;
use degenctrl_core::{
    linalg::symmetric_eigen, CoefficientSpec, CoupledVariant, Interval, ObservabilityMethod,
    Profile, SingleVariant, SystemConfig,
};
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

fn random_dirichlet(mesh: &core::Mesh, rng: &mut impl Rng) -> Vec<f64> {
    let n = mesh.nodes.len();
    let mut d = vec![0.0; n];
    for x in d[1..n - 1].iter_mut() {
        *x = rng.random_range(-1.0..1.0);
    }
    d
}

/// 1. Assembled diffusion matrices are weighted-symmetric to 1e-12 relative
///    and negative definite per the dense eigensolver, in under 5 seconds.
#[test]
fn criterion_01_operator_structure() {
    let start = Instant::now();
    let mut worst_asym = 0.0f64;
    let mut worst_eig = f64::NEG_INFINITY;
    for &alpha in &[0.1, 0.5, 0.9] {
        for &nx in &[50usize, 100] {
            let mesh = core::Mesh::graded(nx, 2.0).unwrap();
            let op = core::assemble_diffusion(&mesh, alpha).unwrap();
            worst_asym = worst_asym.max(op.weighted_asymmetry());
            let (eigs, _) = symmetric_eigen(&op.symmetrized_dense());
            worst_eig = worst_eig.max(*eigs.last().unwrap());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_asym < 1e-12 && worst_eig < 0.0 && elapsed < 5.0;
    report(
        "01 operator structure",
        pass,
        &format!("asymmetry {worst_asym:.2e}, max eigenvalue {worst_eig:.2e}, {elapsed:.2}s"),
    );
    assert!(pass);
}

/// 2. With b = 0, h = 0 the discrete norm is non-increasing at every step
///    for 20 random initial data, up to 1e-13 rounding slack.
#[test]
fn criterion_02_contraction() {
    let mut config = SystemConfig::cascade(40, 60);
    config.b21 = CoefficientSpec::zero();
    let mesh = config.mesh().unwrap();
    let mut r = rng(101);
    let mut worst_growth = 0.0f64;
    for _ in 0..20 {
        let u0 = random_dirichlet(&mesh, &mut r);
        let v0 = random_dirichlet(&mesh, &mut r);
        let field = core::solve_forward(&config, &u0, &v0, None).unwrap();
        for n in 1..field.n_levels() {
            let growth = field.level_norm(n) / field.level_norm(n - 1).max(1e-300) - 1.0;
            worst_growth = worst_growth.max(growth);
        }
    }
    let pass = worst_growth <= 1e-13;
    report(
        "02 contraction",
        pass,
        &format!("worst per-step growth {worst_growth:.2e}"),
    );
    assert!(pass);
}

/// Builds a fixture config at a given resolution; the flag asks for a
/// source term.
type FixtureBuilder = Box<dyn Fn(usize, usize) -> (SystemConfig, bool)>;

/// 3. The energy bound ratio is finite and stable within a factor 2 under
///    simultaneous (nx, nt) doubling on three fixture configurations.
#[test]
fn criterion_03_energy_estimate() {
    let fixtures: Vec<(&str, FixtureBuilder)> = vec![
        (
            "pure diffusion",
            Box::new(|nx, nt| {
                let mut c = SystemConfig::cascade(nx, nt);
                c.b21 = CoefficientSpec::zero();
                (c, false)
            }),
        ),
        (
            "cascade",
            Box::new(|nx, nt| (SystemConfig::cascade(nx, nt), false)),
        ),
        (
            "reaction with source",
            Box::new(|nx, nt| {
                let mut c = SystemConfig::cascade(nx, nt);
                c.b11 = CoefficientSpec::on(1.0, Interval { a: 0.2, b: 0.9 }).unwrap();
                c.b12 = CoefficientSpec::constant(0.3);
                (c, true)
            }),
        ),
    ];
    let ratio_for = |config: &SystemConfig, with_source: bool| -> f64 {
        let mesh = config.mesh().unwrap();
        let u0 = mesh.sample_dirichlet(|x| (PI * x).sin());
        let v0 = mesh.sample_dirichlet(|x| (2.0 * PI * x).sin());
        let h = with_source.then(|| {
            core::time_grid(config.t_final, config.nt)
                .iter()
                .map(|&t| {
                    mesh.sample_dirichlet(|x| {
                        if config.omega.contains(x) {
                            (1.0 + t) * (PI * (x - config.omega.a) / config.omega.width()).sin()
                        } else {
                            0.0
                        }
                    })
                })
                .collect::<Vec<_>>()
        });
        let field = core::solve_forward(config, &u0, &v0, h.as_ref()).unwrap();
        core::energy_report(&field, config, h.as_ref()).bound_ratio
    };
    let mut pass = true;
    let mut details = Vec::new();
    for (label, make) in &fixtures {
        let (coarse_config, with_source) = make(30, 40);
        let (fine_config, _) = make(60, 80);
        let coarse = ratio_for(&coarse_config, with_source);
        let fine = ratio_for(&fine_config, with_source);
        let ok = coarse.is_finite()
            && fine.is_finite()
            && coarse > 0.0
            && fine <= 2.0 * coarse
            && coarse <= 2.0 * fine;
        pass &= ok;
        details.push(format!("{label}: {coarse:.3} -> {fine:.3}"));
    }
    report("03 energy estimate", pass, &details.join("; "));
    assert!(pass);
}

/// 4. Hardy-Poincare: numeric ratio matches the analytic inverse-square law
///    within 1e-3 relative, never exceeds C_gamma (1 + 1e-3), and the
///    sharpness trend toward C_gamma is visible over four exponents.
#[test]
fn criterion_04_hardy_poincare() {
    let start = Instant::now();
    let mesh = core::Mesh::graded(400, 2.0).unwrap();
    let mut pass = true;
    let mut worst_rel = 0.0f64;
    for &gamma in &[-1.0, -0.5, 0.0, 0.5] {
        let c_gamma = 4.0 / ((1.0 - gamma) * (1.0 - gamma));
        let mut previous = 0.0;
        for &offset in &[0.5, 0.25, 0.125, 0.0625] {
            let m = (1.0 - gamma) / 2.0 + offset;
            let v = mesh.sample(|x| x.powf(m));
            let check = core::hardy_ratio(gamma, &v, &mesh, 1e-3).unwrap();
            let want = 1.0 / (m * m);
            let rel = (check.ratio - want).abs() / want;
            worst_rel = worst_rel.max(rel);
            pass &= rel <= 1e-3;
            pass &= check.lhs <= c_gamma * check.rhs_integral * (1.0 + 1e-3);
            pass &= check.ratio > previous; // sharpening toward C_gamma
            previous = check.ratio;
        }
        pass &= previous < c_gamma;
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 5.0;
    report(
        "04 hardy-poincare",
        pass,
        &format!("worst relative error {worst_rel:.2e}, {elapsed:.2}s"),
    );
    assert!(pass);
}

/// 5. Weight admissibility: interval endpoints match the exponential oracle
///    to 1e-10, the ordering holds for 20 random admissible lambda, and the
///    observed Theta-bound constants stay below the declared ones.
#[test]
fn criterion_05_weight_admissibility() {
    let (lo, hi) = core::admissible_lambda_interval(5.0, 3.0, 1.0);
    let e6 = (6.0f64).exp();
    let e3 = (3.0f64).exp();
    let mut pass = (lo - e6 / 4.0).abs() <= 1e-10 * lo;
    pass &= (hi - 4.0 / 15.0 * (e6 - e3)).abs() <= 1e-10 * hi;
    pass &= lo < hi;

    let sigma = core::build_sigma(0.35, 0.55, Interval { a: 0.45, b: 0.65 }).unwrap();
    let xs: Vec<f64> = (0..=80).map(|i| i as f64 / 80.0).collect();
    let times: Vec<f64> = (1..60).map(|i| 2.0 * i as f64 / 60.0).collect();
    let mut r = rng(555);
    for _ in 0..20 {
        let lambda = r.random_range(lo..hi);
        let params =
            core::WeightParams::new(2.0, 4, 5.0, 3.0, Some(lambda), 0.5, sigma.clone()).unwrap();
        let ordering = core::check_phi_ordering(&params, &xs, &times);
        pass &= ordering.holds;
    }

    let mut ratio_detail = Vec::new();
    for &(t_final, k) in &[(2.0, 4u32), (1.0, 4), (2.0, 5)] {
        let bounds = core::theta_bound_constants(t_final, k).unwrap();
        let ratios = [
            bounds.c1 / bounds.observed_min_theta,
            bounds.observed_c2 / bounds.c2,
            bounds.observed_c3 / bounds.c3,
            bounds.observed_c4 / bounds.c4,
        ];
        pass &= ratios.iter().all(|&q| q <= 1.0 + 1e-9);
        ratio_detail.push(format!(
            "T={t_final},k={k}: max observed/declared {:.3}",
            ratios.iter().fold(0.0f64, |a, &b| a.max(b))
        ));
    }
    report(
        "05 weight admissibility",
        pass,
        &format!("interval ({lo:.6}, {hi:.6}); {}", ratio_detail.join("; ")),
    );
    assert!(pass);
}

/// 6. Discrete duality: Gramian asymmetry below 1e-10 ||a|| ||b|| for 10
///    random pairs at nx = 40, nt = 80, in under 30 seconds.
#[test]
fn criterion_06_discrete_duality() {
    let start = Instant::now();
    let config = SystemConfig::cascade(40, 80);
    let mesh = config.mesh().unwrap();
    let mut r = rng(2025);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let a = (
            random_dirichlet(&mesh, &mut r),
            random_dirichlet(&mesh, &mut r),
        );
        let b = (
            random_dirichlet(&mesh, &mut r),
            random_dirichlet(&mesh, &mut r),
        );
        let la = core::gramian_apply(&config, &a.0, &a.1).unwrap();
        let lb = core::gramian_apply(&config, &b.0, &b.1).unwrap();
        let lab = mesh.dot(&la.0, &b.0) + mesh.dot(&la.1, &b.1);
        let alb = mesh.dot(&a.0, &lb.0) + mesh.dot(&a.1, &lb.1);
        let scale = (mesh.dot(&a.0, &a.0) + mesh.dot(&a.1, &a.1)).sqrt()
            * (mesh.dot(&b.0, &b.0) + mesh.dot(&b.1, &b.1)).sqrt();
        worst = worst.max((lab - alb).abs() / scale);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-10 && elapsed < 30.0;
    report(
        "06 discrete duality",
        pass,
        &format!("worst relative asymmetry {worst:.2e}, {elapsed:.2}s"),
    );
    assert!(pass);
}

/// 7. Every estimate ratio is finite over a decade of s above the working
///    anchor, grows no faster than log-log slope 0.1, and is invariant to
///    1e-12 under scaling the fields.
#[test]
fn criterion_07_carleman_boundedness() {
    let start = Instant::now();
    let config = SystemConfig::cascade(60, 120);
    let mesh = config.mesh().unwrap();
    let sigma =
        core::build_sigma(config.omega.a + 0.05, 0.55, Interval { a: 0.45, b: 0.65 }).unwrap();
    let params = core::WeightParams::new(
        config.t_final,
        4,
        5.0,
        3.0,
        None,
        config.alpha1.max(config.alpha2),
        sigma,
    )
    .unwrap();
    let spec = core::CarlemanSpec::new(
        params,
        config.alpha1,
        config.alpha2,
        Interval { a: 0.35, b: 0.75 },
        8,
        1.0,
    )
    .unwrap();
    let mut pass = true;
    let mut details = Vec::new();

    // Single-equation suite: manufactured profiles, both variants.
    for profile in [Profile::PolyBump, Profile::SineSquare] {
        let (y, f) =
            core::manufacture_solution(profile, config.alpha1, config.t_final, &mesh, config.nt);
        for (label, variant) in [
            ("full-boundary", SingleVariant::FullBoundary),
            ("localized", SingleVariant::Localized(spec.omega_prime)),
        ] {
            let report_ = core::sweep_ratio(&spec.s_grid, |s| {
                core::carleman_single(&y, &f, &spec.params, config.alpha1, s, variant)
            })
            .unwrap();
            let slope = report_.log_log_slope();
            pass &= report_.all_finite && slope <= 0.1;
            details.push(format!("{}/{label}: slope {slope:.3}", profile.label()));

            let scaled = y.scaled(17.0);
            let scaled_f = f.scaled(17.0);
            let s_mid = spec.s_grid[spec.s_grid.len() / 2];
            let base =
                core::carleman_single(&y, &f, &spec.params, config.alpha1, s_mid, variant).unwrap();
            let scl = core::carleman_single(
                &scaled,
                &scaled_f,
                &spec.params,
                config.alpha1,
                s_mid,
                variant,
            )
            .unwrap();
            pass &= (base.ratio - scl.ratio).abs() <= 1e-12 * base.ratio.abs();
        }
    }

    // Coupled suite on the cascade adjoint trajectory.
    let u0 = mesh.sample_dirichlet(|x| (PI * x).sin());
    let v0 = mesh.sample_dirichlet(|x| (2.0 * PI * x).sin());
    let field = core::solve_adjoint_forward(&config, &u0, &v0).unwrap();
    for variant in [
        CoupledVariant::TwoObservation,
        CoupledVariant::TwoObservationDensity,
        CoupledVariant::OneForce,
        CoupledVariant::OneForceDensity,
    ] {
        let report_ = core::sweep_ratio(&spec.s_grid, |s| {
            core::carleman_coupled(&field, &config, &spec, s, variant)
        })
        .unwrap();
        let slope = report_.log_log_slope();
        pass &= report_.all_finite && slope <= 0.1;
        details.push(format!("{}: slope {slope:.3}", variant.label()));

        let mut scaled_field = field.clone();
        for level in scaled_field.u.iter_mut().chain(scaled_field.v.iter_mut()) {
            for value in level.iter_mut() {
                *value *= 0.037;
            }
        }
        let s_mid = spec.s_grid[spec.s_grid.len() / 2];
        let base = core::carleman_coupled(&field, &config, &spec, s_mid, variant).unwrap();
        let scl = core::carleman_coupled(&scaled_field, &config, &spec, s_mid, variant).unwrap();
        pass &= (base.ratio - scl.ratio).abs() <= 1e-12 * base.ratio.abs();
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 120.0;
    report(
        "07 carleman boundedness",
        pass,
        &format!("{}; {elapsed:.1}s", details.join("; ")),
    );
    assert!(pass);
}

/// 8a. HUM machinery on the cascade configuration: CG stays within 500
///     iterations, the final norm is non-increasing across the epsilon
///     sweep, and at nx = 30 the CG optimum matches a dense solve of the
///     penalized system to 1e-6 relative.
#[test]
fn criterion_08a_hum_machinery() {
    let start = Instant::now();
    let config = SystemConfig::cascade(60, 120);
    let mesh = config.mesh().unwrap();
    let u0 = mesh.sample_dirichlet(|x| (PI * x).sin());
    let v0 = mesh.sample_dirichlet(|x| (2.0 * PI * x).sin());
    let mut pass = true;
    let mut finals = Vec::new();
    for &eps in &[1e-2, 1e-3, 1e-4] {
        let result = core::hum_solve(&config, &u0, &v0, eps, 1e-8, 500).unwrap();
        pass &= result.cg_iterations <= 500;
        finals.push(result.final_norm);
    }
    pass &= finals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));

    // Dense cross-check at nx = 30.
    let small = SystemConfig::cascade(30, 60);
    let small_mesh = small.mesh().unwrap();
    let su0 = small_mesh.sample_dirichlet(|x| (PI * x).sin());
    let sv0 = small_mesh.sample_dirichlet(|x| (2.0 * PI * x).sin());
    let eps = 1e-4;
    let dense_q = core::hum_solve_dense(&small, &su0, &sv0, eps).unwrap();
    // Recover the CG optimum by solving with a tight tolerance and
    // rebuilding q from the control equation is indirect; instead rerun CG
    // on the same system via hum_solve and compare the resulting controls,
    // which are linear images of q.
    let cg = core::hum_solve(&small, &su0, &sv0, eps, 1e-12, 2000).unwrap();
    let dense_adjoint = core::solve_adjoint_backward(&small, &dense_q.0, &dense_q.1).unwrap();
    let mut num = 0.0;
    let mut den = 0.0;
    for n in 1..cg.control.len() {
        for (i, &x) in small_mesh.nodes.iter().enumerate() {
            if small.omega.contains(x) {
                let dense_h = dense_adjoint.u[n - 1][i];
                let d = cg.control[n][i] - dense_h;
                num += small_mesh.cell_weights[i] * d * d;
                den += small_mesh.cell_weights[i] * dense_h * dense_h;
            }
        }
    }
    let rel = (num / den.max(1e-300)).sqrt();
    pass &= rel <= 1e-6;
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 180.0;
    report(
        "08a hum machinery",
        pass,
        &format!(
            "finals {:?}, dense-vs-cg control {rel:.2e}, {elapsed:.1}s",
            finals
                .iter()
                .map(|f| format!("{f:.3e}"))
                .collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

/// 8b. Null-control quality target: final norm at most 5% of the
///     uncontrolled norm at epsilon = 1e-4 on the cascade configuration.
///
/// This threshold is not reachable at epsilon = 1e-4 with the Gramian
/// normalization fixed by its definition (backward adjoint, masked control,
/// forward solve): the spectrum of Lambda tops out near 6.5e-2 and a
/// significant share of the free final state lies on eigendirections below
/// 1e-4, so the penalized optimum keeps roughly a quarter to a third of the
/// uncontrolled norm for smooth data. Reaching 5% needs epsilon near 4e-6
/// (the sweep in `criterion_08a` shows the monotone approach). The
/// criterion is asserted as stated and is expected to fail; the ledger
/// carries the analysis.
#[test]
fn criterion_08b_null_control_reduction() {
    let config = SystemConfig::cascade(60, 120);
    let mesh = config.mesh().unwrap();
    let u0 = mesh.sample_dirichlet(|x| (PI * x).sin());
    let v0 = mesh.sample_dirichlet(|x| (2.0 * PI * x).sin());
    let result = core::hum_solve(&config, &u0, &v0, 1e-4, 1e-8, 500).unwrap();
    let ratio = result.final_norm / result.uncontrolled_final_norm;
    let pass = ratio <= 0.05;
    report(
        "08b null-control reduction",
        pass,
        &format!(
            "final {:.3e} = {:.1}% of uncontrolled {:.3e} at eps 1e-4",
            result.final_norm,
            100.0 * ratio,
            result.uncontrolled_final_norm
        ),
    );
    assert!(pass, "reduction ratio {ratio:.4} above the 0.05 target");
}

/// 9. Observability: the decoupled configuration is flagged structurally
///    unobservable; the cascade c_obs from the reduced basis lies within a
///    factor 2 of the dense oracle at nx = 30.
#[test]
fn criterion_09_observability() {
    let mut decoupled = SystemConfig::cascade(30, 60);
    decoupled.b21 = CoefficientSpec::zero();
    let flag =
        core::observability_estimate(&decoupled, 24, ObservabilityMethod::ReducedBasis).unwrap();
    let mut pass = flag.c_obs.is_infinite();

    let cascade = SystemConfig::cascade(30, 60);
    let reduced =
        core::observability_estimate(&cascade, 24, ObservabilityMethod::ReducedBasis).unwrap();
    let dense =
        core::observability_estimate(&cascade, 24, ObservabilityMethod::DenseOracle).unwrap();
    pass &= reduced.c_obs.is_finite() && dense.c_obs.is_finite();
    pass &= reduced.c_obs <= 2.0 * dense.c_obs && dense.c_obs <= 2.0 * reduced.c_obs;
    report(
        "09 observability",
        pass,
        &format!(
            "decoupled flag {}, reduced {:.4e} vs dense {:.4e}",
            flag.c_obs, reduced.c_obs, dense.c_obs
        ),
    );
    assert!(pass);
}

/// 10. CLI: config round-trip idempotence, outputs independent of the
///     worker count, documented exit codes exercised.
#[test]
fn criterion_10_cli() {
    use std::process::Command;
    let bin = env!("CARGO_BIN_EXE_degenctrl");
    let dir = std::env::temp_dir().join(format!("degenctrl-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("run.conf");
    std::fs::write(
        &config_path,
        "alpha1 = 0.5\nalpha2 = 0.75\nT = 1\nnx = 24\nnt = 30\n\
         b21 = 1\nb21_support = 0.4,0.7\nepsilons = 1e-2\ncg_tol = 1e-7\n\
         sweep_run = hum\nsweep_epsilon = 1e-2,1e-3,1e-4\n",
    )
    .unwrap();
    let mut pass = true;
    let mut details = Vec::new();

    // Round trip.
    let text = std::fs::read_to_string(&config_path).unwrap();
    let parsed = degenctrl_cli::parse_config(&text).unwrap();
    let reparsed = degenctrl_cli::parse_config(&parsed.serialize()).unwrap();
    let ok = parsed == reparsed && parsed.serialize() == reparsed.serialize();
    pass &= ok;
    details.push(format!("round-trip {}", if ok { "ok" } else { "broken" }));

    // Worker-count independence and run-to-run determinism of the sweep.
    let sweep = |jobs: &str, out: &str| -> Vec<u8> {
        let out_dir = dir.join(out);
        let status = Command::new(bin)
            .args(["sweep", "--config"])
            .arg(&config_path)
            .args(["--out"])
            .arg(&out_dir)
            .args(["--jobs", jobs])
            .output()
            .unwrap();
        assert!(status.status.success(), "{status:?}");
        std::fs::read(out_dir.join("sweep.csv")).unwrap()
    };
    let serial = sweep("1", "serial");
    let parallel = sweep("4", "parallel");
    let repeat = sweep("4", "repeat");
    let ok = serial == parallel && parallel == repeat;
    pass &= ok;
    details.push(format!("determinism {}", if ok { "ok" } else { "broken" }));

    // Monotone final_norm across the epsilon sweep rows.
    let table = String::from_utf8(serial.clone()).unwrap();
    let header: Vec<&str> = table.lines().next().unwrap().split(',').collect();
    let final_col = header.iter().position(|&h| h == "final_norm").unwrap();
    let finals: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|line| {
            line.split(',')
                .nth(final_col)
                .unwrap()
                .parse::<f64>()
                .unwrap()
        })
        .collect();
    let ok = finals.len() == 3 && finals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    pass &= ok;
    details.push(format!(
        "epsilon sweep monotone {}",
        if ok { "ok" } else { "broken" }
    ));

    // Exit codes: 2 usage, 3 config, 4 argument, 8 io.
    let code = |args: &[&str]| -> i32 {
        Command::new(bin)
            .args(args)
            .output()
            .unwrap()
            .status
            .code()
            .unwrap_or(-1)
    };
    let usage = code(&["frobnicate"]);
    let bad_config_path = dir.join("bad.conf");
    std::fs::write(
        &bad_config_path,
        "alpha1 = 0.5\nalpha2 = 0.75\nT = 1\nnx = 24\nnt = 30\nd = 4\n",
    )
    .unwrap();
    let bad_config = code(&[
        "check-weights",
        "--config",
        bad_config_path.to_str().unwrap(),
    ]);
    let arg_config_path = dir.join("arg.conf");
    std::fs::write(
        &arg_config_path,
        "alpha1 = 0.5\nalpha2 = 0.75\nT = 1\nnx = 10\nnt = 10\nbasis_size = 4000\n",
    )
    .unwrap();
    let out_arg = dir.join("arg-out");
    let bad_argument = code(&[
        "observability",
        "--config",
        arg_config_path.to_str().unwrap(),
        "--out",
        out_arg.to_str().unwrap(),
    ]);
    let missing_file = code(&[
        "solve",
        "--config",
        dir.join("missing.conf").to_str().unwrap(),
    ]);
    let ok = usage == 2 && bad_config == 3 && bad_argument == 4 && missing_file == 8;
    pass &= ok;
    details.push(format!(
        "exit codes usage={usage} config={bad_config} argument={bad_argument} io={missing_file}"
    ));

    report("10 cli", pass, &details.join("; "));
    std::fs::remove_dir_all(&dir).ok();
    assert!(pass);
}
