//! Flat key=value run configuration.
//!
//! Lines hold `key = value` pairs, `#` starts a comment, blank lines are
//! ignored. Unknown keys are rejected. `serialize` emits a canonical form
//! that reparses to an identical configuration.

use degenctrl_core::{
    CarlemanSpec, CoefficientSpec, Interval, Mesh, ObservabilityMethod, SystemConfig, WeightParams,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Configuration errors carry the offending key and the violated rule.
#[derive(Debug, thiserror::Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(message: impl Into<String>) -> Result<T> {
    Err(ConfigError(message.into()))
}

/// Initial data used by the solve, adjoint and hum commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialProfile {
    Zero,
    /// u0 = v0 = sin(pi x).
    Sine,
    /// u0 = sin(pi x), v0 = sin(2 pi x).
    SineMixed,
}

impl InitialProfile {
    fn parse(value: &str) -> Result<Self> {
        match value {
            "zero" => Ok(InitialProfile::Zero),
            "sine" => Ok(InitialProfile::Sine),
            "sine-mixed" => Ok(InitialProfile::SineMixed),
            other => err(format!(
                "initial_profile = {other}: expected zero, sine or sine-mixed"
            )),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            InitialProfile::Zero => "zero",
            InitialProfile::Sine => "sine",
            InitialProfile::SineMixed => "sine-mixed",
        }
    }

    pub fn sample(&self, mesh: &Mesh) -> (Vec<f64>, Vec<f64>) {
        use std::f64::consts::PI;
        let zero = vec![0.0; mesh.nodes.len()];
        match self {
            InitialProfile::Zero => (zero.clone(), zero),
            InitialProfile::Sine => {
                let s = mesh.sample_dirichlet(|x| (PI * x).sin());
                (s.clone(), s)
            }
            InitialProfile::SineMixed => (
                mesh.sample_dirichlet(|x| (PI * x).sin()),
                mesh.sample_dirichlet(|x| (2.0 * PI * x).sin()),
            ),
        }
    }
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub omega_prime: Interval,
    pub omega0: Interval,
    pub sigma_x_star: f64,
    pub k: u32,
    pub d: f64,
    pub rho: f64,
    /// None = midpoint of the admissible interval.
    pub lambda: Option<f64>,
    /// None = max(alpha1, alpha2).
    pub beta: Option<f64>,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub s_count: usize,
    pub epsilons: Vec<f64>,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub basis_size: usize,
    pub obs_method: ObservabilityMethod,
    pub initial_profile: InitialProfile,
    /// Pipeline run per sweep cell.
    pub sweep_run: String,
    /// Named override lists, sorted by key; values keep their listed order.
    pub sweep_grid: Vec<(String, Vec<String>)>,
}

const KNOWN_KEYS: &[&str] = &[
    "alpha1",
    "alpha2",
    "T",
    "nx",
    "nt",
    "theta",
    "grading",
    "omega_a",
    "omega_b",
    "omega1_a",
    "omega1_b",
    "omega_prime_a",
    "omega_prime_b",
    "omega0_a",
    "omega0_b",
    "sigma_x_star",
    "b11",
    "b12",
    "b21",
    "b22",
    "b11_support",
    "b12_support",
    "b21_support",
    "b22_support",
    "k",
    "d",
    "rho",
    "lambda",
    "beta",
    "s_min",
    "s_max",
    "s_count",
    "epsilons",
    "cg_tol",
    "cg_max_iter",
    "basis_size",
    "obs_method",
    "initial_profile",
    "sweep_run",
];

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| ConfigError(format!("{key} = {value}: not a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| ConfigError(format!("{key} = {value}: not a nonnegative integer")))
}

fn parse_interval(
    key_a: &str,
    map: &BTreeMap<String, String>,
    default: (f64, f64),
) -> Result<Interval> {
    let key_b = key_a.replace("_a", "_b");
    let a = match map.get(key_a) {
        Some(v) => parse_f64(key_a, v)?,
        None => default.0,
    };
    let b = match map.get(&key_b) {
        Some(v) => parse_f64(&key_b, v)?,
        None => default.1,
    };
    if !(a < b) {
        return err(format!(
            "{key_a}/{key_b} = ({a}, {b}): interval needs a < b"
        ));
    }
    Ok(Interval { a, b })
}

fn parse_coefficient(name: &str, map: &BTreeMap<String, String>) -> Result<CoefficientSpec> {
    let value = match map.get(name) {
        Some(v) => parse_f64(name, v)?,
        None => 0.0,
    };
    let support_key = format!("{name}_support");
    let support = match map.get(&support_key) {
        Some(v) => {
            let parts: Vec<&str> = v.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return err(format!("{support_key} = {v}: expected \"a,b\""));
            }
            let a = parse_f64(&support_key, parts[0])?;
            let b = parse_f64(&support_key, parts[1])?;
            if !(0.0 <= a && a < b && b <= 1.0) {
                return err(format!(
                    "{support_key} = ({a}, {b}): support must satisfy 0 <= a < b <= 1"
                ));
            }
            Some(Interval { a, b })
        }
        None => None,
    };
    Ok(CoefficientSpec { value, support })
}

fn parse_float_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in value.split(',') {
        out.push(parse_f64(key, part.trim())?);
    }
    if out.is_empty() {
        return err(format!("{key}: list must not be empty"));
    }
    Ok(out)
}

/// Parse and fully validate a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    let mut sweep_grid: Vec<(String, Vec<String>)> = Vec::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(format!("line {}: expected key = value", line_no + 1));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if let Some(field) = key.strip_prefix("sweep_") {
            if field != "run" {
                let values: Vec<String> = value.split(',').map(|v| v.trim().to_string()).collect();
                if values.is_empty() || values.iter().any(|v| v.is_empty()) {
                    return err(format!("{key}: sweep list must hold values"));
                }
                sweep_grid.push((field.to_string(), values));
                continue;
            }
        }
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return err(format!("unknown key: {key}"));
        }
        if map.insert(key.clone(), value).is_some() {
            return err(format!("duplicate key: {key}"));
        }
    }
    sweep_grid.sort_by(|a, b| a.0.cmp(&b.0));
    build_config(&map, sweep_grid)
}

fn build_config(
    map: &BTreeMap<String, String>,
    sweep_grid: Vec<(String, Vec<String>)>,
) -> Result<RunConfig> {
    for required in ["alpha1", "alpha2", "T", "nx", "nt"] {
        if !map.contains_key(required) {
            return err(format!("missing required key: {required}"));
        }
    }
    let alpha1 = parse_f64("alpha1", &map["alpha1"])?;
    let alpha2 = parse_f64("alpha2", &map["alpha2"])?;
    for (key, alpha) in [("alpha1", alpha1), ("alpha2", alpha2)] {
        if !(alpha > 0.0 && alpha < 1.0) {
            return err(format!(
                "{key} = {alpha}: weak degeneracy requires 0 < alpha < 1"
            ));
        }
    }
    let t_final = parse_f64("T", &map["T"])?;
    if !(t_final > 0.0) {
        return err(format!("T = {t_final}: horizon must be positive"));
    }
    let nx = parse_usize("nx", &map["nx"])?;
    if nx < 4 {
        return err(format!("nx = {nx}: need at least 4 panels"));
    }
    let nt = parse_usize("nt", &map["nt"])?;
    if nt < 2 {
        return err(format!("nt = {nt}: need at least 2 time steps"));
    }
    let theta = match map.get("theta") {
        Some(v) => parse_f64("theta", v)?,
        None => 1.0,
    };
    if !(0.5..=1.0).contains(&theta) {
        return err(format!(
            "theta = {theta}: scheme parameter must lie in [1/2, 1]"
        ));
    }
    let grading = match map.get("grading") {
        Some(v) => parse_f64("grading", v)?,
        None => 2.0,
    };
    if !(grading >= 1.0) {
        return err(format!("grading = {grading}: exponent must be >= 1"));
    }

    let omega = parse_interval("omega_a", map, (0.3, 0.8))?;
    if !(0.0 < omega.a && omega.b < 1.0) {
        return err(format!(
            "omega = ({}, {}): control window must satisfy 0 < a < b < 1",
            omega.a, omega.b
        ));
    }
    let omega1 = parse_interval("omega1_a", map, (0.4, 0.7))?;
    if !omega1.strictly_inside(&omega) {
        return err(format!(
            "omega1 = ({}, {}) must lie strictly inside omega = ({}, {})",
            omega1.a, omega1.b, omega.a, omega.b
        ));
    }
    let omega_prime = parse_interval("omega_prime_a", map, (0.35, 0.75))?;
    if !omega_prime.strictly_inside(&omega) {
        return err(format!(
            "omega_prime = ({}, {}) must lie strictly inside omega = ({}, {})",
            omega_prime.a, omega_prime.b, omega.a, omega.b
        ));
    }

    let sigma_x_star = match map.get("sigma_x_star") {
        Some(v) => parse_f64("sigma_x_star", v)?,
        None => omega_prime.midpoint(),
    };
    let quarter = 0.25 * omega_prime.width();
    let omega0 = parse_interval(
        "omega0_a",
        map,
        (sigma_x_star - quarter, sigma_x_star + quarter),
    )?;
    if !(omega0.a > omega_prime.a && omega0.b < 1.0) {
        return err(format!(
            "omega0 = ({}, {}) must lie strictly inside (a', 1) = ({}, 1)",
            omega0.a, omega0.b, omega_prime.a
        ));
    }
    if !omega0.contains(sigma_x_star) {
        return err(format!(
            "sigma_x_star = {sigma_x_star} must lie inside omega0 = ({}, {})",
            omega0.a, omega0.b
        ));
    }

    let system = SystemConfig {
        alpha1,
        alpha2,
        t_final,
        omega,
        omega1,
        b11: parse_coefficient("b11", map)?,
        b12: parse_coefficient("b12", map)?,
        b21: parse_coefficient("b21", map)?,
        b22: parse_coefficient("b22", map)?,
        nx,
        nt,
        theta_scheme: theta,
        grading_exponent: grading,
    };
    system
        .validate()
        .map_err(|e| ConfigError(format!("system configuration rejected: {e}")))?;

    let k = match map.get("k") {
        Some(v) => {
            let k = parse_usize("k", v)?;
            u32::try_from(k).map_err(|_| ConfigError(format!("k = {k}: too large")))?
        }
        None => 4,
    };
    if k < 4 {
        return err(format!("k = {k}: the weight family requires k >= 4"));
    }
    let d = match map.get("d") {
        Some(v) => parse_f64("d", v)?,
        None => 5.0,
    };
    if d < 5.0 {
        return err(format!("d = {d}: the weight family requires d >= 5"));
    }
    let rho = match map.get("rho") {
        Some(v) => parse_f64("rho", v)?,
        None => 3.0,
    };
    let rho_floor = 4.0 * std::f64::consts::LN_2;
    if rho <= rho_floor {
        return err(format!(
            "rho = {rho}: requires rho > 4 ln 2 / |sigma| = {rho_floor:.6} for the unit-peak sigma"
        ));
    }
    let lambda = match map.get("lambda") {
        Some(v) => Some(parse_f64("lambda", v)?),
        None => None,
    };
    let beta = match map.get("beta") {
        Some(v) => Some(parse_f64("beta", v)?),
        None => None,
    };
    let alpha_max = alpha1.max(alpha2);
    if let Some(beta) = beta {
        if !(beta >= alpha_max && beta < 1.0) {
            return err(format!(
                "beta = {beta}: must lie in [max(alpha1, alpha2), 1) = [{alpha_max}, 1)"
            ));
        }
    }

    let s_min = map
        .get("s_min")
        .map(|v| parse_f64("s_min", v))
        .transpose()?;
    let s_max = map
        .get("s_max")
        .map(|v| parse_f64("s_max", v))
        .transpose()?;
    match (s_min, s_max) {
        (Some(lo), Some(hi)) if lo > hi => {
            return err(format!("s_min = {lo} exceeds s_max = {hi}"));
        }
        (Some(lo), Some(_)) if lo <= 0.0 => return err(format!("s_min = {lo}: must be positive")),
        (Some(_), None) | (None, Some(_)) => {
            return err("s_min and s_max must be given together".to_string())
        }
        _ => {}
    }
    let s_count = match map.get("s_count") {
        Some(v) => parse_usize("s_count", v)?,
        None => 8,
    };
    if s_count == 0 {
        return err("s_count = 0: need at least one s value".to_string());
    }
    let epsilons = match map.get("epsilons") {
        Some(v) => parse_float_list("epsilons", v)?,
        None => vec![1e-4],
    };
    if epsilons.iter().any(|&e| e <= 0.0) {
        return err("epsilons: every penalty must be positive".to_string());
    }
    let cg_tol = match map.get("cg_tol") {
        Some(v) => parse_f64("cg_tol", v)?,
        None => 1e-8,
    };
    if !(cg_tol > 0.0) {
        return err(format!("cg_tol = {cg_tol}: must be positive"));
    }
    let cg_max_iter = match map.get("cg_max_iter") {
        Some(v) => parse_usize("cg_max_iter", v)?,
        None => 500,
    };
    let basis_size = match map.get("basis_size") {
        Some(v) => parse_usize("basis_size", v)?,
        None => 24,
    };
    if basis_size < 2 {
        return err(format!("basis_size = {basis_size}: need at least 2"));
    }
    let obs_method = match map.get("obs_method").map(String::as_str) {
        None | Some("reduced") => ObservabilityMethod::ReducedBasis,
        Some("dense") => ObservabilityMethod::DenseOracle,
        Some(other) => {
            return err(format!("obs_method = {other}: expected reduced or dense"));
        }
    };
    let initial_profile = match map.get("initial_profile") {
        Some(v) => InitialProfile::parse(v)?,
        None => InitialProfile::SineMixed,
    };
    let sweep_run = map
        .get("sweep_run")
        .cloned()
        .unwrap_or_else(|| "hum".to_string());

    let config = RunConfig {
        system,
        omega_prime,
        omega0,
        sigma_x_star,
        k,
        d,
        rho,
        lambda,
        beta,
        s_min,
        s_max,
        s_count,
        epsilons,
        cg_tol,
        cg_max_iter,
        basis_size,
        obs_method,
        initial_profile,
        sweep_run,
        sweep_grid,
    };
    // Building the weight parameters exercises the remaining constraints
    // (lambda interval, sigma geometry).
    config
        .weight_params()
        .map_err(|e| ConfigError(format!("weight parameters rejected: {e}")))?;
    Ok(config)
}

impl RunConfig {
    pub fn beta_resolved(&self) -> f64 {
        self.beta
            .unwrap_or(self.system.alpha1.max(self.system.alpha2))
    }

    /// Build the sigma bump and weight family for this run.
    pub fn weight_params(&self) -> degenctrl_core::Result<WeightParams> {
        let sigma =
            degenctrl_core::build_sigma(self.omega_prime.a, self.sigma_x_star, self.omega0)?;
        WeightParams::new(
            self.system.t_final,
            self.k,
            self.d,
            self.rho,
            self.lambda,
            self.beta_resolved(),
            sigma,
        )
    }

    /// s-grid and windows for the estimate checks. Explicit s_min/s_max win
    /// over the automatic anchor.
    pub fn carleman_spec(&self) -> degenctrl_core::Result<CarlemanSpec> {
        let params = self.weight_params()?;
        match (self.s_min, self.s_max) {
            (Some(lo), Some(hi)) => {
                let grid = if self.s_count == 1 || lo == hi {
                    vec![lo]
                } else {
                    degenctrl_core::geometric_grid(lo, hi, self.s_count)
                };
                CarlemanSpec::with_grid(
                    params,
                    self.system.alpha1,
                    self.system.alpha2,
                    self.omega_prime,
                    grid,
                )
            }
            _ => CarlemanSpec::new(
                params,
                self.system.alpha1,
                self.system.alpha2,
                self.omega_prime,
                self.s_count.max(2),
                1.0,
            ),
        }
    }

    /// Canonical key=value form; reparsing yields an identical RunConfig.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let sys = &self.system;
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("alpha1", fmt(sys.alpha1));
        kv("alpha2", fmt(sys.alpha2));
        kv("T", fmt(sys.t_final));
        kv("nx", sys.nx.to_string());
        kv("nt", sys.nt.to_string());
        kv("theta", fmt(sys.theta_scheme));
        kv("grading", fmt(sys.grading_exponent));
        kv("omega_a", fmt(sys.omega.a));
        kv("omega_b", fmt(sys.omega.b));
        kv("omega1_a", fmt(sys.omega1.a));
        kv("omega1_b", fmt(sys.omega1.b));
        kv("omega_prime_a", fmt(self.omega_prime.a));
        kv("omega_prime_b", fmt(self.omega_prime.b));
        kv("omega0_a", fmt(self.omega0.a));
        kv("omega0_b", fmt(self.omega0.b));
        kv("sigma_x_star", fmt(self.sigma_x_star));
        for (name, c) in [
            ("b11", &sys.b11),
            ("b12", &sys.b12),
            ("b21", &sys.b21),
            ("b22", &sys.b22),
        ] {
            kv(name, fmt(c.value));
            if let Some(s) = &c.support {
                kv(
                    &format!("{name}_support"),
                    format!("{},{}", fmt(s.a), fmt(s.b)),
                );
            }
        }
        kv("k", self.k.to_string());
        kv("d", fmt(self.d));
        kv("rho", fmt(self.rho));
        if let Some(lambda) = self.lambda {
            kv("lambda", fmt(lambda));
        }
        if let Some(beta) = self.beta {
            kv("beta", fmt(beta));
        }
        if let Some(s) = self.s_min {
            kv("s_min", fmt(s));
        }
        if let Some(s) = self.s_max {
            kv("s_max", fmt(s));
        }
        kv("s_count", self.s_count.to_string());
        kv(
            "epsilons",
            self.epsilons
                .iter()
                .map(|&e| fmt(e))
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("cg_tol", fmt(self.cg_tol));
        kv("cg_max_iter", self.cg_max_iter.to_string());
        kv("basis_size", self.basis_size.to_string());
        kv(
            "obs_method",
            match self.obs_method {
                ObservabilityMethod::ReducedBasis => "reduced".to_string(),
                ObservabilityMethod::DenseOracle => "dense".to_string(),
            },
        );
        kv("initial_profile", self.initial_profile.label().to_string());
        kv("sweep_run", self.sweep_run.clone());
        for (key, values) in &self.sweep_grid {
            kv(&format!("sweep_{key}"), values.join(","));
        }
        out
    }

    /// Reparse with one key overridden; used by the sweep runner. The keys
    /// `s` (pins the grid to one value) and `epsilon` (single penalty) are
    /// sweep-only shorthands.
    pub fn with_override(&self, key: &str, value: &str) -> Result<RunConfig> {
        let replaced: Vec<&str> = match key {
            "s" => vec!["s_min", "s_max", "s_count"],
            "epsilon" => vec!["epsilons"],
            other => vec![other],
        };
        let mut text = String::new();
        for line in self.serialize().lines() {
            let existing_key = line.split('=').next().unwrap().trim();
            if replaced.contains(&existing_key) || existing_key.starts_with("sweep_") {
                continue;
            }
            text.push_str(line);
            text.push('\n');
        }
        match key {
            "s" => {
                let _ = writeln!(text, "s_min = {value}");
                let _ = writeln!(text, "s_max = {value}");
                text.push_str("s_count = 1\n");
            }
            "epsilon" => {
                let _ = writeln!(text, "epsilons = {value}");
            }
            other => {
                let _ = writeln!(text, "{other} = {value}");
            }
        }
        parse_config(&text)
    }
}

fn fmt(x: f64) -> String {
    // Shortest representation that round-trips; the config format is for
    // humans, data files use the 17-digit form.
    let s = format!("{x}");
    if s.parse::<f64>() == Ok(x) {
        s
    } else {
        format!("{x:.17e}")
    }
}
