//! The weight family driving the weighted estimates: the blow-up factor
//! Theta(t) = (t (T-t))^{-k}, the spatial profiles psi(x) = lambda
//! (x^{2-beta} - d) and Psi(x) = e^{rho sigma(x)} - e^{2 rho |sigma|}, the
//! combined weights varphi = Theta psi, Phi = Theta Psi and the auxiliary
//! phi_tilde = e^{rho sigma} Theta.
//!
//! All weights are negative, so e^{2 s varphi} vanishes at t = 0 and t = T.
//! Exponentials are evaluated in log space and flushed to zero below
//! exp(-690) to keep products with Theta powers free of 0 * inf.

use crate::error::{Error, Result};
use crate::operators::Interval;

/// Flush threshold: exp(-690) is about 1e-300, the edge of f64 normals.
pub const EXP_FLUSH: f64 = -690.0;

/// exp(e), flushed to zero once the result would underflow.
pub fn exp_clamped(e: f64) -> f64 {
    if e < EXP_FLUSH {
        0.0
    } else {
        e.exp()
    }
}

/// Polynomial bump (x - a')^p (1 - x)^q / M on [a', 1], normalized so the
/// maximum is 1, with its single interior critical point at a prescribed
/// location. Extended by zero for x < a', matching sigma(a') = 0.
///
/// The derivative vanishes at the interval endpoints as well (the exponents
/// are at least 2); the nondegeneracy requirement sigma_x != 0 therefore
/// refers to the open interval minus omega0.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaFunction {
    pub a_prime: f64,
    pub p: f64,
    pub q: f64,
    /// Peak value of the unnormalized bump.
    pub normalizer: f64,
    pub critical_point: f64,
    /// Window that is allowed to contain the critical point.
    pub omega0: Interval,
}

impl SigmaFunction {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a_prime || x >= 1.0 {
            0.0
        } else {
            (x - self.a_prime).powf(self.p) * (1.0 - x).powf(self.q) / self.normalizer
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.a_prime || x >= 1.0 {
            0.0
        } else {
            let s = x - self.a_prime;
            let r = 1.0 - x;
            s.powf(self.p - 1.0) * r.powf(self.q - 1.0) * (self.p * r - self.q * s)
                / self.normalizer
        }
    }

    /// Supremum norm; identically 1 by construction.
    pub fn norm_inf(&self) -> f64 {
        1.0
    }
}

/// Place the bump's critical point at `target` inside `omega0`.
///
/// One exponent is pinned to 2 and the other solved from the critical-point
/// equation p (1 - x*) = q (x* - a'); whichever solve keeps both exponents
/// at least 2 wins.
pub fn build_sigma(a_prime: f64, target: f64, omega0: Interval) -> Result<SigmaFunction> {
    if !(0.0..1.0).contains(&a_prime) {
        return Err(Error::InvalidArgument(format!(
            "a' = {a_prime} must lie in [0, 1)"
        )));
    }
    if !(target > a_prime && target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "critical point {target} must lie in ({a_prime}, 1)"
        )));
    }
    if !(omega0.a > a_prime && omega0.b < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "omega0 = ({}, {}) must lie strictly inside ({a_prime}, 1)",
            omega0.a, omega0.b
        )));
    }
    if !omega0.contains(target) {
        return Err(Error::InvalidArgument(format!(
            "critical point {target} must lie inside omega0 = ({}, {})",
            omega0.a, omega0.b
        )));
    }
    let p_for_q2 = 2.0 * (target - a_prime) / (1.0 - target);
    let (p, q) = if p_for_q2 >= 2.0 {
        (p_for_q2, 2.0)
    } else {
        (2.0, 2.0 * (1.0 - target) / (target - a_prime))
    };
    let normalizer = (target - a_prime).powf(p) * (1.0 - target).powf(q);
    Ok(SigmaFunction {
        a_prime,
        p,
        q,
        normalizer,
        critical_point: target,
        omega0,
    })
}

/// Parameters of the weight family.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightParams {
    pub t_final: f64,
    pub k: u32,
    pub d: f64,
    pub rho: f64,
    pub lambda: f64,
    pub beta: f64,
    pub sigma: SigmaFunction,
}

/// Admissible open interval for lambda given d, rho and |sigma|.
pub fn admissible_lambda_interval(d: f64, rho: f64, sigma_norm: f64) -> (f64, f64) {
    let e2 = (2.0 * rho * sigma_norm).exp();
    let e1 = (rho * sigma_norm).exp();
    (e2 / (d - 1.0), 4.0 / (3.0 * d) * (e2 - e1))
}

/// Per-constraint outcome of the parameter validation.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub d_ok: bool,
    pub k_ok: bool,
    pub rho_ok: bool,
    pub beta_ok: bool,
    pub lambda_interval: (f64, f64),
    pub interval_nonempty: bool,
    pub lambda_in_interval: bool,
    /// Midpoint of the admissible interval, the default when no lambda is
    /// supplied.
    pub default_lambda: f64,
    pub admissible: bool,
}

/// Check every parameter constraint; failures are reported, not raised.
pub fn validate_params(params: &WeightParams) -> AdmissibilityReport {
    let sigma_norm = params.sigma.norm_inf();
    let d_ok = params.d >= 5.0;
    let k_ok = params.k >= 4;
    let rho_ok = params.rho > 4.0 * std::f64::consts::LN_2 / sigma_norm;
    let beta_ok = params.beta > 0.0 && params.beta < 1.0;
    let lambda_interval = admissible_lambda_interval(params.d, params.rho, sigma_norm);
    let interval_nonempty = lambda_interval.0 < lambda_interval.1;
    let lambda_in_interval = params.lambda > lambda_interval.0 && params.lambda < lambda_interval.1;
    let default_lambda = 0.5 * (lambda_interval.0 + lambda_interval.1);
    AdmissibilityReport {
        d_ok,
        k_ok,
        rho_ok,
        beta_ok,
        lambda_interval,
        interval_nonempty,
        lambda_in_interval,
        default_lambda,
        admissible: d_ok && k_ok && rho_ok && beta_ok && interval_nonempty && lambda_in_interval,
    }
}

impl WeightParams {
    /// Build and validate; `lambda = None` picks the interval midpoint.
    pub fn new(
        t_final: f64,
        k: u32,
        d: f64,
        rho: f64,
        lambda: Option<f64>,
        beta: f64,
        sigma: SigmaFunction,
    ) -> Result<Self> {
        if !(t_final > 0.0) {
            return Err(Error::OutOfRange(format!("T = {t_final} must be positive")));
        }
        let interval = admissible_lambda_interval(d, rho, sigma.norm_inf());
        let lambda = lambda.unwrap_or(0.5 * (interval.0 + interval.1));
        let params = WeightParams {
            t_final,
            k,
            d,
            rho,
            lambda,
            beta,
            sigma,
        };
        let report = validate_params(&params);
        if !report.admissible {
            return Err(Error::OutOfRange(format!(
                "weight parameters rejected: d>=5 {}, k>=4 {}, rho>4ln2/|sigma| {}, \
                 beta in (0,1) {}, lambda {} in ({:.6}, {:.6}) {}",
                report.d_ok,
                report.k_ok,
                report.rho_ok,
                report.beta_ok,
                params.lambda,
                report.lambda_interval.0,
                report.lambda_interval.1,
                report.lambda_in_interval
            )));
        }
        Ok(params)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t < self.t_final) {
            return Err(Error::Domain(format!(
                "t = {t} outside the open interval (0, {})",
                self.t_final
            )));
        }
        Ok(())
    }

    /// Theta(t) = (t (T - t))^{-k}.
    pub fn theta(&self, t: f64) -> f64 {
        (t * (self.t_final - t)).powi(-(self.k as i32))
    }

    pub fn log_theta(&self, t: f64) -> f64 {
        -(self.k as f64) * (t * (self.t_final - t)).ln()
    }

    pub fn theta_dot(&self, t: f64) -> f64 {
        let g = t * (self.t_final - t);
        -(self.k as f64) * (self.t_final - 2.0 * t) * g.powi(-(self.k as i32) - 1)
    }

    pub fn theta_ddot(&self, t: f64) -> f64 {
        let k = self.k as f64;
        let g = t * (self.t_final - t);
        let gp = self.t_final - 2.0 * t;
        k * (k + 1.0) * gp * gp * g.powi(-(self.k as i32) - 2)
            + 2.0 * k * g.powi(-(self.k as i32) - 1)
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.lambda * (x.powf(2.0 - self.beta) - self.d)
    }

    pub fn big_psi(&self, x: f64) -> f64 {
        ((self.rho * self.sigma.eval(x)).exp()) - (2.0 * self.rho * self.sigma.norm_inf()).exp()
    }

    pub fn varphi(&self, t: f64, x: f64) -> f64 {
        self.theta(t) * self.psi(x)
    }

    pub fn big_phi(&self, t: f64, x: f64) -> f64 {
        self.theta(t) * self.big_psi(x)
    }

    pub fn phi_tilde(&self, t: f64, x: f64) -> f64 {
        (self.rho * self.sigma.eval(x)).exp() * self.theta(t)
    }

    /// e^{2 s varphi(t, x)}, flushed to zero near the time endpoints.
    pub fn exp2s_varphi(&self, s: f64, t: f64, x: f64) -> f64 {
        exp_clamped(2.0 * s * self.varphi(t, x))
    }

    /// e^{2 s Phi(t, x)}, flushed to zero near the time endpoints.
    pub fn exp2s_big_phi(&self, s: f64, t: f64, x: f64) -> f64 {
        exp_clamped(2.0 * s * self.big_phi(t, x))
    }

    /// All six weight values at an interior time.
    pub fn eval_weights(&self, t: f64, x: f64) -> Result<WeightValues> {
        self.check_time(t)?;
        Ok(WeightValues {
            theta: self.theta(t),
            psi: self.psi(x),
            varphi: self.varphi(t, x),
            big_psi: self.big_psi(x),
            big_phi: self.big_phi(t, x),
            phi_tilde: self.phi_tilde(t, x),
        })
    }

    /// Smallest s for which e^{2 s varphi} has decayed below 1e-12 at
    /// t = 0.05 T, where varphi is largest at x = 1. Grid values below this
    /// are outside the regime the estimates speak about, so sweep grids must
    /// start at or above it; the smallest grid value passing this test is
    /// the reported s_0.
    pub fn empirical_s0(&self) -> f64 {
        let phi_edge = self.varphi(0.05 * self.t_final, 1.0);
        (1e-12f64).ln() / (2.0 * phi_edge)
    }

    /// The s at which the spatial spread of the weight becomes active:
    /// 2 s Theta(T/2) lambda, the exponent range over x at the flattest
    /// time, reaches 6. Below this the weight is spatially flat and the
    /// mixed s-powers of an estimate have not started to compete.
    pub fn interior_separation_s(&self) -> f64 {
        3.0 / (self.theta(0.5 * self.t_final) * self.lambda)
    }

    /// Supremum over the whole space-time cylinder of the log-weights
    /// 2 s varphi and 2 s Phi. Both suprema sit at t = T/2; Phi dominates
    /// varphi for admissible parameters. Quadratures subtract this common
    /// factor from every exponent so that both sides of an estimate stay
    /// representable over the full s-grid; ratios are unaffected.
    pub fn log_sup_weight(&self, s: f64) -> f64 {
        let theta_mid = self.theta(0.5 * self.t_final);
        let psi_max = self.psi(1.0);
        let big_psi_max = self.big_psi(self.sigma.critical_point);
        2.0 * s * theta_mid * psi_max.max(big_psi_max)
    }
}

/// The six weight values at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightValues {
    pub theta: f64,
    pub psi: f64,
    pub varphi: f64,
    pub big_psi: f64,
    pub big_phi: f64,
    pub phi_tilde: f64,
}

/// Pointwise check of (4/3) Phi < varphi < Phi on the sampled grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub holds: bool,
    /// min over samples of Phi - varphi (must stay positive).
    pub worst_upper_margin: f64,
    /// min over samples of varphi - (4/3) Phi (must stay positive).
    pub worst_lower_margin: f64,
    pub worst_point: (f64, f64),
    pub samples: usize,
}

/// Verify the ordering (4/3) Phi < varphi < Phi at every (t, x) sample.
/// x ranges over the whole interval [0, 1] with sigma extended by zero
/// below a', which is the regime where an inadmissible lambda first breaks
/// the chain.
pub fn check_phi_ordering(params: &WeightParams, xs: &[f64], times: &[f64]) -> OrderingReport {
    let mut report = OrderingReport {
        holds: true,
        worst_upper_margin: f64::INFINITY,
        worst_lower_margin: f64::INFINITY,
        worst_point: (f64::NAN, f64::NAN),
        samples: 0,
    };
    for &t in times {
        if !(t > 0.0 && t < params.t_final) {
            continue;
        }
        for &x in xs {
            let varphi = params.varphi(t, x);
            let big_phi = params.big_phi(t, x);
            let upper = big_phi - varphi;
            let lower = varphi - 4.0 / 3.0 * big_phi;
            report.samples += 1;
            if upper.min(lower) < report.worst_upper_margin.min(report.worst_lower_margin) {
                report.worst_point = (t, x);
            }
            report.worst_upper_margin = report.worst_upper_margin.min(upper);
            report.worst_lower_margin = report.worst_lower_margin.min(lower);
            if upper <= 0.0 || lower <= 0.0 {
                report.holds = false;
            }
        }
    }
    report
}

/// The four constants bounding Theta and its derivatives, with the
/// empirically observed counterparts on a fine interior grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaBounds {
    /// Lower bound: Theta >= c1 = (2/T)^{2k}, attained at t = T/2.
    pub c1: f64,
    /// |dTheta/dt| <= c2 Theta^2 with c2 = k T (T/2)^{2(k-1)}.
    pub c2: f64,
    /// |d2Theta/dt2| <= c3 Theta^3 with c3 = k(k+1) T^2 (T/2)^{4(k-1)}.
    pub c3: f64,
    /// Declared |d2Theta/dt2| <= c4 Theta^2 with c4 = k(k+1) T^2 (T/2)^{k-4}.
    /// The formula only covers T <= 2; `observed_c4` is the measured
    /// supremum of the ratio and is what downstream code should trust.
    pub c4: f64,
    pub observed_min_theta: f64,
    pub observed_c2: f64,
    pub observed_c3: f64,
    pub observed_c4: f64,
}

/// Compute the Theta bound constants for horizon T and exponent k, and
/// measure the actual suprema over t in [0.01 T, 0.99 T].
pub fn theta_bound_constants(t_final: f64, k: u32) -> Result<ThetaBounds> {
    if k < 2 {
        return Err(Error::UnsupportedParameter(format!(
            "the second-derivative bound needs k >= 2, got {k}"
        )));
    }
    if !(t_final > 0.0) {
        return Err(Error::OutOfRange(format!("T = {t_final} must be positive")));
    }
    let kf = k as f64;
    let half = t_final / 2.0;
    let c1 = (2.0 / t_final).powi(2 * k as i32);
    let c2 = kf * t_final * half.powi(2 * (k as i32 - 1));
    let c3 = kf * (kf + 1.0) * t_final * t_final * half.powi(4 * (k as i32 - 1));
    let c4 = kf * (kf + 1.0) * t_final * t_final * half.powi(k as i32 - 4);

    // Probe weights on a throwaway parameter set; only Theta matters here.
    let probe = WeightParams {
        t_final,
        k,
        d: 5.0,
        rho: 3.0,
        lambda: 101.0,
        beta: 0.5,
        sigma: build_sigma(0.0, 0.5, Interval { a: 0.4, b: 0.6 })?,
    };
    let samples = 20_000;
    let mut observed_min_theta = f64::INFINITY;
    let mut observed_c2 = 0.0f64;
    let mut observed_c3 = 0.0f64;
    let mut observed_c4 = 0.0f64;
    for i in 0..=samples {
        let t = t_final * (0.01 + 0.98 * i as f64 / samples as f64);
        let theta = probe.theta(t);
        let d1 = probe.theta_dot(t).abs();
        let d2 = probe.theta_ddot(t).abs();
        observed_min_theta = observed_min_theta.min(theta);
        observed_c2 = observed_c2.max(d1 / (theta * theta));
        observed_c3 = observed_c3.max(d2 / (theta * theta * theta));
        observed_c4 = observed_c4.max(d2 / (theta * theta));
    }
    Ok(ThetaBounds {
        c1,
        c2,
        c3,
        c4,
        observed_min_theta,
        observed_c2,
        observed_c3,
        observed_c4,
    })
}

/// Observed constants in the pointwise comparison
/// Theta x^{2a-b} e^{2s varphi} <= c phi_tilde e^{2s Phi} and its cubed
/// companion on [a', 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonConstants {
    pub linear: f64,
    pub cubic: f64,
}

pub fn weight_comparison_constants(
    params: &WeightParams,
    alpha: f64,
    xs: &[f64],
    times: &[f64],
    s: f64,
) -> ComparisonConstants {
    let beta = params.beta;
    let mut linear = 0.0f64;
    let mut cubic = 0.0f64;
    for &t in times {
        if !(t > 0.0 && t < params.t_final) {
            continue;
        }
        let log_theta = params.log_theta(t);
        for &x in xs {
            if x < params.sigma.a_prime || x <= 0.0 {
                continue;
            }
            let gap = 2.0 * s * (params.varphi(t, x) - params.big_phi(t, x));
            let log_phi_tilde = params.rho * params.sigma.eval(x) + log_theta;
            let lin = exp_clamped(log_theta + (2.0 * alpha - beta) * x.ln() + gap - log_phi_tilde);
            let cub = exp_clamped(
                3.0 * log_theta + (2.0 + 2.0 * alpha - 3.0 * beta) * x.ln() + gap
                    - 3.0 * log_phi_tilde,
            );
            linear = linear.max(lin);
            cubic = cubic.max(cub);
        }
    }
    ComparisonConstants { linear, cubic }
}
