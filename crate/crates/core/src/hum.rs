//! Penalized HUM: compute an approximate null control through the adjoint
//! Gramian, and estimate the observability constant of the adjoint system.
//!
//! The Gramian maps final adjoint data q to the final state reached from
//! zero by the control read off the backward adjoint solve. Discrete
//! duality makes it symmetric positive semidefinite in the cell-weight
//! inner product, so the penalized system (Lambda + eps I) q = -X_free(T)
//! is solved by conjugate gradients in that inner product. The returned
//! control is the one realizing Lambda q, and its final state is recomputed
//! by an independent forward solve rather than read off the CG internals.

use crate::error::{Error, Result};
use crate::evolution::{
    solve_adjoint_backward, solve_adjoint_forward, solve_forward, Levels, SpaceTimeField,
};
use crate::linalg::{lu_solve, symmetric_eigen, DenseMatrix};
use crate::mesh::Mesh;
use crate::operators::SystemConfig;
use rand::{Rng, SeedableRng};

/// A pair of grid functions on the full node set.
pub type PairState = (Vec<f64>, Vec<f64>);

/// Output of a penalized HUM solve.
#[derive(Debug, Clone, PartialEq)]
pub struct HumResult {
    /// Control levels on the full node set, identically zero outside omega.
    pub control: Levels,
    pub epsilon: f64,
    pub cg_iterations: usize,
    /// Weighted residual norm of the penalized system, relative to the
    /// right-hand side.
    pub cg_residual: f64,
    /// Optimal value (1/2) <(Lambda + eps) q, q> of the dual functional.
    pub cost: f64,
    /// ||(u, v)(T)|| of the controlled trajectory, from an independent
    /// forward solve.
    pub final_norm: f64,
    /// Same norm with h = 0.
    pub uncontrolled_final_norm: f64,
}

fn pair_dot(mesh: &Mesh, a: &PairState, b: &PairState) -> f64 {
    mesh.dot(&a.0, &b.0) + mesh.dot(&a.1, &b.1)
}

fn pair_norm(mesh: &Mesh, a: &PairState) -> f64 {
    pair_dot(mesh, a, a).sqrt()
}

fn require_backward_euler(config: &SystemConfig) -> Result<()> {
    if config.theta_scheme != 1.0 {
        return Err(Error::InvalidArgument(
            "the HUM driver requires theta = 1; other theta values are for \
             forward accuracy studies"
                .into(),
        ));
    }
    Ok(())
}

/// Control levels realized by final adjoint data: level n holds the masked
/// backward adjoint at level n-1, the pairing under which discrete duality
/// is exact.
fn control_from_adjoint(config: &SystemConfig, adjoint: &SpaceTimeField) -> Levels {
    let mesh = &adjoint.mesh;
    let n_levels = adjoint.n_levels();
    let mut control: Levels = Vec::with_capacity(n_levels);
    control.push(vec![0.0; mesh.nodes.len()]);
    for n in 1..n_levels {
        let level: Vec<f64> = adjoint.u[n - 1]
            .iter()
            .zip(mesh.nodes.iter())
            .map(|(&p, &x)| if config.omega.contains(x) { p } else { 0.0 })
            .collect();
        control.push(level);
    }
    control
}

/// Apply the HUM Gramian: backward adjoint solve from (pT, qT), restrict the
/// first component to omega as the control, forward solve from zero data,
/// return the final state.
pub fn gramian_apply(config: &SystemConfig, p_final: &[f64], q_final: &[f64]) -> Result<PairState> {
    require_backward_euler(config)?;
    let adjoint = solve_adjoint_backward(config, p_final, q_final)?;
    let control = control_from_adjoint(config, &adjoint);
    let mesh = &adjoint.mesh;
    let zeros = vec![0.0; mesh.nodes.len()];
    let forward = solve_forward(config, &zeros, &zeros, Some(&control))?;
    let last = forward.n_levels() - 1;
    Ok((forward.u[last].clone(), forward.v[last].clone()))
}

/// Observation energy dt sum_n ||p_n||^2_omega realized by the Gramian:
/// <Lambda q, q> equals this up to solver precision.
pub fn gramian_quadratic_form(
    config: &SystemConfig,
    p_final: &[f64],
    q_final: &[f64],
) -> Result<f64> {
    require_backward_euler(config)?;
    let adjoint = solve_adjoint_backward(config, p_final, q_final)?;
    let mesh = &adjoint.mesh;
    let dt = adjoint.dt();
    let mut total = 0.0;
    for n in 0..adjoint.n_levels() - 1 {
        let mut masked = 0.0;
        for (i, &x) in mesh.nodes.iter().enumerate() {
            if config.omega.contains(x) {
                masked += mesh.cell_weights[i] * adjoint.u[n][i] * adjoint.u[n][i];
            }
        }
        total += dt * masked;
    }
    Ok(total)
}

/// Solve (Lambda + eps I) q = -(free final state) by CG in the weighted
/// inner product and return the control realizing Lambda q together with
/// its independently recomputed final state.
pub fn hum_solve(
    config: &SystemConfig,
    u0: &[f64],
    v0: &[f64],
    epsilon: f64,
    cg_tol: f64,
    cg_max_iter: usize,
) -> Result<HumResult> {
    require_backward_euler(config)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "penalty epsilon = {epsilon} must be positive"
        )));
    }
    let mesh = config.mesh()?;
    let free = solve_forward(config, u0, v0, None)?;
    let last = free.n_levels() - 1;
    let uncontrolled_final_norm = free.final_norm();
    let b: PairState = (
        free.u[last].iter().map(|x| -x).collect(),
        free.v[last].iter().map(|x| -x).collect(),
    );
    let b_norm = pair_norm(&mesh, &b);

    let n_levels = free.n_levels();
    let zero_result = |iterations, residual| HumResult {
        control: (0..n_levels).map(|_| vec![0.0; mesh.nodes.len()]).collect(),
        epsilon,
        cg_iterations: iterations,
        cg_residual: residual,
        cost: 0.0,
        final_norm: 0.0,
        uncontrolled_final_norm,
    };
    if b_norm == 0.0 {
        return Ok(zero_result(0, 0.0));
    }

    let apply = |q: &PairState| -> Result<PairState> {
        let mut out = gramian_apply(config, &q.0, &q.1)?;
        for (o, qi) in out.0.iter_mut().zip(&q.0) {
            *o += epsilon * qi;
        }
        for (o, qi) in out.1.iter_mut().zip(&q.1) {
            *o += epsilon * qi;
        }
        Ok(out)
    };

    // CG with q_0 = 0.
    let mut q: PairState = (vec![0.0; b.0.len()], vec![0.0; b.1.len()]);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rho = pair_dot(&mesh, &r, &r);
    let mut iterations = 0;
    while rho.sqrt() > cg_tol * b_norm {
        if iterations >= cg_max_iter {
            let best = finish(
                config,
                &mesh,
                &q,
                epsilon,
                iterations,
                rho.sqrt() / b_norm,
                u0,
                v0,
                uncontrolled_final_norm,
            )?;
            return Err(Error::CgDidNotConverge {
                iterations,
                residual: rho.sqrt() / b_norm,
                best: Box::new(best),
            });
        }
        let ap = apply(&p)?;
        let alpha = rho / pair_dot(&mesh, &p, &ap);
        for i in 0..q.0.len() {
            q.0[i] += alpha * p.0[i];
            q.1[i] += alpha * p.1[i];
            r.0[i] -= alpha * ap.0[i];
            r.1[i] -= alpha * ap.1[i];
        }
        let rho_next = pair_dot(&mesh, &r, &r);
        let beta = rho_next / rho;
        for i in 0..p.0.len() {
            p.0[i] = r.0[i] + beta * p.0[i];
            p.1[i] = r.1[i] + beta * p.1[i];
        }
        rho = rho_next;
        iterations += 1;
    }
    finish(
        config,
        &mesh,
        &q,
        epsilon,
        iterations,
        rho.sqrt() / b_norm,
        u0,
        v0,
        uncontrolled_final_norm,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    config: &SystemConfig,
    mesh: &Mesh,
    q: &PairState,
    epsilon: f64,
    iterations: usize,
    residual: f64,
    u0: &[f64],
    v0: &[f64],
    uncontrolled_final_norm: f64,
) -> Result<HumResult> {
    let adjoint = solve_adjoint_backward(config, &q.0, &q.1)?;
    let control = control_from_adjoint(config, &adjoint);
    let controlled = solve_forward(config, u0, v0, Some(&control))?;
    let final_norm = controlled.final_norm();
    // cost = (1/2) <(Lambda + eps) q, q> evaluated through the duality
    // identity plus the penalty term.
    let observation = gramian_quadratic_form(config, &q.0, &q.1)?;
    let cost = 0.5 * (observation + epsilon * pair_dot(mesh, q, q));
    Ok(HumResult {
        control,
        epsilon,
        cg_iterations: iterations,
        cg_residual: residual,
        cost,
        final_norm,
        uncontrolled_final_norm,
    })
}

/// How the observability constant is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservabilityMethod {
    /// Project onto slow diffusion eigenvectors plus a few random vectors.
    ReducedBasis,
    /// Use the full interior basis; exact at the discrete level and only
    /// affordable for small nx.
    DenseOracle,
}

impl ObservabilityMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ObservabilityMethod::ReducedBasis => "reduced-basis",
            ObservabilityMethod::DenseOracle => "dense-oracle",
        }
    }
}

/// Estimated best constant in the observability inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservabilityEstimate {
    /// sup over adjoint data of ||(U,V)(T)||^2 / int int_omega U^2; infinite
    /// when the observation Gramian is singular on the basis.
    pub c_obs: f64,
    pub basis_size: usize,
    pub method: ObservabilityMethod,
}

/// Estimate c_obs from an explicit basis of adjoint initial data.
pub fn observability_from_basis(
    config: &SystemConfig,
    basis: &[PairState],
    method: ObservabilityMethod,
) -> Result<ObservabilityEstimate> {
    let mesh = config.mesh()?;
    let m = basis.len();
    let dt = config.t_final / config.nt as f64;
    let mut finals: Vec<PairState> = Vec::with_capacity(m);
    let mut observations: Vec<Levels> = Vec::with_capacity(m);
    for (u0, v0) in basis {
        let field = solve_adjoint_forward(config, u0, v0)?;
        let last = field.n_levels() - 1;
        finals.push((field.u[last].clone(), field.v[last].clone()));
        observations.push(field.u);
    }
    let mut a_t = DenseMatrix::zeros(m);
    let mut b_omega = DenseMatrix::zeros(m);
    let masked_dot = |a: &[f64], b: &[f64]| -> f64 {
        let mut sum = 0.0;
        for (i, &x) in mesh.nodes.iter().enumerate() {
            if config.omega.contains(x) {
                sum += mesh.cell_weights[i] * a[i] * b[i];
            }
        }
        sum
    };
    let n_levels = config.nt + 1;
    for j in 0..m {
        for k in j..m {
            let at = pair_dot(&mesh, &finals[j], &finals[k]);
            let mut bo = 0.0;
            for n in 1..n_levels {
                bo += dt * masked_dot(&observations[j][n], &observations[k][n]);
            }
            a_t[(j, k)] = at;
            a_t[(k, j)] = at;
            b_omega[(j, k)] = bo;
            b_omega[(k, j)] = bo;
        }
    }
    // Generalized eigenproblem A x = lambda B x on the basis. B is only
    // positive semidefinite: observation traces of fast modes are nearly
    // parallel, so its spectrum is truncated at a relative floor. A
    // truncated direction that still carries final energy is one the
    // observation never sees, which is the structural-unobservability flag.
    let (b_eigs, b_vecs) = symmetric_eigen(&b_omega);
    let (a_eigs, _) = symmetric_eigen(&a_t);
    let a_max = a_eigs.last().copied().unwrap_or(0.0).max(0.0);
    let b_max = b_eigs.last().copied().unwrap_or(0.0).max(0.0);
    let infinite = ObservabilityEstimate {
        c_obs: f64::INFINITY,
        basis_size: m,
        method,
    };
    if b_max <= 0.0 {
        return Ok(if a_max > 0.0 {
            infinite
        } else {
            ObservabilityEstimate {
                c_obs: 0.0,
                basis_size: m,
                method,
            }
        });
    }
    let rayleigh = |j: usize| -> f64 {
        let col: Vec<f64> = (0..m).map(|i| b_vecs[(i, j)]).collect();
        let a_col = a_t.mul_vec(&col);
        a_col.iter().zip(&col).map(|(x, y)| x * y).sum()
    };
    let mut keep = Vec::new();
    for j in 0..m {
        if b_eigs[j] > OBS_TRUNCATION * b_max {
            keep.push(j);
        } else if rayleigh(j) > OBS_ENERGY_FLAG * a_max {
            return Ok(infinite);
        }
    }
    // Projected pencil C[r][c] = psi_r^T A psi_c / sqrt(mu_r mu_c).
    let k = keep.len();
    let mut c = DenseMatrix::zeros(k);
    for (r, &jr) in keep.iter().enumerate() {
        let col_r: Vec<f64> = (0..m).map(|i| b_vecs[(i, jr)]).collect();
        let a_col = a_t.mul_vec(&col_r);
        for (s, &js) in keep.iter().enumerate() {
            let col_s: Vec<f64> = (0..m).map(|i| b_vecs[(i, js)]).collect();
            let value: f64 = a_col.iter().zip(&col_s).map(|(x, y)| x * y).sum();
            c[(r, s)] = value / (b_eigs[jr] * b_eigs[js]).sqrt();
        }
    }
    let (eigs, _) = symmetric_eigen(&c);
    Ok(ObservabilityEstimate {
        c_obs: eigs.last().copied().unwrap_or(0.0).max(0.0),
        basis_size: m,
        method,
    })
}

/// Observation-Gramian eigenvalues below this relative floor are outside
/// f64 resolution and get truncated from the pencil.
const OBS_TRUNCATION: f64 = 1e-10;

/// A truncated direction whose final energy exceeds this share of the
/// largest one is genuinely unobserved; the estimate is flagged infinite.
const OBS_ENERGY_FLAG: f64 = 1e-6;

/// Build the estimation basis and compute c_obs.
///
/// The basis keeps pure-component vectors (slow eigenvectors of each
/// diffusion block, then seeded random fill) so that a structurally
/// unobservable direction, like pure-V data in a decoupled system, shows up
/// as a singular observation Gramian instead of being averaged away.
pub fn observability_estimate(
    config: &SystemConfig,
    basis_size: usize,
    method: ObservabilityMethod,
) -> Result<ObservabilityEstimate> {
    let mesh = config.mesh()?;
    let m_interior = mesh.n_interior();
    let full_dim = 2 * m_interior;
    if basis_size > full_dim {
        return Err(Error::InvalidArgument(format!(
            "basis size {basis_size} exceeds the {full_dim} spatial unknowns"
        )));
    }
    let pad = |interior: &[f64]| -> Vec<f64> {
        let mut full = vec![0.0; mesh.nodes.len()];
        full[1..=m_interior].copy_from_slice(interior);
        full
    };
    let mut basis: Vec<PairState> = Vec::new();
    match method {
        ObservabilityMethod::DenseOracle => {
            for i in 0..m_interior {
                let mut e = vec![0.0; m_interior];
                e[i] = 1.0;
                let full = pad(&e);
                basis.push((full.clone(), vec![0.0; mesh.nodes.len()]));
                basis.push((vec![0.0; mesh.nodes.len()], full));
            }
        }
        ObservabilityMethod::ReducedBasis => {
            let per_component = basis_size / 2;
            if per_component == 0 {
                return Err(Error::InvalidArgument(
                    "basis size must be at least 2".into(),
                ));
            }
            let n_random = (per_component / 4).max(1).min(per_component - 1);
            let n_eig = per_component - n_random;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0b5e_7ab1);
            for component in 0..2 {
                let alpha = if component == 0 {
                    config.alpha1
                } else {
                    config.alpha2
                };
                let op = crate::operators::assemble_diffusion(&mesh, alpha)?;
                let (_, vectors) = symmetric_eigen(&op.symmetrized_dense());
                // Slowest modes are the largest (least negative) eigenvalues,
                // i.e. the trailing columns; map back through W^{-1/2}.
                for j in 0..n_eig {
                    let col = m_interior - 1 - j;
                    let interior: Vec<f64> = (0..m_interior)
                        .map(|i| vectors[(i, col)] / op.weights[i].sqrt())
                        .collect();
                    let full = pad(&interior);
                    if component == 0 {
                        basis.push((full, vec![0.0; mesh.nodes.len()]));
                    } else {
                        basis.push((vec![0.0; mesh.nodes.len()], full));
                    }
                }
                for _ in 0..n_random {
                    let interior: Vec<f64> = (0..m_interior)
                        .map(|_| rng.random_range(-1.0..1.0))
                        .collect();
                    let full = pad(&interior);
                    if component == 0 {
                        basis.push((full, vec![0.0; mesh.nodes.len()]));
                    } else {
                        basis.push((vec![0.0; mesh.nodes.len()], full));
                    }
                }
            }
        }
    }
    observability_from_basis(config, &basis, method)
}

/// Dense solve of the penalized system for cross-checking the CG path; only
/// sensible for small nx. Assembles Lambda column by column.
pub fn hum_solve_dense(
    config: &SystemConfig,
    u0: &[f64],
    v0: &[f64],
    epsilon: f64,
) -> Result<PairState> {
    require_backward_euler(config)?;
    let mesh = config.mesh()?;
    let m_interior = mesh.n_interior();
    let dim = 2 * m_interior;
    let pad_pair = |x: &[f64]| -> PairState {
        let mut u = vec![0.0; mesh.nodes.len()];
        let mut v = vec![0.0; mesh.nodes.len()];
        u[1..=m_interior].copy_from_slice(&x[..m_interior]);
        v[1..=m_interior].copy_from_slice(&x[m_interior..]);
        (u, v)
    };
    let mut lambda = DenseMatrix::zeros(dim);
    for col in 0..dim {
        let mut e = vec![0.0; dim];
        e[col] = 1.0;
        let (u, v) = pad_pair(&e);
        let (lu, lv) = gramian_apply(config, &u, &v)?;
        for i in 0..m_interior {
            lambda[(i, col)] = lu[i + 1];
            lambda[(m_interior + i, col)] = lv[i + 1];
        }
    }
    for i in 0..dim {
        lambda[(i, i)] += epsilon;
    }
    let free = solve_forward(config, u0, v0, None)?;
    let last = free.n_levels() - 1;
    let mut rhs = vec![0.0; dim];
    for i in 0..m_interior {
        rhs[i] = -free.u[last][i + 1];
        rhs[m_interior + i] = -free.v[last][i + 1];
    }
    let q = lu_solve(&lambda, &rhs)?;
    Ok(pad_pair(&q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::CoefficientSpec;
    use std::f64::consts::PI;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_pair(mesh: &Mesh, rng: &mut impl Rng) -> PairState {
        let n = mesh.nodes.len();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for i in 1..n - 1 {
            a[i] = rng.random_range(-1.0..1.0);
            b[i] = rng.random_range(-1.0..1.0);
        }
        (a, b)
    }

    #[test]
    fn gramian_of_zero_is_zero() {
        let config = SystemConfig::cascade(16, 12);
        let mesh = config.mesh().unwrap();
        let zeros = vec![0.0; mesh.nodes.len()];
        let (u, v) = gramian_apply(&config, &zeros, &zeros).unwrap();
        assert!(u.iter().all(|&x| x == 0.0));
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gramian_symmetry_and_positivity() {
        let config = SystemConfig::cascade(40, 80);
        let mesh = config.mesh().unwrap();
        let mut r = rng(2024);
        for _ in 0..10 {
            let a = random_pair(&mesh, &mut r);
            let b = random_pair(&mesh, &mut r);
            let la = gramian_apply(&config, &a.0, &a.1).unwrap();
            let lb = gramian_apply(&config, &b.0, &b.1).unwrap();
            let lab = pair_dot(&mesh, &la, &b);
            let alb = pair_dot(&mesh, &a, &lb);
            let scale = pair_norm(&mesh, &a) * pair_norm(&mesh, &b);
            assert!(
                (lab - alb).abs() <= 1e-10 * scale,
                "asymmetry {:.3e} vs scale {scale:.3e}",
                (lab - alb).abs()
            );
            let laa = pair_dot(&mesh, &la, &a);
            assert!(laa >= -1e-12, "negative quadratic form {laa:.3e}");
            // <Lambda a, a> equals the observation energy of the adjoint.
            let energy = gramian_quadratic_form(&config, &a.0, &a.1).unwrap();
            assert!(
                (laa - energy).abs() <= 1e-10 * energy.max(1e-300),
                "{laa:.15e} vs {energy:.15e}"
            );
        }
    }

    #[test]
    fn hum_zero_data_returns_zero_control() {
        let config = SystemConfig::cascade(20, 16);
        let mesh = config.mesh().unwrap();
        let zeros = vec![0.0; mesh.nodes.len()];
        let result = hum_solve(&config, &zeros, &zeros, 1e-4, 1e-8, 100).unwrap();
        assert_eq!(result.cg_iterations, 0);
        assert_eq!(result.final_norm, 0.0);
        assert!(result.control.iter().flatten().all(|&h| h == 0.0));
    }

    #[test]
    fn hum_control_is_supported_in_omega() {
        let config = SystemConfig::cascade(30, 24);
        let mesh = config.mesh().unwrap();
        let u0 = mesh.sample_dirichlet(|x| (PI * x).sin());
        let v0 = mesh.sample_dirichlet(|x| (PI * x).sin());
        let result = hum_solve(&config, &u0, &v0, 1e-3, 1e-8, 400).unwrap();
        for level in &result.control {
            for (i, &x) in mesh.nodes.iter().enumerate() {
                if !config.omega.contains(x) {
                    assert_eq!(level[i], 0.0, "control leaked outside omega at x = {x}");
                }
            }
        }
        assert!(result.final_norm < result.uncontrolled_final_norm);
    }

    #[test]
    fn hum_final_norm_obeys_penalty_bound() {
        let config = SystemConfig::cascade(30, 24);
        let mesh = config.mesh().unwrap();
        let u0 = mesh.sample_dirichlet(|x| (PI * x).sin());
        let v0 = mesh.sample_dirichlet(|x| (2.0 * PI * x).sin());
        let cg_tol = 1e-9;
        for &eps in &[1e-2, 1e-3] {
            let result = hum_solve(&config, &u0, &v0, eps, cg_tol, 400).unwrap();
            assert!(result.cg_residual <= cg_tol);
            assert!(
                result.final_norm.powi(2) <= eps * 2.0 * result.cost + 10.0 * cg_tol,
                "eps {eps}: {} vs {}",
                result.final_norm.powi(2),
                eps * 2.0 * result.cost + 10.0 * cg_tol
            );
        }
    }

    #[test]
    fn hum_rejects_nonpositive_epsilon() {
        let config = SystemConfig::cascade(16, 12);
        let mesh = config.mesh().unwrap();
        let zeros = vec![0.0; mesh.nodes.len()];
        assert!(hum_solve(&config, &zeros, &zeros, 0.0, 1e-8, 10).is_err());
    }

    #[test]
    fn cg_failure_carries_best_iterate() {
        let config = SystemConfig::cascade(24, 20);
        let mesh = config.mesh().unwrap();
        let u0 = mesh.sample_dirichlet(|x| (PI * x).sin());
        let v0 = mesh.sample_dirichlet(|x| (PI * x).sin());
        match hum_solve(&config, &u0, &v0, 1e-6, 1e-12, 2) {
            Err(Error::CgDidNotConverge {
                iterations, best, ..
            }) => {
                assert_eq!(iterations, 2);
                assert!(best.final_norm.is_finite());
            }
            other => panic!("expected CG failure, got {other:?}"),
        }
    }

    #[test]
    fn decoupled_system_is_not_observable() {
        let mut config = SystemConfig::cascade(24, 20);
        config.b21 = CoefficientSpec::zero();
        let estimate =
            observability_estimate(&config, 12, ObservabilityMethod::ReducedBasis).unwrap();
        assert!(estimate.c_obs.is_infinite());
    }

    #[test]
    fn cascade_system_has_finite_observability_constant() {
        let config = SystemConfig::cascade(24, 24);
        let estimate =
            observability_estimate(&config, 12, ObservabilityMethod::ReducedBasis).unwrap();
        assert!(estimate.c_obs.is_finite());
        assert!(estimate.c_obs > 0.0);
    }

    #[test]
    fn observability_is_scale_invariant() {
        let config = SystemConfig::cascade(20, 16);
        let mesh = config.mesh().unwrap();
        let mut r = rng(7);
        let basis: Vec<PairState> = (0..6).map(|_| random_pair(&mesh, &mut r)).collect();
        let scaled: Vec<PairState> = basis
            .iter()
            .map(|(a, b)| {
                (
                    a.iter().map(|x| 37.0 * x).collect(),
                    b.iter().map(|x| 37.0 * x).collect(),
                )
            })
            .collect();
        let base =
            observability_from_basis(&config, &basis, ObservabilityMethod::ReducedBasis).unwrap();
        let scale =
            observability_from_basis(&config, &scaled, ObservabilityMethod::ReducedBasis).unwrap();
        assert!(
            (base.c_obs - scale.c_obs).abs() <= 1e-8 * base.c_obs,
            "{} vs {}",
            base.c_obs,
            scale.c_obs
        );
    }
}
