//! Discrete degenerate diffusion operators and the coupled system matrix.
//!
//! The operator u -> (x^alpha u_x)_x is discretized in flux form with the
//! diffusion coefficient evaluated at the geometric face midpoints. With
//! homogeneous Dirichlet ends the interior matrix is symmetric in the
//! cell-weight inner product and negative definite.

use crate::error::{Error, Result};
use crate::linalg::{Block, DenseMatrix};
use crate::mesh::Mesh;

/// Open interval (a, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "interval needs a < b, got ({a}, {b})"
            )));
        }
        Ok(Interval { a, b })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a < x && x < self.b
    }

    /// Strict inclusion self inside other (compact containment in 1D).
    pub fn strictly_inside(&self, other: &Interval) -> bool {
        other.a < self.a && self.b < other.b
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// Constant coefficient, optionally restricted to a support interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSpec {
    pub value: f64,
    pub support: Option<Interval>,
}

impl CoefficientSpec {
    pub fn constant(value: f64) -> Self {
        CoefficientSpec {
            value,
            support: None,
        }
    }

    pub fn on(value: f64, support: Interval) -> Result<Self> {
        if support.a < 0.0 || support.b > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "coefficient support ({}, {}) must lie in [0,1]",
                support.a, support.b
            )));
        }
        Ok(CoefficientSpec {
            value,
            support: Some(support),
        })
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.support {
            Some(s) if !s.contains(x) => 0.0,
            _ => self.value,
        }
    }

    /// Largest mu >= 0 with |coefficient| >= mu and a fixed sign on the whole
    /// window; 0 when the coefficient changes support inside the window.
    pub fn uniform_lower_bound_on(&self, window: &Interval) -> f64 {
        match &self.support {
            None => self.value.abs(),
            Some(s) => {
                if s.a <= window.a && window.b <= s.b {
                    self.value.abs()
                } else {
                    0.0
                }
            }
        }
    }
}

/// Parameters of the coupled controlled system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    /// Time horizon.
    pub t_final: f64,
    /// Control window omega.
    pub omega: Interval,
    /// Inner window omega_1 on which the coupling must be bounded below.
    pub omega1: Interval,
    pub b11: CoefficientSpec,
    pub b12: CoefficientSpec,
    pub b21: CoefficientSpec,
    pub b22: CoefficientSpec,
    pub nx: usize,
    pub nt: usize,
    /// Theta in [1/2, 1]; 1 is backward Euler.
    pub theta_scheme: f64,
    pub grading_exponent: f64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, alpha) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::OutOfRange(format!(
                    "{name} = {alpha}; the weakly degenerate range is (0, 1)"
                )));
            }
        }
        if !(self.t_final > 0.0) {
            return Err(Error::OutOfRange(format!(
                "T = {} must be positive",
                self.t_final
            )));
        }
        if !(0.0 < self.omega.a && self.omega.b < 1.0) {
            return Err(Error::OutOfRange(format!(
                "omega = ({}, {}) must satisfy 0 < a < b < 1",
                self.omega.a, self.omega.b
            )));
        }
        if !self.omega1.strictly_inside(&self.omega) {
            return Err(Error::OutOfRange(format!(
                "omega1 = ({}, {}) must lie strictly inside omega = ({}, {})",
                self.omega1.a, self.omega1.b, self.omega.a, self.omega.b
            )));
        }
        if self.nx < 4 {
            return Err(Error::OutOfRange(format!("nx = {} too small", self.nx)));
        }
        if self.nt < 2 {
            return Err(Error::OutOfRange(format!("nt = {} too small", self.nt)));
        }
        if !(self.theta_scheme >= 0.5 && self.theta_scheme <= 1.0) {
            return Err(Error::OutOfRange(format!(
                "theta = {} must be in [1/2, 1]",
                self.theta_scheme
            )));
        }
        for (name, c) in [
            ("b11", &self.b11),
            ("b12", &self.b12),
            ("b21", &self.b21),
            ("b22", &self.b22),
        ] {
            if let Some(s) = &c.support {
                if s.a < 0.0 || s.b > 1.0 {
                    return Err(Error::OutOfRange(format!(
                        "{name} support ({}, {}) must lie in [0,1]",
                        s.a, s.b
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mesh(&self) -> Result<Mesh> {
        Mesh::graded(self.nx, self.grading_exponent)
    }

    /// Check the one-force hypothesis: |b21| bounded below by mu > 0 on omega1.
    pub fn coupling_lower_bound(&self) -> f64 {
        self.b21.uniform_lower_bound_on(&self.omega1)
    }

    /// Cascade fixture used throughout the tests: control on (0.3, 0.8),
    /// coupling b21 = 1 on (0.4, 0.7), alpha = (0.5, 0.75), T = 1.
    pub fn cascade(nx: usize, nt: usize) -> Self {
        SystemConfig {
            alpha1: 0.5,
            alpha2: 0.75,
            t_final: 1.0,
            omega: Interval { a: 0.3, b: 0.8 },
            omega1: Interval { a: 0.4, b: 0.7 },
            b11: CoefficientSpec::zero(),
            b12: CoefficientSpec::zero(),
            b21: CoefficientSpec {
                value: 1.0,
                support: Some(Interval { a: 0.4, b: 0.7 }),
            },
            b22: CoefficientSpec::zero(),
            nx,
            nt,
            theta_scheme: 1.0,
            grading_exponent: 2.0,
        }
    }
}

/// Flux-form discretization of u -> (x^alpha u_x)_x on the interior nodes,
/// stored as three bands.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub alpha: f64,
    /// Sub-diagonal, length m-1 where m is the number of interior nodes.
    pub sub: Vec<f64>,
    /// Main diagonal, length m.
    pub diag: Vec<f64>,
    /// Super-diagonal, length m-1.
    pub sup: Vec<f64>,
    /// Interior cell weights (the inner product making the operator
    /// self-adjoint).
    pub weights: Vec<f64>,
}

impl DiscreteOperator {
    pub fn n_interior(&self) -> usize {
        self.diag.len()
    }

    /// Apply to a vector of interior values.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let m = self.n_interior();
        assert_eq!(u.len(), m);
        let mut out = vec![0.0; m];
        for i in 0..m {
            let mut v = self.diag[i] * u[i];
            if i > 0 {
                v += self.sub[i - 1] * u[i - 1];
            }
            if i + 1 < m {
                v += self.sup[i] * u[i + 1];
            }
            out[i] = v;
        }
        out
    }

    /// Similarity transform W^{1/2} A W^{-1/2}, a symmetric tridiagonal
    /// matrix with the same spectrum, returned dense for the eigensolver.
    pub fn symmetrized_dense(&self) -> DenseMatrix {
        let m = self.n_interior();
        let mut s = DenseMatrix::zeros(m);
        for i in 0..m {
            s[(i, i)] = self.diag[i];
            if i + 1 < m {
                let off = self.sup[i] * (self.weights[i] / self.weights[i + 1]).sqrt();
                s[(i, i + 1)] = off;
                s[(i + 1, i)] = off;
            }
        }
        s
    }

    /// max_{i,j} |w_i a_ij - w_j a_ji| relative to the largest weighted entry.
    pub fn weighted_asymmetry(&self) -> f64 {
        let m = self.n_interior();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..m - 1 {
            let upper = self.weights[i] * self.sup[i];
            let lower = self.weights[i + 1] * self.sub[i];
            worst = worst.max((upper - lower).abs());
            scale = scale.max(upper.abs()).max(lower.abs());
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Discrete H^1_alpha seminorm sum over faces of a_{i+1/2} (du/h)^2 h,
    /// which equals -<A u, u>_w for Dirichlet data. `full` holds values at
    /// all nodes including the boundary.
    pub fn gradient_energy(&self, mesh: &Mesh, full: &[f64]) -> f64 {
        assert_eq!(full.len(), mesh.nodes.len());
        let mut sum = 0.0;
        for i in 0..mesh.n_panels() {
            let h = mesh.panel_width(i);
            let a = mesh.face_points[i].powf(self.alpha);
            let du = full[i + 1] - full[i];
            sum += a * du * du / h;
        }
        sum
    }
}

/// Assemble the degenerate diffusion operator for a given alpha in (0, 1).
pub fn assemble_diffusion(mesh: &Mesh, alpha: f64) -> Result<DiscreteOperator> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} outside (0, 1); the strongly degenerate case is not handled"
        )));
    }
    Ok(assemble_diffusion_unchecked(mesh, alpha))
}

/// Same assembly without the range check; used by tests that probe the
/// alpha -> 0 limit.
pub fn assemble_diffusion_unchecked(mesh: &Mesh, alpha: f64) -> DiscreteOperator {
    let m = mesh.n_interior();
    let mut sub = vec![0.0; m - 1];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m - 1];
    // Face conductances a_{i+1/2} / h_{i+1/2} for panels 0..n.
    let cond: Vec<f64> = (0..mesh.n_panels())
        .map(|i| mesh.face_points[i].powf(alpha) / mesh.panel_width(i))
        .collect();
    for i in 0..m {
        let w = mesh.cell_weights[i + 1];
        let left = cond[i];
        let right = cond[i + 1];
        diag[i] = -(left + right) / w;
        if i > 0 {
            sub[i - 1] = left / w;
        }
        if i + 1 < m {
            sup[i] = right / w;
        }
    }
    DiscreteOperator {
        alpha,
        sub,
        diag,
        sup,
        weights: mesh.cell_weights[1..mesh.nodes.len() - 1].to_vec(),
    }
}

/// The two diffusion operators plus the zero-order coupling, evaluated on
/// the interior nodes. Represents diag(A1, A2) - B with
/// B = [[b11, b12], [b21, b22]] acting pointwise.
#[derive(Debug, Clone)]
pub struct CoupledOperator {
    pub a1: DiscreteOperator,
    pub a2: DiscreteOperator,
    /// Pointwise coupling values at the interior nodes, row-major 2x2.
    pub coupling: Vec<Block>,
}

impl CoupledOperator {
    pub fn n_interior(&self) -> usize {
        self.a1.n_interior()
    }

    /// Apply to interleaved (u_i, v_i) interior values.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.n_interior();
        assert_eq!(x.len(), 2 * m);
        let u: Vec<f64> = (0..m).map(|i| x[2 * i]).collect();
        let v: Vec<f64> = (0..m).map(|i| x[2 * i + 1]).collect();
        let au = self.a1.apply(&u);
        let av = self.a2.apply(&v);
        let mut out = vec![0.0; 2 * m];
        for i in 0..m {
            let b = &self.coupling[i];
            out[2 * i] = au[i] - (b[0] * u[i] + b[1] * v[i]);
            out[2 * i + 1] = av[i] - (b[2] * u[i] + b[3] * v[i]);
        }
        out
    }

    /// Transposed coupling: diag(A1, A2) - B^T, the generator of the adjoint
    /// system in the weighted inner product.
    pub fn adjoint(&self) -> CoupledOperator {
        CoupledOperator {
            a1: self.a1.clone(),
            a2: self.a2.clone(),
            coupling: self
                .coupling
                .iter()
                .map(|b| [b[0], b[2], b[1], b[3]])
                .collect(),
        }
    }

    /// Dense form, interleaved ordering; used by small oracles.
    pub fn to_dense(&self) -> DenseMatrix {
        let m = self.n_interior();
        let mut dense = DenseMatrix::zeros(2 * m);
        for i in 0..m {
            dense[(2 * i, 2 * i)] = self.a1.diag[i] - self.coupling[i][0];
            dense[(2 * i, 2 * i + 1)] = -self.coupling[i][1];
            dense[(2 * i + 1, 2 * i)] = -self.coupling[i][2];
            dense[(2 * i + 1, 2 * i + 1)] = self.a2.diag[i] - self.coupling[i][3];
            if i > 0 {
                dense[(2 * i, 2 * (i - 1))] = self.a1.sub[i - 1];
                dense[(2 * i + 1, 2 * (i - 1) + 1)] = self.a2.sub[i - 1];
            }
            if i + 1 < m {
                dense[(2 * i, 2 * (i + 1))] = self.a1.sup[i];
                dense[(2 * i + 1, 2 * (i + 1) + 1)] = self.a2.sup[i];
            }
        }
        dense
    }
}

/// Assemble diag(A1, A2) - B(t) on the interior nodes. The coefficient
/// specs are time independent, so `t` only has to lie in [0, T].
pub fn assemble_coupled(mesh: &Mesh, config: &SystemConfig, t: f64) -> Result<CoupledOperator> {
    if !(0.0..=config.t_final).contains(&t) {
        return Err(Error::Domain(format!(
            "t = {t} outside [0, {}]",
            config.t_final
        )));
    }
    let a1 = assemble_diffusion(mesh, config.alpha1)?;
    let a2 = assemble_diffusion(mesh, config.alpha2)?;
    let coupling: Vec<Block> = mesh.nodes[1..mesh.nodes.len() - 1]
        .iter()
        .map(|&x| {
            [
                config.b11.eval(x),
                config.b12.eval(x),
                config.b21.eval(x),
                config.b22.eval(x),
            ]
        })
        .collect();
    Ok(CoupledOperator { a1, a2, coupling })
}
