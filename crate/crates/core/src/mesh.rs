//! Graded 1D meshes on the unit interval and weighted quadrature for integrands with a
//! power-law factor x^p.
//!
//! The mesh is graded toward x = 0 (nodes (i/n)^q) so that the degenerate
//! diffusion coefficient x^alpha is resolved where it vanishes. Quadrature
//! integrates x^p times a per-panel interpolant of the sampled values in
//! closed form, which keeps negative exponents finite instead of silently
//! blowing up a naive trapezoid rule.

use crate::error::{Error, Result};

/// Graded spatial grid on the unit interval with face midpoints and per-node weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    /// Node abscissae, strictly increasing, `nodes[0] = 0` and `nodes[n] = 1`.
    pub nodes: Vec<f64>,
    /// Grading exponent q used to place the nodes at (i/n)^q.
    pub grading_exponent: f64,
    /// Geometric midpoints (x_i + x_{i+1})/2 of the n panels.
    pub face_points: Vec<f64>,
    /// Trapezoid-type quadrature weight attached to each node; sums to 1.
    pub cell_weights: Vec<f64>,
}

impl Mesh {
    /// Build a graded mesh with `n` panels, nodes at (i/n)^q.
    ///
    /// `q = 1` gives the uniform mesh; `q = 2` is the default used by the
    /// solvers. Fails for `n < 4` or `q < 1`.
    pub fn graded(n: usize, grading_exponent: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidArgument(format!(
                "mesh needs at least 4 panels, got {n}"
            )));
        }
        if !(grading_exponent >= 1.0) || !grading_exponent.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grading exponent must be a finite scalar >= 1, got {grading_exponent}"
            )));
        }
        let nodes: Vec<f64> = (0..=n)
            .map(|i| (i as f64 / n as f64).powf(grading_exponent))
            .collect();
        let face_points: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut cell_weights = vec![0.0; n + 1];
        cell_weights[0] = 0.5 * (nodes[1] - nodes[0]);
        cell_weights[n] = 0.5 * (nodes[n] - nodes[n - 1]);
        for i in 1..n {
            cell_weights[i] = 0.5 * (nodes[i + 1] - nodes[i - 1]);
        }
        Ok(Mesh {
            nodes,
            grading_exponent,
            face_points,
            cell_weights,
        })
    }

    /// Number of panels.
    pub fn n_panels(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of interior nodes (the unknowns of a Dirichlet problem).
    pub fn n_interior(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Panel width x_{i+1} - x_i.
    pub fn panel_width(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    /// Weighted inner product sum_i w_i a_i b_i over all nodes.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.cell_weights
            .iter()
            .zip(a)
            .zip(b)
            .map(|((w, x), y)| w * x * y)
            .sum()
    }

    /// Weighted L2 norm induced by [`Mesh::dot`].
    pub fn norm(&self, a: &[f64]) -> f64 {
        self.dot(a, a).sqrt()
    }

    /// Sample a scalar function at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Sample a profile meant as Dirichlet data: the endpoint values are
    /// forced to exactly zero, so profiles like sin(pi x) whose samples land
    /// within rounding of zero satisfy the boundary checks.
    pub fn sample_dirichlet(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut values = self.sample(f);
        values[0] = 0.0;
        *values.last_mut().unwrap() = 0.0;
        values
    }
}

/// Closed form of int_{lo}^{hi} x^a dx, with the logarithmic branch at a = -1.
/// Requires 0 < lo <= hi.
pub(crate) fn power_moment(lo: f64, hi: f64, a: f64) -> f64 {
    if (a + 1.0).abs() < 1e-12 {
        (hi / lo).ln()
    } else {
        (hi.powf(a + 1.0) - lo.powf(a + 1.0)) / (a + 1.0)
    }
}

/// First-panel handling for exponents p <= -1.
///
/// The caller asserts that `values` vanish at 0 fast enough for x^p g(x) to
/// be integrable near 0. With only grid samples available, the local decay
/// rate of g is read off the first two positive panels in log-log form and
/// the panel [0, x1] is integrated against that fitted power law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroPanel {
    /// Integrand is regular at 0: linear interpolant through (0, g_0).
    /// Needs p > -1 unless g_0 = 0 (then p > -2 suffices).
    Regular,
    /// Caller asserts g vanishes at 0 fast enough; fit g ~ c x^r near 0.
    VanishesAtZero,
}

/// Approximate int_0^1 x^p g(x) dx from node samples of g.
///
/// Interior panels use the linear interpolant of g integrated exactly
/// against x^p. The first panel [0, x1] uses the linear interpolant when
/// `zero_panel` is [`ZeroPanel::Regular`] and a fitted power law otherwise.
pub fn weighted_integral(
    mesh: &Mesh,
    p: f64,
    values: &[f64],
    zero_panel: ZeroPanel,
) -> Result<f64> {
    let n = mesh.n_panels();
    assert_eq!(values.len(), n + 1, "values must be sampled at every node");
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "weighted_integral requires finite values".into(),
        ));
    }

    let mut total = first_panel(mesh, p, values, zero_panel)?;
    for i in 1..n {
        let (x0, x1) = (mesh.nodes[i], mesh.nodes[i + 1]);
        let (g0, g1) = (values[i], values[i + 1]);
        let slope = (g1 - g0) / (x1 - x0);
        let c0 = g0 - slope * x0;
        total += c0 * power_moment(x0, x1, p) + slope * power_moment(x0, x1, p + 1.0);
    }
    Ok(total)
}

fn first_panel(mesh: &Mesh, p: f64, values: &[f64], zero_panel: ZeroPanel) -> Result<f64> {
    let x1 = mesh.nodes[1];
    let (g0, g1) = (values[0], values[1]);
    match zero_panel {
        ZeroPanel::Regular => {
            if p <= -1.0 && g0 != 0.0 {
                return Err(Error::SingularIntegral(format!(
                    "x^{p} g with g(0) = {g0} is not integrable at 0"
                )));
            }
            let mut panel = 0.0;
            if g0 != 0.0 {
                // int_0^{x1} x^p dx, convergent because p > -1 here.
                panel += g0 * x1.powf(p + 1.0) / (p + 1.0);
            }
            let slope = (g1 - g0) / x1;
            if slope != 0.0 {
                if p <= -2.0 {
                    return Err(Error::SingularIntegral(format!(
                        "x^{p} times a linear interpolant diverges on the first panel"
                    )));
                }
                panel += slope * x1.powf(p + 2.0) / (p + 2.0);
            }
            Ok(panel)
        }
        ZeroPanel::VanishesAtZero => {
            if g1 == 0.0 {
                // g vanishes on the whole panel to grid resolution.
                return Ok(0.0);
            }
            let x2 = mesh.nodes[2];
            let g2 = values[2];
            // Local decay rate of g from the first two positive samples.
            let rate = if g1 > 0.0 && g2 > 0.0 {
                (g2 / g1).ln() / (x2 / x1).ln()
            } else {
                1.0
            };
            let rate = rate.max(0.0);
            if p + rate <= -1.0 {
                return Err(Error::SingularIntegral(format!(
                    "x^{p} g with observed decay g ~ x^{rate:.3} near 0 is not integrable"
                )));
            }
            // int_0^{x1} x^p g1 (x/x1)^rate dx
            Ok(g1 * x1.powf(p + 1.0) / (p + rate + 1.0))
        }
    }
}
