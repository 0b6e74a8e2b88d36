//! Numerical laboratory for a coupled pair of weakly degenerate parabolic
//! equations on (0, 1) with one localized control force.
//!
//! The crate discretizes the system u_t = (x^a1 u_x)_x - b11 u - b12 v + h,
//! v_t = (x^a2 v_x)_x - b22 v - b21 u on a graded mesh, evaluates both sides
//! of the weighted inequalities that drive its controllability theory
//! (Hardy-Poincare, Caccioppoli, the weighted estimates in e^{2 s varphi}),
//! and computes approximate null controls by penalized HUM on the exact
//! discrete adjoint.

// Negated range guards like !(x > 0.0) also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops run over several aligned arrays at once.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod evolution;
pub mod hum;
pub mod inequality;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod weights;

pub use error::{Error, Result};
pub use evolution::{
    energy_report, gradient_energy, solve_adjoint_backward, solve_adjoint_forward, solve_forward,
    time_grid, EnergyReport, Levels, SpaceTimeField,
};
pub use hum::{
    gramian_apply, gramian_quadratic_form, hum_solve, hum_solve_dense, observability_estimate,
    observability_from_basis, HumResult, ObservabilityEstimate, ObservabilityMethod, PairState,
};
pub use inequality::{
    caccioppoli_check, carleman_coupled, carleman_single, geometric_grid, hardy_ratio,
    lemma_absorption_check, manufacture_solution, sweep_ratio, AbsorptionTriple, CarlemanSpec,
    CoupledVariant, HardyCheck, Profile, RatioEntry, RatioReport, ScalarField, SingleVariant,
};
pub use mesh::{weighted_integral, Mesh, ZeroPanel};
pub use operators::{
    assemble_coupled, assemble_diffusion, CoefficientSpec, CoupledOperator, DiscreteOperator,
    Interval, SystemConfig,
};
pub use weights::{
    admissible_lambda_interval, build_sigma, check_phi_ordering, exp_clamped,
    theta_bound_constants, validate_params, weight_comparison_constants, AdmissibilityReport,
    ComparisonConstants, OrderingReport, SigmaFunction, ThetaBounds, WeightParams, WeightValues,
};
