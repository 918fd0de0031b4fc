//! Constraint abstractions, charts and the symplectic and metric engines.

mod chart;
mod constraint;
mod engine;
mod fd;
mod tilde;

pub use chart::{AffineChart, BlochChart, Chart, ChartFrame};
pub use constraint::{ChartFunction, ChartGradientFn, ChartValueFn, Constraint, ConstraintKind, ConstraintSet};
pub use engine::{
    constraint_derivative, m_matrix, metric_constrained_field, metric_multipliers, omega_matrix,
    symplectic_constrained_field, symplectic_multipliers, Flow, FlowVelocity, MultiplierSolution,
    SINGULARITY_TOLERANCE,
};
pub use fd::{finite_difference_gradient, DEFAULT_FD_STEP};
pub use tilde::{constraint_gradients, omega_tilde, omega_tilde_correction};
