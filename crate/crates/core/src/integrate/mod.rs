//! Time integration, fixed points and surface projection.
//!
//! The adaptive method is the Dormand-Prince 5(4) pair with local
//! extrapolation and the error norm
//! `sqrt(mean((e_i / (atol + rtol * max(|y_i|, |y'_i|)))^2))`; a step is
//! accepted when the norm is at most 1 and the next step is scaled by
//! `0.9 * err^(-1/5)` clamped to `[0.2, 10]`.

mod dynamics;
mod fixed_points;
mod projection;
mod solver;

pub use dynamics::{CoordinateDynamics, Dynamics, FieldValue, Reversed, StateDynamics};
pub use fixed_points::{
    classify, find_fixed_points, find_state_fixed_points, jacobian, FixedPoint, FixedPointOptions, Stability,
    StateFixedPoint, CLASSIFICATION_THRESHOLD, MERGE_RADIUS,
};
pub use projection::project_to_surface;
pub use solver::{
    integrate, integrate_with_targets, IntegrationFailure, IntegratorOptions, Method, Trajectory, CONDITION_LIMIT,
    INITIAL_RESIDUAL_TOLERANCE, MAX_RETRIES,
};
