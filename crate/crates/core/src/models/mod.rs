//! Built-in physical systems.

mod example1;
mod example2;
pub mod registry;
mod separability;
mod spin;

pub use example1::{example1_field, example1_operator_flow, Example1Params, Example1Velocity};
pub use example2::{
    example2_constraint_value, example2_constraints, example2_field, example2_hamiltonian, example2_metric_flow,
};
pub use separability::{concurrence_surrogate, separability_constraints, separability_constraints_fd};
pub use spin::{
    bloch_angles, bloch_state, bloch_state_at, bloch_vector, bloch_vector_rate, bloch_velocity, heisenberg_hamiltonian,
    heisenberg_with_coupling, identity, kron, pauli, product_state, reduced_bloch_rates, reduced_bloch_vectors,
    wrap_angle, Axis, BlochCoords, TwoSphereCoords,
};
