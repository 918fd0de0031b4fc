//! Constrained unitary dynamics on projective Hilbert space.
//!
//! States live in `C^n` modulo phase. The [`constraint`] module keeps a set
//! of constraint functions constant along the Schrodinger flow either by
//! the symplectic (Dirac) method or the metric method; [`integrate`] runs
//! the resulting flows and [`models`] provides the built-in spin systems.
//!
//! Everything is generic over the scalar type; `f64` aliases are exported
//! at the crate root.

pub mod constraint;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod models;
pub mod scalar;

pub use error::{Error, Result, Singularity};
pub use num_complex::Complex;
pub use scalar::Real;

pub type HermitianOperator64 = geometry::HermitianOperator<f64>;
pub type PureState64 = geometry::PureState<f64>;
pub type TangentVector64 = geometry::TangentVector<f64>;
pub type Constraint64 = constraint::Constraint<f64>;
pub type ConstraintSet64 = constraint::ConstraintSet<f64>;
pub type Flow64 = constraint::Flow<f64>;
pub type Trajectory64 = integrate::Trajectory<f64>;
pub type IntegratorOptions64 = integrate::IntegratorOptions<f64>;
pub type BlochCoords64 = models::BlochCoords<f64>;
pub type TwoSphereCoords64 = models::TwoSphereCoords<f64>;
