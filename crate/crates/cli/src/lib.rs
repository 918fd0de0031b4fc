//! Command-line and HTTP front end for the `qconstrain` models.

pub mod config;
pub mod docs;
pub mod ops;
pub mod service;
