//! Monotonicity-constrained equation discovery over expression graphs, plus
//! closed-form corona emission models and line-level propagation.

pub mod expr;
pub mod dataset;
pub mod objective;
pub mod evolve;
pub mod float_serde;
pub mod models;
pub mod propagation;
