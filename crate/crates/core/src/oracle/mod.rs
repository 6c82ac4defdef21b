//! Independent checks of the exact effect formulas.
//!
//! [`mediation`] evaluates effects straight from the mediation-formula
//! sums over the two mediator levels and depends on nothing but the model
//! types. [`identity`] checks the closed forms of the A-term on the
//! diagonal, and [`finite_diff`] supplies numerical gradients for the
//! delta-method derivatives.

pub mod finite_diff;
pub mod identity;
pub mod mediation;

pub use finite_diff::{finite_diff, StepPolicy};
pub use identity::{g_y_check, GyCheck};
pub use mediation::{mediation_formula_effects, tables_from_params, ProbabilityTables};
