//! Rough differential equations driven by rough paths of level up to 3.

pub mod expr;
pub mod fields;
pub mod lie;
pub mod parser;
pub mod solve;
pub mod step;

pub use expr::{Expr, Func};
pub use fields::{lie_bracket, Field, LieWord, VectorFieldSet};
pub use parser::parse_expr;
pub use solve::{integral_residual, perturbed_driver, solve_flow, solve_path, Solution, SolveOptions};
pub use step::{lie_field, log_ode_step, milstein_step, RdeGenerator};
