//! Shared numerical kernels: ridge regression and min-max scaling.

mod ridge;
mod scaler;

pub use ridge::{ridge_solve, solve_normal_equations, RidgeProblem};
pub use scaler::MinMaxScaler;
