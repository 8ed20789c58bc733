//! Initial conditions, velocity fields, error metrics and runnable cases.

mod case;
mod config;
mod initial;
mod metrics;
mod velocity;

pub use case::{builtin_case, builtin_cases, run_case, CaseReport};
pub use config::{CaseConfig, CaseInputs, InitialCondition, Mode, VelocitySpec};
pub use initial::{boxcar_ic, boxcar_with, uniform_ic};
pub use metrics::{chi_square_homogeneity, loglog_slope, mape, median, relative_error, ChiSquareTest};
pub use velocity::{double_vortex, linear_velocity, linear_velocity_with, CoordinateMap, DoubleVortex};
