//! Classical lattice-Boltzmann reference solver.
//!
//! BGK collision with `dt / tau = 1`, so a time step is equilibrium
//! construction followed by periodic streaming and a zeroth-moment sum.

mod field;
mod grid;
mod solver;
mod velocity;

pub use field::{DensityField, VelocityField};
pub use grid::{Axis, LatticeGrid};
pub use solver::{digital_step, equilibrium, run_digital, stream_periodic};
pub(crate) use solver::rotate_axis;
pub use velocity::{make_velocity_set, VelocitySet, VelocitySetName, DEFAULT_CS2};
