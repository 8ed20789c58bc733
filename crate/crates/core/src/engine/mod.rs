//! The dynamic-circuit collision/streaming algorithm and its estimators.
//!
//! Every time step walks a chain of ancilla rotations and mid-circuit
//! measurements that picks either the rest population or one opposite
//! direction pair with probability `w_0` or `w_i + w_ī`. A picked pair is
//! collided with a uniformly controlled RY whose per-site angle encodes the
//! split `1/2 (1 ± c_i . u / cs2)`, the ancilla is measured once more to pick
//! the direction, and the grid register is cyclically shifted along it. After
//! the last step a full measurement of the register samples one site.
//!
//! Estimators built on that circuit:
//!
//! * [`estimate_density`] simulates every shot independently.
//! * [`run_ensemble`] walks the measurement tree once and splits the shot
//!   population multinomially at each measurement.
//! * [`enumerate_branches`] sums every outcome sequence with its exact
//!   probability; its result is the digital LBM density.
//! * [`run_hybrid`] replays a classically presampled [`InstructionArray`].

mod circuit;
mod collision;
mod ensemble;
mod hybrid;
mod oracle;
mod plan;
pub(crate) mod rng;
mod shot;
mod stats;

pub use circuit::QlbmCircuit;
pub use collision::{collision_angles, static_collision_circuit, CollisionAngles};
pub use ensemble::{run_ensemble, run_ensemble_with, EnsembleOptions};
pub use hybrid::{presample_instructions, run_hybrid, InstructionArray};
pub use oracle::{enumerate_branches, oracle_leaf_count, MAX_ORACLE_LEAVES};
pub use plan::{build_pair_selection_plan, Branch, PairSelectionPlan};
pub use shot::{estimate_density, run_shot, ShotEstimate};
pub use stats::{gate_accounting, GateReport, GateStats};
