use std::ops::{Add, AddAssign};

use serde::Serialize;

use crate::lattice::VelocitySet;

use super::shot::ShotEstimate;

/// Gate and measurement counters summed over all shots of a run.
///
/// The ensemble walker counts per shot, so its totals match what the same
/// number of independent circuit executions would have applied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GateStats {
    pub shots: u64,
    /// Time steps summed over shots (`T * S`).
    pub steps: u64,
    pub selection_rotations: u64,
    pub selection_measurements: u64,
    pub ucry_applications: u64,
    /// `2^(n_q)` per UCRY on `n_q + 1` qubits.
    pub cnot_equivalents: u64,
    pub pair_measurements: u64,
    pub ancilla_resets: u64,
    pub streaming_applications: u64,
    /// Single-axis cyclic shifts (diagonal directions need two).
    pub shift_permutations: u64,
    pub rest_steps: u64,
    pub final_measurements: u64,
}

impl GateStats {
    pub fn mid_circuit_measurements(&self) -> u64 {
        self.selection_measurements + self.pair_measurements
    }
}

impl AddAssign for GateStats {
    fn add_assign(&mut self, o: GateStats) {
        self.shots += o.shots;
        self.steps += o.steps;
        self.selection_rotations += o.selection_rotations;
        self.selection_measurements += o.selection_measurements;
        self.ucry_applications += o.ucry_applications;
        self.cnot_equivalents += o.cnot_equivalents;
        self.pair_measurements += o.pair_measurements;
        self.ancilla_resets += o.ancilla_resets;
        self.streaming_applications += o.streaming_applications;
        self.shift_permutations += o.shift_permutations;
        self.rest_steps += o.rest_steps;
        self.final_measurements += o.final_measurements;
    }
}

impl Add for GateStats {
    type Output = GateStats;

    fn add(mut self, o: GateStats) -> GateStats {
        self += o;
        self
    }
}

impl std::iter::Sum for GateStats {
    fn sum<I: Iterator<Item = GateStats>>(iter: I) -> GateStats {
        iter.fold(GateStats::default(), Add::add)
    }
}

/// Derived complexity figures for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    #[serde(skip)]
    pub stats: GateStats,
    /// UCRY applications per time step.
    pub ucry_fraction: f64,
    /// `1 - w_0`.
    pub expected_ucry_fraction: f64,
    /// Binomial standard error of `ucry_fraction` around the expectation.
    pub ucry_fraction_sigma: f64,
    pub rest_fraction: f64,
    pub cnots_per_ucry: u64,
    pub cnot_equivalents: u64,
    pub mid_circuit_measurements: u64,
    pub selection_measurements: u64,
    pub pair_measurements: u64,
    pub streaming_applications: u64,
    /// `ucry_applications + rest_steps == steps`.
    pub steps_balanced: bool,
    /// `cnot_equivalents == ucry_applications * 2^(n_q)`.
    pub cnots_consistent: bool,
}

pub fn gate_accounting(estimate: &ShotEstimate, set: &VelocitySet, n_q: usize) -> GateReport {
    let s = estimate.stats;
    let steps = s.steps.max(1) as f64;
    let expected = 1.0 - set.weight(0);
    let cnots_per_ucry = 1u64 << n_q;
    GateReport {
        stats: s,
        ucry_fraction: s.ucry_applications as f64 / steps,
        expected_ucry_fraction: expected,
        ucry_fraction_sigma: (expected * (1.0 - expected) / steps).sqrt(),
        rest_fraction: s.rest_steps as f64 / steps,
        cnots_per_ucry,
        cnot_equivalents: s.cnot_equivalents,
        mid_circuit_measurements: s.mid_circuit_measurements(),
        selection_measurements: s.selection_measurements,
        pair_measurements: s.pair_measurements,
        streaming_applications: s.streaming_applications,
        steps_balanced: s.ucry_applications + s.rest_steps == s.steps,
        cnots_consistent: s.cnot_equivalents == s.ucry_applications * cnots_per_ucry,
    }
}
