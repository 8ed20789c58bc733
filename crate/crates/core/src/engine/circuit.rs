use rand::Rng;

use crate::error::{QlbmError, Result};
use crate::lattice::{Axis, DensityField, LatticeGrid, VelocityField, VelocitySet};
use crate::statevector::{MeasurementRecord, QuantumRegister, ANCILLA};

use super::collision::{collision_angles, CollisionAngles};
use super::plan::{build_pair_selection_plan, Branch, PairSelectionPlan};
use super::stats::GateStats;

/// Everything a shot needs, prepared once per case: the encoded initial
/// state, the selection plan and the per-pair collision angles.
#[derive(Debug, Clone)]
pub struct QlbmCircuit {
    set: VelocitySet,
    plan: PairSelectionPlan,
    collisions: Vec<CollisionAngles>,
    initial: QuantumRegister,
    mass: f64,
}

impl QlbmCircuit {
    pub fn new(rho0: &DensityField, u: &VelocityField, set: &VelocitySet) -> Result<Self> {
        if rho0.grid() != u.grid() {
            return Err(QlbmError::Config(format!(
                "density grid {:?} and velocity grid {:?} differ",
                rho0.grid().extents(),
                u.grid().extents()
            )));
        }
        u.check_constraint(set)?;
        let plan = build_pair_selection_plan(set)?;
        let collisions = (0..set.pairs().len())
            .map(|p| collision_angles(p, u, set))
            .collect::<Result<Vec<_>>>()?;
        let initial = QuantumRegister::amplitude_encode(rho0)?;
        Ok(QlbmCircuit {
            set: set.clone(),
            plan,
            collisions,
            initial,
            mass: rho0.total_mass(),
        })
    }

    pub fn set(&self) -> &VelocitySet {
        &self.set
    }

    pub fn plan(&self) -> &PairSelectionPlan {
        &self.plan
    }

    pub fn collisions(&self) -> &[CollisionAngles] {
        &self.collisions
    }

    pub fn initial_state(&self) -> &QuantumRegister {
        &self.initial
    }

    pub fn grid(&self) -> &LatticeGrid {
        self.initial.grid()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass
    }

    /// CNOT-equivalents of one UCRY on `n_q + 1` qubits: `2^(n_q)`.
    pub fn cnots_per_ucry(&self) -> u64 {
        1u64 << self.grid().qubits()
    }

    pub(crate) fn collide(&self, reg: &mut QuantumRegister, pair: usize) -> Result<()> {
        reg.apply_ucry_half_angles(self.collisions[pair].half_angles())
    }

    /// Direction picked by the within-pair measurement outcome.
    pub(crate) fn direction(&self, pair: usize, outcome: u8) -> usize {
        let c = &self.collisions[pair];
        if outcome == 0 {
            c.direction()
        } else {
            c.opposite()
        }
    }

    /// Streams the grid register along `c_direction`, x first. Returns the
    /// number of axis permutations applied.
    pub(crate) fn stream(&self, reg: &mut QuantumRegister, direction: usize) -> Result<u64> {
        let c = self.set.velocity(direction);
        let mut shifts = 0;
        for axis in Axis::ALL {
            let component = c[axis.index()];
            if component != 0 {
                reg.apply_cyclic_shift(axis, i64::from(component))?;
                shifts += 1;
            }
        }
        Ok(shifts)
    }

    /// Collision plus within-pair measurement plus conditional streaming.
    /// Returns the direction that was streamed.
    pub fn pair_step<R: Rng + ?Sized>(
        &self,
        reg: &mut QuantumRegister,
        pair: usize,
        rng: &mut R,
        stats: &mut GateStats,
    ) -> Result<usize> {
        self.collide(reg, pair)?;
        stats.ucry_applications += 1;
        stats.cnot_equivalents += self.cnots_per_ucry();
        let (bit, _) = reg.measure_qubit(ANCILLA, rng)?;
        reg.reset_qubit(ANCILLA)?;
        stats.pair_measurements += 1;
        stats.ancilla_resets += 1;
        let direction = self.direction(pair, bit);
        stats.shift_permutations += self.stream(reg, direction)?;
        stats.streaming_applications += 1;
        Ok(direction)
    }

    /// Applies one already chosen branch.
    pub fn apply_branch<R: Rng + ?Sized>(
        &self,
        reg: &mut QuantumRegister,
        branch: Branch,
        rng: &mut R,
        stats: &mut GateStats,
    ) -> Result<()> {
        match branch {
            Branch::Rest => {
                stats.rest_steps += 1;
                Ok(())
            }
            Branch::Pair(p) => self.pair_step(reg, p, rng, stats).map(|_| ()),
        }
    }

    /// One full dynamic time step: selection chain, then the chosen branch.
    pub fn dynamic_step<R: Rng + ?Sized>(
        &self,
        reg: &mut QuantumRegister,
        rng: &mut R,
        stats: &mut GateStats,
        records: &mut Vec<MeasurementRecord>,
    ) -> Result<Branch> {
        let before = records.len();
        let branch = self.plan.execute(reg, rng, records)?;
        let stages = (records.len() - before) as u64;
        stats.selection_rotations += stages;
        stats.selection_measurements += stages;
        stats.ancilla_resets += stages;
        self.apply_branch(reg, branch, rng, stats)?;
        Ok(branch)
    }

    /// Runs `steps` dynamic steps on `reg` and samples the final grid site.
    pub(crate) fn finish_shot<R: Rng + ?Sized>(
        &self,
        reg: &mut QuantumRegister,
        steps: usize,
        rng: &mut R,
        stats: &mut GateStats,
        records: &mut Vec<MeasurementRecord>,
    ) -> Result<usize> {
        for _ in 0..steps {
            records.clear();
            self.dynamic_step(reg, rng, stats, records)?;
        }
        stats.final_measurements += 1;
        Ok(reg.sample_basis_state(rng) >> reg.ancillas())
    }

    /// One complete shot from the initial state. Returns the sampled site.
    pub fn run_shot<R: Rng + ?Sized>(
        &self,
        steps: usize,
        rng: &mut R,
        stats: &mut GateStats,
    ) -> Result<usize> {
        let mut reg = self.initial.clone();
        let mut records = Vec::with_capacity(self.plan.angles().len());
        stats.shots += 1;
        stats.steps += steps as u64;
        self.finish_shot(&mut reg, steps, rng, stats, &mut records)
    }
}
