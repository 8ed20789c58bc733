use rand::Rng;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QlbmError, Result};
use crate::lattice::{DensityField, VelocityField, VelocitySet};

use super::circuit::QlbmCircuit;
use super::plan::{build_pair_selection_plan, Branch};
use super::rng::{stream_rng, Domain};
use super::shot::{check_shots, ShotEstimate};
use super::stats::GateStats;

/// Presampled branch per `(step, shot)`: 0 is rest, `p + 1` is pair `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstructionArray {
    steps: usize,
    shots: u64,
    cells: Vec<u8>,
}

impl InstructionArray {
    /// Builds an array from raw codes laid out step-major.
    pub fn from_codes(steps: usize, shots: u64, cells: Vec<u8>) -> Result<Self> {
        if cells.len() as u64 != steps as u64 * shots {
            return Err(QlbmError::Usage(format!(
                "{} instruction cells for {steps} steps x {shots} shots",
                cells.len()
            )));
        }
        Ok(InstructionArray { steps, shots, cells })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn code(&self, step: usize, shot: u64) -> u8 {
        self.cells[step * self.shots as usize + shot as usize]
    }

    pub fn branch(&self, step: usize, shot: u64) -> Branch {
        match self.code(step, shot) {
            0 => Branch::Rest,
            c => Branch::Pair(usize::from(c) - 1),
        }
    }

    /// Number of cells holding each code.
    pub fn histogram(&self, codes: usize) -> Vec<u64> {
        let mut h = vec![0u64; codes];
        for &c in &self.cells {
            if let Some(slot) = h.get_mut(usize::from(c)) {
                *slot += 1;
            }
        }
        h
    }
}

/// Draws every branch classically, i.i.d. with probability `w_0` for rest and
/// `w_i + w_ī` per pair.
pub fn presample_instructions<R: Rng + ?Sized>(
    set: &VelocitySet,
    steps: usize,
    shots: u64,
    rng: &mut R,
) -> Result<InstructionArray> {
    if steps == 0 || shots == 0 {
        return Err(QlbmError::Usage(
            "instruction arrays need at least one step and one shot".into(),
        ));
    }
    let plan = build_pair_selection_plan(set)?;
    if plan.branches().len() > usize::from(u8::MAX) + 1 {
        return Err(QlbmError::Usage(format!("{} has too many pairs", set.label())));
    }
    let dist = WeightedIndex::new(plan.probabilities())
        .map_err(|e| QlbmError::Internal(format!("selection weights: {e}")))?;
    let cells = (0..steps as u64 * shots)
        .map(|_| dist.sample(rng) as u8)
        .collect();
    InstructionArray::from_codes(steps, shots, cells)
}

/// Replays column `s` of `instructions` for shot `s`. Only the within-pair
/// measurement stays quantum; no selection gates are applied.
pub fn run_hybrid(
    rho0: &DensityField,
    u: &VelocityField,
    set: &VelocitySet,
    instructions: &InstructionArray,
    seed: u64,
) -> Result<ShotEstimate> {
    check_shots(instructions.shots())?;
    let circuit = QlbmCircuit::new(rho0, u, set)?;
    let pairs = circuit.plan().pair_count();
    if let Some(bad) = instructions.cells.iter().find(|&&c| usize::from(c) > pairs) {
        return Err(QlbmError::Usage(format!(
            "instruction code {bad} is not valid for {} ({pairs} pairs)",
            set.label()
        )));
    }
    let steps = instructions.steps();
    let sites = circuit.grid().sites();
    let (counts, stats) = (0..instructions.shots())
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, Domain::Hybrid, s);
            let mut stats = GateStats {
                shots: 1,
                steps: steps as u64,
                ..GateStats::default()
            };
            let mut reg = circuit.initial_state().clone();
            for t in 0..steps {
                circuit.apply_branch(&mut reg, instructions.branch(t, s), &mut rng, &mut stats)?;
            }
            stats.final_measurements += 1;
            Ok((reg.sample_basis_state(&mut rng) >> reg.ancillas(), stats))
        })
        .try_fold(
            || (vec![0u64; sites], GateStats::default()),
            |(mut counts, acc), r: Result<(usize, GateStats)>| {
                let (k, s) = r?;
                counts[k] += 1;
                Ok::<_, QlbmError>((counts, acc + s))
            },
        )
        .try_reduce(
            || (vec![0u64; sites], GateStats::default()),
            |(mut a, sa), (b, sb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok((a, sa + sb))
            },
        )?;
    Ok(ShotEstimate::from_counts(
        *rho0.grid(),
        counts,
        steps,
        circuit.total_mass(),
        seed,
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_velocity_set, LatticeGrid, VelocitySetName};

    #[test]
    fn single_cell() {
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let mut rng = stream_rng(1, Domain::Instructions, 0);
        let a = presample_instructions(&set, 1, 1, &mut rng).unwrap();
        assert_eq!(a.histogram(2).iter().sum::<u64>(), 1);
    }

    #[test]
    fn all_rest_samples_initial_density() {
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let g = LatticeGrid::line(4).unwrap();
        let rho = DensityField::new(g, vec![0.5, 0.25, 0.125, 0.125]).unwrap();
        let u = VelocityField::uniform(g, [0.1, 0.0, 0.0]).unwrap();
        let n = 50_000u64;
        let ins = InstructionArray::from_codes(3, n, vec![0; 3 * n as usize]).unwrap();
        let est = run_hybrid(&rho, &u, &set, &ins, 9).unwrap();
        for (k, &c) in est.counts.iter().enumerate() {
            let p = rho.values()[k];
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() < 4.0 * sigma);
        }
        assert_eq!(est.stats.rest_steps, 3 * n);
        assert_eq!(est.stats.selection_measurements, 0);
    }

    #[test]
    fn invalid_code_rejected() {
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let g = LatticeGrid::line(4).unwrap();
        let rho = DensityField::constant(g, 1.0).unwrap();
        let ins = InstructionArray::from_codes(1, 2, vec![0, 2]).unwrap();
        let err = run_hybrid(&rho, &VelocityField::zero(g), &set, &ins, 0).unwrap_err();
        assert!(matches!(err, QlbmError::Usage(_)));
    }
}
