use rand::Rng;
use serde::Serialize;

use crate::error::{QlbmError, Result};
use crate::lattice::VelocitySet;
use crate::statevector::{MeasurementRecord, QuantumRegister, ANCILLA};

/// What one time step computes: the rest population or an opposite pair
/// (index into [`VelocitySet::pairs`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    Rest,
    Pair(usize),
}

/// Chain of ancilla rotations whose measurement outcomes select a branch with
/// probability `w_0` for rest and `w_i + w_ī` for each pair.
///
/// Stage `m` rotates the freshly reset ancilla by `angles[m]`; reading 0 stops
/// at entry `m`, reading 1 moves on. After the last stage a 1 selects the
/// final pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSelectionPlan {
    branches: Vec<Branch>,
    probabilities: Vec<f64>,
    angles: Vec<f64>,
    stop_probabilities: Vec<f64>,
}

pub fn build_pair_selection_plan(set: &VelocitySet) -> Result<PairSelectionPlan> {
    let mut branches = vec![Branch::Rest];
    let mut probabilities = vec![set.weight(0)];
    for (p, &(i, j)) in set.pairs().iter().enumerate() {
        branches.push(Branch::Pair(p));
        probabilities.push(set.weight(i) + set.weight(j));
    }

    let mut angles = Vec::with_capacity(set.pairs().len());
    let mut stop_probabilities = Vec::with_capacity(set.pairs().len());
    let mut residual = 1.0;
    for &p in &probabilities[..probabilities.len() - 1] {
        if residual <= 0.0 {
            return Err(QlbmError::Internal(format!(
                "selection residual underflow for {}",
                set.label()
            )));
        }
        let ratio = p / residual;
        if ratio > 1.0 + 1e-12 {
            return Err(QlbmError::Internal(format!(
                "selection probability {p} exceeds residual {residual}"
            )));
        }
        let ratio = ratio.clamp(0.0, 1.0);
        angles.push(2.0 * ratio.sqrt().acos());
        stop_probabilities.push(ratio);
        residual -= p;
    }

    Ok(PairSelectionPlan {
        branches,
        probabilities,
        angles,
        stop_probabilities,
    })
}

impl PairSelectionPlan {
    /// Branch list: entry 0 is rest, entries `1..=P` are the pairs.
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Unconditional probability of each entry.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// `cos^2(angle / 2)`: probability of stopping at a stage given the chain
    /// reached it.
    pub fn stop_probabilities(&self) -> &[f64] {
        &self.stop_probabilities
    }

    pub fn pair_count(&self) -> usize {
        self.branches.len() - 1
    }

    pub fn entry(&self, m: usize) -> Branch {
        self.branches[m]
    }

    /// Maps an outcome string `(1, ..., 1, 0)` or the all-ones string of full
    /// length to its branch.
    pub fn decode(&self, outcomes: &[u8]) -> Option<Branch> {
        if self.angles.is_empty() {
            return outcomes.is_empty().then_some(Branch::Rest);
        }
        let (last, prefix) = outcomes.split_last()?;
        if prefix.len() >= self.angles.len() || prefix.iter().any(|&b| b != 1) {
            return None;
        }
        match last {
            0 => Some(self.branches[prefix.len()]),
            1 if outcomes.len() == self.angles.len() => self.branches.last().copied(),
            _ => None,
        }
    }

    /// Runs the chain on `reg` (ancilla must be `|0>`), leaving the ancilla
    /// reset. Measurement records are appended to `records`.
    pub fn execute<R: Rng + ?Sized>(
        &self,
        reg: &mut QuantumRegister,
        rng: &mut R,
        records: &mut Vec<MeasurementRecord>,
    ) -> Result<Branch> {
        for (m, &theta) in self.angles.iter().enumerate() {
            reg.apply_ry(ANCILLA, theta)?;
            let (bit, record) = reg.measure_qubit(ANCILLA, rng)?;
            reg.reset_qubit(ANCILLA)?;
            records.push(record);
            if bit == 0 {
                return Ok(self.branches[m]);
            }
        }
        Ok(*self.branches.last().expect("rest entry always present"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_velocity_set, VelocitySetName};

    fn angle(p: f64) -> f64 {
        2.0 * p.sqrt().acos()
    }

    #[test]
    fn d1q3_single_stage() {
        let plan = build_pair_selection_plan(&make_velocity_set(VelocitySetName::D1Q3)).unwrap();
        assert_eq!(plan.angles().len(), 1);
        assert!((plan.angles()[0] - angle(2.0 / 3.0)).abs() < 1e-15);
        assert!((plan.probabilities()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((plan.probabilities()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(plan.decode(&[0]), Some(Branch::Rest));
        assert_eq!(plan.decode(&[1]), Some(Branch::Pair(0)));
    }

    #[test]
    fn d2q9_chain_angles() {
        let plan = build_pair_selection_plan(&make_velocity_set(VelocitySetName::D2Q9)).unwrap();
        let expected = [angle(4.0 / 9.0), angle(2.0 / 5.0), angle(2.0 / 3.0), angle(0.5)];
        for (a, e) in plan.angles().iter().zip(expected) {
            assert!((a - e).abs() < 1e-12, "{a} vs {e}");
        }
        // 5/9 * 2/5
        assert!((plan.probabilities()[1] - 2.0 / 9.0).abs() < 1e-15);
        let p13 = (1.0 - plan.stop_probabilities()[0]) * plan.stop_probabilities()[1];
        assert!((p13 - 2.0 / 9.0).abs() < 1e-15);
        let total: f64 = plan.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);

        assert_eq!(plan.decode(&[1, 0]), Some(Branch::Pair(0)));
        assert_eq!(plan.decode(&[1, 1, 1, 0]), Some(Branch::Pair(2)));
        assert_eq!(plan.decode(&[1, 1, 1, 1]), Some(Branch::Pair(3)));
        assert_eq!(plan.decode(&[1, 0, 0]), None);
        assert_eq!(plan.decode(&[]), None);
    }

    #[test]
    fn rest_only_set_has_no_stages() {
        let set = VelocitySet::custom(1, vec![[0, 0, 0]], vec![1.0], 1.0 / 3.0).unwrap();
        let plan = build_pair_selection_plan(&set).unwrap();
        assert_eq!(plan.pair_count(), 0);
        assert!(plan.angles().is_empty());
        assert_eq!(plan.decode(&[]), Some(Branch::Rest));
    }
}
