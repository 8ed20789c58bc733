use crate::error::{QlbmError, Result};
use crate::lattice::{DensityField, VelocityField, VelocitySet};
use crate::statevector::{QuantumRegister, ANCILLA};

use super::circuit::QlbmCircuit;

/// Largest number of outcome sequences [`enumerate_branches`] will visit.
pub const MAX_ORACLE_LEAVES: u64 = 1_000_000;

/// Distinct outcome sequences over `steps` steps: each step ends at rest or
/// in one of the `q - 1` moving directions, so `q^T`. `None` on overflow.
pub fn oracle_leaf_count(set: &VelocitySet, steps: usize) -> Option<u64> {
    let q = set.q() as u64;
    (0..steps).try_fold(1u64, |acc, _| acc.checked_mul(q))
}

/// Exact expected density of the dynamic circuit: every measurement outcome
/// sequence weighted by its Born probability, times the initial mass.
pub fn enumerate_branches(
    rho0: &DensityField,
    u: &VelocityField,
    set: &VelocitySet,
    steps: usize,
) -> Result<DensityField> {
    match oracle_leaf_count(set, steps) {
        Some(n) if n <= MAX_ORACLE_LEAVES => {}
        _ => {
            return Err(QlbmError::Usage(format!(
                "exact enumeration of {} over {steps} steps exceeds {MAX_ORACLE_LEAVES} \
                 outcome sequences; reduce the number of steps",
                set.label()
            )))
        }
    }
    let circuit = QlbmCircuit::new(rho0, u, set)?;
    let mut acc = vec![0.0; rho0.len()];
    visit(&circuit, circuit.initial_state().clone(), steps, 1.0, &mut acc)?;
    let mass = circuit.total_mass();
    let values = acc.into_iter().map(|p| p * mass).collect();
    Ok(DensityField::from_raw(*rho0.grid(), values))
}

fn visit(
    circuit: &QlbmCircuit,
    mut reg: QuantumRegister,
    remaining: usize,
    weight: f64,
    acc: &mut [f64],
) -> Result<()> {
    if remaining == 0 {
        for (a, p) in acc.iter_mut().zip(reg.grid_probabilities()) {
            *a += weight * p;
        }
        return Ok(());
    }
    let plan = circuit.plan();
    let mut reach = 1.0;
    let mut entries = Vec::with_capacity(plan.branches().len());
    for (m, &theta) in plan.angles().iter().enumerate() {
        reg.apply_ry(ANCILLA, theta)?;
        let p0 = reg.probability(ANCILLA, 0)?;
        let p1 = reg.probability(ANCILLA, 1)?;
        let stop = p0 / (p0 + p1);
        entries.push((m, reach * stop));
        reach *= 1.0 - stop;
        reg.collapse(ANCILLA, u8::from(p1 > 0.0))?;
        reg.reset_qubit(ANCILLA)?;
    }
    entries.push((plan.branches().len() - 1, reach));

    for &(m, p) in entries.iter().filter(|&&(m, _)| m > 0) {
        if p <= 0.0 {
            continue;
        }
        let pair = m - 1;
        let mut post = reg.clone();
        circuit.collide(&mut post, pair)?;
        for bit in [0u8, 1] {
            let q = post.probability(ANCILLA, bit)? / post.norm_sqr();
            if q <= 0.0 {
                continue;
            }
            let mut child = post.clone();
            child.collapse(ANCILLA, bit)?;
            child.reset_qubit(ANCILLA)?;
            circuit.stream(&mut child, circuit.direction(pair, bit))?;
            visit(circuit, child, remaining - 1, weight * p * q, acc)?;
        }
    }
    let rest = entries[0].1;
    if rest > 0.0 {
        visit(circuit, reg, remaining - 1, weight * rest, acc)?;
    }
    Ok(())
}
