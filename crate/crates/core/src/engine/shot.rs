use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QlbmError, Result};
use crate::lattice::{DensityField, LatticeGrid, VelocityField, VelocitySet};

use super::circuit::QlbmCircuit;
use super::rng::{stream_rng, Domain};
use super::stats::GateStats;

const BLOCK_SHOTS: u64 = 4096;

/// Site histogram of a sampled run and the density it implies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShotEstimate {
    pub counts: Vec<u64>,
    pub shots: u64,
    pub steps: usize,
    /// `counts / shots * sum(rho0)`.
    #[serde(skip)]
    pub estimate: DensityField,
    pub seed: u64,
    pub stats: GateStats,
    /// Distinct post-step states simulated by the ensemble walker.
    pub tree_nodes: Option<u64>,
    /// Shots the ensemble walker handed to per-shot simulation because the
    /// live-node bound was reached.
    pub fallback_shots: u64,
}

impl ShotEstimate {
    pub(crate) fn from_counts(
        grid: LatticeGrid,
        counts: Vec<u64>,
        steps: usize,
        mass: f64,
        seed: u64,
        stats: GateStats,
    ) -> Self {
        let shots: u64 = counts.iter().sum();
        let scale = mass / shots as f64;
        let values = counts.iter().map(|&c| c as f64 * scale).collect();
        ShotEstimate {
            counts,
            shots,
            steps,
            estimate: DensityField::from_raw(grid, values),
            seed,
            stats,
            tree_nodes: None,
            fallback_shots: 0,
        }
    }
}

pub(crate) fn check_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(QlbmError::Usage("shots must be at least 1".into()));
    }
    Ok(())
}

/// Runs one complete shot and returns the sampled grid index with the gates
/// it used.
pub fn run_shot<R: Rng + ?Sized>(
    rho0: &DensityField,
    u: &VelocityField,
    set: &VelocitySet,
    steps: usize,
    rng: &mut R,
) -> Result<(usize, GateStats)> {
    let circuit = QlbmCircuit::new(rho0, u, set)?;
    let mut stats = GateStats::default();
    let k = circuit.run_shot(steps, rng, &mut stats)?;
    Ok((k, stats))
}

/// Simulates `shots` independent circuit executions. Shot `s` draws from
/// its own counter-based stream, so the result depends only on `seed`.
pub fn estimate_density(
    rho0: &DensityField,
    u: &VelocityField,
    set: &VelocitySet,
    steps: usize,
    shots: u64,
    seed: u64,
) -> Result<ShotEstimate> {
    check_shots(shots)?;
    let circuit = QlbmCircuit::new(rho0, u, set)?;
    let (counts, stats) = sample_shots(&circuit, steps, 0..shots, seed, Domain::Shot)?;
    Ok(ShotEstimate::from_counts(
        *rho0.grid(),
        counts,
        steps,
        circuit.total_mass(),
        seed,
        stats,
    ))
}

/// Per-shot simulation of the shot indices in `range`, parallel over blocks.
pub(crate) fn sample_shots(
    circuit: &QlbmCircuit,
    steps: usize,
    range: std::ops::Range<u64>,
    seed: u64,
    domain: Domain,
) -> Result<(Vec<u64>, GateStats)> {
    let sites = circuit.grid().sites();
    let blocks: Vec<_> = (range.start..range.end)
        .step_by(BLOCK_SHOTS as usize)
        .map(|b| b..(b + BLOCK_SHOTS).min(range.end))
        .collect();
    blocks
        .into_par_iter()
        .map(|block| {
            let mut counts = vec![0u64; sites];
            let mut stats = GateStats::default();
            let mut reg = circuit.initial_state().clone();
            let mut records = Vec::new();
            for s in block {
                let mut rng = stream_rng(seed, domain, s);
                reg.copy_from(circuit.initial_state());
                stats.shots += 1;
                stats.steps += steps as u64;
                let k = circuit.finish_shot(&mut reg, steps, &mut rng, &mut stats, &mut records)?;
                counts[k] += 1;
            }
            Ok((counts, stats))
        })
        .try_reduce(
            || (vec![0u64; sites], GateStats::default()),
            |(mut a, sa), (b, sb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok((a, sa + sb))
            },
        )
}
