use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::lattice::{DensityField, VelocityField, VelocitySet};
use crate::statevector::{QuantumRegister, ANCILLA};

use super::circuit::QlbmCircuit;
use super::rng::{binomial, stream_rng, Domain};
use super::shot::{check_shots, ShotEstimate};
use super::stats::GateStats;

/// Tuning knobs for [`run_ensemble_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    /// Registers the walker may hold at once before handing a node's
    /// population to per-shot simulation.
    pub max_live_nodes: usize,
    /// Shots per independently seeded tree.
    pub chunk_shots: u64,
    /// Populations below this size measure the grid register immediately and
    /// finish each shot on the resulting basis state. All remaining gates are
    /// grid-controlled or grid permutations, so this leaves the outcome
    /// distribution unchanged. `None` uses the number of grid sites; `Some(0)`
    /// keeps every node a full statevector.
    pub collapse_below: Option<u64>,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions {
            max_live_nodes: 1_000_000,
            chunk_shots: 1 << 20,
            collapse_below: None,
        }
    }
}

/// [`run_ensemble_with`] under default options.
pub fn run_ensemble(
    rho0: &DensityField,
    u: &VelocityField,
    set: &VelocitySet,
    steps: usize,
    shots: u64,
    seed: u64,
) -> Result<ShotEstimate> {
    run_ensemble_with(rho0, u, set, steps, shots, seed, EnsembleOptions::default())
}

/// Same output distribution as per-shot sampling, but every reached
/// measurement node is simulated once and its shot population is split
/// binomially between the outcomes.
pub fn run_ensemble_with(
    rho0: &DensityField,
    u: &VelocityField,
    set: &VelocitySet,
    steps: usize,
    shots: u64,
    seed: u64,
    options: EnsembleOptions,
) -> Result<ShotEstimate> {
    check_shots(shots)?;
    let circuit = QlbmCircuit::new(rho0, u, set)?;
    let chunk = options.chunk_shots.max(1);
    let chunks: Vec<(u64, u64)> = (0..shots.div_ceil(chunk))
        .map(|c| (c, chunk.min(shots - c * chunk)))
        .collect();
    let sites = circuit.grid().sites();
    let collapse_below = options.collapse_below.unwrap_or(sites as u64);
    let (counts, stats, nodes, fallback) = chunks
        .into_par_iter()
        .map(|(c, n)| {
            let mut walker = Walker::new(
                &circuit,
                stream_rng(seed, Domain::Ensemble, c),
                options.max_live_nodes,
                collapse_below,
            );
            walker.stats.shots += n;
            let root = circuit.initial_state().clone();
            walker.expand(root, steps, n)?;
            Ok((walker.counts, walker.stats, walker.nodes, walker.fallback))
        })
        .try_reduce(
            || (vec![0u64; sites], GateStats::default(), 0u64, 0u64),
            |(mut a, sa, na, fa), (b, sb, nb, fb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok((a, sa + sb, na + nb, fa + fb))
            },
        )?;
    let mut est = ShotEstimate::from_counts(
        *rho0.grid(),
        counts,
        steps,
        circuit.total_mass(),
        seed,
        stats,
    );
    est.tree_nodes = Some(nodes);
    est.fallback_shots = fallback;
    Ok(est)
}

struct Walker<'a> {
    circuit: &'a QlbmCircuit,
    rng: ChaCha8Rng,
    counts: Vec<u64>,
    stats: GateStats,
    nodes: u64,
    fallback: u64,
    live: usize,
    max_live: usize,
    collapse_below: u64,
    /// `destination[i][k]`: site reached from `k` by streaming along `c_i`.
    destination: Vec<Vec<usize>>,
    pool: Vec<QuantumRegister>,
}

impl<'a> Walker<'a> {
    fn new(circuit: &'a QlbmCircuit, rng: ChaCha8Rng, max_live: usize, collapse_below: u64) -> Self {
        let grid = *circuit.grid();
        let destination = circuit
            .set()
            .velocities()
            .iter()
            .map(|c| {
                (0..grid.sites())
                    .map(|k| {
                        let x = grid.coords(k);
                        let mut y = [0usize; 3];
                        for a in 0..3 {
                            let n = grid.extents()[a] as i64;
                            y[a] = (x[a] as i64 + i64::from(c[a])).rem_euclid(n) as usize;
                        }
                        grid.index(y)
                    })
                    .collect()
            })
            .collect();
        Walker {
            circuit,
            rng,
            counts: vec![0; grid.sites()],
            stats: GateStats::default(),
            nodes: 0,
            fallback: 0,
            live: 0,
            max_live,
            collapse_below,
            destination,
            pool: Vec::new(),
        }
    }

    fn copy_of(&mut self, reg: &QuantumRegister) -> QuantumRegister {
        match self.pool.pop() {
            Some(mut r) => {
                r.copy_from(reg);
                r
            }
            None => reg.clone(),
        }
    }

    /// `n` shots that share the state `reg` (ancilla reset) with `remaining`
    /// steps left.
    fn expand(&mut self, reg: QuantumRegister, remaining: usize, n: u64) -> Result<()> {
        if remaining == 0 {
            self.sample_leaf(&reg, n);
        } else if n < self.collapse_below {
            self.walk(&reg, remaining, n);
        } else if self.live + self.circuit.plan().pair_count() + 2 > self.max_live {
            self.per_shot(&reg, remaining, n)?;
        } else {
            self.live += 1;
            let result = self.branch(reg, remaining, n);
            self.live -= 1;
            return result;
        }
        self.pool.push(reg);
        Ok(())
    }

    fn branch(&mut self, mut reg: QuantumRegister, remaining: usize, n: u64) -> Result<()> {
        let circuit = self.circuit;
        let plan = circuit.plan();
        let mut pops = vec![0u64; plan.branches().len()];
        let mut left = n;
        for (m, &theta) in plan.angles().iter().enumerate() {
            reg.apply_ry(ANCILLA, theta)?;
            let p0 = reg.probability(ANCILLA, 0)?;
            let p1 = reg.probability(ANCILLA, 1)?;
            let n0 = binomial(&mut self.rng, left, p0 / (p0 + p1));
            self.stats.selection_rotations += left;
            self.stats.selection_measurements += left;
            self.stats.ancilla_resets += left;
            pops[m] = n0;
            left -= n0;
            reg.collapse(ANCILLA, u8::from(left > 0))?;
            reg.reset_qubit(ANCILLA)?;
            if left == 0 {
                break;
            }
        }
        *pops.last_mut().expect("rest entry") += left;
        self.stats.steps += n;
        self.stats.rest_steps += pops[0];

        for (p, &np) in pops.iter().enumerate().skip(1) {
            if np == 0 {
                continue;
            }
            let pair = p - 1;
            let mut child = self.copy_of(&reg);
            circuit.collide(&mut child, pair)?;
            let p0 = child.probability(ANCILLA, 0)?;
            let p1 = child.probability(ANCILLA, 1)?;
            let n0 = binomial(&mut self.rng, np, p0 / (p0 + p1));
            let n1 = np - n0;
            self.stats.ucry_applications += np;
            self.stats.cnot_equivalents += np * circuit.cnots_per_ucry();
            self.stats.pair_measurements += np;
            self.stats.ancilla_resets += np;
            self.stats.streaming_applications += np;
            if n0 > 0 && n1 > 0 {
                let other = self.copy_of(&child);
                self.descend(child, pair, 0, n0, remaining)?;
                self.descend(other, pair, 1, n1, remaining)?;
            } else {
                self.descend(child, pair, u8::from(n0 == 0), np, remaining)?;
            }
        }

        if pops[0] > 0 {
            self.nodes += 1;
            self.expand(reg, remaining - 1, pops[0])
        } else {
            self.pool.push(reg);
            Ok(())
        }
    }

    /// Collapses a post-collision state onto `bit`, streams it and expands
    /// the result.
    fn descend(
        &mut self,
        mut reg: QuantumRegister,
        pair: usize,
        bit: u8,
        pop: u64,
        remaining: usize,
    ) -> Result<()> {
        reg.collapse(ANCILLA, bit)?;
        reg.reset_qubit(ANCILLA)?;
        let shifts = self.circuit.stream(&mut reg, self.circuit.direction(pair, bit))?;
        self.stats.shift_permutations += pop * shifts;
        self.nodes += 1;
        self.expand(reg, remaining - 1, pop)
    }

    fn sample_leaf(&mut self, reg: &QuantumRegister, n: u64) {
        self.stats.final_measurements += n;
        if n == 1 {
            let k = reg.sample_basis_state(&mut self.rng) >> reg.ancillas();
            self.counts[k] += 1;
            return;
        }
        let probs = reg.grid_probabilities();
        if n <= 64 {
            let mut cdf = probs;
            let mut acc = 0.0;
            for p in cdf.iter_mut() {
                acc += *p;
                *p = acc;
            }
            for _ in 0..n {
                let t = self.rng.random::<f64>() * acc;
                let k = cdf.partition_point(|&c| c <= t).min(cdf.len() - 1);
                self.counts[k] += 1;
            }
            return;
        }
        let mut mass: f64 = probs.iter().sum();
        let mut left = n;
        let last = probs.len() - 1;
        for (k, &p) in probs.iter().enumerate() {
            if left == 0 {
                break;
            }
            let c = if k == last || p >= mass {
                left
            } else {
                binomial(&mut self.rng, left, p / mass)
            };
            self.counts[k] += c;
            left -= c;
            mass -= p;
        }
    }

    fn per_shot(&mut self, reg: &QuantumRegister, remaining: usize, n: u64) -> Result<()> {
        self.fallback += n;
        self.stats.steps += n * remaining as u64;
        let mut buf = self.copy_of(reg);
        let mut records = Vec::new();
        for _ in 0..n {
            buf.copy_from(reg);
            let k = self.circuit.finish_shot(
                &mut buf,
                remaining,
                &mut self.rng,
                &mut self.stats,
                &mut records,
            )?;
            self.counts[k] += 1;
        }
        self.pool.push(buf);
        Ok(())
    }

    /// Measures the grid register of each shot now and applies the remaining
    /// steps to the one-hot state `|k>|0>`, where every measurement
    /// probability reduces to the stored per-site split.
    fn walk(&mut self, reg: &QuantumRegister, remaining: usize, n: u64) {
        let circuit = self.circuit;
        let plan = circuit.plan();
        let stop = plan.stop_probabilities();
        let stages = stop.len() as u64;
        let cnots = circuit.cnots_per_ucry();
        let pairs = circuit.set().pairs();
        self.stats.steps += n * remaining as u64;
        self.stats.final_measurements += n;
        for _ in 0..n {
            let mut k = reg.sample_basis_state(&mut self.rng) >> reg.ancillas();
            for _ in 0..remaining {
                let mut entry = stop.len();
                for (m, &q) in stop.iter().enumerate() {
                    if self.rng.random::<f64>() < q {
                        entry = m;
                        break;
                    }
                }
                let used = if entry < stop.len() { entry as u64 + 1 } else { stages };
                self.stats.selection_rotations += used;
                self.stats.selection_measurements += used;
                self.stats.ancilla_resets += used;
                if entry == 0 {
                    self.stats.rest_steps += 1;
                    continue;
                }
                let pair = entry - 1;
                let (c, _) = circuit.collisions()[pair].half_angles()[k];
                let bit = u8::from(self.rng.random::<f64>() >= c * c);
                let dir = if bit == 0 { pairs[pair].0 } else { pairs[pair].1 };
                self.stats.ucry_applications += 1;
                self.stats.cnot_equivalents += cnots;
                self.stats.pair_measurements += 1;
                self.stats.ancilla_resets += 1;
                self.stats.streaming_applications += 1;
                self.stats.shift_permutations += circuit
                    .set()
                    .velocity(dir)
                    .iter()
                    .filter(|&&v| v != 0)
                    .count() as u64;
                k = self.destination[dir][k];
            }
            self.counts[k] += 1;
        }
    }
}
