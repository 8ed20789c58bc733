//! Real-amplitude statevector simulator with exactly the operations the
//! dynamic-circuit collision needs.
//!
//! Qubit order: the ancilla register occupies the low bits (qubit 0 is the
//! direction ancilla) and the grid index occupies the bits above it, so a
//! basis index is `(k << ancillas) | a` for grid site `k`.

use rand::Rng;
use serde::Serialize;

use crate::error::{QlbmError, Result};
use crate::lattice::{rotate_axis, Axis, DensityField, LatticeGrid};

/// The direction ancilla.
pub const ANCILLA: usize = 0;

/// Below this the state is treated as numerically gone.
const DEGENERATE_NORM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub qubit: usize,
    pub outcome: u8,
    /// Born probability of `outcome` just before the measurement.
    pub probability: f64,
}

impl MeasurementRecord {
    /// Pre-measurement probability of reading 0, whatever was read.
    pub fn probability_of_zero(&self) -> f64 {
        if self.outcome == 0 {
            self.probability
        } else {
            1.0 - self.probability
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRegister {
    grid: LatticeGrid,
    ancillas: usize,
    amps: Vec<f64>,
    // qubits currently in a classically known basis state, and their values
    known: u64,
    values: u64,
}

impl QuantumRegister {
    /// `|0...0>` on `grid` plus `ancillas` low-order qubits.
    pub fn zero(grid: LatticeGrid, ancillas: usize) -> Result<Self> {
        let n = grid.qubits() + ancillas;
        if n > 32 {
            return Err(QlbmError::Usage(format!("{n} qubits exceed the simulator limit of 32")));
        }
        let mut amps = vec![0.0; 1usize << n];
        amps[0] = 1.0;
        Ok(QuantumRegister {
            grid,
            ancillas,
            amps,
            known: mask_below(n),
            values: 0,
        })
    }

    /// Amplitude encoding `sum_k sqrt(rho_k / M) |k>|0>_a` with one ancilla.
    pub fn amplitude_encode(rho: &DensityField) -> Result<Self> {
        Self::amplitude_encode_with_ancillas(rho, 1)
    }

    pub fn amplitude_encode_with_ancillas(rho: &DensityField, ancillas: usize) -> Result<Self> {
        let mass = rho.total_mass();
        if mass.is_nan() || mass <= 0.0 {
            return Err(QlbmError::Domain(
                "cannot amplitude-encode a density with no positive entry".into(),
            ));
        }
        let mut reg = Self::zero(*rho.grid(), ancillas)?;
        reg.amps[0] = 0.0;
        for (k, &r) in rho.values().iter().enumerate() {
            reg.amps[k << ancillas] = (r / mass).sqrt();
        }
        // grid qubits are in superposition, ancillas stay |0>
        reg.known = mask_below(ancillas);
        reg.values = 0;
        Ok(reg)
    }

    /// Wraps arbitrary real amplitudes; they must be normalized.
    pub fn from_amplitudes(grid: LatticeGrid, ancillas: usize, amps: Vec<f64>) -> Result<Self> {
        let n = grid.qubits() + ancillas;
        if amps.len() != 1usize << n {
            return Err(QlbmError::Usage(format!(
                "{} amplitudes for {n} qubits",
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a * a).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(QlbmError::Usage(format!("amplitudes have norm {norm}, expected 1")));
        }
        Ok(QuantumRegister {
            grid,
            ancillas,
            amps,
            known: 0,
            values: 0,
        })
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn num_qubits(&self) -> usize {
        self.grid.qubits() + self.ancillas
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    /// Overwrites this register with `other` without reallocating.
    pub fn copy_from(&mut self, other: &QuantumRegister) {
        self.grid = other.grid;
        self.ancillas = other.ancillas;
        self.amps.clone_from(&other.amps);
        self.known = other.known;
        self.values = other.values;
    }

    /// The classically known value of `qubit`, if any.
    pub fn known_value(&self, qubit: usize) -> Option<u8> {
        (self.known >> qubit & 1 == 1).then_some((self.values >> qubit & 1) as u8)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits() {
            return Err(QlbmError::Usage(format!(
                "qubit {qubit} out of range for a {}-qubit register",
                self.num_qubits()
            )));
        }
        Ok(())
    }

    fn check_pair(&self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(QlbmError::Usage(format!(
                "control and target are both qubit {control}"
            )));
        }
        Ok(())
    }

    fn forget(&mut self, qubit: usize) {
        self.known &= !(1u64 << qubit);
    }

    /// `RY(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]` on `qubit`.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let (s, c) = (0.5 * theta).sin_cos();
        rotate_pairs(&mut self.amps, qubit, c, s);
        self.forget(qubit);
        Ok(())
    }

    pub fn apply_x(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            lo.swap_with_slice(hi);
        }
        self.values ^= 1u64 << qubit;
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_pair(control, target)?;
        let (cm, tm) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
        match self.known_value(control) {
            Some(1) => self.values ^= tm as u64,
            Some(_) => {}
            None => self.forget(target),
        }
        Ok(())
    }

    pub fn apply_cry(&mut self, control: usize, target: usize, theta: f64) -> Result<()> {
        self.check_pair(control, target)?;
        let (s, c) = (0.5 * theta).sin_cos();
        let (cm, tm) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | tm]);
                self.amps[i] = c * a0 - s * a1;
                self.amps[i | tm] = s * a0 + c * a1;
            }
        }
        if self.known_value(control) != Some(0) {
            self.forget(target);
        }
        Ok(())
    }

    /// Uniformly controlled RY on qubit 0: block `j` (all other qubits equal to
    /// `j`) is rotated by `angles[j]`.
    pub fn apply_ucry(&mut self, angles: &[f64]) -> Result<()> {
        let rotations: Vec<(f64, f64)> = angles
            .iter()
            .map(|t| {
                let (s, c) = (0.5 * t).sin_cos();
                (c, s)
            })
            .collect();
        self.apply_ucry_half_angles(&rotations)
    }

    /// [`Self::apply_ucry`] with precomputed `(cos t/2, sin t/2)` per block.
    pub fn apply_ucry_half_angles(&mut self, rotations: &[(f64, f64)]) -> Result<()> {
        if rotations.len() * 2 != self.amps.len() {
            return Err(QlbmError::Usage(format!(
                "UCRY needs {} angles, got {}",
                self.amps.len() / 2,
                rotations.len()
            )));
        }
        for (pair, &(c, s)) in self.amps.chunks_exact_mut(2).zip(rotations) {
            let (a0, a1) = (pair[0], pair[1]);
            pair[0] = c * a0 - s * a1;
            pair[1] = s * a0 + c * a1;
        }
        self.forget(0);
        Ok(())
    }

    /// Born probability that `qubit` reads `bit`.
    pub fn probability(&self, qubit: usize, bit: u8) -> Result<f64> {
        self.check_qubit(qubit)?;
        let stride = 1usize << qubit;
        let offset = if bit == 0 { 0 } else { stride };
        Ok(self
            .amps
            .chunks_exact(2 * stride)
            .map(|b| b[offset..offset + stride].iter().map(|a| a * a).sum::<f64>())
            .sum())
    }

    /// Projects `qubit` onto `bit` and renormalizes. Returns the probability
    /// the outcome had before projection.
    pub fn collapse(&mut self, qubit: usize, bit: u8) -> Result<f64> {
        let p = self.probability(qubit, bit)?;
        if p.is_nan() || p <= 0.0 {
            return Err(QlbmError::Internal(format!(
                "projecting qubit {qubit} onto {bit} leaves norm {p:e}"
            )));
        }
        let scale = p.sqrt().recip();
        let stride = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            let (keep, drop) = if bit == 0 { (lo, hi) } else { (hi, lo) };
            keep.iter_mut().for_each(|a| *a *= scale);
            drop.fill(0.0);
        }
        self.known |= 1u64 << qubit;
        if bit == 0 {
            self.values &= !(1u64 << qubit);
        } else {
            self.values |= 1u64 << qubit;
        }
        Ok(p)
    }

    /// Projective measurement of one qubit with Born sampling and collapse.
    pub fn measure_qubit<R: Rng + ?Sized>(
        &mut self,
        qubit: usize,
        rng: &mut R,
    ) -> Result<(u8, MeasurementRecord)> {
        let norm = self.norm_sqr();
        if norm < DEGENERATE_NORM {
            return Err(QlbmError::Internal(format!("register norm {norm:e} is degenerate")));
        }
        let p0 = self.probability(qubit, 0)? / norm;
        let outcome = if rng.random::<f64>() < p0 { 0 } else { 1 };
        let probability = if outcome == 0 { p0 } else { 1.0 - p0 };
        self.collapse(qubit, outcome)?;
        Ok((
            outcome,
            MeasurementRecord {
                qubit,
                outcome,
                probability,
            },
        ))
    }

    /// Returns a measured qubit to `|0>` by a classically conditioned X.
    pub fn reset_qubit(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        match self.known_value(qubit) {
            Some(0) => Ok(()),
            Some(_) => self.apply_x(qubit),
            None => Err(QlbmError::Usage(format!(
                "qubit {qubit} is not in a known basis state; reset is only defined after measurement"
            ))),
        }
    }

    /// Increments (`shift > 0`) or decrements the grid coordinate along `axis`
    /// modulo its extent. Ancilla bits are untouched.
    pub fn apply_cyclic_shift(&mut self, axis: Axis, shift: i64) -> Result<()> {
        if axis.index() >= self.grid.dims() {
            return Err(QlbmError::Usage(format!(
                "axis {axis} does not exist on a {}-d grid",
                self.grid.dims()
            )));
        }
        let scale = 1usize << self.ancillas;
        rotate_axis(&mut self.amps, &self.grid, scale, axis, shift);
        let grid_bits = mask_below(self.num_qubits()) & !mask_below(self.ancillas);
        self.known &= !grid_bits;
        Ok(())
    }

    /// Samples one basis index with probability `amplitude^2` without
    /// touching the register.
    pub fn sample_basis_state<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut target = rng.random::<f64>() * self.norm_sqr();
        let mut last = 0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a * a;
            if p > 0.0 {
                if target < p {
                    return i;
                }
                target -= p;
                last = i;
            }
        }
        last
    }

    /// Probability of each grid site with the ancillas traced out.
    pub fn grid_probabilities(&self) -> Vec<f64> {
        self.amps
            .chunks_exact(1 << self.ancillas)
            .map(|b| b.iter().map(|a| a * a).sum())
            .collect()
    }
}

fn mask_below(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn rotate_pairs(amps: &mut [f64], qubit: usize, c: f64, s: f64) {
    if qubit == 0 {
        for pair in amps.chunks_exact_mut(2) {
            let (a0, a1) = (pair[0], pair[1]);
            pair[0] = c * a0 - s * a1;
            pair[1] = s * a0 + c * a1;
        }
        return;
    }
    let stride = 1usize << qubit;
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a0, *a1);
            *a0 = c * x - s * y;
            *a1 = s * x + c * y;
        }
    }
}
