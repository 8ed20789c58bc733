use crate::error::{QlbmError, Result};

use super::grid::LatticeGrid;
use super::velocity::VelocitySet;

/// Macroscopic density on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: LatticeGrid,
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: LatticeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.sites() {
            return Err(QlbmError::Config(format!(
                "density has {} entries, grid has {} sites",
                values.len(),
                grid.sites()
            )));
        }
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(QlbmError::Domain(format!(
                "density at site {k} is {} (must be finite and nonnegative)",
                values[k]
            )));
        }
        Ok(DensityField { grid, values })
    }

    /// Wraps values produced by this crate's own kernels, which keep them
    /// nonnegative by construction.
    pub(crate) fn from_raw(grid: LatticeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.sites());
        DensityField { grid, values }
    }

    pub fn constant(grid: LatticeGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.sites()])
    }

    pub fn zeros(grid: LatticeGrid) -> Self {
        DensityField {
            grid,
            values: vec![0.0; grid.sites()],
        }
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs_diff(&self, other: &DensityField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Time-independent advection velocity per lattice site.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: LatticeGrid,
    values: Vec<[f64; 3]>,
}

impl VelocityField {
    pub fn new(grid: LatticeGrid, values: Vec<[f64; 3]>) -> Result<Self> {
        if values.len() != grid.sites() {
            return Err(QlbmError::Config(format!(
                "velocity field has {} entries, grid has {} sites",
                values.len(),
                grid.sites()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(QlbmError::Domain("velocity field is not finite".into()));
        }
        Ok(VelocityField { grid, values })
    }

    pub fn uniform(grid: LatticeGrid, u: [f64; 3]) -> Result<Self> {
        Self::new(grid, vec![u; grid.sites()])
    }

    pub fn zero(grid: LatticeGrid) -> Self {
        VelocityField {
            grid,
            values: vec![[0.0; 3]; grid.sites()],
        }
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn at(&self, k: usize) -> &[f64; 3] {
        &self.values[k]
    }

    /// Largest `|c_i . u| / cs2` over all sites and directions.
    pub fn max_advection_ratio(&self, set: &VelocitySet) -> f64 {
        self.values
            .iter()
            .flat_map(|u| (0..set.q()).map(move |i| set.advection_ratio(i, u).abs()))
            .fold(0.0, f64::max)
    }

    /// Checks `|c_i . u| / cs2 <= 1` everywhere, naming the first offending
    /// site and direction.
    pub fn check_constraint(&self, set: &VelocitySet) -> Result<()> {
        if set.dim() > self.grid.dims() {
            return Err(QlbmError::Config(format!(
                "{} needs a {}-d grid, got {} axes",
                set.label(),
                set.dim(),
                self.grid.dims()
            )));
        }
        for (k, u) in self.values.iter().enumerate() {
            for i in 0..set.q() {
                let r = set.advection_ratio(i, u);
                if r.abs() > 1.0 {
                    return Err(QlbmError::Domain(format!(
                        "|c_{i} . u| / cs2 = {:.6} > 1 at site {k} {:?} (direction {i})",
                        r.abs(),
                        self.grid.coords(k)
                    )));
                }
            }
        }
        Ok(())
    }
}
