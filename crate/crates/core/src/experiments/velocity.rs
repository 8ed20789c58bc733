use serde::{Deserialize, Serialize};

use crate::error::{QlbmError, Result};
use crate::lattice::{LatticeGrid, VelocityField, VelocitySet};

/// How lattice index `j` maps to a coordinate in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateMap {
    /// `j / (n - 1)`: first and last sites land on 0 and 1.
    Endpoint,
    /// `j / n`.
    Cell,
}

impl CoordinateMap {
    pub fn coordinate(self, j: usize, n: usize) -> f64 {
        match self {
            CoordinateMap::Endpoint if n > 1 => j as f64 / (n - 1) as f64,
            CoordinateMap::Endpoint => 0.0,
            CoordinateMap::Cell => j as f64 / n as f64,
        }
    }
}

/// `u(x) = u0 + slope * x` along the first axis.
pub fn linear_velocity_with(
    grid: LatticeGrid,
    u0: f64,
    slope: f64,
    map: CoordinateMap,
) -> Result<VelocityField> {
    if grid.dims() != 1 {
        return Err(QlbmError::Config(format!(
            "linear velocity needs a 1-d grid, got {} axes",
            grid.dims()
        )));
    }
    let n = grid.sites();
    let values = (0..n)
        .map(|j| [u0 + slope * map.coordinate(j, n), 0.0, 0.0])
        .collect();
    VelocityField::new(grid, values)
}

/// `u(x) = 0.1 x + 0.1` with `x = j / (N - 1)`.
pub fn linear_velocity(grid: LatticeGrid) -> Result<VelocityField> {
    linear_velocity_with(grid, 0.1, 0.1, CoordinateMap::Endpoint)
}

/// Two counter-rotating vortices meeting at `x = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoubleVortex {
    pub s1: f64,
    pub s2: f64,
    pub centers: [[f64; 2]; 2],
    pub eps: f64,
    pub coordinates: CoordinateMap,
}

impl Default for DoubleVortex {
    fn default() -> Self {
        DoubleVortex {
            s1: 0.2,
            s2: 0.1,
            centers: [[0.25, 0.5], [0.75, 0.5]],
            eps: 1e-8,
            coordinates: CoordinateMap::Cell,
        }
    }
}

impl DoubleVortex {
    /// Velocity at normalized position `(x, y)`.
    pub fn at(&self, x: f64, y: f64) -> [f64; 2] {
        let [[x1, y1], [x2, y2]] = self.centers;
        if x <= 0.5 {
            let r = ((x - x1).powi(2) + (y - y1).powi(2) + self.eps).sqrt();
            [-self.s1 * (y - y1) / r, self.s1 * (x - x1) / r]
        } else {
            let r = ((x - x2).powi(2) + (y - y2).powi(2) + self.eps).sqrt();
            [self.s2 * (y - y2) / r, -self.s2 * (x - x2) / r]
        }
    }

    pub fn field(&self, grid: LatticeGrid) -> Result<VelocityField> {
        if grid.dims() != 2 {
            return Err(QlbmError::Config(format!(
                "double vortex needs a 2-d grid, got {} axes",
                grid.dims()
            )));
        }
        let [nx, ny, _] = grid.extents();
        let values = (0..grid.sites())
            .map(|k| {
                let [i, j, _] = grid.coords(k);
                let x = self.coordinates.coordinate(i, nx);
                let y = self.coordinates.coordinate(j, ny);
                let [u, v] = self.at(x, y);
                [u, v, 0.0]
            })
            .collect();
        VelocityField::new(grid, values)
    }
}

/// Default double vortex on `grid`, checked against `set`.
pub fn double_vortex(grid: LatticeGrid, set: &VelocitySet) -> Result<VelocityField> {
    let u = DoubleVortex::default().field(grid)?;
    u.check_constraint(set)?;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_velocity_set, VelocitySetName};

    #[test]
    fn linear_endpoints() {
        let u = linear_velocity(LatticeGrid::line(8).unwrap()).unwrap();
        assert!((u.at(0)[0] - 0.1).abs() < 1e-15);
        assert!((u.at(7)[0] - 0.2).abs() < 1e-15);
        let set = make_velocity_set(VelocitySetName::D1Q3);
        assert!(u.max_advection_ratio(&set) <= 0.6 + 1e-12);
    }

    #[test]
    fn vortex_center_row_has_no_x_velocity() {
        let g = LatticeGrid::plane(32, 16).unwrap();
        let u = DoubleVortex::default().field(g).unwrap();
        // y = 8 / 16 = 0.5 = y1
        for i in 0..16 {
            assert_eq!(u.at(g.index([i, 8, 0]))[0], 0.0);
        }
    }

    #[test]
    fn vortex_magnitude_bounded() {
        let g = LatticeGrid::plane(32, 16).unwrap();
        let u = DoubleVortex::default().field(g).unwrap();
        for v in u.values() {
            assert!(v[0].hypot(v[1]) <= 0.2 + 1e-12);
        }
    }

    #[test]
    fn default_vortex_satisfies_d2q9_constraint() {
        let g = LatticeGrid::plane(32, 16).unwrap();
        let set = make_velocity_set(VelocitySetName::D2Q9);
        let u = double_vortex(g, &set).unwrap();
        let r = u.max_advection_ratio(&set);
        assert!(r < 1.0, "{r}");
        assert!(r > 0.5);
    }
}
