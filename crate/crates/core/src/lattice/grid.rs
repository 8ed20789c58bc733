use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QlbmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// Periodic lattice with power-of-two extents, flattened row-major with x
/// fastest: `k = x + nx * (y + ny * z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeGrid {
    extents: [usize; 3],
    dims: usize,
}

impl LatticeGrid {
    /// `extents` lists one to three axis lengths; missing axes have length 1.
    pub fn new(extents: &[usize]) -> Result<Self> {
        if extents.is_empty() || extents.len() > 3 {
            return Err(QlbmError::Config(format!(
                "grid needs 1 to 3 extents, got {}",
                extents.len()
            )));
        }
        let mut e = [1usize; 3];
        for (axis, &n) in extents.iter().enumerate() {
            if n == 0 || !n.is_power_of_two() {
                return Err(QlbmError::Config(format!(
                    "grid extent {n} along {} is not a power of two; lattice sizes are \
                     restricted to powers of two so the grid maps onto whole qubits",
                    Axis::ALL[axis]
                )));
            }
            e[axis] = n;
        }
        let sites = e.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        match sites {
            Some(s) if s.trailing_zeros() <= 30 => {}
            _ => {
                return Err(QlbmError::Config(
                    "grid exceeds 2^30 sites".to_string(),
                ))
            }
        }
        Ok(LatticeGrid {
            extents: e,
            dims: extents.len(),
        })
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn plane(nx: usize, ny: usize) -> Result<Self> {
        Self::new(&[nx, ny])
    }

    pub fn extents(&self) -> [usize; 3] {
        self.extents
    }

    pub fn extent(&self, axis: Axis) -> usize {
        self.extents[axis.index()]
    }

    /// Number of axes the grid was declared with.
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn sites(&self) -> usize {
        self.extents.iter().product()
    }

    /// Grid qubit count `log2(nx * ny * nz)`.
    pub fn qubits(&self) -> usize {
        self.sites().trailing_zeros() as usize
    }

    /// Flat-index distance between neighbours along `axis`.
    pub fn stride(&self, axis: Axis) -> usize {
        self.extents[..axis.index()].iter().product()
    }

    pub fn index(&self, coords: [usize; 3]) -> usize {
        let [nx, ny, _] = self.extents;
        coords[0] + nx * (coords[1] + ny * coords[2])
    }

    pub fn coords(&self, k: usize) -> [usize; 3] {
        let [nx, ny, _] = self.extents;
        [k % nx, (k / nx) % ny, k / (nx * ny)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        let err = LatticeGrid::new(&[24]).unwrap_err();
        assert!(err.to_string().contains("power of two"));
        assert!(LatticeGrid::new(&[0]).is_err());
        assert!(LatticeGrid::new(&[]).is_err());
    }

    #[test]
    fn flattening_is_x_fastest() {
        let g = LatticeGrid::plane(4, 2).unwrap();
        assert_eq!(g.sites(), 8);
        assert_eq!(g.qubits(), 3);
        assert_eq!(g.index([1, 1, 0]), 5);
        assert_eq!(g.coords(6), [2, 1, 0]);
        assert_eq!(g.stride(Axis::Y), 4);
        for k in 0..8 {
            assert_eq!(g.index(g.coords(k)), k);
        }
    }
}
