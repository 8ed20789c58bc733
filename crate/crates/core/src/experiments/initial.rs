use crate::error::{QlbmError, Result};
use crate::lattice::{Axis, DensityField, LatticeGrid};

pub const BOXCAR_BACKGROUND: f64 = 0.1;
pub const BOXCAR_AMPLITUDE: f64 = 0.2;
pub const BOXCAR_WIDTH: usize = 6;

/// Boxcar with the default background, plateau value and width.
pub fn boxcar_ic(grid: LatticeGrid) -> Result<DensityField> {
    boxcar_with(grid, BOXCAR_BACKGROUND, BOXCAR_AMPLITUDE, BOXCAR_WIDTH)
}

/// `background` everywhere except a centred plateau of `width` sites per
/// axis (a square in 2D) holding `amplitude`. Along an axis of extent `n`
/// the plateau covers `n/2 - width/2 .. n/2 + width/2 - 1`.
pub fn boxcar_with(
    grid: LatticeGrid,
    background: f64,
    amplitude: f64,
    width: usize,
) -> Result<DensityField> {
    if width == 0 {
        return Err(QlbmError::Config("boxcar width must be positive".into()));
    }
    for axis in &Axis::ALL[..grid.dims()] {
        let n = grid.extent(*axis);
        if n < width + 2 {
            return Err(QlbmError::Config(format!(
                "boxcar of width {width} needs extent >= {} along {axis}, got {n}",
                width + 2
            )));
        }
    }
    let lo: Vec<usize> = Axis::ALL[..grid.dims()]
        .iter()
        .map(|&a| grid.extent(a) / 2 - width / 2)
        .collect();
    let values = (0..grid.sites())
        .map(|k| {
            let x = grid.coords(k);
            let inside = lo
                .iter()
                .enumerate()
                .all(|(a, &l)| (l..l + width).contains(&x[a]));
            if inside {
                amplitude
            } else {
                background
            }
        })
        .collect();
    DensityField::new(grid, values)
}

pub fn uniform_ic(grid: LatticeGrid, value: f64) -> Result<DensityField> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(QlbmError::Config(format!(
            "uniform density must be positive and finite, got {value}"
        )));
    }
    DensityField::constant(grid, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boxcar_line() {
        let rho = boxcar_ic(LatticeGrid::line(32).unwrap()).unwrap();
        let high: Vec<usize> = (0..32).filter(|&k| rho.values()[k] == 0.2).collect();
        assert_eq!(high, (13..19).collect::<Vec<_>>());
        assert_eq!(rho.values().iter().filter(|&&v| v == 0.1).count(), 26);
        assert!((rho.total_mass() - 3.8).abs() < 1e-12);
        // symmetric about the midpoint between sites 15 and 16
        for k in 0..32 {
            assert_eq!(rho.values()[k], rho.values()[31 - k]);
        }
    }

    #[test]
    fn boxcar_square() {
        let g = LatticeGrid::plane(16, 16).unwrap();
        let rho = boxcar_ic(g).unwrap();
        assert_eq!(rho.values().iter().filter(|&&v| v == 0.2).count(), 36);
        assert!((rho.total_mass() - (220.0 * 0.1 + 36.0 * 0.2)).abs() < 1e-12);
        assert_eq!(rho.values()[g.index([5, 5, 0])], 0.2);
        assert_eq!(rho.values()[g.index([10, 10, 0])], 0.2);
        assert_eq!(rho.values()[g.index([11, 10, 0])], 0.1);
    }

    #[test]
    fn small_grids_rejected() {
        let err = boxcar_ic(LatticeGrid::line(4).unwrap()).unwrap_err();
        assert!(matches!(err, QlbmError::Config(_)));
        assert!(boxcar_ic(LatticeGrid::line(8).unwrap()).is_ok());
        assert!(uniform_ic(LatticeGrid::line(4).unwrap(), 0.0).is_err());
    }
}
