use crate::error::{QlbmError, Result};

use super::field::{DensityField, VelocityField};
use super::grid::{Axis, LatticeGrid};
use super::velocity::VelocitySet;

fn check_grids(rho: &DensityField, u: &VelocityField) -> Result<()> {
    if rho.grid() != u.grid() {
        return Err(QlbmError::Config(format!(
            "density grid {:?} and velocity grid {:?} differ",
            rho.grid().extents(),
            u.grid().extents()
        )));
    }
    Ok(())
}

/// Linearized advection-diffusion equilibrium `f_i = w_i rho (1 + c_i . u / cs2)`.
pub fn equilibrium(
    rho: &DensityField,
    u: &VelocityField,
    set: &VelocitySet,
) -> Result<Vec<DensityField>> {
    check_grids(rho, u)?;
    u.check_constraint(set)?;
    let grid = *rho.grid();
    Ok((0..set.q())
        .map(|i| {
            let w = set.weight(i);
            let values = rho
                .values()
                .iter()
                .zip(u.values())
                .map(|(&r, uk)| w * r * (1.0 + set.advection_ratio(i, uk)))
                .collect();
            DensityField::from_raw(grid, values)
        })
        .collect())
}

/// Cyclic shift of `values` laid out on `grid` with `scale` consecutive
/// entries per site: `out(x) = in(x - shift * e_axis)`.
pub(crate) fn rotate_axis<T>(
    values: &mut [T],
    grid: &LatticeGrid,
    scale: usize,
    axis: Axis,
    shift: i64,
) {
    let n = grid.extent(axis) as i64;
    let steps = shift.rem_euclid(n) as usize;
    if steps == 0 {
        return;
    }
    let stride = grid.stride(axis) * scale;
    let period = stride * grid.extent(axis);
    for slab in values.chunks_exact_mut(period) {
        slab.rotate_right(stride * steps);
    }
}

/// Periodic streaming of one population along lattice vector `c`.
pub fn stream_periodic(field: &DensityField, c: [i32; 3]) -> DensityField {
    let grid = *field.grid();
    let mut values = field.values().to_vec();
    for axis in Axis::ALL {
        rotate_axis(&mut values, &grid, 1, axis, i64::from(c[axis.index()]));
    }
    DensityField::from_raw(grid, values)
}

/// One BGK step with `dt / tau = 1`: equilibrium, streaming, zeroth moment.
pub fn digital_step(
    rho: &DensityField,
    u: &VelocityField,
    set: &VelocitySet,
) -> Result<DensityField> {
    let populations = equilibrium(rho, u, set)?;
    let mut out = vec![0.0; rho.len()];
    for (i, f) in populations.iter().enumerate() {
        let streamed = stream_periodic(f, set.velocity(i));
        for (o, v) in out.iter_mut().zip(streamed.values()) {
            *o += v;
        }
    }
    Ok(DensityField::from_raw(*rho.grid(), out))
}

/// `steps`-fold composition of [`digital_step`].
pub fn run_digital(
    rho0: &DensityField,
    u: &VelocityField,
    set: &VelocitySet,
    steps: usize,
) -> Result<DensityField> {
    check_grids(rho0, u)?;
    u.check_constraint(set)?;
    let mut rho = rho0.clone();
    for _ in 0..steps {
        rho = digital_step(&rho, u, set)?;
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_velocity_set, VelocitySetName};
    use proptest::prelude::*;

    fn line(values: &[f64]) -> DensityField {
        let g = LatticeGrid::line(values.len()).unwrap();
        DensityField::new(g, values.to_vec()).unwrap()
    }

    #[test]
    fn equilibrium_hand_values() {
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let rho = line(&[0.1, 0.1]);
        let u = VelocityField::uniform(*rho.grid(), [0.1, 0.0, 0.0]).unwrap();
        let f = equilibrium(&rho, &u, &set).unwrap();
        // (1/6) * 0.1 * 1.3
        assert!((f[1].values()[0] - 0.021_666_666_666_666_667).abs() < 1e-15);
        let sum: f64 = f.iter().map(|fi| fi.values()[0]).sum();
        assert!((sum - 0.1).abs() < 1e-15);

        let still = VelocityField::zero(*rho.grid());
        let f0 = equilibrium(&rho, &still, &set).unwrap();
        for (i, fi) in f0.iter().enumerate() {
            assert_eq!(fi.values()[1], set.weight(i) * 0.1);
        }
    }

    #[test]
    fn equilibrium_rejects_constraint_violation() {
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let rho = line(&[0.1, 0.1, 0.1, 0.1]);
        let mut uv = vec![[0.0; 3]; 4];
        uv[2] = [0.4, 0.0, 0.0];
        let u = VelocityField::new(*rho.grid(), uv).unwrap();
        let err = equilibrium(&rho, &u, &set).unwrap_err();
        assert!(matches!(err, QlbmError::Domain(ref m) if m.contains("site 2")));
    }

    #[test]
    fn streaming_shifts_cyclically() {
        let f = line(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(stream_periodic(&f, [1, 0, 0]).values(), &[4.0, 1.0, 2.0, 3.0]);
        assert_eq!(stream_periodic(&f, [0, 0, 0]).values(), f.values());
        let back = stream_periodic(&stream_periodic(&f, [1, 0, 0]), [-1, 0, 0]);
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn streaming_in_two_dimensions() {
        let g = LatticeGrid::plane(4, 2).unwrap();
        let mut v = vec![0.0; 8];
        v[g.index([3, 1, 0])] = 1.0;
        let f = DensityField::new(g, v).unwrap();
        let s = stream_periodic(&f, [1, 1, 0]);
        assert_eq!(s.values()[g.index([0, 0, 0])], 1.0);
        assert_eq!(s.total_mass(), 1.0);
    }

    #[test]
    fn one_step_by_hand() {
        // f0 = 2/3 rho stays, rho/6 moves one site each way.
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let rho = line(&[0.2, 0.1, 0.1, 0.1]);
        let u = VelocityField::zero(*rho.grid());
        let out = digital_step(&rho, &u, &set).unwrap();
        let expected = [0.2 * 2.0 / 3.0 + 0.1 / 3.0, 0.1 * 2.0 / 3.0 + 0.2 / 6.0 + 0.1 / 6.0, 0.1, 0.1 * 2.0 / 3.0 + 0.2 / 6.0 + 0.1 / 6.0];
        for (a, b) in out.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
        assert!((out.values()[0] - 0.166_666_666_666_666_7).abs() < 1e-12);
        assert!((out.values()[1] - 0.116_666_666_666_666_7).abs() < 1e-12);
    }

    #[test]
    fn uniform_state_is_fixed_point() {
        let set = make_velocity_set(VelocitySetName::D2Q9);
        let g = LatticeGrid::plane(8, 4).unwrap();
        let rho = DensityField::constant(g, 0.7).unwrap();
        let u = VelocityField::uniform(g, [0.1, -0.05, 0.0]).unwrap();
        let out = run_digital(&rho, &u, &set, 5).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn zero_steps_is_identity_and_one_step_matches() {
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let rho = line(&[0.3, 0.1, 0.5, 0.2, 0.1, 0.1, 0.4, 0.2]);
        let u = VelocityField::uniform(*rho.grid(), [0.1, 0.0, 0.0]).unwrap();
        assert_eq!(run_digital(&rho, &u, &set, 0).unwrap(), rho);
        assert_eq!(
            run_digital(&rho, &u, &set, 1).unwrap(),
            digital_step(&rho, &u, &set).unwrap()
        );
    }

    #[test]
    fn mass_is_conserved_over_250_steps() {
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let g = LatticeGrid::line(32).unwrap();
        let values = (0..32).map(|k| if (13..19).contains(&k) { 0.2 } else { 0.1 }).collect();
        let rho = DensityField::new(g, values).unwrap();
        let u = VelocityField::uniform(g, [0.1, 0.0, 0.0]).unwrap();
        let out = run_digital(&rho, &u, &set, 250).unwrap();
        let m0 = rho.total_mass();
        assert!((out.total_mass() - m0).abs() / m0 < 1e-12);
        assert!(out.values().iter().all(|&v| v >= 0.0));
    }

    fn d2q9_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<[f64; 3]>, f64, f64)> {
        (
            prop::collection::vec(0.0..1.0f64, 16),
            prop::collection::vec(0.0..1.0f64, 16),
            prop::collection::vec((-0.15..0.15f64, -0.15..0.15f64), 16),
            -2.0..2.0f64,
            -2.0..2.0f64,
        )
            .prop_map(|(a, b, u, alpha, beta)| {
                (a, b, u.into_iter().map(|(x, y)| [x, y, 0.0]).collect(), alpha, beta)
            })
    }

    proptest! {
        #[test]
        fn step_is_linear_in_density((a, b, u, alpha, beta) in d2q9_case()) {
            let set = make_velocity_set(VelocitySetName::D2Q9);
            let g = LatticeGrid::plane(4, 4).unwrap();
            let u = VelocityField::new(g, u).unwrap();
            let ra = DensityField::new(g, a.clone()).unwrap();
            let rb = DensityField::new(g, b.clone()).unwrap();
            let sa = digital_step(&ra, &u, &set).unwrap();
            let sb = digital_step(&rb, &u, &set).unwrap();
            // Linear combinations may be negative; go through the raw kernel.
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + beta * y).collect();
            let eq = equilibrium_raw(&mix, &u, &set);
            for (k, e) in eq.iter().enumerate() {
                let expect = alpha * sa.values()[k] + beta * sb.values()[k];
                prop_assert!((e - expect).abs() < 1e-12);
            }
        }

        #[test]
        fn mass_conserved_and_nonnegative((a, _b, u, _x, _y) in d2q9_case(), steps in 0usize..40) {
            let set = make_velocity_set(VelocitySetName::D2Q9);
            let g = LatticeGrid::plane(4, 4).unwrap();
            let u = VelocityField::new(g, u).unwrap();
            let rho = DensityField::new(g, a).unwrap();
            let out = run_digital(&rho, &u, &set, steps).unwrap();
            let m0 = rho.total_mass();
            prop_assert!((out.total_mass() - m0).abs() <= 1e-12 * m0.max(1e-300));
            prop_assert!(out.values().iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn translation_commutes_with_step(values in prop::collection::vec(0.0..1.0f64, 32), shift in -40i32..40, ux in -0.3..0.3f64) {
            let set = make_velocity_set(VelocitySetName::D1Q3);
            let g = LatticeGrid::line(32).unwrap();
            let u = VelocityField::uniform(g, [ux, 0.0, 0.0]).unwrap();
            let rho = DensityField::new(g, values).unwrap();
            let a = stream_periodic(&digital_step(&rho, &u, &set).unwrap(), [shift, 0, 0]);
            let b = digital_step(&stream_periodic(&rho, [shift, 0, 0]), &u, &set).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-15);
        }
    }

    /// One step on a possibly signed density, bypassing field validation.
    fn equilibrium_raw(rho: &[f64], u: &VelocityField, set: &VelocitySet) -> Vec<f64> {
        let g = *u.grid();
        let mut out = vec![0.0; rho.len()];
        for i in 0..set.q() {
            let mut f: Vec<f64> = rho
                .iter()
                .zip(u.values())
                .map(|(r, uk)| set.weight(i) * r * (1.0 + set.advection_ratio(i, uk)))
                .collect();
            for axis in Axis::ALL {
                rotate_axis(&mut f, &g, 1, axis, i64::from(set.velocity(i)[axis.index()]));
            }
            for (o, v) in out.iter_mut().zip(f) {
                *o += v;
            }
        }
        out
    }
}
