use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qlbm::engine::{
    enumerate_branches, estimate_density, presample_instructions, run_ensemble, run_hybrid,
};
use qlbm::experiments::{mape, median};
use qlbm::lattice::{
    make_velocity_set, run_digital, DensityField, LatticeGrid, VelocityField, VelocitySetName,
};

fn grid_for(set: VelocitySetName, a: u32, b: u32) -> LatticeGrid {
    match set {
        VelocitySetName::D1Q3 => LatticeGrid::line(1 << a).unwrap(),
        VelocitySetName::D2Q9 => LatticeGrid::plane(1 << a, 1 << b).unwrap(),
    }
}

fn case_strategy() -> impl Strategy<Value = (VelocitySetName, LatticeGrid, Vec<f64>, Vec<[f64; 3]>, usize)> {
    (prop_oneof![Just(VelocitySetName::D1Q3), Just(VelocitySetName::D2Q9)], 1u32..=3, 1u32..=3)
        .prop_flat_map(|(set, a, b)| {
            let grid = grid_for(set, a, b);
            let n = grid.sites();
            let max_t: usize = if set == VelocitySetName::D1Q3 { 4 } else { 3 };
            // |ux| + |uy| <= 1/3 keeps every direction within the constraint
            let u = prop::collection::vec((-0.16f64..0.16, -0.16f64..0.16), n).prop_map(
                move |v| {
                    v.into_iter()
                        .map(|(x, y)| if grid.dims() == 1 { [x, 0.0, 0.0] } else { [x, y, 0.0] })
                        .collect::<Vec<_>>()
                },
            );
            (
                Just(set),
                Just(grid),
                prop::collection::vec(0.01f64..2.0, n),
                u,
                0..=max_t,
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_equals_classical_solver((name, grid, rho, u, steps) in case_strategy()) {
        let set = make_velocity_set(name);
        let rho = DensityField::new(grid, rho).unwrap();
        let u = VelocityField::new(grid, u).unwrap();
        let exact = enumerate_branches(&rho, &u, &set, steps).unwrap();
        let digital = run_digital(&rho, &u, &set, steps).unwrap();
        prop_assert!(exact.max_abs_diff(&digital) < 1e-10);
    }

    #[test]
    fn estimators_conserve_mass(
        (name, grid, rho, u, steps) in case_strategy(),
        seed in any::<u64>(),
        shots in 1u64..500,
    ) {
        let set = make_velocity_set(name);
        let rho = DensityField::new(grid, rho).unwrap();
        let u = VelocityField::new(grid, u).unwrap();
        let mass = rho.total_mass();
        let steps = steps.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ins = presample_instructions(&set, steps, shots, &mut rng).unwrap();
        for est in [
            estimate_density(&rho, &u, &set, steps, shots, seed).unwrap(),
            run_ensemble(&rho, &u, &set, steps, shots, seed).unwrap(),
            run_hybrid(&rho, &u, &set, &ins, seed).unwrap(),
        ] {
            prop_assert_eq!(est.counts.iter().sum::<u64>(), shots);
            prop_assert!((est.estimate.total_mass() - mass).abs() <= 1e-12 * mass);
            prop_assert!(est.estimate.values().iter().all(|&v| v >= 0.0));
            let s = est.stats;
            prop_assert_eq!(s.ucry_applications + s.rest_steps, steps as u64 * shots);
            prop_assert_eq!(s.cnot_equivalents, s.ucry_applications << grid.qubits());
        }
    }
}

#[test]
fn instruction_marginals_follow_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d1q3 = make_velocity_set(VelocitySetName::D1Q3);
    let ins = presample_instructions(&d1q3, 10, 1_000_000, &mut rng).unwrap();
    let h = ins.histogram(2);
    let n = 1e7;
    let p = 2.0 / 3.0;
    assert!((h[0] as f64 / n - p).abs() < 3.0 * (p * (1.0 - p) / n).sqrt());

    let d2q9 = make_velocity_set(VelocitySetName::D2Q9);
    let ins = presample_instructions(&d2q9, 1, 1_000_000, &mut rng).unwrap();
    let h = ins.histogram(5);
    let n = 1e6;
    for (c, p) in h.iter().zip([4.0 / 9.0, 2.0 / 9.0, 2.0 / 9.0, 1.0 / 18.0, 1.0 / 18.0]) {
        assert!((*c as f64 / n - p).abs() < 3.0 * (p * (1.0 - p) / n).sqrt());
    }
}

#[test]
fn ensemble_and_per_shot_errors_agree() {
    let set = make_velocity_set(VelocitySetName::D1Q3);
    let grid = LatticeGrid::line(8).unwrap();
    let rho = DensityField::new(grid, vec![0.3, 0.1, 0.7, 0.2, 0.05, 0.9, 0.4, 0.15]).unwrap();
    let u = VelocityField::uniform(grid, [0.1, 0.0, 0.0]).unwrap();
    let digital = run_digital(&rho, &u, &set, 3).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for seed in 0..5 {
        let e = run_ensemble(&rho, &u, &set, 3, 100_000, seed).unwrap();
        let s = estimate_density(&rho, &u, &set, 3, 100_000, seed).unwrap();
        a.push(mape(&digital, &e.estimate).unwrap());
        b.push(mape(&digital, &s.estimate).unwrap());
    }
    let ratio = median(&a).unwrap() / median(&b).unwrap();
    assert!((0.5..=2.0).contains(&ratio), "{ratio}");
}

#[test]
fn first_selection_reads_zero_two_thirds_of_the_time() {
    let set = make_velocity_set(VelocitySetName::D1Q3);
    let grid = LatticeGrid::line(16).unwrap();
    let rho = DensityField::new(grid, (0..16).map(|k| 1.0 + k as f64).collect()).unwrap();
    let u = VelocityField::uniform(grid, [0.1, 0.0, 0.0]).unwrap();
    let n = 100_000u64;
    let est = estimate_density(&rho, &u, &set, 1, n, 12).unwrap();
    let p = 2.0 / 3.0;
    let f = est.stats.rest_steps as f64 / n as f64;
    assert!((f - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt(), "{f}");
}

#[test]
fn zero_velocity_splits_pairs_evenly() {
    let set = make_velocity_set(VelocitySetName::D1Q3);
    let grid = LatticeGrid::line(8).unwrap();
    let mut values = vec![0.0; 8];
    values[4] = 1.0;
    let rho = DensityField::new(grid, values).unwrap();
    let u = VelocityField::zero(grid);
    let n = 200_000u64;
    let est = estimate_density(&rho, &u, &set, 1, n, 21).unwrap();
    let (left, right) = (est.counts[3] as f64, est.counts[5] as f64);
    let moved = left + right;
    let sigma = (moved * 0.25).sqrt();
    assert!((left - moved / 2.0).abs() < 3.0 * sigma, "{left} vs {right}");
}
