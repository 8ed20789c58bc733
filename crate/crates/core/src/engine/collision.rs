use crate::error::{QlbmError, Result};
use crate::lattice::{DensityField, VelocityField, VelocitySet};
use crate::statevector::QuantumRegister;

/// Per-site UCRY angles for one opposite pair `(i, ī)`:
/// `theta_j = 2 acos sqrt(1/2 (1 + c_i . u_j / cs2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionAngles {
    pair: usize,
    direction: usize,
    opposite: usize,
    angles: Vec<f64>,
    half: Vec<(f64, f64)>,
}

pub fn collision_angles(
    pair: usize,
    u: &VelocityField,
    set: &VelocitySet,
) -> Result<CollisionAngles> {
    let &(i, opposite) = set.pairs().get(pair).ok_or_else(|| {
        QlbmError::Usage(format!("{} has no pair {pair}", set.label()))
    })?;
    let mut angles = Vec::with_capacity(u.values().len());
    let mut half = Vec::with_capacity(u.values().len());
    for (k, uk) in u.values().iter().enumerate() {
        let r = set.advection_ratio(i, uk);
        if r.abs() > 1.0 {
            return Err(QlbmError::Domain(format!(
                "|c_{i} . u| / cs2 = {:.6} > 1 at site {k}",
                r.abs()
            )));
        }
        let c = (0.5 * (1.0 + r)).sqrt();
        let s = (0.5 * (1.0 - r)).sqrt();
        angles.push(2.0 * c.acos());
        half.push((c, s));
    }
    Ok(CollisionAngles {
        pair,
        direction: i,
        opposite,
        angles,
        half,
    })
}

impl CollisionAngles {
    pub fn pair(&self) -> usize {
        self.pair
    }

    /// Direction selected by reading 0 after the UCRY.
    pub fn direction(&self) -> usize {
        self.direction
    }

    /// Direction selected by reading 1.
    pub fn opposite(&self) -> usize {
        self.opposite
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// `(cos, sin)` of the half angles, computed directly from the split.
    pub fn half_angles(&self) -> &[(f64, f64)] {
        &self.half
    }
}

/// Static collision for a one-pair stencil on a register with two direction
/// qubits `f0` (qubit 0) and `f1` (qubit 1) and uniform velocity `u`:
/// `RY(theta_0)` on f0, `CRY(theta_1)` from f0 onto f1, then `CNOT` from f1
/// onto f0. The result holds `sqrt(w_0 rho_k)` at `|k>|00>`,
/// `sqrt(w_1 (1 + u/cs2) rho_k)` at `|k>|01>` and
/// `sqrt(w_2 (1 - u/cs2) rho_k)` at `|k>|10>` (normalized by total mass).
pub fn static_collision_circuit(
    rho: &DensityField,
    u: f64,
    set: &VelocitySet,
) -> Result<QuantumRegister> {
    if set.pairs().len() != 1 {
        return Err(QlbmError::Usage(format!(
            "static collision circuit needs a single-pair stencil, {} has {}",
            set.label(),
            set.pairs().len()
        )));
    }
    let (i, _) = set.pairs()[0];
    let r = set.advection_ratio(i, &[u, 0.0, 0.0]);
    if r.abs() > 1.0 {
        return Err(QlbmError::Domain(format!("|u| / cs2 = {:.6} > 1", r.abs())));
    }
    let theta0 = 2.0 * set.weight(0).sqrt().acos();
    let theta1 = 2.0 * (0.5 * (1.0 + r)).sqrt().acos();
    let mut reg = QuantumRegister::amplitude_encode_with_ancillas(rho, 2)?;
    reg.apply_ry(0, theta0)?;
    reg.apply_cry(0, 1, theta1)?;
    reg.apply_cnot(1, 0)?;
    Ok(reg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_velocity_set, LatticeGrid, VelocitySetName};

    #[test]
    fn zero_velocity_gives_quarter_turns() {
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let g = LatticeGrid::line(8).unwrap();
        let ca = collision_angles(0, &VelocityField::zero(g), &set).unwrap();
        for &t in ca.angles() {
            assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        }
    }

    #[test]
    fn d1q3_split_at_u_point_one() {
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let g = LatticeGrid::line(4).unwrap();
        let u = VelocityField::uniform(g, [0.1, 0.0, 0.0]).unwrap();
        let ca = collision_angles(0, &u, &set).unwrap();
        for (&t, &(c, _)) in ca.angles().iter().zip(ca.half_angles()) {
            assert!(((0.5 * t).cos().powi(2) - 0.65).abs() < 1e-15);
            assert!((c * c - 0.65).abs() < 1e-15);
        }
        assert_eq!((ca.direction(), ca.opposite()), (1, 2));
    }

    #[test]
    fn d2q9_diagonal_pair() {
        let set = make_velocity_set(VelocitySetName::D2Q9);
        let g = LatticeGrid::plane(2, 2).unwrap();
        let u = VelocityField::uniform(g, [0.1, 0.1, 0.0]).unwrap();
        // pair 2 is (5, 7): c_5 . u = 0.2, 1/2 (1 + 0.6)
        let ca = collision_angles(2, &u, &set).unwrap();
        assert_eq!(ca.direction(), 5);
        for &t in ca.angles() {
            assert!(((0.5 * t).cos().powi(2) - 0.8).abs() < 1e-15);
            assert!((0.0..=std::f64::consts::PI).contains(&t));
        }
    }

    #[test]
    fn constraint_violation_is_domain_error() {
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let g = LatticeGrid::line(4).unwrap();
        let u = VelocityField::uniform(g, [0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(collision_angles(0, &u, &set), Err(QlbmError::Domain(_))));
        assert!(matches!(
            collision_angles(3, &VelocityField::zero(g), &set),
            Err(QlbmError::Usage(_))
        ));
    }

    #[test]
    fn static_circuit_three_amplitude_groups() {
        let set = make_velocity_set(VelocitySetName::D1Q3);
        let g = LatticeGrid::line(4).unwrap();
        let rho = DensityField::constant(g, 0.25).unwrap();
        let reg = static_collision_circuit(&rho, 0.1, &set).unwrap();
        // total mass 1, so amplitudes are sqrt(w (1 +- 0.3) 0.25)
        for k in 0..4 {
            let a = &reg.amplitudes()[4 * k..4 * k + 4];
            assert!((a[0] - (2.0 / 3.0 * 0.25f64).sqrt()).abs() < 1e-15);
            assert!((a[1] - (1.3 / 6.0 * 0.25f64).sqrt()).abs() < 1e-15);
            assert!((a[2] - (0.7 / 6.0 * 0.25f64).sqrt()).abs() < 1e-15);
            assert_eq!(a[3], 0.0);
        }
        let d2q9 = make_velocity_set(VelocitySetName::D2Q9);
        assert!(matches!(
            static_collision_circuit(&rho, 0.1, &d2q9),
            Err(QlbmError::Usage(_))
        ));
    }
}
