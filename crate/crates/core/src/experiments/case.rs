use std::time::Instant;

use serde::Serialize;

use crate::engine::rng::{stream_rng, Domain};
use crate::engine::{
    enumerate_branches, estimate_density, gate_accounting, presample_instructions, run_ensemble,
    run_hybrid, GateReport, GateStats, ShotEstimate,
};
use crate::error::Result;
use crate::lattice::{run_digital, DensityField, VelocitySetName};

use super::config::{CaseConfig, InitialCondition, Mode, VelocitySpec};
use super::metrics::{mape, relative_error};
use super::velocity::DoubleVortex;

/// Result of one case: reference, estimate and their disagreement.
#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub config: CaseConfig,
    pub seed: u64,
    pub mape_percent: f64,
    pub rho_digital: Vec<f64>,
    pub rho_estimate: Vec<f64>,
    /// `|digital - estimate| / digital` per site.
    pub rel_error: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
    pub gate_stats: GateStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate_report: Option<GateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_nodes: Option<u64>,
    /// Excluded from the determinism contract.
    pub wall_time_s: f64,
}

impl CaseReport {
    pub fn estimate_mass(&self) -> f64 {
        self.rho_estimate.iter().sum()
    }
}

/// Runs the selected estimator and the classical reference.
pub fn run_case(config: &CaseConfig) -> Result<CaseReport> {
    let start = Instant::now();
    config.validate()?;
    let inputs = config.inputs()?;
    let (set, rho0, u) = (&inputs.set, &inputs.rho0, &inputs.u);
    let steps = config.steps;
    let digital = run_digital(rho0, u, set, steps)?;

    let sampled: Option<ShotEstimate> = match config.mode {
        Mode::Digital | Mode::Oracle => None,
        Mode::Sampled => Some(estimate_density(rho0, u, set, steps, config.shots, config.seed)?),
        Mode::Ensemble => Some(run_ensemble(rho0, u, set, steps, config.shots, config.seed)?),
        Mode::Hybrid => {
            let mut rng = stream_rng(config.seed, Domain::Instructions, 0);
            let instructions = presample_instructions(set, steps.max(1), config.shots, &mut rng)?;
            if steps == 0 {
                let empty = crate::engine::InstructionArray::from_codes(0, config.shots, Vec::new())?;
                Some(run_hybrid(rho0, u, set, &empty, config.seed)?)
            } else {
                Some(run_hybrid(rho0, u, set, &instructions, config.seed)?)
            }
        }
    };
    let estimate: DensityField = match (&sampled, config.mode) {
        (Some(s), _) => s.estimate.clone(),
        (None, Mode::Oracle) => enumerate_branches(rho0, u, set, steps)?,
        (None, _) => digital.clone(),
    };

    let rel_error = relative_error(&digital, &estimate)?;
    let mape_percent = mape(&digital, &estimate)?;
    let gate_report = sampled
        .as_ref()
        .map(|s| gate_accounting(s, set, inputs.grid.qubits()));
    Ok(CaseReport {
        config: config.clone(),
        seed: config.seed,
        mape_percent,
        rho_digital: digital.into_values(),
        rho_estimate: estimate.into_values(),
        rel_error,
        counts: sampled.as_ref().map(|s| s.counts.clone()),
        gate_stats: sampled.as_ref().map(|s| s.stats).unwrap_or_default(),
        gate_report,
        tree_nodes: sampled.as_ref().and_then(|s| s.tree_nodes),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[allow(clippy::too_many_arguments)]
fn case(
    name: &str,
    set: VelocitySetName,
    grid: &[usize],
    ic: InitialCondition,
    u: VelocitySpec,
    steps: usize,
    shots: u64,
    mode: Mode,
) -> CaseConfig {
    CaseConfig {
        name: Some(name.to_owned()),
        velocity_set: set,
        grid: grid.to_vec(),
        cs2: crate::lattice::DEFAULT_CS2,
        initial_condition: ic,
        velocity_field: u,
        steps,
        shots,
        mode,
        seed: 0,
        output_dir: None,
    }
}

/// The validation cases shipped with the crate.
pub fn builtin_cases() -> Vec<CaseConfig> {
    use VelocitySetName::{D1Q3, D2Q9};
    let boxcar = InitialCondition::boxcar;
    let vortex = || VelocitySpec::DoubleVortex(DoubleVortex::default());
    let ones = || InitialCondition::Uniform { value: 1.0 };
    let mut cases = vec![
        case(
            "d1q3-boxcar-t1",
            D1Q3,
            &[32],
            boxcar(),
            VelocitySpec::Uniform { u: vec![0.1] },
            1,
            1_000_000,
            Mode::Ensemble,
        ),
        case(
            "d2q9-boxcar-t1",
            D2Q9,
            &[16, 16],
            boxcar(),
            VelocitySpec::Uniform { u: vec![0.1, 0.1] },
            1,
            1_000_000,
            Mode::Ensemble,
        ),
    ];
    for t in [10, 50, 100, 150, 200, 250] {
        cases.push(case(
            &format!("d1q3-boxcar-t{t}"),
            D1Q3,
            &[32],
            boxcar(),
            VelocitySpec::Uniform { u: vec![0.1] },
            t,
            10_000_000,
            Mode::Ensemble,
        ));
    }
    for t in [5, 10, 25] {
        cases.push(case(
            &format!("d2q9-vortex-t{t}"),
            D2Q9,
            &[32, 16],
            ones(),
            vortex(),
            t,
            10_000_000,
            Mode::Ensemble,
        ));
    }
    cases.push(case(
        "d1q3-linear-hybrid",
        D1Q3,
        &[8],
        InitialCondition::Uniform { value: 0.1 },
        VelocitySpec::linear(),
        10,
        1_000_000,
        Mode::Hybrid,
    ));
    cases
}

/// Looks up a shipped case by name.
pub fn builtin_case(name: &str) -> Option<CaseConfig> {
    builtin_cases()
        .into_iter()
        .find(|c| c.name.as_deref() == Some(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_mode_has_zero_error() {
        let mut c = builtin_case("d1q3-linear-hybrid").unwrap();
        c.mode = Mode::Oracle;
        c.steps = 3;
        let r = run_case(&c).unwrap();
        assert!(r.mape_percent < 1e-8);
        assert!(r.counts.is_none());
    }

    #[test]
    fn report_is_consistent() {
        let mut c = builtin_case("d1q3-boxcar-t1").unwrap();
        c.shots = 20_000;
        c.seed = 3;
        let r = run_case(&c).unwrap();
        let mean: f64 = r.rel_error.iter().sum::<f64>() / r.rel_error.len() as f64;
        assert!((mean * 100.0 - r.mape_percent).abs() < 1e-12);
        assert!((r.estimate_mass() - 3.8).abs() < 1e-12);
        let again = run_case(&c).unwrap();
        assert_eq!(r.rho_estimate, again.rho_estimate);
        assert_eq!(r.gate_stats, again.gate_stats);
    }

    #[test]
    fn every_builtin_case_validates_and_round_trips() {
        for c in builtin_cases() {
            c.validate().unwrap();
            assert_eq!(CaseConfig::from_json(&c.to_json()).unwrap(), c);
        }
    }

    #[test]
    fn seed_changes_estimate_not_reference() {
        let mut c = builtin_case("d1q3-boxcar-t1").unwrap();
        c.shots = 5_000;
        let a = run_case(&c).unwrap();
        c.seed = 1;
        let b = run_case(&c).unwrap();
        assert_eq!(a.rho_digital, b.rho_digital);
        assert_ne!(a.rho_estimate, b.rho_estimate);
    }
}
