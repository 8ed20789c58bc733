use std::path::{Path, PathBuf};

use serde::Serialize;

use qlbm::engine::{enumerate_branches, oracle_leaf_count, GateReport, GateStats};
use qlbm::experiments::{
    builtin_case, builtin_cases, chi_square_homogeneity, median, run_case, CaseConfig,
    CaseReport, ChiSquareTest, Mode,
};
use qlbm::lattice::{run_digital, LatticeGrid};
use qlbm::{QlbmError, Result};

use crate::output::{density_csv, Outputs};
use crate::CaseArgs;

/// Loads the case named by `args` and applies its overrides.
fn load(args: &CaseArgs) -> Result<(CaseConfig, PathBuf)> {
    let (mut config, stem) = match (&args.config, &args.case) {
        (Some(path), _) => {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "case".into());
            (CaseConfig::from_path(path)?, stem)
        }
        (None, Some(name)) => {
            let config = builtin_case(name).ok_or_else(|| {
                QlbmError::Config(format!(
                    "no shipped case named `{name}`; see `qlbm list-cases`"
                ))
            })?;
            (config, name.clone())
        }
        (None, None) => return Err(QlbmError::Config("no case given".into())),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(shots) = args.shots {
        config.shots = shots;
    }
    if let Some(steps) = args.steps {
        config.steps = steps;
    }
    if let Some(mode) = args.mode {
        config.mode = mode;
    }
    if let Some(dir) = &args.output_dir {
        config.output_dir = Some(dir.clone());
    }
    config.validate()?;
    let name = config.name.clone().unwrap_or(stem);
    let out = config
        .output_dir
        .clone()
        .unwrap_or_else(|| Path::new("qlbm-output").join(name));
    Ok((config, out))
}

fn grid_of(config: &CaseConfig) -> Result<LatticeGrid> {
    LatticeGrid::new(&config.grid)
}

#[derive(Serialize)]
struct RunReport<'a> {
    mape_percent: f64,
    seed: u64,
    initial_mass: f64,
    estimate_mass: f64,
    gate_stats: &'a GateStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    gate_report: Option<&'a GateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tree_nodes: Option<u64>,
    config: &'a CaseConfig,
    wall_time_s: f64,
}

fn add_case_files(outputs: &mut Outputs, dir: &Path, report: &CaseReport) -> Result<()> {
    let grid = grid_of(&report.config)?;
    let initial_mass = report.config.inputs()?.rho0.total_mass();
    outputs.add_json(
        dir.join("report.json"),
        &RunReport {
            mape_percent: report.mape_percent,
            seed: report.seed,
            initial_mass,
            estimate_mass: report.estimate_mass(),
            gate_stats: &report.gate_stats,
            gate_report: report.gate_report.as_ref(),
            tree_nodes: report.tree_nodes,
            config: &report.config,
            wall_time_s: report.wall_time_s,
        },
    );
    outputs.add(
        dir.join("density.csv"),
        density_csv(
            &grid,
            &[
                ("rho_digital", &report.rho_digital),
                ("rho_estimate", &report.rho_estimate),
                ("rel_error", &report.rel_error),
            ],
        ),
    );
    Ok(())
}

fn summary(report: &CaseReport) -> String {
    let c = &report.config;
    let mut line = format!(
        "{} {:?} T={} mode={}",
        c.velocity_set, c.grid, c.steps, c.mode
    );
    if c.mode.is_sampled() {
        line.push_str(&format!(" shots={} seed={}", c.shots, c.seed));
    }
    line.push_str(&format!(" MAPE={:.4}%", report.mape_percent));
    if let Some(g) = &report.gate_report {
        line.push_str(&format!(
            "\n  ucry fraction {:.5} (expected {:.5}), cnot-equivalents {}, mid-circuit measurements {}",
            g.ucry_fraction, g.expected_ucry_fraction, g.cnot_equivalents, g.mid_circuit_measurements
        ));
    }
    line
}

pub fn run(args: &CaseArgs, quiet: bool) -> Result<()> {
    let (config, out) = load(args)?;
    let report = run_case(&config)?;
    let mut outputs = Outputs::default();
    add_case_files(&mut outputs, &out, &report)?;
    outputs.commit()?;
    if !quiet {
        println!("{}", summary(&report));
        println!("  wrote {}", out.display());
    }
    Ok(())
}

pub fn sweep_shots(args: &CaseArgs, shots: &[u64], seeds: u64, quiet: bool) -> Result<()> {
    let (config, out) = load(args)?;
    if !config.mode.is_sampled() {
        return Err(QlbmError::Config(format!(
            "shot sweeps need a sampling mode, not {}",
            config.mode
        )));
    }
    if seeds == 0 {
        return Err(QlbmError::Config("--seeds must be at least 1".into()));
    }
    let mut list = shots.to_vec();
    list.sort_unstable();
    list.dedup();
    let mut outputs = Outputs::default();
    let mut csv = String::from("shots,seeds,mape_percent\n");
    for &s in &list {
        let mut mapes = Vec::new();
        for i in 0..seeds {
            let mut c = config.clone();
            c.shots = s;
            c.seed = config.seed + i;
            c.validate()?;
            let report = run_case(&c)?;
            let dir = if seeds == 1 {
                out.join(format!("shots-{s}"))
            } else {
                out.join(format!("shots-{s}-seed-{}", c.seed))
            };
            add_case_files(&mut outputs, &dir, &report)?;
            if !quiet {
                println!("{}", summary(&report));
            }
            mapes.push(report.mape_percent);
        }
        let m = median(&mapes).expect("at least one seed");
        csv.push_str(&format!("{s},{seeds},{m}\n"));
    }
    outputs.add(out.join("sweep.csv"), csv);
    outputs.commit()?;
    if !quiet {
        println!("  wrote {}", out.join("sweep.csv").display());
    }
    Ok(())
}

pub fn sweep_steps(args: &CaseArgs, steps: &[usize], quiet: bool) -> Result<()> {
    let (config, out) = load(args)?;
    let mut list = steps.to_vec();
    list.sort_unstable();
    list.dedup();
    let mut outputs = Outputs::default();
    let mut csv = String::from("steps,mape_percent\n");
    for &t in &list {
        let mut c = config.clone();
        c.steps = t;
        c.validate()?;
        let report = run_case(&c)?;
        add_case_files(&mut outputs, &out.join(format!("steps-{t}")), &report)?;
        if !quiet {
            println!("{}", summary(&report));
        }
        csv.push_str(&format!("{t},{}\n", report.mape_percent));
    }
    outputs.add(out.join("sweep.csv"), csv);
    outputs.commit()?;
    if !quiet {
        println!("  wrote {}", out.join("sweep.csv").display());
    }
    Ok(())
}

#[derive(Serialize)]
struct ModeSummary<'a> {
    mode: Mode,
    mape_percent: f64,
    gate_stats: &'a GateStats,
}

/// Hybrid minus dynamic, per counter.
#[derive(Serialize)]
struct GateDelta {
    selection_rotations: i64,
    selection_measurements: i64,
    mid_circuit_measurements: i64,
    ancilla_resets: i64,
    ucry_applications: i64,
    cnot_equivalents: i64,
    pair_measurements: i64,
    streaming_applications: i64,
}

impl GateDelta {
    fn between(dynamic: &GateStats, hybrid: &GateStats) -> Self {
        let d = |a: u64, b: u64| b as i64 - a as i64;
        GateDelta {
            selection_rotations: d(dynamic.selection_rotations, hybrid.selection_rotations),
            selection_measurements: d(dynamic.selection_measurements, hybrid.selection_measurements),
            mid_circuit_measurements: d(
                dynamic.mid_circuit_measurements(),
                hybrid.mid_circuit_measurements(),
            ),
            ancilla_resets: d(dynamic.ancilla_resets, hybrid.ancilla_resets),
            ucry_applications: d(dynamic.ucry_applications, hybrid.ucry_applications),
            cnot_equivalents: d(dynamic.cnot_equivalents, hybrid.cnot_equivalents),
            pair_measurements: d(dynamic.pair_measurements, hybrid.pair_measurements),
            streaming_applications: d(dynamic.streaming_applications, hybrid.streaming_applications),
        }
    }
}

#[derive(Serialize)]
struct Comparison<'a> {
    seed: u64,
    shots: u64,
    steps: usize,
    dynamic: ModeSummary<'a>,
    hybrid: ModeSummary<'a>,
    chi_square: ChiSquareTest,
    /// Homogeneity not rejected at significance 0.01.
    chi_square_passes: bool,
    gate_delta: GateDelta,
    config: &'a CaseConfig,
}

pub fn compare_hybrid(args: &CaseArgs, quiet: bool) -> Result<()> {
    let (config, out) = load(args)?;
    let mut dynamic_cfg = config.clone();
    if !matches!(dynamic_cfg.mode, Mode::Sampled | Mode::Ensemble) {
        dynamic_cfg.mode = Mode::Ensemble;
    }
    let mut hybrid_cfg = config.clone();
    hybrid_cfg.mode = Mode::Hybrid;
    dynamic_cfg.validate()?;
    hybrid_cfg.validate()?;
    let dynamic = run_case(&dynamic_cfg)?;
    let hybrid = run_case(&hybrid_cfg)?;
    let empty = Vec::new();
    let chi = chi_square_homogeneity(
        dynamic.counts.as_ref().unwrap_or(&empty),
        hybrid.counts.as_ref().unwrap_or(&empty),
    )?;
    let comparison = Comparison {
        seed: config.seed,
        shots: config.shots,
        steps: config.steps,
        dynamic: ModeSummary {
            mode: dynamic_cfg.mode,
            mape_percent: dynamic.mape_percent,
            gate_stats: &dynamic.gate_stats,
        },
        hybrid: ModeSummary {
            mode: Mode::Hybrid,
            mape_percent: hybrid.mape_percent,
            gate_stats: &hybrid.gate_stats,
        },
        chi_square: chi,
        chi_square_passes: !chi.degenerate && chi.passes(0.01),
        gate_delta: GateDelta::between(&dynamic.gate_stats, &hybrid.gate_stats),
        config: &config,
    };
    let grid = grid_of(&config)?;
    let mut outputs = Outputs::default();
    outputs.add_json(out.join("compare.json"), &comparison);
    outputs.add(
        out.join("density.csv"),
        density_csv(
            &grid,
            &[
                ("rho_digital", &dynamic.rho_digital),
                ("rho_dynamic", &dynamic.rho_estimate),
                ("rho_hybrid", &hybrid.rho_estimate),
            ],
        ),
    );
    outputs.commit()?;
    if !quiet {
        println!(
            "dynamic ({}) MAPE={:.4}%  hybrid MAPE={:.4}%",
            dynamic_cfg.mode, dynamic.mape_percent, hybrid.mape_percent
        );
        if chi.degenerate {
            println!("  chi-square degenerate (too few counts per site)");
        } else {
            println!(
                "  chi-square {:.3} on {} dof, p = {:.4}",
                chi.statistic, chi.dof, chi.p_value
            );
        }
        println!(
            "  selection measurements: dynamic {}, hybrid {}",
            dynamic.gate_stats.selection_measurements, hybrid.gate_stats.selection_measurements
        );
        println!("  wrote {}", out.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleReport<'a> {
    steps: usize,
    outcome_sequences: u64,
    max_abs_diff: f64,
    tolerance: f64,
    passed: bool,
    config: &'a CaseConfig,
}

pub fn validate_oracle(args: &CaseArgs, tolerance: f64, quiet: bool) -> Result<()> {
    let (config, out) = load(args)?;
    let inputs = config.inputs()?;
    let exact = enumerate_branches(&inputs.rho0, &inputs.u, &inputs.set, config.steps)?;
    let digital = run_digital(&inputs.rho0, &inputs.u, &inputs.set, config.steps)?;
    let diff = exact.max_abs_diff(&digital);
    if diff.is_nan() || diff >= tolerance {
        return Err(QlbmError::Internal(format!(
            "exact enumeration differs from the classical solver by {diff:e} (tolerance {tolerance:e})"
        )));
    }
    let mut outputs = Outputs::default();
    outputs.add_json(
        out.join("oracle.json"),
        &OracleReport {
            steps: config.steps,
            outcome_sequences: oracle_leaf_count(&inputs.set, config.steps).unwrap_or(u64::MAX),
            max_abs_diff: diff,
            tolerance,
            passed: true,
            config: &config,
        },
    );
    outputs.add(
        out.join("density.csv"),
        density_csv(
            &inputs.grid,
            &[
                ("rho_digital", digital.values()),
                ("rho_oracle", exact.values()),
            ],
        ),
    );
    outputs.commit()?;
    if !quiet {
        println!(
            "oracle matches classical solver: max |diff| = {diff:.3e} over {} sites, T={}",
            inputs.grid.sites(),
            config.steps
        );
    }
    Ok(())
}

pub fn list_cases(write: Option<&Path>, quiet: bool) -> Result<()> {
    let cases = builtin_cases();
    let mut outputs = Outputs::default();
    for c in &cases {
        let name = c.name.as_deref().unwrap_or("case");
        if !quiet {
            println!(
                "{name:<22} {} {:<9} T={:<4} shots={:<9} mode={}",
                c.velocity_set,
                format!("{:?}", c.grid),
                c.steps,
                c.shots,
                c.mode
            );
        }
        if let Some(dir) = write {
            outputs.add(dir.join(format!("{name}.json")), format!("{}\n", c.to_json()));
        }
    }
    outputs.commit()
}
