//! Experiment execution and persistence: synthesis, fixed-parameter
//! evaluation, Trotter-step sweeps, gradient self-checks and the pinned
//! reproduction recipes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use hamsynth::cost::{cost, operator_fidelity, CostMode};
use hamsynth::linalg::expm_hermitian;
use hamsynth::optimize::{
    gradient_fd, gradient_shift, minimize, trace_to_csv, InitStrategy, OptimizationTrace,
    OptimizerConfig,
};
use hamsynth::pauli::{hamiltonian_matrix, HamiltonianSpec, ParamVector};
use hamsynth::targets::{check_conditions, ConditionsReport, TargetGate, DEFAULT_CONDITION_TOL};
use hamsynth::trotter::{circuit_unitary, trotterize, two_qubit_gate_count, TrotterConfig, TrotterMode};

use crate::config::{resolve, ExperimentConfig, ResolvedExperiment, SpecRef, TargetRef};
use crate::CliError;

/// Machine-readable outcome of a run, written as `result.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    /// The configuration that produced this record; re-running it
    /// regenerates the record (wall time aside).
    pub config: ExperimentConfig,
    pub final_theta: ParamVector,
    /// Target vs the Trotterized circuit U_QC(theta).
    pub trotterized_fidelity: f64,
    /// Target vs the exact evolution e^{-i H(theta)}.
    pub exact_fidelity: f64,
    pub two_qubit_gate_count: usize,
    pub conditions: ConditionsReport,
    pub trace_path: Option<PathBuf>,
    pub wall_time_seconds: f64,
}

/// Result of a synthesis run, before any files are written.
pub struct SynthesisOutcome {
    pub record: ResultRecord,
    pub trace: OptimizationTrace,
}

fn build_record(
    config: &ExperimentConfig,
    resolved: &ResolvedExperiment,
    theta: &ParamVector,
    trace_path: Option<PathBuf>,
    wall_time_seconds: f64,
) -> Result<ResultRecord, CliError> {
    let circuit = trotterize(&resolved.spec, theta, &config.trotter)?;
    let u_circuit = circuit_unitary(&circuit)?;
    let trotterized_fidelity = operator_fidelity(&resolved.target.matrix, &u_circuit)?;
    let h = hamiltonian_matrix(&resolved.spec, theta)?;
    let exact_fidelity =
        operator_fidelity(&resolved.target.matrix, &expm_hermitian(&h, 1.0)?)?;
    let conditions = check_conditions(&h, &resolved.target, DEFAULT_CONDITION_TOL)?;
    Ok(ResultRecord {
        config: config.clone(),
        final_theta: theta.clone(),
        trotterized_fidelity,
        exact_fidelity,
        two_qubit_gate_count: two_qubit_gate_count(&circuit),
        conditions,
        trace_path,
        wall_time_seconds,
    })
}

/// Optimize the configured problem and assemble the result record.
pub fn run_synthesize(
    config: &ExperimentConfig,
    base_dir: &Path,
) -> Result<SynthesisOutcome, CliError> {
    let resolved = resolve(config, base_dir)?;
    let start = Instant::now();
    let trace = minimize(
        &resolved.spec,
        &resolved.target.matrix,
        &config.trotter,
        &config.optimizer,
        &config.cost_mode,
    )?;
    let wall = start.elapsed().as_secs_f64();
    let record = build_record(
        config,
        &resolved,
        &trace.final_theta,
        Some(PathBuf::from("trace.csv")),
        wall,
    )?;
    Ok(SynthesisOutcome { record, trace })
}

/// Evaluate fixed parameters (no optimization).
pub fn run_evaluate(
    config: &ExperimentConfig,
    base_dir: &Path,
    theta: &ParamVector,
) -> Result<ResultRecord, CliError> {
    let resolved = resolve(config, base_dir)?;
    resolved.spec.check_params(theta)?;
    let start = Instant::now();
    build_record(
        config,
        &resolved,
        theta,
        None,
        start.elapsed().as_secs_f64(),
    )
}

/// Pick the parameter vector an `evaluate` run should use: an explicit list,
/// the preset's published values, or the config's explicit init.
pub fn evaluate_theta(
    config: &ExperimentConfig,
    resolved_published: Option<&ParamVector>,
    explicit: Option<ParamVector>,
    published_flag: bool,
) -> Result<ParamVector, CliError> {
    if let Some(theta) = explicit {
        return Ok(theta);
    }
    if published_flag {
        return resolved_published.cloned().ok_or_else(|| {
            CliError::Config("--published requires a preset with published values".into())
        });
    }
    if let InitStrategy::Explicit(theta) = &config.optimizer.init {
        return Ok(theta.clone());
    }
    if let Some(theta) = resolved_published {
        return Ok(theta.clone());
    }
    Err(CliError::Config(
        "no parameters to evaluate: pass --theta, --published, or an explicit optimizer init"
            .into(),
    ))
}

/// One row of a Trotter-step sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub exact_fidelity: f64,
}

pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub records: Vec<ResultRecord>,
}

/// Re-optimize (or re-evaluate, when `reoptimize` is false) for each step
/// count. Evaluation mode needs explicit parameters in the optimizer init.
pub fn run_sweep_trotter(
    config: &ExperimentConfig,
    base_dir: &Path,
    m_values: &[usize],
    reoptimize: bool,
) -> Result<SweepOutcome, CliError> {
    if m_values.is_empty() {
        return Err(CliError::Config("m-values must be nonempty".into()));
    }
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &m in m_values {
        let mut cfg = config.clone();
        cfg.trotter = TrotterConfig::new(m, config.trotter.mode)?;
        let record = if reoptimize {
            run_synthesize(&cfg, base_dir)?.record
        } else {
            let theta = match &cfg.optimizer.init {
                InitStrategy::Explicit(theta) => theta.clone(),
                _ => {
                    return Err(CliError::Config(
                        "evaluate-only sweep needs an explicit optimizer init".into(),
                    ))
                }
            };
            run_evaluate(&cfg, base_dir, &theta)?
        };
        rows.push(SweepRow {
            m,
            exact_fidelity: record.exact_fidelity,
        });
        records.push(record);
    }
    Ok(SweepOutcome { rows, records })
}

/// CSV for a sweep: `m,exact_fidelity`.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("m,exact_fidelity\n");
    for row in rows {
        out.push_str(&format!("{},{:?}\n", row.m, row.exact_fidelity));
    }
    out
}

/// Componentwise gradient comparison: a component passes when its deviation
/// is below `abs_guard` outright (near-zero reference values) or within
/// `rel_tol` relative to the reference.
pub fn compare_gradients(
    shift: &ParamVector,
    fd: &ParamVector,
    rel_tol: f64,
    abs_guard: f64,
) -> (bool, f64, usize) {
    let mut worst = 0.0f64;
    let mut worst_index = 0;
    for (j, (s, f)) in shift.values().iter().zip(fd.values()).enumerate() {
        let diff = (s - f).abs();
        let err = if diff < abs_guard {
            0.0
        } else {
            diff / f.abs().max(abs_guard)
        };
        if err > worst {
            worst = err;
            worst_index = j;
        }
    }
    (worst < rel_tol, worst, worst_index)
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckPoint {
    pub point: usize,
    pub max_relative_error: f64,
    pub worst_component: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub points: Vec<GradcheckPoint>,
    pub pass: bool,
}

pub const GRADCHECK_REL_TOL: f64 = 1e-4;
pub const GRADCHECK_ABS_GUARD: f64 = 1e-7;

/// Compare the shift-rule gradient against central differences at five
/// seeded random points.
pub fn run_gradcheck(
    spec: &HamiltonianSpec,
    target: &TargetGate,
    steps_m: usize,
    seed: u64,
) -> Result<GradcheckReport, CliError> {
    use rand::{Rng, SeedableRng};
    let cfg = TrotterConfig::new(steps_m, TrotterMode::Primitive)?;
    let costfn = |theta: &ParamVector| {
        cost(&target.matrix, spec, theta, &cfg, &CostMode::ExactTrace)
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut pass = true;
    for point in 0..5 {
        let theta = ParamVector::new(
            (0..spec.num_terms())
                .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect(),
        );
        let shift = gradient_shift(spec, &theta, &cfg, &target.matrix)?;
        let fd = gradient_fd(costfn, &theta, 1e-5)?;
        let (ok, worst, worst_component) =
            compare_gradients(&shift, &fd, GRADCHECK_REL_TOL, GRADCHECK_ABS_GUARD);
        pass &= ok;
        points.push(GradcheckPoint {
            point,
            max_relative_error: worst,
            worst_component,
            pass: ok,
        });
    }
    Ok(GradcheckReport { points, pass })
}

/// The bundled one-command reproduction recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReproduceTarget {
    Toffoli,
    Parity,
}

impl std::str::FromStr for ReproduceTarget {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "toffoli" => Ok(ReproduceTarget::Toffoli),
            "parity" => Ok(ReproduceTarget::Parity),
            other => Err(CliError::Config(format!(
                "unknown reproduction recipe '{other}' (expected 'toffoli' or 'parity')"
            ))),
        }
    }
}

/// Pinned configuration for a reproduction run. Seeds, learning rates and
/// step counts are fixed so the runs are deterministic.
pub fn reproduce_config(which: ReproduceTarget, output_dir: PathBuf) -> ExperimentConfig {
    let pi = std::f64::consts::PI;
    match which {
        ReproduceTarget::Toffoli => ExperimentConfig {
            target: TargetRef::Name("toffoli".into()),
            spec: SpecRef::Preset("full_general".into()),
            trotter: TrotterConfig {
                steps_m: 6,
                mode: TrotterMode::Primitive,
            },
            cost_mode: CostMode::ExactTrace,
            optimizer: OptimizerConfig {
                learning_rate: 0.3,
                max_iters: 500,
                cost_tolerance: 5e-3,
                grad_norm_tolerance: 1e-6,
                init: InitStrategy::Uniform {
                    lo: -pi,
                    hi: pi,
                    seed: 42,
                },
                restarts: 9,
            },
            output_dir,
        },
        ReproduceTarget::Parity => ExperimentConfig {
            target: TargetRef::Name("parity4".into()),
            spec: SpecRef::Preset("fig4b".into()),
            trotter: TrotterConfig {
                steps_m: 5,
                mode: TrotterMode::Primitive,
            },
            cost_mode: CostMode::ExactTrace,
            optimizer: OptimizerConfig {
                learning_rate: 0.2,
                max_iters: 500,
                cost_tolerance: 1e-4,
                grad_norm_tolerance: 1e-6,
                init: InitStrategy::Uniform {
                    lo: -pi,
                    hi: pi,
                    seed: 1,
                },
                restarts: 19,
            },
            output_dir,
        },
    }
}

/// Text dump of the Trotterized circuit a record's parameters produce.
pub fn circuit_text(
    config: &ExperimentConfig,
    base_dir: &Path,
    theta: &ParamVector,
) -> Result<String, CliError> {
    let resolved = resolve(config, base_dir)?;
    let circuit = trotterize(&resolved.spec, theta, &config.trotter)?;
    Ok(circuit.to_text())
}

/// Write a result record (and optional trace CSV / circuit dump) under
/// `out_dir`.
pub fn persist_record(
    record: &ResultRecord,
    trace: Option<&OptimizationTrace>,
    circuit: Option<&str>,
    out_dir: &Path,
) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let result_path = out_dir.join("result.json");
    fs::write(
        &result_path,
        serde_json::to_string_pretty(record).expect("record serializes"),
    )
    .map_err(|e| CliError::Config(format!("cannot write {}: {e}", result_path.display())))?;
    if let Some(trace) = trace {
        let trace_path = out_dir.join("trace.csv");
        fs::write(&trace_path, trace_to_csv(trace))
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", trace_path.display())))?;
    }
    if let Some(circuit) = circuit {
        let circuit_path = out_dir.join("circuit.txt");
        fs::write(&circuit_path, circuit).map_err(|e| {
            CliError::Config(format!("cannot write {}: {e}", circuit_path.display()))
        })?;
    }
    Ok(result_path)
}

pub fn persist_sweep(outcome: &SweepOutcome, out_dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join("sweep.csv");
    fs::write(&path, sweep_to_csv(&outcome.rows))
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
