use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hamsynth::cost::CostMode;
use hamsynth::pauli::{standard_spec, ParamVector, Preset};
use hamsynth::targets::{builtin, BuiltinTarget};

use hamsynth_cli::config::{resolve, ExperimentConfig};
use hamsynth_cli::runner::{
    self, persist_record, persist_sweep, reproduce_config, ReproduceTarget,
};
use hamsynth_cli::CliError;

/// Find coupling strengths of a time-independent two-body Hamiltonian whose
/// evolution implements a target multi-qubit gate.
#[derive(Parser)]
#[command(name = "hamsynth", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize coupling strengths for the configured target gate.
    Synthesize {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured cost mode: exact | hst | hst-sampled.
        #[arg(long)]
        cost_mode: Option<String>,
        /// Shot count for hst-sampled mode.
        #[arg(long)]
        shots: Option<u64>,
        /// Sampler seed for hst-sampled mode.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured restart count.
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Evaluate fixed parameters (no optimization).
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated coefficient list aligned with the term set.
        #[arg(long)]
        theta: Option<String>,
        /// Use the preset's published coefficients.
        #[arg(long)]
        published: bool,
        /// Override the configured Trotter step count.
        #[arg(long)]
        steps_m: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-optimize (or re-evaluate) across Trotter step counts.
    SweepTrotter {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated list, e.g. 1,2,4,8.
        #[arg(long)]
        m_values: String,
        /// Evaluate the config's explicit parameters instead of re-optimizing.
        #[arg(long)]
        evaluate_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the shift-rule gradient against central differences.
    Gradcheck {
        /// Preset name: fig4a, fig4b, full_heisenberg, full_general.
        #[arg(long)]
        spec: String,
        /// Builtin target name.
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 3)]
        steps_m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a pinned reproduction recipe: toffoli or parity.
    Reproduce {
        which: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_cost_mode(
    name: &str,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<CostMode, CliError> {
    match name {
        "exact" => Ok(CostMode::ExactTrace),
        "hst" => Ok(CostMode::HsExact),
        "hst-sampled" => Ok(CostMode::HsSampled {
            shots: shots.unwrap_or(100_000),
            seed: seed.unwrap_or(0),
        }),
        other => Err(CliError::Config(format!(
            "unknown cost mode '{other}' (expected exact | hst | hst-sampled)"
        ))),
    }
}

fn parse_theta_list(text: &str) -> Result<ParamVector, CliError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse()).collect();
    values
        .map(ParamVector::new)
        .map_err(|e| CliError::Config(format!("bad --theta list: {e}")))
}

fn base_dir(config_path: &std::path::Path) -> PathBuf {
    config_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Synthesize {
            config,
            cost_mode,
            shots,
            seed,
            out,
            restarts,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(name) = cost_mode {
                cfg.cost_mode = parse_cost_mode(&name, shots, seed)?;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(restarts) = restarts {
                cfg.optimizer.restarts = restarts;
            }
            let dir = base_dir(&config);
            let outcome = runner::run_synthesize(&cfg, &dir)?;
            let circuit = runner::circuit_text(&cfg, &dir, &outcome.record.final_theta)?;
            let path = persist_record(
                &outcome.record,
                Some(&outcome.trace),
                Some(&circuit),
                &cfg.output_dir,
            )?;
            println!(
                "synthesize: trotterized_fidelity={:.6} exact_fidelity={:.6} (run {} of {}, {} iterations) -> {}",
                outcome.record.trotterized_fidelity,
                outcome.record.exact_fidelity,
                outcome.trace.restart_index + 1,
                cfg.optimizer.restarts + 1,
                outcome.trace.iterations.len(),
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate {
            config,
            theta,
            published,
            steps_m,
            out,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(m) = steps_m {
                cfg.trotter.steps_m = m;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let dir = base_dir(&config);
            let resolved = resolve(&cfg, &dir)?;
            let explicit = theta.as_deref().map(parse_theta_list).transpose()?;
            let theta = runner::evaluate_theta(
                &cfg,
                resolved.published_params.as_ref(),
                explicit,
                published,
            )?;
            let record = runner::run_evaluate(&cfg, &dir, &theta)?;
            let circuit = runner::circuit_text(&cfg, &dir, &theta)?;
            let path = persist_record(&record, None, Some(&circuit), &cfg.output_dir)?;
            println!(
                "evaluate: trotterized_fidelity={:.6} exact_fidelity={:.6} two_qubit_gates={} -> {}",
                record.trotterized_fidelity,
                record.exact_fidelity,
                record.two_qubit_gate_count,
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::SweepTrotter {
            config,
            m_values,
            evaluate_only,
            out,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let m_values: Vec<usize> = m_values
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Config(format!("bad --m-values list: {e}")))?;
            let outcome =
                runner::run_sweep_trotter(&cfg, &base_dir(&config), &m_values, !evaluate_only)?;
            let path = persist_sweep(&outcome, &cfg.output_dir)?;
            for row in &outcome.rows {
                println!("sweep: m={} exact_fidelity={:.6}", row.m, row.exact_fidelity);
            }
            println!("sweep written to {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Gradcheck {
            spec,
            target,
            steps_m,
            seed,
        } => {
            let target = builtin(target.parse::<BuiltinTarget>()?);
            let preset: Preset = spec.parse()?;
            let spec = standard_spec(preset, target.n_qubits)?;
            let report = runner::run_gradcheck(&spec, &target, steps_m, seed)?;
            for point in &report.points {
                println!(
                    "gradcheck point {}: max relative error {:.3e} (component {}) {}",
                    point.point,
                    point.max_relative_error,
                    point.worst_component,
                    if point.pass { "ok" } else { "MISMATCH" }
                );
            }
            if report.pass {
                println!("gradcheck: PASS");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("gradcheck: FAIL");
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Reproduce { which, out } => {
            let which: ReproduceTarget = which.parse()?;
            let out = out.unwrap_or_else(|| {
                PathBuf::from(match which {
                    ReproduceTarget::Toffoli => "out/reproduce-toffoli",
                    ReproduceTarget::Parity => "out/reproduce-parity",
                })
            });
            let cfg = reproduce_config(which, out.clone());
            let base = PathBuf::from(".");
            let outcome = runner::run_synthesize(&cfg, &base)?;
            let circuit = runner::circuit_text(&cfg, &base, &outcome.record.final_theta)?;
            let path = persist_record(
                &outcome.record,
                Some(&outcome.trace),
                Some(&circuit),
                &out,
            )?;
            println!(
                "reproduce {:?}: trotterized_fidelity={:.6} exact_fidelity={:.6} in {:.1}s -> {}",
                which,
                outcome.record.trotterized_fidelity,
                outcome.record.exact_fidelity,
                outcome.record.wall_time_seconds,
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.diagnostics());
            ExitCode::FAILURE
        }
    }
}
