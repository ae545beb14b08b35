//! Gradient computation and the classical descent loop.
//!
//! The shift-rule gradient is exact for the trace cost: every parameter
//! theta_j enters the circuit as m occurrences of e^{-i (theta_j / m) P_j}
//! with P_j involutory, so the cost is a degree-2 trigonometric polynomial
//! in each occurrence angle and the derivative of one occurrence is
//! C(phi + pi/4) - C(phi - pi/4). The per-parameter derivative averages the
//! m occurrence derivatives.
//!
//! Each of the 2 m Q shifted evaluations reuses cached prefix and suffix
//! products of the unshifted circuit, so it costs one sparse gate product
//! and a trace instead of a full circuit evaluation. The evaluations are
//! independent and run through the crate's data-parallel map.

use serde::{Deserialize, Serialize};

use crate::cost::{self, CostMode};
use crate::error::{Error, Result};
use crate::linalg::{trace_product, ComplexMatrix, MAX_QUBITS};
use crate::parallel;
use crate::pauli::{HamiltonianSpec, ParamVector};
use crate::trotter::{embed_gate, Circuit, Gate, TrotterConfig};

/// How the initial parameter vector of a descent run is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    Zeros,
    Uniform { lo: f64, hi: f64, seed: u64 },
    Explicit(ParamVector),
}

impl Default for InitStrategy {
    fn default() -> Self {
        InitStrategy::Uniform {
            lo: -std::f64::consts::PI,
            hi: std::f64::consts::PI,
            seed: 0,
        }
    }
}

/// Plain gradient-descent configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    pub cost_tolerance: f64,
    pub grad_norm_tolerance: f64,
    pub init: InitStrategy,
    /// Additional seeded runs beyond the first; the best run is returned and
    /// the loop stops early once a run meets `cost_tolerance`.
    pub restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_iters: 500,
            cost_tolerance: 1e-4,
            grad_norm_tolerance: 1e-6,
            init: InitStrategy::default(),
            restarts: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        let tolerances_ok = self.cost_tolerance > 0.0 && self.grad_norm_tolerance > 0.0;
        if !tolerances_ok {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if let InitStrategy::Uniform { lo, hi, .. } = self.init {
            let range_ok = lo.is_finite() && hi.is_finite() && lo < hi;
            if !range_ok {
                return Err(Error::InvalidConfig(format!(
                    "uniform init needs lo < hi, got [{lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

/// Why a descent run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    CostTol,
    GradTol,
    MaxIters,
}

/// One recorded iteration of a descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub cost: f64,
    pub theta: ParamVector,
    pub grad_norm: f64,
}

/// Full record of a descent run (the best run, when restarts are used).
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub iterations: Vec<IterationRecord>,
    pub final_theta: ParamVector,
    pub final_cost: f64,
    pub termination_reason: TerminationReason,
    /// Set when the run was cut off after the cost rose for 50 consecutive
    /// iterations.
    pub diverged: bool,
    /// Which seeded run produced this trace.
    pub restart_index: usize,
}

/// Central-difference gradient, (C(theta + h e_j) - C(theta - h e_j)) / 2h.
/// The independent oracle the shift rule is checked against.
pub fn gradient_fd<F>(costfn: F, theta: &ParamVector, h: f64) -> Result<ParamVector>
where
    F: Fn(&ParamVector) -> Result<f64>,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidConfig("step h must be positive".into()));
    }
    let mut grad = Vec::with_capacity(theta.len());
    for j in 0..theta.len() {
        let mut plus = theta.clone();
        plus.values_mut()[j] += h;
        let mut minus = theta.clone();
        minus.values_mut()[j] -= h;
        grad.push((costfn(&plus)? - costfn(&minus)?) / (2.0 * h));
    }
    Ok(ParamVector::new(grad))
}

/// Cached circuit products shared by all shifted evaluations of one gradient.
struct ShiftWorkspace {
    /// Embedded unshifted gate per term (identical across slices).
    base: Vec<ComplexMatrix>,
    plus: Vec<ComplexMatrix>,
    minus: Vec<ComplexMatrix>,
    /// prefix[o] = G_{o-1} ... G_0 (prefix[0] = I).
    prefix: Vec<ComplexMatrix>,
    /// tail[o] = U_target† G_{Qm-1} ... G_{o+1}.
    tail: Vec<ComplexMatrix>,
    dim: usize,
}

impl ShiftWorkspace {
    fn build(
        spec: &HamiltonianSpec,
        theta: &ParamVector,
        cfg: &TrotterConfig,
        u_target: &ComplexMatrix,
    ) -> Result<Self> {
        let n = spec.n_qubits();
        let q = spec.num_terms();
        let m = cfg.steps_m;
        let dim = 1usize << n;
        let shift = std::f64::consts::FRAC_PI_4;

        let embed_term = |j: usize, delta: f64| -> Result<ComplexMatrix> {
            let term = spec.terms()[j];
            let gate = Gate::TermExp {
                term,
                angle: theta.values()[j] / m as f64 + delta,
            };
            embed_gate(&gate.matrix(), &gate.operands(), n)
        };
        let base: Vec<ComplexMatrix> = (0..q)
            .map(|j| embed_term(j, 0.0))
            .collect::<Result<_>>()?;
        let plus: Vec<ComplexMatrix> = (0..q)
            .map(|j| embed_term(j, shift))
            .collect::<Result<_>>()?;
        let minus: Vec<ComplexMatrix> = (0..q)
            .map(|j| embed_term(j, -shift))
            .collect::<Result<_>>()?;

        let total = q * m;
        let mut prefix = Vec::with_capacity(total + 1);
        prefix.push(ComplexMatrix::identity(dim));
        for o in 0..total {
            let next = base[o % q].matmul(&prefix[o])?;
            prefix.push(next);
        }
        let mut tail = vec![ComplexMatrix::zeros(0); total];
        let mut acc = u_target.adjoint();
        for o in (0..total).rev() {
            tail[o] = acc.clone();
            acc = acc.matmul(&base[o % q])?;
        }
        Ok(Self {
            base,
            plus,
            minus,
            prefix,
            tail,
            dim,
        })
    }

    /// Cost with occurrence `o` replaced by its +/- shifted gate.
    fn shifted_cost(&self, o: usize, plus: bool) -> f64 {
        let q = self.base.len();
        let gate = if plus { &self.plus[o % q] } else { &self.minus[o % q] };
        let replaced = gate.matmul(&self.prefix[o]).expect("same dim");
        let z = trace_product(&self.tail[o], &replaced).expect("same dim");
        let d = self.dim as f64;
        1.0 - z.norm_sqr() / (d * d)
    }
}

/// Exact shift-rule gradient of the trace cost.
pub fn gradient_shift(
    spec: &HamiltonianSpec,
    theta: &ParamVector,
    cfg: &TrotterConfig,
    u_target: &ComplexMatrix,
) -> Result<ParamVector> {
    spec.check_params(theta)?;
    cfg.validate()?;
    check_target_dim(spec, u_target)?;
    let ws = ShiftWorkspace::build(spec, theta, cfg, u_target)?;
    let q = spec.num_terms();
    let m = cfg.steps_m;
    // A shifted evaluation costs O(dim^2); fan out only past this work size.
    let worthwhile = q * m * ws.dim * ws.dim >= 1 << 16;
    let per_occurrence = parallel::map_indexed_when(worthwhile, q * m, |o| {
        ws.shifted_cost(o, true) - ws.shifted_cost(o, false)
    });
    Ok(collect_occurrences(&per_occurrence, q, m))
}

/// Shift-rule gradient evaluated on the finite-shot overlap estimator.
/// Each shifted circuit is sampled with a seed derived from `seed_base`,
/// the occurrence index and the shift sign.
pub fn gradient_shift_sampled(
    spec: &HamiltonianSpec,
    theta: &ParamVector,
    cfg: &TrotterConfig,
    u_target: &ComplexMatrix,
    shots: u64,
    seed_base: u64,
) -> Result<ParamVector> {
    spec.check_params(theta)?;
    cfg.validate()?;
    check_target_dim(spec, u_target)?;
    if 2 * spec.n_qubits() > MAX_QUBITS {
        return Err(Error::Capacity {
            dim: 1 << (2 * spec.n_qubits()),
            max: 1 << MAX_QUBITS,
        });
    }
    let q = spec.num_terms();
    let m = cfg.steps_m;
    let shift = std::f64::consts::FRAC_PI_4;
    let eval = |o: usize, delta: f64, seed: u64| -> Result<f64> {
        let circuit = shifted_primitive_circuit(spec, theta, m, o, delta)?;
        let state = cost::hs_output_state(&circuit, u_target)?;
        Ok(1.0 - cost::sample_state_all_zeros(&state, shots, seed))
    };
    // Each evaluation simulates and samples the full overlap-test circuit,
    // so the tasks are always heavyweight enough to fan out.
    let per_occurrence: Vec<Result<f64>> = parallel::map_indexed_when(true, q * m, |o| {
        let plus = eval(o, shift, mix_seed(seed_base, 2 * o as u64))?;
        let minus = eval(o, -shift, mix_seed(seed_base, 2 * o as u64 + 1))?;
        Ok(plus - minus)
    });
    let per_occurrence = per_occurrence.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(collect_occurrences(&per_occurrence, q, m))
}

fn collect_occurrences(per_occurrence: &[f64], q: usize, m: usize) -> ParamVector {
    let mut grad = vec![0.0; q];
    for l in 0..m {
        for j in 0..q {
            grad[j] += per_occurrence[l * q + j];
        }
    }
    for g in &mut grad {
        *g /= m as f64;
    }
    ParamVector::new(grad)
}

fn mix_seed(base: u64, salt: u64) -> u64 {
    base.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Primitive circuit with one occurrence's angle offset by `delta`.
fn shifted_primitive_circuit(
    spec: &HamiltonianSpec,
    theta: &ParamVector,
    m: usize,
    occurrence: usize,
    delta: f64,
) -> Result<Circuit> {
    let q = spec.num_terms();
    let mut circuit = Circuit::new(spec.n_qubits())?;
    for o in 0..q * m {
        let j = o % q;
        let mut angle = theta.values()[j] / m as f64;
        if o == occurrence {
            angle += delta;
        }
        circuit.term_exp(spec.terms()[j], angle)?;
    }
    Ok(circuit)
}

fn check_target_dim(spec: &HamiltonianSpec, u_target: &ComplexMatrix) -> Result<()> {
    if u_target.dim() != 1 << spec.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << spec.n_qubits(),
            got: u_target.dim(),
        });
    }
    Ok(())
}

const DIVERGENCE_STREAK: usize = 50;

/// Trips after the cost rises for `DIVERGENCE_STREAK` consecutive iterations.
struct DivergenceGuard {
    prev: Option<f64>,
    streak: usize,
}

impl DivergenceGuard {
    fn new() -> Self {
        Self {
            prev: None,
            streak: 0,
        }
    }

    fn observe(&mut self, cost: f64) -> bool {
        if let Some(prev) = self.prev {
            if cost > prev {
                self.streak += 1;
            } else {
                self.streak = 0;
            }
        }
        self.prev = Some(cost);
        self.streak >= DIVERGENCE_STREAK
    }
}

/// Gradient matching the cost mode: the trace-route shift rule for the exact
/// modes (the exact overlap test equals the trace cost to 1e-10), the sampled
/// shift rule for the finite-shot mode.
fn gradient_for_mode(
    spec: &HamiltonianSpec,
    theta: &ParamVector,
    cfg: &TrotterConfig,
    u_target: &ComplexMatrix,
    mode: &CostMode,
    iter: usize,
) -> Result<ParamVector> {
    match mode {
        CostMode::ExactTrace | CostMode::HsExact => gradient_shift(spec, theta, cfg, u_target),
        CostMode::HsSampled { shots, seed } => gradient_shift_sampled(
            spec,
            theta,
            cfg,
            u_target,
            *shots,
            mix_seed(*seed, 0x6772_6164 ^ iter as u64),
        ),
    }
}

/// Plain gradient descent with seeded restarts; returns the best run's trace.
///
/// Runs are sequential (the gradient itself fans out); restart r > 0 draws a
/// fresh uniform start from the configured range, or from (-pi, pi) when the
/// base init is `zeros`/`explicit`.
pub fn minimize(
    spec: &HamiltonianSpec,
    u_target: &ComplexMatrix,
    trotter_cfg: &TrotterConfig,
    opt_cfg: &OptimizerConfig,
    mode: &CostMode,
) -> Result<OptimizationTrace> {
    opt_cfg.validate()?;
    trotter_cfg.validate()?;
    mode.validate()?;
    check_target_dim(spec, u_target)?;

    let runs = opt_cfg.restarts + 1;
    let mut best: Option<OptimizationTrace> = None;
    for run in 0..runs {
        let theta0 = initial_theta(&opt_cfg.init, spec.num_terms(), run)?;
        let mut trace = descend(spec, u_target, trotter_cfg, opt_cfg, mode, theta0)?;
        trace.restart_index = run;
        let improved = best
            .as_ref()
            .map(|b| trace.final_cost < b.final_cost)
            .unwrap_or(true);
        if improved {
            best = Some(trace);
        }
        if best.as_ref().unwrap().final_cost < opt_cfg.cost_tolerance {
            break;
        }
    }
    Ok(best.expect("at least one run"))
}

fn initial_theta(init: &InitStrategy, len: usize, run: usize) -> Result<ParamVector> {
    use rand::{Rng, SeedableRng};
    let sample = |lo: f64, hi: f64, seed: u64| -> ParamVector {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ParamVector::new((0..len).map(|_| rng.gen_range(lo..hi)).collect())
    };
    match init {
        InitStrategy::Uniform { lo, hi, seed } => Ok(sample(*lo, *hi, seed + run as u64)),
        InitStrategy::Zeros if run == 0 => Ok(ParamVector::zeros(len)),
        InitStrategy::Explicit(theta) if run == 0 => {
            if theta.len() != len {
                return Err(Error::ParamLengthMismatch {
                    expected: len,
                    got: theta.len(),
                });
            }
            Ok(theta.clone())
        }
        // Restarts of a deterministic init fall back to fresh uniform draws.
        InitStrategy::Zeros | InitStrategy::Explicit(_) => Ok(sample(
            -std::f64::consts::PI,
            std::f64::consts::PI,
            0x5EED + run as u64,
        )),
    }
}

fn descend(
    spec: &HamiltonianSpec,
    u_target: &ComplexMatrix,
    trotter_cfg: &TrotterConfig,
    opt_cfg: &OptimizerConfig,
    mode: &CostMode,
    mut theta: ParamVector,
) -> Result<OptimizationTrace> {
    let mut iterations = Vec::new();
    let mut guard = DivergenceGuard::new();
    let mut reason = TerminationReason::MaxIters;
    let mut diverged = false;
    let mut final_pair: Option<(ParamVector, f64)> = None;

    for iter in 0..opt_cfg.max_iters {
        let c = cost::cost(u_target, spec, &theta, trotter_cfg, mode)?;
        let grad = gradient_for_mode(spec, &theta, trotter_cfg, u_target, mode, iter)?;
        let grad_norm = grad.norm();
        iterations.push(IterationRecord {
            iter,
            cost: c,
            theta: theta.clone(),
            grad_norm,
        });
        if c < opt_cfg.cost_tolerance {
            reason = TerminationReason::CostTol;
            final_pair = Some((theta.clone(), c));
            break;
        }
        if grad_norm < opt_cfg.grad_norm_tolerance {
            reason = TerminationReason::GradTol;
            final_pair = Some((theta.clone(), c));
            break;
        }
        if guard.observe(c) {
            diverged = true;
            final_pair = Some((theta.clone(), c));
            break;
        }
        for (t, g) in theta.values_mut().iter_mut().zip(grad.values()) {
            *t -= opt_cfg.learning_rate * g;
        }
    }

    let (final_theta, final_cost) = match final_pair {
        Some(pair) => pair,
        None => {
            let c = cost::cost(u_target, spec, &theta, trotter_cfg, mode)?;
            (theta, c)
        }
    };
    Ok(OptimizationTrace {
        iterations,
        final_theta,
        final_cost,
        termination_reason: reason,
        diverged,
        restart_index: 0,
    })
}

/// Render a trace as CSV: `iter,cost,grad_norm,theta_0..theta_{Q-1}`.
pub fn trace_to_csv(trace: &OptimizationTrace) -> String {
    let q = trace.final_theta.len();
    let mut out = String::from("iter,cost,grad_norm");
    for j in 0..q {
        out.push_str(&format!(",theta_{j}"));
    }
    out.push('\n');
    for rec in &trace.iterations {
        out.push_str(&format!("{},{:?},{:?}", rec.iter, rec.cost, rec.grad_norm));
        for v in rec.theta.values() {
            out.push_str(&format!(",{v:?}"));
        }
        out.push('\n');
    }
    out
}

/// Parse the CSV produced by [`trace_to_csv`] back into iteration records.
pub fn parse_trace_csv(text: &str) -> Result<Vec<IterationRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty trace file".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 3 || columns[0] != "iter" || columns[1] != "cost" || columns[2] != "grad_norm"
    {
        return Err(Error::Parse(format!("unexpected trace header '{header}'")));
    }
    let q = columns.len() - 3;
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 + q {
            return Err(Error::Parse(format!(
                "line {}: expected {} fields, got {}",
                lineno + 2,
                3 + q,
                fields.len()
            )));
        }
        let parse_f64 = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number '{s}'", lineno + 2)))
        };
        records.push(IterationRecord {
            iter: fields[0]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad iter", lineno + 2)))?,
            cost: parse_f64(fields[1])?,
            grad_norm: parse_f64(fields[2])?,
            theta: ParamVector::new(
                fields[3..]
                    .iter()
                    .map(|s| parse_f64(s))
                    .collect::<Result<Vec<f64>>>()?,
            ),
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm_hermitian;
    use crate::pauli::{
        hamiltonian_matrix, standard_spec, PauliAxis, PauliTerm, Preset,
    };
    use crate::trotter::TrotterMode;

    /// The 1-parameter closed-form problem: spec {Z0}, target e^{-i 0.7 Z},
    /// cost sin^2(theta - 0.7), gradient sin(2 (theta - 0.7)).
    fn single_term_problem() -> (HamiltonianSpec, ComplexMatrix, TrotterConfig) {
        let spec =
            HamiltonianSpec::new(1, vec![PauliTerm::local(0, PauliAxis::Z)], false).unwrap();
        let target = expm_hermitian(
            &hamiltonian_matrix(&spec, &ParamVector::new(vec![0.7])).unwrap(),
            1.0,
        )
        .unwrap();
        let cfg = TrotterConfig::new(1, TrotterMode::Primitive).unwrap();
        (spec, target, cfg)
    }

    fn trace_costfn<'a>(
        spec: &'a HamiltonianSpec,
        target: &'a ComplexMatrix,
        cfg: &'a TrotterConfig,
    ) -> impl Fn(&ParamVector) -> Result<f64> + 'a {
        move |theta| cost::cost(target, spec, theta, cfg, &CostMode::ExactTrace)
    }

    #[test]
    fn fd_gradient_of_constant_cost_is_zero() {
        let theta = ParamVector::new(vec![0.3, -0.4]);
        let grad = gradient_fd(|_| Ok(0.42), &theta, 1e-5).unwrap();
        assert!(grad.values().iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn closed_form_cost_and_gradients() {
        let (spec, target, cfg) = single_term_problem();
        let costfn = trace_costfn(&spec, &target, &cfg);

        for theta0 in [-1.0, 0.0, 0.4, 2.0] {
            let theta = ParamVector::new(vec![theta0]);
            let c = costfn(&theta).unwrap();
            assert!((c - (theta0 - 0.7).sin().powi(2)).abs() < 1e-12);

            let expect = (2.0 * (theta0 - 0.7)).sin();
            let fd = gradient_fd(&costfn, &theta, 1e-5).unwrap();
            assert!((fd.values()[0] - expect).abs() < 1e-6);
            let shift = gradient_shift(&spec, &theta, &cfg, &target).unwrap();
            assert!((shift.values()[0] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn shift_matches_fd_on_reference_problem() {
        use rand::{Rng, SeedableRng};
        let spec = standard_spec(Preset::Fig4a, 3).unwrap();
        let target = crate::targets::builtin(crate::targets::BuiltinTarget::Toffoli).matrix;
        let cfg = TrotterConfig::new(3, TrotterMode::Primitive).unwrap();
        let costfn = trace_costfn(&spec, &target, &cfg);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let theta =
                ParamVector::new((0..9).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let shift = gradient_shift(&spec, &theta, &cfg, &target).unwrap();
            let fd = gradient_fd(&costfn, &theta, 1e-5).unwrap();
            for (s, f) in shift.values().iter().zip(fd.values()) {
                let scale = f.abs().max(1e-7);
                assert!(
                    (s - f).abs() / scale < 1e-4,
                    "shift {s} vs fd {f}"
                );
            }
        }
    }

    #[test]
    fn shift_matches_fd_on_random_specs() {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        for case in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6AD0 + case);
            let n = (case % 3 + 1) as usize;
            let terms: Vec<PauliTerm> = if n == 1 {
                vec![
                    PauliTerm::local(0, PauliAxis::X),
                    PauliTerm::local(0, PauliAxis::Z),
                ]
            } else {
                let mut all = standard_spec(Preset::FullGeneral, n).unwrap().terms().to_vec();
                all.shuffle(&mut rng);
                all.truncate(rng.gen_range(3..=8));
                all
            };
            let spec = HamiltonianSpec::new(n, terms, false).unwrap();
            let theta = ParamVector::new(
                (0..spec.num_terms())
                    .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                    .collect(),
            );
            let cfg = TrotterConfig::new(rng.gen_range(1..=3), TrotterMode::Primitive).unwrap();
            let target = expm_hermitian(
                &hamiltonian_matrix(
                    &spec,
                    &ParamVector::new(
                        (0..spec.num_terms()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    ),
                )
                .unwrap(),
                1.0,
            )
            .unwrap();
            let shift = gradient_shift(&spec, &theta, &cfg, &target).unwrap();
            let fd = gradient_fd(
                |t| cost::cost(&target, &spec, t, &cfg, &CostMode::ExactTrace),
                &theta,
                1e-5,
            )
            .unwrap();
            for (s, f) in shift.values().iter().zip(fd.values()) {
                let diff = (s - f).abs();
                assert!(
                    diff < 1e-7 || diff / f.abs() < 1e-4,
                    "case {case}: shift {s} vs fd {f}"
                );
            }
        }
    }

    #[test]
    fn descent_from_reference_values_does_not_increase_cost_initially() {
        let spec = standard_spec(Preset::Fig4a, 3).unwrap();
        let theta = Preset::Fig4a.published_params().unwrap();
        let target = crate::targets::builtin(crate::targets::BuiltinTarget::Toffoli).matrix;
        let cfg = TrotterConfig::new(6, TrotterMode::Primitive).unwrap();
        let opt = OptimizerConfig {
            learning_rate: 0.1,
            max_iters: 5,
            cost_tolerance: 1e-12,
            grad_norm_tolerance: 1e-12,
            init: InitStrategy::Explicit(theta),
            restarts: 0,
        };
        let trace = minimize(&spec, &target, &cfg, &opt, &CostMode::ExactTrace).unwrap();
        assert!(trace.iterations[1].cost <= trace.iterations[0].cost);
    }

    #[test]
    fn gradient_vanishes_at_optimum() {
        let (spec, target, cfg) = single_term_problem();
        let theta = ParamVector::new(vec![0.7]);
        let shift = gradient_shift(&spec, &theta, &cfg, &target).unwrap();
        assert!(shift.values()[0].abs() < 1e-8);
    }

    #[test]
    fn sampled_gradient_is_deterministic_and_close() {
        let (spec, target, cfg) = single_term_problem();
        let theta = ParamVector::new(vec![0.2]);
        let g1 = gradient_shift_sampled(&spec, &theta, &cfg, &target, 50_000, 7).unwrap();
        let g2 = gradient_shift_sampled(&spec, &theta, &cfg, &target, 50_000, 7).unwrap();
        assert_eq!(g1, g2);
        let exact = gradient_shift(&spec, &theta, &cfg, &target).unwrap();
        assert!((g1.values()[0] - exact.values()[0]).abs() < 0.05);
    }

    #[test]
    fn minimize_converges_on_single_term_problem() {
        let (spec, target, cfg) = single_term_problem();
        let opt = OptimizerConfig {
            learning_rate: 0.3,
            max_iters: 500,
            cost_tolerance: 1e-12,
            grad_norm_tolerance: 1e-7,
            init: InitStrategy::Zeros,
            restarts: 0,
        };
        let trace = minimize(&spec, &target, &cfg, &opt, &CostMode::ExactTrace).unwrap();
        assert!((trace.final_theta.values()[0] - 0.7).abs() < 1e-4);
        assert!(trace.final_cost < 1e-8);
        assert!(!trace.diverged);
        assert!(!trace.iterations.is_empty());
    }

    #[test]
    fn cost_sequence_non_increasing_at_small_learning_rate() {
        let (spec, target, cfg) = single_term_problem();
        let opt = OptimizerConfig {
            learning_rate: 0.1,
            max_iters: 60,
            cost_tolerance: 1e-14,
            grad_norm_tolerance: 1e-12,
            init: InitStrategy::Zeros,
            restarts: 0,
        };
        let trace = minimize(&spec, &target, &cfg, &opt, &CostMode::ExactTrace).unwrap();
        for pair in trace.iterations.windows(2) {
            assert!(pair[1].cost <= pair[0].cost + 1e-15);
        }
    }

    #[test]
    fn minimize_is_bitwise_deterministic() {
        let spec = standard_spec(Preset::Fig4a, 3).unwrap();
        let target = crate::targets::builtin(crate::targets::BuiltinTarget::Toffoli).matrix;
        let cfg = TrotterConfig::new(2, TrotterMode::Primitive).unwrap();
        let opt = OptimizerConfig {
            max_iters: 25,
            restarts: 1,
            init: InitStrategy::Uniform {
                lo: -1.0,
                hi: 1.0,
                seed: 5,
            },
            ..OptimizerConfig::default()
        };
        let a = minimize(&spec, &target, &cfg, &opt, &CostMode::ExactTrace).unwrap();
        let b = minimize(&spec, &target, &cfg, &opt, &CostMode::ExactTrace).unwrap();
        assert_eq!(a.final_theta, b.final_theta);
        assert_eq!(a.final_cost.to_bits(), b.final_cost.to_bits());
        assert_eq!(a.iterations.len(), b.iterations.len());
        for (x, y) in a.iterations.iter().zip(&b.iterations) {
            assert_eq!(x.cost.to_bits(), y.cost.to_bits());
            assert_eq!(x.theta, y.theta);
        }
    }

    #[test]
    fn explicit_init_starting_at_optimum_stops_immediately() {
        let (spec, target, cfg) = single_term_problem();
        let opt = OptimizerConfig {
            init: InitStrategy::Explicit(ParamVector::new(vec![0.7])),
            cost_tolerance: 1e-10,
            ..OptimizerConfig::default()
        };
        let trace = minimize(&spec, &target, &cfg, &opt, &CostMode::ExactTrace).unwrap();
        assert_eq!(trace.termination_reason, TerminationReason::CostTol);
        assert_eq!(trace.iterations.len(), 1);
    }

    #[test]
    fn divergence_guard_trips_after_fifty_rises() {
        let mut guard = DivergenceGuard::new();
        assert!(!guard.observe(0.5));
        for i in 0..49 {
            assert!(!guard.observe(0.5 + (i + 1) as f64 * 0.01), "step {i}");
        }
        assert!(guard.observe(2.0));

        // A single decrease resets the streak.
        let mut guard = DivergenceGuard::new();
        guard.observe(0.5);
        for i in 0..49 {
            guard.observe(0.5 + (i + 1) as f64 * 0.01);
        }
        assert!(!guard.observe(0.1));
        assert!(!guard.observe(0.2));
    }

    #[test]
    fn trace_csv_round_trip() {
        let (spec, target, cfg) = single_term_problem();
        let opt = OptimizerConfig {
            learning_rate: 0.3,
            max_iters: 10,
            init: InitStrategy::Zeros,
            ..OptimizerConfig::default()
        };
        let trace = minimize(&spec, &target, &cfg, &opt, &CostMode::ExactTrace).unwrap();
        let csv = trace_to_csv(&trace);
        assert!(csv.starts_with("iter,cost,grad_norm,theta_0\n"));
        let parsed = parse_trace_csv(&csv).unwrap();
        assert_eq!(parsed.len(), trace.iterations.len());
        for (a, b) in parsed.iter().zip(&trace.iterations) {
            assert_eq!(a.iter, b.iter);
            assert_eq!(a.cost.to_bits(), b.cost.to_bits());
            assert_eq!(a.grad_norm.to_bits(), b.grad_norm.to_bits());
            assert_eq!(a.theta, b.theta);
        }
    }

    #[test]
    fn config_validation() {
        let cfg = OptimizerConfig {
            learning_rate: 0.0,
            ..OptimizerConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = OptimizerConfig {
            init: InitStrategy::Uniform {
                lo: 1.0,
                hi: 1.0,
                seed: 0,
            },
            ..OptimizerConfig::default()
        };
        assert!(cfg.validate().is_err());

        let (spec, target, cfg) = single_term_problem();
        let opt = OptimizerConfig {
            init: InitStrategy::Explicit(ParamVector::new(vec![0.1, 0.2])),
            ..OptimizerConfig::default()
        };
        assert!(matches!(
            minimize(&spec, &target, &cfg, &opt, &CostMode::ExactTrace),
            Err(Error::ParamLengthMismatch { .. })
        ));
    }
}
