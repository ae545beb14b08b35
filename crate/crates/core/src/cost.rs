//! The overlap cost C(theta) = 1 - |Tr(U_target† U_QC(theta))|^2 / 2^{2n},
//! computed three ways: directly from the dense trace, from the exact
//! output distribution of the 2n-qubit overlap-test circuit, and from
//! finite-shot sampling of that circuit.
//!
//! The overlap test prepares n Bell pairs across an x and a y register,
//! applies the candidate circuit to x and the *complex conjugate* of the
//! target to y, undoes the Bell preparation and measures: the all-zeros
//! probability equals |Tr(U_target† U_QC)|^2 / 2^{2n}. Conjugating (rather
//! than daggering) the y payload is what makes the identity hold — for the
//! Bell pair state, (A ⊗ B)|Phi> = (A B^T ⊗ I)|Phi>.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint_trace_overlap, apply_gate_in_place, ComplexMatrix, StateVector, MAX_QUBITS,
};
use crate::pauli::{HamiltonianSpec, ParamVector};
use crate::trotter::{circuit_unitary, trotterize, Circuit, Gate, TrotterConfig};

/// How the cost is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Dense trace of U_target† U_QC.
    #[serde(rename = "exact")]
    ExactTrace,
    /// Exact all-zeros probability of the overlap-test circuit.
    #[serde(rename = "hst")]
    HsExact,
    /// Finite-shot estimate of the all-zeros probability, with a
    /// deterministic seeded sampler.
    #[serde(rename = "hst_sampled")]
    HsSampled { shots: u64, seed: u64 },
}

impl CostMode {
    pub fn validate(&self) -> Result<()> {
        if let CostMode::HsSampled { shots, .. } = self {
            if *shots == 0 {
                return Err(Error::InvalidConfig("shots must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// |Tr(u_target† u)| / 2^n — global-phase-invariant overlap of two unitaries.
pub fn operator_fidelity(u_target: &ComplexMatrix, u: &ComplexMatrix) -> Result<f64> {
    let overlap = adjoint_trace_overlap(u_target, u)?;
    Ok(overlap.norm() / u.dim() as f64)
}

/// Cost of a candidate parameter vector against a target unitary.
pub fn cost(
    u_target: &ComplexMatrix,
    spec: &HamiltonianSpec,
    theta: &ParamVector,
    cfg: &TrotterConfig,
    mode: &CostMode,
) -> Result<f64> {
    let n = spec.n_qubits();
    if 2 * n > MAX_QUBITS {
        return Err(Error::Capacity {
            dim: 1 << (2 * n),
            max: 1 << MAX_QUBITS,
        });
    }
    if u_target.dim() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            got: u_target.dim(),
        });
    }
    mode.validate()?;
    let circuit = trotterize(spec, theta, cfg)?;
    match mode {
        CostMode::ExactTrace => {
            let u = circuit_unitary(&circuit)?;
            exact_trace_cost(u_target, &u)
        }
        CostMode::HsExact => {
            let state = hs_output_state(&circuit, u_target)?;
            Ok(1.0 - state.probability(0))
        }
        CostMode::HsSampled { shots, seed } => {
            let state = hs_output_state(&circuit, u_target)?;
            Ok(1.0 - sample_state_all_zeros(&state, *shots, *seed))
        }
    }
}

/// 1 - |Tr(u_target† u)|^2 / dim^2 from two dense unitaries.
pub fn exact_trace_cost(u_target: &ComplexMatrix, u: &ComplexMatrix) -> Result<f64> {
    let overlap = adjoint_trace_overlap(u_target, u)?;
    let d = u.dim() as f64;
    Ok(1.0 - overlap.norm_sqr() / (d * d))
}

/// Assemble the 2n-qubit overlap-test circuit from two n-qubit circuits:
/// Bell preparation, `u_circuit` on the x register, the conjugate of
/// `target_circuit` on the y register, Bell unpreparation.
pub fn build_hs_circuit(u_circuit: &Circuit, target_circuit: &Circuit) -> Result<Circuit> {
    let n = u_circuit.n_qubits();
    if target_circuit.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: target_circuit.n_qubits(),
        });
    }
    let mut hs = Circuit::new(2 * n)?;
    for k in 0..n {
        hs.hadamard(k)?;
    }
    for k in 0..n {
        hs.cnot(k, k + n)?;
    }
    for gate in u_circuit.gates() {
        hs.push(gate.clone())?;
    }
    for gate in target_circuit.gates() {
        hs.push(gate.conjugated().shifted(n))?;
    }
    for k in 0..n {
        hs.cnot(k, k + n)?;
    }
    for k in 0..n {
        hs.hadamard(k)?;
    }
    Ok(hs)
}

/// Run a circuit on |0..0> by statevector simulation.
pub fn simulate_circuit(circuit: &Circuit) -> Result<StateVector> {
    let n = circuit.n_qubits();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
    amplitudes[0] = Complex64::new(1.0, 0.0);
    for gate in circuit.gates() {
        apply_gate_in_place(&mut amplitudes, n, &gate.matrix(), &gate.operands())?;
    }
    StateVector::new(n, amplitudes)
}

/// Output state of the overlap test with the target payload applied as a
/// dense (conjugated) matrix on the y register.
pub(crate) fn hs_output_state(u_circuit: &Circuit, target: &ComplexMatrix) -> Result<StateVector> {
    let n = u_circuit.n_qubits();
    if target.dim() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            got: target.dim(),
        });
    }
    let total = 2 * n;
    if total > MAX_QUBITS {
        return Err(Error::Capacity {
            dim: 1 << total,
            max: 1 << MAX_QUBITS,
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << total];
    amps[0] = Complex64::new(1.0, 0.0);

    let h = Gate::Hadamard { qubit: 0 }.matrix();
    let cx = Gate::Cnot {
        control: 0,
        target: 1,
    }
    .matrix();
    for k in 0..n {
        apply_gate_in_place(&mut amps, total, &h, &[k])?;
    }
    for k in 0..n {
        apply_gate_in_place(&mut amps, total, &cx, &[k, k + n])?;
    }
    for gate in u_circuit.gates() {
        apply_gate_in_place(&mut amps, total, &gate.matrix(), &gate.operands())?;
    }
    let y_register: Vec<usize> = (n..total).collect();
    apply_gate_in_place(&mut amps, total, &target.conjugate(), &y_register)?;
    for k in 0..n {
        apply_gate_in_place(&mut amps, total, &cx, &[k, k + n])?;
    }
    for k in 0..n {
        apply_gate_in_place(&mut amps, total, &h, &[k])?;
    }
    StateVector::new(total, amps)
}

/// Fraction of `shots` computational-basis samples equal to all-zeros, drawn
/// from the exact output distribution of the circuit.
pub fn sample_all_zeros(circuit: &Circuit, shots: u64, seed: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be at least 1".into()));
    }
    let state = simulate_circuit(circuit)?;
    Ok(sample_state_all_zeros(&state, shots, seed))
}

/// Seeded categorical sampling over a state's measurement distribution.
pub(crate) fn sample_state_all_zeros(state: &StateVector, shots: u64, seed: u64) -> f64 {
    let mut cumulative = Vec::with_capacity(state.amplitudes().len());
    let mut acc = 0.0;
    for amp in state.amplitudes() {
        acc += amp.norm_sqr();
        cumulative.push(acc);
    }
    let total = *cumulative.last().expect("nonempty state");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zeros = 0u64;
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u);
        if idx == 0 {
            zeros += 1;
        }
    }
    zeros as f64 / shots as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{standard_spec, PauliAxis, PauliTerm, Preset};
    use crate::targets;
    use crate::trotter::TrotterMode;
    use rand::Rng;

    fn single_qubit_circuit(angles: [f64; 3]) -> Circuit {
        let mut c = Circuit::new(1).unwrap();
        c.rotation(PauliAxis::Z, 0, angles[0]).unwrap();
        c.rotation(PauliAxis::X, 0, angles[1]).unwrap();
        c.rotation(PauliAxis::Z, 0, angles[2]).unwrap();
        c
    }

    #[test]
    fn fidelity_of_matching_unitaries() {
        let u = crate::linalg::expm_hermitian(
            &crate::pauli::term_matrix(&PauliTerm::local(0, PauliAxis::X), 2).unwrap(),
            0.3,
        )
        .unwrap();
        assert!((operator_fidelity(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        let rotated = u.scale(Complex64::from_polar(1.0, 2.1));
        assert!((operator_fidelity(&u, &rotated).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_against_toffoli() {
        // Tr(Toffoli) = 6, so F(I) = 6/8 and C = 1 - 36/64.
        let toffoli = targets::builtin(targets::BuiltinTarget::Toffoli).matrix;
        let id = ComplexMatrix::identity(8);
        assert!((operator_fidelity(&toffoli, &id).unwrap() - 0.75).abs() < 1e-12);

        let spec = standard_spec(Preset::Fig4a, 3).unwrap();
        let cfg = TrotterConfig::new(1, TrotterMode::Primitive).unwrap();
        let c = cost(
            &toffoli,
            &spec,
            &ParamVector::zeros(9),
            &cfg,
            &CostMode::ExactTrace,
        )
        .unwrap();
        assert!((c - 0.4375).abs() < 1e-12);
    }

    #[test]
    fn zero_cost_when_circuit_matches_target() {
        // Single commuting term: the m=1 circuit is exact, so targeting its
        // own evolution gives cost 0.
        let spec = crate::pauli::HamiltonianSpec::new(
            1,
            vec![PauliTerm::local(0, PauliAxis::Z)],
            false,
        )
        .unwrap();
        let theta = ParamVector::new(vec![0.7]);
        let target = crate::linalg::expm_hermitian(
            &crate::pauli::hamiltonian_matrix(&spec, &theta).unwrap(),
            1.0,
        )
        .unwrap();
        let cfg = TrotterConfig::new(1, TrotterMode::Primitive).unwrap();
        for mode in [CostMode::ExactTrace, CostMode::HsExact] {
            let c = cost(&target, &spec, &theta, &cfg, &mode).unwrap();
            assert!(c.abs() < 1e-12, "{mode:?}: {c}");
        }
    }

    #[test]
    fn hs_circuit_structure() {
        let mut payload = Circuit::new(3).unwrap();
        payload.hadamard(1).unwrap();
        let u3 = {
            let mut c = Circuit::new(3).unwrap();
            c.term_exp(PauliTerm::coupling(0, PauliAxis::X, 2, PauliAxis::X), 0.4)
                .unwrap();
            c
        };
        let hs = build_hs_circuit(&u3, &payload).unwrap();
        assert_eq!(hs.n_qubits(), 6);
        let gates = hs.gates();
        // 3 H + 3 CNOT, payloads, 3 CNOT + 3 H
        assert!(gates[..3].iter().all(|g| matches!(g, Gate::Hadamard { .. })));
        assert!(gates[3..6].iter().all(|g| matches!(g, Gate::Cnot { .. })));
        let tail = &gates[gates.len() - 6..];
        assert!(tail[..3].iter().all(|g| matches!(g, Gate::Cnot { .. })));
        assert!(tail[3..].iter().all(|g| matches!(g, Gate::Hadamard { .. })));
    }

    #[test]
    fn hs_all_zeros_probability_is_one_for_identity_payloads() {
        let u = Circuit::new(2).unwrap();
        let t = Circuit::new(2).unwrap();
        let hs = build_hs_circuit(&u, &t).unwrap();
        let state = simulate_circuit(&hs).unwrap();
        assert!((state.probability(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hs_circuit_matches_trace_formula() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(123);
        for _ in 0..50 {
            let a: [f64; 3] = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let b: [f64; 3] = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let uc = single_qubit_circuit(a);
            let vc = single_qubit_circuit(b);
            let hs = build_hs_circuit(&uc, &vc).unwrap();
            let p0 = simulate_circuit(&hs).unwrap().probability(0);
            let u = circuit_unitary(&uc).unwrap();
            let v = circuit_unitary(&vc).unwrap();
            let expect = adjoint_trace_overlap(&v, &u).unwrap().norm_sqr() / 4.0;
            assert!((p0 - expect).abs() < 1e-10, "{p0} vs {expect}");
        }
    }

    #[test]
    fn exact_trace_and_hs_agree_on_random_problems() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for case in 0..20 {
            let n = rng.gen_range(1..=3usize);
            let full = standard_spec(Preset::FullGeneral, n.max(2)).unwrap();
            let spec = if n == 1 {
                crate::pauli::HamiltonianSpec::new(
                    1,
                    vec![
                        PauliTerm::local(0, PauliAxis::X),
                        PauliTerm::local(0, PauliAxis::Z),
                    ],
                    false,
                )
                .unwrap()
            } else {
                full
            };
            let theta = ParamVector::new(
                (0..spec.num_terms())
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect(),
            );
            let cfg = TrotterConfig::new(rng.gen_range(1..=3), TrotterMode::Primitive).unwrap();
            let target = crate::linalg::expm_hermitian(
                &crate::pauli::hamiltonian_matrix(&spec, &theta).unwrap(),
                0.7,
            )
            .unwrap();
            let exact = cost(&target, &spec, &theta, &cfg, &CostMode::ExactTrace).unwrap();
            let hs = cost(&target, &spec, &theta, &cfg, &CostMode::HsExact).unwrap();
            assert!(
                (exact - hs).abs() < 1e-10,
                "case {case}: exact {exact} vs hs {hs}"
            );
        }
    }

    #[test]
    fn cost_is_one_minus_fidelity_squared() {
        let spec = standard_spec(Preset::Fig4a, 3).unwrap();
        let theta = Preset::Fig4a.published_params().unwrap();
        let cfg = TrotterConfig::new(3, TrotterMode::Primitive).unwrap();
        let toffoli = targets::builtin(targets::BuiltinTarget::Toffoli).matrix;
        let c = cost(&toffoli, &spec, &theta, &cfg, &CostMode::ExactTrace).unwrap();
        let u = circuit_unitary(&trotterize(&spec, &theta, &cfg).unwrap()).unwrap();
        let f = operator_fidelity(&toffoli, &u).unwrap();
        assert!((c - (1.0 - f * f)).abs() < 1e-12);
    }

    #[test]
    fn cost_invariant_under_target_phase() {
        let spec = standard_spec(Preset::Fig4a, 3).unwrap();
        let theta = Preset::Fig4a.published_params().unwrap();
        let cfg = TrotterConfig::new(2, TrotterMode::Primitive).unwrap();
        let toffoli = targets::builtin(targets::BuiltinTarget::Toffoli).matrix;
        let rotated = toffoli.scale(Complex64::from_polar(1.0, -0.811));
        for mode in [CostMode::ExactTrace, CostMode::HsExact] {
            let c1 = cost(&toffoli, &spec, &theta, &cfg, &mode).unwrap();
            let c2 = cost(&rotated, &spec, &theta, &cfg, &mode).unwrap();
            assert!((c1 - c2).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_determinism_and_trivial_cases() {
        // |0> with certainty.
        let c = Circuit::new(2).unwrap();
        assert_eq!(sample_all_zeros(&c, 1000, 3).unwrap(), 1.0);

        // Uniform two-qubit superposition: p0 = 1/4.
        let mut c = Circuit::new(2).unwrap();
        c.hadamard(0).unwrap();
        c.hadamard(1).unwrap();
        let estimate = sample_all_zeros(&c, 100_000, 42).unwrap();
        assert!((estimate - 0.25).abs() < 0.01, "estimate {estimate}");

        let again = sample_all_zeros(&c, 100_000, 42).unwrap();
        assert_eq!(estimate, again);
        let other_seed = sample_all_zeros(&c, 100_000, 43).unwrap();
        assert!((other_seed - 0.25).abs() < 0.01);
    }

    #[test]
    fn sampled_cost_tracks_exact_cost() {
        let spec = standard_spec(Preset::Fig4a, 3).unwrap();
        let theta = Preset::Fig4a.published_params().unwrap();
        let cfg = TrotterConfig::new(2, TrotterMode::Primitive).unwrap();
        let toffoli = targets::builtin(targets::BuiltinTarget::Toffoli).matrix;
        let exact = cost(&toffoli, &spec, &theta, &cfg, &CostMode::HsExact).unwrap();
        let sampled = cost(
            &toffoli,
            &spec,
            &theta,
            &cfg,
            &CostMode::HsSampled {
                shots: 100_000,
                seed: 9,
            },
        )
        .unwrap();
        let p = 1.0 - exact;
        let sigma = (p * (1.0 - p) / 100_000.0).sqrt();
        assert!((sampled - exact).abs() < 5.0 * sigma.max(1e-6));
    }

    #[test]
    fn cost_dimension_errors() {
        let spec = standard_spec(Preset::Fig4a, 3).unwrap();
        let cfg = TrotterConfig::new(1, TrotterMode::Primitive).unwrap();
        let wrong = ComplexMatrix::identity(4);
        assert!(matches!(
            cost(&wrong, &spec, &ParamVector::zeros(9), &cfg, &CostMode::ExactTrace),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad_mode = CostMode::HsSampled { shots: 0, seed: 0 };
        assert!(bad_mode.validate().is_err());
    }
}
