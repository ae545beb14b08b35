//! Circuit construction for the Trotterized evolution of a term set, and
//! evaluation of circuits to dense unitaries.
//!
//! The evolution e^{-i H(theta)} is approximated by m repetitions of the
//! ordered product of per-term exponentials e^{-i (theta_j / m) H_j}, with
//! terms applied in the order they appear in the [`HamiltonianSpec`]. Two
//! circuit forms are produced: `primitive` keeps each factor as a single
//! term-exponential gate, `decomposed` expands it into CNOTs and
//! single-qubit rotations (a ZZ block conjugated by basis changes).
//!
//! Rotation convention: R_a(phi) = e^{-i phi sigma_a / 2}, so the middle
//! rotation of a decomposed coupling carries angle 2 theta_j / m.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, MAX_QUBITS};
use crate::pauli::{HamiltonianSpec, ParamVector, PauliAxis, PauliTerm};

/// Circuit form emitted by [`trotterize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrotterMode {
    /// One term-exponential gate per factor.
    Primitive,
    /// CNOT + rotation + CNOT blocks with basis changes.
    Decomposed,
}

/// Trotterization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrotterConfig {
    pub steps_m: usize,
    pub mode: TrotterMode,
}

impl TrotterConfig {
    pub fn new(steps_m: usize, mode: TrotterMode) -> Result<Self> {
        if steps_m == 0 {
            return Err(Error::InvalidTrotterSteps);
        }
        Ok(Self { steps_m, mode })
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_m == 0 {
            return Err(Error::InvalidTrotterSteps);
        }
        Ok(())
    }
}

/// A single circuit gate.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Hadamard {
        qubit: usize,
    },
    PauliRotation {
        axis: PauliAxis,
        qubit: usize,
        angle: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// e^{-i angle P} for an involutory Pauli product P.
    TermExp {
        term: PauliTerm,
        angle: f64,
    },
}

impl Gate {
    /// Qubit operands; the first entry is the gate's most significant qubit.
    pub fn operands(&self) -> Vec<usize> {
        match self {
            Gate::Hadamard { qubit } => vec![*qubit],
            Gate::PauliRotation { qubit, .. } => vec![*qubit],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::TermExp { term, .. } => term.qubits(),
        }
    }

    /// The gate's matrix on its own operands (2x2 or 4x4).
    pub fn matrix(&self) -> ComplexMatrix {
        let c = Complex64::new;
        match self {
            Gate::Hadamard { .. } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                ComplexMatrix::from_data(2, vec![c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)])
                    .expect("2x2")
            }
            Gate::PauliRotation { axis, angle, .. } => {
                // R_a(phi) = cos(phi/2) I - i sin(phi/2) sigma_a
                rotation_of(&axis.matrix(), angle / 2.0)
            }
            Gate::Cnot { .. } => {
                let mut m = ComplexMatrix::zeros(4);
                m.set(0, 0, c(1., 0.));
                m.set(1, 1, c(1., 0.));
                m.set(2, 3, c(1., 0.));
                m.set(3, 2, c(1., 0.));
                m
            }
            Gate::TermExp { term, angle } => rotation_of(&term.operator_matrix(), *angle),
        }
    }

    /// Elementwise complex conjugate of the gate, as a gate.
    ///
    /// A product circuit conjugates gate-by-gate in unchanged order, which is
    /// how the target payload of the overlap-test circuit is formed.
    pub fn conjugated(&self) -> Gate {
        match self {
            Gate::Hadamard { .. } | Gate::Cnot { .. } => self.clone(),
            Gate::PauliRotation { axis, qubit, angle } => {
                let angle = match axis {
                    // R_y is real; R_x and R_z conjugate to the opposite angle.
                    PauliAxis::Y => *angle,
                    PauliAxis::X | PauliAxis::Z => -angle,
                };
                Gate::PauliRotation {
                    axis: *axis,
                    qubit: *qubit,
                    angle,
                }
            }
            Gate::TermExp { term, angle } => {
                // conj(P) = (-1)^{#Y} P, so conj(e^{-i phi P}) = e^{-i phi' P}.
                let angle = if term.y_count() % 2 == 1 {
                    *angle
                } else {
                    -angle
                };
                Gate::TermExp { term: *term, angle }
            }
        }
    }

    /// Same gate with every qubit index shifted up by `offset`.
    pub fn shifted(&self, offset: usize) -> Gate {
        match self {
            Gate::Hadamard { qubit } => Gate::Hadamard {
                qubit: qubit + offset,
            },
            Gate::PauliRotation { axis, qubit, angle } => Gate::PauliRotation {
                axis: *axis,
                qubit: qubit + offset,
                angle: *angle,
            },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: control + offset,
                target: target + offset,
            },
            Gate::TermExp { term, angle } => {
                let shifted_term = match *term {
                    PauliTerm::Local { qubit, axis } => PauliTerm::local(qubit + offset, axis),
                    PauliTerm::Coupling {
                        qubit_i,
                        axis_i,
                        qubit_j,
                        axis_j,
                    } => PauliTerm::coupling(qubit_i + offset, axis_i, qubit_j + offset, axis_j),
                };
                Gate::TermExp {
                    term: shifted_term,
                    angle: *angle,
                }
            }
        }
    }

    fn angle(&self) -> Option<f64> {
        match self {
            Gate::PauliRotation { angle, .. } | Gate::TermExp { angle, .. } => Some(*angle),
            _ => None,
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if let Some(angle) = self.angle() {
            if !angle.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "non-finite gate angle {angle}"
                )));
            }
        }
        let ops = self.operands();
        for (pos, &q) in ops.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits,
                });
            }
            if ops[..pos].contains(&q) {
                return Err(Error::DuplicateQubit { index: q });
            }
        }
        Ok(())
    }
}

/// cos(phi) I - i sin(phi) P for an involutory P.
fn rotation_of(p: &ComplexMatrix, phi: f64) -> ComplexMatrix {
    let dim = p.dim();
    let cos = Complex64::new(phi.cos(), 0.0);
    let misin = Complex64::new(0.0, -phi.sin());
    let mut m = p.scale(misin);
    for i in 0..dim {
        m.set(i, i, m.get(i, i) + cos);
    }
    m
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Hadamard { qubit } => write!(f, "H {qubit}"),
            Gate::PauliRotation { axis, qubit, angle } => {
                write!(f, "R{} {qubit} {angle}", axis.as_str().to_uppercase())
            }
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::TermExp { term, angle } => {
                let qubits = term
                    .qubits()
                    .iter()
                    .map(|q| q.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                write!(f, "TERMEXP {} {qubits} {angle}", term.axes_label())
            }
        }
    }
}

/// An ordered gate sequence over a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Capacity {
                dim: 1usize.checked_shl(n_qubits as u32).unwrap_or(usize::MAX),
                max: 1 << MAX_QUBITS,
            });
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn hadamard(&mut self, qubit: usize) -> Result<()> {
        self.push(Gate::Hadamard { qubit })
    }

    pub fn rotation(&mut self, axis: PauliAxis, qubit: usize, angle: f64) -> Result<()> {
        self.push(Gate::PauliRotation { axis, qubit, angle })
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.push(Gate::Cnot { control, target })
    }

    pub fn term_exp(&mut self, term: PauliTerm, angle: f64) -> Result<()> {
        self.push(Gate::TermExp { term, angle })
    }

    /// Line-oriented text dump, one gate per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for gate in &self.gates {
            out.push_str(&gate.to_string());
            out.push('\n');
        }
        out
    }
}

/// Build the Trotterized circuit for H(theta): m slices, each applying every
/// term in spec order with angle theta_j / m.
pub fn trotterize(
    spec: &HamiltonianSpec,
    theta: &ParamVector,
    cfg: &TrotterConfig,
) -> Result<Circuit> {
    spec.check_params(theta)?;
    cfg.validate()?;
    let mut circuit = Circuit::new(spec.n_qubits())?;
    let m = cfg.steps_m as f64;
    for _ in 0..cfg.steps_m {
        for (term, &coeff) in spec.terms().iter().zip(theta.values()) {
            let angle = coeff / m;
            match cfg.mode {
                TrotterMode::Primitive => circuit.term_exp(*term, angle)?,
                TrotterMode::Decomposed => append_decomposed(&mut circuit, term, angle)?,
            }
        }
    }
    Ok(circuit)
}

/// e^{-i phi P} as elementary gates.
///
/// Couplings reduce to a ZZ block, CNOT(i,j) Rz(2 phi) CNOT(i,j), conjugated
/// by per-qubit basis changes: H maps X to Z; R_x(pi/2) maps Y to Z.
fn append_decomposed(circuit: &mut Circuit, term: &PauliTerm, phi: f64) -> Result<()> {
    match *term {
        PauliTerm::Local { qubit, axis } => circuit.rotation(axis, qubit, 2.0 * phi),
        PauliTerm::Coupling {
            qubit_i,
            axis_i,
            qubit_j,
            axis_j,
        } => {
            let enter = |circuit: &mut Circuit, q: usize, axis: PauliAxis| match axis {
                PauliAxis::X => circuit.hadamard(q),
                PauliAxis::Y => circuit.rotation(PauliAxis::X, q, std::f64::consts::FRAC_PI_2),
                PauliAxis::Z => Ok(()),
            };
            let leave = |circuit: &mut Circuit, q: usize, axis: PauliAxis| match axis {
                PauliAxis::X => circuit.hadamard(q),
                PauliAxis::Y => circuit.rotation(PauliAxis::X, q, -std::f64::consts::FRAC_PI_2),
                PauliAxis::Z => Ok(()),
            };
            enter(circuit, qubit_i, axis_i)?;
            enter(circuit, qubit_j, axis_j)?;
            circuit.cnot(qubit_i, qubit_j)?;
            circuit.rotation(PauliAxis::Z, qubit_j, 2.0 * phi)?;
            circuit.cnot(qubit_i, qubit_j)?;
            leave(circuit, qubit_j, axis_j)?;
            leave(circuit, qubit_i, axis_i)?;
            Ok(())
        }
    }
}

/// Embed a k-qubit gate matrix on the named qubits of an n-qubit register.
pub(crate) fn embed_gate(
    gate: &ComplexMatrix,
    operands: &[usize],
    n_qubits: usize,
) -> Result<ComplexMatrix> {
    let k = operands.len();
    if gate.dim() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            got: gate.dim(),
        });
    }
    let dim = 1usize << n_qubits;
    let shifts: Vec<usize> = operands.iter().map(|&q| n_qubits - 1 - q).collect();
    let mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
    let scatter = |base: usize, bits: usize| -> usize {
        let mut idx = base;
        for (pos, &s) in shifts.iter().enumerate() {
            if (bits >> (k - 1 - pos)) & 1 == 1 {
                idx |= 1 << s;
            }
        }
        idx
    };
    let mut full = ComplexMatrix::zeros(dim);
    for base in 0..dim {
        if base & mask != 0 {
            continue;
        }
        for r in 0..(1 << k) {
            let row = scatter(base, r);
            for c in 0..(1 << k) {
                full.set(row, scatter(base, c), gate.get(r, c));
            }
        }
    }
    Ok(full)
}

/// Evaluate a circuit to its unitary: the product of embedded gate matrices
/// in application order.
pub fn circuit_unitary(circuit: &Circuit) -> Result<ComplexMatrix> {
    let n = circuit.n_qubits();
    if n > MAX_QUBITS {
        return Err(Error::Capacity {
            dim: 1 << n,
            max: 1 << MAX_QUBITS,
        });
    }
    let mut u = ComplexMatrix::identity(1 << n);
    for gate in circuit.gates() {
        let full = embed_gate(&gate.matrix(), &gate.operands(), n)?;
        u = full.matmul(&u)?;
    }
    Ok(u)
}

/// Number of two-qubit gates: CNOTs plus coupling term-exponentials.
/// Single-qubit gates are not counted.
pub fn two_qubit_gate_count(circuit: &Circuit) -> usize {
    circuit
        .gates()
        .iter()
        .filter(|g| match g {
            Gate::Cnot { .. } => true,
            Gate::TermExp { term, .. } => term.is_coupling(),
            _ => false,
        })
        .count()
}
