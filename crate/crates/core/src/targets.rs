//! Built-in target unitaries and principal-generator diagnostics.
//!
//! The principal generator of a target is the Hermitian matrix from the
//! principal branch of its logarithm; [`check_conditions`] reports how close
//! a candidate Hamiltonian is to generating the target through it. The
//! conditions are sufficient, not necessary — a candidate can fail them and
//! still realize the gate with high fidelity.

use std::f64::consts::{FRAC_PI_4, PI};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    apply_gate, expm_hermitian, hermitian_eigen, kron, logm_principal, ComplexMatrix, StateVector,
};
use crate::pauli::PauliAxis;

/// A named target unitary.
#[derive(Debug, Clone)]
pub struct TargetGate {
    pub name: String,
    pub n_qubits: usize,
    pub matrix: ComplexMatrix,
    /// Evolution time the gate corresponds to (1 by default; pi/4 for the
    /// parity generator). Coefficients absorb the time, so this is metadata.
    pub evolution_time: f64,
}

impl TargetGate {
    /// Wrap a user-supplied matrix, validating shape and unitarity.
    pub fn from_matrix(name: impl Into<String>, matrix: ComplexMatrix) -> Result<Self> {
        let dim = matrix.dim();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "target dimension {dim} is not a power of two"
            )));
        }
        let dev = matrix.unitarity_deviation();
        if dev > 1e-12 {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self {
            name: name.into(),
            n_qubits: dim.trailing_zeros() as usize,
            matrix,
            evolution_time: 1.0,
        })
    }
}

/// The built-in target catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinTarget {
    Toffoli,
    Fredkin,
    Qft3,
    Parity4,
}

impl BuiltinTarget {
    pub const ALL: [BuiltinTarget; 4] = [
        BuiltinTarget::Toffoli,
        BuiltinTarget::Fredkin,
        BuiltinTarget::Qft3,
        BuiltinTarget::Parity4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BuiltinTarget::Toffoli => "toffoli",
            BuiltinTarget::Fredkin => "fredkin",
            BuiltinTarget::Qft3 => "qft3",
            BuiltinTarget::Parity4 => "parity4",
        }
    }
}

impl FromStr for BuiltinTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toffoli" => Ok(BuiltinTarget::Toffoli),
            "fredkin" => Ok(BuiltinTarget::Fredkin),
            "qft3" => Ok(BuiltinTarget::Qft3),
            "parity4" => Ok(BuiltinTarget::Parity4),
            other => Err(Error::UnknownTarget(other.into())),
        }
    }
}

/// Construct a built-in target gate.
pub fn builtin(name: BuiltinTarget) -> TargetGate {
    match name {
        BuiltinTarget::Toffoli => {
            // Doubly-controlled X: swaps |110> and |111>.
            let mut m = ComplexMatrix::identity(8);
            m.set(6, 6, Complex64::new(0.0, 0.0));
            m.set(7, 7, Complex64::new(0.0, 0.0));
            m.set(6, 7, Complex64::new(1.0, 0.0));
            m.set(7, 6, Complex64::new(1.0, 0.0));
            TargetGate {
                name: "toffoli".into(),
                n_qubits: 3,
                matrix: m,
                evolution_time: 1.0,
            }
        }
        BuiltinTarget::Fredkin => {
            // Controlled swap: |101> <-> |110>.
            let mut m = ComplexMatrix::identity(8);
            m.set(5, 5, Complex64::new(0.0, 0.0));
            m.set(6, 6, Complex64::new(0.0, 0.0));
            m.set(5, 6, Complex64::new(1.0, 0.0));
            m.set(6, 5, Complex64::new(1.0, 0.0));
            TargetGate {
                name: "fredkin".into(),
                n_qubits: 3,
                matrix: m,
                evolution_time: 1.0,
            }
        }
        BuiltinTarget::Qft3 => {
            // Discrete Fourier matrix, omega = e^{2 pi i / 8}, 1/sqrt(8) scale.
            let dim = 8;
            let scale = 1.0 / (dim as f64).sqrt();
            let mut m = ComplexMatrix::zeros(dim);
            for j in 0..dim {
                for k in 0..dim {
                    let phase = 2.0 * PI * (j * k % dim) as f64 / dim as f64;
                    m.set(j, k, Complex64::from_polar(scale, phase));
                }
            }
            TargetGate {
                name: "qft3".into(),
                n_qubits: 3,
                matrix: m,
                evolution_time: 1.0,
            }
        }
        BuiltinTarget::Parity4 => {
            let p = parity_generator();
            let matrix = expm_hermitian(&p, FRAC_PI_4).expect("Pauli chain is Hermitian");
            TargetGate {
                name: "parity4".into(),
                n_qubits: 4,
                matrix,
                evolution_time: FRAC_PI_4,
            }
        }
    }
}

/// The four-body chain Z (x) Z (x) Z (x) Y whose pi/4 evolution writes the
/// parity of the first three qubits onto the ancilla.
pub fn parity_generator() -> ComplexMatrix {
    let z = PauliAxis::Z.matrix();
    let y = PauliAxis::Y.matrix();
    let zz = kron(&z, &z).expect("4x4");
    let zzz = kron(&zz, &z).expect("8x8");
    kron(&zzz, &y).expect("16x16")
}

/// One row of the parity truth table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParityRow {
    /// Data-qubit bits (z1, z2, z3).
    pub input: [u8; 3],
    /// Measured parity bit: the ancilla outcome after its x-basis readout.
    pub parity: u8,
    /// Probability of that outcome.
    pub probability: f64,
}

/// Exercise a 4-qubit unitary as a parity checker: prepare |z1 z2 z3>|0>,
/// apply the gate, rotate the ancilla into the x basis with a Hadamard, and
/// read the distribution of its measurement outcome.
pub fn parity_truth_table(u: &ComplexMatrix) -> Result<Vec<ParityRow>> {
    if u.dim() != 16 {
        return Err(Error::DimensionMismatch {
            expected: 16,
            got: u.dim(),
        });
    }
    let h = crate::trotter::Gate::Hadamard { qubit: 0 }.matrix();
    let mut rows = Vec::with_capacity(8);
    for z in 0..8usize {
        let state = StateVector::basis(4, z << 1)?;
        let evolved = apply_gate(&state, u, &[0, 1, 2, 3])?;
        let rotated = apply_gate(&evolved, &h, &[3])?;
        // Qubit 3 is the least significant index bit.
        let p_one: f64 = rotated
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx & 1 == 1)
            .map(|(_, amp)| amp.norm_sqr())
            .sum();
        let (parity, probability) = if p_one >= 0.5 {
            (1u8, p_one)
        } else {
            (0u8, 1.0 - p_one)
        };
        rows.push(ParityRow {
            input: [(z >> 2) as u8 & 1, (z >> 1) as u8 & 1, z as u8 & 1],
            parity,
            probability,
        });
    }
    Ok(rows)
}

/// Principal Hermitian generator of a unitary (eigenphases in (-pi, pi]).
pub fn principal_generator(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    logm_principal(u)
}

/// Default tolerance for the generator-condition checks.
pub const DEFAULT_CONDITION_TOL: f64 = 1e-8;

/// Diagnostic report for a candidate generator against a target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionsReport {
    /// True when the candidate contains no Pauli components of weight three
    /// or more (single-qubit fields and two-body couplings only, plus an
    /// identity component, which only shifts the global phase).
    pub physical_ok: bool,
    /// Frobenius norm of [h, h_principal].
    pub commutator_norm: f64,
    /// Largest distance of an eigenvalue of (h - h_principal) from the
    /// nearest multiple of 2 pi.
    pub eigdiff_max_deviation: f64,
}

/// Evaluate the generator conditions for a candidate Hamiltonian `h`.
///
/// The report is diagnostic only: the conditions are sufficient for
/// `e^{-i h} = target`, not necessary, so large values do not invalidate a
/// high-fidelity candidate.
pub fn check_conditions(
    h: &ComplexMatrix,
    u_target: &TargetGate,
    tol: f64,
) -> Result<ConditionsReport> {
    if h.dim() != u_target.matrix.dim() {
        return Err(Error::DimensionMismatch {
            expected: u_target.matrix.dim(),
            got: h.dim(),
        });
    }
    let hp = logm_principal(&u_target.matrix)?;
    let commutator_norm = h
        .matmul(&hp)?
        .sub(&hp.matmul(h)?)?
        .frobenius_norm();

    let diff = h.sub(&hp)?;
    let eig = hermitian_eigen(&diff)?;
    let two_pi = 2.0 * PI;
    let eigdiff_max_deviation = eig
        .values
        .iter()
        .map(|mu| (mu - two_pi * (mu / two_pi).round()).abs())
        .fold(0.0, f64::max);

    Ok(ConditionsReport {
        physical_ok: is_physical(h, u_target.n_qubits, tol),
        commutator_norm,
        eigdiff_max_deviation,
    })
}

/// Project `h` onto the Pauli-string basis and check that every component of
/// weight >= 3 vanishes within `tol`.
fn is_physical(h: &ComplexMatrix, n_qubits: usize, tol: f64) -> bool {
    let dim = 1usize << n_qubits;
    debug_assert_eq!(h.dim(), dim);
    // Enumerate strings as base-4 digits per qubit: 0 = I, 1 = X, 2 = Y, 3 = Z.
    for string in 0..4usize.pow(n_qubits as u32) {
        let mut weight = 0;
        let mut digits = Vec::with_capacity(n_qubits);
        let mut s = string;
        for _ in 0..n_qubits {
            digits.push(s % 4);
            if s % 4 != 0 {
                weight += 1;
            }
            s /= 4;
        }
        digits.reverse(); // digit per qubit, qubit 0 first
        if weight < 3 {
            continue;
        }
        // Tr(P h) / 2^n; P has one nonzero per row.
        let mut trace = Complex64::new(0.0, 0.0);
        for row in 0..dim {
            let mut col = row;
            let mut val = Complex64::new(1.0, 0.0);
            for (q, &digit) in digits.iter().enumerate() {
                let shift = n_qubits - 1 - q;
                let bit = (row >> shift) & 1;
                match digit {
                    0 => {}
                    1 => col ^= 1 << shift,
                    2 => {
                        col ^= 1 << shift;
                        val *= if bit == 0 {
                            Complex64::new(0.0, -1.0)
                        } else {
                            Complex64::new(0.0, 1.0)
                        };
                    }
                    _ => {
                        if bit == 1 {
                            val = -val;
                        }
                    }
                }
            }
            trace += val * h.get(col, row);
        }
        if (trace / dim as f64).norm() > tol {
            return false;
        }
    }
    true
}
