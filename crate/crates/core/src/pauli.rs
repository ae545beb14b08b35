//! Interaction terms, term sets and their dense realizations.
//!
//! A Hamiltonian is a weighted sum of *terms*: single-qubit fields
//! sigma_i^a and two-body couplings sigma_i^a sigma_j^b. The ordered term
//! set fixes the parameter layout; a [`ParamVector`] carries one real
//! coefficient per term (time is normalized to 1, so coefficients are
//! dimensionless energy-time products).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// One of the three Pauli axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    /// The 2x2 Pauli matrix for this axis.
    pub fn matrix(self) -> ComplexMatrix {
        let c = Complex64::new;
        let data = match self {
            PauliAxis::X => vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
            PauliAxis::Y => vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
            PauliAxis::Z => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
        };
        ComplexMatrix::from_data(2, data).expect("2x2")
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PauliAxis::X => "x",
            PauliAxis::Y => "y",
            PauliAxis::Z => "z",
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PauliAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(PauliAxis::X),
            "y" | "Y" => Ok(PauliAxis::Y),
            "z" | "Z" => Ok(PauliAxis::Z),
            other => Err(Error::Parse(format!("unknown Pauli axis '{other}'"))),
        }
    }
}

/// A single interaction term: a local field or a two-body coupling.
///
/// Couplings are kept canonical with `qubit_i < qubit_j`; the constructor
/// reorders as needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "TermRepr", into = "TermRepr")]
pub enum PauliTerm {
    Local {
        qubit: usize,
        axis: PauliAxis,
    },
    Coupling {
        qubit_i: usize,
        axis_i: PauliAxis,
        qubit_j: usize,
        axis_j: PauliAxis,
    },
}

/// JSON shape: `{"local": [q, "z"]}` / `{"coupling": [i, j, "x", "y"]}`.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TermRepr {
    Local(usize, PauliAxis),
    Coupling(usize, usize, PauliAxis, PauliAxis),
}

impl From<TermRepr> for PauliTerm {
    fn from(r: TermRepr) -> Self {
        match r {
            TermRepr::Local(q, a) => PauliTerm::local(q, a),
            TermRepr::Coupling(i, j, a, b) => PauliTerm::coupling(i, a, j, b),
        }
    }
}

impl From<PauliTerm> for TermRepr {
    fn from(t: PauliTerm) -> Self {
        match t {
            PauliTerm::Local { qubit, axis } => TermRepr::Local(qubit, axis),
            PauliTerm::Coupling {
                qubit_i,
                axis_i,
                qubit_j,
                axis_j,
            } => TermRepr::Coupling(qubit_i, qubit_j, axis_i, axis_j),
        }
    }
}

impl PauliTerm {
    pub fn local(qubit: usize, axis: PauliAxis) -> Self {
        PauliTerm::Local { qubit, axis }
    }

    /// Two-body coupling, canonicalized so the lower qubit index comes first.
    pub fn coupling(qubit_i: usize, axis_i: PauliAxis, qubit_j: usize, axis_j: PauliAxis) -> Self {
        if qubit_i <= qubit_j {
            PauliTerm::Coupling {
                qubit_i,
                axis_i,
                qubit_j,
                axis_j,
            }
        } else {
            PauliTerm::Coupling {
                qubit_i: qubit_j,
                axis_i: axis_j,
                qubit_j: qubit_i,
                axis_j: axis_i,
            }
        }
    }

    /// The qubits this term acts on, ascending.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            PauliTerm::Local { qubit, .. } => vec![qubit],
            PauliTerm::Coupling {
                qubit_i, qubit_j, ..
            } => vec![qubit_i, qubit_j],
        }
    }

    /// (qubit, axis) factors in ascending qubit order.
    pub fn factors(&self) -> Vec<(usize, PauliAxis)> {
        match *self {
            PauliTerm::Local { qubit, axis } => vec![(qubit, axis)],
            PauliTerm::Coupling {
                qubit_i,
                axis_i,
                qubit_j,
                axis_j,
            } => vec![(qubit_i, axis_i), (qubit_j, axis_j)],
        }
    }

    pub fn is_coupling(&self) -> bool {
        matches!(self, PauliTerm::Coupling { .. })
    }

    /// Number of Y factors; the Pauli product conjugates to (-1)^{#Y} itself.
    pub fn y_count(&self) -> usize {
        self.factors()
            .iter()
            .filter(|(_, a)| *a == PauliAxis::Y)
            .count()
    }

    /// Axis letters, e.g. "z" or "zy".
    pub fn axes_label(&self) -> String {
        self.factors().iter().map(|(_, a)| a.as_str()).collect()
    }

    /// The term's own Pauli operator on its qubits (2x2 or 4x4), lower qubit
    /// index as the leading tensor factor.
    pub fn operator_matrix(&self) -> ComplexMatrix {
        match *self {
            PauliTerm::Local { axis, .. } => axis.matrix(),
            PauliTerm::Coupling { axis_i, axis_j, .. } => {
                crate::linalg::kron(&axis_i.matrix(), &axis_j.matrix()).expect("4x4")
            }
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        match *self {
            PauliTerm::Local { qubit, .. } => {
                if qubit >= n_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: qubit,
                        n_qubits,
                    });
                }
            }
            PauliTerm::Coupling {
                qubit_i, qubit_j, ..
            } => {
                if qubit_j >= n_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: qubit_j,
                        n_qubits,
                    });
                }
                if qubit_i == qubit_j {
                    return Err(Error::DuplicateQubit { index: qubit_i });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PauliTerm::Local { qubit, axis } => write!(f, "{axis}{qubit}"),
            PauliTerm::Coupling {
                qubit_i,
                axis_i,
                qubit_j,
                axis_j,
            } => write!(f, "{axis_i}{qubit_i}{axis_j}{qubit_j}"),
        }
    }
}

/// The ordered set of allowed interaction terms over `n_qubits` qubits.
///
/// The term order is significant: it fixes the parameter layout and the gate
/// order inside each Trotter slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr")]
pub struct HamiltonianSpec {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    heisenberg_only: bool,
}

#[derive(Deserialize)]
struct SpecRepr {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    #[serde(default)]
    heisenberg_only: bool,
}

impl TryFrom<SpecRepr> for HamiltonianSpec {
    type Error = Error;
    fn try_from(r: SpecRepr) -> Result<Self> {
        HamiltonianSpec::new(r.n_qubits, r.terms, r.heisenberg_only)
    }
}

impl HamiltonianSpec {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>, heisenberg_only: bool) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidConfig("n_qubits must be positive".into()));
        }
        let mut seen = HashSet::new();
        for (position, term) in terms.iter().enumerate() {
            term.validate(n_qubits)?;
            if !seen.insert(*term) {
                return Err(Error::DuplicateTerm { position });
            }
            if heisenberg_only {
                if let PauliTerm::Coupling { axis_i, axis_j, .. } = term {
                    if axis_i != axis_j {
                        return Err(Error::HeisenbergViolation {
                            found: term.to_string(),
                        });
                    }
                }
            }
        }
        Ok(Self {
            n_qubits,
            terms,
            heisenberg_only,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn heisenberg_only(&self) -> bool {
        self.heisenberg_only
    }

    /// Check that a parameter vector is aligned with this term set.
    pub fn check_params(&self, theta: &ParamVector) -> Result<()> {
        if theta.len() != self.terms.len() {
            return Err(Error::ParamLengthMismatch {
                expected: self.terms.len(),
                got: theta.len(),
            });
        }
        Ok(())
    }
}

/// Real coefficients aligned 1:1 with a term set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

/// Dense 2^n x 2^n matrix of a single term, identity on untouched qubits.
///
/// Built directly from the bit action of the Pauli factors (each Pauli has
/// one nonzero entry per row), not via Kronecker products.
pub fn term_matrix(term: &PauliTerm, n_qubits: usize) -> Result<ComplexMatrix> {
    term.validate(n_qubits)?;
    if n_qubits > crate::linalg::MAX_QUBITS {
        return Err(Error::Capacity {
            dim: 1 << n_qubits,
            max: crate::linalg::MAX_DIM,
        });
    }
    let dim = 1usize << n_qubits;
    let mut m = ComplexMatrix::zeros(dim);
    let factors = term.factors();
    for row in 0..dim {
        let mut col = row;
        let mut val = Complex64::new(1.0, 0.0);
        for &(q, axis) in &factors {
            let shift = n_qubits - 1 - q;
            let bit = (row >> shift) & 1;
            match axis {
                PauliAxis::X => col ^= 1 << shift,
                PauliAxis::Y => {
                    col ^= 1 << shift;
                    val *= if bit == 0 {
                        Complex64::new(0.0, -1.0)
                    } else {
                        Complex64::new(0.0, 1.0)
                    };
                }
                PauliAxis::Z => {
                    if bit == 1 {
                        val = -val;
                    }
                }
            }
        }
        m.set(row, col, val);
    }
    Ok(m)
}

/// H(theta) = sum_j theta_j * term_matrix(term_j).
pub fn hamiltonian_matrix(spec: &HamiltonianSpec, theta: &ParamVector) -> Result<ComplexMatrix> {
    spec.check_params(theta)?;
    let dim = 1usize << spec.n_qubits();
    let mut h = ComplexMatrix::zeros(dim);
    for (term, &coeff) in spec.terms().iter().zip(theta.values()) {
        let tm = term_matrix(term, spec.n_qubits())?;
        h = h.add(&tm.scale(Complex64::new(coeff, 0.0)))?;
    }
    Ok(h)
}

/// Named term-set presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// All local fields plus XX/YY/ZZ couplings on every pair.
    FullHeisenberg,
    /// All local fields plus all nine axis pairs on every pair.
    FullGeneral,
    /// The bundled reference term set for the 3-qubit Toffoli problem, with
    /// its published coefficients.
    Fig4a,
    /// The bundled reference term set for the 4-qubit parity problem, with
    /// its published coefficients.
    Fig4b,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::FullHeisenberg => "full_heisenberg",
            Preset::FullGeneral => "full_general",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
        }
    }

    /// Published coefficient values, for the fixed reference presets.
    pub fn published_params(self) -> Option<ParamVector> {
        match self {
            Preset::Fig4a => Some(ParamVector::new(vec![
                1.09, 2.35, 3.11, -0.78, 0.07, 0.07, 0.78, 1.089, 3.11,
            ])),
            Preset::Fig4b => Some(ParamVector::new(vec![
                1.42, 1.04, 1.30, 1.23, 0.73, 1.60, 1.03, 0.29, 2.57, 2.37, 2.29, 2.30,
            ])),
            _ => None,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full_heisenberg" => Ok(Preset::FullHeisenberg),
            "full_general" => Ok(Preset::FullGeneral),
            "fig4a" => Ok(Preset::Fig4a),
            "fig4b" => Ok(Preset::Fig4b),
            other => Err(Error::UnknownPreset(other.into())),
        }
    }
}

/// Build a preset term set for `n` qubits.
///
/// `full_heisenberg` and `full_general` accept any `n >= 2`; the reference
/// presets are fixed at their own qubit counts (3 and 4).
pub fn standard_spec(preset: Preset, n: usize) -> Result<HamiltonianSpec> {
    match preset {
        Preset::FullHeisenberg => {
            require_generic_n(preset, n)?;
            let mut terms = local_fields(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    for axis in PauliAxis::ALL {
                        terms.push(PauliTerm::coupling(i, axis, j, axis));
                    }
                }
            }
            HamiltonianSpec::new(n, terms, true)
        }
        Preset::FullGeneral => {
            require_generic_n(preset, n)?;
            let mut terms = local_fields(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    for axis_i in PauliAxis::ALL {
                        for axis_j in PauliAxis::ALL {
                            terms.push(PauliTerm::coupling(i, axis_i, j, axis_j));
                        }
                    }
                }
            }
            HamiltonianSpec::new(n, terms, false)
        }
        Preset::Fig4a => {
            require_fixed_n(preset, 3, n)?;
            use PauliAxis::*;
            let terms = vec![
                PauliTerm::local(0, X),
                PauliTerm::local(0, Z),
                PauliTerm::local(1, X),
                PauliTerm::local(1, Z),
                PauliTerm::coupling(0, X, 1, X),
                PauliTerm::coupling(0, Y, 1, Y),
                PauliTerm::coupling(0, Z, 1, Z),
                PauliTerm::coupling(0, X, 2, X),
                PauliTerm::coupling(1, Z, 2, Z),
            ];
            HamiltonianSpec::new(3, terms, false)
        }
        Preset::Fig4b => {
            require_fixed_n(preset, 4, n)?;
            use PauliAxis::*;
            let terms = vec![
                PauliTerm::coupling(0, X, 1, X),
                PauliTerm::coupling(0, Y, 1, Y),
                PauliTerm::coupling(0, Z, 1, Z),
                PauliTerm::coupling(1, X, 2, X),
                PauliTerm::coupling(1, Y, 2, Y),
                PauliTerm::coupling(1, Z, 2, Z),
                PauliTerm::coupling(0, X, 2, X),
                PauliTerm::coupling(0, Y, 2, Y),
                PauliTerm::coupling(0, Z, 2, Z),
                PauliTerm::coupling(1, Z, 3, Y),
                PauliTerm::coupling(0, Z, 3, Y),
                PauliTerm::coupling(2, Z, 3, Y),
            ];
            HamiltonianSpec::new(4, terms, false)
        }
    }
}

fn local_fields(n: usize) -> Vec<PauliTerm> {
    let mut terms = Vec::with_capacity(3 * n);
    for q in 0..n {
        for axis in PauliAxis::ALL {
            terms.push(PauliTerm::local(q, axis));
        }
    }
    terms
}

fn require_generic_n(preset: Preset, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "preset '{preset}' needs at least 2 qubits, got {n}"
        )));
    }
    Ok(())
}

fn require_fixed_n(preset: Preset, expected: usize, got: usize) -> Result<()> {
    if got != expected {
        return Err(Error::PresetQubitCount {
            name: preset.as_str().into(),
            expected,
            got,
        });
    }
    Ok(())
}
