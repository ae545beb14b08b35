//! Dense complex matrix and state-vector kernels.
//!
//! Everything here works on small dense matrices (dimension a power of two,
//! at most 2^8 = 256, which covers the overlap-test register of 2n = 8
//! qubits). Matrices are stored row-major. Qubit 0 is the *most significant*
//! (leftmost) tensor factor throughout the crate: the basis state
//! |z1 z2 .. zn> maps to index sum z_k 2^(n-k).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::parallel;

/// Largest supported matrix dimension (2^16 entries).
pub const MAX_DIM: usize = 1 << 8;
/// Largest supported register width.
pub const MAX_QUBITS: usize = 8;
/// Tolerance for unitarity checks and log/exp round trips.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Matrix dimension above which row-level parallelism pays off.
const PAR_MATMUL_DIM: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Build from row-major data; the length must be `dim * dim`.
    pub fn from_data(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Diagonal matrix from complex entries.
    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * dim + i] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    /// Elementwise complex conjugate (no transpose).
    pub fn conjugate(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Matrix product `self * other`.
    ///
    /// Rows with structurally zero entries are skipped, so multiplying by an
    /// embedded few-qubit gate costs O(dim^2 * 2^k) rather than O(dim^3).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let d = self.dim;
        let mut out = Self::zeros(d);
        let fill_row = |i: usize, row_out: &mut [Complex64]| {
            for k in 0..d {
                let aik = self.data[i * d + k];
                if aik == ZERO {
                    continue;
                }
                let brow = &other.data[k * d..(k + 1) * d];
                for (o, b) in row_out.iter_mut().zip(brow) {
                    *o += aik * b;
                }
            }
        };
        if d >= PAR_MATMUL_DIM {
            parallel::for_each_chunk_mut(&mut out.data, d, fill_row);
        } else {
            for (i, row_out) in out.data.chunks_mut(d).enumerate() {
                fill_row(i, row_out);
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(a, x)| a * x)
                    .sum::<Complex64>()
            })
            .collect())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from Hermiticity, max |m_ij - conj(m_ji)|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..=i {
                dev = dev.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        dev
    }

    /// Largest entrywise deviation of `self† self` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                // (U† U)_ij = sum_k conj(u_ki) u_kj
                let mut s = ZERO;
                for k in 0..d {
                    s += self.data[k * d + i].conj() * self.data[k * d + j];
                }
                if i == j {
                    s -= ONE;
                }
                dev = dev.max(s.norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }
}

/// Largest entrywise |a_ij - b_ij|.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// Largest entrywise difference after removing the optimal global phase,
/// min over phi of max |a_ij - e^{i phi} b_ij| with phi = arg Tr(a† b).
pub fn phase_aligned_max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let overlap = adjoint_trace_overlap(a, b)?;
    let phase = if overlap.norm() > 1e-14 {
        overlap.conj() / overlap.norm()
    } else {
        ONE
    };
    max_abs_diff(a, &b.scale(phase))
}

/// Tr(a† b) = sum_ij conj(a_ij) b_ij.
pub fn adjoint_trace_overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Tr(a b) without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let d = a.dim();
    let mut t = ZERO;
    for i in 0..d {
        for k in 0..d {
            t += a.data[i * d + k] * b.data[k * d + i];
        }
    }
    Ok(t)
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a.dim() * b.dim();
    if dim > MAX_DIM {
        return Err(Error::Capacity { dim, max: MAX_DIM });
    }
    let (da, db) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(dim);
    for i in 0..da {
        for j in 0..da {
            let aij = a.get(i, j);
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.set(i * db + k, j * db + l, aij * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix: h = V diag(values) V†.
///
/// Eigenvalues are returned in ascending order; `vectors` holds the
/// corresponding orthonormal eigenvectors as columns.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Diagonalize a Hermitian matrix (input is validated to `HERMITIAN_TOL`).
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let dev = h.hermiticity_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(hermitian_eigen_unchecked(h))
}

/// Same as [`hermitian_eigen`] but trusts the caller; the input is
/// symmetrized entrywise before the decomposition.
fn hermitian_eigen_unchecked(h: &ComplexMatrix) -> HermitianEigen {
    let d = h.dim();
    let m = DMatrix::from_fn(d, d, |i, j| (h.get(i, j) + h.get(j, i).conj()) * 0.5);
    let eig = SymmetricEigen::new(m);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(d);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..d {
            vectors.set(i, col, eig.eigenvectors[(i, k)]);
        }
    }
    HermitianEigen { values, vectors }
}

/// Reconstruct V diag(f(k)) V† for orthonormal columns V.
fn reconstruct_from_eigen(vectors: &ComplexMatrix, diag: &[Complex64]) -> ComplexMatrix {
    let d = vectors.dim();
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let mut s = ZERO;
            for (k, &dk) in diag.iter().enumerate() {
                s += dk * vectors.get(i, k) * vectors.get(j, k).conj();
            }
            out.set(i, j, s);
        }
    }
    out
}

/// Matrix exponential e^{-i h t} of a Hermitian generator, via
/// eigendecomposition h = V diag(lambda) V†.
pub fn expm_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(h)?;
    let phases: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&lambda| Complex64::from_polar(1.0, -lambda * t))
        .collect();
    Ok(reconstruct_from_eigen(&eig.vectors, &phases))
}

/// Principal Hermitian generator of a unitary: the unique Hermitian `h` with
/// eigenvalues in (-pi, pi] such that e^{-i h} equals the input.
///
/// Note the defining contract is the round trip `expm_hermitian(log, 1) == u`;
/// the sign convention follows from writing the evolution as e^{-i h t}.
pub fn logm_principal(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (eigvals, vectors) = diagonalize_unitary(u)?;
    let principal: Vec<Complex64> = eigvals
        .iter()
        .map(|lambda| {
            let mut h = -lambda.im.atan2(lambda.re);
            if h <= -std::f64::consts::PI {
                h += 2.0 * std::f64::consts::PI;
            }
            Complex64::new(h, 0.0)
        })
        .collect();
    Ok(reconstruct_from_eigen(&vectors, &principal))
}

/// Spectral decomposition u = V diag(eigvals) V† of a unitary matrix.
///
/// A unitary is normal, so it is diagonalized by the common eigenbasis of the
/// commuting Hermitian pair A = (u + u†)/2 and B = (u - u†)/(2i). We
/// diagonalize A + gamma B and accept the basis once it actually diagonalizes
/// `u`; a different gamma is tried if two distinct eigenphases happen to
/// collide for the current one.
pub fn diagonalize_unitary(u: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    let dev = u.unitarity_deviation();
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    let d = u.dim();
    let adj = u.adjoint();
    let mut a = ComplexMatrix::zeros(d);
    let mut b = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let uij = u.get(i, j);
            let vij = adj.get(i, j);
            a.set(i, j, (uij + vij) * 0.5);
            b.set(i, j, (uij - vij) * Complex64::new(0.0, -0.5));
        }
    }

    const GAMMAS: [f64; 6] = [
        0.618_033_988_749_894_9,
        1.0,
        0.280_669_3,
        1.732_050_807_568_877,
        0.091_234_57,
        2.517_893_4,
    ];
    for gamma in GAMMAS {
        let c = a.add(&b.scale(Complex64::new(gamma, 0.0)))?;
        let eig = hermitian_eigen_unchecked(&c);
        let v = eig.vectors;
        // D = V† U V must come out diagonal.
        let dmat = v.adjoint().matmul(u)?.matmul(&v)?;
        let mut offdiag: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    offdiag = offdiag.max(dmat.get(i, j).norm());
                }
            }
        }
        if offdiag < 1e-11 {
            let eigvals = (0..d).map(|i| dmat.get(i, i)).collect();
            return Ok((eigvals, v));
        }
    }
    Err(Error::DiagonalizationFailed)
}

/// Pure state of an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Build from amplitudes, checking the length and normalization.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::Capacity {
                dim: 1 << n_qubits,
                max: MAX_DIM,
            });
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                got: amplitudes.len(),
            });
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > UNITARY_TOL {
            return Err(Error::NotNormalized {
                deviation: (norm_sqr - 1.0).abs(),
            });
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state |index>.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::Capacity {
                dim: 1 << n_qubits,
                max: MAX_DIM,
            });
        }
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::QubitOutOfRange {
                index,
                n_qubits: dim,
            });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// The all-zeros state |0..0>.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Measurement probability of the given basis outcome.
    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }
}

/// Apply a k-qubit gate to the named qubits of a state (qubit 0 = leftmost
/// tensor factor; `qubits[0]` is the gate's own most significant qubit).
pub fn apply_gate(state: &StateVector, gate: &ComplexMatrix, qubits: &[usize]) -> Result<StateVector> {
    let mut amplitudes = state.amplitudes.clone();
    apply_gate_in_place(&mut amplitudes, state.n_qubits, gate, qubits)?;
    Ok(StateVector {
        n_qubits: state.n_qubits,
        amplitudes,
    })
}

/// In-place version of [`apply_gate`] on a raw amplitude buffer.
pub(crate) fn apply_gate_in_place(
    amplitudes: &mut [Complex64],
    n_qubits: usize,
    gate: &ComplexMatrix,
    qubits: &[usize],
) -> Result<()> {
    let k = qubits.len();
    if gate.dim() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            got: gate.dim(),
        });
    }
    for (pos, &q) in qubits.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                n_qubits,
            });
        }
        if qubits[..pos].contains(&q) {
            return Err(Error::DuplicateQubit { index: q });
        }
    }

    // Bit position (from the LSB of the index) for each gate operand.
    let shifts: Vec<usize> = qubits.iter().map(|&q| n_qubits - 1 - q).collect();
    let target_mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
    let dim = 1usize << n_qubits;
    let block = 1usize << k;

    let mut gathered = vec![ZERO; block];
    for base in 0..dim {
        if base & target_mask != 0 {
            continue;
        }
        // Indices of the 2^k amplitudes this gate mixes, in gate bit order.
        for (g, slot) in gathered.iter_mut().enumerate() {
            let mut idx = base;
            for (pos, &s) in shifts.iter().enumerate() {
                if (g >> (k - 1 - pos)) & 1 == 1 {
                    idx |= 1 << s;
                }
            }
            *slot = amplitudes[idx];
        }
        for r in 0..block {
            let mut idx = base;
            for (pos, &s) in shifts.iter().enumerate() {
                if (r >> (k - 1 - pos)) & 1 == 1 {
                    idx |= 1 << s;
                }
            }
            let mut acc = ZERO;
            for (c, &amp) in gathered.iter().enumerate() {
                acc += gate.get(r, c) * amp;
            }
            amplitudes[idx] = acc;
        }
    }
    Ok(())
}

/// Parse the plain-text matrix format: first line `dim`, then `dim*dim`
/// lines of `re im` pairs in row-major order.
pub fn parse_matrix_text(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty());
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dim: usize = first
        .parse()
        .map_err(|_| Error::Parse(format!("bad dimension line '{first}'")))?;
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Capacity { dim, max: MAX_DIM });
    }
    let mut data = Vec::with_capacity(dim * dim);
    for (lineno, line) in lines {
        let mut parts = line.split_whitespace();
        let re: f64 = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| Error::Parse(format!("line {}: expected 're im'", lineno + 1)))?;
        let im: f64 = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| Error::Parse(format!("line {}: expected 're im'", lineno + 1)))?;
        if parts.next().is_some() {
            return Err(Error::Parse(format!(
                "line {}: trailing fields after 're im'",
                lineno + 1
            )));
        }
        data.push(Complex64::new(re, im));
    }
    if data.len() != dim * dim {
        return Err(Error::Parse(format!(
            "expected {} entries, found {}",
            dim * dim,
            data.len()
        )));
    }
    ComplexMatrix::from_data(dim, data)
}

/// Render a matrix in the plain-text format accepted by [`parse_matrix_text`].
pub fn format_matrix_text(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n", m.dim()));
    for v in m.data() {
        out.push_str(&format!("{:?} {:?}\n", v.re, v.im));
    }
    out
}
