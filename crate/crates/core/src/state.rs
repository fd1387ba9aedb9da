//! Dense state containers: pure states, density matrices and the
//! structured alive/dead branch decomposition.
//!
//! Endianness: in a `k`-qubit register, qubit 0 is the most significant bit
//! of the basis index. For the `S (x) A` register the solution qubits come
//! first and the ancilla is the last (least significant) qubit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::oracle::ReversibleCircuit;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Largest register `uniform_superposition` will allocate.
pub const MAX_QUBITS: usize = 26;
/// Largest joint dimension `dense_sigma` will materialize.
pub const MAX_DENSE_DIM: usize = 4096;

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("register must have at least one qubit")]
    ZeroQubits,
    #[error("{0} qubits exceeds the simulator limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("squared norm {0} exceeds 1")]
    NormTooLarge(f64),
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("zero-norm state")]
    ZeroNorm,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace {0} outside (0, 1]")]
    BadTrace(f64),
    #[error("trace {0} is not 1")]
    TraceNotUnit(f64),
    #[error("dense dimension {0} exceeds limit of {MAX_DENSE_DIM}")]
    DenseTooLarge(usize),
    #[error("oracle left scratch register dirty for input label {0}")]
    ScratchNotRestored(u64),
}

/// Bit `qubit` of basis label `index` in a `num_qubits`-qubit register.
#[inline]
pub fn label_bit(index: usize, qubit: usize, num_qubits: usize) -> bool {
    (index >> (num_qubits - 1 - qubit)) & 1 == 1
}

pub fn label_to_bits(index: usize, num_qubits: usize) -> Vec<bool> {
    (0..num_qubits)
        .map(|q| label_bit(index, q, num_qubits))
        .collect()
}

pub fn bits_to_label(bits: &[bool]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
}

fn bitstring(index: usize, num_qubits: usize) -> String {
    label_to_bits(index, num_qubits)
        .into_iter()
        .map(|b| if b { '1' } else { '0' })
        .collect()
}

/// A possibly subnormalized pure state on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(num_qubits: usize, amplitudes: Vec<C64>) -> Result<Self, StateError> {
        let expected = 1usize
            .checked_shl(num_qubits as u32)
            .ok_or(StateError::TooManyQubits(num_qubits))?;
        if amplitudes.len() != expected {
            return Err(StateError::DimensionMismatch {
                expected,
                found: amplitudes.len(),
            });
        }
        let state = PureState { num_qubits, amplitudes };
        let norm = state.norm_sqr();
        if norm > 1.0 + NORM_TOL {
            return Err(StateError::NormTooLarge(norm));
        }
        Ok(state)
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, StateError> {
        if num_qubits > MAX_QUBITS {
            return Err(StateError::TooManyQubits(num_qubits));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(StateError::DimensionMismatch { expected: dim, found: index });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(PureState { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(C64::norm_sqr).sum()
    }

    /// Kronecker product `self (x) other`; `self` supplies the high qubits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState, StateError> {
        let k = self.num_qubits + other.num_qubits;
        if k > MAX_QUBITS {
            return Err(StateError::TooManyQubits(k));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|&a| other.amplitudes.iter().map(move |&b| a * b))
            .collect();
        Ok(PureState { num_qubits: k, amplitudes })
    }

    /// Zero every amplitude where `qubit != value`. Not renormalized; the
    /// returned probability is the kept squared mass.
    pub fn project(&self, qubit: usize, value: bool) -> Result<(PureState, f64), StateError> {
        if qubit >= self.num_qubits {
            return Err(StateError::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        let amplitudes: Vec<C64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if label_bit(i, qubit, self.num_qubits) == value {
                    a
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let state = PureState { num_qubits: self.num_qubits, amplitudes };
        let p = state.norm_sqr();
        Ok((state, p))
    }

    pub fn normalized(&self) -> Result<PureState, StateError> {
        let norm = self.norm_sqr();
        if norm <= 0.0 {
            return Err(StateError::ZeroNorm);
        }
        let scale = 1.0 / norm.sqrt();
        Ok(PureState {
            num_qubits: self.num_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * scale).collect(),
        })
    }

    /// `|psi><psi|`, keeping any subnormalization in the trace.
    pub fn to_density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        DensityMatrix(&v * v.adjoint())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64, StateError> {
        if self.dim() != other.dim() {
            return Err(StateError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Text rows `index bitstring re im`, 17 significant digits.
    pub fn dump_rows(&self) -> Vec<String> {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                format!(
                    "{} {} {:.16e} {:.16e}",
                    i,
                    bitstring(i, self.num_qubits),
                    a.re,
                    a.im
                )
            })
            .collect()
    }
}

/// The Hadamard layer applied to `|0...0>`: every amplitude `2^(-n/2)`.
pub fn uniform_superposition(n: usize) -> Result<PureState, StateError> {
    if n == 0 {
        return Err(StateError::ZeroQubits);
    }
    if n > MAX_QUBITS {
        return Err(StateError::TooManyQubits(n));
    }
    let dim = 1usize << n;
    let amp = C64::new((dim as f64).recip().sqrt(), 0.0);
    Ok(PureState { num_qubits: n, amplitudes: vec![amp; dim] })
}

/// Apply a reversible circuit to a dense state covering all of its qubits.
/// The result is an exact permutation of the input amplitudes.
pub fn apply_circuit_to_state(
    circuit: &ReversibleCircuit,
    state: &PureState,
) -> Result<PureState, StateError> {
    if state.num_qubits != circuit.num_qubits() {
        return Err(StateError::DimensionMismatch {
            expected: circuit.num_qubits(),
            found: state.num_qubits,
        });
    }
    let mut out = vec![C64::new(0.0, 0.0); state.dim()];
    for (i, &a) in state.amplitudes.iter().enumerate() {
        out[circuit.apply_index(i as u64) as usize] = a;
    }
    Ok(PureState { num_qubits: state.num_qubits, amplitudes: out })
}

/// Apply an oracle to a state on `S (x) A` (solution qubits, then the
/// result qubit) with its scratch register implicitly `|0...0>`.
///
/// Every populated basis label is pushed through the circuit with zeroed
/// scratch; the scratch must come back zero, and is then dropped. This is
/// exact for any clause count since only `2^(n+1)` labels are visited.
pub fn apply_oracle_clean_scratch(
    circuit: &ReversibleCircuit,
    state: &PureState,
) -> Result<PureState, StateError> {
    let n = circuit.n_solution();
    let expected = n + 1;
    if state.num_qubits != expected {
        return Err(StateError::DimensionMismatch {
            expected,
            found: state.num_qubits,
        });
    }
    let scratch = n..n + circuit.n_scratch();
    let mut full = vec![false; circuit.num_qubits()];
    let mut out = vec![C64::new(0.0, 0.0); state.dim()];
    for (i, &a) in state.amplitudes.iter().enumerate() {
        if a == C64::new(0.0, 0.0) {
            continue;
        }
        full.iter_mut().for_each(|b| *b = false);
        for (q, bit) in full[..n].iter_mut().enumerate() {
            *bit = label_bit(i, q, expected);
        }
        let y = circuit.result_index();
        full[y] = label_bit(i, n, expected);
        circuit
            .apply_basis_in_place(&mut full)
            .expect("register length matches circuit");
        if full[scratch.clone()].iter().any(|&b| b) {
            return Err(StateError::ScratchNotRestored(i as u64));
        }
        let mut label = bits_to_label(&full[..n]);
        label = (label << 1) | usize::from(full[y]);
        out[label] = a;
    }
    Ok(PureState { num_qubits: expected, amplitudes: out })
}

/// A density matrix, possibly subnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates squareness, Hermiticity (1e-12) and trace in (0, 1].
    pub fn new(matrix: CMatrix) -> Result<Self, StateError> {
        if !matrix.is_square() {
            return Err(StateError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let dev = hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(StateError::NotHermitian(dev));
        }
        let tr = matrix.trace().re;
        if !(tr > 0.0 && tr <= 1.0 + 1e-10) {
            return Err(StateError::BadTrace(tr));
        }
        Ok(DensityMatrix(matrix))
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        DensityMatrix(matrix)
    }

    /// `|index><index|` in dimension `dim`.
    pub fn basis_projector(dim: usize, index: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    pub fn from_diagonal(weights: &[f64]) -> Self {
        let d = weights.len();
        DensityMatrix(CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(weights[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.0)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        trace_of_product(&self.0, &self.0)
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(self.0.kronecker(&other.0))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Trace out the right tensor factor of dimension `right_dim`.
    pub fn partial_trace_right(&self, right_dim: usize) -> Result<DensityMatrix, StateError> {
        let d = self.dim();
        if right_dim == 0 || !d.is_multiple_of(right_dim) {
            return Err(StateError::DimensionMismatch { expected: right_dim, found: d });
        }
        let left = d / right_dim;
        Ok(DensityMatrix(CMatrix::from_fn(left, left, |i, j| {
            (0..right_dim)
                .map(|k| self.0[(i * right_dim + k, j * right_dim + k)])
                .sum()
        })))
    }

    /// Trace out the left tensor factor of dimension `left_dim`.
    pub fn partial_trace_left(&self, left_dim: usize) -> Result<DensityMatrix, StateError> {
        let d = self.dim();
        if left_dim == 0 || !d.is_multiple_of(left_dim) {
            return Err(StateError::DimensionMismatch { expected: left_dim, found: d });
        }
        let right = d / left_dim;
        Ok(DensityMatrix(CMatrix::from_fn(right, right, |i, j| {
            (0..left_dim)
                .map(|k| self.0[(k * right + i, k * right + j)])
                .sum()
        })))
    }
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `Re Tr(a b)` without forming the product.
fn trace_of_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}

/// Squared Uhlmann fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2`.
///
/// When either argument is pure (purity within 1e-10 of 1) this reduces to
/// `Tr(a b)` and no eigendecomposition is performed.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, StateError> {
    if a.dim() != b.dim() {
        return Err(StateError::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    for m in [a, b] {
        let tr = m.trace();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(StateError::TraceNotUnit(tr));
        }
    }
    let f = if a.purity() > 1.0 - 1e-10 || b.purity() > 1.0 - 1e-10 {
        trace_of_product(&a.0, &b.0)
    } else {
        let sqrt_a = hermitian_sqrt(&a.0);
        let inner = &sqrt_a * &b.0 * &sqrt_a;
        let h = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
        let s: f64 = h
            .symmetric_eigenvalues()
            .iter()
            .map(|&l| l.max(0.0).sqrt())
            .sum();
        s * s
    };
    Ok(f.clamp(0.0, 1.0))
}

fn hermitian_sqrt(m: &CMatrix) -> CMatrix {
    let eig = m.clone().symmetric_eigen();
    let roots = eig
        .eigenvalues
        .map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * CMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vitality {
    Alive,
    Dead,
}

/// One sector of the post-channel state: `|sa><sa| (x) observer`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub label: Vitality,
    pub sa_state: PureState,
    pub observer: DensityMatrix,
}

impl Branch {
    pub fn weight(&self) -> f64 {
        self.sa_state.norm_sqr()
    }
}

/// The post-channel state kept as a sum of product branches.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchedState {
    pub branches: Vec<Branch>,
}

impl BranchedState {
    pub fn branch(&self, label: Vitality) -> Option<&Branch> {
        self.branches.iter().find(|b| b.label == label)
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(Branch::weight).sum()
    }
}

/// Materialize `sum_b |sa_b><sa_b| (x) observer_b` as one dense matrix.
pub fn dense_sigma(branched: &BranchedState) -> Result<DensityMatrix, StateError> {
    let first = branched.branches.first().ok_or(StateError::ZeroNorm)?;
    let sa_dim = first.sa_state.dim();
    let obs_dim = first.observer.dim();
    let total = sa_dim * obs_dim;
    if total > MAX_DENSE_DIM {
        return Err(StateError::DenseTooLarge(total));
    }
    let mut acc = CMatrix::zeros(total, total);
    for b in &branched.branches {
        if b.sa_state.dim() != sa_dim {
            return Err(StateError::DimensionMismatch {
                expected: sa_dim,
                found: b.sa_state.dim(),
            });
        }
        if b.observer.dim() != obs_dim {
            return Err(StateError::DimensionMismatch {
                expected: obs_dim,
                found: b.observer.dim(),
            });
        }
        acc += b.sa_state.to_density().0.kronecker(&b.observer.0);
    }
    Ok(DensityMatrix(acc))
}
