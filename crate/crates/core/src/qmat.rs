//! Dense complex matrices, Hermitian spectra, density operators and the trace
//! distance.
//!
//! Composite spaces are always ordered system ⊗ control: the joint basis index
//! of system level `s` and control level `c` is `s * dim_control + c`.

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance on `‖M − M†‖_max` for a density operator.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `|Tr M − 1|` for a density operator.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of a density operator or Choi matrix.
pub const PSD_TOL: f64 = 1e-10;
/// Hermiticity tolerance accepted by [`eig_hermitian`].
pub const EIG_HERMITIAN_TOL: f64 = 1e-10;
/// Outcome probabilities below this cannot be post-selected on.
pub const POSTSELECT_MIN_PROB: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { data: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { data: DMatrix::identity(dim, dim) }
    }

    /// Builds a `dim × dim` matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(Self { data: DMatrix::from_row_slice(dim, dim, entries) })
    }

    /// Row-major real entries, imaginary parts zero.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_major(dim, &c)
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, &v) in values.iter().enumerate() {
            m.data[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Result<Self> {
        if ket.len() != bra.len() {
            return Err(Error::DimensionMismatch { expected: ket.len(), found: bra.len() });
        }
        let n = ket.len();
        Ok(Self { data: DMatrix::from_fn(n, n, |r, c| ket[r] * bra[c].conj()) })
    }

    /// `|i⟩⟨j|` in dimension `dim`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.data[(i, j)] = ONE;
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn pauli_y() -> Self {
        Self::from_row_major(2, &[ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::diag(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[(row, col)] = value;
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let n = self.dim();
        (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| self.data[(r, c)]).collect()
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { data: &self.data + &other.data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { data: &self.data - &other.data })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { data: &self.data * &other.data })
    }

    /// `self · m · self†`.
    pub fn sandwich(&self, m: &Self) -> Result<Self> {
        self.check_same_dim(m)?;
        Ok(Self { data: &self.data * &m.data * self.data.adjoint() })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { data: &self.data * factor }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self { data: self.data.adjoint() }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { data: self.data.kronecker(&other.data) }
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// `max |M_ij − conj(M_ji)|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.data[(r, c)] - self.data[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M†) / 2`.
    pub fn hermitized(&self) -> Self {
        Self { data: (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0) }
    }

    /// Entrywise max-norm of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self.data.iter().zip(other.data.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn raw(&self) -> &DMatrix<C64> {
        &self.data
    }
}

/// Real eigenvalues of a Hermitian matrix, in descending order.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let residual = m.hermitian_residual();
    if residual > EIG_HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let h = m.hermitized();
    let mut values: Vec<f64> = h.raw().clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Trace norm `Σ|λ_i|` of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?.iter().map(|l| l.abs()).sum())
}

/// A validated density operator: Hermitian, unit trace and positive
/// semidefinite within [`HERMITIAN_TOL`], [`TRACE_TOL`] and [`PSD_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let residual = matrix.hermitian_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = eig_hermitian(&matrix)?.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// Hermitizes and trace-normalizes `matrix` before validating it.
    pub fn normalized(matrix: &ComplexMatrix) -> Result<Self> {
        let h = matrix.hermitized();
        let tr = h.trace().re;
        if tr.abs() < POSTSELECT_MIN_PROB {
            return Err(Error::InvalidState(format!("trace {tr:.3e} cannot be normalized")));
        }
        Self::new(h.scale_real(1.0 / tr))
    }

    /// `|ψ⟩⟨ψ|` for a normalized ket.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm2: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("ket norm² {norm2} differs from 1")));
        }
        Self::new(ComplexMatrix::outer(ket, ket)?)
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self { matrix: ComplexMatrix::unit(dim, k, k) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.kron(&other.matrix) }
    }

    /// Bloch vector `(Tr ρσ_x, Tr ρσ_y, Tr ρσ_z)` of a qubit state.
    pub fn bloch(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim() });
        }
        let m = &self.matrix;
        let r01 = m.get(0, 1);
        Ok([2.0 * r01.re, -2.0 * r01.im, (m.get(0, 0) - m.get(1, 1)).re])
    }
}

/// `½‖ρ₁ − ρ₂‖₁`.
pub fn trace_distance(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    let diff = rho1.matrix.sub(&rho2.matrix)?;
    Ok(0.5 * trace_norm_hermitian(&diff)?)
}

/// `|+⟩ = (|0⟩ + |1⟩)/√2`.
pub fn ket_plus() -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [C64::new(s, 0.0), C64::new(s, 0.0)]
}

/// `|−⟩ = (|0⟩ − |1⟩)/√2`.
pub fn ket_minus() -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [C64::new(s, 0.0), C64::new(-s, 0.0)]
}

/// Partial inner product `⟨v| joint |v⟩` over a qubit control factor.
///
/// Returns the unnormalized system block and its trace, the probability of
/// the control outcome `v`. Fails with [`Error::PostSelectionImpossible`]
/// when that probability is below [`POSTSELECT_MIN_PROB`].
pub fn project_control(joint: &DensityOperator, v: &[C64; 2]) -> Result<(ComplexMatrix, f64)> {
    let n = joint.dim();
    if !n.is_multiple_of(2) {
        return Err(Error::DimensionMismatch { expected: 2 * (n / 2 + 1), found: n });
    }
    let norm2 = v[0].norm_sqr() + v[1].norm_sqr();
    if (norm2 - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidParameter(format!("control vector norm² {norm2} differs from 1")));
    }
    let sys = n / 2;
    let j = joint.matrix();
    let mut block = ComplexMatrix::zeros(sys);
    for s in 0..sys {
        for s2 in 0..sys {
            let mut acc = ZERO;
            for c in 0..2 {
                for c2 in 0..2 {
                    acc += v[c].conj() * j.get(s * 2 + c, s2 * 2 + c2) * v[c2];
                }
            }
            block.set(s, s2, acc);
        }
    }
    let prob = block.trace().re;
    if prob < POSTSELECT_MIN_PROB {
        return Err(Error::PostSelectionImpossible(prob));
    }
    Ok((block, prob))
}
