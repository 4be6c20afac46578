//! Complex matrices, Hermitian operators and their spectra.
//!
//! Bipartite operators on `H_A ⊗ H_B` use the A-major composite index
//! `i * dim_B + j`, so `(a ⊗ b)[(i,j),(k,l)] = a[i,k] * b[j,l]`. Vectorization
//! of operators is row-major throughout: `vec(ρ)[m * N + μ] = ρ[m, μ]`.

use std::fmt;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{HERM_TOL, SPECTRAL_TOL};

const EIGEN_MAX_ITER: usize = 100_000;

/// Dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix(DMatrix<Complex64>);

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        let entries = repr
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        ComplexMatrix::from_row_major(repr.rows, repr.cols, entries)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixRepr { rows, cols, entries }
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape("matrix dimensions must be positive".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::EntryCount { rows, cols, found: entries.len() });
        }
        Self::from_matrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidShape("matrix dimensions must be positive".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix(m))
    }

    /// Real matrix promoted to complex entries.
    pub fn from_real(rows: usize, cols: usize, row_major: &[f64]) -> Result<Self> {
        Self::from_row_major(
            rows,
            cols,
            row_major.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }

    /// Maximum of `|U†U - I|` over entries.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.0.ncols();
        max_abs_diff(&(self.0.adjoint() * &self.0), &DMatrix::identity(n, n))
    }
}

impl Deref for ComplexMatrix {
    type Target = DMatrix<Complex64>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Square complex matrix that is Hermitian up to `herm_tol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianRepr", into = "HermitianRepr")]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    herm_tol: f64,
}

#[derive(Serialize, Deserialize)]
struct HermitianRepr {
    #[serde(flatten)]
    matrix: ComplexMatrix,
    #[serde(default = "default_herm_tol")]
    herm_tol: f64,
}

fn default_herm_tol() -> f64 {
    HERM_TOL
}

impl TryFrom<HermitianRepr> for HermitianOperator {
    type Error = Error;

    fn try_from(repr: HermitianRepr) -> Result<Self> {
        HermitianOperator::with_tol(repr.matrix, repr.herm_tol)
    }
}

impl From<HermitianOperator> for HermitianRepr {
    fn from(h: HermitianOperator) -> Self {
        HermitianRepr { matrix: h.matrix, herm_tol: h.herm_tol }
    }
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tol(matrix, HERM_TOL)
    }

    pub fn with_tol(matrix: ComplexMatrix, herm_tol: f64) -> Result<Self> {
        if herm_tol.is_nan() || herm_tol < 0.0 {
            return Err(Error::OutOfRange(format!("herm_tol = {herm_tol}")));
        }
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let deviation = hermiticity_defect(&matrix);
        if deviation > herm_tol {
            return Err(Error::NotHermitian { deviation, tol: herm_tol });
        }
        Ok(HermitianOperator { matrix, herm_tol })
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        Self::new(ComplexMatrix::from_matrix(m)?)
    }

    /// Real diagonal operator `diag(values)`.
    pub fn diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)));
        HermitianOperator { matrix: ComplexMatrix(DMatrix::from_diagonal(&d)), herm_tol: HERM_TOL }
    }

    pub fn identity(n: usize) -> Self {
        HermitianOperator { matrix: ComplexMatrix::identity(n), herm_tol: HERM_TOL }
    }

    /// The maximally mixed state `I/n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self::identity(n).scaled(1.0 / n as f64)
    }

    /// Rank-one operator `|v⟩⟨v|` (not normalized).
    pub fn projector(v: &DVector<Complex64>) -> Self {
        let m = v * v.adjoint();
        HermitianOperator { matrix: ComplexMatrix(m), herm_tol: HERM_TOL }
    }

    /// Computational basis projector `|i⟩⟨i|` in dimension `n`.
    pub fn basis_projector(n: usize, i: usize) -> Self {
        let mut diag = vec![0.0; n];
        diag[i] = 1.0;
        Self::diagonal(&diag)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn herm_tol(&self) -> f64 {
        self.herm_tol
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scaled(&self, s: f64) -> Self {
        HermitianOperator {
            matrix: ComplexMatrix(self.matrix.0.map(|z| z * s)),
            herm_tol: self.herm_tol,
        }
    }

    /// `(A + A†)/2`, exactly Hermitian.
    pub fn symmetrized(&self) -> DMatrix<Complex64> {
        (&self.matrix.0 + self.matrix.0.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// Conjugation `U A U†`.
    pub fn conjugate_by(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        let m = u * &self.matrix.0 * u.adjoint();
        HermitianOperator::with_tol(ComplexMatrix::from_matrix(m)?, self.herm_tol)
    }

    /// Descending eigenvalues together with the matching eigenvectors as columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let eig = self
            .symmetrized()
            .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITER)
            .ok_or(Error::EigenNonConvergence)?;
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*spectrum(self)?.values().last().expect("non-empty spectrum"))
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(spectrum(self)?.values()[0])
    }
}

impl fmt::Display for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.matrix.0)
    }
}

/// Real vector kept in descending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Spectrum::new(v)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.values
    }
}

impl Spectrum {
    /// Sorts `values` into descending order.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidShape("empty spectrum".into()));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn ascending(&self) -> Vec<f64> {
        self.values.iter().rev().copied().collect()
    }

    /// Running sums of the `k` largest entries, `k = 1..=len`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.values
            .iter()
            .scan(0.0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }
}

/// Tensor-factor dimensions of a composite space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidShape(format!("{dims:?}")));
        }
        Ok(SubsystemShape { dims })
    }

    pub fn bipartite(a: usize, b: usize) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator {
        matrix: ComplexMatrix(a.as_matrix().kronecker(b.as_matrix())),
        herm_tol: a.herm_tol.max(b.herm_tol),
    }
}

fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

/// Partial trace of an arbitrary square matrix; kept factors stay in their
/// original relative order.
pub fn partial_trace_matrix(
    a: &DMatrix<Complex64>,
    shape: &SubsystemShape,
    keep: &[usize],
) -> Result<DMatrix<Complex64>> {
    let dims = shape.dims();
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if shape.total() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: shape.total(), found: a.nrows() });
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() || kept[k] {
            return Err(Error::InvalidKeepSet);
        }
        kept[k] = true;
    }
    let n_kept = kept.iter().filter(|&&b| b).count();
    if n_kept == 0 || n_kept == dims.len() {
        return Err(Error::InvalidKeepSet);
    }
    let out_dim: usize = dims.iter().zip(&kept).filter(|(_, &k)| k).map(|(d, _)| d).product();
    let total = shape.total();
    // composite index split into (kept part, traced part) for every full index
    let mut kept_idx = vec![0usize; total];
    let mut traced_idx = vec![0usize; total];
    let mut buf = vec![0usize; dims.len()];
    for idx in 0..total {
        digits(idx, dims, &mut buf);
        let (mut ki, mut ti) = (0usize, 0usize);
        for (k, &d) in dims.iter().enumerate() {
            if kept[k] {
                ki = ki * d + buf[k];
            } else {
                ti = ti * d + buf[k];
            }
        }
        kept_idx[idx] = ki;
        traced_idx[idx] = ti;
    }
    let mut out = DMatrix::<Complex64>::zeros(out_dim, out_dim);
    for r in 0..total {
        for c in 0..total {
            if traced_idx[r] == traced_idx[c] {
                out[(kept_idx[r], kept_idx[c])] += a[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Marginal of `a` on the factors listed in `keep`.
pub fn partial_trace(
    a: &HermitianOperator,
    shape: &SubsystemShape,
    keep: &[usize],
) -> Result<HermitianOperator> {
    let m = partial_trace_matrix(a.as_matrix(), shape, keep)?;
    HermitianOperator::with_tol(ComplexMatrix(m), a.herm_tol)
}

pub(crate) fn isqrt_exact(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Reshuffling `D[(m,n),(μ,ν)] = Φ[(m,μ),(n,ν)]`, a pure element permutation.
pub fn reshuffle(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = isqrt_exact(rows).ok_or(Error::NotPerfectSquare(rows))?;
    Ok(ComplexMatrix(reshuffle_raw(m.as_matrix(), n)))
}

pub(crate) fn reshuffle_raw(m: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::<Complex64>::zeros(n * n, n * n);
    for a in 0..n {
        for mu in 0..n {
            for b in 0..n {
                for nu in 0..n {
                    out[(a * n + b, mu * n + nu)] = m[(a * n + mu, b * n + nu)];
                }
            }
        }
    }
    out
}

/// Row-major vectorization.
pub fn vectorize(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    let (r, c) = m.shape();
    DVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

/// Inverse of [`vectorize`] for a square `n × n` matrix.
pub fn unvectorize(v: &DVector<Complex64>, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

/// Eigenvalues in descending order; the input is symmetrized first.
pub fn spectrum(a: &HermitianOperator) -> Result<Spectrum> {
    let eig = a
        .symmetrized()
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNonConvergence)?;
    Spectrum::new(eig.eigenvalues.iter().copied().collect())
}

/// Hilbert–Schmidt product `Tr(a† b)`; the imaginary residue is dropped.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let (x, y) = (a.as_matrix(), b.as_matrix());
    let z: Complex64 = x.iter().zip(y.iter()).map(|(p, q)| p.conj() * q).sum();
    Ok(z.re)
}

/// Shannon entropy (natural log) of a probability-like vector, `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Von Neumann entropy `-Tr ρ ln ρ`; eigenvalues in `[-1e-9, 0)` are clamped.
pub fn von_neumann_entropy(a: &HermitianOperator) -> Result<f64> {
    let spec = spectrum(a)?;
    let min = *spec.values().last().expect("non-empty");
    if min < -SPECTRAL_TOL {
        return Err(Error::NegativeEigenvalue(min));
    }
    Ok(shannon_entropy(spec.values()))
}

/// Trace norm `‖a‖₁ = Σ|λᵢ|`.
pub fn trace_norm(a: &HermitianOperator) -> Result<f64> {
    Ok(spectrum(a)?.values().iter().map(|x| x.abs()).sum())
}

/// Hilbert–Schmidt (Frobenius) norm of `a - b`.
pub fn hs_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Difference of two operators of equal dimension.
pub fn difference(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    HermitianOperator::with_tol(
        ComplexMatrix(a.as_matrix() - b.as_matrix()),
        a.herm_tol.max(b.herm_tol) * 2.0,
    )
}

/// `|+⟩ = (|0⟩ + |1⟩)/√2` style uniform superposition in dimension `n`.
pub fn uniform_superposition(n: usize) -> DVector<Complex64> {
    DVector::from_element(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0))
}

/// Maximally entangled vector `|ψ⁺⟩ = Σ|ii⟩/√n` on `H_n ⊗ H_n`.
pub fn max_entangled(n: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(n * n);
    let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    for i in 0..n {
        v[i * n + i] = amp;
    }
    v
}

/// Swap operator on `H_n ⊗ H_n`.
pub fn swap_operator(n: usize) -> ComplexMatrix {
    let mut m = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            m[(j * n + i, i * n + j)] = Complex64::new(1.0, 0.0);
        }
    }
    ComplexMatrix(m)
}

/// The 2×2 Hadamard gate.
pub fn hadamard() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real(2, 2, &[s, s, s, -s]).expect("finite")
}
