//! Quantum operations in Kraus, superoperator and Choi form.
//!
//! Index conventions: matrices are vectorized row-major, the superoperator is
//! `Φ = Σ X ⊗ X̄` acting on `vec(ρ)`, and the Choi matrix is `D = Φ^R`, so
//! `D = Σ vec(X) vec(X)†`. The first tensor factor of `D` is the output
//! system A and the second the input system B; trace preservation reads
//! `Tr_A D = I`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{
    isqrt_exact, max_abs_diff, partial_trace, reshuffle_raw, unvectorize, vectorize, ComplexMatrix,
    HermitianOperator, SubsystemShape,
};
use crate::random::{dirichlet, haar_unitary, rng_from_seed};
use crate::states::is_quantum_state;
use crate::SPECTRAL_TOL;

/// Choi eigenvalues below this are dropped when extracting Kraus operators.
pub const KRAUS_CUTOFF: f64 = 1e-10;
/// Probabilities below this make [`measurement_update`] refuse to normalize.
pub const IMPOSSIBLE_OUTCOME: f64 = 1e-12;
/// Tolerance on orthonormality of coarse-graining bases.
pub const BASIS_TOL: f64 = 1e-10;

/// Non-empty family of `N × N` operators with `Σ X†X ≤ I`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators.first().ok_or(Error::EmptyKraus)?;
        let n = first.nrows();
        for x in &operators {
            if x.nrows() != x.ncols() {
                return Err(Error::NotSquare { rows: x.nrows(), cols: x.ncols() });
            }
            if x.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: x.nrows() });
            }
        }
        let set = KrausSet { operators };
        let excess = set.completeness()?.max_eigenvalue()?;
        if excess > 1.0 + SPECTRAL_TOL {
            return Err(Error::KrausInequality(excess));
        }
        Ok(set)
    }

    /// The unitary channel `ρ ↦ UρU†`.
    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        let defect = u.unitarity_defect();
        if u.nrows() != u.ncols() || defect > BASIS_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Self::new(vec![u.clone()])
    }

    pub fn identity(n: usize) -> Self {
        KrausSet { operators: vec![ComplexMatrix::identity(n)] }
    }

    /// Projective measurement in the computational basis.
    pub fn dephasing(n: usize) -> Self {
        let operators = (0..n)
            .map(|i| {
                let mut m = DMatrix::zeros(n, n);
                m[(i, i)] = Complex64::new(1.0, 0.0);
                ComplexMatrix::from_matrix(m).expect("finite")
            })
            .collect();
        KrausSet { operators }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    /// `Σ X†X`.
    pub fn completeness(&self) -> Result<HermitianOperator> {
        let n = self.dim();
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for x in &self.operators {
            acc += x.adjoint().as_matrix() * x.as_matrix();
        }
        HermitianOperator::from_matrix(acc)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `Σ XᵢρXᵢ†`.
pub fn kraus_apply(k: &KrausSet, rho: &HermitianOperator) -> Result<HermitianOperator> {
    check_dim(k.dim(), rho.dim())?;
    let mut acc = DMatrix::<Complex64>::zeros(k.dim(), k.dim());
    for x in k.operators() {
        acc += x.as_matrix() * rho.as_matrix() * x.as_matrix().adjoint();
    }
    HermitianOperator::from_matrix((&acc + acc.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Outcome probability `Tr XᵢρXᵢ†` and the normalized post-measurement state.
pub fn measurement_update(
    k: &KrausSet,
    i: usize,
    rho: &HermitianOperator,
) -> Result<(f64, HermitianOperator)> {
    check_dim(k.dim(), rho.dim())?;
    let x = k
        .operators()
        .get(i)
        .ok_or(Error::IndexOutOfRange { index: i, len: k.len() })?
        .as_matrix();
    let out = x * rho.as_matrix() * x.adjoint();
    let prob = out.trace().re;
    if prob < IMPOSSIBLE_OUTCOME {
        return Err(Error::ImpossibleOutcome(prob));
    }
    let out = (&out + out.adjoint()) * Complex64::new(0.5 / prob, 0.0);
    Ok((prob, HermitianOperator::from_matrix(out)?))
}

/// Flags of the map taxonomy; independent booleans rather than one label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapClassification {
    pub cp: bool,
    pub trace_preserving: bool,
    pub trace_nonincreasing: bool,
    pub unital: bool,
    pub bistochastic: bool,
}

/// Linear map on `N × N` matrices with its superoperator and Choi matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub struct QuantumMap {
    n: usize,
    superop: ComplexMatrix,
    choi: HermitianOperator,
    kraus: Option<KrausSet>,
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    n: usize,
    choi: HermitianOperator,
}

impl TryFrom<MapRepr> for QuantumMap {
    type Error = Error;

    fn try_from(r: MapRepr) -> Result<Self> {
        check_dim(r.n * r.n, r.choi.dim())?;
        QuantumMap::from_choi(r.choi)
    }
}

impl From<QuantumMap> for MapRepr {
    fn from(m: QuantumMap) -> Self {
        MapRepr { n: m.n, choi: m.choi }
    }
}

impl QuantumMap {
    /// `Φ = Σ Xᵢ ⊗ X̄ᵢ`, `D = Φ^R`.
    pub fn from_kraus(k: &KrausSet) -> Self {
        let n = k.dim();
        let mut superop = DMatrix::<Complex64>::zeros(n * n, n * n);
        for x in k.operators() {
            superop += x.as_matrix().kronecker(&x.as_matrix().map(|z| z.conj()));
        }
        let choi = reshuffle_raw(&superop, n);
        QuantumMap {
            n,
            superop: ComplexMatrix::from_matrix(superop).expect("finite"),
            choi: HermitianOperator::from_matrix(choi).expect("Choi matrix of a Kraus form is Hermitian"),
            kraus: Some(k.clone()),
        }
    }

    /// Any Hermitian Choi matrix; canonical Kraus operators are attached when it is PSD.
    pub fn from_choi(choi: HermitianOperator) -> Result<Self> {
        let n = isqrt_exact(choi.dim()).ok_or(Error::NotPerfectSquare(choi.dim()))?;
        let superop = ComplexMatrix::from_matrix(reshuffle_raw(choi.as_matrix(), n))?;
        let kraus = canonical_kraus(&choi, n)?;
        Ok(QuantumMap { n, superop, choi, kraus })
    }

    /// Superoperator whose reshuffle is Hermitian.
    pub fn from_superop(superop: ComplexMatrix) -> Result<Self> {
        let (rows, cols) = superop.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let n = isqrt_exact(rows).ok_or(Error::NotPerfectSquare(rows))?;
        let choi = HermitianOperator::from_matrix(reshuffle_raw(superop.as_matrix(), n))
            .map_err(|e| Error::InvalidMap(format!("reshuffled superoperator: {e}")))?;
        let kraus = canonical_kraus(&choi, n)?;
        Ok(QuantumMap { n, superop, choi, kraus })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_kraus(&KrausSet::identity(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn superop(&self) -> &ComplexMatrix {
        &self.superop
    }

    pub fn choi(&self) -> &HermitianOperator {
        &self.choi
    }

    pub fn kraus(&self) -> Option<&KrausSet> {
        self.kraus.as_ref()
    }

    fn shape(&self) -> SubsystemShape {
        SubsystemShape::bipartite(self.n, self.n).expect("positive")
    }

    /// `vec(Φ(ρ)) = Φ vec(ρ)`.
    pub fn apply(&self, rho: &HermitianOperator) -> Result<HermitianOperator> {
        check_dim(self.n, rho.dim())?;
        let out = unvectorize(&(self.superop.as_matrix() * vectorize(rho.as_matrix())), self.n);
        HermitianOperator::from_matrix((&out + out.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// `Φ ∘ other`.
    pub fn compose(&self, other: &QuantumMap) -> Result<QuantumMap> {
        check_dim(self.n, other.n)?;
        if let (Some(a), Some(b)) = (&self.kraus, &other.kraus) {
            let mut ops = Vec::with_capacity(a.len() * b.len());
            for x in a.operators() {
                for y in b.operators() {
                    ops.push(ComplexMatrix::from_matrix(x.as_matrix() * y.as_matrix())?);
                }
            }
            return Ok(QuantumMap::from_kraus(&KrausSet { operators: ops }));
        }
        QuantumMap::from_superop(ComplexMatrix::from_matrix(
            self.superop.as_matrix() * other.superop.as_matrix(),
        )?)
    }

    /// `Tr_A D`, the operator `Σ X†X` on the input.
    pub fn output_trace(&self) -> HermitianOperator {
        partial_trace(&self.choi, &self.shape(), &[1]).expect("bipartite")
    }

    /// `Tr_B D`, the operator `Σ XX†` on the output.
    pub fn input_trace(&self) -> HermitianOperator {
        partial_trace(&self.choi, &self.shape(), &[0]).expect("bipartite")
    }
}

fn canonical_kraus(choi: &HermitianOperator, n: usize) -> Result<Option<KrausSet>> {
    let (values, vectors) = choi.eigh()?;
    if *values.last().expect("non-empty") < -SPECTRAL_TOL {
        return Ok(None);
    }
    let mut ops: Vec<ComplexMatrix> = values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > KRAUS_CUTOFF)
        .map(|(i, &l)| {
            let v: DVector<Complex64> = vectors.column(i) * Complex64::new(l.sqrt(), 0.0);
            ComplexMatrix::from_matrix(unvectorize(&v, n)).expect("finite")
        })
        .collect();
    if ops.is_empty() {
        ops.push(ComplexMatrix::zeros(n, n));
    }
    Ok(Some(KrausSet { operators: ops }))
}

fn is_identity(a: &HermitianOperator, tol: f64) -> bool {
    max_abs_diff(a.as_matrix(), &DMatrix::identity(a.dim(), a.dim())) <= tol
}

pub fn classify(map: &QuantumMap) -> MapClassification {
    let cp = map.choi.min_eigenvalue().is_ok_and(|l| l >= -SPECTRAL_TOL);
    let out = map.output_trace();
    let trace_preserving = is_identity(&out, SPECTRAL_TOL);
    let trace_nonincreasing = out.max_eigenvalue().is_ok_and(|l| l <= 1.0 + SPECTRAL_TOL);
    let unital = is_identity(&map.input_trace(), SPECTRAL_TOL);
    MapClassification {
        cp,
        trace_preserving,
        trace_nonincreasing,
        unital,
        bistochastic: cp && trace_preserving && unital,
    }
}

/// Rescaled Choi matrix `σ = D/N`.
pub fn jamiolkowski_state(map: &QuantumMap) -> HermitianOperator {
    map.choi.scaled(1.0 / map.n as f64)
}

/// The map with Choi matrix `Nσ`.
pub fn map_from_state(sigma: &HermitianOperator) -> Result<QuantumMap> {
    let n = isqrt_exact(sigma.dim()).ok_or(Error::NotPerfectSquare(sigma.dim()))?;
    QuantumMap::from_choi(sigma.scaled(n as f64))
}

/// Complete contraction `ω ↦ ρ Tr ω`, Choi matrix `ρ ⊗ I`.
pub fn contraction_map(rho: &HermitianOperator) -> Result<QuantumMap> {
    if !is_quantum_state(rho, false) {
        return Err(Error::InvalidState("contraction target is not a density matrix".into()));
    }
    let n = rho.dim();
    let mut ops = Vec::with_capacity(n * n);
    let (values, vectors) = rho.eigh()?;
    for (i, &l) in values.iter().enumerate() {
        if l <= KRAUS_CUTOFF {
            continue;
        }
        let v = vectors.column(i) * Complex64::new(l.sqrt(), 0.0);
        for j in 0..n {
            let mut x = DMatrix::<Complex64>::zeros(n, n);
            x.set_column(j, &v);
            ops.push(ComplexMatrix::from_matrix(x)?);
        }
    }
    let choi = crate::hermitian::tensor_product(rho, &HermitianOperator::identity(n));
    let superop = ComplexMatrix::from_matrix(reshuffle_raw(choi.as_matrix(), n))?;
    Ok(QuantumMap { n, superop, choi, kraus: Some(KrausSet { operators: ops }) })
}

/// `Φ(I/N)`, through the superoperator.
pub fn map_effect(map: &QuantumMap) -> HermitianOperator {
    map.apply(&HermitianOperator::maximally_mixed(map.n)).expect("matching dimension")
}

/// `Tr_B σ` of the Jamiołkowski state; agrees with [`map_effect`].
pub fn map_effect_from_state(map: &QuantumMap) -> HermitianOperator {
    map.input_trace().scaled(1.0 / map.n as f64)
}

fn check_basis(basis: &ComplexMatrix, n: usize) -> Result<()> {
    check_dim(n, basis.nrows())?;
    check_dim(n, basis.ncols())?;
    let defect = basis.unitarity_defect();
    if defect > BASIS_TOL {
        return Err(Error::NotOrthonormal(defect));
    }
    Ok(())
}

/// `pᵢ = ⟨hᵢ|ρ|hᵢ⟩` for the columns `hᵢ` of `basis`.
pub fn coarse_grain(rho: &HermitianOperator, basis: &ComplexMatrix) -> Result<Vec<f64>> {
    check_basis(basis, rho.dim())?;
    let rotated = basis.adjoint().as_matrix() * rho.as_matrix() * basis.as_matrix();
    Ok((0..rho.dim()).map(|i| rotated[(i, i)].re).collect())
}

/// Classical transition matrix `T[m][n] = D[(m,n),(m,n)]`, acting as `p' = T p`.
pub fn classical_reduction(map: &QuantumMap) -> DMatrix<f64> {
    let n = map.n;
    DMatrix::from_fn(n, n, |m, k| map.choi.as_matrix()[(m * n + k, m * n + k)].re)
}

/// Diagonal of a matrix as a real vector.
pub fn diagonal(rho: &HermitianOperator) -> Vec<f64> {
    rho.as_matrix().diagonal().iter().map(|z| z.re).collect()
}

/// Stinespring sample: Haar `U` on `H_N ⊗ H_E` with `E = N`, Kraus
/// operators `X_e[i][j] = ⟨i,e|U|j,0⟩`.
pub fn random_cptp_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> QuantumMap {
    let u = haar_unitary(n * n, rng);
    let ops = (0..n)
        .map(|e| {
            ComplexMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| u[(i * n + e, j * n)]))
                .expect("finite")
        })
        .collect();
    QuantumMap::from_kraus(&KrausSet { operators: ops })
}

pub fn random_cptp(n: usize, seed: u64) -> QuantumMap {
    random_cptp_with(n, &mut rng_from_seed(seed))
}

/// Dirichlet mixture of between 1 and `N²` Haar unitary channels.
pub fn random_bistochastic_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> QuantumMap {
    let k = rng.random_range(1..=n * n);
    let ops = dirichlet(k, rng)
        .into_iter()
        .map(|w| {
            ComplexMatrix::from_matrix(haar_unitary(n, rng) * Complex64::new(w.sqrt(), 0.0))
                .expect("finite")
        })
        .collect();
    QuantumMap::from_kraus(&KrausSet { operators: ops })
}

pub fn random_bistochastic(n: usize, seed: u64) -> QuantumMap {
    random_bistochastic_with(n, &mut rng_from_seed(seed))
}

/// Largest `|Σ_m T[m][n] − 1|` over columns.
pub fn column_stochastic_defect(t: &DMatrix<f64>) -> f64 {
    t.column_iter().map(|c| (c.sum() - 1.0).abs()).fold(0.0, f64::max)
}

/// Largest `|Σ_n T[m][n] − 1|` over rows.
pub fn row_stochastic_defect(t: &DMatrix<f64>) -> f64 {
    t.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
}

/// Largest entrywise disagreement between the Choi, superoperator and Kraus forms.
pub fn representation_defect(map: &QuantumMap) -> f64 {
    let mut worst = max_abs_diff(&reshuffle_raw(map.superop.as_matrix(), map.n), map.choi.as_matrix());
    if let Some(k) = &map.kraus {
        worst = worst.max(max_abs_diff(QuantumMap::from_kraus(k).superop.as_matrix(), map.superop.as_matrix()));
    }
    worst
}
