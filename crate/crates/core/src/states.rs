//! State spaces of the classical, quantum and extended theories, and the
//! effects dual to them.
//!
//! A theory of order `m` over `N` levels lives on `H_N ⊗ H_{N^m}`. Its states
//! are density matrices whose spectrum is majorized by the generator
//! `(N^-m, …, N^-m, 0, …, 0)` with `N^m` non-zero entries; order 0 is standard
//! quantum theory. All membership tests look at spectra only, which is enough
//! because every set involved is unitarily invariant.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::convex::{dual_contains_tol, majorization_slack, perm_contains_tol, PermPolytope};
use crate::error::{Error, Result};
use crate::hermitian::{
    hs_inner, partial_trace, spectrum, tensor_product, von_neumann_entropy, ComplexMatrix,
    HermitianOperator, Spectrum, SubsystemShape,
};
use crate::random::{complex_gaussian, dirichlet, haar_unitary, rng_from_seed};
use crate::SPECTRAL_TOL;

/// Tolerance on unit norms, unitarity and orthonormality of inputs.
pub const INPUT_TOL: f64 = 1e-10;
/// Upper bound on the number of unitary conjugates mixed by the sampler.
pub const MAX_MIXTURE: usize = 16;

/// Number of levels `N` and ancilla order `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TheoryOrder {
    n: usize,
    m: usize,
}

impl TheoryOrder {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("N must be positive".into()));
        }
        Ok(TheoryOrder { n, m })
    }

    /// Standard quantum theory, `m = 0`.
    pub fn quantum(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    /// The quartic theory, `m = 1`.
    pub fn quartic(n: usize) -> Result<Self> {
        Self::new(n, 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ancilla_dim(&self) -> usize {
        self.n.pow(self.m as u32)
    }

    /// Total Hilbert-space dimension `N^(m+1)`.
    pub fn dim(&self) -> usize {
        self.n * self.ancilla_dim()
    }

    /// Number of real parameters `K = N^(2m+2)`.
    pub fn parameter_count(&self) -> usize {
        self.dim() * self.dim()
    }

    /// Real dimension `2(N^(m+2) − N²)` of the manifold of extremal states.
    pub fn pure_manifold_dimension(&self) -> usize {
        2 * (self.n.pow(self.m as u32 + 2) - self.n * self.n)
    }

    /// `(N^-m × N^m, 0 × N^m(N−1))`.
    pub fn generator(&self) -> Spectrum {
        let k = self.ancilla_dim();
        let mut v = vec![1.0 / k as f64; k];
        v.resize(self.dim(), 0.0);
        Spectrum::new(v).expect("finite generator")
    }

    pub fn permutohedron(&self) -> PermPolytope {
        PermPolytope::new(vec![self.generator()]).expect("single generator")
    }

    /// Principal factor followed by the ancilla.
    pub fn shape(&self) -> SubsystemShape {
        SubsystemShape::bipartite(self.n, self.ancilla_dim()).expect("positive dims")
    }

    /// `|0⟩⟨0| ⊗ I/N^m`.
    pub fn anchor_state(&self) -> HermitianOperator {
        tensor_product(
            &HermitianOperator::basis_projector(self.n, 0),
            &HermitianOperator::maximally_mixed(self.ancilla_dim()),
        )
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found });
        }
        Ok(())
    }
}

/// `ρ ≥ 0` with `Tr ρ = 1` (or `≤ 1` when subnormalized).
pub fn is_quantum_state(a: &HermitianOperator, subnormalized: bool) -> bool {
    is_quantum_state_tol(a, subnormalized, SPECTRAL_TOL)
}

pub fn is_quantum_state_tol(a: &HermitianOperator, subnormalized: bool, tol: f64) -> bool {
    match spectrum(a) {
        Ok(s) => quantum_spectrum_ok(&s, a.trace(), subnormalized, tol),
        Err(_) => false,
    }
}

fn quantum_spectrum_ok(s: &Spectrum, trace: f64, subnormalized: bool, tol: f64) -> bool {
    let min = *s.values().last().expect("non-empty");
    let trace_ok = if subnormalized { trace <= 1.0 + tol } else { (trace - 1.0).abs() <= tol };
    min >= -tol && trace_ok
}

/// Standard effect: `0 ≤ E ≤ I`.
pub fn is_povm_element(e: &HermitianOperator) -> bool {
    match spectrum(e) {
        Ok(s) => s.values()[0] <= 1.0 + SPECTRAL_TOL && *s.values().last().unwrap() >= -SPECTRAL_TOL,
        Err(_) => false,
    }
}

pub fn is_extended_state(
    a: &HermitianOperator,
    order: &TheoryOrder,
    subnormalized: bool,
) -> Result<bool> {
    is_extended_state_tol(a, order, subnormalized, SPECTRAL_TOL)
}

pub fn is_extended_state_tol(
    a: &HermitianOperator,
    order: &TheoryOrder,
    subnormalized: bool,
    tol: f64,
) -> Result<bool> {
    order.check_dim(a.dim())?;
    let s = match spectrum(a) {
        Ok(s) => s,
        Err(_) => return Ok(false),
    };
    Ok(quantum_spectrum_ok(&s, a.trace(), subnormalized, tol)
        && perm_contains_tol(&order.permutohedron(), &s, subnormalized, tol)?)
}

/// Membership verdict together with the numbers that justify it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateCertificate {
    pub is_quantum_state: bool,
    pub is_extended_state: bool,
    pub trace: f64,
    pub min_eigenvalue: f64,
    /// Smallest gap between partial sums of the generator and of the spectrum;
    /// negative means the spectrum leaves the permutohedron.
    pub majorization_slack: f64,
    pub spectrum: Spectrum,
}

pub fn certify_state(
    a: &HermitianOperator,
    order: &TheoryOrder,
    subnormalized: bool,
) -> Result<StateCertificate> {
    order.check_dim(a.dim())?;
    let s = spectrum(a)?;
    let trace = a.trace();
    let is_q = quantum_spectrum_ok(&s, trace, subnormalized, SPECTRAL_TOL);
    let in_perm = perm_contains_tol(&order.permutohedron(), &s, subnormalized, SPECTRAL_TOL)?;
    Ok(StateCertificate {
        is_quantum_state: is_q,
        is_extended_state: is_q && in_perm,
        trace,
        min_eigenvalue: *s.values().last().unwrap(),
        majorization_slack: majorization_slack(&s, &order.generator())?,
        spectrum: s,
    })
}

/// A (sub)normalized state of the order-`m` theory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExtendedStateRepr", into = "ExtendedStateRepr")]
pub struct ExtendedState {
    operator: HermitianOperator,
    order: TheoryOrder,
    normalized: bool,
}

/// Wire form `{"n", "m", "normalized", "operator"}`, unvalidated.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtendedStateRepr {
    pub n: usize,
    pub m: usize,
    pub normalized: bool,
    pub operator: HermitianOperator,
}

impl TryFrom<ExtendedStateRepr> for ExtendedState {
    type Error = Error;

    fn try_from(r: ExtendedStateRepr) -> Result<Self> {
        ExtendedState::new(r.operator, TheoryOrder::new(r.n, r.m)?, r.normalized)
    }
}

impl From<ExtendedState> for ExtendedStateRepr {
    fn from(s: ExtendedState) -> Self {
        ExtendedStateRepr {
            n: s.order.n,
            m: s.order.m,
            normalized: s.normalized,
            operator: s.operator,
        }
    }
}

impl ExtendedState {
    pub fn new(operator: HermitianOperator, order: TheoryOrder, normalized: bool) -> Result<Self> {
        if !is_extended_state(&operator, &order, !normalized)? {
            return Err(Error::InvalidState(format!(
                "operator is not an extended state of order (N={}, m={})",
                order.n, order.m
            )));
        }
        Ok(ExtendedState { operator, order, normalized })
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn order(&self) -> TheoryOrder {
        self.order
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

/// `ρ ↦ ρ ⊗ I/N^m`.
pub fn extend_product(rho: &HermitianOperator, order: &TheoryOrder) -> Result<ExtendedState> {
    if rho.dim() != order.n {
        return Err(Error::DimensionMismatch { expected: order.n, found: rho.dim() });
    }
    if !is_quantum_state(rho, false) {
        return Err(Error::InvalidState("input is not a normalized density matrix".into()));
    }
    let sigma = tensor_product(rho, &HermitianOperator::maximally_mixed(order.ancilla_dim()));
    ExtendedState::new(sigma, *order, true)
}

/// Partial trace over the ancilla.
pub fn reduce_state(sigma: &ExtendedState) -> HermitianOperator {
    reduce_operator(&sigma.operator, &sigma.order).expect("dimension checked at construction")
}

pub(crate) fn reduce_operator(a: &HermitianOperator, order: &TheoryOrder) -> Result<HermitianOperator> {
    order.check_dim(a.dim())?;
    if order.ancilla_dim() == 1 {
        return Ok(a.clone());
    }
    partial_trace(a, &order.shape(), &[0])
}

/// Extremal state `U(|φ⟩⟨φ| ⊗ I/N^m)U†`.
pub fn extended_pure(
    phi: &DVector<Complex64>,
    u: &ComplexMatrix,
    order: &TheoryOrder,
) -> Result<ExtendedState> {
    if phi.len() != order.n {
        return Err(Error::DimensionMismatch { expected: order.n, found: phi.len() });
    }
    let norm = phi.norm();
    if (norm - 1.0).abs() > INPUT_TOL {
        return Err(Error::NotNormalized(norm));
    }
    order.check_dim(u.nrows())?;
    let defect = u.unitarity_defect();
    if u.ncols() != u.nrows() || defect > INPUT_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let base = tensor_product(
        &HermitianOperator::projector(phi),
        &HermitianOperator::maximally_mixed(order.ancilla_dim()),
    );
    ExtendedState::new(base.conjugate_by(u.as_matrix())?, *order, true)
}

/// `S(σ) − m ln N`, which vanishes on extremal states.
pub fn gauged_entropy(sigma: &ExtendedState) -> Result<f64> {
    if !sigma.normalized {
        return Err(Error::Subnormalized);
    }
    Ok(von_neumann_entropy(&sigma.operator)? - sigma.order.m as f64 * (sigma.order.n as f64).ln())
}

fn orthonormality_defect(basis: &DMatrix<Complex64>) -> f64 {
    let g = basis.adjoint() * basis;
    crate::hermitian::max_abs_diff(&g, &DMatrix::identity(basis.ncols(), basis.ncols()))
}

/// `σᵢ = |bᵢ⟩⟨bᵢ| ⊗ I/N^m` for the columns `bᵢ` of `basis`.
pub fn distinguishable_family(
    basis: &ComplexMatrix,
    order: &TheoryOrder,
) -> Result<Vec<ExtendedState>> {
    if basis.nrows() != order.n || basis.ncols() != order.n {
        return Err(Error::DimensionMismatch { expected: order.n, found: basis.nrows() });
    }
    let defect = orthonormality_defect(basis.as_matrix());
    if defect > INPUT_TOL {
        return Err(Error::NotOrthonormal(defect));
    }
    let ancilla = HermitianOperator::maximally_mixed(order.ancilla_dim());
    (0..order.n)
        .map(|i| {
            let b = basis.column(i).into_owned();
            ExtendedState::new(
                tensor_product(&HermitianOperator::projector(&b), &ancilla),
                *order,
                true,
            )
        })
        .collect()
}

/// Spectral dual-cone test for an effect of the order-`m` theory together
/// with `E ≤ I`. Negative-trace operators are rejected; a traceless one must vanish.
pub fn is_xpovm_element(e: &HermitianOperator, order: &TheoryOrder) -> Result<bool> {
    is_xpovm_element_tol(e, order, SPECTRAL_TOL)
}

pub fn is_xpovm_element_tol(e: &HermitianOperator, order: &TheoryOrder, tol: f64) -> Result<bool> {
    order.check_dim(e.dim())?;
    let s = match spectrum(e) {
        Ok(s) => s,
        Err(_) => return Ok(false),
    };
    if s.values()[0] > 1.0 + tol {
        return Ok(false);
    }
    let trace = s.sum();
    if trace < -tol {
        return Ok(false);
    }
    if trace.abs() <= tol {
        return Ok(s.values().iter().all(|x| x.abs() <= tol));
    }
    let normalized = Spectrum::new(s.values().iter().map(|x| x / trace).collect())?;
    Ok(dual_contains_tol(&order.permutohedron(), &normalized, tol)?.contained)
}

/// An effect of an extended POVM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XPovmElement {
    operator: HermitianOperator,
    order: TheoryOrder,
}

impl XPovmElement {
    pub fn new(operator: HermitianOperator, order: TheoryOrder) -> Result<Self> {
        if !is_xpovm_element(&operator, &order)? {
            return Err(Error::InvalidEffect("spectrum outside the dual set or E > I".into()));
        }
        Ok(XPovmElement { operator, order })
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn order(&self) -> TheoryOrder {
        self.order
    }
}

/// `p = Tr σE`, clamped to `[0, 1]` after checking it is not below `−1e-9`.
pub fn xpovm_probability(sigma: &ExtendedState, e: &XPovmElement) -> Result<f64> {
    if sigma.order != e.order {
        return Err(Error::DimensionMismatch { expected: sigma.order.dim(), found: e.order.dim() });
    }
    let p = hs_inner(&sigma.operator, &e.operator)?;
    if p < -SPECTRAL_TOL {
        return Err(Error::DualityViolation(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Mixture `Σ wᵢ Uᵢ σ₀ Uᵢ†` of `k` Haar conjugates of the anchor state.
pub fn sample_extended_state_with<R: Rng + ?Sized>(
    order: &TheoryOrder,
    k: usize,
    rng: &mut R,
) -> ExtendedState {
    let d = order.dim();
    let anchor = order.anchor_state();
    let weights = dirichlet(k.max(1), rng);
    let mut acc = DMatrix::<Complex64>::zeros(d, d);
    for w in weights {
        let u = haar_unitary(d, rng);
        acc += (&u * anchor.as_matrix() * u.adjoint()) * Complex64::new(w, 0.0);
    }
    let acc = (&acc + acc.adjoint()) * Complex64::new(0.5, 0.0);
    ExtendedState::new(HermitianOperator::from_matrix(acc).expect("Hermitian"), *order, true)
        .expect("mixtures of conjugated anchor states are extended states")
}

/// Number of conjugates the sampler may mix for this order.
pub fn mixture_cap(order: &TheoryOrder) -> usize {
    (order.dim() * order.dim()).min(MAX_MIXTURE)
}

/// Seeded sample with `k` drawn uniformly from `1..=mixture_cap(order)`.
pub fn sample_extended_state(order: &TheoryOrder, seed: u64) -> ExtendedState {
    let mut rng = rng_from_seed(seed);
    let k = rng.random_range(1..=mixture_cap(order));
    sample_extended_state_with(order, k, &mut rng)
}

/// Seeded sample mixing exactly `k` conjugates (`k = 1` gives an extremal state).
pub fn sample_extended_state_k(order: &TheoryOrder, k: usize, seed: u64) -> ExtendedState {
    sample_extended_state_with(order, k, &mut rng_from_seed(seed))
}

/// Random effect: a spectrum drawn around the uniform point and pulled
/// inside the dual set, scaled so that `E ≤ I`, in a Haar-random eigenbasis.
pub fn sample_xpovm_element_with<R: Rng + ?Sized>(order: &TheoryOrder, rng: &mut R) -> XPovmElement {
    let d = order.dim();
    let poly = order.permutohedron();
    let mut dir: Vec<f64> = (0..d).map(|_| complex_gaussian(rng).re).collect();
    let mean = dir.iter().sum::<f64>() / d as f64;
    dir.iter_mut().for_each(|x| *x -= mean);
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut step = 2.0 * rng.random::<f64>();
    let q = loop {
        let q: Vec<f64> = dir.iter().map(|x| 1.0 / d as f64 + step * x / norm).collect();
        let s = Spectrum::new(q.clone()).expect("finite");
        if dual_contains_tol(&poly, &s, 0.0).expect("matching dims").contained {
            break q;
        }
        step *= 0.5;
    };
    let max = q.iter().copied().fold(f64::MIN, f64::max);
    let scale = rng.random_range(f64::EPSILON..=1.0) / max;
    let diag: Vec<f64> = q.iter().map(|x| x * scale).collect();
    let u = haar_unitary(d, rng);
    let op = HermitianOperator::diagonal(&diag).conjugate_by(&u).expect("matching dims");
    XPovmElement::new(op, *order).expect("sampled spectrum lies in the dual set")
}

pub fn sample_xpovm_element(order: &TheoryOrder, seed: u64) -> XPovmElement {
    sample_xpovm_element_with(order, &mut rng_from_seed(seed))
}
