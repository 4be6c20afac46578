//! Supermaps: linear maps on extended states of the quartic theory.
//!
//! A supermap `Γ` acts on `vec(σ)` for `σ` on `H_A ⊗ H_A'` and is stored as
//! an `N⁴ × N⁴` matrix together with its dynamical matrix `G = Γ^R`, whose
//! factors are ordered `(A, A', B, B')`: output pair first, input pair second.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::majorized_by_tol;
use crate::error::{Error, Result};
use crate::hermitian::{
    difference, isqrt_exact, max_abs_diff, partial_trace, partial_trace_matrix, reshuffle_raw,
    spectrum, swap_operator, tensor_product, trace_norm, unvectorize, vectorize, ComplexMatrix,
    HermitianOperator, Spectrum, SubsystemShape,
};
use crate::maps::{classify, diagonal, QuantumMap};
use crate::random::{derive_seed, dirichlet, haar_unitary, rng_from_seed};
use crate::states::{is_extended_state, is_quantum_state, reduce_operator, sample_extended_state, ExtendedState, TheoryOrder};
use crate::SPECTRAL_TOL;

/// Tolerance of the majorization checks in the decoherence verifiers.
pub const MAJORIZATION_TOL: f64 = 1e-10;
/// Default number of sampled states in [`check_admissible`].
pub const DEFAULT_ADMISSIBILITY_SAMPLES: usize = 1000;

/// Linear map on operators of `H_N ⊗ H_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SuperMapRepr", into = "SuperMapRepr")]
pub struct SuperMap {
    n: usize,
    matrix: ComplexMatrix,
    choi_g: HermitianOperator,
}

#[derive(Serialize, Deserialize)]
struct SuperMapRepr {
    n: usize,
    choi_g: HermitianOperator,
}

impl TryFrom<SuperMapRepr> for SuperMap {
    type Error = Error;

    fn try_from(r: SuperMapRepr) -> Result<Self> {
        SuperMap::from_choi_g(r.n, r.choi_g)
    }
}

impl From<SuperMap> for SuperMapRepr {
    fn from(g: SuperMap) -> Self {
        SuperMapRepr { n: g.n, choi_g: g.choi_g }
    }
}

fn block(n: usize) -> usize {
    n * n
}

impl SuperMap {
    /// From the `N⁴ × N⁴` matrix acting on row-major `vec(σ)`.
    pub fn from_matrix(n: usize, matrix: ComplexMatrix) -> Result<Self> {
        let d = block(n);
        if matrix.nrows() != d * d || matrix.ncols() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: matrix.nrows() });
        }
        let choi_g = HermitianOperator::from_matrix(reshuffle_raw(matrix.as_matrix(), d))
            .map_err(|e| Error::InvalidMap(format!("dynamical matrix: {e}")))?;
        Ok(SuperMap { n, matrix, choi_g })
    }

    pub fn from_choi_g(n: usize, choi_g: HermitianOperator) -> Result<Self> {
        let d = block(n);
        if choi_g.dim() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: choi_g.dim() });
        }
        let matrix = ComplexMatrix::from_matrix(reshuffle_raw(choi_g.as_matrix(), d))?;
        Ok(SuperMap { n, matrix, choi_g })
    }

    pub fn identity(n: usize) -> Self {
        let d = block(n);
        Self::from_matrix(n, ComplexMatrix::identity(d * d)).expect("identity")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn choi_g(&self) -> &HermitianOperator {
        &self.choi_g
    }

    fn shape(&self) -> SubsystemShape {
        SubsystemShape::new(vec![self.n; 4]).expect("positive")
    }

    /// `G ≥ 0`.
    pub fn is_cp(&self) -> bool {
        self.choi_g.min_eigenvalue().is_ok_and(|l| l >= -SPECTRAL_TOL)
    }

    /// `Tr_{AA'} G = I`.
    pub fn is_trace_preserving(&self) -> bool {
        let m = partial_trace_matrix(self.choi_g.as_matrix(), &self.shape(), &[2, 3]).expect("four factors");
        max_abs_diff(&m, &DMatrix::identity(m.nrows(), m.nrows())) <= SPECTRAL_TOL
    }

    /// `Tr_{BB'} G = I`.
    pub fn is_unital(&self) -> bool {
        let m = partial_trace_matrix(self.choi_g.as_matrix(), &self.shape(), &[0, 1]).expect("four factors");
        max_abs_diff(&m, &DMatrix::identity(m.nrows(), m.nrows())) <= SPECTRAL_TOL
    }

    /// `Γ(a)` for any operator on `H_N ⊗ H_N`; the output must be Hermitian within `1e-9`.
    pub fn apply_operator(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        let d = block(self.n);
        if a.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: a.dim() });
        }
        let out = unvectorize(&(self.matrix.as_matrix() * vectorize(a.as_matrix())), d);
        HermitianOperator::from_matrix(out.clone())?;
        HermitianOperator::from_matrix((&out + out.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// `Γ ∘ other`.
    pub fn compose(&self, other: &SuperMap) -> Result<SuperMap> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        SuperMap::from_matrix(
            self.n,
            ComplexMatrix::from_matrix(self.matrix.as_matrix() * other.matrix.as_matrix())?,
        )
    }
}

fn check_quartic(g: &SuperMap, sigma: &ExtendedState) -> Result<()> {
    let order = sigma.order();
    if order.m() != 1 || order.n() != g.n {
        return Err(Error::DimensionMismatch { expected: block(g.n), found: order.dim() });
    }
    Ok(())
}

/// `Γ(σ)` as a Hermitian operator; need not be an extended state.
pub fn apply_supermap(g: &SuperMap, sigma: &ExtendedState) -> Result<HermitianOperator> {
    check_quartic(g, sigma)?;
    g.apply_operator(sigma.operator())
}

/// `Ψ ⊗ id` acting on the principal factor.
pub fn product_supermap(psi: &QuantumMap) -> SuperMap {
    let n = psi.n();
    let d = block(n);
    let s = psi.superop().as_matrix();
    let mut m = DMatrix::<Complex64>::zeros(d * d, d * d);
    for a in 0..n {
        for c in 0..n {
            for b in 0..n {
                for e in 0..n {
                    let w = s[(a * n + c, b * n + e)];
                    if w == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for x in 0..n {
                        for y in 0..n {
                            let row = (a * n + x) * d + c * n + y;
                            let col = (b * n + x) * d + e * n + y;
                            m[(row, col)] = w;
                        }
                    }
                }
            }
        }
    }
    SuperMap::from_matrix(n, ComplexMatrix::from_matrix(m).expect("finite"))
        .expect("product of a Hermiticity-preserving map")
}

/// `σ_Ψ ⊙ σ_Φ = N (σ_Ψ^R σ_Φ^R)^R`, the state of the composed map `Ψ ∘ Φ`.
pub fn compose_states(sa: &HermitianOperator, sb: &HermitianOperator) -> Result<HermitianOperator> {
    if sa.dim() != sb.dim() {
        return Err(Error::DimensionMismatch { expected: sa.dim(), found: sb.dim() });
    }
    let n = isqrt_exact(sa.dim()).ok_or(Error::NotPerfectSquare(sa.dim()))?;
    let prod = reshuffle_raw(sa.as_matrix(), n) * reshuffle_raw(sb.as_matrix(), n);
    let out = reshuffle_raw(&prod, n) * Complex64::new(n as f64, 0.0);
    HermitianOperator::from_matrix((&out + out.adjoint()) * Complex64::new(0.5, 0.0))
}

/// `Γ = Σ Yᵢ ⊗ Ȳᵢ` for Kraus operators on `H_N ⊗ H_N`.
pub fn supermap_from_kraus(ys: &[ComplexMatrix]) -> Result<SuperMap> {
    let first = ys.first().ok_or(Error::EmptyKraus)?;
    let d = first.nrows();
    let n = isqrt_exact(d).ok_or(Error::NotPerfectSquare(d))?;
    let mut m = DMatrix::<Complex64>::zeros(d * d, d * d);
    for y in ys {
        if y.nrows() != d || y.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: y.nrows() });
        }
        m += y.as_matrix().kronecker(&y.as_matrix().map(|z| z.conj()));
    }
    SuperMap::from_matrix(n, ComplexMatrix::from_matrix(m)?)
}

/// `Ψ = D^R` with `D = Tr_{A'B'} G / N`.
pub fn reduce_supermap(g: &SuperMap) -> QuantumMap {
    QuantumMap::from_choi(reduced_choi(g)).expect("N² × N² Choi matrix")
}

/// `Tr_{A'B'} G / N`.
pub fn reduced_choi(g: &SuperMap) -> HermitianOperator {
    partial_trace(&g.choi_g, &g.shape(), &[0, 2])
        .expect("four factors")
        .scaled(1.0 / g.n as f64)
}

/// Sampled evidence of preservation plus the reduced-Choi positivity test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// No sampled extended state left the set; evidence, not proof.
    pub preserves_sampled: bool,
    pub reduced_cp: bool,
    pub samples_used: usize,
    pub first_violation: Option<ExtendedState>,
}

fn output_leaves_set(g: &SuperMap, sigma: &ExtendedState) -> bool {
    match apply_supermap(g, sigma) {
        Ok(out) => !is_extended_state(&out, &sigma.order(), false).unwrap_or(false),
        Err(_) => true,
    }
}

pub fn check_admissible(g: &SuperMap, samples: usize, seed: u64) -> AdmissibilityReport {
    let order = TheoryOrder::quartic(g.n).expect("positive N");
    let first = (0..samples as u64)
        .into_par_iter()
        .map(|i| sample_extended_state(&order, derive_seed(seed, i)))
        .find_first(|s| output_leaves_set(g, s));
    let reduced_cp = reduced_choi(g).min_eigenvalue().is_ok_and(|l| l >= -SPECTRAL_TOL);
    AdmissibilityReport {
        preserves_sampled: first.is_none(),
        reduced_cp,
        samples_used: samples,
        first_violation: first,
    }
}

/// Reduce-after-evolve versus evolve-after-reduce for one supermap and state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramPaths {
    pub rho_prime: HermitianOperator,
    pub rho_doubleprime: HermitianOperator,
    pub gap: f64,
}

pub fn hyperdecohere_paths(g: &SuperMap, sigma: &ExtendedState) -> Result<DiagramPaths> {
    let evolved = apply_supermap(g, sigma)?;
    let rho_prime = reduce_operator(&evolved, &sigma.order())?;
    let rho_doubleprime = reduce_supermap(g).apply(&crate::states::reduce_state(sigma))?;
    let gap = trace_norm(&difference(&rho_prime, &rho_doubleprime)?)?;
    Ok(DiagramPaths { rho_prime, rho_doubleprime, gap })
}

/// `diag(U p U†) ≺ p`.
pub fn verify_decoherence(u: &ComplexMatrix, p: &Spectrum) -> Result<bool> {
    if u.nrows() != p.len() || u.ncols() != p.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: u.nrows() });
    }
    let rotated = HermitianOperator::diagonal(p.values()).conjugate_by(u.as_matrix())?;
    majorized_by_tol(&Spectrum::new(diagonal(&rotated))?, p, MAJORIZATION_TOL)
}

/// `Tr_{A'}[U(ρ ⊗ I/N)U†] ≺ ρ`.
pub fn verify_hyperdecoherence(u: &ComplexMatrix, rho: &HermitianOperator) -> Result<bool> {
    if !is_quantum_state(rho, false) {
        return Err(Error::InvalidState("input is not a density matrix".into()));
    }
    let n = rho.dim();
    let order = TheoryOrder::quartic(n)?;
    let lifted = tensor_product(rho, &HermitianOperator::maximally_mixed(n)).conjugate_by(u.as_matrix())?;
    let reduced = reduce_operator(&lifted, &order)?;
    majorized_by_tol(&spectrum(&reduced)?, &spectrum(rho)?, MAJORIZATION_TOL)
}

/// `σ ↦ S σ S` with `S` the swap of `A` and `A'`.
pub fn swap_supermap(n: usize) -> SuperMap {
    supermap_from_kraus(&[swap_operator(n)]).expect("unitary Kraus operator")
}

/// `σ ↦ 2 Tr(σ) I/N² − σ`, the reflection through the maximally mixed state.
pub fn reflection_supermap(n: usize) -> SuperMap {
    let d = block(n);
    let id = vectorize(&DMatrix::identity(d, d));
    let m = &id * id.transpose() * Complex64::new(2.0 / d as f64, 0.0) - DMatrix::identity(d * d, d * d);
    SuperMap::from_matrix(n, ComplexMatrix::from_matrix(m).expect("finite")).expect("Hermitian dynamical matrix")
}

/// `σ ↦ |φ⟩⟨φ| Tr σ` for a unit vector `φ` of `H_N ⊗ H_N`.
pub fn pure_contraction_supermap(phi: &DVector<Complex64>) -> Result<SuperMap> {
    let n = isqrt_exact(phi.len()).ok_or(Error::NotPerfectSquare(phi.len()))?;
    let norm = phi.norm();
    if (norm - 1.0).abs() > crate::states::INPUT_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let target = vectorize(HermitianOperator::projector(phi).as_matrix());
    let id = vectorize(&DMatrix::identity(phi.len(), phi.len()));
    SuperMap::from_matrix(n, ComplexMatrix::from_matrix(target * id.transpose())?)
}

/// Stinespring sample on `H_N ⊗ H_N` with an environment of the same size.
pub fn random_cptp_supermap_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SuperMap {
    let d = block(n);
    let u = haar_unitary(d * d, rng);
    let ys: Vec<ComplexMatrix> = (0..d)
        .map(|e| {
            ComplexMatrix::from_matrix(DMatrix::from_fn(d, d, |i, j| u[(i * d + e, j * d)])).expect("finite")
        })
        .collect();
    supermap_from_kraus(&ys).expect("consistent Kraus operators")
}

pub fn random_cptp_supermap(n: usize, seed: u64) -> SuperMap {
    random_cptp_supermap_with(n, &mut rng_from_seed(seed))
}

/// Dirichlet mixture of between 1 and `N⁴` unitary conjugations on `H_N ⊗ H_N`.
pub fn random_bistochastic_supermap_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SuperMap {
    let d = block(n);
    let k = rng.random_range(1..=(d * d).min(crate::states::MAX_MIXTURE));
    let ys: Vec<ComplexMatrix> = dirichlet(k, rng)
        .into_iter()
        .map(|w| ComplexMatrix::from_matrix(haar_unitary(d, rng) * Complex64::new(w.sqrt(), 0.0)).expect("finite"))
        .collect();
    supermap_from_kraus(&ys).expect("consistent Kraus operators")
}

pub fn random_bistochastic_supermap(n: usize, seed: u64) -> SuperMap {
    random_bistochastic_supermap_with(n, &mut rng_from_seed(seed))
}

/// Whether `classify(reduce_supermap(g))` inherits the flags of `g`.
pub fn reduction_inherits(g: &SuperMap) -> bool {
    let c = classify(&reduce_supermap(g));
    (!g.is_cp() || c.cp)
        && (!g.is_trace_preserving() || c.trace_preserving)
        && (!g.is_unital() || c.unital)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{max_entangled, hadamard};
    use crate::maps::{contraction_map, jamiolkowski_state, map_from_state, random_bistochastic, random_cptp, KrausSet};
    use crate::random::{random_density, random_pure_vector, random_unitary};
    use crate::states::{extend_product, sample_extended_state_k};

    fn q(n: usize) -> TheoryOrder {
        TheoryOrder::quartic(n).unwrap()
    }

    #[test]
    fn apply_examples() {
        let s = sample_extended_state(&q(2), 1);
        let out = apply_supermap(&SuperMap::identity(2), &s).unwrap();
        assert_eq!(&out, s.operator());
        let out = apply_supermap(&product_supermap(&QuantumMap::identity(2)), &s).unwrap();
        assert!(out.matrix().max_abs_diff(s.operator().matrix()) < 1e-15);

        let rho = random_density(2, 3).unwrap();
        let out = apply_supermap(&swap_supermap(2), &extend_product(&rho, &q(2)).unwrap()).unwrap();
        let want = tensor_product(&HermitianOperator::maximally_mixed(2), &rho);
        assert!(out.matrix().max_abs_diff(want.matrix()) < 1e-15);
        assert!(apply_supermap(&SuperMap::identity(3), &s).is_err());
    }

    #[test]
    fn product_supermap_examples() {
        assert_eq!(product_supermap(&QuantumMap::identity(2)), SuperMap::identity(2));
        let r0 = random_density(2, 1).unwrap();
        let g = product_supermap(&contraction_map(&r0).unwrap());
        let want = tensor_product(&r0, &HermitianOperator::maximally_mixed(2));
        for seed in 0..10 {
            let rho = random_density(2, seed + 10).unwrap();
            let out = apply_supermap(&g, &extend_product(&rho, &q(2)).unwrap()).unwrap();
            assert!(out.matrix().max_abs_diff(want.matrix()) < 1e-10);
        }
    }

    #[test]
    fn product_supermaps_embed_quantum_dynamics() {
        for seed in 0..100 {
            let n = 2 + seed as usize % 2;
            let psi = random_cptp(n, seed);
            let g = product_supermap(&psi);
            let rho = random_density(n, seed + 500).unwrap();
            let out = apply_supermap(&g, &extend_product(&rho, &q(n)).unwrap()).unwrap();
            let want = tensor_product(&psi.apply(&rho).unwrap(), &HermitianOperator::maximally_mixed(n));
            assert!(out.matrix().max_abs_diff(want.matrix()) < 1e-10);
            let from_kraus: Vec<ComplexMatrix> = psi
                .kraus()
                .unwrap()
                .operators()
                .iter()
                .map(|x| ComplexMatrix::from_matrix(x.as_matrix().kronecker(&DMatrix::identity(n, n))).unwrap())
                .collect();
            assert!(supermap_from_kraus(&from_kraus).unwrap().matrix().max_abs_diff(g.matrix()) < 1e-12);
        }
    }

    #[test]
    fn product_of_unital_channel_preserves_sampled_states() {
        let g = product_supermap(&random_bistochastic(2, 42));
        let report = check_admissible(&g, 1000, 7);
        assert!(report.preserves_sampled && report.reduced_cp);
    }

    #[test]
    fn product_of_non_unital_channel_can_leave_the_set() {
        let zero = HermitianOperator::basis_projector(2, 0);
        let g = product_supermap(&contraction_map(&zero).unwrap());
        let sigma = ExtendedState::new(tensor_product(&HermitianOperator::maximally_mixed(2), &zero), q(2), true).unwrap();
        let out = apply_supermap(&g, &sigma).unwrap();
        assert!(out.matrix().max_abs_diff(tensor_product(&zero, &zero).matrix()) < 1e-15);
        assert!(!is_extended_state(&out, &q(2), false).unwrap());
        assert!(!check_admissible(&g, 1000, 7).preserves_sampled);
    }

    #[test]
    fn compose_states_examples() {
        let psi_plus = HermitianOperator::projector(&max_entangled(2));
        let sa = sample_extended_state(&q(2), 3);
        let out = compose_states(sa.operator(), &psi_plus).unwrap();
        assert!(out.matrix().max_abs_diff(sa.operator().matrix()) < 1e-12);
        let out = compose_states(&psi_plus, sa.operator()).unwrap();
        assert!(out.matrix().max_abs_diff(sa.operator().matrix()) < 1e-12);

        let rho = random_density(2, 8).unwrap();
        let contraction = tensor_product(&rho, &HermitianOperator::maximally_mixed(2));
        for seed in 0..10 {
            let sb = jamiolkowski_state(&random_cptp(2, seed));
            let out = compose_states(&contraction, &sb).unwrap();
            assert!(out.matrix().max_abs_diff(contraction.matrix()) < 1e-12);
        }
    }

    #[test]
    fn compose_states_is_map_composition() {
        for seed in 0..100 {
            let a = random_cptp(2, seed);
            let b = random_bistochastic(2, seed + 1000);
            let sa = jamiolkowski_state(&a);
            let sb = jamiolkowski_state(&b);
            let composed = map_from_state(&compose_states(&sa, &sb).unwrap()).unwrap();
            let direct = a.compose(&b).unwrap();
            assert!(composed.superop().max_abs_diff(direct.superop()) < 1e-9);

            let sc = sample_extended_state(&q(2), seed + 2000);
            let left = compose_states(&compose_states(&sa, &sb).unwrap(), sc.operator()).unwrap();
            let right = compose_states(&sa, &compose_states(&sb, sc.operator()).unwrap()).unwrap();
            assert!(left.matrix().max_abs_diff(right.matrix()) < 1e-9);
        }
    }

    #[test]
    fn supermap_from_kraus_examples() {
        assert_eq!(supermap_from_kraus(&[ComplexMatrix::identity(4)]).unwrap(), SuperMap::identity(2));
        let u = random_unitary(2, 1).unwrap();
        let v = random_unitary(2, 2).unwrap();
        let y = ComplexMatrix::from_matrix(u.as_matrix().kronecker(v.as_matrix())).unwrap();
        let g = supermap_from_kraus(&[y]).unwrap();
        let pu = QuantumMap::from_kraus(&KrausSet::unitary(&u).unwrap());
        let pv = supermap_from_kraus(&[ComplexMatrix::from_matrix(DMatrix::identity(2, 2).kronecker(v.as_matrix())).unwrap()]).unwrap();
        let want = product_supermap(&pu).compose(&pv).unwrap();
        assert!(g.matrix().max_abs_diff(want.matrix()) < 1e-12);
        assert!(g.is_cp());

        let mix = random_bistochastic_supermap(2, 5);
        assert!(mix.is_cp() && mix.is_trace_preserving() && mix.is_unital());
        let report = check_admissible(&mix, 500, 1);
        assert!(report.preserves_sampled && report.reduced_cp);
        assert!(supermap_from_kraus(&[]).is_err());
        assert!(supermap_from_kraus(&[ComplexMatrix::identity(3)]).is_err());
    }

    #[test]
    fn reduce_supermap_examples() {
        let psi = random_cptp(2, 9);
        let back = reduce_supermap(&product_supermap(&psi));
        assert!(back.superop().max_abs_diff(psi.superop()) < 1e-9);
        assert!(reduce_supermap(&SuperMap::identity(3)).superop().max_abs_diff(QuantumMap::identity(3).superop()) < 1e-12);
    }

    #[test]
    fn reduction_inheritance() {
        for seed in 0..100 {
            let g = random_cptp_supermap(2, seed);
            assert!(g.is_cp() && g.is_trace_preserving());
            let c = classify(&reduce_supermap(&g));
            assert!(c.cp && c.trace_preserving);
            let b = random_bistochastic_supermap(2, seed);
            assert!(classify(&reduce_supermap(&b)).bistochastic);
            assert!(reduction_inherits(&g) && reduction_inherits(&b));
        }
    }

    #[test]
    fn reflection_preserves_the_small_set() {
        let g = reflection_supermap(2);
        assert!(!g.is_cp());
        let bell = HermitianOperator::projector(&max_entangled(2));
        assert!(g.apply_operator(&bell).unwrap().min_eigenvalue().unwrap() < -0.4);
        let report = check_admissible(&g, 1000, 3);
        assert!(report.preserves_sampled);
        assert!(report.first_violation.is_none());
    }

    #[test]
    fn pure_contraction_is_caught() {
        let mut rng = rng_from_seed(1);
        let g = pure_contraction_supermap(&random_pure_vector(4, &mut rng)).unwrap();
        assert!(g.is_cp());
        let report = check_admissible(&g, 1000, 3);
        assert!(!report.preserves_sampled);
        let witness = report.first_violation.unwrap();
        let out = apply_supermap(&g, &witness).unwrap();
        assert!(!is_extended_state(&out, &q(2), false).unwrap());
    }

    #[test]
    fn admissibility_is_deterministic() {
        let g = random_bistochastic_supermap(2, 8);
        assert_eq!(check_admissible(&g, 200, 4), check_admissible(&g, 200, 4));
    }

    #[test]
    fn reduced_positivity_is_strictly_weaker() {
        // perturb the identity supermap along a direction that is traceless on A'B'
        let n = 2;
        let g0 = SuperMap::identity(n);
        let d4 = n.pow(4);
        let z = |a: usize, b: usize| match (a, b) {
            (0, 0) => 1.0,
            (0, 1) => -1.0,
            _ => 0.0,
        };
        let h = DMatrix::<Complex64>::from_fn(d4, d4, |r, c| {
            let (ra, rap, rb, rbp) = (r / 8, (r / 4) % 2, (r / 2) % 2, r % 2);
            let (ca, cap, cb, cbp) = (c / 8, (c / 4) % 2, (c / 2) % 2, c % 2);
            if ra == ca && rb == cb && rap == cap && rbp == cbp {
                Complex64::new(z(rap, rbp), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let g = HermitianOperator::from_matrix(g0.choi_g().as_matrix() + h * Complex64::new(0.1, 0.0)).unwrap();
        let g = SuperMap::from_choi_g(n, g).unwrap();
        assert!(g.choi_g().min_eigenvalue().unwrap() < -0.05);
        assert!(!g.is_cp());
        assert!(reduced_choi(&g).matrix().max_abs_diff(reduced_choi(&g0).matrix()) < 1e-15);
        assert!(check_admissible(&g, 10, 0).reduced_cp);
    }

    /// `Tr_{A'} Y / N`, the reduced Kraus operator of a product `Y = X ⊗ I`.
    fn reduced_kraus(y: &ComplexMatrix, n: usize) -> ComplexMatrix {
        let shape = SubsystemShape::bipartite(n, n).unwrap();
        let m = partial_trace_matrix(y.as_matrix(), &shape, &[0]).unwrap();
        ComplexMatrix::from_matrix(m * Complex64::new(1.0 / n as f64, 0.0)).unwrap()
    }

    #[test]
    fn reduced_kraus_for_product_supermaps_only() {
        let psi = random_cptp(2, 11);
        let ys: Vec<ComplexMatrix> = psi
            .kraus()
            .unwrap()
            .operators()
            .iter()
            .map(|x| ComplexMatrix::from_matrix(x.as_matrix().kronecker(&DMatrix::identity(2, 2))).unwrap())
            .collect();
        let xs: Vec<ComplexMatrix> = ys.iter().map(|y| reduced_kraus(y, 2)).collect();
        let from_reduced = QuantumMap::from_kraus(&KrausSet::new(xs).unwrap());
        let g = supermap_from_kraus(&ys).unwrap();
        assert!(from_reduced.superop().max_abs_diff(reduce_supermap(&g).superop()) < 1e-12);

        let swap = swap_operator(2);
        let xs = vec![reduced_kraus(&swap, 2)];
        let naive = QuantumMap::from_kraus(&KrausSet::new(xs).unwrap());
        assert!(naive.superop().max_abs_diff(reduce_supermap(&swap_supermap(2)).superop()) > 0.1);
    }

    #[test]
    fn hyperdecoherence_paths() {
        let psi = random_cptp(2, 3);
        let g = product_supermap(&psi);
        let rho = random_density(2, 4).unwrap();
        let paths = hyperdecohere_paths(&g, &extend_product(&rho, &q(2)).unwrap()).unwrap();
        assert!(paths.gap < 1e-10);

        let classical = HermitianOperator::diagonal(&[0.3, 0.7]);
        let paths = hyperdecohere_paths(&g, &extend_product(&classical, &q(2)).unwrap()).unwrap();
        assert!(paths.gap < 1e-10);

        let swap = swap_supermap(2);
        let best = (0..200)
            .map(|seed| hyperdecohere_paths(&swap, &sample_extended_state_k(&q(2), 1, seed)).unwrap().gap)
            .fold(0.0, f64::max);
        assert!(best > 0.05);
    }

    #[test]
    fn decoherence_examples() {
        let p = Spectrum::new(vec![0.6, 0.3, 0.1]).unwrap();
        assert!(verify_decoherence(&ComplexMatrix::identity(3), &p).unwrap());
        let p = Spectrum::new(vec![1.0, 0.0]).unwrap();
        assert!(verify_decoherence(&hadamard(), &p).unwrap());
        let rotated = HermitianOperator::diagonal(&[1.0, 0.0]).conjugate_by(hadamard().as_matrix()).unwrap();
        let d = diagonal(&rotated);
        assert!((d[0] - 0.5).abs() < 1e-15 && (d[1] - 0.5).abs() < 1e-15);
        let mut rng = rng_from_seed(99);
        for i in 0..2000 {
            let n = 2 + i % 3;
            let u = ComplexMatrix::from_matrix(haar_unitary(n, &mut rng)).unwrap();
            let p = Spectrum::new(crate::random::random_probability(n, &mut rng)).unwrap();
            assert!(verify_decoherence(&u, &p).unwrap());
        }
    }

    #[test]
    fn hyperdecoherence_examples() {
        let rho = random_density(2, 5).unwrap();
        assert!(verify_hyperdecoherence(&ComplexMatrix::identity(4), &rho).unwrap());
        assert!(verify_hyperdecoherence(&swap_operator(2), &rho).unwrap());
        let lifted = tensor_product(&rho, &HermitianOperator::maximally_mixed(2)).conjugate_by(swap_operator(2).as_matrix()).unwrap();
        let reduced = reduce_operator(&lifted, &q(2)).unwrap();
        assert!(reduced.matrix().max_abs_diff(HermitianOperator::maximally_mixed(2).matrix()) < 1e-15);
        for seed in 0..1000 {
            let n = 2 + seed as usize % 2;
            let u = random_unitary(n * n, seed).unwrap();
            let rho = random_density(n, seed + 7).unwrap();
            assert!(verify_hyperdecoherence(&u, &rho).unwrap());
        }
    }

    #[test]
    fn json_round_trip() {
        let g = random_bistochastic_supermap(2, 2);
        let text = serde_json::to_string(&g).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n"], 2);
        assert!(v.get("matrix").is_none());
        let back: SuperMap = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
    }
}
