//! Seeded samplers. Every sampler is deterministic for a given seed; Monte
//! Carlo loops derive per-sample seeds with [`derive_seed`] so results do not
//! depend on scheduling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::hermitian::{ComplexMatrix, HermitianOperator};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for the `index`-th sample of a run started with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index)
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar unitary: QR of a Ginibre matrix with the phases of `diag(R)` folded into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let qr = random_matrix(dim, dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::OutOfRange("dimension must be positive".into()));
    }
    ComplexMatrix::from_matrix(haar_unitary(dim, &mut rng_from_seed(seed)))
}

/// Wishart-type state `GG†/Tr(GG†)`.
pub fn density_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = random_matrix(dim, dim, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let mut m = w / Complex64::new(tr, 0.0);
    // exact Hermiticity: average with the adjoint
    m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianOperator::from_matrix(m).expect("Wishart matrix is Hermitian")
}

pub fn random_density(dim: usize, seed: u64) -> Result<HermitianOperator> {
    if dim == 0 {
        return Err(Error::OutOfRange("dimension must be positive".into()));
    }
    Ok(density_with(dim, &mut rng_from_seed(seed)))
}

/// Haar-random unit vector.
pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Random Hermitian matrix `(G + G†)/2`, not positive in general.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = random_matrix(dim, dim, rng);
    HermitianOperator::from_matrix((&g + g.adjoint()) * Complex64::new(0.5, 0.0))
        .expect("symmetrized matrix is Hermitian")
}

/// Flat Dirichlet weights of length `k`.
pub fn dirichlet<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Uniform point of the probability simplex.
pub fn random_probability<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    dirichlet(n, rng)
}
