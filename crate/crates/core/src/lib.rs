//! Numerical toolkit for the quartic extension of quantum theory.
//!
//! States of the extended theory are bipartite density matrices on
//! `H_N ⊗ H_N^m` whose spectra lie in the permutohedron spanned by
//! `(N^-m, …, N^-m, 0, …, 0)`. Measurement effects live in the dual cone,
//! dynamics is given by supermaps, and every object reduces to standard
//! quantum theory by a partial trace over the ancilla.
//!
//! Modules, bottom-up:
//!
//! - [`hermitian`]: complex matrices, Hermitian operators, spectra, tensor and
//!   partial-trace algebra, reshuffling, entropy.
//! - [`random`]: seeded Haar unitaries, Wishart states and friends.
//! - [`convex`]: majorization, permutation polytopes and their duals.
//! - [`states`]: membership predicates and constructions for states and effects.
//! - [`maps`]: quantum operations in Kraus / superoperator / Choi form.
//! - [`supermaps`]: maps acting on extended states and the reduction diagrams.
//! - [`harness`]: deterministic verification suites used by the CLI.

pub mod convex;
pub mod error;
pub mod harness;
pub mod hermitian;
pub mod maps;
pub mod random;
pub mod states;
pub mod supermaps;

pub use error::{Error, Result};
pub use hermitian::{ComplexMatrix, HermitianOperator, Spectrum, SubsystemShape};
pub use num_complex::Complex64;

/// Tolerance for exact algebraic identities (involutions, traces).
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for checks that go through an eigen-decomposition.
pub const SPECTRAL_TOL: f64 = 1e-9;
/// Default Hermiticity tolerance carried by [`HermitianOperator`].
pub const HERM_TOL: f64 = 1e-9;
