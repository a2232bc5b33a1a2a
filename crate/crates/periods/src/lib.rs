//! Exact computer algebra for periods of mixed Tate type.
//!
//! The crate is organised around a small exact kernel (arbitrary-precision
//! rationals, linear combinations over ordered generator sets, sparse row
//! reduction) on top of which sit:
//!
//! - [`words`]: shuffle / quasi-shuffle combinatorics, Lyndon words, and the
//!   dictionary between zeta-index compositions and iterated-integral words;
//! - [`motivic`]: iterated-integral generators over {0, ±1}, shuffle
//!   regularization, the Galois coaction, derivations, unipotency degree,
//!   Galois conjugates and the projection to de Rham periods;
//! - [`relations`]: datamining of exact Q-linear relations by regularized
//!   double shuffle, with a per-weight basis and reduction maps;
//! - [`falphabet`]: the decomposition into the model ring
//!   Q[f2] ⊗ Q⟨f3, f5, f7, f9⟩ (with ν_p letters for logarithms of primes),
//!   its graded leading term, and the inverse recomposition;
//! - [`permatrix`]: symbolic period matrices, the real Frobenius, the
//!   single-valued matrix (F∞C)⁻¹C and its twisted variant, monodromy,
//!   and Hodge-theoretic invariants;
//! - [`symbol`]: user-declared differential graded algebras, nilpotent
//!   connections, the smb series, the reduced-bar differential, boundary
//!   search, cohomological symbols, and symbols based at a point;
//! - [`numerics`]: an arbitrary-precision numerical oracle (multiple zeta
//!   values by Hölder convolution, multiple polylogarithms, Bloch–Wigner,
//!   and the period homomorphism) used to validate exact identities;
//! - [`expr`]: the expression grammar `zeta(..)`, `L`, `log(p)`, `I(0; ..; 1)`
//!   shared by the command-line tools.

pub mod exact;
pub mod ratfunc;
pub mod words;
pub mod motivic;
pub mod relations;
pub mod falphabet;
pub mod permatrix;
pub mod symbol;
pub mod numerics;
pub mod expr;

pub use exact::{LinComb, Rat, SparseMat};
