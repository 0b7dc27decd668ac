//! Exact expectation values `<Phi|U^|Phi>` of non-interacting multi-particle
//! operators in bosonic and fermionic product states.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: dense complex matrices, LU determinants and the
//!   `u v^T` representation of finite-rank perturbations.
//! * [`permanent`]: the Ryser reference permanent and the polynomial-time
//!   `Per(1 + V)` algorithm for rank-`k` perturbations.
//! * [`fock`]: a brute-force truncated Fock-space simulator used as the
//!   ground truth for every fast path.
//! * [`states`]: the product-state zoo and its closed-form expectations.
//! * [`fermion_lowrank`]: `<Phi|(1+V)^|Phi>` for arbitrary fermionic product
//!   states with rank-`k` `V`.
//! * [`fcs`]: full-counting-statistics generating functions, probabilities
//!   and sampling over a small set of counted modes.
//! * [`bench`] and [`cli`]: the scaling harness and the command-line surface.

pub mod bench;
pub mod cli;
pub mod error;
pub mod exec;
pub mod fcs;
pub mod fermion_lowrank;
pub mod fock;
pub mod format;
pub mod numerics;
pub mod permanent;
pub mod random;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
