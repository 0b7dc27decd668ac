//! Matrix permanents: the exponential Ryser reference and the
//! polynomial-time `Per(1 + V)` algorithm for finite-rank `V`.
//!
//! `Per(1 + V)` with `V = sum_s u^(s) v^(s)T` equals the sum of the diagonal
//! coefficients `F_{n,n}` of
//!
//! ```text
//! F(a_u, a_v) = prod_x [1 + (sum_s a_u^(s) u^(s)_x) (sum_s' a_v^(s') v^(s')_x)]
//! ```
//!
//! weighted by `prod_r n_r!`. The coefficient table is built by multiplying
//! in one factor at a time, see [`build_aux_polynomial`].

mod aux_poly;
mod ryser;

pub use aux_poly::{build_aux_polynomial, permanent_lowrank, DiagonalCoeffTable, TableLayout};
pub use ryser::{permanent_ryser, permanent_submatrix, RYSER_MAX_DIM};
