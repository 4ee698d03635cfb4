//! Energy minima of spin Hamiltonians over separable, symmetric-separable
//! and k-producible states with fixed single-particle marginals, together
//! with brute-force oracles that check the closed forms.

// Negated comparisons such as !(x > 0.0) are used on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod infomeasures;
pub mod models;
pub mod optim;
pub mod oracles;
pub mod qcore;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
