//! Exact arithmetic for discrete and extended Heisenberg groups:
//! graded automorphisms, full systems of conjugacy-class invariants, and
//! the brute-force oracles that certify them.

pub mod abelian;
mod arith;
pub mod catalog;
pub mod congruence;
pub mod conj;
pub mod docs;
pub mod heis;
mod linalg;
pub mod oracle;
pub mod selftest;
pub mod zheis;

mod error;

pub use error::{Error, Result};
