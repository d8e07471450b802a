//! Group Hopf algebras `K[G]` over the reals and complexes for finite groups,
//! the function-algebra model of `C[G]` for compact abelian groups with
//! finitely generated duals, towers of finite quotients, and degree-truncated
//! enveloping algebras of finite-dimensional Lie algebras.

pub mod abelian;
pub mod character;
pub mod dft;
pub mod dual;
pub mod envelope;
pub mod error;
pub mod group;
pub mod hopf;
pub mod profinite;
pub mod linalg;
pub mod oracle;
pub mod scalar;
pub mod selftest;
pub mod snf;
pub mod wedderburn;

pub use error::{Error, Result};
