//! Authentication codes with arbitration built from pseudo-symplectic
//! geometry over GF(2^e), together with exhaustive machinery that checks
//! their sizes, incidence counts and deception probabilities exactly.
//!
//! Layering, bottom up: [`field`] → [`linalg`] → [`geometry`] →
//! [`enumeration`] → [`code`] → [`attacks`]; [`cli`] and [`report`] sit on top.

pub mod attacks;
pub mod cli;
pub mod code;
pub mod enumeration;
pub mod error;
pub mod exec;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod report;

pub use error::{Error, Result};
pub use exec::Exec;
pub use field::{Fe, FieldSpec};
pub use geometry::{PsSpace, SubspaceType};
pub use linalg::{Mat, Subspace};
