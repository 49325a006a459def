//! Conversions between the monomial, Newton, Lagrange and Lin–Chung–Han bases
//! of polynomials over binary fields, driven by reduction trees.

pub mod basisgen;
pub mod cli;
pub mod error;
pub mod field;
pub mod oracle;
pub mod precomp;
pub mod redtree;
pub mod transforms;

pub use error::{Error, Result};
pub use field::{Fe, Field};
