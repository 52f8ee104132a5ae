//! Numerical toolkit for Diederich–Fornæss exponents of smoothly bounded
//! pseudoconvex domains in C².

pub mod cli;
pub mod conditions;
pub mod domain;
pub mod error;
pub mod frame;
pub mod jet;
pub mod program;
pub mod psh;
pub mod quadrature;
pub mod sampling;
pub mod simplex;

pub use domain::{BoundaryPoint, Domain, DomainSpec};
pub use error::{DfError, Result};
pub use frame::{Frame, HermitianForm2, LeviFlatSample};
pub use jet::{Complex2Point, Jet2, C64};
pub use program::FieldProgram;
