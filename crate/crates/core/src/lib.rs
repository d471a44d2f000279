//! Translationally equivariant minimal Lagrangian surfaces in CP²: the
//! associated family generated by a constant potential, its explicit
//! Iwasawa factors, closed-form horizontal lifts and period lattices.

pub mod elliptic;
pub mod error;
pub mod immersion;
pub mod iwasawa;
pub mod linalg3;
pub mod metric;
pub mod periodicity;
pub mod potential;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
pub use linalg3::{herm_inner, ComplexMatrix3, ComplexVector3, TwistClass, C64};
pub use potential::{derive_constants, DerivedConstants, EigenSystem, Regime, SurfaceClass, SurfaceParams};
