//! Self-adjoint extensions of `l[u] = i u' + A u` on the two half-lines
//! `(-inf, a]` and `[b, +inf)` with values in a finite-dimensional Hilbert
//! space.
//!
//! Functions are finite sums of vector-valued exponential atoms, so inner
//! products, boundary values and resolvents have closed forms. The
//! [`quadrature`] module provides Gauss–Legendre oracles used to check them.

pub mod boundary;
pub mod cli;
pub mod error;
pub mod halfline;
pub mod neumann;
pub mod operator;
pub mod probe;
pub mod quadrature;
pub mod random;
pub mod resolvent;

pub use error::{Error, Result};
pub use halfline::{ExponentialAtom, HalfLineFunction, Side, TwoComponentFunction};
pub use operator::{CMatrix, CVector, HermitianOperator, SpectralPoint, UnitaryParameter};
pub use resolvent::{ExtensionLW, ResolventOutput};
