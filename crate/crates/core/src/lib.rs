//! Numerical laboratory for polynomial diffeomorphisms of `C²`, centred on
//! the complex Hénon family `f(x, y) = (a − b·y − x², x)`.
//!
//! The crate is organised the way the computations depend on each other:
//!
//! * [`dynamics`] and [`degree`]: the maps, iteration with a sound escape
//!   test, and symbolic degree growth.
//! * [`oracle1d`]: exact potential theory of `x ↦ a − x²`, used on its own
//!   and as a reference for the two-variable code.
//! * [`potential`]: the Green functions `G±` with certified error bounds and
//!   saddle-orbit samples of the equilibrium measure.
//! * [`saddles`]: periodic points and linearizing parameterizations of
//!   their unstable manifolds.
//! * [`slices`]: escape-rate pictures in the linearizing plane, the two
//!   connectivity tests and Lyapunov exponents, parameter-plane scans, and
//!   the HSLC file format.
//! * [`horseshoe`]: interval-arithmetic horseshoe certificates, periodic
//!   orbit censuses and the horseshoe-locus boundary scan.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod degree;
pub mod dynamics;
pub mod error;
pub mod horseshoe;
pub mod oracle1d;
pub mod potential;
pub mod rng;
pub mod saddles;
pub mod slices;

pub use dynamics::{Direction, Escape, HenonParams, Point2, QuadParam, C64};
pub use error::{Error, Result};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
