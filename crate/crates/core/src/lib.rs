//! Core algorithms for studying LIL-normalized maximal functions of stationary
//! random fields indexed by `Z^d`.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs and a 64-bit seed; parallel execution is injected
//! through [`exec::Executor`], so results do not depend on the worker count.
//!
//! Module map:
//!
//! - [`lattice`]: lattice points, boxes, dense grids and prefix-sum tables.
//! - [`scalars`]: `L`, `LL`, the Young function `phi_{p,r}`, Luxemburg and weak-`L^p` norms.
//! - [`fields`]: innovation laws, coefficient fields and the simulatable model families.
//! - [`chaos`]: Hermite polynomials, expansion coefficients and series constants.
//! - [`projections`]: martingale projections `X_{0,j}` and physical dependence coefficients.
//! - [`sets`]: summation-region sequences, growth certificates and residue partitions.
//! - [`maxfun`]: maximal functions over rectangles and set sequences, `L^p` estimation.
//! - [`bounds`]: right-hand-side series of the maximal inequalities.
//! - [`devcheck`]: Monte Carlo checks of deviation and maximal ergodic inequalities.
#![no_std]

extern crate alloc;

pub mod bounds;
pub mod chaos;
pub mod devcheck;
pub mod error;
pub mod exec;
pub mod fields;
pub mod lattice;
pub(crate) mod math;
pub mod maxfun;
pub mod projections;
pub mod quad;
pub mod rng;
pub mod scalars;
pub mod sets;
pub mod stats;

pub use error::{Error, Result};
pub use exec::{Executor, Serial};
pub use lattice::{LatticeIndex, PrefixTable, Rect, ValueGrid};

/// Library version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
