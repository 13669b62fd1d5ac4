//! Numerical laboratory for linear-readout floors, threshold recovery and
//! capacity reference scales of features stored in superposition.
//!
//! A *code* is a `d × F` dictionary of unit-norm feature directions. A
//! *readout* is an `F × d` linear map `G`; the cross-talk of the pair is the
//! off-diagonal part of `M = GΨ`. The crate provides:
//!
//! * [`kernels`]: blocked dense products that stream `M` in tiles and never
//!   store an `F × F` matrix.
//! * [`codes`]: random, basis-union and tight-frame dictionaries with their
//!   coherence certificates.
//! * [`readouts`]: unit-diagonal rescaling, cross-talk reports and the
//!   rank–trace floor checks.
//! * [`sparse`]: Boolean sparse states, the threshold decoder and its
//!   deterministic recovery certificate.
//! * [`experiments`]: seeded Monte Carlo sweeps over the probabilistic
//!   statements.
//! * [`scales`]: closed-form capacity reference scales.
//!
//! The crate is `no_std` with `alloc`. The default `std` feature only forwards
//! to dependencies; `parallel` enables rayon tile and trial parallelism with
//! results that are bit-identical to the sequential path.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_op_in_unsafe_fn)]

extern crate alloc;

pub mod codes;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod readouts;
pub mod rng;
pub mod scales;
pub mod sparse;
pub mod stats;

pub use codes::{Code, CodeCertificate, CodeKind};
pub use error::{Error, Result};
pub use kernels::{DenseMatrix, OffdiagStats, TilePlan};
pub use readouts::{CrosstalkReport, Readout, ReadoutKind};
pub use sparse::{DecodeResult, NoiseSpec, SparseState, SparsityModel};

/// Crate version recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
