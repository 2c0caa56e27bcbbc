//! Quiver representations on finite-dimensional prespectral triples.
//!
//! The crate builds, from a finite quiver `Q` and a Hilbert dimension `N`:
//!
//! * Bratteli diagrams/networks classifying the algebra morphisms attached to
//!   edges ([`nct`]),
//! * concrete representations (one unitary per edge) together with the gauge
//!   group action on them ([`repcat`]),
//! * the Dirac operator `D_Q(L, rho)` and its traces, evaluated both as dense
//!   matrix powers and as Wilson-loop sums over closed paths ([`dirac`]),
//! * closed-form lattice trace formulas, the length-6 Weisz-Wohlert
//!   decomposition and exact path-counting sequences ([`lattice`]),
//! * Haar-measure Monte Carlo estimates of partition functions and Wilson
//!   loops ([`mc`]).
//!
//! All heavy inner loops (path sums, per-vertex class sums, Monte Carlo
//! sampling) run data-parallel through rayon when the default `parallel`
//! feature is enabled, and fall back to equivalent sequential code when it is
//! not. Results are bit-identical across thread counts: parallel maps collect
//! in index order and reductions happen in a fixed sequence.

pub mod error;
pub mod linalg;
pub mod parallel;
pub mod quiver;

pub mod nct;
pub mod repcat;

pub mod dirac;
pub mod lattice;
pub mod mc;

pub use error::{Error, Result};
