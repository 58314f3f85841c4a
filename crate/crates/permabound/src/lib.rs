//! Permanent bounds for nonnegative matrices.
//!
//! The permanent of an `n × n` matrix is `per(A) = Σ_σ Π_i A(i, σ(i))`,
//! summed over all permutations. Computing it exactly is #P-hard, so most
//! of this crate is about *bounds*: closed-form lower and upper bounds,
//! the Bethe functional whose maximum over the Birkhoff polytope
//! lower-bounds `log per`, and exact small-scale oracles to verify every
//! inequality numerically.
//!
//! Everything is compared in natural-log domain; [`LogValue`] is the
//! common currency for quantities that may be zero.
//!
//! Module map:
//!
//! - [`matrix`]: dense nonnegative matrices, Sinkhorn scaling, support
//!   analysis, named matrix families, CSV/JSON readers.
//! - [`exact`]: exact permanents (Ryser + brute force) and
//!   m-subpermanent sums (bitmask DP + brute force).
//! - [`bounds`]: entrywise functionals: `F`, the Bethe functional and its
//!   gradient, Schrijver's inequality, column products, LMS/SD, Bregman
//!   and Hölder upper bounds, the doubly-stochastic subpermanent bound.
//! - [`curves`]: scalar closed forms: van der Waerden, `G(x)`, matching
//!   lower bounds `SF`/`D`, monomer-dimer entropy `g_r` and the limit
//!   curves `M_r`, `S_r`, `L_r`.
//! - [`entropy`]: odd entropy on the simplex and the divergences built
//!   from it.
//! - [`assignment`]: exact linear assignment with forbidden cells and a
//!   lexicographic tie-break (the Birkhoff-polytope linear oracle).
//! - [`bethe`]: Frank-Wolfe maximization of the Bethe functional and
//!   polynomial capacities.
//! - [`sampling`]: the two random models for regular bipartite
//!   multigraphs plus seeded Monte Carlo estimators.
//! - [`report`]: per-matrix bound ledgers with JSON serialization.

// Indexed loops over several parallel buffers read better than iterator
// chains in the dense-matrix kernels here.
#![allow(clippy::needless_range_loop)]

pub mod assignment;
pub mod bethe;
pub mod bounds;
pub mod curves;
pub mod entropy;
pub mod exact;
pub mod matrix;
pub mod numeric;
pub mod report;
pub mod sampling;

mod error;

pub use error::{Error, Result};
pub use matrix::{Matrix, StochScale, SupportPattern};
pub use numeric::LogValue;
