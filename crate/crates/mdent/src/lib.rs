//! Minimal decomposition Rényi entropy of multipartite pure states.
//!
//! A pure state of N qudits expanded in a product basis carries the
//! probability vector p = |c|², and with it a Rényi entropy S_q for every
//! order. Minimizing S_q over all local product bases yields an LU
//! invariant that interpolates between support minimization (q → 0) and
//! the geometric measure of entanglement (q → ∞). This crate provides:
//!
//! - dense state storage, reshaping, and reduced density matrices ([`state`])
//! - Rényi/Shannon entropies, IPR, support counts, and bounds ([`entropy`])
//! - k-uniformity and AME verification over bipartitions ([`uniformity`])
//! - alternating minimization of S_q over local unitaries, built on an
//!   Lp-norm principal component solver ([`minent`], [`lppca`])
//! - the seesaw for S_∞^min and the geometric measure ([`seesaw`])
//! - generation of random k-uniform/AME states by nuclear-norm ascent
//!   ([`amegen`])
//! - Latin squares, orthogonal arrays, known reference states, and a
//!   canonicalization pass ([`designs`])
//! - ensemble statistics with histograms and CSV/JSON export ([`ensemble`])
//!
//! All logarithms are natural. Party indices are 0-based and flat indices
//! are row-major with the first party most significant.

/// Complex double, the scalar everywhere.
pub type C64 = nalgebra::Complex<f64>;

pub mod amegen;
pub mod designs;
pub mod ensemble;
pub mod entropy;
pub mod error;
pub mod io;
pub mod lppca;
pub mod minent;
pub mod random;
pub mod seesaw;
pub mod state;
pub mod uniformity;

pub use error::{MdentError, Result};
pub use state::State;
