//! Estimation of connection-probability matrices and step graphons in the cut metric.
//!
//! The crate is organised around a small data model ([`kernel`]) and the
//! numerical routines that operate on it:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`kernel`] | probability / adjacency matrices, step graphons, weighted kernels |
//! | [`cut_norm`] | exact and heuristic cut norms, the ∞→1 norm, certified bounds |
//! | [`distance`] | δ□, δ1, δ2 between step graphons; homomorphism densities |
//! | [`samplers`] | seeded W-random graph, SBM and clipped sparse samplers |
//! | [`estimators`] | adjacency, mean, spectral hard thresholding, restricted least squares |
//! | [`regularity`] | constructive weak regularity approximation |
//! | [`packing`] | packing families used in minimax lower bounds |
//! | [`experiments`] | Monte Carlo risk harness, rate formulas, CSV / SVG output |
//!
//! Matrix cut norms are normalized by `n²`; kernel cut norms are weighted
//! integrals. The two conventions agree for a matrix read as an equal-weight
//! step kernel, but callers mixing raw kernels and matrices must convert.

pub mod cut_norm;
pub mod distance;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod kernel;
pub mod packing;
pub mod record;
pub mod regularity;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use kernel::{AdjacencyMatrix, Kernel, LatentSample, Matrix, ProbMatrix, StepGraphon};
