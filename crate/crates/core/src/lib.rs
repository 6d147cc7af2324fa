//! Exact verification of extremal-ray data on Fano threefolds.
//!
//! The crate is layered bottom-up: [`rational`] and [`linalg`] provide exact
//! arithmetic, [`lp`] and [`cone`] the polyhedral engine, [`model`] the record
//! format, and [`exhaustion`], [`flop`], [`chambers`] and [`audit`] the checks
//! that the `mra` binary drives.

pub mod audit;
pub mod chambers;
pub mod cli;
pub mod cone;
pub mod error;
pub mod exhaustion;
pub mod flop;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod rational;

pub use cone::{canonicalize_ray, image_cone, Codim2Face, Cone, Membership, Pointedness, Ray};
pub use error::{Error, Result};
pub use linalg::{kernel, solve_linear, LinearSolution, QMat, QVec};
pub use lp::{farkas_solve, verify_farkas, Farkas};
pub use rational::{rat_arith, Rat, RatOp, RatOutcome};
