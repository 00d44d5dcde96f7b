//! Analysis toolkit for smooth two-player zero-sum continuous games.
//!
//! A zero-sum game is described by a single cost function `f(x1, x2)`:
//! player 1 minimizes `f` over its block `x1`, player 2 maximizes `f`
//! over `x2`. The central object is the differential game form
//! `omega(x) = (D1 f(x), -D2 f(x))`, whose zeros are the game's critical
//! points, and its Jacobian `D omega`, whose block structure and spectrum
//! decide whether a critical point is a (differential) Nash equilibrium,
//! whether it is isolated, and how gradient-play behaves near it.
//!
//! Modules:
//! - [`games`]: cost-function families and exact first/second derivatives
//!   via truncated Taylor (forward-mode) arithmetic.
//! - [`gameform`]: `omega`, the game Jacobian, the full Hessian, and the
//!   sign matrix relating them.
//! - [`spectra`]: dense kernels for small matrices (LU, determinant,
//!   nonsymmetric eigenvalues, symmetric definiteness).
//! - [`classify`]: critical-point taxonomy and damped-Newton root finding.
//! - [`dynamics`]: discrete gradient-play and the continuous flow.
//! - [`perturb`]: equilibrium continuation under cost perturbations and
//!   random-game sampling statistics.

pub mod classify;
pub mod dynamics;
pub mod gameform;
pub mod games;
pub mod linalg;
pub mod parallel;
pub mod perturb;
pub mod rng;
pub mod spectra;

pub use games::{BlockDims, GameDefinition, JointPoint};
