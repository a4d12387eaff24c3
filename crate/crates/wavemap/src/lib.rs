//! Finite-difference evolution of spherically equivariant 2+1 wave maps
//! into the round two-sphere.
//!
//! The radial profile `chi(r, t)` obeys
//! `chi_tt = chi_rr + chi_r / r - k^2 sin(2 chi) / (2 r^2)` with
//! `chi(0, t) = 0`. The crate provides the iterative Crank-Nicholson
//! integrator, energy and self-convergence diagnostics, blow-up detection,
//! static-profile fitting, and bisection for the critical pulse amplitude,
//! plus a CLI that drives the standard experiments and writes CSV output.

pub mod cli;
pub mod criticality;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod state;

pub use error::{Error, Result};
