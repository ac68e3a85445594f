//! Optimal simple counterfeiting attacks on Wiesner-style quantum money.
//!
//! The crate builds the cloning semidefinite program for a money scheme,
//! solves it with a primal-dual interior-point method, checks the resulting
//! primal/dual pair as an optimality certificate, and composes single-qubit
//! results into bounds for parallel repetition and threshold verification.
//! A Monte Carlo simulator replays the attacks against the verifier.

pub mod certificates;
pub mod channels;
pub mod cloners;
pub mod composition;
pub mod error;
pub mod io;
pub mod linalg;
pub mod random;
pub mod schemes;
pub mod sdp;
pub mod simulator;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, FactoredDims, HermitianOperator, StateVector, C64};
pub use sdp::{solve, solve_with, CloningSdp, SdpSolution, SolverOptions};
