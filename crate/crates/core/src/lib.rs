//! Numerics for the Leray-Hardy operator `L_μ = -Δ + μ/|x|²` on balls and
//! annuli in `R^N`, restricted to radial data.
//!
//! * [`params`]: indicial exponents, fundamental solutions, barrier, cutoff.
//! * [`grid`]: graded radial meshes, weights, sampled profiles.
//! * [`operator`]: direct and dual solvers, Dirac problem, weak identities.
//! * [`green`]: mode-0 Green functions and potentials of radial measures.
//! * [`norms`]: weighted Lebesgue, Sobolev and Marcinkiewicz norms.
//! * [`verify`]: experiment suites checking the estimates numerically.

// Argument checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod green;
pub mod norms;
pub mod grid;
pub mod operator;
pub mod params;
pub mod quadrature;
pub mod tridiag;
pub mod verify;

pub use error::{HardyError, Result};
pub use grid::{build_mesh, Interpolation, IntervalSet, RadialFunction, RadialMesh, RadialWeight, WeightKind};
pub use operator::{
    assemble, radial_apply, solve, solve_dirac, solve_direct, solve_dual, weak_identity_defect, DirichletProblem,
    Flux, OperatorKind, SolveResult, Source,
};
pub use params::{exponents, s_k, Barrier, Cutoff, DerivedExponents, HardyParams, TruncationLevel};
