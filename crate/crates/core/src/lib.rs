//! Meshfree radial-basis-function collocation for PDEs of the form
//!
//! ```text
//! p(u)·q(u) + R(u) = f     in Ω
//! u = ū                    on Γ₁
//! ∂u/∂n = q̄                on Γ₂
//! ```
//!
//! where `p`, `q` and `R` are linear differential operators.
//!
//! Two solvers are provided:
//!
//! - [`dlm`]: the direct linearization method. The quadratic term is renamed
//!   `v = p(u)·q(u)` and treated as a second unknown field, which turns the
//!   problem into the linear equation `v + R(u) = f`. Both fields are expanded
//!   in radial kernels over two staggered point sets and the resulting block
//!   system is solved once (square or least squares).
//! - [`newton`]: the classical baseline, single-field collocation of the
//!   nonlinear equation solved by damped Newton iteration.
//!
//! The [`kernels`] module holds the classical kernels together with the
//! operator-derived families (exponentially augmented, high-order fundamental
//! solution, shape-parameter and operator-composed kernels). The [`bench`]
//! module contains manufactured benchmarks, convergence sweeps, CSV output and
//! the CLI.

pub mod bench;
pub mod dlm;
pub mod error;
pub mod expansion;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod newton;
pub mod operators;

pub use error::{Error, Result};
pub use expansion::{Expansion, PolynomialTail};
pub use geometry::{BoundaryPartition, CollocationSet, Domain, Face, Point, PointStrategy};
pub use kernels::{FundamentalKind, FundamentalSolution, KernelFamily, KernelParams, RadialKernel};
pub use operators::{EvalPoint, FieldJet, LinearOperator, ProblemSpec, ScalarField};
