//! Radial positive solutions of iterative elliptic systems on an annulus,
//! reduced by a Kelvin-type change of variables to a cyclic two-point
//! boundary value system on `[0, 1]`.
//!
//! The crate evaluates the Green's kernel and its cone constant, builds the
//! transformed weight, computes the existence and uniqueness constants with
//! explicit divergence reporting, checks hypothesis windows for concrete
//! nonlinearities and solves the system by Picard iteration. A
//! finite-difference solver that never touches the kernel is provided as an
//! independent reference.

pub mod conditions;
pub mod expr;
pub mod grid;
pub mod kernel;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod weights;

pub use expr::Expr;
pub use grid::GridFunction;
pub use kernel::{verify_kernel_bounds, BoundReport, KernelParams};
pub use quadrature::{IntegralResult, Status};
pub use weights::{TransformSpec, WeightModel, WeightSpec};
