//! Reference solutions for the linear problem `-u'' + r0^2 u = f`.
//!
//! [`fd`] is a self-contained finite-difference solver. [`green_consistency`]
//! compares it with quadrature of the kernel representation.

pub mod fd;

use thiserror::Error;

use crate::grid::{GridError, GridFunction};
use crate::kernel::KernelParams;
use crate::quadrature::{integrate_interval, QuadError};

pub use fd::{FdError, RobinProblem, Tridiagonal};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Fd(#[from] FdError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("right-hand side must live on [0, 1], got [{a}, {b}]")]
    Domain { a: f64, b: f64 },
}

impl From<&KernelParams> for RobinProblem {
    fn from(p: &KernelParams) -> Self {
        RobinProblem {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            delta: p.delta,
            r0: p.r0,
        }
    }
}

/// Linear boundary value problem with a sampled right-hand side on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBvp {
    pub problem: RobinProblem,
    pub rhs: GridFunction,
}

impl LinearBvp {
    pub fn new(params: &KernelParams, rhs: GridFunction) -> Result<Self, OracleError> {
        if rhs.start() != 0.0 || rhs.end() != 1.0 {
            return Err(OracleError::Domain {
                a: rhs.start(),
                b: rhs.end(),
            });
        }
        Ok(LinearBvp {
            problem: params.into(),
            rhs,
        })
    }

    pub fn from_fn(
        params: &KernelParams,
        m: usize,
        f: impl FnMut(f64) -> f64,
    ) -> Result<Self, OracleError> {
        LinearBvp::new(params, GridFunction::from_fn(0.0, 1.0, m, f)?)
    }
}

pub fn solve_linear_fd(bvp: &LinearBvp) -> Result<GridFunction, OracleError> {
    let u = bvp.problem.solve(bvp.rhs.values())?;
    Ok(GridFunction::new(0.0, 1.0, u)?)
}

/// `int_0^1 Xi(s, t) f(t) dt`, split at the kink `t = s`.
pub fn green_integral(
    params: &KernelParams,
    f: &impl Fn(f64) -> f64,
    s: f64,
    tol: f64,
) -> Result<f64, OracleError> {
    let g = |t: f64| Ok::<f64, std::convert::Infallible>(params.eval_unchecked(s, t) * f(t));
    let (left, _) = integrate_interval(g, 0.0, s, tol, 1e-14)?;
    let (right, _) = integrate_interval(g, s, 1.0, tol, 1e-14)?;
    Ok(left + right)
}

/// `max_i |u_fd(s_i) - int_0^1 Xi(s_i, t) f(t) dt|` on the `m`-point grid.
pub fn green_consistency(
    params: &KernelParams,
    f: impl Fn(f64) -> f64,
    m: usize,
) -> Result<f64, OracleError> {
    params
        .validate()
        .map_err(|e| FdError::Invalid(e.to_string()))?;
    let bvp = LinearBvp::from_fn(params, m, &f)?;
    let u = solve_linear_fd(&bvp)?;
    let mut worst = 0.0f64;
    for (i, &v) in u.values().iter().enumerate() {
        let q = green_integral(params, &f, u.node(i), 1e-13)?;
        worst = worst.max((v - q).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_rhs_is_consistent() {
        assert_eq!(green_consistency(&KernelParams::unit(), |_| 0.0, 65).unwrap(), 0.0);
    }

    #[test]
    fn constant_rhs_converges_at_second_order() {
        let p = KernelParams::unit();
        let e1 = green_consistency(&p, |_| 1.0, 129).unwrap();
        let e2 = green_consistency(&p, |_| 1.0, 257).unwrap();
        let ratio = e1 / e2;
        assert!((3.0..=5.0).contains(&ratio), "{e1} {e2}");
    }

    #[test]
    fn sine_rhs_with_other_parameters() {
        let p = KernelParams::new(2.0, 0.5, 0.3, 1.7, 2.5, 3).unwrap();
        let e = green_consistency(&p, |t| (PI * t).sin(), 513).unwrap();
        assert!(e < 1e-4, "{e}");
    }

    #[test]
    fn rhs_must_cover_unit_interval() {
        let g = GridFunction::constant(0.1, 1.0, 20, 1.0).unwrap();
        assert!(LinearBvp::new(&KernelParams::unit(), g).is_err());
    }
}
