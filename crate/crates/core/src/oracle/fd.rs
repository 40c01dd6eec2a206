//! Central differences for `-u'' + r0^2 u = f` on `[0, 1]` with
//! `alpha u(0) - beta u'(0) = 0` and `gamma u(1) + delta u'(1) = 0`.
//!
//! Robin rows use a ghost node eliminated through the centred boundary
//! derivative, then halved so the matrix is symmetric. A zero `beta` (or
//! `delta`) turns the row into a Dirichlet row.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdError {
    #[error("finite-difference grid needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("invalid boundary data: {0}")]
    Invalid(String),
    #[error("singular finite-difference system (zero pivot at row {row})")]
    Singular { row: usize },
}

pub const MIN_NODES: usize = 16;

/// Coefficients of the linear two-point problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinProblem {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub r0: f64,
}

/// `lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1] = rhs[i]`;
/// `lower[0]` and `upper[m-1]` are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl Tridiagonal {
    /// `|diag| - |lower| - |upper|` per row.
    pub fn dominance_margins(&self) -> Vec<f64> {
        let m = self.diag.len();
        (0..m)
            .map(|i| {
                let l = if i > 0 { self.lower[i].abs() } else { 0.0 };
                let u = if i + 1 < m { self.upper[i].abs() } else { 0.0 };
                self.diag[i].abs() - l - u
            })
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (1..self.diag.len()).all(|i| self.lower[i] == self.upper[i - 1])
    }

    /// Thomas algorithm.
    pub fn solve(&self) -> Result<Vec<f64>, FdError> {
        let m = self.diag.len();
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut denom = self.diag[0];
        if denom == 0.0 {
            return Err(FdError::Singular { row: 0 });
        }
        c[0] = self.upper[0] / denom;
        d[0] = self.rhs[0] / denom;
        for i in 1..m {
            denom = self.diag[i] - self.lower[i] * c[i - 1];
            if denom == 0.0 || !denom.is_finite() {
                return Err(FdError::Singular { row: i });
            }
            c[i] = if i + 1 < m { self.upper[i] / denom } else { 0.0 };
            d[i] = (self.rhs[i] - self.lower[i] * d[i - 1]) / denom;
        }
        let mut u = d;
        for i in (0..m - 1).rev() {
            u[i] -= c[i] * u[i + 1];
        }
        Ok(u)
    }
}

impl RobinProblem {
    pub fn validate(&self) -> Result<(), FdError> {
        let all = [self.alpha, self.beta, self.gamma, self.delta];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(FdError::Invalid("boundary weights must be finite and nonnegative".into()));
        }
        if !(self.r0.is_finite() && self.r0 > 0.0) {
            return Err(FdError::Invalid(format!("r0 = {} must be positive", self.r0)));
        }
        if self.alpha + self.beta == 0.0 || self.gamma + self.delta == 0.0 {
            return Err(FdError::Invalid("a boundary condition is vacuous".into()));
        }
        Ok(())
    }

    /// System for the right-hand side sampled at `i / (m - 1)`.
    pub fn assemble(&self, f: &[f64]) -> Result<Tridiagonal, FdError> {
        self.validate()?;
        let m = f.len();
        if m < MIN_NODES {
            return Err(FdError::TooFewNodes {
                min: MIN_NODES,
                got: m,
            });
        }
        let h = 1.0 / (m - 1) as f64;
        let ih2 = 1.0 / (h * h);
        let r2 = self.r0 * self.r0;
        let mut lower = vec![-ih2; m];
        let mut diag = vec![2.0 * ih2 + r2; m];
        let mut upper = vec![-ih2; m];
        let mut rhs = f.to_vec();
        lower[0] = 0.0;
        upper[m - 1] = 0.0;

        if self.beta == 0.0 {
            diag[0] = 1.0;
            upper[0] = 0.0;
            rhs[0] = 0.0;
            lower[1] = 0.0;
        } else {
            diag[0] = (1.0 + h * self.alpha / self.beta) * ih2 + 0.5 * r2;
            rhs[0] = 0.5 * f[0];
        }
        if self.delta == 0.0 {
            diag[m - 1] = 1.0;
            lower[m - 1] = 0.0;
            rhs[m - 1] = 0.0;
            upper[m - 2] = 0.0;
        } else {
            diag[m - 1] = (1.0 + h * self.gamma / self.delta) * ih2 + 0.5 * r2;
            rhs[m - 1] = 0.5 * f[m - 1];
        }
        Ok(Tridiagonal {
            lower,
            diag,
            upper,
            rhs,
        })
    }

    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>, FdError> {
        self.assemble(f)?.solve()
    }
}
