//! Kelvin-type change of variables `s = (r / r0)^(2 - N)` and the transformed
//! weight `l(s) = r0^2 / (N - 2)^2 * s^(2 (N - 1) / (2 - N)) * prod l_i(r0 s^(1 / (2 - N)))`.
//!
//! A weight is the product of three parts: the amplitude `A = r0^2 / (N - 2)^2`,
//! the singular power `P(s)` and the factor product `F(s)`. In synthetic mode a
//! directly supplied `omega(s)` takes the place of `P`, with `A = F = 1`.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::kernel::{KernelError, KernelParams};
use crate::quadrature::{fit_power_law, ExponentFit};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("invalid weight specification: {0}")]
    Invalid(String),
    #[error("weight factor {index} ({source_text}): {error}")]
    Factor {
        index: usize,
        source_text: String,
        error: EvalError,
    },
    #[error("synthetic weight ({source_text}): {error}")]
    Synthetic { source_text: String, error: EvalError },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Radial scale and dimension of the change of variables. `R1`, `R2` are kept
/// for radial reporting only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformSpec {
    pub r0: f64,
    #[serde(rename = "N")]
    pub dim: u32,
    #[serde(rename = "R1")]
    pub r1: Option<f64>,
    #[serde(rename = "R2")]
    pub r2: Option<f64>,
}

impl TransformSpec {
    pub fn new(r0: f64, dim: u32, r1: Option<f64>, r2: Option<f64>) -> Result<Self, WeightError> {
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(WeightError::Invalid(format!("r0 = {r0} must be positive")));
        }
        if dim < 3 {
            return Err(WeightError::Invalid(format!("N = {dim} must be at least 3")));
        }
        match (r1, r2) {
            (None, None) => {}
            (Some(a), Some(b)) if a > 0.0 && a < b && b.is_finite() => {}
            _ => {
                return Err(WeightError::Invalid(format!(
                    "annulus radii R1 = {r1:?}, R2 = {r2:?} must satisfy 0 < R1 < R2"
                )))
            }
        }
        Ok(TransformSpec { r0, dim, r1, r2 })
    }

    pub fn from_kernel(params: &KernelParams) -> Self {
        TransformSpec {
            r0: params.r0,
            dim: params.dim,
            r1: None,
            r2: None,
        }
    }

    /// `2 - N`
    pub fn kelvin_exponent(&self) -> f64 {
        2.0 - self.dim as f64
    }

    /// `2 (N - 1) / (2 - N)`
    pub fn power_exponent(&self) -> f64 {
        2.0 * (self.dim as f64 - 1.0) / self.kelvin_exponent()
    }

    /// `r0^2 / (N - 2)^2`
    pub fn amplitude(&self) -> f64 {
        let d = self.dim as f64 - 2.0;
        self.r0 * self.r0 / (d * d)
    }
}

pub fn kelvin_s(r: f64, ts: &TransformSpec) -> Result<f64, WeightError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(WeightError::Domain {
            what: "r",
            value: r,
            domain: "(0, inf)",
        });
    }
    Ok((r / ts.r0).powf(ts.kelvin_exponent()))
}

pub fn kelvin_r(s: f64, ts: &TransformSpec) -> Result<f64, WeightError> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(WeightError::Domain {
            what: "s",
            value: s,
            domain: "(0, 1]",
        });
    }
    Ok(ts.r0 * s.powf(1.0 / ts.kelvin_exponent()))
}

/// Factor list with summability exponents and optional uniform lower bounds,
/// or a synthetic weight replacing the whole construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSpec {
    factors: Vec<Expr>,
    p_exponents: Vec<f64>,
    lower_bounds: Option<Vec<f64>>,
    synthetic: Option<Expr>,
}

impl WeightSpec {
    pub fn new(
        factors: Vec<Expr>,
        p_exponents: Vec<f64>,
        lower_bounds: Option<Vec<f64>>,
    ) -> Result<Self, WeightError> {
        if factors.is_empty() {
            return Err(WeightError::Invalid("at least one weight factor is required".into()));
        }
        if p_exponents.len() != factors.len() {
            return Err(WeightError::Invalid(format!(
                "{} factors but {} exponents",
                factors.len(),
                p_exponents.len()
            )));
        }
        if let Some(p) = p_exponents.iter().find(|p| !(**p >= 1.0)) {
            return Err(WeightError::Invalid(format!("exponent p = {p} must be at least 1")));
        }
        if let Some(lb) = &lower_bounds {
            if lb.len() != factors.len() {
                return Err(WeightError::Invalid(format!(
                    "{} factors but {} lower bounds",
                    factors.len(),
                    lb.len()
                )));
            }
            if let Some(b) = lb.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
                return Err(WeightError::Invalid(format!("lower bound {b} must be positive")));
            }
        }
        Ok(WeightSpec {
            factors,
            p_exponents,
            lower_bounds,
            synthetic: None,
        })
    }

    pub fn synthetic(omega: Expr) -> Self {
        WeightSpec {
            factors: Vec::new(),
            p_exponents: Vec::new(),
            lower_bounds: None,
            synthetic: Some(omega),
        }
    }

    pub fn factors(&self) -> &[Expr] {
        &self.factors
    }

    pub fn p_exponents(&self) -> &[f64] {
        &self.p_exponents
    }

    pub fn lower_bounds(&self) -> Option<&[f64]> {
        self.lower_bounds.as_deref()
    }

    pub fn synthetic_weight(&self) -> Option<&Expr> {
        self.synthetic.as_ref()
    }

    pub fn is_synthetic(&self) -> bool {
        self.synthetic.is_some()
    }
}

pub const EXPONENT_CUTOFFS: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

/// Kernel, weight specification and transform bundled for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightModel {
    pub kernel: KernelParams,
    pub weights: WeightSpec,
    pub transform: TransformSpec,
}

impl WeightModel {
    pub fn new(
        kernel: KernelParams,
        weights: WeightSpec,
        transform: TransformSpec,
    ) -> Result<Self, WeightError> {
        kernel.validate()?;
        if kernel.r0 != transform.r0 || kernel.dim != transform.dim {
            return Err(WeightError::Invalid(format!(
                "kernel (r0 = {}, N = {}) and transform (r0 = {}, N = {}) disagree",
                kernel.r0, kernel.dim, transform.r0, transform.dim
            )));
        }
        Ok(WeightModel {
            kernel,
            weights,
            transform,
        })
    }

    /// Synthetic model with weight `omega` over the given kernel.
    pub fn synthetic(kernel: KernelParams, omega: Expr) -> Result<Self, WeightError> {
        let ts = TransformSpec::from_kernel(&kernel);
        WeightModel::new(kernel, WeightSpec::synthetic(omega), ts)
    }

    pub fn is_synthetic(&self) -> bool {
        self.weights.is_synthetic()
    }

    /// `A`; equal to 1 in synthetic mode.
    pub fn amplitude(&self) -> f64 {
        if self.is_synthetic() {
            1.0
        } else {
            self.transform.amplitude()
        }
    }

    fn check_open(t: f64) -> Result<(), WeightError> {
        if t > 0.0 && t <= 1.0 {
            Ok(())
        } else {
            Err(WeightError::Domain {
                what: "t",
                value: t,
                domain: "(0, 1]",
            })
        }
    }

    /// `P(t)`: `t^(2 (N - 1) / (2 - N))`, or `omega(t)` in synthetic mode.
    pub fn power(&self, t: f64) -> Result<f64, WeightError> {
        match &self.weights.synthetic {
            Some(omega) => {
                if !(0.0..=1.0).contains(&t) {
                    return Err(WeightError::Domain {
                        what: "t",
                        value: t,
                        domain: "[0, 1]",
                    });
                }
                omega.eval(t).map_err(|error| WeightError::Synthetic {
                    source_text: omega.source().to_string(),
                    error,
                })
            }
            None => {
                Self::check_open(t)?;
                Ok(t.powf(self.transform.power_exponent()))
            }
        }
    }

    /// Raw factor `l_i(x)` evaluated at a radial argument `x`.
    pub fn raw_factor(&self, index: usize, x: f64) -> Result<f64, WeightError> {
        let e = &self.weights.factors[index];
        e.eval(x).map_err(|error| WeightError::Factor {
            index,
            source_text: e.source().to_string(),
            error,
        })
    }

    /// Transformed factor `l_i(r0 t^(1 / (2 - N)))`.
    pub fn transformed_factor(&self, index: usize, t: f64) -> Result<f64, WeightError> {
        let r = kelvin_r(t, &self.transform)?;
        self.raw_factor(index, r)
    }

    /// `F(t)`: product of the transformed factors, 1 in synthetic mode.
    pub fn factor_product(&self, t: f64) -> Result<f64, WeightError> {
        if self.is_synthetic() {
            return Ok(1.0);
        }
        let mut prod = 1.0;
        for i in 0..self.weights.factors.len() {
            prod *= self.transformed_factor(i, t)?;
        }
        Ok(prod)
    }

    /// `l(t) = A P(t) F(t)`
    pub fn ell(&self, t: f64) -> Result<f64, WeightError> {
        Ok(self.amplitude() * self.power(t)? * self.factor_product(t)?)
    }

    /// `Xi(t, t) P(t)`
    pub fn xi_hat(&self, t: f64) -> Result<f64, WeightError> {
        Ok(self.kernel.diagonal(t) * self.power(t)?)
    }

    /// `Xi(t, t) P(t) F(t)`
    pub fn upsilon(&self, t: f64) -> Result<f64, WeightError> {
        Ok(self.xi_hat(t)? * self.factor_product(t)?)
    }

    /// Exponent `e` with `Upsilon(t) ~ c t^e` as `t -> 0+`, fitted on `cutoffs`.
    pub fn singularity_exponent(&self, cutoffs: &[f64]) -> Result<ExponentFit, WeightError> {
        let points = cutoffs
            .iter()
            .map(|&t| Ok((t, self.upsilon(t)?)))
            .collect::<Result<Vec<_>, WeightError>>()?;
        fit_power_law(&points).ok_or_else(|| {
            WeightError::Invalid("Upsilon vanishes on the cutoff sequence, no exponent".into())
        })
    }

    /// Numerical infimum of each transformed factor over `[cutoff, 1]`.
    pub fn factor_infima(&self, cutoff: f64) -> Result<Vec<f64>, WeightError> {
        let samples = extremum_samples(cutoff, 1.0, 2000);
        (0..self.weights.factors.len())
            .map(|i| {
                let mut inf = f64::INFINITY;
                for &t in &samples {
                    inf = inf.min(self.transformed_factor(i, t)?);
                }
                Ok(inf)
            })
            .collect()
    }

    /// `prod l_i*`: configured lower bounds if present, else the computed infima
    /// on `[cutoff, 1]`. Empty product (synthetic mode) is 1.
    pub fn lower_bound_product(&self, cutoff: f64) -> Result<f64, WeightError> {
        if let Some(lb) = self.weights.lower_bounds() {
            return Ok(lb.iter().product());
        }
        Ok(self.factor_infima(cutoff)?.iter().product())
    }
}

/// Uniform and logarithmic samples of `[a, b]`, merged and sorted.
pub(crate) fn extremum_samples(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect();
    if a > 0.0 && b / a > 100.0 {
        let (la, lb) = (a.ln(), b.ln());
        out.extend((0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()));
    }
    out.push(b);
    out.retain(|x| *x >= a && *x <= b);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
