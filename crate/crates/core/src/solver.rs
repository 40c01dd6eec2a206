//! Grid discretization of the cyclic operator and Picard iteration.
//!
//! For `u1` on a uniform grid over `[eps, 1]`, the operator folds
//! `w <- int Xi(., t) l(t) g_i(w(t)) dt` for `i = n, n-1, ..., 1`, with the
//! integral replaced by the trapezoid rule against a precomputed kernel matrix.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::grid::{trapezoid_weights, uniform_nodes, GridError, GridFunction};
use crate::kernel::KernelError;
use crate::weights::{kelvin_s, TransformSpec, WeightError, WeightModel};

pub const MIN_GRID: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("weight at t = {t}: {source}")]
    Weight { t: f64, source: WeightError },
    #[error("layer {layer}: g_{layer}({u}): {error}")]
    Eval {
        layer: usize,
        u: f64,
        error: EvalError,
    },
    #[error("layer {layer} produced a non-finite value")]
    NonFinite { layer: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("no convergence after {} iterations (last d = {})", .0.iterates, .0.last_d())]
    NonConvergence(Box<SolveTrace>),
    #[error("iteration diverges: d grew from {from} to {to} over 5 steps")]
    Divergence {
        from: f64,
        to: f64,
        trace: Box<SolveTrace>,
    },
    #[error("cyclic closure residual {residual} exceeds {limit}")]
    Closure { residual: f64, limit: f64 },
    #[error("radius {r} maps to s = {s} outside [{eps}, 1]")]
    RadialDomain { r: f64, s: f64, eps: f64 },
}

/// The cyclic system `-u_i'' + r0^2 u_i = l(t) g_i(u_{i+1})`, `u_{n+1} = u_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub g: Vec<Expr>,
    pub model: WeightModel,
    pub grid_size: usize,
    pub cutoff: f64,
    /// Exponent of the integral metric recorded alongside the sup metric.
    pub rho_p: f64,
}

impl ProblemSpec {
    pub fn new(
        g: Vec<Expr>,
        model: WeightModel,
        grid_size: usize,
        cutoff: f64,
        rho_p: f64,
    ) -> Result<Self, SolverError> {
        let spec = ProblemSpec {
            g,
            model,
            grid_size,
            cutoff,
            rho_p,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.g.is_empty() {
            return Err(SolverError::Invalid("at least one equation is required".into()));
        }
        if self.grid_size < MIN_GRID {
            return Err(SolverError::Invalid(format!(
                "grid size {} is below {MIN_GRID}",
                self.grid_size
            )));
        }
        if !(self.cutoff >= 0.0 && self.cutoff < 1.0) {
            return Err(SolverError::Invalid(format!("cutoff {} must lie in [0, 1)", self.cutoff)));
        }
        if !(self.rho_p >= 1.0) {
            return Err(SolverError::Invalid(format!("metric exponent {} must be >= 1", self.rho_p)));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn zero(&self) -> GridFunction {
        self.constant(0.0)
    }

    pub fn constant(&self, c: f64) -> GridFunction {
        GridFunction::constant(self.cutoff, 1.0, self.grid_size, c)
            .expect("validated grid parameters")
    }

    fn weight_values(&self, nodes: &[f64]) -> Result<Vec<f64>, SolverError> {
        nodes
            .iter()
            .map(|&t| {
                let v = self
                    .model
                    .ell(t)
                    .map_err(|source| SolverError::Weight { t, source })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(SolverError::Weight {
                        t,
                        source: WeightError::Invalid(format!("weight is {v}")),
                    })
                }
            })
            .collect()
    }
}

/// Kernel matrix with the trapezoid weights and `l` folded into its columns.
#[derive(Debug, Clone)]
pub struct Operator {
    spec: ProblemSpec,
    nodes: Vec<f64>,
    matrix: Vec<f64>,
}

impl Operator {
    pub fn new(spec: &ProblemSpec) -> Result<Self, SolverError> {
        spec.validate()?;
        spec.model.kernel.validate()?;
        let m = spec.grid_size;
        let nodes = uniform_nodes(spec.cutoff, 1.0, m);
        let ell = spec.weight_values(&nodes)?;
        let w = trapezoid_weights(spec.cutoff, 1.0, m);
        let mut matrix = spec.model.kernel.matrix(&nodes);
        for row in matrix.chunks_mut(m) {
            for (j, x) in row.iter_mut().enumerate() {
                *x *= w[j] * ell[j];
            }
        }
        Ok(Operator {
            spec: spec.clone(),
            nodes,
            matrix,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// One layer `int Xi(., t) l(t) g_layer(w(t)) dt`, `layer` counted from 1.
    pub fn layer(&self, layer: usize, w: &GridFunction) -> Result<GridFunction, SolverError> {
        let m = self.nodes.len();
        let g = &self.spec.g[layer - 1];
        let gw = w
            .values()
            .iter()
            .map(|&u| g.eval(u).map_err(|error| SolverError::Eval { layer, u, error }))
            .collect::<Result<Vec<_>, _>>()?;
        let out: Vec<f64> = self
            .matrix
            .chunks(m)
            .map(|row| row.iter().zip(&gw).map(|(a, b)| a * b).sum())
            .collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { layer });
        }
        Ok(GridFunction::new(self.spec.cutoff, 1.0, out)?)
    }

    fn check_grid(&self, u: &GridFunction) -> Result<(), SolverError> {
        let reference = GridFunction::constant(self.spec.cutoff, 1.0, self.nodes.len(), 0.0)?;
        reference.same_grid(u)?;
        Ok(())
    }

    pub fn apply(&self, u1: &GridFunction) -> Result<GridFunction, SolverError> {
        self.check_grid(u1)?;
        let mut w = u1.clone();
        for layer in (1..=self.spec.n()).rev() {
            w = self.layer(layer, &w)?;
        }
        Ok(w)
    }

    /// `(u_1, ..., u_n)` built from `u_1` as `u_n`, `u_{n-1}`, ..., `u_1`.
    /// The re-derived `u_1` replaces the input.
    pub fn components(&self, u1: &GridFunction) -> Result<Vec<GridFunction>, SolverError> {
        self.check_grid(u1)?;
        let n = self.spec.n();
        let mut out = vec![u1.clone(); n];
        let mut w = u1.clone();
        for layer in (1..=n).rev() {
            w = self.layer(layer, &w)?;
            out[layer - 1] = w.clone();
        }
        Ok(out)
    }
}

pub fn apply_operator(spec: &ProblemSpec, u1: &GridFunction) -> Result<GridFunction, SolverError> {
    Operator::new(spec)?.apply(u1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveTrace {
    pub iterates: usize,
    /// `d(u_k, u_{k+1})`, sup over grid nodes
    pub d_history: Vec<f64>,
    /// trapezoid `L^p` distance with `p = rho_p`
    pub rho_history: Vec<f64>,
    pub rho_p: f64,
    pub empirical_ratio: Option<f64>,
    pub converged: bool,
    pub tolerance: f64,
}

impl SolveTrace {
    pub fn last_d(&self) -> f64 {
        self.d_history.last().copied().unwrap_or(f64::NAN)
    }
}

const RATIO_TAIL: usize = 5;

/// Geometric mean of `d_{k+1} / d_k` over the last few steps; needs three steps.
pub fn empirical_ratio(d: &[f64]) -> Option<f64> {
    if d.len() < 3 {
        return None;
    }
    let tail = &d[d.len().saturating_sub(RATIO_TAIL + 1)..];
    let first = tail[0];
    let last = tail[tail.len() - 1];
    if first == 0.0 || last == 0.0 {
        return Some(0.0);
    }
    Some((last / first).powf(1.0 / (tail.len() - 1) as f64))
}

/// Iterate `u <- A u` from `init` until `d(u_k, u_{k+1}) <= tol`; returns `u_k`.
pub fn picard_solve(
    spec: &ProblemSpec,
    init: &GridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<(GridFunction, SolveTrace), SolverError> {
    picard_with(&Operator::new(spec)?, init, tol, max_iter)
}

pub fn picard_with(
    op: &Operator,
    init: &GridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<(GridFunction, SolveTrace), SolverError> {
    if !(tol > 0.0) {
        return Err(SolverError::Invalid(format!("tolerance {tol} must be positive")));
    }
    if init.values().iter().any(|v| !v.is_finite()) {
        return Err(SolverError::Invalid("initial guess is not finite".into()));
    }
    let rho_p = op.spec.rho_p;
    let mut trace = SolveTrace {
        iterates: 0,
        d_history: Vec::new(),
        rho_history: Vec::new(),
        rho_p,
        empirical_ratio: None,
        converged: false,
        tolerance: tol,
    };
    let mut u = init.clone();
    op.check_grid(&u)?;
    for k in 0..max_iter {
        let next = op.apply(&u)?;
        let d = u.sup_distance(&next)?;
        let rho = u.lp_distance(&next, rho_p)?;
        trace.d_history.push(d);
        trace.rho_history.push(rho);
        trace.iterates = k;
        trace.empirical_ratio = empirical_ratio(&trace.d_history);
        if d <= tol {
            trace.converged = true;
            return Ok((u, trace));
        }
        let h = &trace.d_history;
        if h.len() > 5 && h[h.len() - 1] > 10.0 * h[h.len() - 6] {
            return Err(SolverError::Divergence {
                from: h[h.len() - 6],
                to: h[h.len() - 1],
                trace: Box::new(trace),
            });
        }
        u = next;
    }
    trace.iterates = max_iter;
    Err(SolverError::NonConvergence(Box::new(trace)))
}

/// Components of the tuple with `u_1` as given; fails if the cyclic closure
/// (re-derived `u_1` versus input) is off by more than `10 tol`.
pub fn recover_components(
    spec: &ProblemSpec,
    u1: &GridFunction,
    tol: f64,
) -> Result<Vec<GridFunction>, SolverError> {
    let op = Operator::new(spec)?;
    let mut comps = op.components(u1)?;
    let residual = comps[0].sup_distance(u1)?;
    let limit = 10.0 * tol;
    if residual > limit {
        return Err(SolverError::Closure { residual, limit });
    }
    comps[0] = u1.clone();
    Ok(comps)
}

/// `max_i max_k |D^2 u_i - r0^2 u_i + l g_i(u_{i+1})|` over interior nodes.
pub fn residual_check(spec: &ProblemSpec, components: &[GridFunction]) -> Result<f64, SolverError> {
    let n = spec.n();
    if components.len() != n {
        return Err(SolverError::Invalid(format!(
            "expected {n} components, got {}",
            components.len()
        )));
    }
    for c in &components[1..] {
        components[0].same_grid(c)?;
    }
    let grid = &components[0];
    let m = grid.len();
    if m < 3 {
        return Ok(0.0);
    }
    let h = grid.step();
    let r2 = spec.model.kernel.r0 * spec.model.kernel.r0;
    let nodes = grid.nodes();
    let ell = spec.weight_values(&nodes[1..m - 1])?;
    let mut worst = 0.0f64;
    for i in 0..n {
        let u = components[i].values();
        let next = components[(i + 1) % n].values();
        for k in 1..m - 1 {
            let d2 = (u[k - 1] - 2.0 * u[k] + u[k + 1]) / (h * h);
            let g = spec.g[i].eval(next[k]).map_err(|error| SolverError::Eval {
                layer: i + 1,
                u: next[k],
                error,
            })?;
            worst = worst.max((d2 - r2 * u[k] + ell[k - 1] * g).abs());
        }
    }
    Ok(worst)
}

/// Rows `(r, u_1(s(r)), ..., u_n(s(r)))` with `s = (r/r0)^(2-N)`.
pub fn radial_profile(
    components: &[GridFunction],
    ts: &TransformSpec,
    r_grid: &[f64],
) -> Result<Vec<Vec<f64>>, SolverError> {
    let Some(first) = components.first() else {
        return Ok(Vec::new());
    };
    let eps = first.start();
    r_grid
        .iter()
        .map(|&r| {
            let s = kelvin_s(r, ts).map_err(|source| SolverError::Weight { t: r, source })?;
            let s = if (s - 1.0).abs() <= 1e-14 { 1.0 } else { s };
            if !(s >= eps && s <= 1.0) {
                return Err(SolverError::RadialDomain { r, s, eps });
            }
            let mut row = Vec::with_capacity(components.len() + 1);
            row.push(r);
            for c in components {
                row.push(c.interpolate(s)?);
            }
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartResult {
    pub level: f64,
    pub converged: bool,
    pub iterates: usize,
    pub sup_norm: Option<f64>,
    /// Index into the list of distinct fixed points.
    pub solution: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Multistart {
    pub starts: Vec<StartResult>,
    pub solutions: Vec<GridFunction>,
}

/// Picard runs from constant initial levels; fixed points closer than
/// `10 tol` in the sup metric are merged.
pub fn multistart(
    spec: &ProblemSpec,
    levels: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Multistart, SolverError> {
    let op = Operator::new(spec)?;
    let mut starts = Vec::new();
    let mut solutions: Vec<GridFunction> = Vec::new();
    for &level in levels {
        let init = spec.constant(level);
        match picard_with(&op, &init, tol, max_iter) {
            Ok((u, trace)) => {
                let mut idx = None;
                for (i, s) in solutions.iter().enumerate() {
                    if s.sup_distance(&u)? <= 10.0 * tol {
                        idx = Some(i);
                        break;
                    }
                }
                let idx = match idx {
                    Some(i) => i,
                    None => {
                        solutions.push(u.clone());
                        solutions.len() - 1
                    }
                };
                starts.push(StartResult {
                    level,
                    converged: true,
                    iterates: trace.iterates,
                    sup_norm: Some(u.sup_norm()),
                    solution: Some(idx),
                    error: None,
                });
            }
            Err(e) => {
                let iterates = match &e {
                    SolverError::NonConvergence(t) => t.iterates,
                    SolverError::Divergence { trace, .. } => trace.iterates,
                    _ => 0,
                };
                starts.push(StartResult {
                    level,
                    converged: false,
                    iterates,
                    sup_norm: None,
                    solution: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    Ok(Multistart { starts, solutions })
}
