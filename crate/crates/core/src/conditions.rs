//! Existence, multiplicity and uniqueness constants, and the hypothesis
//! windows they feed.
//!
//! Four building blocks cover every constant:
//!
//! | block        | definition                                   |
//! |--------------|----------------------------------------------|
//! | `lower`      | `wp A prod(l_i*) int_0^1 Xi_hat`             |
//! | `holder`     | `A ||Xi_hat||_q prod ||l_i||_{p_i}`          |
//! | `sup_p`      | `A ||Xi_hat||_inf prod ||l_i||_{p_i}`        |
//! | `sup_1`      | `A ||Xi_hat||_inf prod ||l_i||_1`            |
//!
//! `Q1 = 1/lower`, `Q2 = 1/holder`, `N2 = 1/sup_p`, `M2 = 1/sup_1`,
//! `k1 = lower`, `k2 = holder`, `k3 = sup_p`, `k4 = sup_1`,
//! `O1 = holder`, `O2 = lower`, `O3 = sup_p`, `O4 = sup_1`. The swapped
//! assignment `O1 = lower`, `O2 = holder` is carried as `O1_example`/`O2_example`.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::kernel::KernelError;
use crate::quadrature::{
    holder_conjugate_check, integrate, p_norm, IntegralResult, QuadError, Status,
};
use crate::weights::{extremum_samples, WeightError, WeightModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionsError {
    #[error("exponents are not Holder conjugate: sum 1/p_i + 1/q = {sum} (p = {p:?}, q = {q})")]
    NotConjugate { p: Vec<f64>, q: f64, sum: f64 },
    #[error("invalid window parameters: {0}")]
    Window(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("g_{index}({u}): {error}")]
    Eval {
        index: usize,
        u: f64,
        error: EvalError,
    },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ConstantId {
    Q1,
    Q2,
    N2,
    M2,
    K1,
    K2,
    K3,
    K4,
    O1,
    O2,
    O3,
    O4,
    O1Example,
    O2Example,
}

impl ConstantId {
    pub const ALL: [ConstantId; 14] = [
        ConstantId::Q1,
        ConstantId::Q2,
        ConstantId::N2,
        ConstantId::M2,
        ConstantId::K1,
        ConstantId::K2,
        ConstantId::K3,
        ConstantId::K4,
        ConstantId::O1,
        ConstantId::O2,
        ConstantId::O3,
        ConstantId::O4,
        ConstantId::O1Example,
        ConstantId::O2Example,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstantId::Q1 => "Q1",
            ConstantId::Q2 => "Q2",
            ConstantId::N2 => "N2",
            ConstantId::M2 => "M2",
            ConstantId::K1 => "k1",
            ConstantId::K2 => "k2",
            ConstantId::K3 => "k3",
            ConstantId::K4 => "k4",
            ConstantId::O1 => "O1",
            ConstantId::O2 => "O2",
            ConstantId::O3 => "O3",
            ConstantId::O4 => "O4",
            ConstantId::O1Example => "O1_example",
            ConstantId::O2Example => "O2_example",
        }
    }

    pub fn from_name(name: &str) -> Option<ConstantId> {
        ConstantId::ALL.into_iter().find(|c| c.name() == name)
    }

    fn block(self) -> (Block, bool) {
        use ConstantId::*;
        match self {
            Q1 => (Block::Lower, true),
            Q2 => (Block::Holder, true),
            N2 => (Block::SupP, true),
            M2 => (Block::Sup1, true),
            K1 | O2 | O1Example => (Block::Lower, false),
            K2 | O1 | O2Example => (Block::Holder, false),
            K3 | O3 => (Block::SupP, false),
            K4 | O4 => (Block::Sup1, false),
        }
    }

    fn index(self) -> usize {
        ConstantId::ALL.iter().position(|c| *c == self).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Lower,
    Holder,
    SupP,
    Sup1,
}

impl Block {
    fn formula(self) -> &'static str {
        match self {
            Block::Lower => "wp * A * prod(l_i*) * int_0^1 Xi_hat",
            Block::Holder => "A * ||Xi_hat||_q * prod ||l_i||_{p_i}",
            Block::SupP => "A * ||Xi_hat||_inf * prod ||l_i||_{p_i}",
            Block::Sup1 => "A * ||Xi_hat||_inf * prod ||l_i||_1",
        }
    }
}

/// Integrals, norms and scalars every constant is assembled from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ingredients {
    pub wp: f64,
    pub wp_max_form: f64,
    pub amplitude: f64,
    pub p: Vec<f64>,
    pub q: f64,
    pub lower_bound_product: f64,
    pub lower_bounds_configured: bool,
    /// infima of the transformed factors on `[eps, 1]` at the first and last cutoffs
    pub factor_infima_first_cutoff: Vec<f64>,
    pub factor_infima_last_cutoff: Vec<f64>,
    pub xi_hat_integral: IntegralResult,
    pub xi_hat_q_norm: IntegralResult,
    pub xi_hat_sup_norm: IntegralResult,
    pub factor_p_norms: Vec<IntegralResult>,
    pub factor_l1_norms: Vec<IntegralResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constant {
    pub name: &'static str,
    pub formula: String,
    /// Present only when every ingredient converged and no division by zero occurred.
    pub value: Option<f64>,
    pub status: Status,
    /// Value assembled from the ingredients truncated at the last cutoff.
    pub truncated_value: f64,
    /// `(eps, constant assembled from ingredients truncated at eps)`
    pub cutoff_trace: Vec<(f64, f64)>,
    pub note: Option<String>,
}

impl Constant {
    pub fn value_at(&self, eps: f64) -> Option<f64> {
        self.cutoff_trace
            .iter()
            .find(|(e, _)| *e == eps)
            .map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsSet {
    pub ingredients: Ingredients,
    pub constants: Vec<Constant>,
}

impl ConstantsSet {
    pub fn get(&self, id: ConstantId) -> &Constant {
        &self.constants[id.index()]
    }

    pub fn any_divergent(&self) -> bool {
        self.constants
            .iter()
            .any(|c| c.status == Status::DivergentSuspected)
    }

    pub fn all_converged(&self) -> bool {
        self.constants.iter().all(|c| c.status == Status::Converged)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsRequest {
    pub q: f64,
    pub tol: f64,
    pub cutoffs: Vec<f64>,
}

fn product(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().product()
}

fn trace_of(r: &IntegralResult, k: usize) -> f64 {
    r.cutoff_trace.get(k).map(|x| x.1).unwrap_or(r.value)
}

pub fn compute_constants(
    model: &WeightModel,
    req: &ConstantsRequest,
) -> Result<ConstantsSet, ConditionsError> {
    let p = model.weights.p_exponents().to_vec();
    if !holder_conjugate_check(&p, req.q) {
        let sum = p.iter().map(|x| 1.0 / x).sum::<f64>() + 1.0 / req.q;
        return Err(ConditionsError::NotConjugate { p, q: req.q, sum });
    }
    let cutoffs = &req.cutoffs;
    let first_cut = *cutoffs
        .first()
        .ok_or_else(|| ConditionsError::Argument("empty cutoff sequence".into()))?;
    let last_cut = cutoffs[cutoffs.len() - 1];
    let infimum_cut = if last_cut > 0.0 { last_cut } else { 1e-12 };
    let kernel = &model.kernel;
    let wp = kernel.wp()?;
    let wp_max_form = kernel.wp_max_form()?;
    let amplitude = model.amplitude();

    let xi_hat = |t: f64| model.xi_hat(t);
    let xi_hat_integral = integrate(xi_hat, req.tol, cutoffs)?;
    let xi_hat_q_norm = p_norm(xi_hat, req.q, req.tol, cutoffs)?;
    let xi_hat_sup_norm = p_norm(xi_hat, f64::INFINITY, req.tol, cutoffs)?;
    let mut factor_p_norms = Vec::new();
    let mut factor_l1_norms = Vec::new();
    for (i, &pi) in p.iter().enumerate() {
        let f = |t: f64| model.transformed_factor(i, t);
        factor_p_norms.push(p_norm(f, pi, req.tol, cutoffs)?);
        factor_l1_norms.push(p_norm(f, 1.0, req.tol, cutoffs)?);
    }
    let factor_infima_first_cutoff = model.factor_infima(first_cut.max(infimum_cut))?;
    let factor_infima_last_cutoff = model.factor_infima(infimum_cut)?;
    let lower_bounds_configured = model.weights.lower_bounds().is_some();
    let lower_bound_product = model.lower_bound_product(infimum_cut)?;

    let ing = Ingredients {
        wp,
        wp_max_form,
        amplitude,
        p,
        q: req.q,
        lower_bound_product,
        lower_bounds_configured,
        factor_infima_first_cutoff,
        factor_infima_last_cutoff,
        xi_hat_integral,
        xi_hat_q_norm,
        xi_hat_sup_norm,
        factor_p_norms,
        factor_l1_norms,
    };

    let block_at = |b: Block, k: Option<usize>| -> f64 {
        let pick = |r: &IntegralResult| match k {
            Some(k) => trace_of(r, k),
            None => r.value,
        };
        match b {
            Block::Lower => wp * amplitude * lower_bound_product * pick(&ing.xi_hat_integral),
            Block::Holder => {
                amplitude * pick(&ing.xi_hat_q_norm) * product(ing.factor_p_norms.iter().map(pick))
            }
            Block::SupP => {
                amplitude
                    * pick(&ing.xi_hat_sup_norm)
                    * product(ing.factor_p_norms.iter().map(pick))
            }
            Block::Sup1 => {
                amplitude
                    * pick(&ing.xi_hat_sup_norm)
                    * product(ing.factor_l1_norms.iter().map(pick))
            }
        }
    };
    let block_status = |b: Block| -> Status {
        let factors = match b {
            Block::Lower => Vec::new(),
            Block::Holder | Block::SupP => ing.factor_p_norms.iter().map(|r| r.status).collect(),
            Block::Sup1 => ing.factor_l1_norms.iter().map(|r| r.status).collect(),
        };
        let head = match b {
            Block::Lower => ing.xi_hat_integral.status,
            Block::Holder => ing.xi_hat_q_norm.status,
            Block::SupP | Block::Sup1 => ing.xi_hat_sup_norm.status,
        };
        factors.into_iter().fold(head, Status::worst)
    };

    let constants = ConstantId::ALL
        .iter()
        .map(|&id| {
            let (b, reciprocal) = id.block();
            let apply = |x: f64| if reciprocal { 1.0 / x } else { x };
            let status = block_status(b);
            let raw = block_at(b, None);
            let cutoff_trace = (0..cutoffs.len())
                .map(|k| (cutoffs[k], apply(block_at(b, Some(k)))))
                .collect();
            let mut note = None;
            let value = if reciprocal && raw == 0.0 {
                note = Some("denominator vanishes".to_string());
                None
            } else if status == Status::Converged {
                Some(apply(raw))
            } else {
                None
            };
            let formula = if reciprocal {
                format!("1 / ({})", b.formula())
            } else {
                b.formula().to_string()
            };
            let truncated = match ing.xi_hat_integral.cutoff_trace.len() {
                0 => apply(raw),
                n => apply(block_at(b, Some(n - 1))),
            };
            Constant {
                name: id.name(),
                formula,
                value,
                status,
                truncated_value: truncated,
                cutoff_trace,
                note,
            }
        })
        .collect();

    Ok(ConstantsSet {
        ingredients: ing,
        constants,
    })
}

/// Constant values used by the window checks, either computed or injected.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantValues {
    values: Vec<Option<f64>>,
    pub wp: Option<f64>,
}

impl Default for ConstantValues {
    fn default() -> Self {
        ConstantValues {
            values: vec![None; ConstantId::ALL.len()],
            wp: None,
        }
    }
}

impl ConstantValues {
    pub fn from_set(set: &ConstantsSet) -> Self {
        ConstantValues {
            values: set.constants.iter().map(|c| c.value).collect(),
            wp: Some(set.ingredients.wp),
        }
    }

    pub fn get(&self, id: ConstantId) -> Option<f64> {
        self.values[id.index()]
    }

    pub fn set(&mut self, id: ConstantId, value: Option<f64>) {
        self.values[id.index()] = value;
    }

    pub fn with(mut self, id: ConstantId, value: f64) -> Self {
        self.set(id, Some(value));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

impl Direction {
    fn is_upper(self) -> bool {
        matches!(self, Direction::Le | Direction::Lt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Direction::Le => "<=",
            Direction::Ge => ">=",
            Direction::Lt => "<",
            Direction::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Pass only if every verdict passes; any fail dominates inconclusive.
    pub fn combine(items: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Pass;
        for v in items {
            match (out, v) {
                (_, Verdict::Fail) => return Verdict::Fail,
                (Verdict::Pass, Verdict::Inconclusive) => out = Verdict::Inconclusive,
                _ => {}
            }
        }
        out
    }
}

/// Relative margin under which a verdict is reported inconclusive.
pub const MARGIN_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowCheck {
    pub hypothesis_id: String,
    /// Main hypotheses of a theorem gate the check; variants are reported only.
    pub main: bool,
    pub function_index: usize,
    pub constant: &'static str,
    pub interval: (f64, f64),
    pub bound: Option<f64>,
    pub direction: Direction,
    pub worst_value: f64,
    pub worst_point: f64,
    pub margin: Option<f64>,
    pub verdict: Verdict,
    pub note: Option<String>,
}

const SAMPLES: usize = 10_000;
const REFINE_CANDIDATES: usize = 10;

fn eval_g(g: &Expr, index: usize, u: f64) -> Result<f64, ConditionsError> {
    g.eval(u)
        .map_err(|error| ConditionsError::Eval { index, u, error })
}

/// Extremum of `g` on `[lo, hi]`: `(value, point)`; the maximum when `maximize`.
pub fn extremum(
    g: &Expr,
    index: usize,
    lo: f64,
    hi: f64,
    maximize: bool,
) -> Result<(f64, f64), ConditionsError> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(ConditionsError::Window(format!("bad interval [{lo}, {hi}]")));
    }
    let sign = if maximize { 1.0 } else { -1.0 };
    let score = |v: f64| sign * v;
    if lo == hi {
        return Ok((eval_g(g, index, lo)?, lo));
    }
    let log_lo = if lo > 0.0 { lo } else { hi * 1e-12 };
    let mut xs = extremum_samples(lo, hi, SAMPLES);
    if lo <= 0.0 && hi > 0.0 {
        xs.extend(extremum_samples(log_lo, hi, SAMPLES / 4).into_iter().skip(SAMPLES / 4));
        xs.sort_by(f64::total_cmp);
        xs.dedup();
    }
    let mut vals = Vec::with_capacity(xs.len());
    for &x in &xs {
        vals.push(eval_g(g, index, x)?);
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| score(vals[b]).total_cmp(&score(vals[a])).then(a.cmp(&b)));
    let mut best = (vals[order[0]], xs[order[0]]);
    for &i in order.iter().take(REFINE_CANDIDATES) {
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(xs.len() - 1)];
        let (v, x) = golden_section(|u| eval_g(g, index, u), a, b, maximize)?;
        if score(v) > score(best.0) {
            best = (v, x);
        }
    }
    Ok(best)
}

fn golden_section(
    f: impl Fn(f64) -> Result<f64, ConditionsError>,
    mut a: f64,
    mut b: f64,
    maximize: bool,
) -> Result<(f64, f64), ConditionsError> {
    let sign = if maximize { 1.0 } else { -1.0 };
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = sign * f(c)?;
    let mut fd = sign * f(d)?;
    for _ in 0..80 {
        if (b - a).abs() <= 1e-14 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = sign * f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = sign * f(d)?;
        }
    }
    let (x, v) = if fc > fd { (c, fc) } else { (d, fd) };
    Ok((sign * v, x))
}

#[allow(clippy::too_many_arguments)]
fn window(
    id: &str,
    main: bool,
    g: &Expr,
    index: usize,
    constant: &'static str,
    interval: (f64, f64),
    bound: Option<f64>,
    direction: Direction,
) -> Result<WindowCheck, ConditionsError> {
    let maximize = direction.is_upper();
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite()) || bound.is_none() {
        let note = if bound.is_none() {
            format!("constant {constant} unavailable")
        } else {
            format!("interval [{lo}, {hi}] is not finite")
        };
        return Ok(WindowCheck {
            hypothesis_id: id.to_string(),
            main,
            function_index: index,
            constant,
            interval,
            bound,
            direction,
            worst_value: f64::NAN,
            worst_point: f64::NAN,
            margin: None,
            verdict: Verdict::Inconclusive,
            note: Some(note),
        });
    }
    let bound_v = bound.unwrap_or(f64::NAN);
    let (worst_value, worst_point) = extremum(g, index, lo, hi, maximize)?;
    let margin = if maximize {
        bound_v - worst_value
    } else {
        worst_value - bound_v
    };
    let band = MARGIN_RESOLUTION * bound_v.abs().max(worst_value.abs());
    let verdict = if margin > band {
        Verdict::Pass
    } else if margin < -band {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(WindowCheck {
        hypothesis_id: id.to_string(),
        main,
        function_index: index,
        constant,
        interval,
        bound,
        direction,
        worst_value,
        worst_point,
        margin: Some(margin),
        verdict,
        note: None,
    })
}

fn require_ordered(names: &[&str], vals: &[f64]) -> Result<(), ConditionsError> {
    let ok = vals[0] > 0.0
        && vals.iter().all(|v| v.is_finite())
        && vals.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(ConditionsError::Window(format!(
            "need 0 < {} but got {:?}",
            names.join(" < "),
            vals
        )))
    }
}

fn scaled(c: Option<f64>, x: f64) -> Option<f64> {
    c.map(|c| c * x)
}

fn over(x: f64, c: Option<f64>) -> Option<f64> {
    c.filter(|c| *c != 0.0).map(|c| x / c)
}

/// Windows J4 (`g <= Q2 a2` on `[0, a2]`) and J5 (`g >= Q1 a1` on `[0, a1]`).
pub fn check_krasnoselskii(
    g_list: &[Expr],
    a1: f64,
    a2: f64,
    c: &ConstantValues,
) -> Result<Vec<WindowCheck>, ConditionsError> {
    require_ordered(&["a1", "a2"], &[a1, a2])?;
    let mut out = Vec::new();
    for (i, g) in g_list.iter().enumerate() {
        let q2 = c.get(ConstantId::Q2);
        let q1 = c.get(ConstantId::Q1);
        out.push(window("J4", true, g, i + 1, "Q2", (0.0, a2), scaled(q2, a2), Direction::Le)?);
        out.push(window("J5", true, g, i + 1, "Q1", (0.0, a1), scaled(q1, a1), Direction::Ge)?);
    }
    Ok(out)
}

/// Sup-norm variant: J5 at level `b1` and J6 (`g <= N2 b2` on `[0, b2]`).
pub fn check_krasnoselskii_sup(
    g_list: &[Expr],
    b1: f64,
    b2: f64,
    c: &ConstantValues,
) -> Result<Vec<WindowCheck>, ConditionsError> {
    require_ordered(&["b1", "b2"], &[b1, b2])?;
    let mut out = Vec::new();
    for (i, g) in g_list.iter().enumerate() {
        let n2 = c.get(ConstantId::N2);
        let q1 = c.get(ConstantId::Q1);
        out.push(window("J6", false, g, i + 1, "N2", (0.0, b2), scaled(n2, b2), Direction::Le)?);
        out.push(window("J5[b1]", false, g, i + 1, "Q1", (0.0, b1), scaled(q1, b1), Direction::Ge)?);
    }
    Ok(out)
}

/// `L^1` variant: J5 at level `c1` and J7 (`g <= M2 c2` on `[0, c2]`).
pub fn check_krasnoselskii_l1(
    g_list: &[Expr],
    c1: f64,
    c2: f64,
    c: &ConstantValues,
) -> Result<Vec<WindowCheck>, ConditionsError> {
    require_ordered(&["c1", "c2"], &[c1, c2])?;
    let mut out = Vec::new();
    for (i, g) in g_list.iter().enumerate() {
        let m2 = c.get(ConstantId::M2);
        let q1 = c.get(ConstantId::Q1);
        out.push(window("J7", false, g, i + 1, "M2", (0.0, c2), scaled(m2, c2), Direction::Le)?);
        out.push(window("J5[c1]", false, g, i + 1, "Q1", (0.0, c1), scaled(q1, c1), Direction::Ge)?);
    }
    Ok(out)
}

fn wp_interval(x0: f64, x: f64, wp: Option<f64>) -> (f64, f64) {
    match wp {
        Some(w) if w > 0.0 => (x0, x / w),
        _ => (x0, f64::INFINITY),
    }
}

/// J8 on `[c', c'/wp]`, J9 on `[0, b'/wp]`, J10 on `[a', a'/wp]`, with the
/// J9', J9'' variants using `k3`, `k4`.
pub fn check_avery_henderson(
    g_list: &[Expr],
    a: f64,
    b: f64,
    cc: f64,
    c: &ConstantValues,
) -> Result<Vec<WindowCheck>, ConditionsError> {
    require_ordered(&["a'", "b'", "c'"], &[a, b, cc])?;
    if let Some(w) = c.wp {
        if !(w > 0.0 && w <= 1.0) {
            return Err(ConditionsError::Window(format!("wp = {w} must lie in (0, 1]")));
        }
    }
    let k1 = c.get(ConstantId::K1);
    let mut out = Vec::new();
    for (i, g) in g_list.iter().enumerate() {
        let j = i + 1;
        let j9 = wp_interval(0.0, b, c.wp);
        out.push(window("J8", true, g, j, "k1", wp_interval(cc, cc, c.wp), over(cc, k1), Direction::Gt)?);
        out.push(window("J9", true, g, j, "k2", j9, over(b, c.get(ConstantId::K2)), Direction::Lt)?);
        out.push(window("J10", true, g, j, "k1", wp_interval(a, a, c.wp), over(a, k1), Direction::Gt)?);
        out.push(window("J9'", false, g, j, "k3", j9, over(b, c.get(ConstantId::K3)), Direction::Lt)?);
        out.push(window("J9''", false, g, j, "k4", j9, over(b, c.get(ConstantId::K4)), Direction::Lt)?);
    }
    Ok(out)
}

/// J11 (`g < a'/O1` on `[0, a']`), J12 (`g > b'/O2` on `[b', c']`),
/// J13 (`g < c'/O1` on `[0, c']`), the J14/J15 replacements of J11 and the
/// same three windows under the swapped `O1`/`O2` assignment.
pub fn check_leggett_williams(
    g_list: &[Expr],
    a: f64,
    b: f64,
    cc: f64,
    c: &ConstantValues,
) -> Result<Vec<WindowCheck>, ConditionsError> {
    require_ordered(&["a'", "b'", "c'"], &[a, b, cc])?;
    let o1 = c.get(ConstantId::O1);
    let o2 = c.get(ConstantId::O2);
    let o1x = c.get(ConstantId::O1Example);
    let o2x = c.get(ConstantId::O2Example);
    let mut out = Vec::new();
    for (i, g) in g_list.iter().enumerate() {
        let j = i + 1;
        out.push(window("J11", true, g, j, "O1", (0.0, a), over(a, o1), Direction::Lt)?);
        out.push(window("J12", true, g, j, "O2", (b, cc), over(b, o2), Direction::Gt)?);
        out.push(window("J13", true, g, j, "O1", (0.0, cc), over(cc, o1), Direction::Lt)?);
        out.push(window("J14", false, g, j, "O3", (0.0, a), over(a, c.get(ConstantId::O3)), Direction::Lt)?);
        out.push(window("J15", false, g, j, "O4", (0.0, a), over(a, c.get(ConstantId::O4)), Direction::Lt)?);
        out.push(window("J11[example]", false, g, j, "O1_example", (0.0, a), over(a, o1x), Direction::Lt)?);
        out.push(window("J12[example]", false, g, j, "O2_example", (b, cc), over(b, o2x), Direction::Gt)?);
        out.push(window("J13[example]", false, g, j, "O1_example", (0.0, cc), over(cc, o1x), Direction::Lt)?);
    }
    Ok(out)
}

/// `[c K A]^(n+1) [int |Upsilon|]^n [int |Upsilon|^q]^(1/q)` with `c = wp` when
/// `include_wp`, else 1.
#[allow(clippy::too_many_arguments)]
pub fn contraction_constant(
    model: &WeightModel,
    k: f64,
    n: usize,
    p: f64,
    q: f64,
    include_wp: bool,
    tol: f64,
    cutoffs: &[f64],
) -> Result<IntegralResult, ConditionsError> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(ConditionsError::Argument(format!("K = {k} must be finite and nonnegative")));
    }
    if n == 0 {
        return Err(ConditionsError::Argument("system size n must be at least 1".into()));
    }
    if !(p > 1.0 && q > 1.0 && holder_conjugate_check(&[p], q)) {
        let sum = 1.0 / p + 1.0 / q;
        return Err(ConditionsError::NotConjugate { p: vec![p], q, sum });
    }
    if k == 0.0 {
        return Ok(IntegralResult::exact(0.0));
    }
    let c = if include_wp { model.kernel.wp()? } else { 1.0 };
    let base = (c * k * model.amplitude()).powi(n as i32 + 1);
    let ups = |t: f64| model.upsilon(t).map(f64::abs);
    let i1 = integrate(ups, tol, cutoffs)?;
    let nq = p_norm(ups, q, tol, cutoffs)?;
    let nf = n as f64;
    let combine = |a: f64, b: f64| base * a.powf(nf) * b;
    let value = combine(i1.value, nq.value);
    let rel = nf * i1.abs_error_estimate / i1.value.abs().max(f64::MIN_POSITIVE)
        + nq.abs_error_estimate / nq.value.abs().max(f64::MIN_POSITIVE);
    let cutoff_trace = i1
        .cutoff_trace
        .iter()
        .zip(&nq.cutoff_trace)
        .map(|(&(e, a), &(_, b))| (e, combine(a, b)))
        .collect();
    let status = i1.status.worst(nq.status);
    let err = value.abs() * rel;
    let status = if status == Status::Converged && err > tol.max(tol * value.abs()) {
        Status::CutoffLimited
    } else {
        status
    };
    Ok(IntegralResult {
        value,
        abs_error_estimate: err,
        status,
        cutoff_trace,
        fitted_exponent: i1.fitted_exponent,
    })
}

/// Largest difference quotient of `g` over a uniform stratification of
/// `[lo, hi]` into `samples` cells; a lower estimate of the Lipschitz constant.
pub fn lipschitz_estimate(
    g: &Expr,
    interval: (f64, f64),
    samples: usize,
) -> Result<f64, ConditionsError> {
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || samples == 0 {
        return Err(ConditionsError::Window(format!(
            "bad Lipschitz interval [{lo}, {hi}] or sample count {samples}"
        )));
    }
    let h = (hi - lo) / samples as f64;
    let mut prev_x = lo;
    let mut prev = eval_g(g, 1, lo)?;
    let mut best = 0.0f64;
    for i in 1..=samples {
        let x = if i == samples { hi } else { lo + h * i as f64 };
        let v = eval_g(g, 1, x)?;
        best = best.max((v - prev).abs() / (x - prev_x));
        prev = v;
        prev_x = x;
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub k: f64,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub without_wp: IntegralResult,
    pub with_wp: IntegralResult,
    pub lipschitz_interval: (f64, f64),
    pub lipschitz_estimates: Vec<f64>,
    /// Decided by the contraction value without the wp factor and the Lipschitz estimates.
    pub verdict: Verdict,
}

#[allow(clippy::too_many_arguments)]
pub fn check_uniqueness(
    model: &WeightModel,
    g_list: &[Expr],
    k: f64,
    p: f64,
    q: f64,
    lipschitz_interval: (f64, f64),
    tol: f64,
    cutoffs: &[f64],
) -> Result<UniquenessReport, ConditionsError> {
    let n = g_list.len();
    let without_wp = contraction_constant(model, k, n, p, q, false, tol, cutoffs)?;
    let with_wp = contraction_constant(model, k, n, p, q, true, tol, cutoffs)?;
    let lipschitz_estimates = g_list
        .iter()
        .map(|g| lipschitz_estimate(g, lipschitz_interval, SAMPLES))
        .collect::<Result<Vec<_>, _>>()?;
    let lipschitz_ok = lipschitz_estimates.iter().all(|l| *l <= k * (1.0 + 1e-6));
    let verdict = match without_wp.status {
        Status::DivergentSuspected => Verdict::Inconclusive,
        _ if !lipschitz_ok => Verdict::Fail,
        Status::Converged if without_wp.value < 1.0 - MARGIN_RESOLUTION => Verdict::Pass,
        Status::Converged if without_wp.value > 1.0 + MARGIN_RESOLUTION => Verdict::Fail,
        _ => Verdict::Inconclusive,
    };
    Ok(UniquenessReport {
        k,
        n,
        p,
        q,
        without_wp,
        with_wp,
        lipschitz_interval,
        lipschitz_estimates,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelParams;
    use crate::quadrature::DEFAULT_CUTOFFS;
    use crate::weights::{TransformSpec, WeightSpec};
    use proptest::prelude::*;

    fn g(src: &str) -> Expr {
        Expr::parse(src, "u").unwrap()
    }

    fn synthetic() -> WeightModel {
        WeightModel::synthetic(KernelParams::unit(), Expr::constant(1.0, "t")).unwrap()
    }

    fn request(q: f64) -> ConstantsRequest {
        ConstantsRequest {
            q,
            tol: 1e-10,
            cutoffs: DEFAULT_CUTOFFS.to_vec(),
        }
    }

    fn injected(pairs: &[(ConstantId, f64)], wp: f64) -> ConstantValues {
        let mut c = ConstantValues::default();
        for &(id, v) in pairs {
            c.set(id, Some(v));
        }
        c.wp = Some(wp);
        c
    }

    #[test]
    fn synthetic_constants_converge() {
        let set = compute_constants(&synthetic(), &request(1.0)).unwrap();
        assert!(set.all_converged(), "{:#?}", set.constants);
        let e = std::f64::consts::E;
        // Xi(t, t) = 1/2 for the unit parameters
        let q1 = set.get(ConstantId::Q1).value.unwrap();
        assert!((q1 - 2.0 * e).abs() < 1e-9 * q1);
        let k2 = set.get(ConstantId::K2).value.unwrap();
        assert!((k2 - 0.5).abs() < 1e-10);
        let n2 = set.get(ConstantId::N2).value.unwrap();
        assert!((n2 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn reciprocal_consistency() {
        let set = compute_constants(&synthetic(), &request(1.0)).unwrap();
        for (r, d) in [
            (ConstantId::Q1, ConstantId::K1),
            (ConstantId::Q2, ConstantId::K2),
            (ConstantId::N2, ConstantId::K3),
            (ConstantId::M2, ConstantId::K4),
        ] {
            let prod = set.get(r).value.unwrap() * set.get(d).value.unwrap();
            assert!((prod - 1.0).abs() < 1e-10);
        }
        assert_eq!(set.get(ConstantId::O1).value, set.get(ConstantId::K2).value);
        assert_eq!(set.get(ConstantId::O2).value, set.get(ConstantId::K1).value);
        assert_eq!(set.get(ConstantId::O1Example).value, set.get(ConstantId::K1).value);
    }

    #[test]
    fn singular_weight_flags_divergence() {
        let ws = WeightSpec::new(vec![Expr::constant(1.0, "t")], vec![f64::INFINITY], Some(vec![1.0]))
            .unwrap();
        let k = KernelParams::unit();
        let m = WeightModel::new(k, ws, TransformSpec::from_kernel(&k)).unwrap();
        let set = compute_constants(&m, &request(1.0)).unwrap();
        assert!(set.any_divergent());
        let q1 = set.get(ConstantId::Q1);
        assert_eq!(q1.status, Status::DivergentSuspected);
        assert!(q1.value.is_none());
        assert_eq!(q1.cutoff_trace.len(), DEFAULT_CUTOFFS.len());
        assert!(q1.cutoff_trace.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn conjugate_mismatch_is_an_error() {
        let ws = WeightSpec::new(
            vec![Expr::constant(1.0, "t"), Expr::constant(1.0, "t")],
            vec![2.0, 2.0],
            None,
        )
        .unwrap();
        let k = KernelParams::unit();
        let m = WeightModel::new(k, ws, TransformSpec::from_kernel(&k)).unwrap();
        assert!(matches!(
            compute_constants(&m, &request(2.0)),
            Err(ConditionsError::NotConjugate { .. })
        ));
    }

    #[test]
    fn first_example_windows_with_injected_constants() {
        let c = injected(&[(ConstantId::Q2, 0.4577977612e-7), (ConstantId::Q1, 0.1153270463e-4)], 1.0 / std::f64::consts::E);
        let gl = [g("1+cos(1+u)/5+1/(1+u)")];
        let checks = check_krasnoselskii(&gl, 1e3, 1e8, &c).unwrap();
        assert_eq!(checks.len(), 2);
        assert!((checks[0].bound.unwrap() - 4.577977612).abs() < 1e-8);
        assert!((checks[1].bound.unwrap() - 0.011532704).abs() < 1e-8);
        assert!(checks.iter().all(|w| w.verdict == Verdict::Pass), "{checks:#?}");
    }

    #[test]
    fn zero_nonlinearity_fails_lower_windows() {
        let c = injected(&[(ConstantId::Q2, 1.0), (ConstantId::Q1, 1.0)], 0.5);
        let checks = check_krasnoselskii(&[g("0")], 1.0, 2.0, &c).unwrap();
        assert_eq!(checks[0].verdict, Verdict::Pass);
        assert_eq!(checks[1].verdict, Verdict::Fail);
        let c = injected(&[(ConstantId::O1, 1.0), (ConstantId::O2, 1.0)], 0.5);
        let checks = check_leggett_williams(&[g("0")], 1.0, 2.0, 3.0, &c).unwrap();
        let v = |id: &str| checks.iter().find(|w| w.hypothesis_id == id).unwrap().verdict;
        assert_eq!(v("J11"), Verdict::Pass);
        assert_eq!(v("J12"), Verdict::Fail);
        assert_eq!(v("J13"), Verdict::Pass);
        assert_eq!(v("J14"), Verdict::Inconclusive);
    }

    #[test]
    fn constant_nonlinearity_in_avery_henderson_windows() {
        let c = injected(&[(ConstantId::K1, 0.5), (ConstantId::K2, 0.1)], 0.5);
        // a'/k1 = 2, c'/k1 = 8, b'/k2 = 30 → C = 10 satisfies all three
        let checks = check_avery_henderson(&[g("10")], 1.0, 3.0, 4.0, &c).unwrap();
        let main: Vec<_> = checks.iter().filter(|w| w.main).collect();
        assert_eq!(main.len(), 3);
        assert!(main.iter().all(|w| w.verdict == Verdict::Pass));
        assert_eq!(main[0].interval, (4.0, 8.0));
        assert_eq!(main[1].interval, (0.0, 6.0));
    }

    #[test]
    fn linear_nonlinearity_matches_arithmetic() {
        let c = injected(&[(ConstantId::K1, 0.25), (ConstantId::K2, 0.1)], 0.5);
        let checks = check_avery_henderson(&[g("u")], 1.0, 2.0, 3.0, &c).unwrap();
        let by = |id: &str| checks.iter().find(|w| w.hypothesis_id == id).unwrap();
        // J8: min of u on [3, 6] is 3 vs 12: fail; J9: max on [0, 4] is 4 < 20; J10: 1 vs 4 fails
        assert_eq!(by("J8").verdict, Verdict::Fail);
        assert_eq!(by("J8").worst_value, 3.0);
        assert_eq!(by("J9").verdict, Verdict::Pass);
        assert_eq!(by("J9").worst_value, 4.0);
        assert_eq!(by("J10").verdict, Verdict::Fail);
    }

    #[test]
    fn borderline_is_inconclusive() {
        let c = injected(&[(ConstantId::Q2, 1.0), (ConstantId::Q1, 0.5)], 0.5);
        let checks = check_krasnoselskii(&[g("2")], 1.0, 2.0, &c).unwrap();
        assert_eq!(checks[0].verdict, Verdict::Inconclusive);
    }

    #[test]
    fn window_parameter_validation() {
        let c = ConstantValues::default();
        assert!(check_krasnoselskii(&[g("1")], 2.0, 1.0, &c).is_err());
        assert!(check_avery_henderson(&[g("1")], 1.0, 1.0, 2.0, &c).is_err());
        assert!(check_leggett_williams(&[g("1")], -1.0, 1.0, 2.0, &c).is_err());
    }

    #[test]
    fn contraction_special_cases() {
        let m = synthetic();
        let zero = contraction_constant(&m, 0.0, 2, 2.0, 2.0, false, 1e-10, &DEFAULT_CUTOFFS).unwrap();
        assert_eq!(zero.value, 0.0);
        assert_eq!(zero.status, Status::Converged);
        let r = contraction_constant(&m, 1.0, 1, 2.0, 2.0, false, 1e-10, &DEFAULT_CUTOFFS).unwrap();
        assert!((r.value - 0.25).abs() < 1e-10, "{r:?}");
        let w = contraction_constant(&m, 1.0, 1, 2.0, 2.0, true, 1e-10, &DEFAULT_CUTOFFS).unwrap();
        let wp = (-1f64).exp();
        assert!((w.value - 0.25 * wp * wp).abs() < 1e-10);
        assert!(contraction_constant(&m, 1.0, 1, 2.0, 3.0, false, 1e-10, &DEFAULT_CUTOFFS).is_err());
    }

    #[test]
    fn lipschitz_estimates() {
        let l = lipschitz_estimate(&g("cos(u)/10000"), (0.0, 10.0), 10_000).unwrap();
        assert!((l - 1e-4).abs() < 1e-8);
        assert_eq!(lipschitz_estimate(&g("3"), (0.0, 1.0), 100).unwrap(), 0.0);
        let l = lipschitz_estimate(&g("u^2"), (0.0, 1.0), 10_000).unwrap();
        assert!((l - 2.0).abs() < 1e-3);
    }

    #[test]
    fn piecewise_extrema_are_exact() {
        let e = g("piecewise((u>=1, 1e16), (else, 1e16*u^2 - u + 1))");
        assert_eq!(extremum(&e, 1, 0.0, 2.72e9, true).unwrap().0, 1e16);
        assert_eq!(extremum(&e, 1, 1e10, 2.72e10, false).unwrap().0, 1e16);
        let e = g("piecewise((u>=1, 3/2), (else, u^2/2 + 1))");
        assert_eq!(extremum(&e, 1, 0.0, 1e7, true).unwrap().0, 1.5);
        assert_eq!(extremum(&e, 1, 0.0, 1e7, false).unwrap().0, 1.0);
    }

    #[test]
    fn evaluation_errors_name_the_function() {
        let c = injected(&[(ConstantId::Q2, 1.0), (ConstantId::Q1, 1.0)], 0.5);
        let r = check_krasnoselskii(&[g("1"), g("log(u)")], 1.0, 2.0, &c);
        assert!(matches!(r, Err(ConditionsError::Eval { index: 2, .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn cubic_extremum_matches_calculus(r1 in 0.5..4.5f64, gap in 0.5..3.0f64, scale in 0.1..10.0f64) {
            // g'(u) = 3 scale (u - r1)(u - r2): local max at r1, local min at r2
            let r2 = r1 + gap;
            let s = r1 + r2;
            let p = r1 * r2;
            let src = format!("{scale}*(u^3 - {}*u^2 + {}*u)", 1.5 * s, 3.0 * p);
            let e = g(&src);
            let f = |u: f64| scale * (u.powi(3) - 1.5 * s * u * u + 3.0 * p * u);
            let hi = r2 + 0.1;
            let (mx, _) = extremum(&e, 1, 0.0, r2, true).unwrap();
            prop_assert!((mx - f(r1).max(f(0.0))).abs() < 1e-6 * f(r1).abs().max(1.0));
            let (mn, _) = extremum(&e, 1, r1, hi, false).unwrap();
            prop_assert!((mn - f(r2)).abs() < 1e-6 * f(r2).abs().max(1.0));
        }

        #[test]
        fn enlarging_interval_never_improves(lo in 0.0..2.0f64, w in 0.1..3.0f64, extra in 0.0..3.0f64) {
            let e = g("sin(3*u) + u/4");
            let (a, _) = extremum(&e, 1, lo, lo + w, true).unwrap();
            let (b, _) = extremum(&e, 1, lo, lo + w + extra, true).unwrap();
            prop_assert!(b >= a - 1e-12);
            let (a, _) = extremum(&e, 1, lo, lo + w, false).unwrap();
            let (b, _) = extremum(&e, 1, lo, lo + w + extra, false).unwrap();
            prop_assert!(b <= a + 1e-12);
        }
    }
}
