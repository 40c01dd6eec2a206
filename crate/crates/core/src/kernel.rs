//! Green's kernel of `-u'' + r0^2 u` on `[0, 1]` with the Robin conditions
//! `alpha u(0) - beta u'(0) = 0` and `gamma u(1) + delta u'(1) = 0`.
//!
//! With `phi(x) = alpha sinh(r0 x) + beta r0 cosh(r0 x)` and
//! `psi(x) = gamma sinh(r0 (1 - x)) + delta r0 cosh(r0 (1 - x))` the kernel is
//! `phi(min(s, t)) psi(max(s, t)) / varrho`. Everything is evaluated in an
//! exponentially scaled form so that large `r0` never overflows: the scaled
//! functions `phi(x) e^{-r0 x}`, `psi(x) e^{-r0 (1 - x)}` and `varrho e^{-r0}`
//! are sums of nonnegative terms.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("invalid kernel parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("{name} = {value} lies outside [0, 1]")]
    OutOfDomain { name: &'static str, value: f64 },
    #[error("varrho overflows double precision for r0 = {0}")]
    Overflow(f64),
}

/// Boundary weights, radial scale and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub r0: f64,
    #[serde(rename = "N")]
    pub dim: u32,
}

impl KernelParams {
    pub fn new(
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        r0: f64,
        dim: u32,
    ) -> Result<Self, KernelError> {
        let p = KernelParams {
            alpha,
            beta,
            gamma,
            delta,
            r0,
            dim,
        };
        p.validate()?;
        Ok(p)
    }

    /// alpha = beta = gamma = delta = 1, r0 = 1, N = 3; used by all worked examples.
    pub fn unit() -> Self {
        KernelParams {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            delta: 1.0,
            r0: 1.0,
            dim: 3,
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(KernelError::InvalidParameter(format!(
                    "{name} = {v} must be finite and nonnegative"
                )));
            }
        }
        if !(self.r0.is_finite() && self.r0 > 0.0) {
            return Err(KernelError::InvalidParameter(format!(
                "r0 = {} must be finite and positive",
                self.r0
            )));
        }
        if self.dim < 3 {
            return Err(KernelError::InvalidParameter(format!(
                "N = {} must be at least 3",
                self.dim
            )));
        }
        if self.alpha + self.beta <= 0.0 {
            return Err(KernelError::Degenerate(
                "alpha + beta = 0 leaves the condition at s = 0 vacuous".into(),
            ));
        }
        if self.gamma + self.delta <= 0.0 {
            return Err(KernelError::Degenerate(
                "gamma + delta = 0 leaves the condition at s = 1 vacuous".into(),
            ));
        }
        if self.scaled_varrho() <= 0.0 {
            return Err(KernelError::Degenerate("varrho = 0, kernel undefined".into()));
        }
        Ok(())
    }

    /// `varrho e^{-r0}`.
    fn scaled_varrho(&self) -> f64 {
        let r = self.r0;
        let em = (-2.0 * r).exp();
        let cosh_part = 0.5 * (1.0 + em);
        let sinh_part = -0.5 * (-2.0 * r).exp_m1();
        r * r * (self.alpha * self.delta + self.beta * self.gamma) * cosh_part
            + r * (self.alpha * self.gamma + self.beta * self.delta * r * r) * sinh_part
    }

    /// `phi(x) e^{-r0 x}`
    fn scaled_phi(&self, x: f64) -> f64 {
        let y = self.r0 * x;
        0.5 * (self.alpha * -(-2.0 * y).exp_m1() + self.beta * self.r0 * (1.0 + (-2.0 * y).exp()))
    }

    /// `psi(x) e^{-r0 (1 - x)}`
    fn scaled_psi(&self, x: f64) -> f64 {
        let y = self.r0 * (1.0 - x);
        0.5 * (self.gamma * -(-2.0 * y).exp_m1() + self.delta * self.r0 * (1.0 + (-2.0 * y).exp()))
    }

    /// `r0^2 (alpha delta + beta gamma) cosh(r0) + r0 (alpha gamma + beta delta r0^2) sinh(r0)`.
    pub fn varrho(&self) -> Result<f64, KernelError> {
        self.validate()?;
        let v = self.scaled_varrho() * self.r0.exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(KernelError::Overflow(self.r0))
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.alpha * (self.r0 * x).sinh() + self.beta * self.r0 * (self.r0 * x).cosh()
    }

    pub fn phi_prime(&self, x: f64) -> f64 {
        let r = self.r0;
        self.alpha * r * (r * x).cosh() + self.beta * r * r * (r * x).sinh()
    }

    pub fn psi(&self, x: f64) -> f64 {
        let y = self.r0 * (1.0 - x);
        self.gamma * y.sinh() + self.delta * self.r0 * y.cosh()
    }

    pub fn psi_prime(&self, x: f64) -> f64 {
        let r = self.r0;
        let y = r * (1.0 - x);
        -(self.gamma * r * y.cosh() + self.delta * r * r * y.sinh())
    }

    /// Kernel value at `(s, t)`; arguments must lie in `[0, 1]`.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64, KernelError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(KernelError::OutOfDomain { name: "s", value: s });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(KernelError::OutOfDomain { name: "t", value: t });
        }
        Ok(self.eval_unchecked(s, t))
    }

    /// Kernel value without domain checks. Ties `s == t` take the `s <= t` branch.
    pub fn eval_unchecked(&self, s: f64, t: f64) -> f64 {
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        self.scaled_phi(lo) * self.scaled_psi(hi) * (-self.r0 * (hi - lo)).exp() / self.scaled_varrho()
    }

    /// Diagonal `Xi(t, t)`.
    pub fn diagonal(&self, t: f64) -> f64 {
        self.scaled_phi(t) * self.scaled_psi(t) / self.scaled_varrho()
    }

    /// The two endpoint ratios `beta r0 / phi(1)` and `delta r0 / psi(0)`.
    pub fn endpoint_ratios(&self) -> Result<(f64, f64), KernelError> {
        self.validate()?;
        let e = (-self.r0).exp();
        let left_den = self.scaled_phi(1.0);
        let right_den = self.scaled_psi(0.0);
        if left_den <= 0.0 || right_den <= 0.0 {
            return Err(KernelError::Degenerate(
                "endpoint denominator of the cone constant vanishes".into(),
            ));
        }
        Ok((
            self.beta * self.r0 * e / left_den,
            self.delta * self.r0 * e / right_den,
        ))
    }

    /// Cone constant: the largest `c` with `c Xi(t, t) <= Xi(s, t)` on the square.
    ///
    /// For `s <= t` the ratio `Xi(s,t)/Xi(t,t) = phi(s)/phi(t)` is bounded below by
    /// `phi(0)/phi(1)`, for `t <= s` by `psi(1)/psi(0)`; the bound valid on the whole
    /// square is the smaller of the two endpoint ratios.
    pub fn wp(&self) -> Result<f64, KernelError> {
        let (a, b) = self.endpoint_ratios()?;
        Ok(a.min(b))
    }

    /// The larger endpoint ratio. Equals [`KernelParams::wp`] whenever the two ratios
    /// coincide (symmetric boundary weights, or both zero); otherwise the lower
    /// bound `c Xi(t,t) <= Xi(s,t)` fails for this value.
    pub fn wp_max_form(&self) -> Result<f64, KernelError> {
        let (a, b) = self.endpoint_ratios()?;
        Ok(a.max(b))
    }

    /// Row-major `m x m` matrix of `Xi(nodes[i], nodes[j])`.
    pub fn matrix(&self, nodes: &[f64]) -> Vec<f64> {
        let phis: Vec<f64> = nodes.iter().map(|&x| self.scaled_phi(x)).collect();
        let psis: Vec<f64> = nodes.iter().map(|&x| self.scaled_psi(x)).collect();
        let inv = 1.0 / self.scaled_varrho();
        let m = nodes.len();
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let (lo, hi) = if nodes[i] <= nodes[j] { (i, j) } else { (j, i) };
                let v = phis[lo] * psis[hi] * (-self.r0 * (nodes[hi] - nodes[lo])).exp() * inv;
                out[i * m + j] = v;
                out[j * m + i] = v;
            }
        }
        out
    }
}

/// Worst violations of the three kernel bounds on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub grid_size: usize,
    pub tolerance: f64,
    pub wp: f64,
    /// max of `-Xi(s,t)` (positive means a negative kernel value)
    pub max_negativity: f64,
    /// max of `Xi(s,t) - Xi(t,t)`
    pub max_excess_over_diagonal: f64,
    /// max of `wp Xi(t,t) - Xi(s,t)`
    pub max_lower_bound_violation: f64,
    /// `[nonnegativity, diagonal dominance, cone lower bound]`
    pub passed: [bool; 3],
    /// The larger endpoint ratio and the lower-bound violation it would produce.
    pub wp_max_form: f64,
    pub max_form_lower_bound_violation: f64,
}

impl BoundReport {
    pub fn all_passed(&self) -> bool {
        self.passed.iter().all(|&p| p)
    }
}

pub fn verify_kernel_bounds(
    params: &KernelParams,
    grid_size: usize,
    tol: f64,
) -> Result<BoundReport, KernelError> {
    if grid_size < 2 {
        return Err(KernelError::InvalidParameter(format!(
            "grid_size = {grid_size} must be at least 2"
        )));
    }
    params.validate()?;
    let wp = params.wp()?;
    let wp_max = params.wp_max_form()?;
    let nodes: Vec<f64> = (0..grid_size)
        .map(|i| i as f64 / (grid_size - 1) as f64)
        .collect();
    let diag: Vec<f64> = nodes.iter().map(|&t| params.diagonal(t)).collect();
    let mut neg = f64::NEG_INFINITY;
    let mut excess = f64::NEG_INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut lower_max = f64::NEG_INFINITY;
    for &s in &nodes {
        for (j, &t) in nodes.iter().enumerate() {
            let k = params.eval_unchecked(s, t);
            neg = neg.max(-k);
            excess = excess.max(k - diag[j]);
            lower = lower.max(wp * diag[j] - k);
            lower_max = lower_max.max(wp_max * diag[j] - k);
        }
    }
    Ok(BoundReport {
        grid_size,
        tolerance: tol,
        wp,
        max_negativity: neg,
        max_excess_over_diagonal: excess,
        max_lower_bound_violation: lower,
        passed: [neg <= tol, excess <= tol, lower <= tol],
        wp_max_form: wp_max,
        max_form_lower_bound_violation: lower_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dirichlet() -> KernelParams {
        KernelParams::new(1.0, 0.0, 1.0, 0.0, 1.0, 3).unwrap()
    }

    #[test]
    fn varrho_unit_params() {
        let v = KernelParams::unit().varrho().unwrap();
        assert!((v - 5.436563658).abs() < 1e-8);
        assert_relative_eq!(v, 2.0 * std::f64::consts::E, max_relative = 1e-15);
        assert_relative_eq!(
            v,
            2.0 * 1f64.cosh() + 2.0 * 1f64.sinh(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn varrho_dirichlet_is_sinh_one() {
        assert_relative_eq!(dirichlet().varrho().unwrap(), 1f64.sinh(), max_relative = 1e-15);
    }

    #[test]
    fn kernel_at_origin_is_half() {
        let k = KernelParams::unit().eval(0.0, 0.0).unwrap();
        assert_relative_eq!(k, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn kernel_is_symmetric() {
        let p = KernelParams::new(0.3, 2.0, 5.0, 0.7, 2.5, 4).unwrap();
        assert_eq!(p.eval(0.3, 0.7).unwrap(), p.eval(0.7, 0.3).unwrap());
    }

    #[test]
    fn dirichlet_vanishes_on_left_edge() {
        let p = KernelParams::new(2.0, 0.0, 3.0, 0.0, 1.5, 3).unwrap();
        for i in 0..=10 {
            assert_eq!(p.eval(0.0, i as f64 / 10.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn wp_values() {
        assert_relative_eq!(
            KernelParams::unit().wp().unwrap(),
            (-1f64).exp(),
            max_relative = 1e-15
        );
        assert_eq!(dirichlet().wp().unwrap(), 0.0);
        let neumann = KernelParams::new(0.0, 1.0, 0.0, 1.0, 1.0, 3).unwrap();
        assert_relative_eq!(neumann.wp().unwrap(), 1.0 / 1f64.cosh(), max_relative = 1e-15);
        assert!((neumann.wp().unwrap() - 0.6480543).abs() < 1e-7);
    }

    #[test]
    fn max_form_breaks_lower_bound_for_mixed_conditions() {
        let p = KernelParams::new(10.0, 0.1, 0.1, 10.0, 1.0, 3).unwrap();
        let r = verify_kernel_bounds(&p, 51, 1e-12).unwrap();
        assert!(r.all_passed());
        assert!(r.wp_max_form > r.wp);
        assert!(r.max_form_lower_bound_violation > 1e-2);
    }

    #[test]
    fn out_of_domain_arguments() {
        let p = KernelParams::unit();
        assert!(matches!(p.eval(-0.1, 0.5), Err(KernelError::OutOfDomain { name: "s", .. })));
        assert!(matches!(p.eval(0.5, 1.5), Err(KernelError::OutOfDomain { name: "t", .. })));
    }

    #[test]
    fn degenerate_parameters_rejected() {
        assert!(matches!(
            KernelParams::new(0.0, 0.0, 1.0, 1.0, 1.0, 3),
            Err(KernelError::Degenerate(_))
        ));
        assert!(KernelParams::new(1.0, 1.0, 0.0, 0.0, 1.0, 3).is_err());
        assert!(KernelParams::new(1.0, 1.0, 1.0, 1.0, 0.0, 3).is_err());
        assert!(KernelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 2).is_err());
        assert!(KernelParams::new(-1.0, 1.0, 1.0, 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn large_r0_does_not_overflow() {
        let p = KernelParams::new(1.0, 1.0, 1.0, 1.0, 800.0, 3).unwrap();
        let k = p.eval(0.5, 0.5).unwrap();
        assert!(k.is_finite() && k > 0.0);
        assert!(matches!(p.varrho(), Err(KernelError::Overflow(_))));
        // Far from the diagonal the kernel decays like exp(-r0 |s - t|).
        assert!(p.eval(0.0, 1.0).unwrap() < 1e-300);
        assert!(verify_kernel_bounds(&p, 21, 1e-12).unwrap().all_passed());
    }

    #[test]
    fn bound_report_defaults() {
        let r = verify_kernel_bounds(&KernelParams::unit(), 101, 1e-12).unwrap();
        assert!(r.all_passed(), "{r:?}");
        let r = verify_kernel_bounds(&dirichlet(), 101, 1e-12).unwrap();
        assert!(r.all_passed());
        assert_eq!(r.wp, 0.0);
        assert!(verify_kernel_bounds(&dirichlet(), 1, 1e-12).is_err());
    }

    #[test]
    fn matrix_matches_pointwise() {
        let p = KernelParams::new(0.5, 2.0, 1.0, 0.25, 3.0, 5).unwrap();
        let nodes = [0.0, 0.1, 0.45, 0.45, 1.0];
        let m = p.matrix(&nodes);
        for (i, &s) in nodes.iter().enumerate() {
            for (j, &t) in nodes.iter().enumerate() {
                assert_relative_eq!(m[i * 5 + j], p.eval(s, t).unwrap(), max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn second_difference_reproduces_operator() {
        // Away from the diagonal Xi'' = r0^2 Xi; the central difference error is O(h^2).
        let p = KernelParams::new(1.0, 0.5, 2.0, 1.0, 2.0, 3).unwrap();
        let t = 0.8;
        let s = 0.3;
        let err = |h: f64| {
            let d2 = (p.eval(s + h, t).unwrap() - 2.0 * p.eval(s, t).unwrap()
                + p.eval(s - h, t).unwrap())
                / (h * h);
            (d2 - p.r0 * p.r0 * p.eval(s, t).unwrap()).abs()
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    fn params_strategy() -> impl Strategy<Value = KernelParams> {
        (0.1..10.0f64, 0.1..10.0f64, 0.1..10.0f64, 0.1..10.0f64, 0.1..5.0f64, 3u32..7)
            .prop_map(|(a, b, c, d, r, n)| KernelParams::new(a, b, c, d, r, n).unwrap())
    }

    proptest! {
        #[test]
        fn symmetry_is_exact(p in params_strategy(), s in 0.0..=1.0f64, t in 0.0..=1.0f64) {
            prop_assert_eq!(p.eval(s, t).unwrap(), p.eval(t, s).unwrap());
        }

        #[test]
        fn wronskian_is_minus_varrho(p in params_strategy(), x in 0.0..=1.0f64) {
            let w = p.phi(x) * p.psi_prime(x) - p.phi_prime(x) * p.psi(x);
            let v = p.varrho().unwrap();
            prop_assert!(((w + v) / v).abs() < 1e-10, "w = {}, varrho = {}", w, v);
        }

        #[test]
        fn scaled_form_matches_direct(p in params_strategy(), s in 0.0..=1.0f64, t in 0.0..=1.0f64) {
            let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
            let direct = p.phi(lo) * p.psi(hi) / p.varrho().unwrap();
            let k = p.eval(s, t).unwrap();
            prop_assert!((k - direct).abs() <= 1e-12 * direct.abs().max(1e-300), "{} vs {}", k, direct);
        }

        #[test]
        fn bounds_hold_on_grid(p in params_strategy()) {
            let r = verify_kernel_bounds(&p, 41, 1e-12).unwrap();
            prop_assert!(r.all_passed(), "{:?}", r);
        }
    }
}
