//! Picard fixed points against finite-difference solves of the induced
//! linear problems.

use annulus_core::conditions::contraction_constant;
use annulus_core::oracle::RobinProblem;
use annulus_core::quadrature::DEFAULT_CUTOFFS;
use annulus_core::solver::{picard_solve, residual_check, ProblemSpec};
use annulus_core::{Expr, GridFunction, KernelParams, WeightModel};

fn spec(g: &str, m: usize) -> ProblemSpec {
    let model = WeightModel::synthetic(KernelParams::unit(), Expr::constant(1.0, "t")).unwrap();
    ProblemSpec::new(vec![Expr::parse(g, "u").unwrap()], model, m, 0.0, 2.0).unwrap()
}

const UNIT: RobinProblem = RobinProblem {
    alpha: 1.0,
    beta: 1.0,
    gamma: 1.0,
    delta: 1.0,
    r0: 1.0,
};

/// `w <- FD(1 + w/100)` until the update stalls.
fn fd_affine_fixed_point(m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m];
    for _ in 0..100 {
        let rhs: Vec<f64> = w.iter().map(|v| 1.0 + 0.01 * v).collect();
        let next = UNIT.solve(&rhs).unwrap();
        let d = next
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        w = next;
        if d < 1e-15 {
            break;
        }
    }
    w
}

#[test]
fn linear_nonlinearity_contracts_to_zero() {
    let s = spec("u/100", 129);
    let (u, trace) = picard_solve(&s, &s.constant(1.0), 1e-12, 100).unwrap();
    assert!(trace.converged);
    assert!(u.sup_norm() <= 1e-11);
    let alpha = contraction_constant(&s.model, 0.01, 1, 2.0, 2.0, false, 1e-12, &DEFAULT_CUTOFFS)
        .unwrap();
    assert!(alpha.converged() && alpha.value < 1.0);
    let ratio = trace.empirical_ratio.unwrap();
    assert!(ratio <= alpha.value + 0.05, "{ratio} vs {}", alpha.value);
    for (r, d) in trace.rho_history.iter().zip(&trace.d_history) {
        assert!(*r <= d + 1e-12);
    }
}

#[test]
fn affine_fixed_point_matches_fd_iteration() {
    let mut errs = Vec::new();
    for m in [129, 257, 513, 1025] {
        let s = spec("1 + u/100", m);
        let (u, trace) = picard_solve(&s, &s.zero(), 1e-14, 200).unwrap();
        assert!(trace.converged);
        let w = GridFunction::new(0.0, 1.0, fd_affine_fixed_point(m)).unwrap();
        errs.push(u.sup_distance(&w).unwrap());
    }
    for pair in errs.windows(2) {
        assert!((3.0..5.0).contains(&(pair[0] / pair[1])), "{errs:?}");
    }
    assert!(errs[errs.len() - 1] <= 1e-6, "{errs:?}");
}

#[test]
fn affine_residual_shrinks_with_grid() {
    let r = |m| {
        let s = spec("1 + u/100", m);
        let (u, _) = picard_solve(&s, &s.zero(), 1e-14, 200).unwrap();
        residual_check(&s, &[u]).unwrap()
    };
    let (a, b) = (r(129), r(257));
    assert!((3.0..5.0).contains(&(a / b)), "{a} {b}");
}
