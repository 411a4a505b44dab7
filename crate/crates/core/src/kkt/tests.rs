use num_complex::Complex64;

use super::*;
use crate::linalg::{inverse, RMatrix};
use crate::method::{bdf3_standard, builtin_suite, BuiltinMethod, PeerMethodSuite};
use crate::problems::{Rayleigh, VanDerPol};
use crate::stability::stability_matrix;

/// `y′ = λy + γp`, `p′ = −λp + βy`, `y(0) = 1`, `p(T) = 0`.
struct Linear {
    lambda: f64,
    gamma: f64,
    beta: f64,
    t: f64,
}

impl BvProblem for Linear {
    fn name(&self) -> &str {
        "linear"
    }
    fn dim(&self) -> usize {
        1
    }
    fn final_time(&self) -> f64 {
        self.t
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![1.0]
    }
    fn g(&self, y: &[f64], p: &[f64], out: &mut [f64]) {
        out[0] = self.lambda * y[0] + self.gamma * p[0];
    }
    fn phi(&self, y: &[f64], p: &[f64], out: &mut [f64]) {
        out[0] = -self.lambda * p[0] + self.beta * y[0];
    }
    fn terminal_p(&self, _y: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
}

/// Rayleigh dynamics on a shorter horizon, where sweeps contract.
struct ShortRayleigh(f64);

impl BvProblem for ShortRayleigh {
    fn name(&self) -> &str {
        "short_rayleigh"
    }
    fn dim(&self) -> usize {
        2
    }
    fn final_time(&self) -> f64 {
        self.0
    }
    fn initial_state(&self) -> Vec<f64> {
        Rayleigh.initial_state()
    }
    fn g(&self, y: &[f64], p: &[f64], out: &mut [f64]) {
        Rayleigh.g(y, p, out)
    }
    fn phi(&self, y: &[f64], p: &[f64], out: &mut [f64]) {
        Rayleigh.phi(y, p, out)
    }
    fn terminal_p(&self, y: &[f64], out: &mut [f64]) {
        Rayleigh.terminal_p(y, out)
    }
    fn g_jacobian(&self, y: &[f64], p: &[f64]) -> Option<(RMatrix, RMatrix)> {
        Rayleigh.g_jacobian(y, p)
    }
    fn phi_jacobian(&self, y: &[f64], p: &[f64]) -> Option<(RMatrix, RMatrix)> {
        Rayleigh.phi_jacobian(y, p)
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn linear(lambda: f64) -> Linear {
    Linear {
        lambda,
        gamma: 0.0,
        beta: 0.0,
        t: 1.0,
    }
}

#[test]
fn source_free_step_propagates() {
    let set = bdf3_standard();
    let prev = [0.3, -1.0, 2.0];
    let rhs = kron_apply(set.b().unwrap(), &prev, 1);
    let y = forward_step(&set, &rhs, &[0.0; 3], 0.1, &linear(0.0), None).unwrap();
    let want = inverse(set.a())
        .unwrap()
        .mul(set.b().unwrap())
        .matvec(&prev);
    assert!(max_diff(&y, &want) < 1e-14);
}

#[test]
fn dahlquist_step_matches_stability_matrix() {
    let set = bdf3_standard();
    let prev = [1.0, 0.8, 0.6];
    let (lambda, h) = (-1.0, 0.1);
    let rhs = kron_apply(set.b().unwrap(), &prev, 1);
    let y = forward_step(&set, &rhs, &[0.0; 3], h, &linear(lambda), None).unwrap();
    let m = stability_matrix(&set, Complex64::new(h * lambda, 0.0)).unwrap();
    let want = m.matvec(&prev.map(|v| Complex64::new(v, 0.0)));
    for (a, b) in y.iter().zip(&want) {
        assert!((a - b.re).abs() < 1e-13 && b.im == 0.0);
    }
}

#[test]
fn full_end_step_solves_linear_problem() {
    let end = builtin_suite(BuiltinMethod::Bdf3o32).end;
    let prev = [1.0, 0.9, 0.7];
    let (lambda, h) = (-50.0, 0.05);
    let rhs = kron_apply(end.b().unwrap(), &prev, 1);
    let y = forward_step(&end, &rhs, &[0.0; 3], h, &linear(lambda), None).unwrap();
    let m = stability_matrix(&end, Complex64::new(h * lambda, 0.0)).unwrap();
    let want = m.matvec(&prev.map(|v| Complex64::new(v, 0.0)));
    for (a, b) in y.iter().zip(&want) {
        assert!((a - b.re).abs() < 1e-12);
    }
}

#[test]
fn adjoint_step_cases() {
    let set = bdf3_standard();
    let zero = adjoint_step(&set, &[0.0; 3], &[1.0, 2.0, 3.0], 0.1, &linear(0.0), None).unwrap();
    assert!(zero.iter().all(|&v| v == 0.0));
    // φ = −λp: (Aᵀ − hλK)P = BᵀP_next.
    let (lambda, h) = (-2.0, 0.1);
    let next = [0.5, -0.25, 1.0];
    let rhs = kron_apply_tr(set.b().unwrap(), &next, 1);
    let p = adjoint_step(&set, &rhs, &[0.0; 3], h, &linear(lambda), None).unwrap();
    let lhs = set.a().transpose().sub(&set.k_matrix().scale(h * lambda));
    let want = inverse(&lhs)
        .unwrap()
        .mul(&set.b().unwrap().transpose())
        .matvec(&next);
    assert!(max_diff(&p, &want) < 1e-13);
    let end = builtin_suite(BuiltinMethod::Bdf3o32).end;
    let p = adjoint_step(&end, &rhs, &[0.0; 3], h, &linear(lambda), None).unwrap();
    let lhs = end.a().transpose().sub(&end.k_matrix().scale(h * lambda));
    let want = inverse(&lhs).unwrap().matvec(&rhs);
    assert!(max_diff(&p, &want) < 1e-12);
}

#[test]
fn decoupled_toy_is_exact() {
    // g = p, φ = 0, p(T) = 0: P ≡ 0 and Y ≡ 1.
    let toy = Linear {
        lambda: 0.0,
        gamma: 1.0,
        beta: 0.0,
        t: 1.0,
    };
    for method in BuiltinMethod::ALL {
        let suite = builtin_suite(method);
        let sol = solve_kkt(&suite, &toy, 10, &KktOptions::default()).unwrap();
        assert!(sol.p.iter().all(|&v| v.abs() < 1e-12));
        assert!(sol.y.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(kkt_residual(&suite, &toy, &sol).unwrap().max() <= 1e-14);
    }
}

#[test]
fn forward_only_matches_standalone_integration() {
    let prob = linear(-3.0);
    let suite = builtin_suite(BuiltinMethod::Peer3o32w);
    let sol = solve_kkt(&suite, &prob, 12, &KktOptions::default()).unwrap();
    let h = sol.grid.h;
    let mut prev = forward_step(
        &suite.start,
        &start_rhs(&suite, &prob, &[0.0; 3], h),
        &[0.0; 3],
        h,
        &prob,
        None,
    )
    .unwrap();
    assert!(max_diff(&prev, &sol.y[..3]) < 1e-12);
    for n in 1..=12 {
        let set = step_set(&suite, n, 12);
        let rhs = kron_apply(set.b().unwrap(), &prev, 1);
        prev = forward_step(set, &rhs, &[0.0; 3], h, &prob, None).unwrap();
        assert!(max_diff(&prev, &sol.y[n * 3..(n + 1) * 3]) < 1e-12);
    }
}

#[test]
fn residual_sensitivity_and_pairing() {
    let suite = builtin_suite(BuiltinMethod::Bdf3o32);
    let prob = Rayleigh;
    let n = 20;
    let sol = solve_kkt(&suite, &prob, n, &KktOptions::default()).unwrap();
    let res = kkt_residual(&suite, &prob, &sol).unwrap();
    assert!(res.max() <= 1e-11 * (1.0 + sol.z_inf_norm()));
    let mut bumped = sol.clone();
    bumped.y[5 * 6 + 3] += 1e-6;
    assert!(kkt_residual(&suite, &prob, &bumped).unwrap().max() >= 1e-7);

    // Step N−1 pairs the standard A, K with the end B.
    let sm = 6;
    let pn1 = &sol.p[(n - 1) * sm..n * sm];
    let pn = &sol.p[n * sm..];
    let yn1 = &sol.y[(n - 1) * sm..n * sm];
    let eval = |b: &RMatrix| {
        let mut r = kron_apply_tr(suite.standard.a(), pn1, 2);
        let sub = kron_apply_tr(b, pn, 2);
        let mut f = [0.0; 2];
        for i in 0..3 {
            prob.phi(&yn1[2 * i..2 * i + 2], &pn1[2 * i..2 * i + 2], &mut f);
            for k in 0..2 {
                r[2 * i + k] += sol.grid.h * suite.standard.k()[i] * f[k] - sub[2 * i + k];
            }
        }
        r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    assert!(eval(suite.end.b().unwrap()) <= 1e-13 * (1.0 + sol.z_inf_norm()));
    assert!(eval(suite.standard.b().unwrap()) > 1e-6);
}

#[test]
fn sweeps_and_newton_reach_same_solution() {
    let prob = ShortRayleigh(0.5);
    for method in BuiltinMethod::ALL {
        let suite: PeerMethodSuite = builtin_suite(method);
        let sweeps = solve_kkt(
            &suite,
            &prob,
            16,
            &KktOptions {
                strategy: Strategy::Sweeps,
                ..KktOptions::default()
            },
        )
        .unwrap();
        assert_eq!(sweeps.path, SolvePath::Sweeps);
        let newton = solve_kkt(
            &suite,
            &prob,
            16,
            &KktOptions {
                strategy: Strategy::Newton,
                ..KktOptions::default()
            },
        )
        .unwrap();
        assert_eq!(newton.path, SolvePath::Newton);
        assert!(max_diff(&sweeps.y, &newton.y) < 1e-9);
        assert!(max_diff(&sweeps.p, &newton.p) < 1e-9);
    }
}

#[test]
fn sweeps_only_reports_stall() {
    let suite = builtin_suite(BuiltinMethod::Bdf3o32);
    let err = solve_kkt(
        &suite,
        &Rayleigh,
        20,
        &KktOptions {
            strategy: Strategy::Sweeps,
            ..KktOptions::default()
        },
    )
    .unwrap_err();
    assert!(matches!(err, crate::Error::NoConvergence(_)), "{err}");
}

#[test]
fn grid_rejects_degenerate_input() {
    assert!(Grid::new(1, 1.0).is_err());
    assert!(Grid::new(4, 0.0).is_err());
    let g = Grid::new(4, 2.5).unwrap();
    assert_eq!(g.h, 0.5);
    assert_eq!(g.stage_time(4, 1.0), 2.5);
}

#[test]
fn evaluator_reproduces_stage_values() {
    let suite = builtin_suite(BuiltinMethod::Bdf3o32);
    let vdp = VanDerPol::new(0.1).unwrap();
    let sol = solve_kkt(&suite, &vdp, 40, &KktOptions::default()).unwrap();
    let ev = DenseEvaluator::from_solution(&sol).unwrap();
    for (n, i) in [(0, 0), (7, 1), (40, 2)] {
        let (y, p) = ev.eval(sol.stage_time(n, i));
        assert_eq!(y, sol.y_stage(n, i));
        assert_eq!(p, sol.p_stage(n, i));
    }
    // Degree-5 interpolation reproduces quintics away from the nodes.
    let mut q = sol.clone();
    let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3) - 0.1 * t.powi(5);
    for n in 0..=40 {
        for i in 0..3 {
            let t = sol.stage_time(n, i);
            let o = (n * 3 + i) * 2;
            q.y[o] = f(t);
            q.p[o + 1] = -f(t);
        }
    }
    let ev = DenseEvaluator::from_solution(&q).unwrap();
    for t in [0.0, 0.0123, 1.0, 1.234, 1.99] {
        let (y, p) = ev.eval(t);
        assert!(
            (y[0] - f(t)).abs() < 1e-11 && (p[1] + f(t)).abs() < 1e-11,
            "{t}"
        );
    }
}
