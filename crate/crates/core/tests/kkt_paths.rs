use proptest::prelude::*;

use peer_adjoint::kkt::{
    kkt_residual, solve_kkt, BvProblem, KktOptions, SolvePath, Strategy as Solve,
};
use peer_adjoint::method::{builtin_suite, BuiltinMethod};

/// Weakly coupled scalar system with a quadratic state term:
/// `y′ = λy + μy² − γp`, `p′ = −(λ + 2μy)p − βy`, `p(T) = σ·y(T)`.
#[derive(Debug, Clone)]
struct Weak {
    lambda: f64,
    mu: f64,
    gamma: f64,
    beta: f64,
    sigma: f64,
    t: f64,
}

impl BvProblem for Weak {
    fn name(&self) -> &str {
        "weak"
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
        out[0] = self.lambda * y[0] + self.mu * y[0] * y[0] - self.gamma * p[0];
    }
    fn phi(&self, y: &[f64], p: &[f64], out: &mut [f64]) {
        out[0] = -(self.lambda + 2.0 * self.mu * y[0]) * p[0] - self.beta * y[0];
    }
    fn terminal_p(&self, y: &[f64], out: &mut [f64]) {
        out[0] = self.sigma * y[0];
    }
}

fn weak() -> impl Strategy<Value = Weak> {
    (
        -2.0f64..0.5,
        -0.3f64..0.3,
        0.0f64..0.5,
        0.0f64..0.5,
        0.0f64..0.5,
        0.3f64..1.0,
    )
        .prop_map(|(lambda, mu, gamma, beta, sigma, t)| Weak {
            lambda,
            mu,
            gamma,
            beta,
            sigma,
            t,
        })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sweeps_and_newton_agree(prob in weak(), n in 4usize..24, which in 0usize..3) {
        let suite = builtin_suite(BuiltinMethod::ALL[which]);
        let with = |strategy| KktOptions { strategy, ..KktOptions::default() };
        let sweeps = solve_kkt(&suite, &prob, n, &with(Solve::Sweeps)).unwrap();
        let newton = solve_kkt(&suite, &prob, n, &with(Solve::Newton)).unwrap();
        prop_assert_eq!(sweeps.path, SolvePath::Sweeps);
        prop_assert_eq!(newton.path, SolvePath::Newton);
        prop_assert!(max_diff(&sweeps.y, &newton.y) <= 1e-9);
        prop_assert!(max_diff(&sweeps.p, &newton.p) <= 1e-9);
        for sol in [&sweeps, &newton] {
            let r = kkt_residual(&suite, &prob, sol).unwrap().max();
            prop_assert!(r <= 1e-11 * (1.0 + sol.z_inf_norm()), "{r}");
        }
    }
}
