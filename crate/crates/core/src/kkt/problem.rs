use crate::linalg::RMatrix;

/// Eliminated optimality system `y′ = g(y, p)`, `p′ = φ(y, p)` with
/// `y(0) = y₀` and `p(T) = terminal_p(y(T))`. Autonomous in time.
pub trait BvProblem: Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn final_time(&self) -> f64;
    fn initial_state(&self) -> Vec<f64>;
    fn g(&self, y: &[f64], p: &[f64], out: &mut [f64]);
    fn phi(&self, y: &[f64], p: &[f64], out: &mut [f64]);
    fn terminal_p(&self, y_t: &[f64], out: &mut [f64]);

    /// `(∂g/∂y, ∂g/∂p)` if known in closed form.
    fn g_jacobian(&self, _y: &[f64], _p: &[f64]) -> Option<(RMatrix, RMatrix)> {
        None
    }
    /// `(∂φ/∂y, ∂φ/∂p)` if known in closed form.
    fn phi_jacobian(&self, _y: &[f64], _p: &[f64]) -> Option<(RMatrix, RMatrix)> {
        None
    }
    fn terminal_jacobian(&self, _y_t: &[f64]) -> Option<RMatrix> {
        None
    }
}

/// Central-difference step `1e−7·(1 + |x|)`.
fn fd_step(x: f64) -> f64 {
    1e-7 * (1.0 + x.abs())
}

fn fd_columns(m: usize, x: &[f64], mut f: impl FnMut(&[f64], &mut [f64])) -> RMatrix {
    let mut jac = RMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    let (mut fp, mut fm) = (vec![0.0; m], vec![0.0; m]);
    for j in 0..x.len() {
        let step = fd_step(x[j]);
        xp[j] = x[j] + step;
        f(&xp, &mut fp);
        xp[j] = x[j] - step;
        f(&xp, &mut fm);
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    jac
}

/// Analytic Jacobians of `g` when available, else central differences.
pub fn g_jacobian_or_fd(prob: &dyn BvProblem, y: &[f64], p: &[f64]) -> (RMatrix, RMatrix) {
    prob.g_jacobian(y, p).unwrap_or_else(|| {
        let m = prob.dim();
        (
            fd_columns(m, y, |yy, out| prob.g(yy, p, out)),
            fd_columns(m, p, |pp, out| prob.g(y, pp, out)),
        )
    })
}

pub fn phi_jacobian_or_fd(prob: &dyn BvProblem, y: &[f64], p: &[f64]) -> (RMatrix, RMatrix) {
    prob.phi_jacobian(y, p).unwrap_or_else(|| {
        let m = prob.dim();
        (
            fd_columns(m, y, |yy, out| prob.phi(yy, p, out)),
            fd_columns(m, p, |pp, out| prob.phi(y, pp, out)),
        )
    })
}

pub fn terminal_jacobian_or_fd(prob: &dyn BvProblem, y_t: &[f64]) -> RMatrix {
    prob.terminal_jacobian(y_t)
        .unwrap_or_else(|| fd_columns(prob.dim(), y_t, |yy, out| prob.terminal_p(yy, out)))
}

/// Finite-difference Jacobians regardless of analytic availability; used to
/// check analytic implementations.
pub fn fd_jacobians(prob: &dyn BvProblem, y: &[f64], p: &[f64]) -> [RMatrix; 4] {
    let m = prob.dim();
    [
        fd_columns(m, y, |yy, out| prob.g(yy, p, out)),
        fd_columns(m, p, |pp, out| prob.g(y, pp, out)),
        fd_columns(m, y, |yy, out| prob.phi(yy, p, out)),
        fd_columns(m, p, |pp, out| prob.phi(y, pp, out)),
    ]
}
