//! Single-step stage solvers. Stage vectors are stored stage-major:
//! entry `i·m + k` is component `k` of stage `i`.

use super::problem::{g_jacobian_or_fd, phi_jacobian_or_fd, BvProblem};
use crate::error::{Error, Result};
use crate::linalg::{Lu, RMatrix};
use crate::method::{PeerMethodSuite, StageMatrixSet};

pub const STAGE_TOL: f64 = 1e-13;
pub const STAGE_MAX_ITER: usize = 50;
const MAX_HALVINGS: usize = 30;

/// `(M ⊗ I_m) x`.
pub fn kron_apply(mat: &RMatrix, x: &[f64], m: usize) -> Vec<f64> {
    let s = mat.rows();
    let mut out = vec![0.0; s * m];
    for i in 0..s {
        for j in 0..mat.cols() {
            let c = mat[(i, j)];
            if c != 0.0 {
                for k in 0..m {
                    out[i * m + k] += c * x[j * m + k];
                }
            }
        }
    }
    out
}

/// `(Mᵀ ⊗ I_m) x`.
pub fn kron_apply_tr(mat: &RMatrix, x: &[f64], m: usize) -> Vec<f64> {
    kron_apply(&mat.transpose(), x, m)
}

/// `u ⊗ z`.
pub fn kron_vec(u: &[f64], z: &[f64]) -> Vec<f64> {
    u.iter()
        .flat_map(|&ui| z.iter().map(move |&zk| ui * zk))
        .collect()
}

/// `(uᵀ ⊗ I_m) x`.
pub fn contract(u: &[f64], x: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (i, &ui) in u.iter().enumerate() {
        for k in 0..m {
            out[k] += ui * x[i * m + k];
        }
    }
    out
}

fn inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Right-hand side of the start step: `a⊗y₀ + h b⊗g(y₀, p_h(0))` with
/// `p_h(0) = (vᵀ⊗I)P₀`.
pub fn start_rhs(suite: &PeerMethodSuite, prob: &dyn BvProblem, p0: &[f64], h: f64) -> Vec<f64> {
    let m = prob.dim();
    let y0 = prob.initial_state();
    let ph0 = contract(&suite.v, p0, m);
    let mut g0 = vec![0.0; m];
    prob.g(&y0, &ph0, &mut g0);
    let mut rhs = kron_vec(&suite.a, &y0);
    for (r, v) in rhs.iter_mut().zip(kron_vec(&suite.b, &g0)) {
        *r += h * v;
    }
    rhs
}

/// Right-hand side of the last adjoint step: `w ⊗ p_h(T)`.
pub fn terminal_rhs(suite: &PeerMethodSuite, prob: &dyn BvProblem, y_last: &[f64]) -> Vec<f64> {
    let m = prob.dim();
    let yt = contract(&suite.w, y_last, m);
    let mut pt = vec![0.0; m];
    prob.terminal_p(&yt, &mut pt);
    kron_vec(&suite.w, &pt)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Direction {
    Forward,
    Adjoint,
}

/// `(M ⊗ I)x + F(x) = rhs` with `F` stagewise:
/// forward `Fᵢ = −hκᵢ g(xᵢ, Pᵢ)`, adjoint `Fᵢ = hκᵢ φ(Yᵢ, xᵢ)`.
struct StageSystem<'a> {
    dir: Direction,
    m: usize,
    mat: RMatrix,
    approx: Option<RMatrix>,
    k: &'a [f64],
    h: f64,
    prob: &'a dyn BvProblem,
    frozen: &'a [f64],
}

impl StageSystem<'_> {
    fn stages(&self) -> usize {
        self.k.len()
    }

    fn f_stage(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let m = self.m;
        let z = &self.frozen[i * m..(i + 1) * m];
        match self.dir {
            Direction::Forward => {
                self.prob.g(x, z, out);
                out.iter_mut().for_each(|v| *v *= -self.h * self.k[i]);
            }
            Direction::Adjoint => {
                self.prob.phi(z, x, out);
                out.iter_mut().for_each(|v| *v *= self.h * self.k[i]);
            }
        }
    }

    fn jac_stage(&self, i: usize, x: &[f64]) -> RMatrix {
        let m = self.m;
        let z = &self.frozen[i * m..(i + 1) * m];
        match self.dir {
            Direction::Forward => g_jacobian_or_fd(self.prob, x, z)
                .0
                .scale(-self.h * self.k[i]),
            Direction::Adjoint => phi_jacobian_or_fd(self.prob, z, x)
                .1
                .scale(self.h * self.k[i]),
        }
    }

    /// Stage order in which a triangular `M` can be solved.
    fn order(&self) -> Vec<usize> {
        match self.dir {
            Direction::Forward => (0..self.stages()).collect(),
            Direction::Adjoint => (0..self.stages()).rev().collect(),
        }
    }

    fn is_triangular(mat: &RMatrix, dir: Direction) -> bool {
        match dir {
            Direction::Forward => mat.is_lower_triangular(0.0),
            Direction::Adjoint => mat.transpose().is_lower_triangular(0.0),
        }
    }

    fn full_residual(&self, x: &[f64], rhs: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut r = kron_apply(&self.mat, x, m);
        let mut f = vec![0.0; m];
        for i in 0..self.stages() {
            self.f_stage(i, &x[i * m..(i + 1) * m], &mut f);
            for k in 0..m {
                r[i * m + k] += f[k] - rhs[i * m + k];
            }
        }
        r
    }

    fn check_finite(&self, x: &[f64], what: &str) -> Result<()> {
        if x.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(format!(
                "{what} in {:?} stage solve",
                self.dir
            )))
        }
    }

    /// Damped Newton on `diag·x + F_i(x) = r` for one stage.
    fn solve_stage(&self, i: usize, diag: f64, r: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
        let m = self.m;
        let mut x = guess.to_vec();
        let mut f = vec![0.0; m];
        let resid = |x: &[f64], f: &mut Vec<f64>| -> Vec<f64> {
            self.f_stage(i, x, f);
            (0..m).map(|k| diag * x[k] + f[k] - r[k]).collect()
        };
        let mut res = resid(&x, &mut f);
        self.check_finite(&res, "stage residual")?;
        for _ in 0..STAGE_MAX_ITER {
            let norm = inf(&res);
            if norm <= STAGE_TOL * (1.0 + inf(&x)) {
                return Ok(x);
            }
            let mut jac = self.jac_stage(i, &x);
            for k in 0..m {
                jac[(k, k)] += diag;
            }
            let lu = Lu::factor(&jac)
                .map_err(|e| Error::SingularStageJacobian(format!("stage {i}: {e}")))?;
            let delta = lu.solve_vec(&res);
            if inf(&delta) <= 4.0 * f64::EPSILON * (1.0 + inf(&x)) {
                // Rounding floor: no representable improvement left.
                return Ok(x);
            }
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..MAX_HALVINGS {
                let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a - lambda * d).collect();
                let rt = resid(&trial, &mut f);
                if rt.iter().all(|v| v.is_finite()) && inf(&rt) < norm {
                    x = trial;
                    res = rt;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                if norm <= 1e3 * STAGE_TOL * (1.0 + inf(&x)) {
                    return Ok(x);
                }
                return Err(Error::NewtonDivergence(format!(
                    "stage {i}: damping exhausted at residual {norm:.3e}"
                )));
            }
        }
        if inf(&res) <= 1e3 * STAGE_TOL * (1.0 + inf(&x)) {
            return Ok(x);
        }
        Err(Error::NewtonDivergence(format!(
            "stage {i}: no convergence in {STAGE_MAX_ITER} iterations (residual {:.3e})",
            inf(&res)
        )))
    }

    fn solve_triangular(&self, rhs: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
        let m = self.m;
        let mut x = guess.to_vec();
        for i in self.order() {
            let mut r = rhs[i * m..(i + 1) * m].to_vec();
            for j in 0..self.stages() {
                let c = self.mat[(i, j)];
                if j != i && c != 0.0 {
                    for k in 0..m {
                        r[k] -= c * x[j * m + k];
                    }
                }
            }
            let xi = self.solve_stage(i, self.mat[(i, i)], &r, &guess[i * m..(i + 1) * m])?;
            x[i * m..(i + 1) * m].copy_from_slice(&xi);
        }
        Ok(x)
    }

    /// Simplified Newton: the coupling matrix in the correction equation is
    /// replaced by the triangular `approx`, solved stage by stage.
    fn solve_simplified(&self, approx: &RMatrix, rhs: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
        let m = self.m;
        let s = self.stages();
        let mut x = guess.to_vec();
        let mut prev = f64::INFINITY;
        for _ in 0..STAGE_MAX_ITER {
            let res = self.full_residual(&x, rhs);
            self.check_finite(&res, "end-step residual")?;
            let norm = inf(&res);
            if norm <= STAGE_TOL * (1.0 + inf(&x)) {
                return Ok(x);
            }
            if norm >= prev && norm <= 1e3 * STAGE_TOL * (1.0 + inf(&x)) {
                return Ok(x);
            }
            if norm > 1e3 * prev {
                break;
            }
            prev = norm;
            let mut delta = vec![0.0; s * m];
            for i in self.order() {
                let mut r: Vec<f64> = res[i * m..(i + 1) * m].to_vec();
                for j in 0..s {
                    let c = approx[(i, j)];
                    if j != i && c != 0.0 {
                        for k in 0..m {
                            r[k] -= c * delta[j * m + k];
                        }
                    }
                }
                let mut jac = self.jac_stage(i, &x[i * m..(i + 1) * m]);
                for k in 0..m {
                    jac[(k, k)] += approx[(i, i)];
                }
                let lu = Lu::factor(&jac)
                    .map_err(|e| Error::SingularStageJacobian(format!("end stage {i}: {e}")))?;
                delta[i * m..(i + 1) * m].copy_from_slice(&lu.solve_vec(&r));
            }
            x.iter_mut().zip(&delta).for_each(|(a, d)| *a -= d);
        }
        Err(Error::NewtonDivergence(
            "simplified Newton on the end step did not converge".into(),
        ))
    }

    /// Full Newton with a dense `sm × sm` Jacobian, for full `M` without an
    /// approximation matrix.
    fn solve_dense(&self, rhs: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
        let m = self.m;
        let s = self.stages();
        let mut x = guess.to_vec();
        for _ in 0..STAGE_MAX_ITER {
            let res = self.full_residual(&x, rhs);
            self.check_finite(&res, "end-step residual")?;
            if inf(&res) <= STAGE_TOL * (1.0 + inf(&x)) {
                return Ok(x);
            }
            let mut jac = RMatrix::zeros(s * m, s * m);
            for i in 0..s {
                for j in 0..s {
                    for k in 0..m {
                        jac[(i * m + k, j * m + k)] = self.mat[(i, j)];
                    }
                }
                let ji = self.jac_stage(i, &x[i * m..(i + 1) * m]);
                for a in 0..m {
                    for b in 0..m {
                        jac[(i * m + a, i * m + b)] += ji[(a, b)];
                    }
                }
            }
            let lu = Lu::factor(&jac)
                .map_err(|e| Error::SingularStageJacobian(format!("end step: {e}")))?;
            let delta = lu.solve_vec(&res);
            if inf(&delta) <= 4.0 * f64::EPSILON * (1.0 + inf(&x)) {
                return Ok(x);
            }
            x.iter_mut().zip(&delta).for_each(|(a, d)| *a -= d);
        }
        Err(Error::NewtonDivergence(
            "dense end-step Newton did not converge".into(),
        ))
    }

    fn solve(&self, rhs: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
        if Self::is_triangular(&self.mat, self.dir) {
            self.solve_triangular(rhs, guess)
        } else if let Some(approx) = &self.approx {
            self.solve_simplified(approx, rhs, guess)
        } else {
            self.solve_dense(rhs, guess)
        }
    }
}

fn check_len(name: &str, v: &[f64], want: usize) -> Result<()> {
    if v.len() != want {
        return Err(Error::DimensionMismatch(format!(
            "{name} has length {}, expected {want}",
            v.len()
        )));
    }
    Ok(())
}

/// Solves `(Aₙ⊗I)Yₙ − h(Kₙ⊗I)G(Yₙ, Pₙ) = rhs` with `Pₙ` frozen.
pub fn forward_step(
    set: &StageMatrixSet,
    rhs: &[f64],
    p_n: &[f64],
    h: f64,
    prob: &dyn BvProblem,
    guess: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let sm = set.stages() * prob.dim();
    check_len("rhs", rhs, sm)?;
    check_len("P_n", p_n, sm)?;
    let guess = guess.map(<[f64]>::to_vec).unwrap_or_else(|| rhs.to_vec());
    check_len("guess", &guess, sm)?;
    StageSystem {
        dir: Direction::Forward,
        m: prob.dim(),
        mat: set.a().clone(),
        approx: set.a_tilde().cloned(),
        k: set.k(),
        h,
        prob,
        frozen: p_n,
    }
    .solve(rhs, &guess)
}

/// Solves `(Aₙᵀ⊗I)Pₙ + h(Kₙ⊗I)Φ(Yₙ, Pₙ) = rhs` with `Yₙ` frozen.
pub fn adjoint_step(
    set: &StageMatrixSet,
    rhs: &[f64],
    y_n: &[f64],
    h: f64,
    prob: &dyn BvProblem,
    guess: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let sm = set.stages() * prob.dim();
    check_len("rhs", rhs, sm)?;
    check_len("Y_n", y_n, sm)?;
    let guess = guess.map(<[f64]>::to_vec).unwrap_or_else(|| rhs.to_vec());
    check_len("guess", &guess, sm)?;
    StageSystem {
        dir: Direction::Adjoint,
        m: prob.dim(),
        mat: set.a().transpose(),
        approx: set.a_tilde().map(RMatrix::transpose),
        k: set.k(),
        h,
        prob,
        frozen: y_n,
    }
    .solve(rhs, &guess)
}
