//! Residual of the coupled forward/adjoint scheme and its banded Jacobian.
//!
//! Unknown ordering: block `n` holds `(Yₙ, Pₙ)`, so entry
//! `n·2sm + v·sm + i·m + k` is component `k` of stage `i` of `Yₙ` (`v = 0`)
//! or `Pₙ` (`v = 1`). Rows follow the same layout: forward equations of step
//! `n`, then adjoint equations of step `n`.

use super::grid::Grid;
use super::problem::{g_jacobian_or_fd, phi_jacobian_or_fd, terminal_jacobian_or_fd, BvProblem};
use super::steps::{contract, kron_apply, kron_apply_tr, start_rhs, terminal_rhs};
use crate::error::{Error, Result};
use crate::linalg::{BandedMatrix, RMatrix};
use crate::method::{PeerMethodSuite, StageMatrixSet};

/// Coefficient set used by step `n` of `0..=N`.
pub fn step_set(suite: &PeerMethodSuite, n: usize, last: usize) -> &StageMatrixSet {
    if n == 0 {
        &suite.start
    } else if n == last {
        &suite.end
    } else {
        &suite.standard
    }
}

/// `Bₙ` for `n ≥ 1`.
pub fn step_b(suite: &PeerMethodSuite, n: usize, last: usize) -> &RMatrix {
    debug_assert!(n >= 1);
    step_set(suite, n, last)
        .b()
        .expect("non-start sets carry B")
}

/// Per-group ∞-norms of the discrete equations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KktResidual {
    pub start_forward: f64,
    pub interior_forward: f64,
    pub end_forward: f64,
    /// Adjoint steps `0..N−1`.
    pub interior_adjoint: f64,
    pub end_adjoint: f64,
    /// Consistency of the stored `y_h(T)`, `p_h(0)` with the stages.
    pub boundary: f64,
}

impl KktResidual {
    pub fn max(&self) -> f64 {
        [
            self.start_forward,
            self.interior_forward,
            self.end_forward,
            self.interior_adjoint,
            self.end_adjoint,
            self.boundary,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub(crate) struct Layout {
    pub s: usize,
    pub m: usize,
    pub steps: usize,
}

impl Layout {
    pub fn sm(&self) -> usize {
        self.s * self.m
    }
    pub fn nb(&self) -> usize {
        2 * self.sm()
    }
    pub fn len(&self) -> usize {
        self.steps * self.nb()
    }
    pub fn y_off(&self, n: usize) -> usize {
        n * self.nb()
    }
    pub fn p_off(&self, n: usize) -> usize {
        n * self.nb() + self.sm()
    }
    pub fn bandwidth(&self) -> usize {
        3 * self.sm() - 1
    }
}

pub(crate) fn pack(layout: &Layout, y: &[f64], p: &[f64]) -> Vec<f64> {
    let sm = layout.sm();
    let mut z = Vec::with_capacity(layout.len());
    for n in 0..layout.steps {
        z.extend_from_slice(&y[n * sm..(n + 1) * sm]);
        z.extend_from_slice(&p[n * sm..(n + 1) * sm]);
    }
    z
}

pub(crate) fn unpack(layout: &Layout, z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let sm = layout.sm();
    let mut y = Vec::with_capacity(layout.steps * sm);
    let mut p = Vec::with_capacity(layout.steps * sm);
    for n in 0..layout.steps {
        y.extend_from_slice(&z[layout.y_off(n)..layout.y_off(n) + sm]);
        p.extend_from_slice(&z[layout.p_off(n)..layout.p_off(n) + sm]);
    }
    (y, p)
}

/// Forward and adjoint residuals, each `(N+1)·s·m` long in stage order.
pub(crate) fn residual_parts(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    grid: &Grid,
    y: &[f64],
    p: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let m = prob.dim();
    let s = suite.stages();
    let sm = s * m;
    let last = grid.n;
    let h = grid.h;
    let mut ry = vec![0.0; (last + 1) * sm];
    let mut rp = vec![0.0; (last + 1) * sm];
    let mut f = vec![0.0; m];
    for n in 0..=last {
        let set = step_set(suite, n, last);
        let yn = &y[n * sm..(n + 1) * sm];
        let pn = &p[n * sm..(n + 1) * sm];
        let mut fy = kron_apply(set.a(), yn, m);
        let sub = if n == 0 {
            start_rhs(suite, prob, pn, h)
        } else {
            kron_apply(step_b(suite, n, last), &y[(n - 1) * sm..n * sm], m)
        };
        let mut fp = kron_apply_tr(set.a(), pn, m);
        let sub_p = if n == last {
            terminal_rhs(suite, prob, yn)
        } else {
            kron_apply_tr(
                step_b(suite, n + 1, last),
                &p[(n + 1) * sm..(n + 2) * sm],
                m,
            )
        };
        for i in 0..s {
            let (yi, pi) = (&yn[i * m..(i + 1) * m], &pn[i * m..(i + 1) * m]);
            let hk = h * set.k()[i];
            prob.g(yi, pi, &mut f);
            for k in 0..m {
                fy[i * m + k] -= hk * f[k];
            }
            prob.phi(yi, pi, &mut f);
            for k in 0..m {
                fp[i * m + k] += hk * f[k];
            }
        }
        for j in 0..sm {
            ry[n * sm + j] = fy[j] - sub[j];
            rp[n * sm + j] = fp[j] - sub_p[j];
        }
    }
    (ry, rp)
}

pub(crate) fn residual_vector(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    grid: &Grid,
    layout: &Layout,
    z: &[f64],
) -> Vec<f64> {
    let (y, p) = unpack(layout, z);
    let (ry, rp) = residual_parts(suite, prob, grid, &y, &p);
    pack(layout, &ry, &rp)
}

/// Adds `(M ⊗ J)`-style blocks: `coef(i, j) · blk` at stage block `(i, j)`.
fn add_kron(
    mat: &mut BandedMatrix,
    row0: usize,
    col0: usize,
    m: usize,
    s: usize,
    coef: impl Fn(usize, usize) -> f64,
    blk: Option<&RMatrix>,
) {
    for i in 0..s {
        for j in 0..s {
            let c = coef(i, j);
            if c == 0.0 {
                continue;
            }
            for a in 0..m {
                match blk {
                    None => mat.add(row0 + i * m + a, col0 + j * m + a, c),
                    Some(b) => {
                        for bb in 0..m {
                            let v = c * b[(a, bb)];
                            if v != 0.0 {
                                mat.add(row0 + i * m + a, col0 + j * m + bb, v);
                            }
                        }
                    }
                }
            }
        }
    }
}

fn add_block(mat: &mut BandedMatrix, row0: usize, col0: usize, blk: &RMatrix, scale: f64) {
    for a in 0..blk.rows() {
        for b in 0..blk.cols() {
            let v = scale * blk[(a, b)];
            if v != 0.0 {
                mat.add(row0 + a, col0 + b, v);
            }
        }
    }
}

pub(crate) fn jacobian(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    grid: &Grid,
    layout: &Layout,
    z: &[f64],
) -> BandedMatrix {
    let (s, m, sm) = (layout.s, layout.m, layout.sm());
    let last = grid.n;
    let h = grid.h;
    let bw = layout.bandwidth();
    let mut jac = BandedMatrix::zeros(layout.len(), bw, bw);
    for n in 0..=last {
        let set = step_set(suite, n, last);
        let a = set.a();
        let (ry, rp) = (layout.y_off(n), layout.p_off(n));
        let (cy, cp) = (layout.y_off(n), layout.p_off(n));
        add_kron(&mut jac, ry, cy, m, s, |i, j| a[(i, j)], None);
        add_kron(&mut jac, rp, cp, m, s, |i, j| a[(j, i)], None);
        for i in 0..s {
            let yi = &z[cy + i * m..cy + (i + 1) * m];
            let pi = &z[cp + i * m..cp + (i + 1) * m];
            let hk = h * set.k()[i];
            let (gy, gp) = g_jacobian_or_fd(prob, yi, pi);
            let (fy, fp) = phi_jacobian_or_fd(prob, yi, pi);
            add_block(&mut jac, ry + i * m, cy + i * m, &gy, -hk);
            add_block(&mut jac, ry + i * m, cp + i * m, &gp, -hk);
            add_block(&mut jac, rp + i * m, cy + i * m, &fy, hk);
            add_block(&mut jac, rp + i * m, cp + i * m, &fp, hk);
        }
        if n == 0 {
            // −h b⊗g(y₀, (vᵀ⊗I)P₀) depends on P₀ through p_h(0).
            let y0 = prob.initial_state();
            let ph0 = contract(&suite.v, &z[cp..cp + sm], m);
            let (_, gp0) = g_jacobian_or_fd(prob, &y0, &ph0);
            add_kron(
                &mut jac,
                ry,
                cp,
                m,
                s,
                |i, j| -h * suite.b[i] * suite.v[j],
                Some(&gp0),
            );
        } else {
            let b = step_b(suite, n, last);
            add_kron(
                &mut jac,
                ry,
                layout.y_off(n - 1),
                m,
                s,
                |i, j| -b[(i, j)],
                None,
            );
        }
        if n == last {
            // −w⊗p_T((wᵀ⊗I)Y_N).
            let yt = contract(&suite.w, &z[cy..cy + sm], m);
            let jt = terminal_jacobian_or_fd(prob, &yt);
            add_kron(
                &mut jac,
                rp,
                cy,
                m,
                s,
                |i, j| -suite.w[i] * suite.w[j],
                Some(&jt),
            );
        } else {
            let b = step_b(suite, n + 1, last);
            add_kron(
                &mut jac,
                rp,
                layout.p_off(n + 1),
                m,
                s,
                |i, j| -b[(j, i)],
                None,
            );
        }
    }
    jac
}

fn inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Re-evaluates every discrete equation for the given stage values.
pub fn kkt_residual_of(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    grid: &Grid,
    y: &[f64],
    p: &[f64],
    yh_t: &[f64],
    ph_0: &[f64],
) -> Result<KktResidual> {
    let m = prob.dim();
    let sm = suite.stages() * m;
    let want = (grid.n + 1) * sm;
    if y.len() != want || p.len() != want || yh_t.len() != m || ph_0.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "expected {want} stage values and boundary vectors of length {m}"
        )));
    }
    let (ry, rp) = residual_parts(suite, prob, grid, y, p);
    let last = grid.n;
    let yt = contract(&suite.w, &y[last * sm..], m);
    let p0 = contract(&suite.v, &p[..sm], m);
    let boundary = yt
        .iter()
        .zip(yh_t)
        .chain(p0.iter().zip(ph_0))
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    Ok(KktResidual {
        start_forward: inf(&ry[..sm]),
        interior_forward: inf(&ry[sm..last * sm]),
        end_forward: inf(&ry[last * sm..]),
        interior_adjoint: inf(&rp[..last * sm]),
        end_adjoint: inf(&rp[last * sm..]),
        boundary,
    })
}
