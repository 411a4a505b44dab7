use super::grid::Grid;
use super::problem::BvProblem;
use super::residual::{
    jacobian, kkt_residual_of, pack, residual_vector, step_b, step_set, unpack, KktResidual, Layout,
};
use super::steps::{
    adjoint_step, contract, forward_step, kron_apply, kron_apply_tr, start_rhs, terminal_rhs,
};
use crate::error::{Error, Result};
use crate::linalg::BandedLu;
use crate::method::PeerMethodSuite;

/// How the coupled system is attacked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Sweeps; on stall or failure, global Newton with horizon continuation.
    Auto,
    /// Sweeps only; stalls are errors.
    Sweeps,
    /// Global Newton with horizon continuation, no sweeps.
    Newton,
}

#[derive(Clone, Debug)]
pub struct KktOptions {
    pub strategy: Strategy,
    /// Sweep convergence: max stage update ≤ `sweep_tol·(1 + ‖Z‖∞)`.
    pub sweep_tol: f64,
    /// Acceptance: full residual ≤ `residual_tol·(1 + ‖Z‖∞)`.
    pub residual_tol: f64,
    pub max_sweeps: usize,
    pub max_newton: usize,
    /// Horizon subdivisions tried in turn by the continuation.
    pub continuation_stages: Vec<usize>,
}

impl Default for KktOptions {
    fn default() -> Self {
        Self {
            strategy: Strategy::Auto,
            sweep_tol: 1e-12,
            residual_tol: 1e-11,
            max_sweeps: 200,
            max_newton: 50,
            continuation_stages: vec![8, 16, 32, 64],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolvePath {
    Sweeps,
    Newton,
}

#[derive(Clone, Debug, Default)]
pub struct SolveStats {
    pub sweeps: usize,
    /// Max stage update per sweep.
    pub sweep_history: Vec<f64>,
    pub newton_iterations: usize,
    /// Horizon subdivisions of the successful continuation (0 if unused).
    pub continuation_stages: usize,
}

#[derive(Clone, Debug)]
pub struct DiscreteSolution {
    pub grid: Grid,
    pub nodes: Vec<f64>,
    pub s: usize,
    pub m: usize,
    /// `(N+1)·s·m` stage states, stage-major within each step.
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    pub yh_t: Vec<f64>,
    pub ph_0: Vec<f64>,
    pub residual_norm: f64,
    pub path: SolvePath,
    pub stats: SolveStats,
}

impl DiscreteSolution {
    pub fn y_stage(&self, n: usize, i: usize) -> &[f64] {
        let o = (n * self.s + i) * self.m;
        &self.y[o..o + self.m]
    }

    pub fn p_stage(&self, n: usize, i: usize) -> &[f64] {
        let o = (n * self.s + i) * self.m;
        &self.p[o..o + self.m]
    }

    pub fn stage_time(&self, n: usize, i: usize) -> f64 {
        self.grid.stage_time(n, self.nodes[i])
    }

    pub fn z_inf_norm(&self) -> f64 {
        inf(&self.y).max(inf(&self.p))
    }
}

fn inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Problem with the horizon replaced, for continuation.
struct Horizon<'a> {
    inner: &'a dyn BvProblem,
    t_final: f64,
}

impl BvProblem for Horizon<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn final_time(&self) -> f64 {
        self.t_final
    }
    fn initial_state(&self) -> Vec<f64> {
        self.inner.initial_state()
    }
    fn g(&self, y: &[f64], p: &[f64], out: &mut [f64]) {
        self.inner.g(y, p, out)
    }
    fn phi(&self, y: &[f64], p: &[f64], out: &mut [f64]) {
        self.inner.phi(y, p, out)
    }
    fn terminal_p(&self, y_t: &[f64], out: &mut [f64]) {
        self.inner.terminal_p(y_t, out)
    }
    fn g_jacobian(
        &self,
        y: &[f64],
        p: &[f64],
    ) -> Option<(crate::linalg::RMatrix, crate::linalg::RMatrix)> {
        self.inner.g_jacobian(y, p)
    }
    fn phi_jacobian(
        &self,
        y: &[f64],
        p: &[f64],
    ) -> Option<(crate::linalg::RMatrix, crate::linalg::RMatrix)> {
        self.inner.phi_jacobian(y, p)
    }
    fn terminal_jacobian(&self, y_t: &[f64]) -> Option<crate::linalg::RMatrix> {
        self.inner.terminal_jacobian(y_t)
    }
}

/// One forward sweep `n = 0..N` with `P` frozen, then one adjoint sweep
/// `n = N..0` with the new `Y`. Returns the max stage update.
fn sweep(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    grid: &Grid,
    y: &mut [f64],
    p: &mut [f64],
) -> Result<f64> {
    let m = prob.dim();
    let sm = suite.stages() * m;
    let last = grid.n;
    let h = grid.h;
    let mut upd = 0.0f64;
    for n in 0..=last {
        let rhs = if n == 0 {
            start_rhs(suite, prob, &p[..sm], h)
        } else {
            kron_apply(step_b(suite, n, last), &y[(n - 1) * sm..n * sm], m)
        };
        let r = n * sm..(n + 1) * sm;
        let new = forward_step(
            step_set(suite, n, last),
            &rhs,
            &p[r.clone()],
            h,
            prob,
            Some(&y[r.clone()]),
        )?;
        upd = upd.max(max_diff(&new, &y[r.clone()]));
        y[r].copy_from_slice(&new);
    }
    for n in (0..=last).rev() {
        let r = n * sm..(n + 1) * sm;
        let rhs = if n == last {
            terminal_rhs(suite, prob, &y[r.clone()])
        } else {
            kron_apply_tr(
                step_b(suite, n + 1, last),
                &p[(n + 1) * sm..(n + 2) * sm],
                m,
            )
        };
        let new = adjoint_step(
            step_set(suite, n, last),
            &rhs,
            &y[r.clone()],
            h,
            prob,
            Some(&p[r.clone()]),
        )?;
        upd = upd.max(max_diff(&new, &p[r.clone()]));
        p[r].copy_from_slice(&new);
    }
    if !upd.is_finite() {
        return Err(Error::NonFinite("sweep update".into()));
    }
    Ok(upd)
}

enum SweepOutcome {
    Converged,
    Stalled(String),
}

fn run_sweeps(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    grid: &Grid,
    y: &mut [f64],
    p: &mut [f64],
    opts: &KktOptions,
    stats: &mut SolveStats,
) -> SweepOutcome {
    for _ in 0..opts.max_sweeps {
        let upd = match sweep(suite, prob, grid, y, p) {
            Ok(u) => u,
            Err(e) => return SweepOutcome::Stalled(format!("sweep failed: {e}")),
        };
        stats.sweeps += 1;
        stats.sweep_history.push(upd);
        let scale = 1.0 + inf(y).max(inf(p));
        if upd <= opts.sweep_tol * scale {
            return SweepOutcome::Converged;
        }
        let h = &stats.sweep_history;
        if h.len() > 5 {
            let ratio = (upd / h[h.len() - 6]).powf(0.2);
            if ratio > 0.9 {
                return SweepOutcome::Stalled(format!(
                    "mean contraction {ratio:.3} over 5 sweeps, update {upd:.3e}"
                ));
            }
        }
    }
    SweepOutcome::Stalled(format!("{} sweeps without convergence", opts.max_sweeps))
}

/// Damped Newton on the full residual with a banded LU solve.
fn global_newton(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    grid: &Grid,
    layout: &Layout,
    z: &mut Vec<f64>,
    opts: &KktOptions,
    iterations: &mut usize,
) -> Result<f64> {
    let norm2 = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut r = residual_vector(suite, prob, grid, layout, z);
    for _ in 0..opts.max_newton {
        let rinf = inf(&r);
        if !rinf.is_finite() {
            return Err(Error::NonFinite("global residual".into()));
        }
        if rinf <= opts.residual_tol * (1.0 + inf(z)) {
            return Ok(rinf);
        }
        *iterations += 1;
        let lu = BandedLu::factor(jacobian(suite, prob, grid, layout, z))?;
        let dz = lu.solve(&r);
        let r0 = norm2(&r);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = z.iter().zip(&dz).map(|(a, d)| a - lambda * d).collect();
            let rt = residual_vector(suite, prob, grid, layout, &trial);
            let n = norm2(&rt);
            if n.is_finite() && n <= (1.0 - 1e-4 * lambda) * r0 {
                *z = trial;
                r = rt;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                // Quadratic phase can stall at the rounding floor.
                if rinf <= 1e2 * opts.residual_tol * (1.0 + inf(z)) {
                    return Ok(rinf);
                }
                return Err(Error::NoConvergence(format!(
                    "global Newton line search failed at residual {rinf:.3e}"
                )));
            }
        }
    }
    let rinf = inf(&r);
    if rinf <= opts.residual_tol * (1.0 + inf(z)) {
        return Ok(rinf);
    }
    Err(Error::NoConvergence(format!(
        "global Newton: {} iterations, residual {rinf:.3e}",
        opts.max_newton
    )))
}

/// Global Newton along horizons `T·k/K`, `k = 1..K`, warm-starting each from
/// the previous stage values (the grid index is unchanged, only `h` scales).
fn continuation_newton(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    grid: &Grid,
    layout: &Layout,
    z0: &[f64],
    opts: &KktOptions,
    stats: &mut SolveStats,
) -> Result<Vec<f64>> {
    let mut last_err = Error::NoConvergence("no continuation schedule".into());
    for &stages in &opts.continuation_stages {
        let mut z = z0.to_vec();
        let mut ok = true;
        for k in 1..=stages.max(1) {
            let t = grid.t_final * k as f64 / stages.max(1) as f64;
            let sub = Horizon {
                inner: prob,
                t_final: t,
            };
            let g = Grid::new(grid.n, t)?;
            match global_newton(
                suite,
                &sub,
                &g,
                layout,
                &mut z,
                opts,
                &mut stats.newton_iterations,
            ) {
                Ok(_) => {}
                Err(e) => {
                    last_err = e;
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            stats.continuation_stages = stages;
            return Ok(z);
        }
    }
    Err(last_err)
}

/// Solves the coupled discrete optimality system on `N + 1` steps.
pub fn solve_kkt(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    n: usize,
    opts: &KktOptions,
) -> Result<DiscreteSolution> {
    let grid = Grid::new(n, prob.final_time())?;
    let m = prob.dim();
    let s = suite.stages();
    let layout = Layout { s, m, steps: n + 1 };
    let y0 = prob.initial_state();
    if y0.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, problem dimension {m}",
            y0.len()
        )));
    }
    let mut y: Vec<f64> = (0..(n + 1) * s).flat_map(|_| y0.iter().copied()).collect();
    let mut p = vec![0.0; (n + 1) * s * m];
    let mut stats = SolveStats::default();

    let mut path = SolvePath::Sweeps;
    let need_newton = match opts.strategy {
        Strategy::Newton => true,
        Strategy::Sweeps | Strategy::Auto => {
            match run_sweeps(suite, prob, &grid, &mut y, &mut p, opts, &mut stats) {
                SweepOutcome::Converged => false,
                SweepOutcome::Stalled(msg) if opts.strategy == Strategy::Sweeps => {
                    return Err(Error::NoConvergence(format!(
                        "{msg}; history {:?}",
                        stats.sweep_history
                    )))
                }
                SweepOutcome::Stalled(_) => true,
            }
        }
    };
    if need_newton {
        path = SolvePath::Newton;
        let init: Vec<f64> = (0..(n + 1) * s).flat_map(|_| y0.iter().copied()).collect();
        let z0 = pack(&layout, &init, &vec![0.0; (n + 1) * s * m]);
        let z = continuation_newton(suite, prob, &grid, &layout, &z0, opts, &mut stats)?;
        (y, p) = unpack(&layout, &z);
    }

    let sm = s * m;
    let yh_t = contract(&suite.w, &y[n * sm..], m);
    let ph_0 = contract(&suite.v, &p[..sm], m);
    let res = kkt_residual_of(suite, prob, &grid, &y, &p, &yh_t, &ph_0)?.max();
    let scale = 1.0 + inf(&y).max(inf(&p));
    if res.is_nan() || res > opts.residual_tol * scale {
        return Err(Error::NoConvergence(format!(
            "final residual {res:.3e} exceeds {:.1e}·(1 + ‖Z‖∞)",
            opts.residual_tol
        )));
    }
    Ok(DiscreteSolution {
        grid,
        nodes: suite.nodes.values().to_vec(),
        s,
        m,
        y,
        p,
        yh_t,
        ph_0,
        residual_norm: res,
        path,
        stats,
    })
}

/// Re-evaluates the discrete equations at a solution.
pub fn kkt_residual(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    sol: &DiscreteSolution,
) -> Result<KktResidual> {
    if sol.s != suite.stages() || sol.m != prob.dim() {
        return Err(Error::DimensionMismatch(format!(
            "solution has s = {}, m = {}; suite/problem have s = {}, m = {}",
            sol.s,
            sol.m,
            suite.stages(),
            prob.dim()
        )));
    }
    kkt_residual_of(suite, prob, &sol.grid, &sol.y, &sol.p, &sol.yh_t, &sol.ph_0)
}
