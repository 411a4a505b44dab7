use super::problem::BvProblem;
use super::solver::{solve_kkt, DiscreteSolution, KktOptions};
use crate::error::{Error, Result};
use crate::method::PeerMethodSuite;

/// Points per local interpolant (degree 5).
pub const INTERPOLATION_POINTS: usize = 6;

/// Piecewise degree-5 interpolation of `(y, p)` through the nearest six
/// stage points of a fine solution. Immutable after construction.
#[derive(Clone, Debug)]
pub struct DenseEvaluator {
    m: usize,
    times: Vec<f64>,
    /// Row `j`: `y` then `p` at `times[j]`.
    values: Vec<f64>,
    pub n_ref: usize,
}

impl DenseEvaluator {
    pub fn from_solution(sol: &DiscreteSolution) -> Result<Self> {
        let m = sol.m;
        let mut pts: Vec<(f64, usize, usize)> = (0..=sol.grid.n)
            .flat_map(|n| (0..sol.s).map(move |i| (n, i)))
            .map(|(n, i)| (sol.stage_time(n, i), n, i))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        if pts.len() < INTERPOLATION_POINTS {
            return Err(Error::InvalidArgument(format!(
                "need at least {INTERPOLATION_POINTS} stage points, got {}",
                pts.len()
            )));
        }
        let mut values = Vec::with_capacity(pts.len() * 2 * m);
        for &(_, n, i) in &pts {
            values.extend_from_slice(sol.y_stage(n, i));
            values.extend_from_slice(sol.p_stage(n, i));
        }
        Ok(Self {
            m,
            times: pts.iter().map(|p| p.0).collect(),
            values,
            n_ref: sol.grid.n,
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("nonempty"))
    }

    /// `(y(t), p(t))`; outside the stage range the nearest interpolant is
    /// extrapolated.
    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let w = 2 * self.m;
        let len = self.times.len();
        let idx = self.times.partition_point(|&x| x < t);
        if idx < len && self.times[idx] == t {
            let row = &self.values[idx * w..(idx + 1) * w];
            return (row[..self.m].to_vec(), row[self.m..].to_vec());
        }
        let start = idx
            .saturating_sub(INTERPOLATION_POINTS / 2)
            .min(len - INTERPOLATION_POINTS);
        let nodes = &self.times[start..start + INTERPOLATION_POINTS];
        let mut out = vec![0.0; w];
        for (j, &tj) in nodes.iter().enumerate() {
            let mut l = 1.0;
            for (k, &tk) in nodes.iter().enumerate() {
                if k != j {
                    l *= (t - tk) / (tj - tk);
                }
            }
            let row = &self.values[(start + j) * w..(start + j + 1) * w];
            out.iter_mut().zip(row).for_each(|(o, v)| *o += l * v);
        }
        let p = out.split_off(self.m);
        (out, p)
    }
}

/// Fine-grid solve with the given suite, wrapped in a dense evaluator.
/// Validation against a coarser reference is the caller's job, since the
/// threshold depends on the errors being measured.
pub fn reference_solution(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    n_ref: usize,
    opts: &KktOptions,
) -> Result<DenseEvaluator> {
    DenseEvaluator::from_solution(&solve_kkt(suite, prob, n_ref, opts)?)
}
