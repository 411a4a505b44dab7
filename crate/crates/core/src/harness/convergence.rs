use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kkt::{solve_kkt, BvProblem, DenseEvaluator, DiscreteSolution, KktOptions};
use crate::method::{builtin_suite, BuiltinMethod, PeerMethodSuite};

/// Reference grid factor relative to the largest study grid.
pub const NREF_FACTOR: usize = 8;
/// Largest automatic reference factor before giving up.
pub const NREF_FACTOR_MAX: usize = 64;
/// Reference halves must agree to this fraction of the smallest error.
pub const REFERENCE_AGREEMENT: f64 = 1e-2;

/// Fine reference at `n_ref` and its half-resolution companion, both with
/// the BDF3o32 suite.
#[derive(Clone, Debug)]
pub struct ReferencePair {
    pub fine: DenseEvaluator,
    pub coarse: DenseEvaluator,
    pub n_ref: usize,
}

impl ReferencePair {
    pub fn build(prob: &dyn BvProblem, n_ref: usize, opts: &KktOptions) -> Result<Self> {
        let suite = builtin_suite(BuiltinMethod::Bdf3o32);
        let fine = DenseEvaluator::from_solution(&solve_kkt(&suite, prob, n_ref, opts)?)?;
        let coarse = DenseEvaluator::from_solution(&solve_kkt(&suite, prob, n_ref / 2, opts)?)?;
        Ok(Self {
            fine,
            coarse,
            n_ref,
        })
    }

    /// Doubles the resolution, reusing the current fine level as coarse.
    pub fn refine(self, prob: &dyn BvProblem, opts: &KktOptions) -> Result<Self> {
        let suite = builtin_suite(BuiltinMethod::Bdf3o32);
        let n_ref = 2 * self.n_ref;
        let fine = DenseEvaluator::from_solution(&solve_kkt(&suite, prob, n_ref, opts)?)?;
        Ok(Self {
            fine,
            coarse: self.fine,
            n_ref,
        })
    }

    /// Per-variable max disagreement over the given times.
    pub fn agreement(&self, times: &[f64]) -> Vec<f64> {
        let m = self.fine.dim();
        let mut out = vec![0.0f64; 2 * m];
        for &t in times {
            let (yf, pf) = self.fine.eval(t);
            let (yc, pc) = self.coarse.eval(t);
            for k in 0..m {
                out[k] = out[k].max((yf[k] - yc[k]).abs());
                out[m + k] = out[m + k].max((pf[k] - pc[k]).abs());
            }
        }
        out
    }
}

/// Per-variable l∞ errors `(y₁..y_m, p₁..p_m)` over the stage points of steps
/// `0..N−1`; the adjoint errors also include the interpolated output `p_h(0)`.
/// End-step stages are excluded: their local order is a property of the end
/// method alone and is reported by the order conditions instead.
pub fn solution_errors(sol: &DiscreteSolution, reference: &DenseEvaluator) -> Vec<f64> {
    let m = sol.m;
    let mut err = vec![0.0f64; 2 * m];
    for n in 0..sol.grid.n {
        for i in 0..sol.s {
            let (yr, pr) = reference.eval(sol.stage_time(n, i));
            let (y, p) = (sol.y_stage(n, i), sol.p_stage(n, i));
            for k in 0..m {
                err[k] = err[k].max((y[k] - yr[k]).abs());
                err[m + k] = err[m + k].max((p[k] - pr[k]).abs());
            }
        }
    }
    let (_, p0) = reference.eval(0.0);
    for k in 0..m {
        err[m + k] = err[m + k].max((sol.ph_0[k] - p0[k]).abs());
    }
    err
}

fn evaluation_times(sols: &[DiscreteSolution]) -> Vec<f64> {
    let mut t = vec![0.0];
    for sol in sols {
        t.push(sol.grid.t_final);
        for n in 0..=sol.grid.n {
            for i in 0..sol.s {
                t.push(sol.stage_time(n, i));
            }
        }
    }
    t
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub method: String,
    pub problem: String,
    pub grids: Vec<usize>,
    /// `y1..ym, p1..pm`.
    pub variables: Vec<String>,
    /// `errors[var][grid]`.
    pub errors: Vec<Vec<f64>>,
    /// `orders[var][j]` between `grids[j]` and `grids[j+1]`; only for doubling.
    pub orders: Vec<Vec<Option<f64>>>,
    pub n_ref: usize,
    /// Per-variable disagreement of the reference pair.
    pub reference_agreement: Vec<f64>,
}

impl ConvergenceTable {
    pub fn variable(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// Orders of variables starting with `prefix` (`"y"` or `"p"`).
    pub fn orders_of(&self, prefix: &str) -> Vec<f64> {
        self.variables
            .iter()
            .zip(&self.orders)
            .filter(|(v, _)| v.starts_with(prefix))
            .flat_map(|(_, o)| o.iter().flatten().copied())
            .collect()
    }

    /// Aligned text with orders in brackets, one decimal.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "method {}  problem {}  reference N = {}",
            self.method, self.problem, self.n_ref
        );
        let _ = write!(out, "{:<5}", "var");
        for n in &self.grids {
            let _ = write!(out, "{:>16}", format!("N={n}"));
        }
        out.push('\n');
        for (v, name) in self.variables.iter().enumerate() {
            let _ = write!(out, "{name:<5}");
            for j in 0..self.grids.len() {
                let cell = match j.checked_sub(1).and_then(|k| self.orders[v][k]) {
                    Some(o) => format!("{:.2e} ({o:.1})", self.errors[v][j]),
                    None => format!("{:.2e}", self.errors[v][j]),
                };
                let _ = write!(out, "{cell:>16}");
            }
            out.push('\n');
        }
        out
    }
}

fn validate_grids(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::InvalidArgument("grid list is empty".into()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "grids must be strictly increasing: {ns:?}"
        )));
    }
    if ns[0] < 2 {
        return Err(Error::InvalidArgument("grids must be at least 2".into()));
    }
    Ok(())
}

fn build_table(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    ns: &[usize],
    sols: &[DiscreteSolution],
    reference: &ReferencePair,
) -> ConvergenceTable {
    let m = prob.dim();
    let per_grid: Vec<Vec<f64>> = sols
        .iter()
        .map(|s| solution_errors(s, &reference.fine))
        .collect();
    let variables: Vec<String> = (1..=m)
        .map(|k| format!("y{k}"))
        .chain((1..=m).map(|k| format!("p{k}")))
        .collect();
    let errors: Vec<Vec<f64>> = (0..2 * m)
        .map(|v| per_grid.iter().map(|e| e[v]).collect())
        .collect();
    let orders = errors
        .iter()
        .map(|e| {
            (0..ns.len() - 1)
                .map(|j| (ns[j + 1] == 2 * ns[j]).then(|| (e[j] / e[j + 1]).log2()))
                .collect()
        })
        .collect();
    ConvergenceTable {
        method: suite.name.clone(),
        problem: prob.name().to_string(),
        grids: ns.to_vec(),
        variables,
        errors,
        orders,
        n_ref: reference.n_ref,
        reference_agreement: reference.agreement(&evaluation_times(sols)),
    }
}

/// Whether each variable's reference disagreement is at most
/// [`REFERENCE_AGREEMENT`] times its smallest study error.
pub fn reference_is_adequate(table: &ConvergenceTable) -> bool {
    table
        .errors
        .iter()
        .zip(&table.reference_agreement)
        .all(|(e, a)| *a <= REFERENCE_AGREEMENT * e.iter().copied().fold(f64::INFINITY, f64::min))
}

fn reference_failure(table: &ConvergenceTable) -> Error {
    let detail: Vec<String> = table
        .variables
        .iter()
        .zip(&table.errors)
        .zip(&table.reference_agreement)
        .map(|((v, e), a)| {
            let min = e.iter().copied().fold(f64::INFINITY, f64::min);
            format!("{v}: {a:.2e} vs {:.2e}", REFERENCE_AGREEMENT * min)
        })
        .collect();
    Error::ReferenceNotConverged(format!(
        "N_ref = {} vs {}: {}",
        table.n_ref,
        table.n_ref / 2,
        detail.join(", ")
    ))
}

/// Solves the study grids and tabulates errors against an existing
/// reference, without validating it.
pub fn converge_with_reference(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    ns: &[usize],
    reference: &ReferencePair,
    opts: &KktOptions,
) -> Result<ConvergenceTable> {
    validate_grids(ns)?;
    let sols = ns
        .iter()
        .map(|&n| solve_kkt(suite, prob, n, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(build_table(suite, prob, ns, &sols, reference))
}

/// Full study. With `n_ref = None` the reference starts at
/// `8·max(Ns)` and is doubled until it validates (up to `64·max(Ns)`); an
/// explicit `n_ref` is validated once.
pub fn converge_study(
    suite: &PeerMethodSuite,
    prob: &dyn BvProblem,
    ns: &[usize],
    n_ref: Option<usize>,
    opts: &KktOptions,
) -> Result<ConvergenceTable> {
    let mut tables = converge_studies(std::slice::from_ref(suite), prob, ns, n_ref, opts)?;
    Ok(tables.remove(0))
}

/// Several methods against one shared reference, refined until it
/// validates for every table.
pub fn converge_studies(
    suites: &[PeerMethodSuite],
    prob: &dyn BvProblem,
    ns: &[usize],
    n_ref: Option<usize>,
    opts: &KktOptions,
) -> Result<Vec<ConvergenceTable>> {
    validate_grids(ns)?;
    let nmax = *ns.last().expect("nonempty");
    if let Some(r) = n_ref {
        if r < NREF_FACTOR * nmax {
            return Err(Error::InvalidArgument(format!(
                "N_ref = {r} must be at least {NREF_FACTOR} x {nmax}"
            )));
        }
    }
    let sols = suites
        .iter()
        .map(|suite| {
            ns.iter()
                .map(|&n| solve_kkt(suite, prob, n, opts))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut reference = ReferencePair::build(prob, n_ref.unwrap_or(NREF_FACTOR * nmax), opts)?;
    loop {
        let tables: Vec<ConvergenceTable> = suites
            .iter()
            .zip(&sols)
            .map(|(suite, s)| build_table(suite, prob, ns, s, &reference))
            .collect();
        match tables.iter().find(|t| !reference_is_adequate(t)) {
            None => return Ok(tables),
            Some(bad) => {
                if n_ref.is_some() || reference.n_ref * 2 > NREF_FACTOR_MAX * nmax {
                    return Err(reference_failure(bad));
                }
            }
        }
        reference = reference.refine(prob, opts)?;
    }
}
