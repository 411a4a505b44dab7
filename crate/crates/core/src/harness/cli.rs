use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use super::convergence::converge_study;
use super::csv_io::{convergence_csv, scan_csv, solution_csv};
use crate::error::{Error, Result};
use crate::kkt::{solve_kkt, KktOptions};
use crate::method::{
    builtin_by_name, load_method_file, load_suite, write_method_file, PeerMethodSuite,
    StageMatrixSet,
};
use crate::order::{achieved_orders_with_tol, synthesize_standard};
use crate::problems::{problem_by_name, van_der_pol, ProblemSpec};
use crate::stability::{
    alpha_angle, contraction_radius, max_contraction, remark_x1, scan_q_curve, stability_report,
    transformed_norm, zero_stability, NormDirection, ScanOptions, ScanRegion,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Residual threshold for order reports of methods with rational
/// coefficients; decimal coefficients get [`DECIMAL_ORDER_TOL`].
pub const RATIONAL_ORDER_TOL: f64 = 1e-13;
pub const DECIMAL_ORDER_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "peer-adjoint",
    version,
    about = "Peer two-step methods with discrete adjoints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report achieved orders of every condition group.
    VerifyOrders(MethodArg),
    /// Zero-stability, A(alpha) angles, contraction and transformed norms.
    Stability {
        #[command(flatten)]
        method: MethodArg,
        #[arg(long, default_value_t = 2000)]
        ntheta: usize,
    },
    /// Random multistart sampling of the order-compatibility curve.
    Scan {
        /// d1min,d1max,d3min,d3max
        #[arg(long = "box", value_parser = parse_box, conflicts_with = "simplex")]
        bbox: Option<[f64; 4]>,
        /// Sample d1, d3 >= 0, d1 + d3 <= 1 instead of a box.
        #[arg(long)]
        simplex: bool,
        #[arg(long, default_value_t = 2000)]
        seeds: usize,
        #[arg(long = "rng", default_value_t = 0)]
        rng: u64,
        #[arg(long, default_value_t = 2000)]
        ntheta: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Synthesize a standard step for nodes (0, d1, d1 + d3).
    Synthesize {
        #[arg(long, allow_negative_numbers = true)]
        d1: f64,
        #[arg(long, allow_negative_numbers = true)]
        d3: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the discrete optimality system once.
    Solve {
        #[command(flatten)]
        method: MethodArg,
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Grid-refinement study against a fine reference.
    Converge {
        #[command(flatten)]
        method: MethodArg,
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, value_delimiter = ',', required = true)]
        grids: Vec<usize>,
        #[arg(long)]
        nref: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct MethodArg {
    /// Built-in name (BDF3o22, BDF3o32, PEER3o32w) or method file path.
    #[arg(long)]
    pub method: String,
}

#[derive(Args, Debug)]
pub struct ProblemArg {
    /// rayleigh or van_der_pol.
    #[arg(long)]
    pub problem: String,
    /// Stiffness parameter of van_der_pol.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

fn parse_box(s: &str) -> std::result::Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 4]>::try_from(v).map_err(|v| format!("expected 4 values, got {}", v.len()))
}

pub fn resolve_method(name: &str) -> Result<PeerMethodSuite> {
    match builtin_by_name(name) {
        Ok(s) => Ok(s),
        Err(Error::UnknownMethod(_)) if Path::new(name).is_file() => load_suite(Path::new(name)),
        Err(e) => Err(e),
    }
}

fn resolve_problem(arg: &ProblemArg) -> Result<ProblemSpec> {
    let spec = problem_by_name(&arg.problem)?;
    match (spec.name, arg.epsilon) {
        ("van_der_pol", Some(e)) => van_der_pol(e),
        (_, Some(_)) => Err(Error::InvalidArgument(format!(
            "--epsilon does not apply to {}",
            spec.name
        ))),
        (_, None) => Ok(spec),
    }
}

/// Rational built-ins are checked at 1e-13, everything else at 1e-9.
pub fn order_tolerance(suite: &PeerMethodSuite) -> f64 {
    if suite.name.eq_ignore_ascii_case("BDF3o22") || suite.name.eq_ignore_ascii_case("BDF3o32") {
        RATIONAL_ORDER_TOL
    } else {
        DECIMAL_ORDER_TOL
    }
}

pub fn verify_orders_text(suite: &PeerMethodSuite) -> String {
    let rep = achieved_orders_with_tol(suite, order_tolerance(suite));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "method {}  tolerance {:.0e}",
        rep.method, rep.tolerance
    );
    let _ = writeln!(
        out,
        "{:<18}{:>9}{:>9}{:>14}  status",
        "condition", "required", "achieved", "residual"
    );
    for o in &rep.outcomes {
        let _ = writeln!(
            out,
            "{:<18}{:>9}{:>9}{:>14.3e}  {}",
            o.kind.name(),
            o.required,
            o.achieved,
            o.required_residual(),
            if o.meets_requirement() { "ok" } else { "FAIL" }
        );
    }
    let failing = rep.failing();
    if failing.is_empty() {
        out.push_str("all conditions met\n");
    } else {
        let names: Vec<&str> = failing.iter().map(|k| k.name()).collect();
        let _ = writeln!(out, "not met: {}", names.join(", "));
    }
    out
}

fn set_stability(out: &mut String, label: &str, set: &StageMatrixSet, ntheta: usize) -> Result<()> {
    let x1 = (set.stages() == 3).then(remark_x1);
    let rep = stability_report(set, ntheta, x1.as_ref())?;
    let _ = write!(
        out,
        "{label:<9} zero-stable {:<5} rho(M(0)) {:.12}",
        rep.zero_stable, rep.spectral_radius_m0
    );
    match rep.alpha_degrees {
        Some(a) => {
            let _ = write!(out, "  alpha {a:.4} deg");
        }
        None if set.k().contains(&0.0) => out.push_str("  alpha n/a (K singular)"),
        None => out.push_str("  alpha n/a"),
    }
    if let Some(nx) = rep.norm_bound_x1 {
        let _ = write!(out, "  |M(0)|_X1 {nx:.4}");
    }
    if set.a_tilde().is_some() {
        let _ = write!(out, "  max rho(S) {:.4}", max_contraction(set)?);
        let _ = write!(
            out,
            "  rho(S(-1e6)) {:.4}",
            contraction_radius(set, Complex64::new(-1e6, 0.0))?
        );
    }
    out.push('\n');
    Ok(())
}

pub fn stability_text(suite: &PeerMethodSuite, ntheta: usize) -> Result<String> {
    sets_stability_text(&suite.name, Some(&suite.standard), Some(&suite.end), ntheta)
}

fn sets_stability_text(
    name: &str,
    standard: Option<&StageMatrixSet>,
    end: Option<&StageMatrixSet>,
    ntheta: usize,
) -> Result<String> {
    if standard.is_none() && end.is_none() {
        return Err(Error::InvalidArgument(format!(
            "{name} has neither a standard nor an end set"
        )));
    }
    let mut out = format!("method {name}  ntheta {ntheta}\n");
    if let Some(set) = standard {
        set_stability(&mut out, "standard", set, ntheta)?;
    }
    if let Some(set) = end {
        set_stability(&mut out, "end", set, ntheta)?;
    }
    if let Some(set) = standard.filter(|s| s.stages() == 3) {
        let v = transformed_norm(set, &remark_x1(), NormDirection::Forward)?;
        let _ = writeln!(out, "standard |A^-1 B|_X1 = {v:.12}");
    }
    Ok(out)
}

/// Built-in suites and complete files go through [`stability_text`]; files
/// holding only some sets (as written by `synthesize`) report those.
fn stability_of(name: &str, ntheta: usize) -> Result<String> {
    match builtin_by_name(name) {
        Ok(suite) => stability_text(&suite, ntheta),
        Err(Error::UnknownMethod(_)) if Path::new(name).is_file() => {
            let file = load_method_file(Path::new(name))?;
            sets_stability_text(
                &file.name,
                file.standard.as_ref(),
                file.end.as_ref(),
                ntheta,
            )
        }
        Err(e) => Err(e),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// Runs one subcommand; returns text for standard output.
pub fn execute(cmd: &Command) -> Result<String> {
    match cmd {
        Command::VerifyOrders(m) => Ok(verify_orders_text(&resolve_method(&m.method)?)),
        Command::Stability { method, ntheta } => stability_of(&method.method, *ntheta),
        Command::Scan {
            bbox,
            simplex,
            seeds,
            rng,
            ntheta,
            csv,
        } => {
            let region = match (bbox, simplex) {
                (_, true) => ScanRegion::Simplex,
                (Some([a, b, c, d]), false) => ScanRegion::Rectangle {
                    d1: (*a, *b),
                    d3: (*c, *d),
                },
                (None, false) => ScanRegion::Rectangle {
                    d1: (0.0, 1.0),
                    d3: (0.0, 1.0),
                },
            };
            let opts = ScanOptions {
                n_seeds: *seeds,
                rng_seed: *rng,
                n_theta: *ntheta,
            };
            let recs = scan_q_curve(region, &opts)?;
            if let Some(path) = csv {
                write_file(path, &scan_csv(&recs)?)?;
            }
            let stable: Vec<_> = recs.iter().filter(|r| r.zero_stable).collect();
            let mut out = format!(
                "{} curve points, {} zero-stable\n",
                recs.len(),
                stable.len()
            );
            if let Some(best) =
                stable
                    .iter()
                    .filter(|r| r.alpha_degrees.is_some())
                    .max_by(|a, b| {
                        a.alpha_degrees
                            .unwrap()
                            .total_cmp(&b.alpha_degrees.unwrap())
                    })
            {
                let _ = writeln!(
                    out,
                    "largest alpha {:.4} deg at d1 = {:.8}, d3 = {:.8}",
                    best.alpha_degrees.unwrap(),
                    best.d1,
                    best.d3
                );
            }
            Ok(out)
        }
        Command::Synthesize { d1, d3, out } => {
            let rep = synthesize_standard(*d1, *d3)?;
            let zs = zero_stability(&rep.set)?;
            let mut text = format!(
                "nodes {:?}\nresidual {:.3e} after {} iterations\nK nonnegative {}\nzero-stable {} (rho {:.12})\n",
                rep.nodes.values(),
                rep.residual,
                rep.iterations,
                rep.k_nonnegative,
                zs.stable,
                zs.spectral_radius
            );
            if zs.stable && rep.set.k().iter().all(|&k| k != 0.0) {
                let _ = writeln!(text, "alpha {:.4} deg", alpha_angle(&rep.set, 2000)?);
            }
            let file = write_method_file(&format!("synth_{d1}_{d3}"), &rep.nodes, &[&rep.set]);
            match out {
                Some(path) => write_file(path, &file)?,
                None => text.push_str(&file),
            }
            Ok(text)
        }
        Command::Solve {
            method,
            problem,
            n,
            csv,
        } => {
            let suite = resolve_method(&method.method)?;
            let spec = resolve_problem(problem)?;
            let sol = solve_kkt(&suite, spec.problem.as_ref(), *n, &KktOptions::default())?;
            if let Some(path) = csv {
                write_file(path, &solution_csv(&sol)?)?;
            }
            Ok(format!(
                "method {}  problem {}  N {}  h {:.6e}\npath {:?}  sweeps {}  newton iterations {}  continuation stages {}\nresidual {:.3e}\ny_h(T) = {:?}\np_h(0) = {:?}\n",
                suite.name,
                spec.name,
                n,
                sol.grid.h,
                sol.path,
                sol.stats.sweeps,
                sol.stats.newton_iterations,
                sol.stats.continuation_stages,
                sol.residual_norm,
                sol.yh_t,
                sol.ph_0
            ))
        }
        Command::Converge {
            method,
            problem,
            grids,
            nref,
            csv,
        } => {
            let suite = resolve_method(&method.method)?;
            let spec = resolve_problem(problem)?;
            let table = converge_study(
                &suite,
                spec.problem.as_ref(),
                grids,
                *nref,
                &KktOptions::default(),
            )?;
            if let Some(path) = csv {
                write_file(path, &convergence_csv(&table)?)?;
            }
            Ok(table.to_text())
        }
    }
}

/// Parses `argv`, runs, prints; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
