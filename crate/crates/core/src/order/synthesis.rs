//! Numerical synthesis of three-stage standard methods with forward order 4
//! and adjoint order 3 on nodes `(0, d₁, d₁ + d₃)`.

use super::conditions::{adjoint_residual, forward_residual};
use crate::error::{Error, Result};
use crate::linalg::{lstsq, RMatrix};
use crate::method::{bdf3_standard, Nodes, StageMatrixSet, StageRole};

/// Fixed value of `κ₂`; the conditions are homogeneous, so one entry must be
/// pinned.
pub const GAUGE_K2: f64 = 1.0 / 3.0;
/// Success threshold on the ∞-norm of the condition residual.
pub const SYNTHESIS_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;
const PLATEAU_WINDOW: usize = 10;
const PLATEAU_RATIO: f64 = 1e-3;

const N_A: usize = 6;
const N_B: usize = 9;
const N_UNKNOWNS: usize = N_A + N_B + 3;
const GAUGE_INDEX: usize = N_A + N_B + 1;

#[derive(Clone, Debug)]
pub struct SynthesisReport {
    pub nodes: Nodes,
    pub set: StageMatrixSet,
    pub residual: f64,
    pub iterations: usize,
    /// Whether every `κᵢ ≥ 0`; reported, not enforced.
    pub k_nonnegative: bool,
}

fn unpack(x: &[f64]) -> (RMatrix, RMatrix, Vec<f64>) {
    let mut a = RMatrix::zeros(3, 3);
    let mut t = 0;
    for i in 0..3 {
        for j in 0..=i {
            a[(i, j)] = x[t];
            t += 1;
        }
    }
    let b = RMatrix::from_fn(3, 3, |i, j| x[N_A + 3 * i + j]);
    (a, b, x[N_A + N_B..].to_vec())
}

fn pack(set: &StageMatrixSet) -> Vec<f64> {
    let mut x = Vec::with_capacity(N_UNKNOWNS);
    for i in 0..3 {
        for j in 0..=i {
            x.push(set.a()[(i, j)]);
        }
    }
    x.extend_from_slice(set.b().expect("standard set has B").as_slice());
    x.extend_from_slice(set.k());
    x
}

/// Forward conditions at `q = 4` (12 equations) stacked on adjoint
/// conditions at `q = 3` (9 equations).
pub fn synthesis_residual(x: &[f64], c: &[f64]) -> Vec<f64> {
    let (a, b, k) = unpack(x);
    let mut r = forward_residual(&a, &b, &k, c, 4).as_slice().to_vec();
    r.extend_from_slice(adjoint_residual(&a, &k, &b, c, 3).as_slice());
    r
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Jacobian of [`synthesis_residual`] with respect to the free unknowns.
/// The residual is linear, so columns are images of unit vectors.
fn free_jacobian(c: &[f64]) -> RMatrix {
    let free: Vec<usize> = (0..N_UNKNOWNS).filter(|&i| i != GAUGE_INDEX).collect();
    let cols: Vec<Vec<f64>> = free
        .iter()
        .map(|&i| {
            let mut e = vec![0.0; N_UNKNOWNS];
            e[i] = 1.0;
            synthesis_residual(&e, c)
        })
        .collect();
    RMatrix::from_fn(cols[0].len(), free.len(), |r, j| cols[j][r])
}

fn scatter_free(x: &mut [f64], delta: &[f64], alpha: f64) {
    let mut t = 0;
    for (i, xi) in x.iter_mut().enumerate() {
        if i == GAUGE_INDEX {
            continue;
        }
        *xi += alpha * delta[t];
        t += 1;
    }
}

/// Damped Gauss–Newton on the order conditions from the BDF3 coefficients,
/// with `κ₂` pinned to 1/3.
pub fn synthesize_standard(d1: f64, d3: f64) -> Result<SynthesisReport> {
    if d1 == 0.0 || d3 == 0.0 || !d1.is_finite() || !d3.is_finite() {
        return Err(Error::DegenerateNodes(format!("d1 = {d1}, d3 = {d3}")));
    }
    let nodes = Nodes::new(vec![0.0, d1, d1 + d3])?;
    let c = nodes.values();
    let mut x = pack(&bdf3_standard());
    x[GAUGE_INDEX] = GAUGE_K2;
    let jac = free_jacobian(c);
    let mut r = synthesis_residual(&x, c);
    let mut norm = inf_norm(&r);
    let mut history = vec![norm];
    let mut iterations = 0;
    while iterations < MAX_ITER && norm > 1e-15 {
        iterations += 1;
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = lstsq(&jac, &neg, 1e-13)?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial = x.clone();
            scatter_free(&mut trial, &step.x, alpha);
            let rt = synthesis_residual(&trial, c);
            let nt = inf_norm(&rt);
            if nt < norm {
                x = trial;
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        history.push(norm);
        if !accepted {
            break;
        }
        if history.len() > PLATEAU_WINDOW {
            let old = history[history.len() - 1 - PLATEAU_WINDOW];
            if old - norm < PLATEAU_RATIO * old {
                break;
            }
        }
    }
    if norm > SYNTHESIS_TOL {
        return Err(Error::NotOnCurve { residual: norm });
    }
    let (a, b, k) = unpack(&x);
    let k_nonnegative = k.iter().all(|&v| v >= 0.0);
    let set = StageMatrixSet::new(StageRole::Standard, a, Some(b), k, None)?;
    Ok(SynthesisReport {
        nodes,
        set,
        residual: norm,
        iterations,
        k_nonnegative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::method::q_polynomial;

    #[test]
    fn equidistant_third_reproduces_bdf3() {
        let rep = synthesize_standard(1.0 / 3.0, 1.0 / 3.0).unwrap();
        let bdf = bdf3_standard();
        assert!(rep.set.a().sub(bdf.a()).max_abs() < 1e-9);
        assert!(rep.set.b().unwrap().sub(bdf.b().unwrap()).max_abs() < 1e-9);
        assert!(rep.set.k().iter().all(|k| (k - 1.0 / 3.0).abs() < 1e-9));
    }

    #[test]
    fn half_spacing_forces_zero_first_k() {
        let rep = synthesize_standard(0.5, 0.5).unwrap();
        assert!(rep.set.k()[0].abs() < 1e-9);
    }

    #[test]
    fn off_curve_fails() {
        assert!(q_polynomial(0.3, 0.3).abs() > 0.1);
        match synthesize_standard(0.3, 0.3) {
            Err(Error::NotOnCurve { residual }) => assert!(residual > 1e-8),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            synthesize_standard(0.0, 0.3),
            Err(Error::DegenerateNodes(_))
        ));
    }
}
