use std::fmt;

use super::operators::{nilpotent_e, pascal, pascal_inverse, vandermonde};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::method::{PeerMethodSuite, StageMatrixSet};

/// Tolerance deciding whether a condition holds when computing achieved orders.
pub const ORDER_TOL: f64 = 1e-8;

/// The order conditions of the combined forward/adjoint scheme, one per
/// step type and direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConditionKind {
    StandardForward,
    StandardAdjoint,
    StartForward,
    /// Step 0: `A₀, K₀` paired with the standard `B`.
    StartAdjoint,
    LastForward,
    /// Step `N−1`: standard `A, K` paired with the end `B_N`.
    LastAdjoint,
    EndpointAdjoint,
    EndpointW,
    InterpolantV,
}

impl ConditionKind {
    pub const ALL: [ConditionKind; 9] = [
        ConditionKind::StartForward,
        ConditionKind::StartAdjoint,
        ConditionKind::StandardForward,
        ConditionKind::StandardAdjoint,
        ConditionKind::LastForward,
        ConditionKind::LastAdjoint,
        ConditionKind::EndpointW,
        ConditionKind::EndpointAdjoint,
        ConditionKind::InterpolantV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConditionKind::StandardForward => "standard-forward",
            ConditionKind::StandardAdjoint => "standard-adjoint",
            ConditionKind::StartForward => "start-forward",
            ConditionKind::StartAdjoint => "start-adjoint",
            ConditionKind::LastForward => "last-forward",
            ConditionKind::LastAdjoint => "last-adjoint",
            ConditionKind::EndpointAdjoint => "endpoint-adjoint",
            ConditionKind::EndpointW => "endpoint-w",
            ConditionKind::InterpolantV => "interpolant-v",
        }
    }

    /// Order each step type must reach for an `s`-stage scheme.
    pub fn required_order(self, s: usize) -> usize {
        match self {
            ConditionKind::StandardForward => s + 1,
            ConditionKind::StandardAdjoint
            | ConditionKind::StartForward
            | ConditionKind::LastForward
            | ConditionKind::EndpointW
            | ConditionKind::InterpolantV => s,
            ConditionKind::StartAdjoint
            | ConditionKind::LastAdjoint
            | ConditionKind::EndpointAdjoint => s - 1,
        }
    }

    pub fn max_order(self, s: usize) -> usize {
        s + 1
    }
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `A V − B V 𝒫⁻¹ − K V Ẽ`.
pub fn forward_residual(a: &RMatrix, b: &RMatrix, k: &[f64], c: &[f64], q: usize) -> RMatrix {
    let v = vandermonde(c, q);
    let kmat = RMatrix::from_diag(k);
    a.mul(&v)
        .sub(&b.mul(&v).mul(&pascal_inverse(q)))
        .sub(&kmat.mul(&v).mul(&nilpotent_e(q)))
}

/// `Aᵀ V − B_nextᵀ V 𝒫 + K V Ẽ`.
pub fn adjoint_residual(a: &RMatrix, k: &[f64], b_next: &RMatrix, c: &[f64], q: usize) -> RMatrix {
    let v = vandermonde(c, q);
    let kmat = RMatrix::from_diag(k);
    a.transpose()
        .mul(&v)
        .sub(&b_next.transpose().mul(&v).mul(&pascal(q)))
        .add(&kmat.mul(&v).mul(&nilpotent_e(q)))
}

/// `A₀ V − a e₁ᵀ − b e₂ᵀ − K₀ V Ẽ`.
pub fn start_residual(
    start: &StageMatrixSet,
    av: &[f64],
    bv: &[f64],
    c: &[f64],
    q: usize,
) -> RMatrix {
    let v = vandermonde(c, q);
    let mut r = start
        .a()
        .mul(&v)
        .sub(&start.k_matrix().mul(&v).mul(&nilpotent_e(q)));
    for i in 0..c.len() {
        r[(i, 0)] -= av[i];
        if q > 1 {
            r[(i, 1)] -= bv[i];
        }
    }
    r
}

/// `A_Nᵀ V − w 1ᵀ + K_N V Ẽ`.
pub fn endpoint_adjoint_residual(end: &StageMatrixSet, w: &[f64], c: &[f64], q: usize) -> RMatrix {
    let v = vandermonde(c, q);
    let mut r = end
        .a()
        .transpose()
        .mul(&v)
        .add(&end.k_matrix().mul(&v).mul(&nilpotent_e(q)));
    for i in 0..c.len() {
        for j in 0..q {
            r[(i, j)] -= w[i];
        }
    }
    r
}

fn moment_residual(weights: &[f64], c: &[f64], q: usize, target: impl Fn(usize) -> f64) -> RMatrix {
    RMatrix::from_fn(1, q, |_, j| {
        weights
            .iter()
            .zip(c)
            .map(|(wi, ci)| wi * ci.powi(j as i32))
            .sum::<f64>()
            - target(j)
    })
}

/// Residual matrix of one condition at truncation order `q`, with its
/// ∞-norm.
pub fn condition_residual(
    kind: ConditionKind,
    suite: &PeerMethodSuite,
    q: usize,
) -> Result<(RMatrix, f64)> {
    let s = suite.stages();
    if q == 0 || q > kind.max_order(s) {
        return Err(Error::UnsupportedQ {
            kind: kind.name(),
            q,
            max: kind.max_order(s),
        });
    }
    let c = suite.nodes.values();
    let std = &suite.standard;
    let r = match kind {
        ConditionKind::StandardForward => forward_residual(std.a(), std.b()?, std.k(), c, q),
        ConditionKind::StandardAdjoint => adjoint_residual(std.a(), std.k(), std.b()?, c, q),
        ConditionKind::StartForward => start_residual(&suite.start, &suite.a, &suite.b, c, q),
        ConditionKind::StartAdjoint => {
            adjoint_residual(suite.start.a(), suite.start.k(), std.b()?, c, q)
        }
        ConditionKind::LastForward => {
            forward_residual(suite.end.a(), suite.end.b()?, suite.end.k(), c, q)
        }
        ConditionKind::LastAdjoint => adjoint_residual(std.a(), std.k(), suite.end.b()?, c, q),
        ConditionKind::EndpointAdjoint => endpoint_adjoint_residual(&suite.end, &suite.w, c, q),
        ConditionKind::EndpointW => moment_residual(&suite.w, c, q, |_| 1.0),
        ConditionKind::InterpolantV => {
            moment_residual(&suite.v, c, q, |j| if j == 0 { 1.0 } else { 0.0 })
        }
    };
    let norm = r.inf_norm();
    Ok((r, norm))
}

/// One row of an [`OrderReport`].
#[derive(Clone, Debug)]
pub struct ConditionOutcome {
    pub kind: ConditionKind,
    /// ∞-norm residual at `q = 1, 2, ..`.
    pub residuals: Vec<f64>,
    pub achieved: usize,
    pub required: usize,
}

impl ConditionOutcome {
    pub fn meets_requirement(&self) -> bool {
        self.achieved >= self.required
    }

    /// Residual at the required order.
    pub fn required_residual(&self) -> f64 {
        self.residuals[self.required - 1]
    }
}

#[derive(Clone, Debug)]
pub struct OrderReport {
    pub method: String,
    pub tolerance: f64,
    pub outcomes: Vec<ConditionOutcome>,
}

impl OrderReport {
    pub fn get(&self, kind: ConditionKind) -> &ConditionOutcome {
        self.outcomes
            .iter()
            .find(|o| o.kind == kind)
            .expect("every kind is evaluated")
    }

    pub fn all_met(&self) -> bool {
        self.outcomes
            .iter()
            .all(ConditionOutcome::meets_requirement)
    }

    pub fn failing(&self) -> Vec<ConditionKind> {
        self.outcomes
            .iter()
            .filter(|o| !o.meets_requirement())
            .map(|o| o.kind)
            .collect()
    }
}

pub fn achieved_orders_with_tol(suite: &PeerMethodSuite, tol: f64) -> OrderReport {
    let s = suite.stages();
    let outcomes = ConditionKind::ALL
        .iter()
        .map(|&kind| {
            let residuals: Vec<f64> = (1..=kind.max_order(s))
                .map(|q| {
                    condition_residual(kind, suite, q)
                        .map(|(_, n)| n)
                        .unwrap_or(f64::INFINITY)
                })
                .collect();
            let achieved = residuals.iter().take_while(|&&r| r <= tol).count();
            ConditionOutcome {
                kind,
                residuals,
                achieved,
                required: kind.required_order(s),
            }
        })
        .collect();
    OrderReport {
        method: suite.name.clone(),
        tolerance: tol,
        outcomes,
    }
}

pub fn achieved_orders(suite: &PeerMethodSuite) -> OrderReport {
    achieved_orders_with_tol(suite, ORDER_TOL)
}

/// `η_{q+1} = A c^{q+1} − B (c − 1)^{q+1} − (q + 1) K c^q`.
pub fn leading_error(set: &StageMatrixSet, c: &[f64], q: usize) -> Result<Vec<f64>> {
    let b = set.b()?;
    let p = (q + 1) as i32;
    let cp: Vec<f64> = c.iter().map(|x| x.powi(p)).collect();
    let cm: Vec<f64> = c.iter().map(|x| (x - 1.0).powi(p)).collect();
    let ac = set.a().matvec(&cp);
    let bc = b.matvec(&cm);
    Ok((0..c.len())
        .map(|i| ac[i] - bc[i] - (q + 1) as f64 * set.k()[i] * c[i].powi(q as i32))
        .collect())
}
