use super::operators::{nilpotent_e, pascal, vandermonde};
use crate::error::{Error, Result};
use crate::linalg::{determinant, inverse, lstsq, numeric_rank, RMatrix};
use crate::method::Nodes;

/// Residual norms of the Sylvester identity linking `A` and `K`.
#[derive(Clone, Copy, Debug)]
pub struct SylvesterResidual {
    /// General form with Vandermonde matrices of orders `q1`, `q2`.
    pub general: f64,
    /// Congruence-transformed square form; only for `q1 = q2 = s`.
    pub square: Option<f64>,
}

/// `(V₂𝒫₂)ᵀ A (V₁𝒫₁) − V₂ᵀ A V₁ − (V₂𝒫₂)ᵀ K V₁𝒫₁Ẽ₁ − (V₂Ẽ₂)ᵀ K V₁`.
pub fn sylvester_general(a: &RMatrix, k: &[f64], c: &[f64], q1: usize, q2: usize) -> RMatrix {
    let kmat = RMatrix::from_diag(k);
    let v1 = vandermonde(c, q1);
    let v2 = vandermonde(c, q2);
    let v1p = v1.mul(&pascal(q1));
    let v2p = v2.mul(&pascal(q2));
    let v2pt = v2p.transpose();
    v2pt.mul(a)
        .mul(&v1p)
        .sub(&v2.transpose().mul(a).mul(&v1))
        .sub(&v2pt.mul(&kmat).mul(&v1p).mul(&nilpotent_e(q1)))
        .sub(&v2.mul(&nilpotent_e(q2)).transpose().mul(&kmat).mul(&v1))
}

/// Extrapolation matrix `Θ = V𝒫V⁻¹` and differentiation matrix `E = VẼV⁻¹`
/// for square Vandermonde `V = V_s(c)`.
pub fn theta_e_operators(nodes: &Nodes) -> Result<(RMatrix, RMatrix)> {
    let s = nodes.len();
    let v = vandermonde(nodes.values(), s);
    let vinv = inverse(&v)?;
    let theta = v.mul(&pascal(s)).mul(&vinv);
    let e = v.mul(&nilpotent_e(s)).mul(&vinv);
    let comm = theta.mul(&e).sub(&e.mul(&theta)).max_abs();
    if comm > 1e-9 * (1.0 + theta.inf_norm() * e.inf_norm()) {
        return Err(Error::InvariantViolation(format!(
            "extrapolation and differentiation matrices commute (defect {comm:.3e})"
        )));
    }
    Ok((theta, e))
}

/// `ΘᵀAΘ − A − ΘᵀKΘE − EᵀK`.
pub fn sylvester_square(a: &RMatrix, k: &[f64], theta: &RMatrix, e: &RMatrix) -> RMatrix {
    let kmat = RMatrix::from_diag(k);
    let tt = theta.transpose();
    tt.mul(a)
        .mul(theta)
        .sub(a)
        .sub(&tt.mul(&kmat).mul(theta).mul(e))
        .sub(&e.transpose().mul(&kmat))
}

pub fn sylvester_residual(
    a: &RMatrix,
    k: &[f64],
    nodes: &Nodes,
    q1: usize,
    q2: usize,
) -> Result<SylvesterResidual> {
    let s = nodes.len();
    if q1 == 0 || q2 == 0 || q1 > s + 1 || q2 > s + 1 {
        return Err(Error::UnsupportedQ {
            kind: "sylvester",
            q: q1.max(q2),
            max: s + 1,
        });
    }
    let general = sylvester_general(a, k, nodes.values(), q1, q2).inf_norm();
    let square = if q1 == s && q2 == s {
        let (theta, e) = theta_e_operators(nodes)?;
        Some(sylvester_square(a, k, &theta, &e).inf_norm())
    } else {
        None
    };
    Ok(SylvesterResidual { general, square })
}

/// `𝒫ᵀX𝒫 − X`.
pub fn pascal_congruence_defect(x: &RMatrix) -> RMatrix {
    let p = pascal(x.rows());
    p.transpose().mul(x).mul(&p).sub(x)
}

/// Least-squares solution `W` of `𝒫ᵀW𝒫 − W = 𝒫ᵀM𝒫Ẽ + ẼᵀM`, with the
/// residual 2-norm.
pub fn solve_pascal_sylvester(m: &RMatrix) -> Result<(RMatrix, f64)> {
    let q = m.rows();
    if !m.is_square() {
        return Err(Error::DimensionMismatch("M must be square".into()));
    }
    let p = pascal(q);
    let e = nilpotent_e(q);
    let rhs = p
        .transpose()
        .mul(m)
        .mul(&p)
        .mul(&e)
        .add(&e.transpose().mul(m));
    // Column j of the operator is the image of the j-th unit matrix.
    let mut op = RMatrix::zeros(q * q, q * q);
    for col in 0..q * q {
        let mut unit = RMatrix::zeros(q, q);
        unit[(col / q, col % q)] = 1.0;
        let img = pascal_congruence_defect(&unit);
        for row in 0..q * q {
            op[(row, col)] = img[(row / q, row % q)];
        }
    }
    let ls = lstsq(&op, rhs.as_slice(), 1e-12)?;
    let w = RMatrix::from_vec(q, q, ls.x)?;
    Ok((w, ls.residual))
}

/// The lower-triangular kernel element of `X ↦ ℙ₃(V₃ᵀXV₃)`.
pub fn equidistant_kernel_matrix() -> RMatrix {
    RMatrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![-3.0, 1.0, 0.0],
        vec![3.0, -3.0, 1.0],
    ])
    .expect("literal matrix")
}

fn kernel_nodes(d1: f64, d3: f64) -> Result<[f64; 3]> {
    if d1 == 0.0 || d3 == 0.0 || !d1.is_finite() || !d3.is_finite() {
        return Err(Error::DegenerateNodes(format!("d1 = {d1}, d3 = {d3}")));
    }
    let c = [0.0, d1, d1 + d3];
    Nodes::new(c.to_vec())?;
    Ok(c)
}

/// `ℙ₃(V₃ᵀXV₃)` for nodes `(0, d₁, d₁ + d₃)`.
pub fn kernel_map(x: &RMatrix, d1: f64, d3: f64) -> Result<RMatrix> {
    let c = kernel_nodes(d1, d3)?;
    let v = vandermonde(&c, 3);
    Ok(pascal_congruence_defect(&v.transpose().mul(x).mul(&v)))
}

/// Lower-triangular kernel of [`kernel_map`]: present iff `d₁ = d₃`
/// (within 1e−12), and then verified to lie in the kernel to 1e−10.
pub fn triangular_kernel(d1: f64, d3: f64) -> Result<Option<RMatrix>> {
    kernel_nodes(d1, d3)?;
    if (d1 - d3).abs() > 1e-12 {
        return Ok(None);
    }
    let x = equidistant_kernel_matrix();
    let defect = kernel_map(&x, d1, d3)?.max_abs();
    let scale = 1.0 + (d1.abs() + d3.abs()).powi(4);
    if defect > 1e-10 * scale {
        return Err(Error::InvariantViolation(format!(
            "kernel element maps to {defect:.3e}"
        )));
    }
    Ok(Some(x))
}

/// Dimension of the lower-triangular kernel, from the numerical rank of the
/// 9×6 matrix of [`kernel_map`] restricted to lower-triangular arguments.
pub fn triangular_kernel_dimension(d1: f64, d3: f64, tol: f64) -> Result<usize> {
    let mut op = RMatrix::zeros(9, 6);
    let mut col = 0;
    for i in 0..3 {
        for j in 0..=i {
            let mut unit = RMatrix::zeros(3, 3);
            unit[(i, j)] = 1.0;
            let img = kernel_map(&unit, d1, d3)?;
            for r in 0..9 {
                op[(r, col)] = img[(r / 3, r % 3)];
            }
            col += 1;
        }
    }
    Ok(6 - numeric_rank(&op, tol))
}

/// Determinant of the linear system for the free parameters of the kernel
/// of the Lie-type map. Equals `d₁d₃(d₁ − d₃)`.
pub fn kernel_determinant(d1: f64, d3: f64) -> f64 {
    let m = RMatrix::from_rows(&[
        vec![(d1 + d3) * d3, d1, -1.0],
        vec![d1 * (d1 + d3), d3, -1.0],
        vec![-d1 * d3, d1 + d3, -1.0],
    ])
    .expect("finite entries");
    determinant(&m)
}
