use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inverse, solve_dense, spectral_radius, RMatrix};
use crate::method::StageMatrixSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormDirection {
    /// `‖X⁻¹A⁻¹BX‖∞`.
    Forward,
    /// `‖X⁻¹(BA⁻¹)ᵀX‖∞`.
    Adjoint,
}

/// Similarity transform used to bound the propagation matrices of the
/// three-stage suites in the maximum norm.
pub fn remark_x1() -> RMatrix {
    RMatrix::from_rows(&[
        vec![1.0 / 3.0, 41.0 / 42.0, -1.0 / 12.0],
        vec![1.0 / 3.0, 1.0 / 3.0, 11.0 / 42.0],
        vec![1.0 / 3.0, 8.0 / 231.0, 2.0 / 11.0],
    ])
    .expect("literal matrix")
}

pub fn transformed_norm(set: &StageMatrixSet, x: &RMatrix, dir: NormDirection) -> Result<f64> {
    let b = set.b()?;
    let ainv = inverse(set.a())?;
    let m = match dir {
        NormDirection::Forward => ainv.mul(b),
        NormDirection::Adjoint => b.mul(&ainv).transpose(),
    };
    let xinv = inverse(x)?;
    Ok(xinv.mul(&m).mul(x).inf_norm())
}

fn require_tilde(set: &StageMatrixSet) -> Result<&RMatrix> {
    set.a_tilde().ok_or(Error::MissingAtilde)
}

/// `S(z) = (Ã − zK)⁻¹(Ã − A)`: iteration matrix of the simplified stage
/// Newton iteration on the linear test equation.
pub fn contraction_matrix(set: &StageMatrixSet, z: Complex64) -> Result<crate::linalg::CMatrix> {
    let at = require_tilde(set)?;
    let lhs = at.to_complex().sub(&set.k_matrix().to_complex().scale(z));
    solve_dense(&lhs, &at.sub(set.a()).to_complex())
}

pub fn contraction_radius(set: &StageMatrixSet, z: Complex64) -> Result<f64> {
    spectral_radius(&contraction_matrix(set, z)?)
}

/// `(Ãᵀ + ζK)⁻¹(Ã − A)ᵀ` for the transposed end-step iteration.
pub fn adjoint_iteration_matrix(set: &StageMatrixSet, zeta: f64) -> Result<RMatrix> {
    let at = require_tilde(set)?;
    let lhs = at.transpose().add(&set.k_matrix().scale(zeta));
    solve_dense(&lhs, &at.sub(set.a()).transpose())
}

/// `z = 0` and 49 points `−10^t`, `t` uniform in `[−6, 6]`.
pub fn contraction_samples() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..49).map(|i| -(10f64).powf(-6.0 + 12.0 * i as f64 / 48.0)))
        .collect()
}

/// Largest contraction radius over [`contraction_samples`].
pub fn max_contraction(set: &StageMatrixSet) -> Result<f64> {
    contraction_samples().into_iter().try_fold(0.0f64, |m, z| {
        Ok(m.max(contraction_radius(set, Complex64::new(z, 0.0))?))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::method::{bdf3_standard, builtin_suite, BuiltinMethod};

    #[test]
    fn x1_norms() {
        let x = remark_x1();
        let bdf = bdf3_standard();
        let v = transformed_norm(&bdf, &x, NormDirection::Forward).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
        // The adjoint direction needs its own transform; with X = I it is the
        // plain row-sum norm of (BA⁻¹)ᵀ.
        let id = RMatrix::identity(3);
        let direct = bdf
            .b()
            .unwrap()
            .mul(&inverse(bdf.a()).unwrap())
            .transpose()
            .inf_norm();
        let v = transformed_norm(&bdf, &id, NormDirection::Adjoint).unwrap();
        assert!((v - direct).abs() < 1e-14);
        let o32 = builtin_suite(BuiltinMethod::Bdf3o32);
        let v = transformed_norm(&o32.end, &x, NormDirection::Forward).unwrap();
        assert!(v <= 1.22 && v > 1.2, "{v}");
        let peer = builtin_suite(BuiltinMethod::Peer3o32w);
        let v = transformed_norm(&peer.end, &x, NormDirection::Forward).unwrap();
        assert!(v <= 1.02 && v > 1.01, "{v}");
    }

    #[test]
    fn contraction_bound() {
        let o32 = builtin_suite(BuiltinMethod::Bdf3o32);
        let samples = contraction_samples();
        assert_eq!(samples.len(), 50);
        assert!((samples[49] + 1e6).abs() < 1e-6 && (samples[1] + 1e-6).abs() < 1e-18);
        let m = max_contraction(&o32.end).unwrap();
        assert!(m <= 0.05, "{m}");
        assert!(matches!(
            max_contraction(&bdf3_standard()),
            Err(Error::MissingAtilde)
        ));
    }

    #[test]
    fn adjoint_iteration_shares_spectrum() {
        let end = builtin_suite(BuiltinMethod::Bdf3o32).end;
        for zeta in [0.0, 0.7, 30.0] {
            let a = spectral_radius(&adjoint_iteration_matrix(&end, zeta).unwrap()).unwrap();
            let f = contraction_radius(&end, Complex64::new(-zeta, 0.0)).unwrap();
            assert!((a - f).abs() < 1e-12);
        }
    }
}
