use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eig_small, numeric_rank, solve_dense, CMatrix, RMatrix};
use crate::method::StageMatrixSet;

/// Upper tolerance on `|λ|` for zero-stability.
pub const ZERO_STABILITY_TOL: f64 = 1e-9;
/// Eigenvalues with `|λ| ≥ 1 − UNIT_BAND` count as lying on the unit circle.
pub const UNIT_BAND: f64 = 1e-8;
/// Rank tolerance for the semi-simplicity test.
pub const SEMISIMPLE_RANK_TOL: f64 = 1e-8;
/// Locus points with smaller modulus are ignored by the angle computation.
pub const LOCUS_ZERO_TOL: f64 = 1e-12;

/// `M(z) = (A − zK)⁻¹B`.
pub fn stability_matrix(set: &StageMatrixSet, z: Complex64) -> Result<CMatrix> {
    let b = set.b()?.to_complex();
    let shifted = set
        .a()
        .to_complex()
        .sub(&set.k_matrix().to_complex().scale(z));
    solve_dense(&shifted, &b)
}

#[derive(Clone, Debug)]
pub struct ZeroStability {
    pub stable: bool,
    pub unit_eigen_semisimple: bool,
    pub spectral_radius: f64,
    pub eigenvalues: Vec<Complex64>,
}

/// Boundedness of `M(0)ⁿ`: eigenvalues in the closed unit disc, those on the
/// circle semi-simple (algebraic = geometric multiplicity).
pub fn zero_stability(set: &StageMatrixSet) -> Result<ZeroStability> {
    let m0 = stability_matrix(set, Complex64::new(0.0, 0.0))?;
    let eigenvalues = eig_small(&m0)?;
    let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let n = m0.rows();
    let mut semisimple = true;
    for lam in eigenvalues
        .iter()
        .filter(|l| l.norm() >= 1.0 - UNIT_BAND && l.norm() <= 1.0 + ZERO_STABILITY_TOL)
    {
        // Cluster radius generous enough for the √ε spread of a defective pair.
        let algebraic = eigenvalues
            .iter()
            .filter(|m| (*m - lam).norm() <= 1e-6)
            .count();
        let shifted = m0.sub(&CMatrix::identity(n).scale(*lam));
        let geometric = n - numeric_rank(&shifted, SEMISIMPLE_RANK_TOL);
        if algebraic != geometric {
            semisimple = false;
        }
    }
    Ok(ZeroStability {
        stable: spectral_radius <= 1.0 + ZERO_STABILITY_TOL && semisimple,
        unit_eigen_semisimple: semisimple,
        spectral_radius,
        eigenvalues,
    })
}

/// One sample of the root locus: `θ` and the eigenvalues `z` of
/// `K⁻¹(A − e^{−iθ}B)`.
#[derive(Clone, Debug)]
pub struct LocusSample {
    pub theta: f64,
    pub z: Vec<Complex64>,
}

/// Root-locus boundary points for `θ_k = 2πk/n`, `k = 1..n−1`.
pub fn root_locus(set: &StageMatrixSet, n_theta: usize) -> Result<Vec<LocusSample>> {
    if set.k().contains(&0.0) {
        return Err(Error::SingularK);
    }
    let kinv = RMatrix::from_diag(&set.k().iter().map(|k| 1.0 / k).collect::<Vec<_>>());
    let ka = kinv.mul(set.a()).to_complex();
    let kb = kinv.mul(set.b()?).to_complex();
    (1..n_theta)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n_theta as f64;
            let lambda = Complex64::from_polar(1.0, -theta);
            let m = ka.sub(&kb.scale(lambda));
            Ok(LocusSample {
                theta,
                z: eig_small(&m)?,
            })
        })
        .collect()
}

/// `min (180° − |arg z|)` over nonzero locus points, clamped to `[0°, 90°]`.
pub fn alpha_from_locus(locus: &[LocusSample]) -> f64 {
    let min = locus
        .iter()
        .flat_map(|s| s.z.iter())
        .filter(|z| z.norm() > LOCUS_ZERO_TOL)
        .map(|z| 180.0 - z.arg().to_degrees().abs())
        .fold(f64::INFINITY, f64::min);
    min.clamp(0.0, 90.0)
}

#[derive(Clone, Debug)]
pub struct AlphaResult {
    pub alpha_degrees: f64,
    pub locus: Vec<LocusSample>,
}

/// A(α) angle in degrees from `n_theta` samples of the unit circle.
pub fn alpha_angle_with_locus(set: &StageMatrixSet, n_theta: usize) -> Result<AlphaResult> {
    if n_theta < 2 {
        return Err(Error::InvalidArgument("n_theta must be at least 2".into()));
    }
    if set.k().contains(&0.0) {
        return Err(Error::SingularK);
    }
    let zs = zero_stability(set)?;
    if !zs.stable {
        return Err(Error::NotZeroStable {
            spectral_radius: zs.spectral_radius,
        });
    }
    let locus = root_locus(set, n_theta)?;
    Ok(AlphaResult {
        alpha_degrees: alpha_from_locus(&locus),
        locus,
    })
}

pub fn alpha_angle(set: &StageMatrixSet, n_theta: usize) -> Result<f64> {
    Ok(alpha_angle_with_locus(set, n_theta)?.alpha_degrees)
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub zero_stable: bool,
    pub unit_eigen_semisimple: bool,
    pub spectral_radius_m0: f64,
    /// Present only for zero-stable sets with nonsingular `K`.
    pub alpha_degrees: Option<f64>,
    pub locus_samples: Vec<LocusSample>,
    pub norm_bound_x1: Option<f64>,
}

pub fn stability_report(
    set: &StageMatrixSet,
    n_theta: usize,
    x1: Option<&RMatrix>,
) -> Result<StabilityReport> {
    let zs = zero_stability(set)?;
    let (alpha_degrees, locus_samples) = if zs.stable && set.k().iter().all(|&k| k != 0.0) {
        let r = alpha_angle_with_locus(set, n_theta)?;
        (Some(r.alpha_degrees), r.locus)
    } else {
        (None, Vec::new())
    };
    let norm_bound_x1 = match x1 {
        Some(x) => Some(super::norms::transformed_norm(
            set,
            x,
            super::norms::NormDirection::Forward,
        )?),
        None => None,
    };
    Ok(StabilityReport {
        zero_stable: zs.stable,
        unit_eigen_semisimple: zs.unit_eigen_semisimple,
        spectral_radius_m0: zs.spectral_radius,
        alpha_degrees,
        locus_samples,
        norm_bound_x1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{characteristic_polynomial, horner, spectral_radius};
    use crate::method::{bdf3_standard, StageRole};

    #[test]
    fn preconsistency_at_zero() {
        let m0 = stability_matrix(&bdf3_standard(), Complex64::new(0.0, 0.0)).unwrap();
        for row in m0.matvec(&[Complex64::new(1.0, 0.0); 3]) {
            assert!((row - 1.0).norm() < 1e-13);
        }
        assert!((spectral_radius(&m0).unwrap() - 1.0).abs() < 1e-12);
        let shifted = m0.sub(&CMatrix::identity(3));
        assert_eq!(numeric_rank(&shifted, 1e-8), 2);
    }

    #[test]
    fn scalar_case() {
        let set = StageMatrixSet::new(
            StageRole::Standard,
            RMatrix::identity(2),
            Some(RMatrix::identity(2)),
            vec![1.0, 1.0],
            None,
        )
        .unwrap();
        let z = Complex64::new(-0.5, 0.25);
        let m = stability_matrix(&set, z).unwrap();
        let want = 1.0 / (1.0 - z);
        assert!((m[(0, 0)] - want).norm() < 1e-15 && m[(0, 1)].norm() == 0.0);
    }

    #[test]
    fn stiff_limit_decays() {
        let m = stability_matrix(&bdf3_standard(), Complex64::new(-1e8, 0.0)).unwrap();
        assert!(spectral_radius(&m).unwrap() < 1e-6);
    }

    #[test]
    fn zero_b_is_stable_and_jordan_block_is_not() {
        let nil = StageMatrixSet::new(
            StageRole::Standard,
            RMatrix::identity(3),
            Some(RMatrix::zeros(3, 3)),
            vec![1.0; 3],
            None,
        )
        .unwrap();
        assert!(zero_stability(&nil).unwrap().stable);
        let jordan = StageMatrixSet::new(
            StageRole::Standard,
            RMatrix::identity(2),
            Some(RMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()),
            vec![1.0; 2],
            None,
        )
        .unwrap();
        let zs = zero_stability(&jordan).unwrap();
        assert!(!zs.stable && !zs.unit_eigen_semisimple);
    }

    #[test]
    fn bdf3_angle_and_locus_residuals() {
        let set = bdf3_standard();
        let r = alpha_angle_with_locus(&set, 2000).unwrap();
        assert!(
            (r.alpha_degrees - 86.032).abs() < 0.05,
            "{}",
            r.alpha_degrees
        );
        let kinv = RMatrix::from_diag(&[3.0; 3]);
        for s in r.locus.iter().step_by(97) {
            let lam = Complex64::from_polar(1.0, -s.theta);
            let m = kinv
                .mul(set.a())
                .to_complex()
                .sub(&kinv.mul(set.b().unwrap()).to_complex().scale(lam));
            let p = characteristic_polynomial(&m).unwrap();
            for z in &s.z {
                assert!(horner(&p, *z).norm() < 1e-8 * (1.0 + m.inf_norm()).powi(3));
            }
        }
    }
}
