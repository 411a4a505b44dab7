use num_complex::Complex64;

use super::dense::DenseMatrix;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Largest dimension handled by [`eig_small`].
pub const EIG_MAX_DIM: usize = 4;

/// Coefficients `[1, c1, .., cn]` of `det(λI − M) = λⁿ + c1 λⁿ⁻¹ + .. + cn`,
/// by the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial<T: Scalar>(m: &DenseMatrix<T>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "characteristic polynomial of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let a = m.to_complex();
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    let mut mk = DenseMatrix::<Complex64>::zeros(n, n);
    let eye = DenseMatrix::<Complex64>::identity(n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I,  c_k = −tr(A M_k)/k
        mk = a.mul(&mk).add(&eye.scale(coeffs[k - 1]));
        let ck = -a.mul(&mk).trace() / k as f64;
        coeffs.push(ck);
    }
    Ok(coeffs)
}

/// Horner evaluation of a polynomial with leading coefficient first.
pub fn horner(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

fn horner_with_derivative(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    coeffs
        .iter()
        .fold((zero, zero), |(p, dp), &c| (p * x + c, dp * x + p))
}

fn quadratic_roots(b: Complex64, c: Complex64) -> [Complex64; 2] {
    // x² + b x + c; the larger root avoids cancellation, the smaller follows from c.
    let disc = (b * b - 4.0 * c).sqrt();
    let s = if (-b + disc).norm() >= (-b - disc).norm() {
        -b + disc
    } else {
        -b - disc
    };
    if s.norm() == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    let x1 = s / 2.0;
    [x1, c / x1]
}

fn cubic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 3] {
    // x³ + a x² + b x + c with x = t − a/3 gives t³ + p t + q.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let u3 = if (-q / 2.0 + disc).norm() >= (-q / 2.0 - disc).norm() {
        -q / 2.0 + disc
    } else {
        -q / 2.0 - disc
    };
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let u = u3.powf(1.0 / 3.0);
    if u.norm() == 0.0 {
        return [-shift; 3];
    }
    let v = -p / (3.0 * u);
    let w2 = omega * omega;
    [
        u + v - shift,
        omega * u + w2 * v - shift,
        w2 * u + omega * v - shift,
    ]
}

fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let radius = 1.0 + coeffs[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-300, 0.0);
            }
            let step = horner(coeffs, roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm() / (1.0 + roots[i].norm()));
        }
        if delta < 1e-15 {
            break;
        }
    }
    roots
}

/// Newton polishing that only accepts steps reducing the residual.
fn polish(coeffs: &[Complex64], root: Complex64) -> Complex64 {
    let mut x = root;
    let mut fx = horner(coeffs, x).norm();
    for _ in 0..8 {
        let (p, dp) = horner_with_derivative(coeffs, x);
        if dp.norm() == 0.0 || fx == 0.0 {
            break;
        }
        let candidate = x - p / dp;
        let fc = horner(coeffs, candidate).norm();
        if fc < fx {
            x = candidate;
            fx = fc;
        } else {
            break;
        }
    }
    x
}

fn quantized_key(z: &Complex64) -> (i64, i64) {
    let modulus = (z.norm() * 1e10).round() as i64;
    let mut arg = z.arg();
    if arg <= -std::f64::consts::PI + 1e-12 {
        arg = std::f64::consts::PI;
    }
    (-modulus, (arg * 1e10).round() as i64)
}

/// Sorts by descending modulus, ties by ascending argument in (−π, π].
/// Keys are quantized to 1e−10 so near-equal values order deterministically.
pub fn sort_eigenvalues(values: &mut [Complex64]) {
    values.sort_by_key(quantized_key);
}

/// Roots of a monic-normalizable polynomial of degree ≤ 4.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let lead = coeffs[0];
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();
    let raw: Vec<Complex64> = match monic.len() - 1 {
        0 => vec![],
        1 => vec![-monic[1]],
        2 => quadratic_roots(monic[1], monic[2]).to_vec(),
        3 => cubic_roots(monic[1], monic[2], monic[3]).to_vec(),
        _ => durand_kerner(&monic),
    };
    raw.into_iter().map(|r| polish(&monic, r)).collect()
}

/// Eigenvalues of a square matrix with at most four rows, sorted by
/// [`sort_eigenvalues`].
pub fn eig_small<T: Scalar>(m: &DenseMatrix<T>) -> Result<Vec<Complex64>> {
    if !m.is_square() || m.rows() > EIG_MAX_DIM {
        return Err(Error::DimensionMismatch(format!(
            "eig_small needs a square matrix with n <= {EIG_MAX_DIM}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let coeffs = characteristic_polynomial(m)?;
    let mut roots = polynomial_roots(&coeffs);
    sort_eigenvalues(&mut roots);
    Ok(roots)
}

pub fn spectral_radius<T: Scalar>(m: &DenseMatrix<T>) -> Result<f64> {
    Ok(eig_small(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

pub fn matrix_inf_norm<T: Scalar>(m: &DenseMatrix<T>) -> f64 {
    m.inf_norm()
}

/// Number of pivots above `tol·‖M‖∞` in Gram–Schmidt with column pivoting
/// (reorthogonalized), a rank-revealing stand-in for singular values.
pub fn numeric_rank<T: Scalar>(m: &DenseMatrix<T>, tol: f64) -> usize {
    assert!(tol > 0.0, "rank tolerance must be positive");
    let scale = m.inf_norm();
    if scale == 0.0 {
        return 0;
    }
    let threshold = tol * scale;
    let mut cols: Vec<Vec<T>> = (0..m.cols()).map(|j| m.column(j)).collect();
    let dot = |u: &[T], v: &[T]| {
        u.iter()
            .zip(v)
            .fold(T::zero(), |acc, (&a, &b)| acc + a.conj() * b)
    };
    let norm = |u: &[T]| u.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt();
    let mut rank = 0;
    while !cols.is_empty() && rank < m.rows() {
        let (best, best_norm) = cols
            .iter()
            .enumerate()
            .map(|(j, c)| (j, norm(c)))
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        if best_norm <= threshold {
            break;
        }
        let q: Vec<T> = cols
            .swap_remove(best)
            .into_iter()
            .map(|x| x * T::from_real(1.0 / best_norm))
            .collect();
        for c in cols.iter_mut() {
            for _ in 0..2 {
                let proj = dot(&q, c);
                for (ci, &qi) in c.iter_mut().zip(&q) {
                    *ci -= proj * qi;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMatrix;

    fn assert_close_set(got: &[Complex64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!(
                (g - Complex64::new(*w, 0.0)).norm() < 1e-12,
                "{got:?} vs {want:?}"
            );
        }
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let m = RMatrix::from_diag(&[2.0, -1.0, 0.5]);
        assert_close_set(&eig_small(&m).unwrap(), &[2.0, -1.0, 0.5]);
    }

    #[test]
    fn companion_matrix_roots() {
        // (λ−1)(λ−2)(λ−3) = λ³ − 6λ² + 11λ − 6
        let m = RMatrix::from_rows(&[
            vec![6.0, -11.0, 6.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_close_set(&eig_small(&m).unwrap(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn quartic_and_complex_pairs() {
        // rotation block ⊕ diag(0.5, −0.25)
        let m = RMatrix::from_rows(&[
            vec![0.0, -2.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.0],
            vec![0.0, 0.0, 0.0, -0.25],
        ])
        .unwrap();
        let ev = eig_small(&m).unwrap();
        assert!((ev[0] - Complex64::new(0.0, -2.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert!((ev[2] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((ev[3] - Complex64::new(-0.25, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn repeated_roots_and_zero_matrix() {
        assert_eq!(spectral_radius(&RMatrix::zeros(3, 3)).unwrap(), 0.0);
        let jordan = RMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        for z in eig_small(&jordan).unwrap() {
            assert!((z - 1.0).norm() < 1e-7);
        }
        assert!(eig_small(&RMatrix::identity(5)).is_err());
    }

    #[test]
    fn rank_of_simple_matrices() {
        assert_eq!(numeric_rank(&RMatrix::identity(3), 1e-10), 3);
        let ones = RMatrix::from_vec(3, 3, vec![1.0; 9]).unwrap();
        assert_eq!(numeric_rank(&ones, 1e-10), 1);
        assert_eq!(numeric_rank(&RMatrix::zeros(2, 2), 1e-10), 0);
    }
}
