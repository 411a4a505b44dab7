use super::dense::DenseMatrix;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Pivots below this multiple of `‖A‖∞` are treated as zero.
pub const SINGULAR_RTOL: f64 = 1e-14;

/// LU factorization with partial pivoting, `P A = L U`, stored packed.
#[derive(Clone, Debug)]
pub struct Lu<T: Scalar> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let threshold = SINGULAR_RTOL * a.inf_norm();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].modulus()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pmax <= threshold || pmax == 0.0 {
                return Err(Error::SingularMatrix(format!(
                    "pivot {pmax:.3e} in column {k} below {threshold:.3e}"
                )));
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == T::zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let ukj = lu[(k, j)];
                    lu[(i, j)] -= factor * ukj;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length");
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_tr_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length");
        let mut y = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                let u = self.lu[(j, i)];
                let yj = y[j];
                y[i] -= u * yj;
            }
            y[i] /= self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let l = self.lu[(j, i)];
                let yj = y[j];
                y[i] -= l * yj;
            }
        }
        let mut x = vec![T::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    pub fn solve(&self, rhs: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if rhs.rows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "rhs has {} rows, matrix has {}",
                rhs.rows(),
                self.dim()
            )));
        }
        let mut out = DenseMatrix::zeros(rhs.rows(), rhs.cols());
        for j in 0..rhs.cols() {
            let x = self.solve_vec(&rhs.column(j));
            for (i, xi) in x.into_iter().enumerate() {
                out[(i, j)] = xi;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> DenseMatrix<T> {
        self.solve(&DenseMatrix::identity(self.dim()))
            .expect("identity has matching rows")
    }

    pub fn determinant(&self) -> T {
        let n = self.dim();
        let mut det = T::one();
        for i in 0..n {
            det *= self.lu[(i, i)];
        }
        // Parity of the permutation from its cycle decomposition.
        let mut seen = vec![false; n];
        let mut odd = false;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.perm[k];
                len += 1;
            }
            if len % 2 == 0 {
                odd = !odd;
            }
        }
        if odd {
            -det
        } else {
            det
        }
    }
}

/// Solves `A X = RHS` by LU with partial pivoting.
pub fn solve_dense<T: Scalar>(a: &DenseMatrix<T>, rhs: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if a.is_square() && rhs.rows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs has {} rows, matrix has {}",
            rhs.rows(),
            a.rows()
        )));
    }
    Lu::factor(a)?.solve(rhs)
}

pub fn inverse<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    Ok(Lu::factor(a)?.inverse())
}

/// Determinant by LU; returns zero for a singular matrix.
pub fn determinant<T: Scalar>(a: &DenseMatrix<T>) -> T {
    match Lu::factor(a) {
        Ok(lu) => lu.determinant(),
        Err(_) => T::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMatrix;

    #[test]
    fn identity_solve_returns_rhs() {
        let m = RMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(solve_dense(&RMatrix::identity(3), &m).unwrap(), m);
    }

    #[test]
    fn singular_and_shape_errors() {
        let s = RMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            solve_dense(&s, &RMatrix::identity(2)),
            Err(Error::SingularMatrix(_))
        ));
        assert!(matches!(
            solve_dense(&RMatrix::identity(2), &RMatrix::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn transposed_solve_and_determinant() {
        let a = RMatrix::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ])
        .unwrap();
        let lu = Lu::factor(&a).unwrap();
        let b = [1.0, -2.0, 0.5];
        let x = lu.solve_tr_vec(&b);
        let r = a.tr_matvec(&x);
        for (ri, bi) in r.iter().zip(b) {
            assert!((ri - bi).abs() < 1e-14);
        }
        // 0(1-0) - 2(1-0) + 1(0-3) = -5
        assert!((lu.determinant() + 5.0).abs() < 1e-14);
    }
}
