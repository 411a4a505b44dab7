use super::dense::RMatrix;
use crate::error::{Error, Result};

/// Result of a least-squares solve `min ‖A x − b‖₂`.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub x: Vec<f64>,
    /// Euclidean norm of `A x − b`.
    pub residual: f64,
    /// Columns kept by the pivoted QR (pivot magnitude above the rank tolerance).
    pub rank: usize,
}

/// Basic least-squares solution by Householder QR with column pivoting.
/// Columns whose remaining norm falls below `rank_tol·max column norm` are
/// dropped and their unknowns set to zero.
pub fn lstsq(a: &RMatrix, b: &[f64], rank_tol: f64) -> Result<LeastSquares> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} for a {m}x{n} system",
            b.len()
        )));
    }
    // Column-major working copy.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let col_norm = |c: &[f64], from: usize| c[from..].iter().map(|x| x * x).sum::<f64>().sqrt();
    let max_norm = cols.iter().map(|c| col_norm(c, 0)).fold(0.0, f64::max);
    let threshold = rank_tol * max_norm;
    let steps = m.min(n);
    let mut rank = 0;
    for k in 0..steps {
        let (p, pnorm) = (k..n)
            .map(|j| (j, col_norm(&cols[j], k)))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pnorm <= threshold || pnorm == 0.0 {
            break;
        }
        cols.swap(k, p);
        perm.swap(k, p);
        let alpha = if cols[k][k] > 0.0 { -pnorm } else { pnorm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            let reflect = |c: &mut [f64]| {
                let dot: f64 = v.iter().zip(&c[k..]).map(|(a, b)| a * b).sum();
                let f = 2.0 * dot / vnorm2;
                for (ci, vi) in c[k..].iter_mut().zip(&v) {
                    *ci -= f * vi;
                }
            };
            for col in cols.iter_mut().skip(k) {
                reflect(col);
            }
            reflect(&mut rhs);
        }
        rank += 1;
    }
    let mut z = vec![0.0; n];
    for i in (0..rank).rev() {
        let mut s = rhs[i];
        for (j, zj) in z.iter().enumerate().take(rank).skip(i + 1) {
            s -= cols[j][i] * zj;
        }
        z[i] = s / cols[i][i];
    }
    let mut x = vec![0.0; n];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = z[k];
    }
    let ax = a.matvec(&x);
    let residual = ax
        .iter()
        .zip(b)
        .map(|(u, v)| (u - v).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(LeastSquares { x, residual, rank })
}
