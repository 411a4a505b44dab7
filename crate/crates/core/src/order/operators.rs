use crate::linalg::RMatrix;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `V_q(c) = (1, c, c², .., c^{q−1})`, size `s × q`.
pub fn vandermonde(c: &[f64], q: usize) -> RMatrix {
    RMatrix::from_fn(c.len(), q, |i, j| c[i].powi(j as i32))
}

/// Column-wise derivative `(0, 1, 2c, .., (q−1)c^{q−2})`.
pub fn vandermonde_prime(c: &[f64], q: usize) -> RMatrix {
    RMatrix::from_fn(c.len(), q, |i, j| {
        if j == 0 {
            0.0
        } else {
            j as f64 * c[i].powi(j as i32 - 1)
        }
    })
}

/// Upper-triangular Pascal matrix with entries `C(j, i)` (zero-based).
pub fn pascal(q: usize) -> RMatrix {
    shifted_pascal(q, 1.0)
}

/// `𝒫_q⁻¹`, the Pascal matrix with checkerboard signs.
pub fn pascal_inverse(q: usize) -> RMatrix {
    shifted_pascal(q, -1.0)
}

/// `exp(ζẼ_q)` with entries `C(j, i) ζ^{j−i}`.
pub fn shifted_pascal(q: usize, zeta: f64) -> RMatrix {
    RMatrix::from_fn(q, q, |i, j| {
        if j < i {
            0.0
        } else {
            binomial(j, i) * zeta.powi((j - i) as i32)
        }
    })
}

/// Nilpotent `Ẽ_q` with `Ẽ[i, i+1] = i + 1` (zero-based).
pub fn nilpotent_e(q: usize) -> RMatrix {
    RMatrix::from_fn(q, q, |i, j| if j == i + 1 { j as f64 } else { 0.0 })
}

/// `Δ_q = diag(1, −1, 1, ..)`.
pub fn alternating_diag(q: usize) -> RMatrix {
    RMatrix::from_fn(q, q, |i, j| {
        if i != j {
            0.0
        } else if i % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

/// Reversal permutation `Π`.
pub fn flip(s: usize) -> RMatrix {
    RMatrix::from_fn(s, s, |i, j| if i + j + 1 == s { 1.0 } else { 0.0 })
}

/// The operator bundle for fixed nodes and truncation order `q`.
#[derive(Clone, Debug)]
pub struct OrderOperators {
    pub v: RMatrix,
    pub v_prime: RMatrix,
    pub p: RMatrix,
    pub p_zeta: RMatrix,
    pub e: RMatrix,
    pub delta: RMatrix,
    pub pi: RMatrix,
}

impl OrderOperators {
    pub fn new(c: &[f64], q: usize, zeta: f64) -> Self {
        Self {
            v: vandermonde(c, q),
            v_prime: vandermonde_prime(c, q),
            p: pascal(q),
            p_zeta: shifted_pascal(q, zeta),
            e: nilpotent_e(q),
            delta: alternating_diag(q),
            pi: flip(c.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_identity_is_exact() {
        let c = [0.2, 0.55, 1.0];
        for q in 1..=5 {
            assert_eq!(
                vandermonde(&c, q).mul(&nilpotent_e(q)),
                vandermonde_prime(&c, q)
            );
        }
    }

    #[test]
    fn shifts_and_commutation() {
        let c = [0.2, 0.55, 1.0];
        let cm: Vec<f64> = c.iter().map(|x| x - 1.0).collect();
        let cp: Vec<f64> = c.iter().map(|x| x + 1.0).collect();
        for q in 1..=5 {
            let v = vandermonde(&c, q);
            assert!(
                v.mul(&pascal_inverse(q))
                    .sub(&vandermonde(&cm, q))
                    .max_abs()
                    < 1e-12
            );
            assert!(v.mul(&pascal(q)).sub(&vandermonde(&cp, q)).max_abs() < 1e-12);
            let (p, e) = (pascal(q), nilpotent_e(q));
            assert_eq!(p.mul(&e), e.mul(&p));
            assert!(
                p.mul(&pascal_inverse(q))
                    .sub(&RMatrix::identity(q))
                    .max_abs()
                    < 1e-14
            );
        }
    }

    #[test]
    fn flip_is_involution() {
        let pi = flip(4);
        assert_eq!(pi.mul(&pi), RMatrix::identity(4));
        assert_eq!(pi.transpose(), pi);
    }
}
