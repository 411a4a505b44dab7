//! Order-compatibility polynomial `Q(d₁, d₃)` for three-stage standard
//! methods and the end-method cubic for equidistant nodes.

use num_complex::Complex64;

use crate::linalg::polynomial_roots;

/// Monomials `coef · d₁^i · d₃^j` of `Q`.
const Q_TERMS: [(f64, i32, i32); 13] = [
    (33.0, 3, 1),
    (54.0, 2, 2),
    (21.0, 1, 3),
    (-15.0, 3, 0),
    (-67.0, 2, 1),
    (-55.0, 1, 2),
    (-7.0, 0, 3),
    (15.0, 2, 0),
    (25.0, 1, 1),
    (5.0, 0, 2),
    (3.0, 1, 0),
    (3.0, 0, 1),
    (-3.0, 0, 0),
];

/// `Q(d₁,d₃) = 3(11d₁² + 18d₁d₃ + 7d₃²)d₁d₃ − 15d₁³ − 67d₁²d₃ − 55d₁d₃² − 7d₃³
/// + 5(3d₁² + 5d₁d₃ + d₃²) + 3(d₁ + d₃) − 3`.
pub fn q_polynomial(d1: f64, d3: f64) -> f64 {
    Q_TERMS
        .iter()
        .map(|&(c, i, j)| c * d1.powi(i) * d3.powi(j))
        .sum()
}

/// `(∂Q/∂d₁, ∂Q/∂d₃)`.
pub fn q_gradient(d1: f64, d3: f64) -> [f64; 2] {
    let mut g = [0.0; 2];
    for &(c, i, j) in &Q_TERMS {
        if i > 0 {
            g[0] += c * f64::from(i) * d1.powi(i - 1) * d3.powi(j);
        }
        if j > 0 {
            g[1] += c * f64::from(j) * d1.powi(i) * d3.powi(j - 1);
        }
    }
    g
}

/// Coefficients of `Q(d, d)`, highest degree first, collected from the
/// monomials of `Q`.
pub fn q_equidistant_coefficients() -> [f64; 5] {
    let mut by_degree = [0.0; 5];
    for &(c, i, j) in &Q_TERMS {
        by_degree[(i + j) as usize] += c;
    }
    by_degree.reverse();
    by_degree
}

/// `Q(d, d)` in factored form `3(3d − 1)(2d − 1)(6d² − 3d − 1)`.
pub fn q_equidistant_factored(d: f64) -> f64 {
    3.0 * (3.0 * d - 1.0) * (2.0 * d - 1.0) * (6.0 * d * d - 3.0 * d - 1.0)
}

fn real_roots(coeffs: &[f64], imag_tol: f64) -> Vec<f64> {
    let cc: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let eval = |x: f64| coeffs.iter().fold(0.0, |acc, &c| acc * x + c);
    let deriv = |x: f64| {
        let n = coeffs.len() - 1;
        coeffs[..n]
            .iter()
            .enumerate()
            .fold(0.0, |acc, (k, &c)| acc * x + c * (n - k) as f64)
    };
    let mut roots: Vec<f64> = polynomial_roots(&cc)
        .into_iter()
        .filter(|z| z.im.abs() <= imag_tol * (1.0 + z.re.abs()))
        .map(|z| {
            let mut x = z.re;
            for _ in 0..5 {
                let d = deriv(x);
                if d == 0.0 {
                    break;
                }
                let next = x - eval(x) / d;
                if eval(next).abs() < eval(x).abs() {
                    x = next;
                } else {
                    break;
                }
            }
            x
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

/// Real zeros of `Q(d, d)`, ascending.
pub fn q_equidistant_roots() -> Vec<f64> {
    real_roots(&q_equidistant_coefficients(), 1e-8)
}

/// End-method condition for BDF3 nodes: `12c₂³ − 33c₂² + 28c₂ − 43/6`.
pub fn qn_bdf3_cubic(c2: f64) -> f64 {
    ((12.0 * c2 - 33.0) * c2 + 28.0) * c2 - 43.0 / 6.0
}

/// Real roots of [`qn_bdf3_cubic`], ascending.
pub fn qn_bdf3_roots() -> Vec<f64> {
    real_roots(&[12.0, -33.0, 28.0, -43.0 / 6.0], 1e-8)
}
