//! Benchmark optimal control problems in eliminated form: the optimal
//! control has been substituted, leaving the coupled state/adjoint system.

use crate::error::{Error, Result};
use crate::kkt::BvProblem;
use crate::linalg::RMatrix;

fn mat2(a: f64, b: f64, c: f64, d: f64) -> RMatrix {
    RMatrix::from_rows(&[vec![a, b], vec![c, d]]).expect("finite 2x2")
}

/// Tunnel-diode oscillator steered to rest: minimize `∫ u² + y₁² dt` on
/// `[0, 2.5]` with `y₁′ = y₂`, `y₂′ = −y₁ + y₂(1.4 − 0.14y₂²) + 4u`.
#[derive(Clone, Debug, Default)]
pub struct Rayleigh;

impl BvProblem for Rayleigh {
    fn name(&self) -> &str {
        "rayleigh"
    }
    fn dim(&self) -> usize {
        2
    }
    fn final_time(&self) -> f64 {
        2.5
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![-5.0, -5.0]
    }
    fn g(&self, y: &[f64], p: &[f64], out: &mut [f64]) {
        out[0] = y[1];
        out[1] = -y[0] + y[1] * (1.4 - 0.14 * y[1] * y[1]) - 8.0 * p[1];
    }
    fn phi(&self, y: &[f64], p: &[f64], out: &mut [f64]) {
        out[0] = p[1] - 2.0 * y[0];
        out[1] = -p[0] - (1.4 - 0.42 * y[1] * y[1]) * p[1];
    }
    fn terminal_p(&self, _y_t: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn g_jacobian(&self, y: &[f64], _p: &[f64]) -> Option<(RMatrix, RMatrix)> {
        Some((
            mat2(0.0, 1.0, -1.0, 1.4 - 0.42 * y[1] * y[1]),
            mat2(0.0, 0.0, 0.0, -8.0),
        ))
    }
    fn phi_jacobian(&self, y: &[f64], p: &[f64]) -> Option<(RMatrix, RMatrix)> {
        Some((
            mat2(-2.0, 0.0, 0.0, 0.84 * y[1] * p[1]),
            mat2(0.0, 1.0, -1.0, -(1.4 - 0.42 * y[1] * y[1])),
        ))
    }
    fn terminal_jacobian(&self, _y_t: &[f64]) -> Option<RMatrix> {
        Some(RMatrix::zeros(2, 2))
    }
}

/// Van der Pol oscillator in Liénard coordinates with stiffness parameter
/// `ε`, driven to rest on `[0, 2]`.
#[derive(Clone, Debug)]
pub struct VanDerPol {
    epsilon: f64,
}

impl VanDerPol {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::NonpositiveEpsilon(epsilon));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `y₁ + y₂ − y₂³/3`.
    fn r(y: &[f64]) -> f64 {
        y[0] + y[1] - y[1].powi(3) / 3.0
    }
}

impl BvProblem for VanDerPol {
    fn name(&self) -> &str {
        "van_der_pol"
    }
    fn dim(&self) -> usize {
        2
    }
    fn final_time(&self) -> f64 {
        2.0
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![2.0 * self.epsilon, 0.0]
    }
    fn g(&self, y: &[f64], p: &[f64], out: &mut [f64]) {
        out[0] = -y[1] - 0.5 * p[0];
        out[1] = Self::r(y) / self.epsilon;
    }
    fn phi(&self, y: &[f64], p: &[f64], out: &mut [f64]) {
        let e = self.epsilon;
        let r = Self::r(y);
        let q = 1.0 - y[1] * y[1];
        out[0] = -p[1] / e - 2.0 / (e * e) * r;
        out[1] = p[0] - q * p[1] / e - 2.0 / (e * e) * r * q - 2.0 * y[1];
    }
    fn terminal_p(&self, _y_t: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn g_jacobian(&self, y: &[f64], _p: &[f64]) -> Option<(RMatrix, RMatrix)> {
        let e = self.epsilon;
        let q = 1.0 - y[1] * y[1];
        Some((mat2(0.0, -1.0, 1.0 / e, q / e), mat2(-0.5, 0.0, 0.0, 0.0)))
    }
    fn phi_jacobian(&self, y: &[f64], p: &[f64]) -> Option<(RMatrix, RMatrix)> {
        let e = self.epsilon;
        let c = 2.0 / (e * e);
        let r = Self::r(y);
        let q = 1.0 - y[1] * y[1];
        // ∂r/∂y = (1, q), ∂q/∂y₂ = −2y₂.
        let d22 = 2.0 * y[1] * p[1] / e - c * (q * q - 2.0 * y[1] * r) - 2.0;
        Some((
            mat2(-c, -c * q, -c * q, d22),
            mat2(0.0, -1.0 / e, 1.0, -q / e),
        ))
    }
    fn terminal_jacobian(&self, _y_t: &[f64]) -> Option<RMatrix> {
        Some(RMatrix::zeros(2, 2))
    }
}

/// A shipped benchmark with its default study grids.
pub struct ProblemSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub problem: Box<dyn BvProblem + Send>,
    pub default_grids: Vec<usize>,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("default_grids", &self.default_grids)
            .finish()
    }
}

pub fn rayleigh() -> ProblemSpec {
    ProblemSpec {
        name: "rayleigh",
        description: "Rayleigh tunnel-diode oscillator, T = 2.5, y0 = (-5, -5)",
        problem: Box::new(Rayleigh),
        default_grids: vec![40, 80, 160, 320],
    }
}

pub fn van_der_pol(epsilon: f64) -> Result<ProblemSpec> {
    Ok(ProblemSpec {
        name: "van_der_pol",
        description: "van der Pol oscillator in Lienard coordinates, T = 2",
        problem: Box::new(VanDerPol::new(epsilon)?),
        default_grids: vec![160, 320, 640, 1280],
    })
}

pub const VAN_DER_POL_EPSILON: f64 = 0.1;

/// Accepts `rayleigh`, `van_der_pol`, `vdp` (case-insensitive).
pub fn problem_by_name(name: &str) -> Result<ProblemSpec> {
    match name.to_ascii_lowercase().replace('-', "_").as_str() {
        "rayleigh" => Ok(rayleigh()),
        "van_der_pol" | "vanderpol" | "vdp" => van_der_pol(VAN_DER_POL_EPSILON),
        _ => Err(Error::UnknownProblem(name.to_string())),
    }
}
