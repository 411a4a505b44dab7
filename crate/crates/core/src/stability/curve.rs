//! Sampling of the order-4/3 curve `Q(d₁, d₃) = 0` and stability screening.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::matrix::{alpha_angle, zero_stability};
use crate::error::{Error, Result};
use crate::method::{q_gradient, q_polynomial};
use crate::order::synthesize_standard;

pub const PROJECTION_MAX_STEPS: usize = 50;
pub const PROJECTION_STEP_CLIP: f64 = 0.2;
pub const PROJECTION_STOP: f64 = 1e-13;
/// A projected point is accepted when `|Q| ≤ CURVE_TOL`.
pub const CURVE_TOL: f64 = 1e-10;
/// Points closer than this in both coordinates are merged.
pub const DEDUP_TOL: f64 = 1e-6;
/// Minimum node gap kept by the scan.
const MIN_GAP: f64 = 1e-3;

/// Newton iteration on `Q` along `∇Q`, step length clipped to 0.2.
/// Returns `None` when `|Q| ≤ 1e−10` is not reached in 50 steps.
pub fn project_onto_curve(d1: f64, d3: f64) -> Option<(f64, f64)> {
    let (mut x, mut y) = (d1, d3);
    for _ in 0..PROJECTION_MAX_STEPS {
        let q = q_polynomial(x, y);
        if q.abs() < PROJECTION_STOP {
            break;
        }
        let [gx, gy] = q_gradient(x, y);
        let g2 = gx * gx + gy * gy;
        if g2 == 0.0 || !g2.is_finite() {
            return None;
        }
        let (mut sx, mut sy) = (-q * gx / g2, -q * gy / g2);
        let len = sx.hypot(sy);
        if len > PROJECTION_STEP_CLIP {
            sx *= PROJECTION_STEP_CLIP / len;
            sy *= PROJECTION_STEP_CLIP / len;
        }
        x += sx;
        y += sy;
    }
    (q_polynomial(x, y).abs() <= CURVE_TOL).then_some((x, y))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScanRegion {
    Rectangle {
        d1: (f64, f64),
        d3: (f64, f64),
    },
    /// `d₁, d₃ ≥ 0`, `d₁ + d₃ ≤ 1`.
    Simplex,
}

impl ScanRegion {
    pub fn contains(&self, d1: f64, d3: f64) -> bool {
        match *self {
            ScanRegion::Rectangle {
                d1: (a, b),
                d3: (c, d),
            } => (a..=b).contains(&d1) && (c..=d).contains(&d3),
            ScanRegion::Simplex => d1 >= 0.0 && d3 >= 0.0 && d1 + d3 <= 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if let ScanRegion::Rectangle {
            d1: (a, b),
            d3: (c, d),
        } = *self
        {
            if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) || a > b || c > d
            {
                return Err(Error::InvalidArgument(format!(
                    "invalid scan box [{a}, {b}] x [{c}, {d}]"
                )));
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        match *self {
            ScanRegion::Rectangle {
                d1: (a, b),
                d3: (c, d),
            } => (
                a + (b - a) * rng.gen::<f64>(),
                c + (d - c) * rng.gen::<f64>(),
            ),
            ScanRegion::Simplex => {
                let (u, v): (f64, f64) = (rng.gen(), rng.gen());
                if u + v > 1.0 {
                    (1.0 - u, 1.0 - v)
                } else {
                    (u, v)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRecord {
    pub d1: f64,
    pub d3: f64,
    pub q_residual: f64,
    pub zero_stable: bool,
    /// Present only for zero-stable synthesized sets.
    pub alpha_degrees: Option<f64>,
    pub k_nonnegative: bool,
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub n_seeds: usize,
    pub rng_seed: u64,
    pub n_theta: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            n_seeds: 2000,
            rng_seed: 0,
            n_theta: 2000,
        }
    }
}

/// Evaluates one curve point: synthesis, zero-stability and angle.
pub fn evaluate_curve_point(d1: f64, d3: f64, n_theta: usize) -> Result<ScanRecord> {
    let rep = synthesize_standard(d1, d3)?;
    let zs = zero_stability(&rep.set)?;
    let alpha_degrees = if zs.stable {
        Some(alpha_angle(&rep.set, n_theta)?)
    } else {
        None
    };
    Ok(ScanRecord {
        d1,
        d3,
        q_residual: q_polynomial(d1, d3).abs(),
        zero_stable: zs.stable,
        alpha_degrees,
        k_nonnegative: rep.k_nonnegative,
    })
}

/// Seeds are drawn sequentially from ChaCha8 so the result does not depend
/// on the thread count.
pub fn scan_q_curve(region: ScanRegion, opts: &ScanOptions) -> Result<Vec<ScanRecord>> {
    region.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let seeds: Vec<(f64, f64)> = (0..opts.n_seeds).map(|_| region.sample(&mut rng)).collect();
    scan_points(region, &seeds, opts.n_theta)
}

/// Projects each seed onto the curve and evaluates the points that stay in
/// the region. Records are sorted by `(d₁, d₃)` and deduplicated, so the
/// result is independent of the seed order.
pub fn scan_points(
    region: ScanRegion,
    seeds: &[(f64, f64)],
    n_theta: usize,
) -> Result<Vec<ScanRecord>> {
    region.validate()?;
    let mut records: Vec<ScanRecord> = seeds
        .par_iter()
        .filter_map(|&(x, y)| {
            let (d1, d3) = project_onto_curve(x, y)?;
            if !region.contains(d1, d3) || d1.abs() < MIN_GAP || d3.abs() < MIN_GAP {
                return None;
            }
            evaluate_curve_point(d1, d3, n_theta).ok()
        })
        .collect();
    records.sort_by(|a, b| a.d1.total_cmp(&b.d1).then(a.d3.total_cmp(&b.d3)));
    let mut out: Vec<ScanRecord> = Vec::with_capacity(records.len());
    for r in records {
        let dup = out
            .iter()
            .rev()
            .take_while(|o| r.d1 - o.d1 <= DEDUP_TOL)
            .any(|o| (o.d3 - r.d3).abs() <= DEDUP_TOL);
        if !dup {
            out.push(r);
        }
    }
    Ok(out)
}
