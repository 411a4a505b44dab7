use crate::error::{Error, Result};

/// Constant-step grid with `N + 1` steps `tₙ = nh`, `n = 0..N`, and
/// `h = T/(N + 1)`, so the last stage of a method with `c_s = 1` sits at `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub t_final: f64,
    pub h: f64,
}

impl Grid {
    pub fn new(n: usize, t_final: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "N must be at least 2, got {n}"
            )));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "final time {t_final} must be positive"
            )));
        }
        Ok(Self {
            n,
            t_final,
            h: t_final / (n as f64 + 1.0),
        })
    }

    pub fn steps(&self) -> usize {
        self.n + 1
    }

    pub fn stage_time(&self, n: usize, c: f64) -> f64 {
        (n as f64 + c) * self.h
    }
}
