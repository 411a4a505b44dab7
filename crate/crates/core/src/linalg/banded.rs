use crate::error::{Error, Result};

use super::lu::SINGULAR_RTOL;

/// Real banded matrix with `kl` sub- and `ku` super-diagonals, stored with
/// `kl` extra super-diagonals of headroom for pivoting fill-in. Row `i`
/// keeps columns `i − kl ..= i + ku + kl` at offsets `j + kl − i`.
#[derive(Clone, Debug)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Adds `v` at `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + 1).min(self.n);
                (lo..hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + 1).min(self.n);
                (lo..hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Banded LU with partial pivoting (row interchanges applied in sequence).
#[derive(Clone, Debug)]
pub struct BandedLu {
    m: BandedMatrix,
    piv: Vec<usize>,
}

// Index loops mirror the textbook elimination order.
#[allow(clippy::needless_range_loop)]
impl BandedLu {
    pub fn factor(mut m: BandedMatrix) -> Result<Self> {
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        let threshold = SINGULAR_RTOL * m.inf_norm();
        let mut piv = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let (p, pmax) = (k..=last_row)
                .map(|i| (i, m.get(i, k).abs()))
                .fold((k, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            if pmax <= threshold || pmax == 0.0 {
                return Err(Error::SingularMatrix(format!(
                    "banded pivot {pmax:.3e} in column {k}"
                )));
            }
            piv[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (m.slot(k, j), m.slot(p, j));
                    m.data.swap(a, b);
                }
            }
            let pivot = m.data[m.slot(k, k)];
            for i in (k + 1)..=last_row {
                let s = m.slot(i, k);
                let l = m.data[s] / pivot;
                m.data[s] = l;
                if l == 0.0 {
                    continue;
                }
                for j in (k + 1)..=last_col {
                    let ukj = m.data[m.slot(k, j)];
                    let t = m.slot(i, j);
                    m.data[t] -= l * ukj;
                }
            }
        }
        Ok(Self { m, piv })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl, ku) = (self.m.n, self.m.kl, self.m.ku);
        assert_eq!(b.len(), n, "rhs length");
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for i in (k + 1)..=(k + kl).min(n - 1) {
                x[i] -= self.m.data[self.m.slot(i, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in (k + 1)..=(k + kl + ku).min(n - 1) {
                s -= self.m.data[self.m.slot(k, j)] * x[j];
            }
            x[k] = s / self.m.data[self.m.slot(k, k)];
        }
        x
    }
}
