//! Dense complex LU with partial pivoting, accumulating determinants as
//! `log|det|` plus a phase so that ratios of large determinants never
//! overflow.

use crate::C64;
use std::f64::consts::PI;

/// Square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    /// Matrix with rows and columns reordered: `out[i][j] = self[rows[i]][cols[j]]`.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> Self {
        CMat::from_fn(self.n, |i, j| self.get(rows[i], cols[j]))
    }

    pub fn log_det(&self) -> LogDet {
        log_det(self.clone())
    }
}

/// A determinant stored as `exp(log_abs) · e^{i·phase}`; zero has
/// `log_abs = −∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: f64,
}

impl LogDet {
    pub fn one() -> Self {
        LogDet { log_abs: 0.0, phase: 0.0 }
    }

    pub fn from_value(z: C64) -> Self {
        LogDet { log_abs: z.norm().ln(), phase: z.arg() }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    pub fn mul(self, o: LogDet) -> Self {
        LogDet { log_abs: self.log_abs + o.log_abs, phase: wrap(self.phase + o.phase) }
    }

    pub fn div(self, o: LogDet) -> Self {
        LogDet { log_abs: self.log_abs - o.log_abs, phase: wrap(self.phase - o.phase) }
    }

    /// Complex logarithm (principal phase).
    pub fn ln(&self) -> C64 {
        C64::new(self.log_abs, self.phase)
    }

    pub fn value(&self) -> C64 {
        C64::from_polar(self.log_abs.exp(), self.phase)
    }
}

fn wrap(phase: f64) -> f64 {
    let w = (phase + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// In-place LU with partial pivoting; returns the log-determinant.
pub fn log_det(mut m: CMat) -> LogDet {
    let n = m.n;
    let mut acc = LogDet::one();
    for col in 0..n {
        let (piv, mag) = (col..n)
            .map(|r| (r, m.get(r, col).norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag == 0.0 || !mag.is_finite() {
            return LogDet { log_abs: if mag == 0.0 { f64::NEG_INFINITY } else { f64::NAN }, phase: 0.0 };
        }
        if piv != col {
            for j in 0..n {
                m.data.swap(piv * n + j, col * n + j);
            }
            acc.phase = wrap(acc.phase + PI);
        }
        let p = m.get(col, col);
        acc = acc.mul(LogDet::from_value(p));
        for r in col + 1..n {
            let f = m.get(r, col) / p;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in col + 1..n {
                let v = m.get(r, j) - f * m.get(col, j);
                m.set(r, j, v);
            }
        }
    }
    acc
}

/// Solve the real system `J x = f` (Gaussian elimination with partial
/// pivoting). Returns `None` for a numerically singular matrix.
pub fn solve_real(mut j: Vec<Vec<f64>>, mut f: Vec<f64>) -> Option<Vec<f64>> {
    let n = f.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| j[a][col].abs().total_cmp(&j[b][col].abs()))?;
        if j[piv][col].abs() < 1e-300 {
            return None;
        }
        j.swap(piv, col);
        f.swap(piv, col);
        for r in col + 1..n {
            let factor = j[r][col] / j[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                j[r][c] -= factor * j[col][c];
            }
            f[r] -= factor * f[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| j[r][c] * x[c]).sum();
        x[r] = (f[r] - s) / j[r][r];
    }
    Some(x)
}
