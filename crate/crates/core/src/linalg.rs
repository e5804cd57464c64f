//! Small dense-band linear algebra and cubic splines used by the flow.

use crate::error::{Error, Result};

/// A square banded matrix with `kl` sub- and `ku` super-diagonals, stored
/// row-wise with room for the fill-in produced by partial pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row `i` holds columns `i − kl ..= i + kl + ku` at offsets `0 ..= 2kl + ku`.
    rows: Vec<Vec<f64>>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix { n, kl, ku, rows: vec![vec![0.0; 2 * kl + ku + 1]; n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        let lo = i as isize - self.kl as isize;
        let off = j as isize - lo;
        (off >= 0 && (off as usize) < self.rows[i].len()).then_some(off as usize)
    }

    /// Adds `v` to entry `(i, j)`; the entry must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        let ok = j + self.kl >= i && j <= i + self.ku;
        match self.offset(i, j) {
            Some(o) if ok => {
                self.rows[i][o] += v;
                Ok(())
            }
            _ => Err(Error::Solver(format!("entry ({i}, {j}) outside band ({}, {})", self.kl, self.ku))),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.offset(i, j).map(|o| self.rows[i][o]).unwrap_or(0.0)
    }

    /// LU factorization with partial pivoting (row interchanges).
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl) = (self.n, self.kl);
        let width = self.rows.first().map_or(0, |r| r.len());
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(Error::Solver(format!("singular band matrix at column {k}")));
            }
            piv[k] = p;
            if p != k {
                // swap the parts of rows k and p from column k onwards
                let hi = (k + width - kl).min(n);
                for j in k..hi {
                    let (a, b) = (self.get(k, j), self.get(p, j));
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
            }
            let pivot = self.get(k, k);
            let hi = (k + width - kl).min(n);
            for i in k + 1..=last {
                let f = self.get(i, k) / pivot;
                if f == 0.0 {
                    continue;
                }
                self.set(i, k, f);
                for j in k + 1..hi {
                    let u = self.get(k, j);
                    if u != 0.0 {
                        let v = self.get(i, j) - f * u;
                        self.set(i, j, v);
                    }
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        if let Some(o) = self.offset(i, j) {
            self.rows[i][o] = v;
        } else {
            debug_assert!(v == 0.0, "fill-in outside storage at ({i}, {j})");
        }
    }

    /// Matrix–vector product.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + 1).min(self.n);
                (lo..hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }
}

/// Factored band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.m.n;
        let kl = self.m.kl;
        let width = self.m.rows.first().map_or(0, |r| r.len());
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                b[i] -= self.m.get(i, k) * b[k];
            }
        }
        for k in (0..n).rev() {
            let hi = (k + width - kl).min(n);
            let mut s = b[k];
            for j in k + 1..hi {
                s -= self.m.get(k, j) * b[j];
            }
            b[k] = s / self.m.get(k, k);
        }
    }
}

/// Solves a tridiagonal system (Thomas algorithm); `sub[0]` and `sup[n−1]` are unused.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut den = diag[0];
    if den == 0.0 {
        return Err(Error::Solver("zero pivot in tridiagonal solve".into()));
    }
    c[0] = sup[0] / den;
    d[0] = rhs[0] / den;
    for i in 1..n {
        den = diag[i] - sub[i] * c[i - 1];
        if den == 0.0 {
            return Err(Error::Solver("zero pivot in tridiagonal solve".into()));
        }
        c[i] = if i + 1 < n { sup[i] / den } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Cubic spline with prescribed end slopes (clamped).
#[derive(Debug, Clone)]
pub struct CubicSpline {
    t: Vec<f64>,
    f: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn clamped(t: &[f64], f: &[f64], d0: f64, d1: f64) -> Result<Self> {
        let n = t.len();
        if n < 2 || f.len() != n {
            return Err(Error::Parameter("spline needs at least two knots".into()));
        }
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        if h.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Parameter("spline knots must increase strictly".into()));
        }
        let (mut sub, mut diag, mut sup, mut rhs) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        diag[0] = h[0] / 3.0;
        sup[0] = h[0] / 6.0;
        rhs[0] = (f[1] - f[0]) / h[0] - d0;
        for i in 1..n - 1 {
            sub[i] = h[i - 1] / 6.0;
            diag[i] = (h[i - 1] + h[i]) / 3.0;
            sup[i] = h[i] / 6.0;
            rhs[i] = (f[i + 1] - f[i]) / h[i] - (f[i] - f[i - 1]) / h[i - 1];
        }
        sub[n - 1] = h[n - 2] / 6.0;
        diag[n - 1] = h[n - 2] / 3.0;
        rhs[n - 1] = d1 - (f[n - 1] - f[n - 2]) / h[n - 2];
        let m = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        Ok(CubicSpline { t: t.to_vec(), f: f.to_vec(), m })
    }

    /// Index of the knot interval containing `x` (clamped to the ends).
    pub fn interval(&self, x: f64) -> usize {
        let k = self.t.partition_point(|&v| v <= x);
        k.saturating_sub(1).min(self.t.len() - 2)
    }

    /// Value and first derivative at `x` within interval `k`.
    pub fn eval_in(&self, k: usize, x: f64) -> (f64, f64) {
        let h = self.t[k + 1] - self.t[k];
        let a = (self.t[k + 1] - x) / h;
        let b = (x - self.t[k]) / h;
        let (m0, m1) = (self.m[k], self.m[k + 1]);
        let v = a * self.f[k] + b * self.f[k + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (self.f[k + 1] - self.f[k]) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (v, d)
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        self.eval_in(self.interval(x), x)
    }

    pub fn knots(&self) -> &[f64] {
        &self.t
    }
}
