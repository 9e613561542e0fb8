use crate::error::{Error, Result};

/// Values on the closed triangle `0 ≤ y ≤ x ≤ length`, packed row by row
/// (row `i` holds `y_0 ..= y_i`).
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleField {
    length: f64,
    n: usize,
    values: Vec<f64>,
}

#[inline]
fn offset(i: usize) -> usize {
    i * (i + 1) / 2
}

impl TriangleField {
    pub fn zeros(length: f64, n: usize) -> Self {
        Self {
            length,
            n,
            values: vec![0.0; offset(n)],
        }
    }

    pub fn from_fn(length: f64, n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(offset(n));
        for i in 0..n {
            for j in 0..=i {
                values.push(f(i, j));
            }
        }
        Self { length, n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.length
        } else {
            i as f64 * self.dx()
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(j <= i && i < self.n);
        self.values[offset(i) + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[offset(i)..offset(i) + i + 1]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn anchored_edge(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, 0)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        crate::field::max_abs(&self.values)
    }

    /// Bilinear inside square cells, linear on the cells cut by the diagonal.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let tol = 1e-12 * (1.0 + self.length);
        if !(y >= -tol && y <= x + tol && x <= self.length + tol) {
            return Err(Error::OutOfDomain {
                x,
                lo: 0.0,
                hi: self.length,
            });
        }
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: f64, y: f64) -> f64 {
        let h = self.dx();
        let last = (self.n - 1) as f64;
        let tx = (x / h).clamp(0.0, last);
        let ty = (y / h).clamp(0.0, tx);
        let i = (tx.floor() as usize).min(self.n - 2);
        let j = (ty.floor() as usize).min(i);
        let sx = tx - i as f64;
        let sy = ty - j as f64;
        if j < i {
            let f00 = self.get(i, j);
            let f10 = self.get(i + 1, j);
            let f01 = self.get(i, j + 1);
            let f11 = self.get(i + 1, j + 1);
            f00 * (1.0 - sx) * (1.0 - sy) + f10 * sx * (1.0 - sy) + f01 * (1.0 - sx) * sy + f11 * sx * sy
        } else {
            // triangle (i,i), (i+1,i), (i+1,i+1) with sy <= sx
            let f00 = self.get(i, i);
            let f10 = self.get(i + 1, i);
            let f11 = self.get(i + 1, i + 1);
            f00 + (f10 - f00) * (sx - sy) + (f11 - f00) * sy
        }
    }

    /// Resample onto another node count over the same triangle.
    pub fn resampled(&self, n: usize) -> Self {
        if n == self.n {
            return self.clone();
        }
        let h = self.length / (n - 1) as f64;
        Self::from_fn(self.length, n, |i, j| {
            self.eval_unchecked(i as f64 * h, j as f64 * h)
        })
    }
}
