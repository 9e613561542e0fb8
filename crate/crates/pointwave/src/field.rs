//! Uniform grids, sampled scalar fields and the quadrature rules shared by
//! every other module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid with inclusive endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Grid(format!("need at least 3 nodes, got {n}")));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Grid(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi, n })
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.hi
        } else {
            self.lo + i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * (1.0 + self.hi.abs().max(self.lo.abs()));
        x >= self.lo - slack && x <= self.hi + slack
    }
}

/// Node values on a [`Grid1D`], evaluated between nodes by monotone
/// piecewise-cubic (Fritsch–Carlson) interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid1D,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Grid(format!(
                "{} values for a {}-node grid",
                values.len(),
                grid.n
            )));
        }
        let slopes = pchip_slopes(grid.dx(), &values);
        Ok(Self {
            grid,
            values,
            slopes,
        })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, values).expect("length matches grid")
    }

    pub fn constant(grid: Grid1D, v: f64) -> Self {
        Self::from_fn(grid, |_| v)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.grid.contains(x) {
            return Err(Error::OutOfDomain {
                x,
                lo: self.grid.lo,
                hi: self.grid.hi,
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation clamped to the grid; callers guarantee `x` is in range.
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let h = self.grid.dx();
        let t = ((x - self.grid.lo) / h).clamp(0.0, (self.grid.n - 1) as f64);
        let i = (t.floor() as usize).min(self.grid.n - 2);
        let s = t - i as f64;
        if s == 0.0 {
            return self.values[i];
        }
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    /// Mirror image under `x -> pivot - x`. Samples are reversed, not
    /// re-interpolated, so mirroring twice restores them bit for bit.
    pub fn mirrored(&self, pivot: f64) -> Self {
        let grid = Grid1D {
            lo: pivot - self.grid.hi,
            hi: pivot - self.grid.lo,
            n: self.grid.n,
        };
        let values: Vec<f64> = self.values.iter().rev().copied().collect();
        Self::new(grid, values).expect("same length")
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect()).expect("same length")
    }

    /// Trapezoid integral over the whole grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.dx())
    }
}

fn pchip_slopes(h: f64, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        if a * b > 0.0 {
            // weighted harmonic mean on a uniform grid
            m[i] = 2.0 * a * b / (a + b);
        }
    }
    m[0] = pchip_end(delta[0], delta.get(1).copied().unwrap_or(delta[0]));
    m[n - 1] = pchip_end(delta[n - 2], if n > 2 { delta[n - 3] } else { delta[n - 2] });
    m
}

fn pchip_end(d0: f64, d1: f64) -> f64 {
    let m = (3.0 * d0 - d1) / 2.0;
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Composite trapezoid rule on uniform spacing `h`.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (f[0] + f[n - 1]) + f[1..n - 1].iter().sum::<f64>()),
    }
}

/// Running trapezoid integral; `out[i] = ∫ f` from node 0 to node i.
pub fn cumulative_trapezoid(f: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    if !f.is_empty() {
        out.push(0.0);
    }
    for w in f.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Running Simpson integral. Even nodes use composite Simpson; odd nodes
/// add a three-point partial-panel correction, so every node is third order
/// or better.
pub fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            out[1] = 0.5 * h * (f[0] + f[1]);
        }
        return out;
    }
    for i in 1..n {
        out[i] = if i % 2 == 0 {
            out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i])
        } else if i + 1 < n {
            out[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1])
        } else {
            out[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i])
        };
    }
    out
}

/// Second-order first derivative: central inside, one-sided at the ends.
pub fn derivative_2nd_order(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 3);
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d
}

/// Fourth-order first derivative: five-point central stencil inside,
/// five-point one-sided stencils on the two outermost nodes at each end.
pub fn derivative_4th_order(f: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = f.len();
    if n < 5 {
        return Err(Error::Coefficient(format!(
            "need at least 5 samples for fourth-order derivatives, got {n}"
        )));
    }
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    }
    let fwd0 = |k: usize| {
        (-25.0 * f[k] + 48.0 * f[k + 1] - 36.0 * f[k + 2] + 16.0 * f[k + 3] - 3.0 * f[k + 4])
            / (12.0 * h)
    };
    let fwd1 = |k: usize| {
        (-3.0 * f[k - 1] - 10.0 * f[k] + 18.0 * f[k + 1] - 6.0 * f[k + 2] + f[k + 3]) / (12.0 * h)
    };
    let bwd0 = |k: usize| {
        (25.0 * f[k] - 48.0 * f[k - 1] + 36.0 * f[k - 2] - 16.0 * f[k - 3] + 3.0 * f[k - 4])
            / (12.0 * h)
    };
    let bwd1 = |k: usize| {
        (3.0 * f[k + 1] + 10.0 * f[k] - 18.0 * f[k - 1] + 6.0 * f[k - 2] - f[k - 3]) / (12.0 * h)
    };
    d[0] = fwd0(0);
    d[1] = fwd1(1);
    d[n - 1] = bwd0(n - 1);
    d[n - 2] = bwd1(n - 2);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_degenerate() {
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
        assert!(Grid1D::new(1.0, 1.0, 5).is_err());
        let g = Grid1D::new(0.0, 1.0, 5).unwrap();
        assert_eq!(g.dx(), 0.25);
        assert_eq!(g.node(4), 1.0);
    }

    #[test]
    fn eval_outside_is_error() {
        let g = Grid1D::new(0.0, 0.5, 11).unwrap();
        let f = ScalarField::from_fn(g, |x| x * x);
        assert!(f.eval(0.6).is_err());
        assert!(f.eval(-0.01).is_err());
        assert!(f.eval(0.5).is_ok());
    }

    #[test]
    fn pchip_reproduces_nodes_and_is_accurate() {
        let g = Grid1D::new(0.0, 1.0, 101).unwrap();
        let f = ScalarField::from_fn(g, |x| (2.0 * x).exp());
        for i in 0..g.n {
            let e = (2.0 * g.node(i)).exp();
            assert!((f.eval(g.node(i)).unwrap() - e).abs() <= 1e-15 * e);
        }
        let err = (0..997)
            .map(|k| {
                let x = k as f64 / 997.0;
                (f.eval(x).unwrap() - (2.0 * x).exp()).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn mirror_twice_is_identity_on_samples() {
        let g = Grid1D::new(0.3, 1.0, 17).unwrap();
        let f = ScalarField::from_fn(g, |x| x.sin() + 0.1);
        let back = f.mirrored(1.0).mirrored(1.0);
        assert_eq!(back.values(), f.values());
        assert!((back.grid().lo - 0.3).abs() < 1e-15);
    }

    #[test]
    fn quadrature_orders() {
        let h = 0.01;
        let f: Vec<f64> = (0..=100).map(|i| (i as f64 * h).cos()).collect();
        let exact = 1.0_f64.sin();
        assert!((trapezoid(&f, h) - exact).abs() < 1e-5);
        let cs = cumulative_simpson(&f, h);
        for (i, v) in cs.iter().enumerate() {
            assert!((v - (i as f64 * h).sin()).abs() < 1e-9, "node {i}");
        }
        let ct = cumulative_trapezoid(&f, h);
        assert!((ct[100] - trapezoid(&f, h)).abs() < 1e-14);
    }

    #[test]
    fn fourth_order_derivative() {
        let h = 0.02;
        let f: Vec<f64> = (0..51).map(|i| (i as f64 * h).sin()).collect();
        let d = derivative_4th_order(&f, h).unwrap();
        for (i, v) in d.iter().enumerate() {
            assert!((v - (i as f64 * h).cos()).abs() < 1e-6, "node {i}");
        }
        assert!(derivative_4th_order(&f[..4], h).is_err());
    }
}
