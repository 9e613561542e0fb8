use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::SubdomainProblem;

use super::triangle::TriangleField;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualReport {
    pub pde_residual_k: f64,
    pub pde_residual_s: f64,
    pub grid_n: usize,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.pde_residual_k.max(self.pde_residual_s)
    }
}

/// Max-norm residuals of the two kernel PDEs from centered second
/// differences, over interior nodes at least two spacings from every edge.
pub fn kernel_residual(
    k: &TriangleField,
    s: &TriangleField,
    sub: &SubdomainProblem,
) -> Result<ResidualReport> {
    let n = k.n();
    if n < 33 {
        return Err(Error::Grid(format!("residual stencil needs n >= 33, got {n}")));
    }
    if s.n() != n {
        return Err(Error::Grid("k and s grids differ".into()));
    }
    let h = k.dx();
    let h2 = h * h;
    let (mut rk, mut rs) = (0.0_f64, 0.0_f64);
    for i in 4..n - 2 {
        let x = k.node(i);
        let (dx_, cx) = (sub.d.at(x), sub.c.at(x));
        for j in 2..=i - 2 {
            let y = k.node(j);
            let (ly, l1y, l2y, by) = (sub.lam.at(y), sub.lam.d1_at(y), sub.lam.d2_at(y), sub.bet.at(y));
            let rho1 = 2.0 * (ly + dx_);
            let rho2 = cx + by;
            let rho3 = 2.0 * (ly * by + l2y + dx_ * by);
            let rho4 = 4.0 * l1y;
            let rho5 = 4.0 * ly * ly + 4.0 * dx_ * ly + cx + by;
            let kxx = (k.get(i + 1, j) - 2.0 * k.get(i, j) + k.get(i - 1, j)) / h2;
            let kyy = (k.get(i, j + 1) - 2.0 * k.get(i, j) + k.get(i, j - 1)) / h2;
            let sxx = (s.get(i + 1, j) - 2.0 * s.get(i, j) + s.get(i - 1, j)) / h2;
            let syy = (s.get(i, j + 1) - 2.0 * s.get(i, j) + s.get(i, j - 1)) / h2;
            let sy = (s.get(i, j + 1) - s.get(i, j - 1)) / (2.0 * h);
            let res_k = kxx - kyy - (rho1 * syy + rho2 * k.get(i, j) + rho3 * s.get(i, j) + rho4 * sy);
            let res_s = sxx - syy - (rho1 * k.get(i, j) + rho5 * s.get(i, j));
            rk = rk.max(res_k.abs());
            rs = rs.max(res_s.abs());
        }
    }
    Ok(ResidualReport {
        pde_residual_k: rk,
        pde_residual_s: rs,
        grid_n: n,
    })
}
