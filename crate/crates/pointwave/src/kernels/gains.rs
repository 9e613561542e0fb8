//! Gain traces at the actuator.
//!
//! Matching `w₁'(ξ) = w₂'(ξ)` against the plant's slope jump
//! `u₁'(ξ) − u₂'(ξ) = κ u(ξ) + U` gives the feedback law of
//! [`crate::control`]. The right kernels are solved in mirrored
//! coordinates `x̂ = 1 − x`, where `k₂(x,y) = −K̂(1−x,1−y)` and
//! `h₂(x) = Ĥ(1−x)`, so `∂ₓk₂(ξ,y) = K̂ₓ(ℓ₂, 1−y)`.

use crate::control::GainSet;
use crate::error::{Error, Result};
use crate::field::{Grid1D, ScalarField};
use crate::problem::PlantSpec;

use super::KernelSet;

/// Below this, `h₁(ξ)` is treated as zero and the gains are undefined.
pub const MIN_H_XI: f64 = 1e-12;

/// Interface values of the kernels in the original (unmirrored) orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceValues {
    pub h1: f64,
    pub h2: f64,
    pub h1_prime: f64,
    pub h2_prime: f64,
    pub k1: f64,
    pub k2: f64,
    pub s1: f64,
    pub s2: f64,
}

pub fn interface_values(ks: &KernelSet) -> InterfaceValues {
    let (a, b) = (&ks.sub1, &ks.sub2);
    let (e1, e2) = (a.n() - 1, b.n() - 1);
    InterfaceValues {
        h1: a.h_end(),
        h2: b.h_end(),
        h1_prime: a.h_prime_end(),
        h2_prime: -b.h_prime_end(),
        k1: a.k().get(e1, e1),
        k2: -b.k().get(e2, e2),
        s1: a.s().get(e1, e1),
        s2: -b.s().get(e2, e2),
    }
}

/// Build the feedback gains from solved kernels.
pub fn gain_trace(ks: &KernelSet, spec: &PlantSpec) -> Result<GainSet> {
    let iv = interface_values(ks);
    if iv.h1.abs() < MIN_H_XI || !iv.h1.is_finite() {
        return Err(Error::Problem(format!("h1(xi) = {:e} is too small to divide by", iv.h1)));
    }
    let (a, b) = (&ks.sub1, &ks.sub2);
    let (n1, n2) = (a.n(), b.n());
    let (e1, e2) = (n1 - 1, n2 - 1);
    let sol1 = &a.solution;
    let sol2 = &b.solution;
    let inv = 1.0 / iv.h1;

    let g1 = Grid1D::new(0.0, ks.xi, n1)?;
    let g2 = Grid1D::new(ks.xi, 1.0, n2)?;
    let gk1: Vec<f64> = (0..n1).map(|j| inv * sol1.k_x.get(e1, j)).collect();
    let gs1: Vec<f64> = (0..n1).map(|j| inv * sol1.s_x.get(e1, j)).collect();
    let gk2: Vec<f64> = (0..n2).map(|i| inv * sol2.k_x.get(e2, e2 - i)).collect();
    let gs2: Vec<f64> = (0..n2).map(|i| inv * sol2.s_x.get(e2, e2 - i)).collect();

    let gains = GainSet {
        xi: ks.xi,
        c0: (iv.h2_prime - iv.h1_prime + iv.k1 - iv.k2) * inv,
        c_alpha: -spec.interface_correction,
        c_v: (iv.s1 - iv.s2) * inv,
        gk1: ScalarField::new(g1, gk1)?,
        gs1: ScalarField::new(g1, gs1)?,
        gk2: ScalarField::new(g2, gk2)?,
        gs2: ScalarField::new(g2, gs2)?,
        h1_xi: iv.h1,
    };
    let finite = [gains.c0, gains.c_v]
        .iter()
        .chain(gains.gk1.values())
        .chain(gains.gs1.values())
        .chain(gains.gk2.values())
        .chain(gains.gs2.values())
        .all(|v| v.is_finite());
    if !finite {
        return Err(Error::NonFinite {
            stage: "gain trace",
            step: 0,
        });
    }
    Ok(gains)
}

/// One-sided second-order difference of a triangle field in `x` along the
/// last row, defined only for `j ≤ n − 3` (the stencil must stay inside the
/// triangle). Used to cross-check the tracked derivatives.
pub fn one_sided_x_trace(t: &super::TriangleField) -> Vec<Option<f64>> {
    let n = t.n();
    let h = t.dx();
    let e = n - 1;
    (0..n)
        .map(|j| {
            (j + 2 <= e).then(|| (3.0 * t.get(e, j) - 4.0 * t.get(e - 1, j) + t.get(e - 2, j)) / (2.0 * h))
        })
        .collect()
}
