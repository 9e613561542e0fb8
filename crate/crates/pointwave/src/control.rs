//! Boundary feedback at the interface.
//!
//! The control enters as the jump of `u'` across ξ on top of the natural
//! `κ·u(ξ)` interface correction. With the gain traces it reads
//!
//! ```text
//! U = (c0 + c_alpha)·u(ξ) + c_v·u̇(ξ)
//!     + ∫₀^ξ gk1·u + ∫₀^ξ gs1·u̇ + ∫_ξ^1 gk2·u + ∫_ξ^1 gs2·u̇
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{trapezoid, Grid1D, ScalarField};
use crate::state::PlantState;

/// Feedback gains. `gk1`, `gs1` live on [0,ξ]; `gk2`, `gs2` on [ξ,1].
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    pub xi: f64,
    pub c0: f64,
    pub c_alpha: f64,
    pub c_v: f64,
    pub gk1: ScalarField,
    pub gs1: ScalarField,
    pub gk2: ScalarField,
    pub gs2: ScalarField,
    pub h1_xi: f64,
}

/// Scalar part of the gains, for reports.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GainSummary {
    pub c0: f64,
    pub c_alpha: f64,
    pub c_v: f64,
    pub h1_xi: f64,
    pub max_gk: f64,
    pub max_gs: f64,
}

impl GainSet {
    pub fn summary(&self) -> GainSummary {
        GainSummary {
            c0: self.c0,
            c_alpha: self.c_alpha,
            c_v: self.c_v,
            h1_xi: self.h1_xi,
            max_gk: self.gk1.max_abs().max(self.gk2.max_abs()),
            max_gs: self.gs1.max_abs().max(self.gs2.max_abs()),
        }
    }

    /// Displacement coefficient at the interface, `c0 + c_alpha`.
    pub fn point_gain(&self) -> f64 {
        self.c0 + self.c_alpha
    }

    /// Gains sampled onto the given subinterval grids (no-op when they match).
    pub fn resampled(&self, g1: Grid1D, g2: Grid1D) -> Result<Self> {
        let re = |f: &ScalarField, g: Grid1D| -> Result<ScalarField> {
            if *f.grid() == g {
                return Ok(f.clone());
            }
            let vals = g.nodes().into_iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;
            ScalarField::new(g, vals)
        };
        Ok(Self {
            gk1: re(&self.gk1, g1)?,
            gs1: re(&self.gs1, g1)?,
            gk2: re(&self.gk2, g2)?,
            gs2: re(&self.gs2, g2)?,
            ..self.clone()
        })
    }
}

/// Evaluate the feedback law on a plant state. The gains must already live on
/// the state's grids (see [`GainSet::resampled`]).
pub fn compute_feedback(gains: &GainSet, state: &PlantState) -> Result<f64> {
    feedback_from_slices(
        gains,
        state.u1.values(),
        state.v1.values(),
        state.u2.values(),
        state.v2.values(),
        state.u1.grid(),
        state.u2.grid(),
    )
}

pub(crate) fn feedback_from_slices(
    gains: &GainSet,
    u1: &[f64],
    v1: &[f64],
    u2: &[f64],
    v2: &[f64],
    g1: &Grid1D,
    g2: &Grid1D,
) -> Result<f64> {
    if gains.gk1.grid() != g1 || gains.gk2.grid() != g2 {
        return Err(Error::State("gain grids do not match the state grids".into()));
    }
    let n1 = u1.len();
    let dot = |g: &ScalarField, f: &[f64], h: f64| -> f64 {
        let p: Vec<f64> = g.values().iter().zip(f).map(|(a, b)| a * b).collect();
        trapezoid(&p, h)
    };
    let (h1, h2) = (g1.dx(), g2.dx());
    let u_xi = u1[n1 - 1];
    let v_xi = v1[n1 - 1];
    Ok(gains.point_gain() * u_xi
        + gains.c_v * v_xi
        + dot(&gains.gk1, u1, h1)
        + dot(&gains.gs1, v1, h1)
        + dot(&gains.gk2, u2, h2)
        + dot(&gains.gs2, v2, h2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_gains(n1: usize, n2: usize) -> GainSet {
        let g1 = Grid1D::new(0.0, 0.5, n1).unwrap();
        let g2 = Grid1D::new(0.5, 1.0, n2).unwrap();
        GainSet {
            xi: 0.5,
            c0: 1.0,
            c_alpha: -0.25,
            c_v: 2.0,
            gk1: ScalarField::constant(g1, 1.0),
            gs1: ScalarField::from_fn(g1, |x| x),
            gk2: ScalarField::constant(g2, -1.0),
            gs2: ScalarField::constant(g2, 0.0),
            h1_xi: 1.0,
        }
    }

    #[test]
    fn feedback_matches_hand_computation() {
        let g = toy_gains(51, 51);
        let s = PlantState::from_fns(0.5, 51, 51, |x| x, |_| 1.0).unwrap();
        let u = compute_feedback(&g, &s).unwrap();
        // 0.75*0.5 + 2*1 + 0.125 + 0.125 - 0.375 + 0
        let expected = 0.375 + 2.0 + 0.125 + 0.125 - 0.375;
        assert!((u - expected).abs() < 1e-12, "{u} vs {expected}");
    }

    #[test]
    fn feedback_is_linear() {
        let g = toy_gains(21, 31);
        let a = PlantState::from_fns(0.5, 21, 31, |x| x.sin(), |x| x * x).unwrap();
        let b = PlantState::from_fns(0.5, 21, 31, |x| x.cos(), |x| 1.0 - x).unwrap();
        let ab = crate::state::combine(2.0, &a, -3.0, &b).unwrap();
        let lhs = compute_feedback(&g, &ab).unwrap();
        let rhs = 2.0 * compute_feedback(&g, &a).unwrap() - 3.0 * compute_feedback(&g, &b).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let g = toy_gains(21, 31);
        let s = PlantState::zeros(0.5, 41, 31).unwrap();
        assert!(compute_feedback(&g, &s).is_err());
        let r = g.resampled(*s.u1.grid(), *s.u2.grid()).unwrap();
        assert_eq!(compute_feedback(&r, &s).unwrap(), 0.0);
    }
}
