//! Plant and target states on the two subintervals, and the H¹×L² norm.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{derivative_2nd_order, trapezoid, Grid1D, ScalarField};

/// Displacement/velocity pair on (0,ξ) and (ξ,1).
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub t: f64,
    pub u1: ScalarField,
    pub v1: ScalarField,
    pub u2: ScalarField,
    pub v2: ScalarField,
}

/// Target-side state `(w, z)`, with `z` playing the role of `ẇ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub t: f64,
    pub w1: ScalarField,
    pub z1: ScalarField,
    pub w2: ScalarField,
    pub z2: ScalarField,
}

/// Common view used by norms, CSV output and the transformation code.
pub trait SplitState {
    fn time(&self) -> f64;
    fn parts(&self) -> [&ScalarField; 4];
    fn from_parts(t: f64, parts: [ScalarField; 4]) -> Self;
}

impl SplitState for PlantState {
    fn time(&self) -> f64 {
        self.t
    }
    fn parts(&self) -> [&ScalarField; 4] {
        [&self.u1, &self.v1, &self.u2, &self.v2]
    }
    fn from_parts(t: f64, [u1, v1, u2, v2]: [ScalarField; 4]) -> Self {
        Self { t, u1, v1, u2, v2 }
    }
}

impl SplitState for TargetState {
    fn time(&self) -> f64 {
        self.t
    }
    fn parts(&self) -> [&ScalarField; 4] {
        [&self.w1, &self.z1, &self.w2, &self.z2]
    }
    fn from_parts(t: f64, [w1, z1, w2, z2]: [ScalarField; 4]) -> Self {
        Self { t, w1, z1, w2, z2 }
    }
}

impl PlantState {
    /// Sample global functions on `n1` nodes over [0,ξ] and `n2` over [ξ,1].
    pub fn from_fns(
        xi: f64,
        n1: usize,
        n2: usize,
        u: impl Fn(f64) -> f64,
        v: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let g1 = Grid1D::new(0.0, xi, n1)?;
        let g2 = Grid1D::new(xi, 1.0, n2)?;
        Ok(Self {
            t: 0.0,
            u1: ScalarField::from_fn(g1, &u),
            v1: ScalarField::from_fn(g1, &v),
            u2: ScalarField::from_fn(g2, &u),
            v2: ScalarField::from_fn(g2, &v),
        })
    }

    pub fn zeros(xi: f64, n1: usize, n2: usize) -> Result<Self> {
        Self::from_fns(xi, n1, n2, |_| 0.0, |_| 0.0)
    }

    pub fn xi(&self) -> f64 {
        self.u1.grid().hi
    }
}

impl TargetState {
    pub fn from_fns(
        xi: f64,
        n1: usize,
        n2: usize,
        w: impl Fn(f64) -> f64,
        z: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let p = PlantState::from_fns(xi, n1, n2, w, z)?;
        Ok(Self {
            t: 0.0,
            w1: p.u1,
            z1: p.v1,
            w2: p.u2,
            z2: p.v2,
        })
    }

    pub fn xi(&self) -> f64 {
        self.w1.grid().hi
    }
}

/// Random smooth plant data: sine series with uniform coefficients in
/// [−1, 1], damped like `1/k²` for `u` and `1/k` for `v`.
pub fn random_smooth_state<R: Rng + ?Sized>(rng: &mut R, xi: f64, n1: usize, n2: usize, modes: usize) -> Result<PlantState> {
    let a: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let b: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let series = |c: &[f64], p: i32| {
        let c = c.to_vec();
        move |x: f64| {
            c.iter()
                .enumerate()
                .map(|(k, ck)| {
                    let m = (k + 1) as f64;
                    ck * (m * std::f64::consts::PI * x).sin() / m.powi(p)
                })
                .sum::<f64>()
        }
    };
    PlantState::from_fns(xi, n1, n2, series(&a, 2), series(&b, 1))
}

/// Dirichlet conditions at 0 and 1 within `tol` (absolute, scaled by the
/// displacement magnitude).
pub(crate) fn check_dirichlet<S: SplitState>(state: &S, tol: f64) -> Result<()> {
    let [u1, _, u2, _] = state.parts();
    let scale = 1.0 + u1.max_abs().max(u2.max_abs());
    let (a, b) = (u1.values()[0], *u2.values().last().expect("non-empty"));
    if a.abs() > tol * scale || b.abs() > tol * scale {
        return Err(Error::State(format!(
            "Dirichlet conditions: u(0) = {a:e}, u(1) = {b:e}"
        )));
    }
    Ok(())
}

/// Discrete H¹×L² norm, `√(∫ u'² + u² + v²)` summed over both subintervals,
/// by the trapezoid rule with second-order differences for `u'`.
pub fn state_norm<S: SplitState>(state: &S) -> f64 {
    let [u1, v1, u2, v2] = state.parts();
    (piece_norm_sq(u1.values(), v1.values(), u1.grid().dx())
        + piece_norm_sq(u2.values(), v2.values(), u2.grid().dx()))
    .sqrt()
}

/// `∫ u'² + u² + v²` over one subinterval with spacing `h`.
pub(crate) fn piece_norm_sq(u: &[f64], v: &[f64], h: f64) -> f64 {
    let du = derivative_2nd_order(u, h);
    let integrand: Vec<f64> = (0..du.len()).map(|i| du[i] * du[i] + u[i] * u[i] + v[i] * v[i]).collect();
    trapezoid(&integrand, h)
}

/// Node-wise difference of two states on identical grids.
pub fn difference<S: SplitState>(a: &S, b: &S) -> Result<S> {
    let pa = a.parts();
    let pb = b.parts();
    let mut out = Vec::with_capacity(4);
    for k in 0..4 {
        if pa[k].grid() != pb[k].grid() {
            return Err(Error::State("states live on different grids".into()));
        }
        let v: Vec<f64> = pa[k]
            .values()
            .iter()
            .zip(pb[k].values())
            .map(|(x, y)| x - y)
            .collect();
        out.push(ScalarField::new(*pa[k].grid(), v)?);
    }
    let arr: [ScalarField; 4] = out.try_into().expect("four parts");
    Ok(S::from_parts(a.time(), arr))
}

/// `a·x + b·y` for states on identical grids.
pub fn combine<S: SplitState>(a: f64, x: &S, b: f64, y: &S) -> Result<S> {
    let px = x.parts();
    let py = y.parts();
    let mut out = Vec::with_capacity(4);
    for k in 0..4 {
        if px[k].grid() != py[k].grid() {
            return Err(Error::State("states live on different grids".into()));
        }
        let v: Vec<f64> = px[k]
            .values()
            .iter()
            .zip(py[k].values())
            .map(|(p, q)| a * p + b * q)
            .collect();
        out.push(ScalarField::new(*px[k].grid(), v)?);
    }
    let arr: [ScalarField; 4] = out.try_into().expect("four parts");
    Ok(S::from_parts(x.time(), arr))
}
