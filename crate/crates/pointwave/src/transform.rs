//! The state transformation Π: (u, u̇) ↦ (w, ẇ) and its inverse.
//!
//! On each subdomain, in left-form coordinates,
//!
//! ```text
//! w = h u − ∫₀^x k(x,y) u(y) dy − ∫₀^x s(x,y) v(y) dy
//! z = f u − s(x,x) u′ + h v − ∫₀^x (2λ(y)s + k) v − ∫₀^x (β(y)s + s_yy) u
//! ```
//!
//! with `f = s_y(x,x)`. The right subdomain is handled through the mirror
//! `x̂ = 1 − x`. The inverse is the same map built from the inverse kernels.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{derivative_2nd_order, Grid1D, ScalarField};
use crate::kernels::{KernelSet, SubKernels, TriangleField};
use crate::state::{check_dirichlet, state_norm, PlantState, SplitState, TargetState};

/// Absolute Dirichlet tolerance (relative to the displacement scale).
pub const DIRICHLET_TOL: f64 = 1e-8;

/// Default compatibility tolerance factor: jumps must be ≤ this · ‖init‖.
pub const COMPAT_REL_TOL: f64 = 1e-6;

/// Kernel data of one subdomain sampled on the state grid.
#[derive(Debug, Clone)]
struct SubOperator {
    n: usize,
    dx: f64,
    h: Vec<f64>,
    f: Vec<f64>,
    ms: Vec<f64>,
    two_lam: Vec<f64>,
    bet: Vec<f64>,
    k: TriangleField,
    s: TriangleField,
    syy: TriangleField,
}

impl SubOperator {
    fn new(sk: &SubKernels, n: usize) -> Result<Self> {
        let len = sk.length();
        let g = Grid1D::new(0.0, len, n)?;
        let xs = g.nodes();
        let (h, f, ms) = if n == sk.n() {
            (
                (0..n).map(|i| sk.h_at(i)).collect(),
                (0..n).map(|i| sk.diag.f.values()[2 * i]).collect(),
                (0..n).map(|i| sk.closed.ms.values()[2 * i]).collect(),
            )
        } else {
            let ev = |fld: &ScalarField| xs.iter().map(|&x| fld.eval(x)).collect::<Result<Vec<_>>>();
            (ev(&sk.closed.h)?, ev(&sk.diag.f)?, ev(&sk.closed.ms)?)
        };
        let p = &sk.problem;
        Ok(Self {
            n,
            dx: g.dx(),
            h,
            f,
            ms,
            two_lam: xs.iter().map(|&y| 2.0 * p.lam.at(y)).collect(),
            bet: xs.iter().map(|&y| p.bet.at(y)).collect(),
            k: sk.k().resampled(n),
            s: sk.s().resampled(n),
            syy: sk.solution.s_yy.resampled(n),
        })
    }

    /// Apply to left-form arrays.
    fn apply(&self, u: &[f64], v: &[f64], exec: Exec) -> (Vec<f64>, Vec<f64>) {
        let du = derivative_2nd_order(u, self.dx);
        let half = 0.5 * self.dx;
        let rows = exec.map_range(self.n, |i| {
            let (kr, sr, yr) = (self.k.row(i), self.s.row(i), self.syy.row(i));
            let (mut iw, mut iz) = (0.0, 0.0);
            for j in 0..=i {
                let wgt = if j == 0 || j == i { half } else { self.dx };
                let wgt = if i == 0 { 0.0 } else { wgt };
                iw += wgt * (kr[j] * u[j] + sr[j] * v[j]);
                iz += wgt
                    * ((self.two_lam[j] * sr[j] + kr[j]) * v[j] + (self.bet[j] * sr[j] + yr[j]) * u[j]);
            }
            let w = self.h[i] * u[i] - iw;
            let z = self.f[i] * u[i] - self.ms[i] * du[i] + self.h[i] * v[i] - iz;
            (w, z)
        });
        rows.into_iter().unzip()
    }

    /// Solve the `w` equation for `u` with `v` given (forward substitution;
    /// the trapezoid rule makes it lower triangular).
    fn solve_displacement(&self, w: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let mut u = vec![0.0; self.n];
        let half = 0.5 * self.dx;
        for i in 0..self.n {
            let (kr, sr) = (self.k.row(i), self.s.row(i));
            let mut acc = 0.0;
            let mut diag = self.h[i];
            if i > 0 {
                for j in 0..i {
                    let wgt = if j == 0 { half } else { self.dx };
                    acc += wgt * (kr[j] * u[j] + sr[j] * v[j]);
                }
                acc += half * sr[i] * v[i];
                diag -= half * kr[i];
            }
            if diag.abs() < 1e-14 {
                return Err(Error::State("transformation is singular on this grid".into()));
            }
            u[i] = (w[i] + acc) / diag;
        }
        Ok(u)
    }
}

/// Π (or Π⁻¹) precomputed for fixed state grids.
#[derive(Debug, Clone)]
pub struct Transform {
    xi: f64,
    ops: [SubOperator; 2],
    exec: Exec,
}

impl Transform {
    /// Sample the kernels of `ks` on `n1` nodes over [0,ξ] and `n2` over [ξ,1].
    pub fn new(ks: &KernelSet, n1: usize, n2: usize) -> Result<Self> {
        Ok(Self {
            xi: ks.xi,
            ops: [SubOperator::new(&ks.sub1, n1)?, SubOperator::new(&ks.sub2, n2)?],
            exec: Exec::default(),
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn grids(&self) -> (usize, usize) {
        (self.ops[0].n, self.ops[1].n)
    }

    /// Map any split state to another; `T` decides the output labels.
    pub fn map<S: SplitState, T: SplitState>(&self, state: &S) -> Result<T> {
        let [u1, v1, u2, v2] = state.parts();
        let (g1, g2) = (u1.grid(), u2.grid());
        if (g1.hi - self.xi).abs() > 1e-12 || g1.lo != 0.0 || g2.hi != 1.0 {
            return Err(Error::State(format!(
                "state split at {} but kernels at {}",
                g1.hi, self.xi
            )));
        }
        if g1.n != self.ops[0].n || g2.n != self.ops[1].n {
            return Err(Error::State(format!(
                "state grids ({}, {}) differ from transform grids ({}, {})",
                g1.n,
                g2.n,
                self.ops[0].n,
                self.ops[1].n
            )));
        }
        check_dirichlet(state, DIRICHLET_TOL)?;
        let (w1, z1) = self.ops[0].apply(u1.values(), v1.values(), self.exec);
        let rev = |f: &ScalarField| f.values().iter().rev().copied().collect::<Vec<_>>();
        let (mut w2, mut z2) = self.ops[1].apply(&rev(u2), &rev(v2), self.exec);
        w2.reverse();
        z2.reverse();
        Ok(T::from_parts(
            state.time(),
            [
                ScalarField::new(*g1, w1)?,
                ScalarField::new(*g1, z1)?,
                ScalarField::new(*g2, w2)?,
                ScalarField::new(*g2, z2)?,
            ],
        ))
    }

    pub fn forward(&self, state: &PlantState) -> Result<TargetState> {
        self.map(state)
    }

    pub fn backward(&self, state: &TargetState) -> Result<PlantState> {
        self.map(state)
    }
}

/// `Π(state)` on the state's own grids.
pub fn apply_pi(ks: &KernelSet, state: &PlantState) -> Result<TargetState> {
    Transform::new(ks, state.u1.grid().n, state.u2.grid().n)?.forward(state)
}

/// `Π⁻¹(state)`, with `inv_ks` from [`crate::kernels::solve_inverse_kernels`].
pub fn apply_pi_inverse(inv_ks: &KernelSet, tstate: &TargetState) -> Result<PlantState> {
    Transform::new(inv_ks, tstate.w1.grid().n, tstate.w2.grid().n)?.backward(tstate)
}

/// Plant data whose transformed displacement `w` reproduces `target.w`
/// to round-off: velocities come from `Π⁻¹(target)`, displacements from an
/// exact solve of the `w` equation. Used to build initial data with
/// prescribed interface traces.
pub fn pullback(fwd: &Transform, inv: &Transform, target: &TargetState) -> Result<PlantState> {
    let mut x: PlantState = inv.backward(target)?;
    let u1 = fwd.ops[0].solve_displacement(target.w1.values(), x.v1.values())?;
    let rev = |f: &[f64]| f.iter().rev().copied().collect::<Vec<_>>();
    let mut u2 = fwd.ops[1].solve_displacement(&rev(target.w2.values()), &rev(x.v2.values()))?;
    u2.reverse();
    x.u1 = ScalarField::new(*x.u1.grid(), u1)?;
    x.u2 = ScalarField::new(*x.u2.grid(), u2)?;
    Ok(x)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Compatibility {
    /// `|w₁(ξ) − w₂(ξ)|`
    pub c0_jump: f64,
    /// `|w₁′(ξ) − w₂′(ξ)|`
    pub c1_jump: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Five-point one-sided first derivative at the last node of `f`.
fn end_slope(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / (12.0 * h)
}

/// Interface mismatch of the transformed initial data (value and slope).
pub fn interface_jumps(t: &TargetState) -> (f64, f64) {
    let (w1, w2) = (t.w1.values(), t.w2.values());
    let c0 = w1[w1.len() - 1] - w2[0];
    let rev: Vec<f64> = w2.iter().rev().copied().collect();
    let c1 = end_slope(w1, t.w1.grid().dx()) + end_slope(&rev, t.w2.grid().dx());
    (c0, c1)
}

/// Check that `Π(init)` is continuous with continuous slope at ξ, within
/// `rel_tol · ‖init‖`.
pub fn check_compatibility_with(ks: &KernelSet, init: &PlantState, rel_tol: f64) -> Result<Compatibility> {
    if init.u1.grid().n < 5 || init.u2.grid().n < 5 {
        return Err(Error::State("compatibility needs at least 5 nodes per side".into()));
    }
    let t = apply_pi(ks, init)?;
    let (c0, c1) = interface_jumps(&t);
    let tol = rel_tol * state_norm(init);
    Ok(Compatibility {
        c0_jump: c0.abs(),
        c1_jump: c1.abs(),
        tol,
        pass: c0.abs() <= tol && c1.abs() <= tol,
    })
}

pub fn check_compatibility(ks: &KernelSet, init: &PlantState) -> Result<Compatibility> {
    check_compatibility_with(ks, init, COMPAT_REL_TOL)
}

/// Value, slope and velocity mismatches of `Π(x)` at ξ.
fn interface_defects(fwd: &Transform, x: &PlantState) -> Result<[f64; 3]> {
    let t: TargetState = fwd.forward(x)?;
    let (c0, c1) = interface_jumps(&t);
    Ok([c0, c1, t.z1.values()[t.z1.values().len() - 1] - t.z2.values()[0]])
}

/// Continuous plant data whose image is continuous in `w`, `w′` and `z` at ξ:
/// `x` plus the minimum-norm combination of four fixed continuous
/// corrections (a tent and `sin 2πx`, in `u` and in `v`) that cancels the
/// three mismatches. `x` itself should be continuous.
pub fn project_compatible(fwd: &Transform, x: &PlantState) -> Result<PlantState> {
    let xi = x.xi();
    let (n1, n2) = (x.u1.grid().n, x.u2.grid().n);
    let tent = move |y: f64| if y <= xi { y / xi } else { (1.0 - y) / (1.0 - xi) };
    let wave = |y: f64| (2.0 * std::f64::consts::PI * y).sin();
    let basis = [
        PlantState::from_fns(xi, n1, n2, tent, |_| 0.0)?,
        PlantState::from_fns(xi, n1, n2, wave, |_| 0.0)?,
        PlantState::from_fns(xi, n1, n2, |_| 0.0, tent)?,
        PlantState::from_fns(xi, n1, n2, |_| 0.0, wave)?,
    ];
    let rhs = interface_defects(fwd, x)?;
    let cols = basis
        .iter()
        .map(|b| interface_defects(fwd, b))
        .collect::<Result<Vec<_>>>()?;
    let mut gram = [[0.0; 3]; 3];
    for (r, row) in gram.iter_mut().enumerate() {
        for (c, g) in row.iter_mut().enumerate() {
            *g = cols.iter().map(|d| d[r] * d[c]).sum();
        }
    }
    let y = solve3(gram, rhs.map(|v| -v))
        .ok_or_else(|| Error::State("interface corrections cannot reach these mismatches".into()))?;
    let mut out = x.clone();
    for (d, b) in cols.iter().zip(&basis) {
        let c: f64 = (0..3).map(|r| d[r] * y[r]).sum();
        out = crate::state::combine(1.0, &out, c, b)?;
    }
    Ok(out)
}

/// Gaussian elimination with full pivoting. Directions with a negligible
/// pivot get a zero coefficient; `None` if the dropped equations are not
/// already satisfied.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let rhs_scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut perm = [0, 1, 2];
    let mut rank = 0;
    for col in 0..3 {
        let (mut pr, mut pc, mut best) = (col, col, 0.0);
        for r in col..3 {
            for c in col..3 {
                if a[r][c].abs() > best {
                    (pr, pc, best) = (r, c, a[r][c].abs());
                }
            }
        }
        if best <= 1e-10 * scale || best == 0.0 {
            break;
        }
        a.swap(col, pr);
        b.swap(col, pr);
        for row in a.iter_mut() {
            row.swap(col, pc);
        }
        perm.swap(col, pc);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
        rank += 1;
    }
    if b[rank..].iter().any(|v| v.abs() > 1e-8 * rhs_scale.max(scale) + 1e-14) {
        return None;
    }
    let mut y = [0.0; 3];
    for r in (0..rank).rev() {
        let s: f64 = (r + 1..rank).map(|c| a[r][c] * y[c]).sum();
        y[r] = (b[r] - s) / a[r][r];
    }
    let mut x = [0.0; 3];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = y[k];
    }
    Some(x)
}

/// Largest observed `‖Π s‖ / ‖s‖` over a set of states (zero states skipped).
pub fn observed_bound(t: &Transform, states: &[PlantState]) -> Result<f64> {
    let mut c = 0.0_f64;
    for s in states {
        let n = state_norm(s);
        if n > 0.0 {
            let img: TargetState = t.forward(s)?;
            c = c.max(state_norm(&img) / n);
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::difference;
    use crate::kernels::{solve_inverse_kernels, solve_kernels, KernelOptions};
    use crate::presets;
    use std::f64::consts::PI;

    fn kernels(p: &presets::Preset, n1: usize, n2: usize) -> (KernelSet, KernelSet) {
        let (spec, des) = p.build().unwrap();
        let opts = KernelOptions {
            n1,
            n2,
            ..Default::default()
        };
        let f = solve_kernels(&spec, &des, &opts).unwrap();
        let i = solve_inverse_kernels(&spec, &des, &f, &opts).unwrap();
        (f, i)
    }

    fn sample(xi: f64, n1: usize, n2: usize) -> PlantState {
        PlantState::from_fns(
            xi,
            n1,
            n2,
            |x| (PI * x).sin() + 0.3 * (2.0 * PI * x).sin(),
            |x| x * (1.0 - x) * (1.0 + x),
        )
        .unwrap()
    }

    #[test]
    fn zero_kernels_are_identity() {
        let (ks, _) = kernels(&presets::constant(0.4, 0.0, 0.0), 41, 61);
        let s = sample(0.4, 41, 61);
        let t = apply_pi(&ks, &s).unwrap();
        assert_eq!(t.w1, s.u1);
        assert_eq!(t.z2, s.v2);
    }

    #[test]
    fn zero_state_maps_to_zero() {
        let (ks, inv) = kernels(&presets::generic(), 41, 61);
        let z = PlantState::zeros(0.4, 41, 61).unwrap();
        assert_eq!(state_norm(&apply_pi(&ks, &z).unwrap()), 0.0);
        let tz = TargetState::from_fns(0.4, 41, 61, |_| 0.0, |_| 0.0).unwrap();
        assert_eq!(state_norm(&apply_pi_inverse(&inv, &tz).unwrap()), 0.0);
    }

    #[test]
    fn roundtrip_second_order() {
        let err = |n1: usize, n2: usize| {
            let (ks, inv) = kernels(&presets::generic(), n1, n2);
            let s = sample(0.4, n1, n2);
            let back = apply_pi_inverse(&inv, &apply_pi(&ks, &s).unwrap()).unwrap();
            state_norm(&difference(&back, &s).unwrap()) / state_norm(&s)
        };
        let (a, b) = (err(81, 121), err(161, 241));
        assert!(b < 1e-3, "roundtrip {b:e}");
        assert!(a / b > 3.0, "ratio {}", a / b);
    }

    #[test]
    fn dirichlet_violation_is_rejected() {
        let (ks, _) = kernels(&presets::generic(), 41, 61);
        let s = PlantState::from_fns(0.4, 41, 61, |x| 1.0 + x, |_| 0.0).unwrap();
        assert!(apply_pi(&ks, &s).is_err());
    }

    #[test]
    fn grid_mismatch_resamples() {
        let (ks, _) = kernels(&presets::generic(), 81, 121);
        let s = sample(0.4, 41, 61);
        let t = apply_pi(&ks, &s).unwrap();
        assert!(state_norm(&t).is_finite());
    }

    #[test]
    fn pullback_passes_and_injected_jump_is_reported() {
        let (n1, n2) = (161, 241);
        let (ks, inv) = kernels(&presets::generic(), n1, n2);
        let fwd = Transform::new(&ks, n1, n2).unwrap();
        let bwd = Transform::new(&inv, n1, n2).unwrap();
        let smooth = TargetState::from_fns(0.4, n1, n2, |x| (PI * x).sin(), |x| (2.0 * PI * x).sin()).unwrap();
        let init = pullback(&fwd, &bwd, &smooth).unwrap();
        let c = check_compatibility(&ks, &init).unwrap();
        assert!(c.pass, "{c:?}");

        let mut jumped = smooth.clone();
        let g2 = *jumped.w2.grid();
        let vals: Vec<f64> = g2
            .nodes()
            .iter()
            .zip(smooth.w2.values())
            .map(|(x, w)| w + 0.1 * (1.0 - x) / 0.6)
            .collect();
        jumped.w2 = ScalarField::new(g2, vals).unwrap();
        let init = pullback(&fwd, &bwd, &jumped).unwrap();
        let c = check_compatibility(&ks, &init).unwrap();
        assert!(!c.pass);
        assert!((c.c0_jump - 0.1).abs() < 1e-6, "{c:?}");
    }

    #[test]
    fn zero_data_is_compatible_with_exact_zero_jumps() {
        let (ks, _) = kernels(&presets::generic(), 41, 61);
        let c = check_compatibility(&ks, &PlantState::zeros(0.4, 41, 61).unwrap()).unwrap();
        assert!(c.pass);
        assert_eq!((c.c0_jump, c.c1_jump), (0.0, 0.0));
    }

    #[test]
    fn projection_removes_interface_defects() {
        let (ks, _) = kernels(&presets::generic(), 81, 121);
        let fwd = Transform::new(&ks, 81, 121).unwrap();
        let x = sample(0.4, 81, 121);
        let y = project_compatible(&fwd, &x).unwrap();
        let d = interface_defects(&fwd, &y).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-9), "{d:?}");
        let (u1, u2) = (y.u1.values(), y.u2.values());
        assert!((u1[u1.len() - 1] - u2[0]).abs() < 1e-12);
        assert!((y.v1.values()[80] - y.v2.values()[0]).abs() < 1e-12);
    }

    #[test]
    fn solve3_matches_known_solution() {
        let a = [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]];
        let x = solve3(a, [7.0, 3.0, 6.0]).unwrap();
        for (got, want) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(solve3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]], [1.0; 3]).is_none());
        // consistent but rank deficient: the free direction gets zero
        let x = solve3([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 2.0]], [1.0, 0.0, 4.0]).unwrap();
        assert_eq!(x, [1.0, 0.0, 2.0]);
        assert_eq!(solve3([[0.0; 3]; 3], [0.0; 3]).unwrap(), [0.0; 3]);
    }
}
