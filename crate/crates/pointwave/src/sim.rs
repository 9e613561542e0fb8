//! Finite-difference time stepping of the plant and target systems.
//!
//! Leapfrog in time with the damping term centered, `u̇ ≈ (uⁿ⁺¹ − uⁿ⁻¹)/2Δt`,
//! so each node update is a scalar division. At the actuator node the two
//! one-sided ghost values are eliminated with continuity and the slope jump
//! `u₁′ − u₂′ = J`, which leaves the usual three-point stencil plus `J/Δx`.
//! The `u̇(ξ)` part of the feedback is folded into the implicit damping at
//! that node; the remaining velocity terms use a second-order backward
//! difference.

use std::io::Write;

use serde::Serialize;

use crate::control::{feedback_from_slices, GainSet};
use crate::error::{Error, Result};
use crate::field::{Grid1D, ScalarField};
use crate::problem::{PlantSpec, TargetDesign};
use crate::state::{piece_norm_sq, PlantState, SplitState, TargetState};
use crate::transform::Transform;

pub use crate::state::state_norm;

pub const DEFAULT_CFL: f64 = 0.9;
pub const DEFAULT_WINDOW: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Nodes on [0,1].
    pub n: usize,
    pub cfl: f64,
    pub t_final: f64,
    /// Record norms every this many steps.
    pub sample_every: usize,
    /// Keep a full state every this many steps (0 keeps none).
    pub snapshot_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 401,
            cfl: DEFAULT_CFL,
            t_final: 8.0,
            sample_every: 1,
            snapshot_every: 0,
        }
    }
}

impl SimConfig {
    pub fn dx(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    /// Index of the node nearest to `xi`.
    pub fn interface_index(&self, xi: f64) -> usize {
        (xi / self.dx()).round() as usize
    }

    /// ξ moved to the nearest grid node.
    pub fn snap_xi(&self, xi: f64) -> f64 {
        self.interface_index(xi) as f64 * self.dx()
    }

    fn validate(&self, xi: f64) -> Result<()> {
        if self.n < 11 {
            return Err(Error::Simulation(format!("need at least 11 nodes, got {}", self.n)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Simulation(format!("cfl must lie in (0,1], got {}", self.cfl)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Simulation(format!("final time must be positive, got {}", self.t_final)));
        }
        if self.sample_every == 0 {
            return Err(Error::Simulation("sample_every must be at least 1".into()));
        }
        crate::problem::check_xi_against_spacing(self.snap_xi(xi), self.dx())
    }
}

/// Full state at one instant on the global grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub energies: Vec<f64>,
    /// Applied control (zero for open loop and target runs).
    pub controls: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub snap_xi: f64,
    pub interface_index: usize,
    pub dt: f64,
    pub steps: usize,
}

impl Trajectory {
    fn grids(&self) -> Result<(Grid1D, Grid1D)> {
        let n = self.snapshots.first().map(|s| s.u.len()).unwrap_or(0);
        let i = self.interface_index;
        Ok((Grid1D::new(0.0, self.snap_xi, i + 1)?, Grid1D::new(self.snap_xi, 1.0, n - i)?))
    }

    /// Snapshot `k` split at the interface.
    pub fn state<S: SplitState>(&self, k: usize) -> Result<S> {
        let s = self
            .snapshots
            .get(k)
            .ok_or_else(|| Error::Simulation(format!("no snapshot {k}")))?;
        let (g1, g2) = self.grids()?;
        let i = self.interface_index;
        Ok(S::from_parts(
            s.t,
            [
                ScalarField::new(g1, s.u[..=i].to_vec())?,
                ScalarField::new(g1, s.v[..=i].to_vec())?,
                ScalarField::new(g2, s.u[i..].to_vec())?,
                ScalarField::new(g2, s.v[i..].to_vec())?,
            ],
        ))
    }

    pub fn peak_ratio(&self) -> f64 {
        let n0 = self.norms.first().copied().unwrap_or(0.0);
        if n0 == 0.0 {
            return 0.0;
        }
        self.norms.iter().fold(0.0_f64, |m, &v| m.max(v)) / n0
    }

    /// Columns `t,norm,energy,U`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,norm,energy,U")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{},{},{},{}",
                self.times[i], self.norms[i], self.energies[i], self.controls[i]
            )?;
        }
        Ok(())
    }

    /// Columns `t,x,u,v,sub`; the interface node appears under both subs.
    pub fn write_snapshots_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,x,u,v,sub")?;
        let i = self.interface_index;
        for s in &self.snapshots {
            let n = s.u.len();
            let dx = 1.0 / (n - 1) as f64;
            for j in 0..n {
                let x = if j + 1 == n { 1.0 } else { j as f64 * dx };
                if j <= i {
                    writeln!(out, "{},{x},{},{},1", s.t, s.u[j], s.v[j])?;
                }
                if j >= i {
                    writeln!(out, "{},{x},{},{},2", s.t, s.u[j], s.v[j])?;
                }
            }
        }
        Ok(())
    }
}

/// Node coefficients of `ü = u″ + μ u̇ + b u` plus the interface data.
struct Scheme {
    n: usize,
    dx: f64,
    dt: f64,
    iface: usize,
    mu: Vec<f64>,
    b: Vec<f64>,
    kappa: f64,
    gains: Option<GainSet>,
    g1: Grid1D,
    g2: Grid1D,
}

fn node_x(i: usize, n: usize, dx: f64) -> f64 {
    if i + 1 == n {
        1.0
    } else {
        i as f64 * dx
    }
}

/// Sample a split state at the simulation nodes.
fn sample_split<S: SplitState>(state: &S, n: usize, iface: usize) -> (Vec<f64>, Vec<f64>) {
    let [u1, v1, u2, v2] = state.parts();
    let dx = 1.0 / (n - 1) as f64;
    let xi = u1.grid().hi;
    let pick = |f1: &ScalarField, f2: &ScalarField| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let x = node_x(i, n, dx);
                if f1.grid().n == iface + 1 && f2.grid().n == n - iface && (xi - iface as f64 * dx).abs() < 1e-12 {
                    // grids already coincide with the simulation grid
                    if i <= iface {
                        f1.values()[i]
                    } else {
                        f2.values()[i - iface]
                    }
                } else if x <= xi {
                    f1.eval_unchecked(x)
                } else {
                    f2.eval_unchecked(x)
                }
            })
            .collect()
    };
    let mut u = pick(u1, u2);
    u[0] = 0.0;
    u[n - 1] = 0.0;
    (u, pick(v1, v2))
}

impl Scheme {
    fn time_step(cfg: &SimConfig, mu_max: f64) -> (f64, usize) {
        let mut dt = cfg.cfl * cfg.dx();
        if mu_max > 0.0 {
            dt = dt.min(0.5 / (0.5 * mu_max));
        }
        let steps = (cfg.t_final / dt).ceil().max(1.0) as usize;
        (cfg.t_final / steps as f64, steps)
    }

    fn energy(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut grad = 0.0;
        for i in 0..self.n - 1 {
            let d = (u[i + 1] - u[i]) / self.dx;
            grad += d * d * self.dx;
        }
        let mut kin = 0.0;
        for i in 0..self.n {
            let w = if i == 0 || i + 1 == self.n { 0.5 } else { 1.0 };
            kin += w * v[i] * v[i] * self.dx;
        }
        0.5 * (grad + kin)
    }

    fn norm(&self, u: &[f64], v: &[f64]) -> f64 {
        let i = self.iface;
        (piece_norm_sq(&u[..=i], &v[..=i], self.g1.dx()) + piece_norm_sq(&u[i..], &v[i..], self.g2.dx())).sqrt()
    }

    fn control(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        match &self.gains {
            None => Ok(0.0),
            Some(g) => {
                let i = self.iface;
                feedback_from_slices(g, &u[..=i], &v[..=i], &u[i..], &v[i..], &self.g1, &self.g2)
            }
        }
    }

    /// Coefficient of `u̇(ξ)` in the control, including the quadrature
    /// weights of the velocity integrals at the interface node.
    fn implicit_velocity_gain(&self) -> f64 {
        match &self.gains {
            None => 0.0,
            Some(g) => {
                let h = 0.5 * self.dx;
                g.c_v + h * (g.gs1.values()[self.iface] + g.gs2.values()[0])
            }
        }
    }

    /// `u″ + b u` plus the interface jump term, without damping.
    fn rhs(&self, u: &[f64], i: usize, explicit_control: f64) -> f64 {
        let lap = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (self.dx * self.dx);
        let mut r = lap + self.b[i] * u[i];
        if i == self.iface {
            r += (self.kappa * u[i] + explicit_control) / self.dx;
        }
        r
    }

    fn run(&self, mut u: Vec<f64>, v0: Vec<f64>, cfg: &SimConfig, steps: usize) -> Result<Trajectory> {
        let (n, dt, iface) = (self.n, self.dt, self.iface);
        let cv = self.implicit_velocity_gain();
        let mu_i = self.mu[iface] + cv / self.dx;
        if 1.0 - 0.5 * mu_i * dt <= 1e-8 {
            return Err(Error::Simulation(format!(
                "interface velocity gain {cv} too large for dt = {dt}"
            )));
        }
        let explicit_part = |u: &[f64], v: &[f64]| -> Result<f64> { Ok(self.control(u, v)? - cv * v[iface]) };

        // Taylor start: u¹ = u⁰ + Δt v⁰ + ½Δt² ü⁰
        let ctrl0 = explicit_part(&u, &v0)?;
        let mut next = vec![0.0; n];
        for i in 1..n - 1 {
            let mu = if i == iface { mu_i } else { self.mu[i] };
            let acc = self.rhs(&u, i, ctrl0) + mu * v0[i];
            next[i] = u[i] + dt * v0[i] + 0.5 * dt * dt * acc;
        }

        let mut traj = Trajectory {
            times: Vec::new(),
            norms: Vec::new(),
            energies: Vec::new(),
            controls: Vec::new(),
            snapshots: Vec::new(),
            snap_xi: iface as f64 * self.dx,
            interface_index: iface,
            dt,
            steps,
        };
        let record = |k: usize, u: &[f64], v: &[f64], traj: &mut Trajectory| -> Result<()> {
            let t = k as f64 * dt;
            if k.is_multiple_of(cfg.sample_every) || k == steps {
                traj.times.push(t);
                traj.norms.push(self.norm(u, v));
                traj.energies.push(self.energy(u, v));
                traj.controls.push(self.control(u, v)?);
            }
            if cfg.snapshot_every > 0 && (k.is_multiple_of(cfg.snapshot_every) || k == steps) {
                traj.snapshots.push(Snapshot {
                    t,
                    u: u.to_vec(),
                    v: v.to_vec(),
                });
            }
            Ok(())
        };
        record(0, &u, &v0, &mut traj)?;

        // prev = uⁿ⁻¹, u = uⁿ, next = uⁿ⁺¹
        let mut prev = std::mem::replace(&mut u, next);
        let mut prev2: Vec<f64> = Vec::new();
        let mut vel = vec![0.0; n];
        let mut new = vec![0.0; n];
        for k in 1..=steps {
            // velocity estimate at tᵏ for the explicit control terms
            if k == 1 {
                for i in 0..n {
                    vel[i] = 2.0 * (u[i] - prev[i]) / dt - v0[i];
                }
            } else {
                for i in 0..n {
                    vel[i] = (3.0 * u[i] - 4.0 * prev[i] + prev2[i]) / (2.0 * dt);
                }
            }
            let ctrl = if self.gains.is_some() { explicit_part(&u, &vel)? } else { 0.0 };
            for i in 1..n - 1 {
                let mu = if i == iface { mu_i } else { self.mu[i] };
                let half = 0.5 * mu * dt;
                new[i] = (2.0 * u[i] - (1.0 + half) * prev[i] + dt * dt * self.rhs(&u, i, ctrl)) / (1.0 - half);
            }
            new[0] = 0.0;
            new[n - 1] = 0.0;
            if new.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    stage: "simulation",
                    step: k,
                });
            }
            let centered: Vec<f64> = (0..n).map(|i| (new[i] - prev[i]) / (2.0 * dt)).collect();
            record(k, &u, &centered, &mut traj)?;
            prev2 = std::mem::replace(&mut prev, std::mem::replace(&mut u, new.clone()));
        }
        Ok(traj)
    }
}

fn build_grids(cfg: &SimConfig, xi: f64) -> Result<(usize, Grid1D, Grid1D)> {
    cfg.validate(xi)?;
    let iface = cfg.interface_index(xi);
    let xs = cfg.snap_xi(xi);
    Ok((iface, Grid1D::new(0.0, xs, iface + 1)?, Grid1D::new(xs, 1.0, cfg.n - iface)?))
}

/// Plant run; `gains = None` is the open loop.
pub fn simulate_plant(
    spec: &PlantSpec,
    gains: Option<&GainSet>,
    init: &PlantState,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    if spec.has_alpha() {
        return Err(Error::Simulation(
            "first-order terms present; simulate the rescaled plant".into(),
        ));
    }
    let (iface, g1, g2) = build_grids(cfg, spec.xi)?;
    let (n, dx) = (cfg.n, cfg.dx());
    let coef = |i: usize, p1: &crate::profile::Profile, p2: &crate::profile::Profile| {
        let x = node_x(i, n, dx);
        match i.cmp(&iface) {
            std::cmp::Ordering::Less => p1.at(x),
            std::cmp::Ordering::Greater => p2.at(x),
            std::cmp::Ordering::Equal => 0.5 * (p1.at(spec.xi) + p2.at(spec.xi)),
        }
    };
    let mu: Vec<f64> = (0..n).map(|i| 2.0 * coef(i, &spec.lambda1, &spec.lambda2)).collect();
    let b: Vec<f64> = (0..n).map(|i| coef(i, &spec.beta1, &spec.beta2)).collect();
    let gains = match gains {
        None => None,
        Some(g) => {
            if (g.xi - g1.hi).abs() > 1e-9 {
                return Err(Error::Simulation(format!(
                    "gains computed for xi = {} but the grid puts the actuator at {}",
                    g.xi, g1.hi
                )));
            }
            Some(g.resampled(g1, g2)?)
        }
    };
    let mu_max = mu.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let (dt, steps) = Scheme::time_step(cfg, mu_max);
    let scheme = Scheme {
        n,
        dx,
        dt,
        iface,
        mu,
        b,
        kappa: spec.interface_correction,
        gains,
        g1,
        g2,
    };
    let (u, v) = sample_split(init, n, iface);
    scheme.run(u, v, cfg, steps)
}

/// Target run: `ẅ = w″ − 2d ẇ − c w`, no interface jump.
pub fn simulate_target(design: &TargetDesign, xi: f64, init: &TargetState, cfg: &SimConfig) -> Result<Trajectory> {
    let (iface, g1, g2) = build_grids(cfg, xi)?;
    let (n, dx) = (cfg.n, cfg.dx());
    let coef = |i: usize, p1: &crate::profile::Profile, p2: &crate::profile::Profile| {
        let x = node_x(i, n, dx);
        match i.cmp(&iface) {
            std::cmp::Ordering::Less => p1.at(x),
            std::cmp::Ordering::Greater => p2.at(x),
            std::cmp::Ordering::Equal => 0.5 * (p1.at(xi) + p2.at(xi)),
        }
    };
    let mu: Vec<f64> = (0..n).map(|i| -2.0 * coef(i, &design.d1, &design.d2)).collect();
    let b: Vec<f64> = (0..n).map(|i| -coef(i, &design.c1, &design.c2)).collect();
    let mu_max = mu.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let (dt, steps) = Scheme::time_step(cfg, mu_max);
    let scheme = Scheme {
        n,
        dx,
        dt,
        iface,
        mu,
        b,
        kappa: 0.0,
        gains: None,
        g1,
        g2,
    };
    let (u, v) = sample_split(init, n, iface);
    scheme.run(u, v, cfg, steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Fitted exponential decay rate; negative means growth.
    pub rate: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Least-squares fit of `ln(norm)` against `t` over the trailing
/// `window_frac` of the samples.
pub fn fit_decay_series(times: &[f64], norms: &[f64], window_frac: f64) -> Result<DecayFit> {
    if !(window_frac > 0.0 && window_frac <= 1.0) {
        return Err(Error::Simulation(format!("window fraction must lie in (0,1], got {window_frac}")));
    }
    if times.len() != norms.len() || times.is_empty() {
        return Err(Error::Simulation("times and norms must be non-empty and equally long".into()));
    }
    let t_end = *times.last().expect("non-empty");
    let t_lo = t_end - window_frac * (t_end - times[0]);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= t_lo - 1e-12)
        .map(|(&t, &n)| (t, n))
        .collect();
    if pts.len() < 10 {
        return Err(Error::Simulation(format!("only {} samples in the fit window", pts.len())));
    }
    if let Some((t, n)) = pts.iter().find(|(_, n)| !(*n > 0.0)) {
        return Err(Error::Simulation(format!("non-positive norm {n} at t = {t}")));
    }
    let m = pts.len() as f64;
    let (mt, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, n)| (a + t / m, b + n.ln() / m));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (t, n) in &pts {
        let (dt, dy) = (t - mt, n.ln() - my);
        sxx += dt * dt;
        sxy += dt * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let ss_res: f64 = pts
        .iter()
        .map(|(t, n)| {
            let e = n.ln() - (my + slope * (t - mt));
            e * e
        })
        .sum();
    let r2 = if syy <= f64::EPSILON * m { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(DecayFit {
        rate: -slope,
        r_squared: r2,
        window: (pts[0].0, t_end),
    })
}

pub fn fit_decay(traj: &Trajectory, window_frac: f64) -> Result<DecayFit> {
    fit_decay_series(&traj.times, &traj.norms, window_frac)
}

/// `sup_k ‖Π(plant_k) − target_k‖` over matching snapshots.
pub fn commutation_error(fwd: &Transform, plant: &Trajectory, target: &Trajectory) -> Result<f64> {
    if plant.snapshots.len() != target.snapshots.len() || plant.snapshots.is_empty() {
        return Err(Error::Simulation("trajectories need matching, non-empty snapshot sets".into()));
    }
    let mut worst = 0.0_f64;
    for k in 0..plant.snapshots.len() {
        let p: PlantState = plant.state(k)?;
        let t: TargetState = target.state(k)?;
        let img = fwd.forward(&p)?;
        let d = crate::state::difference(&img, &t)?;
        worst = worst.max(state_norm(&d));
    }
    Ok(worst)
}
