//! Config-driven orchestration: ξ snapping, removal of first-order terms,
//! kernels, gains, transformations and initial data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{InitSpace, RunConfig};
use crate::control::GainSet;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::kernels::{gain_trace, solve_inverse_kernels, solve_kernels, KernelOptions, KernelSet};
use crate::problem::{check_xi_against_spacing, rescale_out_alpha, PlantSpec, Rescaled, TargetDesign};
use crate::sim::SimConfig;
use crate::state::{random_smooth_state, PlantState, TargetState};
use crate::transform::{project_compatible, pullback, Transform};

/// Sine modes in the random test states.
pub const RANDOM_MODES: usize = 6;

/// Initial data as configured, in the space they were given in.
#[derive(Debug, Clone)]
pub enum RawInit {
    Plant(PlantState),
    Target(TargetState),
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: RunConfig,
    pub n: usize,
    /// ξ moved to the nearest node of the `n`-node grid.
    pub xi: f64,
    /// Plant without first-order terms (the one the kernels are built for).
    pub spec: PlantSpec,
    pub design: TargetDesign,
    /// Present when the configured plant had `α ≠ 0`.
    pub rescaled: Option<Rescaled>,
}

pub fn snap_xi(xi: f64, n: usize) -> f64 {
    let h = 1.0 / (n - 1) as f64;
    (xi / h).round() * h
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let n = config.grid_n;
        let xi = snap_xi(config.xi, n);
        check_xi_against_spacing(xi, 1.0 / (n - 1) as f64).map_err(|e| Error::Config(e.to_string()))?;
        let (spec, design) = config.build_at(xi)?;
        let (spec, rescaled) = if spec.has_alpha() {
            let r = rescale_out_alpha(&spec)?;
            (r.spec.clone(), Some(r))
        } else {
            (spec, None)
        };
        Ok(Self {
            config,
            n,
            xi,
            spec,
            design,
            rescaled,
        })
    }

    pub fn kernel_options(&self) -> Result<KernelOptions> {
        KernelOptions::aligned_with(self.n, self.xi)
    }

    /// Node counts of the two subinterval grids.
    pub fn grids(&self) -> Result<(usize, usize)> {
        let o = self.kernel_options()?;
        Ok((o.n1, o.n2))
    }

    pub fn kernels(&self) -> Result<KernelSet> {
        solve_kernels(&self.spec, &self.design, &self.kernel_options()?)
    }

    pub fn inverse_kernels(&self, forward: &KernelSet) -> Result<KernelSet> {
        solve_inverse_kernels(&self.spec, &self.design, forward, &self.kernel_options()?)
    }

    pub fn gains(&self, ks: &KernelSet) -> Result<GainSet> {
        gain_trace(ks, &self.spec)
    }

    pub fn transforms(&self, forward: &KernelSet, inverse: &KernelSet) -> Result<(Transform, Transform)> {
        let (n1, n2) = self.grids()?;
        Ok((Transform::new(forward, n1, n2)?, Transform::new(inverse, n1, n2)?))
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            n: self.n,
            cfl: self.config.sim.cfl,
            t_final: self.config.sim.t_final,
            sample_every: 1,
            snapshot_every: 40,
        }
    }

    /// The configured data sampled on the subinterval grids, with the
    /// requested interface jump added on the right as a ramp vanishing at 1.
    /// Plant data are expressed in the variables of the alpha-free plant.
    pub fn raw_initial(&self) -> Result<RawInit> {
        let (n1, n2) = self.grids()?;
        let init = &self.config.init;
        let (u, v) = (init.u.evaluator()?, init.v.evaluator()?);
        let mut p = PlantState::from_fns(self.xi, n1, n2, &u, &v)?;
        if init.jump != 0.0 {
            let (xi, j) = (self.xi, init.jump);
            let ramp = ScalarField::from_fn(*p.u2.grid(), |x| j * (1.0 - x) / (1.0 - xi));
            p.u2 = add(&p.u2, &ramp)?;
        }
        Ok(match init.space {
            InitSpace::Plant => RawInit::Plant(self.to_working(p)?),
            InitSpace::Target => RawInit::Target(TargetState {
                t: 0.0,
                w1: p.u1,
                z1: p.v1,
                w2: p.u2,
                z2: p.v2,
            }),
        })
    }

    /// Multiply plant data by the rescaling factors when `α ≠ 0`.
    fn to_working(&self, mut p: PlantState) -> Result<PlantState> {
        if let Some(r) = &self.rescaled {
            let scale = |f: &ScalarField, m: &ScalarField| -> Result<ScalarField> {
                let vals = f
                    .grid()
                    .nodes()
                    .iter()
                    .zip(f.values())
                    .map(|(&x, &y)| Ok(y * m.eval(x)?))
                    .collect::<Result<Vec<_>>>()?;
                ScalarField::new(*f.grid(), vals)
            };
            p.u1 = scale(&p.u1, &r.multiplier1)?;
            p.v1 = scale(&p.v1, &r.multiplier1)?;
            p.u2 = scale(&p.u2, &r.multiplier2)?;
            p.v2 = scale(&p.v2, &r.multiplier2)?;
        }
        Ok(p)
    }

    /// Plant data whose compatibility is checked: the configured plant data,
    /// or the pullback of the configured target data.
    pub fn compatibility_data(&self, fwd: &Transform, inv: &Transform) -> Result<PlantState> {
        match self.raw_initial()? {
            RawInit::Plant(p) => Ok(p),
            RawInit::Target(t) => pullback(fwd, inv, &t),
        }
    }

    /// Continuous plant data for open-loop runs.
    pub fn plant_initial(&self, inv: Option<&Transform>) -> Result<PlantState> {
        match self.raw_initial()? {
            RawInit::Plant(p) => Ok(p),
            RawInit::Target(t) => {
                let inv = inv.ok_or_else(|| Error::Config("target-space data need the inverse transformation".into()))?;
                made_continuous(&inv.backward(&t)?)
            }
        }
    }

    /// Matched initial data for closed-loop and commutation runs: continuous
    /// plant data with `w`, `w′` and `z` continuous at ξ, and its image.
    pub fn matched_initial(&self, fwd: &Transform, inv: &Transform) -> Result<(PlantState, TargetState)> {
        let x = made_continuous(&self.plant_initial(Some(inv))?)?;
        let p = project_compatible(fwd, &x)?;
        let t = fwd.forward(&p)?;
        Ok((p, t))
    }

    /// Seeded random smooth states on the subinterval grids.
    pub fn random_states(&self, count: usize) -> Result<Vec<PlantState>> {
        let (n1, n2) = self.grids()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        (0..count)
            .map(|_| random_smooth_state(&mut rng, self.xi, n1, n2, RANDOM_MODES))
            .collect()
    }
}

fn add(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    ScalarField::new(*a.grid(), a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect())
}

/// Remove the interface jump by a ramp on the right subinterval.
fn made_continuous(p: &PlantState) -> Result<PlantState> {
    let xi = p.xi();
    let fix = |left: &ScalarField, right: &ScalarField| -> Result<ScalarField> {
        let j = left.values()[left.values().len() - 1] - right.values()[0];
        add(right, &ScalarField::from_fn(*right.grid(), |x| j * (1.0 - x) / (1.0 - xi)))
    };
    let mut out = p.clone();
    out.u2 = fix(&p.u1, &p.u2)?;
    out.v2 = fix(&p.v1, &p.v2)?;
    Ok(out)
}
