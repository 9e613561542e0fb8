//! Backstepping kernels: closed-form diagonal data, the characteristic
//! Goursat solver, residual and bound diagnostics, feedback gain traces and
//! the kernels of the inverse transformation.

pub mod closed;
pub mod export;
pub mod gains;
pub mod goursat;
pub mod residual;
pub mod triangle;

pub use closed::{closed_forms, diagonal_data, ClosedFormData, DiagonalData};
pub use gains::gain_trace;
pub use goursat::{
    check_iteration_bound, solve_goursat, BoundCheck, GoursatOptions, GoursatSolution,
    IterationBound,
};
pub use residual::{kernel_residual, ResidualReport};
pub use triangle::TriangleField;

use crate::error::{Error, Result};
use crate::problem::{to_left_form, PlantSpec, Side, SubdomainProblem, TargetDesign};

pub const DEFAULT_KERNEL_NODES: usize = 201;

/// Kernels of one subdomain, in left-form coordinates (anchored edge at 0).
#[derive(Debug, Clone)]
pub struct SubKernels {
    pub problem: SubdomainProblem,
    pub closed: ClosedFormData,
    pub diag: DiagonalData,
    pub solution: GoursatSolution,
}

impl SubKernels {
    pub fn n(&self) -> usize {
        self.solution.k.n()
    }

    pub fn length(&self) -> f64 {
        self.problem.length
    }

    pub fn k(&self) -> &TriangleField {
        &self.solution.k
    }

    pub fn s(&self) -> &TriangleField {
        &self.solution.s
    }

    /// `h` at kernel node `i` (the closed forms live on the half grid).
    pub fn h_at(&self, i: usize) -> f64 {
        self.closed.h.values()[2 * i]
    }

    pub fn h_prime_at(&self, i: usize) -> f64 {
        self.closed.hprime.values()[2 * i]
    }

    pub fn h_end(&self) -> f64 {
        *self.closed.h.values().last().expect("non-empty")
    }

    pub fn h_prime_end(&self) -> f64 {
        *self.closed.hprime.values().last().expect("non-empty")
    }

    /// Largest deviation of the solved traces from their prescribed data:
    /// `(|k(x,x) − m|, |s(x,x) − mˢ|, |k(x,0)|, |s(x,0)|)`.
    pub fn trace_errors(&self) -> (f64, f64, f64, f64) {
        let n = self.n();
        let m = self.diag.m.values();
        let ms = self.closed.ms.values();
        let mut e = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        for i in 0..n {
            e.0 = e.0.max((self.k().get(i, i) - m[2 * i]).abs());
            e.1 = e.1.max((self.s().get(i, i) - ms[2 * i]).abs());
            e.2 = e.2.max(self.k().get(i, 0).abs());
            e.3 = e.3.max(self.s().get(i, 0).abs());
        }
        e
    }

    /// Largest relative defect of `h² − (h′/a)² = A` on the diagonal grid.
    pub fn hyperbolic_defect(&self) -> f64 {
        let a = self.closed.amplitude_a;
        self.closed
            .h
            .values()
            .iter()
            .zip(self.closed.h_over_a.values())
            .map(|(h, sh)| ((h * h - sh * sh) - a).abs() / (h * h).max(a.abs()))
            .fold(0.0, f64::max)
    }

    /// `(sup |k − k_Bessel|, sup |s|)` against the closed-form kernel of the
    /// undamped case `λ = d = 0`, `β + c = mu`.
    pub fn bessel_errors(&self, mu: f64) -> (f64, f64) {
        let (k, s) = (self.k(), self.s());
        let mut e = (0.0_f64, 0.0_f64);
        for i in 0..self.n() {
            for j in 0..=i {
                e.0 = e.0.max((k.get(i, j) - crate::oracle::bessel_kernel(mu, k.node(i), k.node(j))).abs());
                e.1 = e.1.max(s.get(i, j).abs());
            }
        }
        e
    }

    /// Gap between the solved `s_y(x,x)` and the closed-form `f`.
    pub fn f_consistency(&self) -> f64 {
        let f = self.diag.f.values();
        (0..self.n())
            .map(|i| (self.solution.s_y.get(i, i) - f[2 * i]).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct KernelSet {
    pub xi: f64,
    pub sub1: SubKernels,
    pub sub2: SubKernels,
}

impl KernelSet {
    pub fn sub(&self, side: Side) -> &SubKernels {
        match side {
            Side::Left => &self.sub1,
            Side::Right => &self.sub2,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KernelOptions {
    pub n1: usize,
    pub n2: usize,
    pub goursat: GoursatOptions,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            n1: DEFAULT_KERNEL_NODES,
            n2: DEFAULT_KERNEL_NODES,
            goursat: GoursatOptions::default(),
        }
    }
}

impl KernelOptions {
    /// Kernel grids whose nodes coincide with a uniform `sim_n`-node grid on
    /// [0,1]; ξ must sit on a node of that grid.
    pub fn aligned_with(sim_n: usize, xi: f64) -> Result<Self> {
        let dx = 1.0 / (sim_n - 1) as f64;
        let i = (xi / dx).round() as usize;
        if ((i as f64) * dx - xi).abs() > 1e-9 {
            return Err(Error::Problem(format!(
                "xi = {xi} is not a node of the {sim_n}-node grid"
            )));
        }
        Ok(Self {
            n1: i + 1,
            n2: sim_n - i,
            ..Default::default()
        })
    }
}

pub fn solve_subdomain(sub: SubdomainProblem, n: usize, opts: &GoursatOptions) -> Result<SubKernels> {
    let closed = closed_forms(&sub, n)?;
    let diag = diagonal_data(&closed, &sub)?;
    let solution = solve_goursat(&sub, &closed, &diag, n, opts)?;
    Ok(SubKernels {
        problem: sub,
        closed,
        diag,
        solution,
    })
}

fn solve_pair(
    xi: f64,
    sub1: SubdomainProblem,
    sub2: SubdomainProblem,
    opts: &KernelOptions,
) -> Result<KernelSet> {
    let sub1 = solve_subdomain(sub1, opts.n1, &opts.goursat)?;
    let sub2 = solve_subdomain(sub2, opts.n2, &opts.goursat)?;
    Ok(KernelSet { xi, sub1, sub2 })
}

/// Kernels of the forward transformation for an alpha-free plant.
pub fn solve_kernels(spec: &PlantSpec, design: &TargetDesign, opts: &KernelOptions) -> Result<KernelSet> {
    let s1 = to_left_form(spec, design, Side::Left)?;
    let s2 = to_left_form(spec, design, Side::Right)?;
    solve_pair(spec.xi, s1, s2, opts)
}

/// Swap plant and target roles: `λ ← −d`, `d ← −λ`, `β ← −c`, `c ← −β`.
/// Applying it twice returns the inputs unchanged.
pub fn inverse_kernel_spec(spec: &PlantSpec, design: &TargetDesign) -> (PlantSpec, TargetDesign) {
    let s = PlantSpec {
        xi: spec.xi,
        lambda1: design.d1.negated(),
        lambda2: design.d2.negated(),
        beta1: design.c1.negated(),
        beta2: design.c2.negated(),
        alpha1: spec.alpha1.clone(),
        alpha2: spec.alpha2.clone(),
        interface_correction: spec.interface_correction,
    };
    let d = TargetDesign {
        d1: spec.lambda1.negated(),
        d2: spec.lambda2.negated(),
        c1: spec.beta1.negated(),
        c2: spec.beta2.negated(),
        omega: design.omega,
    };
    (s, d)
}

/// Kernels of the inverse transformation. The right amplitude is the
/// reciprocal of the forward one so that the composition is the identity
/// on each subdomain.
pub fn solve_inverse_kernels(
    spec: &PlantSpec,
    design: &TargetDesign,
    forward: &KernelSet,
    opts: &KernelOptions,
) -> Result<KernelSet> {
    let (is, id) = inverse_kernel_spec(spec, design);
    let s1 = to_left_form(&is, &id, Side::Left)?;
    let mut s2 = to_left_form(&is, &id, Side::Right)?;
    s2.amplitude_a = 1.0 / forward.sub2.problem.amplitude_a;
    solve_pair(spec.xi, s1, s2, opts)
}
