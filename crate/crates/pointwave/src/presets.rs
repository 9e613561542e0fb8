//! Reference configurations used by tests, benches and the CLI examples.

use crate::error::Result;
use crate::problem::{DesignCoefficients, PlantCoefficients, PlantSpec, TargetDesign};
use crate::profile::Coefficient;

#[derive(Debug, Clone)]
pub struct Preset {
    pub xi: f64,
    pub plant: PlantCoefficients,
    pub design: DesignCoefficients,
    pub omega: f64,
}

impl Preset {
    pub fn build(&self) -> Result<(PlantSpec, TargetDesign)> {
        Ok((
            PlantSpec::new(self.xi, &self.plant)?,
            TargetDesign::new(self.xi, &self.design, self.omega)?,
        ))
    }
}

fn c(v: f64) -> Coefficient {
    Coefficient::Const(v)
}

/// `λ = 0.5 + 0.2x`, `β = 0.3`, `d = 1`, `c = 1`, ξ = 0.4.
pub fn generic() -> Preset {
    Preset {
        xi: 0.4,
        plant: PlantCoefficients {
            lambda1: Coefficient::Poly(vec![0.5, 0.2]),
            lambda2: Coefficient::Poly(vec![0.5, 0.2]),
            beta1: c(0.3),
            beta2: c(0.3),
            ..Default::default()
        },
        design: DesignCoefficients {
            d1: c(1.0),
            d2: c(1.0),
            c1: c(1.0),
            c2: c(1.0),
        },
        omega: 1.0,
    }
}

/// No damping on either side; `β + c = mu`. The kernels are Bessel series.
pub fn undamped(xi: f64, mu: f64) -> Preset {
    Preset {
        xi,
        plant: PlantCoefficients {
            beta1: c(0.5 * mu),
            beta2: c(0.5 * mu),
            ..Default::default()
        },
        design: DesignCoefficients {
            d1: c(0.0),
            d2: c(0.0),
            c1: c(0.5 * mu),
            c2: c(0.5 * mu),
        },
        omega: 1.0,
    }
}

/// Mirror-symmetric about ξ = 0.5: `λ₁(x) = λ₂(1−x)` and so on.
pub fn symmetric() -> Preset {
    Preset {
        xi: 0.5,
        plant: PlantCoefficients {
            lambda1: Coefficient::Poly(vec![0.4, 0.4]),
            lambda2: Coefficient::Poly(vec![0.8, -0.4]),
            beta1: c(0.5),
            beta2: c(0.5),
            ..Default::default()
        },
        design: DesignCoefficients {
            d1: c(1.0),
            d2: c(1.0),
            c1: c(1.0),
            c2: c(1.0),
        },
        omega: 1.0,
    }
}

/// Constant anti-damping `λ`, target damping `d`, no stiffness terms.
pub fn constant(xi: f64, lambda: f64, d: f64) -> Preset {
    Preset {
        xi,
        plant: PlantCoefficients {
            lambda1: c(lambda),
            lambda2: c(lambda),
            ..Default::default()
        },
        design: DesignCoefficients {
            d1: c(d),
            d2: c(d),
            c1: c(0.0),
            c2: c(0.0),
        },
        omega: 1.0,
    }
}

/// Closed-loop scenario: `λ = 0.5`, `β = 0`, ξ = 0.4, target `d = c = 1`.
pub fn closed_loop() -> Preset {
    let mut p = constant(0.4, 0.5, 1.0);
    p.design.c1 = c(1.0);
    p.design.c2 = c(1.0);
    p
}
