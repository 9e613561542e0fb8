//! JSON run configuration.
//!
//! ```json
//! {
//!   "xi": 0.4,
//!   "lambda1": {"const": 0.5}, "lambda2": {"poly": [0.5, 0.2]},
//!   "d1": {"const": 1.0}, "c1": {"samples": {"x": [0, 0.4], "v": [1, 1]}},
//!   "omega": 1.0,
//!   "grid_n": 401,
//!   "sim": {"t_final": 8.0, "cfl": 0.9, "window": 0.5},
//!   "init": {"space": "target", "u": {"sine": {"mode": 1, "amp": 1.0}}, "v": "zero"},
//!   "seed": 7
//! }
//! ```
//!
//! Omitted coefficients are zero. `init.space` says whether `u`/`v` are
//! plant data or target data `(w, z)`; `init.jump` adds a ramp of that
//! height on the right subinterval so the data are discontinuous at ξ.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{DesignCoefficients, PlantCoefficients, PlantSpec, TargetDesign};
use crate::profile::{Coefficient, Profile, SampleTable};

pub const DEFAULT_GRID_N: usize = 401;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub xi: f64,
    #[serde(default)]
    pub lambda1: Coefficient,
    #[serde(default)]
    pub lambda2: Coefficient,
    #[serde(default)]
    pub beta1: Coefficient,
    #[serde(default)]
    pub beta2: Coefficient,
    #[serde(default)]
    pub alpha1: Coefficient,
    #[serde(default)]
    pub alpha2: Coefficient,
    #[serde(default)]
    pub d1: Coefficient,
    #[serde(default)]
    pub d2: Coefficient,
    #[serde(default)]
    pub c1: Coefficient,
    #[serde(default)]
    pub c2: Coefficient,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default)]
    pub sim: SimSettings,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub seed: u64,
    /// Roundtrip tolerance used by `verify`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Number of random states in the roundtrip and boundedness checks.
    #[serde(default = "default_random_states")]
    pub random_states: usize,
}

fn default_omega() -> f64 {
    1.0
}
fn default_grid_n() -> usize {
    DEFAULT_GRID_N
}
fn default_tol() -> f64 {
    1e-3
}
fn default_random_states() -> usize {
    5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub t_final: f64,
    pub cfl: f64,
    /// Trailing fraction of the run used by the decay fit.
    pub window: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            t_final: 8.0,
            cfl: 0.9,
            window: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitSpace {
    Plant,
    Target,
}

/// A function on [0,1] used as initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitProfile {
    Zero,
    Sine { mode: u32, amp: f64 },
    Poly(Vec<f64>),
    Samples(SampleTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub space: InitSpace,
    pub u: InitProfile,
    pub v: InitProfile,
    #[serde(default)]
    pub jump: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            space: InitSpace::Target,
            u: InitProfile::Sine { mode: 1, amp: 1.0 },
            v: InitProfile::Sine { mode: 1, amp: -1.0 },
            jump: 0.0,
        }
    }
}

impl InitProfile {
    /// Evaluator on [0,1]; tabulated forms are interpolated.
    pub fn evaluator(&self) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        Ok(match self {
            InitProfile::Zero => Box::new(|_| 0.0),
            InitProfile::Sine { mode, amp } => {
                let (m, a) = (*mode as f64, *amp);
                Box::new(move |x| a * (m * std::f64::consts::PI * x).sin())
            }
            InitProfile::Poly(c) => {
                let p = Profile::from_coefficient(&Coefficient::Poly(c.clone()), 0.0, 1.0, 2049)?;
                Box::new(move |x| p.at(x))
            }
            InitProfile::Samples(t) => {
                let p = Profile::from_coefficient(&Coefficient::Samples(t.clone()), 0.0, 1.0, 2049)?;
                Box::new(move |x| p.at(x))
            }
        })
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(Error::Config(format!("xi must lie in (0,1), got {}", self.xi)));
        }
        if self.grid_n < 21 {
            return Err(Error::Config(format!("grid_n must be at least 21, got {}", self.grid_n)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Config(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        let s = &self.sim;
        if !(s.t_final > 0.0 && s.cfl > 0.0 && s.cfl <= 1.0 && s.window > 0.0 && s.window <= 1.0) {
            return Err(Error::Config(format!("bad sim settings {s:?}")));
        }
        if !self.init.jump.is_finite() {
            return Err(Error::Config("init.jump must be finite".into()));
        }
        Ok(())
    }

    pub fn plant_coefficients(&self) -> PlantCoefficients {
        PlantCoefficients {
            lambda1: self.lambda1.clone(),
            lambda2: self.lambda2.clone(),
            beta1: self.beta1.clone(),
            beta2: self.beta2.clone(),
            alpha1: self.alpha1.clone(),
            alpha2: self.alpha2.clone(),
        }
    }

    pub fn design_coefficients(&self) -> DesignCoefficients {
        DesignCoefficients {
            d1: self.d1.clone(),
            d2: self.d2.clone(),
            c1: self.c1.clone(),
            c2: self.c2.clone(),
        }
    }

    /// Plant and design with the interface at `xi` (normally the snapped ξ).
    pub fn build_at(&self, xi: f64) -> Result<(PlantSpec, TargetDesign)> {
        let wrap = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        let spec = PlantSpec::new(xi, &self.plant_coefficients()).map_err(wrap)?;
        let design = TargetDesign::new(xi, &self.design_coefficients(), self.omega).map_err(wrap)?;
        Ok((spec, design))
    }

    /// All-zero coefficients: the kernels vanish and `h ≡ 1`.
    pub fn is_trivial(&self) -> bool {
        [
            &self.lambda1, &self.lambda2, &self.beta1, &self.beta2, &self.alpha1, &self.alpha2, &self.d1, &self.d2, &self.c1,
            &self.c2,
        ]
        .iter()
        .all(|c| matches!(c, Coefficient::Const(v) if *v == 0.0))
    }

    /// `μ = β + c` when the configuration is the undamped constant case whose
    /// kernels are known in closed form.
    pub fn bessel_parameter(&self) -> Option<f64> {
        let val = |c: &Coefficient| match c {
            Coefficient::Const(v) => Some(*v),
            _ => None,
        };
        let zeros = [&self.lambda1, &self.lambda2, &self.d1, &self.d2, &self.alpha1, &self.alpha2];
        if !zeros.iter().all(|c| val(c) == Some(0.0)) {
            return None;
        }
        let m1 = val(&self.beta1)? + val(&self.c1)?;
        let m2 = val(&self.beta2)? + val(&self.c2)?;
        (m1 == m2).then_some(m1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_json(r#"{"xi": 0.4}"#).unwrap();
        assert_eq!(c.grid_n, DEFAULT_GRID_N);
        assert_eq!(c.omega, 1.0);
        assert!(c.is_trivial());
        assert_eq!(c.init.space, InitSpace::Target);
        assert_eq!(c.bessel_parameter(), Some(0.0));
    }

    #[test]
    fn coefficient_forms_parse() {
        let c = RunConfig::from_json(
            r#"{"xi": 0.5, "lambda1": {"const": 0.5}, "lambda2": {"poly": [0.5, 0.2]},
                "beta1": {"samples": {"x": [0.0, 0.5], "v": [1.0, 2.0]}},
                "init": {"space": "plant", "u": {"sine": {"mode": 2, "amp": 0.5}}, "v": "zero", "jump": 0.1}}"#,
        )
        .unwrap();
        assert_eq!(c.lambda1, Coefficient::Const(0.5));
        assert_eq!(c.lambda2, Coefficient::Poly(vec![0.5, 0.2]));
        assert!(matches!(c.beta1, Coefficient::Samples(_)));
        assert_eq!(c.init.jump, 0.1);
        let u = c.init.u.evaluator().unwrap();
        assert!((u(0.25) - 0.5).abs() < 1e-15);
        assert!(!c.is_trivial());
        assert!(c.bessel_parameter().is_none());
    }

    #[test]
    fn bad_input_is_a_config_error() {
        for text in [
            "{not json",
            r#"{"xi": 1.2}"#,
            r#"{"xi": 0.4, "grid_n": 5}"#,
            r#"{"xi": 0.4, "bogus": 1}"#,
            r#"{"xi": 0.4, "lambda1": {"cubic": 1}}"#,
            r#"{"xi": 0.4, "sim": {"cfl": 2.0}}"#,
            r#"{"xi": 0.4, "omega": 0}"#,
        ] {
            assert!(matches!(RunConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn bessel_parameter_detects_undamped_case() {
        let c = RunConfig::from_json(
            r#"{"xi": 0.5, "beta1": {"const": 2}, "beta2": {"const": 2}, "c1": {"const": 2}, "c2": {"const": 2}}"#,
        )
        .unwrap();
        assert_eq!(c.bessel_parameter(), Some(4.0));
    }

    #[test]
    fn build_reports_bad_samples_as_config_errors() {
        let c = RunConfig::from_json(r#"{"xi": 0.4, "lambda1": {"samples": {"x": [0.1, 0.3], "v": [1, 1]}}}"#).unwrap();
        assert!(matches!(c.build_at(0.4), Err(Error::Config(_))));
    }
}
