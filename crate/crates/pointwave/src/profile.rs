//! Coefficient input forms and their normalized, differentiable representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{derivative_4th_order, Grid1D, ScalarField};

/// Default number of nodes used when a coefficient is sampled onto its interval.
pub const DEFAULT_PROFILE_NODES: usize = 2049;

/// A coefficient as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    Const(f64),
    /// Power-series coefficients `[a0, a1, ...]` in the global coordinate x.
    Poly(Vec<f64>),
    Samples(SampleTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTable {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl Default for Coefficient {
    fn default() -> Self {
        Coefficient::Const(0.0)
    }
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Const(0.0)
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| k as f64 * a)
        .collect()
}

/// A coefficient function on one interval together with its first two
/// derivatives, all held as [`ScalarField`]s on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub value: ScalarField,
    pub d1: ScalarField,
    pub d2: ScalarField,
}

impl Profile {
    pub fn from_coefficient(coef: &Coefficient, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let grid = Grid1D::new(lo, hi, n)?;
        match coef {
            Coefficient::Const(v) => {
                if !v.is_finite() {
                    return Err(Error::Coefficient(format!("non-finite constant {v}")));
                }
                Ok(Self::constant(grid, *v))
            }
            Coefficient::Poly(c) => {
                if c.iter().any(|a| !a.is_finite()) {
                    return Err(Error::Coefficient("non-finite polynomial coefficient".into()));
                }
                let c1 = poly_deriv(c);
                let c2 = poly_deriv(&c1);
                Ok(Self {
                    value: ScalarField::from_fn(grid, |x| poly_eval(c, x)),
                    d1: ScalarField::from_fn(grid, |x| poly_eval(&c1, x)),
                    d2: ScalarField::from_fn(grid, |x| poly_eval(&c2, x)),
                })
            }
            Coefficient::Samples(t) => Self::from_samples(t, grid),
        }
    }

    fn from_samples(t: &SampleTable, grid: Grid1D) -> Result<Self> {
        if t.x.len() != t.v.len() {
            return Err(Error::Coefficient("sample x and v lengths differ".into()));
        }
        if t.x.len() < 5 {
            return Err(Error::Coefficient(format!(
                "{} samples are too few to form second derivatives (need 5)",
                t.x.len()
            )));
        }
        let n = t.x.len();
        let src = Grid1D::new(t.x[0], t.x[n - 1], n)?;
        let h = src.dx();
        let uniform = t
            .x
            .iter()
            .enumerate()
            .all(|(i, &x)| (x - src.node(i)).abs() <= 1e-9 * (1.0 + x.abs()));
        if !uniform {
            return Err(Error::Coefficient("sample abscissae must be uniformly spaced".into()));
        }
        if t.v.iter().any(|v| !v.is_finite()) {
            return Err(Error::Coefficient("non-finite sample".into()));
        }
        let slack = 1e-9;
        if src.lo > grid.lo + slack || src.hi < grid.hi - slack {
            return Err(Error::Coefficient(format!(
                "samples cover [{}, {}] but [{}, {}] is required",
                src.lo, src.hi, grid.lo, grid.hi
            )));
        }
        let d1v = derivative_4th_order(&t.v, h)?;
        let d2v = derivative_4th_order(&d1v, h)?;
        let value = ScalarField::new(src, t.v.clone())?;
        let d1 = ScalarField::new(src, d1v)?;
        let d2 = ScalarField::new(src, d2v)?;
        let resample = |f: &ScalarField| {
            ScalarField::from_fn(grid, |x| f.eval_unchecked(x.clamp(src.lo, src.hi)))
        };
        Ok(Self {
            value: resample(&value),
            d1: resample(&d1),
            d2: resample(&d2),
        })
    }

    pub fn constant(grid: Grid1D, v: f64) -> Self {
        Self {
            value: ScalarField::constant(grid, v),
            d1: ScalarField::constant(grid, 0.0),
            d2: ScalarField::constant(grid, 0.0),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        self.value.grid()
    }

    #[inline]
    pub fn at(&self, x: f64) -> f64 {
        self.value.eval_unchecked(x)
    }

    #[inline]
    pub fn d1_at(&self, x: f64) -> f64 {
        self.d1.eval_unchecked(x)
    }

    #[inline]
    pub fn d2_at(&self, x: f64) -> f64 {
        self.d2.eval_unchecked(x)
    }

    pub fn is_zero(&self) -> bool {
        self.value.max_abs() == 0.0
    }

    pub fn is_constant(&self) -> bool {
        let v = self.value.values();
        v.iter().all(|&x| x == v[0])
    }

    /// Profile of `g(x) = f(pivot - x)`; odd derivatives change sign.
    pub fn mirrored(&self, pivot: f64) -> Self {
        Self {
            value: self.value.mirrored(pivot),
            d1: self.d1.mirrored(pivot).map(|v| -v),
            d2: self.d2.mirrored(pivot),
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            value: self.value.map(|v| -v),
            d1: self.d1.map(|v| -v),
            d2: self.d2.map(|v| -v),
        }
    }

    /// Same interval shifted so that it starts at zero.
    pub fn rebased(&self) -> Self {
        let shift = |f: &ScalarField| {
            let g = f.grid();
            let grid = Grid1D {
                lo: 0.0,
                hi: g.hi - g.lo,
                n: g.n,
            };
            ScalarField::new(grid, f.values().to_vec()).expect("same length")
        };
        Self {
            value: shift(&self.value),
            d1: shift(&self.d1),
            d2: shift(&self.d2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_forms_deserialize() {
        let c: Coefficient = serde_json::from_str(r#"{"const": 0.5}"#).unwrap();
        assert_eq!(c, Coefficient::Const(0.5));
        let c: Coefficient = serde_json::from_str(r#"{"poly": [0.5, 0.2]}"#).unwrap();
        assert_eq!(c, Coefficient::Poly(vec![0.5, 0.2]));
        let c: Coefficient =
            serde_json::from_str(r#"{"samples": {"x": [0, 1], "v": [1, 2]}}"#).unwrap();
        assert!(matches!(c, Coefficient::Samples(_)));
    }

    #[test]
    fn polynomial_derivatives_are_analytic() {
        let p = Profile::from_coefficient(&Coefficient::Poly(vec![1.0, 2.0, 3.0]), 0.0, 0.4, 41)
            .unwrap();
        assert!((p.at(0.2) - (1.0 + 0.4 + 0.12)).abs() < 1e-12);
        assert!((p.d1_at(0.2) - (2.0 + 1.2)).abs() < 1e-12);
        assert!((p.d2_at(0.3) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_derivatives_fourth_order() {
        let x: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        let v: Vec<f64> = x.iter().map(|x| (1.5 * x).sin()).collect();
        let p = Profile::from_coefficient(
            &Coefficient::Samples(SampleTable { x, v }),
            0.0,
            1.0,
            257,
        )
        .unwrap();
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            assert!((p.d1_at(x) - 1.5 * (1.5 * x).cos()).abs() < 1e-5);
            assert!((p.d2_at(x) + 2.25 * (1.5 * x).sin()).abs() < 2e-3);
        }
    }

    #[test]
    fn too_few_samples_is_error() {
        let t = SampleTable {
            x: vec![0.0, 0.5, 1.0],
            v: vec![0.0, 1.0, 0.0],
        };
        assert!(Profile::from_coefficient(&Coefficient::Samples(t), 0.0, 1.0, 11).is_err());
    }

    #[test]
    fn samples_must_cover_interval() {
        let t = SampleTable {
            x: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            v: vec![0.0; 5],
        };
        assert!(Profile::from_coefficient(&Coefficient::Samples(t), 0.0, 1.0, 11).is_err());
    }

    #[test]
    fn mirror_flips_odd_derivatives() {
        let p = Profile::from_coefficient(&Coefficient::Poly(vec![0.0, 1.0]), 0.4, 1.0, 31)
            .unwrap();
        let m = p.mirrored(1.0);
        assert!((m.at(0.1) - 0.9).abs() < 1e-12);
        assert!((m.d1_at(0.1) + 1.0).abs() < 1e-12);
    }
}
