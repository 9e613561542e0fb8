//! Plant and target definitions plus the preprocessing that turns either
//! subdomain into one canonical problem anchored at zero.

use crate::error::{Error, Result};
use crate::field::{cumulative_simpson, derivative_2nd_order, ScalarField};
use crate::profile::{Coefficient, Profile, DEFAULT_PROFILE_NODES};

/// Transmission wave plant
/// `ü = u'' + 2λ u̇ + α u' + β u` on (0,ξ) and (ξ,1), Dirichlet at both ends,
/// `u₁(ξ) = u₂(ξ)` and `u₁'(ξ) = u₂'(ξ) + κ u₁(ξ) + U`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpec {
    pub xi: f64,
    pub lambda1: Profile,
    pub lambda2: Profile,
    pub beta1: Profile,
    pub beta2: Profile,
    pub alpha1: Profile,
    pub alpha2: Profile,
    /// κ in the slope-jump condition; nonzero only after [`rescale_out_alpha`].
    pub interface_correction: f64,
}

/// Target system `ẅ = w'' − 2d ẇ − c w` with continuous transmission at ξ.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDesign {
    pub d1: Profile,
    pub d2: Profile,
    pub c1: Profile,
    pub c2: Profile,
    pub omega: f64,
}

/// Plant coefficients given in the global coordinate, one entry per field.
#[derive(Debug, Clone, Default)]
pub struct PlantCoefficients {
    pub lambda1: Coefficient,
    pub lambda2: Coefficient,
    pub beta1: Coefficient,
    pub beta2: Coefficient,
    pub alpha1: Coefficient,
    pub alpha2: Coefficient,
}

#[derive(Debug, Clone, Default)]
pub struct DesignCoefficients {
    pub d1: Coefficient,
    pub d2: Coefficient,
    pub c1: Coefficient,
    pub c2: Coefficient,
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Problem(format!("xi must lie in (0,1), got {xi}")));
    }
    Ok(())
}

impl PlantSpec {
    pub fn new(xi: f64, c: &PlantCoefficients) -> Result<Self> {
        Self::with_resolution(xi, c, DEFAULT_PROFILE_NODES)
    }

    pub fn with_resolution(xi: f64, c: &PlantCoefficients, n: usize) -> Result<Self> {
        check_xi(xi)?;
        let left = |k: &Coefficient| Profile::from_coefficient(k, 0.0, xi, n);
        let right = |k: &Coefficient| Profile::from_coefficient(k, xi, 1.0, n);
        Ok(Self {
            xi,
            lambda1: left(&c.lambda1)?,
            lambda2: right(&c.lambda2)?,
            beta1: left(&c.beta1)?,
            beta2: right(&c.beta2)?,
            alpha1: left(&c.alpha1)?,
            alpha2: right(&c.alpha2)?,
            interface_correction: 0.0,
        })
    }

    pub fn has_alpha(&self) -> bool {
        !(self.alpha1.is_zero() && self.alpha2.is_zero())
    }

    pub(crate) fn validate(&self) -> Result<()> {
        check_xi(self.xi)?;
        let spans = |p: &Profile, lo: f64, hi: f64, name: &str| {
            let g = p.grid();
            if (g.lo - lo).abs() > 1e-12 || (g.hi - hi).abs() > 1e-12 {
                return Err(Error::Problem(format!(
                    "{name} spans [{}, {}], expected [{lo}, {hi}]",
                    g.lo, g.hi
                )));
            }
            Ok(())
        };
        spans(&self.lambda1, 0.0, self.xi, "lambda1")?;
        spans(&self.beta1, 0.0, self.xi, "beta1")?;
        spans(&self.alpha1, 0.0, self.xi, "alpha1")?;
        spans(&self.lambda2, self.xi, 1.0, "lambda2")?;
        spans(&self.beta2, self.xi, 1.0, "beta2")?;
        spans(&self.alpha2, self.xi, 1.0, "alpha2")?;
        Ok(())
    }
}

impl TargetDesign {
    pub fn new(xi: f64, c: &DesignCoefficients, omega: f64) -> Result<Self> {
        Self::with_resolution(xi, c, omega, DEFAULT_PROFILE_NODES)
    }

    pub fn with_resolution(
        xi: f64,
        c: &DesignCoefficients,
        omega: f64,
        n: usize,
    ) -> Result<Self> {
        check_xi(xi)?;
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Problem(format!("omega must be positive, got {omega}")));
        }
        let left = |k: &Coefficient| Profile::from_coefficient(k, 0.0, xi, n);
        let right = |k: &Coefficient| Profile::from_coefficient(k, xi, 1.0, n);
        Ok(Self {
            d1: left(&c.d1)?,
            d2: right(&c.d2)?,
            c1: left(&c.c1)?,
            c2: right(&c.c2)?,
            omega,
        })
    }

    /// Smallest damping value over both subdomains.
    pub fn min_damping(&self) -> f64 {
        self.d1
            .value
            .values()
            .iter()
            .chain(self.d2.value.values())
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// Result of removing the first-order terms: the new plant plus the
/// multipliers `e^{½∫_ξ^x α}` with `ũ = multiplier · u`.
#[derive(Debug, Clone)]
pub struct Rescaled {
    pub spec: PlantSpec,
    pub multiplier1: ScalarField,
    pub multiplier2: ScalarField,
}

/// Substitute `ũ = e^{½∫_ξ^x α} u`, which removes `α u'` and replaces β by
/// `β − α'/2 − α²/4`. The slope jump picks up `κ = ½(α₁(ξ) − α₂(ξ))`.
pub fn rescale_out_alpha(spec: &PlantSpec) -> Result<Rescaled> {
    spec.validate()?;
    let sub = |alpha: &Profile, beta: &Profile, anchor_at_hi: bool| -> Result<(Profile, ScalarField)> {
        let g = *alpha.grid();
        if beta.grid() != &g {
            return Err(Error::Problem("alpha and beta grids differ".into()));
        }
        if g.n < 5 {
            return Err(Error::Coefficient("alpha grid too coarse to differentiate".into()));
        }
        let av = alpha.value.values();
        let a1 = alpha.d1.values();
        let a2 = alpha.d2.values();
        let bv = beta.value.values();
        let b1 = beta.d1.values();
        let new_b: Vec<f64> = (0..g.n)
            .map(|i| bv[i] - 0.5 * a1[i] - 0.25 * av[i] * av[i])
            .collect();
        let new_b1: Vec<f64> = (0..g.n)
            .map(|i| b1[i] - 0.5 * a2[i] - 0.5 * av[i] * a1[i])
            .collect();
        let new_b2 = derivative_2nd_order(&new_b1, g.dx());
        let cum = cumulative_simpson(av, g.dx());
        let anchor = if anchor_at_hi { cum[g.n - 1] } else { 0.0 };
        let mult: Vec<f64> = cum.iter().map(|c| (0.5 * (c - anchor)).exp()).collect();
        Ok((
            Profile {
                value: ScalarField::new(g, new_b)?,
                d1: ScalarField::new(g, new_b1)?,
                d2: ScalarField::new(g, new_b2)?,
            },
            ScalarField::new(g, mult)?,
        ))
    };
    let (beta1, multiplier1) = sub(&spec.alpha1, &spec.beta1, true)?;
    let (beta2, multiplier2) = sub(&spec.alpha2, &spec.beta2, false)?;
    let kappa = 0.5 * (spec.alpha1.at(spec.xi) - spec.alpha2.at(spec.xi));
    let zero1 = Profile::constant(*spec.alpha1.grid(), 0.0);
    let zero2 = Profile::constant(*spec.alpha2.grid(), 0.0);
    Ok(Rescaled {
        spec: PlantSpec {
            xi: spec.xi,
            lambda1: spec.lambda1.clone(),
            lambda2: spec.lambda2.clone(),
            beta1,
            beta2,
            alpha1: zero1,
            alpha2: zero2,
            interface_correction: spec.interface_correction + kappa,
        },
        multiplier1,
        multiplier2,
    })
}

/// Which side of the actuator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Left => 1,
            Side::Right => 2,
        }
    }
}

/// One subdomain rewritten on `[0, length]` with its anchored edge at zero.
/// The right subdomain is mirrored through `x̂ = 1 − x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainProblem {
    pub side: Side,
    pub anchor_eps: f64,
    pub length: f64,
    pub lam: Profile,
    pub bet: Profile,
    pub d: Profile,
    pub c: Profile,
    pub amplitude_a: f64,
}

impl SubdomainProblem {
    pub fn index(&self) -> usize {
        self.side.index()
    }

    /// Coefficients back in the global coordinate: `(λ, β, d, c)`.
    pub fn to_global(&self) -> [Profile; 4] {
        let back = |p: &Profile| match self.side {
            Side::Left => p.clone(),
            Side::Right => p.mirrored(1.0),
        };
        [back(&self.lam), back(&self.bet), back(&self.d), back(&self.c)]
    }
}

fn profile_integral(p: &Profile) -> f64 {
    let v = p.value.values();
    *cumulative_simpson(v, p.grid().dx()).last().expect("non-empty")
}

/// `∫ (λ + d)` over a subdomain.
fn damping_integral(lam: &Profile, d: &Profile) -> f64 {
    profile_integral(lam) + profile_integral(d)
}

/// Amplitude for the right subdomain,
/// `cosh²(∫₀^ξ a₁) / cosh²(∫_ξ^1 a₂)` with `a = λ + d`.
pub fn right_amplitude(spec: &PlantSpec, design: &TargetDesign) -> f64 {
    let i1 = damping_integral(&spec.lambda1, &design.d1);
    let i2 = damping_integral(&spec.lambda2, &design.d2);
    (i1.cosh() / i2.cosh()).powi(2)
}

pub fn to_left_form(spec: &PlantSpec, design: &TargetDesign, side: Side) -> Result<SubdomainProblem> {
    spec.validate()?;
    if spec.has_alpha() {
        return Err(Error::Problem(
            "first-order terms present; apply rescale_out_alpha first".into(),
        ));
    }
    Ok(match side {
        Side::Left => SubdomainProblem {
            side,
            anchor_eps: 0.0,
            length: spec.xi,
            lam: spec.lambda1.clone(),
            bet: spec.beta1.clone(),
            d: design.d1.clone(),
            c: design.c1.clone(),
            amplitude_a: 1.0,
        },
        Side::Right => {
            let m = |p: &Profile| p.mirrored(1.0).rebased();
            SubdomainProblem {
                side,
                anchor_eps: 0.0,
                length: 1.0 - spec.xi,
                lam: m(&spec.lambda2),
                bet: m(&spec.beta2),
                d: m(&design.d2),
                c: m(&design.c2),
                amplitude_a: right_amplitude(spec, design),
            }
        }
    })
}

/// Smallest grid spacing the subdomains can tolerate at this ξ.
pub fn check_xi_against_spacing(xi: f64, dx: f64) -> Result<()> {
    if xi.min(1.0 - xi) < 4.0 * dx {
        return Err(Error::Problem(format!(
            "xi = {xi} is closer than 4 grid spacings ({dx}) to the boundary"
        )));
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::*;

    fn consts(l1: f64, l2: f64) -> PlantCoefficients {
        PlantCoefficients {
            lambda1: Coefficient::Const(l1),
            lambda2: Coefficient::Const(l2),
            ..Default::default()
        }
    }

    fn design(d: f64, c: f64) -> DesignCoefficients {
        DesignCoefficients {
            d1: Coefficient::Const(d),
            d2: Coefficient::Const(d),
            c1: Coefficient::Const(c),
            c2: Coefficient::Const(c),
        }
    }

    #[test]
    fn rescale_identity_without_alpha() {
        let spec = PlantSpec::with_resolution(0.5, &consts(0.5, 0.5), 65).unwrap();
        let r = rescale_out_alpha(&spec).unwrap();
        assert_eq!(r.spec.interface_correction, 0.0);
        assert_eq!(r.spec.beta1.value, spec.beta1.value);
        assert!(r.multiplier1.values().iter().all(|&m| m == 1.0));
    }

    #[test]
    fn rescale_constant_alpha_interface_term() {
        let c = PlantCoefficients {
            alpha1: Coefficient::Const(2.0),
            ..Default::default()
        };
        let spec = PlantSpec::with_resolution(0.5, &c, 65).unwrap();
        let r = rescale_out_alpha(&spec).unwrap();
        assert!((r.spec.interface_correction - 1.0).abs() < 1e-15);
        // β̃ = −α²/4 = −1
        assert!(r.spec.beta1.value.values().iter().all(|&b| (b + 1.0).abs() < 1e-14));
        assert!(!r.spec.has_alpha());
    }

    /// Independent check of the substitution: for a test profile ũ, the
    /// operator `u'' + αu' + βu` applied to `u = ũ/m` must equal
    /// `(ũ'' + β̃ ũ)/m`, with all derivatives taken by fine differences.
    #[test]
    fn rescale_linear_alpha_matches_substitution() {
        let c = PlantCoefficients {
            alpha1: Coefficient::Poly(vec![0.0, 1.0]),
            ..Default::default()
        };
        let xi = 0.5;
        let spec = PlantSpec::with_resolution(xi, &c, 401).unwrap();
        let r = rescale_out_alpha(&spec).unwrap();
        for k in 1..10 {
            let x = 0.05 * k as f64 * 0.9;
            let expected = -(0.25 * x * x + 0.5);
            assert!((r.spec.beta1.at(x) - expected).abs() < 1e-9);
        }
        let ut = |x: f64| (3.0 * x).sin() + x * x;
        let mult = |x: f64| (0.25 * (x * x - xi * xi)).exp();
        let u = |x: f64| ut(x) / mult(x);
        let h = 1e-4;
        for k in 1..9 {
            let x = 0.05 * k as f64;
            assert!((r.multiplier1.eval(x).unwrap() - mult(x)).abs() < 1e-9);
            let d1 = (u(x + h) - u(x - h)) / (2.0 * h);
            let d2 = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
            let lhs = d2 + x * d1;
            let ut2 = (ut(x + h) - 2.0 * ut(x) + ut(x - h)) / (h * h);
            let rhs = (ut2 + r.spec.beta1.at(x) * ut(x)) / mult(x);
            assert!((lhs - rhs).abs() < 1e-5, "x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn left_form_subdomain_one() {
        let spec = PlantSpec::with_resolution(0.4, &consts(0.5, 0.5), 65).unwrap();
        let des = TargetDesign::with_resolution(0.4, &design(0.5, 0.0), 1.0, 65).unwrap();
        let s = to_left_form(&spec, &des, Side::Left).unwrap();
        assert_eq!(s.anchor_eps, 0.0);
        assert_eq!(s.length, 0.4);
        assert_eq!(s.amplitude_a, 1.0);
    }

    #[test]
    fn right_amplitude_constant_case() {
        let spec = PlantSpec::with_resolution(0.4, &consts(0.5, 0.5), 65).unwrap();
        let des = TargetDesign::with_resolution(0.4, &design(0.5, 0.0), 1.0, 65).unwrap();
        let s = to_left_form(&spec, &des, Side::Right).unwrap();
        let expected = (0.4_f64.cosh() / 0.6_f64.cosh()).powi(2);
        assert!((s.amplitude_a - expected).abs() < 1e-12);
        assert!((s.amplitude_a - 0.83163).abs() < 1e-4);
    }

    #[test]
    fn symmetric_data_gives_unit_amplitude() {
        let c = PlantCoefficients {
            lambda1: Coefficient::Poly(vec![0.3, 0.4]),
            lambda2: Coefficient::Poly(vec![0.7, -0.4]),
            ..Default::default()
        };
        let spec = PlantSpec::with_resolution(0.5, &c, 129).unwrap();
        let des = TargetDesign::with_resolution(0.5, &design(1.0, 1.0), 1.0, 129).unwrap();
        let s = to_left_form(&spec, &des, Side::Right).unwrap();
        assert!((s.amplitude_a - 1.0).abs() < 1e-12);
        let l = to_left_form(&spec, &des, Side::Left).unwrap();
        for (a, b) in s.lam.value.values().iter().zip(l.lam.value.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn reflection_round_trip_is_exact() {
        let c = PlantCoefficients {
            lambda2: Coefficient::Poly(vec![0.1, 0.3, -0.2]),
            beta2: Coefficient::Poly(vec![1.0, 0.5]),
            ..Default::default()
        };
        let spec = PlantSpec::with_resolution(0.35, &c, 101).unwrap();
        let des = TargetDesign::with_resolution(0.35, &design(1.0, 1.0), 1.0, 101).unwrap();
        let s = to_left_form(&spec, &des, Side::Right).unwrap();
        let [lam, bet, d, _] = s.to_global();
        assert_eq!(lam.value.values(), spec.lambda2.value.values());
        assert_eq!(lam.d1.values(), spec.lambda2.d1.values());
        assert_eq!(bet.value.values(), spec.beta2.value.values());
        assert_eq!(d.value.values(), des.d2.value.values());
        assert!((lam.grid().lo - 0.35).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_xi_and_omega() {
        assert!(PlantSpec::new(1.0, &PlantCoefficients::default()).is_err());
        assert!(TargetDesign::new(0.5, &DesignCoefficients::default(), 0.0).is_err());
        assert!(check_xi_against_spacing(0.009, 0.0025).is_err());
        assert!(check_xi_against_spacing(0.4, 0.0025).is_ok());
    }
}
