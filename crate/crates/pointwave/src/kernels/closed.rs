//! Closed-form kernel ingredients along the diagonal.
//!
//! Everything here lives on a half-spaced grid (`2n − 1` nodes for an
//! `n`-node kernel grid) so that the characteristic solver can read the
//! boundary data `m(ζ/2)` and the coefficient bundles at `(ζ ± η)/2`
//! without interpolation.

use crate::error::{Error, Result};
use crate::field::{cumulative_simpson, Grid1D, ScalarField};
use crate::problem::SubdomainProblem;

#[derive(Debug, Clone)]
pub struct ClosedFormData {
    /// `a = λ + d`
    pub a: ScalarField,
    pub a_prime: ScalarField,
    /// `∫₀^x a`
    pub cum_a: ScalarField,
    pub h: ScalarField,
    pub hprime: ScalarField,
    /// `h'/a`, evaluated as `√A sinh(∫a)` so it stays finite where `a = 0`.
    pub h_over_a: ScalarField,
    /// `s(x,x)`
    pub ms: ScalarField,
    pub ms_prime: ScalarField,
    pub ms_second: ScalarField,
    pub amplitude_a: f64,
}

#[derive(Debug, Clone)]
pub struct DiagonalData {
    /// `k(x,x)` from the simplified closed form.
    pub m: ScalarField,
    pub m_prime: ScalarField,
    /// `k(x,x)` recomputed from `f` by the unsimplified integral route.
    pub m_from_f: ScalarField,
    /// `s_y(x,x)`
    pub f: ScalarField,
    /// Forcing of the integro-differential equation for `f`.
    pub l: ScalarField,
}

impl DiagonalData {
    /// Largest gap between the two routes to `k(x,x)`.
    pub fn route_mismatch(&self) -> f64 {
        self.m
            .values()
            .iter()
            .zip(self.m_from_f.values())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Half-spaced grid over `[0, length]` for an `n`-node kernel grid.
pub fn fine_grid(length: f64, n: usize) -> Result<Grid1D> {
    Grid1D::new(0.0, length, 2 * n - 1)
}

pub fn closed_forms(sub: &SubdomainProblem, n: usize) -> Result<ClosedFormData> {
    if !(sub.amplitude_a > 0.0) {
        return Err(Error::Problem(format!(
            "amplitude must be positive, got {}",
            sub.amplitude_a
        )));
    }
    let g = fine_grid(sub.length, n)?;
    let xs = g.nodes();
    let a: Vec<f64> = xs.iter().map(|&x| sub.lam.at(x) + sub.d.at(x)).collect();
    let a_prime: Vec<f64> = xs
        .iter()
        .map(|&x| sub.lam.d1_at(x) + sub.d.d1_at(x))
        .collect();
    let cum = cumulative_simpson(&a, g.dx());
    let sa = sub.amplitude_a.sqrt();
    let h: Vec<f64> = cum.iter().map(|c| sa * c.cosh()).collect();
    let hoa: Vec<f64> = cum.iter().map(|c| sa * c.sinh()).collect();
    let hp: Vec<f64> = a.iter().zip(&hoa).map(|(a, s)| a * s).collect();
    let ms: Vec<f64> = hoa.iter().map(|s| -s).collect();
    let ms_p: Vec<f64> = a.iter().zip(&h).map(|(a, h)| -a * h).collect();
    let ms_pp: Vec<f64> = (0..g.n)
        .map(|i| -(a_prime[i] * h[i] + a[i] * a[i] * hoa[i]))
        .collect();
    let f = |v: Vec<f64>| ScalarField::new(g, v);
    Ok(ClosedFormData {
        a: f(a)?,
        a_prime: f(a_prime)?,
        cum_a: f(cum)?,
        h: f(h)?,
        hprime: f(hp)?,
        h_over_a: f(hoa)?,
        ms: f(ms)?,
        ms_prime: f(ms_p)?,
        ms_second: f(ms_pp)?,
        amplitude_a: sub.amplitude_a,
    })
}

pub fn diagonal_data(closed: &ClosedFormData, sub: &SubdomainProblem) -> Result<DiagonalData> {
    let g = *closed.a.grid();
    if g.n < 5 {
        return Err(Error::Grid("diagonal grid too coarse for λ'".into()));
    }
    let dx = g.dx();
    let xs = g.nodes();
    let lam: Vec<f64> = xs.iter().map(|&x| sub.lam.at(x)).collect();
    let lam_p: Vec<f64> = xs.iter().map(|&x| sub.lam.d1_at(x)).collect();
    let d: Vec<f64> = xs.iter().map(|&x| sub.d.at(x)).collect();
    let bc: Vec<f64> = xs.iter().map(|&x| sub.bet.at(x) + sub.c.at(x)).collect();
    let a = closed.a.values();
    let ap = closed.a_prime.values();
    let h = closed.h.values();
    let hp = closed.hprime.values();
    let hoa = closed.h_over_a.values();
    let cum = closed.cum_a.values();
    let sa = closed.amplitude_a.sqrt();
    let n = g.n;

    let lam_hoa: Vec<f64> = (0..n).map(|i| lam_p[i] * hoa[i]).collect();
    let int_lam_hoa = cumulative_simpson(&lam_hoa, dx);
    let bch: Vec<f64> = (0..n).map(|i| bc[i] * h[i]).collect();
    let int_bch = cumulative_simpson(&bch, dx);

    let l: Vec<f64> = (0..n)
        .map(|i| {
            4.0 * lam[i] * hp[i] + bc[i] * hoa[i] - 2.0 * a[i] * hp[i] - ap[i] * h[i]
                - 2.0 * a[i] * int_lam_hoa[i]
                + a[i] * int_bch[i]
        })
        .collect();

    // f(x) = −√A a(0) cosh C(x) + ½ ∫₀^x L(y) cosh(C(x) − C(y)) dy, with the
    // kernel split as cosh C(x) cosh C(y) − sinh C(x) sinh C(y).
    let lc: Vec<f64> = (0..n).map(|i| l[i] * cum[i].cosh()).collect();
    let ls: Vec<f64> = (0..n).map(|i| l[i] * cum[i].sinh()).collect();
    let ilc = cumulative_simpson(&lc, dx);
    let ils = cumulative_simpson(&ls, dx);
    let f: Vec<f64> = (0..n)
        .map(|i| {
            -sa * a[0] * cum[i].cosh() + 0.5 * (cum[i].cosh() * ilc[i] - cum[i].sinh() * ils[i])
        })
        .collect();

    // simplified closed form for k(x,x)
    let q: Vec<f64> = (0..n)
        .map(|i| d[i] * d[i] - lam[i] * lam[i] - bc[i])
        .collect();
    let iq = cumulative_simpson(&q, dx);
    let m: Vec<f64> = (0..n)
        .map(|i| 0.5 * hoa[i] * (2.0 * lam[i] + a[i] + a[0]) + 0.5 * h[i] * iq[i])
        .collect();
    let m_prime: Vec<f64> = (0..n)
        .map(|i| {
            0.5 * a[i] * h[i] * (2.0 * lam[i] + a[i] + a[0])
                + 0.5 * hoa[i] * (2.0 * lam_p[i] + ap[i])
                + 0.5 * hp[i] * iq[i]
                + 0.5 * h[i] * q[i]
        })
        .collect();

    // unsimplified route: 2k(x,x) = h' + ∫ [−2af + 2λ' h'/a − (β+c)h]
    let integrand: Vec<f64> = (0..n)
        .map(|i| -2.0 * a[i] * f[i] + 2.0 * lam_hoa[i] - bch[i])
        .collect();
    let ii = cumulative_simpson(&integrand, dx);
    let m_from_f: Vec<f64> = (0..n).map(|i| 0.5 * (hp[i] + ii[i])).collect();

    let fld = |v: Vec<f64>| ScalarField::new(g, v);
    Ok(DiagonalData {
        m: fld(m)?,
        m_prime: fld(m_prime)?,
        m_from_f: fld(m_from_f)?,
        f: fld(f)?,
        l: fld(l)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Side;
    use crate::profile::Profile;

    fn sub(lam: f64, d: f64, bet: f64, c: f64, length: f64) -> SubdomainProblem {
        let g = Grid1D::new(0.0, length, 257).unwrap();
        SubdomainProblem {
            side: Side::Left,
            anchor_eps: 0.0,
            length,
            lam: Profile::constant(g, lam),
            bet: Profile::constant(g, bet),
            d: Profile::constant(g, d),
            c: Profile::constant(g, c),
            amplitude_a: 1.0,
        }
    }

    #[test]
    fn zero_damping_gives_trivial_forms() {
        let s = sub(0.0, 0.0, 0.0, 0.0, 0.5);
        let cf = closed_forms(&s, 33).unwrap();
        assert!(cf.h.values().iter().all(|&v| v == 1.0));
        assert!(cf.ms.values().iter().all(|&v| v == 0.0));
        assert!(cf.hprime.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_damping_gives_cosh_and_sinh() {
        let s = sub(0.5, 0.5, 0.0, 0.0, 0.5);
        let cf = closed_forms(&s, 33).unwrap();
        for (i, x) in cf.h.grid().nodes().into_iter().enumerate() {
            assert!((cf.h.values()[i] - x.cosh()).abs() < 1e-12);
            assert!((cf.ms.values()[i] + x.sinh()).abs() < 1e-12);
        }
        assert_eq!(cf.h.values()[0], 1.0);
    }

    #[test]
    fn hyperbolic_identity() {
        let mut s = sub(0.5, 1.0, 0.3, 1.0, 0.6);
        s.amplitude_a = 0.83;
        let cf = closed_forms(&s, 65).unwrap();
        for i in 0..cf.h.grid().n {
            let h = cf.h.values()[i];
            let sh = cf.h_over_a.values()[i];
            assert!(((h * h - sh * sh) - 0.83).abs() < 1e-12 * h * h);
        }
    }

    #[test]
    fn diagonal_trace_constant_stiffness() {
        // a ≡ 0, β + c ≡ 2: m(x) = −x
        let s = sub(0.0, 0.0, 1.5, 0.5, 0.5);
        let cf = closed_forms(&s, 65).unwrap();
        let dd = diagonal_data(&cf, &s).unwrap();
        for (i, x) in dd.m.grid().nodes().into_iter().enumerate() {
            assert!((dd.m.values()[i] + x).abs() < 1e-12);
        }
        assert!(dd.route_mismatch() < 1e-10);
    }

    #[test]
    fn routes_agree_with_damping_and_stiffness() {
        // both a and β + c nonzero: the forcing's stiffness term must carry
        // +(β+c)h'/a for f to reproduce the simplified k(x,x)
        let s = sub(0.5, 1.0, 0.3, 1.0, 0.6);
        let cf = closed_forms(&s, 129).unwrap();
        let dd = diagonal_data(&cf, &s).unwrap();
        assert!(dd.route_mismatch() < 1e-9, "{}", dd.route_mismatch());
    }

    #[test]
    fn diagonal_trace_unit_damping() {
        // λ = d = 0.5: m(x) = 1.5 sinh x, f(x) = −cosh x
        let s = sub(0.5, 0.5, 0.0, 0.0, 0.5);
        let cf = closed_forms(&s, 65).unwrap();
        let dd = diagonal_data(&cf, &s).unwrap();
        for (i, x) in dd.m.grid().nodes().into_iter().enumerate() {
            assert!((dd.m.values()[i] - 1.5 * x.sinh()).abs() < 1e-10);
            assert!((dd.f.values()[i] + x.cosh()).abs() < 1e-10);
        }
    }

    #[test]
    fn f_starts_at_minus_sqrt_a_times_a() {
        let mut s = sub(0.7, 1.2, 0.3, 1.0, 0.6);
        s.amplitude_a = 0.64;
        let cf = closed_forms(&s, 33).unwrap();
        let dd = diagonal_data(&cf, &s).unwrap();
        assert!((dd.f.values()[0] + 0.8 * 1.9).abs() < 1e-14);
    }
}
