//! Successive approximation of the coupled kernel equations in
//! characteristic coordinates `ζ = x + y`, `η = x − y`.
//!
//! With `G(ζ,η) = k(x,y)` and `Gs(ζ,η) = s(x,y)` the kernel system becomes
//!
//! ```text
//! G  = g1(ζ) − g1(η) + ¼ ∫_η^ζ ∫_0^η [b2 G + b1 (Gs_ζζ − 2Gs_ζη + Gs_ηη) + b3 Gs + b4 (Gs_ζ − Gs_η)]
//! Gs = g2(ζ) − g2(η) + ¼ ∫_η^ζ ∫_0^η [b1 G + b5 Gs]
//! ```
//!
//! The series is summed term by term. Because the `G` equation needs second
//! derivatives of `Gs`, those (and the first derivatives of both unknowns)
//! are carried as separate arrays whose updates come from differentiating
//! the integral recursion, so nothing is differentiated numerically.
//!
//! The `(ζ,η)` grid has spacing `dx`, `p ∈ 0..=2(n−1)` and
//! `q ∈ 0..=min(p, 2(n−1) − p)`; node `(x_i, y_j)` sits at `p = i+j`,
//! `q = i−j`. Coefficients at `(ζ±η)/2` land on the half-spaced diagonal
//! grid of [`super::closed`].

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::max_abs;
use crate::problem::SubdomainProblem;

use super::closed::{ClosedFormData, DiagonalData};
use super::triangle::TriangleField;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Number of tracked arrays per series term.
const NARR: usize = 9;
const G: usize = 0;
const GZ: usize = 1;
const GE: usize = 2;
const S: usize = 3;
const SZ: usize = 4;
const SE: usize = 5;
const SZZ: usize = 6;
const SZE: usize = 7;
const SEE: usize = 8;

pub const TRACKED_NAMES: [&str; 7] = ["G", "Gs", "Gs_z", "Gs_e", "Gs_zz", "Gs_ze", "Gs_ee"];

/// Sup-norms of one series term, in the order of [`TRACKED_NAMES`].
pub type TermSups = [f64; 7];

#[derive(Debug, Clone)]
pub struct IterationBound {
    pub m: f64,
    pub k: f64,
    pub delta: f64,
    pub eta_max: f64,
    pub per_iter_sup: Vec<TermSups>,
}

#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub pass: bool,
    /// `(term index, tracked name, observed sup, bound)` for every check.
    pub rows: Vec<(usize, &'static str, f64, f64)>,
}

impl BoundCheck {
    pub fn worst_ratio(&self) -> f64 {
        self.rows
            .iter()
            .map(|&(_, _, obs, bound)| if bound > 0.0 { obs / bound } else if obs > 0.0 { f64::INFINITY } else { 0.0 })
            .fold(0.0, f64::max)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl IterationBound {
    /// Bound for term `n` of a value-type array (`G`, `Gs`, first derivatives).
    pub fn value_bound(&self, n: usize) -> f64 {
        let r = self.eta_max + self.delta;
        self.m * self.k.powi(n as i32) * r.powi(n as i32) / factorial(n)
    }

    /// Bound for term `n` of a second-derivative array.
    pub fn second_bound(&self, n: usize) -> f64 {
        if n == 0 {
            return self.m;
        }
        let r = self.eta_max + self.delta;
        self.m * self.k.powi(n as i32) * r.powi(n as i32 - 1) / factorial(n - 1)
    }
}

/// Compare recorded term sups against the factorial bound for `n ≤ n_max`.
pub fn check_iteration_bound(bound: &IterationBound, n_max: usize) -> BoundCheck {
    let mut rows = Vec::new();
    let mut pass = true;
    let slack = 1e-12;
    for (n, sups) in bound.per_iter_sup.iter().enumerate().take(n_max + 1) {
        for (idx, &obs) in sups.iter().enumerate() {
            let b = if idx < 4 {
                bound.value_bound(n)
            } else {
                bound.second_bound(n)
            };
            if obs > b * (1.0 + slack) + slack {
                pass = false;
            }
            rows.push((n, TRACKED_NAMES[idx], obs, b));
        }
    }
    if bound.per_iter_sup.len() <= n_max {
        // all further terms are zero only if the series terminated exactly
        let last_zero = bound
            .per_iter_sup
            .last()
            .map(|s| s.iter().all(|&v| v == 0.0))
            .unwrap_or(true);
        pass &= last_zero;
    }
    BoundCheck { pass, rows }
}

#[derive(Debug, Clone)]
pub struct GoursatSolution {
    pub k: TriangleField,
    pub s: TriangleField,
    pub k_x: TriangleField,
    pub s_x: TriangleField,
    pub s_y: TriangleField,
    pub s_yy: TriangleField,
    pub bound: IterationBound,
    pub iterations: usize,
    pub history: Vec<f64>,
    /// Sup of `Φ(G) − G` over all tracked arrays at the returned solution.
    pub fixed_point_defect: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GoursatOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub exec: Exec,
}

impl Default for GoursatOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            exec: Exec::default(),
        }
    }
}

/// Coefficient bundles on the characteristic grid.
struct Bundles {
    b1: Vec<f64>,
    b2: Vec<f64>,
    b3: Vec<f64>,
    b4: Vec<f64>,
    b5: Vec<f64>,
    b1z: Vec<f64>,
    b1e: Vec<f64>,
    b5z: Vec<f64>,
    b5e: Vec<f64>,
}

/// Workspace geometry plus fixed data.
pub struct GoursatWorkspace {
    n: usize,
    rows: usize,
    width: usize,
    dx: f64,
    bundles: Bundles,
    term0: Vec<Vec<f64>>,
    exec: Exec,
}

impl GoursatWorkspace {
    #[inline]
    fn qmax(&self, p: usize) -> usize {
        p.min(self.rows - 1 - p)
    }

    #[inline]
    fn idx(&self, p: usize, q: usize) -> usize {
        p * self.width + q
    }

    pub fn new(
        sub: &SubdomainProblem,
        closed: &ClosedFormData,
        diag: &DiagonalData,
        n: usize,
        exec: Exec,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::Grid(format!("kernel grid needs at least 3 nodes, got {n}")));
        }
        let fine = *closed.a.grid();
        if fine.n != 2 * n - 1 {
            return Err(Error::Grid("closed-form data on a mismatched grid".into()));
        }
        let rows = 2 * (n - 1) + 1;
        let width = n;
        let dx = sub.length / (n - 1) as f64;
        let xs = fine.nodes();
        let sample = |f: &dyn Fn(f64) -> f64| -> Vec<f64> { xs.iter().map(|&x| f(x)).collect() };
        let lam = sample(&|x| sub.lam.at(x));
        let lam1 = sample(&|x| sub.lam.d1_at(x));
        let lam2 = sample(&|x| sub.lam.d2_at(x));
        let bet = sample(&|x| sub.bet.at(x));
        let bet1 = sample(&|x| sub.bet.d1_at(x));
        let d = sample(&|x| sub.d.at(x));
        let d1 = sample(&|x| sub.d.d1_at(x));
        let c = sample(&|x| sub.c.at(x));
        let c1 = sample(&|x| sub.c.d1_at(x));

        let size = rows * width;
        let mut bundles = Bundles {
            b1: vec![0.0; size],
            b2: vec![0.0; size],
            b3: vec![0.0; size],
            b4: vec![0.0; size],
            b5: vec![0.0; size],
            b1z: vec![0.0; size],
            b1e: vec![0.0; size],
            b5z: vec![0.0; size],
            b5e: vec![0.0; size],
        };
        for p in 0..rows {
            for q in 0..=p.min(rows - 1 - p) {
                let (ix, iy) = (p + q, p - q);
                let k = p * width + q;
                let (ly, l1y, l2y, by, b1y) = (lam[iy], lam1[iy], lam2[iy], bet[iy], bet1[iy]);
                let (dx_, d1x, cx, c1x) = (d[ix], d1[ix], c[ix], c1[ix]);
                bundles.b1[k] = 2.0 * (ly + dx_);
                bundles.b2[k] = cx + by;
                bundles.b3[k] = 2.0 * (ly * by + l2y + dx_ * by);
                bundles.b4[k] = 4.0 * l1y;
                bundles.b5[k] = 4.0 * ly * ly + 4.0 * dx_ * ly + cx + by;
                // ∂_ζ = ½(∂_x + ∂_y), ∂_η = ½(∂_x − ∂_y)
                let b1_x = 2.0 * d1x;
                let b1_y = 2.0 * l1y;
                let b5_x = 4.0 * d1x * ly + c1x;
                let b5_y = 8.0 * ly * l1y + 4.0 * dx_ * l1y + b1y;
                bundles.b1z[k] = 0.5 * (b1_x + b1_y);
                bundles.b1e[k] = 0.5 * (b1_x - b1_y);
                bundles.b5z[k] = 0.5 * (b5_x + b5_y);
                bundles.b5e[k] = 0.5 * (b5_x - b5_y);
            }
        }

        // boundary data g1(ζ) = m(ζ/2), g2(ζ) = mˢ(ζ/2); ζ = p·dx is fine node p
        let m = diag.m.values();
        let mp = diag.m_prime.values();
        let ms = closed.ms.values();
        let msp = closed.ms_prime.values();
        let mspp = closed.ms_second.values();
        let mut term0 = vec![vec![0.0; size]; NARR];
        for p in 0..rows {
            for q in 0..=p.min(rows - 1 - p) {
                let k = p * width + q;
                term0[G][k] = m[p] - m[q];
                term0[GZ][k] = 0.5 * mp[p];
                term0[GE][k] = -0.5 * mp[q];
                term0[S][k] = ms[p] - ms[q];
                term0[SZ][k] = 0.5 * msp[p];
                term0[SE][k] = -0.5 * msp[q];
                term0[SZZ][k] = 0.25 * mspp[p];
                term0[SZE][k] = 0.0;
                term0[SEE][k] = -0.25 * mspp[q];
            }
        }
        for arr in &term0 {
            if arr.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    stage: "goursat boundary data",
                    step: 0,
                });
            }
        }
        Ok(Self {
            n,
            rows,
            width,
            dx,
            bundles,
            term0,
            exec,
        })
    }

    /// Running trapezoid along η at fixed ζ.
    fn row_cumulative(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        let half = 0.5 * self.dx;
        self.exec.for_each_row(&mut out, self.width, |p, row| {
            let base = p * self.width;
            for q in 1..=self.qmax(p) {
                row[q] = row[q - 1] + half * (f[base + q - 1] + f[base + q]);
            }
        });
        out
    }

    /// Running trapezoid along ζ starting from ζ = η, at fixed η.
    fn col_cumulative(&self, f: &[f64]) -> Vec<f64> {
        let half = 0.5 * self.dx;
        let cols = self.exec.map_range(self.width, |q| {
            let top = self.rows - 1 - q;
            let mut col = Vec::with_capacity(top.saturating_sub(q) + 1);
            if q <= top {
                col.push(0.0);
                let mut acc = 0.0;
                for p in q + 1..=top {
                    acc += half * (f[self.idx(p - 1, q)] + f[self.idx(p, q)]);
                    col.push(acc);
                }
            }
            col
        });
        let mut out = vec![0.0; f.len()];
        for (q, col) in cols.into_iter().enumerate() {
            for (off, v) in col.into_iter().enumerate() {
                out[(q + off) * self.width + q] = v;
            }
        }
        out
    }

    /// Pointwise combination over valid cells, row-parallel.
    fn pointwise(&self, f: impl Fn(usize) -> f64 + Sync + Send) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.width];
        self.exec.for_each_row(&mut out, self.width, |p, row| {
            let base = p * self.width;
            for q in 0..=self.qmax(p) {
                row[q] = f(base + q);
            }
        });
        out
    }

    /// The linear part of the fixed-point map applied to `t`.
    fn sweep(&self, t: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let b = &self.bundles;
        let r = self.pointwise(|k| {
            b.b2[k] * t[G][k]
                + b.b1[k] * (t[SZZ][k] - 2.0 * t[SZE][k] + t[SEE][k])
                + b.b3[k] * t[S][k]
                + b.b4[k] * (t[SZ][k] - t[SE][k])
        });
        let f = self.pointwise(|k| b.b1[k] * t[G][k] + b.b5[k] * t[S][k]);
        let fz = self.pointwise(|k| {
            b.b1z[k] * t[G][k] + b.b1[k] * t[GZ][k] + b.b5z[k] * t[S][k] + b.b5[k] * t[SZ][k]
        });
        let fe = self.pointwise(|k| {
            b.b1e[k] * t[G][k] + b.b1[k] * t[GE][k] + b.b5e[k] * t[S][k] + b.b5[k] * t[SE][k]
        });
        let ir = self.row_cumulative(&r);
        let i_f = self.row_cumulative(&f);
        let ifz = self.row_cumulative(&fz);
        let dr = self.col_cumulative(&ir);
        let df = self.col_cumulative(&i_f);
        let hr = self.col_cumulative(&r);
        let hf = self.col_cumulative(&f);
        let hfe = self.col_cumulative(&fe);

        let w = self.width;
        let diag = |a: &[f64], k: usize| {
            let q = k % w;
            a[q * w + q]
        };
        let mut out = Vec::with_capacity(NARR);
        out.push(self.pointwise(|k| 0.25 * dr[k]));
        out.push(self.pointwise(|k| 0.25 * ir[k]));
        out.push(self.pointwise(|k| 0.25 * (hr[k] - diag(&ir, k))));
        out.push(self.pointwise(|k| 0.25 * df[k]));
        out.push(self.pointwise(|k| 0.25 * i_f[k]));
        out.push(self.pointwise(|k| 0.25 * (hf[k] - diag(&i_f, k))));
        out.push(self.pointwise(|k| 0.25 * ifz[k]));
        out.push(self.pointwise(|k| 0.25 * f[k]));
        out.push(self.pointwise(|k| 0.25 * (hfe[k] - diag(&ifz, k)) - 0.5 * diag(&f, k)));
        out
    }

    fn sups(t: &[Vec<f64>]) -> TermSups {
        [
            max_abs(&t[G]),
            max_abs(&t[S]),
            max_abs(&t[SZ]),
            max_abs(&t[SE]),
            max_abs(&t[SZZ]),
            max_abs(&t[SZE]),
            max_abs(&t[SEE]),
        ]
    }

    fn bound_constants(&self) -> (f64, f64) {
        let t0 = &self.term0;
        // g1'(ζ) = GZ(p,·), g2' = SZ, g2'' = SZZ of the zeroth term
        let g1p = max_abs(&t0[GZ]);
        let g2p = max_abs(&t0[SZ]);
        let g2pp = max_abs(&t0[SZZ]);
        let m = (2.0 * g1p).max(2.0 * g2p).max(g2pp);
        let b = &self.bundles;
        let c1 = |v: &[f64], z: &[f64], e: &[f64]| max_abs(v) + max_abs(z) + max_abs(e);
        let k = 0.5
            * (c1(&b.b1, &b.b1z, &b.b1e) + c1(&b.b5, &b.b5z, &b.b5e)).max(
                4.0 * max_abs(&b.b1) + max_abs(&b.b2) + max_abs(&b.b3) + 2.0 * max_abs(&b.b4),
            );
        (m, k)
    }

    fn to_triangle(&self, length: f64, f: impl Fn(usize) -> f64) -> TriangleField {
        TriangleField::from_fn(length, self.n, |i, j| f(self.idx(i + j, i - j)))
    }
}

pub fn solve_goursat(
    sub: &SubdomainProblem,
    closed: &ClosedFormData,
    diag: &DiagonalData,
    n: usize,
    opts: &GoursatOptions,
) -> Result<GoursatSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::Problem(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let ws = GoursatWorkspace::new(sub, closed, diag, n, opts.exec)?;
    let mut sum = ws.term0.clone();
    let mut term = ws.term0.clone();
    let mut per_iter_sup = vec![GoursatWorkspace::sups(&term)];
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        if iterations >= opts.max_iter {
            return Err(Error::NotConverged {
                iterations,
                last_change: history.last().copied().unwrap_or(f64::NAN),
                history,
            });
        }
        term = ws.sweep(&term);
        iterations += 1;
        let sups = GoursatWorkspace::sups(&term);
        let change = term.iter().map(|a| max_abs(a)).fold(0.0, f64::max);
        if !change.is_finite() {
            return Err(Error::NonFinite {
                stage: "goursat iterate",
                step: iterations,
            });
        }
        per_iter_sup.push(sups);
        history.push(change);
        for (acc, t) in sum.iter_mut().zip(&term) {
            for (a, v) in acc.iter_mut().zip(t) {
                *a += v;
            }
        }
        if change < opts.tol {
            break;
        }
    }

    let image = ws.sweep(&sum);
    let mut defect = 0.0_f64;
    for a in 0..NARR {
        for k in 0..sum[a].len() {
            defect = defect.max((ws.term0[a][k] + image[a][k] - sum[a][k]).abs());
        }
    }

    let (m, kconst) = ws.bound_constants();
    let l = sub.length;
    let tri = |f: &dyn Fn(usize) -> f64| ws.to_triangle(l, f);
    Ok(GoursatSolution {
        k: tri(&|k| sum[G][k]),
        s: tri(&|k| sum[S][k]),
        k_x: tri(&|k| sum[GZ][k] + sum[GE][k]),
        s_x: tri(&|k| sum[SZ][k] + sum[SE][k]),
        s_y: tri(&|k| sum[SZ][k] - sum[SE][k]),
        s_yy: tri(&|k| sum[SZZ][k] - 2.0 * sum[SZE][k] + sum[SEE][k]),
        bound: IterationBound {
            m,
            k: kconst,
            delta: l,
            eta_max: l,
            per_iter_sup,
        },
        iterations,
        history,
        fixed_point_defect: defect,
    })
}
