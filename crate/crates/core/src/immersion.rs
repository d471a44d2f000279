//! Horizontal lifts `F(x, y, λ) ∈ S⁵` in closed form, their projection to
//! an affine chart of CP², and finite-difference checks of the structure
//! equations.
//!
//! Both closed forms write `F = Σ_j p_j(y) e^{i d_j x} l_j` in the eigenbasis
//! of `D(λ)`:
//!
//! * non-real `λ⁻³ψ`: `p_j = h_j e^{iG_j}` with
//!   `h_j² = (d_j w − Re)/(d_j³ − Re)` and `G_j = ∫ d_j Im/(d_j w − Re)`;
//! * real `λ⁻³ψ`: `p_j ∈ {c₁ sn, c₂ cn, c₃ dn}` evaluated at `ry`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::jacobi;
use crate::error::{Error, Result};
use crate::iwasawa::{extended_frame, frame_from_jet, b_lambda, FrameRoute};
use crate::linalg3::{herm_inner, matexp_skew, ComplexMatrix3, ComplexVector3, C64, I, ZERO};
use crate::metric::metric_at;
use crate::potential::{eigensystem, potential_matrix, DerivedConstants, EigenSystem, Regime, SurfaceClass};
use crate::quadrature::{integrate_real, kronrod15, QuadOptions};

/// Chart coordinates are undefined when `|F₃|` is at most this.
pub const CHART_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftSample {
    pub x: f64,
    pub y: f64,
    pub lambda: C64,
    pub f: ComplexVector3,
}

/// Affine chart `(F₁/F₃, F₂/F₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub w1: C64,
    pub w2: C64,
}

/// `F` together with its first partials and the metric at `y`.
#[derive(Debug, Clone, Copy)]
pub struct LiftJet {
    pub f: ComplexVector3,
    pub fx: ComplexVector3,
    pub fy: ComplexVector3,
    pub w: f64,
}

#[derive(Debug, Clone, Copy)]
enum Profile {
    NonReal { g_period: [f64; 3] },
    /// For each eigen index: which of sn/cn/dn (0/1/2) and its coefficient.
    Real { parts: [(usize, f64); 3] },
}

/// Closed-form lift for one surface and one `λ` on the unit circle.
#[derive(Debug, Clone, Copy)]
pub struct LiftEvaluator {
    c: DerivedConstants,
    es: EigenSystem,
    rho: C64,
    profile: Profile,
}

/// Coefficients `c₁, c₂, c₃` of the real closed form.
pub fn real_coefficients(c: &DerivedConstants) -> [f64; 3] {
    let (a1, a2, a3) = (c.a1, c.a2, c.a3);
    let p2 = c.psi_abs2();
    [
        a1 * ((a1 - a2) / (a1 * a1 * a1 - p2)).sqrt(),
        a2 * ((a1 - a2) / (p2 - a2 * a2 * a2)).sqrt(),
        a3 * ((a1 + a3) / (p2 + a3 * a3 * a3)).sqrt(),
    ]
}

fn g_integrand(d: f64, w: f64, rho: C64) -> f64 {
    d * rho.im / (d * w - rho.re)
}

impl LiftEvaluator {
    pub fn new(c: &DerivedConstants, lambda: C64) -> Result<Self> {
        let es = eigensystem(c, lambda)?;
        Self::with_eigensystem(c, es)
    }

    pub fn with_eigensystem(c: &DerivedConstants, es: EigenSystem) -> Result<Self> {
        let rho = c.rho(es.lambda);
        let profile = match c.regime(es.lambda) {
            Regime::Hyperplane => {
                return Err(Error::Degenerate {
                    class: SurfaceClass::HyperplaneDegenerateLambda,
                })
            }
            Regime::Real => {
                let r = rho.re;
                let targets = [r / c.a1, r / c.a2, -r / c.a3];
                let coef = real_coefficients(c);
                let mut parts = [(usize::MAX, 0.0); 3];
                for (which, &t) in targets.iter().enumerate() {
                    let j = es.nearest(t);
                    if parts[j].0 != usize::MAX {
                        return Err(Error::Precondition("eigenvalues do not separate the sn/cn/dn terms".into()));
                    }
                    parts[j] = (which, coef[which]);
                }
                Profile::Real { parts }
            }
            Regime::NonReal => {
                let mut ev = LiftEvaluator {
                    c: *c,
                    es,
                    rho,
                    profile: Profile::NonReal { g_period: [0.0; 3] },
                };
                let g_period = ev.g_raw(0.0, 2.0 * c.t)?;
                ev.profile = Profile::NonReal { g_period };
                return Ok(ev);
            }
        };
        Ok(LiftEvaluator { c: *c, es, rho, profile })
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.c
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.es
    }

    pub fn lambda(&self) -> C64 {
        self.es.lambda
    }

    pub fn regime(&self) -> Regime {
        match self.profile {
            Profile::NonReal { .. } => Regime::NonReal,
            Profile::Real { .. } => Regime::Real,
        }
    }

    fn g_raw(&self, y0: f64, y1: f64) -> Result<[f64; 3]> {
        // Close to the real regime the integrands peak sharply and their
        // rounding noise sets a floor near 1e-12.
        let opts = QuadOptions {
            abs_tol: 1e-11,
            rel_tol: 1e-13,
            max_intervals: 10_000,
        };
        let mut g = [0.0; 3];
        for (j, gj) in g.iter_mut().enumerate() {
            let d = self.es.d[j];
            *gj = integrate_real(|s| g_integrand(d, metric_at(&self.c, s).w, self.rho), y0, y1, opts)?;
        }
        Ok(g)
    }

    /// `G_j(2T)` (non-real regime only).
    pub fn g_period(&self) -> Result<[f64; 3]> {
        match self.profile {
            Profile::NonReal { g_period } => Ok(g_period),
            Profile::Real { .. } => Err(Error::Regime("G_j is only defined for non-real λ⁻³ψ")),
        }
    }

    /// `G_j(y)`, reduced with `G_j(y + 2T) = G_j(y) + G_j(2T)`.
    pub fn g_integrals(&self, y: f64) -> Result<[f64; 3]> {
        let gp = self.g_period()?;
        let period = 2.0 * self.c.t;
        let n = (y / period).floor();
        let rem = y - n * period;
        let g = self.g_raw(0.0, rem)?;
        Ok([0, 1, 2].map(|j| n * gp[j] + g[j]))
    }

    /// Coefficients `p_j(y)` and `p_j'(y)`; `g` carries `G_j(y)` in the
    /// non-real regime and is ignored otherwise.
    fn profile_at(&self, y: f64, g: &[f64; 3]) -> Result<(f64, [C64; 3], [C64; 3])> {
        let m = metric_at(&self.c, y);
        let mut p = [ZERO; 3];
        let mut dp = [ZERO; 3];
        match self.profile {
            Profile::NonReal { .. } => {
                let (re, im) = (self.rho.re, self.rho.im);
                for j in 0..3 {
                    let d = self.es.d[j];
                    let num = d * m.w - re;
                    let h2 = num / (d * d * d - re);
                    if h2 < -1e-12 {
                        return Err(Error::Precondition(format!(
                            "h_{}² = {h2:e} is negative at y = {y}",
                            j + 1
                        )));
                    }
                    p[j] = C64::from_polar(h2.max(0.0).sqrt(), g[j]);
                    dp[j] = d * C64::new(m.w_prime, 2.0 * im) / (2.0 * num) * p[j];
                }
            }
            Profile::Real { parts } => {
                let t = jacobi(self.c.r * y, self.c.k)?;
                let r = self.c.r;
                let m2 = self.c.k.parameter();
                let vals = [t.sn, t.cn, t.dn];
                let ders = [t.cn * t.dn, -t.sn * t.dn, -m2 * t.sn * t.cn];
                for j in 0..3 {
                    let (which, coef) = parts[j];
                    p[j] = C64::new(coef * vals[which], 0.0);
                    dp[j] = C64::new(coef * r * ders[which], 0.0);
                }
            }
        }
        Ok((m.w, p, dp))
    }

    fn assemble(&self, x: f64, w: f64, p: &[C64; 3], dp: &[C64; 3]) -> LiftJet {
        let mut f = ComplexVector3::zero();
        let mut fx = ComplexVector3::zero();
        let mut fy = ComplexVector3::zero();
        for j in 0..3 {
            let d = self.es.d[j];
            let e = C64::from_polar(1.0, d * x);
            f += (p[j] * e) * self.es.l[j];
            fx += (I * d * p[j] * e) * self.es.l[j];
            fy += (dp[j] * e) * self.es.l[j];
        }
        LiftJet { f, fx, fy, w }
    }

    fn g_for(&self, y: f64) -> Result<[f64; 3]> {
        match self.profile {
            Profile::NonReal { .. } => self.g_integrals(y),
            Profile::Real { .. } => Ok([0.0; 3]),
        }
    }

    pub fn jet(&self, x: f64, y: f64) -> Result<LiftJet> {
        let g = self.g_for(y)?;
        let (w, p, dp) = self.profile_at(y, &g)?;
        Ok(self.assemble(x, w, &p, &dp))
    }

    pub fn lift(&self, x: f64, y: f64) -> Result<LiftSample> {
        Ok(LiftSample {
            x,
            y,
            lambda: self.lambda(),
            f: self.jet(x, y)?.f,
        })
    }

    /// Extended frame `𝔽(x + iy)` from the lift and its derivatives.
    pub fn frame(&self, x: f64, y: f64) -> Result<ComplexMatrix3> {
        let j = self.jet(x, y)?;
        Ok(frame_from_jet(self.lambda(), j.w, &j.f, &j.fx, &j.fy))
    }

    /// Evaluator for `y` near `y0` whose `G_j` offsets come from one fixed
    /// Kronrod panel, so that finite differences see a smooth function.
    pub fn patch(&self, y0: f64) -> Result<LiftPatch<'_>> {
        Ok(LiftPatch {
            ev: self,
            y0,
            g0: self.g_for(y0)?,
        })
    }

    /// `p_j(y)` and `p_j'(y)`.
    pub fn coefficients(&self, y: f64) -> Result<([C64; 3], [C64; 3])> {
        let g = self.g_for(y)?;
        let (_, p, dp) = self.profile_at(y, &g)?;
        Ok((p, dp))
    }
}

pub struct LiftPatch<'a> {
    ev: &'a LiftEvaluator,
    y0: f64,
    g0: [f64; 3],
}

impl LiftPatch<'_> {
    /// A row evaluator at fixed `y`: `F(x, y)` for many `x` cheaply.
    pub fn row(&self, y: f64) -> Result<LiftRow<'_>> {
        let g = match self.ev.profile {
            Profile::NonReal { .. } => {
                let mut g = self.g0;
                if y != self.y0 {
                    for (j, gj) in g.iter_mut().enumerate() {
                        let d = self.ev.es.d[j];
                        let c = &self.ev.c;
                        let rho = self.ev.rho;
                        *gj += kronrod15(|s| C64::new(g_integrand(d, metric_at(c, s).w, rho), 0.0), self.y0, y)?.re;
                    }
                }
                g
            }
            Profile::Real { .. } => [0.0; 3],
        };
        let (w, p, dp) = self.ev.profile_at(y, &g)?;
        Ok(LiftRow { ev: self.ev, w, p, dp })
    }
}

pub struct LiftRow<'a> {
    ev: &'a LiftEvaluator,
    pub w: f64,
    p: [C64; 3],
    dp: [C64; 3],
}

impl LiftRow<'_> {
    pub fn jet(&self, x: f64) -> LiftJet {
        self.ev.assemble(x, self.w, &self.p, &self.dp)
    }

    pub fn f(&self, x: f64) -> ComplexVector3 {
        self.jet(x).f
    }
}

/// Non-real closed form. Fails with a regime error unless `λ⁻³ψ` is
/// neither real nor purely imaginary.
pub fn lift_nonreal(c: &DerivedConstants, es: &EigenSystem, x: f64, y: f64) -> Result<LiftSample> {
    match c.regime(es.lambda) {
        Regime::NonReal => LiftEvaluator::with_eigensystem(c, *es)?.lift(x, y),
        Regime::Real => Err(Error::Regime("λ⁻³ψ is real; use the real closed form")),
        Regime::Hyperplane => Err(Error::Degenerate {
            class: SurfaceClass::HyperplaneDegenerateLambda,
        }),
    }
}

/// Real closed form `c₁ sn e^{id₁x} l₁ + c₂ cn e^{id₂x} l₂ + c₃ dn e^{id₃x} l₃`.
pub fn lift_real(c: &DerivedConstants, es: &EigenSystem, x: f64, y: f64) -> Result<LiftSample> {
    match c.regime(es.lambda) {
        Regime::Real => LiftEvaluator::with_eigensystem(c, *es)?.lift(x, y),
        _ => Err(Error::Regime("λ⁻³ψ is not real; use the non-real closed form")),
    }
}

/// `𝔽(z, λ) e₃` from the Iwasawa route.
pub fn lift_via_frame(c: &DerivedConstants, z: C64, lambda: C64) -> Result<LiftSample> {
    let f = extended_frame(c, z, lambda, FrameRoute::Iwasawa)?.f;
    Ok(LiftSample {
        x: z.re,
        y: z.im,
        lambda,
        f: f.column(2),
    })
}

/// `𝔽(iy)` from `d𝔽/dy = 𝔽 B_λ` by classical RK4 with at most `h_max` steps.
/// An independent reference for the closed forms.
pub fn frame_ode(c: &DerivedConstants, y: f64, lambda: C64, h_max: f64) -> ComplexMatrix3 {
    let n = ((y.abs() / h_max).ceil() as usize).max(1);
    let h = y / n as f64;
    let mut f = ComplexMatrix3::identity();
    let rhs = |f: &ComplexMatrix3, s: f64| *f * b_lambda(c, s, lambda);
    let sc = |m: ComplexMatrix3, t: f64| m.scale(C64::new(t, 0.0));
    for i in 0..n {
        let s = i as f64 * h;
        let k1 = rhs(&f, s);
        let k2 = rhs(&(f + sc(k1, h / 2.0)), s + h / 2.0);
        let k3 = rhs(&(f + sc(k2, h / 2.0)), s + h / 2.0);
        let k4 = rhs(&(f + sc(k3, h)), s + h);
        f = f + sc(k1 + sc(k2, 2.0) + sc(k3, 2.0) + k4, h / 6.0);
    }
    f
}

/// `exp(xD) 𝔽(iy) e₃` with the frame from [`frame_ode`].
pub fn lift_via_ode(c: &DerivedConstants, x: f64, y: f64, lambda: C64) -> Result<LiftSample> {
    let col = frame_ode(c, y, lambda, 1e-3).column(2);
    let f = matexp_skew(&potential_matrix(c, lambda), x)?.mul_vec(&col);
    Ok(LiftSample { x, y, lambda, f })
}

/// `|herm_inner(F_a, F_b)|`, equal to 1 iff the unit vectors agree projectively.
pub fn projective_overlap(a: &ComplexVector3, b: &ComplexVector3) -> f64 {
    herm_inner(a, b).norm() / (a.norm() * b.norm())
}

pub fn project_chart(s: &LiftSample) -> Result<ChartPoint> {
    let f3 = s.f[2];
    if f3.norm() <= CHART_TOL {
        return Err(Error::Chart(f3.norm()));
    }
    Ok(ChartPoint {
        w1: s.f[0] / f3,
        w2: s.f[1] / f3,
    })
}

/// Rectangular sampling grid; `nx, ny ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Domain(format!("grid needs nx, ny >= 2 (got {} x {})", self.nx, self.ny)));
        }
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !ok || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::Domain("grid ranges must be finite and increasing".into()));
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * i as f64 / (self.nx - 1) as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * j as f64 / (self.ny - 1) as f64
    }
}

/// Lift samples in row-major order (`y` outer, `x` inner).
#[derive(Debug, Clone)]
pub struct Grid {
    pub spec: GridSpec,
    pub samples: Vec<LiftSample>,
    pub w: Vec<f64>,
}

impl Grid {
    pub fn at(&self, i: usize, j: usize) -> &LiftSample {
        &self.samples[j * self.spec.nx + i]
    }
}

pub fn sample_grid(c: &DerivedConstants, lambda: C64, spec: &GridSpec) -> Result<Grid> {
    spec.validate()?;
    let ev = LiftEvaluator::new(c, lambda)?;
    sample_grid_with(&ev, spec)
}

pub fn sample_grid_with(ev: &LiftEvaluator, spec: &GridSpec) -> Result<Grid> {
    spec.validate()?;
    let rows: Result<Vec<(f64, Vec<LiftSample>)>> = (0..spec.ny)
        .into_par_iter()
        .map(|j| {
            let y = spec.y(j);
            let patch = ev.patch(y)?;
            let row = patch.row(y)?;
            let samples = (0..spec.nx)
                .map(|i| {
                    let x = spec.x(i);
                    LiftSample {
                        x,
                        y,
                        lambda: ev.lambda(),
                        f: row.f(x),
                    }
                })
                .collect();
            Ok((row.w, samples))
        })
        .collect();
    let rows = rows?;
    let mut samples = Vec::with_capacity(spec.nx * spec.ny);
    let mut w = Vec::with_capacity(spec.nx * spec.ny);
    for (wr, s) in rows {
        w.extend(std::iter::repeat(wr).take(s.len()));
        samples.extend(s);
    }
    Ok(Grid { spec: *spec, samples, w })
}

// ---------------------------------------------------------------------------
// Finite-difference geometry checks

const D1: [f64; 7] = [-1.0 / 60.0, 9.0 / 60.0, -45.0 / 60.0, 0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0];
const D2: [f64; 7] = [
    2.0 / 180.0,
    -27.0 / 180.0,
    270.0 / 180.0,
    -490.0 / 180.0,
    270.0 / 180.0,
    -27.0 / 180.0,
    2.0 / 180.0,
];
const D3: [f64; 7] = [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0];

fn stencil(vals: &[ComplexVector3; 7], coef: &[f64; 7], h: f64) -> ComplexVector3 {
    let mut s = ComplexVector3::zero();
    for k in 0..7 {
        s += coef[k] * vals[k];
    }
    (1.0 / h) * s
}

/// Maximum residuals over a grid; see [`verify_geometry`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    /// `|F_z·F̄|, |F_z̄·F̄|`.
    pub horizontality: f64,
    /// `|F_z·conj(F_z) − e^u|, |F_z·conj(F_z̄)|`.
    pub conformality: f64,
    /// `|F_zz̄ + e^u F|`.
    pub laplace: f64,
    /// `|F_zz·conj(F_z̄) + iλ⁻³ψ|`.
    pub cubic_form: f64,
    /// `|∂x³F + β∂xF − 2i Re(λ⁻³ψ) F|`.
    pub x_ode: f64,
    /// `| |F| − 1 |`.
    pub sphere: f64,
    /// `|(d_j e^u − Re) p_j' − (w'/2 + i Im) d_j p_j|` with FD `p_j'` (non-real only).
    pub scalar_ode: f64,
    /// Grid points evaluated.
    pub points: usize,
    /// Grid points skipped because the lift could not be evaluated there.
    pub flagged: usize,
}

impl GeometryReport {
    fn merge(self, o: Self) -> Self {
        GeometryReport {
            horizontality: self.horizontality.max(o.horizontality),
            conformality: self.conformality.max(o.conformality),
            laplace: self.laplace.max(o.laplace),
            cubic_form: self.cubic_form.max(o.cubic_form),
            x_ode: self.x_ode.max(o.x_ode),
            sphere: self.sphere.max(o.sphere),
            scalar_ode: self.scalar_ode.max(o.scalar_ode),
            points: self.points + o.points,
            flagged: self.flagged + o.flagged,
        }
    }
}

/// Residuals of the structure equations at one point, by 7-point central
/// differences (step `h` for first and second derivatives, `h3` for `∂x³`).
pub fn geometry_at(ev: &LiftEvaluator, x: f64, y: f64, h: f64, h3: f64) -> Result<GeometryReport> {
    let patch = ev.patch(y)?;
    let mut rows = Vec::with_capacity(7);
    for k in 0..7 {
        rows.push(patch.row(y + (k as f64 - 3.0) * h)?);
    }
    let grid = |i: usize, k: usize| rows[k].f(x + (i as f64 - 3.0) * h);
    let center = rows[3].f(x);
    let w = rows[3].w;

    let xs: [ComplexVector3; 7] = std::array::from_fn(|i| grid(i, 3));
    let ys: [ComplexVector3; 7] = std::array::from_fn(|k| grid(3, k));
    let fx = stencil(&xs, &D1, h);
    let fy = stencil(&ys, &D1, h);
    let fxx = stencil(&xs, &D2, h * h);
    let fyy = stencil(&ys, &D2, h * h);
    let fx_rows: [ComplexVector3; 7] = std::array::from_fn(|k| {
        let v: [ComplexVector3; 7] = std::array::from_fn(|i| grid(i, k));
        stencil(&v, &D1, h)
    });
    let fxy = stencil(&fx_rows, &D1, h);
    let x3: [ComplexVector3; 7] = std::array::from_fn(|i| rows[3].f(x + (i as f64 - 3.0) * h3));
    let fxxx = stencil(&x3, &D3, h3 * h3 * h3);

    let fz = 0.5 * (fx - I * fy);
    let fzb = 0.5 * (fx + I * fy);
    let fzzb = 0.25 * (fxx + fyy);
    let fzz = 0.25 * (fxx - (2.0 * I) * fxy - fyy);
    let lam = ev.lambda();
    let c = ev.constants();
    let rho = c.rho(lam);

    let horizontality = herm_inner(&fz, &center).norm().max(herm_inner(&fzb, &center).norm());
    let conformality = (herm_inner(&fz, &fz).re - w)
        .abs()
        .max(herm_inner(&fz, &fzb).norm())
        .max((herm_inner(&fzb, &fzb).re - w).abs());
    let laplace = (fzzb + w * center).max_abs();
    let cubic_form = (herm_inner(&fzz, &fzb) + I * rho).norm();
    let x_ode = (fxxx + c.beta * fx - (2.0 * I * rho.re) * center).max_abs();
    let sphere = (center.norm() - 1.0).abs();

    let mut scalar_ode = 0.0;
    if ev.regime() == Regime::NonReal {
        let m = metric_at(c, y);
        let coef: [[C64; 3]; 7] = std::array::from_fn(|k| rows[k].p);
        for j in 0..3 {
            let d = ev.eigensystem().d[j];
            let vals: [C64; 7] = std::array::from_fn(|k| coef[k][j]);
            let dp = (0..7).map(|k| vals[k] * D1[k]).sum::<C64>() / h;
            let lhs = (d * m.w - rho.re) * dp;
            let rhs = C64::new(0.5 * m.w_prime, rho.im) * d * vals[3];
            scalar_ode = f64::max(scalar_ode, (lhs - rhs).norm());
        }
    }
    Ok(GeometryReport {
        horizontality,
        conformality,
        laplace,
        cubic_form,
        x_ode,
        sphere,
        scalar_ode,
        points: 1,
        flagged: 0,
    })
}

/// Finite-difference residual report over the interior of a grid. Points
/// where the lift cannot be evaluated are counted as flagged.
pub fn verify_geometry(ev: &LiftEvaluator, spec: &GridSpec) -> Result<GeometryReport> {
    spec.validate()?;
    let pts: Vec<(f64, f64)> = (0..spec.ny)
        .flat_map(|j| (0..spec.nx).map(move |i| (spec.x(i), spec.y(j))))
        .collect();
    let report = pts
        .par_iter()
        .map(|&(x, y)| match geometry_at(ev, x, y, 1e-3, 2e-3) {
            Ok(r) => r,
            Err(_) => GeometryReport {
                flagged: 1,
                ..Default::default()
            },
        })
        .reduce(GeometryReport::default, GeometryReport::merge);
    Ok(report)
}

/// `|[d_j w − Re][d_j² w + Re d_j − 2w²] − [w'²/4 + Im²] d_j|`, maximized over `j`.
pub fn factor_identity_residual(c: &DerivedConstants, es: &EigenSystem, y: f64) -> f64 {
    let m = metric_at(c, y);
    let rho = c.rho(es.lambda);
    es.d
        .iter()
        .map(|&d| {
            let lhs = (d * m.w - rho.re) * (d * d * m.w + rho.re * d - 2.0 * m.w * m.w);
            let rhs = (0.25 * m.w_prime * m.w_prime + rho.im * rho.im) * d;
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}
