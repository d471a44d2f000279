//! Explicit Iwasawa factors of `exp(zD)`: the positive part `Q = Q₀ Q̃`,
//! the abelian factor `exp(β₁D + β₂L₀)`, and the extended frame
//! `𝔽(z, λ) = exp(zD − β₁D − β₂L₀) Q⁻¹`.
//!
//! `Q̃` and the `β` integrands have the denominator
//! `č = λ³ψ̄ − λ⁻³ψ − e^u u'`, which vanishes somewhere on every period
//! when `λ⁻³ψ` is real. Those points form the singular locus; the
//! eigenbasis route of [`extended_frame`] is defined everywhere.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::immersion::LiftEvaluator;
use crate::linalg3::{outer, ComplexMatrix3, ComplexVector3, C64, I, ONE, ZERO};
use crate::metric::{max_w_prime, metric_at};
use crate::potential::{commutant_l0, eigensystem, on_circle, DerivedConstants, EigenSystem};
use crate::quadrature::{integrate, kronrod15, QuadOptions};

/// Relative size of `|č|` below which a point counts as singular.
pub const SINGULAR_TOL: f64 = 1e-9;

/// How the scalar normalizer `κ` (with `det Q̃ = 1`) is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KappaBranch {
    /// `κ = κ₀ (č/č₀)^{2/3}` with the principal power of the ratio. On the
    /// unit circle `č₀` is imaginary and the ratio `1 − w'/č₀` stays on a
    /// vertical line through 1, so this branch is continuous in `y` and
    /// gives `Q̃(0) = I`.
    #[default]
    Continuous,
    /// Principal cube root of `λ⁹ det M`. Still `det Q̃ = 1`, but off by a
    /// cube root of unity in general. Debug only.
    PrincipalCubeRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FrameRoute {
    /// Columns built from the closed-form lift and its derivatives.
    #[default]
    Eigenbasis,
    /// The explicit Iwasawa factorization.
    Iwasawa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IwasawaFactors {
    pub y: f64,
    pub lambda: C64,
    pub q0: ComplexMatrix3,
    pub qtilde: ComplexMatrix3,
    pub beta1: C64,
    pub beta2: C64,
    pub l0: ComplexMatrix3,
}

impl IwasawaFactors {
    pub fn q(&self) -> ComplexMatrix3 {
        self.q0 * self.qtilde
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSample {
    pub z: C64,
    pub lambda: C64,
    pub f: ComplexMatrix3,
}

/// The `λ`-independent pieces `U₋₁, U₀, V₀, V₁` of the Maurer–Cartan form.
#[derive(Debug, Clone, Copy)]
pub struct MaurerCartanParts {
    pub u_m1: ComplexMatrix3,
    pub u0: ComplexMatrix3,
    pub v0: ComplexMatrix3,
    pub v1: ComplexMatrix3,
}

pub fn maurer_cartan_parts(c: &DerivedConstants, y: f64) -> MaurerCartanParts {
    let m = metric_at(c, y);
    let e = C64::new(m.w.sqrt(), 0.0);
    let psi = c.psi;
    let mut u_m1 = ComplexMatrix3::zero();
    u_m1[(0, 2)] = I * e;
    u_m1[(1, 0)] = -I * psi / m.w;
    u_m1[(2, 1)] = I * e;
    let mut v1 = ComplexMatrix3::zero();
    v1[(0, 1)] = -I * psi.conj() / m.w;
    v1[(1, 2)] = I * e;
    v1[(2, 0)] = I * e;
    let uz = -0.5 * I * m.u_prime;
    let uzb = 0.5 * I * m.u_prime;
    MaurerCartanParts {
        u_m1,
        u0: ComplexMatrix3::diag([uz / 2.0, -uz / 2.0, ZERO]),
        v0: ComplexMatrix3::diag([-uzb / 2.0, uzb / 2.0, ZERO]),
        v1,
    }
}

/// `A_λ = λ⁻¹U₋₁ + U₀ + V₀ + λV₁ = 𝔽⁻¹ ∂_x 𝔽`.
pub fn a_lambda(c: &DerivedConstants, y: f64, lambda: C64) -> ComplexMatrix3 {
    let p = maurer_cartan_parts(c, y);
    p.u_m1.scale(lambda.inv()) + p.u0 + p.v0 + p.v1.scale(lambda)
}

/// `B_λ = i(λ⁻¹U₋₁ + U₀ − V₀ − λV₁) = 𝔽⁻¹ ∂_y 𝔽`.
pub fn b_lambda(c: &DerivedConstants, y: f64, lambda: C64) -> ComplexMatrix3 {
    let p = maurer_cartan_parts(c, y);
    (p.u_m1.scale(lambda.inv()) + p.u0 - p.v0 - p.v1.scale(lambda)).scale(I)
}

/// `Ω(y, λ)`, the conjugate `Q D Q⁻¹` of the potential.
pub fn omega_matrix(c: &DerivedConstants, y: f64, lambda: C64) -> ComplexMatrix3 {
    let m = metric_at(c, y);
    let e = C64::new(m.w.sqrt(), 0.0);
    let li = lambda.inv();
    let psi = c.psi;
    ComplexMatrix3([
        [-0.5 * I * m.u_prime, -I * lambda * psi.conj() / m.w, I * li * e],
        [-I * li * psi / m.w, 0.5 * I * m.u_prime, I * lambda * e],
        [I * lambda * e, I * li * e, ZERO],
    ])
}

fn c_check0(c: &DerivedConstants, lambda: C64) -> C64 {
    lambda.powi(3) * c.psi.conj() - c.psi * lambda.powi(-3)
}

fn c_check(c: &DerivedConstants, lambda: C64, w_prime: f64) -> C64 {
    c_check0(c, lambda) - w_prime
}

fn singular_scale(c: &DerivedConstants, lambda: C64) -> f64 {
    let n3 = lambda.norm().powi(3);
    c.psi.norm() * (n3 + 1.0 / n3) + max_w_prime(c)
}

/// The matrix `M` with `Q̃ = (λ³/κ) M`, and `č`.
fn m_matrix(c: &DerivedConstants, y: f64, lambda: C64) -> (ComplexMatrix3, C64) {
    let m = metric_at(c, y);
    let (w, u1) = (m.w, m.u_prime);
    let psi = c.psi;
    let ps = psi.conj();
    let a = c.a;
    let a2 = a.norm_sqr();
    let l3 = lambda.powi(3);
    let lm3 = lambda.powi(-3);
    let p = -a2 * u1 / 2.0 + l3 * ps * a2 / w - psi * lm3;
    let q = (a / (lambda * lambda * a.conj())) * (u1 / 2.0 * a2 - l3 * ps / w * (a2 - w));
    let s = (lambda * lambda / (a * a)) * (a2 * u1 / 2.0 * w + psi * lm3 * (a2 - w));
    let t = (-a2 * u1 / 2.0 * w + l3 * ps * w - psi * lm3 * a2) / a2;
    let v1 = -2.0 * I / lambda * a * (a2 - w);
    let v2 = -2.0 * I * lambda / a * w * (a2 - w);
    let cc = c_check(c, lambda, m.w_prime);
    (ComplexMatrix3([[p, q, v1], [s, t, v2], [ZERO, ZERO, cc]]), cc)
}

/// `(Q₀, Q̃)` at `(y, λ)`; fails on the singular locus `č = 0`.
pub fn q_factor(c: &DerivedConstants, y: f64, lambda: C64, branch: KappaBranch) -> Result<(ComplexMatrix3, ComplexMatrix3)> {
    let scale = singular_scale(c, lambda);
    let (mm, cc) = m_matrix(c, y, lambda);
    let cc0 = c_check0(c, lambda);
    if cc.norm() < SINGULAR_TOL * scale {
        return Err(Error::SingularLocus { y, what: "č = λ³ψ̄ − λ⁻³ψ − e^u u' vanishes" });
    }
    let kappa = match branch {
        KappaBranch::Continuous => {
            if cc0.norm() < SINGULAR_TOL * scale {
                return Err(Error::SingularLocus { y: 0.0, what: "č(0) = λ³ψ̄ − λ⁻³ψ vanishes" });
            }
            let kappa0 = lambda.powi(6) * c.psi.conj() - c.psi;
            kappa0 * (cc / cc0).powf(2.0 / 3.0)
        }
        KappaBranch::PrincipalCubeRoot => (lambda.powi(9) * mm.det()).powf(1.0 / 3.0),
    };
    if kappa.norm() < SINGULAR_TOL * scale {
        return Err(Error::SingularLocus { y, what: "κ vanishes" });
    }
    let m = metric_at(c, y);
    let sw = m.w.sqrt();
    let q0 = ComplexMatrix3::diag([I / c.a * sw, -I * c.a / sw, ONE]);
    Ok((q0, mm.scale(lambda.powi(3) / kappa)))
}

/// Integrands of `β₁` and `β₂` at `s`; NaN on the singular locus.
fn beta_integrands(c: &DerivedConstants, lambda: C64, s: f64, tol: f64) -> (C64, C64) {
    let m = metric_at(c, s);
    let den = c_check(c, lambda, m.w_prime);
    if den.norm() < tol {
        let nan = C64::new(f64::NAN, f64::NAN);
        return (nan, nan);
    }
    let num1 = 2.0 * I * lambda.powi(3) * c.psi.conj() - I * m.w_prime;
    (num1 / den, C64::new(2.0 * m.w, 0.0) / den)
}

/// Fails if `č` vanishes on `[y0, y1]`. Since `w'` is real, `č` can only
/// vanish when `Im č₀ ≈ 0`; then sign changes of `Re č` are searched.
fn check_path(c: &DerivedConstants, lambda: C64, y0: f64, y1: f64) -> Result<()> {
    let scale = singular_scale(c, lambda);
    let cc0 = c_check0(c, lambda);
    if cc0.im.abs() > SINGULAR_TOL * scale {
        return Ok(());
    }
    let (lo, hi) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
    let n = (256.0 * ((hi - lo) / c.t).max(1.0)).ceil() as usize;
    let f = |s: f64| (cc0 - metric_at(c, s).w_prime).re;
    let mut prev = f(lo);
    for i in 0..=n {
        let s = lo + (hi - lo) * i as f64 / n as f64;
        let v = f(s);
        if v.abs() < SINGULAR_TOL * scale || v.signum() != prev.signum() {
            return Err(Error::SingularLocus { y: s, what: "č vanishes on the integration path" });
        }
        prev = v;
    }
    Ok(())
}

fn beta_raw(c: &DerivedConstants, y0: f64, y1: f64, lambda: C64, opts: QuadOptions) -> Result<(C64, C64)> {
    let tol = SINGULAR_TOL * singular_scale(c, lambda);
    let b1 = integrate(|s| beta_integrands(c, lambda, s, tol).0, y0, y1, opts)?;
    let b2 = integrate(|s| beta_integrands(c, lambda, s, tol).1, y0, y1, opts)?;
    Ok((b1, b2))
}

/// `(β₁(y), β₂(y))`: integrals from 0 of `(2iλ³ψ̄ − iw')/č` and `2w/č`.
/// Uses the `2T`-periodicity of the integrands to reduce long paths.
pub fn beta_integrals(c: &DerivedConstants, y: f64, lambda: C64) -> Result<(C64, C64)> {
    if y == 0.0 {
        return Ok((ZERO, ZERO));
    }
    let opts = QuadOptions::with_tolerance(1e-11);
    let period = 2.0 * c.t;
    let n = (y / period).trunc();
    let rem = y - n * period;
    if n == 0.0 {
        check_path(c, lambda, 0.0, y)?;
        return beta_raw(c, 0.0, y, lambda, opts);
    }
    check_path(c, lambda, 0.0, period)?;
    let (p1, p2) = beta_raw(c, 0.0, period, lambda, opts)?;
    let (r1, r2) = if rem == 0.0 { (ZERO, ZERO) } else { beta_raw(c, 0.0, rem, lambda, opts)? };
    Ok((p1 * n + r1, p2 * n + r2))
}

/// Shared store of `β(2T, λ)` keyed by the bit pattern of `λ`.
#[derive(Debug)]
pub struct BetaCache {
    c: DerivedConstants,
    map: RwLock<HashMap<(u64, u64), (C64, C64)>>,
}

impl BetaCache {
    pub fn new(c: DerivedConstants) -> Self {
        BetaCache {
            c,
            map: RwLock::new(HashMap::new()),
        }
    }

    pub fn period(&self, lambda: C64) -> Result<(C64, C64)> {
        let key = (lambda.re.to_bits(), lambda.im.to_bits());
        if let Some(v) = self.map.read().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = beta_integrals(&self.c, 2.0 * self.c.t, lambda)?;
        self.map.write().expect("cache lock").insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `β` near a base point `y0`, with short offsets integrated by one fixed
/// Kronrod panel. Smooth in `y`, so usable under finite differences.
#[derive(Debug, Clone, Copy)]
pub struct BetaPatch {
    c: DerivedConstants,
    lambda: C64,
    y0: f64,
    base: (C64, C64),
    tol: f64,
}

impl BetaPatch {
    pub fn new(c: &DerivedConstants, y0: f64, lambda: C64) -> Result<Self> {
        Ok(BetaPatch {
            c: *c,
            lambda,
            y0,
            base: beta_integrals(c, y0, lambda)?,
            tol: SINGULAR_TOL * singular_scale(c, lambda),
        })
    }

    pub fn eval(&self, y: f64) -> Result<(C64, C64)> {
        let (c, l, tol) = (&self.c, self.lambda, self.tol);
        let d1 = kronrod15(|s| beta_integrands(c, l, s, tol).0, self.y0, y)?;
        let d2 = kronrod15(|s| beta_integrands(c, l, s, tol).1, self.y0, y)?;
        Ok((self.base.0 + d1, self.base.1 + d2))
    }
}

/// `Σ_j exp(g_j) l_j l_j†`, the function `exp(sD + tL₀)` on the eigenbasis
/// with `g_j = s·id_j + t·(2β/3 − d_j²)`.
pub fn abelian_exp(c: &DerivedConstants, es: &EigenSystem, s: C64, t: C64) -> ComplexMatrix3 {
    let mut m = ComplexMatrix3::zero();
    for j in 0..3 {
        let d = es.d[j];
        let g = s * I * d + t * (2.0 * c.beta / 3.0 - d * d);
        m = m + outer(&es.l[j], &es.l[j]).scale(g.exp());
    }
    m
}

/// Full Iwasawa data at `(y, λ)` for `|λ| = 1`.
pub fn iwasawa_factors(c: &DerivedConstants, y: f64, lambda: C64, branch: KappaBranch) -> Result<IwasawaFactors> {
    let (q0, qtilde) = q_factor(c, y, lambda, branch)?;
    let (beta1, beta2) = beta_integrals(c, y, lambda)?;
    Ok(IwasawaFactors {
        y,
        lambda,
        q0,
        qtilde,
        beta1,
        beta2,
        l0: commutant_l0(c, lambda),
    })
}

/// `U₊ = Q exp(β₁D + β₂L₀)` from given `β` values.
pub fn u_plus(c: &DerivedConstants, es: &EigenSystem, y: f64, betas: (C64, C64), branch: KappaBranch) -> Result<ComplexMatrix3> {
    let (q0, qt) = q_factor(c, y, es.lambda, branch)?;
    Ok(q0 * qt * abelian_exp(c, es, betas.0, betas.1))
}

/// `exp(zD − β₁D − β₂L₀) Q⁻¹` from precomputed pieces.
pub fn frame_from_parts(
    c: &DerivedConstants,
    es: &EigenSystem,
    z: C64,
    betas: (C64, C64),
    q0: &ComplexMatrix3,
    qt: &ComplexMatrix3,
) -> Result<ComplexMatrix3> {
    let e = abelian_exp(c, es, z - betas.0, -betas.1);
    Ok(e * qt.inverse()? * q0.inverse()?)
}

/// Extended frame `𝔽(z, λ)` for `|λ| = 1`, with `𝔽(0, λ) = I` exactly.
pub fn extended_frame(c: &DerivedConstants, z: C64, lambda: C64, route: FrameRoute) -> Result<FrameSample> {
    extended_frame_with(c, z, lambda, route, KappaBranch::Continuous)
}

pub fn extended_frame_with(
    c: &DerivedConstants,
    z: C64,
    lambda: C64,
    route: FrameRoute,
    branch: KappaBranch,
) -> Result<FrameSample> {
    if !on_circle(lambda) {
        return Err(Error::Domain(format!("extended frame needs |lambda| = 1, got {}", lambda.norm())));
    }
    if z == ZERO {
        return Ok(FrameSample {
            z,
            lambda,
            f: ComplexMatrix3::identity(),
        });
    }
    let f = match route {
        FrameRoute::Iwasawa => {
            let es = eigensystem(c, lambda)?;
            let y = z.im;
            let (q0, qt) = q_factor(c, y, lambda, branch)?;
            let betas = beta_integrals(c, y, lambda)?;
            frame_from_parts(c, &es, z, betas, &q0, &qt)?
        }
        FrameRoute::Eigenbasis => {
            let ev = LiftEvaluator::new(c, lambda)?;
            ev.frame(z.re, z.im)?
        }
    };
    Ok(FrameSample { z, lambda, f })
}

/// Frame columns from a lift jet: `(−iλe^{−u/2}F_z, −iλ⁻¹e^{−u/2}F_z̄, F)`.
pub fn frame_from_jet(lambda: C64, w: f64, f: &ComplexVector3, fx: &ComplexVector3, fy: &ComplexVector3) -> ComplexMatrix3 {
    let fz = 0.5 * (*fx - I * *fy);
    let fzb = 0.5 * (*fx + I * *fy);
    let s = 1.0 / w.sqrt();
    let c1 = (-I * lambda * s) * fz;
    let c2 = (-I * lambda.inv() * s) * fzb;
    ComplexMatrix3::from_columns([c1, c2, *f])
}
