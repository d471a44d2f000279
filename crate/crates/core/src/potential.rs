//! Surface parameters, the constants derived from them, the degree-one
//! potential `D(λ)` and its spectrum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::elliptic::{complete_k, Modulus};
use crate::error::{Error, Result};
use crate::linalg3::{herm_inner, null_vector, solve_depressed_cubic, ComplexMatrix3, ComplexVector3, C64, I, ZERO};

/// Relative threshold on `λ⁻³ψ` used to decide the real and purely
/// imaginary regimes.
pub const REGIME_TOL: f64 = 1e-9;

/// Relative threshold on `a₁ − |ψ|^{2/3}` for the flat case.
pub const FLAT_TOL: f64 = 1e-9;

/// The two scalars generating a surface: `a₁ = e^{u(0)}` and the constant
/// cubic-differential coefficient `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceParams {
    pub a1: f64,
    pub psi: C64,
}

impl SurfaceParams {
    pub fn new(a1: f64, psi: C64) -> Self {
        SurfaceParams { a1, psi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurfaceClass {
    Generic,
    FlatClifford,
    TotallyGeodesic,
    HyperplaneDegenerateLambda,
}

/// Which closed form applies at a given `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `λ⁻³ψ` neither real nor purely imaginary.
    NonReal,
    /// `λ⁻³ψ` real (to [`REGIME_TOL`]).
    Real,
    /// `λ⁻³ψ` purely imaginary: a zero eigenvalue, surface in a hyperplane.
    Hyperplane,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub a1: f64,
    pub psi: C64,
    pub beta: f64,
    pub a2: f64,
    pub a3: f64,
    pub k: Modulus,
    pub q2: f64,
    pub r: f64,
    /// Complete integral `K(k)`.
    pub kk: f64,
    /// Half period `T = K / r` of the metric.
    pub t: f64,
    pub a: C64,
    pub b: C64,
}

impl DerivedConstants {
    pub fn params(&self) -> SurfaceParams {
        SurfaceParams::new(self.a1, self.psi)
    }

    /// `λ⁻³ψ`.
    pub fn rho(&self, lambda: C64) -> C64 {
        self.psi * lambda.powi(-3)
    }

    /// Analytic continuation of `Re(λ⁻³ψ)` off the unit circle:
    /// `(λ⁻³ψ + λ³ψ̄) / 2`.
    pub fn rho_re(&self, lambda: C64) -> C64 {
        0.5 * (self.psi * lambda.powi(-3) + self.psi.conj() * lambda.powi(3))
    }

    pub fn psi_abs2(&self) -> f64 {
        self.psi.norm_sqr()
    }

    pub fn regime(&self, lambda: C64) -> Regime {
        regime_of(self.rho(lambda), self.psi.norm())
    }
}

fn regime_of(rho: C64, psi_abs: f64) -> Regime {
    if rho.re.abs() < REGIME_TOL * psi_abs {
        Regime::Hyperplane
    } else if rho.im.abs() < REGIME_TOL * psi_abs {
        Regime::Real
    } else {
        Regime::NonReal
    }
}

fn is_flat(p: &SurfaceParams) -> bool {
    (p.a1 - p.psi.norm().powf(2.0 / 3.0)).abs() < FLAT_TOL * p.a1
}

fn validate(p: &SurfaceParams) -> Result<()> {
    if !(p.a1.is_finite() && p.a1 > 0.0) {
        return Err(Error::Domain(format!("a1 = {} must be positive", p.a1)));
    }
    if !(p.psi.re.is_finite() && p.psi.im.is_finite()) {
        return Err(Error::Domain("psi must be finite".into()));
    }
    Ok(())
}

/// Surface class at `λ`, per the tags of [`SurfaceClass`].
pub fn classify(p: &SurfaceParams, lambda: C64) -> SurfaceClass {
    if p.psi.norm() == 0.0 {
        SurfaceClass::TotallyGeodesic
    } else if is_flat(p) {
        SurfaceClass::FlatClifford
    } else if regime_of(p.psi * lambda.powi(-3), p.psi.norm()) == Regime::Hyperplane {
        SurfaceClass::HyperplaneDegenerateLambda
    } else {
        SurfaceClass::Generic
    }
}

/// All constants determined by `(a₁, ψ)`.
///
/// `a₁` is the maximum of `e^u`, so it must exceed `|ψ|^{2/3}`; below that
/// value `a₁` is the middle root of the first-integral cubic.
pub fn derive_constants(p: &SurfaceParams) -> Result<DerivedConstants> {
    validate(p)?;
    if p.psi.norm() == 0.0 {
        return Err(Error::Degenerate {
            class: SurfaceClass::TotallyGeodesic,
        });
    }
    if is_flat(p) {
        return Err(Error::Degenerate {
            class: SurfaceClass::FlatClifford,
        });
    }
    let a1 = p.a1;
    let psi2 = p.psi.norm_sqr();
    if a1 < p.psi.norm().powf(2.0 / 3.0) {
        return Err(Error::Domain(format!(
            "a1 = {a1} is below |psi|^(2/3) = {}; a1 must be the maximum of e^u",
            p.psi.norm().powf(2.0 / 3.0)
        )));
    }
    let beta = 2.0 * a1 + psi2 / (a1 * a1);
    // The other two roots of w² − (β/2 − a₁) w − (β/2 − a₁) a₁ = 0.
    let h = psi2 / (2.0 * a1 * a1);
    let disc = (h * h + 4.0 * a1 * h).sqrt();
    let a2 = 0.5 * (h + disc);
    // a₃ a₂ = a₁ h, computed as a product to avoid cancellation.
    let a3 = a1 * h / a2;
    let m = (a1 - a2) / (a1 + a3);
    let k = Modulus::from_parameter(m)?;
    let q2 = (a1 - a2) / a1;
    let r = (2.0 * (a1 + a3)).sqrt();
    let kk = complete_k(k)?;
    Ok(DerivedConstants {
        a1,
        psi: p.psi,
        beta,
        a2,
        a3,
        k,
        q2,
        r,
        kk,
        t: kk / r,
        a: C64::new(0.0, a1.sqrt()),
        b: -I * p.psi / a1,
    })
}

/// `D(λ)` with zero diagonal. Skew-Hermitian for `|λ| = 1`; any non-zero
/// `λ` is accepted.
pub fn potential_matrix(c: &DerivedConstants, lambda: C64) -> ComplexMatrix3 {
    let li = lambda.inv();
    let (a, b) = (c.a, c.b);
    ComplexMatrix3([
        [ZERO, -lambda * b.conj(), li * a],
        [li * b, ZERO, -lambda * a.conj()],
        [-lambda * a.conj(), li * a, ZERO],
    ])
}

/// `L₀ = D² − tr(D²)/3 · I`, which commutes with `D`.
pub fn commutant_l0(c: &DerivedConstants, lambda: C64) -> ComplexMatrix3 {
    let d = potential_matrix(c, lambda);
    let d2 = d * d;
    d2 - ComplexMatrix3::identity().scale(d2.trace() / 3.0)
}

/// `μ³ + βμ − 2i·Re(λ⁻³ψ)`, using the analytic continuation of the real part
/// when `|λ| ≠ 1`.
pub fn char_poly_eval(c: &DerivedConstants, lambda: C64, mu: C64) -> C64 {
    mu * mu * mu + c.beta * mu - 2.0 * I * c.rho_re(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub lambda: C64,
    /// Eigenvalues of `D` are `i d_j`; descending unless produced by
    /// [`eigensystem_tracked`].
    pub d: [f64; 3],
    pub l: [ComplexVector3; 3],
}

impl EigenSystem {
    /// Index of the eigenvalue closest to `target`.
    pub fn nearest(&self, target: f64) -> usize {
        (0..3)
            .min_by(|&i, &j| (self.d[i] - target).abs().total_cmp(&(self.d[j] - target).abs()))
            .unwrap()
    }

    pub fn residual(&self, c: &DerivedConstants) -> f64 {
        let dm = potential_matrix(c, self.lambda);
        (0..3)
            .map(|j| (dm.mul_vec(&self.l[j]) - (I * self.d[j]) * self.l[j]).max_abs())
            .fold(0.0, f64::max)
    }
}

/// `s_μ = (|a|² + μ², λ⁻¹bμ + λ²ā², λ⁻²ab − λāμ)`.
fn s_mu(c: &DerivedConstants, lambda: C64, mu: C64) -> ComplexVector3 {
    let (a, b) = (c.a, c.b);
    ComplexVector3::new(
        C64::new(a.norm_sqr(), 0.0) + mu * mu,
        b * mu / lambda + lambda * lambda * a.conj() * a.conj(),
        a * b / (lambda * lambda) - lambda * a.conj() * mu,
    )
}

fn unit_phase(z: C64) -> C64 {
    z.conj() / z.norm()
}

/// Spectrum of `D(λ)` for `|λ| = 1`.
///
/// Eigenvectors are fixed up to phase by `herm_inner(l_j, e₃) ≥ 0`. When that
/// component vanishes (the `sn` eigenvector of the real regime) the reference
/// direction is `B(0) e₃ = (−λ⁻¹√a₁, λ√a₁, 0)` instead, which is the
/// `y`-derivative of the frame column at the origin.
pub fn eigensystem(c: &DerivedConstants, lambda: C64) -> Result<EigenSystem> {
    if (lambda.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("|lambda| = {} must be 1", lambda.norm())));
    }
    let rho = c.rho(lambda);
    let roots = solve_depressed_cubic(-c.beta, 2.0 * rho.re)?;
    let gap = (roots.roots[0] - roots.roots[1]).min(roots.roots[1] - roots.roots[2]);
    if roots.repeated {
        return Err(Error::RepeatedEigenvalues(gap));
    }
    let dm = potential_matrix(c, lambda);
    let sa = c.a1.sqrt();
    let reference = ComplexVector3::new(C64::new(-sa, 0.0) / lambda, lambda * sa, ZERO);
    let mut l = [ComplexVector3::zero(); 3];
    for (j, &d) in roots.roots.iter().enumerate() {
        let mu = I * d;
        let resid = |v: &ComplexVector3| (dm.mul_vec(v) - mu * *v).max_abs();
        let s = s_mu(c, lambda, mu);
        let mut best = None;
        if s.norm() > 1e-12 * (c.a1 + d * d) {
            best = Some(s.normalized());
        }
        let shifted = dm - ComplexMatrix3::identity().scale(mu);
        if let Some(v) = null_vector(&shifted) {
            best = match best {
                Some(b) if resid(&b) <= resid(&v) => Some(b),
                _ => Some(v),
            };
        }
        let mut v = best.ok_or(Error::RepeatedEigenvalues(gap))?;
        let e3 = v[2];
        let phase = if e3.norm() > 1e-9 {
            unit_phase(e3)
        } else {
            unit_phase(herm_inner(&v, &reference))
        };
        v = v.scale(phase);
        l[j] = v;
    }
    Ok(EigenSystem {
        lambda,
        d: roots.roots,
        l,
    })
}

/// Like [`eigensystem`], but labels eigenpairs by proximity to `prev`
/// (typically the previous sample of a λ sweep) instead of by size.
pub fn eigensystem_tracked(c: &DerivedConstants, lambda: C64, prev: &EigenSystem) -> Result<EigenSystem> {
    let es = eigensystem(c, lambda)?;
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let cost = |p: &[usize; 3]| -> f64 { (0..3).map(|j| (es.d[p[j]] - prev.d[j]).abs()).sum() };
    let best = PERMS
        .iter()
        .min_by(|p, q| cost(p).total_cmp(&cost(q)))
        .unwrap();
    Ok(EigenSystem {
        lambda,
        d: best.map(|i| es.d[i]),
        l: best.map(|i| es.l[i]),
    })
}

/// Points `e^{iθ}`, `θ = 2πk/n`, `k = 0..n`.
pub fn circle_samples(n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// `|λ|` is one: used for conditions on λ that only make sense on the circle.
pub fn on_circle(lambda: C64) -> bool {
    (lambda.norm() - 1.0).abs() <= 1e-12
}
