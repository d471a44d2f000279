//! Monodromy phases under `z ↦ z + p + 2mTi`, rationality certificates and
//! the cylinder/torus classification.
//!
//! Eigenvalues of the monodromy are `e^{iθ_j}` with `θ_j = p d_j + m Φ_j`,
//! where `Φ_j` is the phase picked up by the `j`-th eigen-coefficient of the
//! lift over one metric period `2T`:
//!
//! * non-real `λ⁻³ψ`: `Φ_j = G_j(2T) = −Re β₁(2T) d_j − Im β₂(2T)(2β/3 − d_j²)`;
//! * real `λ⁻³ψ`: `sn` and `cn` change sign, `dn` does not, so `Φ = (π, π, 0)`
//!   on the `(sn, cn, dn)` eigenvectors.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::immersion::LiftEvaluator;
use crate::iwasawa::{abelian_exp, beta_integrals};
use crate::linalg3::{ComplexMatrix3, C64};
use crate::potential::{eigensystem, DerivedConstants, EigenSystem, Regime, SurfaceClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PhaseRoute {
    /// From `Re β₁(2T)` and `Im β₂(2T)`.
    #[default]
    Beta,
    /// From the lift integrals `G_j(2T)`.
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyPhases {
    pub p: f64,
    pub m: i64,
    pub lambda: C64,
    /// Phases in the labelling of [`eigensystem`] (descending `d`), not reduced.
    pub theta: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalCertificate {
    pub value: f64,
    pub numerator: i64,
    pub denominator: i64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodOptions {
    pub max_den: i64,
    pub tol: f64,
    /// Distance to `2πℤ` accepted for a monodromy phase.
    pub phase_tol: f64,
    pub route: PhaseRoute,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions {
            max_den: 64,
            tol: 1e-8,
            phase_tol: 1e-7,
            route: PhaseRoute::Beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeriodKind {
    NoPeriodFound,
    Cylinder,
    Torus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodVerdict {
    pub kind: PeriodKind,
    pub lambda: C64,
    /// Period of a cylinder verdict.
    pub omega: Option<C64>,
    /// Lattice `p_f ℤ + ω_f ℤ` of a torus verdict.
    pub lattice: Option<[C64; 2]>,
    /// Multiple of `2T` in `Im ω_f`.
    pub m_f: Option<i64>,
    /// `d₂/d₁` and `(Q/2π)((d₂/d₁)Φ₁ − Φ₂)` certificates, as found.
    pub certificates: Vec<(String, RationalCertificate)>,
    pub note: String,
}

impl PeriodVerdict {
    fn none(lambda: C64, certificates: Vec<(String, RationalCertificate)>, note: impl Into<String>) -> Self {
        PeriodVerdict {
            kind: PeriodKind::NoPeriodFound,
            lambda,
            omega: None,
            lattice: None,
            m_f: None,
            certificates,
            note: note.into(),
        }
    }
}

/// First continued-fraction convergent of `x` within `tol`, if one has
/// denominator at most `max_den`. Taking the first (simplest) convergent
/// makes the answer monotone in `max_den`.
pub fn rational_approx(x: f64, max_den: i64, tol: f64) -> Option<RationalCertificate> {
    if max_den < 1 || !x.is_finite() {
        return None;
    }
    let (mut h1, mut h2) = (1i64, 0i64);
    let (mut k1, mut k2) = (0i64, 1i64);
    let mut t = x;
    for _ in 0..64 {
        let a = t.floor();
        let k_next = a * k1 as f64 + k2 as f64;
        if k_next > max_den as f64 || (a * h1 as f64).abs() > 9.0e15 {
            return None;
        }
        let ai = a as i64;
        let h = ai * h1 + h2;
        let k = ai * k1 + k2;
        (h2, h1) = (h1, h);
        (k2, k1) = (k1, k);
        let residual = (x - h as f64 / k as f64).abs();
        if residual <= tol {
            return Some(RationalCertificate {
                value: x,
                numerator: h,
                denominator: k,
                residual,
            });
        }
        let frac = t - a;
        if frac <= 0.0 {
            return None;
        }
        t = 1.0 / frac;
    }
    None
}

/// `(g, s, t)` with `a s + b t = g = gcd(a, b)`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, s, t) = ext_gcd(b, a.rem_euclid(b));
        (g, t, s - a.div_euclid(b) * t)
    }
}

/// Phases `Φ_j` acquired over `y ↦ y + 2T`, labelled like `es`.
pub fn period_phases(c: &DerivedConstants, es: &EigenSystem, route: PhaseRoute) -> Result<[f64; 3]> {
    match c.regime(es.lambda) {
        Regime::Hyperplane => Err(Error::Degenerate {
            class: SurfaceClass::HyperplaneDegenerateLambda,
        }),
        Regime::Real => {
            let r = c.rho(es.lambda).re;
            let mut phi = [0.0; 3];
            phi[es.nearest(r / c.a1)] = PI;
            phi[es.nearest(r / c.a2)] = PI;
            Ok(phi)
        }
        Regime::NonReal => {
            let beta_route = || -> Result<[f64; 3]> {
                let (b1, b2) = beta_integrals(c, 2.0 * c.t, es.lambda)?;
                Ok(es.d.map(|d| -(b1.re * d + b2.im * (2.0 * c.beta / 3.0 - d * d))))
            };
            let g_route = || LiftEvaluator::with_eigensystem(c, *es)?.g_period();
            match route {
                PhaseRoute::Beta => beta_route().or_else(|_| g_route()),
                PhaseRoute::G => g_route(),
            }
        }
    }
}

/// Monodromy phases for the translation `p + 2mTi`.
pub fn monodromy_phases(c: &DerivedConstants, p: f64, m: i64, lambda: C64) -> Result<MonodromyPhases> {
    let es = eigensystem(c, lambda)?;
    monodromy_phases_with(c, &es, p, m, PhaseRoute::Beta)
}

pub fn monodromy_phases_with(c: &DerivedConstants, es: &EigenSystem, p: f64, m: i64, route: PhaseRoute) -> Result<MonodromyPhases> {
    let phi = if m == 0 { [0.0; 3] } else { period_phases(c, es, route)? };
    let theta = [0, 1, 2].map(|j| p * es.d[j] + m as f64 * phi[j]);
    Ok(MonodromyPhases {
        p,
        m,
        lambda: es.lambda,
        theta,
    })
}

/// `M(λ) = exp(pD − m Re β₁(2T) D − i m Im β₂(2T) L₀)` (non-real regime).
pub fn monodromy_matrix(c: &DerivedConstants, es: &EigenSystem, p: f64, m: i64) -> Result<ComplexMatrix3> {
    let (b1, b2) = if m == 0 {
        (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    } else {
        beta_integrals(c, 2.0 * c.t, es.lambda)?
    };
    let mf = m as f64;
    Ok(abelian_exp(c, es, C64::new(p - mf * b1.re, 0.0), C64::new(0.0, -mf * b2.im)))
}

/// Distance of `θ` to `2πℤ`.
pub fn phase_defect(theta: f64) -> f64 {
    (theta - TAU * (theta / TAU).round()).abs()
}

/// Splits `ω = p + 2mTi`, failing unless `Im ω` is an integer multiple of `2T`.
pub fn split_period(c: &DerivedConstants, omega: C64) -> Result<(f64, i64)> {
    let q = omega.im / (2.0 * c.t);
    let m = q.round();
    if (q - m).abs() > 1e-9 * m.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "Im(omega) = {} is not an integer multiple of 2T = {}",
            omega.im,
            2.0 * c.t
        )));
    }
    Ok((omega.re, m as i64))
}

/// Cylinder iff every monodromy phase of `ω` lies in `2πℤ`. All three phases
/// are checked, the third one is not assumed from the trace condition.
pub fn classify_cylinder(c: &DerivedConstants, lambda: C64, omega: C64, opts: &PeriodOptions) -> Result<PeriodVerdict> {
    let (p, m) = split_period(c, omega)?;
    if p == 0.0 && m == 0 {
        return Err(Error::Precondition("omega must be non-zero".into()));
    }
    let es = eigensystem(c, lambda)?;
    let ph = monodromy_phases_with(c, &es, p, m, opts.route)?;
    let worst = ph.theta.iter().map(|&t| phase_defect(t)).fold(0.0, f64::max);
    if worst <= opts.phase_tol {
        Ok(PeriodVerdict {
            kind: PeriodKind::Cylinder,
            lambda,
            omega: Some(omega),
            lattice: None,
            m_f: None,
            certificates: vec![],
            note: format!("max phase defect {worst:e}"),
        })
    } else {
        Ok(PeriodVerdict::none(lambda, vec![], format!("max phase defect {worst:e}")))
    }
}

/// Torus test. Returns the lattice `p_f ℤ + ω_f ℤ` where `p_f` is the least
/// positive real period and `ω_f = p + 2m_f T i` has the least positive
/// imaginary part. With only a real period the verdict is a cylinder.
pub fn classify_torus(c: &DerivedConstants, lambda: C64, opts: &PeriodOptions) -> Result<PeriodVerdict> {
    let es = eigensystem(c, lambda)?;
    classify_torus_with(c, &es, opts)
}

pub fn classify_torus_with(c: &DerivedConstants, es: &EigenSystem, opts: &PeriodOptions) -> Result<PeriodVerdict> {
    let lambda = es.lambda;
    let phi = period_phases(c, es, opts.route)?;
    let [d1, d2, _] = es.d;
    let ratio = d2 / d1;
    let mut certs = Vec::new();
    let Some(c1) = rational_approx(ratio, opts.max_den, opts.tol) else {
        return Ok(PeriodVerdict::none(lambda, certs, "d2/d1 has no rational certificate"));
    };
    certs.push(("d2/d1".to_string(), c1));
    let (num, den) = (c1.numerator, c1.denominator);
    let p_f = TAU * den as f64 / d1;
    let real_ok = (0..3).all(|j| phase_defect(p_f * es.d[j]) <= opts.phase_tol);
    if !real_ok {
        return Ok(PeriodVerdict::none(lambda, certs, "real period failed phase verification"));
    }

    let x = (ratio * phi[0] - phi[1]) / TAU;
    let Some(c2) = rational_approx(den as f64 * x, opts.max_den, opts.tol) else {
        return Ok(PeriodVerdict {
            kind: PeriodKind::Cylinder,
            lambda,
            omega: Some(C64::new(p_f, 0.0)),
            lattice: None,
            m_f: None,
            certificates: certs,
            note: "real period only; no lattice certificate".into(),
        });
    };
    certs.push(("Q*X".to_string(), c2));
    let m_f = c2.denominator;
    let a = c2.numerator;
    // num·l1 − den·l2 = a
    let (g, s, t) = ext_gcd(num, den);
    let l1 = s * a / g;
    let mf = m_f as f64;
    let mut p = (TAU * l1 as f64 - mf * phi[0]) / d1;
    p = p.rem_euclid(p_f) + 0.0;
    if (p_f - p).abs() < 1e-9 * p_f {
        p = 0.0;
    }
    let _ = t;
    let theta = [0, 1, 2].map(|j| p * es.d[j] + mf * phi[j]);
    let worst = theta.iter().map(|&t| phase_defect(t)).fold(0.0, f64::max);
    if worst > opts.phase_tol {
        return Ok(PeriodVerdict::none(
            lambda,
            certs,
            format!("lattice candidate failed phase verification ({worst:e})"),
        ));
    }
    let omega_f = C64::new(p, 2.0 * mf * c.t);
    Ok(PeriodVerdict {
        kind: PeriodKind::Torus,
        lambda,
        omega: None,
        lattice: Some([C64::new(p_f, 0.0), omega_f]),
        m_f: Some(m_f),
        certificates: certs,
        note: format!("max phase defect {worst:e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::project_chart;
    use crate::linalg3::ONE;
    use crate::potential::{derive_constants, SurfaceParams};
    use proptest::prelude::*;

    fn torus() -> DerivedConstants {
        derive_constants(&SurfaceParams::new(1.0, C64::new(1.0 / 3f64.sqrt(), 0.0))).unwrap()
    }

    fn nonreal() -> DerivedConstants {
        derive_constants(&SurfaceParams::new(2.0, C64::from_polar(1.0, PI / 4.0))).unwrap()
    }

    #[test]
    fn rational_examples() {
        let r = rational_approx(0.5, 64, 1e-12).unwrap();
        assert_eq!((r.numerator, r.denominator, r.residual), (1, 2, 0.0));
        let r = rational_approx(2.0, 64, 1e-12).unwrap();
        assert_eq!((r.numerator, r.denominator), (2, 1));
        assert!(rational_approx(PI, 10, 1e-9).is_none());
        let r = rational_approx(-0.75, 64, 1e-12).unwrap();
        assert_eq!((r.numerator, r.denominator), (-3, 4));
        let r = rational_approx(PI, 200, 1e-6).unwrap();
        assert_eq!((r.numerator, r.denominator), (355, 113));
        assert!(rational_approx(0.5, 0, 1e-9).is_none());
    }

    #[test]
    fn ext_gcd_solves_bezout() {
        for (a, b) in [(1, 2), (3, 7), (-5, 12), (13, 1)] {
            let (g, s, t) = ext_gcd(a, b);
            assert_eq!(a * s + b * t, g);
            assert_eq!(g.abs(), 1);
        }
    }

    #[test]
    fn trivial_phases() {
        let c = nonreal();
        let ph = monodromy_phases(&c, 0.0, 0, ONE).unwrap();
        assert_eq!(ph.theta, [0.0; 3]);
        let es = eigensystem(&c, ONE).unwrap();
        let ph = monodromy_phases(&c, 1.3, 0, ONE).unwrap();
        for j in 0..3 {
            assert_eq!(ph.theta[j], 1.3 * es.d[j]);
        }
    }

    #[test]
    fn beta_and_g_routes_agree() {
        let c = nonreal();
        for lam in [ONE, C64::from_polar(1.0, 0.7), C64::from_polar(1.0, 3.3)] {
            let es = eigensystem(&c, lam).unwrap();
            let a = period_phases(&c, &es, PhaseRoute::Beta).unwrap();
            let b = period_phases(&c, &es, PhaseRoute::G).unwrap();
            for j in 0..3 {
                assert!((a[j] - b[j]).abs() < 1e-8, "{lam} {a:?} {b:?}");
            }
            let ph = monodromy_phases_with(&c, &es, 0.7, 1, PhaseRoute::Beta).unwrap();
            assert!(phase_defect(ph.theta.iter().sum()) < 1e-9);
        }
    }

    #[test]
    fn monodromy_matrix_eigenvalues() {
        let c = nonreal();
        let lam = C64::from_polar(1.0, 0.7);
        let es = eigensystem(&c, lam).unwrap();
        let m = monodromy_matrix(&c, &es, 0.9, 2).unwrap();
        let ph = monodromy_phases_with(&c, &es, 0.9, 2, PhaseRoute::G).unwrap();
        for j in 0..3 {
            let lhs = m.mul_vec(&es.l[j]);
            let rhs = C64::from_polar(1.0, ph.theta[j]) * es.l[j];
            assert!((lhs - rhs).max_abs() < 1e-8);
        }
    }

    #[test]
    fn monodromy_moves_the_lift() {
        let c = nonreal();
        let lam = C64::from_polar(1.0, 0.7);
        let ev = LiftEvaluator::new(&c, lam).unwrap();
        let es = *ev.eigensystem();
        let m = monodromy_matrix(&c, &es, 0.4, 1).unwrap();
        for (x, y) in [(0.1, 0.2), (-1.0, 1.1)] {
            let a = ev.lift(x + 0.4, y + 2.0 * c.t).unwrap().f;
            let b = m.mul_vec(&ev.lift(x, y).unwrap().f);
            assert!((a - b).max_abs() < 1e-8);
        }
    }

    #[test]
    fn cylinder_examples() {
        let c = torus();
        let opts = PeriodOptions::default();
        let v = classify_cylinder(&c, ONE, C64::new(TAU * 3f64.sqrt(), 0.0), &opts).unwrap();
        assert_eq!(v.kind, PeriodKind::Cylinder);
        let v = classify_cylinder(&c, ONE, C64::new(1.0, 0.0), &opts).unwrap();
        assert_eq!(v.kind, PeriodKind::NoPeriodFound);
        let v = classify_cylinder(&c, ONE, C64::new(0.0, 4.0 * c.t), &opts).unwrap();
        assert_eq!(v.kind, PeriodKind::Cylinder);
        let v = classify_cylinder(&c, ONE, C64::new(0.0, 2.0 * c.t), &opts).unwrap();
        assert_eq!(v.kind, PeriodKind::NoPeriodFound);
        assert!(matches!(
            classify_cylinder(&c, ONE, C64::new(0.0, 1.0), &opts),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn torus_benchmark() {
        let c = torus();
        let v = classify_torus(&c, ONE, &PeriodOptions::default()).unwrap();
        assert_eq!(v.kind, PeriodKind::Torus);
        let [pf, wf] = v.lattice.unwrap();
        assert!((pf.re - TAU * 3f64.sqrt()).abs() < 1e-9);
        assert!(wf.re.abs() < 1e-9 && (wf.im - 4.0 * c.t).abs() < 1e-12);
        assert_eq!(v.m_f, Some(2));
        let ev = LiftEvaluator::new(&c, ONE).unwrap();
        for (x, y) in [(0.3, 0.2), (1.9, -0.4)] {
            let a = project_chart(&ev.lift(x, y).unwrap()).unwrap();
            for w in [pf, wf] {
                let b = project_chart(&ev.lift(x + w.re, y + w.im).unwrap()).unwrap();
                assert!((a.w1 - b.w1).norm() < 1e-7 && (a.w2 - b.w2).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn half_shift_lattice_occurs() {
        // Search real-ψ surfaces with d2/d1 rational for the half-shifted normal form.
        let mut seen_half = false;
        let mut seen_4t = false;
        for (num, den) in [(1i64, 2i64), (1, 3), (2, 3), (1, 4), (3, 4), (1, 5), (2, 5)] {
            let target = num as f64 / den as f64;
            // Bisect a1 at ψ = 1 for the sorted ratio d2/d1.
            let ratio = |a1: f64| {
                let c = derive_constants(&SurfaceParams::new(a1, ONE)).unwrap();
                let es = eigensystem(&c, ONE).unwrap();
                es.d[1] / es.d[0] - target
            };
            let (mut lo, mut hi) = (1.001, 200.0);
            if ratio(lo).signum() == ratio(hi).signum() {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if ratio(mid).signum() == ratio(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let c = derive_constants(&SurfaceParams::new(0.5 * (lo + hi), ONE)).unwrap();
            let v = classify_torus(&c, ONE, &PeriodOptions::default()).unwrap();
            assert_eq!(v.kind, PeriodKind::Torus);
            let [pf, wf] = v.lattice.unwrap();
            if v.m_f == Some(1) {
                assert!((wf.re - 0.5 * pf.re).abs() < 1e-8);
                assert!((wf.im - 2.0 * c.t).abs() < 1e-12);
                seen_half = true;
            } else {
                assert_eq!(v.m_f, Some(2));
                assert!(wf.re.abs() < 1e-8);
                seen_4t = true;
            }
        }
        assert!(seen_half && seen_4t);
    }

    #[test]
    fn irrational_benchmark() {
        let c = derive_constants(&SurfaceParams::new(2.0, ONE)).unwrap();
        let v = classify_torus(&c, ONE, &PeriodOptions::default()).unwrap();
        assert_eq!(v.kind, PeriodKind::NoPeriodFound);
    }

    proptest! {
        #[test]
        fn certificates_are_monotone(x in -3.0f64..3.0, den in 1i64..200, tol in 1e-9f64..1e-2) {
            if let Some(a) = rational_approx(x, den, tol) {
                let b = rational_approx(x, den + 17, tol);
                prop_assert!(b.is_some());
                prop_assert!(a.residual <= tol);
                prop_assert!(a.denominator <= den && a.denominator > 0);
                let g = ext_gcd(a.numerator.abs(), a.denominator).0;
                prop_assert_eq!(g, 1);
            }
        }

        #[test]
        fn phases_sum_to_zero(p in -5.0f64..5.0, m in -3i64..4, theta in 0.0..TAU) {
            let c = nonreal();
            let lam = C64::from_polar(1.0, theta);
            prop_assume!(c.regime(lam) != Regime::Hyperplane);
            let ph = monodromy_phases(&c, p, m, lam).unwrap();
            prop_assert!(phase_defect(ph.theta.iter().sum()) < 1e-9);
        }
    }
}
