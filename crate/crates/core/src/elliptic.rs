//! Jacobi elliptic functions and the elliptic integral of the first kind.
//!
//! Everything here takes the *modulus* `k`, not the parameter `m = k²`.
//!
//! * `K(k)` comes from the arithmetic-geometric mean, `K = π / (2 agm(1, k'))`.
//! * `J(θ, k)` uses Carlson's symmetric integral `R_F` with reduction of
//!   `θ` to `[-π/2, π/2]` and the quasi-periodicity `J(θ + π) = J(θ) + 2K`.
//! * `sn, cn, dn` use the AGM phase recursion (descending Landen), after
//!   reducing the argument modulo `4K`.
//!
//! Accuracy is about 1e-14 relative for `k ≤ 0.999`. As `k → 1` the period
//! `4K` grows logarithmically and the reduction step loses a few digits; at
//! `k = 1` exactly `jacobi` switches to the hyperbolic closed forms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elliptic modulus `k`, `0 ≤ k ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::Domain(format!("modulus k = {k} outside [0, 1]")));
        }
        Ok(Modulus(k))
    }

    /// Builds the modulus from `m = k²`.
    pub fn from_parameter(m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::Domain(format!("parameter m = {m} outside [0, 1]")));
        }
        Ok(Modulus(m.sqrt()))
    }

    #[inline]
    pub fn k(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn parameter(self) -> f64 {
        self.0 * self.0
    }

    /// Complementary modulus `k' = sqrt(1 - k²)`.
    #[inline]
    pub fn complementary(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

/// Values of `sn, cn, dn` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind.
pub fn complete_k(k: Modulus) -> Result<f64> {
    let kk = k.k();
    if kk >= 1.0 {
        return Err(Error::Domain("K(k) diverges at k = 1".into()));
    }
    Ok(PI / (2.0 * agm(1.0, k.complementary())))
}

/// Carlson's `R_F(x, y, z)` for non-negative arguments, at most one zero.
fn carlson_rf(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    const ERRTOL: f64 = 1e-3;
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        let ave = (x + y + z) / 3.0;
        let dx = (ave - x) / ave;
        let dy = (ave - y) / ave;
        let dz = (ave - z) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / ave.sqrt();
        }
    }
}

/// Incomplete elliptic integral `J(θ, k) = ∫₀^θ dα / sqrt(1 - k² sin² α)`.
pub fn incomplete_j(theta: f64, k: Modulus) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("angle {theta} is not finite")));
    }
    let big_k = complete_k(k)?;
    let n = (theta / PI).round();
    let t = theta - n * PI;
    let (s, c) = t.sin_cos();
    let m = k.parameter();
    let reduced = s * carlson_rf(c * c, 1.0 - m * s * s, 1.0);
    Ok(2.0 * n * big_k + reduced)
}

/// `sn, cn, dn` of a real argument.
pub fn jacobi(z: f64, k: Modulus) -> Result<JacobiTriple> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("argument {z} is not finite")));
    }
    let kk = k.k();
    if kk == 0.0 {
        let (sn, cn) = z.sin_cos();
        return Ok(JacobiTriple { sn, cn, dn: 1.0 });
    }
    if kk == 1.0 {
        let sech = 1.0 / z.cosh();
        return Ok(JacobiTriple {
            sn: z.tanh(),
            cn: sech,
            dn: sech,
        });
    }

    let period = 4.0 * complete_k(k)?;
    let u = z - period * (z / period).round();

    // AGM phase recursion.
    let mut a = [0.0f64; 16];
    let mut c = [0.0f64; 16];
    a[0] = 1.0;
    let mut b = k.complementary();
    c[0] = kk;
    let mut n = 0;
    while c[n].abs() > 1e-16 && n < 15 {
        let an = 0.5 * (a[n] + b);
        let cn = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
        a[n] = an;
        c[n] = cn;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] * phi.sin() / a[j]).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn > 0 for real arguments; this form has no cancellation near cn = 0.
    let kp = k.complementary();
    let dn = (cn * cn + kp * kp * sn * sn).sqrt();
    Ok(JacobiTriple { sn, cn, dn })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;
    use crate::quadrature::{integrate, QuadOptions};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn modulus(k: f64) -> Modulus {
        Modulus::new(k).unwrap()
    }

    fn quad_j(theta: f64, k: f64) -> f64 {
        integrate(
            |a: f64| Complex64::new(1.0 / (1.0 - k * k * a.sin().powi(2)).sqrt(), 0.0),
            0.0,
            theta,
            QuadOptions::with_tolerance(1e-14),
        )
        .unwrap()
        .re
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        assert!((complete_k(modulus(0.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn k_half_matches_quadrature() {
        let oracle = quad_j(FRAC_PI_2, 0.5);
        let kk = complete_k(modulus(0.5)).unwrap();
        assert!((oracle - 1.685_750_354_82).abs() < 1e-10);
        assert!((kk - oracle).abs() < 1e-12, "{kk} vs {oracle}");
    }

    #[test]
    fn k_rejects_one_and_negative() {
        assert!(complete_k(modulus(1.0)).is_err());
        assert!(Modulus::new(-0.1).is_err());
        assert!(Modulus::new(1.5).is_err());
    }

    #[test]
    fn k_is_increasing() {
        let mut prev = 0.0;
        for i in 0..100 {
            let kk = complete_k(modulus(i as f64 / 100.0)).unwrap();
            assert!(kk > prev);
            assert!(kk >= FRAC_PI_2);
            prev = kk;
        }
    }

    #[test]
    fn incomplete_special_values() {
        assert_eq!(incomplete_j(0.0, modulus(0.7)).unwrap(), 0.0);
        assert!((incomplete_j(FRAC_PI_2, modulus(0.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let k = modulus(0.5);
        assert!((incomplete_j(FRAC_PI_2, k).unwrap() - complete_k(k).unwrap()).abs() < 1e-14);
        let oracle = quad_j(PI / 4.0, 0.5);
        assert!((incomplete_j(PI / 4.0, k).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn incomplete_quasi_periodic_and_odd() {
        let k = modulus(0.8);
        let big_k = complete_k(k).unwrap();
        for &t in &[0.1, 0.7, 1.4, 2.9, -2.0] {
            let j = incomplete_j(t, k).unwrap();
            let jp = incomplete_j(t + PI, k).unwrap();
            assert!((jp - j - 2.0 * big_k).abs() < 1e-13);
            assert!((incomplete_j(-t, k).unwrap() + j).abs() < 1e-14);
            assert!((j - quad_j(t, 0.8)).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_limits() {
        let t = jacobi(0.0, modulus(0.3)).unwrap();
        assert_eq!((t.sn, t.cn, t.dn), (0.0, 1.0, 1.0));

        let t = jacobi(1.0, modulus(0.0)).unwrap();
        assert!((t.sn - 0.841_470_984_8).abs() < 1e-10);
        assert!((t.cn - 0.540_302_305_9).abs() < 1e-10);
        assert_eq!(t.dn, 1.0);

        let t = jacobi(0.5, modulus(1.0)).unwrap();
        assert!((t.sn - 0.462_117_157_3).abs() < 1e-10);
        assert!((t.cn - 0.886_818_884_0).abs() < 1e-10);
        assert!((t.dn - 0.886_818_884_0).abs() < 1e-10);
    }

    #[test]
    fn jacobi_quarter_period() {
        let k = modulus(0.5);
        let t = jacobi(complete_k(k).unwrap(), k).unwrap();
        assert!((t.sn - 1.0).abs() < 1e-14);
        assert!(t.cn.abs() < 1e-12);
        assert!((t.dn - (1.0f64 - 0.25).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn jacobi_near_one_is_close_to_hyperbolic() {
        let t = jacobi(0.5, modulus(1.0 - 1e-12)).unwrap();
        assert!((t.sn - 0.5f64.tanh()).abs() < 1e-9);
        assert!((t.dn - 1.0 / 0.5f64.cosh()).abs() < 1e-9);
    }

    #[test]
    fn random_identities() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let k = modulus(rng.gen_range(0.0..0.999));
            let z = rng.gen_range(-20.0..20.0);
            let t = jacobi(z, k).unwrap();
            assert!((t.sn * t.sn + t.cn * t.cn - 1.0).abs() < 1e-12);
            assert!((k.parameter() * t.sn * t.sn + t.dn * t.dn - 1.0).abs() < 1e-12);
            assert!(t.dn >= k.complementary() - 1e-14);
        }
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(z in -10.0f64..10.0, k in 0.0f64..0.999) {
            let k = modulus(k);
            let h = 1e-5;
            let p = jacobi(z + h, k).unwrap();
            let m = jacobi(z - h, k).unwrap();
            let t = jacobi(z, k).unwrap();
            prop_assert!(((p.sn - m.sn) / (2.0 * h) - t.cn * t.dn).abs() < 1e-6);
            prop_assert!(((p.cn - m.cn) / (2.0 * h) + t.sn * t.dn).abs() < 1e-6);
            prop_assert!(((p.dn - m.dn) / (2.0 * h) + k.parameter() * t.sn * t.cn).abs() < 1e-6);
        }

        #[test]
        fn sn_inverts_incomplete_integral(theta in -1.5707f64..1.5707, k in 0.0f64..0.999) {
            let k = modulus(k);
            let z = incomplete_j(theta, k).unwrap();
            prop_assert!((jacobi(z, k).unwrap().sn - theta.sin()).abs() < 1e-10);
        }

        #[test]
        fn full_period(z in -10.0f64..10.0, k in 0.0f64..0.999) {
            let k = modulus(k);
            let p = 4.0 * complete_k(k).unwrap();
            let a = jacobi(z, k).unwrap();
            let b = jacobi(z + p, k).unwrap();
            prop_assert!((a.sn - b.sn).abs() < 1e-10);
            prop_assert!((a.cn - b.cn).abs() < 1e-10);
            prop_assert!((a.dn - b.dn).abs() < 1e-10);
            let d = jacobi(z + 0.5 * p, k).unwrap();
            prop_assert!((a.dn - d.dn).abs() < 1e-10);
        }
    }
}
