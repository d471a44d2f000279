//! The conformal factor `w = e^{u(y)} = a₁(1 − q² sn²(ry, k))`.

use serde::{Deserialize, Serialize};

use crate::elliptic::jacobi;
use crate::potential::DerivedConstants;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub y: f64,
    pub w: f64,
    pub w_prime: f64,
    pub u: f64,
    pub u_prime: f64,
}

/// `w`, `w'`, `u = log w` and `u' = w'/w` at `y`. A non-finite `y` gives NaNs.
pub fn metric_at(c: &DerivedConstants, y: f64) -> MetricSample {
    let Ok(j) = jacobi(c.r * y, c.k) else {
        return MetricSample {
            y,
            w: f64::NAN,
            w_prime: f64::NAN,
            u: f64::NAN,
            u_prime: f64::NAN,
        };
    };
    let w = c.a1 * (1.0 - c.q2 * j.sn * j.sn);
    let w_prime = -2.0 * c.a1 * c.q2 * c.r * j.sn * j.cn * j.dn;
    MetricSample {
        y,
        w,
        w_prime,
        u: w.ln(),
        u_prime: w_prime / w,
    }
}

/// `|(w')² + 8w³ − 4βw² + 4|ψ|²|`.
pub fn first_integral_residual(c: &DerivedConstants, y: f64) -> f64 {
    let m = metric_at(c, y);
    let w = m.w;
    (m.w_prime * m.w_prime + 8.0 * w * w * w - 4.0 * c.beta * w * w + 4.0 * c.psi_abs2()).abs()
}

/// `|u''/4 + e^u − |ψ|² e^{−2u}|` with `u''` from a central difference, step 1e-5.
pub fn gauss_residual(c: &DerivedConstants, y: f64) -> f64 {
    let h = 1e-5;
    let u = |t: f64| metric_at(c, t).u;
    let upp = (u(y + h) - 2.0 * u(y) + u(y - h)) / (h * h);
    let w = metric_at(c, y).w;
    (0.25 * upp + w - c.psi_abs2() / (w * w)).abs()
}

/// Largest `|w'|` over a period, from the first integral: the maximum of
/// `8(a₁ − w)(w − a₂)(w + a₃)` on `[a₂, a₁]`.
pub fn max_w_prime(c: &DerivedConstants) -> f64 {
    // Critical point of −8w³ + 4βw² − 4|ψ|² on [a₂, a₁]: w = β/3.
    let w = (c.beta / 3.0).clamp(c.a2, c.a1);
    (8.0 * (c.a1 - w) * (w - c.a2) * (w + c.a3)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg3::C64;
    use crate::potential::{derive_constants, SurfaceParams};
    use proptest::prelude::*;

    fn bench() -> DerivedConstants {
        derive_constants(&SurfaceParams::new(2.0, C64::new(1.0, 0.0))).unwrap()
    }

    #[test]
    fn endpoints() {
        let c = bench();
        let m = metric_at(&c, 0.0);
        assert_eq!(m.w, c.a1);
        assert_eq!(m.u_prime, 0.0);
        assert!((metric_at(&c, c.t).w - c.a2).abs() < 1e-14);
        assert!(first_integral_residual(&c, 0.0) < 1e-12);
        assert!(first_integral_residual(&c, c.t) < 1e-12);
        assert!(first_integral_residual(&c, 0.3) < 1e-10);
    }

    #[test]
    fn gauss_equation() {
        let c = bench();
        for y in [0.0, 0.5 * c.t, 0.3, 1.7, -2.2] {
            assert!(gauss_residual(&c, y) < 1e-5, "y = {y}");
        }
    }

    #[test]
    fn max_slope_is_attained() {
        let c = bench();
        let bound = max_w_prime(&c);
        let sampled = (0..2000)
            .map(|i| metric_at(&c, c.t * i as f64 / 2000.0).w_prime.abs())
            .fold(0.0, f64::max);
        assert!(sampled <= bound + 1e-12);
        assert!(bound - sampled < 1e-5);
    }

    #[test]
    fn derivative_matches_fd() {
        let c = bench();
        let h = 1e-5;
        for y in [0.1, 0.77, 1.9] {
            let fd = (metric_at(&c, y + h).w - metric_at(&c, y - h).w) / (2.0 * h);
            assert!((fd - metric_at(&c, y).w_prime).abs() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn periodic_even_bounded(y in -20.0f64..20.0, a1 in 1.05f64..4.0, mag in 0.1f64..1.0) {
            let c = derive_constants(&SurfaceParams::new(a1, C64::new(mag, 0.3))).unwrap();
            let w = metric_at(&c, y).w;
            prop_assert!((metric_at(&c, y + 2.0 * c.t).w - w).abs() < 1e-10);
            prop_assert!((metric_at(&c, -y).w - w).abs() < 1e-12);
            prop_assert!(w >= c.a2 - 1e-12 && w <= c.a1 + 1e-12);
            prop_assert!(first_integral_residual(&c, y) < 1e-9 * c.beta.powi(3).max(1.0));
        }
    }
}
