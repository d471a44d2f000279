//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands on
//! a real interval.
//!
//! Integrands signal a vanishing denominator by returning a non-finite value;
//! the integrator then stops with [`Error::SingularLocus`] instead of
//! silently averaging across the pole.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-11,
            rel_tol: 1e-13,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel: returns (Kronrod value, |Kronrod − Gauss|,
/// Kronrod rule applied to |f|).
fn panel<F>(f: &F, a: f64, b: f64) -> Result<(Complex64, f64, f64)>
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    check(fc, center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        check(f1, center - dx)?;
        check(f2, center + dx)?;
        let s = f1 + f2;
        kronrod += s * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    Ok((k, (k - g).norm(), resabs * half.abs()))
}

fn check(v: Complex64, y: f64) -> Result<()> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(Error::SingularLocus {
            y,
            what: "integrand denominator vanishes",
        })
    }
}

/// Fixed 15-point Kronrod rule on `[a, b]`. Exact for polynomials of degree 22;
/// used for short sub-intervals where adaptive refinement is unnecessary.
pub fn kronrod15<F>(f: F, a: f64, b: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    panel(&f, a, b).map(|(v, _, _)| v)
}

/// Globally adaptive integration of `f` over `[a, b]` (either orientation).
pub fn integrate<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if b < a {
        return integrate(f, b, a, opts).map(|v| -v);
    }
    let (v0, e0, r0) = panel(&f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v0,
        error: e0,
        resabs: r0,
    });
    let mut total = v0;
    let mut err = e0;
    let mut resabs = r0;
    // Below ~50 ulp of ∫|f| the error estimate is rounding noise.
    let target = |total: Complex64, resabs: f64| {
        opts.abs_tol
            .max(opts.rel_tol * total.norm())
            .max(50.0 * f64::EPSILON * resabs)
    };
    while err > target(total, resabs) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature { a, b, estimate: err });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature { a, b, estimate: err });
        }
        let (vl, el, rl) = panel(&f, worst.a, mid)?;
        let (vr, er, rr) = panel(&f, mid, worst.b)?;
        total += vl + vr - worst.value;
        err += el + er - worst.error;
        resabs += rl + rr - worst.resabs;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: vl,
            error: el,
            resabs: rl,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: vr,
            error: er,
            resabs: rr,
        });
    }
    // Recompute the sums from scratch to shed accumulated rounding.
    let value = heap.iter().fold(Complex64::new(0.0, 0.0), |s, seg| s + seg.value);
    Ok(value)
}

/// Convenience wrapper for real integrands.
pub fn integrate_real<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, opts).map(|v| v.re)
}
