//! Dense complex 3×3 linear algebra, the order-six automorphism `σ` of
//! `sl(3, C)` with its eigenspaces `g_0 … g_5`, and a real cubic solver.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `ε = e^{πi/3}`, the eigenvalue of `σ` on `g_1`.
pub fn epsilon() -> C64 {
    C64::from_polar(1.0, PI / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector3(pub [C64; 3]);

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix3(pub [[C64; 3]; 3]);

impl ComplexVector3 {
    pub const fn new(a: C64, b: C64, c: C64) -> Self {
        ComplexVector3([a, b, c])
    }

    pub fn zero() -> Self {
        ComplexVector3([ZERO; 3])
    }

    /// Standard basis vector `e_{i+1}`.
    pub fn basis(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i] = ONE;
        v
    }

    pub fn norm(&self) -> f64 {
        herm_inner(self, self).re.sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexVector3(self.0.map(|x| x * s))
    }

    pub fn normalized(&self) -> Self {
        self.scale(C64::new(1.0 / self.norm(), 0.0))
    }

    pub fn conj(&self) -> Self {
        ComplexVector3(self.0.map(|x| x.conj()))
    }

    /// Bilinear cross product (no conjugation).
    pub fn cross(&self, o: &Self) -> Self {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        ComplexVector3([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

impl Index<usize> for ComplexVector3 {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl Add for ComplexVector3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ComplexVector3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for ComplexVector3 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for ComplexVector3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        ComplexVector3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<ComplexVector3> for C64 {
    type Output = ComplexVector3;
    fn mul(self, v: ComplexVector3) -> ComplexVector3 {
        v.scale(self)
    }
}

impl Mul<ComplexVector3> for f64 {
    type Output = ComplexVector3;
    fn mul(self, v: ComplexVector3) -> ComplexVector3 {
        v.scale(C64::new(self, 0.0))
    }
}

/// `Z · W̄ = Σ z_k conj(w_k)`: linear in `z`, conjugate-linear in `w`.
pub fn herm_inner(z: &ComplexVector3, w: &ComplexVector3) -> C64 {
    z.0[0] * w.0[0].conj() + z.0[1] * w.0[1].conj() + z.0[2] * w.0[2].conj()
}

impl fmt::Debug for ComplexMatrix3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for row in &self.0 {
            writeln!(f, "  {:.6} {:.6} {:.6}", row[0], row[1], row[2])?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix3 {
    pub fn zero() -> Self {
        ComplexMatrix3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diag([ONE; 3])
    }

    pub fn diag(d: [C64; 3]) -> Self {
        let mut m = Self::zero();
        for (i, x) in d.into_iter().enumerate() {
            m.0[i][i] = x;
        }
        m
    }

    pub fn from_columns(c: [ComplexVector3; 3]) -> Self {
        let mut m = Self::zero();
        for (j, col) in c.iter().enumerate() {
            for i in 0..3 {
                m.0[i][j] = col.0[i];
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> ComplexVector3 {
        ComplexVector3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn row(&self, i: usize) -> ComplexVector3 {
        ComplexVector3(self.0[i])
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix3(self.0.map(|r| r.map(|x| x.conj())))
    }

    pub fn dagger(&self) -> Self {
        self.transpose().conj()
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix3(self.0.map(|r| r.map(|x| x * s)))
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse via the adjugate.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        if !(d.norm() > 1e-14 * scale.powi(3)) {
            return Err(Error::Singular(d.norm()));
        }
        let m = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        Ok(ComplexMatrix3(adj).scale(d.inv()))
    }

    pub fn mul_vec(&self, v: &ComplexVector3) -> ComplexVector3 {
        let m = &self.0;
        let mut out = [ZERO; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = m[i][0] * v.0[0] + m[i][1] * v.0[1] + m[i][2] * v.0[2];
        }
        ComplexVector3(out)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// `‖X + X†‖_max`.
    pub fn skew_hermitian_residual(&self) -> f64 {
        (*self + self.dagger()).max_abs()
    }
}

impl Index<(usize, usize)> for ComplexMatrix3 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Add for ComplexMatrix3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += o.0[i][j];
            }
        }
        m
    }
}

impl Sub for ComplexMatrix3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for ComplexMatrix3 {
    type Output = Self;
    fn neg(self) -> Self {
        ComplexMatrix3(self.0.map(|r| r.map(|x| -x)))
    }
}

impl Mul for ComplexMatrix3 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        matmul(&self, &o)
    }
}

impl Mul<ComplexVector3> for ComplexMatrix3 {
    type Output = ComplexVector3;
    fn mul(self, v: ComplexVector3) -> ComplexVector3 {
        self.mul_vec(&v)
    }
}

impl Mul<ComplexMatrix3> for C64 {
    type Output = ComplexMatrix3;
    fn mul(self, m: ComplexMatrix3) -> ComplexMatrix3 {
        m.scale(self)
    }
}

impl Mul<ComplexMatrix3> for f64 {
    type Output = ComplexMatrix3;
    fn mul(self, m: ComplexMatrix3) -> ComplexMatrix3 {
        m.scale(C64::new(self, 0.0))
    }
}

pub fn matmul(a: &ComplexMatrix3, b: &ComplexMatrix3) -> ComplexMatrix3 {
    let mut m = ComplexMatrix3::zero();
    for i in 0..3 {
        for j in 0..3 {
            m.0[i][j] = a.0[i][0] * b.0[0][j] + a.0[i][1] * b.0[1][j] + a.0[i][2] * b.0[2][j];
        }
    }
    m
}

pub fn dagger(m: &ComplexMatrix3) -> ComplexMatrix3 {
    m.dagger()
}

pub fn det(m: &ComplexMatrix3) -> C64 {
    m.det()
}

/// `‖M M† − I‖_max`.
pub fn unitary_residual(m: &ComplexMatrix3) -> f64 {
    (*m * m.dagger() - ComplexMatrix3::identity()).max_abs()
}

/// Outer product `u v†`.
pub fn outer(u: &ComplexVector3, v: &ComplexVector3) -> ComplexMatrix3 {
    let mut m = ComplexMatrix3::zero();
    for i in 0..3 {
        for j in 0..3 {
            m.0[i][j] = u.0[i] * v.0[j].conj();
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Twisting automorphism

fn p_matrix() -> (ComplexMatrix3, ComplexMatrix3) {
    let alpha = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut p = ComplexMatrix3::zero();
    p[(0, 1)] = alpha;
    p[(1, 0)] = alpha * alpha;
    p[(2, 2)] = ONE;
    let mut pinv = ComplexMatrix3::zero();
    pinv[(0, 1)] = (alpha * alpha).conj();
    pinv[(1, 0)] = alpha.conj();
    pinv[(2, 2)] = ONE;
    (p, pinv)
}

/// Group automorphism `g ↦ P (gᵗ)⁻¹ P⁻¹`, of order six.
pub fn sigma_group(m: &ComplexMatrix3) -> Result<ComplexMatrix3> {
    let (p, pinv) = p_matrix();
    Ok(p * m.transpose().inverse()? * pinv)
}

/// Lie algebra automorphism `ξ ↦ −P ξᵗ P⁻¹`.
pub fn sigma_algebra(x: &ComplexMatrix3) -> ComplexMatrix3 {
    let (p, pinv) = p_matrix();
    -(p * x.transpose() * pinv)
}

/// Real form involution `ξ ↦ −ξ̄ᵗ`; `su(3)` is its fixed set.
pub fn tau_algebra(x: &ComplexMatrix3) -> ComplexMatrix3 {
    -x.dagger()
}

/// Label of the `ε^l`-eigenspace `g_l` of `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwistClass(u8);

impl TwistClass {
    pub fn new(l: u8) -> Result<Self> {
        if l < 6 {
            Ok(TwistClass(l))
        } else {
            Err(Error::Domain(format!("twist class {l} outside 0..6")))
        }
    }

    pub fn all() -> [TwistClass; 6] {
        [0, 1, 2, 3, 4, 5].map(TwistClass)
    }

    pub fn index(self) -> u8 {
        self.0
    }
}

/// Spectral projection onto the `ε^l`-eigenspace of `σ`:
/// `(1/6) Σ_k ε^{-lk} σ^k(X)`. Works on all of `gl(3)`; the identity lands
/// in class 3 because `σ(I) = −I`.
pub fn project_twist(x: &ComplexMatrix3, l: TwistClass) -> ComplexMatrix3 {
    let eps = epsilon();
    let mut acc = ComplexMatrix3::zero();
    let mut term = *x;
    for k in 0..6 {
        let w = eps.powi(-((l.0 as i32) * k));
        acc = acc + term.scale(w);
        term = sigma_algebra(&term);
    }
    acc.scale(C64::new(1.0 / 6.0, 0.0))
}

// ---------------------------------------------------------------------------
// Depressed cubic

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    /// Roots of `t³ + p t + q`, sorted descending.
    pub roots: [f64; 3],
    /// Set when the discriminant is zero to working precision.
    pub repeated: bool,
}

/// Real roots of `t³ + p t + q = 0` by Viète's trigonometric formula,
/// Newton-polished and re-centred so that they sum to zero.
pub fn solve_depressed_cubic(p: f64, q: f64) -> Result<CubicRoots> {
    let scale = 1f64.max(p.abs()).max(q.abs());
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    let disc_tol = 1e-12 * scale.powi(3).max(1.0) * 27.0;
    if disc < -disc_tol {
        return Err(Error::ComplexRoots(disc));
    }
    if p == 0.0 && q == 0.0 {
        return Ok(CubicRoots {
            roots: [0.0; 3],
            repeated: true,
        });
    }
    let mut roots = if p >= 0.0 {
        // Only reachable when the discriminant rounds to zero with p ≈ 0.
        let t = -q.cbrt();
        [t, t, t]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        [
            m * theta.cos(),
            m * (theta - 2.0 * PI / 3.0).cos(),
            m * (theta - 4.0 * PI / 3.0).cos(),
        ]
    };
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = *r * *r * *r + p * *r + q;
            let df = 3.0 * *r * *r + p;
            if df.abs() < 1e-300 {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    // The smallest-magnitude root absorbs the recentring.
    let idx = (0..3)
        .min_by(|&i, &j| roots[i].abs().total_cmp(&roots[j].abs()))
        .unwrap();
    let others: f64 = (0..3).filter(|&i| i != idx).map(|i| roots[i]).sum();
    roots[idx] = -others;
    let gap = (roots[0] - roots[1]).min(roots[1] - roots[2]);
    let repeated = disc <= disc_tol || gap <= 1e-7 * scale.sqrt();
    Ok(CubicRoots { roots, repeated })
}

// ---------------------------------------------------------------------------
// Hermitian / skew-Hermitian spectra

/// Eigen-decomposition `H = V diag(w) V†` of a 3×3 Hermitian matrix.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen {
    /// Eigenvalues, descending.
    pub values: [f64; 3],
    /// Orthonormal eigenvectors (columns of `V`), matching `values`.
    pub vectors: [ComplexVector3; 3],
}

fn eigenvalues_hermitian(h: &ComplexMatrix3) -> [f64; 3] {
    let a = h.trace().re;
    let m = &h.0;
    let b = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).re
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0]).re
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1]).re;
    let c = h.det().re;
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = -c + a * b / 3.0 - 2.0 * a * a * a / 27.0;
    let roots = match solve_depressed_cubic(p, q) {
        Ok(r) => r.roots,
        // Rounding pushed the discriminant negative: the spectrum is degenerate.
        Err(_) => {
            let t = -q.cbrt();
            [t, t, t]
        }
    };
    roots.map(|r| r + shift)
}

/// Null vector of a (numerically) rank-2 matrix from the best row cross product.
pub(crate) fn null_vector(a: &ComplexMatrix3) -> Option<ComplexVector3> {
    let rows = [a.row(0), a.row(1), a.row(2)];
    let cands = [
        rows[0].cross(&rows[1]),
        rows[0].cross(&rows[2]),
        rows[1].cross(&rows[2]),
    ];
    let best = cands
        .into_iter()
        .max_by(|u, v| u.norm().total_cmp(&v.norm()))
        .unwrap();
    let scale = a.max_abs().powi(2);
    if best.norm() > 1e-13 * scale.max(f64::MIN_POSITIVE) {
        Some(best.normalized())
    } else {
        None
    }
}

/// Orthonormal pair spanning the Hermitian complement of a unit vector.
fn complement(v: &ComplexVector3) -> (ComplexVector3, ComplexVector3) {
    let k = (0..3)
        .min_by(|&i, &j| v.0[i].norm().total_cmp(&v.0[j].norm()))
        .unwrap();
    let ek = ComplexVector3::basis(k);
    let e = (ek - herm_inner(&ek, v) * *v).normalized();
    let f = v.cross(&e).conj();
    (e, f)
}

/// Spectrum of a 3×3 Hermitian matrix: the characteristic cubic locates the
/// most isolated eigenvalue, a row cross product gives its eigenvector, and
/// the remaining pair is resolved exactly on the 2-D complement. This stays
/// accurate through eigenvalue collisions.
pub fn eigen_hermitian(h: &ComplexMatrix3) -> HermitianEigen {
    let w = eigenvalues_hermitian(h);
    let scale = h.max_abs();
    let gaps = [w[0] - w[1], w[1] - w[2]];
    let isolated = if gaps[0] >= gaps[1] { 0 } else { 2 };
    if gaps[0].max(gaps[1]) <= 1e-14 * scale || scale == 0.0 {
        let t = h.trace().re / 3.0;
        return HermitianEigen {
            values: [t; 3],
            vectors: [0, 1, 2].map(ComplexVector3::basis),
        };
    }
    let shifted = *h - ComplexMatrix3::identity().scale(C64::new(w[isolated], 0.0));
    let v = null_vector(&shifted).unwrap_or_else(|| ComplexVector3::basis(isolated));
    let (e, f) = complement(&v);
    let he = h.mul_vec(&e);
    let hf = h.mul_vec(&f);
    let alpha = herm_inner(&he, &e).re;
    let delta = herm_inner(&hf, &f).re;
    let beta = herm_inner(&hf, &e); // ⟨H f, e⟩ = e† H f
    let mean = 0.5 * (alpha + delta);
    let half = 0.5 * (alpha - delta);
    let r = (half * half + beta.norm_sqr()).sqrt();
    let (lp, lm) = (mean + r, mean - r);
    let (up, um) = if beta.norm() <= 1e-15 * scale {
        if alpha >= delta {
            (e, f)
        } else {
            (f, e)
        }
    } else {
        // In the (e, f) basis the restriction is [[α, β], [β̄, δ]].
        let c1 = (beta, C64::new(lp - alpha, 0.0));
        let c2 = (C64::new(lp - delta, 0.0), beta.conj());
        let (x, y) = if c1.0.norm_sqr() + c1.1.norm_sqr() >= c2.0.norm_sqr() + c2.1.norm_sqr() {
            c1
        } else {
            c2
        };
        let up = (x * e + y * f).normalized();
        let um = up.cross(&v).conj();
        (up, um.normalized())
    };
    let w_iso = herm_inner(&h.mul_vec(&v), &v).re;
    let mut pairs = [(w_iso, v), (lp, up), (lm, um)];
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    HermitianEigen {
        values: pairs.map(|p| p.0),
        vectors: pairs.map(|p| p.1),
    }
}

/// `Σ_j f(w_j) v_j v_j†` for a Hermitian eigen-decomposition.
pub fn spectral_function<F>(e: &HermitianEigen, f: F) -> ComplexMatrix3
where
    F: Fn(f64) -> C64,
{
    let mut m = ComplexMatrix3::zero();
    for j in 0..3 {
        m = m + outer(&e.vectors[j], &e.vectors[j]).scale(f(e.values[j]));
    }
    m
}

/// `exp(t D)` for skew-Hermitian `D`, via the spectrum of the Hermitian `−iD`.
pub fn matexp_skew(d: &ComplexMatrix3, t: f64) -> Result<ComplexMatrix3> {
    let res = d.skew_hermitian_residual();
    if res > 1e-10 * d.max_abs().max(1.0) {
        return Err(Error::NotSkewHermitian(res));
    }
    let h = d.scale(-I);
    let e = eigen_hermitian(&h);
    Ok(spectral_function(&e, |w| C64::from_polar(1.0, t * w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut impl Rng) -> ComplexMatrix3 {
        let mut m = ComplexMatrix3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    fn random_skew(rng: &mut impl Rng) -> ComplexMatrix3 {
        let m = random_matrix(rng);
        (m - m.dagger()).scale(C64::new(0.5, 0.0))
    }

    fn g_basis(l: u8, a: C64, b: C64) -> ComplexMatrix3 {
        let mut m = ComplexMatrix3::zero();
        match l {
            0 => {
                m[(0, 0)] = a;
                m[(1, 1)] = -a;
            }
            1 => {
                m[(0, 1)] = b;
                m[(1, 2)] = a;
                m[(2, 0)] = a;
            }
            2 => {
                m[(0, 2)] = a;
                m[(2, 1)] = -a;
            }
            3 => {
                m[(0, 0)] = a;
                m[(1, 1)] = a;
                m[(2, 2)] = -2.0 * a;
            }
            4 => {
                m[(1, 2)] = a;
                m[(2, 0)] = -a;
            }
            _ => {
                m[(0, 2)] = a;
                m[(1, 0)] = b;
                m[(2, 1)] = a;
            }
        }
        m
    }

    #[test]
    fn hermitian_inner_examples() {
        let e1 = ComplexVector3::basis(0);
        let e2 = ComplexVector3::basis(1);
        assert_eq!(herm_inner(&e1, &e1), ONE);
        assert_eq!(herm_inner(&e1, &e2), ZERO);
        let v = ComplexVector3::new(ONE, I, ZERO);
        assert_eq!(herm_inner(&v, &v), C64::new(2.0, 0.0));
        // linear in the first slot, conjugate-linear in the second
        let s = C64::new(0.3, -1.2);
        assert!((herm_inner(&v.scale(s), &e2) - s * herm_inner(&v, &e2)).norm() < 1e-15);
        assert!((herm_inner(&e2, &v.scale(s)) - s.conj() * herm_inner(&e2, &v)).norm() < 1e-15);
    }

    #[test]
    fn sigma_acts_on_eigenspace_table() {
        let eps = epsilon();
        for l in 0..6u8 {
            let x = g_basis(l, C64::new(1.0, 0.0), C64::new(0.4, -0.7));
            let y = sigma_algebra(&x);
            assert!((y - x.scale(eps.powi(l as i32))).max_abs() < 1e-14, "class {l}");
        }
        let x3 = ComplexMatrix3::diag([ONE, ONE, C64::new(-2.0, 0.0)]);
        assert!((sigma_algebra(&x3) + x3).max_abs() < 1e-15);
    }

    #[test]
    fn sigma_group_identity_and_order_six() {
        let id = ComplexMatrix3::identity();
        assert!((sigma_group(&id).unwrap() - id).max_abs() < 1e-15);
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let m = random_matrix(&mut rng) + id.scale(C64::new(2.0, 0.0));
            let mut g = m;
            for _ in 0..6 {
                g = sigma_group(&g).unwrap();
            }
            assert!((g - m).max_abs() < 1e-13 * m.max_abs().max(1.0));
        }
        assert!(sigma_group(&ComplexMatrix3::zero()).is_err());
    }

    #[test]
    fn tau_is_involution_fixing_su3() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let m = random_matrix(&mut rng);
        assert!((tau_algebra(&tau_algebra(&m)) - m).max_abs() < 1e-15);
        let x = random_skew(&mut rng);
        assert!((tau_algebra(&x) - x).max_abs() < 1e-15);
    }

    #[test]
    fn projections_are_complete() {
        let id = ComplexMatrix3::identity();
        let sum = TwistClass::all()
            .iter()
            .fold(ComplexMatrix3::zero(), |s, &l| s + project_twist(&id, l));
        assert!((sum - id).max_abs() < 1e-15);

        let x = g_basis(1, C64::new(0.2, 1.0), C64::new(-1.0, 0.5));
        for l in TwistClass::all() {
            let p = project_twist(&x, l);
            if l.index() == 1 {
                assert!((p - x).max_abs() < 1e-14);
            } else {
                assert!(p.max_abs() < 1e-14);
            }
        }

        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let mut m = random_matrix(&mut rng);
        let tr = m.trace() / 3.0;
        m = m - id.scale(tr);
        let eps = epsilon();
        let mut sum = ComplexMatrix3::zero();
        for l in TwistClass::all() {
            let p = project_twist(&m, l);
            assert!((sigma_algebra(&p) - p.scale(eps.powi(l.index() as i32))).max_abs() < 1e-14);
            sum = sum + p;
        }
        assert!((sum - m).max_abs() < 1e-14);
        assert!(TwistClass::new(6).is_err());
    }

    #[test]
    fn cubic_examples() {
        let r = solve_depressed_cubic(-1.0, 0.0).unwrap();
        assert!(!r.repeated);
        for (a, b) in r.roots.iter().zip([1.0, 0.0, -1.0]) {
            assert!((a - b).abs() < 1e-15);
        }

        let r = solve_depressed_cubic(-4.25, 2.0).unwrap();
        assert!((r.roots[1] - 0.5).abs() < 1e-15);
        // the other two solve d² + d/2 − 4 = 0
        let s = 16.25f64.sqrt();
        assert!((r.roots[0] - (-0.5 + s) / 2.0).abs() < 1e-14);
        assert!((r.roots[2] - (-0.5 - s) / 2.0).abs() < 1e-14);
        assert!((r.roots[0] - 1.765_564_5).abs() < 1e-7);
        for t in r.roots {
            assert!((t * t * t - 4.25 * t + 2.0).abs() < 1e-12 * 4.25);
        }
        assert!(r.roots.iter().sum::<f64>().abs() < 1e-15);

        let r = solve_depressed_cubic(0.0, 0.0).unwrap();
        assert!(r.repeated);
        assert_eq!(r.roots, [0.0; 3]);

        // double root: (t-1)²(t+2) = t³ - 3t + 2
        let r = solve_depressed_cubic(-3.0, 2.0).unwrap();
        assert!(r.repeated);

        assert!(matches!(solve_depressed_cubic(1.0, 1.0), Err(Error::ComplexRoots(_))));
    }

    #[test]
    fn inverse_and_det() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for _ in 0..20 {
            let m = random_matrix(&mut rng);
            let inv = m.inverse().unwrap();
            assert!((m * inv - ComplexMatrix3::identity()).max_abs() < 1e-10);
            assert!(((m * inv).det() - ONE).norm() < 1e-10);
        }
    }

    #[test]
    fn matexp_examples() {
        let z = ComplexMatrix3::zero();
        assert!((matexp_skew(&z, 3.0).unwrap() - ComplexMatrix3::identity()).max_abs() < 1e-15);
        let d = ComplexMatrix3::diag([I, -I, ZERO]);
        let e = matexp_skew(&d, PI).unwrap();
        let want = ComplexMatrix3::diag([-ONE, -ONE, ONE]);
        assert!((e - want).max_abs() < 1e-15);
        assert!(matexp_skew(&ComplexMatrix3::identity(), 1.0).is_err());
    }

    #[test]
    fn matexp_random_skew() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        for _ in 0..200 {
            let d = random_skew(&mut rng);
            let e = matexp_skew(&d, 1.0).unwrap();
            assert!(unitary_residual(&e) < 1e-12);
            assert!((e.det().norm() - 1.0).abs() < 1e-12);
            let s = rng.gen_range(-2.0..2.0);
            let t = rng.gen_range(-2.0..2.0);
            let lhs = matexp_skew(&d, s + t).unwrap();
            let rhs = matexp_skew(&d, s).unwrap() * matexp_skew(&d, t).unwrap();
            assert!((lhs - rhs).max_abs() < 1e-12);
            // Taylor series oracle
            let mut term = ComplexMatrix3::identity();
            let mut sum = term;
            for n in 1..40 {
                term = (term * d).scale(C64::new(1.0 / n as f64, 0.0));
                sum = sum + term;
            }
            assert!((sum - e).max_abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_eigen_degenerate_spectra() {
        // Double eigenvalue conjugated by a unitary.
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let u = matexp_skew(&random_skew(&mut rng), 1.0).unwrap();
        let h = u * ComplexMatrix3::diag([C64::new(2.0, 0.0), C64::new(2.0, 0.0), C64::new(-1.0, 0.0)]) * u.dagger();
        let e = eigen_hermitian(&h);
        let recon = spectral_function(&e, |w| C64::new(w, 0.0));
        assert!((recon - h).max_abs() < 1e-12);
        for j in 0..3 {
            for k in 0..3 {
                let ip = herm_inner(&e.vectors[j], &e.vectors[k]);
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        let id = ComplexMatrix3::identity().scale(C64::new(0.7, 0.0));
        let e = eigen_hermitian(&id);
        assert!(e.values.iter().all(|v| (v - 0.7).abs() < 1e-15));
    }
}
