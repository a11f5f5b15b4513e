//! Hermitian-matrix model of Minkowski 4-space.
//!
//! A point `(x0, x1, x2, x3)` with metric `-dx0² + dx1² + dx2² + dx3²` is
//! identified with the Hermitian matrix
//!
//! ```text
//! | x0 + x3     x1 + i x2 |
//! | x1 - i x2   x0 - x3   |
//! ```
//!
//! so that `<m, m> = -det(m)`. `SL(2, C)` acts by `m ↦ Φ m Φ*` and preserves
//! the inner product.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;
use thiserror::Error;

use crate::scalar::{cone, cre, cx, czero, Cx, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LorentzError {
    #[error("matrix is not in SL(2,C): |det - 1| = {deviation:e} exceeds {tol:e}")]
    NotUnimodular { deviation: f64, tol: f64 },
}

/// A vector of Minkowski 4-space in canonical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpacetimeVec<T> {
    pub x0: T,
    pub x1: T,
    pub x2: T,
    pub x3: T,
}

impl<T: Real> SpacetimeVec<T> {
    pub fn new(x0: T, x1: T, x2: T, x3: T) -> Self {
        Self { x0, x1, x2, x3 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn from_array(a: [T; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.x0, self.x1, self.x2, self.x3]
    }

    /// `-x0² + x1² + x2² + x3²`, computed componentwise.
    pub fn minkowski_norm2(self) -> T {
        -self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    pub fn euclid_norm(self) -> T {
        (self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3).sqrt()
    }
}

impl<T: Real> Add for SpacetimeVec<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x0 + o.x0, self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl<T: Real> Sub for SpacetimeVec<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x0 - o.x0, self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl<T: Real> Mul<T> for SpacetimeVec<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x0 * s, self.x1 * s, self.x2 * s, self.x3 * s)
    }
}

/// General 2×2 complex matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub a: Cx<T>,
    pub b: Cx<T>,
    pub c: Cx<T>,
    pub d: Cx<T>,
}

impl<T: Real> Mat2<T> {
    pub fn new(a: Cx<T>, b: Cx<T>, c: Cx<T>, d: Cx<T>) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(cone(), czero(), czero(), cone())
    }

    pub fn zero() -> Self {
        Self::new(czero(), czero(), czero(), czero())
    }

    pub fn diag(a: Cx<T>, d: Cx<T>) -> Self {
        Self::new(a, czero(), czero(), d)
    }

    pub fn det(&self) -> Cx<T> {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Cx<T> {
        self.a + self.d
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Inverse via the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == T::zero() {
            return None;
        }
        let inv = cone::<T>() / det;
        Some(Self::new(self.d * inv, -self.b * inv, -self.c * inv, self.a * inv))
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> T {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> T {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    /// Complex-bilinear extension of the Minkowski product to complex
    /// 4-vectors, via the polarized determinant.
    pub fn bilinear(&self, other: &Self) -> Cx<T> {
        // det(X+Y) - det X - det Y = x11 y22 + x22 y11 - x12 y21 - x21 y12
        let pol = self.a * other.d + self.d * other.a - self.b * other.c - self.c * other.b;
        -pol * T::lit(0.5)
    }

    /// Complex 4-vector coordinates `(x0, x1, x2, x3)` of the matrix.
    pub fn coords(&self) -> [Cx<T>; 4] {
        let half = T::lit(0.5);
        let x0 = (self.a + self.d) * half;
        let x3 = (self.a - self.d) * half;
        let x1 = (self.b + self.c) * half;
        // x1 + i x2 = b, x1 - i x2 = c
        let x2 = (self.b - self.c) * cx(T::zero(), -half);
        [x0, x1, x2, x3]
    }

    /// Squared Euclidean norm of the complex 4-vector.
    pub fn euclid_norm2(&self) -> T {
        self.coords().iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn euclid_norm(&self) -> T {
        self.euclid_norm2().sqrt()
    }

    /// `(m + m*) / 2`, exactly Hermitian.
    pub fn hermitian_part(&self) -> HermPoint<T> {
        let half = T::lit(0.5);
        HermPoint::new(
            (self.a.re + self.a.re) * half,
            (self.b + self.c.conj()) * half,
            (self.d.re + self.d.re) * half,
        )
    }

    pub fn column(&self, j: usize) -> (Cx<T>, Cx<T>) {
        match j {
            0 => (self.a, self.c),
            _ => (self.b, self.d),
        }
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl<T: Real> Neg for Mat2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl<T: Real> Mul<T> for Mat2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}

impl<T: Real> Zero for Mat2<T> {
    fn zero() -> Self {
        Mat2::zero()
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }
}

/// Element of `SL(2, C)`: a 2×2 complex matrix whose determinant is one up to
/// the tolerance it was checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl2c<T>(Mat2<T>);

impl<T: Real> Sl2c<T> {
    pub const DEFAULT_TOL_DET: f64 = 1e-9;

    pub fn identity() -> Self {
        Self(Mat2::identity())
    }

    pub fn new(m: Mat2<T>) -> Result<Self, LorentzError> {
        Self::with_tolerance(m, T::lit(Self::DEFAULT_TOL_DET))
    }

    pub fn with_tolerance(m: Mat2<T>, tol: T) -> Result<Self, LorentzError> {
        let deviation = (m.det() - cone()).norm();
        if deviation.is_nan() || deviation > tol {
            return Err(LorentzError::NotUnimodular {
                deviation: deviation.to_f64_lossy(),
                tol: tol.to_f64_lossy(),
            });
        }
        Ok(Self(m))
    }

    /// `diag(e^{t/2}, e^{-t/2})`, a boost along `x3`.
    pub fn boost_x3(t: T) -> Self {
        let half = t * T::lit(0.5);
        Self(Mat2::diag(cre(half.exp()), cre((-half).exp())))
    }

    pub fn matrix(&self) -> &Mat2<T> {
        &self.0
    }

    pub fn det_deviation(&self) -> T {
        (self.0.det() - cone()).norm()
    }

    /// Inverse using the adjugate, exact for unimodular matrices.
    pub fn inverse(&self) -> Mat2<T> {
        let m = &self.0;
        Mat2::new(m.d, -m.b, -m.c, m.a)
    }
}

/// A 2×2 Hermitian matrix, i.e. a point of Minkowski 4-space.
///
/// Only `h11`, `h22` (real) and `h12` are stored; `h21 = conj(h12)` holds by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HermPoint<T> {
    h11: T,
    h12: Cx<T>,
    h22: T,
}

impl<T: Real> HermPoint<T> {
    pub fn new(h11: T, h12: Cx<T>, h22: T) -> Self {
        Self { h11, h12, h22 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), czero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::new(T::one(), czero(), T::one())
    }

    pub fn h11(&self) -> Cx<T> {
        cre(self.h11)
    }
    pub fn h12(&self) -> Cx<T> {
        self.h12
    }
    pub fn h21(&self) -> Cx<T> {
        self.h12.conj()
    }
    pub fn h22(&self) -> Cx<T> {
        cre(self.h22)
    }

    pub fn to_mat(&self) -> Mat2<T> {
        Mat2::new(self.h11(), self.h12(), self.h21(), self.h22())
    }

    pub fn det(&self) -> T {
        self.h11 * self.h22 - self.h12.norm_sqr()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.h11 * s, self.h12 * s, self.h22 * s)
    }
}

impl<T: Real> Add for HermPoint<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.h11 + o.h11, self.h12 + o.h12, self.h22 + o.h22)
    }
}

impl<T: Real> Sub for HermPoint<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.h11 - o.h11, self.h12 - o.h12, self.h22 - o.h22)
    }
}

impl<T: Real> Mul<T> for HermPoint<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

pub fn to_herm<T: Real>(v: SpacetimeVec<T>) -> HermPoint<T> {
    HermPoint::new(v.x0 + v.x3, cx(v.x1, v.x2), v.x0 - v.x3)
}

pub fn from_herm<T: Real>(m: HermPoint<T>) -> SpacetimeVec<T> {
    let half = T::lit(0.5);
    SpacetimeVec::new(
        (m.h11 + m.h22) * half,
        m.h12.re,
        m.h12.im,
        (m.h11 - m.h22) * half,
    )
}

/// Minkowski product `<m, n> = -(det(m+n) - det m - det n) / 2`.
pub fn minkowski_inner<T: Real>(m: &HermPoint<T>, n: &HermPoint<T>) -> T {
    m.to_mat().bilinear(&n.to_mat()).re
}

/// The isometric action `Φ · m = Φ m Φ*`.
pub fn sl2_act<T: Real>(phi: &Sl2c<T>, m: &HermPoint<T>) -> HermPoint<T> {
    let p = phi.matrix();
    (*p * m.to_mat() * p.adjoint()).hermitian_part()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn herm(h11: f64, h12: (f64, f64), h22: f64) -> HermPoint<f64> {
        HermPoint::new(h11, cx(h12.0, h12.1), h22)
    }

    #[test]
    fn to_herm_examples() {
        assert_eq!(to_herm(SpacetimeVec::new(1.0, 0.0, 0.0, 0.0)), HermPoint::identity());
        assert_eq!(to_herm(SpacetimeVec::<f64>::zero()), HermPoint::zero());
        assert_eq!(
            to_herm(SpacetimeVec::new(1.0, 0.0, 0.0, 1.0)),
            herm(2.0, (0.0, 0.0), 0.0)
        );
    }

    #[test]
    fn from_herm_examples() {
        assert_eq!(from_herm(HermPoint::<f64>::identity()), SpacetimeVec::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(
            from_herm(herm(0.0, (1.0, 0.0), 0.0)),
            SpacetimeVec::new(0.0, 1.0, 0.0, 0.0)
        );
        // [[2, i], [-i, 0]]
        assert_eq!(
            from_herm(herm(2.0, (0.0, 1.0), 0.0)),
            SpacetimeVec::new(1.0, 0.0, 1.0, 1.0)
        );
    }

    #[test]
    fn hermitian_entries_are_exact_conjugates() {
        let m = herm(0.3, (1.25, -7.5), -2.0);
        assert_eq!(m.h21(), m.h12().conj());
        assert_eq!(m.h11().im, 0.0);
        assert_eq!(m.to_mat().hermitian_part(), m);
    }

    #[test]
    fn inner_product_examples() {
        let id = HermPoint::<f64>::identity();
        assert_eq!(minkowski_inner(&id, &id), -1.0);
        let null = herm(2.0, (0.0, 0.0), 0.0);
        assert_eq!(minkowski_inner(&null, &null), 0.0);
        let e1 = herm(0.0, (1.0, 0.0), 0.0);
        assert_eq!(minkowski_inner(&e1, &e1), 1.0);
    }

    #[test]
    fn boost_acts_as_hyperbolic_rotation() {
        let t = 0.7_f64;
        let out = sl2_act(&Sl2c::boost_x3(t), &HermPoint::identity());
        let v = from_herm(out);
        assert!((v.x0 - t.cosh()).abs() < 1e-15);
        assert!((v.x3 - t.sinh()).abs() < 1e-15);
        assert!(v.x1.abs() < 1e-15 && v.x2.abs() < 1e-15);
        let m = herm(0.4, (1.0, 2.0), -3.0);
        assert_eq!(sl2_act(&Sl2c::identity(), &m), m);
    }

    #[test]
    fn sl2_rejects_non_unimodular() {
        let m = Mat2::diag(cre(2.0), cre(1.0));
        assert!(matches!(Sl2c::<f64>::new(m), Err(LorentzError::NotUnimodular { .. })));
    }

    #[test]
    fn works_in_single_precision() {
        let v = SpacetimeVec::new(1.0_f32, 0.5, -0.25, 2.0);
        let m = to_herm(v);
        let lhs = minkowski_inner(&m, &m);
        assert!((lhs - v.minkowski_norm2()).abs() < 1e-5);
        assert_eq!(from_herm(m), v);
    }

    fn arb_sl2() -> impl Strategy<Value = Sl2c<f64>> {
        proptest::array::uniform6(-1.5f64..1.5).prop_filter_map("singular", |p| {
            let a = cx(p[0], p[1]);
            let b = cx(p[2], p[3]);
            let c = cx(p[4], p[5]);
            // d chosen so that ad - bc = 1
            if a.norm() < 0.2 {
                return None;
            }
            let d = (cone::<f64>() + b * c) / a;
            Sl2c::new(Mat2::new(a, b, c, d)).ok()
        })
    }

    fn arb_vec() -> impl Strategy<Value = SpacetimeVec<f64>> {
        proptest::array::uniform4(-10.0f64..10.0).prop_map(SpacetimeVec::from_array)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn action_preserves_inner_product(phi in arb_sl2(), v in arb_vec(), u in arb_vec()) {
            let m = to_herm(v);
            let n = to_herm(u);
            let before = minkowski_inner(&m, &n);
            let after = minkowski_inner(&sl2_act(&phi, &m), &sl2_act(&phi, &n));
            let scale = 1.0 + v.euclid_norm() * u.euclid_norm()
                * phi.matrix().frobenius().powi(4);
            prop_assert!((before - after).abs() <= 1e-10 * scale);
        }

        #[test]
        fn quadratic_form_matches_components(v in arb_vec()) {
            let m = to_herm(v);
            let q = minkowski_inner(&m, &m);
            prop_assert!((q - v.minkowski_norm2()).abs() <= 1e-12 * (1.0 + v.euclid_norm().powi(2)));
        }

        #[test]
        fn herm_round_trip_is_bit_exact(v in proptest::array::uniform4(-1024i32..1024)) {
            // dyadic inputs: every intermediate is exactly representable
            let v = SpacetimeVec::new(v[0] as f64 / 8.0, v[1] as f64 / 8.0, v[2] as f64 / 8.0, v[3] as f64 / 8.0);
            prop_assert_eq!(from_herm(to_herm(v)), v);
            let m = to_herm(v);
            prop_assert_eq!(to_herm(from_herm(m)), m);
        }
    }
}
