//! Dense univariate polynomials with complex coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::{cone, cre, czero, Cx, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomials share a common factor (normalized resultant {resultant:e})")]
    CommonFactor { resultant: f64 },
    #[error("root finding did not converge for a polynomial of degree {degree}")]
    RootFindingFailure { degree: usize },
    #[error("division by the zero polynomial")]
    DivisionByZero,
}

/// Polynomial `c0 + c1 z + … + cn z^n`; trailing zero coefficients are
/// trimmed so the leading coefficient is nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyC<T> {
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> PolyC<T> {
    pub fn new(mut coeffs: Vec<Cx<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.re == T::zero() && c.im == T::zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| cre(T::lit(c))).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Cx<T>) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Self::new(vec![czero(), cone()])
    }

    /// `∏ (z - r)`.
    pub fn from_roots(roots: &[Cx<T>]) -> Self {
        roots.iter().fold(Self::constant(cone()), |acc, &r| {
            acc * Self::new(vec![-r, cone()])
        })
    }

    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Cx<T> {
        self.coeffs.last().copied().unwrap_or_else(czero)
    }

    pub fn eval(&self, z: Cx<T>) -> Cx<T> {
        self.coeffs.iter().rev().fold(czero(), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::of_usize(k))
                .collect(),
        )
    }

    /// Antiderivative vanishing at `base`.
    pub fn antiderivative(&self, base: Cx<T>) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(czero());
        for (k, &c) in self.coeffs.iter().enumerate() {
            out.push(c / T::of_usize(k + 1));
        }
        let p = Self::new(out);
        let shift = p.eval(base);
        p - Self::constant(shift)
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(cone()), |acc, _| acc * self.clone())
    }

    /// Drops leading coefficients below `rel · max_coeff`.
    pub fn trimmed(&self, rel: T) -> Self {
        let cut = rel * self.max_coeff();
        let mut c = self.coeffs.clone();
        while c.last().is_some_and(|x| x.norm() <= cut) {
            c.pop();
        }
        Self::new(c)
    }

    pub fn max_coeff(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// Euclidean long division: `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self), PolyError> {
        if d.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        if self.coeffs.len() < d.coeffs.len() {
            return Ok((Self::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let dn = d.coeffs.len() - 1;
        let lead = d.leading();
        let mut quot = vec![czero(); rem.len() - dn];
        for k in (0..quot.len()).rev() {
            let coef = rem[k + dn] / lead;
            quot[k] = coef;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j] - coef * dc;
            }
        }
        rem.truncate(dn);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Resultant of the two polynomials after normalizing each to unit
    /// maximal coefficient, computed as the determinant of the Sylvester
    /// matrix.
    pub fn normalized_resultant(&self, other: &Self) -> Cx<T> {
        if self.is_zero() || other.is_zero() {
            return czero();
        }
        let p = self.scale(cre(T::one() / self.max_coeff()));
        let q = other.scale(cre(T::one() / other.max_coeff()));
        let (m, n) = (p.degree(), q.degree());
        if m == 0 {
            return p.leading().powu(n as u32);
        }
        if n == 0 {
            return q.leading().powu(m as u32);
        }
        let size = m + n;
        let mut mat = vec![vec![czero::<T>(); size]; size];
        // rows 0..n hold shifted copies of p (highest degree first), rows n.. copies of q
        for r in 0..n {
            for (k, &c) in p.coeffs.iter().rev().enumerate() {
                mat[r][r + k] = c;
            }
        }
        for r in 0..m {
            for (k, &c) in q.coeffs.iter().rev().enumerate() {
                mat[n + r][r + k] = c;
            }
        }
        complex_det(mat)
    }

    /// All complex roots (with repetition) by Laguerre iteration and
    /// deflation, each polished by Newton steps on the undeflated polynomial.
    pub fn roots(&self) -> Result<Vec<Cx<T>>, PolyError> {
        let n = self.degree();
        if self.is_zero() || n == 0 {
            return Ok(Vec::new());
        }
        let mut work = self.clone();
        let mut roots = Vec::with_capacity(n);
        for _ in 0..n {
            let r = laguerre(&work, czero()).ok_or(PolyError::RootFindingFailure { degree: n })?;
            roots.push(r);
            work = deflate(&work, r);
        }
        let dp = self.derivative();
        for r in roots.iter_mut() {
            let mut x = *r;
            for _ in 0..3 {
                let d = dp.eval(x);
                if d.norm() <= T::epsilon() * self.max_coeff() {
                    break;
                }
                let step = self.eval(x) / d;
                if !(step.re.is_finite() && step.im.is_finite()) {
                    break;
                }
                let cand = x - step;
                if self.eval(cand).norm() <= self.eval(x).norm() {
                    x = cand;
                } else {
                    break;
                }
            }
            *r = x;
        }
        Ok(roots)
    }

    /// Distinct roots with multiplicities. Roots closer than `cluster_tol`
    /// (relative to `1 + |root|`) are merged and the cluster mean is reported.
    pub fn roots_with_multiplicity(&self, cluster_tol: T) -> Result<Vec<(Cx<T>, usize)>, PolyError> {
        let roots = self.roots()?;
        let mut clusters: Vec<Vec<Cx<T>>> = Vec::new();
        for r in roots {
            let hit = clusters.iter_mut().find(|cl| {
                let c = mean(cl);
                (c - r).norm() <= cluster_tol * (T::one() + c.norm())
            });
            match hit {
                Some(cl) => cl.push(r),
                None => clusters.push(vec![r]),
            }
        }
        let mut out: Vec<(Cx<T>, usize)> = clusters.iter().map(|cl| (mean(cl), cl.len())).collect();
        out.sort_by(|a, b| {
            a.0.re
                .partial_cmp(&b.0.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.im.partial_cmp(&b.0.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        Ok(out)
    }

    /// Order of vanishing at `z0`: number of leading derivatives that are
    /// negligible relative to the coefficient scale.
    pub fn vanishing_order(&self, z0: Cx<T>, tol: T) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let mut p = self.clone();
        let mut k = 0;
        let mut fact = T::one();
        loop {
            let scale = p.max_coeff() * (T::one() + z0.norm()).powi(p.degree() as i32);
            if p.is_zero() || (p.eval(z0) / fact).norm() > tol * scale.max(T::one()) {
                return k;
            }
            k += 1;
            fact *= T::of_usize(k);
            p = p.derivative();
        }
    }
}

/// A zero (positive order) or pole (negative order) of a rational function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOrder<T> {
    pub root: Cx<T>,
    pub order: i32,
}

/// Zeros of `p` and poles of `q` for the rational function `p/q`, restricted
/// to the closed rectangle `(x_min, x_max, y_min, y_max)` when given.
pub fn rational_orders<T: Real>(
    p: &PolyC<T>,
    q: &PolyC<T>,
    rect: Option<(T, T, T, T)>,
    coprime_eps: T,
) -> Result<Vec<RootOrder<T>>, PolyError> {
    if p.degree() > 0 && q.degree() > 0 {
        let res = p.normalized_resultant(q).norm();
        if !(res > coprime_eps) {
            return Err(PolyError::CommonFactor {
                resultant: res.to_f64_lossy(),
            });
        }
    }
    let inside = |z: Cx<T>| match rect {
        None => true,
        Some((x0, x1, y0, y1)) => z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1,
    };
    let cluster = T::lit(1e-3);
    let mut out = Vec::new();
    for (r, m) in p.roots_with_multiplicity(cluster)? {
        if inside(r) {
            out.push(RootOrder { root: r, order: m as i32 });
        }
    }
    for (r, m) in q.roots_with_multiplicity(cluster)? {
        if inside(r) {
            out.push(RootOrder { root: r, order: -(m as i32) });
        }
    }
    Ok(out)
}

fn mean<T: Real>(v: &[Cx<T>]) -> Cx<T> {
    let s = v.iter().fold(czero::<T>(), |a, &b| a + b);
    s / T::of_usize(v.len())
}

fn deflate<T: Real>(p: &PolyC<T>, r: Cx<T>) -> PolyC<T> {
    let n = p.coeffs.len();
    let mut out = vec![czero(); n - 1];
    let mut carry = czero();
    for k in (1..n).rev() {
        carry = carry * r + p.coeffs[k];
        out[k - 1] = carry;
    }
    PolyC::new(out)
}

fn laguerre<T: Real>(p: &PolyC<T>, start: Cx<T>) -> Option<Cx<T>> {
    let n = p.degree();
    if n == 1 {
        return Some(-p.coeffs[0] / p.coeffs[1]);
    }
    let nf = T::of_usize(n);
    let mut x = start;
    // fractional steps break limit cycles
    let fracs = [0.5, 0.25, 0.75, 0.13, 0.38, 0.62, 0.88, 1.0];
    for iter in 1..=800 {
        let (mut b, mut d, mut f) = (p.leading(), czero::<T>(), czero::<T>());
        let mut err = b.norm();
        let abx = x.norm();
        for k in (0..n).rev() {
            f = x * f + d;
            d = x * d + b;
            b = x * b + p.coeffs[k];
            err = b.norm() + abx * err;
        }
        err = err * T::epsilon();
        if b.norm() <= err {
            return Some(x);
        }
        let g = d / b;
        let g2 = g * g;
        let h = g2 - f * T::lit(2.0) / b;
        let sq = ((h * nf - g2) * (nf - T::one())).sqrt();
        let gp = g + sq;
        let gm = g - sq;
        let denom = if gp.norm() >= gm.norm() { gp } else { gm };
        let dx = if denom.norm() > T::zero() {
            cre(nf) / denom
        } else {
            Cx::from_polar(T::one() + abx, T::of_usize(iter))
        };
        let x1 = x - dx;
        if x1 == x {
            return Some(x);
        }
        if iter % 10 != 0 {
            x = x1;
        } else {
            x = x - dx * T::lit(fracs[(iter / 10) % fracs.len()]);
        }
        if !(x.re.is_finite() && x.im.is_finite()) {
            return None;
        }
    }
    // accept a slowly converging multiple root if the residual is tiny
    let scale = p.max_coeff() * (T::one() + x.norm()).powi(n as i32);
    if p.eval(x).norm() <= T::lit(1e-6) * scale {
        Some(x)
    } else {
        None
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub(crate) fn complex_det<T: Real>(mut m: Vec<Vec<Cx<T>>>) -> Cx<T> {
    let n = m.len();
    let mut det = cone::<T>();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i][col]
                    .norm()
                    .partial_cmp(&m[j][col].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if m[pivot][col].norm() == T::zero() {
            return czero();
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det = det * p;
        for r in col + 1..n {
            let factor = m[r][col] / p;
            if factor.norm() == T::zero() {
                continue;
            }
            for c in col..n {
                let v = m[col][c];
                m[r][c] = m[r][c] - factor * v;
            }
        }
    }
    det
}

impl<T: Real> Add for PolyC<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let get = |v: &Vec<Cx<T>>, k: usize| v.get(k).copied().unwrap_or_else(czero);
        Self::new((0..n).map(|k| get(&self.coeffs, k) + get(&o.coeffs, k)).collect())
    }
}

impl<T: Real> Sub for PolyC<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Neg for PolyC<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl<T: Real> Mul for PolyC<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![czero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Self::new(out)
    }
}

impl<T: Real> fmt::Display for PolyC<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        write!(f, "(")?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}+{}*i)", c.re, c.im)?;
            match k {
                0 => {}
                1 => write!(f, "*z")?,
                _ => write!(f, "*z^{k}")?,
            }
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn p(c: &[f64]) -> PolyC<f64> {
        PolyC::from_real(c)
    }

    #[test]
    fn trims_and_degrees() {
        let q = p(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(q.degree(), 1);
        assert!(p(&[0.0]).is_zero());
    }

    #[test]
    fn division_is_exact_for_multiples() {
        let d = p(&[-1.0, 1.0]);
        let num = d.clone() * p(&[2.0, 0.0, 3.0]);
        let (q, r) = num.div_rem(&d).unwrap();
        assert!(r.is_zero() || r.max_coeff() < 1e-14);
        assert_eq!(q, p(&[2.0, 0.0, 3.0]));
    }

    #[test]
    fn roots_of_quadratic() {
        let mut r = p(&[-1.0, 0.0, 1.0]).roots_with_multiplicity(1e-6).unwrap();
        r.sort_by(|a, b| a.0.re.partial_cmp(&b.0.re).unwrap());
        assert_eq!(r.len(), 2);
        assert!((r[0].0 - cx(-1.0, 0.0)).norm() < 1e-12 && r[0].1 == 1);
        assert!((r[1].0 - cx(1.0, 0.0)).norm() < 1e-12 && r[1].1 == 1);
    }

    #[test]
    fn multiplicities_up_to_four() {
        let a = cx(0.3, -0.7);
        let b = cx(-1.1, 0.4);
        for m in 1..=4usize {
            let mut roots = vec![a; m];
            roots.push(b);
            roots.push(b);
            let poly = PolyC::from_roots(&roots);
            let found = poly.roots_with_multiplicity(1e-3).unwrap();
            assert_eq!(found.len(), 2, "m = {m}: {found:?}");
            let at_a = found.iter().find(|(r, _)| (*r - a).norm() < 1e-5).unwrap();
            let at_b = found.iter().find(|(r, _)| (*r - b).norm() < 1e-5).unwrap();
            assert_eq!(at_a.1, m);
            assert_eq!(at_b.1, 2);
            assert_eq!(poly.vanishing_order(a, 1e-9), m);
        }
    }

    #[test]
    fn resultant_detects_common_roots() {
        let a = p(&[-1.0, 1.0]) * p(&[2.0, 1.0]);
        let b = p(&[-1.0, 1.0]) * p(&[5.0, 1.0]);
        assert!(a.normalized_resultant(&b).norm() < 1e-12);
        let c = p(&[3.0, 1.0]);
        assert!(a.normalized_resultant(&c).norm() > 1e-3);
    }

    #[test]
    fn antiderivative_vanishes_at_base() {
        let q = p(&[0.0, 2.0]);
        let base = cx(0.5, 0.25);
        let prim = q.antiderivative(base);
        assert!(prim.eval(base).norm() < 1e-15);
        assert_eq!(prim.derivative(), q);
    }

    #[test]
    fn rational_orders_examples() {
        let one = p(&[1.0]);
        let r = rational_orders(&p(&[0.0, 1.0]), &one, None, 1e-10).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].order, 1);
        assert!(r[0].root.norm() < 1e-14);
        let r = rational_orders(&one, &p(&[1.0, -2.0, 1.0]), None, 1e-10).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].order, -2);
        assert!((r[0].root - cx(1.0, 0.0)).norm() < 1e-6);
        let r = rational_orders(&p(&[-1.0, 0.0, 1.0]), &one, None, 1e-10).unwrap();
        assert_eq!(r.iter().map(|x| x.order).collect::<Vec<_>>(), vec![1, 1]);
        let shared = p(&[-1.0, 1.0]);
        assert!(matches!(
            rational_orders(&(shared.clone() * p(&[2.0, 1.0])), &shared, None, 1e-10),
            Err(PolyError::CommonFactor { .. })
        ));
    }
}
