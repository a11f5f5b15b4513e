//! Expression trees for meromorphic functions of one complex variable.

use std::fmt;

use thiserror::Error;

use super::poly::PolyC;
use crate::scalar::{cone, cre, czero, Cx, Real};

/// Default threshold below which a denominator counts as a pole hit.
pub const POLE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("evaluation at z = {re}{im:+}i is within pole tolerance (|denominator| = {denom:e})")]
    PoleProximity { re: f64, im: f64, denom: f64 },
    #[error("non-finite value at z = {re}{im:+}i")]
    NonFinite { re: f64, im: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticExpr<T> {
    Const(Cx<T>),
    Var,
    Poly(PolyC<T>),
    Add(Box<AnalyticExpr<T>>, Box<AnalyticExpr<T>>),
    Sub(Box<AnalyticExpr<T>>, Box<AnalyticExpr<T>>),
    Mul(Box<AnalyticExpr<T>>, Box<AnalyticExpr<T>>),
    Div(Box<AnalyticExpr<T>>, Box<AnalyticExpr<T>>),
    Neg(Box<AnalyticExpr<T>>),
    Powi(Box<AnalyticExpr<T>>, i32),
    Exp(Box<AnalyticExpr<T>>),
}

use AnalyticExpr as E;

impl<T: Real> AnalyticExpr<T> {
    pub fn constant(c: Cx<T>) -> Self {
        E::Const(c)
    }

    pub fn real(x: T) -> Self {
        E::Const(cre(x))
    }

    pub fn z() -> Self {
        E::Var
    }

    pub fn poly(p: PolyC<T>) -> Self {
        if p.degree() == 0 {
            E::Const(p.coeffs().first().copied().unwrap_or_else(czero))
        } else {
            E::Poly(p)
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            E::Const(c) => c.re == T::zero() && c.im == T::zero(),
            E::Poly(p) => p.is_zero(),
            _ => false,
        }
    }

    fn is_one(&self) -> bool {
        matches!(self, E::Const(c) if *c == cone())
    }

    /// Polynomial view of a leaf (constant, variable or polynomial).
    fn leaf_poly(&self) -> Option<PolyC<T>> {
        match self {
            E::Const(c) => Some(PolyC::constant(*c)),
            E::Var => Some(PolyC::z()),
            E::Poly(p) => Some(p.clone()),
            _ => None,
        }
    }

    pub fn add(a: Self, b: Self) -> Self {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (Some(p), Some(q)) = (a.leaf_poly(), b.leaf_poly()) {
            return Self::poly(p + q);
        }
        E::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Self, b: Self) -> Self {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Self::neg(b);
        }
        if let (Some(p), Some(q)) = (a.leaf_poly(), b.leaf_poly()) {
            return Self::poly(p - q);
        }
        E::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Self, b: Self) -> Self {
        if a.is_zero() || b.is_zero() {
            return E::Const(czero());
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if let (Some(p), Some(q)) = (a.leaf_poly(), b.leaf_poly()) {
            return Self::poly(p * q);
        }
        E::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Self, b: Self) -> Self {
        if a.is_zero() {
            return E::Const(czero());
        }
        if b.is_one() {
            return a;
        }
        if let (Some(p), E::Const(c)) = (a.leaf_poly(), &b) {
            if c.norm() > T::zero() {
                return Self::poly(p.scale(c.inv()));
            }
        }
        E::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Self) -> Self {
        match a {
            E::Neg(inner) => *inner,
            other => match other.leaf_poly() {
                Some(p) => Self::poly(-p),
                None => E::Neg(Box::new(other)),
            },
        }
    }

    pub fn powi(a: Self, n: i32) -> Self {
        match n {
            0 => E::Const(cone()),
            1 => a,
            _ => {
                if n > 0 {
                    if let Some(p) = a.leaf_poly() {
                        return Self::poly(p.pow(n as u32));
                    }
                }
                if let E::Const(c) = a {
                    return E::Const(c.powi(n));
                }
                E::Powi(Box::new(a), n)
            }
        }
    }

    pub fn exp(a: Self) -> Self {
        match a {
            E::Const(c) => E::Const(c.exp()),
            other => E::Exp(Box::new(other)),
        }
    }

    pub fn eval(&self, z: Cx<T>) -> Result<Cx<T>, ExprError> {
        self.eval_with(z, T::lit(POLE_EPS))
    }

    pub fn eval_with(&self, z: Cx<T>, pole_eps: T) -> Result<Cx<T>, ExprError> {
        let pole = |d: Cx<T>| ExprError::PoleProximity {
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
            denom: d.norm().to_f64_lossy(),
        };
        let v = match self {
            E::Const(c) => *c,
            E::Var => z,
            E::Poly(p) => p.eval(z),
            E::Add(a, b) => a.eval_with(z, pole_eps)? + b.eval_with(z, pole_eps)?,
            E::Sub(a, b) => a.eval_with(z, pole_eps)? - b.eval_with(z, pole_eps)?,
            E::Mul(a, b) => a.eval_with(z, pole_eps)? * b.eval_with(z, pole_eps)?,
            E::Div(a, b) => {
                let d = b.eval_with(z, pole_eps)?;
                if d.norm() < pole_eps {
                    return Err(pole(d));
                }
                a.eval_with(z, pole_eps)? / d
            }
            E::Neg(a) => -a.eval_with(z, pole_eps)?,
            E::Powi(a, n) => {
                let base = a.eval_with(z, pole_eps)?;
                if *n < 0 && base.norm() < pole_eps {
                    return Err(pole(base));
                }
                base.powi(*n)
            }
            E::Exp(a) => a.eval_with(z, pole_eps)?.exp(),
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
            })
        }
    }

    /// Exact symbolic derivative with respect to `z`.
    pub fn derivative(&self) -> Self {
        match self {
            E::Const(_) => E::Const(czero()),
            E::Var => E::Const(cone()),
            E::Poly(p) => Self::poly(p.derivative()),
            E::Add(a, b) => Self::add(a.derivative(), b.derivative()),
            E::Sub(a, b) => Self::sub(a.derivative(), b.derivative()),
            E::Mul(a, b) => Self::add(
                Self::mul(a.derivative(), (**b).clone()),
                Self::mul((**a).clone(), b.derivative()),
            ),
            E::Div(a, b) => Self::div(
                Self::sub(
                    Self::mul(a.derivative(), (**b).clone()),
                    Self::mul((**a).clone(), b.derivative()),
                ),
                Self::powi((**b).clone(), 2),
            ),
            E::Neg(a) => Self::neg(a.derivative()),
            E::Powi(a, n) => Self::mul(
                Self::mul(
                    E::Const(cre(T::lit(*n as f64))),
                    Self::powi((**a).clone(), n - 1),
                ),
                a.derivative(),
            ),
            E::Exp(a) => Self::mul(self.clone(), a.derivative()),
        }
    }

    pub fn contains_exp(&self) -> bool {
        match self {
            E::Const(_) | E::Var | E::Poly(_) => false,
            E::Exp(_) => true,
            E::Add(a, b) | E::Sub(a, b) | E::Mul(a, b) | E::Div(a, b) => {
                a.contains_exp() || b.contains_exp()
            }
            E::Neg(a) | E::Powi(a, _) => a.contains_exp(),
        }
    }

    /// Numerator and denominator polynomials when the expression is a
    /// rational function. No cancellation of common factors is attempted.
    pub fn as_rational(&self) -> Option<(PolyC<T>, PolyC<T>)> {
        let one = || PolyC::constant(cone());
        let r = match self {
            E::Exp(_) => return None,
            E::Const(_) | E::Var | E::Poly(_) => (self.leaf_poly()?, one()),
            E::Add(a, b) | E::Sub(a, b) => {
                let (n1, d1) = a.as_rational()?;
                let (n2, d2) = b.as_rational()?;
                let sign = matches!(self, E::Sub(..));
                if d1 == d2 {
                    (if sign { n1 - n2 } else { n1 + n2 }, d1)
                } else {
                    let l = n1 * d2.clone();
                    let r = n2 * d1.clone();
                    (if sign { l - r } else { l + r }, d1 * d2)
                }
            }
            E::Mul(a, b) => {
                let (n1, d1) = a.as_rational()?;
                let (n2, d2) = b.as_rational()?;
                (n1 * n2, d1 * d2)
            }
            E::Div(a, b) => {
                let (n1, d1) = a.as_rational()?;
                let (n2, d2) = b.as_rational()?;
                if n2.is_zero() {
                    return None;
                }
                (n1 * d2, d1 * n2)
            }
            E::Neg(a) => {
                let (n, d) = a.as_rational()?;
                (-n, d)
            }
            E::Powi(a, k) => {
                let (n, d) = a.as_rational()?;
                if *k >= 0 {
                    (n.pow(*k as u32), d.pow(*k as u32))
                } else {
                    if n.is_zero() {
                        return None;
                    }
                    (d.pow(k.unsigned_abs()), n.pow(k.unsigned_abs()))
                }
            }
        };
        Some(normalize_rational(r.0, r.1))
    }

    /// The polynomial this expression equals, when its rational form has a
    /// constant denominator.
    pub fn as_polynomial(&self) -> Option<PolyC<T>> {
        let (n, d) = self.as_rational()?;
        (d.degree() == 0).then(|| n.scale(d.leading().inv()))
    }
}

fn normalize_rational<T: Real>(n: PolyC<T>, d: PolyC<T>) -> (PolyC<T>, PolyC<T>) {
    if d.degree() == 0 && !d.is_zero() {
        let s = d.leading().inv();
        return (n.scale(s), PolyC::constant(cone()));
    }
    (n, d)
}

fn write_const<T: Real>(f: &mut fmt::Formatter<'_>, c: Cx<T>) -> fmt::Result {
    if c.im < T::zero() {
        write!(f, "({} - {}*i)", c.re, -c.im)
    } else {
        write!(f, "({} + {}*i)", c.re, c.im)
    }
}

impl<T: Real> fmt::Display for AnalyticExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            E::Const(c) => write_const(f, *c),
            E::Var => write!(f, "z"),
            E::Poly(p) => {
                write!(f, "(")?;
                for (k, c) in p.coeffs().iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    write_const(f, *c)?;
                    match k {
                        0 => {}
                        1 => write!(f, "*z")?,
                        _ => write!(f, "*z^{k}")?,
                    }
                }
                write!(f, ")")
            }
            E::Add(a, b) => write!(f, "({a} + {b})"),
            E::Sub(a, b) => write!(f, "({a} - {b})"),
            E::Mul(a, b) => write!(f, "({a} * {b})"),
            E::Div(a, b) => write!(f, "({a} / {b})"),
            E::Neg(a) => write!(f, "(-{a})"),
            E::Powi(a, n) => write!(f, "({a}^{n})"),
            E::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type Ex = AnalyticExpr<f64>;

    #[test]
    fn sample_evaluations() {
        let sq = Ex::powi(Ex::z(), 2);
        assert!((sq.eval(cx(1.0, 1.0)).unwrap() - cx(0.0, 2.0)).norm() < 1e-15);
        let inv = Ex::div(Ex::real(1.0), Ex::z());
        assert_eq!(inv.eval(cx(2.0, 0.0)).unwrap(), cx(0.5, 0.0));
        assert_eq!(Ex::exp(Ex::z()).eval(cx(0.0, 0.0)).unwrap(), cx(1.0, 0.0));
    }

    #[test]
    fn pole_is_reported() {
        let inv = Ex::div(Ex::real(1.0), Ex::sub(Ex::z(), Ex::real(1.0)));
        assert!(matches!(
            inv.eval(cx(1.0, 0.0)),
            Err(ExprError::PoleProximity { .. })
        ));
    }

    #[test]
    fn derivative_examples() {
        let z0 = cx(0.3, -0.4);
        let d = Ex::powi(Ex::z(), 2).derivative();
        assert!((d.eval(z0).unwrap() - z0 * 2.0).norm() < 1e-15);
        let d = Ex::div(Ex::real(1.0), Ex::z()).derivative();
        assert!((d.eval(z0).unwrap() + z0.powi(-2)).norm() < 1e-13);
        let d = Ex::mul(Ex::exp(Ex::z()), Ex::z()).derivative();
        let want = z0.exp() * (z0 + 1.0);
        assert!((d.eval(z0).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn rational_form() {
        let e = Ex::div(Ex::real(1.0), Ex::powi(Ex::sub(Ex::z(), Ex::real(2.0)), 2));
        let (n, d) = e.as_rational().unwrap();
        assert_eq!(n.degree(), 0);
        assert_eq!(d.degree(), 2);
        assert!(Ex::exp(Ex::z()).as_rational().is_none());
        let p = Ex::mul(Ex::real(3.0), Ex::powi(Ex::z(), 2)).as_polynomial().unwrap();
        assert_eq!(p, PolyC::from_real(&[0.0, 0.0, 3.0]));
    }
}
