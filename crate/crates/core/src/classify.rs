//! Classification of data: finite total curvature for rational data,
//! nonnegative curvature, flat data and parallel mean curvature.

use std::fmt;

use thiserror::Error;

use crate::analytic::{Field, PolyC};
use crate::scalar::{cone, cre, czero, Cx, Real};
use crate::tolerances::Tolerances;
use crate::weierstrass::{Sign, WeierstrassData};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("P1 and P2 share a zero (normalized resultant {resultant:e})")]
    CommonFactor { resultant: f64 },
    #[error("the polynomial of ω vanishes identically")]
    ZeroOmega,
    #[error("Möbius parameters must satisfy |τ|² − ε|γ|² = 1")]
    BadMobius,
}

/// `g = P1/P2`, `ω = W dz`, with the constants of the representation.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalData<T> {
    pub p1: PolyC<T>,
    pub p2: PolyC<T>,
    pub w: PolyC<T>,
    pub eps: Sign,
    pub a: T,
    pub b: T,
    pub c: Cx<T>,
}

impl<T: Real> RationalData<T> {
    pub fn s(&self) -> T {
        self.a + self.eps.value::<T>() * self.b
    }

    pub fn check(&self, tol: &Tolerances) -> Result<(), ClassifyError> {
        if self.w.trimmed(T::lit(tol.coeff)).is_zero() {
            return Err(ClassifyError::ZeroOmega);
        }
        let r = self.p1.normalized_resultant(&self.p2).norm();
        if r < T::lit(tol.coprime) {
            return Err(ClassifyError::CommonFactor {
                resultant: r.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// `g ↦ (τg + εγ̄)/(γg + τ̄)` with `|τ|² − ε|γ|² = 1`, together with
/// `ω ↦ (γg + τ̄)² ω`; the quadratic form `c + s g + εc̄ g²` of `df/ω` is
/// carried along so that `df` is unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius<T> {
    pub tau: Cx<T>,
    pub gamma: Cx<T>,
}

impl<T: Real> Mobius<T> {
    pub fn new(tau: Cx<T>, gamma: Cx<T>, eps: Sign, tol: T) -> Result<Self, ClassifyError> {
        let det = tau.norm_sqr() - eps.value::<T>() * gamma.norm_sqr();
        if (det - T::one()).abs() > tol {
            return Err(ClassifyError::BadMobius);
        }
        Ok(Self { tau, gamma })
    }

    pub fn apply(&self, g: Cx<T>, eps: Sign) -> Cx<T> {
        let e = eps.value::<T>();
        (self.tau * g + self.gamma.conj() * e) / (self.gamma * g + self.tau.conj())
    }

    /// New `(c, s)` of the quadratic form.
    pub fn transform_form(&self, c: Cx<T>, s: T, eps: Sign) -> (Cx<T>, T) {
        let e = eps.value::<T>();
        let (t, g) = (self.tau, self.gamma);
        let c2 = c.conj() * g.conj() * g.conj() * e - t * g.conj() * (s * e) + c * t * t;
        let s2 = -(c * t * g).re * T::lit(4.0) + s * (t.norm_sqr() + e * g.norm_sqr());
        (c2, s2)
    }

    /// Transforms rational data. Returns `None` when the new `ω` is not
    /// polynomial.
    pub fn transform(&self, rd: &RationalData<T>, tol: &Tolerances) -> Option<RationalData<T>> {
        let e = rd.eps.value::<T>();
        let rel = T::lit(tol.coeff);
        let p1 = (rd.p1.scale(self.tau) + rd.p2.scale(self.gamma.conj() * e)).trimmed(rel);
        let p2 = (rd.p1.scale(self.gamma) + rd.p2.scale(self.tau.conj())).trimmed(rel);
        let num = rd.w.clone() * p2.clone() * p2.clone();
        let den = rd.p2.clone() * rd.p2.clone();
        let (q, r) = num.div_rem(&den).ok()?;
        if r.max_coeff() > rel * num.max_coeff().max(T::one()) {
            return None;
        }
        let (c, s) = self.transform_form(rd.c, rd.s(), rd.eps);
        Some(RationalData {
            p1,
            p2,
            w: q.trimmed(rel),
            eps: rd.eps,
            a: rd.a,
            b: e * (s - rd.a),
            c,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstructionCause {
    /// `c ≠ 0`: `deg df = deg g²ω`.
    C,
    /// `c = 0`, `a + εb ≠ 0`: `deg df = deg gω`.
    S,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    /// `ε = +1`: complete examples with `K ≥ 0` are flat.
    NonNegativeCurvature,
    /// `g` constant.
    Flat,
    /// `ω` is not a constant multiple of `P2² dz`.
    OmegaForm,
    /// `deg f > deg(ω dg)`, so `ω dg/f` has a pole.
    DegreeObstruction {
        cause: ObstructionCause,
        deg_f: usize,
        deg_omega_dg: usize,
    },
}

impl RejectReason {
    pub fn code(&self) -> &'static str {
        match self {
            RejectReason::NonNegativeCurvature => "nonnegative_curvature",
            RejectReason::Flat => "flat",
            RejectReason::OmegaForm => "omega_form",
            RejectReason::DegreeObstruction {
                cause: ObstructionCause::C,
                ..
            } => "degree_c",
            RejectReason::DegreeObstruction {
                cause: ObstructionCause::S,
                ..
            } => "degree_s",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::NonNegativeCurvature => {
                write!(f, "eps = +1: complete surfaces with K >= 0 are flat")
            }
            RejectReason::Flat => write!(f, "g is constant"),
            RejectReason::OmegaForm => write!(f, "omega is not A*P2^2 dz"),
            RejectReason::DegreeObstruction {
                cause,
                deg_f,
                deg_omega_dg,
            } => {
                let why = match cause {
                    ObstructionCause::C => "c != 0 gives deg df = deg g^2 omega",
                    ObstructionCause::S => "a + eps*b != 0 gives deg df = deg g omega",
                };
                write!(f, "{why}; deg f = {deg_f} > {deg_omega_dg} = deg(omega dg)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FtcVerdict<T> {
    AdmissibleFtc {
        /// `ω = A P2² dz`.
        amplitude: Cx<T>,
        /// Transformation applied to reach `deg P1 > deg P2`.
        normalization: Option<Mobius<T>>,
    },
    Reject(RejectReason),
}

impl<T> FtcVerdict<T> {
    pub fn is_admissible(&self) -> bool {
        matches!(self, FtcVerdict::AdmissibleFtc { .. })
    }

    pub fn code(&self) -> &'static str {
        match self {
            FtcVerdict::AdmissibleFtc { .. } => "admissible_ftc",
            FtcVerdict::Reject(r) => r.code(),
        }
    }
}

/// Möbius map sending `g(∞)` to `∞` when `deg P1 ≤ deg P2` (`ε = −1`).
fn normalization<T: Real>(rd: &RationalData<T>) -> Option<Mobius<T>> {
    if rd.p1.degree() > rd.p2.degree() {
        return None;
    }
    let limit = if rd.p1.degree() < rd.p2.degree() {
        czero()
    } else {
        rd.p1.leading() / rd.p2.leading()
    };
    if limit.norm() == T::zero() {
        return Some(Mobius {
            tau: czero(),
            gamma: cone(),
        });
    }
    let m = limit.norm();
    let tau = m / (T::one() + m * m).sqrt();
    Some(Mobius {
        tau: cre(tau),
        gamma: -cre(tau) / limit,
    })
}

pub fn ftc_classify<T: Real>(rd: &RationalData<T>, tol: &Tolerances) -> Result<FtcVerdict<T>, ClassifyError> {
    rd.check(tol)?;
    let rel = T::lit(tol.coeff);
    if rd.eps == Sign::Plus {
        return Ok(FtcVerdict::Reject(RejectReason::NonNegativeCurvature));
    }
    if rd.p1.degree() == 0 && rd.p2.degree() == 0 {
        return Ok(FtcVerdict::Reject(RejectReason::Flat));
    }
    let p2sq = rd.p2.clone() * rd.p2.clone();
    let (q, r) = rd.w.div_rem(&p2sq).map_err(|_| ClassifyError::ZeroOmega)?;
    let q = q.trimmed(rel);
    if r.max_coeff() > rel * rd.w.max_coeff() || q.degree() != 0 || q.is_zero() {
        return Ok(FtcVerdict::Reject(RejectReason::OmegaForm));
    }
    let amplitude = q.leading();
    let norm = normalization(rd);
    let nd = match &norm {
        Some(m) => m.transform(rd, tol).ok_or(ClassifyError::ZeroOmega)?,
        None => rd.clone(),
    };
    let e = nd.eps.value::<T>();
    let (c, s) = (nd.c, nd.s());
    let c_zero = c.norm() <= rel;
    let s_zero = s.abs() <= rel;
    if c_zero && s_zero {
        return Ok(FtcVerdict::AdmissibleFtc {
            amplitude,
            normalization: norm,
        });
    }
    let (p1, p2) = (&nd.p1, &nd.p2);
    let a = nd.w.leading() / (p2.leading() * p2.leading());
    let df = (p2.clone() * p2.clone()).scale(c)
        + (p1.clone() * p2.clone()).scale(cre(s))
        + (p1.clone() * p1.clone()).scale(c.conj() * e);
    let df = df.scale(a).trimmed(rel);
    let dg_num = (p1.derivative() * p2.clone() - p1.clone() * p2.derivative()).scale(a).trimmed(rel);
    let cause = if c_zero { ObstructionCause::S } else { ObstructionCause::C };
    Ok(FtcVerdict::Reject(RejectReason::DegreeObstruction {
        cause,
        deg_f: df.degree() + 1,
        deg_omega_dg: dg_num.degree(),
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScreenVerdict {
    /// `g` constant: flat, in a degenerate hyperplane; not constructed.
    Degenerate { variation: f64 },
    /// Constructible; with `ε = +1` a completeness warning is attached.
    Constructible { warning: Option<String> },
    NotTriggered,
}

pub fn completeness_screen<T: Real>(
    data: &WeierstrassData<T>,
    completeness_intent: bool,
    tol: &Tolerances,
) -> ScreenVerdict {
    let pole_eps = T::lit(tol.pole_eps);
    let grid = &data.grid;
    let g0 = data.g.eval_with(data.z0(), pole_eps).ok();
    let variation = grid
        .unmasked()
        .filter_map(|k| {
            let v = data.g.eval_with(grid.node_at(k), pole_eps).ok()?;
            Some((v - g0?).norm())
        })
        .fold(T::zero(), T::max);
    if g0.is_some() && variation < T::lit(tol.g_const) {
        return ScreenVerdict::Degenerate {
            variation: variation.to_f64_lossy(),
        };
    }
    match data.eps {
        Sign::Plus => ScreenVerdict::Constructible {
            warning: Some(
                if completeness_intent {
                    "a complete surface with eps = +1 and non-constant g does not exist; the domain cannot be extended to a complete example"
                } else {
                    "eps = +1 with non-constant g: no such surface is complete"
                }
                .to_string(),
            ),
        },
        Sign::Minus => ScreenVerdict::NotTriggered,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    /// `ε = −1`.
    Euclidean,
    /// `ε = +1`.
    Lorentzian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParallelKind {
    /// `a = b = c = 0`: zero mean curvature in an affine 3-space.
    ZeroMeanCurvature(Ambient),
    /// Affine hyperbolic space (`ε = −1`) or de Sitter space (`ε = +1`).
    Hyperquadric(Ambient),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParallelVerdict {
    ParallelH(ParallelKind),
    NonParallel { variation: f64 },
}

impl ParallelVerdict {
    pub fn code(&self) -> &'static str {
        match self {
            ParallelVerdict::ParallelH(ParallelKind::ZeroMeanCurvature(_)) => "parallel_zero_mean_curvature",
            ParallelVerdict::ParallelH(ParallelKind::Hyperquadric(_)) => "parallel_hyperquadric",
            ParallelVerdict::NonParallel { .. } => "non_parallel",
        }
    }
}

pub fn parallel_h_classify<T: Real>(f: &Field<Cx<T>>, data: &WeierstrassData<T>, tol: &Tolerances) -> ParallelVerdict {
    let f0 = data.f0;
    let variation = f.iter().map(|(_, v)| (*v - f0).norm()).fold(T::zero(), T::max) / f0.norm();
    if variation > T::lit(tol.f_const) {
        return ParallelVerdict::NonParallel {
            variation: variation.to_f64_lossy(),
        };
    }
    let ambient = match data.eps {
        Sign::Minus => Ambient::Euclidean,
        Sign::Plus => Ambient::Lorentzian,
    };
    let z = T::lit(tol.coeff);
    if data.a.abs() <= z && data.b.abs() <= z && data.c.norm() <= z {
        ParallelVerdict::ParallelH(ParallelKind::ZeroMeanCurvature(ambient))
    } else {
        ParallelVerdict::ParallelH(ParallelKind::Hyperquadric(ambient))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{parse_expression, DomainGrid};
    use crate::scalar::cx;
    use crate::weierstrass::{build_f, hopf_density};

    fn rd(p1: &[f64], p2: &[f64], w: &[f64], a: f64, b: f64, c: Cx<f64>) -> RationalData<f64> {
        RationalData {
            p1: PolyC::from_real(p1),
            p2: PolyC::from_real(p2),
            w: PolyC::from_real(w),
            eps: Sign::Minus,
            a,
            b,
            c,
        }
    }

    #[test]
    fn enneper_normal_form() {
        let tol = Tolerances::default();
        let v = ftc_classify(&rd(&[0.0, 1.0], &[1.0], &[1.0], 1.0, 1.0, cx(0.0, 0.0)), &tol).unwrap();
        assert!(v.is_admissible());
        let v = ftc_classify(&rd(&[0.0, 1.0], &[1.0], &[1.0], 1.0, 0.0, cx(0.0, 0.0)), &tol).unwrap();
        assert_eq!(v.code(), "degree_s");
        if let FtcVerdict::Reject(RejectReason::DegreeObstruction { deg_f, deg_omega_dg, .. }) = v {
            assert_eq!((deg_f, deg_omega_dg), (2, 0));
        }
        let v = ftc_classify(&rd(&[0.0, 1.0], &[1.0], &[1.0], 1.0, 1.0, cx(0.1, 0.0)), &tol).unwrap();
        assert_eq!(v.code(), "degree_c");
        let v = ftc_classify(&rd(&[0.0, 1.0], &[1.0], &[0.0, 1.0], 1.0, 1.0, cx(0.0, 0.0)), &tol).unwrap();
        assert_eq!(v.code(), "omega_form");
    }

    #[test]
    fn common_factor_is_an_error() {
        let tol = Tolerances::default();
        let e = ftc_classify(&rd(&[-1.0, 0.0, 1.0], &[-1.0, 1.0], &[1.0], 0.0, 0.0, cx(0.0, 0.0)), &tol);
        assert!(matches!(e, Err(ClassifyError::CommonFactor { .. })));
    }

    #[test]
    fn normalization_is_reported() {
        let tol = Tolerances::default();
        // g = 1/z, ω = z² dz
        let v = ftc_classify(&rd(&[1.0], &[0.0, 1.0], &[0.0, 0.0, 1.0], 0.0, 0.0, cx(0.0, 0.0)), &tol).unwrap();
        match v {
            FtcVerdict::AdmissibleFtc {
                normalization: Some(m),
                ..
            } => {
                assert_eq!(m.tau, cx(0.0, 0.0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn transformed_form_keeps_structure() {
        let m = Mobius {
            tau: cx(0.6, 0.0),
            gamma: cx(0.0, 0.8),
        };
        let (c, s) = (cx(0.3, -0.2), 0.7);
        let (c2, s2) = m.transform_form(c, s, Sign::Minus);
        // (c' + s'g' + εc̄'g'²) ω' equals (c + s g + εc̄g²) ω at a sample point
        let g = cx(0.4, 0.1);
        let g2 = m.apply(g, Sign::Minus);
        let factor = (m.gamma * g + m.tau.conj()).powi(2);
        let lhs = (c2 + g2 * s2 - c2.conj() * g2 * g2) * factor;
        let rhs = c + g * s - c.conj() * g * g;
        assert!((lhs - rhs).norm() < 1e-14, "{lhs} {rhs}");
    }

    #[test]
    fn screen_and_parallel() {
        let tol = Tolerances::default();
        let grid = DomainGrid::centered_square(0.5, 9).unwrap();
        let mk = |g: &str, eps, a, b| WeierstrassData {
            g: parse_expression(g).unwrap(),
            w: parse_expression("1").unwrap(),
            eps,
            a,
            b,
            c: cx(0.0, 0.0),
            f0: cx(1.0, 0.0),
            grid: grid.clone(),
        };
        let flat = mk("0.3", Sign::Plus, 0.0, 0.0);
        assert!(matches!(completeness_screen(&flat, false, &tol), ScreenVerdict::Degenerate { .. }));
        let mut f2 = flat.clone();
        let ff = build_f(&mut f2, &tol).unwrap();
        assert!(hopf_density(&f2, &ff.values, &tol).unwrap().flat);
        assert!(matches!(
            completeness_screen(&mk("z", Sign::Plus, 0.0, 0.0), true, &tol),
            ScreenVerdict::Constructible { warning: Some(_) }
        ));
        assert_eq!(completeness_screen(&mk("z", Sign::Minus, 0.0, 0.0), false, &tol), ScreenVerdict::NotTriggered);

        for (a, b, code) in [
            (1.0, 1.0, "parallel_hyperquadric"),
            (0.0, 0.0, "parallel_zero_mean_curvature"),
            (1.0, -1.0, "non_parallel"),
        ] {
            let mut d = mk("z", Sign::Minus, a, b);
            let ff = build_f(&mut d, &tol).unwrap();
            assert_eq!(parallel_h_classify(&ff.values, &d, &tol).code(), code);
        }
    }
}
