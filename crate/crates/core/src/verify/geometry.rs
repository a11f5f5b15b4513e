//! Geometric identities checked by finite differences on the sampled
//! immersion, against quantities computed from the frame and the data.

use rayon::prelude::*;
use thiserror::Error;

use super::fd::{Axis, Stencil};
use crate::analytic::{AnalyticExpr, ExprError, Field, Residual, SpanningTree, TreeKind};
use crate::frame::{Connection, FrameField};
use crate::lorentz::{HermPoint, Mat2};
use crate::scalar::{ci, cre, czero, Cx, Real};
use crate::tolerances::Tolerances;
use crate::weierstrass::WeierstrassData;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("normal frame is ill-conditioned (condition {condition:e}) at node ({i}, {j})")]
    FrameDegeneracy { condition: f64, i: usize, j: usize },
    #[error(transparent)]
    Grid(#[from] crate::analytic::GridError),
}

fn merge_all<T: Real>(it: impl Iterator<Item = Residual<T>>) -> Residual<T> {
    it.fold(Residual::none(), Residual::merge)
}

fn res<T: Real>(max: T, k: usize) -> Residual<T> {
    Residual { max, at: Some(k) }
}

/// Finite-difference derivatives of `ψ` at one node.
#[derive(Debug, Clone, Copy)]
pub struct PsiDerivatives<T> {
    pub psi_z: Mat2<T>,
    pub psi_zz: Mat2<T>,
    pub psi_zzbar: HermPoint<T>,
    pub psi_x: HermPoint<T>,
    pub psi_y: HermPoint<T>,
    /// `2⟨ψ_z, ψ_z̄⟩`.
    pub lambda: T,
}

/// Derivatives at every node with a full fourth-order stencil.
pub fn psi_derivatives<T: Real>(
    data: &WeierstrassData<T>,
    psi: &Field<HermPoint<T>>,
) -> Field<PsiDerivatives<T>> {
    let grid = &data.grid;
    let st = Stencil::new(grid, psi);
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let raw: Vec<Option<PsiDerivatives<T>>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            psi.get(k)?;
            let px = st.d1(k, Axis::X)?;
            let py = st.d1(k, Axis::Y)?;
            let pxx = st.d2(k, Axis::X)?;
            let pyy = st.d2(k, Axis::Y)?;
            let pxy = st.dxy(k)?;
            let psi_z = (px.to_mat() - py.to_mat().scale(ci())) * half;
            let psi_zz = (pxx.to_mat() - pyy.to_mat() - pxy.to_mat().scale(ci() * T::lit(2.0))) * quarter;
            let psi_zzbar = (pxx + pyy) * quarter;
            let lambda = psi_z.bilinear(&psi_z.adjoint()).re * T::lit(2.0);
            Some(PsiDerivatives {
                psi_z,
                psi_zz,
                psi_zzbar,
                psi_x: px,
                psi_y: py,
                lambda,
            })
        })
        .collect();
    Field::from_vec(grid.nx(), grid.ny(), raw)
}

#[derive(Debug, Clone, Copy)]
pub struct MetricReport<T> {
    /// `|λ_num − (1−ε|g|²)²|w|²| / λ_num`.
    pub lambda: Residual<T>,
    /// `|⟨ψ_z, ψ_z⟩| / λ_num`.
    pub conformality: Residual<T>,
    /// Relative disagreement of `(1−ε|g|²)²|w|²` and `|fq/g'|²(1−ε|g|²)²`.
    pub lambda_forms: Residual<T>,
    pub min_lambda: T,
}

pub fn induced_metric_check<T: Real>(
    data: &WeierstrassData<T>,
    frame: &FrameField<T>,
    derivs: &Field<PsiDerivatives<T>>,
    tol: &Tolerances,
) -> Result<MetricReport<T>, VerifyError> {
    let conn = Connection::new(data, tol);
    let mut lambda = Residual::none();
    let mut conformality = Residual::none();
    let mut lambda_forms = Residual::none();
    let mut min_lambda = T::infinity();
    for (k, d) in derivs.iter() {
        let l = conn.local(data.grid.node_at(k))?;
        let f = frame.samples.get(k).map(|s| s.f).unwrap_or_else(czero);
        let pos = data.positivity(l.g);
        let lam = pos * pos * l.w.norm_sqr();
        min_lambda = min_lambda.min(d.lambda);
        lambda = lambda.merge(res((d.lambda - lam).abs() / d.lambda, k));
        conformality = conformality.merge(res(d.psi_z.bilinear(&d.psi_z).norm() / d.lambda, k));
        if l.dg.norm() > T::lit(1e-8) {
            let q = l.w * l.dg / f;
            let lam2 = (f * q / l.dg).norm_sqr() * pos * pos;
            lambda_forms = lambda_forms.merge(res((lam2 - lam).abs() / lam, k));
        }
    }
    Ok(MetricReport {
        lambda,
        conformality,
        lambda_forms,
        min_lambda,
    })
}

/// `N = F diag(ρ, 0) F*` with `ρ = 2/(1−ε|g|²)`: the null normal `η + η̃`.
pub fn null_normal<T: Real>(frame: &Mat2<T>, positivity: T) -> HermPoint<T> {
    let rho = T::lit(2.0) / positivity;
    (*frame * Mat2::diag(cre(rho), czero()) * frame.adjoint()).hermitian_part()
}

#[derive(Debug, Clone)]
pub struct MeanCurvatureReport<T> {
    pub h: Field<HermPoint<T>>,
    /// `2E/λ`, the coefficient of `N` in `H`.
    pub ratio_field: Field<T>,
    /// `|⟨H,H⟩| / max(‖H‖²_E, λ⁻²)`.
    pub marginally_trapped: Residual<T>,
    /// `|2E/λ − (a + b|g|² + 2εRe(c̄g))/(1−ε|g|²)| / (1 + |expected|)`.
    pub ratio: Residual<T>,
    /// Component of `H` orthogonal to `N`, relative to `1 + ‖H‖_E`.
    pub direction: Residual<T>,
    /// Largest `‖H‖_E`.
    pub max_h: T,
    /// Largest `|⟨H,H⟩|`, absolute.
    pub max_hh: T,
}

pub fn mean_curvature_check<T: Real>(
    data: &WeierstrassData<T>,
    frame: &FrameField<T>,
    derivs: &Field<PsiDerivatives<T>>,
    tol: &Tolerances,
) -> Result<MeanCurvatureReport<T>, VerifyError> {
    let conn = Connection::new(data, tol);
    let mut hfield = Field::empty(data.grid.nx(), data.grid.ny());
    let mut ratio_field = Field::empty(data.grid.nx(), data.grid.ny());
    let mut mt = Residual::none();
    let mut ratio = Residual::none();
    let mut direction = Residual::none();
    let mut max_h = T::zero();
    let mut max_hh = T::zero();
    for (k, d) in derivs.iter() {
        let s = match frame.samples.get(k) {
            Some(s) => s,
            None => continue,
        };
        let l = conn.local(data.grid.node_at(k))?;
        let h = d.psi_zzbar * (T::lit(2.0) / d.lambda);
        hfield.set(k, h);
        let hm = h.to_mat();
        let hh = hm.bilinear(&hm).re;
        let he2 = hm.euclid_norm2();
        max_h = max_h.max(he2.sqrt());
        max_hh = max_hh.max(hh.abs());
        let floor = T::one() / (d.lambda * d.lambda);
        mt = mt.merge(res(hh.abs() / he2.max(floor), k));
        let pos = data.positivity(l.g);
        let n = null_normal(&s.frame, pos).to_mat();
        let nc = n.coords();
        let hc = hm.coords();
        let nn: T = nc.iter().map(|x| x.norm_sqr()).sum();
        let hn: T = nc.iter().zip(hc.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        let got = hn / nn;
        ratio_field.set(k, got);
        let want = data.e_numerator(l.g) / pos;
        ratio = ratio.merge(res((got - want).abs() / (T::one() + want.abs()), k));
        let perp = (hm - n * got).euclid_norm();
        direction = direction.merge(res(perp / (T::one() + he2.sqrt()), k));
    }
    Ok(MeanCurvatureReport {
        h: hfield,
        ratio_field,
        marginally_trapped: mt,
        ratio,
        direction,
        max_h,
        max_hh,
    })
}

#[derive(Debug, Clone)]
pub struct GaussCurvatureReport<T> {
    /// Intrinsic curvature `−(2/λ) ∂z∂z̄ log λ` from the sampled metric.
    pub k_num: Field<T>,
    /// `4ε|g'|² / (λ(1−ε|g|²)²)`.
    pub k_formula: Field<T>,
    /// `|K_num − K_formula| / (1 + |K_formula|)`.
    pub intrinsic_vs_formula: Residual<T>,
    /// `|K_formula − 4ε|f|²|q|²/λ²| / (1 + |K_formula|)`.
    pub formula_vs_hopf: Residual<T>,
    /// Nodes with `|K| > floor` where `sign K_num ≠ ε`.
    pub sign_violations: usize,
}

pub fn gauss_curvature_check<T: Real>(
    data: &WeierstrassData<T>,
    frame: &FrameField<T>,
    derivs: &Field<PsiDerivatives<T>>,
    tol: &Tolerances,
) -> Result<GaussCurvatureReport<T>, VerifyError> {
    let conn = Connection::new(data, tol);
    let grid = &data.grid;
    let log_lambda = derivs.map(|d| d.lambda.ln());
    let st = Stencil::new(grid, &log_lambda);
    let e = data.eps_value();
    let mut k_num = Field::empty(grid.nx(), grid.ny());
    let mut k_formula = Field::empty(grid.nx(), grid.ny());
    let mut iv = Residual::none();
    let mut fh = Residual::none();
    let mut sign_violations = 0;
    let floor = T::lit(1e-6);
    for (k, d) in derivs.iter() {
        let l = conn.local(grid.node_at(k))?;
        let f = frame.samples.get(k).map(|s| s.f).unwrap_or_else(czero);
        let pos = data.positivity(l.g);
        let lam = pos * pos * l.w.norm_sqr();
        let kf = T::lit(4.0) * e * l.dg.norm_sqr() / (lam * pos * pos);
        k_formula.set(k, kf);
        let q = l.w * l.dg / f;
        let kq = T::lit(4.0) * e * f.norm_sqr() * q.norm_sqr() / (lam * lam);
        fh = fh.merge(res((kf - kq).abs() / (T::one() + kf.abs()), k));
        if let Some(lap) = st.dz_dzbar(k) {
            let kn = -(T::lit(2.0) / d.lambda) * lap;
            k_num.set(k, kn);
            iv = iv.merge(res((kn - kf).abs() / (T::one() + kf.abs()), k));
            if kf.abs() > floor && kn * e <= T::zero() {
                sign_violations += 1;
            }
        }
    }
    Ok(GaussCurvatureReport {
        k_num,
        k_formula,
        intrinsic_vs_formula: iv,
        formula_vs_hopf: fh,
        sign_violations,
    })
}

/// Point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjPoint<T> {
    Finite(Cx<T>),
    Infinity,
}

impl<T: Real> ProjPoint<T> {
    pub fn finite(&self) -> Option<Cx<T>> {
        match self {
            ProjPoint::Finite(z) => Some(*z),
            ProjPoint::Infinity => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaussMapReport<T> {
    pub g_map: Field<ProjPoint<T>>,
    pub normal: Field<HermPoint<T>>,
    /// `|⟨N,N⟩| / ‖N‖²_E`.
    pub null: Residual<T>,
    /// `|⟨N_z, N_z⟩| / ‖N_z‖²_E` where `‖N_z‖` is not negligible.
    pub conformality: Residual<T>,
    /// `max(|⟨N, ψ_x⟩|, |⟨N, ψ_y⟩|) / (‖N‖_E ‖ψ_x‖_E)`: `N` is normal.
    pub normality: Residual<T>,
    pub infinity_count: usize,
}

pub fn hyperbolic_gauss_check<T: Real>(
    data: &WeierstrassData<T>,
    frame: &FrameField<T>,
    derivs: &Field<PsiDerivatives<T>>,
    tol: &Tolerances,
) -> Result<GaussMapReport<T>, VerifyError> {
    let conn = Connection::new(data, tol);
    let grid = &data.grid;
    let mut g_map = Field::empty(grid.nx(), grid.ny());
    let mut normal = Field::empty(grid.nx(), grid.ny());
    let mut null = Residual::none();
    let mut infinity_count = 0;
    let eps_c = T::lit(1e-12);
    for (k, s) in frame.samples.iter() {
        let l = conn.local(grid.node_at(k))?;
        let n = null_normal(&s.frame, data.positivity(l.g));
        let nm = n.to_mat();
        null = null.merge(res(nm.bilinear(&nm).norm() / nm.euclid_norm2(), k));
        normal.set(k, n);
        let (c, d) = s.frame.column(0);
        if c.norm() < eps_c * (T::one() + d.norm()) {
            infinity_count += 1;
            g_map.set(k, ProjPoint::Infinity);
        } else {
            g_map.set(k, ProjPoint::Finite(d / c));
        }
    }
    let st = Stencil::new(grid, &normal);
    let half = T::lit(0.5);
    let conformality = merge_all(normal.iter().filter_map(|(k, _)| {
        let nz = (st.d1(k, Axis::X)?.to_mat() - st.d1(k, Axis::Y)?.to_mat().scale(ci())) * half;
        let size = nz.euclid_norm2();
        if size <= T::lit(1e-20) {
            return None;
        }
        Some(res(nz.bilinear(&nz).norm() / size, k))
    }));
    let normality = merge_all(derivs.iter().filter_map(|(k, d)| {
        let n = normal.get(k)?.to_mat();
        let (x, y) = (d.psi_x.to_mat(), d.psi_y.to_mat());
        let r = n.bilinear(&x).norm().max(n.bilinear(&y).norm());
        Some(res(r / (n.euclid_norm() * x.euclid_norm()), k))
    }));
    Ok(GaussMapReport {
        g_map,
        normal,
        null,
        conformality,
        normality,
        infinity_count,
    })
}

/// Minkowski product of real 4-vectors given as Hermitian matrices.
fn mink<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Cx<T> {
    a.bilinear(b)
}

#[derive(Debug, Clone)]
pub struct HopfReport<T> {
    /// `q_num = −⟨ψ_zz, N⟩`.
    pub q_num: Field<Cx<T>>,
    /// `⟨ψ_zz, N'⟩ = p + p̃`.
    pub p_sum: Field<Cx<T>>,
    /// Second null normal `N'` with `⟨N, N'⟩ = 2`.
    pub second_normal: Field<HermPoint<T>>,
    /// `|q_num − w g'/f| / (1 + |q|)`.
    pub q: Residual<T>,
    /// `|∂z̄ q_num| / (1 + |q|)`.
    pub holomorphy: Residual<T>,
    /// `|⟨ψ_zz, N'⟩ − ε|f|²q| / (1 + |f|²|q|)`, `N'` the second null normal.
    pub sum_coefficient: Residual<T>,
    pub max_condition: T,
}

pub fn hopf_check<T: Real>(
    data: &WeierstrassData<T>,
    frame: &FrameField<T>,
    derivs: &Field<PsiDerivatives<T>>,
    normal: &Field<HermPoint<T>>,
    tol: &Tolerances,
) -> Result<HopfReport<T>, VerifyError> {
    let conn = Connection::new(data, tol);
    let grid = &data.grid;
    let e = data.eps_value();
    let mut q_num = Field::empty(grid.nx(), grid.ny());
    let mut p_sum = Field::empty(grid.nx(), grid.ny());
    let mut second_normal = Field::empty(grid.nx(), grid.ny());
    let mut qres = Residual::none();
    let mut sum = Residual::none();
    let mut max_condition = T::zero();
    let basis = [
        HermPoint::new(T::one(), czero(), T::one()),
        HermPoint::new(T::zero(), cre(T::one()), T::zero()),
        HermPoint::new(T::zero(), ci(), T::zero()),
        HermPoint::new(T::one(), czero(), -T::one()),
    ];
    for (k, d) in derivs.iter() {
        let (Some(n), Some(s)) = (normal.get(k), frame.samples.get(k)) else {
            continue;
        };
        let l = conn.local(grid.node_at(k))?;
        let q = l.w * l.dg / s.f;
        let nm = n.to_mat();
        let qn = -mink(&d.psi_zz, &nm);
        q_num.set(k, qn);
        qres = qres.merge(res((qn - q).norm() / (T::one() + q.norm()), k));
        // second null normal: project a coordinate vector onto the normal
        // plane and correct it to be null with ⟨N, N'⟩ = 2
        let (x, y) = (d.psi_x.to_mat(), d.psi_y.to_mat());
        let (xx, yy) = (mink(&x, &x).re, mink(&y, &y).re);
        let mut best: Option<(T, Mat2<T>)> = None;
        for b in basis.iter() {
            let bm = b.to_mat();
            let u = bm - x * (mink(&bm, &x).re / xx) - y * (mink(&bm, &y).re / yy);
            let nu = mink(&nm, &u).re;
            let (bn, un) = (bm.euclid_norm(), u.euclid_norm());
            let cond = nm.euclid_norm() * bn / nu.abs() * (bn / un);
            if best.as_ref().is_none_or(|(c, _)| cond < *c) {
                best = Some((cond, u));
            }
        }
        let (cond, u) = best.expect("basis is nonempty");
        max_condition = max_condition.max(cond);
        if !(cond <= T::lit(tol.frame_condition)) {
            let (i, j) = grid.coords(k);
            return Err(VerifyError::FrameDegeneracy {
                condition: cond.to_f64_lossy(),
                i,
                j,
            });
        }
        let nu = mink(&nm, &u).re;
        let t = mink(&u, &u).re / (T::lit(2.0) * nu);
        let n2 = (u - nm * t) * (T::lit(2.0) / nu);
        let pp = mink(&d.psi_zz, &n2);
        p_sum.set(k, pp);
        second_normal.set(k, n2.hermitian_part());
        let want = q * (e * s.f.norm_sqr());
        sum = sum.merge(res((pp - want).norm() / (T::one() + want.norm()), k));
    }
    let st = Stencil::new(grid, &q_num);
    let holomorphy = merge_all(q_num.iter().filter_map(|(k, v)| {
        let dzb = st.dzbar(k)?;
        Some(res(dzb.norm() / (T::one() + v.norm()), k))
    }));
    Ok(HopfReport {
        q_num,
        p_sum,
        second_normal,
        q: qres,
        holomorphy,
        sum_coefficient: sum,
        max_condition,
    })
}

/// Symbolic pieces of the right-hand side of the Schwarzian identity.
struct SchwarzRhs<T> {
    g1: AnalyticExpr<T>,
    g2: AnalyticExpr<T>,
    g3: AnalyticExpr<T>,
    w1: AnalyticExpr<T>,
}

impl<T: Real> SchwarzRhs<T> {
    fn new(data: &WeierstrassData<T>) -> Self {
        let g1 = data.g.derivative();
        let g2 = g1.derivative();
        let g3 = g2.derivative();
        Self {
            g1,
            g2,
            g3,
            w1: data.w.derivative(),
        }
    }

    /// `(h'/h)' − ½(h'/h)² − 2(a+εc̄g)q` with `h = g'/f`.
    fn eval(&self, data: &WeierstrassData<T>, z: Cx<T>, f: Cx<T>, pole_eps: T) -> Result<Cx<T>, ExprError> {
        let e = data.eps_value();
        let g = data.g.eval_with(z, pole_eps)?;
        let g1 = self.g1.eval_with(z, pole_eps)?;
        let g2 = self.g2.eval_with(z, pole_eps)?;
        let g3 = self.g3.eval_with(z, pole_eps)?;
        let w = data.w.eval_with(z, pole_eps)?;
        let w1 = self.w1.eval_with(z, pole_eps)?;
        let quad = data.c + g * data.s() + data.c.conj() * g * g * e;
        let quad1 = g1 * data.s() + data.c.conj() * g * g1 * (e * T::lit(2.0));
        let f1 = quad * w;
        let f2 = quad1 * w + quad * w1;
        let r1 = g2 / g1 - f1 / f;
        let r1p = g3 / g1 - (g2 / g1).powi(2) - f2 / f + (f1 / f).powi(2);
        let q = w * g1 / f;
        let coef = cre(data.a) + data.c.conj() * g * e;
        Ok(r1p - r1 * r1 * T::lit(0.5) - coef * q * T::lit(2.0))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SchwarzianReport<T> {
    /// `|{G,z} − rhs| / (1 + |{G,z}|)`.
    pub residual: Residual<T>,
    pub symbolic: bool,
    pub max_schwarzian: T,
}

/// Closed form of the hyperbolic Gauss map when `F` is lower triangular
/// (`a = c = 0`, `f` constant, `F(z0) = I`): `G = (g − g(z0))/f0`.
pub fn closed_form_gauss_map<T: Real>(data: &WeierstrassData<T>) -> Option<AnalyticExpr<T>> {
    let zero = T::zero();
    if data.a != zero || data.c.norm() != zero || data.s() != zero {
        return None;
    }
    let g0 = data.g.eval(data.z0()).ok()?;
    Some(AnalyticExpr::div(
        AnalyticExpr::sub(data.g.clone(), AnalyticExpr::constant(g0)),
        AnalyticExpr::constant(data.f0),
    ))
}

fn schwarzian_of<T: Real>(g1: Cx<T>, g2: Cx<T>, g3: Cx<T>) -> Cx<T> {
    g3 / g1 - (g2 / g1).powi(2) * T::lit(1.5)
}

pub fn schwarzian_check<T: Real>(
    data: &WeierstrassData<T>,
    frame: &FrameField<T>,
    g_map: &Field<ProjPoint<T>>,
    identity_frame: bool,
    tol: &Tolerances,
) -> Result<SchwarzianReport<T>, VerifyError> {
    let grid = &data.grid;
    let pole_eps = T::lit(tol.pole_eps);
    let rhs = SchwarzRhs::new(data);
    let closed = if identity_frame { closed_form_gauss_map(data) } else { None };
    let mut residual = Residual::none();
    let mut max_s = T::zero();
    if let Some(gexpr) = &closed {
        let d1 = gexpr.derivative();
        let d2 = d1.derivative();
        let d3 = d2.derivative();
        for (k, s) in frame.samples.iter() {
            let z = grid.node_at(k);
            let a1 = d1.eval_with(z, pole_eps)?;
            if a1.norm() < T::lit(1e-8) {
                continue;
            }
            let sch = schwarzian_of(a1, d2.eval_with(z, pole_eps)?, d3.eval_with(z, pole_eps)?);
            let r = rhs.eval(data, z, s.f, pole_eps)?;
            max_s = max_s.max(sch.norm());
            residual = residual.merge(res((sch - r).norm() / (T::one() + sch.norm()), k));
        }
    } else {
        let gf = Field::from_vec(
            grid.nx(),
            grid.ny(),
            g_map.raw().iter().map(|p| p.and_then(|p| p.finite())).collect(),
        );
        let st = Stencil::new(grid, &gf);
        for (k, s) in frame.samples.iter() {
            let (Some(a1), Some(a2), Some(a3)) = (st.dz_6(k), st.dzz_holo_6(k), st.dzzz_holo_6(k)) else {
                continue;
            };
            if a1.norm() < T::lit(1e-8) {
                continue;
            }
            let sch = schwarzian_of(a1, a2, a3);
            let r = rhs.eval(data, grid.node_at(k), s.f, pole_eps)?;
            max_s = max_s.max(sch.norm());
            residual = residual.merge(res((sch - r).norm() / (T::one() + sch.norm()), k));
        }
    }
    Ok(SchwarzianReport {
        residual,
        symbolic: closed.is_some(),
        max_schwarzian: max_s,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SmallFormulaReport<T> {
    /// `|C² − g'/(f G')| / (1 + |C²|)`.
    pub c_squared: Residual<T>,
    /// `max(|C − σ√(g'/(fG'))|, |D − G σ√(g'/(fG'))|)` relative to `1 + |F|`,
    /// with the square root continued along a spanning tree.
    pub columns: Residual<T>,
}

pub fn small_formula_check<T: Real>(
    data: &WeierstrassData<T>,
    frame: &FrameField<T>,
    g_map: &Field<ProjPoint<T>>,
    tol: &Tolerances,
) -> Result<SmallFormulaReport<T>, VerifyError> {
    let grid = &data.grid;
    let conn = Connection::new(data, tol);
    let gf = Field::from_vec(
        grid.nx(),
        grid.ny(),
        g_map.raw().iter().map(|p| p.and_then(|p| p.finite())).collect(),
    );
    let st = Stencil::new(grid, &gf);
    // squared value g'/(f G') wherever G' is available and nonzero
    let mut sq: Field<Cx<T>> = Field::empty(grid.nx(), grid.ny());
    let mut c_squared = Residual::none();
    for (k, s) in frame.samples.iter() {
        let Some(dg_map) = st.dz_6(k) else { continue };
        if dg_map.norm() < T::lit(1e-10) {
            continue;
        }
        let l = conn.local(grid.node_at(k))?;
        let v = l.dg / (s.f * dg_map);
        sq.set(k, v);
        let c2 = s.frame.a * s.frame.a;
        c_squared = c_squared.merge(res((c2 - v).norm() / (T::one() + c2.norm()), k));
    }
    // continue the square root through the tested region
    let mut roots: Field<Cx<T>> = Field::empty(grid.nx(), grid.ny());
    let mut columns = Residual::none();
    let mut sub = data.grid.clone();
    for k in 0..sub.len() {
        if sq.get(k).is_none() {
            sub.mask_node(k);
        }
    }
    let tree: Option<SpanningTree> = sq
        .iter()
        .next()
        .and_then(|_| rooted_tree(&sub, &sq));
    if let Some(tree) = tree {
        let root = tree.root();
        let c_root = frame.samples.get(root).map(|s| s.frame.a).unwrap_or_else(czero);
        let r0 = sq.get(root).copied().unwrap_or_else(czero).sqrt();
        roots.set(root, if (r0 - c_root).norm() <= (r0 + c_root).norm() { r0 } else { -r0 });
        for level in tree.levels().iter().skip(1) {
            for &k in level {
                let p = tree.parent(k).expect("child has parent");
                let prev = *roots.get(p).expect("parent done");
                let r = sq.get(k).copied().unwrap_or_else(czero).sqrt();
                roots.set(k, if (r - prev).norm() <= (r + prev).norm() { r } else { -r });
            }
        }
        for (k, r) in roots.iter() {
            let (Some(s), Some(gv)) = (frame.samples.get(k), gf.get(k)) else { continue };
            let scale = T::one() + s.frame.max_norm();
            let e1 = (s.frame.a - *r).norm();
            let e2 = (s.frame.c - *gv * *r).norm();
            columns = columns.merge(res(e1.max(e2) / scale, k));
        }
    }
    Ok(SmallFormulaReport { c_squared, columns })
}

/// Spanning tree of the nodes carrying values, rooted at the base node when
/// it carries one and otherwise at the first such node.
fn rooted_tree<T: Real>(
    sub: &crate::analytic::DomainGrid<T>,
    values: &Field<Cx<T>>,
) -> Option<SpanningTree> {
    let start = if values.get(sub.base_index()).is_some() {
        sub.z0()
    } else {
        sub.node_at(values.iter().next()?.0)
    };
    let (x0, x1, y0, y1) = sub.rect();
    let mut g = crate::analytic::DomainGrid::new(x0, x1, y0, y1, sub.nx(), sub.ny(), start).ok()?;
    for k in 0..sub.len() {
        if sub.is_masked(k) {
            g.mask_node(k);
        }
    }
    // the tested region is an inset of a simply connected region; keep the
    // component containing the root
    let tree_grid = keep_root_component(g);
    tree_grid.spanning_tree(TreeKind::RowFirst).ok()
}

fn keep_root_component<T: Real>(mut g: crate::analytic::DomainGrid<T>) -> crate::analytic::DomainGrid<T> {
    let n = g.len();
    let mut seen = vec![false; n];
    let b = g.base_index();
    seen[b] = true;
    let mut stack = vec![b];
    while let Some(k) = stack.pop() {
        let nb: Vec<usize> = g.neighbours(k).collect();
        for v in nb {
            if !g.is_masked(v) && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    for k in 0..n {
        if !seen[k] {
            g.mask_node(k);
        }
    }
    g
}

/// Mixed-partials consistency `φ_z̄ = (φ_z̄)*` for `φ = ψ_z` sampled from
/// the frame.
pub fn mixed_partials_check<T: Real>(
    data: &WeierstrassData<T>,
    frame: &FrameField<T>,
    tol: &Tolerances,
) -> Result<Residual<T>, VerifyError> {
    let grid = &data.grid;
    let conn = Connection::new(data, tol);
    let mut phi = Field::empty(grid.nx(), grid.ny());
    for (k, s) in frame.samples.iter() {
        let l = conn.local(grid.node_at(k))?;
        phi.set(k, s.frame * conn.m_matrix(&l, s.f) * s.frame.adjoint());
    }
    let st = Stencil::new(grid, &phi);
    let half = T::lit(0.5);
    Ok(merge_all(phi.iter().filter_map(|(k, p)| {
        let d = (st.d1(k, Axis::X)? + st.d1(k, Axis::Y)?.scale(ci())) * half;
        let r = (d - d.adjoint()).max_norm() / (T::one() + d.max_norm() + p.max_norm());
        Some(res(r, k))
    })))
}

#[derive(Debug, Clone, Copy)]
pub struct NormalBundleReport<T> {
    /// `|⟨N_x, N'⟩|, |⟨N_y, N'⟩|` relative to `‖N_x‖_E ‖N'‖_E`: the
    /// normal connection form in the frame `(N, N')`.
    pub connection: Residual<T>,
}

pub fn normal_bundle_check<T: Real>(
    data: &WeierstrassData<T>,
    normal: &Field<HermPoint<T>>,
    second_normal: &Field<HermPoint<T>>,
) -> NormalBundleReport<T> {
    let grid = &data.grid;
    let st = Stencil::new(grid, normal);
    let half = T::lit(0.5);
    let mut connection = Residual::none();
    for (k, n2) in second_normal.iter() {
        let (Some(nx), Some(ny)) = (st.d1(k, Axis::X), st.d1(k, Axis::Y)) else { continue };
        let n2m = n2.to_mat();
        let (nx, ny) = (nx.to_mat(), ny.to_mat());
        let ax = mink(&nx, &n2m).re * half;
        let ay = mink(&ny, &n2m).re * half;
        let scale = (nx.euclid_norm() + ny.euclid_norm()) * n2m.euclid_norm() + T::lit(1e-300);
        connection = connection.merge(res(ax.abs().max(ay.abs()) * T::lit(2.0) / scale, k));
    }
    NormalBundleReport { connection }
}

/// Flatness of the pseudo-metric `√(εK) ds²`: `Δ log(εKλ²)` relative to
/// `1 + |log(εKλ²)|`, on nodes with `|K| > floor`.
pub fn pseudo_metric_flatness<T: Real>(
    data: &WeierstrassData<T>,
    k_formula: &Field<T>,
    derivs: &Field<PsiDerivatives<T>>,
    floor: T,
) -> Residual<T> {
    let grid = &data.grid;
    let e = data.eps_value();
    let raw: Vec<Option<T>> = (0..grid.len())
        .map(|k| {
            let kf = *k_formula.get(k)?;
            let lam = derivs.get(k)?.lambda;
            if kf.abs() <= floor {
                return None;
            }
            Some((e * kf * lam * lam).ln())
        })
        .collect();
    let lf = Field::from_vec(grid.nx(), grid.ny(), raw);
    let st = Stencil::new(grid, &lf);
    merge_all(lf.iter().filter_map(|(k, v)| {
        let lap = st.dz_dzbar(k)?;
        Some(res(lap.abs() / (T::one() + v.abs()), k))
    }))
}

/// `|K_num − 4(|p̃|² − |p|²)/λ²| / (1 + |K_num|)` with `p̃ − p = q_num` and
/// `p + p̃ = ⟨ψ_zz, N'⟩`.
pub fn gauss_equation_check<T: Real>(
    k_num: &Field<T>,
    hopf: &HopfReport<T>,
    derivs: &Field<PsiDerivatives<T>>,
) -> Residual<T> {
    merge_all(k_num.iter().filter_map(|(k, kn)| {
        let (pp, q, d) = (hopf.p_sum.get(k)?, hopf.q_num.get(k)?, derivs.get(k)?);
        let pt = (*pp + *q) * T::lit(0.5);
        let p = (*pp - *q) * T::lit(0.5);
        let kg = T::lit(4.0) * (pt.norm_sqr() - p.norm_sqr()) / (d.lambda * d.lambda);
        Some(res((*kn - kg).abs() / (T::one() + kn.abs()), k))
    }))
}
