//! Classical special cases: minimal surfaces in ℝ³, maximal surfaces in 𝕃³,
//! constant mean curvature surfaces in ℍ³ and 𝕊₁³, the analytic
//! deformation between them, and the `c = 0` families.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{
    path_primitive_fn, AnalyticExpr, DomainGrid, ExprError, Field, GridError, PrimitiveError, Residual, SpanningTree,
    TreeKind,
};
use crate::frame::{integrate_data, rk4_segment, FrameError, FrameField, FrameOptions, LocalData};
use crate::lorentz::{from_herm, HermPoint, Mat2, SpacetimeVec};
use crate::scalar::{ci, cone, cre, czero, Cx, Real};
use crate::tolerances::Tolerances;
use crate::verify::fd::{Axis, Stencil};
use crate::verify::geometry::psi_derivatives;
use crate::weierstrass::{Sign, WeierstrassData};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error("g(z0) = {re}{im:+}i; the deformation family needs g(z0) = 0")]
    GNotZeroAtBase { re: f64, im: f64 },
    #[error("f = f0 + (a+εb)∫gω vanishes near {re}{im:+}i")]
    FVanishes { re: f64, im: f64 },
    #[error("r values must be positive and at least two are needed")]
    BadRadii,
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitCase<T> {
    /// `ε = −1`, `a = b = c = 0`.
    MinimalR3,
    /// `ε = +1`, `a = b = c = 0`.
    MaximalL3,
    /// `ε = −1`, `a = r`, `b = r`, `c = 0`.
    CmcH3 { r: T },
    /// `ε = +1`, `a = r`, `b = −r`, `c = 0`.
    CmcS3 { r: T },
}

impl<T: Real> LimitCase<T> {
    pub fn eps(&self) -> Sign {
        match self {
            LimitCase::MinimalR3 | LimitCase::CmcH3 { .. } => Sign::Minus,
            LimitCase::MaximalL3 | LimitCase::CmcS3 { .. } => Sign::Plus,
        }
    }

    pub fn r(&self) -> Option<T> {
        match self {
            LimitCase::CmcH3 { r } | LimitCase::CmcS3 { r } => Some(*r),
            _ => None,
        }
    }

    /// Weierstrass data of the case; `b = −εa` keeps `f ≡ 1`.
    pub fn data(&self, g: AnalyticExpr<T>, w: AnalyticExpr<T>, grid: DomainGrid<T>) -> WeierstrassData<T> {
        let eps = self.eps();
        let a = self.r().unwrap_or_else(T::zero);
        WeierstrassData {
            g,
            w,
            eps,
            a,
            b: -eps.value::<T>() * a,
            c: czero(),
            f0: cone(),
            grid,
        }
    }
}

/// Which sign convention for `x3` the closed form uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// `ψ = Re∫((1+ε)g, 1+εg², −i(1−εg²), (1−ε)g) ω` as printed.
    Printed,
    /// The printed formula followed by `x3 ↦ −x3`, which is what the frame
    /// construction produces.
    #[default]
    Frame,
}

/// Primitive of `e` vanishing at the base node, exact for polynomial
/// integrands and by path integration otherwise.
fn primitive<T: Real>(
    e: &AnalyticExpr<T>,
    grid: &DomainGrid<T>,
    tree: &SpanningTree,
    tol: &Tolerances,
) -> Result<Field<Cx<T>>, LimitError> {
    let z0 = grid.z0();
    if let Some(p) = e.as_polynomial() {
        let ap = p.antiderivative(z0);
        let raw = (0..grid.len())
            .map(|k| (!grid.is_masked(k)).then(|| ap.eval(grid.node_at(k))))
            .collect();
        return Ok(Field::from_vec(grid.nx(), grid.ny(), raw));
    }
    let pole_eps = T::lit(tol.pole_eps);
    let pf = path_primitive_fn(&|z| e.eval_with(z, pole_eps), grid, tree, T::lit(tol.loop_closure))?;
    Ok(pf.values)
}

/// The classical Weierstrass representation, with `ψ(z0) = 0`.
pub fn weierstrass_closed_form<T: Real>(
    g: &AnalyticExpr<T>,
    w: &AnalyticExpr<T>,
    eps: Sign,
    grid: &DomainGrid<T>,
    orientation: Orientation,
    tol: &Tolerances,
) -> Result<Field<SpacetimeVec<T>>, LimitError> {
    use AnalyticExpr as E;
    let e = eps.value::<T>();
    let tree = grid.spanning_tree(TreeKind::RowFirst)?;
    let gw = E::mul(g.clone(), w.clone());
    let g2w = E::mul(E::mul(g.clone(), g.clone()), w.clone());
    let pg = primitive(&gw, grid, &tree, tol)?;
    let pw = primitive(w, grid, &tree, tol)?;
    let pg2 = primitive(&g2w, grid, &tree, tol)?;
    let one = T::one();
    let sign3 = match orientation {
        Orientation::Printed => one,
        Orientation::Frame => -one,
    };
    let raw = (0..grid.len())
        .map(|k| {
            let (a, b, c) = (pg.get(k)?, pw.get(k)?, pg2.get(k)?);
            let x0 = a.re * (one + e);
            let x1 = (*b + *c * e).re;
            let x2 = ((*b - *c * e) * (-ci::<T>())).re;
            let x3 = a.re * (one - e) * sign3;
            Some(SpacetimeVec::new(x0, x1, x2, x3))
        })
        .collect();
    Ok(Field::from_vec(grid.nx(), grid.ny(), raw))
}

/// `Δ(g) = [[−ε, εḡ], [εg, 1−ε|g|²]]`.
pub fn delta_matrix<T: Real>(g: Cx<T>, e: T) -> Mat2<T> {
    Mat2::new(cre(-e), g.conj() * e, g * e, cre(T::one() - e * g.norm_sqr()))
}

/// `B = F [[0, i], [i, −ig]]`.
pub fn null_curve_matrix<T: Real>(frame: &Mat2<T>, g: Cx<T>) -> Mat2<T> {
    *frame * Mat2::new(czero(), ci(), ci(), -ci::<T>() * g)
}

#[derive(Debug, Clone)]
pub struct NullCurveReport<T> {
    pub b: Field<Mat2<T>>,
    pub psi: Field<HermPoint<T>>,
    pub frame: FrameField<T>,
    /// `|det B − 1|`.
    pub det_b: Residual<T>,
    /// `|det B_z| / ‖B_z‖²` (Frobenius).
    pub nullity: Residual<T>,
    /// `r² |−det ψ − ε/r²|`.
    pub hyperquadric: Residual<T>,
    /// `‖ψ_pipeline − (1/r) B diag(1, −ε) B*‖_max`.
    pub pipeline: Residual<T>,
    /// `‖F⁻¹ψF⁻¹* − (1/r)Δ(g)‖_max`.
    pub omega: Residual<T>,
}

/// `(1/r) B diag(1, −ε) B*` at the base point, where `F = Id`.
pub fn cmc_base_point<T: Real>(g0: Cx<T>, eps: Sign, r: T) -> HermPoint<T> {
    let b = null_curve_matrix(&Mat2::identity(), g0);
    (b * Mat2::diag(cone(), cre(-eps.value::<T>())) * b.adjoint() * (T::one() / r)).hermitian_part()
}

/// Constant mean curvature `r` data (`a = r`, `c = 0`, `f ≡ 1`) run through
/// the general pipeline and compared with `ψ = (1/r) B diag(1, −ε) B*`.
pub fn bryant_null_curve<T: Real>(
    g: &AnalyticExpr<T>,
    w: &AnalyticExpr<T>,
    eps: Sign,
    r: T,
    grid: &DomainGrid<T>,
    tol: &Tolerances,
) -> Result<NullCurveReport<T>, LimitError> {
    if !(r > T::zero()) {
        return Err(LimitError::BadRadii);
    }
    let case = match eps {
        Sign::Minus => LimitCase::CmcH3 { r },
        Sign::Plus => LimitCase::CmcS3 { r },
    };
    let data = case.data(g.clone(), w.clone(), grid.clone());
    let e = eps.value::<T>();
    let inv_r = T::one() / r;
    let g0 = g.eval(grid.z0())?;
    let psi_b = |b: &Mat2<T>| (*b * Mat2::diag(cone(), cre(-e)) * b.adjoint() * inv_r).hermitian_part();
    let psi0 = cmc_base_point(g0, eps, r);
    let opts = FrameOptions {
        psi0,
        ..FrameOptions::default()
    };
    let frame = integrate_data(&data, &opts, tol)?;
    let pole_eps = T::lit(tol.pole_eps);
    let mut bf = Field::empty(grid.nx(), grid.ny());
    let mut gv = Field::empty(grid.nx(), grid.ny());
    for (k, s) in frame.samples.iter() {
        let gz = g.eval_with(grid.node_at(k), pole_eps)?;
        gv.set(k, gz);
        bf.set(k, null_curve_matrix(&s.frame, gz));
    }
    let mut det_b = Residual::none();
    let mut hyper = Residual::none();
    let mut pipeline = Residual::none();
    let mut omega = Residual::none();
    for (k, s) in frame.samples.iter() {
        let b = bf.get(k).expect("set above");
        det_b = det_b.merge(Residual { max: (b.det() - cone()).norm(), at: Some(k) });
        let want = psi_b(b);
        pipeline = pipeline.merge(Residual {
            max: (s.psi.to_mat() - want.to_mat()).max_norm(),
            at: Some(k),
        });
        hyper = hyper.merge(Residual {
            max: (-s.psi.det() - e * inv_r * inv_r).abs() * r * r,
            at: Some(k),
        });
        if let Some(inv) = s.frame.inverse() {
            let om = inv * s.psi.to_mat() * inv.adjoint();
            let d = delta_matrix(*gv.get(k).expect("set above"), e) * inv_r;
            omega = omega.merge(Residual { max: (om - d).max_norm(), at: Some(k) });
        }
    }
    let st = Stencil::new(grid, &bf);
    let half = T::lit(0.5);
    let nullity = bf
        .iter()
        .filter_map(|(k, _)| {
            let bz = (st.d1_6(k, Axis::X)? - st.d1_6(k, Axis::Y)?.scale(ci())) * half;
            let n2 = bz.frobenius() * bz.frobenius();
            Some(Residual { max: bz.det().norm() / n2, at: Some(k) })
        })
        .fold(Residual::none(), Residual::merge);
    Ok(NullCurveReport {
        b: bf,
        psi: frame.psi(),
        frame,
        det_b,
        nullity,
        hyperquadric: hyper,
        pipeline,
        omega,
    })
}

/// How `X_0` is obtained from the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LimitMethod {
    /// Integrate the first variation `E = ∂F/∂r` at `r = 0`:
    /// `E' = E𝒜₀ + F₀[[0, w], [0, 0]]`, `X₀ = EΔF₀* + F₀ΔE*`.
    #[default]
    Variational,
    /// Linear extrapolation to `r = 0` from the two smallest radii.
    Richardson,
}

pub const DEFAULT_RADII: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.025];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationRow {
    pub r: f64,
    pub sup_diff: f64,
    /// Slope of `log sup‖X_r − X_0‖` against `log r` between this radius
    /// and the next smaller one.
    pub local_slope: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DeformationFamily<T> {
    /// Descending radii.
    pub radii: Vec<T>,
    pub members: Vec<Field<HermPoint<T>>>,
    pub limit: Field<HermPoint<T>>,
    pub method: LimitMethod,
    pub rows: Vec<DeformationRow>,
    /// Least-squares slope over all radii.
    pub slope: f64,
    /// Largest `‖H‖_E` of `X_0` by finite differences.
    pub limit_mean_curvature: f64,
    /// Alignment residual of `X_0` against the closed-form representation.
    pub procrustes: f64,
    /// Largest relative deviation of the induced metric of `X_r` from that
    /// of `X_0`.
    pub metric_variation: f64,
}

impl<T: Real> DeformationFamily<T> {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,sup_diff,local_slope,fit_slope\n");
        for row in &self.rows {
            let ls = row.local_slope.map(|v| format!("{v:.6}")).unwrap_or_default();
            s.push_str(&format!("{:e},{:e},{},{:.6}\n", row.r, row.sup_diff, ls, self.slope));
        }
        s
    }
}

#[derive(Debug, Clone, Copy)]
struct VarState<T> {
    f0: Mat2<T>,
    e: Mat2<T>,
}

impl<T: Real> std::ops::Add for VarState<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            f0: self.f0 + o.f0,
            e: self.e + o.e,
        }
    }
}

impl<T: Real> std::ops::Mul<T> for VarState<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self {
            f0: self.f0 * s,
            e: self.e * s,
        }
    }
}

fn variational_limit<T: Real>(data: &WeierstrassData<T>, tol: &Tolerances) -> Result<Field<HermPoint<T>>, LimitError> {
    let grid = &data.grid;
    let tree = grid.spanning_tree(TreeKind::RowFirst)?;
    let pole_eps = T::lit(tol.pole_eps);
    let dg = data.g.derivative();
    let local = |z: Cx<T>| -> Result<LocalData<T>, ExprError> {
        Ok(LocalData {
            g: data.g.eval_with(z, pole_eps)?,
            dg: dg.eval_with(z, pole_eps)?,
            w: data.w.eval_with(z, pole_eps)?,
        })
    };
    let rhs = |z: Cx<T>, y: &VarState<T>, dz: Cx<T>| -> Result<VarState<T>, ExprError> {
        let l = local(z)?;
        let a0 = Mat2::new(czero(), czero(), l.dg, czero());
        let m = Mat2::new(czero(), l.w, czero(), czero());
        Ok(VarState {
            f0: (y.f0 * a0).scale(dz),
            e: (y.e * a0 + y.f0 * m).scale(dz),
        })
    };
    let init = VarState {
        f0: Mat2::identity(),
        e: Mat2::zero(),
    };
    let step = |y: &VarState<T>, za: Cx<T>, zb: Cx<T>| -> Result<VarState<T>, ExprError> {
        let l = local(za)?.dg.norm().max(local(zb)?.dg.norm());
        let n = (l * (zb - za).norm() / T::lit(0.1)).ceil().to_usize().unwrap_or(4).max(4);
        rk4_segment(*y, za, zb, n, &rhs)
    };
    let states = crate::analytic::sweep(grid, &tree, init, step)?;
    let e = data.eps_value();
    let mut out = Field::empty(grid.nx(), grid.ny());
    for (k, s) in states.iter() {
        let d = delta_matrix(local(grid.node_at(k))?.g, e);
        out.set(k, (s.e * d * s.f0.adjoint() + s.f0 * d * s.e.adjoint()).hermitian_part());
    }
    Ok(out)
}

fn sup_distance<T: Real>(a: &Field<HermPoint<T>>, b: &Field<HermPoint<T>>) -> T {
    a.iter()
        .filter_map(|(k, x)| Some(from_herm(*x - *b.get(k)?).euclid_norm()))
        .fold(T::zero(), |m, v| m.max(v))
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Best alignment of `a` onto `b` by `x0 ↦ ±x0`, an orthogonal map of the
/// spatial part and a translation; returns the largest remaining distance.
pub fn procrustes_residual<T: Real>(a: &Field<SpacetimeVec<T>>, b: &Field<SpacetimeVec<T>>) -> f64 {
    let pairs: Vec<([f64; 4], [f64; 4])> = a
        .iter()
        .filter_map(|(k, x)| {
            let y = b.get(k)?;
            Some((x.to_array().map(|v| v.to_f64_lossy()), y.to_array().map(|v| v.to_f64_lossy())))
        })
        .collect();
    if pairs.is_empty() {
        return 0.0;
    }
    let n = pairs.len() as f64;
    let mut ca = [0.0; 4];
    let mut cb = [0.0; 4];
    for (x, y) in &pairs {
        for i in 0..4 {
            ca[i] += x[i] / n;
            cb[i] += y[i] / n;
        }
    }
    let mut h = Matrix3::zeros();
    let mut t0 = 0.0;
    for (x, y) in &pairs {
        let xs = Vector3::new(x[1] - ca[1], x[2] - ca[2], x[3] - ca[3]);
        let ys = Vector3::new(y[1] - cb[1], y[2] - cb[2], y[3] - cb[3]);
        h += ys * xs.transpose();
        t0 += (x[0] - ca[0]) * (y[0] - cb[0]);
    }
    let svd = h.svd(true, true);
    let rot = svd.u.expect("requested") * svd.v_t.expect("requested");
    let s0 = if t0 < 0.0 { -1.0 } else { 1.0 };
    pairs
        .iter()
        .map(|(x, y)| {
            let xs = rot * Vector3::new(x[1] - ca[1], x[2] - ca[2], x[3] - ca[3]);
            let d0 = s0 * (x[0] - ca[0]) - (y[0] - cb[0]);
            let d = Vector3::new(y[1] - cb[1], y[2] - cb[2], y[3] - cb[3]) - xs;
            (d0 * d0 + d.norm_squared()).sqrt()
        })
        .fold(0.0, f64::max)
}

/// The family `X_r` of constant mean curvature `r` surfaces translated so
/// that they converge as `r → 0`, with its limit and diagnostics.
pub fn deformation_family<T: Real>(
    g: &AnalyticExpr<T>,
    w: &AnalyticExpr<T>,
    eps: Sign,
    radii: &[T],
    grid: &DomainGrid<T>,
    method: LimitMethod,
    tol: &Tolerances,
) -> Result<DeformationFamily<T>, LimitError> {
    let mut radii = radii.to_vec();
    if radii.len() < 2 || radii.iter().any(|r| !(*r > T::zero())) {
        return Err(LimitError::BadRadii);
    }
    radii.sort_by(|a, b| b.partial_cmp(a).expect("finite radii"));
    let g0 = g.eval(grid.z0())?;
    if g0.norm() > T::lit(tol.g_const) {
        return Err(LimitError::GNotZeroAtBase {
            re: g0.re.to_f64_lossy(),
            im: g0.im.to_f64_lossy(),
        });
    }
    let members: Vec<Field<HermPoint<T>>> = radii
        .par_iter()
        .map(|&r| {
            let case = match eps {
                Sign::Minus => LimitCase::CmcH3 { r },
                Sign::Plus => LimitCase::CmcS3 { r },
            };
            let data = case.data(g.clone(), w.clone(), grid.clone());
            Ok(integrate_data(&data, &FrameOptions::default(), tol)?.psi())
        })
        .collect::<Result<_, LimitError>>()?;
    let base = LimitCase::MinimalR3.data(g.clone(), w.clone(), grid.clone());
    let base = WeierstrassData { eps, ..base };
    let limit = match method {
        LimitMethod::Variational => variational_limit(&base, tol)?,
        LimitMethod::Richardson => {
            let m = radii.len();
            let (r1, r2) = (radii[m - 2], radii[m - 1]);
            let (x1, x2) = (&members[m - 2], &members[m - 1]);
            let raw = (0..grid.len())
                .map(|k| {
                    let (a, b) = (x1.get(k)?, x2.get(k)?);
                    Some((*b * r1 - *a * r2) * (T::one() / (r1 - r2)))
                })
                .collect();
            Field::from_vec(grid.nx(), grid.ny(), raw)
        }
    };
    let diffs: Vec<f64> = members.iter().map(|x| sup_distance(x, &limit).to_f64_lossy()).collect();
    let rs: Vec<f64> = radii.iter().map(|r| r.to_f64_lossy()).collect();
    let rows = (0..rs.len())
        .map(|i| DeformationRow {
            r: rs[i],
            sup_diff: diffs[i],
            local_slope: (i + 1 < rs.len()).then(|| (diffs[i] / diffs[i + 1]).ln() / (rs[i] / rs[i + 1]).ln()),
        })
        .collect();
    let lx: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = diffs.iter().map(|d| d.ln()).collect();
    let slope = fit_slope(&lx, &ly);

    let d0 = psi_derivatives(&base, &limit);
    let limit_mean_curvature = d0
        .iter()
        .map(|(_, d)| (d.psi_zzbar.to_mat() * (T::lit(2.0) / d.lambda)).euclid_norm().to_f64_lossy())
        .fold(0.0, f64::max);
    let metric_variation = members
        .iter()
        .map(|x| {
            let dr = psi_derivatives(&base, x);
            dr.iter()
                .filter_map(|(k, d)| {
                    let l0 = d0.get(k)?.lambda;
                    Some(((d.lambda - l0).abs() / l0).to_f64_lossy())
                })
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let oracle = weierstrass_closed_form(g, w, eps, grid, Orientation::Frame, tol)?;
    let limit_vec = limit.map(|h| from_herm(*h));
    let procrustes = procrustes_residual(&limit_vec, &oracle);
    Ok(DeformationFamily {
        radii,
        members,
        limit,
        method,
        rows,
        slope,
        limit_mean_curvature,
        procrustes,
        metric_variation,
    })
}

/// Data with `c = 0` and `f = f0 + (a+εb)∫gω`, refusing zeros of `f`.
pub fn c_zero_family<T: Real>(
    g: AnalyticExpr<T>,
    w: AnalyticExpr<T>,
    eps: Sign,
    a: T,
    b: T,
    f0: Cx<T>,
    grid: DomainGrid<T>,
    tol: &Tolerances,
) -> Result<(WeierstrassData<T>, Field<Cx<T>>), LimitError> {
    let s = a + eps.value::<T>() * b;
    let tree = grid.spanning_tree(TreeKind::RowFirst)?;
    let gw = AnalyticExpr::mul(g.clone(), w.clone());
    let prim = primitive(&gw, &grid, &tree, tol)?;
    let f = prim.map(|p| f0 + *p * s);
    let f_eps = T::lit(tol.f_eps);
    // exact zeros when the primitive is polynomial
    if let Some(p) = gw.as_polynomial() {
        let fp = p.antiderivative(grid.z0()).scale(cre(s)) + crate::analytic::PolyC::constant(f0);
        if !fp.is_zero() && fp.degree() > 0 {
            let (x0, x1, y0, y1) = grid.rect();
            let margin = grid.h();
            for z in fp.roots().map_err(|_| LimitError::FVanishes {
                re: f64::NAN,
                im: f64::NAN,
            })? {
                if z.re >= x0 - margin && z.re <= x1 + margin && z.im >= y0 - margin && z.im <= y1 + margin {
                    return Err(LimitError::FVanishes {
                        re: z.re.to_f64_lossy(),
                        im: z.im.to_f64_lossy(),
                    });
                }
            }
        }
    }
    if let Some((k, _)) = f.iter().find(|(_, v)| v.norm() <= f_eps) {
        let z = grid.node_at(k);
        return Err(LimitError::FVanishes {
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
        });
    }
    let data = WeierstrassData {
        g,
        w,
        eps,
        a,
        b,
        c: czero(),
        f0,
        grid,
    };
    Ok((data, f))
}

/// Nodewise distance between the general pipeline and the closed form or
/// null-curve construction of a classical case, after aligning base points.
pub fn oracle_equivalence<T: Real>(
    case: LimitCase<T>,
    g: &AnalyticExpr<T>,
    w: &AnalyticExpr<T>,
    grid: &DomainGrid<T>,
    tol: &Tolerances,
) -> Result<T, LimitError> {
    match case.r() {
        None => {
            // with F(z0) = Id the pipeline reproduces the closed form only
            // when g(z0) = 0
            let g0 = g.eval(grid.z0())?;
            if g0.norm() > T::lit(tol.coeff) {
                return Err(LimitError::GNotZeroAtBase {
                    re: g0.re.to_f64_lossy(),
                    im: g0.im.to_f64_lossy(),
                });
            }
            let data = case.data(g.clone(), w.clone(), grid.clone());
            let psi = integrate_data(&data, &FrameOptions::default(), tol)?.psi();
            let oracle = weierstrass_closed_form(g, w, case.eps(), grid, Orientation::Frame, tol)?;
            Ok(psi
                .iter()
                .filter_map(|(k, p)| Some((from_herm(*p) - *oracle.get(k)?).euclid_norm()))
                .fold(T::zero(), |m, v| m.max(v)))
        }
        Some(r) => Ok(bryant_null_curve(g, w, case.eps(), r, grid, tol)?.pipeline.max),
    }
}
