//! Weierstrass-type input data, validation of the admissibility conditions,
//! and the derived holomorphic function `f` and Hopf density `q`.

use std::fmt;

use thiserror::Error;

use crate::analytic::{
    path_primitive_fn, rational_orders, AnalyticExpr, DomainGrid, ExprError, Field, GridError,
    PolyC, PolyError, PrimitiveError, Residual, TreeKind,
};
use crate::scalar::{cre, Cx, Real};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn from_i32(e: i32) -> Option<Self> {
        match e {
            -1 => Some(Sign::Minus),
            1 => Some(Sign::Plus),
            _ => None,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn value<T: Real>(self) -> T {
        T::lit(self.as_i32() as f64)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i32())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeierstrassError {
    #[error("C1 violated at {re}{im:+}i: {detail}")]
    C1Violation { re: f64, im: f64, detail: String },
    #[error("C2 violated at {re}{im:+}i: {detail}")]
    C2Violation { re: f64, im: f64, detail: String },
    #[error("g is constant (q vanishes identically): the surface is flat and lies in an affine degenerate hyperplane; construction refused")]
    Flat,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn at<T: Real>(z: Cx<T>) -> (f64, f64) {
    (z.re.to_f64_lossy(), z.im.to_f64_lossy())
}

fn c1<T: Real>(z: Cx<T>, detail: impl Into<String>) -> WeierstrassError {
    let (re, im) = at(z);
    WeierstrassError::C1Violation {
        re,
        im,
        detail: detail.into(),
    }
}

fn c2<T: Real>(z: Cx<T>, detail: impl Into<String>) -> WeierstrassError {
    let (re, im) = at(z);
    WeierstrassError::C2Violation {
        re,
        im,
        detail: detail.into(),
    }
}

/// `(g, ω = w dz, ε, a, b, c, f0)` on a grid whose base node is `z0`.
#[derive(Debug, Clone)]
pub struct WeierstrassData<T> {
    pub g: AnalyticExpr<T>,
    pub w: AnalyticExpr<T>,
    pub eps: Sign,
    pub a: T,
    pub b: T,
    pub c: Cx<T>,
    pub f0: Cx<T>,
    pub grid: DomainGrid<T>,
}

impl<T: Real> WeierstrassData<T> {
    pub fn eps_value(&self) -> T {
        self.eps.value()
    }

    /// `a + εb`.
    pub fn s(&self) -> T {
        self.a + self.eps_value() * self.b
    }

    pub fn z0(&self) -> Cx<T> {
        self.grid.z0()
    }

    pub fn dg(&self) -> AnalyticExpr<T> {
        self.g.derivative()
    }

    /// `(c + (a+εb) g + ε c̄ g²) w`, the derivative of `f`.
    pub fn f_integrand(&self) -> AnalyticExpr<T> {
        let e = self.eps_value();
        let g = self.g.clone();
        let quad = AnalyticExpr::add(
            AnalyticExpr::add(
                AnalyticExpr::constant(self.c),
                AnalyticExpr::mul(AnalyticExpr::real(self.s()), g.clone()),
            ),
            AnalyticExpr::mul(
                AnalyticExpr::constant(self.c.conj() * e),
                AnalyticExpr::powi(g, 2),
            ),
        );
        AnalyticExpr::mul(quad, self.w.clone())
    }

    /// `(a + b|g|² + 2ε Re(c̄ g))`, the numerator of `2E/λ`.
    pub fn e_numerator(&self, g: Cx<T>) -> T {
        self.a + self.b * g.norm_sqr() + T::lit(2.0) * self.eps_value() * (self.c.conj() * g).re
    }

    /// `1 − ε|g|²`.
    pub fn positivity(&self, g: Cx<T>) -> T {
        T::one() - self.eps_value() * g.norm_sqr()
    }
}

#[derive(Debug, Clone)]
pub struct C1Report<T> {
    /// Minimum of `1 − ε|g|²` over unmasked nodes.
    pub min_positivity: T,
    pub min_at: Option<usize>,
    /// Matched pole of `g` (order k) and zero of `ω` (order 2k) pairs.
    pub matched_poles: Vec<(Cx<T>, i32)>,
    pub rational_checked: bool,
}

pub fn validate_c1<T: Real>(data: &WeierstrassData<T>, tol: &Tolerances) -> Result<C1Report<T>, WeierstrassError> {
    let grid = &data.grid;
    let mut min_positivity = T::infinity();
    let mut min_at = None;
    for k in grid.unmasked() {
        let z = grid.node_at(k);
        let g = data.g.eval_with(z, T::lit(tol.pole_eps))?;
        let p = data.positivity(g);
        if p < min_positivity {
            min_positivity = p;
            min_at = Some(k);
        }
    }
    if let Some(k) = min_at {
        if !(min_positivity > T::zero()) {
            return Err(c1(
                grid.node_at(k),
                format!("1 - eps|g|^2 = {} is not positive", min_positivity),
            ));
        }
    }
    let mut matched_poles = Vec::new();
    let mut rational_checked = false;
    if let (Some((gn, gd)), Some((wn, wd))) = (data.g.as_rational(), data.w.as_rational()) {
        rational_checked = true;
        let rect = Some(grid.rect());
        let coprime = T::lit(tol.coprime);
        let g_orders = rational_orders(&gn, &gd, rect, coprime)?;
        let w_orders = rational_orders(&wn, &wd, rect, coprime)?;
        let close = |a: Cx<T>, b: Cx<T>| (a - b).norm() <= T::lit(1e-6) * (T::one() + a.norm());
        for gp in g_orders.iter().filter(|r| r.order < 0) {
            let k = -gp.order;
            match w_orders.iter().find(|r| close(r.root, gp.root)) {
                Some(wz) if wz.order == 2 * k => matched_poles.push((gp.root, k)),
                Some(wz) => {
                    return Err(c1(
                        gp.root,
                        format!("pole of g of order {k} meets zero/pole of w of order {}", wz.order),
                    ))
                }
                None => return Err(c1(gp.root, format!("pole of g of order {k} without a zero of w of order {}", 2 * k))),
            }
        }
        for wz in w_orders.iter() {
            if wz.order < 0 {
                return Err(c1(wz.root, "w has a pole"));
            }
            if !g_orders.iter().any(|r| r.order < 0 && close(r.root, wz.root)) {
                return Err(c1(wz.root, format!("zero of w of order {} where g is finite", wz.order)));
            }
        }
    }
    Ok(C1Report {
        min_positivity,
        min_at,
        matched_poles,
        rational_checked,
    })
}

/// How `f` was obtained.
#[derive(Debug, Clone)]
pub enum FSource<T> {
    /// Exact polynomial primitive of a polynomial integrand.
    ClosedForm(AnalyticExpr<T>),
    /// Gauss–Legendre path primitive.
    Integrated,
}

#[derive(Debug, Clone)]
pub struct FField<T> {
    pub values: Field<Cx<T>>,
    pub source: FSource<T>,
    pub loop_residual: Residual<T>,
    /// Approximate zeros of `f` inside the domain; nodes around them are masked.
    pub zeros: Vec<Cx<T>>,
    /// Largest deviation of `f` from `f0` over unmasked nodes.
    pub variation: T,
}

impl<T: Real> FField<T> {
    pub fn is_constant(&self, f0: Cx<T>, tol: &Tolerances) -> bool {
        self.variation <= T::lit(tol.f_const) * f0.norm().max(T::min_positive_value())
    }
}

/// Builds `f = f0 + ∫ (c + (a+εb)g + εc̄g²) ω`. Zeros of `f` in the domain
/// are masked with radius `mask_radius_h · h` in `data.grid` and returned.
pub fn build_f<T: Real>(data: &mut WeierstrassData<T>, tol: &Tolerances) -> Result<FField<T>, WeierstrassError> {
    let integrand = data.f_integrand();
    let z0 = data.z0();
    let radius = T::lit(tol.mask_radius_h) * data.grid.h();
    let mut zeros = Vec::new();
    let closed = integrand.as_polynomial().map(|p| {
        let prim = p.antiderivative(z0) + PolyC::constant(data.f0);
        AnalyticExpr::poly(prim)
    });
    if let Some(AnalyticExpr::Poly(p)) = &closed {
        for r in p.roots()? {
            if data.grid.contains(r) || distance_to_rect(&data.grid, r) < radius {
                zeros.push(r);
            }
        }
    }
    if let Some(e) = &closed {
        for &r in &zeros {
            data.grid.mask_disk(r, radius);
        }
        let values = node_values(&data.grid, |z| e.eval_with(z, T::lit(tol.pole_eps)))?;
        let variation = variation(&values, data.f0);
        return Ok(FField {
            values,
            source: FSource::ClosedForm(e.clone()),
            loop_residual: Residual::none(),
            zeros,
            variation,
        });
    }
    let tree = data.grid.spanning_tree(TreeKind::RowFirst)?;
    let eval = |z: Cx<T>| integrand.eval_with(z, T::lit(tol.pole_eps));
    let prim = path_primitive_fn(&eval, &data.grid, &tree, T::lit(tol.loop_closure))?;
    let mut values = prim.values.map(|v| *v + data.f0);
    let h = data.grid.h();
    let mut to_mask = Vec::new();
    for (k, f) in values.iter() {
        let z = data.grid.node_at(k);
        let df = eval(z)?;
        if df.norm() == T::zero() {
            continue;
        }
        let step = *f / df;
        if f.norm() < T::lit(tol.f_eps) || step.norm() < h {
            to_mask.push(z - step);
        }
    }
    for z in to_mask {
        if !zeros.iter().any(|r: &Cx<T>| (*r - z).norm() < h) {
            zeros.push(z);
        }
    }
    for &r in &zeros {
        data.grid.mask_disk(r, radius);
    }
    for k in 0..data.grid.len() {
        if data.grid.is_masked(k) {
            values.clear(k);
        }
    }
    let variation = variation(&values, data.f0);
    Ok(FField {
        values,
        source: FSource::Integrated,
        loop_residual: prim.loop_residual,
        zeros,
        variation,
    })
}

fn distance_to_rect<T: Real>(grid: &DomainGrid<T>, z: Cx<T>) -> T {
    let (x0, x1, y0, y1) = grid.rect();
    let dx = (x0 - z.re).max(z.re - x1).max(T::zero());
    let dy = (y0 - z.im).max(z.im - y1).max(T::zero());
    dx.hypot(dy)
}

fn variation<T: Real>(values: &Field<Cx<T>>, f0: Cx<T>) -> T {
    values.iter().map(|(_, v)| (*v - f0).norm()).fold(T::zero(), T::max)
}

/// Evaluates `e` at every unmasked node.
pub fn node_values<T: Real, E>(
    grid: &DomainGrid<T>,
    e: impl Fn(Cx<T>) -> Result<Cx<T>, E>,
) -> Result<Field<Cx<T>>, E> {
    let mut out = Field::empty(grid.nx(), grid.ny());
    for k in grid.unmasked() {
        out.set(k, e(grid.node_at(k))?);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct C2Report<T> {
    pub max_q: T,
    pub loop_residual: Residual<T>,
    /// `|w g'|` at each zero of `f` (must vanish there).
    pub zero_residuals: Vec<(Cx<T>, T)>,
}

pub fn validate_c2<T: Real>(
    data: &WeierstrassData<T>,
    f: &FField<T>,
    tol: &Tolerances,
) -> Result<C2Report<T>, WeierstrassError> {
    let dg = data.dg();
    let pole_eps = T::lit(tol.pole_eps);
    let mut zero_residuals = Vec::new();
    for &r in &f.zeros {
        if !data.grid.contains(r) {
            continue;
        }
        let v = match (data.w.eval_with(r, pole_eps), dg.eval_with(r, pole_eps)) {
            (Ok(w), Ok(d)) => (w * d).norm(),
            _ => T::zero(),
        };
        let scale = T::one()
            + data.w.eval_with(r + cre(data.grid.h()), pole_eps).map(|v| v.norm()).unwrap_or(T::one());
        if v > T::lit(1e-6) * scale {
            return Err(c2(r, format!("f vanishes but |w g'| = {v} does not")));
        }
        zero_residuals.push((r, v));
    }
    let q = |z: Cx<T>| -> Result<Cx<T>, ExprError> {
        let fv = match &f.source {
            FSource::ClosedForm(e) => e.eval_with(z, pole_eps)?,
            FSource::Integrated => return Ok(cre(T::zero())),
        };
        Ok(data.w.eval_with(z, pole_eps)? * dg.eval_with(z, pole_eps)? / fv)
    };
    let mut max_q = T::zero();
    for (k, fv) in f.values.iter() {
        let z = data.grid.node_at(k);
        let v = data.w.eval_with(z, pole_eps)? * dg.eval_with(z, pole_eps)? / *fv;
        if !(v.norm().is_finite()) || v.norm() > T::lit(1e12) {
            return Err(c2(z, "q = w g'/f is unbounded"));
        }
        max_q = max_q.max(v.norm());
    }
    let loop_residual = match &f.source {
        FSource::ClosedForm(_) => {
            let tree = data.grid.spanning_tree(TreeKind::RowFirst)?;
            match path_primitive_fn(&q, &data.grid, &tree, T::lit(tol.loop_closure)) {
                Ok(p) => p.loop_residual,
                Err(PrimitiveError::LoopClosureFailure { residual, i, j, .. }) => {
                    return Err(c2(
                        data.grid.node(i, j),
                        format!("q is not closed around a cell (residual {residual:e})"),
                    ))
                }
                Err(e) => return Err(e.into()),
            }
        }
        FSource::Integrated => Residual::none(),
    };
    Ok(C2Report {
        max_q,
        loop_residual,
        zero_residuals,
    })
}

#[derive(Debug, Clone)]
pub struct HopfDensity<T> {
    pub values: Field<Cx<T>>,
    pub max_abs: T,
    pub flat: bool,
}

/// `q = w g'/f` at every unmasked node.
pub fn hopf_density<T: Real>(
    data: &WeierstrassData<T>,
    f: &Field<Cx<T>>,
    tol: &Tolerances,
) -> Result<HopfDensity<T>, WeierstrassError> {
    let dg = data.dg();
    let pole_eps = T::lit(tol.pole_eps);
    let mut values = Field::empty(f.nx(), f.ny());
    let mut max_abs = T::zero();
    for (k, fv) in f.iter() {
        let z = data.grid.node_at(k);
        let v = data.w.eval_with(z, pole_eps)? * dg.eval_with(z, pole_eps)? / *fv;
        max_abs = max_abs.max(v.norm());
        values.set(k, v);
    }
    Ok(HopfDensity {
        values,
        max_abs,
        flat: max_abs < T::lit(tol.q_eps),
    })
}

/// Everything derived from validated data.
#[derive(Debug, Clone)]
pub struct Prepared<T> {
    pub data: WeierstrassData<T>,
    pub c1: C1Report<T>,
    pub f: FField<T>,
    pub c2: C2Report<T>,
    pub q: HopfDensity<T>,
    pub parallel_h: bool,
    pub warnings: Vec<String>,
}

/// Masks poles, validates both conditions, builds `f` and `q`, and refuses
/// flat data.
pub fn prepare<T: Real>(mut data: WeierstrassData<T>, tol: &Tolerances) -> Result<Prepared<T>, WeierstrassError> {
    let mut warnings = Vec::new();
    let radius = T::lit(tol.mask_radius_h) * data.grid.h();
    for e in [&data.g, &data.w] {
        if let Some((_, den)) = e.as_rational() {
            for r in den.roots()? {
                if data.grid.contains(r) || distance_to_rect(&data.grid, r) < radius {
                    let n = data.grid.mask_disk(r, radius);
                    warnings.push(format!(
                        "masked {n} nodes around pole at {}{:+}i",
                        r.re, r.im
                    ));
                }
            }
        }
    }
    let c1 = validate_c1(&data, tol)?;
    let f = build_f(&mut data, tol)?;
    for z in &f.zeros {
        warnings.push(format!("ZeroOfF near {}{:+}i; nodes masked", z.re, z.im));
    }
    let c2 = validate_c2(&data, &f, tol)?;
    data.grid.check_topology()?;
    let q = hopf_density(&data, &f.values, tol)?;
    if q.flat {
        return Err(WeierstrassError::Flat);
    }
    let parallel_h = f.is_constant(data.f0, tol);
    Ok(Prepared {
        data,
        c1,
        f,
        c2,
        q,
        parallel_h,
        warnings,
    })
}
