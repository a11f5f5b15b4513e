//! Integration of the holomorphic frame `F`, the immersion `ψ` and the
//! Hermitian potential `Ω`, with loop-closure, determinant and second-order
//! ODE diagnostics.

use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{
    cell_loop_residual, field_distance, sweep, AnalyticExpr, ExprError, Field, GridError, Residual,
    TreeKind,
};
use crate::lorentz::{HermPoint, Mat2};
use crate::scalar::{ci, cre, czero, Cx, Real};
use crate::tolerances::Tolerances;
use crate::verify::fd::{Axis, Stencil};
use crate::weierstrass::{Prepared, WeierstrassData};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("|det F - 1| = {deviation:e} exceeds {tol:e} at node ({i}, {j})")]
    DetDrift {
        deviation: f64,
        tol: f64,
        i: usize,
        j: usize,
    },
    #[error("loop closure residual {residual:e} exceeds {tol:e} at cell ({i}, {j})")]
    LoopClosureFailure {
        residual: f64,
        tol: f64,
        i: usize,
        j: usize,
    },
    #[error("f vanishes at {re}{im:+}i")]
    ZeroOfF { re: f64, im: f64 },
    #[error("F is singular at node ({i}, {j})")]
    SingularF { i: usize, j: usize },
}

/// Base conditions and step control.
#[derive(Debug, Clone, Copy)]
pub struct FrameOptions<T> {
    pub f_init: Mat2<T>,
    pub psi0: HermPoint<T>,
    pub min_substeps: usize,
    pub tree: TreeKind,
}

impl<T: Real> Default for FrameOptions<T> {
    fn default() -> Self {
        Self {
            f_init: Mat2::identity(),
            psi0: HermPoint::zero(),
            min_substeps: 4,
            tree: TreeKind::RowFirst,
        }
    }
}

/// Bound on `‖𝒜‖·h_sub` per substep.
const STEP_BOUND: f64 = 0.1;

/// State carried along edges: `f`, `F` and `ψ` (as a general matrix between
/// nodes, symmetrized at every node).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState<T> {
    pub f: Cx<T>,
    pub frame: Mat2<T>,
    pub psi: Mat2<T>,
}

impl<T: Real> Add for JointState<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            f: self.f + o.f,
            frame: self.frame + o.frame,
            psi: self.psi + o.psi,
        }
    }
}

impl<T: Real> Sub for JointState<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            f: self.f - o.f,
            frame: self.frame - o.frame,
            psi: self.psi - o.psi,
        }
    }
}

impl<T: Real> Mul<T> for JointState<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self {
            f: self.f * s,
            frame: self.frame * s,
            psi: self.psi * s,
        }
    }
}

/// Classical fourth-order Runge–Kutta along the segment `za → zb` in `n`
/// equal substeps; `rhs(z, state, dz)` returns the derivative with respect
/// to the segment parameter.
pub fn rk4_segment<T, S, E>(
    state: S,
    za: Cx<T>,
    zb: Cx<T>,
    n: usize,
    rhs: &impl Fn(Cx<T>, &S, Cx<T>) -> Result<S, E>,
) -> Result<S, E>
where
    T: Real,
    S: Clone + Add<Output = S> + Mul<T, Output = S>,
{
    let n = n.max(1);
    let dz = (zb - za) / T::of_usize(n);
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let mut y = state;
    for k in 0..n {
        let z = za + dz * T::of_usize(k);
        let zm = z + dz * half;
        let k1 = rhs(z, &y, dz)?;
        let k2 = rhs(zm, &(y.clone() + k1.clone() * half), dz)?;
        let k3 = rhs(zm, &(y.clone() + k2.clone() * half), dz)?;
        let k4 = rhs(z + dz, &(y.clone() + k3.clone()), dz)?;
        y = y + (k1 + k2 * T::lit(2.0) + k3 * T::lit(2.0) + k4) * sixth;
    }
    Ok(y)
}

/// Pointwise data of the connection `𝒜 = [[0, (a+εc̄g)w], [g'/f, 0]]`.
pub struct Connection<'a, T> {
    data: &'a WeierstrassData<T>,
    dg: AnalyticExpr<T>,
    pole_eps: T,
}

/// Values of `g`, `g'`, `w` at a point.
#[derive(Debug, Clone, Copy)]
pub struct LocalData<T> {
    pub g: Cx<T>,
    pub dg: Cx<T>,
    pub w: Cx<T>,
}

impl<'a, T: Real> Connection<'a, T> {
    pub fn new(data: &'a WeierstrassData<T>, tol: &Tolerances) -> Self {
        Self {
            data,
            dg: data.dg(),
            pole_eps: T::lit(tol.pole_eps),
        }
    }

    pub fn data(&self) -> &WeierstrassData<T> {
        self.data
    }

    pub fn local(&self, z: Cx<T>) -> Result<LocalData<T>, ExprError> {
        Ok(LocalData {
            g: self.data.g.eval_with(z, self.pole_eps)?,
            dg: self.dg.eval_with(z, self.pole_eps)?,
            w: self.data.w.eval_with(z, self.pole_eps)?,
        })
    }

    pub fn matrix(&self, l: &LocalData<T>, f: Cx<T>) -> Mat2<T> {
        let d = self.data;
        let top = (cre(d.a) + d.c.conj() * l.g * d.eps_value()) * l.w;
        Mat2::new(czero(), top, l.dg / f, czero())
    }

    /// `M = [[ε g f̄ w, (1−ε|g|²) w], [0, 0]]`, so that `ψ_z = F M F*`.
    pub fn m_matrix(&self, l: &LocalData<T>, f: Cx<T>) -> Mat2<T> {
        let e = self.data.eps_value();
        Mat2::new(
            l.g * f.conj() * l.w * e,
            l.w * self.data.positivity(l.g),
            czero(),
            czero(),
        )
    }

    pub fn f_prime(&self, l: &LocalData<T>) -> Cx<T> {
        let d = self.data;
        (d.c + l.g * d.s() + d.c.conj() * l.g * l.g * d.eps_value()) * l.w
    }

    fn rhs(&self, z: Cx<T>, y: &JointState<T>, dz: Cx<T>) -> Result<JointState<T>, FrameError> {
        let l = self.local(z)?;
        if y.f.norm() < self.pole_eps {
            return Err(FrameError::ZeroOfF {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
            });
        }
        let a = self.matrix(&l, y.f);
        let phi = y.frame * self.m_matrix(&l, y.f) * y.frame.adjoint();
        let pd = phi.scale(dz);
        Ok(JointState {
            f: self.f_prime(&l) * dz,
            frame: (y.frame * a).scale(dz),
            psi: pd + pd.adjoint(),
        })
    }

    /// Integrates the joint state along one edge.
    pub fn step(&self, y: &JointState<T>, za: Cx<T>, zb: Cx<T>, min_sub: usize) -> Result<JointState<T>, FrameError> {
        let len = (zb - za).norm();
        let mut norm = T::zero();
        for z in [za, zb] {
            let l = self.local(z)?;
            norm = norm.max(self.matrix(&l, y.f).max_norm());
        }
        let n = (norm * len / T::lit(STEP_BOUND)).ceil().to_usize().unwrap_or(min_sub).max(min_sub);
        let out = rk4_segment(*y, za, zb, n, &|z, s: &JointState<T>, dz| self.rhs(z, s, dz))?;
        Ok(JointState {
            psi: out.psi.hermitian_part().to_mat(),
            ..out
        })
    }
}

/// `φ(z) = F M F*`, the `z`-derivative of `ψ`.
pub fn psi_z_form<T: Real>(
    data: &WeierstrassData<T>,
    f: Cx<T>,
    frame: &Mat2<T>,
    z: Cx<T>,
    tol: &Tolerances,
) -> Result<Mat2<T>, ExprError> {
    let conn = Connection::new(data, tol);
    let l = conn.local(z)?;
    Ok(*frame * conn.m_matrix(&l, f) * frame.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample<T> {
    pub f: Cx<T>,
    pub frame: Mat2<T>,
    pub psi: HermPoint<T>,
}

#[derive(Debug, Clone)]
pub struct FrameField<T> {
    pub samples: Field<FrameSample<T>>,
    pub det_residual: Residual<T>,
    pub loop_residual: Residual<T>,
    pub tree: TreeKind,
}

impl<T: Real> FrameField<T> {
    pub fn psi(&self) -> Field<HermPoint<T>> {
        self.samples.map(|s| s.psi)
    }

    pub fn frame(&self) -> Field<Mat2<T>> {
        self.samples.map(|s| s.frame)
    }

    pub fn f(&self) -> Field<Cx<T>> {
        self.samples.map(|s| s.f)
    }

    /// Largest relative nodewise difference to another integration of the
    /// same data (for path-independence checks).
    pub fn distance(&self, other: &Self) -> Residual<T> {
        field_distance(&self.samples, &other.samples, sample_distance)
    }
}

fn rel<T: Real>(d: T, scale: T) -> T {
    d / (T::one() + scale)
}

pub fn sample_distance<T: Real>(a: &FrameSample<T>, b: &FrameSample<T>) -> T {
    rel((a.f - b.f).norm(), a.f.norm())
        .max(rel((a.frame - b.frame).max_norm(), a.frame.max_norm()))
        .max(rel((a.psi - b.psi).to_mat().max_norm(), a.psi.to_mat().max_norm()))
}

fn state_distance<T: Real>(a: &JointState<T>, b: &JointState<T>) -> T {
    rel((a.f - b.f).norm(), a.f.norm())
        .max(rel((a.frame - b.frame).max_norm(), a.frame.max_norm()))
        .max(rel((a.psi - b.psi).max_norm(), a.psi.max_norm()))
}

/// Integrates `f`, `F` and `ψ` over the unmasked grid of prepared data.
pub fn integrate_frame<T: Real>(
    prepared: &Prepared<T>,
    opts: &FrameOptions<T>,
    tol: &Tolerances,
) -> Result<FrameField<T>, FrameError> {
    integrate_data(&prepared.data, opts, tol)
}

/// Same as [`integrate_frame`] on raw data (the caller is responsible for
/// validation and masking).
pub fn integrate_data<T: Real>(
    data: &WeierstrassData<T>,
    opts: &FrameOptions<T>,
    tol: &Tolerances,
) -> Result<FrameField<T>, FrameError> {
    let grid = &data.grid;
    let tree = grid.spanning_tree(opts.tree)?;
    let conn = Connection::new(data, tol);
    let init = JointState {
        f: data.f0,
        frame: opts.f_init,
        psi: opts.psi0.to_mat(),
    };
    let step = |y: &JointState<T>, za: Cx<T>, zb: Cx<T>| conn.step(y, za, zb, opts.min_substeps);
    let states = sweep(grid, &tree, init, step)?;
    let loop_raw = cell_loop_residual(grid, &states, step, state_distance)?;
    if !(loop_raw.max <= T::lit(tol.loop_closure)) {
        let (i, j) = grid.coords(loop_raw.at.unwrap_or(0));
        return Err(FrameError::LoopClosureFailure {
            residual: loop_raw.max.to_f64_lossy(),
            tol: tol.loop_closure,
            i,
            j,
        });
    }
    let samples = states.map(|s| FrameSample {
        f: s.f,
        frame: s.frame,
        psi: s.psi.hermitian_part(),
    });
    let det_residual = samples
        .iter()
        .map(|(k, s)| Residual {
            max: (s.frame.det() - opts.f_init.det()).norm(),
            at: Some(k),
        })
        .fold(Residual::none(), Residual::merge);
    if !(det_residual.max <= T::lit(tol.det)) {
        let (i, j) = grid.coords(det_residual.at.unwrap_or(0));
        return Err(FrameError::DetDrift {
            deviation: det_residual.max.to_f64_lossy(),
            tol: tol.det,
            i,
            j,
        });
    }
    Ok(FrameField {
        samples,
        det_residual,
        loop_residual: loop_raw,
        tree: opts.tree,
    })
}

/// `Ω = F⁻¹ ψ (F⁻¹)*` at every node, with the residual of
/// `Ω_z + 𝒜Ω = M` (finite differences, relative to `1 + ‖M‖ + ‖𝒜Ω‖`).
#[derive(Debug, Clone)]
pub struct OmegaField<T> {
    pub values: Field<HermPoint<T>>,
    pub pde_residual: Residual<T>,
}

pub fn recover_omega<T: Real>(
    data: &WeierstrassData<T>,
    frame: &FrameField<T>,
    tol: &Tolerances,
) -> Result<OmegaField<T>, FrameError> {
    let grid = &data.grid;
    let mut values = Field::empty(grid.nx(), grid.ny());
    for (k, s) in frame.samples.iter() {
        let inv = s.frame.inverse().ok_or_else(|| {
            let (i, j) = grid.coords(k);
            FrameError::SingularF { i, j }
        })?;
        values.set(k, (inv * s.psi.to_mat() * inv.adjoint()).hermitian_part());
    }
    let conn = Connection::new(data, tol);
    let st = Stencil::new(grid, &values);
    let pde_residual = frame
        .samples
        .raw()
        .par_iter()
        .enumerate()
        .filter_map(|(k, s)| {
            let s = s.as_ref()?;
            let dx = st.d1(k, Axis::X)?.to_mat();
            let dy = st.d1(k, Axis::Y)?.to_mat();
            let omega_z = (dx - dy.scale(ci())) * T::lit(0.5);
            let l = conn.local(grid.node_at(k)).ok()?;
            let om = values.get(k)?.to_mat();
            let a_om = conn.matrix(&l, s.f) * om;
            let m = conn.m_matrix(&l, s.f);
            let r = (omega_z + a_om - m).max_norm() / (T::one() + m.max_norm() + a_om.max_norm());
            Some(Residual { max: r, at: Some(k) })
        })
        .reduce(Residual::none, Residual::merge);
    Ok(OmegaField {
        values,
        pde_residual,
    })
}

/// Residuals of the second-order equation
/// `h Z'' − h' Z' − (a+εc̄g) q h Z = 0` (`h = g'/f`) for both entries of the
/// first column of `F`, and of the Wronskian `C D' − D C' = g'/f`.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrderReport<T> {
    pub ode_residual: Residual<T>,
    pub wronskian_residual: Residual<T>,
}

pub fn second_order_check<T: Real>(
    data: &WeierstrassData<T>,
    frame: &FrameField<T>,
    tol: &Tolerances,
) -> Result<SecondOrderReport<T>, FrameError> {
    let grid = &data.grid;
    let conn = Connection::new(data, tol);
    let ddg = conn.dg.derivative();
    let pole_eps = T::lit(tol.pole_eps);
    let cfield = frame.samples.map(|s| s.frame.a);
    let dfield = frame.samples.map(|s| s.frame.c);
    let sc = Stencil::new(grid, &cfield);
    let sd = Stencil::new(grid, &dfield);
    let mut ode = Residual::none();
    let mut wr = Residual::none();
    for (k, s) in frame.samples.iter() {
        let z = grid.node_at(k);
        let l = conn.local(z)?;
        let g2 = ddg.eval_with(z, pole_eps)?;
        let fp = conn.f_prime(&l);
        let h = l.dg / s.f;
        let hp = g2 / s.f - l.dg * fp / (s.f * s.f);
        let q = l.w * h;
        let coef = (cre(data.a) + data.c.conj() * l.g * data.eps_value()) * q * h;
        for (st, zv) in [(&sc, s.frame.a), (&sd, s.frame.c)] {
            let (Some(d1), Some(xx), Some(yy)) = (st.dz(k), st.d2(k, Axis::X), st.d2(k, Axis::Y)) else {
                continue;
            };
            let d2 = (xx - yy) * T::lit(0.5);
            let terms = [h * d2, hp * d1, coef * zv];
            let scale = T::one() + terms.iter().map(|t| t.norm()).sum::<T>();
            let r = (terms[0] - terms[1] - terms[2]).norm() / scale;
            ode = ode.merge(Residual { max: r, at: Some(k) });
        }
        if let (Some(dc), Some(dd)) = (sc.dz_6(k), sd.dz_6(k)) {
            let w = s.frame.a * dd - s.frame.c * dc;
            let r = (w - h).norm() / (T::one() + h.norm());
            wr = wr.merge(Residual { max: r, at: Some(k) });
        }
    }
    Ok(SecondOrderReport {
        ode_residual: ode,
        wronskian_residual: wr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{parse_expression, DomainGrid};
    use crate::lorentz::from_herm;
    use crate::scalar::cx;
    use crate::weierstrass::{prepare, Sign};

    fn enneper(n: usize) -> WeierstrassData<f64> {
        WeierstrassData {
            g: parse_expression("z").unwrap(),
            w: parse_expression("1").unwrap(),
            eps: Sign::Minus,
            a: 0.0,
            b: 0.0,
            c: cx(0.0, 0.0),
            f0: cx(1.0, 0.0),
            grid: DomainGrid::centered_square(0.5, n).unwrap(),
        }
    }

    #[test]
    fn minimal_frame_is_lower_triangular() {
        let tol = Tolerances::default();
        let p = prepare(enneper(17), &tol).unwrap();
        let fr = integrate_frame(&p, &FrameOptions::default(), &tol).unwrap();
        let base = fr.samples.get(p.data.grid.base_index()).unwrap();
        assert_eq!(base.frame, Mat2::identity());
        for (k, s) in fr.samples.iter() {
            let z = p.data.grid.node_at(k);
            let want = Mat2::new(cx(1.0, 0.0), cx(0.0, 0.0), z, cx(1.0, 0.0));
            assert!((s.frame - want).max_norm() < 1e-14);
        }
    }

    #[test]
    fn enneper_psi_at_half() {
        let tol = Tolerances::default();
        let p = prepare(enneper(17), &tol).unwrap();
        let fr = integrate_frame(&p, &FrameOptions::default(), &tol).unwrap();
        let k = p.data.grid.index(16, 8);
        assert_eq!(p.data.grid.node_at(k), cx(0.5, 0.0));
        let v = from_herm(fr.samples.get(k).unwrap().psi);
        assert!(v.x0.abs() < 1e-14);
        assert!((v.x1 - 11.0 / 24.0).abs() < 1e-14);
        assert!(v.x2.abs() < 1e-14);
        assert!((v.x3 + 0.25).abs() < 1e-14);
    }

    #[test]
    fn psi_z_form_examples() {
        let tol = Tolerances::default();
        let d = enneper(5);
        let frame = Mat2::new(cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0));
        let phi = psi_z_form(&d, cx(1.0, 0.0), &frame, cx(0.0, 0.0), &tol).unwrap();
        assert_eq!(phi, Mat2::new(cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)));
        let z = cx(0.3, -0.2);
        let frame = Mat2::new(cx(1.0, 0.0), cx(0.0, 0.0), z, cx(1.0, 0.0));
        let phi = psi_z_form(&d, cx(1.0, 0.0), &frame, z, &tol).unwrap();
        // top-left entry carries ε g f̄ w = −z
        assert!((phi.a + z).norm() < 1e-15);
        assert!((phi - Mat2::new(-z, cx(1.0, 0.0), -z * z, z)).max_norm() < 1e-15);
    }

    #[test]
    fn minimal_second_order_and_wronskian() {
        let tol = Tolerances::default();
        let p = prepare(enneper(17), &tol).unwrap();
        let fr = integrate_frame(&p, &FrameOptions::default(), &tol).unwrap();
        let r = second_order_check(&p.data, &fr, &tol).unwrap();
        assert!(r.ode_residual.max < 1e-12);
        assert!(r.wronskian_residual.max < 1e-12);
    }
}
