//! Propagation of values along spanning-tree edges, loop-closure checks and
//! path primitives of holomorphic functions.

use rayon::prelude::*;
use thiserror::Error;

use super::expr::{AnalyticExpr, ExprError};
use super::grid::{DomainGrid, Field, SpanningTree};
use super::quad::gauss_legendre_segment;
use crate::scalar::{czero, Cx, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrimitiveError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("loop closure residual {residual:e} exceeds {tol:e} at cell ({i}, {j})")]
    LoopClosureFailure {
        residual: f64,
        tol: f64,
        i: usize,
        j: usize,
    },
}

/// Largest residual over a family of checks and the node where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual<T> {
    pub max: T,
    pub at: Option<usize>,
}

impl<T: Real> Residual<T> {
    pub fn none() -> Self {
        Self { max: T::zero(), at: None }
    }

    pub fn merge(self, other: Self) -> Self {
        if other.max.is_nan() || other.max > self.max {
            other
        } else {
            self
        }
    }
}

/// Fills a field by carrying `init` from the root along every tree edge with
/// `step(state, from, to)`. Nodes of one tree level are processed in parallel.
pub fn sweep<T, S, E, F>(
    grid: &DomainGrid<T>,
    tree: &SpanningTree,
    init: S,
    step: F,
) -> Result<Field<S>, E>
where
    T: Real,
    S: Clone + Send + Sync,
    E: Send,
    F: Fn(&S, Cx<T>, Cx<T>) -> Result<S, E> + Sync,
{
    let mut field = Field::empty(grid.nx(), grid.ny());
    field.set(tree.root(), init);
    for level in tree.levels().iter().skip(1) {
        let computed: Result<Vec<(usize, S)>, E> = level
            .par_iter()
            .map(|&k| {
                let p = tree.parent(k).expect("non-root node has a parent");
                let from = field.get(p).expect("parent filled before child");
                step(from, grid.node_at(p), grid.node_at(k)).map(|s| (k, s))
            })
            .collect();
        for (k, s) in computed? {
            field.set(k, s);
        }
    }
    Ok(field)
}

/// Transports the value at each cell's lower-left corner once around the
/// cell and measures the mismatch with `dist`.
pub fn cell_loop_residual<T, S, E, F, D>(
    grid: &DomainGrid<T>,
    field: &Field<S>,
    step: F,
    dist: D,
) -> Result<Residual<T>, E>
where
    T: Real,
    S: Clone + Send + Sync,
    E: Send,
    F: Fn(&S, Cx<T>, Cx<T>) -> Result<S, E> + Sync,
    D: Fn(&S, &S) -> T + Sync,
{
    let nx = grid.nx();
    grid.cells()
        .par_iter()
        .map(|&k| {
            let corners = [k, k + 1, k + 1 + nx, k + nx, k];
            let start = field.get(k).expect("cell corner unmasked");
            let mut cur = start.clone();
            for w in corners.windows(2) {
                cur = step(&cur, grid.node_at(w[0]), grid.node_at(w[1]))?;
            }
            Ok(Residual {
                max: dist(&cur, start),
                at: Some(k),
            })
        })
        .try_reduce(Residual::none, |a, b| Ok(a.merge(b)))
}

/// Nodewise maximum of `dist` between two fields over nodes present in both.
pub fn field_distance<T: Real, S: Sync, D: Fn(&S, &S) -> T + Sync>(
    a: &Field<S>,
    b: &Field<S>,
    dist: D,
) -> Residual<T> {
    a.raw()
        .par_iter()
        .zip(b.raw().par_iter())
        .enumerate()
        .filter_map(|(k, (x, y))| match (x, y) {
            (Some(x), Some(y)) => Some(Residual {
                max: dist(x, y),
                at: Some(k),
            }),
            _ => None,
        })
        .reduce(Residual::none, Residual::merge)
}

#[derive(Debug, Clone)]
pub struct PrimitiveField<T> {
    pub values: Field<Cx<T>>,
    /// Cell loop residual divided by the cell perimeter and the local
    /// integrand scale `1 + |e|`.
    pub loop_residual: Residual<T>,
}

/// Primitive of a holomorphic function over the unmasked grid with
/// `P(z0) = 0`, integrated edge by edge with Gauss–Legendre quadrature.
pub fn path_primitive_fn<T: Real>(
    e: &(impl Fn(Cx<T>) -> Result<Cx<T>, ExprError> + Sync),
    grid: &DomainGrid<T>,
    tree: &SpanningTree,
    tol_loop: T,
) -> Result<PrimitiveField<T>, PrimitiveError> {
    let step = |v: &Cx<T>, a: Cx<T>, b: Cx<T>| -> Result<Cx<T>, ExprError> {
        Ok(*v + gauss_legendre_segment(e, a, b, 1)?)
    };
    let values = sweep(grid, tree, czero(), step)?;
    let perimeter = (grid.hx() + grid.hy()) * T::lit(2.0);
    let scale = |k: usize| -> T { T::one() + e(grid.node_at(k)).map(|v| v.norm()).unwrap_or(T::zero()) };
    let loop_residual = cell_loop_residual(grid, &values, step, |a, b| (*a - *b).norm())?;
    let loop_residual = Residual {
        max: loop_residual.max / (perimeter * loop_residual.at.map(scale).unwrap_or(T::one())),
        at: loop_residual.at,
    };
    if !(loop_residual.max <= tol_loop) {
        let (i, j) = grid.coords(loop_residual.at.unwrap_or(0));
        return Err(PrimitiveError::LoopClosureFailure {
            residual: loop_residual.max.to_f64_lossy(),
            tol: tol_loop.to_f64_lossy(),
            i,
            j,
        });
    }
    Ok(PrimitiveField {
        values,
        loop_residual,
    })
}

pub fn path_primitive<T: Real>(
    e: &AnalyticExpr<T>,
    grid: &DomainGrid<T>,
    tree: &SpanningTree,
    tol_loop: T,
) -> Result<PrimitiveField<T>, PrimitiveError> {
    path_primitive_fn(&|z| e.eval(z), grid, tree, tol_loop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::grid::TreeKind;
    use crate::analytic::parse::parse_expression;
    use crate::scalar::cx;

    #[test]
    fn worked_examples() {
        let g = DomainGrid::new(0.0, 1.0, 0.0, 1.0, 5, 5, cx(0.0, 0.0)).unwrap();
        let t = g.spanning_tree(TreeKind::RowFirst).unwrap();
        let p = path_primitive(&AnalyticExpr::z(), &g, &t, 1e-9).unwrap();
        assert!((p.values.at(4, 0).unwrap() - cx(0.5, 0.0)).norm() < 1e-15);
        let one = path_primitive(&AnalyticExpr::real(1.0), &g, &t, 1e-9).unwrap();
        for (k, v) in one.values.iter() {
            assert!((v - g.node_at(k)).norm() < 1e-14);
        }
        let e = parse_expression::<f64>("3*z^2").unwrap();
        let p = path_primitive(&e, &g, &t, 1e-9).unwrap();
        assert!((p.values.at(4, 4).unwrap() - cx(-2.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn loop_failure_detects_enclosed_pole() {
        // a pole inside one cell, without any masked node
        let g = DomainGrid::new(-1.0, 1.0, -1.0, 1.0, 4, 4, cx(-1.0, -1.0)).unwrap();
        let t = g.spanning_tree(TreeKind::RowFirst).unwrap();
        let e = parse_expression::<f64>("1/z").unwrap();
        assert!(matches!(
            path_primitive(&e, &g, &t, 1e-9),
            Err(PrimitiveError::LoopClosureFailure { .. })
        ));
    }
}
