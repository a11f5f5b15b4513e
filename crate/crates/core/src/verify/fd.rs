//! Central finite-difference stencils on grid fields.

use std::ops::{Add, Mul, Sub};

use crate::analytic::{DomainGrid, Field};
use crate::scalar::{ci, Cx, Real};

/// Values that can be combined linearly with real weights.
pub trait Lin<T>: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self> {}
impl<T, V> Lin<T> for V where V: Clone + Add<Output = V> + Sub<Output = V> + Mul<T, Output = V> {}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
const D1_6: [f64; 7] = [
    -1.0 / 60.0,
    9.0 / 60.0,
    -45.0 / 60.0,
    0.0,
    45.0 / 60.0,
    -9.0 / 60.0,
    1.0 / 60.0,
];
const D3: [f64; 7] = [
    1.0 / 8.0,
    -1.0,
    13.0 / 8.0,
    0.0,
    -13.0 / 8.0,
    1.0,
    -1.0 / 8.0,
];

const D2_6: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    3.0 / 2.0,
    -49.0 / 18.0,
    3.0 / 2.0,
    -3.0 / 20.0,
    1.0 / 90.0,
];
const D3_6: [f64; 9] = [
    -7.0 / 240.0,
    3.0 / 10.0,
    -169.0 / 120.0,
    61.0 / 30.0,
    0.0,
    -61.0 / 30.0,
    169.0 / 120.0,
    -3.0 / 10.0,
    7.0 / 240.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Stencil evaluator bound to a grid and a field.
pub struct Stencil<'a, T, V> {
    grid: &'a DomainGrid<T>,
    field: &'a Field<V>,
}

impl<'a, T: Real, V: Lin<T>> Stencil<'a, T, V> {
    pub fn new(grid: &'a DomainGrid<T>, field: &'a Field<V>) -> Self {
        Self { grid, field }
    }

    fn sample(&self, i: usize, j: usize, di: i64, dj: i64) -> Option<&V> {
        let (ii, jj) = (i as i64 + di, j as i64 + dj);
        if ii < 0 || jj < 0 {
            return None;
        }
        self.field.at(ii as usize, jj as usize)
    }

    fn line(&self, k: usize, axis: Axis, w: &[f64], scale: T) -> Option<V> {
        let (i, j) = self.grid.coords(k);
        let half = (w.len() / 2) as i64;
        let mut acc: Option<V> = None;
        for (n, &c) in w.iter().enumerate() {
            let off = n as i64 - half;
            let (di, dj) = match axis {
                Axis::X => (off, 0),
                Axis::Y => (0, off),
            };
            let v = self.sample(i, j, di, dj)?;
            if c == 0.0 {
                continue;
            }
            let term = v.clone() * T::lit(c);
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.map(|a| a * scale)
    }

    fn h(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.grid.hx(),
            Axis::Y => self.grid.hy(),
        }
    }

    /// Fourth-order first derivative.
    pub fn d1(&self, k: usize, axis: Axis) -> Option<V> {
        self.line(k, axis, &D1, T::one() / self.h(axis))
    }

    /// Sixth-order first derivative.
    pub fn d1_6(&self, k: usize, axis: Axis) -> Option<V> {
        self.line(k, axis, &D1_6, T::one() / self.h(axis))
    }

    /// Fourth-order second derivative.
    pub fn d2(&self, k: usize, axis: Axis) -> Option<V> {
        let h = self.h(axis);
        self.line(k, axis, &D2, T::one() / (h * h))
    }

    /// Sixth-order second derivative.
    pub fn d2_6(&self, k: usize, axis: Axis) -> Option<V> {
        let h = self.h(axis);
        self.line(k, axis, &D2_6, T::one() / (h * h))
    }

    /// Sixth-order third derivative.
    pub fn d3_6(&self, k: usize, axis: Axis) -> Option<V> {
        let h = self.h(axis);
        self.line(k, axis, &D3_6, T::one() / (h * h * h))
    }

    /// Fourth-order third derivative.
    pub fn d3(&self, k: usize, axis: Axis) -> Option<V> {
        let h = self.h(axis);
        self.line(k, axis, &D3, T::one() / (h * h * h))
    }

    /// Fourth-order mixed derivative `∂x∂y`.
    pub fn dxy(&self, k: usize) -> Option<V> {
        let (i, j) = self.grid.coords(k);
        let mut acc: Option<V> = None;
        for (a, &ca) in D1.iter().enumerate() {
            for (b, &cb) in D1.iter().enumerate() {
                let w = ca * cb;
                if w == 0.0 {
                    continue;
                }
                let v = self.sample(i, j, a as i64 - 2, b as i64 - 2)?;
                let term = v.clone() * T::lit(w);
                acc = Some(match acc {
                    None => term,
                    Some(x) => x + term,
                });
            }
        }
        // the zero-weight centre row/column still has to exist for a full stencil
        self.sample(i, j, 0, 2)?;
        self.sample(i, j, 2, 0)?;
        acc.map(|x| x * (T::one() / (self.grid.hx() * self.grid.hy())))
    }

    /// `Δ/4 = ∂z∂z̄`.
    pub fn dz_dzbar(&self, k: usize) -> Option<V> {
        Some((self.d2(k, Axis::X)? + self.d2(k, Axis::Y)?) * T::lit(0.25))
    }
}

/// Complex-valued convenience operators.
impl<'a, T: Real> Stencil<'a, T, Cx<T>> {
    /// `∂z = (∂x − i∂y)/2`.
    pub fn dz(&self, k: usize) -> Option<Cx<T>> {
        Some((self.d1(k, Axis::X)? - ci::<T>() * self.d1(k, Axis::Y)?) * T::lit(0.5))
    }

    pub fn dz_6(&self, k: usize) -> Option<Cx<T>> {
        Some((self.d1_6(k, Axis::X)? - ci::<T>() * self.d1_6(k, Axis::Y)?) * T::lit(0.5))
    }

    /// `∂z̄ = (∂x + i∂y)/2`.
    pub fn dzbar(&self, k: usize) -> Option<Cx<T>> {
        Some((self.d1(k, Axis::X)? + ci::<T>() * self.d1(k, Axis::Y)?) * T::lit(0.5))
    }

    /// `∂z∂z = (∂xx − ∂yy − 2i∂xy)/4`.
    pub fn dzz(&self, k: usize) -> Option<Cx<T>> {
        let v = self.d2(k, Axis::X)? - self.d2(k, Axis::Y)? - ci::<T>() * self.dxy(k)? * T::lit(2.0);
        Some(v * T::lit(0.25))
    }

    /// Third complex derivative of a holomorphic field, `∂x³` along x
    /// averaged with `i∂y³` along y.
    pub fn dzzz_holo(&self, k: usize) -> Option<Cx<T>> {
        let x = self.d3(k, Axis::X)?;
        let y = self.d3(k, Axis::Y)?;
        Some((x + ci::<T>() * y) * T::lit(0.5))
    }

    /// Sixth-order `∂z²` of a holomorphic field: `(∂x² − ∂y²)/2`.
    pub fn dzz_holo_6(&self, k: usize) -> Option<Cx<T>> {
        Some((self.d2_6(k, Axis::X)? - self.d2_6(k, Axis::Y)?) * T::lit(0.5))
    }

    /// Sixth-order `∂z³` of a holomorphic field.
    pub fn dzzz_holo_6(&self, k: usize) -> Option<Cx<T>> {
        let x = self.d3_6(k, Axis::X)?;
        let y = self.d3_6(k, Axis::Y)?;
        Some((x + ci::<T>() * y) * T::lit(0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn stencils_on_holomorphic_cubic() {
        let g = DomainGrid::centered_square(1.0, 33).unwrap();
        let mut f = Field::empty(33, 33);
        for k in g.unmasked() {
            let z = g.node_at(k);
            f.set(k, z.powi(3) + z * cx(2.0, 1.0));
        }
        let s = Stencil::new(&g, &f);
        let k = g.index(20, 11);
        let z = g.node_at(k);
        assert!((s.dz(k).unwrap() - (z * z * 3.0 + cx(2.0, 1.0))).norm() < 1e-12);
        assert!(s.dzbar(k).unwrap().norm() < 1e-12);
        assert!((s.dzz(k).unwrap() - z * 6.0).norm() < 1e-10);
        assert!((s.dzz_holo_6(k).unwrap() - z * 6.0).norm() < 1e-10);
        assert!((s.dzzz_holo_6(k).unwrap() - cx(6.0, 0.0)).norm() < 1e-8);
        assert!(s.dz_dzbar(k).unwrap().norm() < 1e-10);
        assert!((s.dzzz_holo(k).unwrap() - cx(6.0, 0.0)).norm() < 1e-8);
        assert!(s.dz(g.index(1, 11)).is_none());
    }

    #[test]
    fn laplacian_of_modulus_squared() {
        let g: DomainGrid<f64> = DomainGrid::centered_square(1.0, 33).unwrap();
        let mut f: Field<f64> = Field::empty(33, 33);
        for k in g.unmasked() {
            f.set(k, g.node_at(k).norm_sqr().powi(2));
        }
        let s = Stencil::new(&g, &f);
        let k = g.index(7, 25);
        let r2 = g.node_at(k).norm_sqr();
        // ∂z∂z̄ |z|^4 = 4|z|^2
        assert!((s.dz_dzbar(k).unwrap() - 4.0 * r2).abs() < 1e-10);
    }
}
