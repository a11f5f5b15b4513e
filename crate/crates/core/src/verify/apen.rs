//! Decomposition of four holomorphic functions as
//! `f2 = a f1 + c f3`, `f4 = c̄ f1 + b f3` with `a, b` real.

use thiserror::Error;

use crate::scalar::{cx, Cx, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApenError {
    #[error("need at least 8 samples, got {0}")]
    TooFewSamples(usize),
    #[error("f1 and f3 are dependent on the sample (condition {condition:e})")]
    DependentInputs { condition: f64 },
    #[error("f1 conj(f2) + f3 conj(f4) has imaginary part {imag:e} at sample {index}")]
    RealityViolated { imag: f64, index: usize },
}

/// What to do when the reality condition fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RealityPolicy {
    #[default]
    Enforce,
    /// Fit anyway and report the violation.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApenSample<T> {
    pub f1: Cx<T>,
    pub f2: Cx<T>,
    pub f3: Cx<T>,
    pub f4: Cx<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApenFit<T> {
    pub a: T,
    pub b: T,
    pub c: Cx<T>,
    /// Max-norm of the fit residual over the samples.
    pub residual: T,
    /// Largest relative imaginary part of `f1 conj(f2) + f3 conj(f4)`.
    pub reality: T,
    pub condition: T,
}

impl<T: Real> ApenFit<T> {
    pub fn decomposable(&self, tol: T) -> bool {
        self.residual <= tol
    }
}

pub const MAX_CONDITION: f64 = 1e8;
pub const REALITY_TOL: f64 = 1e-9;

/// Least squares via Householder reflections; returns the solution and
/// `max|R_ii| / min|R_ii|`.
fn least_squares<T: Real, const N: usize>(mut rows: Vec<[T; N]>, mut rhs: Vec<T>) -> ([T; N], T) {
    let m = rows.len();
    for j in 0..N {
        let norm = (j..m).map(|i| rows[i][j] * rows[i][j]).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if rows[j][j] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (j..m).map(|i| rows[i][j]).collect();
        v[0] -= alpha;
        let vv: T = v.iter().map(|x| *x * *x).sum();
        if vv == T::zero() {
            continue;
        }
        for col in j..N {
            let dot: T = (j..m).map(|i| v[i - j] * rows[i][col]).sum();
            let s = T::lit(2.0) * dot / vv;
            for i in j..m {
                rows[i][col] -= s * v[i - j];
            }
        }
        let dot: T = (j..m).map(|i| v[i - j] * rhs[i]).sum();
        let s = T::lit(2.0) * dot / vv;
        for i in j..m {
            rhs[i] -= s * v[i - j];
        }
    }
    let diag: Vec<T> = (0..N).map(|j| rows[j][j].abs()).collect();
    let dmax = diag.iter().fold(T::zero(), |a, b| a.max(*b));
    let dmin = diag.iter().fold(T::infinity(), |a, b| a.min(*b));
    let mut x = [T::zero(); N];
    if dmin > T::zero() {
        for j in (0..N).rev() {
            let s: T = (j + 1..N).map(|k| rows[j][k] * x[k]).sum();
            x[j] = (rhs[j] - s) / rows[j][j];
        }
    }
    (x, dmax / dmin)
}

pub fn apen_decompose<T: Real>(samples: &[ApenSample<T>], policy: RealityPolicy) -> Result<ApenFit<T>, ApenError> {
    if samples.len() < 8 {
        return Err(ApenError::TooFewSamples(samples.len()));
    }
    let mut reality = T::zero();
    for (index, s) in samples.iter().enumerate() {
        let r = s.f1 * s.f2.conj() + s.f3 * s.f4.conj();
        let scale = T::one() + s.f1.norm() * s.f2.norm() + s.f3.norm() * s.f4.norm();
        let rel = r.im.abs() / scale;
        reality = reality.max(rel);
        if policy == RealityPolicy::Enforce && rel > T::lit(REALITY_TOL) {
            return Err(ApenError::RealityViolated {
                imag: r.im.to_f64_lossy(),
                index,
            });
        }
    }
    // unknowns (a, b, Re c, Im c)
    let zero = T::zero();
    let mut rows = Vec::with_capacity(4 * samples.len());
    let mut rhs = Vec::with_capacity(4 * samples.len());
    for s in samples {
        let (f1, f3) = (s.f1, s.f3);
        rows.push([f1.re, zero, f3.re, -f3.im]);
        rhs.push(s.f2.re);
        rows.push([f1.im, zero, f3.im, f3.re]);
        rhs.push(s.f2.im);
        rows.push([zero, f3.re, f1.re, f1.im]);
        rhs.push(s.f4.re);
        rows.push([zero, f3.im, f1.im, -f1.re]);
        rhs.push(s.f4.im);
    }
    let (x, condition) = least_squares(rows, rhs);
    if !(condition < T::lit(MAX_CONDITION)) {
        return Err(ApenError::DependentInputs {
            condition: condition.to_f64_lossy(),
        });
    }
    let (a, b, c) = (x[0], x[1], cx(x[2], x[3]));
    let residual = samples.iter().fold(zero, |m, s| {
        let r2 = (s.f2 - s.f1 * a - c * s.f3).norm();
        let r4 = (s.f4 - c.conj() * s.f1 - s.f3 * b).norm();
        m.max(r2).max(r4)
    });
    Ok(ApenFit {
        a,
        b,
        c,
        residual,
        reality,
        condition,
    })
}

/// Samples four expressions along a ring of `n` points.
pub fn sample_ring<T: Real>(
    fs: [&dyn Fn(Cx<T>) -> Cx<T>; 4],
    center: Cx<T>,
    radius: T,
    n: usize,
) -> Vec<ApenSample<T>> {
    (0..n)
        .map(|k| {
            let t = T::lit(std::f64::consts::TAU) * T::of_usize(k) / T::of_usize(n);
            // slightly varying radius so the samples are not co-circular
            let r = radius * (T::one() + T::lit(0.1) * T::of_usize(k % 3));
            let z = center + Cx::from_polar(r, t);
            ApenSample {
                f1: fs[0](z),
                f2: fs[1](z),
                f3: fs[2](z),
                f4: fs[3](z),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(f2: impl Fn(Cx<f64>) -> Cx<f64>, f4: impl Fn(Cx<f64>) -> Cx<f64>) -> Vec<ApenSample<f64>> {
        let one = |_z: Cx<f64>| cx(1.0, 0.0);
        let id = |z: Cx<f64>| z;
        sample_ring([&one, &f2, &id, &f4], cx(0.0, 0.0), 0.5, 12)
    }

    #[test]
    fn recovers_constructed_coefficients() {
        let s = ring(|z| cx(2.0, 0.0) + cx(1.0, 1.0) * z, |z| cx(1.0, -1.0) + z * 3.0);
        let fit = apen_decompose(&s, RealityPolicy::Enforce).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-12);
        assert!((fit.b - 3.0).abs() < 1e-12);
        assert!((fit.c - cx(1.0, 1.0)).norm() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn identity_pair() {
        let s = ring(|_| cx(1.0, 0.0), |z| z);
        let fit = apen_decompose(&s, RealityPolicy::Enforce).unwrap();
        assert!((fit.a - 1.0).abs() < 1e-12 && (fit.b - 1.0).abs() < 1e-12 && fit.c.norm() < 1e-12);
    }

    #[test]
    fn perturbed_is_flagged() {
        let s = ring(|z| cx(2.0, 0.0) + cx(1.0, 1.0) * z + z * z, |z| cx(1.0, -1.0) + z * 3.0);
        assert!(matches!(
            apen_decompose(&s, RealityPolicy::Enforce),
            Err(ApenError::RealityViolated { .. })
        ));
        let fit = apen_decompose(&s, RealityPolicy::Report).unwrap();
        assert!(fit.residual > 1e-3);
        assert!(!fit.decomposable(1e-6));
    }

    #[test]
    fn dependent_inputs() {
        let one = |_z: Cx<f64>| cx(1.0, 0.0);
        let two = |_z: Cx<f64>| cx(2.0, 0.0);
        let s = sample_ring([&one, &one, &two, &two], cx(0.0, 0.0), 0.5, 10);
        assert!(matches!(
            apen_decompose(&s, RealityPolicy::Report),
            Err(ApenError::DependentInputs { .. })
        ));
    }
}
