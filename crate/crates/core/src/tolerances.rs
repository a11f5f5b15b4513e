//! Numerical tolerances shared across the pipeline.

/// Every tolerance used by validation and verification. The defaults are
/// calibrated for double precision at grid spacing `h ≈ 1/64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub det: f64,
    pub inner: f64,
    pub loop_closure: f64,
    pub path_independence: f64,
    pub geo: f64,
    pub mean_curvature: f64,
    pub gauss_curvature: f64,
    pub ode: f64,
    pub wronskian: f64,
    pub pde: f64,
    pub schwarz: f64,
    pub null: f64,
    pub oracle: f64,
    pub pole_eps: f64,
    pub f_eps: f64,
    pub f_const: f64,
    pub q_eps: f64,
    pub coprime: f64,
    pub coeff: f64,
    pub reality: f64,
    pub g_const: f64,
    /// Mask radius around zeros of `f`, in units of the grid spacing.
    pub mask_radius_h: f64,
    pub frame_condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            det: 1e-9,
            inner: 1e-10,
            loop_closure: 1e-9,
            path_independence: 1e-7,
            geo: 1e-5,
            mean_curvature: 1e-5,
            gauss_curvature: 1e-5,
            ode: 1e-6,
            wronskian: 1e-8,
            pde: 1e-5,
            schwarz: 1e-5,
            null: 1e-8,
            oracle: 1e-6,
            pole_eps: 1e-12,
            f_eps: 1e-8,
            f_const: 1e-10,
            q_eps: 1e-12,
            coprime: 1e-10,
            coeff: 1e-10,
            reality: 1e-9,
            g_const: 1e-12,
            mask_radius_h: 3.0,
            frame_condition: 1e8,
        }
    }
}

impl Tolerances {
    /// Multiplies every acceptance tolerance by `s`; structural thresholds
    /// (pole and zero detection, mask radius, conditioning) are unchanged.
    pub fn scaled(self, s: f64) -> Self {
        Self {
            det: self.det * s,
            inner: self.inner * s,
            loop_closure: self.loop_closure * s,
            path_independence: self.path_independence * s,
            geo: self.geo * s,
            mean_curvature: self.mean_curvature * s,
            gauss_curvature: self.gauss_curvature * s,
            ode: self.ode * s,
            wronskian: self.wronskian * s,
            pde: self.pde * s,
            schwarz: self.schwarz * s,
            null: self.null * s,
            oracle: self.oracle * s,
            coeff: self.coeff * s,
            reality: self.reality * s,
            ..self
        }
    }

    /// Key/value listing used in reports.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("tol.det", self.det),
            ("tol.loop", self.loop_closure),
            ("tol.path", self.path_independence),
            ("tol.geo", self.geo),
            ("tol.h", self.mean_curvature),
            ("tol.k", self.gauss_curvature),
            ("tol.ode", self.ode),
            ("tol.wronskian", self.wronskian),
            ("tol.pde", self.pde),
            ("tol.schwarz", self.schwarz),
            ("tol.null", self.null),
            ("tol.oracle", self.oracle),
            ("tol.mask_radius_h", self.mask_radius_h),
        ]
    }
}
