//! Aggregated verification of a constructed surface.

use std::fmt::Write as _;

use super::geometry::*;
use crate::analytic::{Field, Residual};
use crate::frame::{FrameField, FrameOptions};
use crate::lorentz::{HermPoint, Mat2};
use crate::scalar::{Cx, Real};
use crate::tolerances::Tolerances;
use crate::weierstrass::Prepared;

/// Per-node second-order data of the surface.
#[derive(Debug, Clone, Copy)]
pub struct SecondFundamentalSample<T> {
    pub lambda: T,
    /// `E = ⟨ψ_zz̄, η⟩`, from `H = (2E/λ) N`.
    pub e: T,
    pub p: Cx<T>,
    pub p_tilde: Cx<T>,
    pub h: HermPoint<T>,
    pub k: T,
    pub g: ProjPoint<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub key: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SurfaceFlags {
    pub marginally_trapped: bool,
    pub flat_normal_bundle_proxy: bool,
    pub bryant_type: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SurfaceReport {
    pub entries: Vec<ReportEntry>,
    /// Set once a surface has been verified.
    pub flags: Option<SurfaceFlags>,
    pub tolerances: Vec<(String, f64)>,
    /// Non-residual facts (`key = value`), in insertion order.
    pub info: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl SurfaceReport {
    pub fn new(tol: &Tolerances) -> Self {
        Self {
            tolerances: tol.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, key: &str, value: f64, tol: f64) {
        let pass = value.is_finite() && value >= 0.0 && value <= tol;
        self.entries.push(ReportEntry {
            key: key.to_string(),
            value,
            tol,
            pass,
        });
    }

    pub fn push_residual<T: Real>(&mut self, key: &str, r: &Residual<T>, tol: f64) {
        self.push(key, r.max.to_f64_lossy(), tol);
    }

    pub fn info(&mut self, key: &str, value: impl ToString) {
        self.info.push((key.to_string(), value.to_string()));
    }

    pub fn info_f64(&mut self, key: &str, value: f64) {
        self.info(key, format!("{value:e}"));
    }

    pub fn entry(&self, key: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn passed(&self, key: &str) -> bool {
        self.entry(key).is_some_and(|e| e.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// Line-oriented `key = value` document.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "status = {}", if self.all_pass() { "pass" } else { "fail" });
        for (k, v) in &self.info {
            let _ = writeln!(s, "{k} = {v}");
        }
        if let Some(f) = self.flags {
            let _ = writeln!(s, "flag.marginally_trapped = {}", f.marginally_trapped);
            let _ = writeln!(s, "flag.flat_normal_bundle_proxy = {}", f.flat_normal_bundle_proxy);
            let _ = writeln!(s, "flag.bryant_type = {}", f.bryant_type);
        }
        for e in &self.entries {
            let _ = writeln!(s, "residual.{} = {:e}", e.key, e.value);
            let _ = writeln!(s, "tolerance.{} = {:e}", e.key, e.tol);
            let _ = writeln!(s, "pass.{} = {}", e.key, e.pass);
        }
        for (k, v) in &self.tolerances {
            let _ = writeln!(s, "{k} = {v:e}");
        }
        for (i, w) in self.warnings.iter().enumerate() {
            let _ = writeln!(s, "warning.{i} = {w}");
        }
        s
    }
}

/// Everything the verifiers compute on the grid.
#[derive(Debug, Clone)]
pub struct SurfaceFields<T> {
    pub samples: Field<SecondFundamentalSample<T>>,
    pub normal: Field<HermPoint<T>>,
}

/// Nodes where `|K|` is treated as zero for sign and flatness tests.
pub const K_FLOOR: f64 = 1e-6;

pub fn verify_surface<T: Real>(
    prepared: &Prepared<T>,
    frame: &FrameField<T>,
    opts: &FrameOptions<T>,
    tol: &Tolerances,
) -> Result<(SurfaceReport, SurfaceFields<T>), VerifyError> {
    let data = &prepared.data;
    let mut rep = SurfaceReport::new(tol);
    rep.warnings = prepared.warnings.clone();
    rep.info("grid.nx", data.grid.nx());
    rep.info("grid.ny", data.grid.ny());
    rep.info("grid.masked", data.grid.masked_count());
    rep.info("eps", data.eps.as_i32());
    rep.info("parallel_h", prepared.parallel_h);

    rep.push_residual("frame.det", &frame.det_residual, tol.det);
    rep.push_residual("frame.loop_closure", &frame.loop_residual, tol.loop_closure);
    rep.push_residual("frame.mixed_partials", &mixed_partials_check(data, frame, tol)?, tol.pde);

    let derivs = psi_derivatives(data, &frame.psi());
    let metric = induced_metric_check(data, frame, &derivs, tol)?;
    rep.push_residual("metric.lambda", &metric.lambda, tol.geo);
    rep.push_residual("metric.conformality", &metric.conformality, tol.geo);
    rep.push_residual("metric.lambda_forms", &metric.lambda_forms, tol.geo);
    rep.info_f64("metric.min_lambda", metric.min_lambda.to_f64_lossy());

    let mean = mean_curvature_check(data, frame, &derivs, tol)?;
    rep.push_residual("mean.marginally_trapped", &mean.marginally_trapped, tol.mean_curvature);
    rep.push_residual("mean.ratio", &mean.ratio, tol.geo);
    rep.push_residual("mean.direction", &mean.direction, tol.geo);
    rep.info_f64("mean.max_h", mean.max_h.to_f64_lossy());
    rep.info_f64("mean.max_hh", mean.max_hh.to_f64_lossy());

    let gauss = gauss_curvature_check(data, frame, &derivs, tol)?;
    rep.push_residual("gauss.intrinsic", &gauss.intrinsic_vs_formula, tol.gauss_curvature);
    rep.push_residual("gauss.hopf_form", &gauss.formula_vs_hopf, tol.gauss_curvature);
    rep.push("gauss.sign_violations", gauss.sign_violations as f64, 0.0);

    let gm = hyperbolic_gauss_check(data, frame, &derivs, tol)?;
    rep.push_residual("gauss_map.null", &gm.null, tol.null);
    rep.push_residual("gauss_map.conformality", &gm.conformality, tol.geo);
    rep.push_residual("gauss_map.normality", &gm.normality, tol.geo);
    rep.info("gauss_map.infinity_nodes", gm.infinity_count);

    let hopf = hopf_check(data, frame, &derivs, &gm.normal, tol)?;
    rep.push_residual("hopf.q", &hopf.q, tol.geo);
    rep.push_residual("hopf.holomorphy", &hopf.holomorphy, tol.geo);
    rep.push_residual("hopf.p_sum", &hopf.sum_coefficient, tol.geo);
    rep.info_f64("hopf.max_condition", hopf.max_condition.to_f64_lossy());
    rep.push_residual(
        "gauss.equation",
        &gauss_equation_check(&gauss.k_num, &hopf, &derivs),
        tol.gauss_curvature,
    );

    let nb = normal_bundle_check(data, &gm.normal, &hopf.second_normal);
    rep.push_residual("normal.connection", &nb.connection, tol.geo);

    let identity = opts.f_init == Mat2::identity();
    let sch = schwarzian_check(data, frame, &gm.g_map, identity, tol)?;
    rep.push_residual("schwarzian", &sch.residual, tol.schwarz);
    rep.info("schwarzian.symbolic", sch.symbolic);

    let small = small_formula_check(data, frame, &gm.g_map, tol)?;
    rep.push_residual("small.c_squared", &small.c_squared, tol.geo);
    rep.push_residual("small.columns", &small.columns, tol.geo);

    let floor = T::lit(K_FLOOR);
    let curved = gauss.k_formula.iter().any(|(_, k)| k.abs() > floor);
    let flat_pseudo = if curved {
        let r = pseudo_metric_flatness(data, &gauss.k_formula, &derivs, floor);
        rep.push_residual("gauss.pseudo_metric_flatness", &r, tol.geo);
        rep.passed("gauss.pseudo_metric_flatness")
    } else {
        true
    };

    let marginally_trapped = rep.passed("mean.marginally_trapped");
    let flat_normal_bundle_proxy = rep.passed("normal.connection");
    rep.flags = Some(SurfaceFlags {
        marginally_trapped,
        flat_normal_bundle_proxy,
        bryant_type: marginally_trapped && flat_normal_bundle_proxy && rep.passed("gauss.sign_violations") && flat_pseudo,
    });

    let grid = &data.grid;
    let mut samples = Field::empty(grid.nx(), grid.ny());
    let half = T::lit(0.5);
    for (k, d) in derivs.iter() {
        let (Some(h), Some(ratio), Some(g)) = (mean.h.get(k), mean.ratio_field.get(k), gm.g_map.get(k)) else {
            continue;
        };
        let (pp, q) = match (hopf.p_sum.get(k), hopf.q_num.get(k)) {
            (Some(pp), Some(q)) => (*pp, *q),
            _ => continue,
        };
        let k_val = gauss
            .k_num
            .get(k)
            .or_else(|| gauss.k_formula.get(k))
            .copied()
            .unwrap_or_else(T::zero);
        samples.set(
            k,
            SecondFundamentalSample {
                lambda: d.lambda,
                e: *ratio * d.lambda * half,
                p: (pp - q) * half,
                p_tilde: (pp + q) * half,
                h: *h,
                k: k_val,
                g: *g,
            },
        );
    }
    Ok((
        rep,
        SurfaceFields {
            samples,
            normal: gm.normal,
        },
    ))
}
