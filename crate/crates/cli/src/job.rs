use std::fmt::{Debug, Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use bryant4_core::classify::{
    completeness_screen, ftc_classify, parallel_h_classify, FtcVerdict, RationalData, ScreenVerdict,
};
use bryant4_core::export::{build_mesh, MeshOutput, Projection};
use bryant4_core::frame::integrate_frame;
use bryant4_core::limits::{
    bryant_null_curve, cmc_base_point, deformation_family, oracle_equivalence, LimitCase, LimitMethod, DEFAULT_RADII,
};
use bryant4_core::verify::report::{verify_surface, SurfaceReport};
use bryant4_core::weierstrass::{build_f, prepare};
use bryant4_core::{Options, Sign, Tolerances};

use crate::config::{JobConfig, MeshFormat, Pipeline, ProjectionName};

/// Failure with a stable kind string and exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct JobError {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

/// Error kinds that come from the numerics rather than the input.
const NUMERIC_KINDS: [&str; 6] = [
    "DetDrift",
    "LoopClosureFailure",
    "SingularF",
    "ZeroOfF",
    "FrameDegeneracy",
    "ResidualOutOfTolerance",
];

impl JobError {
    pub fn validation(kind: &str, message: String) -> Self {
        Self {
            kind: kind.to_string(),
            message,
            exit_code: 1,
        }
    }

    pub fn numeric(kind: &str, message: String) -> Self {
        Self {
            kind: kind.to_string(),
            message,
            exit_code: 2,
        }
    }

    /// Innermost variant name of a (possibly wrapped) error enum.
    pub fn from_error<E: Debug + Display>(e: &E) -> Self {
        let dbg = format!("{e:?}");
        let mut rest = dbg.as_str();
        let kind = loop {
            let end = rest.find(|c: char| !c.is_alphanumeric() && c != '_').unwrap_or(rest.len());
            let name = &rest[..end];
            let tail = &rest[end..];
            match tail.strip_prefix('(') {
                Some(inner) if inner.starts_with(|c: char| c.is_ascii_uppercase()) => rest = inner,
                _ => break name.to_string(),
            }
        };
        let message = e.to_string();
        if NUMERIC_KINDS.contains(&kind.as_str()) {
            Self::numeric(&kind, message)
        } else {
            Self::validation(&kind, message)
        }
    }

    pub fn block(&self) -> String {
        format!(
            "status = error\nerror.kind = {}\nerror.exit_code = {}\nerror.message = {}\n",
            self.kind,
            self.exit_code,
            self.message.replace('\n', " ")
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

pub struct Job<'a> {
    pub config: &'a JobConfig,
    pub pipeline: Pipeline,
    pub out: &'a Path,
    pub grid_n: Option<usize>,
    pub tol_scale: Option<f64>,
}

fn write(out: &Path, name: &str, text: &str, files: &mut Vec<PathBuf>) -> Result<(), JobError> {
    fs::create_dir_all(out).map_err(|e| JobError::validation("IoError", e.to_string()))?;
    let p = out.join(name);
    fs::write(&p, text).map_err(|e| JobError::validation("IoError", format!("{}: {e}", p.display())))?;
    files.push(p);
    Ok(())
}

impl Job<'_> {
    pub fn run(&self) -> Outcome {
        let mut files = Vec::new();
        let result = self.check_pipeline().and_then(|_| self.dispatch(&mut files));
        let report_name = self.config.report_name.as_deref().unwrap_or("report.txt");
        let (text, exit_code) = match result {
            Ok(rep) => {
                let mut text = rep.to_text();
                let failures: Vec<_> = rep.failures().map(|e| e.key.clone()).collect();
                if failures.is_empty() {
                    (text, 0)
                } else {
                    let err = JobError::numeric(
                        "ResidualOutOfTolerance",
                        format!("{} residual(s) exceed tolerance: {}", failures.len(), failures.join(", ")),
                    );
                    let _ = write!(text, "error.kind = {}\nerror.exit_code = 2\nerror.message = {}\n", err.kind, err.message);
                    (text, 2)
                }
            }
            Err(e) => (e.block(), e.exit_code),
        };
        if let Err(e) = write(self.out, report_name, &text, &mut files) {
            return Outcome {
                text: e.block(),
                exit_code: e.exit_code,
                files,
            };
        }
        Outcome { text, exit_code, files }
    }

    fn check_pipeline(&self) -> Result<(), JobError> {
        match self.config.pipeline {
            Some(p) if p != self.pipeline => Err(JobError::validation(
                "ConfigError",
                format!("config declares pipeline {p:?} but {:?} was requested", self.pipeline),
            )),
            _ => Ok(()),
        }
    }

    fn dispatch(&self, files: &mut Vec<PathBuf>) -> Result<SurfaceReport, JobError> {
        let tol = self.config.tolerances(self.tol_scale)?;
        match self.pipeline {
            Pipeline::Generate => self.surface(&tol, true, files),
            Pipeline::Verify => self.surface(&tol, false, files),
            Pipeline::Limits => self.limits(&tol, files),
            Pipeline::Deform => self.deform(&tol, files),
            Pipeline::Classify => self.classify(&tol),
        }
    }

    fn header(&self, rep: &mut SurfaceReport) {
        let c = self.config;
        let mut info = vec![
            ("pipeline".to_string(), format!("{:?}", self.pipeline).to_lowercase()),
            ("data.g".to_string(), c.g.clone()),
            ("data.w".to_string(), c.w.clone()),
            ("data.eps".to_string(), c.eps.to_string()),
            ("data.a".to_string(), format!("{:e}", c.a)),
            ("data.b".to_string(), format!("{:e}", c.b)),
            ("data.c".to_string(), format!("{:e}{:+e}i", c.c_re, c.c_im)),
            ("data.f0".to_string(), format!("{:e}{:+e}i", c.f0_re, c.f0_im)),
            ("data.z0".to_string(), format!("{:e}{:+e}i", c.z0_re, c.z0_im)),
        ];
        info.append(&mut rep.info);
        rep.info = info;
    }

    fn write_mesh(&self, mesh: &MeshOutput, files: &mut Vec<PathBuf>) -> Result<(), JobError> {
        let stem = self.config.mesh_name.as_deref().unwrap_or("surface");
        if matches!(self.config.mesh, MeshFormat::Obj | MeshFormat::Both) {
            write(self.out, &format!("{stem}.obj"), &mesh.to_obj(), files)?;
        }
        if matches!(self.config.mesh, MeshFormat::Ply | MeshFormat::Both) {
            write(self.out, &format!("{stem}.ply"), &mesh.to_ply(), files)?;
        }
        Ok(())
    }

    fn surface(&self, tol: &Tolerances, mesh: bool, files: &mut Vec<PathBuf>) -> Result<SurfaceReport, JobError> {
        let data = self.config.data(self.grid_n)?;
        let projection = self.config.projection(data.eps)?;
        let mut opts = Options::default();
        if let Projection::PoincareBall { r } = projection {
            if !(r > 0.0) {
                return Err(JobError::validation(
                    "ProjectionInvalid",
                    "poincare_ball needs r > 0 (or a > 0)".to_string(),
                ));
            }
            let g0 = data.g.eval(data.z0()).map_err(|e| JobError::from_error(&e))?;
            opts.psi0 = cmc_base_point(g0, data.eps, r);
        }
        let prepared = prepare(data, tol).map_err(|e| JobError::from_error(&e))?;
        let frame = integrate_frame(&prepared, &opts, tol).map_err(|e| JobError::from_error(&e))?;
        let (mut rep, fields) = verify_surface(&prepared, &frame, &opts, tol).map_err(|e| JobError::from_error(&e))?;
        self.header(&mut rep);
        if mesh && self.config.mesh != MeshFormat::None {
            let m = build_mesh(&frame.psi(), Some(&fields.samples), projection, tol.geo)
                .map_err(|e| JobError::from_error(&e))?;
            rep.info("mesh.projection", projection.name());
            rep.info("mesh.vertices", m.vertices.len());
            rep.info("mesh.faces", m.faces.len());
            self.write_mesh(&m, files)?;
        }
        Ok(rep)
    }

    fn limits(&self, tol: &Tolerances, files: &mut Vec<PathBuf>) -> Result<SurfaceReport, JobError> {
        let case = self.config.limit_case()?;
        let data = self.config.data(self.grid_n)?;
        let mut rep = SurfaceReport::new(tol);
        self.header(&mut rep);
        rep.info("limits.case", format!("{case:?}"));
        let err = |e: bryant4_core::limits::LimitError| JobError::from_error(&e);
        match case.r() {
            None => {
                let d = oracle_equivalence(case, &data.g, &data.w, &data.grid, tol).map_err(err)?;
                rep.push("limits.closed_form", d, tol.oracle);
            }
            Some(r) => {
                let nc = bryant_null_curve(&data.g, &data.w, case.eps(), r, &data.grid, tol).map_err(err)?;
                rep.push_residual("limits.hyperquadric", &nc.hyperquadric, tol.geo);
                rep.push_residual("limits.null_curve", &nc.nullity, tol.null);
                rep.push_residual("limits.det_b", &nc.det_b, tol.det);
                rep.push_residual("limits.pipeline", &nc.pipeline, tol.oracle);
                rep.push_residual("limits.omega", &nc.omega, tol.oracle);
                if self.config.mesh != MeshFormat::None {
                    let projection = match (self.config.projection, case) {
                        (ProjectionName::Auto, LimitCase::CmcH3 { r }) => Projection::PoincareBall { r },
                        (ProjectionName::PoincareBall, _) => Projection::PoincareBall { r },
                        _ => self.config.projection(case.eps())?,
                    };
                    let m = build_mesh(&nc.psi, None, projection, tol.geo).map_err(|e| JobError::from_error(&e))?;
                    rep.info("mesh.projection", projection.name());
                    self.write_mesh(&m, files)?;
                }
            }
        }
        Ok(rep)
    }

    fn deform(&self, tol: &Tolerances, files: &mut Vec<PathBuf>) -> Result<SurfaceReport, JobError> {
        let data = self.config.data(self.grid_n)?;
        let radii = self.config.radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec());
        let method = if self.config.richardson.unwrap_or(false) {
            LimitMethod::Richardson
        } else {
            LimitMethod::Variational
        };
        let fam = deformation_family(&data.g, &data.w, data.eps, &radii, &data.grid, method, tol)
            .map_err(|e| JobError::from_error(&e))?;
        let mut rep = SurfaceReport::new(tol);
        self.header(&mut rep);
        rep.info("deform.method", format!("{method:?}").to_lowercase());
        rep.info_f64("deform.slope", fam.slope);
        rep.info_f64("deform.metric_variation", fam.metric_variation);
        rep.push("deform.slope_deviation", (fam.slope - 1.0).abs(), 0.1);
        rep.push("deform.limit_mean_curvature", fam.limit_mean_curvature, tol.mean_curvature);
        rep.push("deform.procrustes", fam.procrustes, tol.geo);
        let csv = self.config.csv_name.as_deref().unwrap_or("deformation.csv");
        write(self.out, csv, &fam.to_csv(), files)?;
        Ok(rep)
    }

    fn classify(&self, tol: &Tolerances) -> Result<SurfaceReport, JobError> {
        let data = self.config.data(self.grid_n)?;
        let mut rep = SurfaceReport::new(tol);
        self.header(&mut rep);
        match (data.g.as_rational(), data.w.as_polynomial()) {
            (Some((p1, p2)), Some(w)) => {
                let rd = RationalData {
                    p1,
                    p2,
                    w,
                    eps: data.eps,
                    a: data.a,
                    b: data.b,
                    c: data.c,
                };
                let v = ftc_classify(&rd, tol).map_err(|e| JobError::from_error(&e))?;
                match &v {
                    FtcVerdict::AdmissibleFtc {
                        amplitude,
                        normalization,
                    } => {
                        rep.info("ftc.verdict", "AdmissibleFTC");
                        rep.info("ftc.amplitude", format!("{:e}{:+e}i", amplitude.re, amplitude.im));
                        if let Some(m) = normalization {
                            rep.info(
                                "ftc.normalization",
                                format!(
                                    "tau = {:e}{:+e}i, gamma = {:e}{:+e}i",
                                    m.tau.re, m.tau.im, m.gamma.re, m.gamma.im
                                ),
                            );
                        }
                    }
                    FtcVerdict::Reject(r) => {
                        rep.info("ftc.verdict", "Reject");
                        rep.info("ftc.reason", r.code());
                        rep.info("ftc.detail", r);
                    }
                }
            }
            _ => rep.info("ftc.verdict", "NotRational"),
        }
        match completeness_screen(&data, self.config.completeness_intent, tol) {
            ScreenVerdict::Degenerate { variation } => {
                rep.info("screen.verdict", "Degenerate");
                rep.info_f64("screen.g_variation", variation);
            }
            ScreenVerdict::Constructible { warning } => {
                rep.info("screen.verdict", "Constructible");
                if let Some(w) = warning {
                    rep.warnings.push(w);
                }
            }
            ScreenVerdict::NotTriggered => rep.info("screen.verdict", "NotTriggered"),
        }
        let mut d = data.clone();
        match build_f(&mut d, tol) {
            Ok(f) => rep.info("parallel_h.verdict", parallel_h_classify(&f.values, &d, tol).code()),
            Err(e) => rep.info("parallel_h.verdict", format!("unavailable ({e})")),
        }
        rep.info(
            "ambient",
            match data.eps {
                Sign::Minus => "euclidean",
                Sign::Plus => "lorentzian",
            },
        );
        Ok(rep)
    }
}
