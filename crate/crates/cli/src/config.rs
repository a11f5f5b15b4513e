use serde::Deserialize;

use bryant4_core::analytic::{parse_expression, DomainGrid};
use bryant4_core::export::Projection;
use bryant4_core::limits::LimitCase;
use bryant4_core::{cx, Data, Grid, Sign, Tolerances};

use crate::job::JobError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Generate,
    Verify,
    Limits,
    Deform,
    Classify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionName {
    #[default]
    Auto,
    DropX0,
    DropX3,
    PoincareBall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MeshFormat {
    #[default]
    Obj,
    Ply,
    Both,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseName {
    MinimalR3,
    MaximalL3,
    CmcH3,
    CmcS3,
}

fn default_w() -> String {
    "1".into()
}
fn default_eps() -> i32 {
    -1
}
fn default_f0_re() -> f64 {
    1.0
}
fn default_half() -> f64 {
    0.5
}
fn default_n() -> usize {
    65
}

/// Flat key/value job description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub pipeline: Option<Pipeline>,
    pub g: String,
    #[serde(default = "default_w")]
    pub w: String,
    #[serde(default = "default_eps")]
    pub eps: i32,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub c_re: f64,
    #[serde(default)]
    pub c_im: f64,
    #[serde(default = "default_f0_re")]
    pub f0_re: f64,
    #[serde(default)]
    pub f0_im: f64,
    #[serde(default)]
    pub z0_re: f64,
    #[serde(default)]
    pub z0_im: f64,

    /// Square `[-half, half]²`, unless the explicit bounds are given.
    #[serde(default = "default_half")]
    pub half: f64,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    #[serde(default = "default_n")]
    pub n: usize,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    /// Keep only nodes in the disk of this radius about `z0`.
    pub disk_radius: Option<f64>,

    #[serde(default)]
    pub projection: ProjectionName,
    #[serde(default)]
    pub mesh: MeshFormat,
    pub mesh_name: Option<String>,
    pub report_name: Option<String>,

    /// For `limits` and `deform`.
    pub case: Option<CaseName>,
    pub r: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub richardson: Option<bool>,
    pub csv_name: Option<String>,

    /// For `classify`.
    #[serde(default)]
    pub completeness_intent: bool,

    pub tol_scale: Option<f64>,
    pub tol_det: Option<f64>,
    pub tol_loop: Option<f64>,
    pub tol_path: Option<f64>,
    pub tol_geo: Option<f64>,
    pub tol_h: Option<f64>,
    pub tol_k: Option<f64>,
    pub tol_schwarz: Option<f64>,
    pub tol_null: Option<f64>,
    pub tol_oracle: Option<f64>,
    pub tol_pde: Option<f64>,
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self, JobError> {
        toml::from_str(text).map_err(|e| JobError::validation("ConfigError", e.message().to_string()))
    }

    pub fn tolerances(&self, cli_scale: Option<f64>) -> Result<Tolerances, JobError> {
        let mut t = Tolerances::default();
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut t.det, self.tol_det);
        set(&mut t.loop_closure, self.tol_loop);
        set(&mut t.path_independence, self.tol_path);
        set(&mut t.geo, self.tol_geo);
        set(&mut t.mean_curvature, self.tol_h);
        set(&mut t.gauss_curvature, self.tol_k);
        set(&mut t.schwarz, self.tol_schwarz);
        set(&mut t.null, self.tol_null);
        set(&mut t.oracle, self.tol_oracle);
        set(&mut t.pde, self.tol_pde);
        let scale = cli_scale.or(self.tol_scale).unwrap_or(1.0);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(JobError::validation("ConfigError", format!("tolerance scale {scale} must be positive")));
        }
        Ok(t.scaled(scale))
    }

    pub fn sign(&self) -> Result<Sign, JobError> {
        Sign::from_i32(self.eps)
            .ok_or_else(|| JobError::validation("ConfigError", format!("eps must be -1 or 1, got {}", self.eps)))
    }

    pub fn grid(&self, grid_n: Option<usize>) -> Result<Grid, JobError> {
        let n = grid_n.unwrap_or(self.n);
        let (nx, ny) = match grid_n {
            Some(n) => (n, n),
            None => (self.nx.unwrap_or(n), self.ny.unwrap_or(n)),
        };
        let z0 = cx(self.z0_re, self.z0_im);
        let mut grid = DomainGrid::new(
            self.x_min.unwrap_or(self.z0_re - self.half),
            self.x_max.unwrap_or(self.z0_re + self.half),
            self.y_min.unwrap_or(self.z0_im - self.half),
            self.y_max.unwrap_or(self.z0_im + self.half),
            nx,
            ny,
            z0,
        )
        .map_err(|e| JobError::validation("GridError", e.to_string()))?;
        if let Some(r) = self.disk_radius {
            grid.restrict_to_disk(z0, r);
        }
        Ok(grid)
    }

    pub fn data(&self, grid_n: Option<usize>) -> Result<Data, JobError> {
        let parse = |name: &str, s: &str| {
            parse_expression(s).map_err(|e| JobError::validation("ParseError", format!("{name}: {e}")))
        };
        Ok(Data {
            g: parse("g", &self.g)?,
            w: parse("w", &self.w)?,
            eps: self.sign()?,
            a: self.a,
            b: self.b,
            c: cx(self.c_re, self.c_im),
            f0: cx(self.f0_re, self.f0_im),
            grid: self.grid(grid_n)?,
        })
    }

    pub fn limit_case(&self) -> Result<LimitCase<f64>, JobError> {
        let need_r = || {
            self.r
                .filter(|r| *r > 0.0)
                .ok_or_else(|| JobError::validation("ConfigError", "CMC cases need r > 0".to_string()))
        };
        match self.case {
            Some(CaseName::MinimalR3) => Ok(LimitCase::MinimalR3),
            Some(CaseName::MaximalL3) => Ok(LimitCase::MaximalL3),
            Some(CaseName::CmcH3) => Ok(LimitCase::CmcH3 { r: need_r()? }),
            Some(CaseName::CmcS3) => Ok(LimitCase::CmcS3 { r: need_r()? }),
            None => Err(JobError::validation("ConfigError", "the limits pipeline needs `case`".to_string())),
        }
    }

    /// Resolves `auto` from the data: `drop_x0` for `ε = −1`, `drop_x3` for
    /// `ε = +1`.
    pub fn projection(&self, eps: Sign) -> Result<Projection, JobError> {
        Ok(match (self.projection, eps) {
            (ProjectionName::Auto, Sign::Minus) | (ProjectionName::DropX0, _) => Projection::DropX0,
            (ProjectionName::Auto, Sign::Plus) | (ProjectionName::DropX3, _) => Projection::DropX3,
            (ProjectionName::PoincareBall, _) => Projection::PoincareBall {
                r: self.r.unwrap_or(self.a),
            },
        })
    }
}
