//! Projection of the immersion to 3-space and deterministic mesh writers.

use std::fmt::Write as _;

use thiserror::Error;

use crate::analytic::Field;
use crate::lorentz::{from_herm, HermPoint, SpacetimeVec};
use crate::scalar::Real;
use crate::verify::geometry::ProjPoint;
use crate::verify::report::SecondFundamentalSample;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExportError {
    #[error("projection {projection} is invalid: {reason}")]
    ProjectionInvalid { projection: &'static str, reason: String },
    #[error("no unmasked nodes to export")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// `(x1, x2, x3)`; exact for surfaces in `x0 = 0`.
    DropX0,
    /// `(x1, x2, x0)`; exact for surfaces in `x3 = 0`.
    DropX3,
    /// Hyperboloid `−det ψ = −R²`, `R = 1/r`, sent to the unit ball by
    /// `y = x/(R + |x0|)`.
    PoincareBall { r: f64 },
}

impl Projection {
    pub fn name(&self) -> &'static str {
        match self {
            Projection::DropX0 => "drop_x0",
            Projection::DropX3 => "drop_x3",
            Projection::PoincareBall { .. } => "poincare_ball",
        }
    }

    pub fn header(&self) -> String {
        match self {
            Projection::DropX0 => "projection = drop_x0 (x1, x2, x3)".to_string(),
            Projection::DropX3 => "projection = drop_x3 (x1, x2, x0)".to_string(),
            Projection::PoincareBall { r } => {
                format!("projection = poincare_ball R = {:e}, y = (x1, x2, x3)/(R + |x0|)", 1.0 / r)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshOutput {
    pub header: Vec<String>,
    pub vertices: Vec<[f64; 3]>,
    /// Grid node of each vertex.
    pub nodes: Vec<usize>,
    /// Quads, or triangles where one corner of a cell is masked.
    pub faces: Vec<Vec<usize>>,
    pub channels: Vec<(String, Vec<f64>)>,
}

fn project(v: SpacetimeVec<f64>, p: &Projection, rel_tol: f64) -> Result<[f64; 3], String> {
    match *p {
        Projection::DropX0 => Ok([v.x1, v.x2, v.x3]),
        Projection::DropX3 => Ok([v.x1, v.x2, v.x0]),
        Projection::PoincareBall { r } => {
            let big_r = 1.0 / r;
            let dev = (v.minkowski_norm2() + big_r * big_r).abs() / (big_r * big_r);
            if dev > rel_tol {
                return Err(format!("point off the hyperboloid of radius {big_r:e} by {dev:e} (relative)"));
            }
            let s = big_r + v.x0.abs();
            Ok([v.x1 / s, v.x2 / s, v.x3 / s])
        }
    }
}

/// Builds the mesh from `ψ`; masked nodes are omitted and the remaining
/// vertices renumbered in grid order. `rel_tol` bounds the hyperboloid
/// deviation accepted by the ball projection.
pub fn build_mesh<T: Real>(
    psi: &Field<HermPoint<T>>,
    samples: Option<&Field<SecondFundamentalSample<T>>>,
    projection: Projection,
    rel_tol: f64,
) -> Result<MeshOutput, ExportError> {
    if let Projection::PoincareBall { r } = projection {
        if !(r > 0.0) {
            return Err(ExportError::ProjectionInvalid {
                projection: projection.name(),
                reason: format!("radius parameter r = {r} must be positive"),
            });
        }
    }
    let (nx, ny) = (psi.nx(), psi.ny());
    let mut index = vec![usize::MAX; nx * ny];
    let mut vertices = Vec::new();
    let mut nodes = Vec::new();
    let mut k_ch = Vec::new();
    let mut hh_ch = Vec::new();
    let mut g_ch = Vec::new();
    for (k, p) in psi.iter() {
        let v = from_herm(*p);
        let v = SpacetimeVec::new(v.x0.to_f64_lossy(), v.x1.to_f64_lossy(), v.x2.to_f64_lossy(), v.x3.to_f64_lossy());
        let xyz = project(v, &projection, rel_tol).map_err(|reason| ExportError::ProjectionInvalid {
            projection: projection.name(),
            reason,
        })?;
        index[k] = vertices.len();
        vertices.push(xyz);
        nodes.push(k);
        let s = samples.and_then(|f| f.get(k));
        k_ch.push(s.map_or(f64::NAN, |s| s.k.to_f64_lossy()));
        hh_ch.push(s.map_or(f64::NAN, |s| -s.h.det().to_f64_lossy()));
        g_ch.push(s.map_or(f64::NAN, |s| match s.g {
            ProjPoint::Finite(g) => g.norm().to_f64_lossy(),
            ProjPoint::Infinity => f64::INFINITY,
        }));
    }
    if vertices.is_empty() {
        return Err(ExportError::Empty);
    }
    let mut faces = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let corners = [j * nx + i, j * nx + i + 1, (j + 1) * nx + i + 1, (j + 1) * nx + i];
            let present: Vec<usize> = corners.iter().map(|&c| index[c]).filter(|&v| v != usize::MAX).collect();
            if present.len() >= 3 {
                faces.push(present);
            }
        }
    }
    let mut header = vec![projection.header()];
    header.push(format!("vertices = {}", vertices.len()));
    header.push(format!("faces = {}", faces.len()));
    Ok(MeshOutput {
        header,
        vertices,
        nodes,
        faces,
        channels: vec![
            ("gauss_curvature".to_string(), k_ch),
            ("hh_residual".to_string(), hh_ch),
            ("abs_g".to_string(), g_ch),
        ],
    })
}

impl MeshOutput {
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for h in &self.header {
            let _ = writeln!(s, "# {h}");
        }
        for v in &self.vertices {
            let _ = writeln!(s, "v {:.12e} {:.12e} {:.12e}", v[0], v[1], v[2]);
        }
        for f in &self.faces {
            s.push('f');
            for i in f {
                let _ = write!(s, " {}", i + 1);
            }
            s.push('\n');
        }
        s
    }

    /// ASCII PLY with the scalar channels as vertex properties.
    pub fn to_ply(&self) -> String {
        let mut s = String::from("ply\nformat ascii 1.0\n");
        for h in &self.header {
            let _ = writeln!(s, "comment {h}");
        }
        let _ = writeln!(s, "element vertex {}", self.vertices.len());
        s.push_str("property double x\nproperty double y\nproperty double z\n");
        for (name, _) in &self.channels {
            let _ = writeln!(s, "property double {name}");
        }
        let _ = writeln!(s, "element face {}", self.faces.len());
        s.push_str("property list uchar int vertex_indices\nend_header\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = write!(s, "{:.12e} {:.12e} {:.12e}", v[0], v[1], v[2]);
            for (_, c) in &self.channels {
                let _ = write!(s, " {:.12e}", c[i]);
            }
            s.push('\n');
        }
        for f in &self.faces {
            let _ = write!(s, "{}", f.len());
            for i in f {
                let _ = write!(s, " {i}");
            }
            s.push('\n');
        }
        s
    }
}
