//! Mapping parametric-domain meshes into a B-spline solid.

use nalgebra::Point3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{Space, TriangleMesh};
use crate::spline::TrivariateBSplineSolid;

/// Default grid density for [`validate_jacobian`].
pub const DEFAULT_JACOBIAN_SAMPLES: usize = 21;

// Vertices may overshoot the domain by accumulated rounding from upstream
// interpolation; anything inside this margin is clamped, anything beyond is
// an error.
const DOMAIN_SLACK: f64 = 1e-9;

/// Result of sampling the Jacobian determinant over a solid.
#[derive(Debug, Clone, Copy)]
pub struct JacobianReport {
    /// Smallest determinant found, after local refinement.
    pub min_det: f64,
    /// Parameter location of the smallest determinant.
    pub location: (f64, f64, f64),
    /// True when every sampled determinant is positive, i.e. no sampled
    /// point suggests the mapping folds over itself.
    pub positive: bool,
}

fn clamp_param(x: f64) -> Option<f64> {
    if (-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&x) {
        Some(x.clamp(0.0, 1.0))
    } else {
        None
    }
}

/// Maps every vertex of a parametric mesh through the solid. Connectivity
/// and winding are untouched, so topology (and watertightness) survive;
/// orientation in physical space is preserved wherever the solid's Jacobian
/// is positive.
pub fn map_mesh(solid: &TrivariateBSplineSolid, mesh: &TriangleMesh) -> Result<TriangleMesh> {
    let vertices = mesh
        .vertices
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            let (Some(u), Some(v), Some(w)) =
                (clamp_param(p.x), clamp_param(p.y), clamp_param(p.z))
            else {
                return Err(Error::VertexOutsideDomain { index, x: p.x, y: p.y, z: p.z });
            };
            solid.point(u, v, w)
        })
        .collect::<Result<Vec<Point3<f64>>>>()?;
    Ok(TriangleMesh { vertices, triangles: mesh.triangles.clone(), space: Space::Physical })
}

/// Samples the Jacobian determinant on a uniform grid and refines around
/// the smallest value with three bisection passes. A non-positive minimum
/// means the solid folds over itself somewhere and mapped structures may
/// self-intersect; the check is advisory and does not reject the solid.
pub fn validate_jacobian(
    solid: &TrivariateBSplineSolid,
    samples_per_axis: usize,
) -> Result<JacobianReport> {
    if samples_per_axis < 2 {
        return Err(Error::ResolutionTooSmall(
            samples_per_axis,
            samples_per_axis,
            samples_per_axis,
        ));
    }
    let n = samples_per_axis;
    let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let per_slice: Vec<(f64, (f64, f64, f64))> = params
        .par_iter()
        .map(|&u| {
            let mut best = (f64::INFINITY, (u, 0.0, 0.0));
            for &v in &params {
                for &w in &params {
                    let det = solid.jacobian_det(u, v, w).expect("parameters in domain");
                    if det < best.0 {
                        best = (det, (u, v, w));
                    }
                }
            }
            best
        })
        .collect();
    let (mut min_det, mut location) = per_slice
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one sample");

    // Bisect around the worst sample: halve the search radius three times,
    // scanning the surrounding 3x3x3 stencil each pass.
    let mut radius = 1.0 / (n - 1) as f64;
    for _ in 0..3 {
        radius *= 0.5;
        let (cu, cv, cw) = location;
        for du in -1..=1 {
            for dv in -1..=1 {
                for dw in -1..=1 {
                    let u = (cu + du as f64 * radius).clamp(0.0, 1.0);
                    let v = (cv + dv as f64 * radius).clamp(0.0, 1.0);
                    let w = (cw + dw as f64 * radius).clamp(0.0, 1.0);
                    let det = solid.jacobian_det(u, v, w)?;
                    if det < min_det {
                        min_det = det;
                        location = (u, v, w);
                    }
                }
            }
        }
    }
    Ok(JacobianReport { min_det, location, positive: min_det > 0.0 })
}
