//! Writes sample trivariate B-spline solids for trying out the CLI.
//!
//! ```text
//! cargo run --example make_sample_tbss -- [DIR]
//! ```
//!
//! Produces `cube.tbss` (the identity solid over the unit cube) and
//! `twisted.tbss` (a tapered, twisted block).

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Point3;

use tpms_scaffold::grid::Grid3;
use tpms_scaffold::io::write_tbss;
use tpms_scaffold::TrivariateBSplineSolid;

fn write_solid(path: &Path, solid: &TrivariateBSplineSolid) -> Result<(), Box<dyn std::error::Error>> {
    let mut out = Vec::new();
    write_tbss(solid, &mut out)?;
    fs::write(path, out)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;

    let cube = TrivariateBSplineSolid::identity((5, 5, 5))?;
    write_solid(&dir.join("cube.tbss"), &cube)?;

    // A tapered, twisted block: injective but visibly non-affine, so the
    // mapped scaffold shows the pore-size gradient.
    let base = TrivariateBSplineSolid::identity((6, 6, 6))?;
    let control = Grid3::from_fn((6, 6, 6), |i, j, k| {
        let p = base.control().get(i, j, k);
        let scale = 1.0 - 0.35 * p.z;
        let (s, c) = (0.6 * p.z).sin_cos();
        let x = (p.x - 0.5) * scale;
        let y = (p.y - 0.5) * scale;
        Point3::new(0.5 + c * x - s * y, 0.5 + s * x + c * y, 1.4 * p.z)
    });
    let twisted = TrivariateBSplineSolid::new(base.knots().clone(), control)?;
    write_solid(&dir.join("twisted.tbss"), &twisted)?;
    Ok(())
}
