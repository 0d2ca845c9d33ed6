//! Porosity measurement and mesh statistics.
//!
//! Porosity is the void fraction of the unit parameter domain, estimated by
//! classifying voxel centers against the implicit structure. Voxel-center
//! sampling keeps every count deterministic across runs and thread counts,
//! which the acceptance checks rely on.

use std::io::Write;

use nalgebra::Point3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::mesh::TriangleMesh;
use crate::tpms::{ImplicitFieldSpec, PeriodCoefficients, StructureKind, ThresholdSource, TpmsType};

/// Default voxel resolution for porosity sweeps; keeps the count error
/// well below 0.01 for desk-scale period counts.
pub const DEFAULT_SWEEP_RESOLUTION: usize = 128;

/// Smallest voxel resolution accepted for porosity estimates.
pub const MIN_POROSITY_RESOLUTION: usize = 16;

fn voxel_centers(resolution: usize) -> Vec<f64> {
    (0..resolution).map(|i| (i as f64 + 0.5) / resolution as f64).collect()
}

/// Void fraction of the structure in the parameter domain, by classifying
/// `resolution`^3 voxel centers.
pub fn voxel_porosity(
    spec: &ImplicitFieldSpec<'_>,
    structure: StructureKind,
    epsilon: f64,
    resolution: usize,
) -> Result<f64> {
    if resolution < MIN_POROSITY_RESOLUTION {
        return Err(Error::ResolutionTooSmall(resolution, resolution, resolution));
    }
    let centers = voxel_centers(resolution);
    let threshold = match &spec.threshold {
        ThresholdSource::Constant(_) => None,
        ThresholdSource::Field(field) => Some(field.eval_on_grid(&centers, &centers, &centers)?),
    };
    let constant = match &spec.threshold {
        ThresholdSource::Constant(c) => *c,
        ThresholdSource::Field(_) => 0.0,
    };
    let tpms = spec.tpms;
    let periods = spec.periods;
    // Per-slab counts collected in order, then summed serially: integer
    // reduction keeps the result independent of the thread count.
    let slab_counts: Vec<usize> = centers
        .par_iter()
        .enumerate()
        .map(|(i, &u)| {
            let mut material = 0usize;
            for (j, &v) in centers.iter().enumerate() {
                for (k, &w) in centers.iter().enumerate() {
                    let c = match &threshold {
                        Some(grid) => *grid.get(i, j, k),
                        None => constant,
                    };
                    let f = tpms.psi(&periods, u, v, w) - c;
                    if structure.contains(f, epsilon) {
                        material += 1;
                    }
                }
            }
            material
        })
        .collect();
    let material: usize = slab_counts.iter().sum();
    Ok(1.0 - material as f64 / (resolution as f64).powi(3))
}

/// Porosity of a constant-threshold structure for each requested `c`. The
/// TPMS values are sampled once and re-classified per threshold.
pub fn porosity_sweep(
    tpms: TpmsType,
    structure: StructureKind,
    epsilon: f64,
    periods: PeriodCoefficients,
    c_values: &[f64],
    resolution: usize,
) -> Result<Vec<(f64, f64)>> {
    if resolution < MIN_POROSITY_RESOLUTION {
        return Err(Error::ResolutionTooSmall(resolution, resolution, resolution));
    }
    for &c in c_values {
        tpms.check_threshold(c)?;
    }
    let centers = voxel_centers(resolution);
    let psi = Grid3::from_vec(
        (resolution, resolution, resolution),
        centers
            .par_iter()
            .flat_map_iter(|&u| {
                let centers = &centers;
                centers.iter().flat_map(move |&v| {
                    centers.iter().map(move |&w| tpms.psi(&periods, u, v, w))
                })
            })
            .collect(),
    );
    let total = (resolution as f64).powi(3);
    Ok(c_values
        .iter()
        .map(|&c| {
            let slab = resolution * resolution;
            let material: usize = psi
                .as_slice()
                .par_chunks(slab)
                .map(|chunk| {
                    chunk.iter().filter(|&&psi| structure.contains(psi - c, epsilon)).count()
                })
                .sum();
            (c, 1.0 - material as f64 / total)
        })
        .collect())
}

/// Evenly spaced threshold values spanning a TPMS type's valid range.
pub fn threshold_steps(tpms: TpmsType, steps: usize) -> Vec<f64> {
    let (lo, hi) = tpms.valid_range();
    if steps == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Summary measurements of a mesh. `volume` is only available for closed
/// meshes; open meshes have no well-defined enclosed volume.
#[derive(Debug, Clone)]
pub struct MeshStatistics {
    pub vertices: usize,
    pub triangles: usize,
    pub closed: bool,
    pub volume: Option<f64>,
    pub surface_area: f64,
    pub bounding_box: Option<(Point3<f64>, Point3<f64>)>,
}

pub fn mesh_statistics(mesh: &TriangleMesh) -> MeshStatistics {
    let closed = mesh.is_closed();
    MeshStatistics {
        vertices: mesh.num_vertices(),
        triangles: mesh.num_triangles(),
        closed,
        volume: closed.then(|| mesh.signed_volume()),
        surface_area: mesh.surface_area(),
        bounding_box: mesh.bounding_box(),
    }
}

impl std::fmt::Display for MeshStatistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "vertices:      {}", self.vertices)?;
        writeln!(f, "triangles:     {}", self.triangles)?;
        writeln!(f, "closed:        {}", self.closed)?;
        match self.volume {
            Some(volume) => writeln!(f, "volume:        {volume:.6}")?,
            None => writeln!(f, "volume:        n/a (open mesh)")?,
        }
        writeln!(f, "surface area:  {:.6}", self.surface_area)?;
        match self.bounding_box {
            Some((lo, hi)) => write!(
                f,
                "bounding box:  ({:.6}, {:.6}, {:.6}) .. ({:.6}, {:.6}, {:.6})",
                lo.x, lo.y, lo.z, hi.x, hi.y, hi.z
            ),
            None => write!(f, "bounding box:  n/a (no vertices)"),
        }
    }
}

/// Writes sweep rows as CSV with a `c,porosity` header.
pub fn write_porosity_csv<W: Write>(rows: &[(f64, f64)], out: &mut W) -> Result<()> {
    writeln!(out, "c,porosity")?;
    for (c, porosity) in rows {
        writeln!(out, "{c},{porosity}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygonize::{mesh_volume, polygonize_structure, sample_field};
    use approx::assert_abs_diff_eq;

    fn constant_spec(tpms: TpmsType, cells: u32, c: f64) -> ImplicitFieldSpec<'static> {
        ImplicitFieldSpec {
            tpms,
            periods: PeriodCoefficients::from_cells(cells, cells, cells),
            threshold: ThresholdSource::Constant(c),
        }
    }

    #[test]
    fn fully_solid_field_has_complementary_extremes() {
        // With c above the attainable maximum of psi_P, f < 0 everywhere.
        let spec = constant_spec(TpmsType::P, 1, 3.5);
        let rod = voxel_porosity(&spec, StructureKind::Rod, 0.3, 16).unwrap();
        let pore = voxel_porosity(&spec, StructureKind::Pore, 0.3, 16).unwrap();
        assert_eq!(rod, 0.0);
        assert_eq!(pore, 1.0);
    }

    #[test]
    fn tiny_resolution_is_rejected() {
        let spec = constant_spec(TpmsType::P, 1, 0.0);
        assert!(matches!(
            voxel_porosity(&spec, StructureKind::Rod, 0.3, 8).unwrap_err(),
            Error::ResolutionTooSmall(8, 8, 8)
        ));
    }

    #[test]
    fn p_rod_benchmark_porosity_is_half() {
        let spec = constant_spec(TpmsType::P, 2, 0.0);
        let porosity = voxel_porosity(&spec, StructureKind::Rod, 0.3, 200).unwrap();
        assert!((porosity - 0.5).abs() < 0.01, "porosity {porosity}");
    }

    #[test]
    fn pore_and_rod_porosities_are_complementary() {
        let resolution = 64;
        let spec = constant_spec(TpmsType::G, 2, 0.3);
        let rod = voxel_porosity(&spec, StructureKind::Rod, 0.3, resolution).unwrap();
        let pore = voxel_porosity(&spec, StructureKind::Pore, 0.3, resolution).unwrap();
        assert!((rod + pore - 1.0).abs() <= 2.0 / resolution as f64);
    }

    #[test]
    fn vanishing_sheet_thickness_empties_the_structure() {
        let spec = constant_spec(TpmsType::D, 2, 0.0);
        let porosity = voxel_porosity(&spec, StructureKind::Sheet, 1e-6, 64).unwrap();
        assert!(porosity > 0.98, "porosity {porosity}");
    }

    #[test]
    fn material_fraction_decreases_with_threshold_for_every_type() {
        for tpms in TpmsType::ALL {
            let cs = threshold_steps(tpms, 9);
            let rows = porosity_sweep(
                tpms,
                StructureKind::Pore,
                0.3,
                PeriodCoefficients::from_cells(2, 2, 2),
                &cs,
                48,
            )
            .unwrap();
            // Pore material is {psi >= c}, so pore porosity rises with c.
            for pair in rows.windows(2) {
                assert!(
                    pair[1].1 > pair[0].1,
                    "{tpms:?}: porosity {} !> {} as c grows",
                    pair[1].1,
                    pair[0].1
                );
            }
        }
    }

    #[test]
    fn out_of_range_threshold_is_rejected() {
        let err = porosity_sweep(
            TpmsType::P,
            StructureKind::Pore,
            0.3,
            PeriodCoefficients::from_cells(1, 1, 1),
            &[0.0, 1.5],
            32,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ThresholdOutOfRange { .. }));
    }

    #[test]
    fn sweep_is_deterministic_across_thread_counts() {
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    porosity_sweep(
                        TpmsType::Iwp,
                        StructureKind::Rod,
                        0.3,
                        PeriodCoefficients::from_cells(2, 1, 2),
                        &threshold_steps(TpmsType::Iwp, 7),
                        48,
                    )
                    .unwrap()
                })
        };
        let one = run(1);
        let four = run(4);
        for (a, b) in one.iter().zip(&four) {
            assert_eq!(a.0.to_bits(), b.0.to_bits());
            assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }

    #[test]
    fn mesh_and_voxel_material_estimates_agree() {
        let spec = constant_spec(TpmsType::P, 2, 0.0);
        let samples = sample_field(&spec, (64, 64, 64)).unwrap();
        let mesh = polygonize_structure(&samples, StructureKind::Rod, 0.3).unwrap();
        let mesh_material = mesh_volume(&mesh).unwrap();
        let voxel_material =
            1.0 - voxel_porosity(&spec, StructureKind::Rod, 0.3, 128).unwrap();
        assert!(
            (mesh_material - voxel_material).abs() / voxel_material < 0.02,
            "mesh {mesh_material} vs voxels {voxel_material}"
        );
    }

    #[test]
    fn statistics_report_closed_and_open_meshes() {
        let solid = crate::polygonize::SampleGrid::from_values(Grid3::filled(
            (4, 5, 6),
            -1.0,
        ))
        .unwrap();
        let cube = polygonize_structure(&solid, StructureKind::Rod, 0.3).unwrap();
        let stats = mesh_statistics(&cube);
        assert!(stats.closed);
        assert_abs_diff_eq!(stats.volume.unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(stats.surface_area, 6.0, epsilon = 1e-9);
        let (lo, hi) = stats.bounding_box.unwrap();
        assert_abs_diff_eq!((lo - Point3::origin()).norm(), 0.0);
        assert_abs_diff_eq!((hi - Point3::new(1.0, 1.0, 1.0)).norm(), 0.0);
        let text = stats.to_string();
        assert!(text.contains("volume:        1.000000"));

        let plane = Grid3::from_fn((8, 8, 8), |i, _, _| i as f64 / 7.0 - 0.4);
        let open_mesh = crate::polygonize::marching_tetrahedra(
            &crate::polygonize::SampleGrid::from_values(plane).unwrap(),
            0.0,
        );
        let stats = mesh_statistics(&open_mesh);
        assert!(!stats.closed);
        assert!(stats.volume.is_none());
        assert!(stats.to_string().contains("open mesh"));
    }

    #[test]
    fn csv_output_has_header_and_rows() {
        let rows = vec![(-0.5, 0.25), (0.0, 0.5), (0.5, 0.75)];
        let mut buffer = Vec::new();
        write_porosity_csv(&rows, &mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "c,porosity");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "0,0.5");
    }
}
