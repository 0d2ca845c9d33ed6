//! Iso-surface extraction and watertight closure in the parameter domain.
//!
//! The unit cube is diced into hexahedral cells, each cell into six
//! tetrahedra around the main diagonal, and the implicit surface `f = iso`
//! is polygonized per tetrahedron with inverse linear interpolation along
//! crossing edges. Every cell uses the same decomposition, so the induced
//! triangulations of shared cell faces agree and the welded surface is
//! crack-free. [`close_structure`] then caps the mesh with the portions of
//! the six domain faces covered by the solid region, yielding a closed,
//! consistently outward-oriented mesh.

use std::collections::HashMap;

use nalgebra::Point3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::mesh::{Space, TriangleMesh};
use crate::tpms::{ImplicitFieldSpec, StructureKind, ThresholdSource};

/// Default number of sample points per parameter axis.
pub const DEFAULT_SAMPLE_RESOLUTION: (usize, usize, usize) = (100, 100, 100);

/// Fraction of the sample value range used for the tie-break band: samples
/// closer than this to a contour level are treated as lying exactly on the
/// positive side of it, and crossings this close to a cell vertex snap onto
/// the vertex.
const TIE_BREAK_FACTOR: f64 = 1e-12;

/// Scalar samples of an implicit field on a uniform grid over the unit
/// parameter cube. Grid point `(i, j, k)` of an `(nu, nv, nw)` grid sits at
/// parameter `(i/(nu-1), j/(nv-1), k/(nw-1))`.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    values: Grid3<f64>,
    // Absolute tie-break offset, derived from the sample value range.
    tie_eps: f64,
}

impl SampleGrid {
    /// Wraps per-vertex samples. Requires at least two samples per axis and
    /// finite values.
    pub fn from_values(values: Grid3<f64>) -> Result<Self> {
        let (nu, nv, nw) = values.dims();
        if nu < 2 || nv < 2 || nw < 2 {
            return Err(Error::ResolutionTooSmall(nu, nv, nw));
        }
        assert!(nu * nv * nw - 1 <= u32::MAX as usize, "sample grid exceeds u32 indexing");
        for (flat, &value) in values.as_slice().iter().enumerate() {
            if !value.is_finite() {
                let (i, j, k) = values.unindex(flat);
                return Err(Error::NonFiniteValue { i, j, k, value });
            }
        }
        let (lo, hi) = values.value_range().expect("grid is non-empty");
        let range = hi - lo;
        let tie_eps = if range > 0.0 { TIE_BREAK_FACTOR * range } else { TIE_BREAK_FACTOR };
        Ok(Self { values, tie_eps })
    }

    /// Number of sample points per axis.
    pub fn resolution(&self) -> (usize, usize, usize) {
        self.values.dims()
    }

    pub fn values(&self) -> &Grid3<f64> {
        &self.values
    }

    /// Parameter-space position of grid point `(i, j, k)`.
    pub fn position(&self, i: usize, j: usize, k: usize) -> Point3<f64> {
        let (nu, nv, nw) = self.values.dims();
        Point3::new(
            i as f64 / (nu - 1) as f64,
            j as f64 / (nv - 1) as f64,
            k as f64 / (nw - 1) as f64,
        )
    }

    fn flat_position(&self, flat: usize) -> Point3<f64> {
        let (i, j, k) = self.values.unindex(flat);
        self.position(i, j, k)
    }

    fn value_at(&self, flat: usize) -> f64 {
        self.values.as_slice()[flat]
    }

    /// Whether the sample lies on the positive side of `level`; exact ties
    /// count as positive, which is the deterministic tie-break used
    /// throughout polygonization and closure.
    fn positive_side(&self, flat: usize, level: f64) -> bool {
        self.value_at(flat) >= level
    }

    /// Point where the field crosses `level` on the segment between two grid
    /// vertices, computed in a canonical direction so every caller obtains
    /// bit-identical results. Crossings inside the tie-break band of an
    /// endpoint snap onto that vertex. Callers must have checked that the
    /// endpoints straddle the level.
    fn crossing_position(&self, a: usize, b: usize, level: f64) -> Point3<f64> {
        let (lo, hi) = (a.min(b), a.max(b));
        let (fl, fh) = (self.value_at(lo), self.value_at(hi));
        if (fl - level).abs() <= self.tie_eps {
            return self.flat_position(lo);
        }
        if (fh - level).abs() <= self.tie_eps {
            return self.flat_position(hi);
        }
        let t = (level - fl) / (fh - fl);
        let p = self.flat_position(lo);
        let q = self.flat_position(hi);
        Point3::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y), p.z + t * (q.z - p.z))
    }
}

/// Evaluates `f = psi - C` at every vertex of a uniform sample grid. A field
/// threshold is evaluated in one batched pass so repeated basis computations
/// are shared per axis.
pub fn sample_field(
    spec: &ImplicitFieldSpec<'_>,
    resolution: (usize, usize, usize),
) -> Result<SampleGrid> {
    let (nu, nv, nw) = resolution;
    if nu < 2 || nv < 2 || nw < 2 {
        return Err(Error::ResolutionTooSmall(nu, nv, nw));
    }
    let axis = |n: usize| -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    };
    let (pu, pv, pw) = (axis(nu), axis(nv), axis(nw));
    let threshold = match &spec.threshold {
        ThresholdSource::Constant(_) => None,
        ThresholdSource::Field(field) => Some(field.eval_on_grid(&pu, &pv, &pw)?),
    };
    let constant = match &spec.threshold {
        ThresholdSource::Constant(c) => *c,
        ThresholdSource::Field(_) => 0.0,
    };
    let tpms = spec.tpms;
    let periods = spec.periods;
    let data: Vec<f64> = pu
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &u)| {
            let threshold = &threshold;
            let pv = &pv;
            let pw = &pw;
            pv.iter().enumerate().flat_map(move |(j, &v)| {
                pw.iter().enumerate().map(move |(k, &w)| {
                    let c = match threshold {
                        Some(grid) => *grid.get(i, j, k),
                        None => constant,
                    };
                    tpms.psi(&periods, u, v, w) - c
                })
            })
        })
        .collect();
    SampleGrid::from_values(Grid3::from_vec(resolution, data))
}

// The six tetrahedra of the Kuhn subdivision of a cell, as cell-corner
// indices with bit 0 = +u, bit 1 = +v, bit 2 = +w. All share the main
// diagonal 0-7 and every 4-tuple is positively oriented, which the case
// table below relies on for winding. Identical in every cell, so the
// triangulations induced on shared cell faces match.
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 7, 5],
    [0, 2, 7, 3],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 7, 6],
];

// Triangles emitted per sign pattern of a positively oriented tetrahedron.
// Bit i of the index is set when vertex i lies on the positive side. Each
// entry lists crossing edges as local vertex pairs, wound so the triangle
// normal points toward the positive side.
const TET_TRIANGLES: [&[[(usize, usize); 3]]; 16] = [
    &[],
    &[[(0, 1), (0, 3), (0, 2)]],
    &[[(0, 1), (1, 2), (1, 3)]],
    &[[(0, 2), (1, 2), (1, 3)], [(0, 2), (1, 3), (0, 3)]],
    &[[(2, 3), (1, 2), (0, 2)]],
    &[[(0, 3), (2, 3), (1, 2)], [(0, 3), (1, 2), (0, 1)]],
    &[[(0, 1), (2, 3), (1, 3)], [(0, 1), (0, 2), (2, 3)]],
    &[[(2, 3), (1, 3), (0, 3)]],
    &[[(2, 3), (0, 3), (1, 3)]],
    &[[(0, 1), (1, 3), (2, 3)], [(0, 1), (2, 3), (0, 2)]],
    &[[(0, 3), (1, 2), (2, 3)], [(0, 3), (0, 1), (1, 2)]],
    &[[(2, 3), (0, 2), (1, 2)]],
    &[[(0, 2), (1, 3), (1, 2)], [(0, 2), (0, 3), (1, 3)]],
    &[[(0, 1), (1, 3), (1, 2)]],
    &[[(0, 1), (0, 2), (0, 3)]],
    &[],
];

/// Deduplicates bit-identical vertex positions into an indexed mesh,
/// dropping triangles whose corners collapse onto fewer than three distinct
/// vertices. Welding is a pure function of the incoming triangle order, so
/// output is reproducible for a deterministic emitter.
struct Welder {
    ids: HashMap<(u64, u64, u64), u32>,
    mesh: TriangleMesh,
}

impl Welder {
    fn new(space: Space) -> Self {
        Self { ids: HashMap::new(), mesh: TriangleMesh::new(space) }
    }

    fn seed(mesh: TriangleMesh) -> Self {
        let mut ids = HashMap::new();
        for (id, p) in mesh.vertices.iter().enumerate() {
            ids.entry((p.x.to_bits(), p.y.to_bits(), p.z.to_bits())).or_insert(id as u32);
        }
        Self { ids, mesh }
    }

    fn vertex(&mut self, p: Point3<f64>) -> u32 {
        let key = (p.x.to_bits(), p.y.to_bits(), p.z.to_bits());
        match self.ids.get(&key) {
            Some(&id) => id,
            None => {
                let id = self.mesh.vertices.len() as u32;
                self.mesh.vertices.push(p);
                self.ids.insert(key, id);
                id
            }
        }
    }

    fn triangle(&mut self, corners: [Point3<f64>; 3]) {
        let tri = corners.map(|p| self.vertex(p));
        if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
            self.mesh.triangles.push(tri);
        }
    }

    fn finish(self) -> TriangleMesh {
        self.mesh
    }
}

/// Extracts the surface `f = iso` as a triangle mesh with normals pointing
/// toward `f > iso`. Samples exactly on the iso level are tie-broken to the
/// positive side, so degenerate tetrahedron cases cannot occur; crossings
/// that land within the tie-break band of a grid vertex snap onto it and
/// the resulting zero-area triangles are welded away.
pub fn marching_tetrahedra(samples: &SampleGrid, iso: f64) -> TriangleMesh {
    let (nu, nv, nw) = samples.resolution();
    // Per-slab emission runs in parallel; the ordered collect keeps the
    // triangle stream, and therefore vertex numbering, thread-independent.
    let slabs: Vec<Vec<[Point3<f64>; 3]>> = (0..nu - 1)
        .into_par_iter()
        .map(|ci| {
            let mut triangles = Vec::new();
            for cj in 0..nv - 1 {
                for ck in 0..nw - 1 {
                    emit_cell(samples, iso, (ci, cj, ck), &mut triangles);
                }
            }
            triangles
        })
        .collect();
    let mut welder = Welder::new(Space::Parametric);
    for triangle in slabs.into_iter().flatten() {
        welder.triangle(triangle);
    }
    welder.finish()
}

fn emit_cell(
    samples: &SampleGrid,
    iso: f64,
    cell: (usize, usize, usize),
    out: &mut Vec<[Point3<f64>; 3]>,
) {
    let (nu, nv, nw) = samples.resolution();
    let _ = nu;
    let mut corner_flat = [0usize; 8];
    let mut corner_pos = [false; 8];
    let mut any = false;
    let mut all = true;
    for (c, flat) in corner_flat.iter_mut().enumerate() {
        let i = cell.0 + (c & 1);
        let j = cell.1 + ((c >> 1) & 1);
        let k = cell.2 + ((c >> 2) & 1);
        *flat = (i * nv + j) * nw + k;
        let side = samples.positive_side(*flat, iso);
        corner_pos[c] = side;
        any |= side;
        all &= side;
    }
    if !any || all {
        return;
    }
    for tet in &TETS {
        let mut mask = 0usize;
        for (bit, &corner) in tet.iter().enumerate() {
            if corner_pos[corner] {
                mask |= 1 << bit;
            }
        }
        for edges in TET_TRIANGLES[mask] {
            let tri = edges.map(|(a, b)| {
                samples.crossing_position(corner_flat[tet[a]], corner_flat[tet[b]], iso)
            });
            out.push(tri);
        }
    }
}

// The solid region of a structure as closed value bands; `in_band` and the
// crossing levels below must stay consistent with the tie-break convention
// of `positive_side` so boundary caps weld exactly onto the extracted
// surface.
struct Band {
    // Keep f >= lower (tie to the kept side).
    lower: Option<f64>,
    // Keep f < upper (tie to the discarded side).
    upper: Option<f64>,
}

impl Band {
    fn for_structure(structure: StructureKind, epsilon: f64) -> Band {
        match structure {
            StructureKind::Rod => Band { lower: None, upper: Some(0.0) },
            StructureKind::Pore => Band { lower: Some(0.0), upper: None },
            StructureKind::Sheet => Band { lower: Some(-epsilon), upper: Some(0.0) },
        }
    }

    fn contains(&self, samples: &SampleGrid, flat: usize) -> bool {
        if let Some(upper) = self.upper {
            if samples.positive_side(flat, upper) {
                return false;
            }
        }
        if let Some(lower) = self.lower {
            if !samples.positive_side(flat, lower) {
                return false;
            }
        }
        true
    }

    fn levels(&self) -> impl Iterator<Item = f64> + '_ {
        self.upper.into_iter().chain(self.lower)
    }
}

/// Adds the portions of the six domain faces covered by the structure's
/// solid region to `surface` and verifies the result is watertight. The
/// surface must come from [`marching_tetrahedra`] on the same samples (for
/// pore structures with flipped orientation, for sheets the union of the
/// two offset surfaces), so that cap vertices weld bit-exactly onto it.
pub fn close_structure(
    surface: &TriangleMesh,
    samples: &SampleGrid,
    structure: StructureKind,
    epsilon: f64,
) -> Result<TriangleMesh> {
    let band = Band::for_structure(structure, epsilon);
    let mut welder = Welder::seed(surface.clone());
    let res = samples.resolution();
    let dims = [res.0, res.1, res.2];
    for face in crate::spline::Face::ALL {
        let (sa, ta) = face.frame_axes();
        let fixed = face.fixed_axis();
        let fixed_idx = if face.at_max() { dims[fixed] - 1 } else { 0 };
        let flat_of = |s: usize, t: usize| -> usize {
            let mut idx = [0usize; 3];
            idx[fixed] = fixed_idx;
            idx[sa] = s;
            idx[ta] = t;
            (idx[0] * dims[1] + idx[1]) * dims[2] + idx[2]
        };
        for p in 0..dims[sa] - 1 {
            for q in 0..dims[ta] - 1 {
                let c00 = flat_of(p, q);
                let c10 = flat_of(p + 1, q);
                let c11 = flat_of(p + 1, q + 1);
                let c01 = flat_of(p, q + 1);
                // The cell diagonal used by the tetrahedral decomposition;
                // winding (s, t) counter-clockwise makes the cap normal
                // point outward because s x t is the outward direction.
                for tri in [[c00, c10, c11], [c00, c11, c01]] {
                    clip_face_triangle(samples, &band, tri, &mut welder);
                }
            }
        }
    }
    let mesh = welder.finish();
    let unmatched = mesh.unmatched_edges();
    if unmatched.is_empty() {
        Ok(mesh)
    } else {
        let count = unmatched.len();
        let first = unmatched.into_iter().take(8).collect();
        Err(Error::ClosureFailed { count, first })
    }
}

/// Clips one boundary-face triangle to the band and fan-triangulates the
/// remainder. The band region is an intersection of half-planes with a
/// triangle, hence convex; walking the triangle boundary in winding order
/// and inserting level crossings yields its boundary polygon in order.
fn clip_face_triangle(samples: &SampleGrid, band: &Band, tri: [usize; 3], welder: &mut Welder) {
    let mut polygon: Vec<Point3<f64>> = Vec::with_capacity(7);
    for e in 0..3 {
        let a = tri[e];
        let b = tri[(e + 1) % 3];
        if band.contains(samples, a) {
            polygon.push(samples.flat_position(a));
        }
        let mut crossings: Vec<(f64, Point3<f64>)> = Vec::with_capacity(2);
        for level in band.levels() {
            if samples.positive_side(a, level) != samples.positive_side(b, level) {
                let position = samples.crossing_position(a, b, level);
                let (lo, hi) = (a.min(b), a.max(b));
                let (fl, fh) = (samples.value_at(lo), samples.value_at(hi));
                let t = (level - fl) / (fh - fl);
                let t_ab = if a == lo { t } else { 1.0 - t };
                crossings.push((t_ab, position));
            }
        }
        crossings.sort_by(|x, y| x.0.total_cmp(&y.0));
        polygon.extend(crossings.into_iter().map(|(_, p)| p));
    }
    for i in 1..polygon.len().saturating_sub(1) {
        welder.triangle([polygon[0], polygon[i], polygon[i + 1]]);
    }
}

/// Polygonizes and closes a pore, rod, or sheet structure in one call,
/// orienting every surface outward from the solid region. `epsilon` is the
/// sheet thickness in field value and is ignored for pore and rod.
pub fn polygonize_structure(
    samples: &SampleGrid,
    structure: StructureKind,
    epsilon: f64,
) -> Result<TriangleMesh> {
    let surface = match structure {
        StructureKind::Rod => marching_tetrahedra(samples, 0.0),
        StructureKind::Pore => {
            let mut mesh = marching_tetrahedra(samples, 0.0);
            mesh.flip_orientation();
            mesh
        }
        StructureKind::Sheet => {
            let mut outer = marching_tetrahedra(samples, 0.0);
            let mut inner = marching_tetrahedra(samples, -epsilon);
            inner.flip_orientation();
            let offset = outer.vertices.len() as u32;
            outer.vertices.extend_from_slice(&inner.vertices);
            outer
                .triangles
                .extend(inner.triangles.iter().map(|t| t.map(|v| v + offset)));
            outer
        }
    };
    close_structure(&surface, samples, structure, epsilon)
}

/// Volume enclosed by a closed, outward-oriented mesh via the divergence
/// theorem.
pub fn mesh_volume(mesh: &TriangleMesh) -> Result<f64> {
    let boundary_edges = mesh.unmatched_edges().len();
    if boundary_edges > 0 {
        return Err(Error::OpenMesh { boundary_edges });
    }
    Ok(mesh.signed_volume())
}
