//! Discrete threshold distribution fields (TDF) on a parametric grid.
//!
//! A TDF starts as one scalar per vertex of a uniform grid over the unit
//! parameter cube. Three construction methods fill it (curvature
//! diffusion, layer assignment, prescribed function); the result is
//! normalized into the valid threshold range of a TPMS type and then
//! compressed into a [`TrivariateScalarField`](crate::spline::TrivariateScalarField)
//! by the fitting in [`lspia`](crate::lspia).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::spline::{Face, TrivariateBSplineSolid};
use crate::tpms::TpmsType;

pub const DEFAULT_GRID_RESOLUTION: (usize, usize, usize) = (50, 50, 50);
pub const DEFAULT_FILLING_MAX_ITERS: usize = 10_000;
/// Default diffusion tolerance as a fraction of the boundary value range.
pub const FILLING_TOL_FACTOR: f64 = 1e-6;

/// Scalar samples on a uniform grid over the unit parameter cube.
///
/// Vertex `(a, b, c)` of an `(Ru, Rv, Rw)` grid carries the parameters
/// `(a/(Ru-1), b/(Rv-1), c/(Rw-1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricGrid {
    values: Grid3<f64>,
}

impl ParametricGrid {
    pub fn zeros(resolution: (usize, usize, usize)) -> Result<Self> {
        if resolution.0 < 2 || resolution.1 < 2 || resolution.2 < 2 {
            return Err(Error::ResolutionTooSmall(resolution.0, resolution.1, resolution.2));
        }
        Ok(Self { values: Grid3::filled(resolution, 0.0) })
    }

    pub fn from_values(values: Grid3<f64>) -> Result<Self> {
        let dims = values.dims();
        if dims.0 < 2 || dims.1 < 2 || dims.2 < 2 {
            return Err(Error::ResolutionTooSmall(dims.0, dims.1, dims.2));
        }
        for (flat, &v) in values.as_slice().iter().enumerate() {
            if !v.is_finite() {
                let (i, j, k) = values.unindex(flat);
                return Err(Error::NonFiniteValue { i, j, k, value: v });
            }
        }
        Ok(Self { values })
    }

    #[inline]
    pub fn resolution(&self) -> (usize, usize, usize) {
        self.values.dims()
    }

    #[inline]
    pub fn values(&self) -> &Grid3<f64> {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut Grid3<f64> {
        &mut self.values
    }

    /// Parameters of vertex `(a, b, c)`.
    pub fn param(&self, a: usize, b: usize, c: usize) -> (f64, f64, f64) {
        let (ru, rv, rw) = self.resolution();
        (
            a as f64 / (ru - 1) as f64,
            b as f64 / (rv - 1) as f64,
            c as f64 / (rw - 1) as f64,
        )
    }

    /// Per-axis vertex parameters `0, 1/(R-1), ..., 1`.
    pub fn axis_params(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (ru, rv, rw) = self.resolution();
        let axis = |r: usize| (0..r).map(|a| a as f64 / (r - 1) as f64).collect();
        (axis(ru), axis(rv), axis(rw))
    }

    pub fn value_range(&self) -> (f64, f64) {
        self.values.value_range().expect("grid is never empty")
    }

    fn is_boundary(&self, a: usize, b: usize, c: usize) -> bool {
        let (ru, rv, rw) = self.resolution();
        a == 0 || a == ru - 1 || b == 0 || b == rv - 1 || c == 0 || c == rw - 1
    }
}

/// Which curvature the filling method diffuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureQuantity {
    Mean,
    Gaussian,
}

/// Outcome of the interior diffusion (and of the boundary sampling when
/// run through [`filling_method`]).
#[derive(Debug, Clone, Copy)]
pub struct DiffusionReport {
    pub iterations: usize,
    /// Largest per-vertex change of the final iteration.
    pub max_change: f64,
    pub tol: f64,
    pub converged: bool,
    /// Boundary samples whose curvature was degenerate and had to be
    /// filled from neighbors.
    pub degenerate_boundary_samples: usize,
}

/// Solves the interior of `grid` as a discrete Laplace equation with the
/// current boundary vertices as Dirichlet data, by Jacobi iteration over
/// the 6-neighbor stencil.
///
/// The interior starts at the boundary mean, so every iterate (and the
/// result) obeys the discrete maximum principle exactly. `tol` is the
/// max per-vertex change at which iteration stops; `None` selects
/// [`FILLING_TOL_FACTOR`] times the boundary value range.
pub fn diffuse_interior(
    grid: &mut ParametricGrid,
    tol: Option<f64>,
    max_iters: usize,
) -> DiffusionReport {
    let (ru, rv, rw) = grid.resolution();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut count = 0usize;
    for a in 0..ru {
        for b in 0..rv {
            for c in 0..rw {
                if grid.is_boundary(a, b, c) {
                    let v = *grid.values.get(a, b, c);
                    lo = lo.min(v);
                    hi = hi.max(v);
                    sum += v;
                    count += 1;
                }
            }
        }
    }
    let mean = sum / count as f64;
    let tol = tol.unwrap_or_else(|| {
        let range = hi - lo;
        if range > 0.0 {
            range * FILLING_TOL_FACTOR
        } else {
            1e-12
        }
    });

    for a in 1..ru - 1 {
        for b in 1..rv - 1 {
            for c in 1..rw - 1 {
                grid.values.set(a, b, c, mean);
            }
        }
    }
    if ru < 3 || rv < 3 || rw < 3 {
        // No interior vertices to solve for.
        return DiffusionReport {
            iterations: 0,
            max_change: 0.0,
            tol,
            converged: true,
            degenerate_boundary_samples: 0,
        };
    }

    let mut current = grid.values.clone();
    let mut next = current.clone();
    let mut iterations = 0;
    let mut max_change = f64::INFINITY;
    while iterations < max_iters {
        let dims = current.dims();
        let src = &current;
        max_change = next
            .as_mut_slice()
            .par_iter_mut()
            .enumerate()
            .map(|(flat, out)| {
                let (a, b, c) = src.unindex(flat);
                if a == 0 || a == dims.0 - 1 || b == 0 || b == dims.1 - 1 || c == 0 || c == dims.2 - 1
                {
                    *out = *src.get(a, b, c);
                    return 0.0;
                }
                let avg = (src.get(a - 1, b, c)
                    + src.get(a + 1, b, c)
                    + src.get(a, b - 1, c)
                    + src.get(a, b + 1, c)
                    + src.get(a, b, c - 1)
                    + src.get(a, b, c + 1))
                    / 6.0;
                let change = (avg - src.get(a, b, c)).abs();
                *out = avg;
                change
            })
            .reduce(|| 0.0, f64::max);
        std::mem::swap(&mut current, &mut next);
        iterations += 1;
        if max_change < tol {
            break;
        }
    }
    grid.values = current;
    DiffusionReport {
        iterations,
        max_change,
        tol,
        converged: max_change < tol,
        degenerate_boundary_samples: 0,
    }
}

/// Builds a TDF by sampling a curvature quantity of the solid's boundary
/// surfaces onto the grid's boundary vertices and diffusing it inward.
///
/// The input grid only provides the resolution; its values are
/// overwritten. Vertices on several faces (cube edges and corners)
/// average the curvatures of those faces. Degenerate surface points are
/// filled from neighboring boundary vertices; only if every face at a
/// vertex is degenerate and no neighbor can supply a value does the
/// method fail.
pub fn filling_method(
    solid: &TrivariateBSplineSolid,
    grid: &ParametricGrid,
    quantity: CurvatureQuantity,
    tol: Option<f64>,
    max_iters: usize,
) -> Result<(ParametricGrid, DiffusionReport)> {
    let (ru, rv, rw) = grid.resolution();
    let mut out = ParametricGrid::zeros((ru, rv, rw))?;

    // Boundary sampling; None marks vertices where every incident face
    // was degenerate.
    let mut boundary: Grid3<Option<f64>> = Grid3::filled((ru, rv, rw), None);
    let mut first_degenerate: Option<Error> = None;
    let mut degenerate_samples = 0usize;
    for a in 0..ru {
        for b in 0..rv {
            for c in 0..rw {
                if !grid.is_boundary(a, b, c) {
                    continue;
                }
                let (u, v, w) = grid.param(a, b, c);
                let param = [u, v, w];
                let index = [a, b, c];
                let limits = [ru - 1, rv - 1, rw - 1];
                let mut sum = 0.0;
                let mut hits = 0usize;
                for face in Face::ALL {
                    let axis = face.fixed_axis();
                    let on_face = if face.at_max() {
                        index[axis] == limits[axis]
                    } else {
                        index[axis] == 0
                    };
                    if !on_face {
                        continue;
                    }
                    let (sa, ta) = face.frame_axes();
                    match solid.boundary_curvature(face, param[sa], param[ta]) {
                        Ok((gauss, mean)) => {
                            sum += match quantity {
                                CurvatureQuantity::Gaussian => gauss,
                                CurvatureQuantity::Mean => mean,
                            };
                            hits += 1;
                        }
                        Err(err) => {
                            degenerate_samples += 1;
                            if first_degenerate.is_none() {
                                first_degenerate = Some(err);
                            }
                        }
                    }
                }
                if hits > 0 {
                    boundary.set(a, b, c, Some(sum / hits as f64));
                }
            }
        }
    }

    // Fill unsampled boundary vertices from sampled boundary neighbors,
    // in synchronized passes so the result does not depend on traversal
    // order.
    loop {
        let mut updates: Vec<(usize, usize, usize, f64)> = Vec::new();
        let mut missing = 0usize;
        for a in 0..ru {
            for b in 0..rv {
                for c in 0..rw {
                    if !grid.is_boundary(a, b, c) || boundary.get(a, b, c).is_some() {
                        continue;
                    }
                    missing += 1;
                    let mut sum = 0.0;
                    let mut hits = 0usize;
                    let neighbors = [
                        (a.wrapping_sub(1), b, c),
                        (a + 1, b, c),
                        (a, b.wrapping_sub(1), c),
                        (a, b + 1, c),
                        (a, b, c.wrapping_sub(1)),
                        (a, b, c + 1),
                    ];
                    for (na, nb, nc) in neighbors {
                        if na >= ru || nb >= rv || nc >= rw {
                            continue;
                        }
                        if let Some(v) = boundary.get(na, nb, nc) {
                            sum += v;
                            hits += 1;
                        }
                    }
                    if hits > 0 {
                        updates.push((a, b, c, sum / hits as f64));
                    }
                }
            }
        }
        if missing == 0 {
            break;
        }
        if updates.is_empty() {
            // Nothing sampled anywhere on the boundary.
            return Err(first_degenerate.expect("missing vertices imply a degeneracy"));
        }
        for (a, b, c, v) in updates {
            boundary.set(a, b, c, Some(v));
        }
    }

    for a in 0..ru {
        for b in 0..rv {
            for c in 0..rw {
                if grid.is_boundary(a, b, c) {
                    let value = (*boundary.get(a, b, c)).unwrap();
                    out.values.set(a, b, c, value);
                }
            }
        }
    }

    let mut report = diffuse_interior(&mut out, tol, max_iters);
    report.degenerate_boundary_samples = degenerate_samples;
    Ok((out, report))
}

/// Layer assignment scheme for [`layer_method`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerMode {
    /// One layer per w-slice: vertex `(a, b, c)` takes `layer_values[c]`.
    AxisW,
    /// Concentric rings: the layer index is the grid distance to the
    /// nearest of the four side faces (u = 0, u = 1, v = 0, v = 1).
    OnionSides,
}

/// Number of layers a grid resolution implies for a mode.
pub fn layer_count(resolution: (usize, usize, usize), mode: LayerMode) -> usize {
    match mode {
        LayerMode::AxisW => resolution.2,
        LayerMode::OnionSides => resolution.0.min(resolution.1).div_ceil(2),
    }
}

/// Assigns one threshold value per layer; all vertices of a layer share
/// its value.
pub fn layer_method(
    grid: &ParametricGrid,
    mode: LayerMode,
    layer_values: &[f64],
) -> Result<ParametricGrid> {
    let resolution = grid.resolution();
    let expected = layer_count(resolution, mode);
    if layer_values.len() != expected {
        return Err(Error::LayerValueCount { expected, got: layer_values.len() });
    }
    let (ru, rv, _) = resolution;
    let values = Grid3::from_fn(resolution, |a, b, c| match mode {
        LayerMode::AxisW => layer_values[c],
        LayerMode::OnionSides => {
            let d = a.min(ru - 1 - a).min(b).min(rv - 1 - b);
            layer_values[d]
        }
    });
    ParametricGrid::from_values(values)
}

/// Evaluates a user function at every vertex parameter.
pub fn prescribed_function(
    grid: &ParametricGrid,
    mut f: impl FnMut(f64, f64, f64) -> f64,
) -> Result<ParametricGrid> {
    let resolution = grid.resolution();
    let mut out = ParametricGrid::zeros(resolution)?;
    for a in 0..resolution.0 {
        for b in 0..resolution.1 {
            for c in 0..resolution.2 {
                let (u, v, w) = grid.param(a, b, c);
                let value = f(u, v, w);
                if !value.is_finite() {
                    return Err(Error::NonFiniteValue { i: a, j: b, k: c, value });
                }
                out.values.set(a, b, c, value);
            }
        }
    }
    Ok(out)
}

/// The symmetric prescribed function `|u-v| + |v-w| + |u-w|`.
///
/// Vanishes on the main diagonal of the cube and grows toward parameter
/// points whose coordinates differ, giving a scaffold that densifies
/// away from the diagonal.
pub fn sym3(u: f64, v: f64, w: f64) -> f64 {
    (u - v).abs() + (v - w).abs() + (u - w).abs()
}

/// Affinely maps the grid's value range onto a threshold interval.
///
/// The target is the full valid range of `tpms` unless a sub-interval of
/// it is given. A constant grid maps to the interval midpoint. Results
/// are clamped so no rounding puts a value outside the target.
pub fn normalize_to_range(
    grid: &ParametricGrid,
    tpms: TpmsType,
    sub_interval: Option<(f64, f64)>,
) -> Result<ParametricGrid> {
    let (valid_lo, valid_hi) = tpms.valid_range();
    let (target_lo, target_hi) = match sub_interval {
        Some((lo, hi)) => {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= valid_lo && hi <= valid_hi)
            {
                return Err(Error::IntervalOutsideValidRange { lo, hi, valid_lo, valid_hi });
            }
            (lo, hi)
        }
        None => (valid_lo, valid_hi),
    };
    let (min, max) = grid.value_range();
    let mut out = grid.clone();
    if min == max {
        let mid = 0.5 * (target_lo + target_hi);
        out.values.as_mut_slice().fill(mid);
        return Ok(out);
    }
    let scale = (target_hi - target_lo) / (max - min);
    for v in out.values.as_mut_slice() {
        *v = (target_lo + (*v - min) * scale).clamp(target_lo, target_hi);
    }
    Ok(out)
}

/// One requested vertex change: grid index and new target value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edit {
    pub index: (usize, usize, usize),
    pub value: f64,
}

/// A batch of vertex edits, as parsed from an edit file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EditSet {
    pub edits: Vec<Edit>,
}

impl EditSet {
    /// Parses the plain-text edit format: one `a b c value` line per
    /// edit, `#` starting a comment, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edits = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            let fail = |message: String| Error::Parse {
                section: "edit set",
                line: lineno + 1,
                message,
            };
            if tokens.len() != 4 {
                return Err(fail(format!(
                    "expected 'a b c value' (4 fields), got {}",
                    tokens.len()
                )));
            }
            let index: Vec<usize> = tokens[..3]
                .iter()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| fail(format!("bad vertex index: {e}")))?;
            let value: f64 =
                tokens[3].parse().map_err(|e| fail(format!("bad value: {e}")))?;
            if !value.is_finite() {
                return Err(fail(format!("value must be finite, got {value}")));
            }
            edits.push(Edit { index: (index[0], index[1], index[2]), value });
        }
        Ok(Self { edits })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    /// Checks all indices against a grid resolution.
    pub fn validate(&self, resolution: (usize, usize, usize)) -> Result<()> {
        for edit in &self.edits {
            let (a, b, c) = edit.index;
            if a >= resolution.0 || b >= resolution.1 || c >= resolution.2 {
                return Err(Error::EditIndexOutOfRange {
                    i: a,
                    j: b,
                    k: c,
                    ru: resolution.0,
                    rv: resolution.1,
                    rw: resolution.2,
                });
            }
        }
        Ok(())
    }

    /// Clamps edit values into the valid threshold range of `tpms`;
    /// returns how many were changed so callers can warn.
    pub fn clamp_to_valid_range(&mut self, tpms: TpmsType) -> usize {
        let mut clamped = 0;
        for edit in &mut self.edits {
            let c = tpms.clamp_threshold(edit.value);
            if c != edit.value {
                edit.value = c;
                clamped += 1;
            }
        }
        clamped
    }
}
