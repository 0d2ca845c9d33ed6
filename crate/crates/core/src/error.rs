//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid knot vector: {0}")]
    InvalidKnotVector(String),

    #[error("basis index {index} out of range (have {count} control points)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("parameter {value} outside [{lo}, {hi}] in the {axis} direction")]
    ParameterOutOfDomain { axis: char, value: f64, lo: f64, hi: f64 },

    #[error("control grid is {got_u}x{got_v}x{got_w} but knot vectors require {want_u}x{want_v}x{want_w}")]
    GridKnotMismatch {
        got_u: usize,
        got_v: usize,
        got_w: usize,
        want_u: usize,
        want_v: usize,
        want_w: usize,
    },

    #[error("degree ({0},{1},{2}) unsupported; only cubic (3,3,3) solids and fields are accepted")]
    UnsupportedDegree(usize, usize, usize),

    #[error("degenerate surface point on face {face} at ({s}, {t}): tangents do not span a plane")]
    DegenerateSurfacePoint { face: &'static str, s: f64, t: f64 },

    #[error("grid resolution {0}x{1}x{2} too small (need at least 2 per direction)")]
    ResolutionTooSmall(usize, usize, usize),

    #[error("expected {expected} layer values, got {got}")]
    LayerValueCount { expected: usize, got: usize },

    #[error("prescribed function returned non-finite value {value} at grid vertex ({i}, {j}, {k})")]
    NonFiniteValue { i: usize, j: usize, k: usize, value: f64 },

    #[error("target interval [{lo}, {hi}] lies outside the valid threshold range [{valid_lo}, {valid_hi}]")]
    IntervalOutsideValidRange { lo: f64, hi: f64, valid_lo: f64, valid_hi: f64 },

    #[error("threshold {value} outside the valid range [{lo}, {hi}] for {tpms}")]
    ThresholdOutOfRange { tpms: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("control coefficient ({i}, {j}, {k}) receives zero total basis weight from the grid")]
    ZeroWeightControlPoint { i: usize, j: usize, k: usize },

    #[error("control grid {0}x{1}x{2} exceeds the data grid resolution {3}x{4}x{5}")]
    ControlGridTooFine(usize, usize, usize, usize, usize, usize),

    #[error("edit index ({i}, {j}, {k}) outside grid resolution {ru}x{rv}x{rw}")]
    EditIndexOutOfRange { i: usize, j: usize, k: usize, ru: usize, rv: usize, rw: usize },

    #[error("mesh closure failed: {count} unpaired edges (first: {first:?})")]
    ClosureFailed { count: usize, first: Vec<(u32, u32)> },

    #[error("operation requires a closed mesh, but the mesh has {boundary_edges} boundary edges")]
    OpenMesh { boundary_edges: usize },

    #[error("mesh vertex {index} at ({x}, {y}, {z}) lies outside the unit parameter cube")]
    VertexOutsideDomain { index: usize, x: f64, y: f64, z: f64 },

    #[error("cannot write an empty mesh")]
    EmptyMesh,

    #[error("parse error in {section} (line {line}): {message}")]
    Parse { section: &'static str, line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
