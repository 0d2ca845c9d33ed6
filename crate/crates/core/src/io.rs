//! Plain-text TDF documents, solid inputs, and STL export.
//!
//! The TDF format is a line-oriented ASCII file with eleven fixed sections,
//! each introduced by a `#` header. Parsing is whitespace-tolerant and
//! ignores free-form comment lines, but the canonical section headers must
//! appear in order. Numbers are written with 17 significant digits so that
//! reading a written file reproduces every 64-bit float bit-exactly.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::knots::KnotVector;
use crate::mesh::{Space, TriangleMesh};
use crate::spline::{TrivariateBSplineSolid, TrivariateScalarField, DEGREE};
use crate::tpms::PeriodCoefficients;

const H_PERIODS: &str = "#period coefficients(wx,wy,wz)";
const H_TDF_RES: &str = "#resolution of control grid of TDF";
const H_TDF_CTRL: &str = "#control points of TDF";
const H_TDF_KNOTS: [&str; 3] = [
    "#knot vector in u-direction of TDF",
    "#knot vector in v-direction of TDF",
    "#knot vector in w-direction of TDF",
];
const H_TBSS_RES: &str = "#resolution of control grid of TBSS";
const H_TBSS_CTRL: &str = "#control points of TBSS";
const H_TBSS_KNOTS: [&str; 3] = [
    "#knot vector in u-direction of TBSS",
    "#knot vector in v-direction of TBSS",
    "#knot vector in w-direction of TBSS",
];

fn canonical_headers() -> [&'static str; 11] {
    [
        H_PERIODS,
        H_TDF_RES,
        H_TDF_CTRL,
        H_TDF_KNOTS[0],
        H_TDF_KNOTS[1],
        H_TDF_KNOTS[2],
        H_TBSS_RES,
        H_TBSS_CTRL,
        H_TBSS_KNOTS[0],
        H_TBSS_KNOTS[1],
        H_TBSS_KNOTS[2],
    ]
}

/// A threshold distribution field bundled with the period coefficients and
/// the solid it parameterizes: everything needed to regenerate a scaffold.
#[derive(Debug, Clone)]
pub struct TdfDocument {
    pub periods: PeriodCoefficients,
    pub tdf: TrivariateScalarField,
    pub solid: TrivariateBSplineSolid,
}

/// Serializes a document in the canonical section order.
pub fn write_tdf<W: Write>(doc: &TdfDocument, out: &mut W) -> Result<()> {
    writeln!(out, "{H_PERIODS}")?;
    writeln!(out, "{:.16e} {:.16e} {:.16e}", doc.periods.x, doc.periods.y, doc.periods.z)?;

    let (ru, rv, rw) = doc.tdf.coeffs().dims();
    writeln!(out, "{H_TDF_RES}")?;
    writeln!(out, "{ru} {rv} {rw}")?;
    writeln!(out, "{H_TDF_CTRL}")?;
    for value in doc.tdf.coeffs().as_slice() {
        writeln!(out, "{value:.16e}")?;
    }
    for (header, knots) in H_TDF_KNOTS.iter().zip(doc.tdf.knots()) {
        writeln!(out, "{header}")?;
        write_knot_line(out, knots)?;
    }

    write_tbss_sections(&doc.solid, out)
}

/// Serializes a solid alone: the TBSS half of the TDF format.
pub fn write_tbss<W: Write>(solid: &TrivariateBSplineSolid, out: &mut W) -> Result<()> {
    write_tbss_sections(solid, out)
}

fn write_tbss_sections<W: Write>(solid: &TrivariateBSplineSolid, out: &mut W) -> Result<()> {
    let (ru, rv, rw) = solid.control().dims();
    writeln!(out, "{H_TBSS_RES}")?;
    writeln!(out, "{ru} {rv} {rw}")?;
    writeln!(out, "{H_TBSS_CTRL}")?;
    for p in solid.control().as_slice() {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
    }
    for (header, knots) in H_TBSS_KNOTS.iter().zip(solid.knots()) {
        writeln!(out, "{header}")?;
        write_knot_line(out, knots)?;
    }
    Ok(())
}

fn write_knot_line<W: Write>(out: &mut W, knots: &KnotVector) -> Result<()> {
    let mut first = true;
    for &knot in knots.knots() {
        if !first {
            write!(out, " ")?;
        }
        write!(out, "{knot:.16e}")?;
        first = false;
    }
    writeln!(out)?;
    Ok(())
}

// A pre-tokenized view of the input: canonical section headers interleaved
// with numeric tokens. Blank lines and non-canonical comment lines are
// dropped, which makes the parser insensitive to free-form comments while
// still enforcing section order.
enum Item<'a> {
    Header(usize, &'static str),
    Token(usize, &'a str),
}

struct Reader<'a> {
    items: Vec<Item<'a>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        let headers = canonical_headers();
        let mut items = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.trim_end_matches('\r').trim();
            if line.is_empty() {
                continue;
            }
            if let Some(stripped) = line.strip_prefix('#') {
                let normalized = format!("#{}", stripped.trim());
                if let Some(&header) = headers.iter().find(|&&h| h == normalized) {
                    items.push(Item::Header(line_no, header));
                }
                continue;
            }
            for token in line.split_whitespace() {
                items.push(Item::Token(line_no, token));
            }
        }
        Self { items, pos: 0, last_line }
    }

    fn expect_header(&mut self, want: &'static str) -> Result<()> {
        match self.items.get(self.pos) {
            Some(&Item::Header(_, found)) if found == want => {
                self.pos += 1;
                Ok(())
            }
            Some(&Item::Header(line, found)) => Err(Error::Parse {
                section: want,
                line,
                message: format!("expected section header '{want}', found '{found}'"),
            }),
            Some(&Item::Token(line, token)) => Err(Error::Parse {
                section: want,
                line,
                message: format!("expected section header '{want}', found data '{token}'"),
            }),
            None => Err(Error::Parse {
                section: want,
                line: self.last_line,
                message: format!("file ends before section '{want}'"),
            }),
        }
    }

    fn read_f64s(&mut self, count: usize, section: &'static str) -> Result<Vec<f64>> {
        let mut values = Vec::with_capacity(count);
        while values.len() < count {
            match self.items.get(self.pos) {
                Some(&Item::Token(line, token)) => {
                    let value: f64 = token.parse().map_err(|_| Error::Parse {
                        section,
                        line,
                        message: format!("invalid number '{token}'"),
                    })?;
                    if !value.is_finite() {
                        return Err(Error::Parse {
                            section,
                            line,
                            message: format!("non-finite value '{token}'"),
                        });
                    }
                    values.push(value);
                    self.pos += 1;
                }
                Some(&Item::Header(line, _)) => {
                    return Err(Error::Parse {
                        section,
                        line,
                        message: format!(
                            "expected {count} values, found only {}",
                            values.len()
                        ),
                    });
                }
                None => {
                    return Err(Error::Parse {
                        section,
                        line: self.last_line,
                        message: format!(
                            "expected {count} values, file ends after {}",
                            values.len()
                        ),
                    });
                }
            }
        }
        Ok(values)
    }

    fn read_resolution(&mut self, section: &'static str) -> Result<(usize, usize, usize)> {
        let mut dims = [0usize; 3];
        for dim in &mut dims {
            match self.items.get(self.pos) {
                Some(&Item::Token(line, token)) => {
                    *dim = token.parse().map_err(|_| Error::Parse {
                        section,
                        line,
                        message: format!("invalid grid dimension '{token}'"),
                    })?;
                    self.pos += 1;
                }
                Some(&Item::Header(line, _)) => {
                    return Err(Error::Parse {
                        section,
                        line,
                        message: "expected three grid dimensions".into(),
                    });
                }
                None => {
                    return Err(Error::Parse {
                        section,
                        line: self.last_line,
                        message: "file ends inside the resolution section".into(),
                    });
                }
            }
        }
        Ok((dims[0], dims[1], dims[2]))
    }

    fn current_line(&self) -> usize {
        match self.items.get(self.pos) {
            Some(&Item::Header(line, _)) | Some(&Item::Token(line, _)) => line,
            None => self.last_line,
        }
    }

    fn finish(&self) -> Result<()> {
        match self.items.get(self.pos) {
            None => Ok(()),
            Some(&Item::Token(line, token)) => Err(Error::Parse {
                section: "end of file",
                line,
                message: format!("unexpected trailing data '{token}'"),
            }),
            Some(&Item::Header(line, found)) => Err(Error::Parse {
                section: "end of file",
                line,
                message: format!("unexpected extra section '{found}'"),
            }),
        }
    }

    fn read_knots(
        &mut self,
        header: &'static str,
        control_count: usize,
    ) -> Result<KnotVector> {
        self.expect_header(header)?;
        let line = self.current_line();
        // Cubic B-splines pair r control points with r + 4 knots.
        let values = self.read_f64s(control_count + DEGREE + 1, header)?;
        KnotVector::new(DEGREE, values).map_err(|err| Error::Parse {
            section: header,
            line,
            message: err.to_string(),
        })
    }
}

/// Parses a TDF document written by [`write_tdf`] (or by hand, following
/// the same section order).
pub fn read_tdf(text: &str) -> Result<TdfDocument> {
    let mut reader = Reader::new(text);

    reader.expect_header(H_PERIODS)?;
    let p = reader.read_f64s(3, H_PERIODS)?;
    let periods = PeriodCoefficients::new(p[0], p[1], p[2]);

    reader.expect_header(H_TDF_RES)?;
    let dims = reader.read_resolution(H_TDF_RES)?;
    reader.expect_header(H_TDF_CTRL)?;
    let coeffs = reader.read_f64s(dims.0 * dims.1 * dims.2, H_TDF_CTRL)?;
    let knots = [
        reader.read_knots(H_TDF_KNOTS[0], dims.0)?,
        reader.read_knots(H_TDF_KNOTS[1], dims.1)?,
        reader.read_knots(H_TDF_KNOTS[2], dims.2)?,
    ];
    let tdf = TrivariateScalarField::new(knots, Grid3::from_vec(dims, coeffs))?;

    let solid = read_tbss_sections(&mut reader)?;
    reader.finish()?;
    Ok(TdfDocument { periods, tdf, solid })
}

/// Parses a solid stored as the TBSS half of the TDF format.
pub fn read_tbss(text: &str) -> Result<TrivariateBSplineSolid> {
    let mut reader = Reader::new(text);
    let solid = read_tbss_sections(&mut reader)?;
    reader.finish()?;
    Ok(solid)
}

fn read_tbss_sections(reader: &mut Reader<'_>) -> Result<TrivariateBSplineSolid> {
    reader.expect_header(H_TBSS_RES)?;
    let dims = reader.read_resolution(H_TBSS_RES)?;
    reader.expect_header(H_TBSS_CTRL)?;
    let raw = reader.read_f64s(dims.0 * dims.1 * dims.2 * 3, H_TBSS_CTRL)?;
    let control = Grid3::from_vec(
        dims,
        raw.chunks_exact(3).map(|c| Point3::new(c[0], c[1], c[2])).collect(),
    );
    let knots = [
        reader.read_knots(H_TBSS_KNOTS[0], dims.0)?,
        reader.read_knots(H_TBSS_KNOTS[1], dims.1)?,
        reader.read_knots(H_TBSS_KNOTS[2], dims.2)?,
    ];
    TrivariateBSplineSolid::new(knots, control)
}

/// STL output flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StlMode {
    Binary,
    Ascii,
}

impl StlMode {
    pub fn from_name(name: &str) -> Option<StlMode> {
        match name.to_ascii_lowercase().as_str() {
            "binary" => Some(StlMode::Binary),
            "ascii" => Some(StlMode::Ascii),
            _ => None,
        }
    }
}

fn triangle_corners(mesh: &TriangleMesh, tri: &[u32; 3]) -> [Point3<f64>; 3] {
    tri.map(|v| mesh.vertices[v as usize])
}

fn facet_normal(corners: &[Point3<f64>; 3]) -> Vector3<f64> {
    let n = (corners[1] - corners[0]).cross(&(corners[2] - corners[0]));
    let len = n.norm();
    if len > 0.0 {
        n / len
    } else {
        Vector3::zeros()
    }
}

/// Writes a mesh as STL. Binary output is exactly `84 + 50 * triangles`
/// bytes; facet normals are recomputed from the winding in both modes.
pub fn write_stl<W: Write>(mesh: &TriangleMesh, mode: StlMode, out: &mut W) -> Result<()> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    match mode {
        StlMode::Binary => {
            let mut header = [0u8; 80];
            let tag = b"binary STL scaffold mesh";
            header[..tag.len()].copy_from_slice(tag);
            out.write_all(&header)?;
            out.write_all(&(mesh.triangles.len() as u32).to_le_bytes())?;
            for tri in &mesh.triangles {
                let corners = triangle_corners(mesh, tri);
                let normal = facet_normal(&corners);
                for x in [normal.x, normal.y, normal.z] {
                    out.write_all(&(x as f32).to_le_bytes())?;
                }
                for p in corners {
                    for x in [p.x, p.y, p.z] {
                        out.write_all(&(x as f32).to_le_bytes())?;
                    }
                }
                out.write_all(&0u16.to_le_bytes())?;
            }
        }
        StlMode::Ascii => {
            writeln!(out, "solid scaffold")?;
            for tri in &mesh.triangles {
                let corners = triangle_corners(mesh, tri);
                let n = facet_normal(&corners);
                writeln!(out, "  facet normal {:.9e} {:.9e} {:.9e}", n.x, n.y, n.z)?;
                writeln!(out, "    outer loop")?;
                for p in corners {
                    writeln!(out, "      vertex {:.9e} {:.9e} {:.9e}", p.x, p.y, p.z)?;
                }
                writeln!(out, "    endloop")?;
                writeln!(out, "  endfacet")?;
            }
            writeln!(out, "endsolid scaffold")?;
        }
    }
    Ok(())
}

/// Reads binary or ASCII STL, detecting the flavor from the byte layout.
/// Coincident vertices are welded by exact position so the result is an
/// indexed mesh; degenerate facets are dropped.
pub fn read_stl(bytes: &[u8]) -> Result<TriangleMesh> {
    if bytes.len() >= 84 {
        let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        if bytes.len() == 84 + 50 * count {
            return read_binary_stl(bytes, count);
        }
    }
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Parse {
        section: "STL",
        line: 0,
        message: "neither a well-formed binary STL nor UTF-8 text".into(),
    })?;
    read_ascii_stl(text)
}

struct StlBuilder {
    ids: HashMap<(u64, u64, u64), u32>,
    mesh: TriangleMesh,
}

impl StlBuilder {
    fn new() -> Self {
        Self { ids: HashMap::new(), mesh: TriangleMesh::new(Space::Physical) }
    }

    fn push(&mut self, corners: [Point3<f64>; 3]) {
        let tri = corners.map(|p| {
            let key = (p.x.to_bits(), p.y.to_bits(), p.z.to_bits());
            *self.ids.entry(key).or_insert_with(|| {
                self.mesh.vertices.push(p);
                (self.mesh.vertices.len() - 1) as u32
            })
        });
        if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
            self.mesh.triangles.push(tri);
        }
    }
}

fn read_binary_stl(bytes: &[u8], count: usize) -> Result<TriangleMesh> {
    let mut builder = StlBuilder::new();
    for t in 0..count {
        let base = 84 + 50 * t + 12; // skip the stored normal
        let mut corners = [Point3::origin(); 3];
        for (v, corner) in corners.iter_mut().enumerate() {
            let at = base + 12 * v;
            let coord = |o: usize| {
                f32::from_le_bytes(bytes[at + 4 * o..at + 4 * o + 4].try_into().unwrap()) as f64
            };
            *corner = Point3::new(coord(0), coord(1), coord(2));
        }
        builder.push(corners);
    }
    Ok(builder.mesh)
}

fn read_ascii_stl(text: &str) -> Result<TriangleMesh> {
    let fail = |line: usize, message: String| Error::Parse { section: "STL", line, message };
    let mut builder = StlBuilder::new();
    let mut corners: Vec<Point3<f64>> = Vec::with_capacity(3);
    let mut saw_solid = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            None => {}
            Some("solid") => saw_solid = true,
            Some("facet") | Some("outer") | Some("endloop") => {}
            Some("vertex") => {
                let mut coords = [0.0f64; 3];
                for coord in &mut coords {
                    let token = tokens
                        .next()
                        .ok_or_else(|| fail(line_no, "vertex needs three coordinates".into()))?;
                    *coord = token
                        .parse::<f32>()
                        .map_err(|_| fail(line_no, format!("invalid coordinate '{token}'")))?
                        as f64;
                }
                corners.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("endfacet") => {
                if corners.len() != 3 {
                    return Err(fail(
                        line_no,
                        format!("facet has {} vertices, expected 3", corners.len()),
                    ));
                }
                builder.push([corners[0], corners[1], corners[2]]);
                corners.clear();
            }
            Some("endsolid") => break,
            Some(other) => {
                return Err(fail(line_no, format!("unexpected token '{other}'")));
            }
        }
    }
    if !saw_solid {
        return Err(fail(1, "missing 'solid' header".into()));
    }
    Ok(builder.mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lspia::lspia_fit;
    use crate::tdf::{prescribed_function, ParametricGrid};
    use approx::assert_abs_diff_eq;

    fn sample_document() -> TdfDocument {
        let base = ParametricGrid::zeros((12, 12, 12)).unwrap();
        let grid = prescribed_function(&base, |u, v, w| {
            0.3 + 0.1 * (std::f64::consts::TAU * u).cos() * v + 0.05 * w
        })
        .unwrap();
        let (tdf, _) = lspia_fit(&grid, (6, 5, 7), None, 100).unwrap();
        let solid = TrivariateBSplineSolid::identity((5, 6, 4)).unwrap();
        TdfDocument { periods: PeriodCoefficients::from_cells(2, 3, 4), tdf, solid }
    }

    fn minimal_document() -> TdfDocument {
        // The smallest legal cubic nets: 4 control points per direction.
        let base = ParametricGrid::zeros((4, 4, 4)).unwrap();
        let grid = prescribed_function(&base, |u, _, _| 0.2 + 0.1 * u).unwrap();
        let (tdf, _) = lspia_fit(&grid, (4, 4, 4), None, 50).unwrap();
        let solid = TrivariateBSplineSolid::identity((4, 4, 4)).unwrap();
        TdfDocument { periods: PeriodCoefficients::from_cells(1, 1, 1), tdf, solid }
    }

    fn documents_bit_equal(a: &TdfDocument, b: &TdfDocument) -> bool {
        let scalars_equal = |x: &[f64], y: &[f64]| {
            x.len() == y.len()
                && x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits())
        };
        scalars_equal(
            &[a.periods.x, a.periods.y, a.periods.z],
            &[b.periods.x, b.periods.y, b.periods.z],
        ) && a.tdf.coeffs().dims() == b.tdf.coeffs().dims()
            && scalars_equal(a.tdf.coeffs().as_slice(), b.tdf.coeffs().as_slice())
            && a.tdf
                .knots()
                .iter()
                .zip(b.tdf.knots())
                .all(|(p, q)| scalars_equal(p.knots(), q.knots()))
            && a.solid.control().dims() == b.solid.control().dims()
            && a.solid
                .control()
                .as_slice()
                .iter()
                .zip(b.solid.control().as_slice())
                .all(|(p, q)| {
                    p.x.to_bits() == q.x.to_bits()
                        && p.y.to_bits() == q.y.to_bits()
                        && p.z.to_bits() == q.z.to_bits()
                })
            && a.solid
                .knots()
                .iter()
                .zip(b.solid.knots())
                .all(|(p, q)| scalars_equal(p.knots(), q.knots()))
    }

    fn write_to_string(doc: &TdfDocument) -> String {
        let mut buffer = Vec::new();
        write_tdf(doc, &mut buffer).unwrap();
        String::from_utf8(buffer).unwrap()
    }

    #[test]
    fn first_data_line_is_the_period_triple() {
        let text = write_to_string(&minimal_document());
        let first_data = text.lines().find(|l| !l.trim_start().starts_with('#')).unwrap();
        assert_eq!(first_data.split_whitespace().count(), 3);
        let wx: f64 = first_data.split_whitespace().next().unwrap().parse().unwrap();
        assert_abs_diff_eq!(wx, std::f64::consts::TAU, epsilon = 1e-12);
    }

    #[test]
    fn tdf_round_trip_is_bit_exact_and_byte_stable() {
        for doc in [minimal_document(), sample_document()] {
            let text = write_to_string(&doc);
            let parsed = read_tdf(&text).unwrap();
            assert!(documents_bit_equal(&doc, &parsed));
            let again = write_to_string(&parsed);
            assert_eq!(text, again, "write-read-write must be byte-identical");
        }
    }

    #[test]
    fn comments_blank_lines_and_crlf_are_tolerated() {
        let doc = sample_document();
        let text = write_to_string(&doc);
        let mut noisy = String::from("# free comment\n\n");
        for line in text.lines() {
            noisy.push_str(line);
            noisy.push_str("\r\n");
            if line.starts_with('#') {
                noisy.push_str("# another remark\r\n");
            }
        }
        let parsed = read_tdf(&noisy).unwrap();
        assert!(documents_bit_equal(&doc, &parsed));
    }

    #[test]
    fn short_knot_vector_is_a_line_numbered_error() {
        let text = write_to_string(&sample_document());
        // Drop the last knot of the u-direction TDF knot vector.
        let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
        let header_at = lines.iter().position(|l| l == H_TDF_KNOTS[0]).unwrap();
        let knot_line = &mut lines[header_at + 1];
        *knot_line = knot_line.rsplit_once(' ').unwrap().0.to_owned();
        let err = read_tdf(&lines.join("\n")).unwrap_err();
        match err {
            Error::Parse { section, line, .. } => {
                assert_eq!(section, H_TDF_KNOTS[0]);
                assert!(line > header_at, "error should point at or after the knot data");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn reordered_sections_are_rejected() {
        let text = write_to_string(&sample_document());
        let lines: Vec<&str> = text.lines().collect();
        // Move the period section behind the TDF resolution section.
        let mut reordered = Vec::new();
        reordered.extend_from_slice(&lines[2..4]);
        reordered.extend_from_slice(&lines[0..2]);
        reordered.extend_from_slice(&lines[4..]);
        let err = read_tdf(&reordered.join("\n")).unwrap_err();
        match err {
            Error::Parse { section, line: 1, message } => {
                assert_eq!(section, H_PERIODS);
                assert!(message.contains(H_TDF_RES), "message was: {message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_numeric_token_is_reported() {
        let text = write_to_string(&minimal_document()).replace("4 4 4", "4 four 4");
        let err = read_tdf(&text).unwrap_err();
        assert!(matches!(err, Error::Parse { section, .. } if section == H_TDF_RES));
    }

    #[test]
    fn tbss_round_trip_preserves_linear_precision() {
        let solid = TrivariateBSplineSolid::identity((5, 4, 6)).unwrap();
        let mut buffer = Vec::new();
        write_tbss(&solid, &mut buffer).unwrap();
        let text = String::from_utf8(buffer.clone()).unwrap();
        let parsed = read_tbss(&text).unwrap();
        for (u, v, w) in [(0.0, 0.0, 0.0), (0.3, 0.7, 0.1), (1.0, 0.5, 0.9)] {
            let p = parsed.point(u, v, w).unwrap();
            assert_abs_diff_eq!(p.x, u, epsilon = 1e-12);
            assert_abs_diff_eq!(p.y, v, epsilon = 1e-12);
            assert_abs_diff_eq!(p.z, w, epsilon = 1e-12);
        }
        let mut again = Vec::new();
        write_tbss(&parsed, &mut again).unwrap();
        assert_eq!(buffer, again);
    }

    #[test]
    fn undersized_tbss_net_is_rejected() {
        let mut text = String::new();
        text.push_str(H_TBSS_RES);
        text.push_str("\n2 2 2\n");
        text.push_str(H_TBSS_CTRL);
        text.push('\n');
        for i in 0..8 {
            text.push_str(&format!("{0} {0} {0}\n", i as f64));
        }
        for header in H_TBSS_KNOTS {
            text.push_str(header);
            text.push_str("\n0 0 0 0 1 1\n");
        }
        let err = read_tbss(&text).unwrap_err();
        assert!(matches!(err, Error::Parse { section, .. } if section == H_TBSS_KNOTS[0]));
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let mut text = write_to_string(&minimal_document());
        text.push_str("42\n");
        let err = read_tdf(&text).unwrap_err();
        assert!(matches!(err, Error::Parse { section: "end of file", .. }));
    }

    #[test]
    fn binary_stl_size_formula_holds() {
        let mut mesh = TriangleMesh::new(Space::Physical);
        mesh.vertices = vec![
            Point3::origin(),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        mesh.triangles = vec![[0, 1, 2]];
        let mut buffer = Vec::new();
        write_stl(&mesh, StlMode::Binary, &mut buffer).unwrap();
        assert_eq!(buffer.len(), 134);

        mesh.triangles = vec![[0, 1, 2], [0, 1, 3], [0, 2, 3]];
        buffer.clear();
        write_stl(&mesh, StlMode::Binary, &mut buffer).unwrap();
        assert_eq!(buffer.len(), 84 + 50 * 3);
    }

    #[test]
    fn empty_mesh_cannot_be_written() {
        let mesh = TriangleMesh::new(Space::Physical);
        for mode in [StlMode::Binary, StlMode::Ascii] {
            let err = write_stl(&mesh, mode, &mut Vec::new()).unwrap_err();
            assert!(matches!(err, Error::EmptyMesh));
        }
    }

    fn tetrahedron_mesh() -> TriangleMesh {
        let mut mesh = TriangleMesh::new(Space::Physical);
        mesh.vertices = vec![
            Point3::origin(),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        mesh.triangles = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
        mesh
    }

    #[test]
    fn binary_stl_round_trips_topology_and_geometry() {
        let mesh = tetrahedron_mesh();
        let mut buffer = Vec::new();
        write_stl(&mesh, StlMode::Binary, &mut buffer).unwrap();
        let back = read_stl(&buffer).unwrap();
        assert_eq!(back.num_vertices(), 4);
        assert_eq!(back.num_triangles(), 4);
        assert!(back.is_closed());
        assert_abs_diff_eq!(back.signed_volume(), 1.0 / 6.0, epsilon = 1e-7);
    }

    #[test]
    fn ascii_stl_round_trips_topology_and_geometry() {
        let mesh = tetrahedron_mesh();
        let mut buffer = Vec::new();
        write_stl(&mesh, StlMode::Ascii, &mut buffer).unwrap();
        let text = String::from_utf8(buffer.clone()).unwrap();
        assert!(text.starts_with("solid"));
        assert!(text.contains("facet normal"));
        assert!(text.trim_end().ends_with("endsolid scaffold"));
        let back = read_stl(&buffer).unwrap();
        assert_eq!(back.num_triangles(), 4);
        assert!(back.is_closed());
        assert_abs_diff_eq!(back.signed_volume(), 1.0 / 6.0, epsilon = 1e-7);
    }

    #[test]
    fn malformed_ascii_stl_is_reported() {
        let err = read_stl(b"solid s\nfacet normal 0 0 1\nouter loop\nvertex 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { section: "STL", .. }));
    }

    #[test]
    fn benchmark_scale_document_is_under_two_megabytes() {
        let base = ParametricGrid::zeros((24, 24, 24)).unwrap();
        let grid = prescribed_function(&base, |u, v, w| {
            0.3 + 0.05 * ((std::f64::consts::TAU * u).cos() + v * w)
        })
        .unwrap();
        let (tdf, _) = lspia_fit(&grid, (20, 20, 20), None, 100).unwrap();
        let solid = TrivariateBSplineSolid::identity((20, 20, 20)).unwrap();
        let doc = TdfDocument { periods: PeriodCoefficients::from_cells(4, 4, 4), tdf, solid };
        let text = write_to_string(&doc);
        assert!(
            (500_000..1_500_000).contains(&text.len()),
            "document size {} outside the expected window",
            text.len()
        );
    }
}
