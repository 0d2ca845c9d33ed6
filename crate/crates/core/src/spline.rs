//! Trivariate B-spline solids and scalar fields over the unit cube.

use nalgebra::{Matrix3, Point3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::knots::KnotVector;

/// Only tricubic volumes are supported.
pub const DEGREE: usize = 3;

/// One of the six boundary faces of the parameter cube.
///
/// Each face carries a fixed surface frame `(s, t)` chosen so that the
/// cross product of the `s` and `t` tangents points out of the cube. All
/// boundary operations (curvature sampling, closure triangulation) share
/// these frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    UMin,
    UMax,
    VMin,
    VMax,
    WMin,
    WMax,
}

impl Face {
    pub const ALL: [Face; 6] =
        [Face::UMin, Face::UMax, Face::VMin, Face::VMax, Face::WMin, Face::WMax];

    /// Parameter axis held constant on this face (0 = u, 1 = v, 2 = w).
    pub fn fixed_axis(&self) -> usize {
        match self {
            Face::UMin | Face::UMax => 0,
            Face::VMin | Face::VMax => 1,
            Face::WMin | Face::WMax => 2,
        }
    }

    /// Whether the fixed axis sits at 1 rather than 0.
    pub fn at_max(&self) -> bool {
        matches!(self, Face::UMax | Face::VMax | Face::WMax)
    }

    /// `(s_axis, t_axis)` of the outward-oriented surface frame.
    pub fn frame_axes(&self) -> (usize, usize) {
        match self {
            Face::UMin => (2, 1),
            Face::UMax => (1, 2),
            Face::VMin => (0, 2),
            Face::VMax => (2, 0),
            Face::WMin => (1, 0),
            Face::WMax => (0, 1),
        }
    }

    /// Trivariate parameter of the surface point `(s, t)`.
    pub fn param(&self, s: f64, t: f64) -> (f64, f64, f64) {
        let mut p = [0.0f64; 3];
        p[self.fixed_axis()] = if self.at_max() { 1.0 } else { 0.0 };
        let (sa, ta) = self.frame_axes();
        p[sa] = s;
        p[ta] = t;
        (p[0], p[1], p[2])
    }

    pub fn name(&self) -> &'static str {
        match self {
            Face::UMin => "u-min",
            Face::UMax => "u-max",
            Face::VMin => "v-min",
            Face::VMax => "v-max",
            Face::WMin => "w-min",
            Face::WMax => "w-max",
        }
    }
}

impl std::fmt::Display for Face {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Value and first partial derivatives of a solid at one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct FirstPartials {
    pub p: Point3<f64>,
    pub du: Vector3<f64>,
    pub dv: Vector3<f64>,
    pub dw: Vector3<f64>,
}

struct SecondPartials {
    du: Vector3<f64>,
    dv: Vector3<f64>,
    dw: Vector3<f64>,
    duu: Vector3<f64>,
    dvv: Vector3<f64>,
    dww: Vector3<f64>,
    duv: Vector3<f64>,
    duw: Vector3<f64>,
    dvw: Vector3<f64>,
}

fn check_domain(axis: char, value: f64, kv: &KnotVector) -> Result<()> {
    let (lo, hi) = kv.domain();
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::ParameterOutOfDomain { axis, value, lo, hi })
    }
}

fn validate_knots_and_dims(
    knots: &[KnotVector; 3],
    dims: (usize, usize, usize),
) -> Result<()> {
    let degrees = (knots[0].degree(), knots[1].degree(), knots[2].degree());
    if degrees != (DEGREE, DEGREE, DEGREE) {
        return Err(Error::UnsupportedDegree(degrees.0, degrees.1, degrees.2));
    }
    let want = (knots[0].num_basis(), knots[1].num_basis(), knots[2].num_basis());
    if dims != want {
        return Err(Error::GridKnotMismatch {
            got_u: dims.0,
            got_v: dims.1,
            got_w: dims.2,
            want_u: want.0,
            want_v: want.1,
            want_w: want.2,
        });
    }
    Ok(())
}

/// Tensor-product contraction of the 4x4x4 local coefficient block.
///
/// `fetch(i, j, k)` reads the control value at global indices; the
/// summation order (k innermost, then v, then u) is fixed so that grid
/// and pointwise evaluation produce identical bits.
#[inline]
#[allow(clippy::needless_range_loop)]
pub(crate) fn contract<T, F>(
    (su, wu): (usize, &[f64; 4]),
    (sv, wv): (usize, &[f64; 4]),
    (sw, ww): (usize, &[f64; 4]),
    zero: T,
    fetch: F,
) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    F: Fn(usize, usize, usize) -> T,
{
    let (i0, j0, k0) = (su - DEGREE, sv - DEGREE, sw - DEGREE);
    let mut acc = zero;
    for a in 0..4 {
        let mut acc_v = zero;
        for b in 0..4 {
            let mut acc_w = zero;
            for c in 0..4 {
                acc_w = acc_w + fetch(i0 + a, j0 + b, k0 + c) * ww[c];
            }
            acc_v = acc_v + acc_w * wv[b];
        }
        acc = acc + acc_v * wu[a];
    }
    acc
}

/// A tricubic tensor-product B-spline volume mapping the unit parameter
/// cube into physical space.
#[derive(Debug, Clone, PartialEq)]
pub struct TrivariateBSplineSolid {
    knots: [KnotVector; 3],
    control: Grid3<Point3<f64>>,
}

impl TrivariateBSplineSolid {
    pub fn new(knots: [KnotVector; 3], control: Grid3<Point3<f64>>) -> Result<Self> {
        validate_knots_and_dims(&knots, control.dims())?;
        for (flat, p) in control.as_slice().iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                let (i, j, k) = control.unindex(flat);
                let bad = [p.x, p.y, p.z].into_iter().find(|c| !c.is_finite()).unwrap();
                return Err(Error::NonFiniteValue { i, j, k, value: bad });
            }
        }
        Ok(Self { knots, control })
    }

    /// The solid that maps the unit cube to itself, built by placing
    /// control points at the Greville abscissae of uniform clamped knots.
    pub fn identity(num_basis: (usize, usize, usize)) -> Result<Self> {
        let knots = [
            KnotVector::uniform_clamped(num_basis.0, DEGREE)?,
            KnotVector::uniform_clamped(num_basis.1, DEGREE)?,
            KnotVector::uniform_clamped(num_basis.2, DEGREE)?,
        ];
        let (gu, gv, gw) =
            (knots[0].greville_all(), knots[1].greville_all(), knots[2].greville_all());
        let control =
            Grid3::from_fn(num_basis, |i, j, k| Point3::new(gu[i], gv[j], gw[k]));
        Self::new(knots, control)
    }

    #[inline]
    pub fn knots(&self) -> &[KnotVector; 3] {
        &self.knots
    }

    #[inline]
    pub fn control(&self) -> &Grid3<Point3<f64>> {
        &self.control
    }

    pub fn num_control(&self) -> (usize, usize, usize) {
        self.control.dims()
    }

    fn check_params(&self, u: f64, v: f64, w: f64) -> Result<()> {
        check_domain('u', u, &self.knots[0])?;
        check_domain('v', v, &self.knots[1])?;
        check_domain('w', w, &self.knots[2])
    }

    /// Physical point at parameters `(u, v, w)`.
    pub fn point(&self, u: f64, v: f64, w: f64) -> Result<Point3<f64>> {
        self.check_params(u, v, w)?;
        let mut tu = (0usize, [0.0f64; 4]);
        let mut tv = tu;
        let mut tw = tu;
        tu.0 = self.knots[0].find_span(u);
        tv.0 = self.knots[1].find_span(v);
        tw.0 = self.knots[2].find_span(w);
        self.knots[0].basis_funs_into(tu.0, u, &mut tu.1);
        self.knots[1].basis_funs_into(tv.0, v, &mut tv.1);
        self.knots[2].basis_funs_into(tw.0, w, &mut tw.1);
        let v3 = contract(
            (tu.0, &tu.1),
            (tv.0, &tv.1),
            (tw.0, &tw.1),
            Vector3::zeros(),
            |i, j, k| self.control.get(i, j, k).coords,
        );
        Ok(Point3::from(v3))
    }

    /// Point and first partial derivatives at `(u, v, w)`.
    pub fn partials(&self, u: f64, v: f64, w: f64) -> Result<FirstPartials> {
        self.check_params(u, v, w)?;
        let spans = [
            self.knots[0].find_span(u),
            self.knots[1].find_span(v),
            self.knots[2].find_span(w),
        ];
        let du = self.knots[0].basis_funs_ders(spans[0], u, 1);
        let dv = self.knots[1].basis_funs_ders(spans[1], v, 1);
        let dw = self.knots[2].basis_funs_ders(spans[2], w, 1);
        let row = |d: &[Vec<f64>], order: usize| -> [f64; 4] {
            [d[order][0], d[order][1], d[order][2], d[order][3]]
        };
        let fetch = |i: usize, j: usize, k: usize| self.control.get(i, j, k).coords;
        let term = |a: usize, b: usize, c: usize| {
            contract(
                (spans[0], &row(&du, a)),
                (spans[1], &row(&dv, b)),
                (spans[2], &row(&dw, c)),
                Vector3::zeros(),
                fetch,
            )
        };
        Ok(FirstPartials {
            p: Point3::from(term(0, 0, 0)),
            du: term(1, 0, 0),
            dv: term(0, 1, 0),
            dw: term(0, 0, 1),
        })
    }

    fn second_partials(&self, u: f64, v: f64, w: f64) -> Result<SecondPartials> {
        self.check_params(u, v, w)?;
        let spans = [
            self.knots[0].find_span(u),
            self.knots[1].find_span(v),
            self.knots[2].find_span(w),
        ];
        let du = self.knots[0].basis_funs_ders(spans[0], u, 2);
        let dv = self.knots[1].basis_funs_ders(spans[1], v, 2);
        let dw = self.knots[2].basis_funs_ders(spans[2], w, 2);
        let row = |d: &[Vec<f64>], order: usize| -> [f64; 4] {
            [d[order][0], d[order][1], d[order][2], d[order][3]]
        };
        let fetch = |i: usize, j: usize, k: usize| self.control.get(i, j, k).coords;
        let term = |a: usize, b: usize, c: usize| {
            contract(
                (spans[0], &row(&du, a)),
                (spans[1], &row(&dv, b)),
                (spans[2], &row(&dw, c)),
                Vector3::zeros(),
                fetch,
            )
        };
        Ok(SecondPartials {
            du: term(1, 0, 0),
            dv: term(0, 1, 0),
            dw: term(0, 0, 1),
            duu: term(2, 0, 0),
            dvv: term(0, 2, 0),
            dww: term(0, 0, 2),
            duv: term(1, 1, 0),
            duw: term(1, 0, 1),
            dvw: term(0, 1, 1),
        })
    }

    /// Determinant of the Jacobian `[dP/du  dP/dv  dP/dw]` at `(u, v, w)`.
    ///
    /// Positive everywhere means the map is locally injective and
    /// orientation-preserving.
    pub fn jacobian_det(&self, u: f64, v: f64, w: f64) -> Result<f64> {
        let d = self.partials(u, v, w)?;
        Ok(Matrix3::from_columns(&[d.du, d.dv, d.dw]).determinant())
    }

    /// Gaussian and mean curvature `(K, H)` of a boundary face at surface
    /// coordinates `(s, t)`, with the normal taken along the outward
    /// frame of the face.
    pub fn boundary_curvature(&self, face: Face, s: f64, t: f64) -> Result<(f64, f64)> {
        let (u, v, w) = face.param(s, t);
        let d = self.second_partials(u, v, w)?;
        let pick1 = |axis: usize| match axis {
            0 => d.du,
            1 => d.dv,
            _ => d.dw,
        };
        let pick2 = |a: usize, b: usize| match (a.min(b), a.max(b)) {
            (0, 0) => d.duu,
            (1, 1) => d.dvv,
            (2, 2) => d.dww,
            (0, 1) => d.duv,
            (0, 2) => d.duw,
            _ => d.dvw,
        };
        let (sa, ta) = face.frame_axes();
        let rs = pick1(sa);
        let rt = pick1(ta);
        let rss = pick2(sa, sa);
        let rst = pick2(sa, ta);
        let rtt = pick2(ta, ta);

        let e = rs.dot(&rs);
        let f = rs.dot(&rt);
        let g = rt.dot(&rt);
        let cross = rs.cross(&rt);
        let n2 = cross.norm_squared();
        // By Lagrange's identity n2 == EG - F^2; a vanishing value means
        // the tangents are parallel or zero and no normal exists. The
        // negated comparison also routes NaN into the error arm.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(n2 > (e * g).max(f64::MIN_POSITIVE) * 1e-20) {
            return Err(Error::DegenerateSurfacePoint { face: face.name(), s, t });
        }
        let n = cross / n2.sqrt();
        let l = rss.dot(&n);
        let m = rst.dot(&n);
        let nn = rtt.dot(&n);
        let denom = e * g - f * f;
        let gaussian = (l * nn - m * m) / denom;
        let mean = (e * nn - 2.0 * f * m + g * l) / (2.0 * denom);
        Ok((gaussian, mean))
    }

    /// Evaluates the solid at the tensor product of the parameter lists.
    ///
    /// Equivalent to calling [`point`](Self::point) at every combination,
    /// bit for bit, but with per-axis basis tables computed once.
    pub fn eval_on_grid(&self, us: &[f64], vs: &[f64], ws: &[f64]) -> Result<Grid3<Point3<f64>>> {
        for &u in us {
            check_domain('u', u, &self.knots[0])?;
        }
        for &v in vs {
            check_domain('v', v, &self.knots[1])?;
        }
        for &w in ws {
            check_domain('w', w, &self.knots[2])?;
        }
        let tu = self.knots[0].cubic_tables(us);
        let tv = self.knots[1].cubic_tables(vs);
        let tw = self.knots[2].cubic_tables(ws);
        let fetch = |i: usize, j: usize, k: usize| self.control.get(i, j, k).coords;
        let planes: Vec<Vec<Point3<f64>>> = tu
            .par_iter()
            .map(|eu| {
                let mut plane = Vec::with_capacity(tv.len() * tw.len());
                for ev in &tv {
                    for ew in &tw {
                        let v3 = contract(
                            (eu.0, &eu.1),
                            (ev.0, &ev.1),
                            (ew.0, &ew.1),
                            Vector3::zeros(),
                            fetch,
                        );
                        plane.push(Point3::from(v3));
                    }
                }
                plane
            })
            .collect();
        Ok(Grid3::from_vec(
            (us.len(), vs.len(), ws.len()),
            planes.into_iter().flatten().collect(),
        ))
    }
}

/// A tricubic tensor-product B-spline scalar field over the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct TrivariateScalarField {
    knots: [KnotVector; 3],
    coeffs: Grid3<f64>,
}

impl TrivariateScalarField {
    pub fn new(knots: [KnotVector; 3], coeffs: Grid3<f64>) -> Result<Self> {
        validate_knots_and_dims(&knots, coeffs.dims())?;
        for (flat, &c) in coeffs.as_slice().iter().enumerate() {
            if !c.is_finite() {
                let (i, j, k) = coeffs.unindex(flat);
                return Err(Error::NonFiniteValue { i, j, k, value: c });
            }
        }
        Ok(Self { knots, coeffs })
    }

    /// Field with every coefficient equal to `value`, which evaluates to
    /// `value` everywhere.
    pub fn constant(num_basis: (usize, usize, usize), value: f64) -> Result<Self> {
        let knots = [
            KnotVector::uniform_clamped(num_basis.0, DEGREE)?,
            KnotVector::uniform_clamped(num_basis.1, DEGREE)?,
            KnotVector::uniform_clamped(num_basis.2, DEGREE)?,
        ];
        Self::new(knots, Grid3::filled(num_basis, value))
    }

    #[inline]
    pub fn knots(&self) -> &[KnotVector; 3] {
        &self.knots
    }

    #[inline]
    pub fn coeffs(&self) -> &Grid3<f64> {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut Grid3<f64> {
        &mut self.coeffs
    }

    pub fn num_coeffs(&self) -> (usize, usize, usize) {
        self.coeffs.dims()
    }

    /// Scalar value at parameters `(u, v, w)`.
    pub fn value(&self, u: f64, v: f64, w: f64) -> Result<f64> {
        check_domain('u', u, &self.knots[0])?;
        check_domain('v', v, &self.knots[1])?;
        check_domain('w', w, &self.knots[2])?;
        let su = self.knots[0].find_span(u);
        let sv = self.knots[1].find_span(v);
        let sw = self.knots[2].find_span(w);
        let mut wu = [0.0f64; 4];
        let mut wv = [0.0f64; 4];
        let mut ww = [0.0f64; 4];
        self.knots[0].basis_funs_into(su, u, &mut wu);
        self.knots[1].basis_funs_into(sv, v, &mut wv);
        self.knots[2].basis_funs_into(sw, w, &mut ww);
        Ok(contract((su, &wu), (sv, &wv), (sw, &ww), 0.0, |i, j, k| {
            *self.coeffs.get(i, j, k)
        }))
    }

    /// Evaluates the field at the tensor product of the parameter lists;
    /// bit-identical to pointwise [`value`](Self::value) calls.
    pub fn eval_on_grid(&self, us: &[f64], vs: &[f64], ws: &[f64]) -> Result<Grid3<f64>> {
        for &u in us {
            check_domain('u', u, &self.knots[0])?;
        }
        for &v in vs {
            check_domain('v', v, &self.knots[1])?;
        }
        for &w in ws {
            check_domain('w', w, &self.knots[2])?;
        }
        let tu = self.knots[0].cubic_tables(us);
        let tv = self.knots[1].cubic_tables(vs);
        let tw = self.knots[2].cubic_tables(ws);
        let planes: Vec<Vec<f64>> = tu
            .par_iter()
            .map(|eu| {
                let mut plane = Vec::with_capacity(tv.len() * tw.len());
                for ev in &tv {
                    for ew in &tw {
                        plane.push(contract(
                            (eu.0, &eu.1),
                            (ev.0, &ev.1),
                            (ew.0, &ew.1),
                            0.0,
                            |i, j, k| *self.coeffs.get(i, j, k),
                        ));
                    }
                }
                plane
            })
            .collect();
        Ok(Grid3::from_vec(
            (us.len(), vs.len(), ws.len()),
            planes.into_iter().flatten().collect(),
        ))
    }
}
