//! Least-squares progressive iterative approximation (LSPIA) fitting of
//! a discrete TDF into a trivariate B-spline scalar field.
//!
//! Each round computes the difference between the grid data and the
//! current field at every vertex, averages those differences onto each
//! control coefficient weighted by its basis product, and adds the
//! averages to the coefficients. The fixed point is the least-squares
//! fit of the data; the iteration needs no linear solver and supports
//! updating only the coefficients touched by a local edit.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::knots::KnotVector;
use crate::spline::{contract, TrivariateScalarField, DEGREE};
use crate::tdf::{EditSet, ParametricGrid};

pub const DEFAULT_CONTROL_RESOLUTION: (usize, usize, usize) = (20, 20, 20);
pub const DEFAULT_LSPIA_MAX_ITERS: usize = 200;
/// Default stopping tolerance as a fraction of the data value range.
pub const LSPIA_TOL_FACTOR: f64 = 1e-4;

/// Convergence record of a fitting run.
#[derive(Debug, Clone)]
pub struct LspiaReport {
    /// Coefficient updates performed.
    pub iterations: usize,
    /// Max |difference| at the participating vertices, recorded before
    /// each update and once more at the end; `residuals[0]` is the
    /// residual of the initial coefficients.
    pub residuals: Vec<f64>,
    pub tol: f64,
    pub converged: bool,
}

impl LspiaReport {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

/// Per-axis fitting tables: basis values of every grid parameter and the
/// reverse (control index -> contributing grid indices) view.
struct AxisTables {
    /// `(span, four basis values)` per grid index.
    forward: Vec<(usize, [f64; 4])>,
    /// For each control index: `(grid index, weight)` with weight > 0.
    reverse: Vec<Vec<(usize, f64)>>,
    /// Total basis weight per control index.
    sums: Vec<f64>,
}

fn axis_tables(knots: &KnotVector, params: &[f64]) -> AxisTables {
    let forward = knots.cubic_tables(params);
    let n = knots.num_basis();
    let mut reverse = vec![Vec::new(); n];
    let mut sums = vec![0.0; n];
    for (a, (span, vals)) in forward.iter().enumerate() {
        for (offset, &w) in vals.iter().enumerate() {
            if w > 0.0 {
                let i = span - DEGREE + offset;
                reverse[i].push((a, w));
                sums[i] += w;
            }
        }
    }
    AxisTables { forward, reverse, sums }
}

fn trilinear(grid: &ParametricGrid, u: f64, v: f64, w: f64) -> f64 {
    let (ru, rv, rw) = grid.resolution();
    let locate = |x: f64, r: usize| -> (usize, f64) {
        let scaled = x * (r - 1) as f64;
        let cell = (scaled.floor() as usize).min(r - 2);
        (cell, scaled - cell as f64)
    };
    let (a, fu) = locate(u, ru);
    let (b, fv) = locate(v, rv);
    let (c, fw) = locate(w, rw);
    let lerp = |x: f64, y: f64, t: f64| x + (y - x) * t;
    let g = grid.values();
    let c00 = lerp(*g.get(a, b, c), *g.get(a + 1, b, c), fu);
    let c10 = lerp(*g.get(a, b + 1, c), *g.get(a + 1, b + 1, c), fu);
    let c01 = lerp(*g.get(a, b, c + 1), *g.get(a + 1, b, c + 1), fu);
    let c11 = lerp(*g.get(a, b + 1, c + 1), *g.get(a + 1, b + 1, c + 1), fu);
    lerp(lerp(c00, c10, fv), lerp(c01, c11, fv), fw)
}

/// Differences `data - field` at every grid vertex, and their max
/// magnitude.
fn compute_deltas(
    data: &Grid3<f64>,
    coeffs: &Grid3<f64>,
    tu: &AxisTables,
    tv: &AxisTables,
    tw: &AxisTables,
) -> (Grid3<f64>, f64) {
    let (ru, rv, rw) = data.dims();
    let planes: Vec<(Vec<f64>, f64)> = (0..ru)
        .into_par_iter()
        .map(|a| {
            let eu = &tu.forward[a];
            let mut plane = Vec::with_capacity(rv * rw);
            let mut max_abs = 0.0f64;
            for b in 0..rv {
                let ev = &tv.forward[b];
                for c in 0..rw {
                    let ew = &tw.forward[c];
                    let value = contract(
                        (eu.0, &eu.1),
                        (ev.0, &ev.1),
                        (ew.0, &ew.1),
                        0.0,
                        |i, j, k| *coeffs.get(i, j, k),
                    );
                    let delta = data.get(a, b, c) - value;
                    max_abs = max_abs.max(delta.abs());
                    plane.push(delta);
                }
            }
            (plane, max_abs)
        })
        .collect();
    let mut max_abs = 0.0f64;
    let mut flat = Vec::with_capacity(ru * rv * rw);
    for (plane, m) in planes {
        max_abs = max_abs.max(m);
        flat.extend(plane);
    }
    (Grid3::from_vec((ru, rv, rw), flat), max_abs)
}

/// Adds the weighted-average difference to every control coefficient.
///
/// The numerator tensor is contracted one axis at a time; the
/// denominator factors into the per-axis weight sums.
fn apply_update(
    coeffs: &mut Grid3<f64>,
    deltas: &Grid3<f64>,
    tu: &AxisTables,
    tv: &AxisTables,
    tw: &AxisTables,
) {
    let (ru, rv, _rw) = deltas.dims();
    let (nu, nv, nw) = coeffs.dims();

    // Stage 1: contract w. t1[a][b][k] = sum_c w_k(c) delta[a][b][c]
    let t1: Vec<f64> = (0..ru)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut rows = Vec::with_capacity(rv * nw);
            for b in 0..rv {
                for rev in &tw.reverse {
                    let mut acc = 0.0;
                    for &(c, w) in rev {
                        acc += w * deltas.get(a, b, c);
                    }
                    rows.push(acc);
                }
            }
            rows
        })
        .collect();
    let t1 = Grid3::from_vec((ru, rv, nw), t1);

    // Stage 2: contract v. t2[a][j][k] = sum_b w_j(b) t1[a][b][k]
    let t2: Vec<f64> = (0..ru)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut rows = Vec::with_capacity(nv * nw);
            for rev in &tv.reverse {
                for k in 0..nw {
                    let mut acc = 0.0;
                    for &(b, w) in rev {
                        acc += w * t1.get(a, b, k);
                    }
                    rows.push(acc);
                }
            }
            rows
        })
        .collect();
    let t2 = Grid3::from_vec((ru, nv, nw), t2);

    // Stage 3: contract u and apply the normalized update.
    let updates: Vec<f64> = (0..nu)
        .into_par_iter()
        .flat_map_iter(|i| {
            let rev = &tu.reverse[i];
            let su = tu.sums[i];
            let mut rows = Vec::with_capacity(nv * nw);
            for j in 0..nv {
                for k in 0..nw {
                    let mut acc = 0.0;
                    for &(a, w) in rev {
                        acc += w * t2.get(a, j, k);
                    }
                    rows.push(acc / (su * tv.sums[j] * tw.sums[k]));
                }
            }
            rows
        })
        .collect();
    coeffs
        .as_mut_slice()
        .par_iter_mut()
        .zip(updates.par_iter())
        .for_each(|(c, u)| *c += u);
}

/// Fits the grid with a cubic B-spline field by LSPIA iteration.
///
/// Coefficients start at the trilinear interpolation of the grid at
/// their Greville parameters and are updated until the max vertex
/// difference drops below `tol` (`None`: [`LSPIA_TOL_FACTOR`] of the
/// value range) or `max_iters` updates have run. A run that stops on
/// `max_iters` still returns the field, flagged unconverged in the
/// report.
pub fn lspia_fit(
    grid: &ParametricGrid,
    control_res: (usize, usize, usize),
    tol: Option<f64>,
    max_iters: usize,
) -> Result<(TrivariateScalarField, LspiaReport)> {
    let resolution = grid.resolution();
    let (nu, nv, nw) = control_res;
    if nu > resolution.0 || nv > resolution.1 || nw > resolution.2 {
        return Err(Error::ControlGridTooFine(
            nu,
            nv,
            nw,
            resolution.0,
            resolution.1,
            resolution.2,
        ));
    }
    let knots = [
        KnotVector::uniform_clamped(nu, DEGREE)?,
        KnotVector::uniform_clamped(nv, DEGREE)?,
        KnotVector::uniform_clamped(nw, DEGREE)?,
    ];
    let (pu, pv, pw) = grid.axis_params();
    let tu = axis_tables(&knots[0], &pu);
    let tv = axis_tables(&knots[1], &pv);
    let tw = axis_tables(&knots[2], &pw);
    for (i, &s) in tu.sums.iter().enumerate() {
        if s <= 0.0 {
            return Err(Error::ZeroWeightControlPoint { i, j: 0, k: 0 });
        }
    }
    for (j, &s) in tv.sums.iter().enumerate() {
        if s <= 0.0 {
            return Err(Error::ZeroWeightControlPoint { i: 0, j, k: 0 });
        }
    }
    for (k, &s) in tw.sums.iter().enumerate() {
        if s <= 0.0 {
            return Err(Error::ZeroWeightControlPoint { i: 0, j: 0, k });
        }
    }

    let gu = knots[0].greville_all();
    let gv = knots[1].greville_all();
    let gw = knots[2].greville_all();
    let mut coeffs =
        Grid3::from_fn(control_res, |i, j, k| trilinear(grid, gu[i], gv[j], gw[k]));

    let (lo, hi) = grid.value_range();
    let tol = tol.unwrap_or(if hi > lo { (hi - lo) * LSPIA_TOL_FACTOR } else { 1e-12 });
    let mut residuals = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let (deltas, max_abs) = compute_deltas(grid.values(), &coeffs, &tu, &tv, &tw);
        residuals.push(max_abs);
        if max_abs < tol {
            converged = true;
            break;
        }
        if iterations == max_iters {
            break;
        }
        apply_update(&mut coeffs, &deltas, &tu, &tv, &tw);
        iterations += 1;
    }
    let field = TrivariateScalarField::new(knots, coeffs)?;
    Ok((field, LspiaReport { iterations, residuals, tol, converged }))
}

/// Re-fits a field against edited grid vertices only.
///
/// Differences are computed at the edited vertices alone, and only
/// control coefficients whose basis product is non-zero at some edited
/// vertex receive updates; every other coefficient of the returned field
/// is bit-identical to the input. The grid supplies the vertex
/// parameters and the default tolerance; the edit targets come from
/// `edits` (several edits of one vertex collapse to the last). An empty
/// edit set returns the field unchanged.
pub fn lspia_local_modify(
    field: &TrivariateScalarField,
    grid: &ParametricGrid,
    edits: &EditSet,
    tol: Option<f64>,
    max_iters: usize,
) -> Result<(TrivariateScalarField, LspiaReport)> {
    let (lo, hi) = grid.value_range();
    let tol = tol.unwrap_or(if hi > lo { (hi - lo) * LSPIA_TOL_FACTOR } else { 1e-12 });
    if edits.is_empty() {
        return Ok((
            field.clone(),
            LspiaReport { iterations: 0, residuals: Vec::new(), tol, converged: true },
        ));
    }
    edits.validate(grid.resolution())?;

    // Later edits of the same vertex win; process in index order for a
    // deterministic accumulation sequence.
    let mut targets: std::collections::BTreeMap<(usize, usize, usize), f64> =
        std::collections::BTreeMap::new();
    for edit in &edits.edits {
        targets.insert(edit.index, edit.value);
    }

    struct EditSite {
        spans: [usize; 3],
        basis: [[f64; 4]; 3],
        target: f64,
        /// Slots into the affected-coefficient list with the basis
        /// product weight this site contributes.
        weights: Vec<(usize, f64)>,
    }

    let knots = field.knots();
    let mut sites: Vec<EditSite> = Vec::with_capacity(targets.len());
    for (&(a, b, c), &target) in &targets {
        let (u, v, w) = grid.param(a, b, c);
        let spans = [
            knots[0].find_span(u),
            knots[1].find_span(v),
            knots[2].find_span(w),
        ];
        let mut basis = [[0.0f64; 4]; 3];
        knots[0].basis_funs_into(spans[0], u, &mut basis[0]);
        knots[1].basis_funs_into(spans[1], v, &mut basis[1]);
        knots[2].basis_funs_into(spans[2], w, &mut basis[2]);
        sites.push(EditSite { spans, basis, target, weights: Vec::new() });
    }

    // Affected coefficients: positive total weight over the edit sites.
    let mut denominators: std::collections::BTreeMap<(usize, usize, usize), f64> =
        std::collections::BTreeMap::new();
    for site in &sites {
        for (du, &bu) in site.basis[0].iter().enumerate() {
            for (dv, &bv) in site.basis[1].iter().enumerate() {
                for (dw, &bw) in site.basis[2].iter().enumerate() {
                    let weight = bu * bv * bw;
                    if weight > 0.0 {
                        let index = (
                            site.spans[0] - DEGREE + du,
                            site.spans[1] - DEGREE + dv,
                            site.spans[2] - DEGREE + dw,
                        );
                        *denominators.entry(index).or_insert(0.0) += weight;
                    }
                }
            }
        }
    }
    let affected: Vec<((usize, usize, usize), f64)> =
        denominators.iter().map(|(&index, &den)| (index, den)).collect();
    let slot_of: std::collections::HashMap<(usize, usize, usize), usize> =
        affected.iter().enumerate().map(|(slot, &(index, _))| (index, slot)).collect();
    for site in &mut sites {
        for (du, &bu) in site.basis[0].iter().enumerate() {
            for (dv, &bv) in site.basis[1].iter().enumerate() {
                for (dw, &bw) in site.basis[2].iter().enumerate() {
                    let weight = bu * bv * bw;
                    if weight > 0.0 {
                        let index = (
                            site.spans[0] - DEGREE + du,
                            site.spans[1] - DEGREE + dv,
                            site.spans[2] - DEGREE + dw,
                        );
                        site.weights.push((slot_of[&index], weight));
                    }
                }
            }
        }
    }

    let mut coeffs = field.coeffs().clone();
    let mut residuals = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let mut max_abs = 0.0f64;
        let mut deltas = Vec::with_capacity(sites.len());
        for site in &sites {
            let value = contract(
                (site.spans[0], &site.basis[0]),
                (site.spans[1], &site.basis[1]),
                (site.spans[2], &site.basis[2]),
                0.0,
                |i, j, k| *coeffs.get(i, j, k),
            );
            let delta = site.target - value;
            max_abs = max_abs.max(delta.abs());
            deltas.push(delta);
        }
        residuals.push(max_abs);
        if max_abs < tol {
            converged = true;
            break;
        }
        if iterations == max_iters {
            break;
        }
        let mut numerators = vec![0.0f64; affected.len()];
        for (site, &delta) in sites.iter().zip(&deltas) {
            for &(slot, weight) in &site.weights {
                numerators[slot] += weight * delta;
            }
        }
        for (slot, &(index, den)) in affected.iter().enumerate() {
            let (i, j, k) = index;
            *coeffs.get_mut(i, j, k) += numerators[slot] / den;
        }
        iterations += 1;
    }
    let updated = TrivariateScalarField::new(knots.clone(), coeffs)?;
    Ok((updated, LspiaReport { iterations, residuals, tol, converged }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tdf::prescribed_function;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    fn smooth_grid(resolution: (usize, usize, usize)) -> ParametricGrid {
        let base = ParametricGrid::zeros(resolution).unwrap();
        prescribed_function(&base, |u, v, w| {
            (std::f64::consts::TAU * u).cos()
                + 0.6 * (std::f64::consts::TAU * v).cos()
                + 0.3 * (std::f64::consts::TAU * w).cos()
        })
        .unwrap()
    }

    #[test]
    fn constant_grid_converges_at_iteration_zero() {
        let base = ParametricGrid::zeros((8, 8, 8)).unwrap();
        let grid = prescribed_function(&base, |_, _, _| 0.42).unwrap();
        let (field, report) = lspia_fit(&grid, (5, 5, 5), None, 50).unwrap();
        assert_eq!(report.iterations, 0);
        assert!(report.converged);
        assert_eq!(report.residuals.len(), 1);
        assert!(field.coeffs().as_slice().iter().all(|&c| c == 0.42));
    }

    #[test]
    fn linear_grid_is_reproduced() {
        let base = ParametricGrid::zeros((10, 10, 10)).unwrap();
        let grid = prescribed_function(&base, |u, _, _| u).unwrap();
        let (field, report) = lspia_fit(&grid, (5, 5, 5), Some(1e-9), 100).unwrap();
        assert!(report.converged);
        for a in 0..10 {
            for b in 0..10 {
                for c in 0..10 {
                    let (u, v, w) = grid.param(a, b, c);
                    assert_abs_diff_eq!(field.value(u, v, w).unwrap(), u, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn converged_coefficients_match_normal_equations() {
        // LSPIA's fixed point is the unweighted least-squares fit; solve
        // the normal equations directly as the oracle.
        let grid = smooth_grid((10, 10, 10));
        let control = (5, 5, 5);
        let (field, _) = lspia_fit(&grid, control, Some(0.0), 3000).unwrap();

        let knots = field.knots();
        let mut a = DMatrix::zeros(1000, 125);
        let mut b = DVector::zeros(1000);
        let (pu, pv, pw) = grid.axis_params();
        let tu = knots[0].cubic_tables(&pu);
        let tv = knots[1].cubic_tables(&pv);
        let tw = knots[2].cubic_tables(&pw);
        for (ai, &(su, wu)) in tu.iter().enumerate() {
            for (bi, &(sv, wv)) in tv.iter().enumerate() {
                for (ci, &(sw, ww)) in tw.iter().enumerate() {
                    let row = (ai * 10 + bi) * 10 + ci;
                    b[row] = *grid.values().get(ai, bi, ci);
                    for du in 0..4 {
                        for dv in 0..4 {
                            for dw in 0..4 {
                                let col = ((su - 3 + du) * 5 + (sv - 3 + dv)) * 5
                                    + (sw - 3 + dw);
                                a[(row, col)] = wu[du] * wv[dv] * ww[dw];
                            }
                        }
                    }
                }
            }
        }
        let ata = a.transpose() * &a;
        let atb = a.transpose() * b;
        let oracle = ata.cholesky().expect("full-rank collocation").solve(&atb);
        for (flat, &coeff) in field.coeffs().as_slice().iter().enumerate() {
            assert_abs_diff_eq!(coeff, oracle[flat], epsilon = 1e-6);
        }
    }

    #[test]
    fn residuals_never_increase() {
        let grid = smooth_grid((24, 24, 24));
        let (_, report) = lspia_fit(&grid, (8, 8, 8), None, 200).unwrap();
        assert!(report.residuals.len() > 2);
        for pair in report.residuals.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "{} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn fit_converges_below_relative_tolerance() {
        let grid = smooth_grid((50, 50, 50));
        let (_, report) = lspia_fit(&grid, (20, 20, 20), None, 200).unwrap();
        let (lo, hi) = grid.value_range();
        assert!(report.converged, "final residual {}", report.final_residual());
        assert!(report.final_residual() < 1e-3 * (hi - lo));
    }

    #[test]
    fn control_grid_finer_than_data_is_rejected() {
        let grid = smooth_grid((6, 6, 6));
        let err = lspia_fit(&grid, (7, 5, 5), None, 10).unwrap_err();
        assert!(matches!(err, Error::ControlGridTooFine(7, 5, 5, 6, 6, 6)));
    }

    #[test]
    fn empty_edit_set_returns_field_unchanged() {
        let grid = smooth_grid((8, 8, 8));
        let (field, _) = lspia_fit(&grid, (5, 5, 5), None, 100).unwrap();
        let (same, report) =
            lspia_local_modify(&field, &grid, &EditSet::default(), None, 50).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
        assert_eq!(field.coeffs(), same.coeffs());
    }

    #[test]
    fn single_edit_touches_only_its_support() {
        let grid = smooth_grid((10, 10, 10));
        let (field, _) = lspia_fit(&grid, (5, 5, 5), None, 100).unwrap();
        let edits = EditSet::parse("3 3 3 0.9\n").unwrap();
        let (modified, report) =
            lspia_local_modify(&field, &grid, &edits, Some(1e-10), 50).unwrap();
        assert!(report.converged);

        let changed: Vec<usize> = field
            .coeffs()
            .as_slice()
            .iter()
            .zip(modified.coeffs().as_slice())
            .enumerate()
            .filter(|(_, (before, after))| before.to_bits() != after.to_bits())
            .map(|(flat, _)| flat)
            .collect();
        assert!(!changed.is_empty());
        assert!(changed.len() <= 64, "{} coefficients changed", changed.len());
        // Every changed coefficient must have support at the edit.
        let knots = field.knots();
        let (u, v, w) = grid.param(3, 3, 3);
        for flat in changed {
            let (i, j, k) = field.coeffs().unindex(flat);
            let weight = knots[0].basis_value(i, u).unwrap()
                * knots[1].basis_value(j, v).unwrap()
                * knots[2].basis_value(k, w).unwrap();
            assert!(weight > 0.0, "coefficient ({i},{j},{k}) outside edit support");
        }
        // The edited vertex now matches its target: the oracle for a
        // single edit is exact interpolation.
        assert_abs_diff_eq!(modified.value(u, v, w).unwrap(), 0.9, epsilon = 1e-9);
    }

    #[test]
    fn multi_edit_residuals_shrink_monotonically() {
        let grid = smooth_grid((16, 16, 16));
        let (field, _) = lspia_fit(&grid, (8, 8, 8), None, 100).unwrap();
        let edits = EditSet::parse("4 4 4 1.2\n6 4 4 1.1\n4 6 4 1.3\n11 11 11 0.9\n").unwrap();
        let (modified, report) =
            lspia_local_modify(&field, &grid, &edits, Some(1e-8), 200).unwrap();
        assert!(report.converged);
        assert!(report.iterations > 1, "want a multi-step run to check monotonicity");
        for pair in report.residuals.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
        for edit in &edits.edits {
            let (a, b, c) = edit.index;
            let (u, v, w) = grid.param(a, b, c);
            assert_abs_diff_eq!(modified.value(u, v, w).unwrap(), edit.value, epsilon = 1e-7);
        }
    }

    #[test]
    fn duplicate_edits_use_the_last_value() {
        let grid = smooth_grid((10, 10, 10));
        let (field, _) = lspia_fit(&grid, (5, 5, 5), None, 100).unwrap();
        let edits = EditSet::parse("3 3 3 5.0\n3 3 3 0.5\n").unwrap();
        let (modified, _) = lspia_local_modify(&field, &grid, &edits, Some(1e-10), 50).unwrap();
        let (u, v, w) = grid.param(3, 3, 3);
        assert_abs_diff_eq!(modified.value(u, v, w).unwrap(), 0.5, epsilon = 1e-8);
    }

    #[test]
    fn out_of_range_edit_is_rejected() {
        let grid = smooth_grid((8, 8, 8));
        let (field, _) = lspia_fit(&grid, (5, 5, 5), None, 100).unwrap();
        let edits = EditSet::parse("8 0 0 0.1\n").unwrap();
        let err = lspia_local_modify(&field, &grid, &edits, None, 50).unwrap_err();
        assert!(matches!(err, Error::EditIndexOutOfRange { i: 8, .. }));
    }
}
