//! Clamped knot vectors and B-spline basis evaluation.

use crate::error::{Error, Result};

/// A clamped (open) knot vector over a normalized `[0, 1]` domain.
///
/// Construction validates monotonicity and the clamped end condition and
/// rescales the knots so the domain is exactly `[0, 1]`; the first and last
/// `degree + 1` entries come out as exact `0.0` and `1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn new(degree: usize, mut knots: Vec<f64>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidKnotVector("degree must be at least 1".into()));
        }
        if knots.len() < 2 * (degree + 1) {
            return Err(Error::InvalidKnotVector(format!(
                "need at least {} knots for degree {}, got {}",
                2 * (degree + 1),
                degree,
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidKnotVector("knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidKnotVector("knots must be non-decreasing".into()));
        }
        let first = knots[0];
        let last = *knots.last().unwrap();
        if knots[..=degree].iter().any(|&k| k != first)
            || knots[knots.len() - degree - 1..].iter().any(|&k| k != last)
        {
            return Err(Error::InvalidKnotVector(format!(
                "first and last {} knots must repeat (clamped end condition)",
                degree + 1
            )));
        }
        let lo = knots[degree];
        let hi = knots[knots.len() - degree - 1];
        if lo >= hi {
            return Err(Error::InvalidKnotVector("knot domain is empty".into()));
        }
        // An interior knot repeated more than `degree` times would split the
        // basis into disconnected pieces and break the evaluation recurrences.
        let interior = &knots[degree + 1..knots.len() - degree - 1];
        let mut run = 1usize;
        for w in interior.windows(2) {
            run = if w[0] == w[1] { run + 1 } else { 1 };
            if run > degree {
                return Err(Error::InvalidKnotVector(format!(
                    "interior knot multiplicity exceeds degree {degree}"
                )));
            }
        }
        let span = hi - lo;
        for k in &mut knots {
            *k = ((*k - lo) / span).clamp(0.0, 1.0);
        }
        Ok(Self { degree, knots })
    }

    /// Clamped knot vector with uniformly spaced interior knots for
    /// `num_basis` basis functions of the given degree.
    pub fn uniform_clamped(num_basis: usize, degree: usize) -> Result<Self> {
        if num_basis < degree + 1 {
            return Err(Error::InvalidKnotVector(format!(
                "need at least {} basis functions for degree {}, got {}",
                degree + 1,
                degree,
                num_basis
            )));
        }
        let interior = num_basis - degree - 1;
        let mut knots = vec![0.0; degree + 1];
        for i in 1..=interior {
            knots.push(i as f64 / (interior + 1) as f64);
        }
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(degree, knots)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions (= number of control points per axis).
    #[inline]
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Parameter domain; always `(0.0, 1.0)` after normalization.
    #[inline]
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.num_basis()])
    }

    pub fn contains(&self, u: f64) -> bool {
        let (lo, hi) = self.domain();
        u >= lo && u <= hi
    }

    /// Index of the knot span containing `u`: the largest `s` with
    /// `knots[s] <= u` and `knots[s] < knots[s + 1]`, clamped to the domain.
    pub fn find_span(&self, u: f64) -> usize {
        let n = self.num_basis();
        if u >= self.knots[n] {
            return n - 1;
        }
        if u <= self.knots[self.degree] {
            return self.degree;
        }
        let mut lo = self.degree;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// All `degree + 1` basis functions that are non-zero on `span`,
    /// written to `out[0..=degree]` as `N_{span-degree}(u) .. N_{span}(u)`.
    ///
    /// At the domain endpoints the clamped end condition makes a single
    /// basis function equal to one; those cases are returned exactly so
    /// that evaluation at a corner reproduces the corner control point
    /// bit for bit.
    pub fn basis_funs_into(&self, span: usize, u: f64, out: &mut [f64]) {
        let p = self.degree;
        debug_assert!(out.len() > p);
        if u <= 0.0 && span == p {
            out[..=p].fill(0.0);
            out[0] = 1.0;
            return;
        }
        if u >= 1.0 && span == self.num_basis() - 1 {
            out[..=p].fill(0.0);
            out[p] = 1.0;
            return;
        }
        let mut left = [0.0f64; 8];
        let mut right = [0.0f64; 8];
        debug_assert!(p < 8, "degree above 7 is never constructed here");
        out[0] = 1.0;
        for j in 1..=p {
            left[j] = u - self.knots[span + 1 - j];
            right[j] = self.knots[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = out[r] / (right[r + 1] + left[j - r]);
                out[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            out[j] = saved;
        }
    }

    pub fn basis_funs(&self, span: usize, u: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.degree + 1];
        self.basis_funs_into(span, u, &mut out);
        out
    }

    /// Basis functions and their derivatives up to order `n` on `span`.
    ///
    /// `result[d][r]` is the `d`-th derivative of `N_{span-degree+r}` at `u`.
    #[allow(clippy::needless_range_loop)]
    pub fn basis_funs_ders(&self, span: usize, u: f64, n: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let n = n.min(p);
        let mut ndu = vec![vec![0.0f64; p + 1]; p + 1];
        let mut left = vec![0.0f64; p + 1];
        let mut right = vec![0.0f64; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = u - self.knots[span + 1 - j];
            right[j] = self.knots[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let mut ders = vec![vec![0.0f64; p + 1]; n + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = [vec![0.0f64; p + 1], vec![0.0f64; p + 1]];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0].fill(0.0);
            a[1].fill(0.0);
            a[0][0] = 1.0;
            for k in 1..=n {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    a[s2][j] =
                        (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][(rk + j as isize) as usize];
                    d += a[s2][j] * ndu[(rk + j as isize) as usize][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for k in 1..=n {
            for j in 0..=p {
                ders[k][j] *= factor;
            }
            factor *= (p - k) as f64;
        }
        ders
    }

    /// Value of the single basis function `N_{i,degree}` at `u`.
    ///
    /// Exactly zero outside the support `[knots[i], knots[i + degree + 1])`.
    pub fn basis_value(&self, i: usize, u: f64) -> Result<f64> {
        let n = self.num_basis();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, count: n });
        }
        let (lo, hi) = self.domain();
        if !(u >= lo && u <= hi) {
            return Err(Error::ParameterOutOfDomain { axis: 'u', value: u, lo, hi });
        }
        let span = self.find_span(u);
        if i + self.degree < span || i > span {
            return Ok(0.0);
        }
        let mut vals = [0.0f64; 8];
        self.basis_funs_into(span, u, &mut vals);
        Ok(vals[i + self.degree - span])
    }

    /// Span index and the four non-zero cubic basis values at each
    /// parameter. Precomputing these per axis turns tensor-product
    /// evaluation over a grid into a 64-term contraction per point.
    pub fn cubic_tables(&self, params: &[f64]) -> Vec<(usize, [f64; 4])> {
        debug_assert_eq!(self.degree, 3);
        params
            .iter()
            .map(|&u| {
                let span = self.find_span(u);
                let mut vals = [0.0f64; 4];
                self.basis_funs_into(span, u, &mut vals);
                (span, vals)
            })
            .collect()
    }

    /// Greville abscissa of basis function `i`: the mean of
    /// `knots[i + 1 ..= i + degree]`.
    pub fn greville(&self, i: usize) -> f64 {
        let sum: f64 = self.knots[i + 1..=i + self.degree].iter().sum();
        sum / self.degree as f64
    }

    pub fn greville_all(&self) -> Vec<f64> {
        (0..self.num_basis()).map(|i| self.greville(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Textbook two-term recursion, with the usual zero-denominator-means-
    /// zero-term convention and the top interval closed on the right.
    fn recursion_basis(knots: &[f64], i: usize, p: usize, u: f64, domain_hi: f64) -> f64 {
        if p == 0 {
            let in_span = knots[i] <= u && (u < knots[i + 1] || (u == domain_hi && knots[i + 1] == domain_hi && knots[i] < knots[i + 1]));
            return if in_span { 1.0 } else { 0.0 };
        }
        let mut value = 0.0;
        let d1 = knots[i + p] - knots[i];
        if d1 > 0.0 {
            value += (u - knots[i]) / d1 * recursion_basis(knots, i, p - 1, u, domain_hi);
        }
        let d2 = knots[i + p + 1] - knots[i + 1];
        if d2 > 0.0 {
            value += (knots[i + p + 1] - u) / d2 * recursion_basis(knots, i + 1, p - 1, u, domain_hi);
        }
        value
    }

    fn random_clamped(rng: &mut ChaCha8Rng, num_basis: usize, degree: usize) -> KnotVector {
        let interior = num_basis - degree - 1;
        let mut knots = vec![0.0; degree + 1];
        let mut acc = 0.0;
        let mut interior_vals: Vec<f64> = (0..interior)
            .map(|_| {
                acc += rng.gen_range(0.1..1.0);
                acc
            })
            .collect();
        let total = acc + rng.gen_range(0.1..1.0);
        for v in &mut interior_vals {
            *v /= total;
        }
        knots.extend(interior_vals);
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        KnotVector::new(degree, knots).unwrap()
    }

    #[test]
    fn matches_recursion_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let degree = rng.gen_range(1..=3);
            let num_basis = rng.gen_range(degree + 1..degree + 9);
            let kv = random_clamped(&mut rng, num_basis, degree);
            for _ in 0..25 {
                let u = rng.gen_range(0.0..1.0);
                let span = kv.find_span(u);
                let vals = kv.basis_funs(span, u);
                for (offset, &v) in vals.iter().enumerate() {
                    let i = span - degree + offset;
                    let expected = recursion_basis(kv.knots(), i, degree, u, 1.0);
                    assert_abs_diff_eq!(v, expected, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_and_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let kv = random_clamped(&mut rng, 9, 3);
        for step in 0..=100 {
            let u = step as f64 / 100.0;
            let vals = kv.basis_funs(kv.find_span(u), u);
            assert!(vals.iter().all(|&v| v >= 0.0));
            assert_abs_diff_eq!(vals.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn endpoint_values_are_exact() {
        let kv = KnotVector::uniform_clamped(7, 3).unwrap();
        let s0 = kv.find_span(0.0);
        assert_eq!(kv.basis_funs(s0, 0.0), vec![1.0, 0.0, 0.0, 0.0]);
        let s1 = kv.find_span(1.0);
        assert_eq!(kv.basis_funs(s1, 1.0), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(s1, kv.num_basis() - 1);
    }

    #[test]
    fn find_span_brackets_parameter() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kv = random_clamped(&mut rng, 12, 3);
        for _ in 0..200 {
            let u = rng.gen_range(0.0..=1.0);
            let s = kv.find_span(u);
            assert!(kv.knots()[s] <= u || u <= 0.0);
            assert!(u < kv.knots()[s + 1] || u >= kv.knots()[kv.num_basis()]);
            assert!(kv.knots()[s] < kv.knots()[s + 1]);
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn basis_value_zero_outside_support() {
        let kv = KnotVector::uniform_clamped(10, 3).unwrap();
        // N_0 is supported on the first knot span only.
        assert_eq!(kv.basis_value(0, 0.9).unwrap(), 0.0);
        assert_eq!(kv.basis_value(9, 0.05).unwrap(), 0.0);
        assert!(kv.basis_value(0, 0.05).unwrap() > 0.0);
        // Matches the span-local evaluation where it is non-zero.
        let u = 0.37;
        let span = kv.find_span(u);
        let vals = kv.basis_funs(span, u);
        for offset in 0..=3 {
            let i = span - 3 + offset;
            assert_abs_diff_eq!(kv.basis_value(i, u).unwrap(), vals[offset], epsilon = 0.0);
        }
    }

    #[test]
    fn basis_value_rejects_bad_input() {
        let kv = KnotVector::uniform_clamped(6, 3).unwrap();
        assert!(matches!(kv.basis_value(6, 0.5), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(
            kv.basis_value(0, 1.5),
            Err(Error::ParameterOutOfDomain { .. })
        ));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let kv = random_clamped(&mut rng, 8, 3);
        let h = 1e-6;
        for _ in 0..50 {
            let u = rng.gen_range(0.05..0.95);
            let span = kv.find_span(u);
            // Keep the stencil inside one span so all evaluations share it.
            if kv.find_span(u - h) != span || kv.find_span(u + h) != span {
                continue;
            }
            let ders = kv.basis_funs_ders(span, u, 2);
            let lo = kv.basis_funs(span, u - h);
            let mid = kv.basis_funs(span, u);
            let hi = kv.basis_funs(span, u + h);
            for j in 0..=3 {
                assert_abs_diff_eq!(ders[0][j], mid[j], epsilon = 1e-12);
                let d1 = (hi[j] - lo[j]) / (2.0 * h);
                assert_abs_diff_eq!(ders[1][j], d1, epsilon = 1e-5);
                let d2 = (hi[j] - 2.0 * mid[j] + lo[j]) / (h * h);
                assert_abs_diff_eq!(ders[2][j], d2, epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn derivative_sums_vanish() {
        // Derivatives of a partition of unity sum to zero.
        let kv = KnotVector::uniform_clamped(9, 3).unwrap();
        for step in 1..20 {
            let u = step as f64 / 20.0;
            let ders = kv.basis_funs_ders(kv.find_span(u), u, 2);
            assert_abs_diff_eq!(ders[1].iter().sum::<f64>(), 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(ders[2].iter().sum::<f64>(), 0.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn greville_bezier_case() {
        let kv = KnotVector::uniform_clamped(4, 3).unwrap();
        let g = kv.greville_all();
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(g[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[2], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[3], 1.0, epsilon = 0.0);
    }

    #[test]
    fn normalization_rescales_domain() {
        let kv = KnotVector::new(2, vec![2.0, 2.0, 2.0, 3.0, 5.0, 6.0, 6.0, 6.0]).unwrap();
        assert_eq!(kv.domain(), (0.0, 1.0));
        assert_eq!(kv.knots()[3], 0.25);
        assert_eq!(kv.knots()[4], 0.75);
    }

    #[test]
    fn validation_rejects_malformed_input() {
        // Too few knots.
        assert!(KnotVector::new(3, vec![0.0, 0.0, 1.0, 1.0]).is_err());
        // Decreasing.
        assert!(KnotVector::new(1, vec![0.0, 0.0, 0.7, 0.3, 1.0, 1.0]).is_err());
        // Unclamped start.
        assert!(KnotVector::new(2, vec![0.0, 0.1, 0.2, 0.5, 1.0, 1.0, 1.0]).is_err());
        // Empty domain.
        assert!(KnotVector::new(1, vec![0.0, 0.0, 0.0, 0.0]).is_err());
        // NaN.
        assert!(KnotVector::new(1, vec![0.0, 0.0, f64::NAN, 1.0, 1.0]).is_err());
        // Interior multiplicity above the degree.
        assert!(KnotVector::new(
            2,
            vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0]
        )
        .is_err());
    }
}
