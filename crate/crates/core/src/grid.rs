//! Dense 3D array with (i, j, k) indexing, k fastest.

/// A dense 3D grid of values stored row-major with `k` varying fastest.
///
/// This is the storage layout shared by control-point grids, scalar
/// coefficient grids and sampled fields, and it matches the traversal
/// order of the TDF file format.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3<T> {
    dims: (usize, usize, usize),
    data: Vec<T>,
}

impl<T: Clone> Grid3<T> {
    pub fn filled(dims: (usize, usize, usize), value: T) -> Self {
        Self { dims, data: vec![value; dims.0 * dims.1 * dims.2] }
    }
}

impl<T> Grid3<T> {
    /// Wraps existing data; `data.len()` must equal the product of `dims`.
    pub fn from_vec(dims: (usize, usize, usize), data: Vec<T>) -> Self {
        assert_eq!(data.len(), dims.0 * dims.1 * dims.2, "grid data length mismatch");
        Self { dims, data }
    }

    pub fn from_fn(dims: (usize, usize, usize), mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dims.0 * dims.1 * dims.2);
        for i in 0..dims.0 {
            for j in 0..dims.1 {
                for k in 0..dims.2 {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        (i * self.dims.1 + j) * self.dims.2 + k
    }

    /// Inverse of [`Grid3::index`].
    #[inline]
    pub fn unindex(&self, flat: usize) -> (usize, usize, usize) {
        let k = flat % self.dims.2;
        let rest = flat / self.dims.2;
        (rest / self.dims.1, rest % self.dims.1, k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> &T {
        &self.data[self.index(i, j, k)]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize, k: usize) -> &mut T {
        let idx = self.index(i, j, k);
        &mut self.data[idx]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: T) {
        let idx = self.index(i, j, k);
        self.data[idx] = value;
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }
}

impl Grid3<f64> {
    /// Minimum and maximum value; `None` for an empty grid.
    pub fn value_range(&self) -> Option<(f64, f64)> {
        if self.data.is_empty() {
            return None;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Some((lo, hi))
    }
}
