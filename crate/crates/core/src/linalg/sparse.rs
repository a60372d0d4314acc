use super::Scalar;

/// Triplet (COO) accumulator used during assembly.
#[derive(Debug, Clone)]
pub struct Triplets<T> {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> Triplets<T> {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Triplets { n_rows, n_cols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, val: T) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row, col, val));
    }

    /// Build CSR, summing duplicate entries. Deterministic for a given
    /// insertion multiset (entries are sorted by (row, col) before merging).
    pub fn to_csr(mut self) -> Csr<T> {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut counts = vec![0usize; self.n_rows];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("merge follows a stored entry") += v;
            } else {
                indices.push(c);
                values.push(v);
                counts[r] += 1;
                last = Some((r, c));
            }
        }
        let mut indptr = vec![0usize; self.n_rows + 1];
        for r in 0..self.n_rows {
            indptr[r + 1] = indptr[r] + counts[r];
        }
        Csr { n_rows: self.n_rows, n_cols: self.n_cols, indptr, indices, values }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> Csr<T> {
    /// Empty matrix with no stored entries.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Csr { n_rows, n_cols, indptr: vec![0; n_rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    /// Matrix with the same sparsity pattern as `self` and zeroed values.
    pub fn same_pattern(&self) -> Self {
        Csr {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: vec![T::zero(); self.values.len()],
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    /// Add `val` at `(row, col)`; the entry must exist in the pattern.
    pub fn add_at(&mut self, row: usize, col: usize, val: T) {
        let lo = self.indptr[row];
        let hi = self.indptr[row + 1];
        let k = self.indices[lo..hi]
            .binary_search(&col)
            .unwrap_or_else(|_| panic!("entry ({row},{col}) not in sparsity pattern"));
        self.values[lo + k] += val;
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        let (cols, vals) = self.row(row);
        match cols.binary_search(&col) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    pub fn zero_values(&mut self) {
        for v in &mut self.values {
            *v = T::zero();
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut s = T::zero();
            for (c, v) in cols.iter().zip(vals) {
                s += *v * x[*c];
            }
            y[i] = s;
        }
    }

    /// `y = A^T x`.
    pub fn transpose_matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n_rows);
        let mut y = vec![T::zero(); self.n_cols];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let xi = x[i];
            if xi == T::zero() {
                continue;
            }
            for (c, v) in cols.iter().zip(vals) {
                y[*c] += *v * xi;
            }
        }
        y
    }

    /// Quadratic form `x^T A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        assert_eq!(x.len(), self.n_rows);
        let mut s = T::zero();
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut row_sum = T::zero();
            for (c, v) in cols.iter().zip(vals) {
                row_sum += *v * y[*c];
            }
            s += x[i] * row_sum;
        }
        s
    }

    pub fn diagonal(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n_rows];
        for i in 0..self.n_rows.min(self.n_cols) {
            d[i] = self.get(i, i);
        }
        d
    }

    /// Dense copy (test/diagnostic use on small systems).
    pub fn to_dense(&self) -> super::Dense<T> {
        let mut m = super::Dense::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                m[(i, *c)] = *v;
            }
        }
        m
    }

    /// Maximum of |A + A^T| over all entries; zero for a perfectly
    /// skew-symmetric matrix.
    pub fn skew_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let d = (*v + self.get(*c, i)).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Maximum of |A - A^T| over all entries.
    pub fn symmetry_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let d = (*v - self.get(*c, i)).abs();
                worst = worst.max(d);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_duplicates() {
        let mut t = Triplets::new(3, 3);
        t.push(0, 0, 1.0);
        t.push(0, 0, 2.0);
        t.push(2, 1, 5.0);
        t.push(1, 2, -1.0);
        let a = t.to_csr();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(2, 1), 5.0);
        assert_eq!(a.get(1, 2), -1.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn empty_rows_have_valid_indptr() {
        let mut t = Triplets::new(4, 4);
        t.push(3, 0, 1.0);
        let a = t.to_csr();
        assert_eq!(a.indptr, vec![0, 0, 0, 0, 1]);
        let y = a.matvec(&[2.0, 0.0, 0.0, 0.0]);
        assert_eq!(y, vec![0.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn transpose_matvec_matches_dense() {
        let mut t = Triplets::new(2, 3);
        t.push(0, 0, 1.0);
        t.push(0, 2, 2.0);
        t.push(1, 1, 3.0);
        let a = t.to_csr();
        let y = a.transpose_matvec(&[1.0, 10.0]);
        assert_eq!(y, vec![1.0, 30.0, 2.0]);
    }
}
