use super::Scalar;
use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Dense { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[T]) {
        assert_eq!(col.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = col[i];
        }
    }

    pub fn transpose(&self) -> Dense<T> {
        Dense::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![T::zero(); self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut s = T::zero();
            for j in 0..self.cols {
                s += row[j] * x[j];
            }
            y[i] = s;
        }
        y
    }

    /// `y = A^T x`.
    pub fn transpose_matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let xi = x[i];
            for j in 0..self.cols {
                y[j] += row[j] * xi;
            }
        }
        y
    }

    /// `C = A B` (row-major, k-inner loop hoisted for locality).
    pub fn matmul(&self, other: &Dense<T>) -> Dense<T> {
        assert_eq!(self.cols, other.rows);
        let mut c = Dense::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == T::zero() {
                    continue;
                }
                let brow = other.row(k);
                let crow = &mut c.data[i * other.cols..(i + 1) * other.cols];
                for j in 0..other.cols {
                    crow[j] += aik * brow[j];
                }
            }
        }
        c
    }

    /// Largest absolute entry; zero for empty matrices.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, s: T) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_scaled(&mut self, s: T, other: &Dense<T>) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * *b;
        }
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<LuFactors<T>> {
        LuFactors::new(self)
    }

    /// Solve `A x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        self.lu()?.solve(b)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Dense<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Dense<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting (Doolittle, pivoting by max column
/// magnitude). Reusable for many right-hand sides.
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    lu: Dense<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> LuFactors<T> {
    pub fn new(a: &Dense<T>) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::Numerical(format!(
                "LU requires a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // pivot search in column k
            let mut p = k;
            let mut pmax = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == T::zero() || !pmax.is_finite() {
                return Err(Error::Numerical(format!(
                    "LU pivot {pmax:e} at column {k}: matrix is singular"
                )));
            }
            if p != k {
                perm.swap(k, p);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                if m != T::zero() {
                    for j in k + 1..n {
                        let v = lu[(k, j)];
                        lu[(i, j)] = lu[(i, j)] - m * v;
                    }
                }
            }
        }
        Ok(LuFactors { lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(Error::Numerical(format!(
                "LU solve: rhs length {} does not match dimension {n}",
                b.len()
            )));
        }
        // forward substitution on permuted rhs
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        // back substitution
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let a: Dense<f64> = Dense::from_rows(3, 3, vec![2.0, 1.0, 1.0, 4.0, -6.0, 0.0, -2.0, 7.0, 2.0]);
        let b = vec![5.0, -2.0, 9.0];
        let x = a.solve(&b).unwrap();
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_reports_singularity() {
        let a: Dense<f64> = Dense::from_rows(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(a.solve(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn matmul_against_matvec() {
        let a = Dense::from_fn(4, 3, |i, j| (i * 3 + j) as f64);
        let b = Dense::from_fn(3, 2, |i, j| (i + j) as f64 * 0.5);
        let c = a.matmul(&b);
        for j in 0..2 {
            let col = b.column(j);
            let expect = a.matvec(&col);
            for i in 0..4 {
                assert_eq!(c[(i, j)], expect[i]);
            }
        }
    }

    #[test]
    fn generic_kernels_work_in_f32() {
        let a: Dense<f32> = Dense::identity(3);
        let x = a.solve(&[1.0f32, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }
}
