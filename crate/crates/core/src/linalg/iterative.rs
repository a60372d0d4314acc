//! Jacobi-preconditioned Krylov solvers. Iteration order is fixed, so for a
//! given matrix/rhs the returned solution is bit-reproducible.

use super::{axpy, dot, norm2, Csr, Scalar};
use crate::{Error, Result};

fn jacobi<T: Scalar>(a: &Csr<T>) -> Vec<T> {
    a.diagonal()
        .into_iter()
        .map(|d| if d.abs() > T::zero() { T::one() / d } else { T::one() })
        .collect()
}

/// Preconditioned conjugate gradient for SPD systems.
///
/// Iterates until `||b - Ax|| <= tol * ||b||` (or `tol` absolute when `b = 0`).
/// Returns the iteration count.
pub fn pcg<T: Scalar>(
    a: &Csr<T>,
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<usize> {
    let n = b.len();
    assert_eq!(a.n_rows, n);
    assert_eq!(x.len(), n);
    let minv = jacobi(a);
    let bnorm = norm2(b);
    let target = if bnorm > T::zero() { tol * bnorm } else { tol };

    let mut r = vec![T::zero(); n];
    a.matvec_into(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    if norm2(&r) <= target {
        return Ok(0);
    }
    let mut z: Vec<T> = r.iter().zip(&minv).map(|(ri, mi)| *ri * *mi).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= T::zero() || !pap.is_finite() {
            return Err(Error::Numerical(format!(
                "CG breakdown at iteration {it}: p^T A p = {pap:e} (matrix not SPD?)"
            )));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        let rnorm = norm2(&r);
        if rnorm <= target {
            return Ok(it);
        }
        for i in 0..n {
            z[i] = r[i] * minv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Numerical(format!(
        "CG did not reach tolerance {tol:e} in {max_iter} iterations (residual {:e})",
        norm2(&r)
    )))
}

/// Preconditioned BiCGStab for general (nonsymmetric) systems.
pub fn bicgstab<T: Scalar>(
    a: &Csr<T>,
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<usize> {
    let n = b.len();
    assert_eq!(a.n_rows, n);
    assert_eq!(x.len(), n);
    let minv = jacobi(a);
    let bnorm = norm2(b);
    let target = if bnorm > T::zero() { tol * bnorm } else { tol };

    let mut r = vec![T::zero(); n];
    a.matvec_into(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    if norm2(&r) <= target {
        return Ok(0);
    }
    let r0 = r.clone();
    let mut rho = T::one();
    let mut alpha = T::one();
    let mut omega = T::one();
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut phat = vec![T::zero(); n];
    let mut shat = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let tiny = T::epsilon() * T::epsilon();

    for it in 1..=max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < tiny * bnorm.max(T::one()) {
            return Err(Error::Numerical(format!(
                "BiCGStab breakdown at iteration {it}: rho = {rho_new:e}"
            )));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        for i in 0..n {
            phat[i] = p[i] * minv[i];
        }
        a.matvec_into(&phat, &mut v);
        let r0v = dot(&r0, &v);
        if r0v.abs() < tiny {
            return Err(Error::Numerical(format!(
                "BiCGStab breakdown at iteration {it}: r0^T v = {r0v:e}"
            )));
        }
        alpha = rho / r0v;
        // s = r - alpha v  (reuse r)
        axpy(-alpha, &v, &mut r);
        if norm2(&r) <= target {
            axpy(alpha, &phat, x);
            return Ok(it);
        }
        for i in 0..n {
            shat[i] = r[i] * minv[i];
        }
        a.matvec_into(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt == T::zero() {
            return Err(Error::Numerical(format!(
                "BiCGStab breakdown at iteration {it}: t = 0"
            )));
        }
        omega = dot(&t, &r) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
        }
        axpy(-omega, &t, &mut r);
        if norm2(&r) <= target {
            return Ok(it);
        }
        if omega == T::zero() {
            return Err(Error::Numerical(format!(
                "BiCGStab stagnation at iteration {it}: omega = 0"
            )));
        }
    }
    Err(Error::Numerical(format!(
        "BiCGStab did not reach tolerance {tol:e} in {max_iter} iterations (residual {:e})",
        norm2(&r)
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Triplets;

    /// 1D Laplacian (SPD tridiagonal).
    fn laplacian(n: usize) -> Csr<f64> {
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
            }
        }
        t.to_csr()
    }

    #[test]
    fn cg_solves_laplacian() {
        let n = 64;
        let a = laplacian(n);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&x_true);
        let mut x = vec![0.0; n];
        let iters = pcg(&a, &b, &mut x, 1e-12, 1000).unwrap();
        assert!(iters <= n + 5);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn bicgstab_solves_nonsymmetric() {
        let n = 50;
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 4.0);
            if i > 0 {
                t.push(i, i - 1, -1.5);
            }
            if i + 1 < n {
                t.push(i, i + 1, -0.5);
            }
        }
        let a = t.to_csr();
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64).collect();
        let b = a.matvec(&x_true);
        let mut x = vec![0.0; n];
        bicgstab(&a, &b, &mut x, 1e-12, 1000).unwrap();
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = laplacian(10);
        let mut x = vec![0.0; 10];
        let it = pcg(&a, &vec![0.0; 10], &mut x, 1e-12, 100).unwrap();
        assert_eq!(it, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cg_rejects_indefinite() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(1, 1, -1.0);
        let a = t.to_csr();
        let mut x = vec![0.0; 2];
        assert!(pcg(&a, &[1.0, 1.0], &mut x, 1e-12, 10).is_err());
    }
}
