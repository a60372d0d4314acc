//! Dense symmetric eigendecomposition: Householder tridiagonalization
//! followed by implicit-shift QL iteration, with eigenvector accumulation.
//! Classic EISPACK TRED2/TQL2 lineage, translated to 0-based indexing.

use super::{Dense, Scalar};
use crate::{Error, Result};

/// Eigendecomposition of a symmetric matrix.
///
/// Returns `(values, vectors)` with eigenvalues sorted in descending order and
/// the matching eigenvectors as columns of `vectors`. Only the symmetric part
/// of the input matters; the caller is expected to pass a symmetric matrix.
pub fn sym_eigen<T: Scalar>(a: &Dense<T>) -> Result<(Vec<T>, Dense<T>)> {
    if a.rows() != a.cols() {
        return Err(Error::Numerical(format!(
            "sym_eigen requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), Dense::zeros(0, 0)));
    }
    let mut z = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut z, &mut d, &mut e);
    ql_implicit(&mut d, &mut e, &mut z)?;

    // sort descending, permuting eigenvector columns alongside
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).expect("finite eigenvalues"));
    let values: Vec<T> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Dense::zeros(n, n);
    for (jnew, &jold) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, jnew)] = z[(i, jold)];
        }
    }
    Ok((values, vectors))
}

/// Householder reduction to tridiagonal form, accumulating the orthogonal
/// transform in `z` so QL can rotate it into the eigenvector matrix.
/// On return `d` holds the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize<T: Scalar>(z: &mut Dense<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let mut scale = T::zero();
            for k in 0..=l {
                scale += z[(i, k)].abs();
            }
            if scale == T::zero() {
                e[i] = z[(i, l)];
            } else {
                for k in 0..=l {
                    let v = z[(i, k)] / scale;
                    z[(i, k)] = v;
                    h += v * v;
                }
                let f = z[(i, l)];
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[(i, l)] = f - g;
                let mut f_acc = T::zero();
                for j in 0..=l {
                    z[(j, i)] = z[(i, j)] / h;
                    let mut g = T::zero();
                    for k in 0..=j {
                        g += z[(j, k)] * z[(i, k)];
                    }
                    for k in j + 1..=l {
                        g += z[(k, j)] * z[(i, k)];
                    }
                    e[j] = g / h;
                    f_acc += e[j] * z[(i, j)];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = z[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let upd = f * e[k] + g * z[(i, k)];
                        z[(j, k)] = z[(j, k)] - upd;
                    }
                }
            }
        } else {
            e[i] = z[(i, l)];
        }
        d[i] = h;
    }
    d[0] = T::zero();
    e[0] = T::zero();
    for i in 0..n {
        if d[i] != T::zero() {
            for j in 0..i {
                let mut g = T::zero();
                for k in 0..i {
                    g += z[(i, k)] * z[(k, j)];
                }
                for k in 0..i {
                    let upd = g * z[(k, i)];
                    z[(k, j)] = z[(k, j)] - upd;
                }
            }
        }
        d[i] = z[(i, i)];
        z[(i, i)] = T::one();
        for j in 0..i {
            z[(j, i)] = T::zero();
            z[(i, j)] = T::zero();
        }
    }
}

/// QL iteration with implicit shifts on the tridiagonal (d, e), rotating the
/// accumulated transform `z`.
fn ql_implicit<T: Scalar>(d: &mut [T], e: &mut [T], z: &mut Dense<T>) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let two = T::from_f64_lossy(2.0);
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            // locate a negligible subdiagonal element
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical(format!(
                    "symmetric QL failed to converge at eigenvalue {l} after 60 sweeps"
                )));
            }
            // form implicit shift
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let sign_r = if g >= T::zero() { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    fn reconstruct(values: &[f64], vectors: &Dense<f64>) -> Dense<f64> {
        let n = values.len();
        Dense::from_fn(n, n, |i, j| {
            (0..n).map(|k| vectors[(i, k)] * values[k] * vectors[(j, k)]).sum()
        })
    }

    #[test]
    fn diagonal_matrix() {
        let mut a: Dense<f64> = Dense::zeros(3, 3);
        a[(0, 0)] = 3.0;
        a[(1, 1)] = -1.0;
        a[(2, 2)] = 2.0;
        let (vals, _) = sym_eigen(&a).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-14);
        assert!((vals[1] - 2.0).abs() < 1e-14);
        assert!((vals[2] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_by_two_hand_computed() {
        // eigenvalues of [[2,1],[1,2]] are 3 and 1
        let a: Dense<f64> = Dense::from_rows(2, 2, vec![2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = sym_eigen(&a).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        let v0 = vecs.column(0);
        assert!((v0[0].abs() - (0.5f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn random_symmetric_reconstructs() {
        // deterministic pseudo-random fill
        let n = 24;
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut a = Dense::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rnd();
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let (vals, vecs) = sym_eigen(&a).unwrap();
        let norm = a.max_abs();
        let rec = reconstruct(&vals, &vecs);
        for i in 0..n {
            for j in 0..n {
                assert!(
                    (rec[(i, j)] - a[(i, j)]).abs() < 1e-12 * norm.max(1.0),
                    "reconstruction off at ({i},{j})"
                );
            }
        }
        // eigenvector orthonormality
        for p in 0..n {
            for q in 0..n {
                let ip = dot(&vecs.column(p), &vecs.column(q));
                let expect = if p == q { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12);
            }
        }
        // descending order
        for k in 1..n {
            assert!(vals[k - 1] >= vals[k]);
        }
    }

    #[test]
    fn rank_deficient_psd() {
        // Gram matrix of two identical vectors: rank 1
        let a: Dense<f64> = Dense::from_rows(2, 2, vec![2.0, 2.0, 2.0, 2.0]);
        let (vals, _) = sym_eigen(&a).unwrap();
        assert!((vals[0] - 4.0).abs() < 1e-14);
        assert!(vals[1].abs() < 1e-14);
    }
}
