//! Small dense/sparse linear algebra kernels.
//!
//! Everything here is generic over [`Scalar`] so the kernels work for `f32`
//! and `f64` alike; the rest of the crate instantiates them at [`crate::Real`].

mod dense;
mod eigen;
mod iterative;
mod sparse;

pub use dense::{Dense, LuFactors};
pub use eigen::sym_eigen;
pub use iterative::{bicgstab, pcg};
pub use sparse::{Csr, Triplets};

/// Floating-point scalar usable by the kernels.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + 'static
{
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + std::ops::AddAssign
        + std::ops::SubAssign
        + std::ops::MulAssign
        + std::fmt::Debug
        + std::fmt::Display
        + std::fmt::LowerExp
        + 'static
{
}

/// Euclidean dot product.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

/// Euclidean norm.
pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha * x`.
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}
