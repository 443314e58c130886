//! Small self-contained linear algebra kernels: sparse symmetric storage,
//! banded Cholesky, dense and tridiagonal symmetric eigensolvers.

mod band;
mod csr;
pub mod dense;
pub mod tridiag;

pub use band::{band_inertia, BandCholesky, BandLu};
pub use csr::{CsrMatrix, TripletBuilder};

#[allow(unused_imports)]
use num_traits::Float;

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `sum_i w_i x_i y_i`
#[inline]
pub fn weighted_dot(w: &[f64], x: &[f64], y: &[f64]) -> f64 {
    w.iter().zip(x).zip(y).map(|((w, a), b)| w * a * b).sum()
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x {
        *v *= alpha;
    }
}
