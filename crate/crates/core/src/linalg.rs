//! Thin wrappers over the dense linear-algebra backend.

use faer::linalg::solvers::DenseSolveCore;
use num_complex::Complex64 as C;
use std::sync::Once;

use crate::error::{Error, Result};
use crate::CMat;

static SEQUENTIAL: Once = Once::new();

/// Force single-threaded kernels so results do not depend on the thread count.
/// Parallelism is applied across samples instead.
pub fn use_sequential_kernels() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

pub fn frobenius(a: &CMat) -> f64 {
    a.norm_l2()
}

pub fn inverse(a: &CMat) -> CMat {
    a.partial_piv_lu().inverse()
}

pub fn eigenvalues(a: &CMat) -> Result<Vec<C>> {
    a.eigenvalues().map_err(|_| Error::EigenNoConvergence)
}

pub fn identity(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) })
}

pub fn trace(a: &CMat) -> C {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// `tr(X Y)` without forming the product.
pub fn trace_of_product(x: &CMat, y: &CMat) -> C {
    let mut acc = C::new(0.0, 0.0);
    for i in 0..x.nrows() {
        for k in 0..x.ncols() {
            acc += x[(i, k)] * y[(k, i)];
        }
    }
    acc
}

/// Spectral norm estimate by power iteration on `A†A`.
pub fn spectral_norm_estimate(a: &CMat, iterations: usize) -> f64 {
    let n = a.ncols();
    let mut v = faer::Col::<C>::from_fn(n, |i| C::new(1.0 + 0.1 * i as f64, 0.3));
    let mut est = 0.0;
    for _ in 0..iterations {
        let norm = v.norm_l2();
        if norm == 0.0 {
            return 0.0;
        }
        v /= faer::Scale(C::new(norm, 0.0));
        let av = a * &v;
        est = av.norm_l2();
        v = a.adjoint() * &av;
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_small_matrix() {
        let a = CMat::from_fn(2, 2, |i, j| C::new((i + 2 * j + 1) as f64, (i as f64) - (j as f64)));
        let prod = &a * &inverse(&a);
        let err = frobenius(&(&prod - &identity(2)));
        assert!(err < 1e-14);
    }

    #[test]
    fn diagonal_eigenvalues() {
        let d = [C::new(3.0, 0.0), C::new(-1.0, 0.0), C::new(0.0, 1.0), C::new(0.0, -1.0)];
        let a = CMat::from_fn(4, 4, |i, j| if i == j { d[i] } else { C::new(0.0, 0.0) });
        let mut e = eigenvalues(&a).unwrap();
        e.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        let mut want = d.to_vec();
        want.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        for (x, y) in e.iter().zip(&want) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn power_iteration_norm() {
        let a = CMat::from_fn(3, 3, |i, j| if i == j { C::new([1.0, -4.0, 2.0][i], 0.0) } else { C::new(0.0, 0.0) });
        assert!((spectral_norm_estimate(&a, 200) - 4.0).abs() < 1e-8);
    }
}
