//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All matrix, spectral and geometric code is written against [`Real`], which
//! is implemented for `f32` and `f64`. The trait also carries the dense
//! complex matrix-multiply kernel so that each precision can dispatch to a
//! tuned implementation while generic code stays oblivious.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant, rounding to the nearest representable value.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count or index.
    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }

    /// Lossy conversion to `f64`, used for reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Row-major complex GEMM: `c ← alpha·a·b + beta·c` with `a` of shape
    /// `m×k`, `b` of shape `k×n` and `c` of shape `m×n`.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Complex<Self>,
        a: &[Complex<Self>],
        b: &[Complex<Self>],
        beta: Complex<Self>,
        c: &mut [Complex<Self>],
    ) {
        gemm_fallback(m, k, n, alpha, a, b, beta, c);
    }
}

/// Portable i-k-j GEMM used when no tuned kernel is available.
#[allow(clippy::too_many_arguments)]
pub fn gemm_fallback<T: Real>(
    m: usize,
    k: usize,
    n: usize,
    alpha: Complex<T>,
    a: &[Complex<T>],
    b: &[Complex<T>],
    beta: Complex<T>,
    c: &mut [Complex<T>],
) {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    assert_eq!(c.len(), m * n);
    let zero = Complex::new(T::zero(), T::zero());
    for i in 0..m {
        let row = &mut c[i * n..(i + 1) * n];
        if beta == zero {
            row.iter_mut().for_each(|x| *x = zero);
        } else {
            row.iter_mut().for_each(|x| *x = *x * beta);
        }
        for p in 0..k {
            let aip = alpha * a[i * k + p];
            if aip == zero {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (cij, bpj) in row.iter_mut().zip(brow) {
                *cij = *cij + aip * *bpj;
            }
        }
    }
}

macro_rules! impl_real {
    ($t:ty, $kernel:path) => {
        impl Real for $t {
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                alpha: Complex<Self>,
                a: &[Complex<Self>],
                b: &[Complex<Self>],
                beta: Complex<Self>,
                c: &mut [Complex<Self>],
            ) {
                assert_eq!(a.len(), m * k);
                assert_eq!(b.len(), k * n);
                assert_eq!(c.len(), m * n);
                if m == 0 || n == 0 {
                    return;
                }
                // `Complex<T>` is `repr(C)` with fields (re, im), which is the
                // `[T; 2]` layout the kernel expects.
                unsafe {
                    $kernel(
                        matrixmultiply::CGemmOption::Standard,
                        matrixmultiply::CGemmOption::Standard,
                        m,
                        k,
                        n,
                        [alpha.re, alpha.im],
                        a.as_ptr() as *const [$t; 2],
                        k as isize,
                        1,
                        b.as_ptr() as *const [$t; 2],
                        n as isize,
                        1,
                        [beta.re, beta.im],
                        c.as_mut_ptr() as *mut [$t; 2],
                        n as isize,
                        1,
                    );
                }
            }
        }
    };
}

impl_real!(f32, matrixmultiply::cgemm);
impl_real!(f64, matrixmultiply::zgemm);

/// `|re| + |im|`, the cheap complex magnitude used in deflation tests.
#[inline]
pub fn cabs1<T: Real>(z: Complex<T>) -> T {
    z.re.abs() + z.im.abs()
}

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub(crate) fn creal<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(m: usize, n: usize, salt: f64) -> Vec<Complex<f64>> {
        (0..m * n)
            .map(|i| Complex::new((i as f64 * 0.37 + salt).sin(), (i as f64 * 0.11 - salt).cos()))
            .collect()
    }

    #[test]
    fn tuned_kernel_matches_fallback() {
        let (m, k, n) = (7, 5, 9);
        let a = sample(m, k, 0.3);
        let b = sample(k, n, 1.7);
        let mut c1 = sample(m, n, 2.1);
        let mut c2 = c1.clone();
        let alpha = Complex::new(0.5, -1.25);
        let beta = Complex::new(-0.75, 0.5);
        f64::gemm(m, k, n, alpha, &a, &b, beta, &mut c1);
        gemm_fallback(m, k, n, alpha, &a, &b, beta, &mut c2);
        for (x, y) in c1.iter().zip(&c2) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn single_precision_kernel_runs() {
        let a: Vec<Complex<f32>> = vec![Complex::new(1.0, 1.0); 4];
        let b: Vec<Complex<f32>> = vec![Complex::new(0.0, 1.0); 4];
        let mut out = vec![Complex::new(0.0f32, 0.0); 4];
        f32::gemm(2, 2, 2, cone(), &a, &b, czero(), &mut out);
        // (1+i)·i summed twice = 2(i - 1)
        assert_eq!(out[0], Complex::new(-2.0, 2.0));
    }
}
