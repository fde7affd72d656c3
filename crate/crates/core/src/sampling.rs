//! Gaussian matrix ensembles: GUE and Ginibre increments, elliptic drivers,
//! and Haar unitaries.
//!
//! Normalization follows the normalized trace `ts_N`: a GUE matrix at time
//! `t` has `E ts X² = t`, a Ginibre matrix has `E ts GG* = t`.

use num_complex::Complex;

use crate::error::{GlbmError, Result};
use crate::matrix::Matrix;
use crate::params::EllipticParams;
use crate::rng::RngStream;
use crate::scalar::{c, czero, Real};

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(GlbmError::invalid(format!("time increment must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// GUE matrix at time `t`: real diagonal entries of variance `t/N`,
/// off-diagonal entries with real and imaginary parts of variance `t/(2N)`.
/// The upper triangle is sampled and mirrored, so the output is exactly
/// Hermitian.
pub fn sample_gue<T: Real>(n: usize, t: T, rng: &mut RngStream) -> Result<Matrix<T>> {
    check_time(t)?;
    if t == T::zero() {
        return Ok(Matrix::zeros(n, n));
    }
    let tf = t.to_f64_lossy();
    let diag_sd = (tf / n as f64).sqrt();
    let off_sd = (tf / (2.0 * n as f64)).sqrt();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = c(T::lit(diag_sd * rng.normal()), T::zero());
        for j in i + 1..n {
            let (re, im) = rng.normal_pair();
            let z = c(T::lit(off_sd * re), T::lit(off_sd * im));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    Ok(m)
}

/// Ginibre matrix at time `t`: i.i.d. complex Gaussian entries with total
/// variance `t/N`.
pub fn sample_ginibre<T: Real>(n: usize, t: T, rng: &mut RngStream) -> Result<Matrix<T>> {
    check_time(t)?;
    if t == T::zero() {
        return Ok(Matrix::zeros(n, n));
    }
    let sd = (t.to_f64_lossy() / (2.0 * n as f64)).sqrt();
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let (re, im) = rng.normal_pair();
        data.push(c(T::lit(sd * re), T::lit(sd * im)));
    }
    Matrix::from_vec(n, n, data)
}

/// Elliptic increment `ΔW = e^{iθ}(aX + i bY)` with `X, Y` independent
/// GUE(`dt`). `Y` is not drawn when `b = 0`.
pub fn sample_elliptic_increment<T: Real>(
    params: &EllipticParams<T>,
    dt: T,
    n: usize,
    rng: &mut RngStream,
) -> Result<Matrix<T>> {
    check_time(dt)?;
    if dt == T::zero() {
        return Ok(Matrix::zeros(n, n));
    }
    let x = sample_gue(n, dt, rng)?;
    let phase = params.phase();
    let a = params.a();
    let b = params.b();
    if b == T::zero() {
        let coef = phase * a;
        return Ok(x.scale(coef));
    }
    let y = sample_gue(n, dt, rng)?;
    let ca = phase * a;
    let cb = phase * c(T::zero(), b);
    let data = x
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(xv, yv)| ca * xv + cb * yv)
        .collect();
    Matrix::from_vec(n, n, data)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of the
/// `R` diagonal absorbed into `Q`.
pub fn sample_haar_unitary<T: Real>(n: usize, rng: &mut RngStream) -> Result<Matrix<T>> {
    let g = sample_ginibre::<T>(n, T::one(), rng)?;
    Ok(householder_q_fixed_phase(&g))
}

/// `Q` from a Householder QR of `a`, normalized so that `R` has a positive
/// real diagonal.
pub(crate) fn householder_q_fixed_phase<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.rows();
    // Work on columns of a copy: reflectors stored as vectors.
    let mut r = a.clone();
    let mut reflectors: Vec<(Vec<Complex<T>>, T)> = Vec::with_capacity(n);
    let mut diag_phase = vec![c(T::one(), T::zero()); n];
    for k in 0..n {
        let mut v: Vec<Complex<T>> = (k..n).map(|i| r[(i, k)]).collect();
        let alpha = v[0];
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if xnorm == T::zero() {
            reflectors.push((v, T::zero()));
            continue;
        }
        let ph = if alpha.norm() == T::zero() { c(T::one(), T::zero()) } else { alpha / alpha.norm() };
        // H x = -ph·|x| e1
        v[0] = alpha + ph * xnorm;
        let vnorm2: T = v.iter().map(|z| z.norm_sqr()).sum();
        let beta = T::lit(2.0) / vnorm2;
        for j in k..n {
            let mut s = czero::<T>();
            for (i, vi) in v.iter().enumerate() {
                s += vi.conj() * r[(k + i, j)];
            }
            s = s * beta;
            for (i, vi) in v.iter().enumerate() {
                r[(k + i, j)] -= vi * s;
            }
        }
        let d = r[(k, k)];
        diag_phase[k] = if d.norm() == T::zero() { c(T::one(), T::zero()) } else { d / d.norm() };
        reflectors.push((v, beta));
    }
    // Q = H_0 H_1 ... H_{n-1}; apply to identity from the right-most factor.
    let mut q = Matrix::identity(n);
    for k in (0..n).rev() {
        let (v, beta) = &reflectors[k];
        if *beta == T::zero() {
            continue;
        }
        for j in 0..n {
            let mut s = czero::<T>();
            for (i, vi) in v.iter().enumerate() {
                s += vi.conj() * q[(k + i, j)];
            }
            s = s * *beta;
            for (i, vi) in v.iter().enumerate() {
                q[(k + i, j)] -= vi * s;
            }
        }
    }
    // Q·diag(phase) makes R's diagonal positive.
    for i in 0..n {
        for (j, p) in diag_phase.iter().enumerate() {
            q[(i, j)] *= p;
        }
    }
    q
}
