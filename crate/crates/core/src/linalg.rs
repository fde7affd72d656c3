//! Dense eigenvalue and singular value kernels.
//!
//! Eigenvalues: Householder reduction to upper Hessenberg form followed by
//! the complex single-shift QR iteration with Ahues–Tisseur deflation and
//! exceptional shifts (the scheme of LAPACK `zlahqr`, eigenvalues only).
//!
//! Singular values: Householder bidiagonalization to a real bidiagonal
//! matrix, then bisection with Sturm counts on its Golub–Kahan tridiagonal
//! form, whose eigenvalues are `±σ_j`.

use num_complex::Complex;

use crate::error::{GlbmError, Result};
use crate::matrix::Matrix;
use crate::scalar::{cabs1, creal, czero, Real};

/// Elementary reflector `H = I − τ v vᴴ` with `v[0] = 1` and
/// `Hᴴ (α, x) = (β, 0)`, `β` real.
struct Reflector<T: Real> {
    tau: Complex<T>,
    beta: T,
}

/// Generates a reflector for `(alpha, x)`, overwriting `x` with `v[1..]`.
fn larfg<T: Real>(alpha: Complex<T>, x: &mut [Complex<T>]) -> Reflector<T> {
    let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if xnorm == T::zero() && alpha.im == T::zero() {
        return Reflector { tau: czero(), beta: alpha.re };
    }
    let norm = (alpha.norm_sqr() + xnorm * xnorm).sqrt();
    let beta = if alpha.re >= T::zero() { -norm } else { norm };
    let tau = Complex::new((beta - alpha.re) / beta, -alpha.im / beta);
    let scale = Complex::new(T::one(), T::zero()) / (alpha - creal(beta));
    for v in x.iter_mut() {
        *v *= scale;
    }
    Reflector { tau, beta }
}

/// Reduces a square matrix to upper Hessenberg form by unitary similarity.
pub fn hessenberg<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.rows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    let mut v = vec![czero::<T>(); n];
    let mut w = vec![czero::<T>(); n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let alpha = h[(k + 1, k)];
        let mut x: Vec<Complex<T>> = (k + 2..n).map(|i| h[(i, k)]).collect();
        let r = larfg(alpha, &mut x);
        if r.tau == czero() {
            continue;
        }
        v[0] = creal(T::one());
        v[1..len].copy_from_slice(&x);
        let vs = &v[..len];
        // H ← Hᴴ_k H on rows k+1.., columns k..
        w[k..n].iter_mut().for_each(|z| *z = czero());
        for (ii, vi) in vs.iter().enumerate() {
            let row = h.row(k + 1 + ii);
            let cv = vi.conj();
            for j in k..n {
                w[j] += cv * row[j];
            }
        }
        let ctau = r.tau.conj();
        for (ii, vi) in vs.iter().enumerate() {
            let f = ctau * vi;
            let row = h.row_mut(k + 1 + ii);
            for j in k..n {
                row[j] -= f * w[j];
            }
        }
        h[(k + 1, k)] = creal(r.beta);
        for i in k + 2..n {
            h[(i, k)] = czero();
        }
        // H ← H H_k on columns k+1..
        for i in 0..n {
            let row = h.row_mut(i);
            let mut s = czero::<T>();
            for (jj, vj) in vs.iter().enumerate() {
                s += row[k + 1 + jj] * vj;
            }
            let f = s * r.tau;
            for (jj, vj) in vs.iter().enumerate() {
                row[k + 1 + jj] -= f * vj.conj();
            }
        }
    }
    h
}

/// Eigenvalues of a square matrix together with a backward-error bound
/// relative to `‖A‖_F`.
pub fn eigenvalues<T: Real>(a: &Matrix<T>) -> Result<(Vec<Complex<T>>, T)> {
    if !a.is_square() {
        return Err(GlbmError::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    if !a.is_finite() {
        return Err(GlbmError::invalid("matrix has non-finite entries"));
    }
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), T::zero()));
    }
    let anorm = a.frobenius_norm();
    let mut h = hessenberg(a);
    let (w, neglected) = hessenberg_qr(&mut h)?;
    let residual = if anorm == T::zero() {
        T::zero()
    } else {
        (neglected + T::from_count(n) * T::epsilon() * anorm) / anorm
    };
    Ok((w, residual))
}

/// Complex single-shift QR on an upper Hessenberg matrix (eigenvalues
/// only). Returns the eigenvalues and the largest subdiagonal magnitude
/// set to zero by deflation.
fn hessenberg_qr<T: Real>(h: &mut Matrix<T>) -> Result<(Vec<Complex<T>>, T)> {
    let n = h.rows();
    let mut w = vec![czero::<T>(); n];
    let mut neglected = T::zero();
    if n == 1 {
        w[0] = h[(0, 0)];
        return Ok((w, neglected));
    }
    let (ilo, ihi) = (0usize, n - 1);
    let half = T::lit(0.5);
    let dat1 = T::lit(0.75);
    let kexsh = 10usize;

    // make the subdiagonal real
    for i in ilo + 1..=ihi {
        let hv = h[(i, i - 1)];
        if hv.im != T::zero() {
            let sc = hv / cabs1(hv);
            let sc = sc.conj() / sc.norm();
            h[(i, i - 1)] = creal(hv.norm());
            for j in i..=ihi {
                h[(i, j)] *= sc;
            }
            let csc = sc.conj();
            for j in ilo..=ihi.min(i + 1) {
                h[(j, i)] *= csc;
            }
        }
    }

    let safmin = T::min_positive_value();
    let ulp = T::epsilon();
    let nh = T::from_count(ihi - ilo + 1);
    let smlnum = safmin * (nh / ulp);
    let itmax = 30 * 10usize.max(ihi - ilo + 1);
    let mut kdefl = 0usize;

    let mut i = ihi as isize;
    while i >= ilo as isize {
        let iu = i as usize;
        let mut l = ilo;
        let mut converged = false;
        for _its in 0..=itmax {
            // look for a single small subdiagonal element
            let mut k = iu;
            while k > l {
                if cabs1(h[(k, k - 1)]) <= smlnum {
                    break;
                }
                let mut tst = cabs1(h[(k - 1, k - 1)]) + cabs1(h[(k, k)]);
                if tst == T::zero() {
                    if k >= ilo + 2 {
                        tst += h[(k - 1, k - 2)].re.abs();
                    }
                    if k < ihi {
                        tst += h[(k + 1, k)].re.abs();
                    }
                }
                if h[(k, k - 1)].re.abs() <= ulp * tst {
                    let hk = cabs1(h[(k, k - 1)]);
                    let hk2 = cabs1(h[(k - 1, k)]);
                    let ab = hk.max(hk2);
                    let ba = hk.min(hk2);
                    let d1 = cabs1(h[(k, k)]);
                    let d2 = cabs1(h[(k - 1, k - 1)] - h[(k, k)]);
                    let aa = d1.max(d2);
                    let bb = d1.min(d2);
                    let s = aa + ab;
                    if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                        break;
                    }
                }
                k -= 1;
            }
            l = k;
            if l > ilo {
                neglected = neglected.max(h[(l, l - 1)].norm());
                h[(l, l - 1)] = czero();
            }
            if l >= iu {
                converged = true;
                break;
            }
            kdefl += 1;
            let (i1, i2) = (l, iu);

            let t = if kdefl.is_multiple_of(2 * kexsh) {
                let s = dat1 * h[(iu, iu - 1)].re.abs();
                h[(iu, iu)] + creal(s)
            } else if kdefl.is_multiple_of(kexsh) {
                let s = dat1 * h[(l + 1, l)].re.abs();
                h[(l, l)] + creal(s)
            } else {
                let mut t = h[(iu, iu)];
                let u = h[(iu - 1, iu)].sqrt() * h[(iu, iu - 1)].sqrt();
                let mut s = cabs1(u);
                if s != T::zero() {
                    let x = (h[(iu - 1, iu - 1)] - t) * half;
                    let sx = cabs1(x);
                    s = s.max(cabs1(x));
                    let xs = x / s;
                    let us = u / s;
                    let mut y = (xs * xs + us * us).sqrt() * s;
                    if sx > T::zero() {
                        let xn = x / sx;
                        if xn.re * y.re + xn.im * y.im < T::zero() {
                            y = -y;
                        }
                    }
                    t -= u * (u / (x + y));
                }
                t
            };

            // look for two consecutive small subdiagonal elements
            let mut m = iu - 1;
            let mut v: [Complex<T>; 2];
            loop {
                let h11 = h[(m, m)];
                let h22 = h[(m + 1, m + 1)];
                let mut h11s = h11 - t;
                let mut h21 = h[(m + 1, m)].re;
                let s = cabs1(h11s) + h21.abs();
                h11s = h11s / s;
                h21 = h21 / s;
                v = [h11s, creal(h21)];
                if m == l {
                    break;
                }
                let h10 = h[(m, m - 1)].re;
                if h10.abs() * h21.abs() <= ulp * (cabs1(h11s) * (cabs1(h11) + cabs1(h22))) {
                    break;
                }
                m -= 1;
            }

            // single-shift QR sweep
            for k in m..iu {
                if k > m {
                    v = [h[(k, k - 1)], h[(k + 1, k - 1)]];
                }
                let mut x = [v[1]];
                let r = larfg(v[0], &mut x);
                let t1 = r.tau;
                if k > m {
                    h[(k, k - 1)] = creal(r.beta);
                    h[(k + 1, k - 1)] = czero();
                }
                let v2 = x[0];
                let t2 = (t1 * v2).re;
                let ct1 = t1.conj();
                for j in k..=i2 {
                    let sum = ct1 * h[(k, j)] + h[(k + 1, j)] * t2;
                    h[(k, j)] -= sum;
                    h[(k + 1, j)] -= sum * v2;
                }
                let cv2 = v2.conj();
                for j in i1..=(k + 2).min(iu) {
                    let sum = t1 * h[(j, k)] + h[(j, k + 1)] * t2;
                    h[(j, k)] -= sum;
                    h[(j, k + 1)] -= sum * cv2;
                }
                if k == m && m > l {
                    let temp = creal::<T>(T::one()) - t1;
                    let temp = temp / temp.norm();
                    h[(m + 1, m)] *= temp.conj();
                    if m + 2 <= iu {
                        h[(m + 2, m + 1)] *= temp;
                    }
                    for j in m..=iu {
                        if j != m + 1 {
                            for jj in j + 1..=i2 {
                                h[(j, jj)] *= temp;
                            }
                            let ctemp = temp.conj();
                            for ii in i1..j {
                                h[(ii, j)] *= ctemp;
                            }
                        }
                    }
                }
            }

            // keep h[i, i-1] real
            let temp = h[(iu, iu - 1)];
            if temp.im != T::zero() {
                let rtemp = temp.norm();
                h[(iu, iu - 1)] = creal(rtemp);
                let temp = temp / rtemp;
                let ctemp = temp.conj();
                for jj in iu + 1..=i2 {
                    h[(iu, jj)] *= ctemp;
                }
                for ii in i1..iu {
                    h[(ii, iu)] *= temp;
                }
            }
        }
        if !converged {
            return Err(GlbmError::SolverFailure(format!(
                "QR iteration failed to converge for eigenvalue {iu} of {n} after {itmax} iterations"
            )));
        }
        w[iu] = h[(iu, iu)];
        kdefl = 0;
        i = l as isize - 1;
    }
    if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(GlbmError::SolverFailure("non-finite eigenvalue".into()));
    }
    Ok((w, neglected))
}

/// Real bidiagonal form `(d, e)` of a square matrix: `d` holds the diagonal
/// and `e` the superdiagonal, both up to sign.
pub fn bidiagonalize<T: Real>(a: &Matrix<T>) -> (Vec<T>, Vec<T>) {
    let n = a.rows();
    assert!(a.is_square(), "bidiagonalize expects a square matrix");
    let mut m = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n.saturating_sub(1)];
    let mut w = vec![czero::<T>(); n];
    for k in 0..n {
        // left reflector on column k, rows k..
        let alpha = m[(k, k)];
        let mut x: Vec<Complex<T>> = (k + 1..n).map(|i| m[(i, k)]).collect();
        let r = larfg(alpha, &mut x);
        d[k] = r.beta;
        if r.tau != czero() && k + 1 < n {
            let ctau = r.tau.conj();
            // w = vᴴ M[k.., k+1..]
            w[k + 1..n].copy_from_slice(&m.row(k)[k + 1..n]);
            for (ii, vi) in x.iter().enumerate() {
                let cv = vi.conj();
                let row = m.row(k + 1 + ii);
                for j in k + 1..n {
                    w[j] += cv * row[j];
                }
            }
            {
                let row = m.row_mut(k);
                for j in k + 1..n {
                    row[j] -= ctau * w[j];
                }
            }
            for (ii, vi) in x.iter().enumerate() {
                let f = ctau * vi;
                let row = m.row_mut(k + 1 + ii);
                for j in k + 1..n {
                    row[j] -= f * w[j];
                }
            }
        }
        if k + 1 >= n {
            break;
        }
        // right reflector on row k, columns k+1..
        let alpha = m[(k, k + 1)].conj();
        let mut y: Vec<Complex<T>> = (k + 2..n).map(|j| m[(k, j)].conj()).collect();
        let r = larfg(alpha, &mut y);
        e[k] = r.beta;
        if r.tau != czero() {
            for i in k + 1..n {
                let row = m.row_mut(i);
                let mut s = row[k + 1];
                for (jj, vj) in y.iter().enumerate() {
                    s += row[k + 2 + jj] * vj;
                }
                let f = s * r.tau;
                row[k + 1] -= f;
                for (jj, vj) in y.iter().enumerate() {
                    row[k + 2 + jj] -= f * vj.conj();
                }
            }
        }
    }
    (d, e)
}

/// Sturm count for the Golub–Kahan tridiagonal (zero diagonal, squared
/// off-diagonals `b2`): number of singular values strictly below `x > 0`.
fn count_below<T: Real>(b2: &[T], x: T, pivmin: T) -> usize {
    let mut neg = 0usize;
    let mut q = -x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < T::zero() {
        neg += 1;
    }
    for &b in b2 {
        q = -x - b / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < T::zero() {
            neg += 1;
        }
    }
    neg - b2.len().div_ceil(2)
}

/// Singular values of the bidiagonal `(d, e)` with ascending ranks in
/// `want` (rank 0 is the smallest), returned in ascending order of rank.
/// Values below `σ_max·ε²` are reported as zero.
fn bidiag_singular_values<T: Real>(d: &[T], e: &[T], want: std::ops::Range<usize>) -> Vec<T> {
    let n = d.len();
    let mut out = vec![T::zero(); n];
    if n == 0 || want.is_empty() {
        return Vec::new();
    }
    // off-diagonals of the 2n×2n tridiagonal: d0, e0, d1, e1, ..., d_{n-1}
    let mut b2 = Vec::with_capacity(2 * n - 1);
    for k in 0..n {
        b2.push(d[k] * d[k]);
        if k + 1 < n {
            b2.push(e[k] * e[k]);
        }
    }
    let mut upper = T::zero();
    let babs: Vec<T> = b2.iter().map(|b| b.sqrt()).collect();
    for i in 0..babs.len() + 1 {
        let left = if i > 0 { babs[i - 1] } else { T::zero() };
        let right = if i < babs.len() { babs[i] } else { T::zero() };
        upper = upper.max(left + right);
    }
    if upper == T::zero() {
        return vec![T::zero(); want.len()];
    }
    let bmax = b2.iter().fold(T::zero(), |m, &b| m.max(b));
    let pivmin = T::min_positive_value() * bmax.max(T::one());
    let eps = T::epsilon();
    let hi0 = upper * (T::one() + T::lit(4.0) * eps) + pivmin;
    let abstol = upper * eps * eps;

    // stack of (lo, hi, count_below(lo), count_below(hi))
    let mut stack = vec![(T::zero(), hi0, 0usize, n)];
    while let Some((lo, hi, clo, chi)) = stack.pop() {
        if chi <= clo || chi <= want.start || clo >= want.end {
            continue;
        }
        let width = hi - lo;
        if width <= abstol.max(T::lit(2.0) * eps * hi.abs()) {
            let mid = if hi <= abstol { T::zero() } else { (lo + hi) * T::lit(0.5) };
            for slot in out.iter_mut().take(chi).skip(clo) {
                *slot = mid;
            }
            continue;
        }
        let mid = (lo + hi) * T::lit(0.5);
        let cm = count_below(&b2, mid, pivmin).clamp(clo, chi);
        stack.push((lo, mid, clo, cm));
        stack.push((mid, hi, cm, chi));
    }
    out[want].to_vec()
}

/// All singular values, sorted descending.
pub fn singular_values<T: Real>(a: &Matrix<T>) -> Vec<T> {
    let (d, e) = bidiagonalize(a);
    let n = d.len();
    let mut s = bidiag_singular_values(&d, &e, 0..n);
    s.reverse();
    s
}

/// Largest singular value (operator norm).
pub fn operator_norm<T: Real>(a: &Matrix<T>) -> T {
    let (d, e) = bidiagonalize(a);
    let n = d.len();
    if n == 0 {
        return T::zero();
    }
    bidiag_singular_values(&d, &e, n - 1..n)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::sampling::sample_ginibre;
    use crate::scalar::c;

    fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn hessenberg_preserves_trace_and_frobenius() {
        let mut r = RngStream::new(1, 0);
        let a = sample_ginibre::<f64>(9, 1.0, &mut r).unwrap();
        let h = hessenberg(&a);
        for i in 0..9usize {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h[(i, j)], czero());
            }
        }
        assert!((h.trace() - a.trace()).norm() < 1e-12);
        assert!((h.frobenius_norm() - a.frobenius_norm()).abs() < 1e-12);
        let h2 = h.matmul(&h);
        let a2 = a.matmul(&a);
        assert!((h2.trace() - a2.trace()).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_diagonal_and_defective() {
        let a = Matrix::<f64>::from_diag(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let (w, res) = eigenvalues(&a).unwrap();
        let w = sorted(w);
        for (k, z) in w.iter().enumerate() {
            assert!((z - c(k as f64 + 1.0, 0.0)).norm() < 1e-14);
        }
        assert!(res < 1e-12);
        let j = Matrix::<f64>::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let (w, _) = eigenvalues(&j).unwrap();
        assert!(w.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn companion_matrix_roots() {
        let a = Matrix::<f64>::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let w = sorted(eigenvalues(&a).unwrap().0);
        assert!((w[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((w[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigenvalues_match_trace_powers_and_determinant() {
        for (seed, n) in [(3u64, 6usize), (4, 20), (5, 64)] {
            let mut r = RngStream::new(seed, 0);
            let a = sample_ginibre::<f64>(n, 1.0, &mut r).unwrap();
            let (w, res) = eigenvalues(&a).unwrap();
            assert!(res < 1e-12);
            let mut p = a.clone();
            for power in 1..=4 {
                let sum: Complex<f64> = w.iter().map(|z| z.powi(power)).sum();
                assert!((sum - p.trace()).norm() < 1e-9 * n as f64, "power {power}");
                p = p.matmul(&a);
            }
            let prod: Complex<f64> = w.iter().product();
            let det = a.determinant();
            assert!((prod - det).norm() <= 1e-9 * det.norm().max(1e-300));
        }
    }

    #[test]
    fn eigenvalues_of_triangular_non_normal() {
        let n = 12;
        let a = Matrix::<f64>::from_fn(n, n, |i, j| {
            if i == j {
                c(i as f64, -(i as f64) / 2.0)
            } else if j > i {
                c(1.0, 0.5)
            } else {
                czero()
            }
        });
        let w = eigenvalues(&a).unwrap().0;
        for k in 0..n {
            let target = c(k as f64, -(k as f64) / 2.0);
            assert!(w.iter().any(|z| (z - target).norm() < 1e-8), "missing {target}");
        }
    }

    #[test]
    fn eigenvalues_f32() {
        let a = Matrix::<f32>::from_diag(&[c(1.0, 1.0), c(-2.0, 0.5)]);
        let w = eigenvalues(&a).unwrap().0;
        assert!(w.iter().any(|z| (z - c(1.0, 1.0)).norm() < 1e-5));
        assert!(w.iter().any(|z| (z - c(-2.0, 0.5)).norm() < 1e-5));
    }

    #[test]
    fn non_finite_input_rejected() {
        let mut a = Matrix::<f64>::identity(3);
        a[(1, 2)] = c(f64::NAN, 0.0);
        assert!(eigenvalues(&a).is_err());
    }

    #[test]
    fn singular_values_basic() {
        let s = singular_values(&Matrix::<f64>::identity(5));
        assert!(s.iter().all(|x| (x - 1.0).abs() < 1e-14));
        let a = Matrix::<f64>::from_diag(&[c(2.0, 0.0), c(-1.0, 0.0)]);
        let s = singular_values(&a);
        assert!((s[0] - 2.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);
        let z = Matrix::<f64>::zeros(3, 3);
        assert_eq!(singular_values(&z), vec![0.0; 3]);
    }

    #[test]
    fn singular_values_determinant_and_frobenius() {
        let mut r = RngStream::new(21, 0);
        let a = sample_ginibre::<f64>(30, 1.0, &mut r).unwrap();
        let s = singular_values(&a);
        assert!(s.windows(2).all(|p| p[0] >= p[1]));
        let fro: f64 = s.iter().map(|x| x * x).sum();
        assert!((fro - a.frobenius_norm_sq()).abs() < 1e-11 * fro);
        let logdet: f64 = s.iter().map(|x| x.ln()).sum();
        assert!((logdet - a.determinant().norm().ln()).abs() < 1e-9);
        assert!((operator_norm(&a) - s[0]).abs() < 1e-14 * s[0]);
    }

    #[test]
    fn singular_values_of_rank_deficient() {
        let a = Matrix::<f64>::from_fn(4, 4, |i, j| c((i + 1) as f64 * (j + 1) as f64, 0.0));
        let s = singular_values(&a);
        assert!((s[0] - 30.0).abs() < 1e-12);
        assert!(s[1..].iter().all(|x| *x < 1e-13));
    }

    #[test]
    fn tiny_singular_value_resolved() {
        let a = Matrix::<f64>::from_diag(&[c(1.0, 0.0), c(0.0, 1e-9), c(3.0, 0.0)]);
        let s = singular_values(&a);
        assert!((s[2] - 1e-9).abs() < 1e-20, "{s:?}");
    }
}
