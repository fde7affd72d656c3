//! Dense row-major complex matrices.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{GlbmError, Result};
use crate::scalar::{cone, creal, czero, Real};

/// Dense `rows × cols` complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .take(8)
                .map(|z| format!("{:.4e}{:+.4e}i", z.re, z.im))
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![czero(); rows * cols] }
    }

    pub fn zeros_square(n: usize) -> Self {
        Self::zeros(n, n)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_diag(diag: &[Complex<T>]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from a row-major buffer.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(GlbmError::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(GlbmError::invalid("ragged rows"));
        }
        Ok(Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() })
    }

    /// Block-diagonal matrix with `copies` repetitions of `block`.
    pub fn block_diagonal(block: &Matrix<T>, copies: usize) -> Self {
        let (br, bc) = (block.rows, block.cols);
        let mut m = Self::zeros(br * copies, bc * copies);
        for b in 0..copies {
            for i in 0..br {
                for j in 0..bc {
                    m[(b * br + i, b * bc + j)] = block[(i, j)];
                }
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    #[inline]
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Complex<T>] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Matrix product; panics on incompatible shapes.
    pub fn matmul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        T::gemm(self.rows, self.cols, rhs.cols, cone(), &self.data, &rhs.data, czero(), &mut out.data);
        out
    }

    /// `out ← alpha·self·rhs + beta·out`.
    pub fn gemm_into(&self, rhs: &Matrix<T>, alpha: Complex<T>, beta: Complex<T>, out: &mut Matrix<T>) -> Result<()> {
        if self.cols != rhs.rows || out.rows != self.rows || out.cols != rhs.cols {
            return Err(GlbmError::DimensionMismatch {
                expected: format!("({}x{})·({}x{}) into {}x{}", self.rows, self.cols, self.cols, out.cols, self.rows, out.cols),
                found: format!("({}x{})·({}x{}) into {}x{}", self.rows, self.cols, rhs.rows, rhs.cols, out.rows, out.cols),
            });
        }
        T::gemm(self.rows, self.cols, rhs.cols, alpha, &self.data, &rhs.data, beta, &mut out.data);
        Ok(())
    }

    pub fn add(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn add_assign(&mut self, rhs: &Matrix<T>) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a += b);
    }

    /// `self ← self + alpha·rhs`.
    pub fn axpy(&mut self, alpha: Complex<T>, rhs: &Matrix<T>) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a += alpha * b);
    }

    pub fn scale(&self, alpha: Complex<T>) -> Matrix<T> {
        let data = self.data.iter().map(|a| a * alpha).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale_mut(&mut self, alpha: Complex<T>) {
        self.data.iter_mut().for_each(|a| *a *= alpha);
    }

    /// `self − z·I`.
    pub fn shifted(&self, z: Complex<T>) -> Matrix<T> {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= z;
        }
        m
    }

    /// Adds `z` to every diagonal entry in place.
    pub fn add_to_diagonal(&mut self, z: Complex<T>) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += z;
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    /// Normalized trace `ts_N(A) = Tr(A)/N`.
    pub fn normalized_trace(&self) -> Complex<T> {
        self.trace() / creal(T::from_count(self.rows))
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn frobenius_norm_sq(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `ts_N(A A*)`, computed without forming the product.
    pub fn ts_gram(&self) -> T {
        self.frobenius_norm_sq() / T::from_count(self.rows)
    }

    /// Normalized Hilbert–Schmidt norm `sqrt(ts_N(A A*))`.
    pub fn ts_norm(&self) -> T {
        self.ts_gram().sqrt()
    }

    /// `ts_N(A B)` without forming the product.
    pub fn ts_product(&self, rhs: &Matrix<T>) -> Complex<T> {
        assert_eq!(self.cols, rhs.rows);
        assert_eq!(self.rows, rhs.cols);
        let mut acc = czero::<T>();
        for i in 0..self.rows {
            let row = self.row(i);
            for (k, a) in row.iter().enumerate() {
                acc += a * rhs[(k, i)];
            }
        }
        acc / creal(T::from_count(self.rows))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Exact (bitwise) Hermitian symmetry.
    pub fn is_exactly_hermitian(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i..self.cols).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    /// Exact (bitwise) skew-Hermitian symmetry.
    pub fn is_exactly_skew_hermitian(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i..self.cols).all(|j| self[(i, j)] == -self[(j, i)].conj()))
    }

    pub fn max_abs_diff(&self, rhs: &Matrix<T>) -> T {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data.iter().zip(&rhs.data).fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    /// Inverse via LU with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix<T>> {
        let lu = Lu::factor(self)?;
        Ok(lu.inverse())
    }

    /// Determinant via LU with partial pivoting (zero for singular input).
    pub fn determinant(&self) -> Complex<T> {
        match Lu::factor(self) {
            Ok(lu) => lu.determinant(),
            Err(_) => czero(),
        }
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> Matrix<U> {
        let data = self
            .data
            .iter()
            .map(|z| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
            .collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }
}

impl<T: Real> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization `P A = L U` of a square matrix.
pub struct Lu<T: Real> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(GlbmError::DimensionMismatch {
                expected: "square matrix".into(),
                found: format!("{}x{}", a.rows(), a.cols()),
            });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == T::zero() {
                return Err(GlbmError::SolverFailure(format!("singular matrix at pivot {k}")));
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != czero() {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn determinant(&self) -> Complex<T> {
        let n = self.lu.rows();
        (0..n).fold(creal(self.sign), |acc, i| acc * self.lu[(i, i)])
    }

    /// Solves `A x = b` for a single right-hand side.
    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.lu.rows();
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for (j, xj) in x[..i].iter().enumerate() {
                s -= self.lu[(i, j)] * *xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                s -= self.lu[(i, j)] * *xj;
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.lu.rows();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![czero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = czero());
            e[j] = cone();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn m2(a: [[(f64, f64); 2]; 2]) -> Matrix<f64> {
        Matrix::from_fn(2, 2, |i, j| c(a[i][j].0, a[i][j].1))
    }

    #[test]
    fn identity_times_matrix() {
        let a = m2([[(1.0, 2.0), (3.0, -1.0)], [(0.5, 0.0), (-2.0, 1.5)]]);
        let i = Matrix::identity(2);
        assert_eq!(i.matmul(&a), a);
        assert_eq!(a.matmul(&i), a);
    }

    #[test]
    fn inverse_and_determinant() {
        let a = m2([[(1.0, 1.0), (1.0, 0.0)], [(0.0, 0.0), (-1.0, 1.0)]]);
        let inv = a.inverse().unwrap();
        let prod = a.matmul(&inv);
        assert!(prod.max_abs_diff(&Matrix::identity(2)) < 1e-14);
        // (1+i)(-1+i) = -2
        assert!((a.determinant() - c(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_inverse_fails() {
        let a = m2([[(1.0, 0.0), (2.0, 0.0)], [(2.0, 0.0), (4.0, 0.0)]]);
        assert!(matches!(a.inverse(), Err(GlbmError::SolverFailure(_))));
        assert_eq!(a.determinant(), czero());
    }

    #[test]
    fn ts_helpers_agree_with_products() {
        let a = m2([[(1.0, 2.0), (3.0, -1.0)], [(0.5, 0.0), (-2.0, 1.5)]]);
        let b = m2([[(0.0, 1.0), (1.0, 1.0)], [(2.0, -0.5), (1.0, 0.0)]]);
        let direct = a.matmul(&b).normalized_trace();
        assert!((a.ts_product(&b) - direct).norm() < 1e-14);
        let gram = a.matmul(&a.adjoint()).normalized_trace();
        assert!((gram.re - a.ts_gram()).abs() < 1e-13);
    }

    #[test]
    fn block_diagonal_layout() {
        let a = m2([[(1.0, 1.0), (1.0, 0.0)], [(0.0, 0.0), (-1.0, 1.0)]]);
        let b = Matrix::block_diagonal(&a, 2);
        assert_eq!(b.rows(), 4);
        assert_eq!(b[(2, 3)], c(1.0, 0.0));
        assert_eq!(b[(1, 2)], czero());
        assert_eq!(b[(3, 3)], c(-1.0, 1.0));
    }
}
