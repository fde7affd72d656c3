//! Eigenvalue and singular value statistics of non-normal matrices:
//! empirical spectra, log potentials (Hermitization), the Wegner transform,
//! small singular value counts and log-tail masses.

use num_complex::Complex;

use crate::error::{GlbmError, Result};
use crate::linalg;
use crate::matrix::Matrix;
use crate::stats::MeanSe;
use crate::scalar::Real;

/// Eigenvalues with multiplicity and a backward-error bound relative to
/// `‖A‖_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Real> {
    pub eigenvalues: Vec<Complex<T>>,
    pub residual: T,
}

impl<T: Real> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_modulus(&self) -> T {
        self.eigenvalues.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// `(1/N) Σ log|z − λ_j|`; `None` when `z` is an eigenvalue.
    pub fn log_potential(&self, z: Complex<T>) -> Option<T> {
        let mut acc = T::zero();
        for l in &self.eigenvalues {
            let d = (z - l).norm();
            if d == T::zero() {
                return None;
            }
            acc += d.ln();
        }
        Some(acc / T::from_count(self.len()))
    }
}

/// Singular values of `A − zI`, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum<T: Real> {
    pub values: Vec<T>,
    pub shift: Complex<T>,
}

/// Log potential value, or the `−∞` sentinel when `A − z` is singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogPotential<T: Real> {
    Finite(T),
    NegInfinity,
}

impl<T: Real> LogPotential<T> {
    pub fn value(&self) -> T {
        match self {
            LogPotential::Finite(v) => *v,
            LogPotential::NegInfinity => T::neg_infinity(),
        }
    }

    pub fn is_neg_infinity(&self) -> bool {
        matches!(self, LogPotential::NegInfinity)
    }
}

/// Mean of finite log potentials and the number of `−∞` values excluded.
pub fn mean_log_potential<T: Real>(values: &[LogPotential<T>]) -> (MeanSe, usize) {
    let finite: Vec<f64> = values
        .iter()
        .filter_map(|v| match v {
            LogPotential::Finite(x) => Some(x.to_f64_lossy()),
            LogPotential::NegInfinity => None,
        })
        .collect();
    let excluded = values.len() - finite.len();
    (MeanSe::from_slice(&finite), excluded)
}

impl<T: Real> SingularSpectrum<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> T {
        self.values.first().copied().unwrap_or(T::zero())
    }

    pub fn min(&self) -> T {
        self.values.last().copied().unwrap_or(T::zero())
    }

    /// `σ_{N−ℓ}` in 1-based notation: the `(ℓ+1)`-th smallest value.
    pub fn from_bottom(&self, ell: usize) -> T {
        self.values[self.len() - 1 - ell]
    }

    /// `(1/N) Σ log σ_j`, with the `−∞` sentinel if some `σ_j = 0`.
    pub fn log_potential(&self) -> LogPotential<T> {
        if self.min() <= T::zero() {
            return LogPotential::NegInfinity;
        }
        let s: T = self.values.iter().map(|x| x.ln()).sum();
        LogPotential::Finite(s / T::from_count(self.len()))
    }

    /// `−(1/N) Σ η/(η² + σ_j²)`.
    pub fn wegner(&self, eta: T) -> Result<T> {
        check_eta(eta)?;
        let s: T = self.values.iter().map(|x| eta / (eta * eta + *x * *x)).sum();
        Ok(-s / T::from_count(self.len()))
    }

    /// Fraction of values `≤ η`.
    pub fn counting(&self, eta: T) -> T {
        let k = self.values.iter().filter(|x| **x <= eta).count();
        T::from_count(k) / T::from_count(self.len())
    }

    /// `(1/N) Σ_{|log σ_j| > L} |log σ_j|`. A zero singular value contributes
    /// `+∞`.
    pub fn log_tail_mass(&self, level: T) -> T {
        let s: T = self
            .values
            .iter()
            .map(|x| x.ln().abs())
            .filter(|v| *v > level)
            .sum();
        s / T::from_count(self.len())
    }
}

fn check_eta<T: Real>(eta: T) -> Result<()> {
    if !(eta > T::zero()) || !eta.is_finite() {
        return Err(GlbmError::invalid(format!("eta must be positive and finite, got {eta}")));
    }
    Ok(())
}

fn check_finite<T: Real>(a: &Matrix<T>) -> Result<()> {
    if !a.is_square() {
        return Err(GlbmError::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    if !a.is_finite() {
        return Err(GlbmError::invalid("matrix has non-finite entries"));
    }
    Ok(())
}

/// Eigenvalues of `A` with multiplicity.
pub fn eigenvalues<T: Real>(a: &Matrix<T>) -> Result<Spectrum<T>> {
    let (eigenvalues, residual) = linalg::eigenvalues(a)?;
    Ok(Spectrum { eigenvalues, residual })
}

/// Singular values of `A − zI`.
pub fn singular_values<T: Real>(a: &Matrix<T>, z: Complex<T>) -> Result<SingularSpectrum<T>> {
    check_finite(a)?;
    let shifted = a.shifted(z);
    let values = linalg::singular_values(&shifted);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(GlbmError::SolverFailure("non-finite singular value".into()));
    }
    Ok(SingularSpectrum { values, shift: z })
}

/// Operator norm `σ_1(A)`.
pub fn op_norm<T: Real>(a: &Matrix<T>) -> Result<T> {
    check_finite(a)?;
    Ok(linalg::operator_norm(a))
}

/// Log potential `(1/N) Σ log σ_j(A − z)` (singular value route).
pub fn log_potential<T: Real>(a: &Matrix<T>, z: Complex<T>) -> Result<LogPotential<T>> {
    Ok(singular_values(a, z)?.log_potential())
}

/// Log potential `(1/N) Σ log|z − λ_j(A)|` (eigenvalue route).
pub fn log_potential_eigen<T: Real>(a: &Matrix<T>, z: Complex<T>) -> Result<LogPotential<T>> {
    let spec = eigenvalues(a)?;
    Ok(match spec.log_potential(z) {
        Some(v) => LogPotential::Finite(v),
        None => LogPotential::NegInfinity,
    })
}

/// Wegner transform `−(1/N) Σ η/(η² + σ_j(A − z)²)`.
pub fn wegner_transform<T: Real>(a: &Matrix<T>, z: Complex<T>, eta: T) -> Result<T> {
    check_eta(eta)?;
    singular_values(a, z)?.wegner(eta)
}

/// Fraction of singular values of `A − z` at most `η`.
pub fn sv_counting<T: Real>(a: &Matrix<T>, z: Complex<T>, eta: T) -> Result<T> {
    Ok(singular_values(a, z)?.counting(eta))
}

/// Log-tail mass of the singular values of `A − z` beyond level `L`.
pub fn log_tail_mass<T: Real>(a: &Matrix<T>, z: Complex<T>, level: T) -> Result<T> {
    if !(level > T::zero()) {
        return Err(GlbmError::invalid(format!("tail level must be positive, got {level}")));
    }
    Ok(singular_values(a, z)?.log_tail_mass(level))
}

/// Weyl's inequalities `σ_1 ≥ |λ_j| ≥ σ_N` up to a relative slack.
pub fn weyl_consistent<T: Real>(spec: &Spectrum<T>, sv: &SingularSpectrum<T>, rel_tol: T) -> bool {
    let slack = rel_tol * sv.max().max(T::min_positive_value());
    spec.eigenvalues
        .iter()
        .all(|l| l.norm() <= sv.max() + slack && l.norm() + slack >= sv.min())
}
