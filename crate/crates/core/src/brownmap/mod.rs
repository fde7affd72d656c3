//! Brown-measure support geometry for the (ρ,ζ)-Brownian motion: the `T`
//! functions whose sublevel sets are the support domains, the `J`
//! transform of a point cloud, the `Ψ` push-forward, region tracing and
//! containment statistics.

pub mod export;
mod region;

pub use region::{containment_fraction, pushforward_region, sigma_region, Grid, Region, RegionOptions, Window};

use num_complex::Complex;

use crate::error::{GlbmError, Result};
use crate::matrix::{Lu, Matrix};
use crate::scalar::{c, czero, Real};

/// Probability measure on the unit circle with finitely many atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleMeasure<T: Real> {
    atoms: Vec<(T, T)>,
    points: Vec<Complex<T>>,
}

impl<T: Real> CircleMeasure<T> {
    /// Atoms as `(angle, weight)`; weights positive and summing to 1.
    pub fn new(atoms: Vec<(T, T)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(GlbmError::invalid("circle measure needs at least one atom"));
        }
        if atoms.iter().any(|(phi, w)| !(*w > T::zero()) || !phi.is_finite() || !w.is_finite()) {
            return Err(GlbmError::invalid("atom weights must be positive and finite"));
        }
        let total: T = atoms.iter().map(|(_, w)| *w).sum();
        if (total - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) {
            return Err(GlbmError::invalid(format!("atom weights sum to {total}, not 1")));
        }
        let points = atoms.iter().map(|(phi, _)| c(phi.cos(), phi.sin())).collect();
        Ok(Self { atoms, points })
    }

    /// `δ₁`.
    pub fn point_mass_at_one() -> Self {
        Self::new(vec![(T::zero(), T::one())]).expect("valid")
    }

    /// Uniform measure on the `k`-th roots of unity.
    pub fn roots_of_unity(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(GlbmError::invalid("k must be positive"));
        }
        let w = T::one() / T::from_count(k);
        let two_pi = T::lit(2.0) * T::PI();
        Self::new((0..k).map(|j| (two_pi * T::from_count(j) / T::from_count(k), w)).collect())
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    /// Atom locations `e^{iφ_k}`.
    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    /// Measure rotated by `e^{iα}`.
    pub fn rotated(&self, alpha: T) -> Self {
        Self::new(self.atoms.iter().map(|(phi, w)| (*phi + alpha, *w)).collect()).expect("valid")
    }

    pub fn to_spectral_data(&self) -> InitialSpectralData<T> {
        InitialSpectralData::AtomicComplex(
            self.points.iter().zip(&self.atoms).map(|(p, (_, w))| (*p, *w)).collect(),
        )
    }
}

/// Spectral input for the general-initial-condition formulas.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpectralData<T: Real> {
    /// Normal `b₀` with eigenvalue `λ_k` of weight `w_k`.
    AtomicComplex(Vec<(Complex<T>, T)>),
    /// Non-normal `b₀` given by a matrix.
    MatrixData(Matrix<T>),
}

impl<T: Real> InitialSpectralData<T> {
    /// Validates weights (atomic) or invertibility (matrix).
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialSpectralData::AtomicComplex(atoms) => {
                if atoms.is_empty() || atoms.iter().any(|(_, w)| !(*w > T::zero())) {
                    return Err(GlbmError::invalid("atom weights must be positive"));
                }
                let total: T = atoms.iter().map(|(_, w)| *w).sum();
                if (total - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) {
                    return Err(GlbmError::invalid(format!("atom weights sum to {total}, not 1")));
                }
                Ok(())
            }
            InitialSpectralData::MatrixData(m) => {
                let sv = crate::spectral::singular_values(m, czero())?;
                if !(sv.min() > T::zero()) {
                    return Err(GlbmError::invalid("initial matrix must be invertible"));
                }
                Ok(())
            }
        }
    }

    /// Largest eigenvalue modulus (atomic) or operator norm (matrix).
    pub fn radius(&self) -> T {
        match self {
            InitialSpectralData::AtomicComplex(atoms) => atoms.iter().fold(T::zero(), |m, (l, _)| m.max(l.norm())),
            InitialSpectralData::MatrixData(m) => crate::linalg::operator_norm(m),
        }
    }
}

/// `log s / (s − 1)` with its removable singularity at `s = 1`; the series
/// `1 − u/2 + u²/3 − u³/4` (`u = s − 1`) is used when `|u| < band`.
fn log_ratio<T: Real>(s: T, band: T) -> T {
    let u = s - T::one();
    if u.abs() < band {
        let third = T::one() / T::lit(3.0);
        return T::one() - u * (T::lit(0.5) - u * (third - u * T::lit(0.25)));
    }
    s.ln() / u
}

/// `T(u₀, z) = log|z|²/(|z|² − 1) · (∫ μ(dξ)/|ξ − z|²)^{-1}`; zero at an
/// atom and `+∞` at the origin.
pub fn t_unitary<T: Real>(mu: &CircleMeasure<T>, z: Complex<T>) -> T {
    let mut integral = T::zero();
    for (p, (_, w)) in mu.points.iter().zip(&mu.atoms) {
        let d2 = (p - z).norm_sqr();
        if d2 == T::zero() {
            return T::zero();
        }
        integral += *w / d2;
    }
    let r = z.norm();
    let s = r * r;
    let factor = if (r - T::one()).abs() < T::lit(1e-4) {
        log_ratio(s, T::infinity())
    } else {
        log_ratio(s, T::zero())
    };
    factor / integral
}

/// `(p̃₀(z), p̃₂(z))`, or `None` when `z` lies in the point spectrum.
pub fn p_tilde<T: Real>(data: &InitialSpectralData<T>, z: Complex<T>) -> Option<(T, T)> {
    match data {
        InitialSpectralData::AtomicComplex(atoms) => {
            let mut p0 = T::zero();
            let mut p2 = T::zero();
            for (l, w) in atoms {
                let d2 = (l - z).norm_sqr();
                if d2 == T::zero() {
                    return None;
                }
                p0 += *w / d2;
                p2 += *w * l.norm_sqr() / d2;
            }
            Some((p0, p2))
        }
        InitialSpectralData::MatrixData(b0) => {
            let a = b0.shifted(z);
            let lu = Lu::factor(&a).ok()?;
            let inv = lu.inverse();
            if !inv.is_finite() {
                return None;
            }
            let n = T::from_count(b0.rows());
            let p0 = inv.frobenius_norm_sq() / n;
            let p2 = b0.matmul(&inv).frobenius_norm_sq() / n;
            Some((p0, p2))
        }
    }
}

/// `T(b₀, z) = log(|z|²p̃₀/p̃₂) / (|z|²p̃₀ − p̃₂)`, evaluated as
/// `(1/p̃₂)·log x/(x − 1)` with `x = |z|²p̃₀/p̃₂`; zero on the point spectrum
/// and `+∞` at the origin.
pub fn t_general<T: Real>(data: &InitialSpectralData<T>, z: Complex<T>) -> T {
    let Some((p0, p2)) = p_tilde(data, z) else {
        return T::zero();
    };
    let x = z.norm_sqr() * p0 / p2;
    log_ratio(x, T::lit(1e-8)) / p2
}

/// Weighted point cloud in ℂ with cached diameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T: Real> {
    points: Vec<Complex<T>>,
    weights: Vec<T>,
    diameter: T,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Complex<T>>, weights: Vec<T>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(GlbmError::invalid("point cloud needs matching, nonempty points and weights"));
        }
        if weights.iter().any(|w| !(*w > T::zero())) {
            return Err(GlbmError::invalid("cloud weights must be positive"));
        }
        let mut diameter = T::zero();
        for (i, p) in points.iter().enumerate() {
            for q in &points[i + 1..] {
                diameter = diameter.max((p - q).norm());
            }
        }
        Ok(Self { points, weights, diameter })
    }

    /// Equal weights `1/M`.
    pub fn uniform(points: Vec<Complex<T>>) -> Result<Self> {
        let w = T::one() / T::from_count(points.len().max(1));
        let weights = vec![w; points.len()];
        Self::new(points, weights)
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diameter(&self) -> T {
        self.diameter
    }

    /// Exclusion radius `3·diam/√M`.
    pub fn exclusion_radius(&self) -> T {
        T::lit(3.0) * self.diameter / T::from_count(self.len()).sqrt()
    }
}

/// `J` value with the mass excluded near `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JValue<T: Real> {
    pub value: Complex<T>,
    pub excluded_mass: T,
}

/// `J(z) = ½ Σ w_k (ξ_k + z)/(ξ_k − z)` over points farther than the
/// exclusion radius from `z`.
pub fn j_transform<T: Real>(mu: &PointCloud<T>, z: Complex<T>) -> Result<JValue<T>> {
    let eps = mu.exclusion_radius();
    let mut acc = czero::<T>();
    let mut excluded = T::zero();
    let mut kept = 0usize;
    for (xi, w) in mu.points.iter().zip(&mu.weights) {
        let d = xi - z;
        if d.norm() <= eps {
            excluded += *w;
            continue;
        }
        kept += 1;
        acc += (xi + z) / d * *w;
    }
    if kept == 0 {
        return Err(GlbmError::UndefinedAtPoint { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy() });
    }
    Ok(JValue { value: acc * T::lit(0.5), excluded_mass: excluded })
}

/// Parameter of [`psi_map`] whose image supports the endpoint of a flow
/// simulated with `zeta`. The flow has `E ts ΔW² = ζ·dt`, so `ζ = −1` is the
/// unitary motion, while `Ψ` is written for the opposite sign.
pub fn psi_zeta_for_flow<T: Real>(flow_zeta: Complex<T>) -> Complex<T> {
    -flow_zeta
}

/// `Ψ(z) = z·exp(ζ·J(z))`; the identity when `ζ = 0`.
pub fn psi_map<T: Real>(mu: &PointCloud<T>, zeta: Complex<T>, z: Complex<T>) -> Result<Complex<T>> {
    if zeta == czero() || z == czero() {
        return Ok(z);
    }
    let j = j_transform(mu, z)?;
    Ok(z * (zeta * j.value).exp())
}
