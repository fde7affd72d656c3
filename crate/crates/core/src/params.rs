//! The `(ρ, ζ)` parametrization of elliptic drivers.
//!
//! An elliptic driver is `W = e^{iθ}(aX + i bY)` with independent GUE
//! motions `X, Y`. Its law is determined by `ρ = E ts|W(1)|² = a² + b²` and
//! `ζ = E ts W(1)² = e^{2iθ}(a² − b²)`; this module maps `(ρ, ζ)` back to a
//! normalized `(a, b, θ)` with `a ≥ b ≥ 0` and `θ ∈ (−π/2, π/2]`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{GlbmError, Result};
use crate::scalar::{c, Real};

/// Elliptic driver parameters together with the derived driver coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticParams<T: Real> {
    rho: T,
    zeta: Complex<T>,
    a: T,
    b: T,
    theta: T,
    phase: Complex<T>,
    degenerate: bool,
}

impl<T: Real> EllipticParams<T> {
    /// Validates `(ρ, ζ)` and derives `(a, b, θ)`.
    pub fn new(rho: T, zeta: Complex<T>) -> Result<Self> {
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(GlbmError::invalid(format!("rho must be positive and finite, got {rho}")));
        }
        if !zeta.re.is_finite() || !zeta.im.is_finite() {
            return Err(GlbmError::invalid("zeta must be finite"));
        }
        let modulus = zeta.norm();
        if modulus > rho {
            return Err(GlbmError::invalid(format!(
                "ellipticity violated: |zeta| = {modulus} exceeds rho = {rho}"
            )));
        }
        let half = T::lit(0.5);
        let a = ((rho + modulus) * half).sqrt();
        let b = ((rho - modulus) * half).max(T::zero()).sqrt();
        let (theta, phase) = half_angle(zeta);
        Ok(Self { rho, zeta, a, b, theta, phase, degenerate: modulus == rho })
    }

    /// The standard Ginibre driver `(ρ, ζ) = (1, 0)`.
    pub fn ginibre() -> Self {
        Self::new(T::one(), c(T::zero(), T::zero())).expect("valid")
    }

    /// The unitary boundary driver `(ρ, ζ) = (1, −1)`, i.e. `W = iX`.
    pub fn unitary() -> Self {
        Self::new(T::one(), c(-T::one(), T::zero())).expect("valid")
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn zeta(&self) -> Complex<T> {
        self.zeta
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// `e^{iθ}`, computed by half-angle formulas so that axis-aligned `ζ`
    /// give exact phases.
    pub fn phase(&self) -> Complex<T> {
        self.phase
    }

    /// True iff `|ζ| = ρ` (the driver lives on a real-dimension-`N²` subspace).
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Fails with `InvalidParameter` for boundary (degenerate) parameters.
    pub fn require_elliptic(&self) -> Result<()> {
        if self.degenerate {
            return Err(GlbmError::invalid("operation requires |zeta| < rho"));
        }
        Ok(())
    }
}

/// Returns `θ = ½ arg ζ` with `arg ∈ (−π, π]` and `e^{iθ}`.
fn half_angle<T: Real>(zeta: Complex<T>) -> (T, Complex<T>) {
    let modulus = zeta.norm();
    if modulus == T::zero() {
        return (T::zero(), c(T::one(), T::zero()));
    }
    let half = T::lit(0.5);
    // Both signed zeros on the negative real axis map to arg = π.
    let on_negative_axis = zeta.im == T::zero() && zeta.re < T::zero();
    let arg = if on_negative_axis { T::PI() } else { zeta.im.atan2(zeta.re) };
    let cos2 = (zeta.re / modulus).max(-T::one()).min(T::one());
    let cos = ((T::one() + cos2) * half).sqrt();
    let sin_mag = ((T::one() - cos2) * half).sqrt();
    let sin = if on_negative_axis || zeta.im > T::zero() { sin_mag } else { -sin_mag };
    (arg * half, c(cos, sin))
}

/// Over-parametrization reduction: the driver at time `t` has the law of the
/// `(tρ, tζ)` driver at unit time. Returns `None` at `t = 0` (no diffusion;
/// simulations then return the initial matrix).
pub fn reduce_time_param<T: Real>(rho: T, zeta: Complex<T>, t: T) -> Result<Option<EllipticParams<T>>> {
    if !(t >= T::zero()) {
        return Err(GlbmError::invalid(format!("time must be nonnegative, got {t}")));
    }
    if t == T::zero() {
        return Ok(None);
    }
    EllipticParams::new(rho * t, zeta * t).map(Some)
}

/// Uniform time discretization with `steps` increments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T: Real> {
    t_final: T,
    steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_final: T, steps: usize) -> Result<Self> {
        if !(t_final >= T::zero()) || !t_final.is_finite() {
            return Err(GlbmError::invalid(format!("t_final must be finite and nonnegative, got {t_final}")));
        }
        if steps == 0 {
            return Err(GlbmError::invalid("steps must be positive"));
        }
        Ok(Self { t_final, steps })
    }

    pub fn t_final(&self) -> T {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> T {
        self.t_final / T::from_count(self.steps)
    }
}

/// Everything needed to run one family of Monte Carlo trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<T: Real> {
    pub n: usize,
    pub params: EllipticParams<T>,
    pub grid: TimeGrid<T>,
    pub seed: u64,
    pub trials: usize,
}

impl<T: Real> SimConfig<T> {
    pub fn new(n: usize, params: EllipticParams<T>, grid: TimeGrid<T>, seed: u64, trials: usize) -> Result<Self> {
        if n == 0 {
            return Err(GlbmError::invalid("matrix dimension must be at least 1"));
        }
        if trials == 0 {
            return Err(GlbmError::invalid("trials must be at least 1"));
        }
        Ok(Self { n, params, grid, seed, trials })
    }
}

/// Serializable `(ρ, ζ)` pair used by configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoZeta {
    pub rho: f64,
    pub zeta: [f64; 2],
}

impl RhoZeta {
    pub fn to_params<T: Real>(&self) -> Result<EllipticParams<T>> {
        EllipticParams::new(T::lit(self.rho), c(T::lit(self.zeta[0]), T::lit(self.zeta[1])))
    }
}
