//! Discretized multiplicative (ρ,ζ)-Brownian motion on GL(N,ℂ).
//!
//! One step right-multiplies by `I + ΔW + (ζ·dt/2)·I`; the inverse process
//! left-multiplies by `I − ΔW + (ζ·dt/2)·I`. No renormalization is applied.

use num_complex::Complex;
use num_rational::Ratio;

use crate::error::{GlbmError, Result};
use crate::matrix::Matrix;
use crate::params::{EllipticParams, SimConfig};
use crate::rng::RngStream;
use crate::sampling::{sample_elliptic_increment, sample_haar_unitary};
use crate::scalar::{c, cone, creal, czero, Real};
use crate::spectral;

/// Current state of a simulated path.
#[derive(Debug, Clone)]
pub struct PathState<T: Real> {
    pub b: Matrix<T>,
    pub t: T,
    pub increments_consumed: usize,
}

impl<T: Real> PathState<T> {
    pub fn new(init: Matrix<T>) -> Self {
        Self { b: init, t: T::zero(), increments_consumed: 0 }
    }

    /// Applies one step with increment `dw` over time `dt`.
    pub fn advance(&mut self, params: &EllipticParams<T>, dw: &Matrix<T>, dt: T) -> Result<()> {
        self.b = step(&self.b, params, dw, dt)?;
        self.t += dt;
        self.increments_consumed += 1;
        if !self.b.is_finite() {
            return Err(GlbmError::NumericalOverflow { steps: self.increments_consumed });
        }
        Ok(())
    }
}

fn drift<T: Real>(params: &EllipticParams<T>, dt: T) -> Complex<T> {
    params.zeta() * (dt * T::lit(0.5))
}

/// `B·(I + dW + (ζ·dt/2)I)`.
pub fn step<T: Real>(b: &Matrix<T>, params: &EllipticParams<T>, dw: &Matrix<T>, dt: T) -> Result<Matrix<T>> {
    if !b.is_square() || dw.rows() != b.cols() || dw.cols() != b.cols() {
        return Err(GlbmError::DimensionMismatch {
            expected: format!("{n}x{n} increment", n = b.cols()),
            found: format!("{}x{}", dw.rows(), dw.cols()),
        });
    }
    let mut out = b.scale(cone::<T>() + drift(params, dt));
    b.gemm_into(dw, cone(), cone(), &mut out)?;
    Ok(out)
}

/// `(I − dW + (ζ·dt/2)I)·C`.
pub fn inverse_step<T: Real>(cm: &Matrix<T>, params: &EllipticParams<T>, dw: &Matrix<T>, dt: T) -> Result<Matrix<T>> {
    if dw.rows() != cm.rows() || dw.cols() != cm.rows() {
        return Err(GlbmError::DimensionMismatch {
            expected: format!("{n}x{n} increment", n = cm.rows()),
            found: format!("{}x{}", dw.rows(), dw.cols()),
        });
    }
    let mut out = cm.scale(cone::<T>() + drift(params, dt));
    dw.gemm_into(cm, -cone::<T>(), cone(), &mut out)?;
    Ok(out)
}

/// Draws `k` independent increments of step `dt`.
pub fn sample_increments<T: Real>(
    params: &EllipticParams<T>,
    dt: T,
    k: usize,
    n: usize,
    rng: &mut RngStream,
) -> Result<Vec<Matrix<T>>> {
    (0..k).map(|_| sample_elliptic_increment(params, dt, n, rng)).collect()
}

/// Runs the forward scheme over a given increment sequence.
pub fn run_increments<T: Real>(
    init: &Matrix<T>,
    params: &EllipticParams<T>,
    increments: &[Matrix<T>],
    dt: T,
) -> Result<Matrix<T>> {
    let mut state = PathState::new(init.clone());
    for dw in increments {
        state.advance(params, dw, dt)?;
    }
    Ok(state.b)
}

/// Runs the inverse scheme over a given increment sequence, starting from `I`.
pub fn run_inverse<T: Real>(params: &EllipticParams<T>, increments: &[Matrix<T>], dt: T) -> Result<Matrix<T>> {
    let n = increments.first().map_or(0, |m| m.rows());
    let mut cm = Matrix::identity(n);
    for (i, dw) in increments.iter().enumerate() {
        cm = inverse_step(&cm, params, dw, dt)?;
        if !cm.is_finite() {
            return Err(GlbmError::NumericalOverflow { steps: i + 1 });
        }
    }
    Ok(cm)
}

/// Endpoint `B₀·Π(I + ΔW_i + (ζ·dt/2)I)` with fresh increments; `t = 0`
/// returns `B₀` unchanged.
pub fn simulate_endpoint<T: Real>(config: &SimConfig<T>, init: &Matrix<T>, rng: &mut RngStream) -> Result<Matrix<T>> {
    if init.rows() != config.n || !init.is_square() {
        return Err(GlbmError::DimensionMismatch {
            expected: format!("{n}x{n}", n = config.n),
            found: format!("{}x{}", init.rows(), init.cols()),
        });
    }
    let mut state = PathState::new(init.clone());
    if config.grid.t_final() == T::zero() {
        return Ok(state.b);
    }
    let dt = config.grid.dt();
    for _ in 0..config.grid.steps() {
        let dw = sample_elliptic_increment(&config.params, dt, config.n, rng)?;
        state.advance(&config.params, &dw, dt)?;
    }
    Ok(state.b)
}

/// Forward endpoint `B_k` (from `I`) and inverse-process endpoint `C_k`
/// driven by the same increments.
pub fn simulate_forward_inverse<T: Real>(
    config: &SimConfig<T>,
    rng: &mut RngStream,
) -> Result<(Matrix<T>, Matrix<T>)> {
    let n = config.n;
    let mut b = Matrix::identity(n);
    let mut cm = Matrix::identity(n);
    if config.grid.t_final() == T::zero() {
        return Ok((b, cm));
    }
    let dt = config.grid.dt();
    for i in 0..config.grid.steps() {
        let dw = sample_elliptic_increment(&config.params, dt, n, rng)?;
        b = step(&b, &config.params, &dw, dt)?;
        cm = inverse_step(&cm, &config.params, &dw, dt)?;
        if !b.is_finite() || !cm.is_finite() {
            return Err(GlbmError::NumericalOverflow { steps: i + 1 });
        }
    }
    Ok((b, cm))
}

/// Inverse-process endpoint `C_k` for a fresh increment sequence.
pub fn simulate_inverse<T: Real>(config: &SimConfig<T>, rng: &mut RngStream) -> Result<Matrix<T>> {
    let n = config.n;
    if config.grid.t_final() == T::zero() {
        return Ok(Matrix::identity(n));
    }
    let dt = config.grid.dt();
    let incs = sample_increments(&config.params, dt, config.grid.steps(), n, rng)?;
    run_inverse(&config.params, &incs, dt)
}

/// `‖B·C − I‖` (operator norm).
pub fn inversion_defect<T: Real>(b: &Matrix<T>, cm: &Matrix<T>) -> Result<T> {
    let mut p = b.matmul(cm);
    p.add_to_diagonal(-cone::<T>());
    spectral::op_norm(&p)
}

/// Dyadic increment hierarchy: level `ℓ` holds `2^ℓ` increments of step
/// `t/2^ℓ`, and each level-`(ℓ−1)` increment is the sum of its two
/// level-`ℓ` children.
#[derive(Debug, Clone)]
pub struct CoupledIncrements<T: Real> {
    t: T,
    levels: Vec<Vec<Matrix<T>>>,
}

impl<T: Real> CoupledIncrements<T> {
    /// Samples the finest level and sums upward.
    pub fn sample(params: &EllipticParams<T>, t: T, finest: usize, n: usize, rng: &mut RngStream) -> Result<Self> {
        let k = 1usize << finest;
        let dt = t / T::from_count(k);
        let fine = sample_increments(params, dt, k, n, rng)?;
        Self::from_finest(t, finest, fine)
    }

    /// Builds the hierarchy from an explicit finest-level sequence of length
    /// `2^finest`.
    pub fn from_finest(t: T, finest: usize, fine: Vec<Matrix<T>>) -> Result<Self> {
        if fine.len() != 1usize << finest {
            return Err(GlbmError::DimensionMismatch {
                expected: format!("{} finest increments", 1usize << finest),
                found: format!("{}", fine.len()),
            });
        }
        if !(t >= T::zero()) {
            return Err(GlbmError::invalid(format!("time must be nonnegative, got {t}")));
        }
        let mut levels = vec![fine];
        for _ in 0..finest {
            let child = levels.last().expect("nonempty");
            let parent = child.chunks(2).map(|p| p[0].add(&p[1])).collect();
            levels.push(parent);
        }
        levels.reverse();
        Ok(Self { t, levels })
    }

    pub fn finest(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn level(&self, level: usize) -> Result<&[Matrix<T>]> {
        self.levels
            .get(level)
            .map(|v| v.as_slice())
            .ok_or(GlbmError::LevelOutOfRange { level, finest: self.finest() })
    }

    pub fn dt(&self, level: usize) -> T {
        self.t / T::from_count(1usize << level)
    }

    /// `B_ℓ(t)` from the identity.
    pub fn endpoint(&self, params: &EllipticParams<T>, level: usize) -> Result<Matrix<T>> {
        let incs = self.level(level)?;
        let n = incs[0].rows();
        run_increments(&Matrix::identity(n), params, incs, self.dt(level))
    }
}

/// Coupled refinement gap `‖B_n(t) − B_{n−1}(t)‖₂ = sqrt(ts[DD*])`.
pub fn refine_gap<T: Real>(coupled: &CoupledIncrements<T>, params: &EllipticParams<T>, level: usize) -> Result<T> {
    if level == 0 || level > coupled.finest() {
        return Err(GlbmError::LevelOutOfRange { level, finest: coupled.finest() });
    }
    if coupled.t() == T::zero() {
        return Ok(T::zero());
    }
    let fine = coupled.endpoint(params, level)?;
    let coarse = coupled.endpoint(params, level - 1)?;
    Ok(fine.sub(&coarse).ts_norm())
}

/// `‖B(t) − I − W(t)‖` with `W(t) = Σ ΔW_i` and `B(t)` the product over the
/// same increments started at the identity.
pub fn affine_deviation<T: Real>(
    init: &InitialCondition<T>,
    increments: &[Matrix<T>],
    params: &EllipticParams<T>,
    dt: T,
) -> Result<T> {
    if !matches!(init.kind, InitialKind::Identity) || init.random_conjugation {
        return Err(GlbmError::InvalidUsage("affine deviation requires the identity initial condition".into()));
    }
    let Some(first) = increments.first() else {
        return Ok(T::zero());
    };
    let n = first.rows();
    let b = run_increments(&Matrix::identity(n), params, increments, dt)?;
    let mut d = b;
    for dw in increments {
        d.axpy(-cone::<T>(), dw);
    }
    d.add_to_diagonal(-cone::<T>());
    spectral::op_norm(&d)
}

/// Exact `E ts(B_k B_k*)` for `k` steps of size `dt` from an initial
/// condition with `ts(B₀B₀*) = 1`: each step multiplies the second moment by
/// `|1 + ζdt/2|² + ρ·dt`.
pub fn second_moment_exact<T: Real>(params: &EllipticParams<T>, dt: T, k: usize) -> T {
    let f = (cone::<T>() + drift(params, dt)).norm_sqr() + params.rho() * dt;
    f.powi(k as i32)
}

/// `(1 + (ρ + Re ζ)/2ⁿ + |ζ|²/4^{n+1})^{⌊t2ⁿ⌋}`, the dyadic form of
/// [`second_moment_exact`].
pub fn second_moment_dyadic(rho: f64, zeta: Complex<f64>, n: u32, t: f64) -> f64 {
    let p = 2f64.powi(n as i32);
    let base = 1.0 + (rho + zeta.re) / p + zeta.norm_sqr() / 4f64.powi(n as i32 + 1);
    base.powi((t * p).floor() as i32)
}

/// Initial condition families.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind<T: Real> {
    Identity,
    /// `diag(1, ω, ω², …)` cycling through the `k`-th roots of unity.
    RootsOfUnity(usize),
    /// Normal matrix with eigenvalue `λ` of multiplicity `N·w`.
    AtomicNormal(Vec<(Complex<T>, Ratio<u64>)>),
    /// Block-diagonal repetition of a 2×2 block.
    NonNormalBlock([[Complex<T>; 2]; 2]),
    ExplicitMatrix(Matrix<T>),
}

/// Initial condition with an optional Haar-unitary conjugation `U B₀ U*`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition<T: Real> {
    pub kind: InitialKind<T>,
    pub random_conjugation: bool,
}

impl<T: Real> InitialCondition<T> {
    pub fn new(kind: InitialKind<T>) -> Self {
        Self { kind, random_conjugation: false }
    }

    pub fn identity() -> Self {
        Self::new(InitialKind::Identity)
    }

    pub fn with_conjugation(mut self, on: bool) -> Self {
        self.random_conjugation = on;
        self
    }
}

/// Realized initial matrix with the bound `K⁻¹ ≤ σ_min ≤ σ_max ≤ K`.
#[derive(Debug, Clone)]
pub struct RealizedInitial<T: Real> {
    pub matrix: Matrix<T>,
    pub k_bound: T,
}

fn bound_from_extremes<T: Real>(smax: T, smin: T) -> Result<T> {
    if !(smin > T::zero()) {
        return Err(GlbmError::invalid("initial condition is singular"));
    }
    Ok(smax.max(T::one() / smin))
}

/// Assembles the initial matrix for `spec` at dimension `n`.
pub fn make_initial<T: Real>(spec: &InitialCondition<T>, n: usize, rng: &mut RngStream) -> Result<RealizedInitial<T>> {
    if n == 0 {
        return Err(GlbmError::invalid("dimension must be at least 1"));
    }
    let (mut matrix, k_bound) = match &spec.kind {
        InitialKind::Identity => (Matrix::identity(n), T::one()),
        InitialKind::RootsOfUnity(k) => {
            if *k == 0 || !n.is_multiple_of(*k) {
                return Err(GlbmError::invalid(format!("N = {n} is not divisible by k = {k}")));
            }
            let diag: Vec<Complex<T>> = (0..n)
                .map(|j| {
                    let ang = T::lit(2.0) * T::PI() * T::from_count(j % k) / T::from_count(*k);
                    c(ang.cos(), ang.sin())
                })
                .collect();
            (Matrix::from_diag(&diag), T::one())
        }
        InitialKind::AtomicNormal(atoms) => {
            if atoms.is_empty() {
                return Err(GlbmError::invalid("atomic initial condition needs at least one atom"));
            }
            let total: Ratio<u64> = atoms.iter().map(|(_, w)| *w).sum();
            if total != Ratio::from_integer(1) {
                return Err(GlbmError::invalid(format!("atom weights sum to {total}, not 1")));
            }
            let mut diag = Vec::with_capacity(n);
            for (lambda, w) in atoms {
                let count = *w * Ratio::from_integer(n as u64);
                if !count.is_integer() || count.to_integer() == 0 {
                    return Err(GlbmError::invalid(format!("N·w = {count} is not a positive integer for atom {lambda}")));
                }
                diag.extend(std::iter::repeat_n(*lambda, count.to_integer() as usize));
            }
            let smax = diag.iter().fold(T::zero(), |m, z| m.max(z.norm()));
            let smin = diag.iter().fold(T::infinity(), |m, z| m.min(z.norm()));
            (Matrix::from_diag(&diag), bound_from_extremes(smax, smin)?)
        }
        InitialKind::NonNormalBlock(block) => {
            if !n.is_multiple_of(2) {
                return Err(GlbmError::invalid(format!("N = {n} is not even")));
            }
            let b = Matrix::from_rows(&[block[0].to_vec(), block[1].to_vec()])?;
            let sv = spectral::singular_values(&b, czero())?;
            let k = bound_from_extremes(sv.max(), sv.min())?;
            (Matrix::block_diagonal(&b, n / 2), k)
        }
        InitialKind::ExplicitMatrix(m) => {
            if m.rows() != n || !m.is_square() {
                return Err(GlbmError::DimensionMismatch {
                    expected: format!("{n}x{n}"),
                    found: format!("{}x{}", m.rows(), m.cols()),
                });
            }
            let sv = spectral::singular_values(m, czero())?;
            let k = bound_from_extremes(sv.max(), sv.min())?;
            (m.clone(), k)
        }
    };
    if spec.random_conjugation {
        let u = sample_haar_unitary::<T>(n, rng)?;
        matrix = u.matmul(&matrix).matmul(&u.adjoint());
    }
    Ok(RealizedInitial { matrix, k_bound })
}

/// Normal initial condition with six atoms of total mass one:
/// `⅛(δ₁ + δ₋₁ + δ₃ + δ₋₃) + ¼(δᵢ + δ₋ᵢ)`.
pub fn eight_atom_example<T: Real>() -> InitialKind<T> {
    let e = Ratio::new(1, 8);
    let q = Ratio::new(1, 4);
    InitialKind::AtomicNormal(vec![
        (creal(T::one()), e),
        (creal(-T::one()), e),
        (creal(T::lit(3.0)), e),
        (creal(T::lit(-3.0)), e),
        (c(T::zero(), T::one()), q),
        (c(T::zero(), -T::one()), q),
    ])
}

/// Non-normal block `[[1+i, 1], [0, −1+i]]`, repeated along the diagonal.
pub fn jordan_like_block<T: Real>() -> InitialKind<T> {
    InitialKind::NonNormalBlock([
        [c(T::one(), T::one()), c(T::one(), T::zero())],
        [czero(), c(-T::one(), T::one())],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::TimeGrid;
    use crate::stats::MeanSe;

    fn ginibre() -> EllipticParams<f64> {
        EllipticParams::ginibre()
    }

    #[test]
    fn zero_increment_leaves_b_unchanged() {
        let mut r = RngStream::new(1, 0);
        let b = crate::sampling::sample_ginibre::<f64>(5, 1.0, &mut r).unwrap();
        let out = step(&b, &ginibre(), &Matrix::zeros(5, 5), 0.3).unwrap();
        assert_eq!(out, b);
    }

    #[test]
    fn single_step_from_identity() {
        let p = EllipticParams::new(2.0, c(0.6, 1.0)).unwrap();
        let mut r = RngStream::new(2, 0);
        let dw = sample_elliptic_increment(&p, 0.5, 4, &mut r).unwrap();
        let out = step(&Matrix::identity(4), &p, &dw, 0.5).unwrap();
        let mut expect = dw.clone();
        expect.add_to_diagonal(cone::<f64>() + p.zeta() * 0.25);
        assert!(out.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let e = step(&Matrix::<f64>::identity(3), &ginibre(), &Matrix::zeros(4, 4), 0.1);
        assert!(matches!(e, Err(GlbmError::DimensionMismatch { .. })));
    }

    #[test]
    fn scalar_product_oracle() {
        let ws = [c(0.1, -0.2), c(-0.3, 0.05), c(0.2, 0.2)];
        let incs: Vec<Matrix<f64>> = ws.iter().map(|w| Matrix::from_diag(&[*w])).collect();
        let out = run_increments(&Matrix::identity(1), &ginibre(), &incs, 0.1).unwrap();
        let expect: Complex<f64> = ws.iter().map(|w| cone::<f64>() + w).product();
        assert!((out[(0, 0)] - expect).norm() < 1e-15);
    }

    #[test]
    fn zero_time_returns_initial() {
        let mut r = RngStream::new(3, 0);
        let init = make_initial(&InitialCondition::new(jordan_like_block()), 4, &mut r).unwrap();
        let cfg = SimConfig::new(4, ginibre(), TimeGrid::new(0.0, 5).unwrap(), 1, 1).unwrap();
        let out = simulate_endpoint(&cfg, &init.matrix, &mut r).unwrap();
        assert_eq!(out, init.matrix);
    }

    #[test]
    fn endpoint_is_deterministic() {
        let cfg = SimConfig::new(8, ginibre(), TimeGrid::new(1.0, 4).unwrap(), 1, 1).unwrap();
        let a = simulate_endpoint(&cfg, &Matrix::identity(8), &mut RngStream::new(5, 2)).unwrap();
        let b = simulate_endpoint(&cfg, &Matrix::identity(8), &mut RngStream::new(5, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overflow_is_reported() {
        let p = EllipticParams::new(1.0, c(0.0, 0.0)).unwrap();
        let big = Matrix::from_diag(&[c(1e300, 0.0)]);
        let incs = vec![big.clone(), big];
        let e = run_increments(&Matrix::identity(1), &p, &incs, 0.1);
        assert!(matches!(e, Err(GlbmError::NumericalOverflow { steps: 2 })));
    }

    #[test]
    fn inverse_single_step_algebra() {
        let p = EllipticParams::new(1.5, c(0.3, -0.4)).unwrap();
        let dt = 0.2;
        let mut r = RngStream::new(4, 0);
        let dw = sample_elliptic_increment(&p, dt, 6, &mut r).unwrap();
        let b = run_increments(&Matrix::identity(6), &p, std::slice::from_ref(&dw), dt).unwrap();
        let cm = run_inverse(&p, std::slice::from_ref(&dw), dt).unwrap();
        let prod = b.matmul(&cm);
        let zd = p.zeta() * dt;
        let mut expect = dw.matmul(&dw).scale(-cone::<f64>());
        expect.add_to_diagonal(cone::<f64>() + zd + (zd * 0.5) * (zd * 0.5));
        assert!(prod.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn inverse_with_zero_increments_is_exact() {
        let incs = vec![Matrix::<f64>::zeros(3, 3); 4];
        let cm = run_inverse(&ginibre(), &incs, 0.25).unwrap();
        assert_eq!(cm, Matrix::identity(3));
    }

    #[test]
    fn coupled_sums_are_exact() {
        let p = ginibre();
        let mut r = RngStream::new(6, 0);
        let ci = CoupledIncrements::sample(&p, 1.0, 3, 4, &mut r).unwrap();
        for l in 0..3 {
            let parent = ci.level(l).unwrap();
            let child = ci.level(l + 1).unwrap();
            assert_eq!(parent.len() * 2, child.len());
            for (j, m) in parent.iter().enumerate() {
                assert_eq!(*m, child[2 * j].add(&child[2 * j + 1]));
            }
        }
        assert!(matches!(refine_gap(&ci, &p, 4), Err(GlbmError::LevelOutOfRange { .. })));
        assert!(matches!(refine_gap(&ci, &p, 0), Err(GlbmError::LevelOutOfRange { .. })));
    }

    #[test]
    fn refine_gap_degenerate_coupling() {
        // fine increments (w, 0): level 1 gives (I+w)(I) vs level 0 (I+w)
        let p = ginibre();
        let w = Matrix::from_diag(&[c(0.3, 0.1), c(-0.2, 0.0)]);
        let ci = CoupledIncrements::from_finest(1.0, 1, vec![w.clone(), Matrix::zeros(2, 2)]).unwrap();
        assert_eq!(refine_gap(&ci, &p, 1).unwrap(), 0.0);
        let pz = EllipticParams::new(1.0, c(0.5, 0.0)).unwrap();
        let g = refine_gap(&ci, &pz, 1).unwrap();
        // fine: (1+w+0.125)(1+0.125), coarse: (1+w+0.25)
        let diff: Vec<f64> = [c(0.3, 0.1), c(-0.2, 0.0)]
            .iter()
            .map(|x| ((cone::<f64>() + x + 0.125) * 1.125 - (cone::<f64>() + x + 0.25)).norm_sqr())
            .collect();
        let expect = ((diff[0] + diff[1]) / 2.0).sqrt();
        assert!((g - expect).abs() < 1e-15);
        let ci0 = CoupledIncrements::from_finest(0.0, 1, vec![Matrix::zeros(2, 2); 2]).unwrap();
        assert_eq!(refine_gap(&ci0, &p, 1).unwrap(), 0.0);
    }

    #[test]
    fn affine_deviation_single_step() {
        let mut r = RngStream::new(7, 0);
        let p = ginibre();
        let dw = sample_elliptic_increment(&p, 0.3, 5, &mut r).unwrap();
        let id = InitialCondition::identity();
        assert!(affine_deviation(&id, std::slice::from_ref(&dw), &p, 0.3).unwrap() <= 4.0 * f64::EPSILON);
        let pz = EllipticParams::new(2.0, c(0.6, 1.0)).unwrap();
        let dev = affine_deviation(&id, std::slice::from_ref(&dw), &pz, 0.3).unwrap();
        assert!((dev - pz.zeta().norm() * 0.3 / 2.0).abs() < 1e-14);
        let other = InitialCondition::new(InitialKind::RootsOfUnity(2));
        assert!(matches!(
            affine_deviation(&other, std::slice::from_ref(&dw), &p, 0.3),
            Err(GlbmError::InvalidUsage(_))
        ));
    }

    #[test]
    fn closed_forms_agree() {
        let p = EllipticParams::new(2.0, c(0.6, 1.0)).unwrap();
        let a = second_moment_exact(&p, 0.125, 8);
        let b = second_moment_dyadic(2.0, c(0.6, 1.0), 3, 1.0);
        assert!((a - b).abs() < 1e-13 * b);
        assert!((second_moment_dyadic(1.0, c(0.0, 0.0), 3, 1.0) - 1.125f64.powi(8)).abs() < 1e-15);
    }

    #[test]
    fn second_moment_small_mc() {
        let p = ginibre();
        let cfg = SimConfig::new(16, p, TimeGrid::new(1.0, 8).unwrap(), 0, 1).unwrap();
        let vals: Vec<f64> = (0..300)
            .map(|i| {
                let b = simulate_endpoint(&cfg, &Matrix::identity(16), &mut RngStream::for_trial(11, i)).unwrap();
                b.ts_gram()
            })
            .collect();
        let s = MeanSe::from_slice(&vals);
        assert!(s.z_score(second_moment_exact(&p, 0.125, 8)).abs() < 4.0, "{s:?}");
    }

    #[test]
    fn unitary_mode_defect_shrinks_with_step() {
        // per-step defect of (I + iX − dt/2)*(I + iX − dt/2) is X² − dt·I,
        // so ‖B*B − I‖ decays like dt^{1/2}
        let p = EllipticParams::<f64>::unitary();
        let defect = |k: usize| {
            let cfg = SimConfig::new(8, p, TimeGrid::new(1.0, k).unwrap(), 0, 1).unwrap();
            let vals: Vec<f64> = (0..6)
                .map(|i| {
                    let b = simulate_endpoint(&cfg, &Matrix::identity(8), &mut RngStream::for_trial(1, i)).unwrap();
                    let mut g = b.adjoint().matmul(&b);
                    g.add_to_diagonal(-cone::<f64>());
                    spectral::op_norm(&g).unwrap()
                })
                .collect();
            crate::stats::median(&vals)
        };
        let coarse = defect(256);
        let fine = defect(4096);
        assert!(fine < 0.1, "{fine}");
        let ratio = coarse / fine;
        assert!(ratio > 2.0 && ratio < 8.0, "{coarse} {fine}");
        let ev = spectral::eigenvalues(&{
            let cfg = SimConfig::new(8, p, TimeGrid::new(1.0, 4096).unwrap(), 0, 1).unwrap();
            simulate_endpoint(&cfg, &Matrix::identity(8), &mut RngStream::new(2, 0)).unwrap()
        })
        .unwrap();
        assert!(ev.eigenvalues.iter().all(|z| (z.norm() - 1.0).abs() < 0.05));
    }

    #[test]
    fn make_initial_examples() {
        let mut r = RngStream::new(8, 0);
        let id = make_initial(&InitialCondition::<f64>::identity(), 4, &mut r).unwrap();
        assert_eq!(id.matrix, Matrix::identity(4));
        let u6 = make_initial(&InitialCondition::<f64>::new(InitialKind::RootsOfUnity(6)), 12, &mut r).unwrap();
        let d = u6.matrix.diagonal();
        for j in 0..6 {
            let w = c(0.0, 2.0 * std::f64::consts::PI * j as f64 / 6.0).exp();
            assert_eq!(d.iter().filter(|z| (**z - w).norm() < 1e-15).count(), 2);
        }
        assert_eq!(u6.k_bound, 1.0);
        let sv = spectral::singular_values(&u6.matrix, czero()).unwrap();
        assert!((sv.max() - 1.0).abs() < 1e-15 && (sv.min() - 1.0).abs() < 1e-15);
        let blk = make_initial(&InitialCondition::<f64>::new(jordan_like_block()), 4, &mut r).unwrap();
        let ev = spectral::eigenvalues(&blk.matrix).unwrap();
        for target in [c(1.0, 1.0), c(-1.0, 1.0)] {
            assert_eq!(ev.eigenvalues.iter().filter(|z| (**z - target).norm() < 1e-12).count(), 2);
        }
        let sv = spectral::singular_values(&blk.matrix, czero()).unwrap();
        assert!(sv.max() <= blk.k_bound * (1.0 + 1e-12) && sv.min() >= 1.0 / blk.k_bound * (1.0 - 1e-12));
    }

    #[test]
    fn make_initial_rejects_bad_sizes() {
        let mut r = RngStream::new(8, 0);
        assert!(make_initial(&InitialCondition::<f64>::new(InitialKind::RootsOfUnity(6)), 10, &mut r).is_err());
        assert!(make_initial(&InitialCondition::<f64>::new(jordan_like_block()), 5, &mut r).is_err());
        assert!(make_initial(&InitialCondition::<f64>::new(eight_atom_example()), 12, &mut r).is_err());
        let bad = InitialKind::AtomicNormal(vec![(c(1.0, 0.0), Ratio::new(1, 2))]);
        assert!(make_initial(&InitialCondition::<f64>::new(bad), 4, &mut r).is_err());
        let singular = InitialKind::AtomicNormal(vec![(c(0.0, 0.0), Ratio::new(1, 1))]);
        assert!(make_initial(&InitialCondition::<f64>::new(singular), 4, &mut r).is_err());
    }

    #[test]
    fn atomic_with_conjugation_keeps_spectrum() {
        let mut r = RngStream::new(9, 0);
        let init = InitialCondition::<f64>::new(eight_atom_example()).with_conjugation(true);
        let m = make_initial(&init, 8, &mut r).unwrap();
        assert_eq!(m.k_bound, 3.0);
        let ev = spectral::eigenvalues(&m.matrix).unwrap();
        for target in [c(1.0, 0.0), c(-1.0, 0.0), c(3.0, 0.0), c(-3.0, 0.0)] {
            assert_eq!(ev.eigenvalues.iter().filter(|z| (**z - target).norm() < 1e-10).count(), 1);
        }
        for target in [c(0.0, 1.0), c(0.0, -1.0)] {
            assert_eq!(ev.eigenvalues.iter().filter(|z| (**z - target).norm() < 1e-10).count(), 2);
        }
    }
}
