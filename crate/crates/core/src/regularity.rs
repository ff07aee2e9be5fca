//! Regularity diagnostics in the gauge where side `i` is `(0, 1)` and the
//! polygon lies below the real axis: the Fourier form of `ρ_i`, the decay of
//! the adjacent-triple sum, the elliptic multiplier and truncated Sobolev norms.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::boundary_data::{fourier, BoundaryDatum};
use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::quadrature::composite_gauss;
use crate::scalar::{cabs, cis, real, to_f64, Real, ScaledComplex};
use crate::spectral::{rho, rho_scaled, SideData};

/// Tolerance on the aligned-gauge placement of side `i`.
const GAUGE_TOL: f64 = 1e-12;

/// `k = λ − β²/λ`.
pub fn k_of_lambda<T: Real>(lambda: T, beta: T) -> T {
    lambda - beta * beta / lambda
}

/// Positive inverse of [`k_of_lambda`].
pub fn lambda_of_k<T: Real>(k: T, beta: T) -> T {
    let disc = (k * k + real::<T>(4.0) * beta * beta).sqrt();
    let two = real::<T>(2.0);
    if k >= T::zero() {
        (k + disc) / two
    } else {
        two * beta * beta / (disc - k)
    }
}

/// `⟨k⟩ = (1 + k²)^{1/2}`.
pub fn japanese_bracket<T: Real>(k: T) -> T {
    (T::one() + k * k).sqrt()
}

/// Samples of the multiplier `√(k² + 4β²)` with its ellipticity constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierProfile<T: Real> {
    pub k: Vec<T>,
    pub values: Vec<T>,
    pub bracket: Vec<T>,
    /// `c₁ = min(1, 2β)`, `c₂ = max(1, 2β)` with `c₁⟨k⟩ ≤ √(k²+4β²) ≤ c₂⟨k⟩`.
    pub c1: T,
    pub c2: T,
}

pub fn multiplier_profile<T: Real>(beta: T, ks: &[T]) -> MultiplierProfile<T> {
    let two_beta = beta + beta;
    MultiplierProfile {
        k: ks.to_vec(),
        values: ks.iter().map(|&k| (k * k + two_beta * two_beta).sqrt()).collect(),
        bracket: ks.iter().map(|&k| japanese_bracket(k)).collect(),
        c1: two_beta.min(T::one()),
        c2: two_beta.max(T::one()),
    }
}

/// The constant `c` in `ρ_i = c [N̂(k) − √(k²+4β²) D̂(k)]`, derived from the
/// definition of `ρ_i` in the aligned gauge.
pub fn aligned_constant<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// The constant printed alongside the Fourier form in the source derivation.
pub const STATED_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedDecomposition<T: Real> {
    pub k: T,
    pub lambda: T,
    pub rho: Complex<T>,
    /// `e^{−ik} F[∂ₙq_i](−k)`, the transform of the data in the coordinate
    /// `x = 1 − τ` running along `(0, 1)`.
    pub n_hat: Complex<T>,
    pub d_hat: Complex<T>,
    pub multiplier: T,
    pub constant: Complex<T>,
}

impl<T: Real> AlignedDecomposition<T> {
    /// `ρ_i − c (N̂ − √(k²+4β²) D̂)`.
    pub fn mismatch(&self) -> T {
        cabs(self.rho - self.constant * (self.n_hat - self.d_hat * self.multiplier))
    }
}

/// Checks that side `i` runs over `(0, 1)` with every other vertex below it.
pub fn check_aligned<T: Real>(polygon: &Polygon<T>, i: usize) -> Result<()> {
    let s = polygon.side(i);
    let tol = real::<T>(GAUGE_TOL);
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let on_interval =
        (cabs(s.start - one) <= tol && cabs(s.end - zero) <= tol) || (cabs(s.start - zero) <= tol && cabs(s.end - one) <= tol);
    if !on_interval {
        return Err(Error::GaugeViolation(format!("side {i} does not coincide with (0, 1)")));
    }
    let n = polygon.len();
    for (j, v) in polygon.vertices().iter().enumerate() {
        if j != i && j != (i + 1) % n && !(v.im < T::zero()) {
            return Err(Error::GaugeViolation(format!("vertex {j} is not strictly below the real axis")));
        }
    }
    Ok(())
}

/// `ρ_i` at `λ = lambda_of_k(k)` next to the Fourier transforms of its data.
pub fn aligned_rho_decomposition<T: Real>(
    polygon: &Polygon<T>,
    beta: T,
    data: &[SideData<T>],
    i: usize,
    k: T,
) -> Result<AlignedDecomposition<T>> {
    check_aligned(polygon, i)?;
    if data.len() != polygon.len() {
        return Err(Error::SideCountMismatch { expected: polygon.len(), got: data.len() });
    }
    let lambda = lambda_of_k(k, beta);
    let d = &data[i];
    let r = rho(d, Complex::new(lambda, T::zero()), beta)?;
    // counterclockwise order makes the aligned side run from 1 to 0
    let phase = cis(-k);
    let transform = |u: &BoundaryDatum<T>| -> Result<Complex<T>> {
        if d.side.start.re > d.side.end.re {
            Ok(phase * fourier(u, Complex::new(-k, T::zero()))?)
        } else {
            fourier(u, Complex::new(k, T::zero()))
        }
    };
    Ok(AlignedDecomposition {
        k,
        lambda,
        rho: r,
        n_hat: transform(&d.dq)?,
        d_hat: transform(&d.q)?,
        multiplier: (k * k + real::<T>(4.0) * beta * beta).sqrt(),
        constant: aligned_constant(),
    })
}

/// Fit of `|ρ_{i−1} + ρ_i + ρ_{i+1}| ≈ C w^M e^{−εw}`, `w = λ + β²/λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    #[serde(rename = "C")]
    pub c: f64,
    pub eps: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// RMS residual of the log-space fit.
    pub fit_residual: f64,
    /// Smallest depth of a far-side vertex below the axis.
    pub clearance: f64,
    /// Range of `w` used.
    pub w_range: (f64, f64),
    pub points: usize,
    /// All samples vanish; no fit attempted.
    pub degenerate: bool,
}

/// `ln |Σ_{j ∉ {i−1, i, i+1}} ρ_j(λ)|`, the triple sum up to sign.
pub fn triple_sum_log_abs<T: Real>(polygon: &Polygon<T>, beta: T, data: &[SideData<T>], i: usize, lambda: T) -> Result<T> {
    let n = polygon.len();
    let near = [(i + n - 1) % n, i, (i + 1) % n];
    let mut sum = ScaledComplex::zero();
    for (j, d) in data.iter().enumerate() {
        if !near.contains(&j) {
            sum = sum.add(rho_scaled(d, Complex::new(lambda, T::zero()), beta)?);
        }
    }
    Ok(sum.log_abs())
}

/// Least-squares fit of `ln|S| = ln C + M ln w − εw` over `w ≥ 4β`.
pub fn triple_decay_fit<T: Real>(polygon: &Polygon<T>, beta: T, data: &[SideData<T>], i: usize, lambdas: &[T]) -> Result<DecayFit> {
    check_aligned(polygon, i)?;
    if data.len() != polygon.len() {
        return Err(Error::SideCountMismatch { expected: polygon.len(), got: data.len() });
    }
    let n = polygon.len();
    let near = [(i + n - 1) % n, i, (i + 1) % n];
    let clearance = polygon
        .vertices()
        .iter()
        .enumerate()
        .filter(|(j, _)| {
            // vertices touching only far sides, plus far-side endpoints
            (0..n).any(|s| !near.contains(&s) && (s == *j || (s + 1) % n == *j))
        })
        .map(|(_, v)| -to_f64(v.im))
        .fold(f64::INFINITY, f64::min);
    let floor = 4.0 * to_f64(beta);
    let mut rows: Vec<(f64, f64)> = Vec::new();
    let mut any_finite = false;
    for &lam in lambdas {
        if !(lam > T::zero()) {
            return Err(Error::FitFailure("lambda grid must be positive".into()));
        }
        let w = to_f64(lam + beta * beta / lam);
        let v = to_f64(triple_sum_log_abs(polygon, beta, data, i, lam)?);
        if v.is_finite() {
            any_finite = true;
        }
        if w >= floor {
            rows.push((w, v));
        }
    }
    let w_range = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.0), b.max(r.0)));
    if !any_finite {
        return Ok(DecayFit { c: 0.0, eps: 0.0, m: 0.0, fit_residual: 0.0, clearance, w_range, points: 0, degenerate: true });
    }
    if rows.iter().any(|r| !r.1.is_finite()) {
        return Err(Error::FitFailure("triple sum vanishes at some grid points".into()));
    }
    if rows.len() < 4 {
        return Err(Error::FitFailure(format!("only {} samples with w >= 4 beta", rows.len())));
    }
    let a = nalgebra::DMatrix::<f64>::from_fn(rows.len(), 3, |r, c| match c {
        0 => 1.0,
        1 => rows[r].0.ln(),
        _ => -rows[r].0,
    });
    let b = nalgebra::DVector::<f64>::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let sol = crate::linalg::lstsq_svd(&a, &b, 1e-14);
    if sol.rank < 3 {
        return Err(Error::FitFailure("w grid does not separate the model terms".into()));
    }
    let resid = (&a * &sol.x - &b).norm() / (rows.len() as f64).sqrt();
    Ok(DecayFit {
        c: sol.x[0].exp(),
        m: sol.x[1],
        eps: sol.x[2],
        fit_residual: resid,
        clearance,
        w_range,
        points: rows.len(),
        degenerate: false,
    })
}

/// `(∫_{|k|≤K} ⟨k⟩^{2s} |û(k)|² dk)^{1/2}` with `û(k) = ⟨u, e^{−ikτ}⟩`.
pub fn sobolev_norm<T: Real>(datum: &BoundaryDatum<T>, s: T, cutoff: T) -> Result<T> {
    if !(cutoff > T::zero()) {
        return Err(Error::DomainError("cutoff must be positive".into()));
    }
    let panels = (to_f64(cutoff * real::<T>(2.0)).ceil() as usize).max(1);
    let mut acc = T::zero();
    for (k, w) in composite_gauss(-cutoff, cutoff, panels, 16) {
        let u = fourier(datum, Complex::new(k, T::zero()))?;
        acc += w * japanese_bracket(k).powf(s + s) * u.norm_sqr();
    }
    Ok(acc.sqrt())
}
