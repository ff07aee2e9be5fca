//! Interior evaluation through the ray-integral representation
//! `q(z) = (1/4πi) Σ_i ∫_{ℓ_i} e^{iλz − iβ²z̄/λ} ρ_i(λ) dλ/λ`.

use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use num_complex::Complex;
use rayon::prelude::*;

use crate::boundary_data::{adaptive_gauss, TestFn};
use crate::error::{Error, Result};
use crate::geometry::{Polygon, Side};
use crate::quadrature::trapezoid_refine;
use crate::scalar::{attainable, cabs, cis, real, to_f64, Real, ScaledComplex};
use crate::spectral::{rho_about, rho_on_own_ray, SideData};

/// Largest ray parameter tried before reporting a truncation failure.
const S_MAX: f64 = 40.0;
const S_SCAN_STEP: f64 = 0.02;
const MAX_POINTS_PER_RAY: usize = 1 << 18;
/// Points closer than this fraction of the diameter are near-boundary.
pub const NEAR_BOUNDARY_FRACTION: f64 = 1e-2;

/// Ray `ℓ_i` in the log parametrisation `λ(s) = e^{−iα_i} β e^s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySpec<T: Real> {
    pub side: usize,
    /// `e^{−iα_i}` (or `−e^{−iα_i}` for `ℓ̂_i`).
    pub direction: Complex<T>,
    pub beta: T,
    /// Truncation `S*`.
    pub s_max: T,
}

impl<T: Real> RaySpec<T> {
    pub fn own(side_index: usize, side: &Side<T>, beta: T, s_max: T) -> Self {
        Self { side: side_index, direction: cis(-side.alpha), beta, s_max }
    }

    /// `ℓ̂_i`, with `arg λ = π − α_i`.
    pub fn reflected(side_index: usize, side: &Side<T>, beta: T, s_max: T) -> Self {
        Self { side: side_index, direction: -cis(-side.alpha), beta, s_max }
    }

    pub fn lambda(&self, s: T) -> Complex<T> {
        self.direction * (self.beta * s.exp())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<T: Real> {
    pub value: Complex<T>,
    /// Quadrature change plus truncated tail, absolute.
    pub achieved_error: T,
    pub truncation: Vec<T>,
    pub evaluations: usize,
    pub near_boundary: bool,
    pub converged: bool,
}

fn side_log_bound<T: Real>(d: &SideData<T>, beta: T, dist: T, s: T, extra_power: usize) -> T {
    let r = beta * s.exp();
    let w = r + beta * beta / r;
    let g = d.side.length * w;
    let mag = d.dq.growth_norm(g) + w * d.q.growth_norm(g);
    if mag == T::zero() {
        return real(f64::NEG_INFINITY);
    }
    d.side.length.ln() + mag.ln() + real::<T>(extra_power as f64) * w.ln() - w * dist
}

/// `S*` such that the envelope bound past `±S*` stays below `tol` times its
/// peak, or `None` when `S_MAX` is not enough. Zero data gives `Some(0)`.
pub fn truncation_for<T: Real>(data: &SideData<T>, beta: T, z: Complex<T>, tol: T) -> Result<Option<(T, T)>> {
    truncation_with(data, beta, z, tol, 0)
}

fn truncation_with<T: Real>(data: &SideData<T>, beta: T, z: Complex<T>, tol: T, extra: usize) -> Result<Option<(T, T)>> {
    let dist = data.side.inner_distance(z);
    if dist <= T::zero() {
        return Err(Error::PointNotInterior(format!("({}, {})", to_f64(z.re), to_f64(z.im))));
    }
    let step = real::<T>(S_SCAN_STEP);
    let mut s = T::zero();
    let mut peak = side_log_bound(data, beta, dist, s, extra);
    if !peak.is_finite() {
        return Ok(Some((T::zero(), peak)));
    }
    let mut prev = peak;
    let cut = tol.ln();
    while s < real(S_MAX) {
        s += step;
        let b = side_log_bound(data, beta, dist, s, extra);
        peak = peak.max(b);
        if b < prev && b < peak + cut {
            return Ok(Some((s, b)));
        }
        prev = b;
    }
    Ok(None)
}

/// Trapezoid step needed for `tol` given the analyticity strip of the
/// integrand in `s`, whose half-width is the angle `z` subtends off the side.
fn required_step<T: Real>(side: &Side<T>, z: Complex<T>, tol: T) -> T {
    let rot = side.direction().conj();
    let d = side.inner_distance(z);
    let l = (rot * (side.start - z)).re.abs().max((rot * (side.end - z)).re.abs()).max(d);
    let strip = (d / l).atan();
    real::<T>(2.0) * T::pi() * strip / (-tol.ln()).max(T::one())
}

fn integrate<T: Real>(
    polygon: &Polygon<T>,
    beta: T,
    data: &[SideData<T>],
    z: Complex<T>,
    tol: T,
    direction: Option<Complex<T>>,
) -> Result<EvalReport<T>> {
    if data.len() != polygon.len() {
        return Err(Error::SideCountMismatch { expected: polygon.len(), got: data.len() });
    }
    let dist = polygon.boundary_distance(z);
    if !(dist > T::zero()) {
        return Err(Error::PointNotInterior(format!("({}, {})", to_f64(z.re), to_f64(z.im))));
    }
    let near = dist < real::<T>(NEAR_BOUNDARY_FRACTION) * polygon.diameter();
    let tol = attainable::<T>(to_f64(tol));
    let iu = Complex::new(T::zero(), T::one());
    let b2 = beta * beta;
    let extra = usize::from(direction.is_some());
    let mut total = Complex::new(T::zero(), T::zero());
    let mut err = T::zero();
    let mut truncation = Vec::with_capacity(data.len());
    let mut evaluations = 0;
    let mut converged = true;
    for d in data {
        let (s_star, tail_log) = match truncation_with(d, beta, z, tol, extra)? {
            Some(t) => t,
            None => {
                let achieved = side_log_bound(d, beta, d.side.inner_distance(z), real(S_MAX), extra).exp();
                if !near {
                    return Err(Error::TruncationFailure { achieved: to_f64(achieved) });
                }
                converged = false;
                err += achieved;
                truncation.push(real(S_MAX));
                continue;
            }
        };
        truncation.push(s_star);
        if s_star == T::zero() {
            continue;
        }
        let alpha_dir = cis(-d.side.alpha);
        let f = |s: T| {
            let v = rho_on_own_ray(d, beta, s, z).to_complex();
            match direction {
                Some(nu) => {
                    let lam = alpha_dir * (beta * s.exp());
                    v * (iu * lam * nu - iu * nu.conj() * b2 / lam)
                }
                None => v,
            }
        };
        let h_acc = required_step(&d.side, z, tol).min(real(0.5));
        let floor = tol * real::<T>(1e-3) * tail_log.exp();
        let res = trapezoid_refine(f, cabs, -s_star, s_star, real(0.5), h_acc, tol, floor, MAX_POINTS_PER_RAY);
        evaluations += res.evaluations;
        if !res.converged {
            if !near {
                return Err(Error::TruncationFailure { achieved: to_f64(res.last_change) });
            }
            converged = false;
        }
        total += res.value;
        err += res.last_change + real::<T>(2.0) * tail_log.exp();
    }
    let pref = T::one() / (real::<T>(4.0) * T::pi());
    Ok(EvalReport { value: total * pref / iu, achieved_error: err * pref, truncation, evaluations, near_boundary: near, converged })
}

/// Value of the solution at an interior point.
pub fn evaluate<T: Real>(polygon: &Polygon<T>, beta: T, data: &[SideData<T>], z: Complex<T>, tol: T) -> Result<Complex<T>> {
    Ok(integrate(polygon, beta, data, z, tol, None)?.value)
}

pub fn evaluate_detailed<T: Real>(polygon: &Polygon<T>, beta: T, data: &[SideData<T>], z: Complex<T>, tol: T) -> Result<EvalReport<T>> {
    integrate(polygon, beta, data, z, tol, None)
}

/// Derivative along the unit vector `nu` at an interior point.
pub fn evaluate_directional<T: Real>(
    polygon: &Polygon<T>,
    beta: T,
    data: &[SideData<T>],
    z: Complex<T>,
    nu: Complex<T>,
    tol: T,
) -> Result<EvalReport<T>> {
    integrate(polygon, beta, data, z, tol, Some(nu))
}

/// Outward normal derivative at `ψ_i(τ) − εν`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_normal_derivative_near<T: Real>(
    polygon: &Polygon<T>,
    beta: T,
    data: &[SideData<T>],
    side: usize,
    tau: T,
    epsilon: T,
    tol: T,
) -> Result<EvalReport<T>> {
    let s = polygon.side(side);
    let nu = s.outward_normal();
    evaluate_directional(polygon, beta, data, s.point(tau) - nu * epsilon, nu, tol)
}

/// Side `i` of the polygon whose sides are moved inward by `ε`.
pub fn inset_side<T: Real>(polygon: &Polygon<T>, i: usize, epsilon: T) -> Result<Side<T>> {
    let n = polygon.len();
    let corner = |k: usize| {
        // intersection of the shifted lines of sides k−1 and k
        let a = polygon.side((k + n - 1) % n);
        let b = polygon.side(k);
        let (na, nb) = (-a.outward_normal(), -b.outward_normal());
        let det = na.re * nb.im - na.im * nb.re;
        let (ra, rb) = (epsilon, epsilon);
        let x = (ra * nb.im - rb * na.im) / det;
        let y = (na.re * rb - nb.re * ra) / det;
        polygon.vertices()[k] + Complex::new(x, y)
    };
    let (a, b) = (corner(i), corner((i + 1) % n));
    let side = Side::new(a, b);
    let ok = (side.direction() * polygon.side(i).direction().conj()).re > T::zero();
    if !(epsilon > T::zero()) || !ok || !polygon.contains_strictly(side.point(real(0.5))) {
        return Err(Error::PointNotInterior(format!("inset distance {} leaves no side {i}", to_f64(epsilon))));
    }
    Ok(side)
}

/// `∫₀¹ q(ψ_i^ε(τ)) φ(τ) dτ` along side `i` of the `ε`-inset polygon.
pub fn trace_pairing<T: Real, F: TestFn<T> + Sync + ?Sized>(
    polygon: &Polygon<T>,
    beta: T,
    data: &[SideData<T>],
    side: usize,
    phi: &F,
    epsilon: T,
    tol: T,
) -> Result<Complex<T>> {
    let inset = inset_side(polygon, side, epsilon)?;
    let (a, b) = phi.support();
    let (a, b) = (a.max(T::zero()), b.min(T::one()));
    if b <= a {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let failure = std::sync::Mutex::new(None);
    let v = adaptive_gauss(
        |t| {
            let z = inset.point(t);
            match integrate(polygon, beta, data, z, tol, None) {
                Ok(r) => r.value * phi.value(t),
                Err(e) => {
                    failure.lock().expect("lock").get_or_insert(e);
                    Complex::new(T::zero(), T::zero())
                }
            }
        },
        a,
        b,
    )?;
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    Ok(v)
}

/// Positive `λ` with `|Γ|(λ − β²/λ) = k` and with `= −k`.
pub fn change_of_variables_check<T: Real>(side: &Side<T>, beta: T, k: T) -> (T, T) {
    let l = side.length;
    let disc = (k * k + real::<T>(4.0) * l * l * beta * beta).sqrt();
    let two_l = l + l;
    ((k + disc) / two_l, (-k + disc) / two_l)
}

/// `∫ Φ_i(λ) ρ_j(λ) dλ/λ` along `ray`, where
/// `Φ_i(λ) = ∫₀¹ φ(τ) e^{iλψ_i(τ) − iβ² conj ψ_i(τ)/λ} dτ`.
///
/// For `j ≠ i` the value on `ℓ_j` equals the value on `ℓ̂_i`.
pub fn weighted_ray_integral<T: Real, F: TestFn<T> + ?Sized>(
    polygon: &Polygon<T>,
    beta: T,
    data_j: &SideData<T>,
    i: usize,
    phi: &F,
    ray: &RaySpec<T>,
    tol: T,
) -> Result<Complex<T>> {
    let side_i = *polygon.side(i);
    let (a, b) = phi.support();
    let (a, b) = (a.max(T::zero()), b.min(T::one()));
    let origin = polygon.centroid();
    let iu = Complex::new(T::zero(), T::one());
    let b2 = Complex::new(beta * beta, T::zero());
    let failure = std::sync::Mutex::new(None);
    let f = |s: T| {
        let lam = ray.lambda(s);
        let run = || -> Result<Complex<T>> {
            // ρ_j about the centroid times Φ_i measured from the centroid
            let rho = rho_about(data_j, lam, beta, origin)?;
            adaptive_gauss(
                |t| {
                    let w = side_i.point(t) - origin;
                    rho.mul(ScaledComplex::exp(iu * lam * w - iu * b2 * w.conj() / lam)).to_complex() * phi.value(t)
                },
                a,
                b,
            )
        };
        run().unwrap_or_else(|e| {
            failure.lock().expect("lock").get_or_insert(e);
            Complex::new(T::zero(), T::zero())
        })
    };
    let res = trapezoid_refine(f, cabs, -ray.s_max, ray.s_max, real(0.25), real(0.125), tol, T::zero(), 1 << 16);
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    if !res.converged {
        return Err(Error::QuadratureNonConvergence(to_f64(res.last_change)));
    }
    Ok(res.value)
}

/// Evaluated field on a set of interior points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T: Real> {
    pub values: Vec<(Complex<T>, Complex<T>)>,
    pub beta: T,
    pub tol: T,
    pub polygon_hash: u64,
}

impl<T: Real> GridField<T> {
    /// `x,y,re,im` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,re,im\n");
        for (z, v) in &self.values {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", to_f64(z.re), to_f64(z.im), to_f64(v.re), to_f64(v.im));
        }
        out
    }
}

pub fn polygon_hash<T: Real>(polygon: &Polygon<T>) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for v in polygon.vertices() {
        to_f64(v.re).to_bits().hash(&mut h);
        to_f64(v.im).to_bits().hash(&mut h);
    }
    h.finish()
}

/// Parallel evaluation over `points`, all of which must be interior.
pub fn evaluate_grid<T: Real>(polygon: &Polygon<T>, beta: T, data: &[SideData<T>], points: &[Complex<T>], tol: T) -> Result<GridField<T>> {
    let values = points.par_iter().map(|&z| evaluate(polygon, beta, data, z, tol).map(|v| (z, v))).collect::<Result<Vec<_>>>()?;
    Ok(GridField { values, beta, tol, polygon_hash: polygon_hash(polygon) })
}

/// Uniform `nx × ny` lattice over the bounding box inset by `margin`
/// (endpoints included, a single node sits at the centre), keeping points at
/// least `margin` from the boundary. Row-major with `x` fastest.
pub fn interior_lattice<T: Real>(polygon: &Polygon<T>, nx: usize, ny: usize, margin: T) -> Vec<Complex<T>> {
    let vs = polygon.vertices();
    let lo = |f: fn(&Complex<T>) -> T| vs.iter().map(f).fold(real::<T>(f64::INFINITY), |m, v| m.min(v));
    let hi = |f: fn(&Complex<T>) -> T| vs.iter().map(f).fold(real::<T>(f64::NEG_INFINITY), |m, v| m.max(v));
    let (x0, x1) = (lo(|z| z.re) + margin, hi(|z| z.re) - margin);
    let (y0, y1) = (lo(|z| z.im) + margin, hi(|z| z.im) - margin);
    let node = |a: T, b: T, k: usize, n: usize| {
        if n == 1 {
            (a + b) * real::<T>(0.5)
        } else {
            a + (b - a) * real::<T>(k as f64 / (n - 1) as f64)
        }
    };
    // tolerate rounding in the inset coordinates
    let floor = margin * real::<T>(1.0 - 1e-12);
    let mut out = Vec::new();
    if !(x0 <= x1 && y0 <= y1) {
        return out;
    }
    for j in 0..ny {
        for i in 0..nx {
            let z = Complex::new(node(x0, x1, i, nx), node(y0, y1, j, ny));
            if polygon.boundary_distance(z) >= floor {
                out.push(z);
            }
        }
    }
    out
}
