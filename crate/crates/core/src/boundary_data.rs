//! Boundary distributions on a side: a shifted-Legendre smooth part plus
//! Dirac-derivative charges at the endpoints.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_on;
use crate::scalar::{attainable, cabs, cexp, cpowi, i_pow, real, Real, ScaledComplex};
use crate::special::{shifted_legendre, spherical_bessel_j};

pub const MAX_DIRAC_ORDER: usize = 4;

const QUAD_START: usize = 64;
const QUAD_CAP: usize = 1024;
const QUAD_RTOL: f64 = 1e-12;

/// Coefficients of `Σ a_m P̃_m(τ)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothDatum<T: Real> {
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Real> SmoothDatum<T> {
    pub fn new(coeffs: Vec<Complex<T>>) -> Self {
        Self { coeffs }
    }

    pub fn zero(modes: usize) -> Self {
        Self { coeffs: vec![Complex::new(T::zero(), T::zero()); modes] }
    }

    pub fn eval(&self, tau: T) -> Complex<T> {
        if self.coeffs.is_empty() {
            return Complex::new(T::zero(), T::zero());
        }
        let p = shifted_legendre(self.coeffs.len() - 1, tau);
        self.coeffs.iter().zip(p).fold(Complex::new(T::zero(), T::zero()), |a, (c, p)| a + c * p)
    }

    /// `‖f‖_{L²(0,1)}` from `∫ P̃_m² = 1/(2m+1)`.
    pub fn l2_norm(&self) -> T {
        self.coeffs.iter().enumerate().fold(T::zero(), |a, (m, c)| a + c.norm_sqr() / real::<T>(2.0 * m as f64 + 1.0)).sqrt()
    }

    /// Bound on `sup |f|` (`|P̃_m| ≤ 1`).
    pub fn sup_bound(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |a, c| a + cabs(*c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    /// `τ = 0`
    Start,
    /// `τ = 1`
    End,
}

impl Endpoint {
    pub fn tau<T: Real>(self) -> T {
        match self {
            Endpoint::Start => T::zero(),
            Endpoint::End => T::one(),
        }
    }
}

/// `weight · δ^{(order)}` at an endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass<T: Real> {
    pub endpoint: Endpoint,
    pub order: usize,
    pub weight: Complex<T>,
}

/// Smooth part plus endpoint charges.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDatum<T: Real> {
    pub smooth: SmoothDatum<T>,
    pub masses: Vec<PointMass<T>>,
}

impl<T: Real> BoundaryDatum<T> {
    pub fn zero() -> Self {
        Self { smooth: SmoothDatum::zero(0), masses: Vec::new() }
    }

    pub fn from_coeffs(coeffs: Vec<Complex<T>>) -> Self {
        Self { smooth: SmoothDatum::new(coeffs), masses: Vec::new() }
    }

    pub fn dirac(endpoint: Endpoint, order: usize, weight: Complex<T>) -> Result<Self> {
        Self::zero().with_mass(endpoint, order, weight)
    }

    pub fn with_mass(mut self, endpoint: Endpoint, order: usize, weight: Complex<T>) -> Result<Self> {
        if order > MAX_DIRAC_ORDER {
            return Err(Error::DiracOrderTooHigh(order));
        }
        self.masses.push(PointMass { endpoint, order, weight });
        Ok(self)
    }

    pub fn max_order(&self) -> Option<usize> {
        self.masses.iter().map(|m| m.order).max()
    }

    pub fn modes(&self) -> usize {
        self.smooth.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        let z = Complex::new(T::zero(), T::zero());
        self.smooth.coeffs.iter().all(|c| *c == z) && self.masses.iter().all(|m| m.weight == z)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.modes().max(other.modes());
        let z = Complex::new(T::zero(), T::zero());
        let coeffs = (0..n).map(|m| *self.smooth.coeffs.get(m).unwrap_or(&z) + *other.smooth.coeffs.get(m).unwrap_or(&z)).collect();
        let mut masses = self.masses.clone();
        masses.extend_from_slice(&other.masses);
        Self { smooth: SmoothDatum::new(coeffs), masses }
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self {
            smooth: SmoothDatum::new(self.smooth.coeffs.iter().map(|c| c * k).collect()),
            masses: self.masses.iter().map(|m| PointMass { weight: m.weight * k, ..*m }).collect(),
        }
    }

    /// `Σ|a_m| + Σ|w| g^j`: bounds `|⟨u, e^{E+μτ}⟩| / max|e^{E+μτ}|` when `|μ| ≤ g`.
    pub fn growth_norm(&self, g: T) -> T {
        let masses = self.masses.iter().fold(T::zero(), |a, m| a + cabs(m.weight) * g.powi(m.order as i32));
        self.smooth.sup_bound() + masses
    }
}

/// Smooth function on `[0, 1]` that can be paired with a datum.
pub trait TestFn<T: Real> {
    fn value(&self, tau: T) -> Complex<T>;
    /// `order`-th derivative, `None` beyond what the function supplies.
    fn derivative(&self, order: usize, tau: T) -> Option<Complex<T>>;
    /// Interval outside which the function vanishes.
    fn support(&self) -> (T, T) {
        (T::zero(), T::one())
    }
}

/// `Σ c_k τ^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T: Real> {
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(coeffs: Vec<Complex<T>>) -> Self {
        Self { coeffs }
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Self { coeffs: coeffs.iter().map(|&c| Complex::new(real(c), T::zero())).collect() }
    }
}

impl<T: Real> TestFn<T> for Polynomial<T> {
    fn value(&self, tau: T) -> Complex<T> {
        self.coeffs.iter().rev().fold(Complex::new(T::zero(), T::zero()), |a, c| a * tau + c)
    }

    fn derivative(&self, order: usize, tau: T) -> Option<Complex<T>> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, c) in self.coeffs.iter().enumerate().skip(order).rev() {
            let falling = ((k - order + 1)..=k).fold(T::one(), |a, f| a * real::<T>(f as f64));
            acc = acc * tau + c * falling;
        }
        Some(acc)
    }
}

/// `e^{E + μτ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential<T: Real> {
    pub offset: Complex<T>,
    pub slope: Complex<T>,
}

impl<T: Real> TestFn<T> for Exponential<T> {
    fn value(&self, tau: T) -> Complex<T> {
        cexp(self.offset + self.slope * tau)
    }

    fn derivative(&self, order: usize, tau: T) -> Option<Complex<T>> {
        Some(cpowi(self.slope, order) * self.value(tau))
    }
}

/// Bump `exp(−1/(s(1−s)))`, `s = (τ−c)/w + ½`, vanishing to all orders at the
/// ends of its support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction<T: Real> {
    pub center: T,
    pub width: T,
    pub max_order: usize,
}

impl<T: Real> TestFunction<T> {
    pub fn new(center: T, width: T) -> Result<Self> {
        let half = width * real::<T>(0.5);
        if width <= T::zero() || center - half < T::zero() || center + half > T::one() {
            return Err(Error::InvalidConfig("test function support must lie in [0, 1]".into()));
        }
        Ok(Self { center, width, max_order: 8 })
    }

    /// Taylor coefficients of φ at `tau` in the local variable `s`.
    fn jet(&self, tau: T, order: usize) -> Vec<T> {
        let s0 = (tau - self.center) / self.width + real::<T>(0.5);
        let mut e = vec![T::zero(); order + 1];
        if s0 <= T::zero() || s0 >= T::one() {
            return e;
        }
        // p(s) = s(1 − s) around s0
        let p0 = s0 - s0 * s0;
        let p1 = T::one() - s0 - s0;
        let p2 = -T::one();
        let mut r = vec![T::zero(); order + 1];
        r[0] = T::one() / p0;
        for k in 1..=order {
            let mut acc = p1 * r[k - 1];
            if k >= 2 {
                acc += p2 * r[k - 2];
            }
            r[k] = -acc / p0;
        }
        let g: Vec<T> = r.iter().map(|v| -*v).collect();
        e[0] = g[0].exp();
        for k in 1..=order {
            let mut acc = T::zero();
            for j in 1..=k {
                acc += real::<T>(j as f64) * g[j] * e[k - j];
            }
            e[k] = acc / real::<T>(k as f64);
        }
        e
    }
}

impl<T: Real> TestFn<T> for TestFunction<T> {
    fn value(&self, tau: T) -> Complex<T> {
        Complex::new(self.jet(tau, 0)[0], T::zero())
    }

    fn derivative(&self, order: usize, tau: T) -> Option<Complex<T>> {
        if order > self.max_order {
            return None;
        }
        let e = self.jet(tau, order);
        let fact = (1..=order).fold(T::one(), |a, k| a * real::<T>(k as f64));
        Some(Complex::new(e[order] * fact / self.width.powi(order as i32), T::zero()))
    }

    fn support(&self) -> (T, T) {
        let half = self.width * real::<T>(0.5);
        (self.center - half, self.center + half)
    }
}

/// Adaptive Gauss–Legendre on `[a, b]`: 64 nodes doubling to 1024 until the
/// relative change drops below 1e−12.
pub fn adaptive_gauss<T: Real, F: Fn(T) -> Complex<T>>(f: F, a: T, b: T) -> Result<Complex<T>> {
    // change is measured against ∫|f| so cancelling integrals still terminate
    let eval = |n: usize| {
        gauss_on(n, a, b).into_iter().fold((Complex::new(T::zero(), T::zero()), T::zero()), |(acc, mass), (x, w)| {
            let v = f(x) * w;
            (acc + v, mass + cabs(v))
        })
    };
    let mut n = QUAD_START;
    let (mut prev, _) = eval(n);
    loop {
        n *= 2;
        let (cur, mass) = eval(n);
        let change = cabs(cur - prev);
        if change <= attainable::<T>(QUAD_RTOL) * mass || change == T::zero() {
            return Ok(cur);
        }
        if n >= QUAD_CAP {
            return Err(Error::QuadratureNonConvergence(crate::scalar::to_f64(change / mass)));
        }
        prev = cur;
    }
}

/// `⟨u, φ⟩`.
pub fn pair<T: Real, F: TestFn<T> + ?Sized>(u: &BoundaryDatum<T>, phi: &F) -> Result<Complex<T>> {
    let mut total = Complex::new(T::zero(), T::zero());
    if !u.smooth.coeffs.is_empty() {
        let (a, b) = phi.support();
        let (a, b) = (a.max(T::zero()), b.min(T::one()));
        if b > a {
            total += adaptive_gauss(|t| u.smooth.eval(t) * phi.value(t), a, b)?;
        }
    }
    for m in &u.masses {
        let d = phi.derivative(m.order, m.endpoint.tau()).ok_or(Error::InsufficientDerivativeOrder {
            needed: m.order,
            available: (0..m.order).rev().find(|&k| phi.derivative(k, T::zero()).is_some()).unwrap_or(0),
        })?;
        let sign = if m.order % 2 == 1 { -T::one() } else { T::one() };
        total += m.weight * d * sign;
    }
    Ok(total)
}

/// `∫₀¹ P̃_m(τ) e^{μτ} dτ` for `m < count`, returned as `(values, shift)` with
/// the true moments equal to `values · e^{shift}`.
///
/// Purely imaginary `μ = iκ` uses `e^{iκ/2} i^m j_m(κ/2)`; other slopes use
/// adaptive quadrature with `e^{max(0, Re μ)}` factored out.
pub fn legendre_exp_moments<T: Real>(mu: Complex<T>, count: usize) -> Result<(Vec<Complex<T>>, T)> {
    if count == 0 {
        return Ok((Vec::new(), T::zero()));
    }
    if mu.re.abs() <= real(1e-13) {
        let half = mu.im * real::<T>(0.5);
        let j = spherical_bessel_j(count - 1, half);
        let phase = crate::scalar::cis(half);
        let v = j.iter().enumerate().map(|(m, jm)| phase * i_pow::<T>(m) * *jm).collect();
        return Ok((v, T::zero()));
    }
    let shift = mu.re.max(T::zero());
    let eval = |n: usize| {
        let mut acc = vec![Complex::new(T::zero(), T::zero()); count];
        for (x, w) in gauss_on(n, T::zero(), T::one()) {
            let k = cexp(mu * x - Complex::new(shift, T::zero())) * w;
            for (a, p) in acc.iter_mut().zip(shifted_legendre(count - 1, x)) {
                *a += k * p;
            }
        }
        acc
    };
    let mut n = QUAD_START.max(2 * count);
    let mut prev = eval(n);
    loop {
        n *= 2;
        let cur = eval(n);
        let scale = cur.iter().fold(T::zero(), |m, v| m.max(cabs(*v)));
        let change = cur.iter().zip(&prev).fold(T::zero(), |m, (a, b)| m.max(cabs(*a - *b)));
        if change <= attainable::<T>(QUAD_RTOL) * scale {
            return Ok((cur, shift));
        }
        if n >= QUAD_CAP {
            return Err(Error::QuadratureNonConvergence(crate::scalar::to_f64(change / scale)));
        }
        prev = cur;
    }
}

/// `⟨u, e^{E + μτ}⟩` given precomputed moments (at least `u.modes()` of them).
pub fn pair_exponential_with<T: Real>(
    u: &BoundaryDatum<T>,
    offset: Complex<T>,
    mu: Complex<T>,
    moments: &[Complex<T>],
    shift: T,
) -> ScaledComplex<T> {
    let smooth = u.smooth.coeffs.iter().zip(moments).fold(Complex::new(T::zero(), T::zero()), |a, (c, m)| a + c * m);
    let mut out = ScaledComplex::exp(offset + Complex::new(shift, T::zero())).scale(smooth);
    for m in &u.masses {
        let sign = if m.order % 2 == 1 { -T::one() } else { T::one() };
        let k = ScaledComplex::exp(offset + mu * m.endpoint.tau::<T>());
        out = out.add(k.scale(cpowi(mu, m.order) * m.weight * sign));
    }
    out
}

/// `⟨u, e^{E + μτ}⟩`.
pub fn pair_exponential<T: Real>(u: &BoundaryDatum<T>, offset: Complex<T>, mu: Complex<T>) -> Result<ScaledComplex<T>> {
    let (moments, shift) = legendre_exp_moments(mu, u.modes())?;
    Ok(pair_exponential_with(u, offset, mu, &moments, shift))
}

/// `û(ζ) = ⟨u, e^{−iζτ}⟩`.
pub fn fourier<T: Real>(u: &BoundaryDatum<T>, zeta: Complex<T>) -> Result<Complex<T>> {
    let mu = Complex::new(T::zero(), -T::one()) * zeta;
    Ok(pair_exponential(u, Complex::new(T::zero(), T::zero()), mu)?.to_complex())
}

/// Legendre coefficients of degree `0..=degree` by Gauss–Legendre projection.
pub fn project_function<T: Real, F: Fn(T) -> Complex<T>>(f: F, degree: usize) -> SmoothDatum<T> {
    let nodes = QUAD_START.max(2 * (degree + 1));
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); degree + 1];
    for (x, w) in gauss_on(nodes, T::zero(), T::one()) {
        let fx = f(x) * w;
        for (a, p) in coeffs.iter_mut().zip(shifted_legendre(degree, x)) {
            *a += fx * p;
        }
    }
    for (m, a) in coeffs.iter_mut().enumerate() {
        *a *= real::<T>(2.0 * m as f64 + 1.0);
    }
    SmoothDatum::new(coeffs)
}
