//! Scalar plumbing shared by every module.

use nalgebra::{ComplexField, RealField};
use num_complex::Complex;

/// Floating-point scalar the solver is generic over (`f32`, `f64`).
pub trait Real: RealField + Copy + Send + Sync {}

impl<T: RealField + Copy + Send + Sync> Real for T {}

/// Lossless-enough conversion from an `f64` literal.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    nalgebra::try_convert::<T, f64>(x).unwrap_or(f64::NAN)
}

/// Machine epsilon of the working scalar.
#[inline]
pub fn epsilon<T: Real>() -> T {
    T::default_epsilon()
}

/// `max(tol, 100 ε)`: tolerances no tighter than the scalar can deliver.
#[inline]
pub fn attainable<T: Real>(tol: f64) -> T {
    real::<T>(tol).max(epsilon::<T>() * real::<T>(100.0))
}

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(real(re), real(im))
}

#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    ComplexField::exp(z)
}

#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub fn carg<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}

#[inline]
pub fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    ComplexField::sqrt(z)
}

/// Principal-branch power `z^p`.
pub fn cpow<T: Real>(z: Complex<T>, p: Complex<T>) -> Complex<T> {
    if z.re == T::zero() && z.im == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let log = Complex::new(cabs(z).ln(), carg(z));
    cexp(log * p)
}

pub fn cpowi<T: Real>(z: Complex<T>, n: usize) -> Complex<T> {
    let mut out = Complex::new(T::one(), T::zero());
    for _ in 0..n {
        out *= z;
    }
    out
}

/// `i^m`
pub fn i_pow<T: Real>(m: usize) -> Complex<T> {
    match m % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

/// Complex number stored as `mantissa * exp(log_scale)`.
///
/// Kernels along the collocation rays reach `exp(±(r + β²/r))`; keeping the
/// exponent separate lets rows be normalised before anything overflows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex<T: Real> {
    pub mantissa: Complex<T>,
    pub log_scale: T,
}

impl<T: Real> ScaledComplex<T> {
    pub fn zero() -> Self {
        Self { mantissa: Complex::new(T::zero(), T::zero()), log_scale: T::zero() }
    }

    pub fn new(mantissa: Complex<T>, log_scale: T) -> Self {
        Self { mantissa, log_scale }
    }

    /// `exp(z)` with the real part carried in the scale.
    pub fn exp(z: Complex<T>) -> Self {
        Self { mantissa: cis(z.im), log_scale: z.re }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == T::zero() && self.mantissa.im == T::zero()
    }

    pub fn scale(self, k: Complex<T>) -> Self {
        Self { mantissa: self.mantissa * k, log_scale: self.log_scale }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Self) -> Self {
        Self { mantissa: self.mantissa * other.mantissa, log_scale: self.log_scale + other.log_scale }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.log_scale >= other.log_scale { (self, other) } else { (other, self) };
        let f = (lo.log_scale - hi.log_scale).exp();
        Self { mantissa: hi.mantissa + lo.mantissa * f, log_scale: hi.log_scale }
    }

    /// `ln |value|`, `-inf` for zero.
    pub fn log_abs(&self) -> T {
        let m = cabs(self.mantissa);
        if m == T::zero() {
            real(f64::NEG_INFINITY)
        } else {
            m.ln() + self.log_scale
        }
    }

    /// Value rescaled by `exp(-shift)`.
    pub fn to_complex_shifted(&self, shift: T) -> Complex<T> {
        if self.is_zero() {
            return self.mantissa;
        }
        self.mantissa * (self.log_scale - shift).exp()
    }

    pub fn to_complex(&self) -> Complex<T> {
        self.to_complex_shifted(T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_add_matches_plain_arithmetic() {
        let a = ScaledComplex::<f64>::exp(Complex::new(3.0, 0.4));
        let b = ScaledComplex::<f64>::exp(Complex::new(-1.0, 2.0));
        let s = a.add(b).to_complex();
        let want = Complex::new(3.0, 0.4).exp() + Complex::new(-1.0, 2.0).exp();
        assert!((s - want).norm() < 1e-13 * want.norm());
    }

    #[test]
    fn scaled_survives_huge_exponents() {
        let a = ScaledComplex::<f64>::exp(Complex::new(2000.0, 0.1));
        let b = ScaledComplex::<f64>::exp(Complex::new(1999.0, 0.1));
        let r = a.add(b).to_complex_shifted(2000.0);
        assert!((r.norm() - (1.0 + (-1.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn cpow_principal_branch() {
        let z = Complex::new(-1.0, 1e-300);
        let r = cpow(z, Complex::new(0.5, 0.0));
        assert!((r - Complex::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn f32_roundtrip() {
        let x: f32 = real(0.25);
        assert_eq!(to_f64(x), 0.25);
    }
}
