//! Spectral functions `ρ_i(λ)`, the side kernel and the exponential-solution
//! oracle.
//!
//! Convention: the kernel family `e^{iλz − iβ²z̄/λ}` solves `∂_z∂_z̄ q = β² q`,
//! i.e. `Δq = 4β²q`.

use num_complex::Complex;

use crate::boundary_data::{legendre_exp_moments, pair_exponential_with, project_function, BoundaryDatum};
use crate::error::{Error, Result};
use crate::geometry::Side;
use crate::scalar::{cabs, cexp, cis, real, Real, ScaledComplex};

/// Boundary values on one side: trace `q` and outward normal derivative `dq`.
#[derive(Debug, Clone, PartialEq)]
pub struct SideData<T: Real> {
    pub side: Side<T>,
    pub q: BoundaryDatum<T>,
    pub dq: BoundaryDatum<T>,
}

impl<T: Real> SideData<T> {
    pub fn zero(side: Side<T>) -> Self {
        Self { side, q: BoundaryDatum::zero(), dq: BoundaryDatum::zero() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { side: self.side, q: self.q.add(&other.q), dq: self.dq.add(&other.dq) }
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self { side: self.side, q: self.q.scale(k), dq: self.dq.scale(k) }
    }
}

fn i<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Kernel `e^{−iλψ(τ) + iβ²ψ̄(τ)/λ}` written as `e^{E + μτ}` about `origin`,
/// i.e. with `ψ` replaced by `ψ − origin`. Returns `(E, μ)`.
pub fn kernel_exponent<T: Real>(side: &Side<T>, lambda: Complex<T>, beta: T, origin: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
    if lambda.re == T::zero() && lambda.im == T::zero() {
        return Err(Error::ZeroLambda);
    }
    let b2 = beta * beta;
    let z0 = side.start - origin;
    let offset = -i::<T>() * lambda * z0 + i::<T>() * z0.conj() * b2 / lambda;
    let (dz, dzbar) = side.pullback_form_factors();
    let slope = -i::<T>() * lambda * dz + i::<T>() * dzbar * b2 / lambda;
    Ok((offset, slope))
}

pub fn kernel<T: Real>(side: &Side<T>, lambda: Complex<T>, beta: T, tau: T) -> Result<Complex<T>> {
    let (e, mu) = kernel_exponent(side, lambda, beta, Complex::new(T::zero(), T::zero()))?;
    Ok(cexp(e + mu * tau))
}

/// `λe^{iα} + β²/(λe^{iα})`
fn trace_coefficient<T: Real>(side: &Side<T>, lambda: Complex<T>, beta: T) -> Complex<T> {
    let le = lambda * side.direction();
    le + Complex::new(beta * beta, T::zero()) / le
}

fn assemble<T: Real>(data: &SideData<T>, lambda: Complex<T>, beta: T, offset: Complex<T>, slope: Complex<T>) -> Result<ScaledComplex<T>> {
    let count = data.q.modes().max(data.dq.modes());
    let (moments, shift) = legendre_exp_moments(slope, count)?;
    let pq = pair_exponential_with(&data.q, offset, slope, &moments, shift);
    let pdq = pair_exponential_with(&data.dq, offset, slope, &moments, shift);
    let c = trace_coefficient(&data.side, lambda, beta);
    Ok(pdq.add(pq.scale(c)).scale(i::<T>() * data.side.length))
}

/// `ρ_i(λ) · e^{iλz₀ − iβ²z̄₀/λ}` in scaled form.
pub fn rho_about<T: Real>(data: &SideData<T>, lambda: Complex<T>, beta: T, origin: Complex<T>) -> Result<ScaledComplex<T>> {
    let (offset, slope) = kernel_exponent(&data.side, lambda, beta, origin)?;
    assemble(data, lambda, beta, offset, slope)
}

/// `ρ_i(λ) = i|Γ_i| [⟨∂ₙq_i, K⟩ + (λe^{iα_i} + β²/(λe^{iα_i})) ⟨q_i, K⟩]`.
pub fn rho_scaled<T: Real>(data: &SideData<T>, lambda: Complex<T>, beta: T) -> Result<ScaledComplex<T>> {
    rho_about(data, lambda, beta, Complex::new(T::zero(), T::zero()))
}

pub fn rho<T: Real>(data: &SideData<T>, lambda: Complex<T>, beta: T) -> Result<Complex<T>> {
    Ok(rho_scaled(data, lambda, beta)?.to_complex())
}

/// `λ = e^{−iα_i} β e^s` on the side's own ray `ℓ_i`.
pub fn own_ray_lambda<T: Real>(side: &Side<T>, beta: T, s: T) -> Complex<T> {
    cis(-side.alpha) * (beta * s.exp())
}

/// `ρ_i(λ) e^{iλz₀ − iβ²z̄₀/λ}` for `λ` on `ℓ_i`, where the slope is exactly
/// imaginary and the closed-form moments always apply.
pub fn rho_on_own_ray<T: Real>(data: &SideData<T>, beta: T, s: T, origin: Complex<T>) -> ScaledComplex<T> {
    let side = &data.side;
    let r = beta * s.exp();
    let lambda = cis(-side.alpha) * r;
    let b2 = beta * beta;
    let z0 = side.start - origin;
    let offset = -i::<T>() * lambda * z0 + i::<T>() * z0.conj() * b2 / lambda;
    let slope = Complex::new(T::zero(), -side.length * (r - b2 / r));
    let count = data.q.modes().max(data.dq.modes());
    let (moments, shift) = legendre_exp_moments(slope, count).expect("imaginary slope uses the closed form");
    let pq = pair_exponential_with(&data.q, offset, slope, &moments, shift);
    let pdq = pair_exponential_with(&data.dq, offset, slope, &moments, shift);
    let c = Complex::new(r + b2 / r, T::zero());
    pdq.add(pq.scale(c)).scale(i::<T>() * side.length)
}

/// `(1 + |λ| + β²/|λ|)^N · max_{Γ} |kernel|`.
pub fn rho_envelope<T: Real>(side: &Side<T>, lambda: Complex<T>, beta: T, order: usize) -> Result<T> {
    Ok(log_rho_envelope(side, lambda, beta, order)?.exp())
}

/// Natural log of [`rho_envelope`].
pub fn log_rho_envelope<T: Real>(side: &Side<T>, lambda: Complex<T>, beta: T, order: usize) -> Result<T> {
    let (e, mu) = kernel_exponent(side, lambda, beta, Complex::new(T::zero(), T::zero()))?;
    let r = cabs(lambda);
    let w = r + beta * beta / r;
    Ok(real::<T>(order as f64) * (T::one() + w).ln() + e.re + mu.re.max(T::zero()))
}

/// `q = e^{iμz − iβ²z̄/μ}`, an exact solution for every `μ ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialSolution<T: Real> {
    pub mu: Complex<T>,
    pub beta: T,
}

impl<T: Real> ExponentialSolution<T> {
    pub fn new(mu: Complex<T>, beta: T) -> Result<Self> {
        if mu.re == T::zero() && mu.im == T::zero() {
            return Err(Error::ZeroMu);
        }
        Ok(Self { mu, beta })
    }

    pub fn value(&self, z: Complex<T>) -> Complex<T> {
        let b2 = Complex::new(self.beta * self.beta, T::zero());
        cexp(i::<T>() * self.mu * z - i::<T>() * b2 * z.conj() / self.mu)
    }

    /// Derivative along the unit direction `nu`.
    pub fn directional(&self, z: Complex<T>, nu: Complex<T>) -> Complex<T> {
        let b2 = Complex::new(self.beta * self.beta, T::zero());
        (i::<T>() * self.mu * nu - i::<T>() * b2 * nu.conj() / self.mu) * self.value(z)
    }
}

/// Traces of the exponential solution on `side`, projected onto `modes`
/// Legendre coefficients.
pub fn exact_solution_traces<T: Real>(mu: Complex<T>, side: &Side<T>, beta: T, modes: usize) -> Result<SideData<T>> {
    let sol = ExponentialSolution::new(mu, beta)?;
    let degree = modes.max(1) - 1;
    let nu = side.outward_normal();
    let q = project_function(|t| sol.value(side.point(t)), degree);
    let dq = project_function(|t| sol.directional(side.point(t), nu), degree);
    Ok(SideData { side: *side, q: BoundaryDatum { smooth: q, masses: Vec::new() }, dq: BoundaryDatum { smooth: dq, masses: Vec::new() } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::Endpoint;
    use crate::geometry::Polygon;
    use crate::quadrature::gauss_on;

    type C = Complex<f64>;

    fn side(a: (f64, f64), b: (f64, f64)) -> Side<f64> {
        Side::new(C::new(a.0, a.1), C::new(b.0, b.1))
    }

    #[test]
    fn kernel_examples() {
        let s = side((0.0, 0.0), (1.0, 0.0));
        assert!((kernel(&s, C::new(2.0, 1.0), 1.0, 0.0).unwrap() - 1.0).norm() < 1e-15);
        for t in [0.0, 0.3, 1.0] {
            assert!((kernel(&s, C::new(1.7, 0.0), 1.7, t).unwrap() - 1.0).norm() < 1e-14);
        }
        let v = side((0.0, 0.0), (0.0, 1.0));
        let k = kernel(&v, C::new(2.0, 0.0), 1.0, 1.0).unwrap();
        assert!((k - 2.5f64.exp()).norm() < 1e-13 * 2.5f64.exp());
        assert_eq!(kernel(&v, C::new(0.0, 0.0), 1.0, 0.5), Err(Error::ZeroLambda));
    }

    fn oracle_rho(data: &SideData<f64>, lambda: C, beta: f64) -> C {
        // 256-node brute force on the Legendre series
        let s = &data.side;
        let mut pq = C::new(0.0, 0.0);
        let mut pdq = C::new(0.0, 0.0);
        for (t, w) in gauss_on(256, 0.0, 1.0) {
            let z = s.point(t);
            let k = (C::new(0.0, -1.0) * lambda * z + C::new(0.0, 1.0) * beta * beta * z.conj() / lambda).exp();
            pq += data.q.smooth.eval(t) * k * w;
            pdq += data.dq.smooth.eval(t) * k * w;
        }
        let e = lambda * C::new(s.alpha.cos(), s.alpha.sin());
        C::new(0.0, s.length) * (pdq + (e + beta * beta / e) * pq)
    }

    #[test]
    fn rho_matches_brute_force_on_square() {
        let sq = Polygon::<f64>::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let beta = 1.0;
        for s in sq.sides() {
            let data = exact_solution_traces(C::new(1.7, 0.3), s, beta, 20).unwrap();
            for j in sq.sides() {
                for sv in [-3.0, -1.0, 0.0, 0.5, 2.0, 3.5] {
                    let lam = own_ray_lambda(j, beta, sv);
                    let got = rho(&data, lam, beta).unwrap();
                    let want = oracle_rho(&data, lam, beta);
                    assert!((got - want).norm() <= 1e-11 * want.norm(), "{got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn rho_own_ray_fast_path_agrees() {
        let s = side((0.2, -0.4), (1.1, 0.3));
        let data = exact_solution_traces(C::new(1.3, 0.0), &s, 0.8, 16).unwrap();
        let origin = C::new(0.4, 0.1);
        for sv in [-4.0, -1.2, 0.0, 2.2, 4.0] {
            let lam = own_ray_lambda(&s, 0.8, sv);
            let a = rho_on_own_ray(&data, 0.8, sv, origin).to_complex();
            let b = rho_about(&data, lam, 0.8, origin).unwrap().to_complex();
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
    }

    #[test]
    fn rho_zero_and_point_mass() {
        let s = side((0.0, 0.0), (1.0, 0.0));
        let zero = SideData::zero(s);
        assert_eq!(rho(&zero, C::new(1.3, -0.2), 1.0).unwrap(), C::new(0.0, 0.0));
        let data = SideData { side: s, q: BoundaryDatum::zero(), dq: BoundaryDatum::dirac(Endpoint::End, 0, C::new(1.0, 0.0)).unwrap() };
        for lam in [C::new(0.7, 0.0), C::new(-1.0, 2.0), C::new(3.0, -0.5)] {
            let beta = 1.3;
            let want = C::new(0.0, 1.0) * (C::new(0.0, -1.0) * lam + C::new(0.0, beta * beta) / lam).exp();
            assert!((rho(&data, lam, beta).unwrap() - want).norm() < 1e-14 * want.norm());
        }
    }

    #[test]
    fn rho_is_linear() {
        let s = side((0.3, 0.1), (1.0, 1.2));
        let a = exact_solution_traces(C::new(1.3, 0.0), &s, 1.0, 12).unwrap();
        let b = exact_solution_traces(C::new(0.4, 0.9), &s, 1.0, 12).unwrap();
        let (ka, kb) = (C::new(2.0, -1.0), C::new(-0.5, 0.25));
        let combo = a.scale(ka).add(&b.scale(kb));
        for lam in [C::new(0.5, 0.5), C::new(-3.0, 1.0), C::new(0.1, -2.0)] {
            let lhs = rho(&combo, lam, 1.0).unwrap();
            let rhs = ka * rho(&a, lam, 1.0).unwrap() + kb * rho(&b, lam, 1.0).unwrap();
            assert!((lhs - rhs).norm() <= 1e-13 * rhs.norm().max(1e-300));
        }
    }

    #[test]
    fn envelope_examples() {
        let s = side((0.0, 0.0), (1.0, 0.0));
        assert!(rho_envelope(&s, own_ray_lambda(&s, 1.0, 1.5), 1.0, 2).unwrap() >= 1.0);
        // unimodular kernel on the real axis for real λ
        assert!((rho_envelope(&s, C::new(1.0, 0.0), 1.0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((rho_envelope(&s, C::new(2.7, 0.0), 1.0, 0).unwrap() - 1.0).abs() < 1e-15);
        let low = side((0.0, -1.0), (1.0, -1.0));
        for t in [0.3_f64, 1.0, 4.0] {
            let w = t + 1.0 / t;
            let want = (1.0 + w).powi(3) * (-w).exp();
            let got = rho_envelope(&low, C::new(t, 0.0), 1.0, 3).unwrap();
            assert!((got - want).abs() < 1e-13 * want);
        }
    }

    #[test]
    fn rho_bounded_by_envelope() {
        let s = side((0.0, 0.0), (0.0, 2.0));
        let data = SideData {
            side: s,
            q: BoundaryDatum::from_coeffs(vec![C::new(1.0, 2.0), C::new(-0.5, 0.0)])
                .with_mass(Endpoint::Start, 2, C::new(0.3, 0.0))
                .unwrap(),
            dq: BoundaryDatum::from_coeffs(vec![C::new(0.0, 1.0)]).with_mass(Endpoint::End, 1, C::new(1.0, -1.0)).unwrap(),
        };
        let l = s.length;
        let norms = l * (data.q.growth_norm(l) + data.dq.growth_norm(l));
        for re in [-3.0, -0.4, 0.2, 2.5] {
            for im in [-2.0, 0.1, 1.5] {
                let lam = C::new(re, im);
                let v = rho(&data, lam, 0.9).unwrap().norm();
                let env = rho_envelope(&s, lam, 0.9, 3).unwrap();
                assert!(v <= env * norms, "{lam}: {v} > {}", env * norms);
            }
        }
    }

    #[test]
    fn own_ray_integrand_decays() {
        let sq = Polygon::<f64>::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let z = C::new(0.4, 0.3);
        for s in sq.sides() {
            let data = exact_solution_traces(C::new(1.3, 0.0), s, 1.0, 16).unwrap();
            for sign in [1.0, -1.0] {
                let mags: Vec<f64> = [2.0, 4.0, 8.0].iter().map(|&sv| rho_on_own_ray(&data, 1.0, sign * sv, z).log_abs()).collect();
                assert!(mags[0] > mags[1] && mags[1] > mags[2], "{mags:?}");
                assert!(mags[2] - mags[1] < 2.0 * (mags[1] - mags[0]));
            }
        }
    }

    #[test]
    fn point_mass_is_limit_of_mollifiers() {
        // f_ε(τ) = e^{-(1-τ)/ε}/(ε(1-e^{-1/ε})) concentrates at τ = 1
        let s = side((0.1, 0.0), (0.9, 0.6));
        let lam = C::new(1.4, -0.7);
        let beta = 1.1;
        let d = SideData { side: s, q: BoundaryDatum::zero(), dq: BoundaryDatum::dirac(Endpoint::End, 0, C::new(1.0, 0.0)).unwrap() };
        let exact = rho(&d, lam, beta).unwrap();
        let eps = 1e-7_f64;
        let mut acc = C::new(0.0, 0.0);
        let mut hi = 1.0;
        for _ in 0..60 {
            let lo = 1.0 - 2.0 * (1.0 - hi) - 1e-9;
            let lo = if lo < 0.0 { 0.0 } else { lo };
            for (t, w) in gauss_on::<f64>(20, lo, hi) {
                let f = (-(1.0 - t) / eps).exp() / eps;
                acc += f * kernel(&s, lam, beta, t).unwrap() * w;
            }
            if lo == 0.0 {
                break;
            }
            hi = lo;
        }
        let mollified = C::new(0.0, s.length) * acc;
        assert!((mollified - exact).norm() <= 1e-6 * exact.norm());
    }

    #[test]
    fn exact_solution_examples() {
        let beta = 0.7;
        let sol = ExponentialSolution::new(C::new(0.0, beta), beta).unwrap();
        let x = 0.37;
        assert!((sol.value(C::new(x, 0.0)) - (-2.0 * beta * x).exp()).norm() < 1e-15);
        let sol = ExponentialSolution::new(C::new(beta, 0.0), beta).unwrap();
        let z = C::new(0.2, 0.45);
        assert!((sol.value(z) - (-2.0 * beta * z.im).exp()).norm() < 1e-15);
        let dn = sol.directional(z, C::new(0.0, -1.0));
        assert!((dn - 2.0 * beta * sol.value(z)).norm() < 1e-15);
        assert_eq!(ExponentialSolution::new(C::new(0.0, 0.0), 1.0), Err(Error::ZeroMu));
    }

    #[test]
    fn exact_solution_satisfies_pde() {
        let h = 1e-4;
        let z = C::new(0.3, 0.4);
        for mu in [C::new(1.3, 0.0), C::new(1.7, 0.3), C::new(0.0, 2.0), C::new(-0.6, 0.8)] {
            let beta = 1.2;
            let sol = ExponentialSolution::new(mu, beta).unwrap();
            let f = |w: C| sol.value(w);
            let lap = (f(z + h) + f(z - h) + f(z + C::new(0.0, h)) + f(z - C::new(0.0, h)) - 4.0 * f(z)) / (h * h);
            let want = 4.0 * beta * beta * f(z);
            assert!((lap - want).norm() <= 1e-6 * want.norm());
        }
    }

    #[test]
    fn f32_rho_runs() {
        let s = Side::<f32>::new(Complex::new(0.0, 0.0), Complex::new(1.0, 0.0));
        let d = exact_solution_traces(Complex::new(1.3f32, 0.0), &s, 1.0, 8).unwrap();
        let v = rho(&d, Complex::new(0.0f32, -1.0), 1.0).unwrap();
        let w =
            rho(&exact_solution_traces(C::new(1.3, 0.0), &side((0.0, 0.0), (1.0, 0.0)), 1.0, 8).unwrap(), C::new(0.0, -1.0), 1.0).unwrap();
        assert!(((v.re as f64 - w.re).powi(2) + (v.im as f64 - w.im).powi(2)).sqrt() < 1e-4 * w.norm());
    }
}
