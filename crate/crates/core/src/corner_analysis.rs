//! Corner singularities: exponent ladders for the four boundary-condition
//! pairings, Watson's lemma and the large-`λ` balance of the two sides
//! meeting at a vertex.
//!
//! The vertex sits at `z = i`; side `ℓ` leaves it along polar angle `−θ_ℓ`
//! with `θ_i = π/2 + Δ/2`, `θ_{i−1} = π/2 − Δ/2`, so `Δ` is the interior angle.
//! `g_ℓ = ρ⁻¹ ∂q/∂θ` along side `ℓ`.

use num_complex::Complex;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_on;
use crate::scalar::{cexp, cpow, real, to_f64, Real};
use crate::special::gamma;

const GRADED_LEVELS: i32 = 40;
const PANEL_NODES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CornerCase {
    NeumannNeumannContinuous,
    DirichletDirichletContinuous,
    DirichletNeumannVanishing,
    DirichletDirichletDiscontinuous,
}

impl CornerCase {
    pub const ALL: [CornerCase; 4] = [
        CornerCase::NeumannNeumannContinuous,
        CornerCase::DirichletDirichletContinuous,
        CornerCase::DirichletNeumannVanishing,
        CornerCase::DirichletDirichletDiscontinuous,
    ];

    /// `d(M) Δ/π` as an exact rational, and the first admissible `M`.
    fn ladder_coefficient(self, m: u32) -> Rational64 {
        let m = Rational64::from_integer(m as i64);
        match self {
            CornerCase::DirichletNeumannVanishing => m * 2 + Rational64::new(1, 2),
            _ => m * 2,
        }
    }

    fn first_index(self) -> u32 {
        match self {
            CornerCase::DirichletDirichletContinuous => 1,
            _ => 0,
        }
    }

    pub fn coefficient_relation(self) -> &'static str {
        match self {
            CornerCase::NeumannNeumannContinuous => "D_{i-1} = D_i",
            CornerCase::DirichletDirichletContinuous => "N_{i-1} = N_i",
            CornerCase::DirichletNeumannVanishing => "N_{i-1} = D_i d_i",
            CornerCase::DirichletDirichletDiscontinuous => "D_i - D_{i-1} != 0 is unbalanced at every order",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerReport {
    pub case: CornerCase,
    /// Interior angle in radians.
    pub delta: f64,
    /// `(M, d(M))`.
    pub ladder: Vec<(u32, f64)>,
    pub coefficient_relation: String,
    pub smallest_positive: Option<f64>,
    pub singular: bool,
    /// Smallest positive exponent equals 1.
    pub marginal: bool,
    pub non_integrable: bool,
}

/// Exponent ladder for `Δ = (p/q)π`, in exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLadder {
    pub case: CornerCase,
    pub delta_over_pi: Rational64,
    pub ladder: Vec<(u32, Rational64)>,
    pub singular: bool,
    pub marginal: bool,
}

fn check_angle(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < std::f64::consts::PI) {
        return Err(Error::AngleOutOfRange(delta));
    }
    Ok(())
}

fn smallest_positive<V: PartialOrd + Copy + Default>(ladder: &[(u32, V)]) -> Option<V> {
    ladder.iter().map(|&(_, d)| d).find(|d| *d > V::default())
}

/// Exact ladder `d(M) = c(M) / (Δ/π)`.
pub fn classify_exact(case: CornerCase, delta_over_pi: Rational64, m_max: u32) -> Result<ExactLadder> {
    let zero = Rational64::from_integer(0);
    let one = Rational64::from_integer(1);
    if delta_over_pi <= zero || delta_over_pi >= one {
        return Err(Error::AngleOutOfRange(*delta_over_pi.numer() as f64 / *delta_over_pi.denom() as f64 * std::f64::consts::PI));
    }
    let ladder: Vec<(u32, Rational64)> =
        (case.first_index()..=m_max.max(case.first_index())).map(|m| (m, case.ladder_coefficient(m) / delta_over_pi)).collect();
    let first = smallest_positive(&ladder);
    let discontinuous = case == CornerCase::DirichletDirichletDiscontinuous;
    Ok(ExactLadder {
        case,
        delta_over_pi,
        singular: discontinuous || first.is_some_and(|d| d < one),
        marginal: !discontinuous && first == Some(one),
        ladder,
    })
}

/// Admissible exponents for the corner of interior angle `delta`.
pub fn classify(case: CornerCase, delta: f64, m_max: u32) -> Result<CornerReport> {
    check_angle(delta)?;
    let scale = std::f64::consts::PI / delta;
    let ladder: Vec<(u32, f64)> = (case.first_index()..=m_max.max(case.first_index()))
        .map(|m| {
            let c = case.ladder_coefficient(m);
            (m, *c.numer() as f64 / *c.denom() as f64 * scale)
        })
        .collect();
    let first = smallest_positive(&ladder);
    let discontinuous = case == CornerCase::DirichletDirichletDiscontinuous;
    let marginal = !discontinuous && first.is_some_and(|d| (d - 1.0).abs() <= 1e-12);
    Ok(CornerReport {
        case,
        delta,
        coefficient_relation: case.coefficient_relation().to_string(),
        smallest_positive: first,
        singular: discontinuous || first.is_some_and(|d| d < 1.0 && !marginal),
        marginal,
        non_integrable: discontinuous,
        ladder,
    })
}

/// `Γ(d+1) ν^{−1−d}`, the leading term of `∫₀¹ e^{−νρ} ρ^d dρ`.
pub fn watson_leading<T: Real>(d: T, nu: Complex<T>) -> Result<Complex<T>> {
    if !(d > -T::one()) || !(nu.re > T::zero()) {
        return Err(Error::DomainError(format!("need d > -1 and Re nu > 0, got d = {}, nu = {}", to_f64(d), to_f64(nu.re))));
    }
    let p = Complex::new(-T::one() - d, T::zero());
    Ok(cpow(nu, p) * gamma(d + T::one()))
}

/// `∫₀¹ e^{−kρ} ρ^p dρ` on a geometric mesh toward `ρ = 0`, the innermost
/// panel by its power series.
pub fn power_exp_integral<T: Real>(k: Complex<T>, p: T) -> Result<Complex<T>> {
    if !(p > -T::one()) {
        return Err(Error::DomainError(format!("rho^{} is not integrable at 0", to_f64(p))));
    }
    let half = real::<T>(0.5);
    let mut total = Complex::new(T::zero(), T::zero());
    let mut hi = T::one();
    for _ in 0..GRADED_LEVELS {
        let lo = hi * half;
        for (x, w) in gauss_on::<T>(PANEL_NODES, lo, hi) {
            total += cexp(-k * x) * (x.powf(p) * w);
        }
        hi = lo;
    }
    // ∫₀^a e^{−kρ} ρ^p dρ = Σ (−k)^n a^{p+n+1} / (n! (p+n+1))
    let a = hi;
    let mut term = Complex::new(a.powf(p + T::one()), T::zero());
    let mut sum = Complex::new(T::zero(), T::zero());
    for n in 0..60 {
        let nf = real::<T>(n as f64);
        let add = term / (p + nf + T::one());
        sum += add;
        if add.norm_sqr() <= (crate::scalar::epsilon::<T>() * crate::scalar::cabs(sum)).powi(2) {
            break;
        }
        term = term * (-k * a) / (nf + T::one());
    }
    Ok(total + sum)
}

/// `c ρ^e` for `q`, or `c ρ^{e−1}` for `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm<T: Real> {
    pub coeff: T,
    pub exponent: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideModel<T: Real> {
    /// `q = D ρ^d`.
    pub q: Option<PowerTerm<T>>,
    /// `g = N ρ^{n−1}`.
    pub g: Option<PowerTerm<T>>,
}

impl<T: Real> SideModel<T> {
    pub fn zero() -> Self {
        Self { q: None, g: None }
    }
}

/// Model data on the two unit sides at a corner of interior angle `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerModel<T: Real> {
    pub delta: T,
    /// Side `i−1`, at polar angle `−θ_{i−1}`.
    pub prev: SideModel<T>,
    /// Side `i`, at polar angle `−θ_i`.
    pub next: SideModel<T>,
}

impl<T: Real> CornerModel<T> {
    /// Leading-order data obeying the predicted exponent and coefficient
    /// relations for ladder index `m`.
    pub fn consistent(case: CornerCase, delta: T, m: u32, amplitude: T) -> Result<Self> {
        check_angle(to_f64(delta))?;
        let c = case.ladder_coefficient(m.max(case.first_index()));
        let d = real::<T>(*c.numer() as f64 / *c.denom() as f64) * T::pi() / delta;
        let term = |coeff| Some(PowerTerm { coeff, exponent: d });
        let (prev, next) = match case {
            CornerCase::NeumannNeumannContinuous => (SideModel { q: term(amplitude), g: None }, SideModel { q: term(amplitude), g: None }),
            CornerCase::DirichletDirichletContinuous => {
                (SideModel { q: None, g: term(amplitude) }, SideModel { q: None, g: term(amplitude) })
            }
            CornerCase::DirichletNeumannVanishing => {
                (SideModel { q: None, g: term(amplitude * d) }, SideModel { q: term(amplitude), g: None })
            }
            CornerCase::DirichletDirichletDiscontinuous => {
                let jump = |coeff| Some(PowerTerm { coeff, exponent: T::zero() });
                (SideModel { q: jump(T::zero()), g: None }, SideModel { q: jump(amplitude), g: None })
            }
        };
        Ok(Self { delta, prev, next })
    }

    pub fn theta_prev(&self) -> T {
        T::frac_pi_2() - self.delta * real::<T>(0.5)
    }

    pub fn theta_next(&self) -> T {
        T::frac_pi_2() + self.delta * real::<T>(0.5)
    }
}

/// `k(λ, −θ) = iλe^{−iθ} − iβ²e^{iθ}/λ`.
pub fn k_lambda_theta<T: Real>(lambda: T, beta: T, theta: T) -> Complex<T> {
    let iu = Complex::new(T::zero(), T::one());
    let e = crate::scalar::cis(-theta);
    iu * e * lambda - iu * e.conj() * (beta * beta / lambda)
}

/// `∫₀¹ e^{−ρk}[g + (λe^{−iθ} + β²/(λe^{−iθ})) q] dρ` for one side.
pub fn side_bracket<T: Real>(side: &SideModel<T>, theta: T, beta: T, lambda: T) -> Result<Complex<T>> {
    let k = k_lambda_theta(lambda, beta, theta);
    let le = crate::scalar::cis(-theta) * lambda;
    let c = le + Complex::new(beta * beta, T::zero()) / le;
    let mut total = Complex::new(T::zero(), T::zero());
    if let Some(g) = side.g {
        total += power_exp_integral(k, g.exponent - T::one())? * g.coeff;
    }
    if let Some(q) = side.q {
        total += c * power_exp_integral(k, q.exponent)? * q.coeff;
    }
    Ok(total)
}

/// The two single-side terms `i B_i`, `i B_{i−1}` of the corner contribution
/// (scaled by `e^{−(λ+β²/λ)}`).
pub fn corner_terms<T: Real>(model: &CornerModel<T>, beta: T, lambda: T) -> Result<(Complex<T>, Complex<T>)> {
    if !(lambda > T::zero()) {
        return Err(Error::DomainError("lambda must be real and positive".into()));
    }
    let iu = Complex::new(T::zero(), T::one());
    let next = side_bracket(&model.next, model.theta_next(), beta, lambda)?;
    let prev = side_bracket(&model.prev, model.theta_prev(), beta, lambda)?;
    Ok((iu * next, iu * prev))
}

/// `i(B_i − B_{i−1})`.
pub fn corner_balance_residual<T: Real>(model: &CornerModel<T>, beta: T, lambda: T) -> Result<Complex<T>> {
    let (a, b) = corner_terms(model, beta, lambda)?;
    Ok(a - b)
}

/// `|D(λ) − conj D(β²/λ)|` for the bracket difference `D = B_i − B_{i−1}`.
/// The full contribution `iD` maps to `−conj(iD)`.
pub fn lambda_inversion_check<T: Real>(model: &CornerModel<T>, beta: T, lambda: T) -> Result<T> {
    let iu = Complex::new(T::zero(), T::one());
    let a = corner_balance_residual(model, beta, lambda)? / iu;
    let b = corner_balance_residual(model, beta, beta * beta / lambda)? / iu;
    Ok(crate::scalar::cabs(a - b.conj()))
}
