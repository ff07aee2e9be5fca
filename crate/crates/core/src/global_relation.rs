//! Global relation `Σ ρ_i(λ) = 0`: residuals, the vertex null direction and
//! the collocation least-squares solver for the Dirichlet–Neumann map.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;

use crate::boundary_data::{legendre_exp_moments, pair_exponential_with, BoundaryDatum, Endpoint, SmoothDatum};
use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::scalar::{cis, real, to_f64, Real, ScaledComplex};
use crate::spectral::{kernel_exponent, rho_about, SideData};

/// Prescribed condition on one side.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition<T: Real> {
    /// `q` given.
    Dirichlet(BoundaryDatum<T>),
    /// `∂ₙq` given.
    Neumann(BoundaryDatum<T>),
    /// `∂ₙq + γ q` given.
    Robin { gamma: T, data: BoundaryDatum<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConditionSpec<T: Real> {
    pub sides: Vec<BoundaryCondition<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollocationConfig<T: Real> {
    /// Legendre coefficients per unknown side datum.
    pub modes_per_side: usize,
    pub points_per_ray: usize,
    /// Radii `β e^s`, `s ∈ [−S, S]`.
    pub ray_halfwidth: T,
    pub normalize_rows: bool,
    /// Relative singular-value cutoff.
    pub rank_tol: T,
    /// Threshold on the normalised residual at the validation points.
    pub validation_tol: T,
    /// Return the minimum-norm solution instead of `RankDeficient`.
    pub accept_rank_deficient: bool,
    /// Vertex Dirac charges as unknowns. Always refused: they are not
    /// identifiable from the global relation.
    pub vertex_delta_unknowns: bool,
}

impl<T: Real> Default for CollocationConfig<T> {
    fn default() -> Self {
        Self {
            modes_per_side: 16,
            points_per_ray: 24,
            ray_halfwidth: real(4.0),
            normalize_rows: true,
            rank_tol: real(1e-12),
            validation_tol: real(1e-6),
            accept_rank_deficient: false,
            vertex_delta_unknowns: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollocationPoint<T: Real> {
    pub lambda: Complex<T>,
    /// Side whose ray `ℓ_j` carries the point.
    pub ray: usize,
    pub s: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveDiagnostics {
    /// Max normalised residual `|Σρ_i| / max_i |ρ_i|` over the validation set.
    pub residual_max: f64,
    /// `‖Ax − b‖ / ‖b‖` of the least-squares system.
    pub lsq_residual: f64,
    /// `σ_max / σ_min`.
    pub condition: f64,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvedBoundary<T: Real> {
    pub sides: Vec<SideData<T>>,
    pub diagnostics: SolveDiagnostics,
}

fn check_sides<T: Real>(polygon: &Polygon<T>, got: usize) -> Result<()> {
    if got != polygon.len() {
        return Err(Error::SideCountMismatch { expected: polygon.len(), got });
    }
    Ok(())
}

/// `Σ ρ_i(λ) e^{iλz₀ − iβ²z̄₀/λ}` and the largest single-side log-magnitude.
pub fn residual_about<T: Real>(data: &[SideData<T>], beta: T, lambda: Complex<T>, origin: Complex<T>) -> Result<(ScaledComplex<T>, T)> {
    let mut sum = ScaledComplex::zero();
    let mut peak = real::<T>(f64::NEG_INFINITY);
    for d in data {
        let r = rho_about(d, lambda, beta, origin)?;
        peak = peak.max(r.log_abs());
        sum = sum.add(r);
    }
    Ok((sum, peak))
}

/// `Σ_i ρ_i(λ)`.
pub fn residual<T: Real>(polygon: &Polygon<T>, beta: T, data: &[SideData<T>], lambda: Complex<T>) -> Result<Complex<T>> {
    check_sides(polygon, data.len())?;
    Ok(residual_about(data, beta, lambda, Complex::new(T::zero(), T::zero()))?.0.to_complex())
}

/// `|Σ ρ_i| / max_i |ρ_i|` (zero when every `ρ_i` vanishes).
pub fn normalized_residual<T: Real>(polygon: &Polygon<T>, beta: T, data: &[SideData<T>], lambda: Complex<T>) -> Result<T> {
    check_sides(polygon, data.len())?;
    let (sum, peak) = residual_about(data, beta, lambda, polygon.centroid())?;
    if sum.is_zero() {
        return Ok(T::zero());
    }
    Ok((sum.log_abs() - peak).exp())
}

/// Charges `a δ_{τ=1}` on `∂ₙq_i` and `b δ_{τ=0}` on `∂ₙq_{i+1}` at the vertex
/// shared by sides `i` and `i+1`, with `|Γ_i| a = −|Γ_{i+1}| b`. Adding them
/// leaves every `ρ`-sum unchanged.
pub fn vertex_null_direction<T: Real>(polygon: &Polygon<T>, i: usize, amplitude: Complex<T>) -> Vec<SideData<T>> {
    let n = polygon.len();
    let j = (i + 1) % n;
    let b = -amplitude * polygon.side(i).length / polygon.side(j).length;
    let mut out: Vec<SideData<T>> = polygon.sides().iter().map(|s| SideData::zero(*s)).collect();
    out[i].dq = BoundaryDatum::dirac(Endpoint::End, 0, amplitude).expect("order 0");
    out[j].dq = BoundaryDatum::dirac(Endpoint::Start, 0, b).expect("order 0");
    out
}

fn ray_points<T: Real>(polygon: &Polygon<T>, beta: T, m: usize, s_max: T, midpoints: bool) -> Vec<CollocationPoint<T>> {
    let mut out: Vec<CollocationPoint<T>> = Vec::new();
    let step = (s_max + s_max) / real::<T>((m - 1) as f64);
    let count = if midpoints { m - 1 } else { m };
    for (j, side) in polygon.sides().iter().enumerate() {
        let dir = cis(-side.alpha);
        for k in 0..count {
            let mut s = -s_max + step * real::<T>(k as f64);
            if midpoints {
                s += step * real::<T>(0.5);
            }
            let lambda = dir * (beta * s.exp());
            let dup = out.iter().any(|p| {
                let d = p.lambda - lambda;
                d.re.hypot(d.im) <= real::<T>(1e-14) * (beta * s.exp())
            });
            if !dup {
                out.push(CollocationPoint { lambda, ray: j, s });
            }
        }
    }
    out
}

/// `M` points per ray `ℓ_j`, radii `β e^{s_k}` with `s_k` uniform in `[−S, S]`.
pub fn collocation_set<T: Real>(polygon: &Polygon<T>, beta: T, config: &CollocationConfig<T>) -> Vec<CollocationPoint<T>> {
    ray_points(polygon, beta, config.points_per_ray, config.ray_halfwidth, false)
}

/// Midpoints of the collocation set on the same rays.
pub fn validation_set<T: Real>(polygon: &Polygon<T>, beta: T, config: &CollocationConfig<T>) -> Vec<CollocationPoint<T>> {
    ray_points(polygon, beta, config.points_per_ray, config.ray_halfwidth, true)
}

fn validate_config<T: Real>(polygon: &Polygon<T>, config: &CollocationConfig<T>) -> Result<()> {
    if config.vertex_delta_unknowns {
        return Err(Error::InvalidConfig(
            "vertex Dirac charges cannot be unknowns: adjacent charges with |Γ_i|a = -|Γ_i+1|b leave every spectral \
             sum unchanged, so the global relation does not determine them; supply them as known data"
                .into(),
        ));
    }
    if config.modes_per_side < 1 || config.points_per_ray < 2 || config.ray_halfwidth <= T::zero() {
        return Err(Error::InvalidConfig("need modes >= 1, points per ray >= 2, ray half-width > 0".into()));
    }
    let rows = 2 * polygon.len() * config.points_per_ray;
    let cols = 2 * polygon.len() * config.modes_per_side;
    if rows < cols {
        return Err(Error::InvalidConfig(format!("{rows} rows cannot determine {cols} unknowns")));
    }
    Ok(())
}

/// One complex row: unknown coefficients per side and the right-hand side.
fn assemble_row<T: Real>(
    polygon: &Polygon<T>,
    beta: T,
    bc: &BoundaryConditionSpec<T>,
    n_modes: usize,
    lambda: Complex<T>,
    normalize: bool,
) -> Result<(Vec<Complex<T>>, Complex<T>)> {
    let origin = polygon.centroid();
    let iu = Complex::new(T::zero(), T::one());
    let mut entries: Vec<ScaledComplex<T>> = Vec::with_capacity(polygon.len() * n_modes);
    let mut rhs = ScaledComplex::zero();
    for (side, cond) in polygon.sides().iter().zip(&bc.sides) {
        let (offset, slope) = kernel_exponent(side, lambda, beta, origin)?;
        let given = match cond {
            BoundaryCondition::Dirichlet(g) | BoundaryCondition::Neumann(g) => g,
            BoundaryCondition::Robin { data, .. } => data,
        };
        let (moments, shift) = legendre_exp_moments(slope, n_modes.max(given.modes()))?;
        let le = lambda * side.direction();
        let c_lambda = le + Complex::new(beta * beta, T::zero()) / le;
        let pref = iu * side.length;
        let known = pair_exponential_with(given, offset, slope, &moments, shift);
        let (unknown_factor, known_factor) = match cond {
            BoundaryCondition::Dirichlet(_) => (pref, pref * c_lambda),
            BoundaryCondition::Neumann(_) => (pref * c_lambda, pref),
            BoundaryCondition::Robin { gamma, .. } => (pref * (c_lambda - Complex::new(*gamma, T::zero())), pref),
        };
        rhs = rhs.add(known.scale(-known_factor));
        let base = ScaledComplex::exp(offset + Complex::new(shift, T::zero()));
        for mm in moments.iter().take(n_modes) {
            entries.push(base.scale(unknown_factor * mm));
        }
    }
    let shift = if normalize {
        entries.iter().chain(std::iter::once(&rhs)).fold(real::<T>(f64::NEG_INFINITY), |m, e| m.max(e.log_abs()))
    } else {
        T::zero()
    };
    let shift = if shift.is_finite() { shift } else { T::zero() };
    Ok((entries.iter().map(|e| e.to_complex_shifted(shift)).collect(), rhs.to_complex_shifted(shift)))
}

fn reconstruct<T: Real>(polygon: &Polygon<T>, bc: &BoundaryConditionSpec<T>, n_modes: usize, x: &DVector<T>) -> Vec<SideData<T>> {
    polygon
        .sides()
        .iter()
        .zip(&bc.sides)
        .enumerate()
        .map(|(j, (side, cond))| {
            let coeffs: Vec<Complex<T>> =
                (0..n_modes).map(|m| Complex::new(x[2 * (j * n_modes + m)], x[2 * (j * n_modes + m) + 1])).collect();
            let unknown = BoundaryDatum { smooth: SmoothDatum::new(coeffs), masses: Vec::new() };
            match cond {
                BoundaryCondition::Dirichlet(g) => SideData { side: *side, q: g.clone(), dq: unknown },
                BoundaryCondition::Neumann(h) => SideData { side: *side, q: unknown, dq: h.clone() },
                BoundaryCondition::Robin { gamma, data } => {
                    let dq = data.add(&unknown.scale(Complex::new(-*gamma, T::zero())));
                    SideData { side: *side, q: unknown, dq }
                }
            }
        })
        .collect()
}

/// Least-squares solve that always returns the recovered data; rank and
/// residual problems are only recorded in the diagnostics.
pub fn solve_dn_map_unchecked<T: Real>(
    polygon: &Polygon<T>,
    beta: T,
    bc: &BoundaryConditionSpec<T>,
    config: &CollocationConfig<T>,
) -> Result<SolvedBoundary<T>> {
    check_sides(polygon, bc.sides.len())?;
    validate_config(polygon, config)?;
    for cond in &bc.sides {
        if let BoundaryCondition::Robin { gamma, .. } = cond {
            if !gamma.is_finite() {
                return Err(Error::InvalidConfig("Robin gamma must be finite".into()));
            }
        }
    }
    let n_modes = config.modes_per_side;
    let points = collocation_set(polygon, beta, config);
    let rows: Vec<(Vec<Complex<T>>, Complex<T>)> =
        points.par_iter().map(|p| assemble_row(polygon, beta, bc, n_modes, p.lambda, config.normalize_rows)).collect::<Result<_>>()?;
    let ucols = polygon.len() * n_modes;
    let (nr, nc) = (2 * rows.len(), 2 * ucols);
    let mut a = DMatrix::<T>::zeros(nr, nc);
    let mut b = DVector::<T>::zeros(nr);
    for (k, (entries, rhs)) in rows.iter().enumerate() {
        for (col, e) in entries.iter().enumerate() {
            a[(2 * k, 2 * col)] = e.re;
            a[(2 * k, 2 * col + 1)] = -e.im;
            a[(2 * k + 1, 2 * col)] = e.im;
            a[(2 * k + 1, 2 * col + 1)] = e.re;
        }
        b[2 * k] = rhs.re;
        b[2 * k + 1] = rhs.im;
    }
    let lsq = crate::linalg::lstsq_svd(&a, &b, config.rank_tol);
    let sides = reconstruct(polygon, bc, n_modes, &lsq.x);
    let b_norm = b.norm();
    let lsq_residual = if b_norm > T::zero() { to_f64((&a * &lsq.x - &b).norm() / b_norm) } else { 0.0 };
    let mut residual_max = 0.0_f64;
    for p in validation_set(polygon, beta, config) {
        residual_max = residual_max.max(to_f64(normalized_residual(polygon, beta, &sides, p.lambda)?));
    }
    Ok(SolvedBoundary {
        sides,
        diagnostics: SolveDiagnostics { residual_max, lsq_residual, condition: to_f64(lsq.condition), rows: nr, cols: nc, rank: lsq.rank },
    })
}

/// Recover the unknown boundary values from the global relation.
pub fn solve_dn_map<T: Real>(
    polygon: &Polygon<T>,
    beta: T,
    bc: &BoundaryConditionSpec<T>,
    config: &CollocationConfig<T>,
) -> Result<SolvedBoundary<T>> {
    let solved = solve_dn_map_unchecked(polygon, beta, bc, config)?;
    check_solution(&solved, config)?;
    Ok(solved)
}

/// The checks `solve_dn_map` applies to an unchecked solve.
pub fn check_solution<T: Real>(solved: &SolvedBoundary<T>, config: &CollocationConfig<T>) -> Result<()> {
    let d = &solved.diagnostics;
    if d.rank < d.cols && !config.accept_rank_deficient {
        return Err(Error::RankDeficient { rank: d.rank, cols: d.cols, condition: d.condition });
    }
    let threshold = to_f64(config.validation_tol);
    if !(d.residual_max <= threshold) {
        return Err(Error::NonConvergence { residual: d.residual_max, threshold });
    }
    Ok(())
}
