//! Gauss–Legendre rules and the nested trapezoid sums used on rays.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::scalar::{real, Real};

/// Gauss–Legendre nodes and weights on [-1, 1], computed in `f64`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn compute_rule(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on the three-term recurrence.
        let theta = std::f64::consts::PI * (4.0 * i as f64 + 3.0) / (4.0 * nf + 2.0);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

/// Cached `n`-point rule.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(n).or_insert_with(|| Arc::new(compute_rule(n))).clone()
}

/// Nodes and weights mapped to [a, b] in the working scalar.
pub fn gauss_on<T: Real>(n: usize, a: T, b: T) -> Vec<(T, T)> {
    let rule = gauss_legendre(n);
    let half = (b - a) * real::<T>(0.5);
    let mid = (a + b) * real::<T>(0.5);
    rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| (mid + half * real::<T>(x), half * real::<T>(w))).collect()
}

/// Composite Gauss–Legendre over equal panels.
pub fn composite_gauss<T: Real>(a: T, b: T, panels: usize, n: usize) -> Vec<(T, T)> {
    let width = (b - a) / real::<T>(panels as f64);
    let mut out = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let lo = a + width * real::<T>(p as f64);
        out.extend(gauss_on(n, lo, lo + width));
    }
    out
}

/// Outcome of [`trapezoid_refine`].
#[derive(Debug, Clone, Copy)]
pub struct TrapezoidResult<T, V> {
    pub value: V,
    pub last_change: T,
    pub step: T,
    pub evaluations: usize,
    pub converged: bool,
}

/// Trapezoid sum over the grid `k*h` in `[lo, hi]`, halving `h` until two
/// consecutive sums agree to `tol` relative to the larger of the sum and
/// `floor`.
///
/// The grid is anchored at zero so refinements reuse every previous node.
/// Acceptance also requires `h <= h_accept`.
#[allow(clippy::too_many_arguments)]
pub fn trapezoid_refine<T, V, F, N>(
    f: F,
    norm: N,
    lo: T,
    hi: T,
    h0: T,
    h_accept: T,
    tol: T,
    floor: T,
    max_points: usize,
) -> TrapezoidResult<T, V>
where
    T: Real,
    V: Copy + std::ops::Add<Output = V> + std::ops::Sub<Output = V> + std::ops::Mul<T, Output = V>,
    F: Fn(T) -> V,
    N: Fn(V) -> T,
{
    let sum_grid = |h: T, stride: i64, offset: i64| -> (Option<V>, usize) {
        let k_lo = crate::scalar::to_f64((lo / h).ceil()) as i64;
        let k_hi = crate::scalar::to_f64((hi / h).floor()) as i64;
        let mut acc: Option<V> = None;
        let mut n = 0;
        let mut k = k_lo;
        let r = (k - offset).rem_euclid(stride);
        if r != 0 {
            k += stride - r;
        }
        while k <= k_hi {
            let v = f(real::<T>(k as f64) * h);
            acc = Some(match acc {
                Some(a) => a + v,
                None => v,
            });
            n += 1;
            k += stride;
        }
        (acc, n)
    };
    let mut h = h0;
    let (raw0, mut evals) = sum_grid(h, 1, 0);
    let mut raw = raw0.expect("trapezoid interval contains no grid point");
    let mut value = raw * h;
    let mut last_change = real::<T>(f64::INFINITY);
    let half = real::<T>(0.5);
    loop {
        let h_new = h * half;
        let span = crate::scalar::to_f64((hi - lo) / h_new);
        if evals as f64 + 0.5 * span > max_points as f64 {
            return TrapezoidResult { value, last_change, step: h, evaluations: evals, converged: false };
        }
        let (odd, n) = sum_grid(h_new, 2, 1);
        evals += n;
        if let Some(o) = odd {
            raw = raw + o;
        }
        let new_value = raw * h_new;
        last_change = norm(new_value - value);
        let scale = norm(new_value).max(floor);
        value = new_value;
        h = h_new;
        if h <= h_accept && last_change <= tol * scale {
            return TrapezoidResult { value, last_change, step: h, evaluations: evals, converged: true };
        }
    }
}
