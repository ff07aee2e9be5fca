//! Special functions: shifted Legendre polynomials, spherical Bessel
//! functions of the first kind, and the gamma function.

use crate::scalar::{real, Real};

/// `P̃_m(τ) = P_m(2τ − 1)` for `m = 0..=n`.
pub fn shifted_legendre<T: Real>(n: usize, tau: T) -> Vec<T> {
    let x = real::<T>(2.0) * tau - T::one();
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::one());
    if n == 0 {
        return out;
    }
    out.push(x);
    for k in 1..n {
        let kf = real::<T>(k as f64);
        let next = ((kf + kf + T::one()) * x * out[k] - kf * out[k - 1]) / (kf + T::one());
        out.push(next);
    }
    out
}

/// `j_0(x) .. j_n(x)`.
///
/// Forward recurrence is stable once `|x| > n`; otherwise Miller's backward
/// recurrence normalised against whichever of `j_0`, `j_1` is larger.
pub fn spherical_bessel_j<T: Real>(n: usize, x: T) -> Vec<T> {
    let mut out = vec![T::zero(); n + 1];
    let ax = x.abs();
    if ax == T::zero() {
        out[0] = T::one();
        return out;
    }
    let (s, co) = (ax.sin(), ax.cos());
    let j0 = s / ax;
    if ax > real::<T>(n as f64) && ax >= T::one() {
        out[0] = j0;
        if n >= 1 {
            out[1] = s / (ax * ax) - co / ax;
        }
        for k in 1..n {
            let kf = real::<T>(k as f64);
            out[k + 1] = (kf + kf + T::one()) / ax * out[k] - out[k - 1];
        }
    } else {
        let nx = crate::scalar::to_f64(ax);
        let start = n + 20 + (40.0 * (n as f64 + nx)).sqrt() as usize;
        let big = real::<T>(1e15);
        let tiny = real::<T>(1e-15);
        let mut f_next = T::zero();
        let mut f = real::<T>(1e-30);
        for k in (1..=start).rev() {
            let kf = real::<T>(k as f64);
            let f_prev = (kf + kf + T::one()) / ax * f - f_next;
            f_next = f;
            f = f_prev;
            if k - 1 <= n {
                out[k - 1] = f;
            }
            if k <= n {
                out[k] = f_next;
            }
            if f.abs() > big {
                f *= tiny;
                f_next *= tiny;
                for v in out.iter_mut() {
                    *v *= tiny;
                }
            }
        }
        let j1 = if ax < real::<T>(1e-3) {
            // series avoids the cancellation in sin/x² − cos/x
            let x2 = ax * ax;
            ax / real::<T>(3.0) * (T::one() - x2 / real::<T>(10.0) + x2 * x2 / real::<T>(280.0))
        } else {
            s / (ax * ax) - co / ax
        };
        let norm = if n == 0 || j0.abs() >= j1.abs() { j0 / out[0] } else { j1 / out[1] };
        for v in out.iter_mut() {
            *v *= norm;
        }
    }
    if x < T::zero() {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (Lanczos, with reflection below ½).
pub fn gamma<T: Real>(x: T) -> T {
    let pi = T::pi();
    if x < real(0.5) {
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut a = real::<T>(LANCZOS[0]);
    let t = x + real::<T>(LANCZOS_G + 0.5);
    for (k, &coef) in LANCZOS.iter().enumerate().skip(1) {
        a += real::<T>(coef) / (x + real::<T>(k as f64));
    }
    (real::<T>(2.0) * pi).sqrt() * t.powf(x + real(0.5)) * (-t).exp() * a
}
