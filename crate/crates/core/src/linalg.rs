//! Dense least squares.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares<T: Real> {
    pub x: DVector<T>,
    /// Singular values above `rank_tol · σ_max`.
    pub rank: usize,
    /// `σ_max / σ_min` over all singular values.
    pub condition: T,
    pub singular_values: Vec<T>,
}

/// Minimum-norm solution of `min ‖Ax − b‖` by truncated SVD.
pub fn lstsq_svd<T: Real>(a: &DMatrix<T>, b: &DVector<T>, rank_tol: T) -> LeastSquares<T> {
    let cols = a.ncols();
    if a.nrows() == 0 || cols == 0 {
        return LeastSquares { x: DVector::zeros(cols), rank: 0, condition: T::zero(), singular_values: Vec::new() };
    }
    let svd = a.clone().svd(true, true);
    let sv: Vec<T> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(T::zero(), |m, s| m.max(s));
    let smin = sv.iter().copied().fold(smax, |m, s| m.min(s));
    // a rank-deficient square system still has min(rows, cols) values
    let smin = if sv.len() < cols { T::zero() } else { smin };
    let cut = rank_tol * smax;
    let rank = sv.iter().filter(|&&s| s > cut).count();
    let condition = if smin > T::zero() { smax / smin } else { T::one() / T::zero() };
    if smax == T::zero() {
        return LeastSquares { x: DVector::zeros(cols), rank: 0, condition, singular_values: sv };
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut x = DVector::<T>::zeros(cols);
    for (k, &s) in sv.iter().enumerate() {
        if s <= cut {
            continue;
        }
        let coef = u.column(k).dot(b) / s;
        x.axpy(coef, &v_t.row(k).transpose(), T::one());
    }
    LeastSquares { x, rank, condition, singular_values: sv }
}
