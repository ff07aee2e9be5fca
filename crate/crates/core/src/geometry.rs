//! Convex polygons, side parametrisations and similarity gauges.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs, carg, cis, real, to_f64, Real};

/// Side `Γ_i` from `z_i` to `z_{i+1}`, parametrised by `ψ(τ) = τ z_{i+1} + (1−τ) z_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Side<T: Real> {
    pub start: Complex<T>,
    pub end: Complex<T>,
    /// `arg(z_{i+1} − z_i)` in (−π, π].
    pub alpha: T,
    pub length: T,
}

impl<T: Real> Side<T> {
    pub fn new(start: Complex<T>, end: Complex<T>) -> Self {
        let d = end - start;
        Self { start, end, alpha: carg(d), length: cabs(d) }
    }

    pub fn point(&self, tau: T) -> Complex<T> {
        self.end * tau + self.start * (T::one() - tau)
    }

    /// `e^{iα}`
    pub fn direction(&self) -> Complex<T> {
        cis(self.alpha)
    }

    /// `(e^{iα}|Γ|, e^{−iα}|Γ|)`: pullbacks of `dz` and `dz̄`.
    pub fn pullback_form_factors(&self) -> (Complex<T>, Complex<T>) {
        let e = self.direction();
        (e * self.length, e.conj() * self.length)
    }

    /// `ν = −i e^{iα}` (counterclockwise polygons).
    pub fn outward_normal(&self) -> Complex<T> {
        Complex::new(T::zero(), -T::one()) * self.direction()
    }

    /// Signed distance from the side's line, positive on the interior side.
    pub fn inner_distance(&self, z: Complex<T>) -> T {
        (self.direction().conj() * (z - self.start)).im
    }
}

pub fn pullback_form_factors<T: Real>(side: &Side<T>) -> (Complex<T>, Complex<T>) {
    side.pullback_form_factors()
}

pub fn outward_normal<T: Real>(side: &Side<T>) -> Complex<T> {
    side.outward_normal()
}

/// Strictly convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<T: Real> {
    vertices: Vec<Complex<T>>,
    sides: Vec<Side<T>>,
}

impl<T: Real> Polygon<T> {
    pub fn new(vertices: Vec<Complex<T>>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::TooFewVertices(n));
        }
        let sides: Vec<Side<T>> = (0..n).map(|i| Side::new(vertices[i], vertices[(i + 1) % n])).collect();
        let scale = sides.iter().fold(T::zero(), |m, s| m.max(s.length));
        for (i, s) in sides.iter().enumerate() {
            if s.length <= real::<T>(1e-14) * scale || s.length == T::zero() {
                return Err(Error::DegenerateSide(i));
            }
        }
        let mut area2 = T::zero();
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            area2 += a.re * b.im - a.im * b.re;
        }
        if area2 <= T::zero() {
            return Err(Error::ClockwiseOrder(to_f64(area2) * 0.5));
        }
        let tol = real::<T>(1e-12) * scale * scale;
        for i in 0..n {
            let e0 = vertices[(i + 1) % n] - vertices[i];
            let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            if e0.re * e1.im - e0.im * e1.re <= tol {
                return Err(Error::NonConvex((i + 1) % n));
            }
        }
        // total turning of a simple convex polygon is exactly 2π
        let turning = (0..n).fold(T::zero(), |acc, i| {
            let d = sides[(i + 1) % n].direction() * sides[i].direction().conj();
            acc + carg(d)
        });
        if (turning - T::two_pi()).abs() > real(1e-6) {
            return Err(Error::NonConvex(0));
        }
        Ok(Self { vertices, sides })
    }

    pub fn from_xy(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(points.iter().map(|&(x, y)| Complex::new(real(x), real(y))).collect())
    }

    pub fn vertices(&self) -> &[Complex<T>] {
        &self.vertices
    }

    pub fn sides(&self) -> &[Side<T>] {
        &self.sides
    }

    pub fn side(&self, i: usize) -> &Side<T> {
        &self.sides[i]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn centroid(&self) -> Complex<T> {
        let n = real::<T>(self.len() as f64);
        self.vertices.iter().fold(Complex::new(T::zero(), T::zero()), |a, &z| a + z) / n
    }

    pub fn diameter(&self) -> T {
        let mut d = T::zero();
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max(cabs(*a - *b));
            }
        }
        d
    }

    /// Distance to the boundary; negative outside.
    pub fn boundary_distance(&self, z: Complex<T>) -> T {
        self.sides.iter().map(|s| s.inner_distance(z)).fold(real(f64::INFINITY), |m: T, d| m.min(d))
    }

    pub fn contains_strictly(&self, z: Complex<T>) -> bool {
        self.boundary_distance(z) > T::zero()
    }

    /// Largest inscribed distance from the centroid (a cheap inradius bound).
    pub fn centroid_clearance(&self) -> T {
        self.boundary_distance(self.centroid())
    }

    pub fn map(&self, gauge: &SimilarityGauge<T>) -> Result<Self> {
        Self::new(self.vertices.iter().map(|&z| gauge.apply(z)).collect())
    }
}

pub fn build_polygon<T: Real>(vertices: Vec<Complex<T>>) -> Result<Polygon<T>> {
    Polygon::new(vertices)
}

/// `z ↦ e^{iθ}(z − t)/c`; the PDE parameter transforms as `β′ = cβ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityGauge<T: Real> {
    pub rotation: T,
    pub translation: Complex<T>,
    pub scale: T,
}

impl<T: Real> SimilarityGauge<T> {
    pub fn identity() -> Self {
        Self { rotation: T::zero(), translation: Complex::new(T::zero(), T::zero()), scale: T::one() }
    }

    pub fn apply(&self, z: Complex<T>) -> Complex<T> {
        cis(self.rotation) * (z - self.translation) / self.scale
    }

    pub fn apply_inverse(&self, w: Complex<T>) -> Complex<T> {
        cis(-self.rotation) * w * self.scale + self.translation
    }

    /// `w ↦ e^{−iθ} c w + t` written in the same form.
    pub fn inverse(&self) -> Self {
        let t = -(cis(self.rotation) * self.translation) / self.scale;
        Self { rotation: -self.rotation, translation: t, scale: T::one() / self.scale }
    }

    pub fn rescale_beta(&self, beta: T) -> T {
        self.scale * beta
    }

    /// Rotation applied to directions (normals, tangents).
    pub fn rotate(&self, v: Complex<T>) -> Complex<T> {
        cis(self.rotation) * v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeMode {
    /// `Γ_i ↦ (0,1)` with `z_i ↦ 1`, `z_{i+1} ↦ 0`, the polygon below the axis.
    SideOnUnitInterval,
    /// `z_i ↦ i`, all other vertices strictly below the real axis.
    VertexAtI,
}

/// Reposition `polygon` so side/vertex `i` sits in the reference position.
pub fn gauge_align<T: Real>(polygon: &Polygon<T>, i: usize, mode: GaugeMode, beta: T) -> Result<(SimilarityGauge<T>, Polygon<T>, T)> {
    let n = polygon.len();
    let gauge = match mode {
        GaugeMode::SideOnUnitInterval => {
            let s = polygon.side(i);
            SimilarityGauge { rotation: T::pi() - s.alpha, translation: s.end, scale: s.length }
        }
        GaugeMode::VertexAtI => {
            let v = polygon.vertices()[i];
            let before = polygon.vertices()[(i + n - 1) % n];
            let after = polygon.vertices()[(i + 1) % n];
            // bisector of the two edges leaving z_i, rotated to point down
            let u = (before - v) / cabs(before - v) + (after - v) / cabs(after - v);
            let rotation = -T::frac_pi_2() - carg(u);
            let rot = cis(rotation);
            let gap = polygon
                .vertices()
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &z)| -(rot * (z - v)).im)
                .fold(real(f64::INFINITY), |m: T, d| m.min(d));
            // after scaling by c the vertex sits at i and the rest have Im <= -1
            let c = gap / real::<T>(2.0);
            let translation = v - cis(-rotation) * Complex::new(T::zero(), c);
            SimilarityGauge { rotation, translation, scale: c }
        }
    };
    let image = polygon.map(&gauge).map_err(|e| Error::GeometryViolation(e.to_string()))?;
    let eps = real::<T>(1e-12);
    for (j, z) in image.vertices().iter().enumerate() {
        let free = match mode {
            GaugeMode::SideOnUnitInterval => j == i || j == (i + 1) % n,
            GaugeMode::VertexAtI => j == i,
        };
        if !free && z.im >= -eps {
            return Err(Error::GeometryViolation(format!("vertex {j} has Im = {:.3e}", to_f64(z.im))));
        }
    }
    let beta2 = gauge.rescale_beta(beta);
    Ok((gauge, image, beta2))
}
