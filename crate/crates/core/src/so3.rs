//! Quaternion and rotation algebra.
//!
//! Orientations are unit quaternions acting on vectors by the sandwich
//! product `q · (0|v) · q⁻¹`, so `R(exp(αu))` matches the Rodrigues
//! expansion `I + sin α [u]× + (1 − cos α) [u]×²`. The axis-angle tangent
//! vector `v = α·u` maps to the quaternion `(cos(α/2), u sin(α/2))`.
//!
//! Everything is written against a generic scalar so the numerics can be
//! rebound to a wider type; the default binding is `f64`.

use nalgebra::{Matrix3, RealField, Vector3};
use simba::scalar::SupersetOf;

use crate::error::{Error, Result};

/// Scalar type the library computes with. `f64` is the default binding;
/// any `RealField` that can absorb `f64` constants works.
pub trait Real: RealField + Copy + SupersetOf<f64> {}
impl<T> Real for T where T: RealField + Copy + SupersetOf<f64> {}

/// Shorthand for lifting an `f64` constant into the working scalar.
#[inline]
pub(crate) fn real<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Unit-norm tolerance guaranteed after `normalized()`.
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// Largest norm deviation `log` accepts before rejecting the input.
pub const LOG_UNIT_TOL: f64 = 1e-9;
/// Rotation angle below which exp/log switch to their series expansion.
pub const SMALL_ANGLE: f64 = 1e-8;
/// `1 + a·b` below this value counts as antiparallel in `rotation_between`.
const ANTIPARALLEL_TOL: f64 = 1e-12;

/// Unit quaternion `w + xi + yj + zk` representing an orientation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

/// Axis-angle (rotation) vector `v = α·u` with `α` in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisAngle<T> {
    pub v: Vector3<T>,
}

/// Validated rotation matrix.
#[derive(Clone, Copy, Debug)]
pub struct Rotation3<T> {
    m: Matrix3<T>,
}

impl<T: Real> Quaternion<T> {
    pub fn new(w: T, x: T, y: T, z: T) -> Self {
        Self { w, x, y, z }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    pub fn from_parts(w: T, v: &Vector3<T>) -> Self {
        Self::new(w, v.x, v.y, v.z)
    }

    /// Imaginary part as a vector.
    pub fn vector(&self) -> Vector3<T> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn norm_squared(&self) -> T {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    /// Rescales to unit norm. The input must be nonzero.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Multiplicative inverse; equals the conjugate for unit quaternions.
    pub fn inverse(&self) -> Self {
        let n2 = self.norm_squared();
        let c = self.conjugate();
        Self::new(c.w / n2, c.x / n2, c.y / n2, c.z / n2)
    }

    /// Representative of the double cover with `w ≥ 0`. A zero real part is
    /// disambiguated by the sign of the first nonzero imaginary component.
    pub fn canonical(&self) -> Self {
        let flip = if self.w != T::zero() {
            self.w < T::zero()
        } else if self.x != T::zero() {
            self.x < T::zero()
        } else if self.y != T::zero() {
            self.y < T::zero()
        } else {
            self.z < T::zero()
        };
        if flip {
            Self::new(-self.w, -self.x, -self.y, -self.z)
        } else {
            *self
        }
    }

    /// 4-dimensional dot product; equals `Re(self · other⁻¹)` for unit inputs.
    pub fn dot(&self, other: &Self) -> T {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> T {
        let vn = self.vector().norm();
        real::<T>(2.0) * vn.atan2(self.w.abs())
    }

    /// Applies the rotation to a vector: `R(q)·v`.
    pub fn rotate(&self, v: &Vector3<T>) -> Vector3<T> {
        let im = self.vector();
        let t = im.cross(v) * real::<T>(2.0);
        v + t * self.w + im.cross(&t)
    }

    /// Rotation matrix `R(q)` such that `rotate(v) = R(q)·v`.
    pub fn to_matrix(&self) -> Matrix3<T> {
        let two = real::<T>(2.0);
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Matrix3::new(
            T::one() - two * (y * y + z * z),
            two * (x * y - w * z),
            two * (x * z + w * y),
            two * (x * y + w * z),
            T::one() - two * (x * x + z * z),
            two * (y * z - w * x),
            two * (x * z - w * y),
            two * (y * z + w * x),
            T::one() - two * (x * x + y * y),
        )
    }

    pub fn to_rotation(&self) -> Rotation3<T> {
        Rotation3 { m: self.to_matrix() }
    }

    /// Extracts the quaternion of a rotation matrix (Shepperd's method),
    /// returned in canonical (`w ≥ 0`) form.
    pub fn from_matrix(m: &Matrix3<T>) -> Self {
        let quarter = real::<T>(0.25);
        let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
        let q = if tr > T::zero() {
            let s = (tr + T::one()).sqrt() * real::<T>(2.0);
            Self::new(
                quarter * s,
                (m[(2, 1)] - m[(1, 2)]) / s,
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(1, 0)] - m[(0, 1)]) / s,
            )
        } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
            let s = (T::one() + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * real::<T>(2.0);
            Self::new(
                (m[(2, 1)] - m[(1, 2)]) / s,
                quarter * s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
            )
        } else if m[(1, 1)] > m[(2, 2)] {
            let s = (T::one() + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * real::<T>(2.0);
            Self::new(
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                quarter * s,
                (m[(1, 2)] + m[(2, 1)]) / s,
            )
        } else {
            let s = (T::one() + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * real::<T>(2.0);
            Self::new(
                (m[(1, 0)] - m[(0, 1)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
                (m[(1, 2)] + m[(2, 1)]) / s,
                quarter * s,
            )
        };
        q.normalized().canonical()
    }

    /// Logarithmic map to the canonical axis-angle vector (`‖v‖ ≤ π`).
    ///
    /// The sign ambiguity of the double cover is resolved by flipping to
    /// `w ≥ 0` first, which makes the result single-valued.
    pub fn log(&self) -> Result<AxisAngle<T>> {
        let n = self.norm();
        let dev = (n - T::one()).abs();
        if dev > real::<T>(LOG_UNIT_TOL) {
            return Err(Error::InvalidQuaternion {
                norm: to_f64(n),
            });
        }
        let q = self.normalized().canonical();
        let im = q.vector();
        let vn = im.norm();
        // vn = sin(α/2); the series kicks in for α below SMALL_ANGLE.
        let factor = if vn < real::<T>(SMALL_ANGLE * 0.5) {
            let two = real::<T>(2.0);
            two / q.w - two * vn * vn / (real::<T>(3.0) * q.w * q.w * q.w)
        } else {
            let alpha = real::<T>(2.0) * vn.atan2(q.w);
            alpha / vn
        };
        Ok(AxisAngle::new(im * factor))
    }
}

impl<T: Real> std::ops::Mul for Quaternion<T> {
    type Output = Quaternion<T>;

    /// Hamilton product (`i·j = k`).
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        )
    }
}

impl<T: Real> std::ops::Neg for Quaternion<T> {
    type Output = Quaternion<T>;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl<T: Real> AxisAngle<T> {
    pub fn new(v: Vector3<T>) -> Self {
        Self { v }
    }

    pub fn zero() -> Self {
        Self::new(Vector3::zeros())
    }

    /// Rotation angle `‖v‖`.
    pub fn angle(&self) -> T {
        self.v.norm()
    }

    /// Wraps the angle into `[0, π]`, flipping the axis when the wrapped
    /// angle comes out negative.
    pub fn canonical(&self) -> Self {
        let angle = self.angle();
        if angle <= T::pi() {
            return *self;
        }
        let two_pi = T::two_pi();
        let mut wrapped = angle - (angle / two_pi).floor() * two_pi;
        if wrapped > T::pi() {
            wrapped -= two_pi;
        }
        Self::new(self.v * (wrapped / angle))
    }

    /// Exponential map to a unit quaternion.
    pub fn exp(&self) -> Quaternion<T> {
        let angle = self.angle();
        let (w, s) = if angle < real::<T>(SMALL_ANGLE) {
            // 2nd-order series of cos(α/2) and sin(α/2)/α.
            let a2 = angle * angle;
            (
                T::one() - a2 * real::<T>(0.125),
                real::<T>(0.5) - a2 / real::<T>(48.0),
            )
        } else {
            // cos(α/2) through the complementary angle so the canonical
            // half-turn boundary maps to an exactly pure quaternion.
            let w = ((T::pi() - angle) * real::<T>(0.5)).sin();
            let half = angle * real::<T>(0.5);
            (w, half.sin() / angle)
        };
        Quaternion::from_parts(w, &(self.v * s))
    }
}

impl<T: Real> Rotation3<T> {
    /// Wraps a matrix after checking orthonormality and unit determinant.
    pub fn from_matrix(m: Matrix3<T>) -> Result<Self> {
        let r = Self { m };
        if !r.is_special_orthogonal(real::<T>(1e-10)) {
            return Err(Error::DegenerateMeasurement("matrix is not a rotation"));
        }
        Ok(r)
    }

    pub fn matrix(&self) -> &Matrix3<T> {
        &self.m
    }

    pub fn apply(&self, v: &Vector3<T>) -> Vector3<T> {
        self.m * v
    }

    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose() }
    }

    pub fn determinant(&self) -> T {
        self.m.determinant()
    }

    pub fn is_special_orthogonal(&self, tol: T) -> bool {
        let gram = self.m.transpose() * self.m;
        let dev = (gram - Matrix3::identity()).norm();
        dev <= tol && (self.m.determinant() - T::one()).abs() <= tol
    }
}

impl<T: Real> From<&Quaternion<T>> for Rotation3<T> {
    fn from(q: &Quaternion<T>) -> Self {
        q.to_rotation()
    }
}

/// Skew-symmetric matrix `[w]×` with `[w]× · v = w × v`.
pub fn skew<T: Real>(w: &Vector3<T>) -> Matrix3<T> {
    Matrix3::new(
        T::zero(),
        -w.z,
        w.y,
        w.z,
        T::zero(),
        -w.x,
        -w.y,
        w.x,
        T::zero(),
    )
}

/// The rotation about `a × b` mapping the direction of `a` onto the
/// direction of `b`. Inputs are normalized internally.
///
/// Antiparallel inputs have no preferred axis and are rejected rather than
/// resolved arbitrarily; callers treat that as a degenerate measurement.
pub fn rotation_between<T: Real>(a: &Vector3<T>, b: &Vector3<T>) -> Result<Quaternion<T>> {
    let na = a.norm();
    let nb = b.norm();
    if na == T::zero() || nb == T::zero() {
        return Err(Error::DegenerateMeasurement("zero vector"));
    }
    let ah = a / na;
    let bh = b / nb;
    let d = ah.dot(&bh);
    if d + T::one() <= real::<T>(ANTIPARALLEL_TOL) {
        return Err(Error::AmbiguousRotation);
    }
    // Half-angle construction: (1 + a·b, a × b) normalizes to the minimal
    // rotation carrying a onto b.
    Ok(Quaternion::from_parts(T::one() + d, &ah.cross(&bh)).normalized())
}

/// Deterministic attitude from two vector pairs: the returned rotation maps
/// the observed primary direction exactly onto the reference primary
/// direction and the secondary pair up to its projection orthogonal to the
/// primary.
pub fn triad<T: Real>(
    obs_primary: &Vector3<T>,
    obs_secondary: &Vector3<T>,
    ref_primary: &Vector3<T>,
    ref_secondary: &Vector3<T>,
) -> Result<Quaternion<T>> {
    let frame = |p: &Vector3<T>, s: &Vector3<T>| -> Result<Matrix3<T>> {
        let np = p.norm();
        if np == T::zero() {
            return Err(Error::DegenerateMeasurement("zero vector"));
        }
        let u1 = p / np;
        let c = u1.cross(s);
        let nc = c.norm();
        if nc <= real::<T>(1e-12) * s.norm() || s.norm() == T::zero() {
            return Err(Error::DegenerateMeasurement("collinear vector pair"));
        }
        let u2 = c / nc;
        let u3 = u1.cross(&u2);
        Ok(Matrix3::from_columns(&[u1, u2, u3]))
    };
    let body = frame(obs_primary, obs_secondary)?;
    let global = frame(ref_primary, ref_secondary)?;
    Ok(Quaternion::from_matrix(&(global * body.transpose())))
}

/// Geodesic angle `‖log(a⁻¹ · b)‖` between two orientations, in radians.
pub fn geodesic_distance<T: Real>(a: &Quaternion<T>, b: &Quaternion<T>) -> T {
    (a.conjugate() * *b).normalized().angle()
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_subset().unwrap_or(f64::NAN)
}
