//! Quaternion arithmetic, unit imaginary directions, frames and rotations.
//!
//! Quaternions are stored scalar-first, `q = w + x e1 + y e2 + z e3`, with
//! the Hamilton rules `e1 e2 = e3`, `e2 e3 = e1`, `e3 e1 = e2`.
//!
//! A [`Frame`] is an ordered orthonormal pair `(i, j)` of pure unit
//! quaternions; `(i, j, ij)` is then automatically co-oriented with the
//! standard basis. The group of unit quaternions acts on frames by
//! conjugation, `R_u(i, j) = (u i ū, u j ū)`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `| |v| - 1 |` for unit imaginaries and unit quaternions.
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance used when validating frame orthogonality and orientation.
pub const FRAME_TOL: f64 = 1e-10;
/// Vector parts at or below this norm are treated as real.
pub const REAL_AXIS_TOL: f64 = 1e-14;
/// Below this norm a quaternion is not inverted.
pub const INVERSE_FLOOR: f64 = 1e-300;

// ── Quaternion ───────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        [q.w, q.x, q.y, q.z]
    }
}

impl From<f64> for Quaternion {
    fn from(w: f64) -> Self {
        Quaternion::real(w)
    }
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const ONE: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const E1: Quaternion = Quaternion { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
    pub const E2: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 1.0, z: 0.0 };
    pub const E3: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 0.0, z: 1.0 };

    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    #[inline]
    pub const fn real(w: f64) -> Self {
        Quaternion { w, x: 0.0, y: 0.0, z: 0.0 }
    }

    #[inline]
    pub const fn pure(v: [f64; 3]) -> Self {
        Quaternion { w: 0.0, x: v[0], y: v[1], z: v[2] }
    }

    #[inline]
    pub fn scalar(&self) -> f64 {
        self.w
    }

    #[inline]
    pub fn vector(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn conj(&self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn vector_norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Real inner product on ℝ⁴.
    #[inline]
    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// `conj(q) / |q|²`.
    pub fn inverse(&self) -> Result<Quaternion> {
        let n2 = self.norm_sqr();
        let norm = n2.sqrt();
        if norm <= INVERSE_FLOOR {
            return Err(Error::ZeroDivision { norm });
        }
        Ok(self.conj() * (1.0 / n2))
    }

    /// `self^m` by repeated multiplication.
    pub fn powi(&self, m: u32) -> Quaternion {
        let mut acc = Quaternion::ONE;
        for _ in 0..m {
            acc = acc * *self;
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(&self, other: &Quaternion) -> f64 {
        (self.w - other.w)
            .abs()
            .max((self.x - other.x).abs())
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}e1 {:+}e2 {:+}e3", self.w, self.x, self.y, self.z)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w + r.w, self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, r: Quaternion) {
        *self = *self + r;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w - r.w, self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, r: Quaternion) {
        *self = *self - r;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, r: Quaternion) -> Quaternion {
        let a = self;
        Quaternion::new(
            a.w * r.w - a.x * r.x - a.y * r.y - a.z * r.z,
            a.w * r.x + a.x * r.w + a.y * r.z - a.z * r.y,
            a.w * r.y - a.x * r.z + a.y * r.w + a.z * r.x,
            a.w * r.z + a.x * r.y - a.y * r.x + a.z * r.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn div(self, s: f64) -> Quaternion {
        Quaternion::new(self.w / s, self.x / s, self.y / s, self.z / s)
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

pub fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    a * b
}

pub fn quat_inverse(a: Quaternion) -> Result<Quaternion> {
    a.inverse()
}

// ── Unit imaginaries ─────────────────────────────────────────────────

/// A point of the sphere S² of pure unit quaternions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitImaginary(Quaternion);

impl TryFrom<[f64; 3]> for UnitImaginary {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        UnitImaginary::new(v)
    }
}

impl From<UnitImaginary> for [f64; 3] {
    fn from(u: UnitImaginary) -> Self {
        u.0.vector()
    }
}

impl UnitImaginary {
    pub const E1: UnitImaginary = UnitImaginary(Quaternion::E1);
    pub const E2: UnitImaginary = UnitImaginary(Quaternion::E2);
    pub const E3: UnitImaginary = UnitImaginary(Quaternion::E3);

    /// Accepts `v` only if it already has unit length.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let q = Quaternion::pure(v);
        let norm = q.vector_norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitImaginary(q))
    }

    /// Scales a nonzero vector onto S².
    pub fn normalize(v: [f64; 3]) -> Result<Self> {
        let q = Quaternion::pure(v);
        let norm = q.vector_norm();
        if !(norm > REAL_AXIS_TOL) || !norm.is_finite() {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitImaginary(q / norm))
    }

    /// Accepts any pure quaternion within tolerance of the sphere.
    pub fn from_quaternion(q: Quaternion) -> Result<Self> {
        if q.w != 0.0 {
            return Err(Error::NotUnit { norm: q.norm() });
        }
        UnitImaginary::new(q.vector())
    }

    /// Skips validation; callers guarantee the invariant (isometric images).
    pub(crate) fn from_quaternion_unchecked(q: Quaternion) -> Self {
        UnitImaginary(Quaternion::pure(q.vector()))
    }

    #[inline]
    pub fn as_quaternion(&self) -> Quaternion {
        self.0
    }

    #[inline]
    pub fn vector(&self) -> [f64; 3] {
        self.0.vector()
    }

    pub fn negate(&self) -> UnitImaginary {
        UnitImaginary(-self.0)
    }

    /// The image of `a + b√-1` in the slice C(self).
    #[inline]
    pub fn embed(&self, c: Complex64) -> Quaternion {
        Quaternion::new(c.re, c.im * self.0.x, c.im * self.0.y, c.im * self.0.z)
    }

    /// Inverse of [`embed`](Self::embed) for quaternions already in C(self):
    /// returns the complex coordinates together with the off-slice residual.
    pub fn coordinates(&self, q: Quaternion) -> (Complex64, f64) {
        let im = self.0.x * q.x + self.0.y * q.y + self.0.z * q.z;
        let off = q - self.embed(Complex64::new(q.w, im));
        (Complex64::new(q.w, im), off.norm())
    }
}

// ── Slice coordinates ────────────────────────────────────────────────

/// `q = x + I y` with `y ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceCoords {
    pub x: f64,
    pub y: f64,
    pub axis: UnitImaginary,
}

/// Splits `q` as `x + I y`, `y ≥ 0`. Real quaternions get `y = 0` and the
/// sentinel axis `e1`.
pub fn slice_coords(q: Quaternion) -> SliceCoords {
    let vn = q.vector_norm();
    if vn <= REAL_AXIS_TOL {
        return SliceCoords { x: q.w, y: 0.0, axis: UnitImaginary::E1 };
    }
    let axis = UnitImaginary(Quaternion::pure([q.x / vn, q.y / vn, q.z / vn]));
    SliceCoords { x: q.w, y: vn, axis }
}

// ── Unit quaternions and rotations ───────────────────────────────────

/// A point of S³, acting on ℝ³ by `p ↦ u p ū`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct UnitQuaternion(Quaternion);

impl TryFrom<[f64; 4]> for UnitQuaternion {
    type Error = Error;
    fn try_from(c: [f64; 4]) -> Result<Self> {
        UnitQuaternion::new(Quaternion::from(c))
    }
}

impl From<UnitQuaternion> for [f64; 4] {
    fn from(u: UnitQuaternion) -> Self {
        u.0.into()
    }
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion(Quaternion::ONE);

    pub fn new(q: Quaternion) -> Result<Self> {
        let norm = q.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitQuaternion(q))
    }

    pub fn normalize(q: Quaternion) -> Result<Self> {
        let norm = q.norm();
        if !(norm > INVERSE_FLOOR) || !norm.is_finite() {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitQuaternion(q / norm))
    }

    /// Rotation by `angle` about the unit axis `axis`.
    pub fn from_axis_angle(axis: UnitImaginary, angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        let v = axis.vector();
        UnitQuaternion(Quaternion::new(c, s * v[0], s * v[1], s * v[2]))
    }

    #[inline]
    pub fn as_quaternion(&self) -> Quaternion {
        self.0
    }

    pub fn conj(&self) -> UnitQuaternion {
        UnitQuaternion(self.0.conj())
    }

    /// Group product; the result is renormalized against drift.
    pub fn compose(&self, other: &UnitQuaternion) -> UnitQuaternion {
        let p = self.0 * other.0;
        UnitQuaternion(p / p.norm())
    }

    /// `u p ū`.
    #[inline]
    pub fn rotate(&self, p: Quaternion) -> Quaternion {
        self.0 * p * self.0.conj()
    }

    pub fn rotate_imaginary(&self, v: UnitImaginary) -> UnitImaginary {
        UnitImaginary::from_quaternion_unchecked(self.rotate(v.as_quaternion()))
    }
}

/// `u p ū`.
pub fn rotate(u: &UnitQuaternion, p: Quaternion) -> Quaternion {
    u.rotate(p)
}

// ── Frames ───────────────────────────────────────────────────────────

/// An element `(i, j)` of T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameRepr", into = "FrameRepr")]
pub struct Frame {
    i: UnitImaginary,
    j: UnitImaginary,
    k: Quaternion,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRepr {
    i: [f64; 3],
    j: [f64; 3],
}

impl TryFrom<FrameRepr> for Frame {
    type Error = Error;
    fn try_from(r: FrameRepr) -> Result<Self> {
        Frame::from_vectors(r.i, r.j)
    }
}

impl From<Frame> for FrameRepr {
    fn from(f: Frame) -> Self {
        FrameRepr { i: f.i.vector(), j: f.j.vector() }
    }
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

impl Frame {
    /// `(e1, e2)`.
    pub const STANDARD: Frame = Frame { i: UnitImaginary::E1, j: UnitImaginary::E2, k: Quaternion::E3 };

    /// Validates orthogonality and co-orientation; does not re-orthonormalize.
    pub fn new(i: UnitImaginary, j: UnitImaginary) -> Result<Self> {
        let inner = i.as_quaternion().dot(&j.as_quaternion());
        if inner.abs() > FRAME_TOL {
            return Err(Error::NotOrthonormal { inner });
        }
        let k = i.as_quaternion() * j.as_quaternion();
        let det = det3(i.vector(), j.vector(), k.vector());
        if (det - 1.0).abs() > FRAME_TOL {
            return Err(Error::NotCoOriented { det });
        }
        Ok(Frame { i, j, k })
    }

    pub fn from_vectors(i: [f64; 3], j: [f64; 3]) -> Result<Self> {
        Frame::new(UnitImaginary::new(i)?, UnitImaginary::new(j)?)
    }

    #[inline]
    pub fn i(&self) -> UnitImaginary {
        self.i
    }

    #[inline]
    pub fn j(&self) -> UnitImaginary {
        self.j
    }

    /// The product `ij`, the third leg of the oriented triple.
    #[inline]
    pub fn ij(&self) -> Quaternion {
        self.k
    }

    /// Orthogonality residual and orientation determinant.
    pub fn check(&self) -> (f64, f64) {
        let inner = self.i.as_quaternion().dot(&self.j.as_quaternion());
        let det = det3(self.i.vector(), self.j.vector(), self.ij().vector());
        (inner, det)
    }

    pub fn as_r6(&self) -> [f64; 6] {
        let (a, b) = (self.i.vector(), self.j.vector());
        [a[0], a[1], a[2], b[0], b[1], b[2]]
    }

    /// Euclidean norm of `(i, j)` in ℝ⁶ (always √2 up to rounding).
    pub fn r6_norm(&self) -> f64 {
        self.as_r6().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖(i, j) − (k, l)‖` in ℝ⁶.
    pub fn r6_distance(&self, other: &Frame) -> f64 {
        self.as_r6()
            .iter()
            .zip(other.as_r6())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Same-frame test used by the bundle operations.
    pub fn approx_eq(&self, other: &Frame, tol: f64) -> bool {
        self.r6_distance(other) <= tol
    }
}

/// `R_u(i, j) = (u i ū, u j ū)`.
pub fn frame_rotate(u: &UnitQuaternion, fr: &Frame) -> Frame {
    let (i, j) = (u.rotate_imaginary(fr.i), u.rotate_imaginary(fr.j));
    Frame { i, j, k: i.as_quaternion() * j.as_quaternion() }
}

/// The transition `g_{v,u} = R_{v̄ u}` between the trivializations indexed by
/// `u` and `v`. Composes as `transition(v, w) ∘ transition(u, v) = transition(u, w)`.
pub fn transition(u: &UnitQuaternion, v: &UnitQuaternion, fr: &Frame) -> Frame {
    frame_rotate(&v.conj().compose(u), fr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: Quaternion, b: Quaternion, tol: f64) -> bool {
        a.max_abs_diff(&b) <= tol
    }

    #[test]
    fn basis_products() {
        assert_eq!(Quaternion::E1 * Quaternion::E2, Quaternion::E3);
        assert_eq!(Quaternion::E2 * Quaternion::E1, -Quaternion::E3);
        assert_eq!(Quaternion::E2 * Quaternion::E3, Quaternion::E1);
        assert_eq!(Quaternion::E3 * Quaternion::E1, Quaternion::E2);
        for e in [Quaternion::E1, Quaternion::E2, Quaternion::E3] {
            assert_eq!(e * e, -Quaternion::ONE);
        }
    }

    #[test]
    fn product_examples() {
        let q = Quaternion::new(0.3, -1.0, 2.0, 0.5);
        assert_eq!(Quaternion::ONE * q, q);
        let a = Quaternion::ONE + Quaternion::E1;
        let b = Quaternion::ONE - Quaternion::E1;
        assert_eq!(a * b, Quaternion::real(2.0));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Quaternion::E1.inverse().unwrap(), -Quaternion::E1);
        assert_eq!(Quaternion::real(2.0).inverse().unwrap(), Quaternion::real(0.5));
        let q = Quaternion::ONE + Quaternion::E2;
        let expected = (Quaternion::ONE - Quaternion::E2) * 0.5;
        assert!(close(q.inverse().unwrap(), expected, 1e-16));
        assert!(matches!(Quaternion::ZERO.inverse(), Err(Error::ZeroDivision { .. })));
        assert!(matches!(
            Quaternion::real(1e-301).inverse(),
            Err(Error::ZeroDivision { .. })
        ));
    }

    #[test]
    fn slice_coords_examples() {
        let c = slice_coords(Quaternion::new(1.0, 2.0, 0.0, 0.0));
        assert_eq!((c.x, c.y, c.axis), (1.0, 2.0, UnitImaginary::E1));
        let c = slice_coords(Quaternion::new(3.0, 0.0, -4.0, 0.0));
        assert_eq!((c.x, c.y), (3.0, 4.0));
        assert_eq!(c.axis, UnitImaginary::E2.negate());
        let c = slice_coords(Quaternion::real(5.0));
        assert_eq!((c.x, c.y, c.axis), (5.0, 0.0, UnitImaginary::E1));
    }

    #[test]
    fn rotation_examples() {
        let u = UnitQuaternion::normalize(Quaternion::new(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(UnitQuaternion::IDENTITY.rotate(Quaternion::E2), Quaternion::E2);
        assert!(close(u.rotate(Quaternion::E2), Quaternion::E3, 1e-15));
        assert!(close(u.rotate(Quaternion::E1), Quaternion::E1, 1e-15));
    }

    #[test]
    fn frame_rotation_examples() {
        let u = UnitQuaternion::new(Quaternion::new(S, S, 0.0, 0.0)).unwrap();
        let fr = Frame::from_vectors([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let r = frame_rotate(&u, &fr);
        assert!(close(r.i().as_quaternion(), Quaternion::E3, 1e-15));
        assert!(close(r.j().as_quaternion(), -Quaternion::E2, 1e-15));
        assert_eq!(frame_rotate(&UnitQuaternion::IDENTITY, &Frame::STANDARD), Frame::STANDARD);

        let t = transition(&u, &UnitQuaternion::IDENTITY, &fr);
        assert!(t.r6_distance(&r) <= 1e-15);
        assert!(transition(&u, &u, &fr).r6_distance(&fr) <= 1e-15);
    }

    #[test]
    fn unit_validation() {
        assert!(UnitImaginary::new([1.0, 1e-13, 0.0]).is_ok());
        assert!(matches!(UnitImaginary::new([1.1, 0.0, 0.0]), Err(Error::NotUnit { .. })));
        assert!(UnitImaginary::normalize([0.0, 0.0, 0.0]).is_err());
        assert!(matches!(
            UnitQuaternion::new(Quaternion::new(1.0, 1.0, 0.0, 0.0)),
            Err(Error::NotUnit { .. })
        ));
    }

    #[test]
    fn frame_validation() {
        assert!(matches!(
            Frame::from_vectors([1.0, 0.0, 0.0], [S, S, 0.0]),
            Err(Error::NotOrthonormal { .. })
        ));
        // Orthonormal pairs are always co-oriented: det(i, j, i×j) = |i×j|² = 1.
        let fr = Frame::from_vectors([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).unwrap();
        let (inner, det) = fr.check();
        assert_eq!(inner, 0.0);
        assert!((det - 1.0).abs() < 1e-15);
        assert!((fr.r6_norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn serde_shapes() {
        let q = Quaternion::new(1.0, -2.0, 0.5, 3.0);
        assert_eq!(serde_json::to_string(&q).unwrap(), "[1.0,-2.0,0.5,3.0]");
        let fr: Frame = serde_json::from_str(r#"{"i":[1,0,0],"j":[0,1,0]}"#).unwrap();
        assert_eq!(fr, Frame::STANDARD);
        assert_eq!(serde_json::to_string(&fr).unwrap(), r#"{"i":[1.0,0.0,0.0],"j":[0.0,1.0,0.0]}"#);
        assert!(serde_json::from_str::<Frame>(r#"{"i":[1,0,0],"j":[1,0,0]}"#).is_err());
    }

    #[test]
    fn embed_roundtrip() {
        let axis = UnitImaginary::normalize([1.0, -2.0, 0.5]).unwrap();
        let c = Complex64::new(0.25, -1.5);
        let (back, off) = axis.coordinates(axis.embed(c));
        assert!((back - c).norm() < 1e-15 && off < 1e-15);
    }

    fn arb_unit() -> impl Strategy<Value = UnitQuaternion> {
        prop::array::uniform4(-1.0f64..1.0)
            .prop_filter("nonzero", |v| v.iter().map(|c| c * c).sum::<f64>() > 1e-3)
            .prop_map(|v| UnitQuaternion::normalize(Quaternion::from(v)).unwrap())
    }

    fn arb_quat() -> impl Strategy<Value = Quaternion> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(Quaternion::from)
    }

    fn arb_frame() -> impl Strategy<Value = Frame> {
        arb_unit().prop_map(|u| frame_rotate(&u, &Frame::STANDARD))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn product_is_associative(a in arb_quat(), b in arb_quat(), c in arb_quat()) {
            let (l, r) = ((a * b) * c, a * (b * c));
            prop_assert!(l.max_abs_diff(&r) <= 1e-13 * (1.0 + a.norm() * b.norm() * c.norm()));
            prop_assert!(((a * b).conj()).max_abs_diff(&(b.conj() * a.conj())) <= 1e-14 * (1.0 + a.norm() * b.norm()));
            prop_assert!(((a * a.conj()).w - a.norm_sqr()).abs() <= 1e-14 * a.norm_sqr());
        }

        #[test]
        fn rotation_keeps_frames(u in arb_unit(), fr in arb_frame()) {
            let r = frame_rotate(&u, &fr);
            let (inner, det) = r.check();
            prop_assert!(inner.abs() <= 1e-11 && (det - 1.0).abs() <= 1e-11);
            let p = Quaternion::new(0.3, -1.2, 0.4, 2.0);
            let q = u.rotate(p);
            prop_assert!((q.norm() - p.norm()).abs() <= 1e-13 && (q.w - p.w).abs() <= 1e-13);
        }

        #[test]
        fn rotations_compose(u in arb_unit(), v in arb_unit(), fr in arb_frame()) {
            let two = frame_rotate(&u, &frame_rotate(&v, &fr));
            let one = frame_rotate(&u.compose(&v), &fr);
            prop_assert!(two.r6_distance(&one) <= 1e-12);
        }

        #[test]
        fn rotation_is_an_isometry(u in arb_unit(), a in arb_frame(), b in arb_frame()) {
            let d = frame_rotate(&u, &a).r6_distance(&frame_rotate(&u, &b));
            prop_assert!((d - a.r6_distance(&b)).abs() <= 1e-12);
        }

        #[test]
        fn transitions_form_a_cocycle(u in arb_unit(), v in arb_unit(), w in arb_unit(), fr in arb_frame()) {
            prop_assert!(transition(&u, &u, &fr).r6_distance(&fr) <= 1e-12);
            let chained = transition(&v, &w, &transition(&u, &v, &fr));
            prop_assert!(chained.r6_distance(&transition(&u, &w, &fr)) <= 1e-12);
            let back = transition(&v, &u, &transition(&u, &v, &fr));
            prop_assert!(back.r6_distance(&fr) <= 1e-12);
        }
    }
}
