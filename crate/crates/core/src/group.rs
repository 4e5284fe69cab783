//! The unit sphere S³ as the group of unit quaternions.
//!
//! Points are stored as four real components `(x1, x2, x3, x4)`, read either
//! as the quaternion `x1 + x2 i + x3 j + x4 k` or as the complex pair
//! `z = x1 + i x2`, `w = x3 + i x4`.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec4 = [f64; 4];

/// Tolerance on `| |x| - 1 |` accepted when constructing an [`S3Point`].
pub const UNIT_TOL: f64 = 1e-12;

#[inline]
pub fn dot4(a: &Vec4, b: &Vec4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub fn norm4(a: &Vec4) -> f64 {
    dot4(a, a).sqrt()
}

#[inline]
pub(crate) fn scale4(a: &Vec4, k: f64) -> Vec4 {
    [a[0] * k, a[1] * k, a[2] * k, a[3] * k]
}

#[inline]
pub(crate) fn add4(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[inline]
pub(crate) fn sub4(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

/// Sup norm of the difference of two 4-vectors.
pub fn dist_inf4(a: &Vec4, b: &Vec4) -> f64 {
    sub4(a, b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// A unit quaternion, i.e. a point of S³ and an element of SU(2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec4", into = "Vec4")]
pub struct S3Point(Vec4);

impl S3Point {
    pub const IDENTITY: S3Point = S3Point([1.0, 0.0, 0.0, 0.0]);

    pub fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Result<Self> {
        Self::from_array([x1, x2, x3, x4])
    }

    pub fn from_array(x: Vec4) -> Result<Self> {
        Self::with_tolerance(x, UNIT_TOL)
    }

    /// Accepts `x` when `| |x| - 1 | <= tol`. The components are stored as
    /// given, without renormalization.
    pub fn with_tolerance(x: Vec4, tol: f64) -> Result<Self> {
        let norm = norm4(&x);
        if !norm.is_finite() || (norm - 1.0).abs() > tol {
            return Err(Error::NonUnitInput { norm, tol });
        }
        Ok(S3Point(x))
    }

    /// Projects a nonzero 4-vector onto the sphere.
    pub fn normalized(x: Vec4) -> Result<Self> {
        let norm = norm4(&x);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NonUnitInput { norm, tol: UNIT_TOL });
        }
        Ok(S3Point(scale4(&x, 1.0 / norm)))
    }

    /// Builds a point from the complex pair `(z, w)`.
    pub fn from_complex(z: Complex64, w: Complex64) -> Result<Self> {
        Self::from_array([z.re, z.im, w.re, w.im])
    }

    /// Unchecked construction for values that are unit by construction
    /// (closed forms, products of unit quaternions).
    pub(crate) fn from_raw(x: Vec4) -> Self {
        S3Point(x)
    }

    pub fn as_array(&self) -> &Vec4 {
        &self.0
    }

    pub fn to_array(self) -> Vec4 {
        self.0
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.0[0], self.0[1])
    }

    pub fn w(&self) -> Complex64 {
        Complex64::new(self.0[2], self.0[3])
    }

    /// Quaternion conjugate, which is the group inverse on S³.
    pub fn inverse(&self) -> S3Point {
        S3Point([self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }
}

impl TryFrom<Vec4> for S3Point {
    type Error = Error;

    fn try_from(x: Vec4) -> Result<Self> {
        S3Point::from_array(x)
    }
}

impl From<S3Point> for Vec4 {
    fn from(p: S3Point) -> Vec4 {
        p.0
    }
}

/// Quaternion product on raw 4-vectors.
#[inline]
pub fn quat_mul_raw(x: &Vec4, y: &Vec4) -> Vec4 {
    [
        x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3],
        x[1] * y[0] + x[0] * y[1] - x[3] * y[2] + x[2] * y[3],
        x[2] * y[0] + x[3] * y[1] + x[0] * y[2] - x[1] * y[3],
        x[3] * y[0] - x[2] * y[1] + x[1] * y[2] + x[0] * y[3],
    ]
}

/// Group law `x ∘ y` (left translation of `y` by `x`).
pub fn quat_mul(x: &S3Point, y: &S3Point) -> S3Point {
    S3Point(quat_mul_raw(&x.0, &y.0))
}

impl Mul for S3Point {
    type Output = S3Point;

    fn mul(self, rhs: S3Point) -> S3Point {
        quat_mul(&self, &rhs)
    }
}

/// Constant 4×4 real matrix acting on ambient vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureMatrix(pub [[f64; 4]; 4]);

impl StructureMatrix {
    /// `I1 x = X(x)`.
    pub const I1: StructureMatrix = StructureMatrix([
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]);

    /// `I2 x = Y(x)`.
    pub const I2: StructureMatrix = StructureMatrix([
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
    ]);

    /// `I3 x = Z(x)`.
    pub const I3: StructureMatrix = StructureMatrix([
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]);

    pub const IDENTITY: StructureMatrix = StructureMatrix([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    #[inline]
    pub fn apply(&self, v: &Vec4) -> Vec4 {
        let m = &self.0;
        [
            dot4(&m[0], v),
            dot4(&m[1], v),
            dot4(&m[2], v),
            dot4(&m[3], v),
        ]
    }

    pub fn matmul(&self, other: &StructureMatrix) -> StructureMatrix {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..4).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        StructureMatrix(out)
    }

    pub fn scaled(&self, k: f64) -> StructureMatrix {
        StructureMatrix(self.0.map(|row| row.map(|v| v * k)))
    }

    pub fn sub(&self, other: &StructureMatrix) -> StructureMatrix {
        let mut out = self.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell -= other.0[i][j];
            }
        }
        StructureMatrix(out)
    }

    pub fn transpose(&self) -> StructureMatrix {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.0[j][i];
            }
        }
        StructureMatrix(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Matrix of the Lie bracket `[V_a, V_b]` of the linear vector fields
/// `V_a(x) = a x` and `V_b(x) = b x`, acting as first-order operators:
/// `[V_a, V_b](x) = (b a - a b) x`.
pub fn linear_field_bracket(a: &StructureMatrix, b: &StructureMatrix) -> StructureMatrix {
    b.matmul(a).sub(&a.matmul(b))
}

/// Ambient vector attached to a point of S³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector(pub Vec4);

impl TangentVector {
    pub fn as_array(&self) -> &Vec4 {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm4(&self.0)
    }
}

/// The left-invariant frame at a point: the normal `N` and the tangent
/// fields `X`, `Y`, `Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub n: TangentVector,
    pub x: TangentVector,
    pub y: TangentVector,
    pub z: TangentVector,
}

pub fn frame_at(p: &S3Point) -> Frame {
    let x = p.as_array();
    Frame {
        n: TangentVector(*x),
        x: TangentVector(StructureMatrix::I1.apply(x)),
        y: TangentVector(StructureMatrix::I2.apply(x)),
        z: TangentVector(StructureMatrix::I3.apply(x)),
    }
}

/// Tangent map of left translation by `p`, i.e. the matrix of `y ↦ p ∘ y`.
///
/// Columns, in order, are the fields `N`, `Z`, `X`, `Y` evaluated at `p`.
pub fn left_pushforward(p: &S3Point) -> [[f64; 4]; 4] {
    let [x1, x2, x3, x4] = *p.as_array();
    [
        [x1, -x2, -x3, -x4],
        [x2, x1, -x4, x3],
        [x3, x4, x1, -x2],
        [x4, -x3, x2, x1],
    ]
}

/// Applies a row-major 4×4 matrix to a vector.
pub fn mat4_apply(m: &[[f64; 4]; 4], v: &Vec4) -> Vec4 {
    [dot4(&m[0], v), dot4(&m[1], v), dot4(&m[2], v), dot4(&m[3], v)]
}

/// The contact form `ω = -x2 dx1 + x1 dx2 + x4 dx3 - x3 dx4` evaluated on
/// `v` at `p`.
pub fn contact_form(p: &S3Point, v: &Vec4) -> f64 {
    let [x1, x2, x3, x4] = *p.as_array();
    -x2 * v[0] + x1 * v[1] + x4 * v[2] - x3 * v[3]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: [f64; 4]) -> S3Point {
        S3Point::normalized(a).unwrap()
    }

    #[test]
    fn identity_is_two_sided() {
        let y = p([0.3, -0.1, 0.7, 0.2]);
        assert!(dist_inf4((S3Point::IDENTITY * y).as_array(), y.as_array()) < 1e-15);
        assert!(dist_inf4((y * S3Point::IDENTITY).as_array(), y.as_array()) < 1e-15);
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = S3Point::new(0.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!((i * i).to_array(), [-1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_non_unit() {
        let err = S3Point::new(1.0, 1e-5, 0.0, 0.0).unwrap_err();
        assert_eq!(err.name(), "NonUnitInput");
        assert!(S3Point::normalized([0.0; 4]).is_err());
    }

    #[test]
    fn inverse_via_conjugate() {
        let x = p([0.1, 0.2, -0.3, 0.9]);
        let e = x * x.inverse();
        assert!(dist_inf4(e.as_array(), S3Point::IDENTITY.as_array()) < 1e-15);
    }

    #[test]
    fn pushforward_at_identity_and_as_product() {
        let m = left_pushforward(&S3Point::IDENTITY);
        assert_eq!(StructureMatrix(m), StructureMatrix::IDENTITY);

        let x = p([0.5, -0.4, 0.2, 0.7]);
        let y = p([-0.3, 0.6, 0.1, 0.2]);
        let via_matrix = mat4_apply(&left_pushforward(&x), y.as_array());
        assert!(dist_inf4(&via_matrix, (x * y).as_array()) < 1e-15);
    }

    #[test]
    fn frame_at_identity() {
        let f = frame_at(&S3Point::IDENTITY);
        assert_eq!(f.z.0, [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(f.x.0, [0.0, 0.0, 1.0, 0.0]);
        assert_eq!(f.y.0, [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(f.n.0, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn z_column_matches_displayed_field() {
        let x = p([0.5, -0.4, 0.2, 0.7]);
        let [x1, x2, x3, x4] = *x.as_array();
        let m = left_pushforward(&x);
        let col1 = [m[0][1], m[1][1], m[2][1], m[3][1]];
        assert_eq!(col1, [-x2, x1, x4, -x3]);
    }

    #[test]
    fn structure_matrices_square_to_minus_identity() {
        let minus_id = StructureMatrix::IDENTITY.scaled(-1.0);
        for m in [StructureMatrix::I1, StructureMatrix::I2, StructureMatrix::I3] {
            assert_eq!(m.matmul(&m), minus_id);
            assert_eq!(m.transpose(), m.scaled(-1.0));
        }
    }

    #[test]
    fn bracket_signs_at_identity() {
        let (i1, i2, i3) = (StructureMatrix::I1, StructureMatrix::I2, StructureMatrix::I3);
        let e = S3Point::IDENTITY.to_array();
        assert_eq!(linear_field_bracket(&i1, &i2).apply(&e), i3.scaled(2.0).apply(&e));
        assert_eq!(linear_field_bracket(&i3, &i1).apply(&e), i2.scaled(2.0).apply(&e));
        assert_eq!(linear_field_bracket(&i2, &i3).apply(&e), i1.scaled(2.0).apply(&e));
    }
}
