//! Closed-form geodesics: the constant-velocity family, the vertical line,
//! the general family through the identity in complex coordinates, and the
//! same family in hyperspherical coordinates.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{add4, quat_mul, quat_mul_raw, scale4, S3Point, StructureMatrix, TangentVector, Vec4};
use crate::hamiltonian::Covector;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `x(s) = x0 cos s + (cos ψ I1 + sin ψ I2) x0 sin s`: horizontal, unit speed,
/// with constant frame velocity `(cos ψ, sin ψ, 0)`.
pub fn const_geodesic(x0: &S3Point, psi: f64, s: f64) -> S3Point {
    let x = x0.as_array();
    let dir = add4(
        &scale4(&StructureMatrix::I1.apply(x), psi.cos()),
        &scale4(&StructureMatrix::I2.apply(x), psi.sin()),
    );
    S3Point::from_raw(add4(&scale4(x, s.cos()), &scale4(&dir, s.sin())))
}

/// Integral curve of `Z` through `x0`: `x(s) = x0 cos s + I3 x0 sin s`.
pub fn vertical_line(x0: &S3Point, s: f64) -> S3Point {
    let x = x0.as_array();
    S3Point::from_raw(add4(
        &scale4(x, s.cos()),
        &scale4(&StructureMatrix::I3.apply(x), s.sin()),
    ))
}

/// One member of the unit-speed geodesic family: starting point, vertical
/// momentum `b` and heading `theta` (`C + iD = e^{iθ}`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicParam {
    pub base: S3Point,
    pub b: f64,
    pub theta: f64,
}

impl GeodesicParam {
    pub fn at_identity(b: f64, theta: f64) -> Self {
        GeodesicParam {
            base: S3Point::IDENTITY,
            b,
            theta,
        }
    }

    /// `C + iD`.
    pub fn heading(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    /// `sqrt(1 + B²)`.
    pub fn frequency(&self) -> f64 {
        self.b.hypot(1.0)
    }

    /// Initial covector at the identity, with gauge component `a`.
    pub fn initial_covector(&self, a: f64) -> Covector {
        Covector::at_identity(a, self.b, self.theta)
    }
}

/// `(z(s), w(s))` of the family through the identity.
pub fn closed_form_zw(b: f64, theta: f64, s: f64) -> (Complex64, Complex64) {
    let k = b.hypot(1.0);
    let (sn, cs) = (k * s).sin_cos();
    let z = Complex64::new(cs, b / k * sn) * Complex64::from_polar(1.0, -b * s);
    let w = Complex64::from_polar(sn / k, theta + b * s);
    (z, w)
}

/// `(ż(s), ẇ(s))` of the family through the identity.
pub fn closed_form_zw_velocity(b: f64, theta: f64, s: f64) -> (Complex64, Complex64) {
    let k = b.hypot(1.0);
    let (sn, cs) = (k * s).sin_cos();
    let rot = Complex64::from_polar(1.0, -b * s);
    let z = Complex64::new(cs, b / k * sn) * rot;
    let dz = Complex64::new(-k * sn, b * cs) * rot - I * b * z;
    let head = Complex64::from_polar(1.0, theta + b * s);
    let w = head * (sn / k);
    let dw = head * cs + I * b * w;
    (dz, dw)
}

fn zw_to_vec(z: Complex64, w: Complex64) -> Vec4 {
    [z.re, z.im, w.re, w.im]
}

/// Point at arc parameter `s` of the geodesic `param`: the closed form
/// through the identity, left-translated to `param.base`.
pub fn geodesic_bc(param: &GeodesicParam, s: f64) -> S3Point {
    let (z, w) = closed_form_zw(param.b, param.theta, s);
    let p = zw_to_vec(z, w);
    if param.base == S3Point::IDENTITY {
        S3Point::from_raw(p)
    } else {
        S3Point::from_raw(quat_mul_raw(param.base.as_array(), &p))
    }
}

/// Velocity of [`geodesic_bc`] at `s`.
pub fn geodesic_bc_velocity(param: &GeodesicParam, s: f64) -> TangentVector {
    let (dz, dw) = closed_form_zw_velocity(param.b, param.theta, s);
    let v = zw_to_vec(dz, dw);
    if param.base == S3Point::IDENTITY {
        TangentVector(v)
    } else {
        TangentVector(quat_mul_raw(param.base.as_array(), &v))
    }
}

/// `x0 ∘ γ(s)` where `γ` is the family member through the identity.
pub fn geodesic_from(x0: &S3Point, b: f64, theta: f64, s: f64) -> S3Point {
    quat_mul(x0, &geodesic_bc(&GeodesicParam::at_identity(b, theta), s))
}

/// Covector along the family member through the identity, recovered from
/// the first integrals `φ = z(A + iB) - w̄(C + iD)`, `ψ = z̄(C + iD) + w(A + iB)`.
pub fn covector_along(b: f64, theta: f64, a: f64, s: f64) -> Covector {
    let (z, w) = closed_form_zw(b, theta, s);
    let ab = Complex64::new(a, b);
    let cd = Complex64::from_polar(1.0, theta);
    let phi = z * ab - w.conj() * cd;
    let psi = z.conj() * cd + w * ab;
    Covector([phi.re, phi.im, psi.re, psi.im])
}

/// Closed-form solution of the Riccati equation for `p = w̄ / z`.
pub fn riccati_p(b: f64, theta: f64, s: f64) -> Complex64 {
    let k = b.hypot(1.0);
    let (sn, cs) = (k * s).sin_cos();
    Complex64::from_polar(1.0, -theta) * sn / Complex64::new(k * cs, b * sn)
}

/// Hyperspherical coordinates `z = e^{iξ1} cos η`, `w = e^{iξ2} sin η`.
///
/// The chart range is `ξ1, ξ2 ∈ [-π, π)`, `η ∈ [0, π/2]`, which is what
/// [`to_hyper`] and [`HyperCoords::canonical`] return. Curves produced by
/// [`geodesic_hyper`] use continuous values instead (unwrapped angles,
/// signed `η`); [`from_hyper`] accepts both.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HyperCoords {
    pub xi1: f64,
    pub xi2: f64,
    pub eta: f64,
}

impl HyperCoords {
    /// The same point expressed in the chart range and conventions.
    pub fn canonical(&self) -> HyperCoords {
        to_hyper(&from_hyper(self))
    }
}

fn wrap_pi(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

pub(crate) fn from_hyper_raw(xi1: f64, xi2: f64, eta: f64) -> Vec4 {
    let (se, ce) = eta.sin_cos();
    let (s1, c1) = xi1.sin_cos();
    let (s2, c2) = xi2.sin_cos();
    [c1 * ce, s1 * ce, c2 * se, s2 * se]
}

pub fn from_hyper(h: &HyperCoords) -> S3Point {
    S3Point::from_raw(from_hyper_raw(h.xi1, h.xi2, h.eta))
}

/// Chart coordinates of `x`. On the fiber `η = 0` the angle `ξ2` is set to
/// 0, on `η = π/2` the angle `ξ1` is set to 0.
pub fn to_hyper(x: &S3Point) -> HyperCoords {
    let [x1, x2, x3, x4] = *x.as_array();
    let rz = x1.hypot(x2);
    let rw = x3.hypot(x4);
    HyperCoords {
        xi1: if rz < f64::EPSILON { 0.0 } else { wrap_pi(x2.atan2(x1)) },
        xi2: if rw < f64::EPSILON { 0.0 } else { wrap_pi(x4.atan2(x3)) },
        eta: rw.atan2(rz),
    }
}

/// Hyperspherical geodesic through the identity with constant momentum
/// `ψ1` and initial speed `η̇(0) > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperGeodesicParam {
    pub psi1: f64,
    pub eta_dot0: f64,
}

impl HyperGeodesicParam {
    pub fn new(psi1: f64, eta_dot0: f64) -> Result<Self> {
        if !(eta_dot0.is_finite() && eta_dot0 > 0.0 && psi1.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "need eta_dot0 > 0 and finite psi1, got eta_dot0 = {eta_dot0}, psi1 = {psi1}"
            )));
        }
        Ok(HyperGeodesicParam { psi1, eta_dot0 })
    }

    /// Member of the family on `[0, 1]` that returns to the vertical line
    /// after `n` half-oscillations: `C = π² n²`, `η̇(0) = sqrt(π² n² - ψ1²)`.
    pub fn closing_on_fiber(psi1: f64, n: u32) -> Result<Self> {
        let pn = PI * n as f64;
        if n == 0 || psi1.abs() >= pn {
            return Err(Error::InvalidParam(format!("need 0 < |psi1| < pi n, got psi1 = {psi1}, n = {n}")));
        }
        Self::new(psi1, (pn * pn - psi1 * psi1).sqrt())
    }

    /// `C = η̇(0)² + ψ1²`.
    pub fn c(&self) -> f64 {
        self.eta_dot0 * self.eta_dot0 + self.psi1 * self.psi1
    }

    /// Cartesian description of the same curve: `from_hyper(geodesic_hyper(s))`
    /// equals `geodesic_bc(param, speed * s)`.
    pub fn cartesian_equivalent(&self) -> (GeodesicParam, f64) {
        (GeodesicParam::at_identity(self.psi1 / self.eta_dot0, 0.0), self.eta_dot0)
    }
}

/// Continuous branch of `atan2(k sin u, cos u)` for `0 <= k < 1`, equal to
/// `u` at multiples of `π/2`.
fn unwrapped_tan_angle(k: f64, u: f64) -> f64 {
    let principal = (k * u.sin()).atan2(u.cos());
    principal + TAU * ((u - principal) / TAU).round()
}

/// Point at parameter `s` of the hyperspherical geodesic `param`, returned
/// with continuous angles and signed `η`:
///
/// * `sin η(s) = (η̇(0) / √C) sin(√C s)`,
/// * `ξ2(s) = ψ1 s`,
/// * `ξ1(s) = -ψ1 s + sign(ψ1) · arctan((|ψ1| / √C) tan(√C s))` on the
///   continuous branch through the poles of the tangent.
pub fn geodesic_hyper(param: &HyperGeodesicParam, s: f64) -> HyperCoords {
    let c = param.c();
    let root = c.sqrt();
    let u = root * s;
    let xi2 = param.psi1 * s;
    if param.psi1 == 0.0 {
        return HyperCoords { xi1: 0.0, xi2, eta: u };
    }
    let eta = (param.eta_dot0 / root * u.sin()).asin();
    let xi1 = -param.psi1 * s + param.psi1.signum() * unwrapped_tan_angle(param.psi1.abs() / root, u);
    HyperCoords { xi1, xi2, eta }
}
