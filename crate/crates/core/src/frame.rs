//! Frame coordinates of velocities, the horizontality test and the length
//! of horizontal curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{dot4, frame_at, S3Point, TangentVector};

/// Default tolerance for horizontality predicates.
pub const DEFAULT_HORIZONTAL_TOL: f64 = 1e-9;

/// Coefficients of a vector in the frame `{X, Y, Z, N}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: f64,
}

impl FrameCoeffs {
    /// Horizontal speed `sqrt(a² + b²)`.
    pub fn horizontal_speed(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// Reassembles `a X + b Y + c Z + n N` at `p`.
    pub fn reconstruct(&self, p: &S3Point) -> TangentVector {
        let f = frame_at(p);
        let mut v = [0.0; 4];
        for (i, out) in v.iter_mut().enumerate() {
            *out = self.a * f.x.0[i] + self.b * f.y.0[i] + self.c * f.z.0[i] + self.n * f.n.0[i];
        }
        TangentVector(v)
    }
}

/// Inner products of `v` with `X`, `Y`, `Z` and `N` at `p`.
///
/// `v` need not be tangent; its radial part shows up in `n`.
pub fn frame_coeffs(p: &S3Point, v: &TangentVector) -> FrameCoeffs {
    let f = frame_at(p);
    FrameCoeffs {
        a: dot4(&v.0, &f.x.0),
        b: dot4(&v.0, &f.y.0),
        c: dot4(&v.0, &f.z.0),
        n: dot4(&v.0, &f.n.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizontalityReport {
    pub horizontal: bool,
    pub max_c: f64,
}

pub fn is_horizontal(samples: &[(S3Point, TangentVector)], tol: f64) -> Result<HorizontalityReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples to test for horizontality"));
    }
    let max_c = samples
        .iter()
        .map(|(p, v)| frame_coeffs(p, v).c.abs())
        .fold(0.0, f64::max);
    Ok(HorizontalityReport {
        horizontal: max_c <= tol,
        max_c,
    })
}

/// A sampled curve point with its velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub s: f64,
    pub point: S3Point,
    pub velocity: TangentVector,
}

/// Length `∫ sqrt(a² + b²) ds` of a horizontal sampled curve, by composite
/// Simpson quadrature over the given (possibly non-uniform) samples.
pub fn horizontal_length(path: &[CurveSample], tol: f64) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::EmptyInput("empty path"));
    }
    let mut max_c = 0.0_f64;
    let mut speeds = Vec::with_capacity(path.len());
    for sample in path {
        let fc = frame_coeffs(&sample.point, &sample.velocity);
        max_c = max_c.max(fc.c.abs());
        speeds.push(fc.horizontal_speed());
    }
    if max_c > tol {
        return Err(Error::NonHorizontalPath { max_c, tol });
    }
    let s: Vec<f64> = path.iter().map(|p| p.s).collect();
    if s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParam(
            "curve parameter must be strictly increasing".into(),
        ));
    }
    Ok(simpson_nonuniform(&s, &speeds))
}

/// Composite Simpson rule for irregularly spaced abscissae. An odd number of
/// intervals is closed with the matching three-point end correction; a
/// single interval falls back to the trapezoid rule.
pub fn simpson_nonuniform(x: &[f64], f: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), f.len());
    let n = x.len().saturating_sub(1);
    match n {
        0 => return 0.0,
        1 => return 0.5 * (x[1] - x[0]) * (f[0] + f[1]),
        _ => {}
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let mut total = 0.0;
    let mut i = 0;
    while i + 1 < n {
        let (h0, h1) = (h[i], h[i + 1]);
        let hph = h0 + h1;
        let hdh = h1 / h0;
        let hmh = h1 * h0;
        total += hph / 6.0
            * ((2.0 - hdh) * f[i] + (hph * hph / hmh) * f[i + 1] + (2.0 - 1.0 / hdh) * f[i + 2]);
        i += 2;
    }
    if n % 2 == 1 {
        let (h0, h1) = (h[n - 2], h[n - 1]);
        let alpha = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        let beta = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
        let eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        total += alpha * f[n] + beta * f[n - 1] - eta * f[n - 2];
    }
    total
}
