//! Hopf projection `S³ → S²`, the right circle action, horizontal lifts of
//! base curves, holonomy, and shortest loops with prescribed holonomy.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::connect::enumerate_to_fiber;
use crate::error::{Error, Result};
use crate::geodesics::{geodesic_bc, geodesic_bc_velocity, GeodesicParam};
use crate::group::{frame_at, quat_mul, S3Point, TangentVector, Vec4};
use crate::ode::{dopri5, OdeOptions, OutputGrid};

pub type Vec3 = [f64; 3];

/// Largest chord allowed between consecutive loop samples.
pub const MAX_CHORD: f64 = 0.05;
/// Tolerance for `c(0) = c(1)` on loops.
pub const CLOSURE_TOL: f64 = 1e-10;
/// Tolerance for `h(x0) = c(0)`.
pub const BASE_MATCH_TOL: f64 = 1e-8;

fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

fn dist3(a: &Vec3, b: &Vec3) -> f64 {
    norm3(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec3", into = "Vec3")]
pub struct S2Point(Vec3);

impl S2Point {
    pub fn new(u: Vec3) -> Result<Self> {
        let norm = norm3(&u);
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitInput { norm, tol: 1e-12 });
        }
        Ok(S2Point(u))
    }

    pub fn normalized(u: Vec3) -> Result<Self> {
        let norm = norm3(&u);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NonUnitInput { norm, tol: 1e-12 });
        }
        Ok(S2Point(u.map(|v| v / norm)))
    }

    pub fn as_array(&self) -> &Vec3 {
        &self.0
    }

    /// Great-circle distance.
    pub fn angle_to(&self, other: &S2Point) -> f64 {
        let cross = [
            self.0[1] * other.0[2] - self.0[2] * other.0[1],
            self.0[2] * other.0[0] - self.0[0] * other.0[2],
            self.0[0] * other.0[1] - self.0[1] * other.0[0],
        ];
        norm3(&cross).atan2(dot3(&self.0, &other.0))
    }
}

impl TryFrom<Vec3> for S2Point {
    type Error = Error;
    fn try_from(u: Vec3) -> Result<Self> {
        S2Point::new(u)
    }
}

impl From<S2Point> for Vec3 {
    fn from(p: S2Point) -> Vec3 {
        p.0
    }
}

fn hopf_raw(x: &Vec4) -> Vec3 {
    let [x1, x2, x3, x4] = *x;
    [
        x1 * x1 + x2 * x2 - x3 * x3 - x4 * x4,
        2.0 * (x1 * x4 + x2 * x3),
        2.0 * (x2 * x4 - x1 * x3),
    ]
}

/// `h(x) = (x1² + x2² - x3² - x4², 2(x1 x4 + x2 x3), 2(x2 x4 - x1 x3))`.
pub fn hopf_map(x: &S3Point) -> S2Point {
    S2Point(hopf_raw(x.as_array()))
}

/// Jacobian of `h` at `x` (rows are the gradients of the components).
pub fn hopf_jacobian(x: &S3Point) -> [Vec4; 3] {
    let [x1, x2, x3, x4] = *x.as_array();
    [
        [2.0 * x1, 2.0 * x2, -2.0 * x3, -2.0 * x4],
        [2.0 * x4, 2.0 * x3, 2.0 * x2, 2.0 * x1],
        [-2.0 * x3, 2.0 * x4, -2.0 * x1, 2.0 * x2],
    ]
}

fn jac_apply(j: &[Vec4; 3], v: &Vec4) -> Vec3 {
    j.map(|row| row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3])
}

/// `dh_x(v)`.
pub fn hopf_differential(x: &S3Point, v: &TangentVector) -> Vec3 {
    jac_apply(&hopf_jacobian(x), &v.0)
}

/// `q ∘ e^{it}`, which moves `(ξ1, ξ2, η)` to `(ξ1 + t, ξ2 - t, η)`.
pub fn circle_action(q: &S3Point, t: f64) -> S3Point {
    let (s, c) = t.sin_cos();
    quat_mul(q, &S3Point::new(c, s, 0.0, 0.0).expect("unit"))
}

/// Metric of `S³` in the chart order `(η, ξ1, ξ2)`: `diag(1, cos²η, sin²η)`.
pub fn bundle_metric_matrix(eta: f64) -> [[f64; 3]; 3] {
    let (s, c) = eta.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c * c, 0.0], [0.0, 0.0, s * s]]
}

/// A piecewise-smooth curve on `S²`.
///
/// `breakpoints` are the ends of the smooth pieces (and the points where a
/// lift is reported); `velocity` is taken from piece `seg`, which matters at
/// the shared endpoints.
pub trait BaseCurve {
    fn breakpoints(&self) -> &[f64];
    fn point(&self, t: f64) -> Vec3;
    fn velocity(&self, seg: usize, t: f64) -> Vec3;

    fn is_closed(&self) -> bool {
        let bp = self.breakpoints();
        let (a, b) = (bp[0], bp[bp.len() - 1]);
        dist3(&self.point(a), &self.point(b)) <= CLOSURE_TOL
    }
}

/// Samples `(t, u)` on `S²` joined by great-circle arcs.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    t: Vec<f64>,
    u: Vec<S2Point>,
}

/// Loops are sampled curves with matching ends, checked where used.
pub type LoopOnS2 = SampledCurve;

impl SampledCurve {
    /// Builds the curve, inserting great-circle midpoints until every chord
    /// is at most [`MAX_CHORD`].
    pub fn new(samples: Vec<(f64, S2Point)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::EmptyInput("a curve needs at least two samples"));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidParam("curve parameter must be strictly increasing".into()));
        }
        let mut t = vec![samples[0].0];
        let mut u = vec![samples[0].1];
        for w in samples.windows(2) {
            let (t0, a) = w[0];
            let (t1, b) = w[1];
            let omega = a.angle_to(&b);
            if omega > PI - 1e-6 {
                return Err(Error::ResolutionTooCoarse(format!(
                    "samples at t = {t0} and t = {t1} are antipodal"
                )));
            }
            let chord = 2.0 * (omega / 2.0).sin();
            let pieces = (chord / MAX_CHORD).ceil().max(1.0) as usize;
            for p in 1..=pieces {
                let tau = p as f64 / pieces as f64;
                t.push(if p == pieces { t1 } else { t0 + tau * (t1 - t0) });
                u.push(if p == pieces { b } else { S2Point(slerp(a.as_array(), b.as_array(), omega, tau)) });
            }
        }
        Ok(SampledCurve { t, u })
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, S2Point)> + '_ {
        self.t.iter().copied().zip(self.u.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Sum of great-circle arcs between samples.
    pub fn arc_length(&self) -> f64 {
        self.u.windows(2).map(|w| w[0].angle_to(&w[1])).sum()
    }

    fn segment(&self, t: f64) -> usize {
        match self.t.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(self.t.len() - 2),
            Err(i) => i.clamp(1, self.t.len() - 1) - 1,
        }
    }
}

fn slerp(a: &Vec3, b: &Vec3, omega: f64, tau: f64) -> Vec3 {
    if omega < 1e-12 {
        let v = [0, 1, 2].map(|k| a[k] + tau * (b[k] - a[k]));
        let n = norm3(&v);
        return v.map(|x| x / n);
    }
    let (wa, wb) = (((1.0 - tau) * omega).sin(), (tau * omega).sin());
    let s = omega.sin();
    [0, 1, 2].map(|k| (wa * a[k] + wb * b[k]) / s)
}

impl BaseCurve for SampledCurve {
    fn breakpoints(&self) -> &[f64] {
        &self.t
    }

    fn point(&self, t: f64) -> Vec3 {
        let i = self.segment(t);
        let (a, b) = (self.u[i].as_array(), self.u[i + 1].as_array());
        let tau = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        slerp(a, b, self.u[i].angle_to(&self.u[i + 1]), tau)
    }

    fn velocity(&self, seg: usize, t: f64) -> Vec3 {
        let (a, b) = (self.u[seg].as_array(), self.u[seg + 1].as_array());
        let dt = self.t[seg + 1] - self.t[seg];
        let omega = self.u[seg].angle_to(&self.u[seg + 1]);
        if omega < 1e-12 {
            return [0, 1, 2].map(|k| (b[k] - a[k]) / dt);
        }
        let tau = (t - self.t[seg]) / dt;
        let (ca, cb) = (((1.0 - tau) * omega).cos(), (tau * omega).cos());
        let f = omega / (omega.sin() * dt);
        [0, 1, 2].map(|k| f * (cb * b[k] - ca * a[k]))
    }
}

/// A smooth curve given by closures, reported at `breakpoints`.
pub struct ParamCurve {
    point: Box<dyn Fn(f64) -> Vec3 + Send + Sync>,
    velocity: Box<dyn Fn(f64) -> Vec3 + Send + Sync>,
    breakpoints: Vec<f64>,
}

impl ParamCurve {
    /// Curve on `[t0, t1]` reported at `samples + 1` uniform points.
    pub fn new(
        point: impl Fn(f64) -> Vec3 + Send + Sync + 'static,
        velocity: impl Fn(f64) -> Vec3 + Send + Sync + 'static,
        (t0, t1): (f64, f64),
        samples: usize,
    ) -> Result<Self> {
        if !(t1 > t0) || samples == 0 {
            return Err(Error::InvalidParam("need t1 > t0 and at least one interval".into()));
        }
        let breakpoints = (0..=samples)
            .map(|i| if i == samples { t1 } else { t0 + (t1 - t0) * i as f64 / samples as f64 })
            .collect();
        Ok(ParamCurve {
            point: Box::new(point),
            velocity: Box::new(velocity),
            breakpoints,
        })
    }

    /// `t ↦ h(γ(t s_end))`, `t ∈ [0, 1]`, for a closed-form geodesic `γ`.
    pub fn projected_geodesic(param: GeodesicParam, s_end: f64, samples: usize) -> Result<Self> {
        Self::new(
            move |t| *hopf_map(&geodesic_bc(&param, t * s_end)).as_array(),
            move |t| {
                let s = t * s_end;
                let v = hopf_differential(&geodesic_bc(&param, s), &geodesic_bc_velocity(&param, s));
                v.map(|c| c * s_end)
            },
            (0.0, 1.0),
            samples,
        )
    }

    /// Length `∫ |ċ| dt` by composite Simpson over `n` (even) intervals.
    pub fn arc_length(&self, n: usize) -> f64 {
        let n = n.max(2) & !1;
        let (a, b) = (self.breakpoints[0], *self.breakpoints.last().unwrap());
        let h = (b - a) / n as f64;
        let f = |i: usize| norm3(&(self.velocity)(a + h * i as f64));
        let inner: f64 = (1..n).map(|i| if i % 2 == 1 { 4.0 * f(i) } else { 2.0 * f(i) }).sum();
        h / 3.0 * (f(0) + inner + f(n))
    }
}

impl BaseCurve for ParamCurve {
    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
    fn point(&self, t: f64) -> Vec3 {
        (self.point)(t)
    }
    fn velocity(&self, _seg: usize, t: f64) -> Vec3 {
        (self.velocity)(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftOptions {
    pub ode: OdeOptions,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            ode: OdeOptions {
                rel_tol: 1e-12,
                abs_tol: 1e-14,
                max_step: 0.05,
                max_steps: 2_000_000,
            },
        }
    }
}

/// Horizontal lift reported at the curve's breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Lift {
    pub t: Vec<f64>,
    pub points: Vec<S3Point>,
    /// Sub-Riemannian length `∫ sqrt(a² + b²) dt` of the lift.
    pub length: f64,
    /// Largest `|h(γ(t)) - c(t)|` over the reported points.
    pub projection_error: f64,
}

/// Frame velocity `(a, b)` with `dh(aX + bY) = ċ` (least squares over the
/// 2×2 normal equations).
fn lift_coeffs(x: &S3Point, cdot: &Vec3) -> (f64, f64, Vec4) {
    let frame = frame_at(x);
    let jac = hopf_jacobian(x);
    let p = jac_apply(&jac, &frame.x.0);
    let q = jac_apply(&jac, &frame.y.0);
    let (g11, g12, g22) = (dot3(&p, &p), dot3(&p, &q), dot3(&q, &q));
    let (r1, r2) = (dot3(&p, cdot), dot3(&q, cdot));
    let det = g11 * g22 - g12 * g12;
    let a = (g22 * r1 - g12 * r2) / det;
    let b = (g11 * r2 - g12 * r1) / det;
    let v = [0, 1, 2, 3].map(|k| a * frame.x.0[k] + b * frame.y.0[k]);
    (a, b, v)
}

/// Horizontal lift of `curve` starting at `x0`.
pub fn horizontal_lift(curve: &dyn BaseCurve, x0: &S3Point, opts: &LiftOptions) -> Result<Lift> {
    let bp = curve.breakpoints();
    let start = curve.point(bp[0]);
    let distance = dist3(hopf_map(x0).as_array(), &start);
    if distance > BASE_MATCH_TOL {
        return Err(Error::BasePointMismatch { distance });
    }
    let mut t_out = vec![bp[0]];
    let mut points = vec![*x0];
    let mut state = [x0.as_array()[0], x0.as_array()[1], x0.as_array()[2], x0.as_array()[3], 0.0];
    let mut projection_error = 0.0_f64;
    for seg in 0..bp.len() - 1 {
        let rhs = |t: f64, y: &[f64; 5]| -> Result<[f64; 5]> {
            let x = S3Point::normalized([y[0], y[1], y[2], y[3]])?;
            let (a, b, v) = lift_coeffs(&x, &curve.velocity(seg, t));
            Ok([v[0], v[1], v[2], v[3], a.hypot(b)])
        };
        let mut end = state;
        dopri5(rhs, bp[seg], state, bp[seg + 1], &opts.ode, OutputGrid::Steps, |_, y| {
            end = *y;
            Ok(())
        })?;
        state = end;
        let x = S3Point::normalized([state[0], state[1], state[2], state[3]])?;
        projection_error = projection_error.max(dist3(hopf_map(&x).as_array(), &curve.point(bp[seg + 1])));
        t_out.push(bp[seg + 1]);
        points.push(x);
    }
    Ok(Lift {
        t: t_out,
        points,
        length: state[4],
        projection_error,
    })
}

/// Element `e^{i angle}` of the structure group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyElement {
    pub angle: f64,
}

impl HolonomyElement {
    pub fn new(angle: f64) -> Self {
        let a = angle.rem_euclid(TAU);
        HolonomyElement {
            angle: if a >= TAU { 0.0 } else { a },
        }
    }

    /// Holonomy of the concatenated loop.
    pub fn compose(&self, other: &HolonomyElement) -> HolonomyElement {
        HolonomyElement::new(self.angle + other.angle)
    }

    /// Distance to `other` on the circle.
    pub fn distance(&self, other: &HolonomyElement) -> f64 {
        let d = (self.angle - other.angle).rem_euclid(TAU);
        d.min(TAU - d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyReport {
    pub angle: f64,
    /// Largest of the off-fiber part of `x0⁻¹ γ(1)` and the projection error.
    pub lift_residual: f64,
    /// Sub-Riemannian length of the lift.
    pub length: f64,
}

/// Holonomy of a closed base curve: the `l` with `γ(1) = x0 ∘ l`.
pub fn holonomy(curve: &dyn BaseCurve, x0: &S3Point, opts: &LiftOptions) -> Result<HolonomyReport> {
    if !curve.is_closed() {
        return Err(Error::InvalidParam("base curve is not closed".into()));
    }
    let lift = horizontal_lift(curve, x0, opts)?;
    let end = lift.points.last().unwrap();
    let q = quat_mul(&x0.inverse(), end).to_array();
    Ok(HolonomyReport {
        angle: HolonomyElement::new(q[1].atan2(q[0])).angle,
        lift_residual: q[2].hypot(q[3]).max(lift.projection_error),
        length: lift.length,
    })
}

/// Projection of a sampled path in `S³`.
pub fn project_path(points: &[S3Point]) -> Vec<S2Point> {
    points.iter().map(hopf_map).collect()
}

#[derive(Clone, Debug)]
pub struct ShortestLoop {
    /// Projection of the minimizing geodesic, sampled on `t ∈ [0, 1]`.
    pub loop_samples: SampledCurve,
    pub geodesic: GeodesicParam,
    pub s_arc: f64,
    pub paper_length: f64,
    /// Family index attaining the minimum.
    pub n: i64,
    /// `|holonomy - ω|` of the analytically lifted loop.
    pub holonomy_error: f64,
}

/// Shortest loop through `h(1, 0, 0, 0)` whose horizontal lift from the
/// identity ends at `e^{iω}`: the minimum of the fiber-connecting family.
pub fn shortest_loop_with_holonomy(omega: f64, samples: usize) -> Result<ShortestLoop> {
    // The minimum sits at n = 1 for ω > 0 and n = 2 for ω = 0.
    let family = enumerate_to_fiber(omega, 3)?;
    let best = family
        .iter()
        .min_by(|a, b| a.s_arc.total_cmp(&b.s_arc))
        .copied()
        .ok_or(Error::NoSolutionInBudget { branch_max: 3 })?;
    let param = best.param();
    let curve = ParamCurve::projected_geodesic(param, best.s_arc, samples.max(2))?;
    let report = holonomy(&curve, &S3Point::IDENTITY, &LiftOptions::default())?;
    let holonomy_error = HolonomyElement::new(report.angle).distance(&HolonomyElement::new(omega));
    let loop_samples = SampledCurve::new(
        curve
            .breakpoints()
            .iter()
            .map(|&t| Ok((t, S2Point::normalized(curve.point(t))?)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    Ok(ShortestLoop {
        loop_samples,
        geodesic: param,
        s_arc: best.s_arc,
        paper_length: best.paper_length,
        n: best.branch_index,
        holonomy_error,
    })
}
