//! Geodesics from the identity to a given point: the vertical-fiber family,
//! the scalar equation for `B`, a branch-wise root scan and a brute-force
//! counting oracle.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesics::{closed_form_zw, geodesic_bc, GeodesicParam};
use crate::group::{norm4, sub4, S3Point, Vec4};

/// Tolerance below which `ρ` counts as zero (target on the vertical line).
pub const VERTICAL_EPS: f64 = 1e-12;
/// Tolerance below which `sin α` counts as zero (target on the horizontal sphere).
pub const HORIZONTAL_EPS: f64 = 1e-12;
pub const BISECTION_TOL: f64 = 1e-12;
pub const DEDUPE_TOL: f64 = 1e-8;
pub const FIBER_VERIFY_TOL: f64 = 1e-9;
/// Cap on the `1/r²` weight of the scan density near `z = 0`.
const MAX_INV_R2: f64 = 1e4;

/// Polar form of a target point: `z1 = r e^{iα}`, `w1 = ρ e^{iφ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetPoint {
    pub r: f64,
    pub alpha: f64,
    pub rho: f64,
    pub phi: f64,
}

fn wrap_pi(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

impl TargetPoint {
    pub fn new(r: f64, alpha: f64, rho: f64, phi: f64) -> Result<Self> {
        if !(r >= 0.0 && rho >= 0.0) || ((r * r + rho * rho) - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitInput {
                norm: r.hypot(rho),
                tol: 1e-12,
            });
        }
        if !(alpha.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidParam("target angles must be finite".into()));
        }
        Ok(TargetPoint {
            r,
            alpha: wrap_pi(alpha),
            rho,
            phi: wrap_pi(phi),
        })
    }

    pub fn from_point(x: &S3Point) -> Self {
        let (z, w) = (x.z(), x.w());
        TargetPoint {
            r: z.norm(),
            alpha: wrap_pi(z.arg()),
            rho: w.norm(),
            phi: wrap_pi(w.arg()),
        }
    }

    pub fn to_point(&self) -> S3Point {
        let z = Complex64::from_polar(self.r, self.alpha);
        let w = Complex64::from_polar(self.rho, self.phi);
        S3Point::normalized([z.re, z.im, w.re, w.im]).expect("polar target is nonzero")
    }

    /// `sqrt(1/ρ² - 1)`, the largest `|B|` for which `|w| = ρ` is reachable.
    pub fn b_limit(&self) -> f64 {
        ((1.0 - self.rho) * (1.0 + self.rho)).max(0.0).sqrt() / self.rho
    }
}

/// One geodesic from the identity reaching a target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSolution {
    #[serde(rename = "B")]
    pub b: f64,
    pub theta: f64,
    /// Arc length for the unit-speed parametrization, `2H = 1`.
    pub s_arc: f64,
    /// The same length under the normalization `H = 1`: `s_arc / √2`.
    pub paper_length: f64,
    pub branch_index: i64,
    pub residual: f64,
}

impl GeodesicSolution {
    fn new(b: f64, theta: f64, s_arc: f64, branch_index: i64, residual: f64) -> Self {
        GeodesicSolution {
            b,
            theta,
            s_arc,
            paper_length: s_arc / std::f64::consts::SQRT_2,
            branch_index,
            residual,
        }
    }

    pub fn param(&self) -> GeodesicParam {
        GeodesicParam::at_identity(self.b, self.theta)
    }
}

fn endpoint_residual(b: f64, theta: f64, s: f64, target: &Vec4) -> f64 {
    let end = geodesic_bc(&GeodesicParam::at_identity(b, theta), s);
    norm4(&sub4(end.as_array(), target))
}

/// All geodesics of the family with `s sqrt(1 + B²) = π n`, `1 <= n <= n_max`,
/// ending at `(cos ω, sin ω, 0, 0)`.
///
/// `w` vanishes exactly when `k s = π n`; then `z = e^{i(π n - B s)}`, so the
/// admissible `B s = π n - ω - 2π j` with `|B s| < π n`. The heading is free
/// on these solutions and is reported as 0. `branch_index` carries `n`.
pub fn enumerate_to_fiber(omega: f64, n_max: u32) -> Result<Vec<GeodesicSolution>> {
    if !(omega.is_finite() && (0.0..TAU).contains(&omega)) {
        return Err(Error::InvalidOmega(omega));
    }
    if n_max == 0 {
        return Err(Error::InvalidParam("n_max must be at least 1".into()));
    }
    let target = [omega.cos(), omega.sin(), 0.0, 0.0];
    let mut out = Vec::new();
    for n in 1..=n_max {
        let pn = PI * n as f64;
        let lo = ((pn - omega - pn) / TAU).floor() as i64;
        let hi = ((pn - omega + pn) / TAU).ceil() as i64;
        for j in lo..=hi {
            let beta = pn - omega - TAU * j as f64;
            if beta.abs() >= pn {
                continue;
            }
            let s = ((pn - beta) * (pn + beta)).sqrt();
            let b = beta / s;
            let residual = endpoint_residual(b, 0.0, s, &target);
            if residual <= FIBER_VERIFY_TOL {
                out.push(GeodesicSolution::new(b, 0.0, s, n as i64, residual));
            }
        }
    }
    out.sort_by(|a, b| a.s_arc.total_cmp(&b.s_arc).then(a.b.total_cmp(&b.b)));
    Ok(out)
}

/// Left side of the scalar equation for `B` on the first-quadrant branch:
///
/// `sin((arctan(Bρ / sqrt(1 - (1 + B²)ρ²)) - α) · k / B) - ρ k`, `k = sqrt(1 + B²)`.
///
/// At `B = 0` the sine argument has no limit; the value returned there is `-ρ`.
pub fn param_equation_lhs(b: f64, target: &TargetPoint) -> Result<f64> {
    let rho = target.rho;
    if !(rho > 0.0) {
        return Err(Error::VerticalLineCase);
    }
    let limit = target.b_limit();
    if !b.is_finite() || b.abs() >= limit {
        return Err(Error::DomainError { b, limit });
    }
    if b == 0.0 {
        return Ok(-rho);
    }
    let k = b.hypot(1.0);
    let root = (1.0 - k * k * rho * rho).max(0.0).sqrt();
    let angle = (b * rho).atan2(root) - target.alpha;
    Ok((angle * k / b).sin() - rho * k)
}

/// Lower bound for the positive first-branch roots of [`param_equation_lhs`]:
/// `min{α sqrt(1-ρ²) / (ρ(√2 - sqrt(1-ρ²))), sqrt((1/ρ² - 1)/2)}`.
pub fn positive_root_lower_bound(target: &TargetPoint) -> f64 {
    let rho = target.rho;
    let r = (1.0 - rho * rho).max(0.0).sqrt();
    let near = target.alpha * r / (rho * (std::f64::consts::SQRT_2 - r));
    // B² = (1/ρ² - 1)/2 is where (1 + B²)ρ² = (1 + ρ²)/2.
    let far = ((1.0 / (rho * rho) - 1.0) / 2.0).sqrt();
    near.min(far)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumerateOptions {
    /// Scan resolution: bound on the change of the phase mismatch between
    /// adjacent `B` nodes (up to a constant).
    pub grid_step: f64,
    pub verify_tol: f64,
    /// Arrival branches `k s ∈ [π m, π m + π)` for `0 <= m <= branch_max`.
    pub branch_max: u32,
    /// When set, only solutions with `s_arc <= s_max` are returned and
    /// `branch_max` is raised as needed to cover them.
    pub s_max: Option<f64>,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            grid_step: 1e-3,
            verify_tol: 1e-9,
            branch_max: 8,
            s_max: None,
        }
    }
}

/// Arrival parameter `k s` on the branch `(m, upper)` for a given `B`.
#[inline]
fn branch_ks(k: f64, rho: f64, m: u32, upper: bool) -> f64 {
    let a = (rho * k).min(1.0).asin();
    let base = if upper { PI - a } else { a };
    base + PI * m as f64
}

/// `arg z(s) - α` wrapped to `[-π, π)`, with `s` on the given branch.
#[inline]
fn branch_mismatch(b: f64, target: &TargetPoint, m: u32, upper: bool) -> (f64, f64) {
    let k = b.hypot(1.0);
    let s = branch_ks(k, target.rho, m, upper) / k;
    let (z, _) = closed_form_zw(b, 0.0, s);
    (wrap_pi(z.arg() - target.alpha), s)
}

fn bisect(mut lo: f64, mut hi: f64, mut f_lo: f64, f: impl Fn(f64) -> f64) -> f64 {
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Node density of the `B` scan, integrated: the mismatch on any branch has
/// derivative at most `s_cap / k² + c_k / k³ + c_e / sqrt(B_max² - B²)`, so
/// nodes uniform in this primitive bound the change per step by `grid_step`
/// independently of `B_max`.
struct ScanDensity {
    b_max: f64,
    /// Weight of `1/k²`: the arc-length cap.
    s_cap: f64,
    /// Weight of `1/k³`: `1/r²`, plus the arrival cap when no arc cap is set.
    c_k: f64,
    /// Weight of the endpoint term.
    c_e: f64,
}

impl ScanDensity {
    fn new(target: &TargetPoint, s_max: Option<f64>, branch_max: u32) -> Self {
        let inv_r2 = (1.0 / (target.r * target.r)).min(MAX_INV_R2);
        let (s_cap, ks_cap) = match s_max {
            Some(s) => (s, 0.0),
            None => (0.0, PI * (branch_max as f64 + 1.0)),
        };
        ScanDensity {
            b_max: target.b_limit(),
            s_cap,
            c_k: inv_r2 + ks_cap,
            c_e: 1.0 + inv_r2,
        }
    }

    fn primitive(&self, b: f64) -> f64 {
        let k = b.hypot(1.0);
        self.s_cap * b.atan() + self.c_k * b / k + self.c_e * (b / self.b_max).clamp(-1.0, 1.0).asin()
    }

    fn density(&self, b: f64) -> f64 {
        let k2 = 1.0 + b * b;
        let edge = ((self.b_max - b) * (self.b_max + b)).max(0.0).sqrt();
        self.s_cap / k2 + self.c_k / (k2 * k2.sqrt()) + self.c_e / edge
    }

    fn nodes(&self, grid_step: f64) -> Vec<f64> {
        let b_max = self.b_max;
        let (lo, hi) = (self.primitive(-b_max), self.primitive(b_max));
        let count = (((hi - lo) / grid_step).ceil() as usize).max(16);
        let mut out = Vec::with_capacity(count + 1);
        out.push(-b_max);
        let mut left = -b_max;
        for i in 1..count {
            let goal = lo + (hi - lo) * i as f64 / count as f64;
            // Safeguarded Newton on the bracket [left, b_max].
            let (mut a, mut c) = (left, b_max);
            let mut x = left;
            for _ in 0..100 {
                let f = self.primitive(x) - goal;
                if f < 0.0 {
                    a = x;
                } else {
                    c = x;
                }
                let mut next = x - f / self.density(x);
                if !(next > a && next < c) {
                    next = 0.5 * (a + c);
                }
                if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || c - a <= 1e-15 * (1.0 + a.abs()) {
                    x = next;
                    break;
                }
                x = next;
            }
            left = x;
            out.push(left);
        }
        out.push(b_max);
        out
    }
}

/// Index ranges of `nodes` (sorted) covering `|B| >= b_min`, with one node of
/// margin; a single range when `b_min` is zero.
fn outer_ranges(nodes: &[f64], b_min: f64) -> Vec<std::ops::Range<usize>> {
    if b_min <= 0.0 {
        return vec![0..nodes.len()];
    }
    let neg_end = nodes.partition_point(|&b| b <= -b_min);
    let pos_start = nodes.partition_point(|&b| b < b_min);
    let mut out = Vec::new();
    if neg_end > 0 {
        out.push(0..(neg_end + 1).min(nodes.len()));
    }
    if pos_start < nodes.len() {
        out.push(pos_start.saturating_sub(1)..nodes.len());
    }
    out
}

fn scan_branch(target: &TargetPoint, nodes: &[f64], m: u32, upper: bool) -> Vec<(f64, f64)> {
    let f = |b: f64| branch_mismatch(b, target, m, upper).0;
    let values: Vec<f64> = nodes.iter().map(|&b| f(b)).collect();
    let mut roots = Vec::new();
    for i in 0..nodes.len() - 1 {
        let (f0, f1) = (values[i], values[i + 1]);
        if f0 == 0.0 {
            roots.push(nodes[i]);
            continue;
        }
        if (f0 < 0.0) != (f1 < 0.0) && f1 != 0.0 && (f1 - f0).abs() < PI {
            roots.push(bisect(nodes[i], nodes[i + 1], f0, f));
        }
    }
    if *values.last().unwrap() == 0.0 {
        roots.push(*nodes.last().unwrap());
    }
    roots
        .into_iter()
        .map(|b| (b, branch_mismatch(b, target, m, upper).1))
        .collect()
}

/// All geodesics from the identity to a target off the vertical line and off
/// the horizontal sphere, over the arrival branches `0..=branch_max`.
///
/// Each branch fixes `k s` as a function of `B` so that `|w(s)| = ρ`; sign
/// changes of `arg z(s) - α` along the `B` scan are bisected, `θ` is then read
/// off from `arg w`. Every solution is checked by forward evaluation.
/// `branch_index` is the quarter-period index `floor(2 k s / π)`; index 0 is
/// the first-quadrant branch.
pub fn enumerate_between(target: &TargetPoint, opts: &EnumerateOptions) -> Result<Vec<GeodesicSolution>> {
    if !(opts.grid_step.is_finite() && opts.grid_step > 0.0) {
        return Err(Error::InvalidParam("grid_step must be positive".into()));
    }
    if !(opts.verify_tol.is_finite() && opts.verify_tol > 0.0) {
        return Err(Error::InvalidParam("verify_tol must be positive".into()));
    }
    if let Some(s_max) = opts.s_max {
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(Error::InvalidParam("s_max must be positive".into()));
        }
    }
    if target.rho < VERTICAL_EPS {
        return Err(Error::VerticalLineCase);
    }
    if target.alpha.sin().abs() < HORIZONTAL_EPS || target.r < HORIZONTAL_EPS {
        return Err(Error::HorizontalSphereCase);
    }
    let b_max = target.b_limit();
    let branch_max = match opts.s_max {
        // k s <= s_max / ρ on every admissible B.
        Some(s_max) => opts.branch_max.max((s_max / (target.rho * PI)).ceil() as u32),
        None => opts.branch_max,
    };
    let nodes = ScanDensity::new(target, opts.s_max, branch_max).nodes(opts.grid_step);
    let goal = target.to_point().to_array();

    let branches: Vec<(u32, bool)> = (0..=branch_max).flat_map(|m| [(m, false), (m, true)]).collect();
    let mut found: Vec<GeodesicSolution> = branches
        .par_iter()
        .flat_map_iter(|&(m, upper)| {
            // k s >= π m (+ π/2 on the upper branch) bounds k from below.
            let b_min = match opts.s_max {
                Some(s_max) => {
                    let ks_min = PI * m as f64 + if upper { FRAC_PI_2 } else { 0.0 };
                    let k_min = ks_min / s_max;
                    if k_min > b_max.hypot(1.0) {
                        return Vec::new();
                    }
                    (k_min * k_min - 1.0).max(0.0).sqrt()
                }
                None => 0.0,
            };
            outer_ranges(&nodes, b_min)
                .into_iter()
                .flat_map(|range| scan_branch(target, &nodes[range], m, upper))
                .filter_map(|(b, s)| {
                    if let Some(s_max) = opts.s_max {
                        if s > s_max {
                            return None;
                        }
                    }
                    let k = b.hypot(1.0);
                    let ks = k * s;
                    let (_, w) = closed_form_zw(b, 0.0, s);
                    let theta = wrap_pi(target.phi - w.arg());
                    let residual = endpoint_residual(b, theta, s, &goal);
                    let index = (2.0 * ks / PI).floor() as i64;
                    (residual <= opts.verify_tol && s > 0.0)
                        .then(|| GeodesicSolution::new(b, theta, s, index, residual))
                })
                .collect::<Vec<_>>()
        })
        .collect();

    found.sort_by(|a, b| a.s_arc.total_cmp(&b.s_arc).then(a.b.total_cmp(&b.b)));
    let mut out: Vec<GeodesicSolution> = Vec::with_capacity(found.len());
    for sol in found {
        let dup = out
            .iter()
            .rev()
            .take_while(|o| sol.s_arc - o.s_arc <= DEDUPE_TOL)
            .any(|o| (o.b - sol.b).abs() <= DEDUPE_TOL);
        if !dup {
            out.push(sol);
        }
    }
    if out.is_empty() {
        return Err(Error::NoSolutionInBudget { branch_max: branch_max as usize });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BruteForceOptions {
    /// Cell size in `atan B` and in `u = k s`.
    pub grid_step: f64,
    pub s_max: f64,
    /// Half-width of the `B` window; defaults to `sqrt(1/ρ² - 1)`, and must
    /// be given for targets on the vertical line.
    pub b_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    pub count: usize,
    /// `(B, s)` of each distinct solution, sorted by `s`.
    pub witnesses: Vec<(f64, f64)>,
}

/// Endpoint residuals in the coordinates `(B, u = k s)`. Their common zeros
/// with `Re(z e^{-iα}) > 0` are the solutions: `f1 = |w|² - ρ²` (or `sin u`
/// on the vertical line, where `|w|²` does not change sign) and
/// `f2 = Im(z e^{-iα})`, `z = (cos u + i (B/k) sin u) e^{-i B u / k}`.
struct OracleMap {
    rho: f64,
    alpha: f64,
    vertical: bool,
}

impl OracleMap {
    #[inline]
    fn f1(&self, k: f64, sin_u: f64) -> f64 {
        if self.vertical {
            sin_u
        } else {
            (sin_u / k).powi(2) - self.rho * self.rho
        }
    }

    #[inline]
    fn z_rot(&self, b: f64, k: f64, sin_u: f64, cos_u: f64, u: f64) -> Complex64 {
        let beta = b / k;
        Complex64::new(cos_u, beta * sin_u) * Complex64::from_polar(1.0, -(beta * u + self.alpha))
    }

    fn eval(&self, b: f64, u: f64) -> (f64, f64, f64) {
        let k = b.hypot(1.0);
        let (sn, cs) = u.sin_cos();
        let z = self.z_rot(b, k, sn, cs, u);
        (self.f1(k, sn), z.im, z.re)
    }

    fn newton(&self, b0: f64, u0: f64) -> Option<(f64, f64)> {
        let (mut b, mut u) = (b0, u0);
        let h = 1e-7;
        for _ in 0..50 {
            let (f1, f2, _) = self.eval(b, u);
            if f1.abs().max(f2.abs()) < 1e-15 {
                break;
            }
            let (a1, a2, _) = self.eval(b + h, u);
            let (c1, c2, _) = self.eval(b - h, u);
            let (d1, d2, _) = self.eval(b, u + h);
            let (e1, e2, _) = self.eval(b, u - h);
            let (j11, j21) = ((a1 - c1) / (2.0 * h), (a2 - c2) / (2.0 * h));
            let (j12, j22) = ((d1 - e1) / (2.0 * h), (d2 - e2) / (2.0 * h));
            let det = j11 * j22 - j12 * j21;
            if det.abs() < 1e-300 {
                return None;
            }
            let db = (j22 * f1 - j12 * f2) / det;
            let du = (j11 * f2 - j21 * f1) / det;
            b -= db;
            u -= du;
            if !(b.is_finite() && u.is_finite()) {
                return None;
            }
            if db.abs().max(du.abs()) < 1e-15 {
                break;
            }
        }
        let (f1, f2, re) = self.eval(b, u);
        (f1.abs().max(f2.abs()) < 1e-10 && re > 0.0).then_some((b, u))
    }
}

/// Independent count of the geodesics from the identity to `target` with
/// `0 < s <= s_max`, by a dense cell scan of the forward map.
///
/// Cells are uniform in `(atan B, u)` with `u = k s <= k s_max`; at fixed
/// `u` the endpoint varies with `B` like `1/k²`, so this resolves the map
/// uniformly. Cells where both residuals change sign on the corners are
/// polished by Newton's method; a root is kept when it stays within one cell
/// of its seed and is new to within `1e-7` in `(B, s)`.
pub fn brute_force_count(target: &TargetPoint, opts: &BruteForceOptions) -> Result<BruteForceResult> {
    let h = opts.grid_step;
    if !(h.is_finite() && h > 0.0 && opts.s_max.is_finite() && opts.s_max > 0.0) {
        return Err(Error::InvalidParam("grid_step and s_max must be positive".into()));
    }
    let vertical = target.rho < VERTICAL_EPS;
    let b_max = match (opts.b_max, vertical) {
        (Some(b), _) if b.is_finite() && b > 0.0 => b,
        (None, false) => target.b_limit(),
        _ => return Err(Error::InvalidParam("b_max is required for targets on the vertical line".into())),
    };
    let map = OracleMap {
        rho: target.rho,
        alpha: target.alpha,
        vertical,
    };
    let v_max = b_max.atan();
    let nv = (2.0 * (v_max + h) / h).ceil() as usize;
    let b_at = |i: usize| (-v_max - h + i as f64 * h).clamp(-FRAC_PI_2 + 1e-12, FRAC_PI_2 - 1e-12).tan();
    let nu = (b_max.hypot(1.0) * opts.s_max / h).ceil() as usize + 2;
    let trig: Vec<(f64, f64)> = (0..=nu).map(|j| (j as f64 * h).sin_cos()).collect();
    let sign_change = |v: [f64; 4]| {
        let pos = v.iter().any(|x| *x > 0.0);
        let neg = v.iter().any(|x| *x < 0.0);
        (pos && neg) || v.contains(&0.0)
    };

    let mut roots: Vec<(f64, f64)> = (0..nv)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (b0, b1) = (b_at(i), b_at(i + 1));
            let (k0, k1) = (b0.hypot(1.0), b1.hypot(1.0));
            let cols = ((k0.max(k1) * opts.s_max / h).ceil() as usize + 1).min(nu);
            let mut local = Vec::new();
            for j in 0..cols {
                let (s0, s1) = (trig[j].0, trig[j + 1].0);
                let f1 = [map.f1(k0, s0), map.f1(k0, s1), map.f1(k1, s0), map.f1(k1, s1)];
                if !sign_change(f1) {
                    continue;
                }
                let (u0, u1) = (j as f64 * h, (j + 1) as f64 * h);
                let f2 = [
                    map.z_rot(b0, k0, s0, trig[j].1, u0).im,
                    map.z_rot(b0, k0, s1, trig[j + 1].1, u1).im,
                    map.z_rot(b1, k1, s0, trig[j].1, u0).im,
                    map.z_rot(b1, k1, s1, trig[j + 1].1, u1).im,
                ];
                if !sign_change(f2) {
                    continue;
                }
                let (vc, uc) = (-v_max - h + (i as f64 + 0.5) * h, u0 + 0.5 * h);
                if let Some((b, u)) = map.newton(vc.tan(), uc) {
                    if (b.atan() - vc).abs() <= 1.5 * h && (u - uc).abs() <= 1.5 * h {
                        local.push((b, u / b.hypot(1.0)));
                    }
                }
            }
            local
        })
        .collect();

    roots.retain(|&(b, s)| s > 1e-9 && s <= opts.s_max && b.abs() <= b_max + 1e-9);
    roots.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let mut witnesses: Vec<(f64, f64)> = Vec::new();
    for r in roots {
        if !witnesses
            .iter()
            .any(|w| (w.0 - r.0).abs() < 1e-7 && (w.1 - r.1).abs() < 1e-7)
        {
            witnesses.push(r);
        }
    }
    Ok(BruteForceResult {
        count: witnesses.len(),
        witnesses,
    })
}

/// JSON report of a connection query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectReport {
    pub target: TargetPoint,
    pub solutions: Vec<GeodesicSolution>,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_count: Option<usize>,
}

impl ConnectReport {
    pub fn new(target: TargetPoint, solutions: Vec<GeodesicSolution>, oracle_count: Option<usize>) -> Self {
        ConnectReport {
            target,
            count: solutions.len(),
            solutions,
            oracle_count,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forward_target(b: f64, theta: f64, s: f64) -> TargetPoint {
        TargetPoint::from_point(&geodesic_bc(&GeodesicParam::at_identity(b, theta), s))
    }

    #[test]
    fn target_polar_round_trip() {
        let x = S3Point::normalized([0.3, -0.4, 0.5, 0.2]).unwrap();
        let t = TargetPoint::from_point(&x);
        assert!((t.r * t.r + t.rho * t.rho - 1.0).abs() < 1e-12);
        let back = t.to_point();
        for k in 0..4 {
            assert!((back.as_array()[k] - x.as_array()[k]).abs() < 1e-15);
        }
        assert!(TargetPoint::new(0.5, 0.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn fiber_family_examples() {
        let sols = enumerate_to_fiber(0.0, 4).unwrap();
        let b0: Vec<_> = sols.iter().filter(|s| s.b == 0.0).collect();
        assert_eq!(b0.len(), 2);
        assert!((b0[0].s_arc - 2.0 * PI).abs() < 1e-15);
        assert!((b0[1].s_arc - 4.0 * PI).abs() < 1e-15);

        let w = FRAC_PI_2;
        let sols = enumerate_to_fiber(w, 2).unwrap();
        let s2 = (4.0 * PI * PI - w * w).sqrt();
        let hit = sols.iter().find(|s| s.branch_index == 2 && (s.s_arc - s2).abs() < 1e-12);
        let hit = hit.expect("even-n member present");
        assert!((hit.b + w / s2).abs() < 1e-12);
        assert!((s2 - 6.0837).abs() < 1e-4);
        for sol in &sols {
            let end = geodesic_bc(&sol.param(), sol.s_arc);
            assert!(end.w().norm() < 1e-9);
            assert!((end.z().norm() - 1.0).abs() < 1e-9);
            assert!(sol.residual <= 1e-9);
        }
    }

    #[test]
    fn fiber_family_rejects_bad_omega() {
        assert_eq!(enumerate_to_fiber(-0.1, 3).unwrap_err().name(), "InvalidOmega");
        assert_eq!(enumerate_to_fiber(TAU, 3).unwrap_err().name(), "InvalidOmega");
        assert!(enumerate_to_fiber(1.0, 0).is_err());
    }

    #[test]
    fn lhs_vanishes_at_forward_parameter() {
        // First-quadrant arrival: 0 < k s < π/2.
        let (b, s) = (0.7, 1.0);
        let t = forward_target(b, 0.3, s);
        assert!(param_equation_lhs(b, &t).unwrap().abs() < 1e-12);
        let below = param_equation_lhs(b - 1e-3, &t).unwrap();
        let above = param_equation_lhs(b + 1e-3, &t).unwrap();
        assert!(below * above < 0.0);
    }

    #[test]
    fn lhs_domain_and_edges() {
        let t = forward_target(0.7, 0.3, 1.0);
        let lim = t.b_limit();
        assert_eq!(param_equation_lhs(lim, &t).unwrap_err().name(), "DomainError");
        assert_eq!(param_equation_lhs(-lim * 1.5, &t).unwrap_err().name(), "DomainError");
        assert!(param_equation_lhs(lim * (1.0 - 1e-12), &t).unwrap() <= 1e-5);
        assert_eq!(param_equation_lhs(0.0, &t).unwrap(), -t.rho);
    }

    #[test]
    fn lhs_oscillates_near_zero() {
        let t = forward_target(0.7, 0.3, 1.0);
        for decade in 2..6 {
            let lo = 10f64.powi(-decade - 1);
            let vals: Vec<f64> = (0..=400)
                .map(|i| lo * 10f64.powf(i as f64 / 400.0))
                .map(|b| param_equation_lhs(b, &t).unwrap())
                .collect();
            let flips = vals.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
            assert!(flips >= 2, "decade {decade}: {flips} sign changes");
        }
    }

    #[test]
    fn enumerate_recovers_forward_parameter() {
        let (b, theta, s) = (0.7, 0.3, 1.2);
        let t = forward_target(b, theta, s);
        let sols = enumerate_between(&t, &EnumerateOptions::default()).unwrap();
        let hit = sols
            .iter()
            .find(|x| (x.b - b).abs() < 1e-8 && (x.s_arc - s).abs() < 1e-8)
            .expect("forward parameter recovered");
        assert!((wrap_pi(hit.theta - theta)).abs() < 1e-8);
        assert!(sols.windows(2).all(|w| w[0].s_arc <= w[1].s_arc));
        for sol in &sols {
            assert!(sol.residual <= 1e-9 && sol.s_arc > 0.0);
            assert!((sol.paper_length * std::f64::consts::SQRT_2 - sol.s_arc).abs() <= 4.0 * f64::EPSILON * sol.s_arc);
        }
    }

    #[test]
    fn enumerate_special_cases() {
        let vertical = TargetPoint::new(1.0, 0.4, 0.0, 0.0).unwrap();
        assert_eq!(
            enumerate_between(&vertical, &EnumerateOptions::default()).unwrap_err().name(),
            "VerticalLineCase"
        );
        let horizontal = TargetPoint::from_point(&S3Point::new(0.6, 0.0, 0.8, 0.0).unwrap());
        assert_eq!(
            enumerate_between(&horizontal, &EnumerateOptions::default()).unwrap_err().name(),
            "HorizontalSphereCase"
        );
    }

    #[test]
    fn enumerate_reports_exhausted_budget() {
        // Only reachable on late branches.
        let t = forward_target(0.3, 0.0, 40.0);
        let opts = EnumerateOptions {
            branch_max: 0,
            grid_step: 1e-2,
            ..Default::default()
        };
        match enumerate_between(&t, &opts) {
            Err(e) => assert_eq!(e.name(), "NoSolutionInBudget"),
            Ok(sols) => assert!(sols.iter().all(|s| s.branch_index <= 1)),
        }
    }

    #[test]
    fn s_max_filters_and_extends_branches() {
        let t = forward_target(0.9, -0.4, 1.5);
        let opts = EnumerateOptions {
            s_max: Some(6.0),
            branch_max: 0,
            ..Default::default()
        };
        let sols = enumerate_between(&t, &opts).unwrap();
        assert!(sols.iter().all(|s| s.s_arc <= 6.0));
        assert!(sols.iter().any(|s| (s.b - 0.9).abs() < 1e-8));
    }

    #[test]
    fn brute_force_matches_enumeration() {
        let t = forward_target(0.7, 0.3, 1.2);
        let s_max = TAU;
        let sols = enumerate_between(
            &t,
            &EnumerateOptions {
                s_max: Some(s_max),
                ..Default::default()
            },
        )
        .unwrap();
        let oracle = brute_force_count(
            &t,
            &BruteForceOptions {
                grid_step: 5e-3,
                s_max,
                b_max: None,
            },
        )
        .unwrap();
        assert_eq!(oracle.count, sols.len());
        for (w, s) in oracle.witnesses.iter().zip(&sols) {
            assert!((w.0 - s.b).abs() < 1e-7 && (w.1 - s.s_arc).abs() < 1e-7);
        }
    }

    #[test]
    fn brute_force_on_vertical_line_finds_fiber_family() {
        let omega = FRAC_PI_2;
        let t = TargetPoint::new(1.0, omega, 0.0, 0.0).unwrap();
        let oracle = brute_force_count(
            &t,
            &BruteForceOptions {
                grid_step: 1e-2,
                s_max: 10.0,
                b_max: Some(3.0),
            },
        )
        .unwrap();
        // k s = π n <= s_max sqrt(1 + b_max²) bounds n.
        let fiber: Vec<_> = enumerate_to_fiber(omega, 11)
            .unwrap()
            .into_iter()
            .filter(|s| s.s_arc <= 10.0 && s.b.abs() <= 3.0)
            .collect();
        assert_eq!(oracle.count, fiber.len());
        for s in &fiber {
            assert!(oracle
                .witnesses
                .iter()
                .any(|w| (w.1 - s.s_arc).abs() < 1e-7 && (w.0 - s.b).abs() < 1e-7));
        }
        let missing = brute_force_count(
            &t,
            &BruteForceOptions {
                grid_step: 1e-2,
                s_max: 10.0,
                b_max: None,
            },
        );
        assert!(missing.is_err());
    }

    #[test]
    fn brute_force_on_horizontal_sphere() {
        let s0: f64 = 1.1;
        let t = TargetPoint::from_point(&S3Point::new(s0.cos(), 0.0, s0.sin(), 0.0).unwrap());
        let oracle = brute_force_count(
            &t,
            &BruteForceOptions {
                grid_step: 5e-3,
                s_max: PI - 0.05,
                b_max: None,
            },
        )
        .unwrap();
        assert_eq!(oracle.count, 1);
        let (b, s) = oracle.witnesses[0];
        assert!(b.abs() < 1e-10 && (s - s0).abs() < 1e-10);
    }

    #[test]
    fn root_bound_on_first_branch() {
        for &(b, theta, s) in &[(0.7, 0.3, 1.0), (1.5, -1.0, 0.5), (0.3, 2.0, 1.3)] {
            let t = forward_target(b, theta, s);
            let bound = positive_root_lower_bound(&t);
            for sol in enumerate_between(&t, &EnumerateOptions::default()).unwrap() {
                if sol.branch_index == 0 && sol.b > 0.0 {
                    assert!(sol.b > bound, "B = {} bound = {bound}", sol.b);
                }
            }
        }
    }

    #[test]
    fn report_serializes_with_field_names() {
        let t = forward_target(0.7, 0.3, 1.2);
        let sols = enumerate_to_fiber(1.0, 1).unwrap();
        let json = serde_json::to_value(ConnectReport::new(t, sols, None)).unwrap();
        assert!(json["solutions"][0].get("B").is_some());
        assert!(json.get("oracle_count").is_none());
        assert_eq!(json["count"], 1);
    }
}
