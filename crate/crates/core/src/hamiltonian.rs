//! The sub-Riemannian Hamiltonian `H = (⟨I1 x, ξ⟩² + ⟨I2 x, ξ⟩²) / 2`, its
//! flow in Cartesian and hyperspherical coordinates, and conservation
//! monitors along integrated trajectories.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::FrameCoeffs;
use crate::geodesics::{from_hyper_raw, HyperCoords};
use crate::group::{dot4, norm4, S3Point, StructureMatrix, Vec4};
use crate::ode::{dopri5, OdeOptions, OutputGrid};

/// Tolerance on `| |x| - 1 |` accepted by the right-hand side evaluators.
/// Looser than construction tolerance: integrated states drift slightly.
pub const STATE_UNIT_TOL: f64 = 1e-6;

/// Distance from a chart singularity below which the hyperspherical
/// right-hand side refuses to evaluate.
pub const CHART_GUARD: f64 = 1e-8;

/// Smallest admissible starting `η` for hyperspherical integration.
pub const HYPER_MIN_START_ETA: f64 = 1e-6;

/// Momentum `ξ` conjugate to `x ∈ S³`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Covector(pub Vec4);

impl Covector {
    /// `φ = ξ1 + i ξ2`.
    pub fn phi(&self) -> Complex64 {
        Complex64::new(self.0[0], self.0[1])
    }

    /// `ψ = ξ3 + i ξ4`.
    pub fn psi(&self) -> Complex64 {
        Complex64::new(self.0[2], self.0[3])
    }

    /// Initial covector at the identity for the closed-form family with
    /// vertical momentum `b` and heading `theta`; `a` is a gauge component
    /// that does not affect the projected curve.
    pub fn at_identity(a: f64, b: f64, theta: f64) -> Covector {
        Covector([a, b, theta.cos(), theta.sin()])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: Vec4,
    pub xi: Covector,
}

impl PhaseState {
    pub fn new(x: S3Point, xi: Covector) -> Self {
        PhaseState { x: x.to_array(), xi }
    }

    fn check(&self) -> Result<()> {
        let norm = norm4(&self.x);
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_UNIT_TOL {
            return Err(Error::NonUnitInput {
                norm,
                tol: STATE_UNIT_TOL,
            });
        }
        Ok(())
    }

    /// Horizontal momenta `(⟨I1 x, ξ⟩, ⟨I2 x, ξ⟩)`.
    fn momenta(&self) -> (f64, f64) {
        (
            dot4(&StructureMatrix::I1.apply(&self.x), &self.xi.0),
            dot4(&StructureMatrix::I2.apply(&self.x), &self.xi.0),
        )
    }

    /// Frame coefficients of the velocity `∂H/∂ξ` at this state.
    pub fn velocity_coeffs(&self) -> FrameCoeffs {
        let (dx, _) = rhs_raw(&self.x, &self.xi.0);
        FrameCoeffs {
            a: dot4(&dx, &StructureMatrix::I1.apply(&self.x)),
            b: dot4(&dx, &StructureMatrix::I2.apply(&self.x)),
            c: dot4(&dx, &StructureMatrix::I3.apply(&self.x)),
            n: dot4(&dx, &self.x),
        }
    }
}

fn hamiltonian_raw(x: &Vec4, xi: &Vec4) -> f64 {
    let p1 = dot4(&StructureMatrix::I1.apply(x), xi);
    let p2 = dot4(&StructureMatrix::I2.apply(x), xi);
    0.5 * (p1 * p1 + p2 * p2)
}

#[inline]
fn rhs_raw(x: &Vec4, xi: &Vec4) -> (Vec4, Vec4) {
    let i1x = StructureMatrix::I1.apply(x);
    let i2x = StructureMatrix::I2.apply(x);
    let p1 = dot4(&i1x, xi);
    let p2 = dot4(&i2x, xi);
    let i1xi = StructureMatrix::I1.apply(xi);
    let i2xi = StructureMatrix::I2.apply(xi);
    let mut dx = [0.0; 4];
    let mut dxi = [0.0; 4];
    for k in 0..4 {
        dx[k] = p1 * i1x[k] + p2 * i2x[k];
        dxi[k] = p1 * i1xi[k] + p2 * i2xi[k];
    }
    (dx, dxi)
}

pub fn hamiltonian_value(state: &PhaseState) -> Result<f64> {
    state.check()?;
    let (p1, p2) = state.momenta();
    Ok(0.5 * (p1 * p1 + p2 * p2))
}

/// Right-hand side `(ẋ, ξ̇)` of the Hamiltonian system.
pub fn ham_rhs(state: &PhaseState) -> Result<(Vec4, Vec4)> {
    state.check()?;
    Ok(rhs_raw(&state.x, &state.xi.0))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    /// `| |x| - 1 |`
    pub norm_drift: f64,
    /// `|H(s) - H(0)|`
    pub h_drift: f64,
    /// `|c|`, the vertical component of the velocity.
    pub vertical: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample<S> {
    pub s: f64,
    pub state: S,
    pub monitors: Monitors,
}

/// Samples of an integrated solution, `s` strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub samples: Vec<Sample<S>>,
}

impl<S> Trajectory<S> {
    pub fn last(&self) -> &Sample<S> {
        self.samples.last().expect("trajectory always holds the initial state")
    }

    pub fn max_monitors(&self) -> Monitors {
        self.samples.iter().fold(Monitors::default(), |m, s| Monitors {
            norm_drift: m.norm_drift.max(s.monitors.norm_drift),
            h_drift: m.h_drift.max(s.monitors.h_drift),
            vertical: m.vertical.max(s.monitors.vertical),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub ode: OdeOptions,
    pub output: OutputGrid,
    /// Fail with `MonitorBreach` when terminal drifts exceed the allowance.
    pub check_monitors: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            ode: OdeOptions::default(),
            output: OutputGrid::Steps,
            check_monitors: true,
        }
    }
}

impl IntegrateOptions {
    /// Allowed terminal drift: ten times the relative tolerance per unit of
    /// integrated arc (at least one unit).
    pub fn monitor_limit(&self, span: f64) -> f64 {
        10.0 * self.ode.rel_tol.max(self.ode.abs_tol) * span.max(1.0)
    }
}

fn check_terminal(monitors: &Monitors, limit: f64) -> Result<()> {
    for (name, value) in [
        ("norm_drift", monitors.norm_drift),
        ("h_drift", monitors.h_drift),
        ("vertical", monitors.vertical),
    ] {
        if !(value <= limit) {
            return Err(Error::MonitorBreach {
                monitor: name,
                value,
                limit,
            });
        }
    }
    Ok(())
}

fn split8(y: &[f64; 8]) -> (Vec4, Vec4) {
    ([y[0], y[1], y[2], y[3]], [y[4], y[5], y[6], y[7]])
}

/// Integrates the Cartesian Hamiltonian system from `(x0, xi0)` over
/// `[0, s_end]`. No projection onto the sphere is applied.
pub fn integrate(x0: &S3Point, xi0: &Covector, s_end: f64, opts: &IntegrateOptions) -> Result<Trajectory<PhaseState>> {
    if !(s_end.is_finite() && s_end >= 0.0) {
        return Err(Error::InvalidParam(format!("s_end must be >= 0, got {s_end}")));
    }
    let x = x0.as_array();
    let y0 = [x[0], x[1], x[2], x[3], xi0.0[0], xi0.0[1], xi0.0[2], xi0.0[3]];
    let h0 = hamiltonian_raw(x, &xi0.0);
    let mut samples = Vec::new();

    dopri5(
        |_, y: &[f64; 8]| {
            let (x, xi) = split8(y);
            let (dx, dxi) = rhs_raw(&x, &xi);
            Ok([dx[0], dx[1], dx[2], dx[3], dxi[0], dxi[1], dxi[2], dxi[3]])
        },
        0.0,
        y0,
        s_end,
        &opts.ode,
        opts.output,
        |s, y| {
            let (x, xi) = split8(y);
            let state = PhaseState { x, xi: Covector(xi) };
            let (dx, _) = rhs_raw(&x, &xi);
            samples.push(Sample {
                s,
                state,
                monitors: Monitors {
                    norm_drift: (norm4(&x) - 1.0).abs(),
                    h_drift: (hamiltonian_raw(&x, &xi) - h0).abs(),
                    vertical: dot4(&dx, &StructureMatrix::I3.apply(&x)).abs(),
                },
            });
            Ok(())
        },
    )?;

    let traj = Trajectory { samples };
    if opts.check_monitors {
        check_terminal(&traj.last().monitors, opts.monitor_limit(s_end))?;
    }
    Ok(traj)
}

/// Phase state in hyperspherical coordinates
/// `z = e^{iξ1} cos η`, `w = e^{iξ2} sin η` with conjugate momenta
/// `(ψ1, ψ2, θ)`.
///
/// `η` is allowed to leave `[0, π/2]` along a solution; the point is then
/// read through the same formulas, which is how trajectories pass through
/// the degenerate fibers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HyperPhaseState {
    pub xi1: f64,
    pub xi2: f64,
    pub eta: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub theta: f64,
}

impl HyperPhaseState {
    pub fn coords(&self) -> HyperCoords {
        HyperCoords {
            xi1: self.xi1,
            xi2: self.xi2,
            eta: self.eta,
        }
    }

    pub fn point(&self) -> Vec4 {
        from_hyper_raw(self.xi1, self.xi2, self.eta)
    }

    /// Cartesian phase state with the same point and the same momentum
    /// pairing on coordinate directions (zero radial component).
    pub fn to_cartesian(&self) -> Result<PhaseState> {
        let (s1, c1) = self.xi1.sin_cos();
        let (s2, c2) = self.xi2.sin_cos();
        let (se, ce) = self.eta.sin_cos();
        if (self.psi1 != 0.0 && ce.abs() < CHART_GUARD) || (self.psi2 != 0.0 && se.abs() < CHART_GUARD) {
            return Err(Error::ChartSingularity { eta: self.eta });
        }
        // Columns of ∂x/∂(ξ1, ξ2, η) are mutually orthogonal with squared
        // lengths cos²η, sin²η, 1.
        let mut xi = [
            -c1 * se * self.theta,
            -s1 * se * self.theta,
            c2 * ce * self.theta,
            s2 * ce * self.theta,
        ];
        if self.psi1 != 0.0 {
            let k = self.psi1 / ce;
            xi[0] -= k * s1;
            xi[1] += k * c1;
        }
        if self.psi2 != 0.0 {
            let k = self.psi2 / se;
            xi[2] -= k * s2;
            xi[3] += k * c2;
        }
        Ok(PhaseState {
            x: self.point(),
            xi: Covector(xi),
        })
    }
}

fn guard_hyper(eta: f64, psi1: f64, psi2: f64) -> Result<()> {
    let near_zero = eta.sin().abs() < CHART_GUARD;
    let near_half_pi = eta.cos().abs() < CHART_GUARD;
    if (near_zero && psi2 != 0.0) || (near_half_pi && psi1 != 0.0) {
        return Err(Error::ChartSingularity { eta });
    }
    Ok(())
}

/// `H = (θ² + ψ1² tan²η + ψ2² cot²η + 2 ψ1 ψ2) / 2`.
pub fn hamiltonian_hyper(state: &HyperPhaseState) -> Result<f64> {
    let HyperPhaseState { eta, psi1, psi2, theta, .. } = *state;
    guard_hyper(eta, psi1, psi2)?;
    Ok(hamiltonian_hyper_raw(eta, psi1, psi2, theta))
}

fn hamiltonian_hyper_raw(eta: f64, psi1: f64, psi2: f64, theta: f64) -> f64 {
    let mut h = theta * theta + 2.0 * psi1 * psi2;
    if psi1 != 0.0 {
        h += (psi1 * eta.tan()).powi(2);
    }
    if psi2 != 0.0 {
        h += (psi2 / eta.tan()).powi(2);
    }
    0.5 * h
}

/// Derivatives `(ξ̇1, ξ̇2, η̇, ψ̇1, ψ̇2, θ̇)` of the hyperspherical system.
///
/// Terms multiplied by a vanishing momentum are dropped, so the flow with
/// `ψ2 = 0` passes through `η = 0` (and with `ψ1 = 0` through `η = π/2`).
pub fn ham_rhs_hyper(state: &HyperPhaseState) -> Result<[f64; 6]> {
    let HyperPhaseState { eta, psi1, psi2, theta, .. } = *state;
    guard_hyper(eta, psi1, psi2)?;
    Ok(rhs_hyper_raw(eta, psi1, psi2, theta))
}

#[inline]
fn rhs_hyper_raw(eta: f64, psi1: f64, psi2: f64, theta: f64) -> [f64; 6] {
    let mut dxi1 = psi2;
    let mut dxi2 = psi1;
    let mut dtheta = 0.0;
    if psi1 != 0.0 {
        let t = eta.tan();
        let c = eta.cos();
        dxi1 += psi1 * t * t;
        dtheta -= psi1 * psi1 * t / (c * c);
    }
    if psi2 != 0.0 {
        let ct = 1.0 / eta.tan();
        let s = eta.sin();
        dxi2 += psi2 * ct * ct;
        dtheta += psi2 * psi2 * ct / (s * s);
    }
    [dxi1, dxi2, theta, 0.0, 0.0, dtheta]
}

/// Vertical velocity component `c = ξ̇1 cos²η - ξ̇2 sin²η`.
fn hyper_vertical(eta: f64, d: &[f64; 6]) -> f64 {
    let (s, c) = eta.sin_cos();
    d[0] * c * c - d[1] * s * s
}

pub fn integrate_hyper(init: &HyperPhaseState, s_end: f64, opts: &IntegrateOptions) -> Result<Trajectory<HyperPhaseState>> {
    if !(s_end.is_finite() && s_end >= 0.0) {
        return Err(Error::InvalidParam(format!("s_end must be >= 0, got {s_end}")));
    }
    if !(init.eta >= HYPER_MIN_START_ETA && init.eta <= FRAC_PI_2 - HYPER_MIN_START_ETA) {
        return Err(Error::ChartSingularity { eta: init.eta });
    }
    let h0 = hamiltonian_hyper(init)?;
    let y0 = [init.xi1, init.xi2, init.eta, init.psi1, init.psi2, init.theta];
    let mut samples = Vec::new();
    let unpack = |y: &[f64; 6]| HyperPhaseState {
        xi1: y[0],
        xi2: y[1],
        eta: y[2],
        psi1: y[3],
        psi2: y[4],
        theta: y[5],
    };

    dopri5(
        |_, y: &[f64; 6]| {
            guard_hyper(y[2], y[3], y[4])?;
            Ok(rhs_hyper_raw(y[2], y[3], y[4], y[5]))
        },
        0.0,
        y0,
        s_end,
        &opts.ode,
        opts.output,
        |s, y| {
            let state = unpack(y);
            let d = rhs_hyper_raw(y[2], y[3], y[4], y[5]);
            samples.push(Sample {
                s,
                state,
                monitors: Monitors {
                    norm_drift: (norm4(&state.point()) - 1.0).abs(),
                    h_drift: (hamiltonian_hyper_raw(y[2], y[3], y[4], y[5]) - h0).abs(),
                    vertical: hyper_vertical(y[2], &d).abs(),
                },
            });
            Ok(())
        },
    )?;

    let traj = Trajectory { samples };
    if opts.check_monitors {
        check_terminal(&traj.last().monitors, opts.monitor_limit(s_end))?;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::{const_geodesic, geodesic_bc, GeodesicParam};
    use crate::group::dist_inf4;
    use std::f64::consts::PI;

    #[test]
    fn hamiltonian_at_identity() {
        let st = PhaseState::new(S3Point::IDENTITY, Covector([0.3, -1.2, 0.6, 0.8]));
        let h = hamiltonian_value(&st).unwrap();
        assert!((h - 0.5 * (0.36 + 0.64)).abs() < 1e-15);
        let zero = PhaseState::new(S3Point::IDENTITY, Covector::default());
        assert_eq!(hamiltonian_value(&zero).unwrap(), 0.0);
    }

    #[test]
    fn rhs_at_identity_and_rest_point() {
        let st = PhaseState::new(S3Point::IDENTITY, Covector([0.3, -1.2, 0.6, 0.8]));
        let (dx, _) = ham_rhs(&st).unwrap();
        assert_eq!(dx, [0.0, 0.0, 0.6, 0.8]);
        let rest = PhaseState::new(S3Point::IDENTITY, Covector::default());
        assert_eq!(ham_rhs(&rest).unwrap(), ([0.0; 4], [0.0; 4]));
    }

    #[test]
    fn rhs_rejects_off_sphere_state() {
        let st = PhaseState {
            x: [1.1, 0.0, 0.0, 0.0],
            xi: Covector::default(),
        };
        assert_eq!(ham_rhs(&st).unwrap_err().name(), "NonUnitInput");
    }

    #[test]
    fn quarter_turn_reaches_x3_axis() {
        let traj = integrate(
            &S3Point::IDENTITY,
            &Covector([0.0, 0.0, 1.0, 0.0]),
            FRAC_PI_2,
            &IntegrateOptions::default(),
        )
        .unwrap();
        let last = traj.last();
        assert_eq!(last.s, FRAC_PI_2);
        assert!(dist_inf4(&last.state.x, &[0.0, 0.0, 1.0, 0.0]) < 1e-9);
    }

    #[test]
    fn zero_span_is_single_sample() {
        let traj = integrate(
            &S3Point::IDENTITY,
            &Covector([0.0, 0.0, 1.0, 0.0]),
            0.0,
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.samples[0].state.x, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn trajectory_follows_closed_form() {
        let (b, theta) = (1.3, 0.4);
        let traj = integrate(
            &S3Point::IDENTITY,
            &Covector::at_identity(0.0, b, theta),
            2.0 * PI,
            &IntegrateOptions::default(),
        )
        .unwrap();
        let param = GeodesicParam::at_identity(b, theta);
        for sample in &traj.samples {
            let exact = geodesic_bc(&param, sample.s);
            assert!(dist_inf4(&sample.state.x, exact.as_array()) < 1e-6);
        }
    }

    #[test]
    fn strict_monitor_limit_trips() {
        let mut opts = IntegrateOptions::default();
        opts.ode.rel_tol = 1e-3;
        opts.ode.abs_tol = 1e-3;
        opts.ode.max_step = 1.0;
        let mut loose = opts;
        loose.check_monitors = false;
        let traj = integrate(&S3Point::IDENTITY, &Covector([0.0, 4.0, 1.0, 0.0]), 20.0, &loose).unwrap();
        let drift = traj.last().monitors.norm_drift;
        assert!(drift > 0.0);
        // Shrinking the allowance below the observed drift must trip the check.
        opts.ode.rel_tol = drift / 1e3;
        opts.ode.abs_tol = drift / 1e3;
        let err = check_terminal(&traj.last().monitors, opts.monitor_limit(1.0)).unwrap_err();
        assert_eq!(err.name(), "MonitorBreach");
    }

    #[test]
    fn hyper_trivial_geodesics() {
        let st = HyperPhaseState {
            xi1: 0.2,
            xi2: -0.1,
            eta: 0.4,
            psi1: 0.0,
            psi2: 0.0,
            theta: 1.5,
        };
        let d = ham_rhs_hyper(&st).unwrap();
        assert_eq!(d, [0.0, 0.0, 1.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn hyper_momenta_are_constant() {
        let st = HyperPhaseState {
            xi1: 0.2,
            xi2: -0.1,
            eta: 0.4,
            psi1: 0.7,
            psi2: -0.3,
            theta: 1.5,
        };
        let d = ham_rhs_hyper(&st).unwrap();
        assert_eq!((d[3], d[4]), (0.0, 0.0));
    }

    #[test]
    fn hyper_flow_is_horizontal() {
        for &(eta, psi1, psi2, theta) in &[(0.3, 0.9, 0.0, 1.0), (1.2, -0.4, 0.7, -0.2), (1e-4, 0.9, 0.2, 1.0)] {
            let st = HyperPhaseState { eta, psi1, psi2, theta, ..Default::default() };
            let d = ham_rhs_hyper(&st).unwrap();
            assert!(hyper_vertical(eta, &d).abs() < 1e-12 * (1.0 + d[1].abs()));
        }
        // Near η = 0 a nonzero ψ2 drives ξ̇2 ~ ψ2 cot²η.
        let st = HyperPhaseState { eta: 1e-4, psi1: 0.9, psi2: 0.2, theta: 1.0, ..Default::default() };
        assert!(ham_rhs_hyper(&st).unwrap()[1] > 1e6);
    }

    #[test]
    fn hyper_guards_singular_fibers() {
        let st = HyperPhaseState {
            eta: 1e-10,
            psi2: 0.5,
            theta: 1.0,
            ..Default::default()
        };
        assert_eq!(ham_rhs_hyper(&st).unwrap_err().name(), "ChartSingularity");
        let st = HyperPhaseState {
            eta: FRAC_PI_2,
            psi1: 0.5,
            ..Default::default()
        };
        assert_eq!(ham_rhs_hyper(&st).unwrap_err().name(), "ChartSingularity");
        let start = HyperPhaseState { eta: 0.0, theta: 1.0, ..Default::default() };
        let err = integrate_hyper(&start, 1.0, &IntegrateOptions::default()).unwrap_err();
        assert_eq!(err.name(), "ChartSingularity");
    }

    #[test]
    fn hyper_and_cartesian_hamiltonians_agree() {
        let st = HyperPhaseState {
            xi1: 0.7,
            xi2: -1.1,
            eta: 0.6,
            psi1: 0.4,
            psi2: -0.25,
            theta: 0.8,
        };
        let cart = st.to_cartesian().unwrap();
        let h_cart = hamiltonian_value(&cart).unwrap();
        let h_hyp = hamiltonian_hyper(&st).unwrap();
        assert!((h_cart - h_hyp).abs() < 1e-14, "{h_cart} vs {h_hyp}");
    }

    #[test]
    fn hyper_great_circle_motion() {
        let eps = 1e-3;
        let st = HyperPhaseState {
            eta: eps,
            xi2: 0.3,
            theta: 1.0,
            ..Default::default()
        };
        let traj = integrate_hyper(&st, 2.0, &IntegrateOptions::default()).unwrap();
        for sample in &traj.samples {
            assert!((sample.state.eta - (eps + sample.s)).abs() < 1e-12);
            // Same curve as the constant-velocity geodesic with heading ξ2.
            let x = const_geodesic(&S3Point::IDENTITY, 0.3, eps + sample.s);
            assert!(dist_inf4(&sample.state.point(), x.as_array()) < 1e-12);
        }
    }
}
