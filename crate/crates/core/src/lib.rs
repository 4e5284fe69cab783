//! Sub-Riemannian geodesics on the unit 3-sphere viewed as `SU(2)`.
//!
//! The horizontal distribution is spanned by the left-invariant fields
//! `X(x) = x∘j`, `Y(x) = x∘k`; `Z(x) = x∘i` is vertical. Geodesics solve the
//! Hamiltonian system of `H = ½(⟨Xx, ξ⟩² + ⟨Yx, ξ⟩²)`.
//!
//! * [`group`], [`frame`]: quaternion algebra, frame fields, horizontality.
//! * [`hamiltonian`]: Cartesian and hyperspherical Hamiltonian flows.
//! * [`geodesics`]: closed-form families and the hyperspherical chart.
//! * [`connect`]: geodesics joining the identity to a target.
//! * [`hopf`]: projection to `S²`, horizontal lifts and holonomy.
//! * [`io`]: CSV and JSON formats; [`verify`]: runtime invariant suite.

pub mod connect;
pub mod error;
pub mod frame;
pub mod geodesics;
pub mod group;
pub mod hamiltonian;
pub mod hopf;
pub mod io;
pub mod ode;
pub mod verify;

pub use connect::{
    brute_force_count, enumerate_between, enumerate_to_fiber, param_equation_lhs, positive_root_lower_bound,
    BruteForceOptions, BruteForceResult, ConnectReport, EnumerateOptions, GeodesicSolution, TargetPoint,
};
pub use error::{Error, Result};
pub use frame::{frame_coeffs, horizontal_length, is_horizontal, CurveSample, FrameCoeffs, HorizontalityReport};
pub use geodesics::{
    const_geodesic, from_hyper, geodesic_bc, geodesic_bc_velocity, geodesic_from, geodesic_hyper, to_hyper,
    vertical_line, GeodesicParam, HyperCoords, HyperGeodesicParam,
};
pub use group::{
    contact_form, frame_at, left_pushforward, linear_field_bracket, quat_mul, Frame, S3Point, StructureMatrix,
    TangentVector, Vec4,
};
pub use hamiltonian::{
    ham_rhs, ham_rhs_hyper, hamiltonian_hyper, hamiltonian_value, integrate, integrate_hyper, Covector,
    HyperPhaseState, IntegrateOptions, Monitors, PhaseState, Sample, Trajectory,
};
pub use hopf::{
    bundle_metric_matrix, circle_action, holonomy, hopf_differential, hopf_map, horizontal_lift,
    shortest_loop_with_holonomy, BaseCurve, HolonomyElement, HolonomyReport, LiftOptions, LoopOnS2, ParamCurve,
    S2Point, SampledCurve, ShortestLoop,
};
pub use ode::{OdeOptions, OutputGrid};
