//! `s3sr`: sampling, integration, enumeration and Hopf queries for
//! sub-Riemannian geodesics on the 3-sphere.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use s3sr_core::io::{
    base_curve_samples, read_loop_csv, read_path_csv, write_hyper_trajectory_csv, write_json, write_path_csv,
    write_s2_csv, write_trajectory_csv, GeodesicDump, PathSample,
};
use s3sr_core::verify::{run_suite, DEFAULT_TOL};
use s3sr_core::*;

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "s3sr", version, about = "Sub-Riemannian geodesics on the 3-sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form geodesic samples.
    Sample(SampleArgs),
    /// Hamiltonian trajectory with monitor columns.
    Integrate(IntegrateArgs),
    /// Geodesics from the identity to a target point or a point of the vertical fiber.
    Connect(ConnectArgs),
    /// Projection to S², horizontal lifts and holonomy.
    Hopf {
        #[command(subcommand)]
        command: HopfCommand,
    },
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    /// `geodesic_bc` with parameters B, θ.
    Bc,
    /// Constant-coefficient great circle with heading ψ.
    Const,
    /// Hyperspherical closed form with ψ1, η̇(0).
    Hyper,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Chart {
    Cartesian,
    Hyper,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl OutputArgs {
    fn open(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum, default_value = "bc")]
    family: Family,
    #[arg(long = "B", default_value_t = 0.0, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    psi: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    psi1: f64,
    #[arg(long, default_value_t = 1.0)]
    eta_dot0: f64,
    #[arg(long, value_parser = parse_point, default_value = "1,0,0,0", allow_hyphen_values = true)]
    base: S3Point,
    #[arg(long, value_parser = parse_nonneg)]
    s_end: f64,
    /// Number of intervals; `samples + 1` rows are written.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    samples: u32,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct TolArgs {
    #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12, value_parser = parse_positive)]
    abs_tol: f64,
    #[arg(long, default_value_t = 0.1, value_parser = parse_positive)]
    max_step: f64,
}

impl TolArgs {
    fn ode(&self) -> OdeOptions {
        OdeOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct IntegrateArgs {
    #[arg(long, value_enum, default_value = "cartesian")]
    chart: Chart,
    /// Initial covector (Cartesian chart).
    #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true, required_if_eq("chart", "cartesian"))]
    xi: Option<Vec4>,
    /// Initial point (Cartesian chart).
    #[arg(long, value_parser = parse_point, default_value = "1,0,0,0", allow_hyphen_values = true)]
    x0: S3Point,
    /// Initial state `xi1,xi2,eta,psi1,psi2,theta` (hyperspherical chart).
    #[arg(long, value_parser = parse_hyper_state, allow_hyphen_values = true, required_if_eq("chart", "hyper"))]
    hyper_state: Option<HyperPhaseState>,
    #[arg(long, value_parser = parse_nonneg)]
    s_end: f64,
    /// Write rows at multiples of this spacing instead of every step.
    #[arg(long, value_parser = parse_positive)]
    output_step: Option<f64>,
    /// Do not fail when a conservation monitor exceeds its limit.
    #[arg(long)]
    no_monitor_check: bool,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
#[group(id = "goal", required = true, multiple = false, args = ["target", "fiber_omega"])]
struct ConnectArgs {
    /// Target point `x1,x2,x3,x4`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    target: Option<S3Point>,
    /// Fiber angle: target `(cos ω, sin ω, 0, 0)`.
    #[arg(long)]
    fiber_omega: Option<f64>,
    /// Largest family index for fiber targets.
    #[arg(long, default_value_t = 6)]
    n_max: u32,
    #[arg(long, default_value_t = 1e-3, value_parser = parse_positive)]
    grid_step: f64,
    #[arg(long, default_value_t = 8)]
    branch_max: u32,
    /// Keep solutions with `s_arc <= s_max`.
    #[arg(long, value_parser = parse_positive)]
    s_max: Option<f64>,
    #[arg(long, default_value_t = 1e-9, value_parser = parse_positive)]
    verify_tol: f64,
    /// Cross-check the count with the brute-force scan (needs --s-max).
    #[arg(long, requires = "s_max")]
    oracle: bool,
    #[arg(long, default_value_t = 1e-3, value_parser = parse_positive)]
    oracle_grid_step: f64,
    /// `|B|` window of the oracle for fiber targets.
    #[arg(long, default_value_t = 3.0, value_parser = parse_positive)]
    oracle_b_max: f64,
    /// Write the left side of the scalar `B` equation on this many grid
    /// points (CSV `B,lhs`) instead of the report.
    #[arg(long, conflicts_with_all = ["fiber_omega", "oracle"])]
    emit_lhs_grid: Option<u32>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Subcommand)]
enum HopfCommand {
    /// Project a path file (`s,x1,x2,x3,x4`) to S² (`t,u1,u2,u3`).
    Project {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Horizontal lift of a loop file (`t,u1,u2,u3`) starting at `x0`.
    Lift(LoopArgs),
    /// Holonomy of a closed loop file as JSON.
    Holonomy(LoopArgs),
    /// Shortest horizontal loop through the identity with holonomy ω.
    Shortest {
        #[arg(long)]
        omega: f64,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(2..))]
        samples: u32,
        /// Also write the base loop as CSV here.
        #[arg(long)]
        loop_output: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct LoopArgs {
    #[arg(long = "loop")]
    loop_file: PathBuf,
    /// Start of the lift; must project to the first loop point.
    #[arg(long, value_parser = parse_point, default_value = "1,0,0,0", allow_hyphen_values = true)]
    x0: S3Point,
    #[arg(long, default_value_t = 1e-12, value_parser = parse_positive)]
    rel_tol: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Tolerance of the checks without a fixed one (default: $S3SR_DEFAULT_TOL or 1e-8).
    #[arg(long, value_parser = parse_positive)]
    tol: Option<f64>,
    #[arg(long)]
    json: bool,
}

fn parse_f64s(s: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated values, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(v)
}

fn parse_vec4(s: &str) -> std::result::Result<Vec4, String> {
    let v = parse_f64s(s, 4)?;
    Ok([v[0], v[1], v[2], v[3]])
}

fn parse_point(s: &str) -> std::result::Result<S3Point, String> {
    S3Point::from_array(parse_vec4(s)?).map_err(|e| e.to_string())
}

fn parse_hyper_state(s: &str) -> std::result::Result<HyperPhaseState, String> {
    let v = parse_f64s(s, 6)?;
    Ok(HyperPhaseState {
        xi1: v[0],
        xi2: v[1],
        eta: v[2],
        psi1: v[3],
        psi2: v[4],
        theta: v[5],
    })
}

fn parse_nonneg(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!("expected a finite number >= 0, got {s:?}")),
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a finite number > 0, got {s:?}")),
    }
}

/// Failure of a subcommand, mapped to an exit code.
enum Failure {
    Core(Error),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn sample(a: &SampleArgs) -> Outcome {
    let n = a.samples as usize;
    let at = |i: usize| a.s_end * i as f64 / n as f64;
    let (family, parameters, point): (&str, serde_json::Value, Box<dyn Fn(f64) -> S3Point>) = match a.family {
        Family::Bc => {
            let p = GeodesicParam {
                base: a.base,
                b: a.b,
                theta: a.theta,
            };
            (
                "bc",
                serde_json::json!({ "B": a.b, "theta": a.theta, "base": a.base }),
                Box::new(move |s| geodesic_bc(&p, s)),
            )
        }
        Family::Const => {
            let (base, psi) = (a.base, a.psi);
            (
                "const",
                serde_json::json!({ "psi": psi, "base": base }),
                Box::new(move |s| const_geodesic(&base, psi, s)),
            )
        }
        Family::Hyper => {
            let p = HyperGeodesicParam::new(a.psi1, a.eta_dot0)?;
            let base = a.base;
            (
                "hyper",
                serde_json::json!({ "psi1": a.psi1, "eta_dot0": a.eta_dot0, "base": base }),
                Box::new(move |s| quat_mul(&base, &from_hyper(&geodesic_hyper(&p, s)))),
            )
        }
    };
    let samples: Vec<PathSample> = (0..=n).map(|i| PathSample { s: at(i), x: point(at(i)) }).collect();
    let mut out = a.out.open()?;
    match a.format {
        Format::Csv => write_path_csv(&mut out, &samples)?,
        Format::Json => write_json(
            &mut out,
            &GeodesicDump {
                family: family.into(),
                parameters,
                samples,
            },
        )?,
    }
    out.flush()?;
    Ok(())
}

fn integrate_cmd(a: &IntegrateArgs) -> Outcome {
    let opts = IntegrateOptions {
        ode: a.tol.ode(),
        output: a.output_step.map_or(OutputGrid::Steps, OutputGrid::Uniform),
        check_monitors: !a.no_monitor_check,
    };
    let mut out = a.out.open()?;
    match a.chart {
        Chart::Cartesian => {
            let xi = Covector(a.xi.expect("required by clap"));
            let traj = integrate(&a.x0, &xi, a.s_end, &opts)?;
            write_trajectory_csv(&mut out, &traj)?;
        }
        Chart::Hyper => {
            let traj = integrate_hyper(&a.hyper_state.expect("required by clap"), a.s_end, &opts)?;
            write_hyper_trajectory_csv(&mut out, &traj)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_solutions_csv<W: Write>(out: W, sols: &[GeodesicSolution]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["B", "theta", "s_arc", "paper_length", "branch_index", "residual"])
        .map_err(Error::from)?;
    for s in sols {
        let f = s3sr_core::io::fmt_f64;
        w.write_record([
            f(s.b),
            f(s.theta),
            f(s.s_arc),
            f(s.paper_length),
            s.branch_index.to_string(),
            f(s.residual),
        ])
        .map_err(Error::from)?;
    }
    w.flush()?;
    Ok(())
}

fn connect(a: &ConnectArgs) -> Outcome {
    let (target, solutions, oracle_count) = if let Some(omega) = a.fiber_omega {
        let target = TargetPoint::new(1.0, omega, 0.0, 0.0)?;
        let mut n_max = a.n_max;
        if let (true, Some(s_max)) = (a.oracle, a.s_max) {
            // Every fiber solution inside the oracle window has k s = π n <= s_max k_max.
            n_max = n_max.max((s_max * a.oracle_b_max.hypot(1.0) / std::f64::consts::PI).ceil() as u32);
        }
        let mut sols = enumerate_to_fiber(omega, n_max)?;
        if let Some(s_max) = a.s_max {
            sols.retain(|s| s.s_arc <= s_max);
        }
        let oracle = if a.oracle {
            sols.retain(|s| s.b.abs() <= a.oracle_b_max);
            let res = brute_force_count(
                &target,
                &BruteForceOptions {
                    grid_step: a.oracle_grid_step,
                    s_max: a.s_max.expect("required by clap"),
                    b_max: Some(a.oracle_b_max),
                },
            )?;
            Some(res.count)
        } else {
            None
        };
        (target, sols, oracle)
    } else {
        let target = TargetPoint::from_point(&a.target.expect("required by clap"));
        if let Some(n) = a.emit_lhs_grid {
            return emit_lhs_grid(&target, n.max(2), &a.out);
        }
        let sols = enumerate_between(
            &target,
            &EnumerateOptions {
                grid_step: a.grid_step,
                verify_tol: a.verify_tol,
                branch_max: a.branch_max,
                s_max: a.s_max,
            },
        )?;
        let oracle = if a.oracle {
            let res = brute_force_count(
                &target,
                &BruteForceOptions {
                    grid_step: a.oracle_grid_step,
                    s_max: a.s_max.expect("required by clap"),
                    b_max: None,
                },
            )?;
            Some(res.count)
        } else {
            None
        };
        (target, sols, oracle)
    };

    let report = ConnectReport::new(target, solutions, oracle_count);
    let mut out = a.out.open()?;
    match a.format {
        Format::Json => write_json(&mut out, &report)?,
        Format::Csv => write_solutions_csv(&mut out, &report.solutions)?,
    }
    out.flush()?;
    match report.oracle_count {
        Some(n) if n != report.count => Err(Failure::Verify(format!(
            "oracle count {n} differs from enumerated count {}",
            report.count
        ))),
        _ => Ok(()),
    }
}

fn emit_lhs_grid(target: &TargetPoint, n: u32, out: &OutputArgs) -> Outcome {
    let b_max = target.b_limit();
    let mut w = csv::Writer::from_writer(out.open()?);
    w.write_record(["B", "lhs"]).map_err(Error::from)?;
    // Open interval: the endpoints are outside the domain.
    for i in 1..=n {
        let b = -b_max + 2.0 * b_max * i as f64 / (n + 1) as f64;
        let v = param_equation_lhs(b, target)?;
        w.write_record([s3sr_core::io::fmt_f64(b), s3sr_core::io::fmt_f64(v)])
            .map_err(Error::from)?;
    }
    w.flush()?;
    Ok(())
}

fn hopf(cmd: &HopfCommand) -> Outcome {
    match cmd {
        HopfCommand::Project { input, out } => {
            let path = read_path_csv(File::open(input)?, UNIT_INPUT_TOL)?;
            let points: Vec<S3Point> = path.iter().map(|p| p.x).collect();
            let proj = s3sr_core::hopf::project_path(&points);
            let mut w = out.open()?;
            write_s2_csv(&mut w, path.iter().map(|p| p.s).zip(proj))?;
            w.flush()?;
        }
        HopfCommand::Lift(a) => {
            let curve = read_loop_csv(File::open(&a.loop_file)?)?;
            let lift = horizontal_lift(&curve, &a.x0, &lift_options(a.rel_tol))?;
            let samples: Vec<PathSample> = lift
                .t
                .iter()
                .zip(&lift.points)
                .map(|(&s, &x)| PathSample { s, x })
                .collect();
            let mut w = a.out.open()?;
            write_path_csv(&mut w, &samples)?;
            w.flush()?;
        }
        HopfCommand::Holonomy(a) => {
            let curve = read_loop_csv(File::open(&a.loop_file)?)?;
            let report = holonomy(&curve, &a.x0, &lift_options(a.rel_tol))?;
            let mut w = a.out.open()?;
            write_json(&mut w, &report)?;
            w.flush()?;
        }
        HopfCommand::Shortest {
            omega,
            samples,
            loop_output,
            out,
        } => {
            let best = shortest_loop_with_holonomy(*omega, *samples as usize)?;
            if let Some(p) = loop_output {
                let mut w = BufWriter::new(File::create(p)?);
                write_s2_csv(&mut w, base_curve_samples(&best.loop_samples)?.into_iter())?;
                w.flush()?;
            }
            let mut w = out.open()?;
            write_json(
                &mut w,
                &serde_json::json!({
                    "omega": omega,
                    "B": best.geodesic.b,
                    "theta": best.geodesic.theta,
                    "s_arc": best.s_arc,
                    "paper_length": best.paper_length,
                    "n": best.n,
                    "holonomy_error": best.holonomy_error,
                }),
            )?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Unit tolerance for points read from text.
const UNIT_INPUT_TOL: f64 = 1e-9;

fn lift_options(rel_tol: f64) -> LiftOptions {
    let mut o = LiftOptions::default();
    o.ode.rel_tol = rel_tol;
    o
}

fn verify(a: &VerifyArgs) -> Outcome {
    let tol = match a.tol {
        Some(t) => t,
        None => match std::env::var("S3SR_DEFAULT_TOL") {
            Ok(v) => parse_positive(&v)
                .map_err(|e| Failure::Core(Error::InvalidParam(format!("S3SR_DEFAULT_TOL: {e}"))))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    let results = run_suite(tol);
    let mut out = io::stdout().lock();
    if a.json {
        write_json(&mut out, &results)?;
    } else {
        for r in &results {
            let status = if r.pass { "PASS" } else { "FAIL" };
            match &r.error {
                Some(e) => writeln!(out, "{status} {} error: {e}", r.name)?,
                None => writeln!(out, "{status} {} value={:.3e} tol={:.1e}", r.name, r.value, r.tol)?,
            }
        }
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(Failure::Verify(format!("{failed} of {} checks failed", results.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Sample(a) => sample(a),
        Command::Integrate(a) => integrate_cmd(a),
        Command::Connect(a) => connect(a),
        Command::Hopf { command } => hopf(command),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(msg)) => {
            eprintln!("error: verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
