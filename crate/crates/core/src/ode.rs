//! Dormand–Prince 5(4) with PI step-size control on fixed-size states.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            max_steps: 2_000_000,
        }
    }
}

impl OdeOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.rel_tol) && ok(self.abs_tol) && ok(self.max_step)) {
            return Err(Error::InvalidParam(
                "tolerances and max_step must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Where the solution is reported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutputGrid {
    /// Every accepted step.
    Steps,
    /// Multiples of the given spacing (steps are shortened to land on them),
    /// plus the final point.
    Uniform(f64),
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[inline]
fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (coef, k) in terms {
        if *coef != 0.0 {
            for i in 0..N {
                out[i] += h * coef * k[i];
            }
        }
    }
    out
}

fn weighted_rms<const N: usize>(v: &[f64; N], y0: &[f64; N], y1: &[f64; N], opts: &OdeOptions) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let sk = opts.abs_tol + opts.rel_tol * y0[i].abs().max(y1[i].abs());
            (v[i] / sk).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(f: &mut F, s0: f64, y0: &[f64; N], f0: &[f64; N], opts: &OdeOptions) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let d0 = weighted_rms(y0, y0, y0, opts);
    let d1 = weighted_rms(f0, y0, y0, opts);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(opts.max_step);
    let y1 = combo(y0, h0, &[(1.0, f0)]);
    let f1 = f(s0 + h0, &y1)?;
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = weighted_rms(&diff, y0, y0, opts) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(opts.max_step))
}

/// Integrates `y' = f(s, y)` from `s0` to `s_end`, calling `observe` at the
/// initial point and at every reported point.
pub fn dopri5<const N: usize, F, O>(
    mut f: F,
    s0: f64,
    y0: [f64; N],
    s_end: f64,
    opts: &OdeOptions,
    grid: OutputGrid,
    mut observe: O,
) -> Result<()>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    O: FnMut(f64, &[f64; N]) -> Result<()>,
{
    opts.validate()?;
    if let OutputGrid::Uniform(ds) = grid {
        if !(ds.is_finite() && ds > 0.0) {
            return Err(Error::InvalidParam("output spacing must be positive".into()));
        }
    }
    observe(s0, &y0)?;
    if s_end <= s0 {
        return Ok(());
    }

    let mut s = s0;
    let mut y = y0;
    let mut k1 = f(s, &y)?;
    let mut h = initial_step(&mut f, s, &y, &k1, opts)?;
    let mut fac_old = 1e-4_f64;
    let mut next_out_index = 1u64;
    let expo = 0.2 - BETA * 0.75;

    for _ in 0..opts.max_steps {
        let target = match grid {
            OutputGrid::Steps => s_end,
            OutputGrid::Uniform(ds) => (s0 + ds * next_out_index as f64).min(s_end),
        };
        let mut lands = false;
        if s + h >= target - 1e-12 * target.abs().max(1.0) {
            h = target - s;
            lands = true;
        }
        if h < 1e-14 * s.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { s, h });
        }

        let k2 = f(s + C2 * h, &combo(&y, h, &[(A21, &k1)]))?;
        let k3 = f(s + C3 * h, &combo(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(s + C4 * h, &combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = f(
            s + C5 * h,
            &combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = f(
            s + h,
            &combo(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y_new = combo(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(s + h, &y_new)?;

        let mut err_vec = [0.0; N];
        for i in 0..N {
            err_vec[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = weighted_rms(&err_vec, &y, &y_new, opts);
        if !err.is_finite() {
            h *= FAC_MIN;
            continue;
        }
        let fac11 = err.powf(expo);

        if err <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            fac_old = err.max(1e-4);
            s = if lands { target } else { s + h };
            y = y_new;
            k1 = k7;
            match grid {
                OutputGrid::Steps => observe(s, &y)?,
                OutputGrid::Uniform(_) if lands => {
                    observe(s, &y)?;
                    next_out_index += 1;
                }
                OutputGrid::Uniform(_) => {}
            }
            if lands && s >= s_end {
                return Ok(());
            }
            h = (h / fac).min(opts.max_step);
        } else {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
    Err(Error::StepSizeUnderflow { s, h })
}
