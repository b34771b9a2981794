//! Dormand-Prince 5(4) embedded Runge-Kutta pair with PI step-size control.
//!
//! The stepper works on a fixed three-component state and integrates one
//! smooth segment at a time. Each accepted step is reported through a
//! callback with both endpoints, their derivatives and the extra coefficient
//! of the method's fourth-order continuous extension.

use crate::error::{Error, Result};

pub(crate) type Vec3 = [f64; 3];

// Butcher tableau.
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

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// Step controller.
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub dt_max: f64,
    pub max_steps: usize,
}

/// An accepted step `(t0, y0, f0) -> (t1, y1, f1)`.
pub(crate) struct Step<'a> {
    pub t0: f64,
    pub y0: &'a Vec3,
    pub f0: &'a Vec3,
    pub t1: f64,
    pub y1: &'a Vec3,
    pub f1: &'a Vec3,
    /// Quartic correction on top of the cubic Hermite interpolant.
    pub quartic: Vec3,
}

/// Dense output inside an accepted step.
///
/// With `quartic = 0` this is the cubic Hermite interpolant through both
/// endpoints and derivatives; the correction lifts it to fourth order.
pub(crate) fn interpolate(step: &Step<'_>, t: f64) -> Vec3 {
    let h = step.t1 - step.t0;
    let s = (t - step.t0) / h;
    let s1 = 1.0 - s;
    let mut out = [0.0; 3];
    for i in 0..3 {
        let diff = step.y1[i] - step.y0[i];
        let b = h * step.f0[i] - diff;
        let c = diff - h * step.f1[i] - b;
        out[i] = step.y0[i] + s * (diff + s1 * (b + s * (c + s1 * step.quartic[i])));
    }
    out
}

#[inline]
fn axpy(y: &Vec3, terms: &[(f64, &Vec3)], h: f64) -> Vec3 {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..3 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to exactly `t1`.
///
/// `h` is the trial step on entry and the suggested next step on exit.
/// Returns the state at `t1` and its derivative.
pub(crate) fn integrate_segment<F, S>(
    f: &F,
    t0: f64,
    t1: f64,
    y0: Vec3,
    h: &mut f64,
    ctl: &StepControl,
    stats: &mut SolverStats,
    mut on_step: S,
) -> Result<(Vec3, Vec3)>
where
    F: Fn(f64, &Vec3) -> Vec3,
    S: FnMut(&Step<'_>) -> Result<()>,
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.rhs_evals += 1;
    if t1 <= t0 {
        return Ok((y, k1));
    }

    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let steps_at_entry = stats.accepted + stats.rejected;

    loop {
        if stats.accepted + stats.rejected - steps_at_entry >= ctl.max_steps {
            return Err(Error::MaxSteps {
                t,
                max_steps: ctl.max_steps,
            });
        }
        let mut step = h.min(ctl.dt_max);
        let remaining = t1 - t;
        let last = step >= remaining * (1.0 - 1e-12);
        if last {
            step = remaining;
        }
        if step <= 1e-14 * t.abs().max(1.0) && !last {
            return Err(Error::StepUnderflow { t, h: step });
        }

        let k2 = f(t + C2 * step, &axpy(&y, &[(A21, &k1)], step));
        let k3 = f(t + C3 * step, &axpy(&y, &[(A31, &k1), (A32, &k2)], step));
        let k4 = f(
            t + C4 * step,
            &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step),
        );
        let k5 = f(
            t + C5 * step,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step),
        );
        let k6 = f(
            t + step,
            &axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                step,
            ),
        );
        let y_new = axpy(
            &y,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            step,
        );
        let t_new = if last { t1 } else { t + step };
        let k7 = f(t_new, &y_new);
        stats.rhs_evals += 6;

        let mut sq = 0.0;
        for i in 0..3 {
            let e = step
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
            sq += (e / sk).powi(2);
        }
        let err = (sq / 3.0).sqrt();

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = step / fac;
            if last_rejected {
                h_new = h_new.min(step);
            }
            facold = err.max(1e-4);
            stats.accepted += 1;
            let mut quartic = [0.0; 3];
            for i in 0..3 {
                quartic[i] = step
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            on_step(&Step {
                t0: t,
                y0: &y,
                f0: &k1,
                t1: t_new,
                y1: &y_new,
                f1: &k7,
                quartic,
            })?;
            t = t_new;
            y = y_new;
            k1 = k7;
            // Keep the controller's suggestion rather than the clamped final step.
            *h = if last { h.max(h_new) } else { h_new };
            last_rejected = false;
            if last {
                return Ok((y, k1));
            }
        } else {
            stats.rejected += 1;
            *h = step / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
}
