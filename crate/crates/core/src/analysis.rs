//! Post-processing of trajectories: kinks at the drive zeros, per-cycle
//! statistics, hysteresis loops in the `(omega0, Z)` plane and the shape of
//! the magnetization pulses.

use crate::dynamics::{drive_value, DriveSpec, Trajectory};
use crate::error::{Error, Result};

/// Samples per drive period used when resampling a cycle.
pub const CYCLE_RESOLUTION: usize = 2000;

/// Kink detector settings, as fractions of the drive period.
///
/// `Z` is smoothed with a centred moving average of width
/// `smooth_frac * period`; the slope change is
/// `K(t) = |(Z(t+h) - Z(t)) - (Z(t) - Z(t-h))| / h` with `h = slope_frac * period`.
/// A drive zero is a kink when the largest `K` within `2h` of it exceeds
/// `threshold` times the median `K` of its cycle plus `floor / h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkConfig {
    pub smooth_frac: f64,
    pub slope_frac: f64,
    pub threshold: f64,
    pub floor: f64,
}

impl Default for KinkConfig {
    fn default() -> Self {
        Self {
            smooth_frac: 0.05,
            slope_frac: 0.075,
            threshold: 3.0,
            floor: 1e-6,
        }
    }
}

/// One drive period of `(omega0, Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisLoop {
    pub cycle_index: usize,
    /// `(b, z)` pairs in time order.
    pub points: Vec<(f64, f64)>,
    /// Signed shoelace area; positive is counter-clockwise in the `(b, z)` plane.
    pub area: f64,
    /// `area / (4 b0 (z_max - z_min))`, 0 for a flat loop.
    pub normalized_area: f64,
    /// `|z_first - z_last|`.
    pub closure: f64,
}

impl HysteresisLoop {
    pub fn is_closed(&self, tol: f64) -> bool {
        self.closure < tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleStats {
    pub cycle_index: usize,
    pub z_mean: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub kink_times: Vec<f64>,
}

/// Start of a magnetization reversal and the drive zero closest to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReversalOnset {
    pub t_onset: f64,
    pub t_crossing: f64,
    pub nearest_zero: f64,
    /// `|t_onset - nearest_zero| / period`.
    pub offset: f64,
}

/// Linear interpolation of `(times, values)` at `t`, clamped at the ends.
pub fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let i = times.partition_point(|&x| x <= t);
    if i == 0 {
        return values[0];
    }
    if i >= times.len() {
        return values[values.len() - 1];
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let s = (t - t0) / (t1 - t0);
    values[i - 1] + s * (values[i] - values[i - 1])
}

fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

fn period_of(d: &DriveSpec) -> Result<f64> {
    match d {
        DriveSpec::Cosine { .. } => d
            .period()
            .ok_or_else(|| Error::Validation("drive has no period (omega0 = 0)".into())),
        DriveSpec::LinearSweep { .. } => {
            Err(Error::Validation("a linear sweep has no drive cycle".into()))
        }
    }
}

/// Full drive periods covered by the trajectory, as `(start, end)` pairs.
fn cycles(traj: &Trajectory, period: f64, min_cycles: usize) -> Result<Vec<(f64, f64)>> {
    let t0 = traj.times[0];
    let span = traj.times[traj.len() - 1] - t0;
    let n = (span / period + 1e-9).floor() as usize;
    if n < min_cycles {
        return Err(Error::Validation(format!(
            "span {span} covers {n} drive period(s) of {period}; need at least {min_cycles}"
        )));
    }
    Ok((0..n)
        .map(|c| (t0 + c as f64 * period, t0 + (c + 1) as f64 * period))
        .collect())
}

fn resample_z(traj: &Trajectory, z: &[f64], a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let grid = uniform_grid(a, b, CYCLE_RESOLUTION);
    let zs = grid.iter().map(|&t| interpolate(&traj.times, z, t)).collect();
    (grid, zs)
}

fn centred_moving_average(x: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Drive zeros at which the smoothed `Z` changes slope abruptly.
pub fn kinks(traj: &Trajectory) -> Vec<f64> {
    kinks_with(traj, &KinkConfig::default())
}

pub fn kinks_with(traj: &Trajectory, cfg: &KinkConfig) -> Vec<f64> {
    if traj.events.is_empty() || traj.len() < 2 {
        return Vec::new();
    }
    let t_first = traj.times[0];
    let t_last = traj.times[traj.len() - 1];
    let scale = traj.drive.period().unwrap_or(t_last - t_first);
    let dt = scale / CYCLE_RESOLUTION as f64;
    let n = ((t_last - t_first) / dt).floor() as usize;
    if n < 4 {
        return Vec::new();
    }
    let z = traj.z();
    let grid: Vec<f64> = (0..=n).map(|k| t_first + k as f64 * dt).collect();
    let zs: Vec<f64> = grid.iter().map(|&t| interpolate(&traj.times, &z, t)).collect();
    let smooth = centred_moving_average(&zs, ((cfg.smooth_frac * scale / dt).round() as usize).max(1));
    let h = ((cfg.slope_frac * scale / dt).round() as usize).max(1);
    let h_time = h as f64 * dt;

    // K is only defined where both neighbours exist.
    let k_at = |i: usize| -> Option<f64> {
        (i >= h && i + h < smooth.len()).then(|| {
            ((smooth[i + h] - smooth[i]) - (smooth[i] - smooth[i - h])).abs() / h_time
        })
    };

    let mut out = Vec::new();
    for &e in &traj.events {
        let cycle = ((e - t_first) / scale).floor();
        let c0 = t_first + cycle * scale;
        let lo = ((c0 - t_first) / dt).round().max(0.0) as usize;
        let hi = (((c0 + scale - t_first) / dt).round() as usize).min(n);
        let med = median((lo..=hi).filter_map(k_at).collect());

        let centre = ((e - t_first) / dt).round() as isize;
        let reach = 2 * h as isize;
        let strength = (centre - reach..=centre + reach)
            .filter(|&i| i >= 0)
            .filter_map(|i| k_at(i as usize))
            .fold(0.0, f64::max);
        if strength > cfg.threshold * med + cfg.floor / h_time {
            out.push(e);
        }
    }
    out
}

/// Per-period extrema, trapezoidal mean and kink times.
pub fn cycle_stats(traj: &Trajectory) -> Result<Vec<CycleStats>> {
    let period = period_of(&traj.drive)?;
    let spans = cycles(traj, period, 1)?;
    let z = traj.z();
    let kink_times = kinks(traj);
    Ok(spans
        .into_iter()
        .enumerate()
        .map(|(c, (a, b))| {
            let (_, zs) = resample_z(traj, &z, a, b);
            let n = zs.len() - 1;
            let mean = (zs[1..n].iter().sum::<f64>() + 0.5 * (zs[0] + zs[n])) / n as f64;
            let (z_min, z_max) = zs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            CycleStats {
                cycle_index: c,
                z_mean: mean.clamp(z_min, z_max),
                z_min,
                z_max,
                kink_times: kink_times.iter().copied().filter(|&k| k >= a && k < b).collect(),
            }
        })
        .collect())
}

/// Signed polygon area of a closed path.
pub fn shoelace(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let (x0, y0) = points[i];
        let (x1, y1) = points[(i + 1) % n];
        s += x0 * y1 - x1 * y0;
    }
    0.5 * s
}

/// One `(omega0, Z)` loop per full drive period.
pub fn hysteresis(traj: &Trajectory) -> Result<Vec<HysteresisLoop>> {
    let period = period_of(&traj.drive)?;
    let b0 = traj.drive.amplitude();
    let spans = cycles(traj, period, 2)?;
    let z = traj.z();
    Ok(spans
        .into_iter()
        .enumerate()
        .map(|(c, (a, b))| {
            let (grid, zs) = resample_z(traj, &z, a, b);
            let points: Vec<(f64, f64)> = grid
                .iter()
                .zip(&zs)
                .map(|(&t, &zv)| (drive_value(t, &traj.drive), zv))
                .collect();
            let area = shoelace(&points);
            let (z_min, z_max) = zs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let box_area = 4.0 * b0 * (z_max - z_min);
            HysteresisLoop {
                cycle_index: c,
                closure: (zs[0] - zs[zs.len() - 1]).abs(),
                points,
                area,
                normalized_area: if box_area > 0.0 { area / box_area } else { 0.0 },
            }
        })
        .collect())
}

/// Mirror mismatch of `Z` about the midpoint of each period: the L2 norm of
/// `Z(t) - Z(t_a + t_b - t)` over the L2 norm of `Z`. 0 for specular pulses.
pub fn pulse_asymmetry(traj: &Trajectory) -> Result<Vec<f64>> {
    let period = period_of(&traj.drive)?;
    let spans = cycles(traj, period, 2)?;
    let z = traj.z();
    Ok(spans
        .into_iter()
        .map(|(a, b)| {
            let (_, zs) = resample_z(traj, &z, a, b);
            let n = zs.len();
            let mismatch: f64 = (0..n).map(|i| (zs[i] - zs[n - 1 - i]).powi(2)).sum();
            let energy: f64 = zs.iter().map(|v| v * v).sum();
            if energy > 0.0 {
                (mismatch / energy).sqrt()
            } else {
                0.0
            }
        })
        .collect())
}

/// Lag of the slope-change estimate used for reversal onsets, as a fraction
/// of the period.
const ONSET_LAG_FRAC: f64 = 0.005;

/// For each sign change of `Z`, the sharpest slope change of `Z` since the
/// previous sign change (where the reversal started), and its distance to the
/// nearest drive zero. `Z` is resampled at `period / CYCLE_RESOLUTION` and the
/// slope change is `|Z(t+h) - 2 Z(t) + Z(t-h)|` with `h = period / 200`.
pub fn reversal_onsets(traj: &Trajectory) -> Result<Vec<ReversalOnset>> {
    let period = period_of(&traj.drive)?;
    let zeros = &traj.events;
    let t_first = traj.times[0];
    let t_last = traj.times[traj.len() - 1];
    let dt = period / CYCLE_RESOLUTION as f64;
    let n = ((t_last - t_first) / dt).floor() as usize;
    let h = ((ONSET_LAG_FRAC * period / dt).round() as usize).max(1);
    let z = traj.z();
    let grid: Vec<f64> = (0..=n).map(|k| t_first + k as f64 * dt).collect();
    let zs: Vec<f64> = grid.iter().map(|&t| interpolate(&traj.times, &z, t)).collect();
    let bend = |j: usize| -> f64 {
        if j >= h && j + h <= n {
            (zs[j + h] - 2.0 * zs[j] + zs[j - h]).abs()
        } else {
            0.0
        }
    };

    let mut out = Vec::new();
    let mut seg_start = 0;
    for i in 1..=n {
        if zs[i - 1] == 0.0 || zs[i - 1].signum() == zs[i].signum() {
            continue;
        }
        let (sharpest, strength) = (seg_start..i)
            .map(|j| (j, bend(j)))
            .fold((seg_start, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        let t_crossing = grid[i - 1] + dt * zs[i - 1] / (zs[i - 1] - zs[i]);
        seg_start = i;
        // Nothing bends before the first crossing that is clear of the record start.
        if strength == 0.0 {
            continue;
        }
        let t_onset = grid[sharpest];
        if let Some(&nearest) = zeros
            .iter()
            .min_by(|a, b| (*a - t_onset).abs().total_cmp(&(*b - t_onset).abs()))
        {
            out.push(ReversalOnset {
                t_onset,
                t_crossing,
                nearest_zero: nearest,
                offset: (t_onset - nearest).abs() / period,
            });
        }
    }
    Ok(out)
}

/// Scalar digest of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub z_final: f64,
    pub z_mean: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub n_kinks: usize,
    /// Mean loop area over cycles after the first; NaN without two cycles.
    pub mean_area: f64,
    pub mean_asymmetry: f64,
}

impl Summary {
    pub const HEADER: [&'static str; 7] = [
        "z_final",
        "z_mean",
        "z_min",
        "z_max",
        "n_kinks",
        "mean_area",
        "mean_asymmetry",
    ];
}

pub fn summarize(traj: &Trajectory) -> Summary {
    let z = traj.z();
    let t = &traj.times;
    let n = z.len();
    let span = t[n - 1] - t[0];
    let integral: f64 = (1..n).map(|i| 0.5 * (z[i] + z[i - 1]) * (t[i] - t[i - 1])).sum();
    let z_mean = if span > 0.0 { integral / span } else { z[0] };
    let mean_after_first = |v: Vec<f64>| {
        if v.len() < 2 {
            f64::NAN
        } else {
            v[1..].iter().sum::<f64>() / (v.len() - 1) as f64
        }
    };
    let mean_area = hysteresis(traj)
        .map(|l| mean_after_first(l.iter().map(|l| l.area).collect()))
        .unwrap_or(f64::NAN);
    let mean_asymmetry = pulse_asymmetry(traj).map(mean_after_first).unwrap_or(f64::NAN);
    Summary {
        z_final: z[n - 1],
        z_mean,
        z_min: z.iter().copied().fold(f64::INFINITY, f64::min),
        z_max: z.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        n_kinks: kinks(traj).len(),
        mean_area,
        mean_asymmetry,
    }
}
