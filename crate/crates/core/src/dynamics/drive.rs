use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::HamiltonianParams;

/// Time dependence of the level spacing `omega0(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveSpec {
    /// `b0 cos(omega0_freq t)`.
    Cosine { b0: f64, omega0_freq: f64 },
    /// `slope * t`, the linearization near a crossing. The window is the
    /// nominal sweep interval used when no explicit span is given.
    LinearSweep { slope: f64, t_start: f64, t_end: f64 },
}

impl DriveSpec {
    pub fn cosine(b0: f64, omega0_freq: f64) -> Self {
        DriveSpec::Cosine { b0, omega0_freq }
    }

    pub fn linear_sweep(slope: f64, t_start: f64, t_end: f64) -> Self {
        DriveSpec::LinearSweep {
            slope,
            t_start,
            t_end,
        }
    }

    /// Cosine drive with the amplitude and frequency stored in `h`.
    pub fn from_hamiltonian(h: &HamiltonianParams) -> Self {
        Self::cosine(h.b0, h.omega0_freq)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DriveSpec::Cosine { b0, omega0_freq } => {
                if !b0.is_finite() || b0 < 0.0 {
                    return Err(Error::Validation(format!("drive amplitude b0 must be >= 0, got {b0}")));
                }
                if !omega0_freq.is_finite() || omega0_freq < 0.0 {
                    return Err(Error::Validation(format!(
                        "drive frequency must be >= 0, got {omega0_freq}"
                    )));
                }
            }
            DriveSpec::LinearSweep {
                slope,
                t_start,
                t_end,
            } => {
                if !slope.is_finite() || slope == 0.0 {
                    return Err(Error::Validation("linear sweep slope must be nonzero".into()));
                }
                if !(t_start < t_end) {
                    return Err(Error::Validation(format!(
                        "sweep window must satisfy t_start < t_end, got [{t_start}, {t_end}]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Drive period, if the drive is periodic.
    pub fn period(&self) -> Option<f64> {
        match *self {
            DriveSpec::Cosine { omega0_freq, .. } if omega0_freq > 0.0 => Some(2.0 * PI / omega0_freq),
            _ => None,
        }
    }

    /// Amplitude scale used for event tolerances.
    pub fn amplitude(&self) -> f64 {
        match *self {
            DriveSpec::Cosine { b0, .. } => b0,
            DriveSpec::LinearSweep {
                slope,
                t_start,
                t_end,
            } => slope.abs() * t_start.abs().max(t_end.abs()),
        }
    }

    /// Crossing slope `|d omega0/dt|` at a zero.
    pub fn crossing_slope(&self) -> f64 {
        match *self {
            DriveSpec::Cosine { b0, omega0_freq } => b0 * omega0_freq,
            DriveSpec::LinearSweep { slope, .. } => slope.abs(),
        }
    }

    /// Sign of `omega0(t)`, 0 exactly at a zero.
    ///
    /// Zeros are located analytically, so floating-point noise in `cos` at
    /// `(k + 1/2) pi / omega0_freq` does not produce a spurious sign.
    pub fn sign_at(&self, t: f64) -> f64 {
        match *self {
            DriveSpec::Cosine { b0, omega0_freq } => {
                if b0 == 0.0 {
                    return 0.0;
                }
                if omega0_freq == 0.0 {
                    return 1.0;
                }
                let k = (omega0_freq * t / PI - 0.5).round();
                let zero = (k + 0.5) * PI / omega0_freq;
                if (t - zero).abs() <= 4.0 * f64::EPSILON * zero.abs().max(1.0) {
                    0.0
                } else {
                    sign(drive_value(t, self))
                }
            }
            DriveSpec::LinearSweep { slope, .. } => sign(slope * t),
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `omega0(t)`.
pub fn drive_value(t: f64, d: &DriveSpec) -> f64 {
    match *d {
        DriveSpec::Cosine { b0, omega0_freq } => b0 * (omega0_freq * t).cos(),
        DriveSpec::LinearSweep { slope, .. } => slope * t,
    }
}

/// Zeros of `omega0(t)` inside `[t0, t1]`, in increasing order.
pub fn find_drive_zeros(d: &DriveSpec, t_span: (f64, f64)) -> Vec<f64> {
    let (t0, t1) = t_span;
    if !(t0 <= t1) {
        return Vec::new();
    }
    match *d {
        DriveSpec::Cosine { b0, omega0_freq } => {
            if b0 == 0.0 || omega0_freq == 0.0 {
                return Vec::new();
            }
            let k_lo = (omega0_freq * t0 / PI - 0.5).ceil() as i64;
            let k_hi = (omega0_freq * t1 / PI - 0.5).floor() as i64;
            (k_lo..=k_hi)
                .map(|k| (k as f64 + 0.5) * PI / omega0_freq)
                .filter(|&z| z >= t0 && z <= t1)
                .collect()
        }
        DriveSpec::LinearSweep { .. } => {
            if t0 <= 0.0 && 0.0 <= t1 {
                vec![0.0]
            } else {
                Vec::new()
            }
        }
    }
}
