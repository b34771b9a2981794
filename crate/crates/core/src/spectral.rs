//! Frequency-domain view of a linear sweep: the auxiliary variable
//! `phi = X + (slope / delta) t Z`, the large-frequency forms of the Fourier
//! transforms of `Z` and `X`, and a windowed DFT of sampled trajectories.
//!
//! Transforms use the `F(w) = int e^{-i w t} f(t) dt` convention.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::lz::lz_nu;
use crate::model::BlochState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    X,
    Y,
    Z,
}

impl std::str::FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Self::X),
            "y" => Ok(Self::Y),
            "z" => Ok(Self::Z),
            other => Err(Error::Validation(format!("unknown component '{other}' (x, y or z)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    None,
    #[default]
    Hann,
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "hann" => Ok(Self::Hann),
            other => Err(Error::Validation(format!("unknown window '{other}' (none or hann)"))),
        }
    }
}

/// One frequency bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSample {
    pub omega: f64,
    pub value: Complex64,
}

pub fn phi_from_state(t: f64, v: &BlochState, delta: f64, slope: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::Domain("phi is undefined for delta = 0".into()));
    }
    Ok(v.x + slope / delta * t * v.z)
}

/// `Z = (delta / slope) dphi/dt` on a uniform grid, with fourth-order central
/// differences inside and second-order one-sided ones at the ends.
pub fn z_from_phi(dt: f64, phi: &[f64], delta: f64, slope: f64) -> Vec<f64> {
    let n = phi.len();
    let scale = delta / slope;
    (0..n)
        .map(|i| {
            let d = if i >= 2 && i + 2 < n {
                (phi[i - 2] - 8.0 * phi[i - 1] + 8.0 * phi[i + 1] - phi[i + 2]) / (12.0 * dt)
            } else if i == 0 && n >= 3 {
                (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * dt)
            } else if i + 1 == n && n >= 3 {
                (3.0 * phi[i] - 4.0 * phi[i - 1] + phi[i - 2]) / (2.0 * dt)
            } else if i >= 1 && i + 1 < n {
                (phi[i + 1] - phi[i - 1]) / (2.0 * dt)
            } else {
                f64::NAN
            };
            scale * d
        })
        .collect()
}

/// Phase `w^2 / (2 slope) - 2 nu ln(w / sqrt(slope))` shared by both branches.
fn branch_phase(w: f64, nu: f64, slope: f64) -> f64 {
    w * w / (2.0 * slope) - 2.0 * nu * (w / slope.sqrt()).ln()
}

fn check_omega(omega: f64) -> Result<()> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::Domain(format!("asymptotic form needs omega != 0, got {omega}")));
    }
    Ok(())
}

/// Large-`|omega|` form of the transform of `Z`, up to an overall constant:
/// `i (delta / (slope w)) e^{-pi nu / 2} [e^{i psi} + e^{-i psi}]`.
///
/// Negative frequencies follow from the reality of `Z(t)`.
pub fn z_tilde_asymptotic(omega: f64, delta: f64, slope: f64) -> Result<Complex64> {
    check_omega(omega)?;
    let nu = lz_nu(delta, slope)?;
    let w = omega.abs();
    let psi = branch_phase(w, nu, slope);
    let bracket = Complex64::from_polar(1.0, psi) + Complex64::from_polar(1.0, -psi);
    let value = Complex64::new(0.0, delta / (slope * w) * (-PI * nu / 2.0).exp()) * bracket;
    Ok(if omega > 0.0 { value } else { value.conj() })
}

/// Large-`|omega|` form of the transform of `X`:
/// `(1 / slope) (1 - 2 delta^2 / w^2) e^{-pi nu / 2} [e^{i psi} - e^{-i psi}]`.
pub fn x_tilde_asymptotic(omega: f64, delta: f64, slope: f64) -> Result<Complex64> {
    check_omega(omega)?;
    let nu = lz_nu(delta, slope)?;
    let w = omega.abs();
    let psi = branch_phase(w, nu, slope);
    let bracket = Complex64::from_polar(1.0, psi) - Complex64::from_polar(1.0, -psi);
    let prefactor = (1.0 - 2.0 * (delta / w).powi(2)) / slope * (-PI * nu / 2.0).exp();
    let value = prefactor * bracket;
    Ok(if omega > 0.0 { value } else { value.conj() })
}

/// Windowed DFT of uniformly sampled data starting at `t0`, scaled by `dt`
/// and phase-referenced so that it approximates the continuous transform.
/// Output is sorted by angular frequency.
pub fn spectrum(t0: f64, dt: f64, values: &[f64], window: Window) -> Result<Vec<SpectralSample>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Validation("spectrum needs at least two samples".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Validation(format!("sample spacing must be > 0, got {dt}")));
    }
    let mut buf: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let w = match window {
                Window::None => 1.0,
                Window::Hann => 0.5 * (1.0 - (2.0 * PI * i as f64 / (n - 1) as f64).cos()),
            };
            Complex64::new(w * x, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let base = 2.0 * PI / (n as f64 * dt);
    let mut out: Vec<SpectralSample> = buf
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            let signed = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            let omega = base * signed;
            SpectralSample {
                omega,
                value: dt * Complex64::from_polar(1.0, -omega * t0) * v,
            }
        })
        .collect();
    out.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    Ok(out)
}

/// [`spectrum`] of one Bloch component. The trajectory must be uniformly
/// sampled, including its final point.
pub fn spectrum_of_trajectory(
    traj: &Trajectory,
    component: Component,
    window: Window,
) -> Result<Vec<SpectralSample>> {
    let dt = traj.uniform_dt(1e-6).ok_or_else(|| {
        Error::Validation("spectrum needs uniformly sampled data (choose a span that is a multiple of sample_dt)".into())
    })?;
    let values = match component {
        Component::X => traj.x(),
        Component::Y => traj.y(),
        Component::Z => traj.z(),
    };
    spectrum(traj.times[0], dt, &values, window)
}

/// Upper concave hull of `(ln omega, ln amp)`, evaluated back at every input
/// frequency. Frequencies must be positive and increasing.
pub fn upper_envelope_loglog(omega: &[f64], amp: &[f64]) -> Vec<f64> {
    assert_eq!(omega.len(), amp.len());
    let x: Vec<f64> = omega.iter().map(|w| w.ln()).collect();
    let y: Vec<f64> = amp.iter().map(|a| a.max(f64::MIN_POSITIVE).ln()).collect();
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..x.len() {
        while hull.len() >= 2 {
            let (i0, i1) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (x[i1] - x[i0]) * (y[i] - y[i0]) - (y[i1] - y[i0]) * (x[i] - x[i0]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = Vec::with_capacity(x.len());
    let mut seg = 0;
    for i in 0..x.len() {
        while seg + 2 < hull.len() && x[hull[seg + 1]] < x[i] {
            seg += 1;
        }
        let value = if hull.len() == 1 {
            y[hull[0]]
        } else {
            let (a, b) = (hull[seg], hull[seg + 1]);
            let s = (x[i] - x[a]) / (x[b] - x[a]);
            y[a] + s * (y[b] - y[a])
        };
        out.push(value.exp());
    }
    out
}

/// Least-squares line through `(ln x, ln y)`: returns `(exponent, prefactor)`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, (my - slope * mx).exp())
}

/// Least-squares real scale `s` for `measured ~ s * model`, and the RMS of
/// the residual relative to the RMS of `measured`.
pub fn scaled_residual(measured: &[f64], model: &[f64]) -> (f64, f64) {
    let dot: f64 = measured.iter().zip(model).map(|(a, b)| a * b).sum();
    let norm: f64 = model.iter().map(|b| b * b).sum();
    let scale = dot / norm;
    let res: f64 = measured.iter().zip(model).map(|(a, b)| (a - scale * b).powi(2)).sum();
    let energy: f64 = measured.iter().map(|a| a * a).sum();
    (scale, (res / energy).sqrt())
}

/// Comparison of a measured `|Z~|` with the asymptotic form on a band.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeComparison {
    pub omega: Vec<f64>,
    pub measured: Vec<f64>,
    pub model: Vec<f64>,
    pub measured_envelope: Vec<f64>,
    pub model_envelope: Vec<f64>,
    /// Power-law exponent fitted to the measured envelope.
    pub exponent: f64,
    /// Scale applied to the model envelope.
    pub scale: f64,
    pub envelope_rms: f64,
    /// Same fit on the raw moduli, bin by bin.
    pub pointwise_rms: f64,
}

/// Fits the measured spectrum of `Z` against [`z_tilde_asymptotic`] on
/// `band = (lo, hi)` (positive frequencies). Envelopes are upper hulls in
/// log-log coordinates, built the same way for both curves.
pub fn compare_z_envelope(
    samples: &[SpectralSample],
    delta: f64,
    slope: f64,
    band: (f64, f64),
) -> Result<EnvelopeComparison> {
    let (omega, measured): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|s| s.omega > 0.0 && s.omega >= band.0 && s.omega <= band.1)
        .map(|s| (s.omega, s.value.norm()))
        .unzip();
    if omega.len() < 3 {
        return Err(Error::Validation(format!(
            "band [{}, {}] holds fewer than 3 frequency bins",
            band.0, band.1
        )));
    }
    let model = omega
        .iter()
        .map(|&w| z_tilde_asymptotic(w, delta, slope).map(|z| z.norm()))
        .collect::<Result<Vec<f64>>>()?;
    let measured_envelope = upper_envelope_loglog(&omega, &measured);
    let model_envelope = upper_envelope_loglog(&omega, &model);
    let (exponent, _) = fit_power_law(&omega, &measured_envelope);
    let (scale, envelope_rms) = scaled_residual(&measured_envelope, &model_envelope);
    let (_, pointwise_rms) = scaled_residual(&measured, &model);
    Ok(EnvelopeComparison {
        omega,
        measured,
        model: model.iter().map(|m| scale * m).collect(),
        measured_envelope,
        model_envelope: model_envelope.iter().map(|m| scale * m).collect(),
        exponent,
        scale,
        envelope_rms,
        pointwise_rms,
    })
}
