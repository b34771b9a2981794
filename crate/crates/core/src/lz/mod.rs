//! Single-crossing Landau-Zener quantities and the eigenvalues of the
//! dissipative generator along a linear sweep.

mod cubic;
mod gamma;

pub use cubic::solve_cubic;
pub use gamma::complex_log_gamma;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::dynamics::matrix_with_omega0;
use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Adiabaticity parameter `nu = delta^2 / (4 slope)`.
pub fn lz_nu(delta: f64, slope: f64) -> Result<f64> {
    if !(slope > 0.0) || !slope.is_finite() {
        return Err(Error::Validation(format!("sweep slope must be > 0, got {slope}")));
    }
    Ok(delta * delta / (4.0 * slope))
}

/// `p(t) = slope t / 2 + nu / t`.
pub fn semiclassical_momentum(t: f64, delta: f64, slope: f64) -> Result<f64> {
    let nu = lz_nu(delta, slope)?;
    if t == 0.0 {
        return Err(Error::Domain("semiclassical momentum is singular at t = 0".into()));
    }
    Ok(slope * t / 2.0 + nu / t)
}

/// `Z(+inf) / Z(-inf)` for a single linear sweep.
pub fn transfer_ratio(nu: f64) -> f64 {
    2.0 * (-2.0 * PI * nu).exp() - 1.0
}

/// Crossing rotation `S = [[cos th, i sin th e^{i phi}], [i sin th e^{-i phi}, cos th]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringData {
    pub nu: f64,
    pub theta: f64,
    pub phi: f64,
    pub s: [[Complex64; 2]; 2],
}

impl ScatteringData {
    pub fn transfer_ratio(&self) -> f64 {
        transfer_ratio(self.nu)
    }
}

/// S-matrix of a crossing with adiabaticity `nu`.
///
/// `S12` is evaluated as `sqrt(2 pi / nu) e^{-pi nu / 2 - i pi / 4} / Gamma(i nu)`
/// in log form, which stays finite for large `nu`. At `nu = 0` the identity is
/// returned with `phi` set to its `nu -> 0+` limit `-pi/4`.
pub fn s_matrix(nu: f64) -> Result<ScatteringData> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("nu must be >= 0, got {nu}")));
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if nu == 0.0 {
        return Ok(ScatteringData {
            nu,
            theta: 0.0,
            phi: -FRAC_PI_4,
            s: [[one, zero], [zero, one]],
        });
    }
    let cos_theta = (-PI * nu).exp();
    let theta = cos_theta.acos();
    let ln_s12 = Complex64::new(0.5 * (2.0 * PI / nu).ln() - PI * nu / 2.0, -FRAC_PI_4)
        - complex_log_gamma(Complex64::new(0.0, nu))?;
    let s12 = ln_s12.exp();
    let phi = wrap_angle(s12.arg() - FRAC_PI_2);
    let sin_theta = theta.sin();
    let s21 = Complex64::new(0.0, sin_theta) * Complex64::from_polar(1.0, -phi);
    let diag = Complex64::new(cos_theta, 0.0);
    Ok(ScatteringData {
        nu,
        theta,
        phi,
        s: [[diag, s12], [s21, diag]],
    })
}

/// Wraps into `(-pi, pi]`.
fn wrap_angle(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Eigenvalues of the instantaneous generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple {
    pub p: [Complex64; 3],
}

impl EigenTriple {
    pub fn sum(&self) -> Complex64 {
        self.p.iter().sum()
    }
}

/// Roots of the characteristic polynomial of `M` with `omega0 = slope t`.
///
/// Works for any dissipator; the ordering is the real root first, then the
/// `+Im` and `-Im` members of the pair (descending when all three are real).
pub fn eigenvalues_exact(t: f64, p: &SystemParams, slope: f64) -> EigenTriple {
    let m = matrix_with_omega0(slope * t, p);
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    EigenTriple {
        p: solve_cubic(-trace, minors, -det),
    }
}

fn uniaxial(p: &SystemParams) -> Result<(f64, f64, f64)> {
    let (gamma_r, gamma) = p.dissipator.uniaxial_rates().ok_or_else(|| {
        Error::Validation("uniaxial dissipation required (gamma1 = gamma2, no off-diagonal rates)".into())
    })?;
    // The uniaxial dissipator is symmetric about z, so delta_prime only adds
    // to the effective transverse coupling.
    let delta = p.hamiltonian.delta.hypot(p.hamiltonian.delta_prime);
    Ok((gamma_r, gamma, delta))
}

/// `(delta_c, gamma_c)` with `delta_c = (gamma - gamma_r) / 3` and
/// `gamma_c = delta_c (delta_c^2 - Delta^2 / 2)`.
pub fn gamma_c(p: &SystemParams) -> Result<(f64, f64)> {
    let (gamma_r, gamma, delta) = uniaxial(p)?;
    let d = (gamma - gamma_r) / 3.0;
    Ok((d, d * (d * d - delta * delta / 2.0)))
}

/// Coefficient that the exact eigenvalues follow at order `(slope t)^-2`:
/// `Re p1 = -gamma - 2 g / (slope t)^2` and `Re p2,3 = -gamma_r + g / (slope t)^2`
/// with `g = -(3/2) delta_c Delta^2`.
pub fn gamma_c_exact(p: &SystemParams) -> Result<f64> {
    let (gamma_r, gamma, delta) = uniaxial(p)?;
    let d = (gamma - gamma_r) / 3.0;
    Ok(-1.5 * d * delta * delta)
}

/// Large-`|slope t|` expansion of the eigenvalues through `(slope t)^-2`,
/// built from [`gamma_c`].
pub fn eigenvalues_asymptotic(t: f64, p: &SystemParams, slope: f64) -> Result<EigenTriple> {
    let (_, gc) = gamma_c(p)?;
    asymptotic_with(t, p, slope, gc)
}

/// As [`eigenvalues_asymptotic`] with a caller-supplied coefficient.
pub fn asymptotic_with(t: f64, p: &SystemParams, slope: f64, gc: f64) -> Result<EigenTriple> {
    let (gamma_r, gamma, delta) = uniaxial(p)?;
    let nu = lz_nu(delta, slope)?;
    if t == 0.0 {
        return Err(Error::Domain("asymptotic eigenvalues are singular at t = 0".into()));
    }
    let w = slope * t;
    let corr = gc / (w * w);
    let im = (w + 2.0 * nu / t).abs();
    let pair = Complex64::new(-gamma_r + corr, im);
    Ok(EigenTriple {
        p: [Complex64::new(-gamma - 2.0 * corr, 0.0), pair, pair.conj()],
    })
}
