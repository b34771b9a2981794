use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(z)` on the branch continuous in `z` off the negative real axis
/// (the one with `lnGamma(z + 1) = lnGamma(z) + ln z`).
///
/// Lanczos series for `Re z >= 1/2`; smaller arguments are shifted up with the
/// recurrence.
pub fn complex_log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("log-gamma of non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::Domain(format!("Gamma has a pole at {}", z.re)));
    }
    let mut shifted = z;
    let mut correction = Complex64::new(0.0, 0.0);
    while shifted.re < 0.5 {
        correction += shifted.ln();
        shifted += 1.0;
    }
    Ok(lanczos(shifted) - correction)
}

fn lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (k, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        x += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}
