//! Closed-form roots of a real monic cubic.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Roots of `p^3 + a p^2 + b p + c`.
///
/// One real root and a conjugate pair: `[real, +Im, -Im]`. Three real roots:
/// descending order.
pub fn solve_cubic(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    // Depressed form x^3 + P x + Q with p = x - a/3.
    let shift = a / 3.0;
    let pp = b - a * a / 3.0;
    let qq = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (qq / 2.0).powi(2) + (pp / 3.0).powi(3);

    let poly = |p: f64| ((p + a) * p + b) * p + c;
    let dpoly = |p: f64| (3.0 * p + 2.0 * a) * p + b;
    let newton = |p: f64| {
        let d = dpoly(p);
        if d != 0.0 {
            let next = p - poly(p) / d;
            if next.is_finite() && poly(next).abs() <= poly(p).abs() {
                return next;
            }
        }
        p
    };

    if disc > 0.0 {
        // Cardano, taking the larger-magnitude cube root to avoid cancellation.
        let sq = disc.sqrt();
        let u = (-qq / 2.0 - qq.signum() * sq).cbrt();
        let v = if u != 0.0 { -pp / (3.0 * u) } else { 0.0 };
        let real = newton(u + v - shift);
        // Deflate: p^2 + q1 p + q0 from synthetic division by (p - real).
        let q1 = a + real;
        let q0 = b + real * q1;
        let im = (q0 - q1 * q1 / 4.0).max(0.0).sqrt();
        let re = -q1 / 2.0;
        let pair = polish_complex(Complex64::new(re, im), a, b, c);
        [Complex64::new(real, 0.0), pair, pair.conj()]
    } else if pp == 0.0 {
        let r = newton(-shift);
        [Complex64::new(r, 0.0); 3]
    } else {
        // Viete, three real roots.
        let m = 2.0 * (-pp / 3.0).sqrt();
        let arg = (3.0 * qq / (pp * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let mut roots = [0.0; 3];
        for (k, r) in roots.iter_mut().enumerate() {
            *r = newton(m * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift);
        }
        roots.sort_by(|x, y| y.total_cmp(x));
        roots.map(|r| Complex64::new(r, 0.0))
    }
}

fn polish_complex(p: Complex64, a: f64, b: f64, c: f64) -> Complex64 {
    let f = ((p + a) * p + b) * p + c;
    let df = (3.0 * p + 2.0 * a) * p + b;
    if df.norm() == 0.0 {
        return p;
    }
    let next = p - f / df;
    let f_next = ((next + a) * next + b) * next + c;
    if next.re.is_finite() && next.im.is_finite() && f_next.norm() <= f.norm() && next.im > 0.0 {
        next
    } else {
        p
    }
}
