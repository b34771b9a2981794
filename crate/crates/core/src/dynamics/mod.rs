//! Time integration of the Bloch equation `v' = M(t) v + C`.

mod drive;
mod stepper;

pub use drive::{drive_value, find_drive_zeros, DriveSpec};
pub use stepper::SolverStats;

use crate::error::{Error, Result};
use crate::model::{BlochState, RelaxationMode, SystemParams, PHYSICAL_TOL};
use stepper::{interpolate, integrate_segment, StepControl, Vec3};

pub type Matrix3 = [[f64; 3]; 3];

/// Generator `M` and drift `C` at time `t`.
///
/// In sign-following mode the `Z` drift is `-gamma3 * sign(omega0(t))`, with
/// the sign taken as 0 exactly at a drive zero.
pub fn generator_at(t: f64, p: &SystemParams, d: &DriveSpec) -> (Matrix3, Vec3) {
    let w = drive_value(t, d);
    let m = matrix_with_omega0(w, p);
    let c = match p.relaxation_mode {
        RelaxationMode::SignFollowing => drift(p, d.sign_at(t)),
        _ => drift(p, 0.0),
    };
    (m, c)
}

pub(crate) fn matrix_with_omega0(w: f64, p: &SystemParams) -> Matrix3 {
    let h = &p.hamiltonian;
    let q = &p.dissipator;
    [
        [-q.gamma1, q.alpha - w, q.beta + h.delta_prime],
        [q.alpha + w, -q.gamma2, q.gamma_sym - h.delta],
        [q.beta - h.delta_prime, q.gamma_sym + h.delta, -q.gamma3],
    ]
}

/// Drift vector; `sign` only matters in sign-following mode.
fn drift(p: &SystemParams, sign: f64) -> Vec3 {
    let q = &p.dissipator;
    match p.relaxation_mode {
        RelaxationMode::SignFollowing => [q.c1, q.c2, -q.gamma3 * sign],
        _ => [q.c1, q.c2, q.c3],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub dt_max: f64,
    pub dt_init: f64,
    /// Output grid spacing, anchored at the start of the span.
    pub sample_dt: f64,
    /// Step budget per smooth segment (between drive zeros).
    pub max_steps: usize,
}

impl IntegratorConfig {
    /// Defaults scaled to the drive: `dt_max` is a 200th of the period (or
    /// of the span for a non-periodic drive) and ten samples per `dt_max`.
    ///
    /// The tolerances keep the unitary norm drift below 1e-8 over ten drive
    /// cycles; at `rtol = 1e-9` it reaches about 4e-8.
    pub fn for_drive(d: &DriveSpec, t_span: (f64, f64)) -> Self {
        let scale = d.period().unwrap_or((t_span.1 - t_span.0).abs());
        let dt_max = if scale > 0.0 { scale / 200.0 } else { 1.0 };
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            dt_max,
            dt_init: dt_max / 100.0,
            sample_dt: dt_max / 10.0,
            max_steps: 10_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} must be > 0, got {x}")))
            }
        };
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("dt_max", self.dt_max)?;
        positive("dt_init", self.dt_init)?;
        positive("sample_dt", self.sample_dt)?;
        if self.dt_init > self.dt_max {
            return Err(Error::Validation(format!(
                "dt_init ({}) must not exceed dt_max ({})",
                self.dt_init, self.dt_max
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Validation("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
    /// Drive zeros inside the span.
    pub events: Vec<f64>,
    pub params: SystemParams,
    pub drive: DriveSpec,
    pub stats: SolverStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> BlochState {
        *self.states.last().expect("trajectory has at least one sample")
    }

    pub fn x(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.x).collect()
    }

    pub fn y(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.y).collect()
    }

    pub fn z(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.z).collect()
    }

    /// `omega0(t)` at each sample.
    pub fn omega0(&self) -> Vec<f64> {
        self.times.iter().map(|&t| drive_value(t, &self.drive)).collect()
    }

    /// Common spacing if the samples are uniform within `rel_tol`.
    pub fn uniform_dt(&self, rel_tol: f64) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let n = self.times.len() - 1;
        let dt = (self.times[n] - self.times[0]) / n as f64;
        self.times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= rel_tol * dt)
            .then_some(dt)
    }
}

/// Integrates from `v0` over `t_span`, sampling on the grid
/// `t_span.0 + k * sample_dt` plus the final time.
///
/// The span is split at the drive zeros and each piece is integrated as a
/// smooth problem, so the step always lands exactly on a zero.
pub fn integrate(
    p: &SystemParams,
    d: &DriveSpec,
    v0: BlochState,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    p.validate()?;
    d.validate()?;
    cfg.validate()?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(Error::Validation(format!(
            "t_span must satisfy t0 < t1, got [{t0}, {t1}]"
        )));
    }
    if !v0.is_physical(1e-12) {
        return Err(Error::Validation(format!(
            "initial state has |v| = {} > 1",
            v0.norm()
        )));
    }
    if p.relaxation_mode == RelaxationMode::SignFollowing && d.amplitude() == 0.0 {
        return Err(Error::Validation(
            "sign_following relaxation needs a drive with a defined sign (b0 > 0)".into(),
        ));
    }

    let events = find_drive_zeros(d, t_span);
    let mut bounds = Vec::with_capacity(events.len() + 2);
    bounds.push(t0);
    bounds.extend(events.iter().copied().filter(|&z| z > t0 && z < t1));
    bounds.push(t1);

    let ctl = StepControl {
        rtol: cfg.rtol,
        atol: cfg.atol,
        dt_max: cfg.dt_max,
        max_steps: cfg.max_steps,
    };
    let sample_dt = cfg.sample_dt;
    let snap = 1e-9 * sample_dt;
    let n_grid = ((t1 - t0) / sample_dt + 1e-9).floor() as usize + 1;
    let mut times = Vec::with_capacity(n_grid + 1);
    let mut states = Vec::with_capacity(n_grid + 1);
    times.push(t0);
    states.push(v0);
    let mut next_k: usize = 1;

    let mut stats = SolverStats::default();
    let mut h = cfg.dt_init;
    let mut y = v0.to_array();

    for seg in bounds.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let sign = d.sign_at(0.5 * (a + b));
        let c = drift(p, sign);
        let rhs = |t: f64, v: &Vec3| {
            let m = matrix_with_omega0(drive_value(t, d), p);
            let mut out = c;
            for i in 0..3 {
                out[i] += m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
            }
            out
        };
        let (y_end, _) = integrate_segment(&rhs, a, b, y, &mut h, &ctl, &mut stats, |step| {
            let n2 = step.y1.iter().map(|x| x * x).sum::<f64>();
            if n2 > 1.0 + PHYSICAL_TOL || !n2.is_finite() {
                return Err(Error::Unphysical {
                    t: step.t1,
                    norm: n2.sqrt(),
                });
            }
            while next_k < n_grid {
                let tk = t0 + next_k as f64 * sample_dt;
                if tk > step.t1 + snap {
                    break;
                }
                let v = if (tk - step.t1).abs() <= snap {
                    *step.y1
                } else {
                    interpolate(step, tk)
                };
                times.push(tk);
                states.push(BlochState::from_array(v));
                next_k += 1;
            }
            Ok(())
        })?;
        y = y_end;
    }

    let last_t = *times.last().expect("nonempty");
    if t1 - last_t > snap {
        times.push(t1);
        states.push(BlochState::from_array(y));
    } else {
        *times.last_mut().expect("nonempty") = t1;
        *states.last_mut().expect("nonempty") = BlochState::from_array(y);
    }

    Ok(Trajectory {
        times,
        states,
        events,
        params: *p,
        drive: *d,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DissipatorParams, HamiltonianParams};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unitary(delta: f64, omega0: f64) -> SystemParams {
        SystemParams::unitary(HamiltonianParams::new(delta, omega0))
    }

    #[test]
    fn pure_rotation_generator() {
        let p = unitary(0.0, 0.0);
        let d = DriveSpec::cosine(0.7, 0.0);
        let (m, c) = generator_at(3.0, &p, &d);
        assert_eq!(m, [[0.0, -0.7, 0.0], [0.7, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        assert_eq!(c, [0.0; 3]);
    }

    #[test]
    fn fig1_generator_at_zero() {
        let p = unitary(0.01, 0.02);
        let d = DriveSpec::from_hamiltonian(&p.hamiltonian);
        let (m, _) = generator_at(0.0, &p, &d);
        assert_eq!(m[0][1], -1.0);
        assert_eq!(m[1][2], -0.01);
        assert_eq!(m[2][1], 0.01);
        assert_eq!((m[0][0], m[1][1], m[2][2]), (-0.0, -0.0, -0.0));
    }

    #[test]
    fn sign_following_drift_after_down_crossing() {
        let p = SystemParams {
            hamiltonian: HamiltonianParams::new(0.05, 0.02),
            dissipator: DissipatorParams::uniaxial(0.035, 0.07),
            relaxation_mode: RelaxationMode::SignFollowing,
        };
        let d = DriveSpec::from_hamiltonian(&p.hamiltonian);
        let zero = find_drive_zeros(&d, (0.0, 100.0))[0];
        let (_, c) = generator_at(zero + 1.0, &p, &d);
        assert_abs_diff_eq!(c[2], 0.07);
        let (_, c) = generator_at(zero, &p, &d);
        assert_eq!(c[2], 0.0);
        let (_, c) = generator_at(zero - 1.0, &p, &d);
        assert_abs_diff_eq!(c[2], -0.07);
    }

    #[test]
    fn pure_precession() {
        let w = 0.3;
        let p = unitary(0.0, 0.0);
        let d = DriveSpec::cosine(w, 0.0);
        let cfg = IntegratorConfig {
            sample_dt: 0.5,
            ..IntegratorConfig::for_drive(&d, (0.0, 50.0))
        };
        let traj = integrate(&p, &d, BlochState::new(1.0, 0.0, 0.0), (0.0, 50.0), &cfg).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert_abs_diff_eq!(s.x, (w * t).cos(), epsilon = 1e-8);
            assert_abs_diff_eq!(s.y, (w * t).sin(), epsilon = 1e-8);
            assert_eq!(s.z, 0.0);
        }
        assert!(traj.events.is_empty());
    }

    #[test]
    fn samples_on_grid_plus_endpoint() {
        let p = unitary(0.1, 0.05);
        let d = DriveSpec::from_hamiltonian(&p.hamiltonian);
        let cfg = IntegratorConfig {
            sample_dt: 0.3,
            ..IntegratorConfig::for_drive(&d, (0.0, 10.0))
        };
        let traj = integrate(&p, &d, BlochState::up(), (0.0, 10.0), &cfg).unwrap();
        assert_eq!(traj.len(), 35);
        assert_eq!(*traj.times.last().unwrap(), 10.0);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));

        let cfg = IntegratorConfig { sample_dt: 0.5, ..cfg };
        let traj = integrate(&p, &d, BlochState::up(), (0.0, 10.0), &cfg).unwrap();
        assert_eq!(traj.len(), 21);
        assert!(traj.uniform_dt(1e-12).is_some());
    }

    #[test]
    fn events_are_drive_zeros() {
        let p = unitary(0.12, 0.063);
        let d = DriveSpec::from_hamiltonian(&p.hamiltonian);
        let span = (0.0, 2.0 * d.period().unwrap());
        let traj = integrate(&p, &d, BlochState::down(), span, &IntegratorConfig::for_drive(&d, span)).unwrap();
        assert_eq!(traj.events.len(), 4);
        for e in &traj.events {
            assert!(drive_value(*e, &d).abs() < 1e-11);
        }
    }

    #[test]
    fn isotropic_damping_scales_unitary_norm() {
        let g = 0.02;
        let mut p = unitary(0.1, 0.05);
        p.dissipator = DissipatorParams::isotropic(g);
        p.relaxation_mode = RelaxationMode::Homogeneous;
        let d = DriveSpec::from_hamiltonian(&p.hamiltonian);
        let span = (0.0, 200.0);
        let traj = integrate(&p, &d, BlochState::up(), span, &IntegratorConfig::for_drive(&d, span)).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert_abs_diff_eq!(s.norm() * (g * t).exp(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn fixed_sign_sign_following_matches_constant_drift() {
        // omega0 > 0 over [0, 50] for omega0_freq = 0.02 (first zero at 78.5).
        let gamma = 0.07;
        let base = SystemParams {
            hamiltonian: HamiltonianParams::new(0.05, 0.02),
            dissipator: DissipatorParams::uniaxial(0.035, gamma),
            relaxation_mode: RelaxationMode::SignFollowing,
        };
        let mut homogeneous = base;
        homogeneous.relaxation_mode = RelaxationMode::Homogeneous;
        homogeneous.dissipator.c3 = -gamma;
        let d = DriveSpec::from_hamiltonian(&base.hamiltonian);
        let span = (0.0, 50.0);
        let cfg = IntegratorConfig::for_drive(&d, span);
        let a = integrate(&base, &d, BlochState::down(), span, &cfg).unwrap();
        let b = integrate(&homogeneous, &d, BlochState::down(), span, &cfg).unwrap();
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn rejects_bad_input() {
        let p = unitary(0.1, 0.05);
        let d = DriveSpec::from_hamiltonian(&p.hamiltonian);
        let cfg = IntegratorConfig::for_drive(&d, (0.0, 10.0));
        assert!(matches!(
            integrate(&p, &d, BlochState::new(1.0, 1.0, 0.0), (0.0, 10.0), &cfg),
            Err(Error::Validation(_))
        ));
        assert!(integrate(&p, &d, BlochState::up(), (1.0, 1.0), &cfg).is_err());
        let bad = IntegratorConfig {
            dt_init: 2.0 * cfg.dt_max,
            ..cfg
        };
        assert!(integrate(&p, &d, BlochState::up(), (0.0, 10.0), &bad).is_err());
    }

    #[test]
    fn static_bias_sign_following_needs_amplitude() {
        let p = SystemParams {
            hamiltonian: HamiltonianParams::new(0.05, 0.0),
            dissipator: DissipatorParams::uniaxial(0.01, 0.02),
            relaxation_mode: RelaxationMode::SignFollowing,
        };
        let span = (0.0, 10.0);
        let d = DriveSpec::cosine(0.0, 0.0);
        let cfg = IntegratorConfig::for_drive(&d, span);
        assert!(integrate(&p, &d, BlochState::up(), span, &cfg).is_err());
        let d = DriveSpec::cosine(1.0, 0.0);
        assert!(integrate(&p, &d, BlochState::up(), span, &cfg).is_ok());
    }

    #[test]
    fn unphysical_growth_is_reported() {
        // Negative damping pumps the vector out of the ball.
        let mut p = unitary(0.0, 0.0);
        p.dissipator = DissipatorParams::isotropic(-0.1);
        p.relaxation_mode = RelaxationMode::Homogeneous;
        let d = DriveSpec::cosine(1.0, 0.0);
        let span = (0.0, 10.0);
        let cfg = IntegratorConfig::for_drive(&d, span);
        assert!(matches!(
            integrate(&p, &d, BlochState::up(), span, &cfg),
            Err(Error::Unphysical { .. })
        ));
    }

    #[test]
    fn unitary_norm_conserved() {
        let p = unitary(0.12, 0.063);
        let d = DriveSpec::from_hamiltonian(&p.hamiltonian);
        let span = (0.0, 3.0 * d.period().unwrap());
        let traj = integrate(&p, &d, BlochState::down(), span, &IntegratorConfig::for_drive(&d, span)).unwrap();
        let drift = traj.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-8, "drift {drift}");
    }

    #[test]
    fn tighter_tolerance_converges() {
        let p = unitary(0.12, 0.063);
        let d = DriveSpec::from_hamiltonian(&p.hamiltonian);
        let span = (0.0, 200.0);
        let base = IntegratorConfig::for_drive(&d, span);
        let run = |rtol: f64, atol: f64| {
            let cfg = IntegratorConfig { rtol, atol, ..base };
            integrate(&p, &d, BlochState::down(), span, &cfg).unwrap().final_state()
        };
        let reference = run(1e-13, 1e-15);
        let coarse = run(1e-6, 1e-8);
        let fine = run(5e-7, 5e-9);
        let err = |s: BlochState| {
            ((s.x - reference.x).powi(2) + (s.y - reference.y).powi(2) + (s.z - reference.z).powi(2)).sqrt()
        };
        assert!(err(fine) < err(coarse));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn homogeneous_linearity(a in -0.5f64..0.5, b in -0.5f64..0.5, g in 0.0f64..0.05) {
            let p = SystemParams {
                hamiltonian: HamiltonianParams::new(0.1, 0.05),
                dissipator: DissipatorParams::uniaxial(g, 0.5 * g),
                relaxation_mode: RelaxationMode::Homogeneous,
            };
            let d = DriveSpec::from_hamiltonian(&p.hamiltonian);
            let span = (0.0, 150.0);
            let cfg = IntegratorConfig::for_drive(&d, span);
            let u = BlochState::new(0.6, 0.0, 0.8);
            let w = BlochState::new(0.0, 1.0, 0.0);
            let mix = BlochState::new(a * u.x + b * w.x, a * u.y + b * w.y, a * u.z + b * w.z);
            let fu = integrate(&p, &d, u, span, &cfg).unwrap().final_state();
            let fw = integrate(&p, &d, w, span, &cfg).unwrap().final_state();
            let fm = integrate(&p, &d, mix, span, &cfg).unwrap().final_state();
            let tol = 10.0 * cfg.rtol;
            prop_assert!((fm.x - (a * fu.x + b * fw.x)).abs() < tol);
            prop_assert!((fm.y - (a * fu.y + b * fw.y)).abs() < tol);
            prop_assert!((fm.z - (a * fu.z + b * fw.z)).abs() < tol);
        }
    }
}
