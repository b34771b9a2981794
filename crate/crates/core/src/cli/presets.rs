//! Parameter sets of the reference figures. All use `b0 = 1`.

use crate::dynamics::{DriveSpec, IntegratorConfig};
use crate::error::{Error, Result};
use crate::model::{BlochState, DissipatorParams, HamiltonianParams, RelaxationMode, SystemParams};

use super::scenario::{Outputs, Scenario, DEFAULT_PERIODS};

/// What the figure's SVG shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plot {
    /// `X`, `Y` and `Z` against time.
    Components,
    /// `Z` against time.
    Z,
    /// `Z` against `omega0`, one polyline per cycle; `max_cycles` limits the count.
    Loops { max_cycles: Option<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub id: &'static str,
    pub title: &'static str,
    pub params: SystemParams,
    pub initial: BlochState,
    pub periods: f64,
    pub plot: Plot,
}

pub const PRESET_IDS: [&str; 12] = [
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12",
];

fn system(delta: f64, omega0: f64, damping: Option<(f64, f64, RelaxationMode)>) -> SystemParams {
    let hamiltonian = HamiltonianParams::new(delta, omega0);
    match damping {
        None => SystemParams::unitary(hamiltonian),
        Some((gamma_r, gamma, mode)) => SystemParams {
            hamiltonian,
            dissipator: DissipatorParams::uniaxial(gamma_r, gamma),
            relaxation_mode: mode,
        },
    }
}

pub fn preset(id: &str) -> Result<Preset> {
    use RelaxationMode::{Homogeneous, SignFollowing};
    let up = BlochState::up();
    let down = BlochState::down();
    let loops = Plot::Loops { max_cycles: None };
    let (title, params, initial, periods, plot) = match id {
        "fig1" => ("Unitary trajectory, slow drive", system(0.01, 0.02, None), up, 2.0, Plot::Components),
        "fig2" => ("Inversion through three kinks", system(0.12, 0.063, None), down, DEFAULT_PERIODS, Plot::Z),
        "fig3" => ("Symmetry-broken magnetization", system(0.12, 0.0682, None), down, DEFAULT_PERIODS, Plot::Z),
        "fig4" => ("Symmetry-broken trajectory", system(0.12, 0.0682, None), down, DEFAULT_PERIODS, Plot::Components),
        "fig5" => ("Z against bias, unitary", system(0.12, 0.0682, None), down, DEFAULT_PERIODS, loops),
        "fig6" => (
            "Z against bias over one cycle, transverse damping",
            system(0.3, 0.033, Some((0.01, 0.0, Homogeneous))),
            up,
            DEFAULT_PERIODS,
            Plot::Loops { max_cycles: Some(1) },
        ),
        "fig7" => (
            "Magnetization with transverse damping",
            system(0.12, 0.0682, Some((0.01, 0.0, Homogeneous))),
            down,
            DEFAULT_PERIODS,
            Plot::Z,
        ),
        "fig8" => (
            "Approach to the hysteretic limit cycle",
            system(0.05, 0.02, Some((0.035, 0.07, SignFollowing))),
            down,
            DEFAULT_PERIODS,
            loops,
        ),
        "fig9" => (
            "Asymmetric magnetization pulses",
            system(0.05, 0.02, Some((0.035, 0.07, SignFollowing))),
            down,
            DEFAULT_PERIODS,
            Plot::Z,
        ),
        "fig10" => (
            "Hysteresis with weak relaxation",
            system(0.05, 0.02, Some((0.01, 0.02, SignFollowing))),
            down,
            DEFAULT_PERIODS,
            loops,
        ),
        "fig11" => (
            "Magnetization with relaxation to the lower level",
            system(0.12, 0.0682, Some((0.01, 0.02, SignFollowing))),
            down,
            DEFAULT_PERIODS,
            Plot::Z,
        ),
        "fig12" => (
            "Limit cycle with relaxation to the lower level",
            system(0.12, 0.0682, Some((0.01, 0.02, SignFollowing))),
            down,
            DEFAULT_PERIODS,
            loops,
        ),
        other => {
            return Err(Error::Validation(format!(
                "unknown preset '{other}' (expected one of {})",
                PRESET_IDS.join(", ")
            )))
        }
    };
    let id = PRESET_IDS.iter().find(|p| **p == id).copied().unwrap_or("preset");
    Ok(Preset {
        id,
        title,
        params,
        initial,
        periods,
        plot,
    })
}

impl Preset {
    pub fn drive(&self) -> DriveSpec {
        DriveSpec::from_hamiltonian(&self.params.hamiltonian)
    }

    pub fn t_span(&self) -> (f64, f64) {
        let period = self.drive().period().unwrap_or(1.0);
        (0.0, self.periods * period)
    }

    pub fn scenario(&self) -> Scenario {
        let drive = self.drive();
        let t_span = self.t_span();
        Scenario {
            name: self.id.to_string(),
            system: self.params,
            drive,
            initial: self.initial,
            t_span,
            integrator: IntegratorConfig::for_drive(&drive, t_span),
            outputs: Outputs::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_are_valid() {
        for id in PRESET_IDS {
            let p = preset(id).unwrap();
            assert_eq!(p.id, id);
            p.params.validate().unwrap();
            assert_eq!(p.params.hamiltonian.b0, 1.0);
        }
        assert!(preset("fig13").is_err());
    }

    #[test]
    fn spans() {
        let p = preset("fig2").unwrap();
        let period = 2.0 * std::f64::consts::PI / 0.063;
        assert!((p.t_span().1 - 10.0 * period).abs() < 1e-9);
        assert!((preset("fig1").unwrap().t_span().1 - 2.0 * 2.0 * std::f64::consts::PI / 0.02).abs() < 1e-9);
    }
}
