//! Scenario files: TOML with `[system]`, `[drive]`, `[integrator]` and
//! `[outputs]` tables. Unknown keys are rejected.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dynamics::{DriveSpec, IntegratorConfig};
use crate::error::{Error, Result};
use crate::model::{BlochState, DissipatorParams, HamiltonianParams, RelaxationMode, SystemParams};

/// Drive periods simulated when a cosine scenario gives no `t_span`.
pub const DEFAULT_PERIODS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub system: SystemParams,
    pub drive: DriveSpec,
    pub initial: BlochState,
    pub t_span: (f64, f64),
    pub integrator: IntegratorConfig,
    pub outputs: Outputs,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub trajectory_csv: Option<PathBuf>,
    pub events_csv: Option<PathBuf>,
    pub loop_csv: Option<PathBuf>,
    pub stats_csv: Option<PathBuf>,
    pub spectrum_csv: Option<PathBuf>,
    pub svg_plot: Option<PathBuf>,
}

impl Outputs {
    pub fn paths(&self) -> Vec<&PathBuf> {
        [
            &self.trajectory_csv,
            &self.events_csv,
            &self.loop_csv,
            &self.stats_csv,
            &self.spectrum_csv,
            &self.svg_plot,
        ]
        .into_iter()
        .flatten()
        .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for p in self.paths() {
            if !seen.insert(p) {
                return Err(Error::Config(format!(
                    "output path {} is used more than once",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    /// Relative paths are taken relative to `dir`.
    pub fn resolved(&self, dir: &Path) -> Outputs {
        let r = |p: &Option<PathBuf>| p.as_ref().map(|p| dir.join(p));
        Outputs {
            trajectory_csv: r(&self.trajectory_csv),
            events_csv: r(&self.events_csv),
            loop_csv: r(&self.loop_csv),
            stats_csv: r(&self.stats_csv),
            spectrum_csv: r(&self.spectrum_csv),
            svg_plot: r(&self.svg_plot),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    initial: Option<[f64; 3]>,
    t_span: Option<[f64; 2]>,
    periods: Option<f64>,
    system: SystemSection,
    drive: Option<DriveSection>,
    integrator: Option<IntegratorSection>,
    #[serde(default)]
    outputs: Outputs,
}

/// Flat parameter keys, shared by scenario files and `cp-check` inputs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub delta: f64,
    #[serde(default)]
    pub delta_prime: f64,
    #[serde(default = "one")]
    pub b0: f64,
    #[serde(default)]
    pub omega0: f64,
    #[serde(default)]
    pub gamma1: f64,
    #[serde(default)]
    pub gamma2: f64,
    #[serde(default)]
    pub gamma3: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub gamma_sym: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default)]
    pub c3: f64,
    #[serde(default)]
    pub relaxation_mode: Option<String>,
}

fn one() -> f64 {
    1.0
}

impl SystemSection {
    pub fn to_params(&self) -> Result<SystemParams> {
        let relaxation_mode = match &self.relaxation_mode {
            Some(s) => s.parse::<RelaxationMode>()?,
            None => RelaxationMode::None,
        };
        let p = SystemParams {
            hamiltonian: HamiltonianParams {
                delta: self.delta,
                delta_prime: self.delta_prime,
                b0: self.b0,
                omega0_freq: self.omega0,
            },
            dissipator: DissipatorParams {
                gamma1: self.gamma1,
                gamma2: self.gamma2,
                gamma3: self.gamma3,
                alpha: self.alpha,
                beta: self.beta,
                gamma_sym: self.gamma_sym,
                c1: self.c1,
                c2: self.c2,
                c3: self.c3,
            },
            relaxation_mode,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveSection {
    #[serde(default = "cosine_kind")]
    kind: String,
    slope: Option<f64>,
    t_start: Option<f64>,
    t_end: Option<f64>,
}

fn cosine_kind() -> String {
    "cosine".into()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegratorSection {
    rtol: Option<f64>,
    atol: Option<f64>,
    dt_max: Option<f64>,
    dt_init: Option<f64>,
    sample_dt: Option<f64>,
    max_steps: Option<usize>,
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

pub fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(config_error)
}

pub fn read_table(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Parameters from a file holding either a `[system]` table or the keys at top level.
pub fn system_from_table(table: toml::Table) -> Result<SystemParams> {
    let inner = match table.get("system") {
        Some(toml::Value::Table(t)) if table.len() == 1 => t.clone(),
        Some(_) => return Err(Error::Config("expected only a [system] table".into())),
        None => table,
    };
    let section: SystemSection = toml::Value::Table(inner).try_into().map_err(config_error)?;
    section.to_params()
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        Self::from_table(parse_table(text)?)
    }
}

impl Scenario {
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_table(read_table(path)?)
            .map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
                other => other,
            })
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let file: ScenarioFile = toml::Value::Table(table).try_into().map_err(config_error)?;
        let system = file.system.to_params()?;
        let h = system.hamiltonian;

        let drive_section = file.drive.unwrap_or(DriveSection {
            kind: cosine_kind(),
            slope: None,
            t_start: None,
            t_end: None,
        });
        let drive = match drive_section.kind.as_str() {
            "cosine" => {
                if drive_section.slope.is_some()
                    || drive_section.t_start.is_some()
                    || drive_section.t_end.is_some()
                {
                    return Err(Error::Config(
                        "a cosine drive takes b0 and omega0 from [system]; slope, t_start and t_end apply to linear_sweep".into(),
                    ));
                }
                DriveSpec::from_hamiltonian(&h)
            }
            "linear_sweep" => {
                let need = |v: Option<f64>, key: &str| {
                    v.ok_or_else(|| Error::Config(format!("linear_sweep drive needs '{key}'")))
                };
                DriveSpec::linear_sweep(
                    need(drive_section.slope, "slope")?,
                    need(drive_section.t_start, "t_start")?,
                    need(drive_section.t_end, "t_end")?,
                )
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown drive kind '{other}' (expected cosine or linear_sweep)"
                )))
            }
        };
        drive.validate()?;

        let t_span = match (file.t_span, file.periods, drive) {
            (Some(_), Some(_), _) => {
                return Err(Error::Config("give either t_span or periods, not both".into()))
            }
            (Some([a, b]), None, _) => (a, b),
            (None, periods, DriveSpec::Cosine { .. }) => {
                let period = drive.period().ok_or_else(|| {
                    Error::Config("a static bias (omega0 = 0 or b0 = 0) needs an explicit t_span".into())
                })?;
                (0.0, periods.unwrap_or(DEFAULT_PERIODS) * period)
            }
            (None, None, DriveSpec::LinearSweep { t_start, t_end, .. }) => (t_start, t_end),
            (None, Some(_), DriveSpec::LinearSweep { .. }) => {
                return Err(Error::Config("periods needs a cosine drive".into()))
            }
        };
        if !(t_span.0.is_finite() && t_span.1.is_finite() && t_span.0 < t_span.1) {
            return Err(Error::Validation(format!(
                "t_span must satisfy t0 < t1, got [{}, {}]",
                t_span.0, t_span.1
            )));
        }

        let mut integrator = IntegratorConfig::for_drive(&drive, t_span);
        if let Some(s) = file.integrator {
            if let Some(dt_max) = s.dt_max {
                integrator.dt_max = dt_max;
                integrator.dt_init = dt_max / 100.0;
                integrator.sample_dt = dt_max / 10.0;
            }
            integrator.rtol = s.rtol.unwrap_or(integrator.rtol);
            integrator.atol = s.atol.unwrap_or(integrator.atol);
            integrator.dt_init = s.dt_init.unwrap_or(integrator.dt_init);
            integrator.sample_dt = s.sample_dt.unwrap_or(integrator.sample_dt);
            integrator.max_steps = s.max_steps.unwrap_or(integrator.max_steps);
        }
        integrator.validate()?;

        let initial = BlochState::from_array(file.initial.unwrap_or([0.0, 0.0, -1.0]));
        if !initial.is_physical(crate::model::PHYSICAL_TOL) {
            return Err(Error::Validation(format!(
                "initial state has |v| = {} > 1",
                initial.norm()
            )));
        }
        file.outputs.validate()?;

        Ok(Scenario {
            name: file.name.unwrap_or_else(|| "scenario".into()),
            system,
            drive,
            initial,
            t_span,
            integrator,
            outputs: file.outputs,
        })
    }
}

/// Sets `key` (a bare `[system]` key or a dotted `table.key` path) to `value`.
pub fn set_key(table: &mut toml::Table, key: &str, value: f64) -> Result<()> {
    let (section, name) = key.split_once('.').unwrap_or(("system", key));
    let target = table
        .entry(section)
        .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        .as_table_mut()
        .ok_or_else(|| Error::Config(format!("'{section}' is not a table")))?;
    target.insert(name.to_string(), toml::Value::Float(value));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    const MINIMAL: &str = "[system]\ndelta = 0.12\nomega0 = 0.063\n";

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::from_str(MINIMAL).unwrap();
        let period = 2.0 * std::f64::consts::PI / 0.063;
        assert!((s.t_span.1 - 10.0 * period).abs() < 1e-9);
        assert_eq!(s.initial, BlochState::down());
        assert_eq!(s.system.hamiltonian.b0, 1.0);
        assert_eq!(s.system.relaxation_mode, RelaxationMode::None);
        assert!((s.integrator.sample_dt - period / 2000.0).abs() < 1e-12);
    }

    #[test]
    fn full_file() {
        let text = r#"
name = "sweep"
initial = [0.0, 0.0, 1.0]
[system]
delta = 0.4
relaxation_mode = "homogeneous"
gamma1 = 0.01
gamma2 = 0.01
[drive]
kind = "linear_sweep"
slope = 1.0
t_start = -50.0
t_end = 50.0
[integrator]
rtol = 1e-8
dt_max = 0.5
[outputs]
trajectory_csv = "a.csv"
svg_plot = "a.svg"
"#;
        let s = Scenario::from_str(text).unwrap();
        assert_eq!(s.t_span, (-50.0, 50.0));
        assert_eq!(s.integrator.rtol, 1e-8);
        assert_eq!(s.integrator.sample_dt, 0.05);
        assert_eq!(s.outputs.paths().len(), 2);
    }

    #[test]
    fn rejects_unknown_and_inconsistent_keys() {
        assert!(matches!(
            Scenario::from_str("[system]\ndelta = 0.1\nomega0 = 0.1\ngama = 1\n"),
            Err(Error::Config(_))
        ));
        assert!(Scenario::from_str("[system]\ndelta = 0.1\nomega0 = 0.1\n[drive]\nslope = 1\n").is_err());
        assert!(Scenario::from_str("[system]\ndelta = 0.1\n").is_err());
        assert!(Scenario::from_str("[system]\ndelta = 0.1\nomega0 = 0.1\nrelaxation_mode = \"x\"\n").is_err());
        assert!(Scenario::from_str("initial = [0, 0, 2.0]\n[system]\ndelta = 0.1\nomega0 = 0.1\n").is_err());
    }

    #[test]
    fn rejects_duplicate_outputs() {
        let text = format!("{MINIMAL}[outputs]\ntrajectory_csv = \"x.csv\"\nloop_csv = \"x.csv\"\n");
        assert!(matches!(Scenario::from_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn set_key_paths() {
        let mut t = parse_table(MINIMAL).unwrap();
        set_key(&mut t, "delta", 0.2).unwrap();
        set_key(&mut t, "integrator.rtol", 1e-7).unwrap();
        let s = Scenario::from_table(t).unwrap();
        assert_eq!(s.system.hamiltonian.delta, 0.2);
        assert_eq!(s.integrator.rtol, 1e-7);
    }

    #[test]
    fn system_file_flat_or_nested() {
        let flat = system_from_table(parse_table("delta = 0.1\ngamma1 = 0.2\n").unwrap()).unwrap();
        let nested = system_from_table(parse_table("[system]\ndelta = 0.1\ngamma1 = 0.2\n").unwrap()).unwrap();
        assert_eq!(flat, nested);
    }
}
