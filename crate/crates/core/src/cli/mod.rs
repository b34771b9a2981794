//! `lz-bloch` command line. Exit status: 0 on success, 1 for bad input,
//! configuration or I/O problems, 2 when the integration itself fails.

pub mod presets;
pub mod scenario;
pub mod svg;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::{self, Summary};
use crate::dynamics::{integrate, Trajectory};
use crate::error::{Error, Result};
use crate::export;
use crate::lz;
use crate::model::{cp_audit, thermal_bath, SystemParams};
use crate::spectral::{self, Component, SpectralSample, Window};

use presets::{preset, Plot};
use scenario::Scenario;
use svg::Series;

/// Environment variable capping the worker threads used by `sweep`.
pub const THREADS_ENV: &str = "LZ_BLOCH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "lz-bloch", version, about = "Driven, dissipative two-level systems in Bloch form")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a scenario file and write the outputs it lists.
    Simulate {
        scenario: PathBuf,
        /// Directory for relative output paths (default: current directory).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run a reference parameter set (fig1 .. fig12).
    Figure {
        preset: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Landau-Zener scattering data as CSV `nu,theta,phi,T`.
    Smatrix {
        /// Adiabaticity values, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        nu: Vec<f64>,
        /// Range `lo:hi:n` of nu values.
        #[arg(long)]
        scan: Option<String>,
        /// Space the scan logarithmically.
        #[arg(long)]
        log: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues of the Bloch generator over a range of times.
    Eigen {
        /// Times `lo:hi:n`.
        #[arg(long, allow_hyphen_values = true)]
        scan: String,
        /// Take parameters from a figure preset.
        #[arg(long, conflicts_with = "params")]
        preset: Option<String>,
        /// Take parameters from a TOML file.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Crossing slope; defaults to b0 * omega0.
        #[arg(long)]
        slope: Option<f64>,
        /// Large-time expansion instead of the exact roots.
        #[arg(long)]
        asymptotic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check complete positivity of a dissipator.
    CpCheck {
        /// TOML file with the rate keys, flat or under [system].
        params: Option<PathBuf>,
        /// Thermal bath coupling instead of a file.
        #[arg(long, requires = "thermal_nbar", conflicts_with = "params")]
        thermal_g: Option<f64>,
        #[arg(long, requires = "thermal_g")]
        thermal_nbar: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fourier transform of one component of a trajectory CSV.
    Spectrum {
        trajectory: PathBuf,
        #[arg(long, default_value = "z")]
        component: Component,
        #[arg(long, default_value = "hann")]
        window: Window,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the comparison with the asymptotic form (needs --delta and --slope).
        #[arg(long, requires_all = ["delta", "slope"])]
        overlay: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        slope: Option<f64>,
        /// Comparison band `lo:hi`; defaults to 5 to 20 times delta.
        #[arg(long)]
        band: Option<String>,
    },
    /// Re-run a scenario over a range of one parameter.
    Sweep {
        scenario: PathBuf,
        /// `key=lo:hi:n`; bare keys live in [system], others as `table.key`.
        #[arg(long)]
        vary: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { scenario, out_dir } => simulate(&scenario, out_dir.as_deref()),
        Command::Figure { preset, out } => figure(&preset, &out),
        Command::Smatrix { nu, scan, log, out } => smatrix(nu, scan.as_deref(), log, out.as_deref()),
        Command::Eigen {
            scan,
            preset,
            params,
            slope,
            asymptotic,
            out,
        } => eigen(&scan, preset.as_deref(), params.as_deref(), slope, asymptotic, out.as_deref()),
        Command::CpCheck {
            params,
            thermal_g,
            thermal_nbar,
            out,
        } => cp_check(params.as_deref(), thermal_g.zip(thermal_nbar), out.as_deref()),
        Command::Spectrum {
            trajectory,
            component,
            window,
            out,
            overlay,
            delta,
            slope,
            band,
        } => spectrum(
            &trajectory,
            component,
            window,
            out.as_deref(),
            overlay.as_deref().zip(delta.zip(slope)),
            band.as_deref(),
        ),
        Command::Sweep { scenario, vary, out } => sweep(&scenario, &vary, out.as_deref()),
    }
}

/// Writes through `f` to `path`, or to stdout when `path` is `None`.
fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            let file = File::create(p).map_err(|e| Error::io(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).map_err(|e| with_path(e, p))?;
            w.flush().map_err(|e| Error::io(p, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
            lock.flush().map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn with_path(e: Error, p: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(p, source),
        other => other,
    }
}

/// `lo:hi:n`, inclusive of both ends.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Validation(format!("expected lo:hi:n, got '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

fn parse_band(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::Validation(format!("expected lo:hi, got '{s}'"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo) {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub fn run_scenario(s: &Scenario) -> Result<Trajectory> {
    integrate(&s.system, &s.drive, s.initial, s.t_span, &s.integrator)
}

/// Spacing and length of the uniformly sampled leading part of `times`. A
/// final sample that falls short of the grid is left out.
fn uniform_prefix(times: &[f64]) -> Result<(f64, usize)> {
    if times.len() < 2 {
        return Err(Error::Validation("need at least two samples".into()));
    }
    let dt = times[1] - times[0];
    let on_grid = |i: usize| ((times[i] - times[0]) - i as f64 * dt).abs() <= 1e-6 * dt;
    let n = times.len();
    if (0..n - 1).all(on_grid) {
        Ok((dt, if on_grid(n - 1) { n } else { n - 1 }))
    } else {
        Err(Error::Validation("samples are not uniformly spaced".into()))
    }
}

fn z_spectrum(traj: &Trajectory, window: Window) -> Result<Vec<SpectralSample>> {
    let (dt, n) = uniform_prefix(&traj.times)?;
    spectral::spectrum(traj.times[0], dt, &traj.z()[..n], window)
}

fn time_series(traj: &Trajectory, plot: Plot) -> Result<Vec<Series>> {
    let t = &traj.times;
    let zip = |label: &str, v: Vec<f64>| Series {
        label: label.into(),
        points: t.iter().copied().zip(v).collect(),
    };
    Ok(match plot {
        Plot::Components => vec![zip("X", traj.x()), zip("Y", traj.y()), zip("Z", traj.z())],
        Plot::Z => vec![zip("Z", traj.z())],
        Plot::Loops { max_cycles } => {
            let loops = analysis::hysteresis(traj)?;
            loops
                .into_iter()
                .take(max_cycles.unwrap_or(usize::MAX))
                .map(|l| Series {
                    label: format!("cycle {}", l.cycle_index + 1),
                    points: l.points,
                })
                .collect()
        }
    })
}

fn chart(title: &str, traj: &Trajectory, plot: Plot) -> Result<String> {
    let series = time_series(traj, plot)?;
    let (x, y) = match plot {
        Plot::Components => ("t", "Bloch components"),
        Plot::Z => ("t", "Z"),
        Plot::Loops { .. } => ("omega0", "Z"),
    };
    Ok(svg::line_chart(title, x, y, &series))
}

/// Per-cycle tables need a periodic drive with at least one full cycle;
/// areas and asymmetries need two.
fn write_stats(path: &Path, traj: &Trajectory) -> Result<()> {
    let stats = analysis::cycle_stats(traj)?;
    let areas: Vec<f64> = analysis::hysteresis(traj)
        .map(|l| l.iter().map(|l| l.normalized_area).collect())
        .unwrap_or_default();
    let asym = analysis::pulse_asymmetry(traj).unwrap_or_default();
    emit(Some(path), |w| export::write_stats(w, &stats, &areas, &asym))
}

fn print_summary(first_col: &str, key: &str, s: &Summary) -> Result<()> {
    emit(None, |w| export::write_summaries(w, first_col, &[(key.to_string(), *s)]))
}

fn simulate(path: &Path, out_dir: Option<&Path>) -> Result<()> {
    let s = Scenario::from_file(path)?;
    let outputs = s.outputs.resolved(out_dir.unwrap_or(Path::new(".")));
    let traj = run_scenario(&s)?;
    if let Some(p) = &outputs.trajectory_csv {
        emit(Some(p), |w| export::write_trajectory(w, &traj))?;
    }
    if let Some(p) = &outputs.events_csv {
        emit(Some(p), |w| export::write_events(w, &traj.events))?;
    }
    if let Some(p) = &outputs.loop_csv {
        let loops = analysis::hysteresis(&traj)?;
        emit(Some(p), |w| export::write_loops(w, &loops))?;
    }
    if let Some(p) = &outputs.stats_csv {
        write_stats(p, &traj)?;
    }
    if let Some(p) = &outputs.spectrum_csv {
        let spec = z_spectrum(&traj, Window::Hann)?;
        emit(Some(p), |w| export::write_spectrum(w, &spec))?;
    }
    if let Some(p) = &outputs.svg_plot {
        let text = chart(&s.name, &traj, Plot::Z)?;
        emit(Some(p), |w| w.write_all(text.as_bytes()).map_err(|e| Error::io(p, e)))?;
    }
    print_summary("name", &s.name, &analysis::summarize(&traj))
}

fn figure(id: &str, out: &Path) -> Result<()> {
    let p = preset(id)?;
    let traj = run_scenario(&p.scenario())?;
    let file = |suffix: &str| out.join(format!("{}{suffix}", p.id));
    emit(Some(&file("_trajectory.csv")), |w| export::write_trajectory(w, &traj))?;
    emit(Some(&file("_events.csv")), |w| export::write_events(w, &traj.events))?;
    write_stats(&file("_stats.csv"), &traj)?;
    let loops = analysis::hysteresis(&traj)?;
    emit(Some(&file("_loops.csv")), |w| export::write_loops(w, &loops))?;
    let svg_path = file(".svg");
    let text = chart(p.title, &traj, p.plot)?;
    emit(Some(&svg_path), |w| w.write_all(text.as_bytes()).map_err(|e| Error::io(&svg_path, e)))?;
    print_summary("preset", p.id, &analysis::summarize(&traj))
}

fn smatrix(mut nu: Vec<f64>, scan: Option<&str>, log: bool, out: Option<&Path>) -> Result<()> {
    if let Some(s) = scan {
        let range = parse_range(s)?;
        if log {
            let (lo, hi) = (range[0], range[range.len() - 1]);
            if !(lo > 0.0 && hi > 0.0) {
                return Err(Error::Validation("a logarithmic scan needs positive bounds".into()));
            }
            let n = range.len();
            nu.extend((0..n).map(|i| {
                let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                (lo.ln() + f * (hi.ln() - lo.ln())).exp()
            }));
        } else {
            nu.extend(range);
        }
    }
    if nu.is_empty() {
        return Err(Error::Validation("give --nu values or --scan lo:hi:n".into()));
    }
    let rows = nu.iter().map(|&v| lz::s_matrix(v)).collect::<Result<Vec<_>>>()?;
    emit(out, |w| export::write_scattering(w, &rows))
}

fn params_from(preset_id: Option<&str>, file: Option<&Path>) -> Result<SystemParams> {
    match (preset_id, file) {
        (Some(id), _) => Ok(preset(id)?.params),
        (None, Some(path)) => scenario::system_from_table(scenario::read_table(path)?),
        (None, None) => Err(Error::Validation("give --preset or --params".into())),
    }
}

fn eigen(
    scan: &str,
    preset_id: Option<&str>,
    params: Option<&Path>,
    slope: Option<f64>,
    asymptotic: bool,
    out: Option<&Path>,
) -> Result<()> {
    let p = params_from(preset_id, params)?;
    let slope = slope.unwrap_or_else(|| p.hamiltonian.slope());
    if !(slope > 0.0 && slope.is_finite()) {
        return Err(Error::Validation(format!("slope must be > 0, got {slope}")));
    }
    let rows = parse_range(scan)?
        .into_iter()
        .map(|t| {
            let e = if asymptotic {
                lz::eigenvalues_asymptotic(t, &p, slope)?
            } else {
                lz::eigenvalues_exact(t, &p, slope)
            };
            Ok((t, e))
        })
        .collect::<Result<Vec<_>>>()?;
    emit(out, |w| export::write_eigen(w, &rows))
}

fn cp_check(params: Option<&Path>, thermal: Option<(f64, f64)>, out: Option<&Path>) -> Result<()> {
    let d = match (params, thermal) {
        (_, Some((g, n))) => thermal_bath(g, n)?,
        (Some(path), None) => scenario::system_from_table(scenario::read_table(path)?)?.dissipator,
        (None, None) => {
            return Err(Error::Validation(
                "give a parameter file or --thermal-g and --thermal-nbar".into(),
            ))
        }
    };
    let report = cp_audit(&d);
    emit(out, |w| export::write_cp_report(w, &report))?;
    if report.pass {
        Ok(())
    } else {
        let worst = report.worst().map(|c| c.id).unwrap_or("?");
        Err(Error::Validation(format!("dissipator is not completely positive (worst: {worst})")))
    }
}

fn spectrum(
    path: &Path,
    component: Component,
    window: Window,
    out: Option<&Path>,
    overlay: Option<(&Path, (f64, f64))>,
    band: Option<&str>,
) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let table = export::read_trajectory(std::io::BufReader::new(file))?;
    let (dt, n) = uniform_prefix(&table.times)?;
    let values: Vec<f64> = table.states[..n]
        .iter()
        .map(|s| match component {
            Component::X => s.x,
            Component::Y => s.y,
            Component::Z => s.z,
        })
        .collect();
    let spec = spectral::spectrum(table.times[0], dt, &values, window)?;
    emit(out, |w| export::write_spectrum(w, &spec))?;
    if let Some((overlay_path, (delta, slope))) = overlay {
        if component != Component::Z {
            return Err(Error::Validation("the asymptotic overlay is defined for Z only".into()));
        }
        let band = match band {
            Some(b) => parse_band(b)?,
            None => (5.0 * delta, 20.0 * delta),
        };
        let cmp = spectral::compare_z_envelope(&spec, delta, slope, band)?;
        emit(Some(overlay_path), |w| export::write_overlay(w, &cmp))?;
        eprintln!(
            "envelope exponent {:.4}, scale {:.4e}, envelope rms {:.4}, pointwise rms {:.4}",
            cmp.exponent, cmp.scale, cmp.envelope_rms, cmp.pointwise_rms
        );
    }
    Ok(())
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|n| *n > 0)
}

/// Summaries of `base` with `key` set to each value, in input order.
pub fn sweep_summaries(base: &toml::Table, key: &str, values: &[f64]) -> Result<Vec<Summary>> {
    let point = |v: f64| -> Result<Summary> {
        let mut table = base.clone();
        scenario::set_key(&mut table, key, v)?;
        let s = Scenario::from_table(table)?;
        Ok(analysis::summarize(&run_scenario(&s)?))
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| values.par_iter().map(|&v| point(v)).collect())
}

fn sweep(path: &Path, vary: &str, out: Option<&Path>) -> Result<()> {
    let (key, range) = vary
        .split_once('=')
        .ok_or_else(|| Error::Validation(format!("expected key=lo:hi:n, got '{vary}'")))?;
    let key = key.trim();
    let values = parse_range(range)?;
    let base = scenario::read_table(path)?;
    let summaries = sweep_summaries(&base, key, &values)?;
    let rows: Vec<(String, Summary)> = values
        .iter()
        .zip(summaries)
        .map(|(v, s)| (export::fmt_f64(*v), s))
        .collect();
    emit(out, |w| export::write_summaries(w, key, &rows))
}
